//! Gray-coded 2-bit magnitude quantization and key-rate metrics.

use crate::error::{check_len, Error, Result};

/// Default cap on the information estimate when |ρ̂| reaches 1.
pub const DEFAULT_INFO_CAP_BITS: f64 = 10.0;

/// Gray code for levels 0..=3: adjacent levels differ in exactly one bit.
pub const GRAY2: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 1], [1, 0]];

/// Three strictly increasing cut points separating four quantization levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds([f64; 3]);

impl Thresholds {
    pub fn new(cuts: [f64; 3]) -> Result<Self> {
        if cuts.iter().any(|c| !c.is_finite()) || !(cuts[0] < cuts[1] && cuts[1] < cuts[2]) {
            return Err(Error::InvalidThresholds(format!("{cuts:?} must be finite and strictly increasing")));
        }
        Ok(Thresholds(cuts))
    }

    pub fn cuts(&self) -> [f64; 3] {
        self.0
    }

    /// Index of the level `v` falls into; values on a cut go to the lower level.
    pub fn level(&self, v: f64) -> usize {
        self.0.iter().filter(|c| v > **c).count()
    }
}

/// Linearly interpolated percentile (h = (n−1)p) of an already sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical 25/50/75 % cut points of a measurement block.
pub fn compute_thresholds(values: &[f64]) -> Result<Thresholds> {
    if values.len() < 4 {
        return Err(Error::InvalidThresholds(format!("need at least 4 samples, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidThresholds("non-finite sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Thresholds::new([0.25, 0.5, 0.75].map(|p| percentile(&sorted, p)))
}

/// Ordered key bits, two per quantized sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
    samples: usize,
}

impl BitStream {
    pub fn new(bits: Vec<u8>, samples: usize) -> Result<Self> {
        if bits.len() != 2 * samples {
            return Err(Error::LengthMismatch { expected: 2 * samples, actual: bits.len() });
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::InvalidInput("bits must be 0 or 1".into()));
        }
        Ok(BitStream { bits, samples })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn symbols(&self) -> impl Iterator<Item = [u8; 2]> + '_ {
        self.bits.chunks_exact(2).map(|c| [c[0], c[1]])
    }
}

pub fn quantize_gray2(magnitudes: &[f64], thresholds: &Thresholds) -> BitStream {
    let bits = magnitudes.iter().flat_map(|v| GRAY2[thresholds.level(*v)]).collect();
    BitStream { bits, samples: magnitudes.len() }
}

/// Fraction of differing bit positions.
pub fn kdr(a: &BitStream, b: &BitStream) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Empty);
    }
    Ok(mismatches(a, b) as f64 / a.len() as f64)
}

fn mismatches(a: &BitStream, b: &BitStream) -> usize {
    a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyMetrics {
    /// agreeing bits per subcarrier use
    pub csk_bits: f64,
    /// −log₂(1 − ρ̂²) per subcarrier use
    pub csk_info: f64,
    /// set when |ρ̂| ≥ 1 and `csk_info` was replaced by the cap
    pub info_capped: bool,
    pub kdr: f64,
    pub samples_used: usize,
}

pub fn csk(rho_hat: f64, a: &BitStream, b: &BitStream, subcarriers_used: usize) -> Result<KeyMetrics> {
    csk_with_cap(rho_hat, a, b, subcarriers_used, DEFAULT_INFO_CAP_BITS)
}

pub fn csk_with_cap(
    rho_hat: f64,
    a: &BitStream,
    b: &BitStream,
    subcarriers_used: usize,
    cap_bits: f64,
) -> Result<KeyMetrics> {
    if subcarriers_used == 0 {
        return Err(Error::InvalidInput("subcarriers_used must be positive".into()));
    }
    if !rho_hat.is_finite() {
        return Err(Error::InvalidInput(format!("correlation {rho_hat} is not finite")));
    }
    let kdr = kdr(a, b)?;
    let agree = a.len() - mismatches(a, b);
    let (csk_info, info_capped) = if rho_hat.abs() >= 1.0 {
        (cap_bits, true)
    } else {
        let v = -(1.0 - rho_hat * rho_hat).log2();
        (v.min(cap_bits), v > cap_bits)
    };
    Ok(KeyMetrics {
        csk_bits: agree as f64 / subcarriers_used as f64,
        csk_info,
        info_capped,
        kdr,
        samples_used: subcarriers_used,
    })
}
