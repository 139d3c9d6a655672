//! OFDM pilots, per-subcarrier probing and least-squares channel estimation.
//!
//! The simulation runs in the frequency domain: the cyclic prefix makes every
//! subcarrier see a multiplicative channel, so no time-domain samples are
//! generated and `cp_length` is carried for completeness only.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::csi::{Band, CsiVector};
use crate::error::{check_len, Error, Result};
use crate::fading::{add_awgn, Snr};
use crate::stream::StreamId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    pub symbol_length: usize,
    pub subcarrier_spacing_hz: f64,
    pub bandwidth_hz: f64,
    pub carrier_band1_hz: f64,
    pub carrier_band2_hz: f64,
    pub modulation: Modulation,
    pub cp_length: usize,
    pub pilot_interval: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            symbol_length: 64,
            subcarrier_spacing_hz: 15e3,
            bandwidth_hz: 20e6,
            carrier_band1_hz: 1.82e9,
            carrier_band2_hz: 1.84e9,
            modulation: Modulation::Qpsk,
            cp_length: 16,
            pilot_interval: 5,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.symbol_length == 0 {
            return Err(Error::InvalidOfdm("symbol_length must be positive".into()));
        }
        if self.cp_length >= self.symbol_length {
            return Err(Error::InvalidOfdm(format!(
                "cp_length {} must be shorter than symbol_length {}",
                self.cp_length, self.symbol_length
            )));
        }
        if self.pilot_interval == 0 {
            return Err(Error::InvalidOfdm("pilot_interval must be at least 1".into()));
        }
        if !(self.subcarrier_spacing_hz.is_finite() && self.subcarrier_spacing_hz > 0.0) {
            return Err(Error::InvalidOfdm("subcarrier spacing must be positive".into()));
        }
        Ok(())
    }

    /// Pilot subcarriers {0, p, 2p, …} below `symbol_length`.
    pub fn pilot_positions(&self) -> Vec<usize> {
        (0..self.symbol_length).step_by(self.pilot_interval.max(1)).collect()
    }

    /// Baseband frequency offset of every subcarrier.
    pub fn subcarrier_freqs(&self) -> Vec<f64> {
        (0..self.symbol_length).map(|k| k as f64 * self.subcarrier_spacing_hz).collect()
    }

    pub fn carrier_hz(&self, band: Band) -> f64 {
        match band {
            Band::One => self.carrier_band1_hz,
            Band::Two => self.carrier_band2_hz,
        }
    }
}

/// Known pilot symbols s = diag(s_1, …, s_L).
#[derive(Debug, Clone, PartialEq)]
pub struct Pilot(Vec<Complex64>);

impl Pilot {
    pub fn new(symbols: Vec<Complex64>) -> Self {
        Pilot(symbols)
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn generate_pilot(config: &OfdmConfig, stream: StreamId) -> Pilot {
    let mut rng = stream.rng();
    let symbols = (0..config.symbol_length)
        .map(|_| {
            let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            Complex64::new(re, im)
        })
        .collect();
    Pilot(symbols)
}

/// y_k = fp_k · (direct_k + cascaded_k) · x_k + n_k.
///
/// `transmitted` is normally the pilot; the loop-back steps pass the
/// re-modulated estimate instead.
pub fn probe(
    transmitted: &[Complex64],
    direct: &CsiVector,
    cascaded: &CsiVector,
    fp: &CsiVector,
    snr: Snr,
    stream: StreamId,
) -> Result<Vec<Complex64>> {
    let n = transmitted.len();
    check_len(n, direct.len())?;
    check_len(n, cascaded.len())?;
    check_len(n, fp.len())?;
    let clean: Vec<Complex64> = (0..n)
        .map(|k| fp[k] * (direct[k] + cascaded[k]) * transmitted[k])
        .collect();
    add_awgn(&clean, snr, stream)
}

/// LS estimate at pilot subcarriers, linear interpolation in between and
/// nearest-pilot extension past the last pilot.
pub fn ls_estimate(received: &[Complex64], pilot: &Pilot, config: &OfdmConfig) -> Result<CsiVector> {
    check_len(config.symbol_length, received.len())?;
    check_len(config.symbol_length, pilot.len())?;
    let positions = config.pilot_positions();
    let mut at_pilots = Vec::with_capacity(positions.len());
    for &k in &positions {
        let s = pilot.0[k];
        if s.norm_sqr() == 0.0 {
            return Err(Error::InvalidInput(format!("zero pilot symbol at subcarrier {k}")));
        }
        at_pilots.push(received[k] / s);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); config.symbol_length];
    for (i, &k) in positions.iter().enumerate() {
        out[k] = at_pilots[i];
        match positions.get(i + 1) {
            Some(&next) => {
                let span = (next - k) as f64;
                for (j, slot) in out.iter_mut().enumerate().take(next).skip(k + 1) {
                    let w = (j - k) as f64 / span;
                    *slot = at_pilots[i] * (1.0 - w) + at_pilots[i + 1] * w;
                }
            }
            None => {
                for slot in out.iter_mut().skip(k + 1) {
                    *slot = at_pilots[i];
                }
            }
        }
    }
    Ok(CsiVector::new(out))
}
