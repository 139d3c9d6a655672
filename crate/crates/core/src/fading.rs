//! Tapped-delay-line fading, hardware fingerprints and AWGN.
//!
//! Tap gains follow a Gaussian-weighted sum of sinusoids:
//!
//!   g_l(t) = Σ_m A_{l,m} · exp(j 2π f_d cos(α_{l,m}) t),   A_{l,m} ~ CN(0, P_l / M)
//!
//! so every g_l(t) is exactly CN(0, P_l) at any instant, the Doppler spectrum
//! is Jakes-shaped, and with f_d = 0 the gains are constant.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::csi::CsiVector;
use crate::error::{Error, Result};
use crate::stream::StreamId;

const OSCILLATORS_PER_TAP: usize = 32;

/// Delay/power description of a multipath channel or fingerprint filter.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    delays_ms: Vec<f64>,
    powers_db: Vec<f64>,
}

impl TapProfile {
    pub fn new(delays_ms: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        if delays_ms.is_empty() {
            return Err(Error::InvalidProfile("profile must have at least one tap".into()));
        }
        if delays_ms.len() != powers_db.len() {
            return Err(Error::InvalidProfile(format!(
                "{} delays but {} powers",
                delays_ms.len(),
                powers_db.len()
            )));
        }
        if delays_ms[0] != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "first delay must be 0, got {}",
                delays_ms[0]
            )));
        }
        if delays_ms.iter().any(|d| !d.is_finite()) || delays_ms.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile("delays must be finite and non-decreasing".into()));
        }
        if powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidProfile("powers must be finite".into()));
        }
        Ok(TapProfile { delays_ms, powers_db })
    }

    /// One tap at delay 0 with 0 dB power.
    pub fn flat() -> Self {
        TapProfile { delays_ms: vec![0.0], powers_db: vec![0.0] }
    }

    pub fn alice_ris() -> Self {
        Self::new(vec![0.0, 0.22, 0.50, 1.09, 1.78], vec![0.0, -4.0, -5.2, -7.0, -1.9]).unwrap()
    }

    pub fn ris_bob() -> Self {
        Self::new(vec![0.0, 0.37, 0.50, 1.73, 2.82], vec![0.0, -3.0, -5.2, -8.0, -12.2]).unwrap()
    }

    pub fn alice_bob() -> Self {
        Self::new(vec![0.0, 0.11, 0.57, 1.90, 2.51], vec![0.0, -2.2, -10.5, -6.6, -10.8]).unwrap()
    }

    pub fn alice_hf() -> Self {
        Self::new(vec![0.0, 0.13, 0.185], vec![0.0, -4.0, -10.0]).unwrap()
    }

    pub fn bob_hf() -> Self {
        Self::new(vec![0.0, 0.065, 0.185], vec![0.0, -7.0, -10.0]).unwrap()
    }

    pub fn delays_ms(&self) -> &[f64] {
        &self.delays_ms
    }

    pub fn powers_db(&self) -> &[f64] {
        &self.powers_db
    }

    pub fn n_taps(&self) -> usize {
        self.delays_ms.len()
    }

    pub fn linear_powers(&self) -> Vec<f64> {
        self.powers_db.iter().map(|p| db_to_linear(*p)).collect()
    }

    /// Sum of linear tap powers, i.e. E|H(f)|² for a fading channel.
    pub fn total_power(&self) -> f64 {
        self.linear_powers().iter().sum()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone)]
struct Tap {
    delay_s: f64,
    amplitudes: Vec<Complex64>,
    dopplers_hz: Vec<f64>,
}

impl Tap {
    fn gain(&self, time_s: f64) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&self.dopplers_hz)
            .map(|(a, &f)| {
                if f == 0.0 {
                    *a
                } else {
                    a * Complex64::cis(2.0 * PI * f * time_s)
                }
            })
            .sum()
    }
}

/// A time-evolving TDL channel realization.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    profile: TapProfile,
    max_doppler_hz: f64,
    taps: Vec<Tap>,
}

pub fn make_fading_process(
    profile: &TapProfile,
    max_doppler_hz: f64,
    stream: StreamId,
) -> Result<FadingProcess> {
    if !(max_doppler_hz.is_finite() && max_doppler_hz >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "max doppler must be finite and non-negative, got {max_doppler_hz}"
        )));
    }
    let mut rng = stream.rng();
    let m = OSCILLATORS_PER_TAP as f64;
    let taps = profile
        .delays_ms
        .iter()
        .zip(profile.linear_powers())
        .map(|(&delay_ms, power)| {
            let scale = (power / m).sqrt();
            let amplitudes = (0..OSCILLATORS_PER_TAP)
                .map(|_| complex_gaussian(&mut rng, scale * scale))
                .collect();
            let dopplers_hz = (0..OSCILLATORS_PER_TAP)
                .map(|i| {
                    let alpha = 2.0 * PI * (i as f64 + rng.random::<f64>()) / m;
                    max_doppler_hz * alpha.cos()
                })
                .collect();
            Tap { delay_s: delay_ms * 1e-3, amplitudes, dopplers_hz }
        })
        .collect();
    Ok(FadingProcess { profile: profile.clone(), max_doppler_hz, taps })
}

impl FadingProcess {
    /// A static process with prescribed tap gains.
    pub fn from_gains(profile: &TapProfile, gains: &[Complex64]) -> Result<Self> {
        if gains.len() != profile.n_taps() {
            return Err(Error::LengthMismatch { expected: profile.n_taps(), actual: gains.len() });
        }
        let taps = profile
            .delays_ms
            .iter()
            .zip(gains)
            .map(|(&d, &g)| Tap { delay_s: d * 1e-3, amplitudes: vec![g], dopplers_hz: vec![0.0] })
            .collect();
        Ok(FadingProcess { profile: profile.clone(), max_doppler_hz: 0.0, taps })
    }

    pub fn profile(&self) -> &TapProfile {
        &self.profile
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.max_doppler_hz
    }

    pub fn tap_gains(&self, time_s: f64) -> Vec<Complex64> {
        self.taps.iter().map(|t| t.gain(time_s)).collect()
    }

    /// H(f) = Σ_l g_l(t) · exp(−j 2π f τ_l) at each frequency.
    pub fn frequency_response(&self, time_s: f64, freqs_hz: &[f64]) -> Result<CsiVector> {
        if !(time_s.is_finite() && time_s >= 0.0) {
            return Err(Error::InvalidInput(format!("time must be >= 0, got {time_s}")));
        }
        if let Some(f) = freqs_hz.iter().find(|f| !f.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite frequency {f}")));
        }
        let gains = self.tap_gains(time_s);
        Ok(CsiVector::new(tap_sum(&gains, &self.taps, freqs_hz)))
    }
}

fn tap_sum(gains: &[Complex64], taps: &[Tap], freqs_hz: &[f64]) -> Vec<Complex64> {
    freqs_hz
        .iter()
        .map(|&f| {
            gains
                .iter()
                .zip(taps)
                .map(|(g, tap)| {
                    if tap.delay_s == 0.0 {
                        *g
                    } else {
                        g * Complex64::cis(-2.0 * PI * f * tap.delay_s)
                    }
                })
                .sum()
        })
        .collect()
}

pub fn frequency_response(
    process: &FadingProcess,
    time_s: f64,
    freqs_hz: &[f64],
) -> Result<CsiVector> {
    process.frequency_response(time_s, freqs_hz)
}

/// Transmission direction of a hardware chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// Fixed multi-tap filter standing in for a transceiver's hardware deviation.
///
/// Tap amplitudes are the square roots of the profile's linear powers with zero
/// phase, so the response depends on nothing but the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareFingerprint {
    profile: TapProfile,
    direction: Direction,
}

impl HardwareFingerprint {
    pub fn new(profile: TapProfile, direction: Direction) -> Self {
        HardwareFingerprint { profile, direction }
    }

    pub fn identity(direction: Direction) -> Self {
        Self::new(TapProfile::flat(), direction)
    }

    pub fn profile(&self) -> &TapProfile {
        &self.profile
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn tap_amplitudes(&self) -> Vec<Complex64> {
        self.profile.linear_powers().iter().map(|p| Complex64::new(p.sqrt(), 0.0)).collect()
    }

    pub fn response(&self, freqs_hz: &[f64]) -> CsiVector {
        let taps: Vec<Tap> = self
            .profile
            .delays_ms
            .iter()
            .map(|&d| Tap { delay_s: d * 1e-3, amplitudes: Vec::new(), dopplers_hz: Vec::new() })
            .collect();
        CsiVector::new(tap_sum(&self.tap_amplitudes(), &taps, freqs_hz))
    }
}

pub fn fingerprint_response(fp: &HardwareFingerprint, freqs_hz: &[f64]) -> CsiVector {
    fp.response(freqs_hz)
}

/// Signal-to-noise ratio of a transmission; `Noiseless` skips noise entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Noiseless,
    Db(f64),
}

impl Snr {
    pub fn linear(self) -> Option<f64> {
        match self {
            Snr::Noiseless => None,
            Snr::Db(db) => Some(db_to_linear(db)),
        }
    }

    /// Noise variance for a signal of the given mean power (0 when noiseless).
    pub fn noise_variance(self, signal_power: f64) -> f64 {
        self.linear().map_or(0.0, |snr| signal_power / snr)
    }
}

/// Draws one CN(0, variance) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Adds i.i.d. CN(0, P/snr) noise, where P is the mean power of `signal`.
pub fn add_awgn(signal: &[Complex64], snr: Snr, stream: StreamId) -> Result<Vec<Complex64>> {
    if let Snr::Db(db) = snr {
        if !db.is_finite() {
            return Err(Error::InvalidInput(format!("snr must be finite, got {db}")));
        }
    }
    if signal.is_empty() || snr == Snr::Noiseless {
        return Ok(signal.to_vec());
    }
    let power = signal.iter().map(|s| s.norm_sqr()).sum::<f64>() / signal.len() as f64;
    let variance = snr.noise_variance(power);
    let mut rng = stream.rng();
    Ok(signal.iter().map(|s| s + complex_gaussian(&mut rng, variance)).collect())
}
