//! Closed-form correlation and prediction-error expressions, with their
//! sample-moment counterparts.
//!
//! All closed forms assume unit noise variance and are evaluated verbatim:
//! nothing is clamped, so some parameter sets yield "correlations" above 1.

mod model;

pub use model::{sample_first_round, sample_loopback, LoopbackSamples};

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

/// Statistical parameters of the analytic model.
///
/// `var_ab` and `var_arb` are per-link variances σ²; the loop-back
/// expressions use their squares σ⁴.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelStats {
    /// G_A = E[F_AB · F_AB^h]
    pub g_a: f64,
    /// G_B = E[F_BA · F_BA^h]
    pub g_b: f64,
    /// mean of the uplink RIS aggregate
    pub a: f64,
    /// mean of the downlink RIS aggregate
    pub b: f64,
    pub var_arb: f64,
    pub var_ab: f64,
}

impl ModelStats {
    pub fn new(g_a: f64, g_b: f64, a: f64, b: f64, var_arb: f64, var_ab: f64) -> Result<Self> {
        let s = ModelStats { g_a, g_b, a, b, var_arb, var_ab };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("G_A", self.g_a),
            ("G_B", self.g_b),
            ("var_arb", self.var_arb),
            ("var_ab", self.var_ab),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidInput("RIS means must be finite".into()));
        }
        Ok(())
    }

    fn var4_arb(&self) -> f64 {
        self.var_arb * self.var_arb
    }

    fn var4_ab(&self) -> f64 {
        self.var_ab * self.var_ab
    }

    /// G_A(a²σ⁴_ARB + σ⁴_AB) + 1, the loop-back power at Alice.
    pub(crate) fn loopback_power_a(&self) -> f64 {
        self.g_a * (self.a * self.a * self.var4_arb() + self.var4_ab()) + 1.0
    }

    /// G_B(b²σ⁴_ARB + σ⁴_AB) + 1, the loop-back power at Bob.
    pub(crate) fn loopback_power_b(&self) -> f64 {
        self.g_b * (self.b * self.b * self.var4_arb() + self.var4_ab()) + 1.0
    }

    /// G_A·G_B(a²b²σ⁴_ARB + σ⁴_AB) + 1, the loop-back cross moment.
    pub(crate) fn loopback_cross(&self) -> f64 {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        self.g_a * self.g_b * (a2 * b2 * self.var4_arb() + self.var4_ab()) + 1.0
    }
}

/// Sample version of ρ = (E[XY*] − E[X]E[Y*]) / (√E|X|² · √E|Y|²).
///
/// The denominator uses raw second moments, not centered variances.
pub fn correlation(xs: &[Complex64], ys: &[Complex64]) -> Result<Complex64> {
    check_len(xs.len(), ys.len())?;
    if xs.len() < 2 {
        return Err(Error::DegenerateSample(format!("need at least 2 samples, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mut sxy = Complex64::new(0.0, 0.0);
    let mut sx = Complex64::new(0.0, 0.0);
    let mut sy = Complex64::new(0.0, 0.0);
    let (mut sxx, mut syy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += x * y.conj();
        sx += x;
        sy += y;
        sxx += x.norm_sqr();
        syy += y.norm_sqr();
    }
    let denom = (sxx / n).sqrt() * (syy / n).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateSample("zero second moment".into()));
    }
    Ok((sxy / n - (sx / n) * (sy / n).conj()) / denom)
}

/// Correlation after the first TDD round (two-way probe).
pub fn rho1_analytic(stats: &ModelStats) -> f64 {
    let s = stats;
    let num = s.g_a * s.g_b * (s.a * s.b * s.var_arb + s.var_ab);
    let den_a = (s.g_a * (s.a * s.a * s.var_arb + s.var_ab) + 1.0).sqrt();
    let den_b = (s.g_b * (s.b * s.b * s.var_arb + s.var_ab) + 1.0).sqrt();
    num / (den_a * den_b)
}

/// Correlation after the loop-back (product of both directions).
pub fn rho2_analytic(stats: &ModelStats) -> f64 {
    stats.loopback_cross() / (stats.loopback_power_a().sqrt() * stats.loopback_power_b().sqrt())
}

/// E[ε(k)²] for a prediction H̃_B = Γ·H_A.
pub fn mse_prediction(gamma: f64, stats: &ModelStats) -> f64 {
    gamma * gamma * stats.loopback_power_a() + stats.loopback_power_b()
        - 2.0 * gamma * stats.loopback_cross()
}

/// The Γ that zeroes d/dΓ of [`mse_prediction`].
pub fn gamma_analytic(stats: &ModelStats) -> f64 {
    stats.loopback_cross() / stats.loopback_power_a()
}

/// Per-sample prediction errors ε = H̃_B − H_B and their mean squared magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionError {
    pub errors: Vec<Complex64>,
    pub mse: f64,
}

pub fn empirical_mse(predicted: &[Complex64], actual: &[Complex64]) -> Result<PredictionError> {
    check_len(predicted.len(), actual.len())?;
    if predicted.is_empty() {
        return Err(Error::Empty);
    }
    let errors: Vec<Complex64> = predicted.iter().zip(actual).map(|(p, a)| p - a).collect();
    let mse = errors.iter().map(|e| e.norm_sqr()).sum::<f64>() / errors.len() as f64;
    Ok(PredictionError { errors, mse })
}
