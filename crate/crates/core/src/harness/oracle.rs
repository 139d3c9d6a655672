//! Closed-form vs Monte-Carlo spot checks, printed by `rispkg oracle`.

use std::fmt;

use num_complex::Complex64;

use crate::analysis::{
    correlation, empirical_mse, gamma_analytic, mse_prediction, rho1_analytic, rho2_analytic, sample_first_round,
    sample_loopback, ModelStats,
};
use crate::csi::CsiVector;
use crate::error::Result;
use crate::fading::Snr;
use crate::protocol::{estimate_gamma, run_round, Environment, Scenario, Scheme};
use crate::ris::JammerConfig;
use crate::stream::StreamId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Abs(f64),
    Rel(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: Tolerance,
}

impl OracleCheck {
    fn new(name: impl Into<String>, expected: f64, observed: f64, tolerance: Tolerance) -> Self {
        OracleCheck { name: name.into(), expected, observed, tolerance }
    }

    pub fn passed(&self) -> bool {
        let d = (self.observed - self.expected).abs();
        match self.tolerance {
            Tolerance::Abs(t) => d <= t,
            Tolerance::Rel(t) => d <= t * self.expected.abs(),
        }
    }
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tol = match self.tolerance {
            Tolerance::Abs(t) => format!("±{t:.0e}"),
            Tolerance::Rel(t) => format!("±{:.1}%", 100.0 * t),
        };
        write!(
            f,
            "{:<4} {:<44} expected {:>12.6} observed {:>12.6} ({tol})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.observed
        )
    }
}

fn stats(g_a: f64, g_b: f64, a: f64, b: f64, var_arb: f64, var_ab: f64) -> ModelStats {
    ModelStats::new(g_a, g_b, a, b, var_arb, var_ab).expect("literal stats are valid")
}

fn split(pairs: &[(Complex64, Complex64)]) -> (Vec<Complex64>, Vec<Complex64>) {
    pairs.iter().copied().unzip()
}

fn history(pairs: &[(Complex64, Complex64)]) -> Vec<(CsiVector, CsiVector)> {
    pairs.iter().map(|(a, b)| (CsiVector::new(vec![*a]), CsiVector::new(vec![*b]))).collect()
}

/// Runs every check with `samples` Monte-Carlo draws each.
pub fn run_checks(samples: usize, seed: u64) -> Result<Vec<OracleCheck>> {
    let root = StreamId::new(seed);
    let mut out = Vec::new();

    let s = stats(2.0, 3.0, 0.5, 0.5, 1.0, 1.0);
    let g = gamma_analytic(&s);
    let step = 1e-3;
    let argmin = (0..=(3.0 * g / step) as usize)
        .map(|i| i as f64 * step)
        .min_by(|x, y| mse_prediction(*x, &s).total_cmp(&mse_prediction(*y, &s)))
        .unwrap_or(0.0);
    out.push(OracleCheck::new("gamma* vs grid argmin of MSE", g, argmin, Tolerance::Abs(step / 2.0)));
    let h = 1e-4 * g;
    let deriv = (mse_prediction(g + h, &s) - mse_prediction(g - h, &s)) / (2.0 * h);
    out.push(OracleCheck::new(
        "d MSE / d gamma at gamma* (relative)",
        0.0,
        deriv / mse_prediction(g, &s).abs().max(1.0),
        Tolerance::Abs(1e-6),
    ));

    let gamma_sets = [s, stats(1.0, 1.0, 0.8, 0.6, 0.5, 1.2), stats(0.5, 1.5, 1.0, 0.3, 2.0, 0.4)];
    for (i, st) in gamma_sets.iter().enumerate() {
        let pairs = sample_loopback(st, samples, root.child(10 + i as u64)).pairs;
        let est = estimate_gamma(&history(&pairs), 1)?.values()[0].re;
        out.push(OracleCheck::new(format!("gamma estimate, set {}", i + 1), gamma_analytic(st), est, Tolerance::Abs(0.02)));
    }

    let rho1_sets = [
        stats(1.0, 1.0, 0.5, 0.5, 1.0, 1.0),
        stats(2.0, 0.5, 0.7, 0.2, 0.6, 1.5),
        stats(0.5, 2.0, 1.0, 1.0, 0.3, 0.3),
    ];
    for (i, st) in rho1_sets.iter().enumerate() {
        let (x, y) = split(&sample_first_round(st, samples, root.child(20 + i as u64)));
        let rho = correlation(&x, &y)?.re;
        out.push(OracleCheck::new(format!("first-round correlation, set {}", i + 1), rho1_analytic(st), rho, Tolerance::Abs(0.02)));
    }

    let lb_sets = [stats(0.5, 0.5, 0.5, 0.5, 1.0, 1.0), stats(1.0, 0.8, 0.3, 0.4, 0.7, 0.9)];
    for (i, st) in lb_sets.iter().enumerate() {
        let (x, y) = split(&sample_loopback(st, samples, root.child(30 + i as u64)).pairs);
        let rho = correlation(&x, &y)?.re;
        out.push(OracleCheck::new(format!("loop-back correlation, set {}", i + 1), rho2_analytic(st), rho, Tolerance::Abs(0.03)));
        let g = gamma_analytic(st);
        let predicted: Vec<Complex64> = x.iter().map(|h| g * h).collect();
        let mse = empirical_mse(&predicted, &y)?.mse;
        out.push(OracleCheck::new(format!("MSE at gamma*, set {}", i + 1), mse_prediction(g, st), mse, Tolerance::Rel(0.03)));
    }

    let scenario = Scenario {
        max_doppler_hz: 0.0,
        jammer: JammerConfig::none(),
        snr: Snr::Noiseless,
        ..Scenario::default()
    };
    let env = Environment::realize(&scenario, root.child(40))?;
    let r = run_round(Scheme::TraditionalLoopback, &env, None, root.child(41))?;
    let scale = r.key_source_bob.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = r
        .key_source_alice
        .values()
        .iter()
        .zip(r.key_source_bob.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    out.push(OracleCheck::new("loop-back hardware cancellation (relative)", 0.0, worst / scale, Tolerance::Abs(1e-10)));
    Ok(out)
}
