//! Gaussian samplers driven directly by [`ModelStats`].

use num_complex::Complex64;

use super::ModelStats;
use crate::fading::complex_gaussian;
use crate::stream::StreamId;

/// First-round pairs `(H_A1, H_B1)` built from independent sub-channels:
///
///   H_A1 = √G_A (h_AB + a·h_ARB) + n_A,   H_B1 = √G_B (h_AB + b·h_ARB) + n_B
///
/// with h_AB ~ CN(0, σ²_AB), h_ARB ~ CN(0, σ²_ARB) shared by both sides and
/// independent unit-variance noise. The RIS aggregates are fixed at their
/// means. The cross moment of this construction is √(G_A·G_B)(ab σ²_ARB + σ²_AB).
pub fn sample_first_round(stats: &ModelStats, n: usize, stream: StreamId) -> Vec<(Complex64, Complex64)> {
    let mut rng = stream.rng();
    let (fa, fb) = (stats.g_a.sqrt(), stats.g_b.sqrt());
    (0..n)
        .map(|_| {
            let h = complex_gaussian(&mut rng, stats.var_ab);
            let c = complex_gaussian(&mut rng, stats.var_arb);
            let n_a = complex_gaussian(&mut rng, 1.0);
            let n_b = complex_gaussian(&mut rng, 1.0);
            (fa * (h + stats.a * c) + n_a, fb * (h + stats.b * c) + n_b)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LoopbackSamples {
    pub pairs: Vec<(Complex64, Complex64)>,
    /// False when the loop-back moments imply a non-positive-semidefinite
    /// covariance; the samples then match E|H_A|² and E[H_B H_A*] but
    /// E|H_B|² exceeds the model's value.
    pub realizable: bool,
}

/// Zero-mean jointly Gaussian loop-back pairs `(H_A, H_B)` with
///
///   E|H_A|² = G_A(a²σ⁴_ARB + σ⁴_AB) + 1
///   E|H_B|² = G_B(b²σ⁴_ARB + σ⁴_AB) + 1
///   E[H_B H_A*] = G_A·G_B(a²b²σ⁴_ARB + σ⁴_AB) + 1
///
/// drawn by a 2×2 Cholesky factorisation of that covariance.
pub fn sample_loopback(stats: &ModelStats, n: usize, stream: StreamId) -> LoopbackSamples {
    let p_a = stats.loopback_power_a();
    let p_b = stats.loopback_power_b();
    let cross = stats.loopback_cross();
    let slope = cross / p_a;
    let residual = p_b - cross * slope;
    let realizable = residual >= 0.0;
    let residual = residual.max(0.0);
    let mut rng = stream.rng();
    let pairs = (0..n)
        .map(|_| {
            let h_a = complex_gaussian(&mut rng, p_a);
            let h_b = slope * h_a + complex_gaussian(&mut rng, residual);
            (h_a, h_b)
        })
        .collect();
    LoopbackSamples { pairs, realizable }
}
