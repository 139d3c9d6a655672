//! RIS reflection state, aggregate phasor and the re-randomization attack.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::csi::CsiVector;
use crate::error::{check_len, Error, Result};
use crate::stream::StreamId;

/// Per-unit on/off status ω_i and phase shift φ_i ∈ (0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    on: Vec<bool>,
    phases: Vec<f64>,
}

impl RisState {
    pub fn new(on: Vec<bool>, phases: Vec<f64>) -> Result<Self> {
        if on.is_empty() {
            return Err(Error::InvalidRis("RIS needs at least one unit".into()));
        }
        check_len(on.len(), phases.len())?;
        if let Some(p) = phases.iter().find(|p| !(**p > 0.0 && **p < TAU)) {
            return Err(Error::InvalidRis(format!("phase {p} outside (0, 2π)")));
        }
        Ok(RisState { on, phases })
    }

    pub fn n_units(&self) -> usize {
        self.on.len()
    }

    pub fn on(&self) -> &[bool] {
        &self.on
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn active_units(&self) -> usize {
        self.on.iter().filter(|w| **w).count()
    }

    pub fn with_all_off(mut self) -> Self {
        self.on.iter_mut().for_each(|w| *w = false);
        self
    }

    /// Φ = Σ ω_i · exp(j φ_i).
    pub fn aggregate(&self) -> Complex64 {
        self.on
            .iter()
            .zip(&self.phases)
            .filter(|(w, _)| **w)
            .map(|(_, &p)| Complex64::cis(p))
            .sum()
    }
}

/// Number of units the attacker re-randomizes between uplink and downlink probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JammerConfig {
    pub attacked_count: usize,
}

impl JammerConfig {
    pub fn new(attacked_count: usize) -> Self {
        JammerConfig { attacked_count }
    }

    pub fn none() -> Self {
        JammerConfig { attacked_count: 0 }
    }

    pub fn is_active(&self) -> bool {
        self.attacked_count > 0
    }
}

fn uniform_open_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let p = rng.random::<f64>() * TAU;
        if p > 0.0 {
            return p;
        }
    }
}

/// Draws i.i.d. uniform phases with every unit switched on.
pub fn random_ris_state(n_units: usize, stream: StreamId) -> Result<RisState> {
    if n_units == 0 {
        return Err(Error::InvalidRis("RIS needs at least one unit".into()));
    }
    let mut rng = stream.rng();
    let phases = (0..n_units).map(|_| uniform_open_phase(&mut rng)).collect();
    Ok(RisState { on: vec![true; n_units], phases })
}

pub fn aggregate_phase(state: &RisState) -> Complex64 {
    state.aggregate()
}

/// Returns the configuration seen on the other direction: `attacked_count`
/// randomly chosen units get fresh uniform phases, everything else is kept.
///
/// The victims are a prefix of one random permutation and each unit's
/// replacement phase is drawn up front, so for a fixed stream the attack
/// with k + 1 units extends the attack with k units.
pub fn apply_jamming(up_state: &RisState, jammer: &JammerConfig, stream: StreamId) -> Result<RisState> {
    let n = up_state.n_units();
    if jammer.attacked_count > n {
        return Err(Error::InvalidRis(format!(
            "{} attacked units exceed the {n} available",
            jammer.attacked_count
        )));
    }
    let mut down = up_state.clone();
    if jammer.attacked_count == 0 {
        return Ok(down);
    }
    let mut rng = stream.rng();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let fresh: Vec<f64> = (0..n).map(|_| uniform_open_phase(&mut rng)).collect();
    for &i in &order[..jammer.attacked_count] {
        down.phases[i] = fresh[i];
    }
    Ok(down)
}

/// h_in · h_out · Φ per subcarrier.
pub fn cascaded_gain(h_in: &CsiVector, h_out: &CsiVector, state: &RisState) -> Result<CsiVector> {
    check_len(h_in.len(), h_out.len())?;
    let phi = state.aggregate();
    Ok(CsiVector::new(
        h_in.values().iter().zip(h_out.values()).map(|(a, b)| a * b * phi).collect(),
    ))
}

/// Monte-Carlo means (E[Φ_jammed], E[Φ_legit]) of the aggregate phasor for the
/// given generator settings.
pub fn mean_aggregates(
    n_units: usize,
    jammer: &JammerConfig,
    trials: usize,
    stream: StreamId,
) -> Result<(Complex64, Complex64)> {
    if trials == 0 {
        return Err(Error::Empty);
    }
    let mut jammed = Complex64::new(0.0, 0.0);
    let mut legit = Complex64::new(0.0, 0.0);
    for t in 0..trials as u64 {
        let s = stream.child(t);
        let up = random_ris_state(n_units, s.child(0))?;
        let down = apply_jamming(&up, jammer, s.child(1))?;
        legit += up.aggregate();
        jammed += down.aggregate();
    }
    Ok((jammed / trials as f64, legit / trials as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thirty_unit_state() {
        let s = random_ris_state(30, StreamId::new(1)).unwrap();
        assert_eq!(s.n_units(), 30);
        assert!(s.phases().iter().all(|p| *p > 0.0 && *p < TAU));
        assert!(s.on().iter().all(|w| *w));
        assert_eq!(random_ris_state(1, StreamId::new(1)).unwrap().n_units(), 1);
        assert!(random_ris_state(0, StreamId::new(1)).is_err());
    }

    #[test]
    fn uniform_phase_mean_vanishes() {
        let s = random_ris_state(100_000, StreamId::new(2)).unwrap();
        let mean = s.aggregate() / 100_000.0;
        assert!(mean.norm() < 0.02);
    }

    #[test]
    fn aggregate_edge_cases() {
        let s = random_ris_state(30, StreamId::new(3)).unwrap().with_all_off();
        assert_eq!(aggregate_phase(&s), Complex64::new(0.0, 0.0));
        let tiny = RisState::new(vec![true], vec![1e-12]).unwrap();
        assert!((aggregate_phase(&tiny) - Complex64::new(1.0, 0.0)).norm() < 1e-11);
        assert!(RisState::new(vec![true], vec![0.0]).is_err());
        assert!(RisState::new(vec![true], vec![TAU]).is_err());
    }

    #[test]
    fn aggregate_matches_direct_sum() {
        let s = random_ris_state(30, StreamId::new(4)).unwrap();
        let (mut re, mut im) = (0.0, 0.0);
        for p in s.phases() {
            re += p.cos();
            im += p.sin();
        }
        assert!((s.aggregate() - Complex64::new(re, im)).norm() < 1e-12);
    }

    #[test]
    fn no_attack_keeps_state() {
        let s = random_ris_state(30, StreamId::new(5)).unwrap();
        let d = apply_jamming(&s, &JammerConfig::none(), StreamId::new(6)).unwrap();
        assert_eq!(s, d);
        assert!(apply_jamming(&s, &JammerConfig::new(31), StreamId::new(6)).is_err());
    }

    #[test]
    fn twenty_of_thirty_attacked() {
        let s = random_ris_state(30, StreamId::new(7)).unwrap();
        let d = apply_jamming(&s, &JammerConfig::new(20), StreamId::new(8)).unwrap();
        let changed = s.phases().iter().zip(d.phases()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 20);
    }

    #[test]
    fn full_attack_decorrelates_aggregates() {
        let n = 100_000;
        let root = StreamId::new(9);
        let mut pairs = Vec::with_capacity(n);
        for t in 0..n as u64 {
            let up = random_ris_state(30, root.child(t).child(0)).unwrap();
            let down = apply_jamming(&up, &JammerConfig::new(30), root.child(t).child(1)).unwrap();
            pairs.push((up.aggregate(), down.aggregate()));
        }
        let nf = n as f64;
        let mx: Complex64 = pairs.iter().map(|p| p.0).sum::<Complex64>() / nf;
        let my: Complex64 = pairs.iter().map(|p| p.1).sum::<Complex64>() / nf;
        let sxy: Complex64 = pairs.iter().map(|p| p.0 * p.1.conj()).sum::<Complex64>() / nf;
        let sxx: f64 = pairs.iter().map(|p| p.0.norm_sqr()).sum::<f64>() / nf;
        let syy: f64 = pairs.iter().map(|p| p.1.norm_sqr()).sum::<f64>() / nf;
        let rho = (sxy - mx * my.conj()) / (sxx.sqrt() * syy.sqrt());
        assert!(rho.norm() < 0.02, "{rho}");
    }

    #[test]
    fn generator_means_are_zero() {
        let (a, b) = mean_aggregates(30, &JammerConfig::new(5), 100_000, StreamId::new(10)).unwrap();
        // per-unit means; the aggregate itself has standard deviation √30
        assert!(a.norm() / 30.0 < 0.02 && b.norm() / 30.0 < 0.02, "{a} {b}");
    }

    #[test]
    fn stronger_attack_extends_weaker_one() {
        let s = random_ris_state(30, StreamId::new(14)).unwrap();
        let weak = apply_jamming(&s, &JammerConfig::new(10), StreamId::new(15)).unwrap();
        let strong = apply_jamming(&s, &JammerConfig::new(20), StreamId::new(15)).unwrap();
        for i in 0..30 {
            if weak.phases()[i] != s.phases()[i] {
                assert_eq!(weak.phases()[i], strong.phases()[i]);
            }
        }
    }

    #[test]
    fn cascaded_gain_cases() {
        let ones = CsiVector::new(vec![Complex64::new(1.0, 0.0); 4]);
        let off = random_ris_state(3, StreamId::new(1)).unwrap().with_all_off();
        assert!(cascaded_gain(&ones, &ones, &off).unwrap().values().iter().all(|v| v.norm() == 0.0));
        let unit = RisState::new(vec![true], vec![1e-300]).unwrap();
        let g = cascaded_gain(&ones, &ones, &unit).unwrap();
        assert!(g.values().iter().all(|v| (v - 1.0).norm() < 1e-12));
        let short = CsiVector::new(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(cascaded_gain(&ones, &short, &unit), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn cascaded_gain_is_elementwise() {
        let mut rng = StreamId::new(12).rng();
        let a: Vec<Complex64> = (0..16).map(|_| crate::fading::complex_gaussian(&mut rng, 1.0)).collect();
        let b: Vec<Complex64> = (0..16).map(|_| crate::fading::complex_gaussian(&mut rng, 1.0)).collect();
        let s = random_ris_state(30, StreamId::new(13)).unwrap();
        let phi = s.aggregate();
        let g = cascaded_gain(&CsiVector::new(a.clone()), &CsiVector::new(b.clone()), &s).unwrap();
        for k in 0..16 {
            assert!((g[k] - a[k] * b[k] * phi).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn aggregate_bounded_by_active_units(n in 1usize..64, seed in any::<u64>()) {
            let s = random_ris_state(n, StreamId::new(seed)).unwrap();
            prop_assert!(s.aggregate().norm() <= s.active_units() as f64 + 1e-9);
        }

        #[test]
        fn jamming_changes_exactly_k_phases(n in 1usize..64, frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let k = ((n as f64) * frac).floor() as usize;
            let s = random_ris_state(n, StreamId::new(seed)).unwrap();
            let d = apply_jamming(&s, &JammerConfig::new(k), StreamId::new(seed ^ 1)).unwrap();
            let changed = s.phases().iter().zip(d.phases()).filter(|(a, b)| a != b).count();
            prop_assert_eq!(changed, k);
            prop_assert_eq!(s.on(), d.on());
        }
    }
}
