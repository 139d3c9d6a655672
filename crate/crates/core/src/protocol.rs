//! Probing rounds for the three schemes.
//!
//! A round runs on two coherence slots. In slot `t` both parties probe each
//! other on BAND 1. In the loop-back slot each party re-transmits
//! the estimate it obtained in slot `t` on BAND 2, so that Alice ends up with
//! `F_BA·F_AB·(…)(…)` and Bob with `F_AB·F_BA·(…)(…)`. LoCKey then
//! scales Alice's loop-back CSI by a per-subcarrier prediction scalar Γ(k).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::csi::{Band, CsiVector};
use crate::error::{check_len, Error, Result};
use crate::fading::{make_fading_process, FadingProcess, HardwareFingerprint, Snr, TapProfile, Direction};
use crate::ofdm::{generate_pilot, ls_estimate, probe, OfdmConfig, Pilot};
use crate::ris::{apply_jamming, random_ris_state, JammerConfig, RisState};
use crate::stream::StreamId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    NonLoopback,
    TraditionalLoopback,
    LoCKey,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::NonLoopback, Scheme::TraditionalLoopback, Scheme::LoCKey];

    pub fn key(self) -> &'static str {
        match self {
            Scheme::NonLoopback => "non_loopback",
            Scheme::TraditionalLoopback => "loopback",
            Scheme::LoCKey => "lockey",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "non_loopback" | "nonloopback" => Ok(Scheme::NonLoopback),
            "loopback" | "traditional_loopback" => Ok(Scheme::TraditionalLoopback),
            "lockey" => Ok(Scheme::LoCKey),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// Static description of the link from which environments are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ofdm: OfdmConfig,
    pub alice_bob: TapProfile,
    pub alice_ris: TapProfile,
    pub ris_bob: TapProfile,
    pub max_doppler_hz: f64,
    /// F_AB
    pub fp_alice_to_bob: HardwareFingerprint,
    /// F_BA
    pub fp_bob_to_alice: HardwareFingerprint,
    pub n_units: usize,
    pub jammer: JammerConfig,
    /// The receiver whose probe sees the re-randomized RIS configuration.
    pub jammed_receiver: Party,
    pub snr: Snr,
    pub slot_duration_s: f64,
    /// Number of coherence slots between the first round and the loop-back.
    pub loopback_gap_slots: u64,
}

/// Coherence time 0.423 / f_d of a Clarke channel; 1 s for a static channel.
pub fn coherence_time_s(max_doppler_hz: f64) -> f64 {
    if max_doppler_hz > 0.0 {
        0.423 / max_doppler_hz
    } else {
        1.0
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            ofdm: OfdmConfig::default(),
            alice_bob: TapProfile::alice_bob(),
            alice_ris: TapProfile::alice_ris(),
            ris_bob: TapProfile::ris_bob(),
            max_doppler_hz: 5.0,
            fp_alice_to_bob: HardwareFingerprint::new(TapProfile::alice_hf(), Direction::AliceToBob),
            fp_bob_to_alice: HardwareFingerprint::new(TapProfile::bob_hf(), Direction::BobToAlice),
            n_units: 30,
            jammer: JammerConfig::new(5),
            jammed_receiver: Party::Alice,
            snr: Snr::Db(10.0),
            slot_duration_s: coherence_time_s(5.0),
            loopback_gap_slots: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        if self.n_units == 0 {
            return Err(Error::InvalidRis("RIS needs at least one unit".into()));
        }
        if self.jammer.attacked_count > self.n_units {
            return Err(Error::InvalidRis(format!(
                "{} attacked units exceed the {} available",
                self.jammer.attacked_count, self.n_units
            )));
        }
        if !(self.slot_duration_s.is_finite() && self.slot_duration_s >= 0.0) {
            return Err(Error::InvalidInput("slot duration must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct BandChannels {
    direct: FadingProcess,
    alice_ris: FadingProcess,
    ris_bob: FadingProcess,
}

/// One realization of every fading process plus the fixed fingerprints.
#[derive(Debug, Clone)]
pub struct Environment {
    scenario: Scenario,
    freqs_hz: Vec<f64>,
    bands: [BandChannels; 2],
    fp_ab: CsiVector,
    fp_ba: CsiVector,
}

mod tag {
    pub const BAND1: u64 = 1;
    pub const BAND2: u64 = 2;
    pub const DIRECT: u64 = 10;
    pub const ALICE_RIS: u64 = 11;
    pub const RIS_BOB: u64 = 12;

    pub const PILOT: u64 = 100;
    pub const RIS: u64 = 101;
    pub const JAM: u64 = 102;
    pub const NOISE: u64 = 103;
}

fn band_tag(band: Band) -> u64 {
    match band {
        Band::One => tag::BAND1,
        Band::Two => tag::BAND2,
    }
}

fn party_tag(party: Party) -> u64 {
    match party {
        Party::Alice => 1,
        Party::Bob => 2,
    }
}

impl Environment {
    /// Draws independent fading processes for every link on both bands.
    pub fn realize(scenario: &Scenario, stream: StreamId) -> Result<Self> {
        scenario.validate()?;
        let draw = |band: Band| -> Result<BandChannels> {
            let s = stream.child(band_tag(band));
            Ok(BandChannels {
                direct: make_fading_process(&scenario.alice_bob, scenario.max_doppler_hz, s.child(tag::DIRECT))?,
                alice_ris: make_fading_process(&scenario.alice_ris, scenario.max_doppler_hz, s.child(tag::ALICE_RIS))?,
                ris_bob: make_fading_process(&scenario.ris_bob, scenario.max_doppler_hz, s.child(tag::RIS_BOB))?,
            })
        };
        let bands = [draw(Band::One)?, draw(Band::Two)?];
        let freqs_hz = scenario.ofdm.subcarrier_freqs();
        Ok(Environment {
            fp_ab: scenario.fp_alice_to_bob.response(&freqs_hz),
            fp_ba: scenario.fp_bob_to_alice.response(&freqs_hz),
            scenario: scenario.clone(),
            freqs_hz,
            bands,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn ofdm(&self) -> &OfdmConfig {
        &self.scenario.ofdm
    }

    /// Same channel draws with the roles of Alice and Bob exchanged:
    /// fingerprints and the jammed side swap.
    pub fn swapped(&self) -> Self {
        let mut env = self.clone();
        std::mem::swap(&mut env.fp_ab, &mut env.fp_ba);
        std::mem::swap(&mut env.scenario.fp_alice_to_bob, &mut env.scenario.fp_bob_to_alice);
        env.scenario.jammed_receiver = env.scenario.jammed_receiver.other();
        env
    }

    pub fn with_snr(mut self, snr: Snr) -> Self {
        self.scenario.snr = snr;
        self
    }

    fn channels(&self, band: Band) -> &BandChannels {
        match band {
            Band::One => &self.bands[0],
            Band::Two => &self.bands[1],
        }
    }

    fn time_of(&self, slot: u64) -> f64 {
        slot as f64 * self.scenario.slot_duration_s
    }

    /// Fingerprint response of the chain transmitting towards `receiver`.
    pub fn fingerprint_towards(&self, receiver: Party) -> &CsiVector {
        match receiver {
            Party::Bob => &self.fp_ab,
            Party::Alice => &self.fp_ba,
        }
    }

    /// h_AB = h_BA on `band` at `slot`.
    pub fn direct(&self, band: Band, slot: u64) -> Result<CsiVector> {
        self.channels(band).direct.frequency_response(self.time_of(slot), &self.freqs_hz)
    }

    /// h_ARB = h_AR · h_RB, identical in both directions.
    pub fn cascade_path(&self, band: Band, slot: u64) -> Result<CsiVector> {
        let t = self.time_of(slot);
        let ch = self.channels(band);
        ch.alice_ris
            .frequency_response(t, &self.freqs_hz)?
            .hadamard(&ch.ris_bob.frequency_response(t, &self.freqs_hz)?)
    }

    /// RIS configurations (seen by Alice, seen by Bob) during `slot`.
    pub fn ris_pair(&self, slot: u64, stream: StreamId) -> Result<(RisState, RisState)> {
        let legit = random_ris_state(self.scenario.n_units, stream.child(tag::RIS).child(slot))?;
        let jammed = apply_jamming(&legit, &self.scenario.jammer, stream.child(tag::JAM).child(slot))?;
        Ok(match self.scenario.jammed_receiver {
            Party::Alice => (jammed, legit),
            Party::Bob => (legit, jammed),
        })
    }

    pub fn pilot(&self, stream: StreamId) -> Pilot {
        generate_pilot(&self.scenario.ofdm, stream.child(tag::PILOT))
    }

    /// Sends `transmitted` towards `receiver` and returns the LS estimate.
    fn receive(
        &self,
        receiver: Party,
        band: Band,
        slot: u64,
        transmitted: &[Complex64],
        pilot: &Pilot,
        stream: StreamId,
    ) -> Result<CsiVector> {
        let (at_alice, at_bob) = self.ris_pair(slot, stream)?;
        let state = match receiver {
            Party::Alice => at_alice,
            Party::Bob => at_bob,
        };
        let phi = state.aggregate();
        let cascaded: Vec<Complex64> =
            self.cascade_path(band, slot)?.values().iter().map(|c| c * phi).collect();
        let noise = stream.child(tag::NOISE).child(party_tag(receiver)).child(band_tag(band)).child(slot);
        let y = probe(
            transmitted,
            &self.direct(band, slot)?,
            &CsiVector::new(cascaded),
            self.fingerprint_towards(receiver),
            self.scenario.snr,
            noise,
        )?;
        Ok(ls_estimate(&y, pilot, &self.scenario.ofdm)?.tagged(band, slot))
    }
}

/// First-round CSI on BAND 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstRound {
    pub h_a1: CsiVector,
    pub h_b1: CsiVector,
}

/// First round: Bob estimates `H_B1 = F_AB(h_AB + h_ARB Φ_B) + n`, Alice
/// estimates `H_A1 = F_BA(h_BA + h_BRA Φ_A) + n`.
pub fn measure_round(env: &Environment, slot: u64, stream: StreamId) -> Result<FirstRound> {
    let pilot = env.pilot(stream);
    let s = pilot.symbols();
    Ok(FirstRound {
        h_b1: env.receive(Party::Bob, Band::One, slot, s, &pilot, stream)?,
        h_a1: env.receive(Party::Alice, Band::One, slot, s, &pilot, stream)?,
    })
}

/// Loop-back on BAND 2: each side re-modulates the estimate it obtained in
/// the first round onto the pilot and sends it back.
///
/// Returns `(H_A, H_B)`; in the noiseless case `H_A = H_B1 · H_A2` and
/// `H_B = H_A1 · H_B2`.
pub fn loopback_combine(
    first_round: &FirstRound,
    env: &Environment,
    slot: u64,
    stream: StreamId,
) -> Result<(CsiVector, CsiVector)> {
    for h in [&first_round.h_a1, &first_round.h_b1] {
        if h.band() != Some(Band::One) {
            return Err(Error::BandMismatch {
                expected: Band::One.to_string(),
                actual: h.band().map_or("untagged".to_string(), |b| b.to_string()),
            });
        }
    }
    let pilot = env.pilot(stream);
    let remodulate = |h: &CsiVector| -> Vec<Complex64> {
        h.values().iter().zip(pilot.symbols()).map(|(h, s)| h * s).collect()
    };
    let h_a = env.receive(Party::Alice, Band::Two, slot, &remodulate(&first_round.h_b1), &pilot, stream)?;
    let h_b = env.receive(Party::Bob, Band::Two, slot, &remodulate(&first_round.h_a1), &pilot, stream)?;
    Ok((h_a, h_b))
}

/// Per-subcarrier prediction scalar Γ(k).
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma(Vec<Complex64>);

impl Gamma {
    pub fn new(values: Vec<Complex64>) -> Self {
        Gamma(values)
    }

    pub fn constant(value: Complex64, len: usize) -> Self {
        Gamma(vec![value; len])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub const DEFAULT_GAMMA_WINDOW: usize = 200;

/// Least-squares prediction scalar over a history of `(H_A, H_B)` pairs:
/// Γ̂(k) = Σ H_B(k)·H_A(k)* / Σ |H_A(k)|².
pub fn estimate_gamma(history: &[(CsiVector, CsiVector)], min_rounds: usize) -> Result<Gamma> {
    if history.len() < min_rounds.max(1) {
        return Err(Error::InsufficientHistory { got: history.len(), min: min_rounds.max(1) });
    }
    let len = history[0].0.len();
    let mut num = vec![Complex64::new(0.0, 0.0); len];
    let mut den = vec![0.0; len];
    for (h_a, h_b) in history {
        check_len(len, h_a.len())?;
        check_len(len, h_b.len())?;
        for k in 0..len {
            num[k] += h_b[k] * h_a[k].conj();
            den[k] += h_a[k].norm_sqr();
        }
    }
    num.iter()
        .zip(&den)
        .enumerate()
        .map(|(k, (n, d))| {
            if *d > 0.0 {
                Ok(n / d)
            } else {
                Err(Error::DegenerateHistory(format!("H_A is identically zero at subcarrier {k}")))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(Gamma)
}

/// H̃_B(k) = Γ(k) · H_A(k).
pub fn apply_compensation(h_a: &CsiVector, gamma: &Gamma) -> Result<CsiVector> {
    check_len(h_a.len(), gamma.len())?;
    let values = h_a.values().iter().zip(&gamma.0).map(|(h, g)| g * h).collect();
    let out = CsiVector::new(values);
    Ok(match (h_a.band(), h_a.slot()) {
        (Some(b), Some(s)) => out.tagged(b, s),
        _ => out,
    })
}

/// Paired key-source CSI produced by one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub key_source_alice: CsiVector,
    pub key_source_bob: CsiVector,
    pub gamma_used: Option<Gamma>,
    pub slot_first: u64,
    pub slot_loopback: u64,
}

pub fn run_round(
    scheme: Scheme,
    env: &Environment,
    gamma: Option<&Gamma>,
    stream: StreamId,
) -> Result<RoundResult> {
    if scheme == Scheme::LoCKey && gamma.is_none() {
        return Err(Error::MissingGamma);
    }
    let t = 0;
    let t_loop = t + env.scenario.loopback_gap_slots;
    let first = measure_round(env, t, stream)?;
    if scheme == Scheme::NonLoopback {
        return Ok(RoundResult {
            key_source_alice: first.h_a1,
            key_source_bob: first.h_b1,
            gamma_used: None,
            slot_first: t,
            slot_loopback: t,
        });
    }
    let (h_a, h_b) = loopback_combine(&first, env, t_loop, stream)?;
    let (alice, gamma_used) = match gamma {
        Some(g) if scheme == Scheme::LoCKey => (apply_compensation(&h_a, g)?, Some(g.clone())),
        _ => (h_a, None),
    };
    Ok(RoundResult {
        key_source_alice: alice,
        key_source_bob: h_b,
        gamma_used,
        slot_first: t,
        slot_loopback: t_loop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::complex_gaussian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn noiseless(mut s: Scenario) -> Scenario {
        s.snr = Snr::Noiseless;
        s
    }

    fn identity_fp(mut s: Scenario) -> Scenario {
        s.fp_alice_to_bob = HardwareFingerprint::identity(Direction::AliceToBob);
        s.fp_bob_to_alice = HardwareFingerprint::identity(Direction::BobToAlice);
        s
    }

    fn no_jam(mut s: Scenario) -> Scenario {
        s.jammer = JammerConfig::none();
        s
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1.0)
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.key().parse::<Scheme>().unwrap(), s);
        }
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn perfect_reciprocity_without_jamming_or_fingerprints() {
        let sc = no_jam(identity_fp(noiseless(Scenario::default())));
        let env = Environment::realize(&sc, StreamId::new(1)).unwrap();
        let r = measure_round(&env, 0, StreamId::new(2)).unwrap();
        assert_eq!(r.h_a1.values(), r.h_b1.values());
    }

    #[test]
    fn fingerprint_ratio_in_first_round() {
        let sc = no_jam(noiseless(Scenario::default()));
        let env = Environment::realize(&sc, StreamId::new(3)).unwrap();
        let r = measure_round(&env, 0, StreamId::new(4)).unwrap();
        for k in sc.ofdm.pilot_positions() {
            let ratio = r.h_b1[k] / r.h_a1[k];
            let want = env.fingerprint_towards(Party::Bob)[k] / env.fingerprint_towards(Party::Alice)[k];
            assert!(close(ratio, want), "k={k}");
        }
    }

    #[test]
    fn full_attack_difference_oracle() {
        let mut sc = identity_fp(noiseless(Scenario::default()));
        sc.jammer = JammerConfig::new(sc.n_units);
        let env = Environment::realize(&sc, StreamId::new(5)).unwrap();
        let stream = StreamId::new(6);
        let r = measure_round(&env, 0, stream).unwrap();
        let (at_alice, at_bob) = env.ris_pair(0, stream).unwrap();
        let path = env.cascade_path(Band::One, 0).unwrap();
        let dphi = at_alice.aggregate() - at_bob.aggregate();
        for k in sc.ofdm.pilot_positions() {
            assert!(close(r.h_a1[k] - r.h_b1[k], path[k] * dphi), "k={k}");
        }
    }

    #[test]
    fn loopback_all_ones_channel() {
        let ones = CsiVector::new(vec![c(1.0, 0.0); 64]).tagged(Band::One, 0);
        let first = FirstRound { h_a1: ones.clone(), h_b1: ones };
        let sc = identity_fp(no_jam(noiseless(Scenario::default())));
        let mut env = Environment::realize(&sc, StreamId::new(7)).unwrap();
        // unit direct channel, no RIS path
        for b in env.bands.iter_mut() {
            b.direct = FadingProcess::from_gains(&TapProfile::flat(), &[c(1.0, 0.0)]).unwrap();
            b.alice_ris = FadingProcess::from_gains(&TapProfile::flat(), &[c(0.0, 0.0)]).unwrap();
        }
        let (h_a, h_b) = loopback_combine(&first, &env, 1, StreamId::new(8)).unwrap();
        for k in 0..64 {
            assert!(close(h_a[k], c(1.0, 0.0)) && close(h_b[k], c(1.0, 0.0)));
        }
    }

    #[test]
    fn loopback_rejects_wrong_band() {
        let env = Environment::realize(&Scenario::default(), StreamId::new(9)).unwrap();
        let v = CsiVector::new(vec![c(1.0, 0.0); 64]).tagged(Band::Two, 0);
        let first = FirstRound { h_a1: v.clone(), h_b1: v };
        assert!(matches!(loopback_combine(&first, &env, 1, StreamId::new(1)), Err(Error::BandMismatch { .. })));
    }

    #[test]
    fn loopback_cancels_fingerprints_on_static_channels() {
        let mut sc = no_jam(noiseless(Scenario::default()));
        sc.max_doppler_hz = 0.0;
        let env = Environment::realize(&sc, StreamId::new(10)).unwrap();
        let r = run_round(Scheme::TraditionalLoopback, &env, None, StreamId::new(11)).unwrap();
        for k in 0..64 {
            assert!(close(r.key_source_alice[k], r.key_source_bob[k]), "k={k}");
        }
    }

    #[test]
    fn loopback_matches_expanded_product() {
        let sc = noiseless(Scenario::default());
        let env = Environment::realize(&sc, StreamId::new(12)).unwrap();
        let stream = StreamId::new(13);
        let first = measure_round(&env, 0, stream).unwrap();
        let (h_a, _) = loopback_combine(&first, &env, 1, stream).unwrap();
        let (_, b0) = env.ris_pair(0, stream).unwrap();
        let (a1, _) = env.ris_pair(1, stream).unwrap();
        let (d1, c1) = (env.direct(Band::One, 0).unwrap(), env.cascade_path(Band::One, 0).unwrap());
        let (d2, c2) = (env.direct(Band::Two, 1).unwrap(), env.cascade_path(Band::Two, 1).unwrap());
        let f_ab = env.fingerprint_towards(Party::Bob);
        let f_ba = env.fingerprint_towards(Party::Alice);
        for k in sc.ofdm.pilot_positions() {
            let want = f_ba[k] * f_ab[k] * (d2[k] + c2[k] * a1.aggregate()) * (d1[k] + c1[k] * b0.aggregate());
            assert!(close(h_a[k], want), "k={k}");
        }
    }

    #[test]
    fn gamma_on_identity_and_scaled_history() {
        let mut rng = StreamId::new(14).rng();
        let hist: Vec<(CsiVector, CsiVector)> = (0..200)
            .map(|_| {
                let a: Vec<Complex64> = (0..8).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                (CsiVector::new(a.clone()), CsiVector::new(a))
            })
            .collect();
        let g = estimate_gamma(&hist, 200).unwrap();
        assert!(g.values().iter().all(|v| close(*v, c(1.0, 0.0))));

        let doubled: Vec<(CsiVector, CsiVector)> = hist
            .iter()
            .map(|(a, _)| (a.clone(), CsiVector::new(a.values().iter().map(|v| v * 2.0).collect())))
            .collect();
        let g = estimate_gamma(&doubled, 200).unwrap();
        assert!(g.values().iter().all(|v| close(*v, c(2.0, 0.0))));

        assert!(matches!(estimate_gamma(&hist[..10], 200), Err(Error::InsufficientHistory { .. })));
        let zeros = vec![(CsiVector::new(vec![c(0.0, 0.0); 8]), CsiVector::new(vec![c(1.0, 0.0); 8])); 3];
        assert!(matches!(estimate_gamma(&zeros, 1), Err(Error::DegenerateHistory(_))));
    }

    #[test]
    fn mmse_residual_is_orthogonal_to_regressor() {
        let mut rng = StreamId::new(15).rng();
        let hist: Vec<(CsiVector, CsiVector)> = (0..300)
            .map(|_| {
                let a: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 2.0)).collect();
                let b: Vec<Complex64> = a.iter().map(|v| v * c(0.4, 0.7) + complex_gaussian(&mut rng, 1.0)).collect();
                (CsiVector::new(a), CsiVector::new(b))
            })
            .collect();
        let g = estimate_gamma(&hist, 200).unwrap();
        for k in 0..4 {
            let cross: Complex64 = hist.iter().map(|(a, b)| (g.values()[k] * a[k] - b[k]) * a[k].conj()).sum();
            let scale: f64 = hist.iter().map(|(a, _)| a[k].norm_sqr()).sum();
            assert!(cross.norm() / scale < 1e-12);
        }
    }

    #[test]
    fn compensation_cases() {
        let mut rng = StreamId::new(16).rng();
        let h = CsiVector::new((0..64).map(|_| complex_gaussian(&mut rng, 1.0)).collect());
        assert_eq!(apply_compensation(&h, &Gamma::constant(c(1.0, 0.0), 64)).unwrap(), h);
        let z = apply_compensation(&h, &Gamma::constant(c(0.0, 0.0), 64)).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let g = Gamma::new((0..64).map(|_| complex_gaussian(&mut rng, 1.0)).collect());
        let out = apply_compensation(&h, &g).unwrap();
        for k in 0..64 {
            assert_eq!(out[k], g.values()[k] * h[k]);
        }
        assert!(apply_compensation(&h, &Gamma::constant(c(1.0, 0.0), 3)).is_err());
    }

    #[test]
    fn run_round_requires_gamma_for_lockey() {
        let env = Environment::realize(&Scenario::default(), StreamId::new(17)).unwrap();
        assert_eq!(run_round(Scheme::LoCKey, &env, None, StreamId::new(1)), Err(Error::MissingGamma));
    }

    #[test]
    fn non_loopback_perfect_conditions() {
        let sc = no_jam(identity_fp(noiseless(Scenario::default())));
        let env = Environment::realize(&sc, StreamId::new(18)).unwrap();
        let r = run_round(Scheme::NonLoopback, &env, None, StreamId::new(19)).unwrap();
        assert_eq!(r.key_source_alice.values(), r.key_source_bob.values());
        assert_eq!((r.slot_first, r.slot_loopback), (0, 0));
    }

    #[test]
    fn run_round_is_deterministic() {
        let env = Environment::realize(&Scenario::default(), StreamId::new(20)).unwrap();
        let g = Gamma::constant(c(0.8, 0.1), 64);
        for scheme in Scheme::ALL {
            let a = run_round(scheme, &env, Some(&g), StreamId::new(21)).unwrap();
            let b = run_round(scheme, &env, Some(&g), StreamId::new(21)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn label_swap_swaps_key_sources() {
        let sc = noiseless(Scenario::default());
        let env = Environment::realize(&sc, StreamId::new(22)).unwrap();
        let swapped = env.swapped();
        for scheme in [Scheme::NonLoopback, Scheme::TraditionalLoopback] {
            let a = run_round(scheme, &env, None, StreamId::new(23)).unwrap();
            let b = run_round(scheme, &swapped, None, StreamId::new(23)).unwrap();
            for k in sc.ofdm.pilot_positions() {
                assert!(close(a.key_source_alice[k], b.key_source_bob[k]));
                assert!(close(a.key_source_bob[k], b.key_source_alice[k]));
            }
        }
    }
}
