//! Seeded Monte-Carlo sweeps over scheme × SNR × RIS size × attack level.
//!
//! Every random draw is keyed by `(master_seed, trial index, role)` and never
//! by the cell, so all cells of a sweep see the same channel, RIS and noise
//! realizations (common random numbers). Cells differ only in the parameters
//! they set. Results therefore do not depend on which other cells are run, nor
//! on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::analysis::{correlation, gamma_analytic, mse_prediction, rho1_analytic, rho2_analytic, ModelStats};
use crate::csi::CsiVector;
use crate::error::{Error, Result};
use crate::fading::Snr;
use crate::keygen::{compute_thresholds, csk_with_cap, quantize_gray2};
use crate::protocol::{estimate_gamma, run_round, Environment, Gamma, RoundResult, Scenario, Scheme};
use crate::ris::JammerConfig;
use crate::stream::StreamId;

mod tag {
    pub const TRIAL: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const ENV: u64 = 10;
    pub const ROUND: u64 = 11;
}

/// Canned sweeps, one per result figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// correlation vs SNR, three schemes
    Fig5a,
    /// LoCKey MSE vs SNR by attack level
    Fig5b,
    /// C_SK vs SNR, three schemes
    Fig5c,
    /// LoCKey C_SK vs SNR by RIS size
    Fig5d,
    /// LoCKey C_SK vs SNR by attack level
    Fig5e,
    /// KDR vs SNR, three schemes
    Fig5f,
    /// grids exactly as configured
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] =
        [Preset::Fig5a, Preset::Fig5b, Preset::Fig5c, Preset::Fig5d, Preset::Fig5e, Preset::Fig5f, Preset::Custom];

    pub fn key(self) -> &'static str {
        match self {
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig5c => "fig5c",
            Preset::Fig5d => "fig5d",
            Preset::Fig5e => "fig5e",
            Preset::Fig5f => "fig5f",
            Preset::Custom => "custom",
        }
    }

    /// Overrides the scheme and RIS grids. SNR grid, trials and link
    /// parameters are left as configured.
    pub fn apply(self, cfg: &mut ExperimentConfig) {
        let (schemes, n_units, attacked): (&[Scheme], &[usize], &[usize]) = match self {
            Preset::Fig5a | Preset::Fig5c | Preset::Fig5f => (&Scheme::ALL, &[30], &[5]),
            Preset::Fig5b => (&[Scheme::LoCKey], &[30], &[2, 10, 20]),
            Preset::Fig5d => (&[Scheme::LoCKey], &[10, 20, 30], &[5]),
            Preset::Fig5e => (&[Scheme::LoCKey], &[30], &[2, 5, 10, 20]),
            Preset::Custom => return,
        };
        cfg.schemes = schemes.to_vec();
        cfg.n_units_grid = n_units.to_vec();
        cfg.attacked_grid = attacked.to_vec();
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub n_units: usize,
    pub attacked_units: usize,
}

impl Cell {
    pub fn snr(&self) -> Snr {
        if self.snr_db == f64::INFINITY {
            Snr::Noiseless
        } else {
            Snr::Db(self.snr_db)
        }
    }

    pub fn scenario(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        s.snr = self.snr();
        s.n_units = self.n_units;
        s.jammer = JammerConfig::new(self.attacked_units);
        s
    }
}

/// Cells in output order: scheme, RIS size, attack level, SNR.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        for &n_units in &cfg.n_units_grid {
            for &attacked_units in &cfg.attacked_grid {
                for &snr_db in &cfg.snr_grid_db {
                    out.push(Cell { scheme, snr_db, n_units, attacked_units });
                }
            }
        }
    }
    out
}

/// One CSV line. Optional fields are undefined for some schemes or metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub n_units: usize,
    pub attacked_units: usize,
    /// mean over pilot subcarriers of |ρ_k| between the two key sources
    pub rho_empirical: f64,
    pub rho_analytic: Option<f64>,
    /// mean |Γ̂(k)| over pilot subcarriers
    pub gamma: Option<f64>,
    /// mean |key_A − key_B|² over trials and pilot subcarriers
    pub mse_empirical: f64,
    pub mse_analytic: Option<f64>,
    pub csk_bits: Option<f64>,
    pub csk_info: Option<f64>,
    pub kdr: f64,
    pub trials: usize,
    /// "ok", or the error that stopped the cell
    pub status: String,
}

impl ResultRow {
    fn failed(cell: &Cell, trials: usize, err: &Error) -> Self {
        ResultRow {
            scheme: cell.scheme,
            snr_db: cell.snr_db,
            n_units: cell.n_units,
            attacked_units: cell.attacked_units,
            rho_empirical: f64::NAN,
            rho_analytic: None,
            gamma: None,
            mse_empirical: f64::NAN,
            mse_analytic: None,
            csk_bits: None,
            csk_info: None,
            kdr: f64::NAN,
            trials,
            status: format!("error: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Analytic-model parameters implied by a scenario, in units of the probe
/// noise variance. Fingerprint gains are averaged over pilot subcarriers and
/// the RIS means are those of uniform phases (zero). `None` when noiseless.
pub fn scenario_stats(scenario: &Scenario) -> Option<ModelStats> {
    let snr = scenario.snr.linear()?;
    let freqs = scenario.ofdm.subcarrier_freqs();
    let pilots = scenario.ofdm.pilot_positions();
    let mean_gain = |r: &CsiVector| pilots.iter().map(|&k| r[k].norm_sqr()).sum::<f64>() / pilots.len() as f64;
    let g_a = mean_gain(&scenario.fp_alice_to_bob.response(&freqs));
    let g_b = mean_gain(&scenario.fp_bob_to_alice.response(&freqs));
    let var_ab = scenario.alice_bob.total_power();
    let var_arb = scenario.alice_ris.total_power() * scenario.ris_bob.total_power();
    let rx_power = 0.5 * (g_a + g_b) * (var_ab + scenario.n_units as f64 * var_arb);
    let noise = rx_power / snr;
    ModelStats::new(g_a, g_b, 0.0, 0.0, var_arb / noise, var_ab / noise).ok()
}

fn trial_stream(seed: u64, trial: usize) -> StreamId {
    StreamId::new(seed).child(tag::TRIAL).child(trial as u64)
}

fn one_round(
    scheme: Scheme,
    scenario: &Scenario,
    gamma: Option<&Gamma>,
    stream: StreamId,
) -> Result<RoundResult> {
    let env = Environment::realize(scenario, stream.child(tag::ENV))?;
    run_round(scheme, &env, gamma, stream.child(tag::ROUND))
}

/// Estimates Γ̂ from `window` independent loop-back rounds.
pub fn train_gamma(scenario: &Scenario, window: usize, seed: u64) -> Result<Gamma> {
    let root = StreamId::new(seed).child(tag::TRAIN);
    let history = (0..window)
        .into_par_iter()
        .map(|i| {
            let r = one_round(Scheme::TraditionalLoopback, scenario, None, root.child(i as u64))?;
            Ok((r.key_source_alice, r.key_source_bob))
        })
        .collect::<Result<Vec<_>>>()?;
    estimate_gamma(&history, window)
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<ResultRow> {
    let scenario = cell.scenario(&cfg.scenario);
    scenario.validate()?;
    let gamma = match cell.scheme {
        Scheme::LoCKey => Some(train_gamma(&scenario, cfg.gamma_window, cfg.master_seed)?),
        _ => None,
    };
    let rounds = (0..cfg.trials)
        .into_par_iter()
        .map(|j| one_round(cell.scheme, &scenario, gamma.as_ref(), trial_stream(cfg.master_seed, j)))
        .collect::<Result<Vec<_>>>()?;

    let pilots = scenario.ofdm.pilot_positions();
    let column = |k: usize, alice: bool| -> Vec<Complex64> {
        rounds
            .iter()
            .map(|r| if alice { r.key_source_alice[k] } else { r.key_source_bob[k] })
            .collect()
    };
    let mut rho_sum = 0.0;
    for &k in &pilots {
        rho_sum += correlation(&column(k, true), &column(k, false))?.norm();
    }
    let rho_empirical = rho_sum / pilots.len() as f64;

    let mut err_sum = 0.0;
    let (mut mag_a, mut mag_b) = (Vec::new(), Vec::new());
    for r in &rounds {
        for &k in &pilots {
            let (a, b) = (r.key_source_alice[k], r.key_source_bob[k]);
            err_sum += (a - b).norm_sqr();
            mag_a.push(a.norm());
            mag_b.push(b.norm());
        }
    }
    let used = mag_a.len();
    let mse_empirical = err_sum / used as f64;
    let bits_a = quantize_gray2(&mag_a, &compute_thresholds(&mag_a)?);
    let bits_b = quantize_gray2(&mag_b, &compute_thresholds(&mag_b)?);
    let metrics = csk_with_cap(rho_empirical, &bits_a, &bits_b, used, cfg.info_cap_bits)?;

    let stats = scenario_stats(&scenario);
    let (rho_analytic, mse_analytic) = match (cell.scheme, stats) {
        (_, None) => (None, None),
        (Scheme::NonLoopback, Some(s)) => (Some(rho1_analytic(&s)), None),
        (Scheme::TraditionalLoopback, Some(s)) => (Some(rho2_analytic(&s)), Some(mse_prediction(1.0, &s))),
        (Scheme::LoCKey, Some(s)) => {
            let g = gamma_analytic(&s);
            (Some(g), Some(mse_prediction(g, &s)))
        }
    };
    let gamma_mean = gamma
        .as_ref()
        .map(|g| pilots.iter().map(|&k| g.values()[k].norm()).sum::<f64>() / pilots.len() as f64);

    Ok(ResultRow {
        scheme: cell.scheme,
        snr_db: cell.snr_db,
        n_units: cell.n_units,
        attacked_units: cell.attacked_units,
        rho_empirical,
        rho_analytic,
        gamma: gamma_mean,
        mse_empirical,
        mse_analytic,
        csk_bits: cfg.metric.bit_rate().then_some(metrics.csk_bits),
        csk_info: cfg.metric.information().then_some(metrics.csk_info),
        kdr: metrics.kdr,
        trials: cfg.trials,
        status: "ok".into(),
    })
}

/// Runs every cell. `jobs = 0` uses all cores. Failed cells are reported in
/// their row's `status` field.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| {
        cells(cfg)
            .iter()
            .map(|cell| run_cell(cfg, cell).unwrap_or_else(|e| ResultRow::failed(cell, cfg.trials, &e)))
            .collect()
    }))
}
