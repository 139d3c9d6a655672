//! Experiment configuration: a flat YAML mapping of dotted keys.
//!
//! ```yaml
//! ris.n_units: 30
//! ris.attacked_units: 5
//! harness.snr_grid_db: [0, 10, 20]
//! ```
//!
//! Nested mappings (`ris: {n_units: 30}`) are flattened to the same keys.
//! Absent keys take the default link parameters.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_yaml::Value;
use thiserror::Error;

use crate::fading::{Direction, HardwareFingerprint, TapProfile};
use crate::protocol::{coherence_time_s, Party, Scenario, Scheme, DEFAULT_GAMMA_WINDOW};
use crate::ris::JammerConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{}: {message}", keys.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", "))]
    Invariant { keys: Vec<String>, message: String },
}

impl ConfigError {
    fn value(key: &str, message: impl Into<String>) -> Self {
        ConfigError::InvalidValue { key: key.to_string(), message: message.into() }
    }

    fn invariant(keys: &[&str], message: impl Into<String>) -> Self {
        ConfigError::Invariant { keys: keys.iter().map(|k| k.to_string()).collect(), message: message.into() }
    }
}

/// Which C_SK variant(s) the CSV reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    BitRate,
    Information,
    Both,
}

impl Metric {
    pub fn bit_rate(self) -> bool {
        matches!(self, Metric::BitRate | Metric::Both)
    }

    pub fn information(self) -> bool {
        matches!(self, Metric::Information | Metric::Both)
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bit_rate" => Ok(Metric::BitRate),
            "information" => Ok(Metric::Information),
            "both" => Ok(Metric::Both),
            other => Err(format!("expected bit_rate, information or both, got `{other}`")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::BitRate => "bit_rate",
            Metric::Information => "information",
            Metric::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Link description; `snr`, `n_units` and the jammer are overridden per sweep cell.
    pub scenario: Scenario,
    pub gamma_window: usize,
    pub schemes: Vec<Scheme>,
    /// `+inf` entries run the noiseless model.
    pub snr_grid_db: Vec<f64>,
    pub n_units_grid: Vec<usize>,
    pub attacked_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub metric: Metric,
    pub info_cap_bits: f64,
}

pub fn default_snr_grid() -> Vec<f64> {
    (0..=6).map(|i| 5.0 * i as f64).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scenario = Scenario::default();
        ExperimentConfig {
            n_units_grid: vec![scenario.n_units],
            attacked_grid: vec![scenario.jammer.attacked_count],
            scenario,
            gamma_window: DEFAULT_GAMMA_WINDOW,
            schemes: Scheme::ALL.to_vec(),
            snr_grid_db: default_snr_grid(),
            trials: 1000,
            master_seed: 0,
            metric: Metric::Both,
            info_cap_bits: crate::keygen::DEFAULT_INFO_CAP_BITS,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: Value = serde_yaml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut entries = Vec::new();
    match root {
        Value::Null => {}
        Value::Mapping(_) => flatten("", &root, &mut entries)?,
        _ => return Err(ConfigError::Parse("top level must be a mapping of keys to values".into())),
    }
    let mut seen = std::collections::HashSet::new();
    for (k, _) in &entries {
        if !seen.insert(k.clone()) {
            return Err(ConfigError::value(k, "given more than once"));
        }
    }
    build(entries)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) -> Result<(), ConfigError> {
    match v {
        Value::Mapping(m) => {
            for (k, v) in m {
                let k = match k {
                    Value::String(s) => s.clone(),
                    other => return Err(ConfigError::Parse(format!("non-string key {other:?}"))),
                };
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
            Ok(())
        }
        _ => {
            out.push((prefix.to_string(), v.clone()));
            Ok(())
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64().ok_or_else(|| ConfigError::value(key, format!("expected a number, got {}", describe(v))))
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| ConfigError::value(key, format!("expected a non-negative integer, got {}", describe(v))))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| ConfigError::value(key, format!("expected a string, got {}", describe(v))))
}

fn as_list<'a>(key: &str, v: &'a Value) -> Result<&'a [Value], ConfigError> {
    match v {
        Value::Sequence(s) => Ok(s),
        _ => Err(ConfigError::value(key, format!("expected a list, got {}", describe(v)))),
    }
}

fn describe(v: &Value) -> String {
    serde_yaml::to_string(v).map(|s| s.trim().to_string()).unwrap_or_else(|_| "?".into())
}

fn f64_list(key: &str, v: &Value) -> Result<Vec<f64>, ConfigError> {
    as_list(key, v)?.iter().map(|x| as_f64(key, x)).collect()
}

fn usize_list(key: &str, v: &Value) -> Result<Vec<usize>, ConfigError> {
    as_list(key, v)?.iter().map(|x| as_usize(key, x)).collect()
}

fn parse_enum<T>(key: &str, v: &Value) -> Result<T, ConfigError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    as_str(key, v)?.parse().map_err(|e: T::Err| ConfigError::value(key, e.to_string()))
}

/// Profile keys: `<prefix>.delays_ms` and `<prefix>.powers_db`.
const PROFILES: [&str; 5] = [
    "channel.alice_bob",
    "channel.alice_ris",
    "channel.ris_bob",
    "hardware.alice_to_bob",
    "hardware.bob_to_alice",
];

/// Delays and powers of one tap profile, each optional until both are read.
type ProfileParts = (Option<Vec<f64>>, Option<Vec<f64>>);

fn build(entries: Vec<(String, Value)>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let sc = &mut cfg.scenario;
    let mut profile_parts: [ProfileParts; 5] = Default::default();
    let mut n_units_grid = None;
    let mut attacked_grid = None;
    let mut scheme = None;
    let mut schemes = None;
    let mut coherence_ms = None;

    for (key, v) in &entries {
        let k = key.as_str();
        if let Some((i, field)) = PROFILES
            .iter()
            .enumerate()
            .find_map(|(i, p)| k.strip_prefix(p).and_then(|r| r.strip_prefix('.')).map(|f| (i, f)))
        {
            match field {
                "delays_ms" => profile_parts[i].0 = Some(f64_list(k, v)?),
                "powers_db" => profile_parts[i].1 = Some(f64_list(k, v)?),
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
            continue;
        }
        match k {
            "channel.max_doppler_hz" => sc.max_doppler_hz = as_f64(k, v)?,
            "ris.n_units" => sc.n_units = as_usize(k, v)?,
            "ris.attacked_units" => sc.jammer = JammerConfig::new(as_usize(k, v)?),
            "ris.jammed_receiver" => {
                sc.jammed_receiver = match as_str(k, v)? {
                    "alice" => Party::Alice,
                    "bob" => Party::Bob,
                    other => return Err(ConfigError::value(k, format!("expected alice or bob, got `{other}`"))),
                }
            }
            "ofdm.symbol_length" => sc.ofdm.symbol_length = as_usize(k, v)?,
            "ofdm.subcarrier_spacing_khz" => sc.ofdm.subcarrier_spacing_hz = as_f64(k, v)? * 1e3,
            "ofdm.bandwidth_mhz" => sc.ofdm.bandwidth_hz = as_f64(k, v)? * 1e6,
            "ofdm.carrier_band1_ghz" => sc.ofdm.carrier_band1_hz = as_f64(k, v)? * 1e9,
            "ofdm.carrier_band2_ghz" => sc.ofdm.carrier_band2_hz = as_f64(k, v)? * 1e9,
            "ofdm.cp_length" => sc.ofdm.cp_length = as_usize(k, v)?,
            "ofdm.pilot_interval" => sc.ofdm.pilot_interval = as_usize(k, v)?,
            "ofdm.modulation" => {
                if !as_str(k, v)?.eq_ignore_ascii_case("qpsk") {
                    return Err(ConfigError::value(k, "only qpsk is supported"));
                }
            }
            "protocol.scheme" => scheme = Some(parse_enum::<Scheme>(k, v)?),
            "protocol.gamma_window" => cfg.gamma_window = as_usize(k, v)?,
            "protocol.coherence_slots" => sc.loopback_gap_slots = as_usize(k, v)? as u64,
            "protocol.coherence_time_ms" => coherence_ms = Some(as_f64(k, v)?),
            "keygen.quantizer" => {
                if as_str(k, v)? != "gray2" {
                    return Err(ConfigError::value(k, "only gray2 is supported"));
                }
            }
            "keygen.metric" => cfg.metric = parse_enum(k, v)?,
            "keygen.info_cap_bits" => cfg.info_cap_bits = as_f64(k, v)?,
            "harness.snr_grid_db" => cfg.snr_grid_db = f64_list(k, v)?,
            "harness.trials" => cfg.trials = as_usize(k, v)?,
            "harness.master_seed" => {
                cfg.master_seed = v.as_u64().ok_or_else(|| ConfigError::value(k, "expected a u64"))?
            }
            "harness.schemes" => {
                schemes = Some(
                    as_list(k, v)?
                        .iter()
                        .map(|s| parse_enum::<Scheme>(k, s))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            "harness.n_units_grid" => n_units_grid = Some(usize_list(k, v)?),
            "harness.attacked_grid" => attacked_grid = Some(usize_list(k, v)?),
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
    }

    for (i, (delays, powers)) in profile_parts.into_iter().enumerate() {
        if delays.is_none() && powers.is_none() {
            continue;
        }
        let current = match i {
            0 => &sc.alice_bob,
            1 => &sc.alice_ris,
            2 => &sc.ris_bob,
            3 => sc.fp_alice_to_bob.profile(),
            _ => sc.fp_bob_to_alice.profile(),
        };
        let delays = delays.unwrap_or_else(|| current.delays_ms().to_vec());
        let powers = powers.unwrap_or_else(|| current.powers_db().to_vec());
        let (dk, pk) = (format!("{}.delays_ms", PROFILES[i]), format!("{}.powers_db", PROFILES[i]));
        let p = TapProfile::new(delays, powers).map_err(|e| ConfigError::invariant(&[&dk, &pk], e.to_string()))?;
        match i {
            0 => sc.alice_bob = p,
            1 => sc.alice_ris = p,
            2 => sc.ris_bob = p,
            3 => sc.fp_alice_to_bob = HardwareFingerprint::new(p, Direction::AliceToBob),
            _ => sc.fp_bob_to_alice = HardwareFingerprint::new(p, Direction::BobToAlice),
        }
    }

    sc.slot_duration_s = match coherence_ms {
        Some(ms) => ms * 1e-3,
        None => coherence_time_s(sc.max_doppler_hz),
    };
    cfg.schemes = match (scheme, schemes) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::invariant(&["protocol.scheme", "harness.schemes"], "give one or the other"))
        }
        (Some(s), None) => vec![s],
        (None, Some(list)) => list,
        (None, None) => cfg.schemes,
    };
    cfg.n_units_grid = n_units_grid.unwrap_or_else(|| vec![cfg.scenario.n_units]);
    cfg.attacked_grid = attacked_grid.unwrap_or_else(|| vec![cfg.scenario.jammer.attacked_count]);
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sc = &self.scenario;
        let o = &sc.ofdm;
        if o.symbol_length == 0 {
            return Err(ConfigError::value("ofdm.symbol_length", "must be at least 1"));
        }
        if o.cp_length >= o.symbol_length {
            return Err(ConfigError::invariant(
                &["ofdm.cp_length", "ofdm.symbol_length"],
                format!("cyclic prefix {} must be shorter than the symbol {}", o.cp_length, o.symbol_length),
            ));
        }
        if o.pilot_interval == 0 {
            return Err(ConfigError::value("ofdm.pilot_interval", "must be at least 1"));
        }
        for (key, v) in [
            ("ofdm.subcarrier_spacing_khz", o.subcarrier_spacing_hz),
            ("ofdm.bandwidth_mhz", o.bandwidth_hz),
            ("ofdm.carrier_band1_ghz", o.carrier_band1_hz),
            ("ofdm.carrier_band2_ghz", o.carrier_band2_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::value(key, "must be positive"));
            }
        }
        if !(sc.max_doppler_hz.is_finite() && sc.max_doppler_hz >= 0.0) {
            return Err(ConfigError::value("channel.max_doppler_hz", "must be finite and >= 0"));
        }
        if !(sc.slot_duration_s.is_finite() && sc.slot_duration_s >= 0.0) {
            return Err(ConfigError::value("protocol.coherence_time_ms", "must be finite and >= 0"));
        }
        if sc.n_units == 0 {
            return Err(ConfigError::value("ris.n_units", "must be at least 1"));
        }
        if sc.jammer.attacked_count > sc.n_units {
            return Err(ConfigError::invariant(
                &["ris.attacked_units", "ris.n_units"],
                format!("{} attacked units exceed the {} available", sc.jammer.attacked_count, sc.n_units),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(ConfigError::value("harness.snr_grid_db", "must not be empty"));
        }
        if let Some(s) = self.snr_grid_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(ConfigError::value("harness.snr_grid_db", format!("{s} is not a usable SNR")));
        }
        if self.trials == 0 {
            return Err(ConfigError::value("harness.trials", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(ConfigError::value("harness.schemes", "must not be empty"));
        }
        if self.n_units_grid.is_empty() || self.n_units_grid.contains(&0) {
            return Err(ConfigError::value("harness.n_units_grid", "must be non-empty with entries >= 1"));
        }
        if self.attacked_grid.is_empty() {
            return Err(ConfigError::value("harness.attacked_grid", "must not be empty"));
        }
        let n_min = *self.n_units_grid.iter().min().unwrap();
        if let Some(k) = self.attacked_grid.iter().find(|k| **k > n_min) {
            return Err(ConfigError::invariant(
                &["harness.attacked_grid", "harness.n_units_grid"],
                format!("{k} attacked units exceed the {n_min}-unit RIS"),
            ));
        }
        if self.schemes.contains(&Scheme::LoCKey) && self.gamma_window == 0 {
            return Err(ConfigError::value("protocol.gamma_window", "must be at least 1"));
        }
        if !(self.info_cap_bits.is_finite() && self.info_cap_bits > 0.0) {
            return Err(ConfigError::value("keygen.info_cap_bits", "must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.scenario.ofdm.symbol_length, 64);
        assert_eq!(cfg.scenario.ofdm.subcarrier_spacing_hz, 15e3);
        assert_eq!(cfg.scenario.ofdm.cp_length, 16);
        assert_eq!(cfg.scenario.ofdm.pilot_interval, 5);
        assert_eq!(cfg.scenario.max_doppler_hz, 5.0);
        assert_eq!(cfg.scenario.n_units, 30);
        assert_eq!(cfg.trials, 1000);
    }

    #[test]
    fn single_override() {
        let cfg = parse_config("ris.n_units: 10").unwrap();
        let mut want = ExperimentConfig::default();
        want.scenario.n_units = 10;
        want.n_units_grid = vec![10];
        assert_eq!(cfg, want);
    }

    #[test]
    fn nested_form_is_equivalent() {
        let flat = parse_config("ris.n_units: 12\nofdm.pilot_interval: 4").unwrap();
        let nested = parse_config("ris:\n  n_units: 12\nofdm:\n  pilot_interval: 4").unwrap();
        assert_eq!(flat, nested);
    }

    #[test]
    fn attacked_beyond_units_names_both_keys() {
        let err = parse_config("ris.attacked_units: 40\nris.n_units: 30").unwrap_err().to_string();
        assert!(err.contains("ris.attacked_units") && err.contains("ris.n_units"), "{err}");
    }

    #[test]
    fn diagnostics_name_the_key() {
        let err = parse_config("ofdm.pilot_interval: zero").unwrap_err().to_string();
        assert!(err.contains("ofdm.pilot_interval"), "{err}");
        let err = parse_config("ris.colour: red").unwrap_err().to_string();
        assert!(err.contains("ris.colour"), "{err}");
        let err = parse_config("channel.alice_bob.delays_ms: [0, 1]").unwrap_err().to_string();
        assert!(err.contains("channel.alice_bob.delays_ms") && err.contains("powers_db"), "{err}");
        assert!(matches!(parse_config("- 1\n- 2"), Err(ConfigError::Parse(_))));
        assert!(matches!(parse_config("a: [1"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn missing_file() {
        let err = load_config(Path::new("/nonexistent/cfg.yaml")).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }

    #[test]
    fn scheme_selection() {
        let cfg = parse_config("protocol.scheme: lockey").unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::LoCKey]);
        let cfg = parse_config("harness.schemes: [loopback, non_loopback]").unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::TraditionalLoopback, Scheme::NonLoopback]);
        assert!(parse_config("protocol.scheme: lockey\nharness.schemes: [lockey]").is_err());
    }

    #[test]
    fn infinite_snr_allowed() {
        let cfg = parse_config("harness.snr_grid_db: [.inf, 10]").unwrap();
        assert!(cfg.snr_grid_db[0].is_infinite());
        assert!(parse_config("harness.snr_grid_db: []").is_err());
    }
}
