//! Flat `section.key = value` configuration files.
//!
//! ```text
//! # 50.4 km field link
//! mode = run
//! channel.fiber_length_km = 50.4
//! session.num_windows = 10000000
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::channel::{dead_time_windows, Link};
use crate::protocol::SessionConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Table2Analytic,
    MonteCarloSession,
    SweepFig3,
    OptimizeMu,
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "table2" => Ok(Mode::Table2Analytic),
            "run" => Ok(Mode::MonteCarloSession),
            "sweep" => Ok(Mode::SweepFig3),
            "optimize-mu" => Ok(Mode::OptimizeMu),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lengths_km: Vec<f64>,
    pub repetition_rates_hz: Vec<f64>,
    pub backscatter_enabled: bool,
}

impl Default for SweepConfig {
    /// 0–150 km in 2 km steps at 50 MHz and 1 GHz.
    fn default() -> Self {
        Self {
            lengths_km: (0..=75).map(|k| 2.0 * k as f64).collect(),
            repetition_rates_hz: vec![50e6, 1e9],
            backscatter_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub link: Link,
    pub session: SessionConfig,
    pub sweep: Option<SweepConfig>,
    /// Reconciliation efficiency.
    pub f: f64,
    /// Scale key rates by the share of windows that can carry key.
    pub include_overheads: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Table2Analytic,
            link: Link::experiment_50km(),
            session: SessionConfig::default(),
            sweep: None,
            f: 1.2,
            include_overheads: false,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    /// The simulated link of the distance sweep: no excess return loss.
    pub fn fig3() -> Self {
        Self {
            mode: Mode::SweepFig3,
            link: Link::default(),
            sweep: Some(SweepConfig::default()),
            ..Self::default()
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        text.parse()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.link.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.session.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.f >= 1.0 && self.f.is_finite()) {
            return Err(ConfigError::Invalid(format!("security.f = {} must be >= 1", self.f)));
        }
        if self.mode == Mode::SweepFig3 {
            let s = self
                .sweep
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("sweep mode needs sweep.* keys".into()))?;
            if s.lengths_km.is_empty() || s.repetition_rates_hz.is_empty() {
                return Err(ConfigError::Invalid("sweep lists must be non-empty".into()));
            }
            if s.lengths_km.iter().any(|&l| !(l >= 0.0)) || s.repetition_rates_hz.iter().any(|&r| !(r > 0.0)) {
                return Err(ConfigError::Invalid("sweep lengths must be >= 0 and rates > 0".into()));
            }
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Comma list, or `start:stop:step` (inclusive).
fn parse_list(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (a, b, step): (f64, f64, f64) = (parts[0].parse().ok()?, parts[1].parse().ok()?, parts[2].parse().ok()?);
        if !(step > 0.0) || b < a {
            return None;
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Some((0..=n).map(|k| a + step * k as f64).collect());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut dead_time_set = false;
        let mut sweep: Option<SweepConfig> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_owned(),
                value: value.to_owned(),
            };
            let num = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<u64>().map_err(|_| bad());
            let flag = || parse_bool(value).ok_or_else(bad);
            let ch = &mut cfg.link.channel;
            let s = &mut cfg.session;
            match key {
                "mode" => cfg.mode = value.parse().map_err(|_| bad())?,
                "channel.fiber_length_km" => ch.fiber_length_km = num()?,
                "channel.fiber_loss_db_per_km" => ch.fiber_loss_db_per_km = num()?,
                "channel.encode_loss_db" => ch.encode_loss_db = num()?,
                "channel.decode_loss_db" => ch.decode_loss_db = num()?,
                "channel.excess_loss_db" => ch.excess_loss_db = num()?,
                "channel.backscatter_ratio_db" => ch.backscatter_ratio_db = num()?,
                "channel.backscatter_gate_fraction" => ch.backscatter_gate_fraction = num()?,
                "channel.backscatter_enabled" => ch.backscatter_enabled = flag()?,
                "channel.repetition_rate_hz" => ch.repetition_rate_hz = num()?,
                "channel.coupler_split" => ch.coupler_split = num()?,
                "detector.efficiency" => {
                    cfg.link.bob.efficiency = num()?;
                    cfg.link.alice.efficiency = num()?;
                }
                "detector.dark_count_prob" => {
                    cfg.link.bob.dark_count_prob = num()?;
                    cfg.link.alice.dark_count_prob = num()?;
                }
                "detector.dead_time_windows" => {
                    let w = u32::try_from(int()?).map_err(|_| bad())?;
                    cfg.link.bob.dead_time_windows = w;
                    cfg.link.alice.dead_time_windows = w;
                    dead_time_set = true;
                }
                "errors.electronic" => cfg.link.floors.electronic = num()?,
                "errors.extinction" => cfg.link.floors.extinction = num()?,
                "session.num_windows" => s.num_windows = int()?,
                "session.q_z_probability" => s.q_z_probability = num()?,
                "session.p_monitor" => s.p_monitor = num()?,
                "session.seed" => s.seed = int()?,
                "session.batch_size" => s.batch_size = int()?,
                "session.record_transcript" => s.record_transcript = flag()?,
                "session.signal_mean" => s.schedule.signal_mean = num()?,
                "session.decoy_mean" => s.schedule.decoy_mean = num()?,
                "session.p_signal" => s.schedule.p_signal = num()?,
                "session.p_decoy" => s.schedule.p_decoy = num()?,
                "session.p_vacuum" => s.schedule.p_vacuum = num()?,
                "security.f" => cfg.f = num()?,
                "security.include_overheads" => cfg.include_overheads = flag()?,
                "sweep.lengths_km" => sweep.get_or_insert_with(SweepConfig::default).lengths_km = parse_list(value).ok_or_else(bad)?,
                "sweep.repetition_rates_hz" => {
                    sweep.get_or_insert_with(SweepConfig::default).repetition_rates_hz = parse_list(value).ok_or_else(bad)?
                }
                "sweep.backscatter_enabled" => sweep.get_or_insert_with(SweepConfig::default).backscatter_enabled = flag()?,
                "output.path" => cfg.output_path = Some(PathBuf::from(value)),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_owned(),
                    })
                }
            }
        }
        if !dead_time_set {
            let w = dead_time_windows(15e-9, cfg.link.channel.repetition_rate_hz);
            cfg.link.bob.dead_time_windows = w;
            cfg.link.alice.dead_time_windows = w;
        }
        if cfg.mode == Mode::SweepFig3 && sweep.is_none() {
            sweep = Some(SweepConfig::default());
        }
        cfg.sweep = sweep;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg: ExperimentConfig = "
            # comment
            mode = run
            channel.fiber_length_km = 25   # trailing
            channel.repetition_rate_hz = 1e9
            session.num_windows = 1000
            session.seed = 7
            security.f = 1.1
        "
        .parse()
        .unwrap();
        assert_eq!(cfg.mode, Mode::MonteCarloSession);
        assert_eq!(cfg.link.channel.fiber_length_km, 25.0);
        assert_eq!(cfg.link.bob.dead_time_windows, 15);
        assert_eq!(cfg.session.num_windows, 1000);
        assert_eq!(cfg.session.seed, 7);
        assert_eq!(cfg.f, 1.1);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = "channel.fibre_length = 3".parse::<ExperimentConfig>().unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 1,
                key: "channel.fibre_length".into()
            }
        );
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!("just words".parse::<ExperimentConfig>(), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(
            "\nsession.seed = -1".parse::<ExperimentConfig>(),
            Err(ConfigError::BadValue { line: 2, .. })
        ));
        assert!(matches!("session.p_monitor = 2".parse::<ExperimentConfig>(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn sweep_lists() {
        let cfg: ExperimentConfig = "mode = sweep\nsweep.lengths_km = 0:10:2.5\nsweep.repetition_rates_hz = 5e7, 1e9\nsweep.backscatter_enabled = off"
            .parse()
            .unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.lengths_km, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(s.repetition_rates_hz, vec![5e7, 1e9]);
        assert!(!s.backscatter_enabled);
        assert!("mode = sweep\nsweep.lengths_km = 5:1:1".parse::<ExperimentConfig>().is_err());
    }
}
