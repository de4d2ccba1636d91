//! Experiment runners: the field-trial table, Monte-Carlo sessions, the
//! distance sweep and signal-mean optimisation.

pub mod config;
pub mod optimize;
pub mod sweep;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::attacks::{eve_advantage, Advantage, EveModel};
use crate::channel::Link;
use crate::decoy::{estimate, DecoyError, DecoyEstimates, GainSet};
use crate::encoding::Basis;
use crate::protocol::{run_session, ProtocolError, PulseRecord, SessionConfig, SessionStatistics};
use crate::security::{secure_key_rate, SecurityError, SecurityInputs, SecurityReport};

pub use config::{ConfigError, ExperimentConfig, Mode, SweepConfig};
pub use optimize::{optimize_mu, OptimizeResult};
pub use sweep::{cutoff_km, optimize_link, sweep_fig3, write_sweep_csv, SweepRow};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("decoy estimation failed: {0}")]
    Decoy(#[from] DecoyError),
    #[error(transparent)]
    Security(#[from] SecurityError),
}

/// Measured field-trial values at 50.4 km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table2Fixture {
    pub length_km: f64,
    pub gains_x: GainSet,
    pub gains_z: GainSet,
    /// X-basis BER.
    pub e: f64,
    pub f: f64,
    pub block_size: f64,
}

impl Default for Table2Fixture {
    fn default() -> Self {
        Self {
            length_km: 50.4,
            gains_x: GainSet {
                basis: Basis::X,
                q_u: 1.21e-4,
                q_v: 3.96e-5,
                q_0: 3.67e-7,
                e_v: 0.0,
                u: 0.6,
                v: 0.2,
            },
            gains_z: GainSet {
                basis: Basis::Z,
                q_u: 1.97e-2,
                q_v: 6.32e-3,
                q_0: 3.81e-7,
                e_v: 0.0006,
                u: 0.6,
                v: 0.2,
            },
            e: 0.0064,
            f: 1.2,
            block_size: 3e7,
        }
    }
}

/// Published table row, for comparison only.
pub mod published {
    pub const DELTA1: f64 = 0.4797;
    pub const DELTA0: f64 = 0.0017;
    pub const E_M1: f64 = 0.0008;
    pub const SKR: f64 = 4.956e-5;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Result {
    pub fixture: Table2Fixture,
    pub estimates: DecoyEstimates,
    pub report: SecurityReport,
}

pub fn run_table2() -> Result<Table2Result, ExperimentError> {
    run_table2_with(Table2Fixture::default())
}

/// Decoy estimation and key rate chained from the fixture's gains.
pub fn run_table2_with(fixture: Table2Fixture) -> Result<Table2Result, ExperimentError> {
    let estimates = estimate(&fixture.gains_x, &fixture.gains_z)?;
    let report = secure_key_rate(&SecurityInputs {
        q: fixture.gains_x.q_u,
        delta1: estimates.delta1,
        delta0: estimates.delta0,
        e_m1: estimates.e_m1,
        e: fixture.e,
        f: fixture.f,
    })?;
    Ok(Table2Result {
        fixture,
        estimates,
        report,
    })
}

/// Share of windows usable for key: Bob in X, Alice encoding, signal class.
pub fn key_throughput(session: &SessionConfig) -> f64 {
    (1.0 - session.q_z_probability) * (1.0 - session.p_monitor) * session.schedule.p_signal
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub stats: SessionStatistics,
    pub estimates: Option<DecoyEstimates>,
    /// Zero-rate report when estimation aborted.
    pub report: SecurityReport,
    /// Why estimation failed, if it did.
    pub aborted: Option<String>,
    pub monitor_error: f64,
    pub advantage: Option<Advantage>,
    pub transcript: Option<Vec<PulseRecord>>,
}

impl MonteCarloReport {
    pub fn skr(&self) -> f64 {
        self.report.skr
    }
}

/// Runs a session, estimates the decoy parameters from its measured gains
/// and evaluates the key rate.
pub fn run_montecarlo(config: &ExperimentConfig, attack: Option<&mut EveModel>) -> Result<MonteCarloReport, ExperimentError> {
    config.validate()?;
    run_montecarlo_on(&config.session, &config.link, config.f, config.include_overheads, attack)
}

pub fn run_montecarlo_on(
    session: &SessionConfig,
    link: &Link,
    f: f64,
    include_overheads: bool,
    mut attack: Option<&mut EveModel>,
) -> Result<MonteCarloReport, ExperimentError> {
    let outcome = run_session(session, link, attack.as_deref_mut())?;
    let stats = outcome.stats;
    let gx = stats.gain_set(Basis::X, &session.schedule);
    let gz = stats.gain_set(Basis::Z, &session.schedule);
    let e = stats.key_error_rate();
    let (estimates, aborted) = match estimate(&gx, &gz) {
        Ok(est) => (Some(est), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let inputs = SecurityInputs {
        q: gx.q_u,
        delta1: estimates.as_ref().map_or(0.0, |d| d.delta1),
        delta0: estimates.as_ref().map_or(0.0, |d| d.delta0),
        e_m1: estimates.as_ref().map_or(0.5, |d| d.e_m1),
        e,
        f,
    };
    let mut report = secure_key_rate(&inputs)?;
    if aborted.is_some() {
        report.skr_raw = report.skr_raw.min(0.0);
        report.skr = 0.0;
    }
    if include_overheads {
        let k = key_throughput(session);
        report.skr_raw *= k;
        report.skr *= k;
    }
    let advantage = attack.as_deref().filter(|m| m.is_active()).map(|m| eve_advantage(m, &stats));
    Ok(MonteCarloReport {
        monitor_error: stats.monitor_error_rate(),
        stats,
        estimates,
        report,
        aborted,
        advantage,
        transcript: outcome.transcript,
    })
}

/// Flat key → value summary of a security report.
pub fn summary_json(report: &SecurityReport, extra: &[(&str, Value)]) -> Value {
    let mut map = Map::new();
    for (k, v) in report.fields() {
        map.insert(k.to_owned(), Value::from(v));
    }
    if let Some(eig) = report.gram_eigenvalues {
        for (i, l) in eig.iter().enumerate() {
            map.insert(format!("gram_eigenvalue_{i}"), Value::from(*l));
        }
    }
    for (k, v) in extra {
        map.insert((*k).to_owned(), v.clone());
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::security::binary_entropy;

    #[test]
    fn zero_ber_removes_the_correction_term() {
        let fixture = Table2Fixture {
            e: 0.0,
            ..Table2Fixture::default()
        };
        let r = run_table2_with(fixture).unwrap();
        let est = &r.estimates;
        let h = binary_entropy(est.e_m1).unwrap();
        let exact = 1.21e-4 * (est.delta1 - est.delta1 * h + est.delta0);
        assert!((r.report.skr - exact).abs() < 1e-18);
    }

    #[test]
    fn table2_is_chained_from_gains() {
        let r = run_table2().unwrap();
        assert!((r.estimates.delta0 - published::DELTA0).abs() < 5e-5);
        assert!((r.report.skr / published::SKR - 1.0).abs() < 5e-3);
        assert_eq!(r.report.inputs.q, r.fixture.gains_x.q_u);
    }

    #[test]
    fn summary_is_flat() {
        let r = run_table2().unwrap();
        let v = summary_json(&r.report, &[("mode", Value::from("table2"))]);
        let obj = v.as_object().unwrap();
        assert!(obj.values().all(|x| !x.is_object() && !x.is_array()));
        assert_eq!(obj["mode"], "table2");
        assert!(obj.contains_key("skr"));
    }

    #[test]
    fn throughput_factor() {
        let s = SessionConfig::default();
        assert!((key_throughput(&s) - 0.25 * 0.6).abs() < 1e-15);
    }
}
