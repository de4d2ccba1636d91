//! Two-intensity (signal, decoy, vacuum) decoy-state estimation.
//!
//! From the X-basis gains at Bob the single-photon yield lower bound gives
//! the fractions of detections due to single-photon and vacuum pulses. From
//! the Z-basis gains and decoy error rate at Alice's monitor it gives an
//! upper bound on the single-photon monitor error `e_m1`.

use serde::Serialize;
use thiserror::Error;

use crate::encoding::Basis;

#[derive(Debug, Error, PartialEq)]
pub enum DecoyError {
    #[error("signal mean {u} must exceed decoy mean {v} > 0")]
    Singular { u: f64, v: f64 },
    #[error("signal gain is zero")]
    ZeroSignalGain,
    #[error("single-photon yield bound {0:e} is not positive; e_m1 cannot be estimated")]
    NonPositiveYield(f64),
    #[error("{name} = {value} is not a probability")]
    Domain { name: &'static str, value: f64 },
}

/// Why an estimate was clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Diagnostic {
    NegativeYield,
    Delta0OutOfRange,
    Delta1OutOfRange,
    FractionSumExceedsOne,
    NegativeEm1,
    Em1AboveHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainSet {
    pub basis: Basis,
    pub q_u: f64,
    pub q_v: f64,
    pub q_0: f64,
    /// Decoy error rate; only used for the Z basis.
    pub e_v: f64,
    pub u: f64,
    pub v: f64,
}

impl GainSet {
    fn validate(&self) -> Result<(), DecoyError> {
        if !(self.u > self.v && self.v > 0.0) {
            return Err(DecoyError::Singular { u: self.u, v: self.v });
        }
        for (name, value) in [("Q_u", self.q_u), ("Q_v", self.q_v), ("Q_0", self.q_0), ("E_v", self.e_v)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DecoyError::Domain { name, value });
            }
        }
        Ok(())
    }

    /// Same set with every gain multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            q_u: self.q_u * k,
            q_v: self.q_v * k,
            q_0: self.q_0 * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YieldBound {
    pub raw: f64,
    pub value: f64,
}

impl YieldBound {
    pub fn clamped(&self) -> bool {
        self.raw != self.value
    }
}

/// `Y^L = u·[Q_v e^v − (v²/u²)·Q_u e^u − ((u² − v²)/u²)·Q₀] / (uv − v²)`.
pub fn yield_lower_bound(g: &GainSet) -> Result<YieldBound, DecoyError> {
    g.validate()?;
    let (u, v) = (g.u, g.v);
    let raw = u * (g.q_v * v.exp() - v * v / (u * u) * g.q_u * u.exp() - (u * u - v * v) / (u * u) * g.q_0)
        / (u * v - v * v);
    Ok(YieldBound {
        raw,
        value: raw.max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fractions {
    pub y_l: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub delta0_raw: f64,
    pub delta1_raw: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// `Δ₀ = Q₀/Q_u·e^(−u)` and `Δ₁ = u/Q_u·e^(−u)·Y^L` from X-basis gains.
pub fn estimate_fractions(g_x: &GainSet) -> Result<Fractions, DecoyError> {
    g_x.validate()?;
    if g_x.q_u <= 0.0 {
        return Err(DecoyError::ZeroSignalGain);
    }
    let mut diagnostics = Vec::new();
    let y = yield_lower_bound(g_x)?;
    if y.clamped() {
        diagnostics.push(Diagnostic::NegativeYield);
    }
    let u = g_x.u;
    let delta0_raw = g_x.q_0 / g_x.q_u * (-u).exp();
    let delta1_raw = u / g_x.q_u * (-u).exp() * y.value;
    let mut delta0 = delta0_raw;
    let mut delta1 = delta1_raw;
    if !(0.0..=1.0).contains(&delta0) {
        diagnostics.push(Diagnostic::Delta0OutOfRange);
        delta0 = delta0.clamp(0.0, 1.0);
    }
    if !(0.0..=1.0).contains(&delta1) {
        diagnostics.push(Diagnostic::Delta1OutOfRange);
        delta1 = delta1.clamp(0.0, 1.0);
    }
    if delta0 + delta1 > 1.0 {
        diagnostics.push(Diagnostic::FractionSumExceedsOne);
        delta1 = 1.0 - delta0;
    }
    Ok(Fractions {
        y_l: y.value,
        delta0,
        delta1,
        delta0_raw,
        delta1_raw,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorErrorEstimate {
    pub y_l: f64,
    pub raw: f64,
    pub e_m1: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// `e_m1 = (E_v·Q_v·e^v − Q₀/2) / (v·Y^L)` from Z-basis monitor gains.
pub fn estimate_em1(g_z: &GainSet) -> Result<MonitorErrorEstimate, DecoyError> {
    let y = yield_lower_bound(g_z)?;
    if y.raw <= 0.0 {
        return Err(DecoyError::NonPositiveYield(y.raw));
    }
    let raw = (g_z.e_v * g_z.q_v * g_z.v.exp() - 0.5 * g_z.q_0) / (g_z.v * y.raw);
    let mut diagnostics = Vec::new();
    let e_m1 = if raw < 0.0 {
        diagnostics.push(Diagnostic::NegativeEm1);
        0.0
    } else if raw > 0.5 {
        diagnostics.push(Diagnostic::Em1AboveHalf);
        0.5
    } else {
        raw
    };
    Ok(MonitorErrorEstimate {
        y_l: y.raw,
        raw,
        e_m1,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoyEstimates {
    pub y_l_x: f64,
    pub y_l_z: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub e_m1: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl DecoyEstimates {
    pub fn clamped(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

pub fn estimate(g_x: &GainSet, g_z: &GainSet) -> Result<DecoyEstimates, DecoyError> {
    let fr = estimate_fractions(g_x)?;
    let em = estimate_em1(g_z)?;
    let mut diagnostics = fr.diagnostics;
    diagnostics.extend(em.diagnostics);
    Ok(DecoyEstimates {
        y_l_x: fr.y_l,
        y_l_z: em.y_l,
        delta0: fr.delta0,
        delta1: fr.delta1,
        e_m1: em.e_m1,
        diagnostics,
    })
}
