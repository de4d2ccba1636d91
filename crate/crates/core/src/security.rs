//! Collective-attack security analysis.
//!
//! Eve's most general forward-channel operation entangles the travelling
//! qubit with an ancilla:
//!
//! ```text
//! U|0⟩|ε⟩ = |0⟩|ε₀₀⟩ + |1⟩|ε₀₁⟩ = |φ₁⟩
//! U|1⟩|ε⟩ = |0⟩|ε₁₀⟩ + |1⟩|ε₁₁⟩ = |φ₂⟩
//! ```
//!
//! Alice's `σ_Z` turns these into `|φ₃⟩, |φ₄⟩`. The Gram matrix
//! `G_ij = ⟨φ_i|φ_j⟩ / 4` has the spectrum of the joint state Eve can hold,
//! with eigenvalues `(1 ± γ₁ ± γ₂)/4`. Subtracting the entropy `1` of each
//! encoded state gives the Holevo quantity bounding her information per
//! single photon. For attacks that disturb `|0⟩` and `|1⟩` equally this is
//! at most `h(e_m1)`; lopsided attacks can exceed `h(‖ε₀₁‖²)` while staying
//! below `h` of the mean monitor error.
//!
//! The secure key rate combines that bound with the decoy-estimated
//! single-photon and vacuum fractions:
//! `R = Q·[Δ₁ − Δ₁·h(e_m1) + Δ₀ − f·h(e)]`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

/// Ancilla dimension used for explicit attack realizations.
pub const ANCILLA_DIM: usize = 4;

pub type AncillaVec = [Complex64; ANCILLA_DIM];

#[derive(Debug, Error, PartialEq)]
pub enum SecurityError {
    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("ancilla realization violates unitarity by {residual:e}")]
    Unitarity { residual: f64 },
    #[error("overlaps are not realizable: {0}")]
    NonPhysical(&'static str),
    #[error("single-photon monitor error {0} exceeds 1/2")]
    MonitorErrorTooLarge(f64),
}

/// Binary Shannon entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64, SecurityError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(SecurityError::Domain { name: "x", value: x });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// `I_AB = Q·[1 − f·h(e)]`.
pub fn mutual_info_ab(q: f64, f: f64, e: f64) -> Result<f64, SecurityError> {
    check_unit("Q", q)?;
    if !(f >= 1.0 && f.is_finite()) {
        return Err(SecurityError::Domain { name: "f", value: f });
    }
    Ok(q * (1.0 - f * binary_entropy(e)?))
}

/// `I_E,1 = h(e_m1)`: the maximum of Eve's Holevo information over all
/// collective attacks producing single-photon monitor error `e_m1`.
pub fn eve_info_single_photon_bound(e_m1: f64) -> Result<f64, SecurityError> {
    check_unit("e_m1", e_m1)?;
    if e_m1 > 0.5 {
        return Err(SecurityError::MonitorErrorTooLarge(e_m1));
    }
    binary_entropy(e_m1)
}

fn check_unit(name: &'static str, value: f64) -> Result<(), SecurityError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SecurityError::Domain { name, value })
    }
}

/// The three overlaps that fix the Gram spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveOverlaps {
    /// `⟨ε₀₁|ε₀₁⟩`
    pub eps01_norm: f64,
    /// `⟨ε₁₀|ε₁₀⟩`
    pub eps10_norm: f64,
    /// `⟨ε₀₀|ε₁₀⟩`
    #[serde(skip)]
    pub delta: Complex64,
}

impl EveOverlaps {
    pub fn new(eps01_norm: f64, eps10_norm: f64, delta: Complex64) -> Result<Self, SecurityError> {
        check_unit("eps01_norm", eps01_norm)?;
        check_unit("eps10_norm", eps10_norm)?;
        // ⟨ε₀₀|ε₀₀⟩ = 1 − ⟨ε₀₁|ε₀₁⟩
        if delta.norm_sqr() > (1.0 - eps01_norm) * eps10_norm + 1e-12 {
            return Err(SecurityError::NonPhysical("|δ|² exceeds the Cauchy-Schwarz bound"));
        }
        let ov = Self {
            eps01_norm,
            eps10_norm,
            delta,
        };
        if ov.gamma1().abs() + ov.gamma2() > 1.0 + 1e-12 {
            return Err(SecurityError::NonPhysical("|γ₁| + γ₂ exceeds 1"));
        }
        Ok(ov)
    }

    /// No attack: `ε₀₀ = ε₁₁ = ε`, `ε₀₁ = ε₁₀ = 0`.
    pub fn identity() -> Self {
        Self {
            eps01_norm: 0.0,
            eps10_norm: 0.0,
            delta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn alpha(&self) -> f64 {
        0.5 - self.eps01_norm
    }

    pub fn beta(&self) -> f64 {
        self.eps10_norm - 0.5
    }

    pub fn gamma1(&self) -> f64 {
        self.alpha() + self.beta()
    }

    pub fn gamma2(&self) -> f64 {
        let d = self.alpha() - self.beta();
        (d * d + 4.0 * self.delta.norm_sqr()).sqrt()
    }

    /// Monitor error averaged over Bob's two Z states.
    pub fn mean_monitor_error(&self) -> f64 {
        0.5 * (self.eps01_norm + self.eps10_norm)
    }
}

fn inner(a: &AncillaVec, b: &AncillaVec) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &AncillaVec) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Concrete ancilla vectors for one collective attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncillaRealization {
    pub e00: AncillaVec,
    pub e01: AncillaVec,
    pub e10: AncillaVec,
    pub e11: AncillaVec,
}

fn zero_vec() -> AncillaVec {
    [Complex64::new(0.0, 0.0); ANCILLA_DIM]
}

fn basis_vec(i: usize) -> AncillaVec {
    let mut v = zero_vec();
    v[i] = Complex64::new(1.0, 0.0);
    v
}

fn random_gaussian<R: Rng + ?Sized, const N: usize>(rng: &mut R) -> [Complex64; N] {
    std::array::from_fn(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Removes the component of `v` along the unit vector `u`.
fn project_out<const N: usize>(v: &mut [Complex64; N], u: &[Complex64; N]) {
    let c: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    for (x, y) in v.iter_mut().zip(u) {
        *x -= c * y;
    }
}

fn normalize<const N: usize>(v: &mut [Complex64; N]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

impl AncillaRealization {
    pub fn identity() -> Self {
        Self {
            e00: basis_vec(0),
            e01: zero_vec(),
            e10: zero_vec(),
            e11: basis_vec(0),
        }
    }

    /// Haar-random attack: the images of `|0⟩|ε⟩` and `|1⟩|ε⟩` are two
    /// columns of a Haar unitary on qubit ⊗ ancilla.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut c0: [Complex64; 2 * ANCILLA_DIM] = random_gaussian(rng);
        normalize(&mut c0);
        let mut c1: [Complex64; 2 * ANCILLA_DIM] = random_gaussian(rng);
        project_out(&mut c1, &c0);
        normalize(&mut c1);
        let split = |c: &[Complex64; 2 * ANCILLA_DIM]| -> (AncillaVec, AncillaVec) {
            (
                std::array::from_fn(|i| c[i]),
                std::array::from_fn(|i| c[ANCILLA_DIM + i]),
            )
        };
        let (e00, e01) = split(&c0);
        let (e10, e11) = split(&c1);
        Self { e00, e01, e10, e11 }
    }

    /// Random attack flipping `|0⟩` and `|1⟩` with the same probability
    /// `error`, so that `⟨ε₀₁|ε₀₁⟩ = ⟨ε₁₀|ε₁₀⟩ = error`.
    pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, error: f64) -> Self {
        let unit = |rng: &mut R| {
            let mut v: AncillaVec = random_gaussian(rng);
            normalize(&mut v);
            v
        };
        let a = unit(rng);
        let b = unit(rng);
        let c = unit(rng);
        // ⟨ε₀₀|ε₁₀⟩ + ⟨ε₀₁|ε₁₁⟩ = 0 requires ⟨b|d⟩ = −⟨a|c⟩.
        let s = inner(&a, &c);
        let mut perp = unit(rng);
        project_out(&mut perp, &b);
        normalize(&mut perp);
        let t = (1.0 - s.norm_sqr()).max(0.0).sqrt();
        let d: AncillaVec = std::array::from_fn(|i| -s * b[i] + t * perp[i]);

        let keep = (1.0 - error).sqrt();
        let flip = error.sqrt();
        Self {
            e00: a.map(|x| x * keep),
            e01: b.map(|x| x * flip),
            e10: c.map(|x| x * flip),
            e11: d.map(|x| x * keep),
        }
    }

    /// Largest deviation from the isometry conditions.
    pub fn unitarity_residual(&self) -> f64 {
        let n0 = norm_sqr(&self.e00) + norm_sqr(&self.e01) - 1.0;
        let n1 = norm_sqr(&self.e10) + norm_sqr(&self.e11) - 1.0;
        let cross = inner(&self.e00, &self.e10) + inner(&self.e01, &self.e11);
        n0.abs().max(n1.abs()).max(cross.norm())
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        let residual = self.unitarity_residual();
        if residual > 1e-9 {
            Err(SecurityError::Unitarity { residual })
        } else {
            Ok(())
        }
    }

    pub fn overlaps(&self) -> EveOverlaps {
        EveOverlaps {
            eps01_norm: norm_sqr(&self.e01),
            eps10_norm: norm_sqr(&self.e10),
            delta: inner(&self.e00, &self.e10),
        }
    }

    /// `|φ₁⟩…|φ₄⟩` on qubit ⊗ ancilla, qubit index major.
    pub fn phi(&self) -> [[Complex64; 2 * ANCILLA_DIM]; 4] {
        let join = |lo: &AncillaVec, hi: &AncillaVec, sign: f64| -> [Complex64; 2 * ANCILLA_DIM] {
            std::array::from_fn(|i| {
                if i < ANCILLA_DIM {
                    lo[i]
                } else {
                    hi[i - ANCILLA_DIM] * sign
                }
            })
        };
        [
            join(&self.e00, &self.e01, 1.0),
            join(&self.e10, &self.e11, 1.0),
            join(&self.e00, &self.e01, -1.0),
            join(&self.e10, &self.e11, -1.0),
        ]
    }
}

/// `G_ij = ⟨φ_i|φ_j⟩ / 4`.
pub fn gram_matrix(realization: &AncillaRealization) -> Result<Matrix4<Complex64>, SecurityError> {
    realization.validate()?;
    let phi = realization.phi();
    Ok(Matrix4::from_fn(|i, j| {
        let ip: Complex64 = phi[i].iter().zip(&phi[j]).map(|(a, b)| a.conj() * b).sum();
        ip * 0.25
    }))
}

fn sorted<const N: usize>(mut v: [f64; N]) -> [f64; N] {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Spectrum of `G` by numeric diagonalization, ascending.
pub fn gram_eigenvalues_numeric(g: &Matrix4<Complex64>) -> [f64; 4] {
    let eig = SymmetricEigen::new(*g);
    sorted(std::array::from_fn(|i| eig.eigenvalues[i]))
}

/// `λ = (1 ± γ₁ ± γ₂)/4`, ascending.
pub fn gram_eigenvalues_closed_form(ov: &EveOverlaps) -> [f64; 4] {
    let g1 = ov.gamma1();
    let g2 = ov.gamma2();
    sorted([
        (1.0 + g1 + g2) / 4.0,
        (1.0 + g1 - g2) / 4.0,
        (1.0 - g1 + g2) / 4.0,
        (1.0 - g1 - g2) / 4.0,
    ])
}

/// `−Σ λ log₂ λ`, with non-positive eigenvalues contributing nothing.
pub fn von_neumann_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Holevo information `S(ρ^AE) − 1` of an explicit attack.
pub fn holevo_from_attack(ov: &EveOverlaps) -> f64 {
    von_neumann_entropy(&gram_eigenvalues_closed_form(ov)) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityInputs {
    /// Signal gain `Q`.
    pub q: f64,
    pub delta1: f64,
    pub delta0: f64,
    pub e_m1: f64,
    /// Key-basis error rate.
    pub e: f64,
    /// Reconciliation efficiency.
    pub f: f64,
}

impl SecurityInputs {
    pub fn validate(&self) -> Result<(), SecurityError> {
        check_unit("Q", self.q)?;
        check_unit("delta1", self.delta1)?;
        check_unit("delta0", self.delta0)?;
        check_unit("e", self.e)?;
        check_unit("e_m1", self.e_m1)?;
        if self.delta0 + self.delta1 > 1.0 + 1e-12 {
            return Err(SecurityError::Domain {
                name: "delta0 + delta1",
                value: self.delta0 + self.delta1,
            });
        }
        if !(self.f >= 1.0 && self.f.is_finite()) {
            return Err(SecurityError::Domain { name: "f", value: self.f });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub inputs: SecurityInputs,
    pub i_ab: f64,
    pub i_e: f64,
    pub i_e1: f64,
    pub h_e: f64,
    pub h_em1: f64,
    /// Rate before clamping; negative when no key can be distilled.
    pub skr_raw: f64,
    /// `max(skr_raw, 0)`.
    pub skr: f64,
    /// Gram spectrum when a specific attack was analysed.
    pub gram_eigenvalues: Option<[f64; 4]>,
}

impl SecurityReport {
    /// Flat `(key, value)` view used for summaries.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("Q", self.inputs.q),
            ("delta1", self.inputs.delta1),
            ("delta0", self.inputs.delta0),
            ("e_m1", self.inputs.e_m1),
            ("e", self.inputs.e),
            ("f", self.inputs.f),
            ("h_e", self.h_e),
            ("h_em1", self.h_em1),
            ("I_AB", self.i_ab),
            ("I_E1", self.i_e1),
            ("I_E", self.i_e),
            ("skr_raw", self.skr_raw),
            ("skr", self.skr),
        ]
    }
}

pub fn secure_key_rate(inputs: &SecurityInputs) -> Result<SecurityReport, SecurityError> {
    inputs.validate()?;
    let SecurityInputs {
        q,
        delta1,
        delta0,
        e_m1,
        e,
        f,
    } = *inputs;
    let i_e1 = eve_info_single_photon_bound(e_m1)?;
    let h_e = binary_entropy(e)?;
    let i_ab = mutual_info_ab(q, f, e)?;
    let i_e = q * (delta1 * i_e1 + 1.0 - delta1 - delta0);
    let skr_raw = q * (delta1 - delta1 * i_e1 + delta0 - f * h_e);
    Ok(SecurityReport {
        inputs: *inputs,
        i_ab,
        i_e,
        i_e1,
        h_e,
        h_em1: i_e1,
        skr_raw,
        skr: skr_raw.max(0.0),
        gram_eigenvalues: None,
    })
}

/// Key rate bounded with the Holevo information of a known attack instead
/// of `h(e_m1)`.
pub fn secure_key_rate_for_attack(inputs: &SecurityInputs, ov: &EveOverlaps) -> Result<SecurityReport, SecurityError> {
    let mut report = secure_key_rate(inputs)?;
    let eig = gram_eigenvalues_closed_form(ov);
    let i_e1 = (von_neumann_entropy(&eig) - 1.0).clamp(0.0, 1.0);
    let SecurityInputs { q, delta1, delta0, .. } = *inputs;
    report.i_e1 = i_e1;
    report.i_e = q * (delta1 * i_e1 + 1.0 - delta1 - delta0);
    report.skr_raw = report.i_ab - report.i_e;
    report.skr = report.skr_raw.max(0.0);
    report.gram_eigenvalues = Some(eig);
    Ok(report)
}
