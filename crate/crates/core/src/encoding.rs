//! Time-bin qubits: Bob's four preparation states, Alice's two encoding
//! operations and projective measurement in either basis.
//!
//! Every state and operator the protocol uses is real, so amplitudes are
//! kept as a pair of `f64` on the `{|0⟩, |1⟩}` (early/late) axis.
//!
//! Outcome convention used throughout the crate: in Z, `|0⟩ ↦ 0` and
//! `|1⟩ ↦ 1`; in X, `|+⟩ ↦ 0` and `|−⟩ ↦ 1`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Time-bin basis; used for channel monitoring.
    Z,
    /// Phase basis; carries the key.
    X,
}

impl Basis {
    /// `false` ↦ Z, `true` ↦ X.
    pub fn from_bit(beta: bool) -> Self {
        if beta {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Basis::X)
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::Z => "Z",
            Basis::X => "X",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Real amplitudes `(⟨0|ψ⟩, ⟨1|ψ⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub zero: f64,
    pub one: f64,
}

impl Amplitudes {
    pub const ZERO: Amplitudes = Amplitudes { zero: 1.0, one: 0.0 };
    pub const ONE: Amplitudes = Amplitudes { zero: 0.0, one: 1.0 };
    pub const PLUS: Amplitudes = Amplitudes {
        zero: FRAC_1_SQRT_2,
        one: FRAC_1_SQRT_2,
    };
    pub const MINUS: Amplitudes = Amplitudes {
        zero: FRAC_1_SQRT_2,
        one: -FRAC_1_SQRT_2,
    };

    pub fn new(zero: f64, one: f64) -> Self {
        Self { zero, one }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.zero * self.zero + self.one * self.one
    }

    /// Eigenstate of `basis` for the given outcome bit.
    pub fn eigenstate(basis: Basis, outcome: bool) -> Self {
        match (basis, outcome) {
            (Basis::Z, false) => Self::ZERO,
            (Basis::Z, true) => Self::ONE,
            (Basis::X, false) => Self::PLUS,
            (Basis::X, true) => Self::MINUS,
        }
    }

    /// Born probability of outcome 0 when measured in `basis`.
    pub fn prob_zero(&self, basis: Basis) -> f64 {
        let amp = match basis {
            Basis::Z => self.zero,
            Basis::X => (self.zero + self.one) * FRAC_1_SQRT_2,
        };
        (amp * amp).clamp(0.0, 1.0)
    }

    /// Equality up to a global sign.
    pub fn approx_eq_up_to_sign(&self, other: &Amplitudes, tol: f64) -> bool {
        let same = (self.zero - other.zero).abs() <= tol && (self.one - other.one).abs() <= tol;
        let flipped = (self.zero + other.zero).abs() <= tol && (self.one + other.one).abs() <= tol;
        same || flipped
    }
}

/// One of the four states of Bob's preparation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparedState {
    pub alpha: bool,
    pub basis: Basis,
    /// Amplitude angle: the state is `cos ξ |0⟩ + sin ξ |1⟩`.
    pub xi: f64,
    pub amplitudes: Amplitudes,
}

/// Bob's state for bit `alpha` and basis bit `beta`.
///
/// `ξ = π[1 − β − (−1)^(α+β)]/4`, giving `|0⟩, |1⟩` for β = 0 and
/// `|+⟩, |−⟩` for β = 1.
pub fn prepare_state(alpha: bool, beta: bool) -> PreparedState {
    // Exact table values; the closed form is checked against these in tests.
    let xi = match (alpha, beta) {
        (false, false) => 0.0,
        (true, false) => FRAC_PI_2,
        (false, true) => FRAC_PI_4,
        (true, true) => -FRAC_PI_4,
    };
    let amplitudes = match (alpha, beta) {
        (false, false) => Amplitudes::ZERO,
        (true, false) => Amplitudes::ONE,
        (false, true) => Amplitudes::PLUS,
        (true, true) => Amplitudes::MINUS,
    };
    PreparedState {
        alpha,
        basis: Basis::from_bit(beta),
        xi,
        amplitudes,
    }
}

/// `ξ` evaluated directly from the closed form.
pub fn xi_formula(alpha: bool, beta: bool) -> f64 {
    let a = alpha as i32;
    let b = beta as i32;
    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
    PI * (1.0 - b as f64 - sign) / 4.0
}

/// Alice's encoding: `I` for key bit 0, `σ_Z` for key bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingOp {
    Identity,
    SigmaZ,
}

impl EncodingOp {
    pub fn from_key_bit(bit: bool) -> Self {
        if bit {
            EncodingOp::SigmaZ
        } else {
            EncodingOp::Identity
        }
    }

    pub fn key_bit(self) -> bool {
        matches!(self, EncodingOp::SigmaZ)
    }
}

pub fn apply_encoding(state: Amplitudes, op: EncodingOp) -> Amplitudes {
    match op {
        EncodingOp::Identity => state,
        EncodingOp::SigmaZ => Amplitudes {
            zero: state.zero,
            one: -state.one,
        },
    }
}

/// Projective measurement with Born-rule sampling.
pub fn measure<R: Rng + ?Sized>(state: Amplitudes, basis: Basis, rng: &mut R) -> bool {
    let p0 = state.prob_zero(basis);
    rng.random::<f64>() >= p0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const BITS: [bool; 2] = [false, true];

    #[test]
    fn table_rows() {
        let s = prepare_state(false, false);
        assert_eq!(s.basis, Basis::Z);
        assert_eq!(s.xi, 0.0);
        assert_eq!(s.amplitudes, Amplitudes::ZERO);

        let s = prepare_state(true, false);
        assert_eq!(s.xi, FRAC_PI_2);
        assert_eq!(s.amplitudes, Amplitudes::ONE);

        let s = prepare_state(false, true);
        assert_eq!(s.basis, Basis::X);
        assert_eq!(s.xi, FRAC_PI_4);

        let s = prepare_state(true, true);
        assert_eq!(s.xi, -FRAC_PI_4);
        assert!(s
            .amplitudes
            .approx_eq_up_to_sign(&Amplitudes::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn xi_closed_form_matches_table_and_amplitudes() {
        for alpha in BITS {
            for beta in BITS {
                let s = prepare_state(alpha, beta);
                assert!((xi_formula(alpha, beta) - s.xi).abs() < 1e-15);
                assert!((s.xi.cos() - s.amplitudes.zero).abs() < 1e-12);
                assert!((s.xi.sin() - s.amplitudes.one).abs() < 1e-12);
                assert!((s.amplitudes.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn encoding_ops() {
        let out = apply_encoding(Amplitudes::PLUS, EncodingOp::SigmaZ);
        assert!(out.approx_eq_up_to_sign(&Amplitudes::MINUS, 1e-15));
        assert_eq!(apply_encoding(Amplitudes::MINUS, EncodingOp::Identity), Amplitudes::MINUS);
        assert_eq!(apply_encoding(Amplitudes::ZERO, EncodingOp::SigmaZ), Amplitudes::ZERO);
        for op in [EncodingOp::Identity, EncodingOp::SigmaZ] {
            let twice = apply_encoding(apply_encoding(Amplitudes::MINUS, op), op);
            assert_eq!(twice, Amplitudes::MINUS);
        }
    }

    #[test]
    fn round_trip_in_preparation_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for alpha in BITS {
            for beta in BITS {
                let s = prepare_state(alpha, beta);
                for _ in 0..1000 {
                    assert_eq!(measure(s.amplitudes, s.basis, &mut rng), alpha);
                }
            }
        }
    }

    #[test]
    fn x_encoding_flips_key_carriers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for alpha in BITS {
            for key in BITS {
                let s = prepare_state(alpha, true);
                let enc = apply_encoding(s.amplitudes, EncodingOp::from_key_bit(key));
                for _ in 0..200 {
                    assert_eq!(measure(enc, Basis::X, &mut rng), alpha ^ key);
                }
            }
        }
    }

    #[test]
    fn encoding_invisible_on_z_states() {
        for alpha in BITS {
            let s = prepare_state(alpha, false);
            for op in [EncodingOp::Identity, EncodingOp::SigmaZ] {
                let enc = apply_encoding(s.amplitudes, op);
                assert!(enc.approx_eq_up_to_sign(&s.amplitudes, 0.0));
                assert_eq!(enc.prob_zero(Basis::Z), s.amplitudes.prob_zero(Basis::Z));
            }
        }
    }

    #[test]
    fn basis_bits() {
        assert_eq!(Basis::from_bit(false), Basis::Z);
        assert_eq!(Basis::from_bit(true), Basis::X);
        assert!(Basis::X.bit());
    }
}
