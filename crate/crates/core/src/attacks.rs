//! Eavesdropper models on the line between Bob and Alice.
//!
//! Eve acts on the forward pulse as it leaves Bob and reads the returning
//! pulse as it leaves Alice. The intercept-resend models measure and
//! re-prepare in a fixed basis on both passes. The collective model
//! entangles the forward qubit with a four-dimensional ancilla and, on the
//! return pass, performs the Helstrom measurement between the two joint
//! states Alice's encodings produce.

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::encoding::{apply_encoding, measure, Amplitudes, Basis, EncodingOp};
use crate::protocol::SessionStatistics;
use crate::security::{AncillaRealization, EveOverlaps, SecurityError, ANCILLA_DIM};

const JOINT_DIM: usize = 2 * ANCILLA_DIM;

type JointVec = SVector<Complex64, JOINT_DIM>;
type JointOp = SMatrix<Complex64, JOINT_DIM, JOINT_DIM>;

/// Qubit ⊗ ancilla amplitudes, qubit index major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState(JointVec);

impl JointState {
    fn prob_zero(&self, basis: Basis) -> f64 {
        let p: f64 = match basis {
            Basis::Z => (0..ANCILLA_DIM).map(|a| self.0[a].norm_sqr()).sum(),
            Basis::X => (0..ANCILLA_DIM)
                .map(|a| ((self.0[a] + self.0[ANCILLA_DIM + a]) * FRAC_1_SQRT_2).norm_sqr())
                .sum(),
        };
        p.clamp(0.0, 1.0)
    }
}

/// State of the travelling time-bin qubit.
#[derive(Debug, Clone, PartialEq)]
pub enum QubitState {
    Pure(Amplitudes),
    /// Entangled with Eve's ancilla.
    Entangled(JointState),
}

impl QubitState {
    pub fn prob_zero(&self, basis: Basis) -> f64 {
        match self {
            QubitState::Pure(a) => a.prob_zero(basis),
            QubitState::Entangled(j) => j.prob_zero(basis),
        }
    }

    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> bool {
        match self {
            QubitState::Pure(a) => measure(*a, basis, rng),
            QubitState::Entangled(j) => rng.random::<f64>() >= j.prob_zero(basis),
        }
    }

    pub fn encode(self, op: EncodingOp) -> Self {
        match (self, op) {
            (state, EncodingOp::Identity) => state,
            (QubitState::Pure(a), op) => QubitState::Pure(apply_encoding(a, op)),
            (QubitState::Entangled(mut j), EncodingOp::SigmaZ) => {
                for k in ANCILLA_DIM..JOINT_DIM {
                    j.0[k] = -j.0[k];
                }
                QubitState::Entangled(j)
            }
        }
    }
}

/// Collective attack with its precomputed Helstrom projector.
#[derive(Debug, Clone)]
pub struct CollectiveAttack {
    pub realization: AncillaRealization,
    pub overlaps: EveOverlaps,
    /// Projector onto the "key bit 0" outcome.
    guess_zero: JointOp,
}

impl CollectiveAttack {
    pub fn new(realization: AncillaRealization) -> Result<Self, SecurityError> {
        realization.validate()?;
        let phi = realization.phi().map(|p| JointVec::from_fn(|i, _| p[i]));
        let outer = |v: &JointVec| v * v.adjoint();
        let rho0 = (outer(&phi[0]) + outer(&phi[1])) * Complex64::new(0.5, 0.0);
        let rho1 = (outer(&phi[2]) + outer(&phi[3])) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(rho0 - rho1);
        let mut guess_zero = JointOp::zeros();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > 0.0 {
                let v = eig.eigenvectors.column(k);
                guess_zero += v * v.adjoint();
            }
        }
        Ok(Self {
            overlaps: realization.overlaps(),
            realization,
            guess_zero,
        })
    }

    fn entangle(&self, a: Amplitudes) -> JointState {
        let r = &self.realization;
        JointState(JointVec::from_fn(|i, _| {
            if i < ANCILLA_DIM {
                r.e00[i] * a.zero + r.e10[i] * a.one
            } else {
                let k = i - ANCILLA_DIM;
                r.e01[k] * a.zero + r.e11[k] * a.one
            }
        }))
    }

    /// Helstrom measurement; returns the guessed key bit and the collapsed state.
    fn read<R: Rng + ?Sized>(&self, state: &JointState, rng: &mut R) -> (bool, JointState) {
        let zero = &self.guess_zero * &state.0;
        let p0 = zero.norm_squared().clamp(0.0, 1.0);
        if rng.random::<f64>() < p0 {
            (false, JointState(zero / Complex64::new(p0.sqrt(), 0.0)))
        } else {
            let one = &state.0 - zero;
            let p1 = one.norm_squared().max(f64::MIN_POSITIVE);
            (true, JointState(one / Complex64::new(p1.sqrt(), 0.0)))
        }
    }
}

#[derive(Debug, Clone)]
pub enum AttackKind {
    None,
    /// Measure in the basis and resend the eigenstate, on both passes.
    InterceptResend(Basis),
    CollectiveUnitary(Box<CollectiveAttack>),
}

/// What Eve learned in one window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EveObservation {
    pub forward: Option<bool>,
    pub backward: Option<bool>,
}

impl EveObservation {
    /// Dense index in `0..9`.
    pub fn symbol(&self) -> usize {
        let enc = |b: Option<bool>| match b {
            None => 0,
            Some(false) => 1,
            Some(true) => 2,
        };
        enc(self.forward) * 3 + enc(self.backward)
    }
}

/// Eve's observations for the windows that were publicly sifted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EveRecord {
    pub entries: Vec<(u64, EveObservation)>,
}

#[derive(Debug, Clone)]
pub struct EveModel {
    pub kind: AttackKind,
    pub record: EveRecord,
}

impl EveModel {
    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            record: EveRecord::default(),
        }
    }

    pub fn none() -> Self {
        Self::new(AttackKind::None)
    }

    pub fn intercept_resend(basis: Basis) -> Self {
        Self::new(AttackKind::InterceptResend(basis))
    }

    pub fn collective(realization: AncillaRealization) -> Result<Self, SecurityError> {
        Ok(Self::new(AttackKind::CollectiveUnitary(Box::new(CollectiveAttack::new(
            realization,
        )?))))
    }

    /// `none`, `intercept-resend-z`, `intercept-resend-x`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "none" => Some(Self::none()),
            "intercept-resend-z" | "irz" => Some(Self::intercept_resend(Basis::Z)),
            "intercept-resend-x" | "irx" => Some(Self::intercept_resend(Basis::X)),
            _ => None,
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.kind, AttackKind::None)
    }

    pub fn overlaps(&self) -> Option<EveOverlaps> {
        match &self.kind {
            AttackKind::CollectiveUnitary(c) => Some(c.overlaps),
            _ => None,
        }
    }
}

/// Forward-pass attack on a freshly prepared pulse.
pub fn apply_attack<R: Rng + ?Sized>(
    kind: &AttackKind,
    state: QubitState,
    rng: &mut R,
) -> (QubitState, Option<bool>) {
    match kind {
        AttackKind::None => (state, None),
        AttackKind::InterceptResend(basis) => {
            let outcome = state.measure(*basis, rng);
            (QubitState::Pure(Amplitudes::eigenstate(*basis, outcome)), Some(outcome))
        }
        AttackKind::CollectiveUnitary(c) => match state {
            QubitState::Pure(a) => (QubitState::Entangled(c.entangle(a)), None),
            // Already entangled: leave it alone.
            other => (other, None),
        },
    }
}

/// Return-pass read of the pulse Alice sends back.
pub fn intercept_return<R: Rng + ?Sized>(
    kind: &AttackKind,
    state: QubitState,
    rng: &mut R,
) -> (QubitState, Option<bool>) {
    match (kind, state) {
        (AttackKind::None, state) => (state, None),
        (AttackKind::InterceptResend(_), state) => apply_attack(kind, state, rng),
        (AttackKind::CollectiveUnitary(c), QubitState::Entangled(j)) => {
            let (guess, collapsed) = c.read(&j, rng);
            (QubitState::Entangled(collapsed), Some(guess))
        }
        (AttackKind::CollectiveUnitary(_), state) => (state, None),
    }
}

/// Plug-in estimate of Eve's information about the sifted key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advantage {
    /// Mutual information, bits per sifted bit.
    pub bits: f64,
    pub samples: u64,
    /// Expected plug-in value when Eve's record is independent of the key.
    pub bias_floor: f64,
    pub std_error: f64,
    /// Fewer than 10⁴ samples.
    pub low_confidence: bool,
}

pub const MIN_ADVANTAGE_SAMPLES: u64 = 10_000;

/// Empirical mutual information between Eve's record and Alice's key bits
/// over the sifted windows of `stats`.
pub fn eve_advantage(model: &EveModel, stats: &SessionStatistics) -> Advantage {
    let mut joint = [[0u64; 2]; 9];
    let record = &model.record.entries;
    let mut cursor = 0;
    for pair in &stats.sifted {
        while cursor < record.len() && record[cursor].0 < pair.window {
            cursor += 1;
        }
        let obs = match record.get(cursor) {
            Some(&(w, obs)) if w == pair.window => obs,
            _ => EveObservation::default(),
        };
        joint[obs.symbol()][pair.alice_bit as usize] += 1;
    }
    mutual_information(&joint)
}

fn mutual_information(joint: &[[u64; 2]; 9]) -> Advantage {
    let n: u64 = joint.iter().flatten().sum();
    if n == 0 {
        return Advantage {
            bits: 0.0,
            samples: 0,
            bias_floor: 0.0,
            std_error: 0.0,
            low_confidence: true,
        };
    }
    let nf = n as f64;
    let row: Vec<f64> = joint.iter().map(|r| (r[0] + r[1]) as f64 / nf).collect();
    let col: [f64; 2] = std::array::from_fn(|k| joint.iter().map(|r| r[k]).sum::<u64>() as f64 / nf);
    let mut bits = 0.0;
    let mut second = 0.0;
    for (x, r) in joint.iter().enumerate() {
        for (y, &count) in r.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let p = count as f64 / nf;
            let l = (p / (row[x] * col[y])).log2();
            bits += p * l;
            second += p * l * l;
        }
    }
    let rows_used = row.iter().filter(|&&p| p > 0.0).count().max(1);
    let cols_used = col.iter().filter(|&&p| p > 0.0).count().max(1);
    let df = ((rows_used - 1) * (cols_used - 1)) as f64;
    let scale = 2.0 * nf * std::f64::consts::LN_2;
    let bias_floor = df / scale;
    let delta_method = ((second - bits * bits).max(0.0) / nf).sqrt();
    let null_sd = (2.0 * df).sqrt() / scale;
    Advantage {
        bits: bits.max(0.0),
        samples: n,
        bias_floor,
        std_error: delta_method.max(null_sd),
        low_confidence: n < MIN_ADVANTAGE_SAMPLES,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::prepare_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn none_forwards_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = QubitState::Pure(Amplitudes::PLUS);
        let (out, info) = apply_attack(&AttackKind::None, s.clone(), &mut rng);
        assert_eq!(out, s);
        assert_eq!(info, None);
    }

    #[test]
    fn intercept_z_on_z_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let kind = AttackKind::InterceptResend(Basis::Z);
        for _ in 0..1000 {
            let (out, info) = apply_attack(&kind, QubitState::Pure(Amplitudes::ZERO), &mut rng);
            assert_eq!(out, QubitState::Pure(Amplitudes::ZERO));
            assert_eq!(info, Some(false));
        }
    }

    /// Brute-force tree for Z states under an X-basis intercept: two Eve
    /// outcomes of probability 1/2, each resent state giving Z error 1/2.
    #[test]
    fn intercept_x_error_tree() {
        let kind = AttackKind::InterceptResend(Basis::X);
        let mut exact = 0.0;
        for alpha in [false, true] {
            let s = prepare_state(alpha, false).amplitudes;
            for eve in [false, true] {
                let p_eve = if eve { 1.0 - s.prob_zero(Basis::X) } else { s.prob_zero(Basis::X) };
                let resent = Amplitudes::eigenstate(Basis::X, eve);
                let p_err = if alpha { resent.prob_zero(Basis::Z) } else { 1.0 - resent.prob_zero(Basis::Z) };
                exact += 0.5 * p_eve * p_err;
            }
        }
        assert!((exact - 0.5).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut errors = 0;
        for i in 0..n {
            let alpha = i % 2 == 1;
            let s = QubitState::Pure(prepare_state(alpha, false).amplitudes);
            let (out, _) = apply_attack(&kind, s, &mut rng);
            errors += (out.measure(Basis::Z, &mut rng) != alpha) as u32;
        }
        let rate = errors as f64 / n as f64;
        assert!((rate - exact).abs() < 0.01, "{rate}");
    }

    #[test]
    fn intercept_x_reads_key_on_return() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kind = AttackKind::InterceptResend(Basis::X);
        for alpha in [false, true] {
            for key in [false, true] {
                let s = QubitState::Pure(prepare_state(alpha, true).amplitudes);
                let (fwd, f) = apply_attack(&kind, s, &mut rng);
                let (back, b) = intercept_return(&kind, fwd.encode(EncodingOp::from_key_bit(key)), &mut rng);
                assert_eq!(f.unwrap() ^ b.unwrap(), key);
                assert_eq!(back.measure(Basis::X, &mut rng), alpha ^ key);
            }
        }
    }

    #[test]
    fn identity_collective_attack_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let attack = CollectiveAttack::new(AncillaRealization::identity()).unwrap();
        let kind = AttackKind::CollectiveUnitary(Box::new(attack));
        for alpha in [false, true] {
            for beta in [false, true] {
                let s = prepare_state(alpha, beta);
                let (out, _) = apply_attack(&kind, QubitState::Pure(s.amplitudes), &mut rng);
                assert!((out.prob_zero(s.basis) - s.amplitudes.prob_zero(s.basis)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn collective_monitor_error_matches_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = AncillaRealization::random(&mut rng);
        let attack = CollectiveAttack::new(r).unwrap();
        let ov = r.overlaps();
        let on_zero = attack.entangle(Amplitudes::ZERO).prob_zero(Basis::Z);
        let on_one = attack.entangle(Amplitudes::ONE).prob_zero(Basis::Z);
        assert!((1.0 - on_zero - ov.eps01_norm).abs() < 1e-12);
        assert!((on_one - ov.eps10_norm).abs() < 1e-12);
    }

    #[test]
    fn helstrom_projector_is_a_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let attack = CollectiveAttack::new(AncillaRealization::random(&mut rng)).unwrap();
        let p = &attack.guess_zero;
        assert!((p * p - p).norm() < 1e-10);
        assert!((p.adjoint() - p).norm() < 1e-12);
    }

    #[test]
    fn mutual_information_limits() {
        let mut independent = [[0u64; 2]; 9];
        independent[1] = [5000, 5000];
        independent[2] = [5000, 5000];
        let a = mutual_information(&independent);
        assert!(a.bits < 1e-12);
        assert!(!a.low_confidence);

        let mut perfect = [[0u64; 2]; 9];
        perfect[1] = [400, 0];
        perfect[2] = [0, 400];
        let a = mutual_information(&perfect);
        assert!((a.bits - 1.0).abs() < 1e-12);
        assert!(a.low_confidence);
    }

    #[test]
    fn attack_names() {
        assert!(EveModel::by_name("intercept-resend-x").unwrap().is_active());
        assert!(!EveModel::by_name("none").unwrap().is_active());
        assert!(EveModel::by_name("bogus").is_none());
    }
}
