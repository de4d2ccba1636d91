//! The four-step two-way protocol as a window-by-window Monte-Carlo.
//!
//! Bob prepares a time-bin state per window, Alice either monitors it in Z
//! or encodes a key bit with `I`/`σ_Z` and sends it back, and Bob measures
//! the return in X. Windows are simulated in fixed-size batches, each with
//! its own ChaCha stream derived from the session seed, so the result does
//! not depend on how many threads run them.

pub mod endpoint;
pub mod frame;

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::attacks::{apply_attack, intercept_return, AttackKind, EveModel, EveObservation, QubitState};
use crate::channel::{photon_click_prob, IntensityClass, Link, ParamError, PhotonSource};
use crate::decoy::GainSet;
use crate::encoding::{prepare_state, Basis, EncodingOp};

pub use endpoint::{run_classical_exchange, AliceEndpoint, BobEndpoint, ExchangeError, ExchangeOutcome};
pub use frame::{frame_decode, frame_encode, read_frame, write_frame, ClassicalMessage, FrameError, MonitorEntry, StreamError};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid session config: {0}")]
    Config(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("transcript export failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Mean photon numbers of the signal and decoy classes and how often each
/// class (and vacuum) is sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensitySchedule {
    pub signal_mean: f64,
    pub decoy_mean: f64,
    pub p_signal: f64,
    pub p_decoy: f64,
    pub p_vacuum: f64,
}

impl Default for IntensitySchedule {
    fn default() -> Self {
        Self {
            signal_mean: 0.6,
            decoy_mean: 0.2,
            p_signal: 0.6,
            p_decoy: 0.3,
            p_vacuum: 0.1,
        }
    }
}

impl IntensitySchedule {
    pub fn classes(&self) -> [IntensityClass; 3] {
        [
            IntensityClass::Signal(self.signal_mean),
            IntensityClass::Decoy(self.decoy_mean),
            IntensityClass::Vacuum,
        ]
    }

    /// Average mean photon number of Bob's outgoing pulse train.
    pub fn outgoing_mean(&self) -> f64 {
        self.p_signal * self.signal_mean + self.p_decoy * self.decoy_mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntensityClass {
        let r: f64 = rng.random();
        let [s, d, v] = self.classes();
        if r < self.p_signal {
            s
        } else if r < self.p_signal + self.p_decoy {
            d
        } else {
            v
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        for (name, p) in [("p_signal", self.p_signal), ("p_decoy", self.p_decoy), ("p_vacuum", self.p_vacuum)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ProtocolError::Config(format!("{name} = {p} is not a probability")));
            }
        }
        let total = self.p_signal + self.p_decoy + self.p_vacuum;
        if (total - 1.0).abs() > 1e-9 {
            return Err(ProtocolError::Config(format!("intensity schedule sums to {total}")));
        }
        if !(self.signal_mean >= 0.0 && self.decoy_mean >= 0.0 && self.signal_mean.is_finite()) {
            return Err(ProtocolError::Config("mean photon numbers must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionConfig {
    pub num_windows: u64,
    /// Probability that Bob prepares a Z-basis state.
    pub q_z_probability: f64,
    /// Probability that Alice monitors rather than encodes.
    pub p_monitor: f64,
    pub schedule: IntensitySchedule,
    pub seed: u64,
    /// Windows per independently seeded batch.
    pub batch_size: u64,
    pub record_transcript: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            num_windows: 1_000_000,
            q_z_probability: 0.5,
            p_monitor: 0.5,
            schedule: IntensitySchedule::default(),
            seed: 1,
            batch_size: 1 << 16,
            record_transcript: false,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.num_windows == 0 {
            return Err(ProtocolError::Config("num_windows must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ProtocolError::Config("batch_size must be at least 1".into()));
        }
        for (name, p) in [("q_z_probability", self.q_z_probability), ("p_monitor", self.p_monitor)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ProtocolError::Config(format!("{name} = {p} is not a probability")));
            }
        }
        self.schedule.validate()
    }
}

/// One window of Bob's private preparation schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduledPulse {
    pub alpha: bool,
    pub basis: Basis,
    pub intensity: IntensityClass,
}

fn draw_pulse<R: Rng + ?Sized>(config: &SessionConfig, rng: &mut R) -> ScheduledPulse {
    let basis = if rng.random::<f64>() < config.q_z_probability {
        Basis::Z
    } else {
        Basis::X
    };
    let alpha = rng.random::<bool>();
    let intensity = config.schedule.sample(rng);
    ScheduledPulse { alpha, basis, intensity }
}

/// Bob's choices for every window, drawn in order from `rng`.
pub fn bob_prepare_schedule<R: Rng + ?Sized>(config: &SessionConfig, rng: &mut R) -> Vec<ScheduledPulse> {
    (0..config.num_windows).map(|_| draw_pulse(config, rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AliceAction {
    /// `None` when the monitor did not click or was dead.
    Monitored { outcome: Option<bool> },
    Encoded { key_bit: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClickCause {
    SignalPhoton,
    DarkCount,
    Backscatter,
    None,
}

impl ClickCause {
    pub fn label(self) -> &'static str {
        match self {
            ClickCause::SignalPhoton => "signal",
            ClickCause::DarkCount => "dark",
            ClickCause::Backscatter => "backscatter",
            ClickCause::None => "none",
        }
    }
}

/// Pulse arriving at Alice: its state and photon number.
#[derive(Debug, Clone)]
pub struct Arrival {
    pub state: QubitState,
    pub photons: u32,
}

/// Alice's branch for one window, plus the pulse she sends back if any.
#[derive(Debug, Clone)]
pub struct AliceResult {
    pub action: AliceAction,
    /// Cause of a monitor click.
    pub cause: ClickCause,
    pub returned: Option<QubitState>,
}

/// Alice monitors with probability `p` (Z measurement behind the coupler)
/// or encodes a uniform key bit. Dead time is handled by the caller.
pub fn alice_process<R: Rng + ?Sized>(
    arrival: Arrival,
    config: &SessionConfig,
    link: &Link,
    rng: &mut R,
) -> AliceResult {
    if rng.random::<f64>() < config.p_monitor {
        let photon = rng.random::<f64>() < photon_click_prob(arrival.photons, link.z_efficiency());
        let dark = rng.random::<f64>() < link.alice.dark_count_prob;
        let (outcome, cause) = if photon {
            let flip = rng.random::<f64>() < link.floors.extinction;
            (Some(arrival.state.measure(Basis::Z, rng) ^ flip), ClickCause::SignalPhoton)
        } else if dark {
            (Some(rng.random::<bool>()), ClickCause::DarkCount)
        } else {
            (None, ClickCause::None)
        };
        AliceResult {
            action: AliceAction::Monitored { outcome },
            cause,
            returned: None,
        }
    } else {
        let key_bit = rng.random::<bool>();
        AliceResult {
            action: AliceAction::Encoded { key_bit },
            cause: ClickCause::None,
            returned: Some(arrival.state.encode(EncodingOp::from_key_bit(key_bit))),
        }
    }
}

/// Per-window ledger row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseRecord {
    pub window_index: u64,
    pub intensity: IntensityClass,
    /// Ground-truth photon number emitted.
    pub photons: u32,
    pub bob_alpha: bool,
    pub bob_basis: Basis,
    pub alice_action: AliceAction,
    pub bob_outcome: Option<bool>,
    pub click_cause: ClickCause,
    /// A detector needed by this window was dead.
    pub blanked: bool,
}

pub const TRANSCRIPT_COLUMNS: [&str; 11] = [
    "window_index",
    "intensity",
    "mean_photons",
    "photons",
    "bob_alpha",
    "bob_basis",
    "alice_action",
    "alice_bit",
    "bob_outcome",
    "click_cause",
    "blanked",
];

fn opt_bit(b: Option<bool>) -> &'static str {
    match b {
        Some(false) => "0",
        Some(true) => "1",
        None => "",
    }
}

/// CSV export, one record per row in ledger order.
pub fn write_transcript<W: Write>(records: &[PulseRecord], out: W) -> Result<(), ProtocolError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRANSCRIPT_COLUMNS)?;
    for r in records {
        let (action, alice_bit) = match r.alice_action {
            AliceAction::Monitored { outcome } => ("monitored", opt_bit(outcome)),
            AliceAction::Encoded { key_bit } => ("encoded", opt_bit(Some(key_bit))),
        };
        w.write_record([
            r.window_index.to_string().as_str(),
            r.intensity.label(),
            r.intensity.mean_photons().to_string().as_str(),
            r.photons.to_string().as_str(),
            opt_bit(Some(r.bob_alpha)),
            r.bob_basis.label(),
            action,
            alice_bit,
            opt_bit(r.bob_outcome),
            r.click_cause.label(),
            if r.blanked { "1" } else { "0" },
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Click and error counts over a set of windows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub windows: u64,
    pub clicks: u64,
    pub errors: u64,
}

impl Tally {
    pub fn gain(&self) -> f64 {
        ratio(self.clicks, self.windows)
    }

    pub fn error_rate(&self) -> f64 {
        ratio(self.errors, self.clicks)
    }

    /// Binomial standard error of the gain.
    pub fn gain_std_error(&self) -> f64 {
        binomial_se(self.gain(), self.windows)
    }

    pub fn error_std_error(&self) -> f64 {
        binomial_se(self.error_rate(), self.clicks)
    }

    fn merge(&mut self, other: &Tally) {
        self.windows += other.windows;
        self.clicks += other.clicks;
        self.errors += other.errors;
    }

    fn add(&mut self, click: bool, error: bool) {
        self.windows += 1;
        self.clicks += click as u64;
        self.errors += (click && error) as u64;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SiftedPair {
    pub window: u64,
    pub alice_bit: bool,
    pub bob_bit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonitorPair {
    pub window: u64,
    pub bob_alpha: bool,
    pub alice_outcome: bool,
}

/// Aggregated counts of a session. Arrays are indexed by intensity class
/// (signal, decoy, vacuum).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SessionStatistics {
    pub windows: u64,
    pub blanked: u64,
    /// Bob prepared X and Alice encoded.
    pub x: [Tally; 3],
    /// Bob prepared Z and Alice monitored.
    pub z: [Tally; 3],
    /// Ground truth: the subset of `x` with exactly one emitted photon.
    pub x_single: [Tally; 3],
    /// Ground truth: the subset of `z` with exactly one emitted photon.
    pub z_single: [Tally; 3],
    /// Key-carrying pairs from signal-class windows.
    pub sifted: Vec<SiftedPair>,
    pub monitor: Vec<MonitorPair>,
}

impl SessionStatistics {
    fn merge(&mut self, other: SessionStatistics) {
        self.windows += other.windows;
        self.blanked += other.blanked;
        for k in 0..3 {
            self.x[k].merge(&other.x[k]);
            self.z[k].merge(&other.z[k]);
            self.x_single[k].merge(&other.x_single[k]);
            self.z_single[k].merge(&other.z_single[k]);
        }
        self.sifted.extend(other.sifted);
        self.monitor.extend(other.monitor);
    }

    pub fn gain_set(&self, basis: Basis, schedule: &IntensitySchedule) -> GainSet {
        let t = match basis {
            Basis::X => &self.x,
            Basis::Z => &self.z,
        };
        GainSet {
            basis,
            q_u: t[0].gain(),
            q_v: t[1].gain(),
            q_0: t[2].gain(),
            e_v: t[1].error_rate(),
            u: schedule.signal_mean,
            v: schedule.decoy_mean,
        }
    }

    /// Key-basis error rate `e` of the signal class.
    pub fn key_error_rate(&self) -> f64 {
        self.x[0].error_rate()
    }

    /// Monitor error rate `e_m` over all windows where both chose Z.
    pub fn monitor_error_rate(&self) -> f64 {
        self.monitor_tally().error_rate()
    }

    pub fn monitor_tally(&self) -> Tally {
        let mut t = Tally::default();
        for z in &self.z {
            t.merge(z);
        }
        t
    }

    /// Ground-truth single-photon monitor error over all classes.
    pub fn single_photon_monitor_tally(&self) -> Tally {
        let mut t = Tally::default();
        for z in &self.z_single {
            t.merge(z);
        }
        t
    }

    /// Ground-truth share of signal-class X clicks from one-photon pulses.
    pub fn single_photon_fraction(&self) -> f64 {
        ratio(self.x_single[0].clicks, self.x[0].clicks)
    }

    pub fn sifted_keys(&self) -> (Vec<bool>, Vec<bool>) {
        self.sifted.iter().map(|p| (p.alice_bit, p.bob_bit)).unzip()
    }
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub stats: SessionStatistics,
    /// Present when `record_transcript` was set.
    pub transcript: Option<Vec<PulseRecord>>,
}

struct Context<'a> {
    config: &'a SessionConfig,
    link: &'a Link,
    kind: &'a AttackKind,
    source: PhotonSource,
    x_eff: f64,
    p_backscatter: f64,
}

#[derive(Default)]
struct BatchOutput {
    stats: SessionStatistics,
    eve: Vec<(u64, EveObservation)>,
    transcript: Vec<PulseRecord>,
}

/// Next window at which each detector is live again.
#[derive(Default)]
struct Clocks {
    alice: u64,
    bob: u64,
}

fn simulate_window(ctx: &Context<'_>, w: u64, rng: &mut ChaCha8Rng, clocks: &mut Clocks, out: &mut BatchOutput) {
    let link = ctx.link;
    let pulse = draw_pulse(ctx.config, rng);
    let photons = ctx.source.emit(pulse.intensity, rng);
    let prepared = prepare_state(pulse.alpha, pulse.basis.bit()).amplitudes;

    let mut obs = EveObservation::default();
    let mut state = QubitState::Pure(prepared);
    if photons > 0 {
        let (s, seen) = apply_attack(ctx.kind, state, rng);
        state = s;
        obs.forward = seen;
    }

    let alice_live = w >= clocks.alice;
    let bob_live = w >= clocks.bob;

    let mut alice = alice_process(Arrival { state, photons }, ctx.config, link, rng);
    if let AliceAction::Monitored { outcome } = &mut alice.action {
        if outcome.is_some() {
            if alice_live {
                clocks.alice = w + 1 + link.alice.dead_time_windows as u64;
            } else {
                *outcome = None;
            }
        }
    }

    let mut returned = alice.returned.take();
    if let Some(s) = returned.take() {
        if photons > 0 {
            let (s, seen) = intercept_return(ctx.kind, s, rng);
            obs.backward = seen;
            returned = Some(s);
        } else {
            returned = Some(s);
        }
    }

    let signal = match &returned {
        Some(_) => rng.random::<f64>() < photon_click_prob(photons, ctx.x_eff),
        None => false,
    };
    let dark = rng.random::<f64>() < link.bob.dark_count_prob;
    let backscatter = rng.random::<f64>() < ctx.p_backscatter;
    let (mut bob_outcome, cause) = match (&returned, signal, dark, backscatter) {
        (Some(s), true, _, _) => {
            let flip = rng.random::<f64>() < link.floors.electronic;
            (Some(s.measure(Basis::X, rng) ^ flip), ClickCause::SignalPhoton)
        }
        (_, _, true, _) => (Some(rng.random::<bool>()), ClickCause::DarkCount),
        (_, _, _, true) => (Some(rng.random::<bool>()), ClickCause::Backscatter),
        _ => (None, ClickCause::None),
    };
    let mut cause = cause;
    if bob_outcome.is_some() {
        if bob_live {
            clocks.bob = w + 1 + link.bob.dead_time_windows as u64;
        } else {
            bob_outcome = None;
            cause = ClickCause::None;
        }
    }

    let blanked = match alice.action {
        AliceAction::Monitored { .. } => !alice_live,
        AliceAction::Encoded { .. } => !bob_live,
    };
    let stats = &mut out.stats;
    stats.windows += 1;
    stats.blanked += blanked as u64;
    let class = pulse.intensity.index();
    if !blanked {
        match (alice.action, pulse.basis) {
            (AliceAction::Encoded { key_bit }, Basis::X) => {
                let bob_bit = bob_outcome.map(|o| o ^ pulse.alpha);
                let click = bob_bit.is_some();
                let error = bob_bit.is_some_and(|b| b != key_bit);
                stats.x[class].add(click, error);
                if photons == 1 {
                    stats.x_single[class].add(click, error);
                }
                if let (Some(bob_bit), IntensityClass::Signal(_)) = (bob_bit, pulse.intensity) {
                    stats.sifted.push(SiftedPair {
                        window: w,
                        alice_bit: key_bit,
                        bob_bit,
                    });
                    if obs != EveObservation::default() {
                        out.eve.push((w, obs));
                    }
                }
            }
            (AliceAction::Monitored { outcome }, Basis::Z) => {
                let error = outcome.is_some_and(|o| o != pulse.alpha);
                stats.z[class].add(outcome.is_some(), error);
                if photons == 1 {
                    stats.z_single[class].add(outcome.is_some(), error);
                }
                if let Some(o) = outcome {
                    stats.monitor.push(MonitorPair {
                        window: w,
                        bob_alpha: pulse.alpha,
                        alice_outcome: o,
                    });
                }
            }
            _ => {}
        }
    }

    if ctx.config.record_transcript {
        out.transcript.push(PulseRecord {
            window_index: w,
            intensity: pulse.intensity,
            photons,
            bob_alpha: pulse.alpha,
            bob_basis: pulse.basis,
            alice_action: alice.action,
            bob_outcome,
            click_cause: cause,
            blanked,
        });
    }
}

/// Runs the whole session. With an attack, Eve's record is filled in for
/// every sifted window in which she observed something.
///
/// Detector dead time does not carry over batch boundaries.
pub fn run_session(
    config: &SessionConfig,
    link: &Link,
    attack: Option<&mut EveModel>,
) -> Result<SessionOutcome, ProtocolError> {
    config.validate()?;
    link.validate()?;
    let none = AttackKind::None;
    let kind = attack.as_ref().map_or(&none, |m| &m.kind);
    let ctx = Context {
        config,
        link,
        kind,
        source: PhotonSource::new(config.schedule.classes()),
        x_eff: link.x_efficiency(),
        p_backscatter: crate::channel::backscatter_click_prob(
            config.schedule.outgoing_mean(),
            &link.channel,
            &link.bob,
        ),
    };
    let batches = config.num_windows.div_ceil(config.batch_size);
    let outputs: Vec<BatchOutput> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b);
            let start = b * config.batch_size;
            let end = (start + config.batch_size).min(config.num_windows);
            let mut out = BatchOutput::default();
            let mut clocks = Clocks { alice: start, bob: start };
            for w in start..end {
                simulate_window(&ctx, w, &mut rng, &mut clocks, &mut out);
            }
            out
        })
        .collect();

    let mut stats = SessionStatistics::default();
    let mut transcript = config.record_transcript.then(Vec::new);
    let mut eve = Vec::new();
    for out in outputs {
        stats.merge(out.stats);
        eve.extend(out.eve);
        if let Some(t) = transcript.as_mut() {
            t.extend(out.transcript);
        }
    }
    if let Some(model) = attack {
        model.record.entries = eve;
    }
    Ok(SessionOutcome { stats, transcript })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(num_windows: u64) -> SessionConfig {
        SessionConfig {
            num_windows,
            batch_size: 4096,
            ..SessionConfig::default()
        }
    }

    #[test]
    fn schedule_degenerate_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = SessionConfig {
            q_z_probability: 1.0,
            ..small(10_000)
        };
        assert!(bob_prepare_schedule(&cfg, &mut rng).iter().all(|p| p.basis == Basis::Z));
    }

    #[test]
    fn schedule_z_fraction_and_determinism() {
        let cfg = small(1_000_000);
        let a = bob_prepare_schedule(&cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let b = bob_prepare_schedule(&cfg, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let z = a.iter().filter(|p| p.basis == Basis::Z).count() as f64 / a.len() as f64;
        assert!((z - 0.5).abs() < 0.0016, "{z}");
    }

    #[test]
    fn alice_branch_extremes() {
        let link = Link::noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, monitored) in [(1.0, true), (0.0, false)] {
            let cfg = SessionConfig {
                p_monitor: p,
                ..small(1)
            };
            for _ in 0..1000 {
                let arrival = Arrival {
                    state: QubitState::Pure(prepare_state(false, false).amplitudes),
                    photons: 1,
                };
                let r = alice_process(arrival, &cfg, &link, &mut rng);
                match r.action {
                    AliceAction::Monitored { outcome } => {
                        assert!(monitored);
                        assert_ne!(outcome, Some(true));
                    }
                    AliceAction::Encoded { .. } => assert!(!monitored),
                }
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let link = Link::noiseless();
        assert!(run_session(&small(0), &link, None).is_err());
        let mut cfg = small(10);
        cfg.schedule.p_vacuum = 0.5;
        assert!(run_session(&cfg, &link, None).is_err());
        let mut cfg = small(10);
        cfg.p_monitor = 1.5;
        assert!(run_session(&cfg, &link, None).is_err());
    }

    #[test]
    fn noiseless_session_is_error_free() {
        let out = run_session(&small(200_000), &Link::noiseless(), None).unwrap();
        let s = &out.stats;
        assert_eq!(s.key_error_rate(), 0.0);
        assert_eq!(s.monitor_error_rate(), 0.0);
        let (a, b) = s.sifted_keys();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn independent_of_thread_count() {
        let link = Link::experiment_50km();
        let cfg = small(100_000);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let one = pool.install(|| run_session(&cfg, &link, None).unwrap());
        let many = run_session(&cfg, &link, None).unwrap();
        assert_eq!(one.stats, many.stats);
    }

    #[test]
    fn transcript_rows_and_sifting_rule() {
        let cfg = SessionConfig {
            record_transcript: true,
            ..small(20_000)
        };
        let out = run_session(&cfg, &Link::noiseless(), None).unwrap();
        let t = out.transcript.unwrap();
        assert_eq!(t.len(), 20_000);
        for p in &out.stats.sifted {
            let r = &t[p.window as usize];
            assert_eq!(r.bob_basis, Basis::X);
            assert!(r.bob_outcome.is_some());
        }
        let mut buf = Vec::new();
        write_transcript(&t[..3], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("window_index,intensity,mean_photons,photons"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn dead_time_blanks_windows() {
        let link = Link::noiseless().at_rate(1e9);
        let out = run_session(&small(50_000), &link, None).unwrap();
        assert!(out.stats.blanked > 0);
        let link = Link::noiseless();
        let out = run_session(&small(50_000), &link, None).unwrap();
        assert_eq!(out.stats.blanked, 0);
    }
}
