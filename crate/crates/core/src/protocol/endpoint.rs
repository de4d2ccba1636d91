//! Alice and Bob as classical-channel state machines.
//!
//! After the quantum phase each party holds only its own half of the
//! transcript. They then exchange, over a framed byte pipe:
//!
//! 1. Alice → Bob: `MonitorReveal` with every window she monitored.
//! 2. Bob → Alice: `SiftIndices` for signal windows he prepared in X,
//!    detected, and that Alice did not monitor.
//! 3. Alice → Bob: `Ack`.
//! 4. Bob → Alice: `BerAnnounce`, then Alice answers `Ack`.
//!
//! Error correction itself is outside the model; the BER Bob announces is
//! the one error correction would reveal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::frame::{read_frame, write_frame, ClassicalMessage, MonitorEntry, StreamError};
use super::{AliceAction, PulseRecord};
use crate::channel::IntensityClass;
use crate::encoding::Basis;

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error("{role} received {got} in state {state}")]
    Unexpected {
        role: &'static str,
        state: &'static str,
        got: &'static str,
    },
    #[error("Bob asked to sift window {0}, which Alice did not encode")]
    NotEncoded(u64),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

fn kind(msg: &ClassicalMessage) -> &'static str {
    match msg {
        ClassicalMessage::MonitorReveal(_) => "MonitorReveal",
        ClassicalMessage::BerAnnounce(_) => "BerAnnounce",
        ClassicalMessage::SiftIndices(_) => "SiftIndices",
        ClassicalMessage::Ack => "Ack",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AliceState {
    Reveal,
    AwaitSift,
    AwaitBer,
    Done,
}

impl AliceState {
    fn name(self) -> &'static str {
        match self {
            AliceState::Reveal => "Reveal",
            AliceState::AwaitSift => "AwaitSift",
            AliceState::AwaitBer => "AwaitBer",
            AliceState::Done => "Done",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AliceEndpoint {
    monitored: Vec<MonitorEntry>,
    encoded: BTreeMap<u64, bool>,
    state: AliceState,
    pub key: Vec<bool>,
    pub announced_ber: Option<f64>,
}

impl AliceEndpoint {
    /// Alice's private view of the transcript.
    pub fn from_transcript(records: &[PulseRecord]) -> Self {
        let mut monitored = Vec::new();
        let mut encoded = BTreeMap::new();
        for r in records {
            match r.alice_action {
                AliceAction::Monitored { outcome } => monitored.push(MonitorEntry {
                    window: r.window_index,
                    outcome,
                }),
                AliceAction::Encoded { key_bit } => {
                    encoded.insert(r.window_index, key_bit);
                }
            }
        }
        Self {
            monitored,
            encoded,
            state: AliceState::Reveal,
            key: Vec::new(),
            announced_ber: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.state == AliceState::Done
    }

    /// The opening reveal.
    pub fn start(&mut self) -> Result<ClassicalMessage, ExchangeError> {
        if self.state != AliceState::Reveal {
            return Err(self.unexpected("start"));
        }
        self.state = AliceState::AwaitSift;
        Ok(ClassicalMessage::MonitorReveal(std::mem::take(&mut self.monitored)))
    }

    pub fn on_message(&mut self, msg: ClassicalMessage) -> Result<Option<ClassicalMessage>, ExchangeError> {
        match (self.state, msg) {
            (AliceState::AwaitSift, ClassicalMessage::SiftIndices(idx)) => {
                self.key = idx
                    .iter()
                    .map(|w| self.encoded.get(w).copied().ok_or(ExchangeError::NotEncoded(*w)))
                    .collect::<Result<_, _>>()?;
                self.state = AliceState::AwaitBer;
                Ok(Some(ClassicalMessage::Ack))
            }
            (AliceState::AwaitBer, ClassicalMessage::BerAnnounce(e)) => {
                self.announced_ber = Some(e);
                self.state = AliceState::Done;
                Ok(Some(ClassicalMessage::Ack))
            }
            (_, other) => Err(self.unexpected(kind(&other))),
        }
    }

    fn unexpected(&self, got: &'static str) -> ExchangeError {
        ExchangeError::Unexpected {
            role: "Alice",
            state: self.state.name(),
            got,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BobState {
    AwaitReveal,
    AwaitSiftAck,
    ReadyToAnnounce,
    AwaitBerAck,
    Done,
}

impl BobState {
    fn name(self) -> &'static str {
        match self {
            BobState::AwaitReveal => "AwaitReveal",
            BobState::AwaitSiftAck => "AwaitSiftAck",
            BobState::ReadyToAnnounce => "ReadyToAnnounce",
            BobState::AwaitBerAck => "AwaitBerAck",
            BobState::Done => "Done",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BobWindow {
    alpha: bool,
    basis: Basis,
    signal: bool,
    outcome: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct BobEndpoint {
    windows: BTreeMap<u64, BobWindow>,
    state: BobState,
    pub sift_indices: Vec<u64>,
    pub key: Vec<bool>,
    pub monitor_clicks: u64,
    pub monitor_errors: u64,
}

impl BobEndpoint {
    /// Bob's private view of the transcript.
    pub fn from_transcript(records: &[PulseRecord]) -> Self {
        let windows = records
            .iter()
            .map(|r| {
                (
                    r.window_index,
                    BobWindow {
                        alpha: r.bob_alpha,
                        basis: r.bob_basis,
                        signal: matches!(r.intensity, IntensityClass::Signal(_)),
                        outcome: r.bob_outcome,
                    },
                )
            })
            .collect();
        Self {
            windows,
            state: BobState::AwaitReveal,
            sift_indices: Vec::new(),
            key: Vec::new(),
            monitor_clicks: 0,
            monitor_errors: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.state == BobState::Done
    }

    pub fn monitor_error_rate(&self) -> f64 {
        if self.monitor_clicks == 0 {
            0.0
        } else {
            self.monitor_errors as f64 / self.monitor_clicks as f64
        }
    }

    pub fn on_message(&mut self, msg: ClassicalMessage) -> Result<Option<ClassicalMessage>, ExchangeError> {
        match (self.state, msg) {
            (BobState::AwaitReveal, ClassicalMessage::MonitorReveal(entries)) => {
                let mut monitored = BTreeSet::new();
                for e in entries {
                    monitored.insert(e.window);
                    let (Some(outcome), Some(w)) = (e.outcome, self.windows.get(&e.window)) else {
                        continue;
                    };
                    if w.basis == Basis::Z {
                        self.monitor_clicks += 1;
                        self.monitor_errors += (outcome != w.alpha) as u64;
                    }
                }
                for (&i, w) in &self.windows {
                    if w.basis == Basis::X && w.signal && !monitored.contains(&i) {
                        if let Some(o) = w.outcome {
                            self.sift_indices.push(i);
                            self.key.push(o ^ w.alpha);
                        }
                    }
                }
                self.state = BobState::AwaitSiftAck;
                Ok(Some(ClassicalMessage::SiftIndices(self.sift_indices.clone())))
            }
            (BobState::AwaitSiftAck, ClassicalMessage::Ack) => {
                self.state = BobState::ReadyToAnnounce;
                Ok(None)
            }
            (BobState::AwaitBerAck, ClassicalMessage::Ack) => {
                self.state = BobState::Done;
                Ok(None)
            }
            (_, other) => Err(self.unexpected(kind(&other))),
        }
    }

    pub fn announce_ber(&mut self, ber: f64) -> Result<ClassicalMessage, ExchangeError> {
        if self.state != BobState::ReadyToAnnounce {
            return Err(self.unexpected("announce"));
        }
        self.state = BobState::AwaitBerAck;
        Ok(ClassicalMessage::BerAnnounce(ber))
    }

    fn unexpected(&self, got: &'static str) -> ExchangeError {
        ExchangeError::Unexpected {
            role: "Bob",
            state: self.state.name(),
            got,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeOutcome {
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
    pub sift_indices: Vec<u64>,
    pub monitor_error_rate: f64,
    pub ber: f64,
    pub frames: usize,
    pub bytes: usize,
}

/// Runs the post-processing exchange over an in-memory byte pipe.
pub fn run_classical_exchange(records: &[PulseRecord]) -> Result<ExchangeOutcome, ExchangeError> {
    let mut alice = AliceEndpoint::from_transcript(records);
    let mut bob = BobEndpoint::from_transcript(records);
    let mut to_bob: VecDeque<u8> = VecDeque::new();
    let mut to_alice: VecDeque<u8> = VecDeque::new();
    let mut frames = 0;
    let mut bytes = 0;
    let mut send = |pipe: &mut VecDeque<u8>, msg: &ClassicalMessage| {
        let before = pipe.len();
        write_frame(pipe, msg).map_err(StreamError::from)?;
        frames += 1;
        bytes += pipe.len() - before;
        Ok::<_, ExchangeError>(())
    };

    send(&mut to_bob, &alice.start()?)?;
    let sift = bob.on_message(read_frame(&mut to_bob)?)?.expect("Bob answers a reveal");
    send(&mut to_alice, &sift)?;
    let ack = alice.on_message(read_frame(&mut to_alice)?)?.expect("Alice acks sifting");
    send(&mut to_bob, &ack)?;
    bob.on_message(read_frame(&mut to_bob)?)?;

    // Stand-in for error correction: the BER it would reveal.
    let errors = alice.key.iter().zip(&bob.key).filter(|(a, b)| a != b).count();
    let ber = if bob.key.is_empty() {
        0.0
    } else {
        errors as f64 / bob.key.len() as f64
    };
    send(&mut to_alice, &bob.announce_ber(ber)?)?;
    let ack = alice.on_message(read_frame(&mut to_alice)?)?.expect("Alice acks the BER");
    send(&mut to_bob, &ack)?;
    bob.on_message(read_frame(&mut to_bob)?)?;
    debug_assert!(alice.is_done() && bob.is_done());

    Ok(ExchangeOutcome {
        monitor_error_rate: bob.monitor_error_rate(),
        alice_key: alice.key,
        bob_key: bob.key,
        sift_indices: bob.sift_indices,
        ber,
        frames,
        bytes,
    })
}
