//! Simulator and security analysis for two-way plug-and-play time-bin QKD
//! with monitoring, decoy states and a lossy, noisy double-pass channel.

pub mod attacks;
pub mod channel;
pub mod decoy;
pub mod encoding;
pub mod experiment;
pub mod protocol;
pub mod security;
