//! Photonic layer: weak-coherent source statistics, two-way fibre loss,
//! threshold detectors with dark counts and dead time, and Rayleigh
//! backscattering of the outgoing pulse train.
//!
//! Path conventions:
//!
//! * `Forward` is the fibre from Bob's output to Alice's input.
//! * `Backward` is Alice's encoding section, the fibre back to Bob, Bob's
//!   decoding section and any excess insertion loss on Bob's side.
//! * The 90:10 coupler at Alice sends `coupler_split` of the light to the
//!   monitoring detector and `1 − coupler_split` into the encoder.
//!
//! Backscatter is a constant background at Bob's detector: a fixed fraction
//! `β` of the outgoing pulse energy comes back, and a share of it lands in
//! each gate. The share grows linearly with the repetition rate relative to
//! 50 MHz. This is a declared model; see [`repetition_scale`].

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Repetition rate the backscatter gate fraction is referenced to.
pub const REFERENCE_RATE_HZ: f64 = 50.0e6;

/// Excess return-path loss that brings the closed-form X-basis signal gain
/// of the 50.4 km link, background included, to `1.21e-4` at `u = 0.6`.
pub const EXPERIMENT_EXCESS_LOSS_DB: f64 = 6.678_108_218_140_531;

/// Share of the backscattered power landing in one 50 MHz detection gate,
/// tuned so backscatter contributes 0.53 % to the X-basis signal error at
/// the 50.4 km operating point with the default intensity schedule.
pub const BACKSCATTER_GATE_FRACTION: f64 = 0.040_315_801_084_291_975;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    NotProbability { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("backscatter ratio must be <= 0 dB, got {0}")]
    BackscatterRatio(f64),
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("signal mean {signal} must exceed decoy mean {decoy}, which must be > 0")]
    IntensityOrder { signal: f64, decoy: f64 },
}

pub(crate) fn check_prob(name: &'static str, value: f64) -> Result<(), ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ParamError::NotProbability { name, value })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::Negative { name, value })
    }
}

pub fn db_to_transmittance(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub fiber_length_km: f64,
    pub fiber_loss_db_per_km: f64,
    pub encode_loss_db: f64,
    pub decode_loss_db: f64,
    /// Additional insertion loss on the return path at Bob.
    pub excess_loss_db: f64,
    /// Backscattered-to-entering power ratio `β` in dB.
    pub backscatter_ratio_db: f64,
    pub backscatter_gate_fraction: f64,
    pub backscatter_enabled: bool,
    pub repetition_rate_hz: f64,
    /// Fraction of the light diverted to Alice's monitoring detector.
    pub coupler_split: f64,
}

impl Default for ChannelParams {
    /// Simulation parameters: 0.2 dB/km fibre, 4 dB encoder, 5 dB decoder,
    /// β = −40.5 dB, 90:10 coupler, 50 MHz.
    fn default() -> Self {
        Self {
            fiber_length_km: 0.0,
            fiber_loss_db_per_km: 0.2,
            encode_loss_db: 4.0,
            decode_loss_db: 5.0,
            excess_loss_db: 0.0,
            backscatter_ratio_db: -40.5,
            backscatter_gate_fraction: BACKSCATTER_GATE_FRACTION,
            backscatter_enabled: true,
            repetition_rate_hz: REFERENCE_RATE_HZ,
            coupler_split: 0.10,
        }
    }
}

impl ChannelParams {
    /// The 50.4 km field link, including the calibrated excess loss.
    pub fn experiment_50km() -> Self {
        Self {
            fiber_length_km: 50.4,
            excess_loss_db: EXPERIMENT_EXCESS_LOSS_DB,
            ..Self::default()
        }
    }

    pub fn lossless() -> Self {
        Self {
            fiber_length_km: 0.0,
            fiber_loss_db_per_km: 0.0,
            encode_loss_db: 0.0,
            decode_loss_db: 0.0,
            excess_loss_db: 0.0,
            backscatter_enabled: false,
            coupler_split: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        check_non_negative("fiber_length_km", self.fiber_length_km)?;
        check_non_negative("fiber_loss_db_per_km", self.fiber_loss_db_per_km)?;
        check_non_negative("encode_loss_db", self.encode_loss_db)?;
        check_non_negative("decode_loss_db", self.decode_loss_db)?;
        check_non_negative("excess_loss_db", self.excess_loss_db)?;
        check_non_negative("backscatter_gate_fraction", self.backscatter_gate_fraction)?;
        check_prob("coupler_split", self.coupler_split)?;
        if !(self.backscatter_ratio_db <= 0.0) {
            return Err(ParamError::BackscatterRatio(self.backscatter_ratio_db));
        }
        if !(self.repetition_rate_hz > 0.0 && self.repetition_rate_hz.is_finite()) {
            return Err(ParamError::NotPositive {
                name: "repetition_rate_hz",
                value: self.repetition_rate_hz,
            });
        }
        Ok(())
    }

    fn fiber_db(&self) -> f64 {
        self.fiber_length_km * self.fiber_loss_db_per_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    Forward,
    Backward,
    RoundTrip,
}

pub fn transmittance(params: &ChannelParams, segment: Segment) -> f64 {
    let forward_db = params.fiber_db();
    let backward_db =
        params.encode_loss_db + params.fiber_db() + params.decode_loss_db + params.excess_loss_db;
    let total_db = match segment {
        Segment::Forward => forward_db,
        Segment::Backward => backward_db,
        Segment::RoundTrip => forward_db + backward_db,
    };
    db_to_transmittance(total_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub efficiency: f64,
    /// Dark-count probability per gate.
    pub dark_count_prob: f64,
    /// Windows blanked after each click.
    pub dead_time_windows: u32,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self::snspd(REFERENCE_RATE_HZ)
    }
}

impl DetectorParams {
    /// 85 % efficient SNSPD with 15 ns reset and the simulated 5e-8 dark
    /// count probability, gated at `rate_hz`.
    pub fn snspd(rate_hz: f64) -> Self {
        Self {
            efficiency: 0.85,
            dark_count_prob: 5e-8,
            dead_time_windows: dead_time_windows(15e-9, rate_hz),
        }
    }

    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_count_prob: 0.0,
            dead_time_windows: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        check_prob("efficiency", self.efficiency)?;
        check_prob("dark_count_prob", self.dark_count_prob)
    }
}

/// Whole windows that fall inside the reset time after the click window.
pub fn dead_time_windows(reset_s: f64, rate_hz: f64) -> u32 {
    let windows = reset_s * rate_hz;
    // 15 ns at 1 GHz lands at 15.000000000000002
    (windows + 1e-9).floor().max(0.0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IntensityClass {
    Signal(f64),
    Decoy(f64),
    Vacuum,
}

impl IntensityClass {
    pub fn mean_photons(self) -> f64 {
        match self {
            IntensityClass::Signal(mu) | IntensityClass::Decoy(mu) => mu,
            IntensityClass::Vacuum => 0.0,
        }
    }

    /// 0 = signal, 1 = decoy, 2 = vacuum.
    pub fn index(self) -> usize {
        match self {
            IntensityClass::Signal(_) => 0,
            IntensityClass::Decoy(_) => 1,
            IntensityClass::Vacuum => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IntensityClass::Signal(_) => "signal",
            IntensityClass::Decoy(_) => "decoy",
            IntensityClass::Vacuum => "vacuum",
        }
    }
}

/// Poissonian photon number for one weak-coherent pulse.
pub fn emit_pulse<R: Rng + ?Sized>(class: IntensityClass, rng: &mut R) -> u32 {
    let mean = class.mean_photons();
    if mean <= 0.0 {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(dist) => dist.sample(rng) as u32,
        Err(_) => 0,
    }
}

/// Pre-built samplers for a fixed set of intensity classes.
#[derive(Debug, Clone)]
pub struct PhotonSource {
    samplers: [Option<Poisson<f64>>; 3],
}

impl PhotonSource {
    pub fn new(classes: [IntensityClass; 3]) -> Self {
        let samplers = classes.map(|c| {
            let mean = c.mean_photons();
            if mean > 0.0 {
                Poisson::new(mean).ok()
            } else {
                None
            }
        });
        Self { samplers }
    }

    pub fn emit<R: Rng + ?Sized>(&self, class: IntensityClass, rng: &mut R) -> u32 {
        match &self.samplers[class.index()] {
            Some(dist) => dist.sample(rng) as u32,
            None => 0,
        }
    }
}

/// Probability that at least one of `n` photons registers.
pub fn photon_click_prob(n: u32, efficiency: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 - (1.0 - efficiency).powi(n as i32)
    }
}

/// Threshold detection of `surviving_photons` OR an independent dark count.
/// Dead time is bookkept by the caller.
pub fn detect<R: Rng + ?Sized>(surviving_photons: u32, det: &DetectorParams, rng: &mut R) -> bool {
    let photon = rng.random::<f64>() < photon_click_prob(surviving_photons, det.efficiency);
    let dark = rng.random::<f64>() < det.dark_count_prob;
    photon || dark
}

/// Binomial thinning of `n` photons through transmittance `t`.
pub fn thin<R: Rng + ?Sized>(n: u32, t: f64, rng: &mut R) -> u32 {
    (0..n).filter(|_| rng.random::<f64>() < t).count() as u32
}

/// Gate-overlap multiplier for backscatter at the configured repetition rate.
pub fn repetition_scale(params: &ChannelParams) -> f64 {
    params.backscatter_gate_fraction * params.repetition_rate_hz / REFERENCE_RATE_HZ
}

/// Mean backscattered photon number per backward-channel detection window.
pub fn backscatter_noise(outgoing_mean_photons: f64, params: &ChannelParams, repetition_scale: f64) -> f64 {
    outgoing_mean_photons * 10f64.powf(params.backscatter_ratio_db / 10.0) * repetition_scale
}

/// Click probability at Bob's detector from backscatter alone.
pub fn backscatter_click_prob(outgoing_mean_photons: f64, params: &ChannelParams, det: &DetectorParams) -> f64 {
    if !params.backscatter_enabled {
        return 0.0;
    }
    let mean = backscatter_noise(outgoing_mean_photons, params, repetition_scale(params));
    1.0 - (-det.efficiency * mean).exp()
}

/// Background click probability `Y₀` at Bob: dark counts or backscatter.
pub fn background_yield(outgoing_mean_photons: f64, params: &ChannelParams, det: &DetectorParams) -> f64 {
    let bs = backscatter_click_prob(outgoing_mean_photons, params, det);
    1.0 - (1.0 - det.dark_count_prob) * (1.0 - bs)
}

/// Overall efficiency of the encode-and-return path, detector included.
pub fn x_path_efficiency(params: &ChannelParams, det: &DetectorParams) -> f64 {
    transmittance(params, Segment::RoundTrip) * (1.0 - params.coupler_split) * det.efficiency
}

/// Overall efficiency from Bob's output to a click at Alice's monitor.
pub fn z_path_efficiency(params: &ChannelParams, monitor: &DetectorParams) -> f64 {
    transmittance(params, Segment::Forward) * params.coupler_split * monitor.efficiency
}

/// Closed-form gain at Bob for a pulse class: `1 − (1 − Y₀)·e^(−ημ)`.
///
/// `outgoing_mean_photons` is the average mean photon number of Bob's
/// outgoing pulse train, which sets the backscatter background.
pub fn expected_gain(
    class: IntensityClass,
    params: &ChannelParams,
    det: &DetectorParams,
    outgoing_mean_photons: f64,
) -> f64 {
    let y0 = background_yield(outgoing_mean_photons, params, det);
    let eta = x_path_efficiency(params, det);
    1.0 - (1.0 - y0) * (-eta * class.mean_photons()).exp()
}

/// Independent bit-flip floors on detected signal photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorFloors {
    /// Electronic modulation error on X-basis outcomes.
    pub electronic: f64,
    /// Intensity-modulator extinction error on Z-basis outcomes.
    pub extinction: f64,
}

impl Default for ErrorFloors {
    fn default() -> Self {
        Self {
            electronic: 0.0007,
            extinction: 0.0001,
        }
    }
}

impl ErrorFloors {
    pub fn none() -> Self {
        Self {
            electronic: 0.0,
            extinction: 0.0,
        }
    }
}

/// Everything physical about one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub channel: ChannelParams,
    pub bob: DetectorParams,
    pub alice: DetectorParams,
    pub floors: ErrorFloors,
}

impl Default for Link {
    fn default() -> Self {
        let channel = ChannelParams::default();
        let det = DetectorParams::snspd(channel.repetition_rate_hz);
        Self {
            channel,
            bob: det,
            alice: det,
            floors: ErrorFloors::default(),
        }
    }
}

impl Link {
    pub fn experiment_50km() -> Self {
        Self {
            channel: ChannelParams::experiment_50km(),
            ..Self::default()
        }
    }

    /// No loss, no noise, perfect detectors.
    pub fn noiseless() -> Self {
        Self {
            channel: ChannelParams::lossless(),
            bob: DetectorParams::ideal(),
            alice: DetectorParams::ideal(),
            floors: ErrorFloors::none(),
        }
    }

    /// Same link at another repetition rate; detector dead time follows.
    pub fn at_rate(&self, rate_hz: f64) -> Self {
        let mut link = self.clone();
        link.channel.repetition_rate_hz = rate_hz;
        let dead = dead_time_windows(15e-9, rate_hz);
        link.bob.dead_time_windows = dead;
        link.alice.dead_time_windows = dead;
        link
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        self.channel.validate()?;
        self.bob.validate()?;
        self.alice.validate()?;
        check_prob("electronic error", self.floors.electronic)?;
        check_prob("extinction error", self.floors.extinction)
    }

    pub fn x_efficiency(&self) -> f64 {
        x_path_efficiency(&self.channel, &self.bob)
    }

    pub fn z_efficiency(&self) -> f64 {
        z_path_efficiency(&self.channel, &self.alice)
    }

    pub fn x_background(&self, outgoing_mean_photons: f64) -> f64 {
        background_yield(outgoing_mean_photons, &self.channel, &self.bob)
    }

    pub fn x_gain(&self, mu: f64, outgoing_mean_photons: f64) -> f64 {
        let y0 = self.x_background(outgoing_mean_photons);
        1.0 - (1.0 - y0) * (-self.x_efficiency() * mu).exp()
    }

    /// Expected X-basis error rate for a pulse class of mean `mu`.
    pub fn x_error(&self, mu: f64, outgoing_mean_photons: f64) -> f64 {
        let y0 = self.x_background(outgoing_mean_photons);
        let signal = 1.0 - (-self.x_efficiency() * mu).exp();
        let gain = 1.0 - (1.0 - y0) * (1.0 - signal);
        if gain <= 0.0 {
            return 0.0;
        }
        (self.floors.electronic * signal + 0.5 * y0 * (1.0 - signal)) / gain
    }

    pub fn z_gain(&self, mu: f64) -> f64 {
        1.0 - (1.0 - self.alice.dark_count_prob) * (-self.z_efficiency() * mu).exp()
    }

    /// X-basis yield of an `n`-photon pulse.
    pub fn x_yield(&self, n: u32, outgoing_mean_photons: f64) -> f64 {
        let y0 = self.x_background(outgoing_mean_photons);
        1.0 - (1.0 - y0) * (1.0 - self.x_efficiency()).powi(n as i32)
    }

    /// Z-basis yield of a single photon at Alice's monitor.
    pub fn z_single_yield(&self) -> f64 {
        1.0 - (1.0 - self.alice.dark_count_prob) * (1.0 - self.z_efficiency())
    }

    /// Monitor error rate of single-photon pulses without an eavesdropper.
    pub fn z_single_error(&self) -> f64 {
        let eta = self.z_efficiency();
        let y1 = self.z_single_yield();
        if y1 <= 0.0 {
            return 0.0;
        }
        (eta * self.floors.extinction + (1.0 - eta) * self.alice.dark_count_prob * 0.5) / y1
    }
}

/// Calibration targets for the field operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTarget {
    pub signal_mean: f64,
    pub signal_gain: f64,
    pub outgoing_mean: f64,
    pub backscatter_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub excess_loss_db: f64,
    pub backscatter_gate_fraction: f64,
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves jointly for the excess return loss and the backscatter gate
/// fraction: the full X-basis signal gain (darks and backscatter included)
/// must hit `signal_gain`, and backscatter-only clicks must add
/// `backscatter_error` to the signal error rate. Alternates the two
/// one-dimensional solves until they stop moving.
pub fn calibrate(base: &Link, target: CalibrationTarget) -> Calibration {
    let mut link = base.clone();
    link.channel.backscatter_enabled = true;
    let mut cal = Calibration {
        excess_loss_db: link.channel.excess_loss_db,
        backscatter_gate_fraction: link.channel.backscatter_gate_fraction,
    };
    for _ in 0..100 {
        link.channel.backscatter_gate_fraction = cal.backscatter_gate_fraction;
        let excess_loss_db = bisect(0.0, 40.0, |x| {
            let mut l = link.clone();
            l.channel.excess_loss_db = x;
            l.x_gain(target.signal_mean, target.outgoing_mean) - target.signal_gain
        });
        link.channel.excess_loss_db = excess_loss_db;
        let signal = 1.0 - (-link.x_efficiency() * target.signal_mean).exp();
        let backscatter_gate_fraction = bisect(0.0, 100.0, |frac| {
            let mut l = link.clone();
            l.channel.backscatter_gate_fraction = frac;
            let p_bs = backscatter_click_prob(target.outgoing_mean, &l.channel, &l.bob);
            let gain = l.x_gain(target.signal_mean, target.outgoing_mean);
            0.5 * p_bs * (1.0 - signal) * (1.0 - l.bob.dark_count_prob) / gain - target.backscatter_error
        });
        let next = Calibration {
            excess_loss_db,
            backscatter_gate_fraction,
        };
        let done = (next.excess_loss_db - cal.excess_loss_db).abs() < 1e-13
            && (next.backscatter_gate_fraction - cal.backscatter_gate_fraction).abs() < 1e-15;
        cal = next;
        if done {
            break;
        }
    }
    cal
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn bare(length: f64) -> ChannelParams {
        ChannelParams {
            fiber_length_km: length,
            encode_loss_db: 0.0,
            decode_loss_db: 0.0,
            ..ChannelParams::default()
        }
    }

    #[test]
    fn transmittance_examples() {
        assert_eq!(transmittance(&bare(0.0), Segment::Forward), 1.0);
        assert!((transmittance(&bare(50.0), Segment::Forward) - 0.1).abs() < 1e-12);
        let p = ChannelParams {
            fiber_length_km: 50.0,
            ..ChannelParams::default()
        };
        let rt = transmittance(&p, Segment::RoundTrip);
        assert!((rt - 10f64.powf(-2.9)).abs() < 1e-15);
        assert!((rt - 1.259e-3).abs() < 1e-6);
        let fb = transmittance(&p, Segment::Forward) * transmittance(&p, Segment::Backward);
        assert!((fb - rt).abs() < 1e-15);
    }

    #[test]
    fn transmittance_monotone() {
        let mut last = 1.0;
        for km in 0..200 {
            let t = transmittance(&ChannelParams { fiber_length_km: km as f64, ..Default::default() }, Segment::RoundTrip);
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn vacuum_emits_nothing() {
        let mut r = rng(1);
        assert!((0..10_000).all(|_| emit_pulse(IntensityClass::Vacuum, &mut r) == 0));
    }

    #[test]
    fn signal_photon_statistics() {
        let mut r = rng(2);
        let n = 1_000_000;
        let mut sum = 0u64;
        let mut nonzero = 0u64;
        for _ in 0..n {
            let k = emit_pulse(IntensityClass::Signal(0.6), &mut r);
            sum += k as u64;
            nonzero += (k > 0) as u64;
        }
        let mean = sum as f64 / n as f64;
        // CLT: sd of the mean is sqrt(0.6/1e6) = 7.7e-4
        assert!((mean - 0.6).abs() < 0.003, "{mean}");
        let p1 = nonzero as f64 / n as f64;
        assert!((p1 - (1.0 - (-0.6f64).exp())).abs() < 0.002, "{p1}");
    }

    #[test]
    fn detector_rates() {
        let mut r = rng(3);
        let none = DetectorParams { efficiency: 0.85, dark_count_prob: 0.0, dead_time_windows: 0 };
        assert!((0..10_000).all(|_| !detect(0, &none, &mut r)));

        let clicks = (0..1_000_000).filter(|_| detect(1, &none, &mut r)).count();
        assert!((clicks as f64 / 1e6 - 0.85).abs() < 0.002);
    }

    #[test]
    fn dark_count_rate_over_many_gates() {
        // 1e9 gates at 5e-8: expect 50 clicks, Poisson sd 7.07. Sample the
        // gap between dark counts geometrically so the loop stays short.
        let mut r = rng(4);
        let p: f64 = 5e-8;
        let mut gate: u64 = 0;
        let mut clicks = 0;
        loop {
            let u: f64 = r.random();
            gate += ((1.0 - u).ln() / (1.0 - p).ln()).floor() as u64 + 1;
            if gate > 1_000_000_000 {
                break;
            }
            clicks += 1;
        }
        assert!((clicks as f64 - 50.0).abs() <= 5.0 * 50f64.sqrt(), "{clicks}");
    }

    #[test]
    fn backscatter_examples() {
        let p = ChannelParams::default();
        assert_eq!(backscatter_noise(0.0, &p, 1.0), 0.0);
        let v = backscatter_noise(0.6, &p, 1.0);
        assert!((v - 0.6 * 8.913e-5).abs() < 1e-8);
        assert!((v - 5.348e-5).abs() < 1e-8);
        assert!((backscatter_noise(0.6, &p, 2.0) - 2.0 * v).abs() < 1e-18);
    }

    #[test]
    fn repetition_scale_follows_rate() {
        let p = ChannelParams::default();
        let fast = ChannelParams { repetition_rate_hz: 1e9, ..p.clone() };
        assert!((repetition_scale(&fast) / repetition_scale(&p) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn expected_gain_limits() {
        let mut p = ChannelParams::lossless();
        p.coupler_split = 0.0;
        let det = DetectorParams::ideal();
        assert_eq!(expected_gain(IntensityClass::Vacuum, &p, &det, 0.5), 0.0);
        for mu in [0.1, 0.6, 1.3] {
            let g = expected_gain(IntensityClass::Signal(mu), &p, &det, mu);
            assert!((g - (1.0 - (-mu as f64).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn expected_gain_monotone_in_mu_and_eta() {
        let link = Link::experiment_50km();
        let mut last = 0.0;
        for i in 0..100 {
            let g = expected_gain(IntensityClass::Signal(i as f64 * 0.02), &link.channel, &link.bob, 0.4);
            assert!(g >= last);
            last = g;
        }
        let mut last = 0.0;
        for i in 0..=20 {
            let det = DetectorParams { efficiency: i as f64 / 20.0, ..link.bob };
            let g = expected_gain(IntensityClass::Signal(0.6), &link.channel, &det, 0.4);
            assert!(g >= last);
            last = g;
        }
    }

    #[test]
    fn dead_time_windows_from_reset() {
        assert_eq!(dead_time_windows(15e-9, 50e6), 0);
        assert_eq!(dead_time_windows(15e-9, 1e9), 15);
        assert_eq!(DetectorParams::snspd(1e9).dead_time_windows, 15);
    }

    #[test]
    fn frozen_calibration_matches_solver() {
        let target = CalibrationTarget {
            signal_mean: 0.6,
            signal_gain: 1.21e-4,
            outgoing_mean: crate::protocol::IntensitySchedule::default().outgoing_mean(),
            backscatter_error: 0.0053,
        };
        let base = Link::experiment_50km();
        let cal = calibrate(&base, target);
        assert!((cal.excess_loss_db - EXPERIMENT_EXCESS_LOSS_DB).abs() < 1e-9, "{cal:?}");
        assert!(
            (cal.backscatter_gate_fraction / BACKSCATTER_GATE_FRACTION - 1.0).abs() < 1e-9,
            "{cal:?}"
        );
        let link = Link::experiment_50km();
        let g = link.x_gain(0.6, target.outgoing_mean);
        assert!((g / 1.21e-4 - 1.0).abs() < 1e-9, "{g}");
    }

    #[test]
    fn rejects_bad_params() {
        let p = ChannelParams { coupler_split: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ChannelParams { backscatter_ratio_db: 3.0, ..Default::default() };
        assert_eq!(p.validate(), Err(ParamError::BackscatterRatio(3.0)));
        let d = DetectorParams { efficiency: -0.1, ..Default::default() };
        assert!(d.validate().is_err());
    }
}
