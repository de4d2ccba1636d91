use pnp_qkd::attacks::{eve_advantage, EveModel};
use pnp_qkd::channel::{ChannelParams, DetectorParams, ErrorFloors, Link};
use pnp_qkd::encoding::{measure, prepare_state, Basis};
use pnp_qkd::protocol::{run_classical_exchange, run_session, write_transcript, SessionConfig};
use pnp_qkd::security::{holevo_from_attack, AncillaRealization};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn session(windows: u64, seed: u64) -> SessionConfig {
    SessionConfig {
        num_windows: windows,
        seed,
        ..SessionConfig::default()
    }
}

#[test]
fn same_seed_gives_identical_transcripts() {
    let cfg = SessionConfig {
        record_transcript: true,
        batch_size: 4096,
        ..session(50_000, 17)
    };
    let link = Link::experiment_50km();
    let csv = |cfg: &SessionConfig| {
        let out = run_session(cfg, &link, None).unwrap();
        let mut buf = Vec::new();
        write_transcript(out.transcript.as_deref().unwrap(), &mut buf).unwrap();
        buf
    };
    let a = csv(&cfg);
    assert_eq!(a, csv(&cfg));
    assert_ne!(a, csv(&SessionConfig { seed: 18, ..cfg }));
}

#[test]
fn transcript_round_trips_through_a_file() {
    let cfg = SessionConfig {
        record_transcript: true,
        ..session(2_000, 3)
    };
    let out = run_session(&cfg, &Link::default(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_transcript(out.transcript.as_deref().unwrap(), std::fs::File::create(&path).unwrap()).unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 11);
    assert_eq!(reader.records().count(), 2_000);
}

/// Outcome frequencies of `measure` against Born-rule probabilities.
#[test]
fn measurement_statistics_follow_born_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 20_000;
    let mut stat = 0.0;
    let mut cells = 0;
    for alpha in [false, true] {
        for beta in [false, true] {
            let s = prepare_state(alpha, beta).amplitudes;
            for basis in [Basis::Z, Basis::X] {
                let p0 = s.prob_zero(basis);
                let zeros = (0..trials).filter(|_| !measure(s, basis, &mut rng)).count() as f64;
                for (obs, p) in [(zeros, p0), (trials as f64 - zeros, 1.0 - p0)] {
                    let exp = p * trials as f64;
                    if exp > 0.0 {
                        stat += (obs - exp).powi(2) / exp;
                        cells += 1;
                    } else {
                        assert_eq!(obs, 0.0);
                    }
                }
            }
        }
    }
    // Each informative basis contributes one degree of freedom.
    let df = (cells / 2) as f64;
    let p = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
    assert!(p > 1e-3, "chi2={stat} df={df} p={p}");
}

#[test]
fn vacuum_gain_is_dark_counts_plus_background() {
    let link = Link::experiment_50km();
    let cfg = session(4_000_000, 21);
    let s = run_session(&cfg, &link, None).unwrap().stats;
    let t = s.x[2];
    let bob = link.bob;
    let bs = link.channel.backscatter_ratio_db;
    let noise = cfg.schedule.outgoing_mean()
        * 10f64.powf(bs / 10.0)
        * link.channel.backscatter_gate_fraction
        * link.channel.repetition_rate_hz
        / 50e6;
    let expected = 1.0 - (1.0 - bob.dark_count_prob) * (-bob.efficiency * noise).exp();
    let se = (expected / t.windows as f64).sqrt();
    assert!((t.gain() - expected).abs() < 4.0 * se, "{} vs {expected}", t.gain());
}

/// With the forward signal fully lost, every X click is noise and carries
/// a random bit.
#[test]
fn backscatter_only_clicks_are_random() {
    let link = Link {
        channel: ChannelParams {
            fiber_length_km: 400.0,
            backscatter_ratio_db: 0.0,
            backscatter_gate_fraction: 1.0,
            ..ChannelParams::default()
        },
        bob: DetectorParams {
            dark_count_prob: 0.0,
            dead_time_windows: 0,
            ..DetectorParams::default()
        },
        alice: DetectorParams::default(),
        floors: ErrorFloors::none(),
    };
    let s = run_session(&session(1_000_000, 31), &link, None).unwrap().stats;
    let all = s.x.iter().fold((0, 0), |acc, t| (acc.0 + t.clicks, acc.1 + t.errors));
    assert!(all.0 > 20_000, "{all:?}");
    let e = all.1 as f64 / all.0 as f64;
    assert!((e - 0.5).abs() < 0.01, "{e}");
}

/// Eve's measured information stays within what the Holevo quantity
/// allows for the same attack.
#[test]
fn collective_attack_leaks_at_most_the_holevo_quantity() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for error in [0.05, 0.15] {
        let realization = AncillaRealization::random_symmetric(&mut rng, error);
        let chi = holevo_from_attack(&realization.overlaps());
        let mut eve = EveModel::collective(realization).unwrap();
        let s = run_session(&session(1_000_000, 42), &Link::noiseless(), Some(&mut eve))
            .unwrap()
            .stats;
        let adv = eve_advantage(&eve, &s);
        assert!(!adv.low_confidence);
        assert!(adv.bits <= chi + 3.0 * adv.std_error + adv.bias_floor, "{adv:?} chi={chi}");
        assert!(adv.bits > adv.bias_floor + 3.0 * adv.std_error, "attack should leak: {adv:?}");
    }
}

#[test]
fn collective_monitor_error_matches_mean_flip_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let realization = AncillaRealization::random(&mut rng);
    let target = realization.overlaps().mean_monitor_error();
    let mut eve = EveModel::collective(realization).unwrap();
    let s = run_session(&session(1_000_000, 44), &Link::noiseless(), Some(&mut eve))
        .unwrap()
        .stats;
    let t = s.single_photon_monitor_tally();
    let se = (target * (1.0 - target) / t.clicks as f64).sqrt();
    assert!((t.error_rate() - target).abs() < 4.0 * se, "{} vs {target}", t.error_rate());
}

#[test]
fn classical_exchange_agrees_with_session_statistics() {
    let cfg = SessionConfig {
        record_transcript: true,
        ..session(200_000, 51)
    };
    let out = run_session(&cfg, &Link::noiseless(), None).unwrap();
    let ex = run_classical_exchange(out.transcript.as_deref().unwrap()).unwrap();
    let (a, b) = out.stats.sifted_keys();
    assert_eq!(ex.alice_key, a);
    assert_eq!(ex.bob_key, b);
    assert_eq!(ex.ber, 0.0);
    assert_eq!(ex.monitor_error_rate, out.stats.monitor_error_rate());
    assert_eq!(ex.frames, 5);
}
