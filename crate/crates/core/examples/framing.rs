//! Classical-channel frames on the wire, and a full exchange between the
//! two endpoints after a short session.

use pnp_qkd::channel::Link;
use pnp_qkd::protocol::{
    frame_decode, frame_encode, run_classical_exchange, run_session, ClassicalMessage, MonitorEntry, SessionConfig,
};

fn main() {
    let msg = ClassicalMessage::MonitorReveal(vec![
        MonitorEntry { window: 7, outcome: Some(true) },
        MonitorEntry { window: 9, outcome: None },
    ]);
    let bytes = frame_encode(&msg);
    println!("{bytes:02x?}");
    assert_eq!(frame_decode(&bytes).unwrap(), msg);
    println!("truncated: {:?}", frame_decode(&bytes[..6]).unwrap_err());

    let cfg = SessionConfig {
        num_windows: 100_000,
        record_transcript: true,
        ..SessionConfig::default()
    };
    let out = run_session(&cfg, &Link::noiseless(), None).unwrap();
    let ex = run_classical_exchange(out.transcript.as_deref().unwrap()).unwrap();
    println!(
        "{} frames, {} bytes, {} key bits, BER {}, monitor error {}",
        ex.frames,
        ex.bytes,
        ex.alice_key.len(),
        ex.ber,
        ex.monitor_error_rate
    );
}
