//! Monte-Carlo session over the calibrated field link, then decoy
//! estimation and key rate from the simulated gains.

use pnp_qkd::experiment::{run_montecarlo, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.session.num_windows = 20_000_000;
    let r = run_montecarlo(&cfg, None).expect("session runs");
    let s = &r.stats;
    for (label, t) in ["signal", "decoy", "vacuum"].iter().zip(&s.x) {
        println!("X {label:>6}: gain {:.3e} error {:.4}", t.gain(), t.error_rate());
    }
    println!("sifted bits {}  e {:.4}  e_m {:.4}", s.sifted.len(), s.key_error_rate(), r.monitor_error);
    match &r.estimates {
        Some(e) => println!("delta1 {:.3} delta0 {:.4} e_m1 {:.2e}", e.delta1, e.delta0, e.e_m1),
        None => println!("estimation aborted: {:?}", r.aborted),
    }
    println!("SKR {:.3e} per window", r.skr());
}
