//! Intercept-resend in each basis on a noiseless link: what the monitor
//! sees and what Eve learns.

use pnp_qkd::attacks::EveModel;
use pnp_qkd::channel::Link;
use pnp_qkd::experiment::run_montecarlo_on;
use pnp_qkd::protocol::SessionConfig;

fn main() {
    let cfg = SessionConfig {
        num_windows: 1_000_000,
        ..SessionConfig::default()
    };
    for name in ["none", "intercept-resend-z", "intercept-resend-x"] {
        let mut eve = EveModel::by_name(name).unwrap();
        let r = run_montecarlo_on(&cfg, &Link::noiseless(), 1.2, false, Some(&mut eve)).unwrap();
        let adv = r.advantage.map_or(0.0, |a| a.bits);
        println!(
            "{name:>20}: e_m {:.4}  e {:.4}  eve bits/bit {adv:.4}  SKR {:.3e}",
            r.monitor_error,
            r.stats.key_error_rate(),
            r.skr()
        );
    }
}
