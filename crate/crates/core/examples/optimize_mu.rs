//! Optimal signal mean at a few distances on the calibrated field link.

use pnp_qkd::channel::Link;
use pnp_qkd::experiment::optimize_link;

fn main() {
    for length in [0.0, 25.0, 50.4, 75.0] {
        let mut link = Link::experiment_50km();
        link.channel.fiber_length_km = length;
        let (opt, report) = optimize_link(&link, 1.2, 1.0);
        println!(
            "{length:>5} km: mu_opt {:.3}  SKR {:.3e}  evaluations {}{}",
            opt.mu_opt,
            report.skr,
            opt.evaluations,
            if opt.zero_rate { "  (no positive rate)" } else { "" }
        );
    }
}
