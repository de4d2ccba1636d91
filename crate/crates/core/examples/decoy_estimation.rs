//! Decoy bounds from gains computed in closed form, set against the true
//! single-photon fraction of the model.

use pnp_qkd::channel::Link;
use pnp_qkd::decoy::{estimate, GainSet};
use pnp_qkd::encoding::Basis;

fn main() {
    let (u, v, outgoing) = (0.6, 0.2, 0.42);
    for length in [10.0, 30.0, 50.4] {
        let mut link = Link::experiment_50km();
        link.channel.fiber_length_km = length;
        let gains = |basis| {
            let (q_u, q_v, q_0, e_v) = match basis {
                Basis::X => (link.x_gain(u, outgoing), link.x_gain(v, outgoing), link.x_gain(0.0, outgoing), 0.0),
                Basis::Z => (link.z_gain(u), link.z_gain(v), link.z_gain(0.0), link.z_single_error()),
            };
            GainSet { basis, q_u, q_v, q_0, e_v, u, v }
        };
        let est = estimate(&gains(Basis::X), &gains(Basis::Z)).expect("gains are consistent");
        let q = link.x_gain(u, outgoing);
        let truth = u * (-u).exp() * link.x_yield(1, outgoing) / q;
        println!("{length:>5} km: delta1 bound {:.4}  true {truth:.4}  e_m1 {:.2e}", est.delta1, est.e_m1);
    }
}
