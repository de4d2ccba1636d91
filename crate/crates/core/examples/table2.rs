//! Decoy estimation and key rate from the 50.4 km field-trial gains.

use pnp_qkd::experiment::{published, run_table2};

fn main() {
    let r = run_table2().expect("fixture is valid");
    let rows = [
        ("delta0", r.estimates.delta0, published::DELTA0),
        ("delta1", r.estimates.delta1, published::DELTA1),
        ("e_m1", r.estimates.e_m1, published::E_M1),
        ("SKR", r.report.skr, published::SKR),
    ];
    println!("{:>8} {:>12} {:>12}", "", "computed", "published");
    for (name, ours, theirs) in rows {
        println!("{name:>8} {ours:>12.4e} {theirs:>12.4e}");
    }
}
