//! Key rate against distance at 50 MHz and 1 GHz, with and without
//! backscatter. Writes three CSV files to the directory given as the first
//! argument (default: current directory).

use std::fs::File;
use std::path::PathBuf;

use pnp_qkd::experiment::{cutoff_km, sweep_fig3, write_sweep_csv, ExperimentConfig, SweepConfig};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let base = ExperimentConfig::fig3().link;
    let runs = [
        ("sweep_50mhz.csv", 50e6, true),
        ("sweep_1ghz.csv", 1e9, true),
        ("sweep_1ghz_no_backscatter.csv", 1e9, false),
    ];
    for (file, rate, backscatter) in runs {
        let sweep = SweepConfig {
            repetition_rates_hz: vec![rate],
            backscatter_enabled: backscatter,
            ..SweepConfig::default()
        };
        let rows = sweep_fig3(&base, &sweep, 1.2, 1.0);
        let path = dir.join(file);
        write_sweep_csv(&rows, File::create(&path).expect("output writable")).expect("csv written");
        println!("{}: cutoff {:?} km", path.display(), cutoff_km(&rows, rate));
    }
}
