//! Seeded Monte Carlo error reports for the three protocols, in the same
//! CSV layout as the `simulate` subcommand.
//!
//! cargo run --release --example monte_carlo_experiment

use pure_shuffle::binary::BinaryProtocol;
use pure_shuffle::harness::{run_experiment, DatasetSpec, ExperimentConfig, REPORT_HEADER};
use pure_shuffle::histogram::{HistogramParams, HistogramProtocol};
use pure_shuffle::real::RealProtocol;
use pure_shuffle::search::{engineering_params, SearchOptions, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    let config = ExperimentConfig::new(5000, 7, DatasetSpec::UniformRandom)?;
    let opts = SearchOptions::default();
    println!("{REPORT_HEADER}");
    for n in [50, 100, 200] {
        let binary = BinaryProtocol::new(engineering_params(1.0, n, DEFAULT_D_CANDIDATES)?)?;
        println!("{}", run_experiment(&config, &binary)?.csv_row());
    }
    let hist = HistogramProtocol::new(HistogramParams::engineering(1.0, 100, 4, DEFAULT_D_CANDIDATES, &opts)?)?;
    println!("{}", run_experiment(&config, &hist)?.csv_row());
    let real = RealProtocol::engineering(1.0, 16, DEFAULT_D_CANDIDATES, &opts)?;
    println!("{}", run_experiment(&config, &real)?.csv_row());
    Ok(())
}
