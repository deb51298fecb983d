//! Finds audited binary-protocol parameters for a few (epsilon, n) targets
//! and prints the certified bound next to the exact audit.
//!
//! cargo run --release --example engineering_search

use std::time::Instant;

use pure_shuffle::audit::audit_binary;
use pure_shuffle::search::{engineering_search, SearchOptions, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    println!("epsilon,n,d,s,p,error_proxy,epsilon_bound,epsilon_hat,search_secs,audit_secs");
    for (epsilon, n) in [(1.0, 50), (0.5, 30), (1.0, 100), (1.0, 200)] {
        let start = Instant::now();
        let choice = engineering_search(epsilon, n, DEFAULT_D_CANDIDATES, &SearchOptions::default())?;
        let search_secs = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let report = audit_binary(&choice.params)?;
        let audit_secs = start.elapsed().as_secs_f64();
        let bp = &choice.params;
        println!(
            "{epsilon},{n},{},{},{:.6e},{:.3},{:.6},{:.6},{search_secs:.2},{audit_secs:.2}",
            bp.d, bp.s, bp.p, choice.proxy, choice.epsilon_bound, report.epsilon_hat
        );
    }
    Ok(())
}
