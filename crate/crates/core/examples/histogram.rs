//! A private histogram over eight buckets: one binary summation per bucket
//! at half the budget, audited per bucket.
//!
//! cargo run --release --example histogram

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pure_shuffle::harness::run_protocol;
use pure_shuffle::histogram::{histogram_csv, HistogramParams, HistogramProtocol};
use pure_shuffle::search::{SearchOptions, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    let (epsilon, n, buckets) = (1.0, 200, 8);
    let params = HistogramParams::engineering(epsilon, n, buckets, DEFAULT_D_CANDIDATES, &SearchOptions::default())?;
    let audit = params.audit_per_coord(&Default::default())?;
    println!("# per-bucket audit {:.4} (target {})", audit.epsilon_hat, epsilon / 2.0);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Skewed toward small buckets.
    let inputs: Vec<u32> = (0..n).map(|_| 1 + rng.gen_range(0..buckets).min(rng.gen_range(0..buckets))).collect();
    let protocol = HistogramProtocol::new(params)?;
    let (_, estimates) = run_protocol(&inputs, &protocol, &mut rng)?;
    print!("{}", histogram_csv(&estimates, &protocol.true_counts(&inputs)));
    Ok(())
}
