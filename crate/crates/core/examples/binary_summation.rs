//! One run of the binary summation protocol: each user sends a bag of bits,
//! the shuffler mixes them, and the analyzer debiases the count of ones.
//!
//! cargo run --release --example binary_summation

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pure_shuffle::binary::BinaryProtocol;
use pure_shuffle::harness::run_protocol_debug;
use pure_shuffle::search::{engineering_params, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    let (epsilon, n) = (1.0, 100);
    let params = engineering_params(epsilon, n, DEFAULT_D_CANDIDATES)?;
    println!("{}", params.to_toml());

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let inputs: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    let truth = inputs.iter().filter(|&&x| x).count();

    let protocol = BinaryProtocol::new(params.clone())?;
    let run = run_protocol_debug(&inputs, &protocol, &mut rng)?;
    println!("messages on the wire: {}", run.shuffled.len());
    println!("first user sent {} ones out of {}", run.per_user[0].count(&true), params.d);
    println!("true sum {truth}, estimate {}, error bound {:.3}", run.output, params.error_bound());
    Ok(())
}
