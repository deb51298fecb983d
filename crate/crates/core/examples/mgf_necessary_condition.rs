//! Bounded MGF ratios are necessary for pure privacy: for audited
//! parameters the log MGF ratio of the two per-user laws never exceeds the
//! audited epsilon.
//!
//! cargo run --release --example mgf_necessary_condition

use pure_shuffle::audit::{audit_binary, mgf_ratio_check};
use pure_shuffle::binary::randomizer_dist;
use pure_shuffle::search::{engineering_params, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    println!("epsilon,n,epsilon_hat,mgf_sup,argmax_t");
    for (epsilon, n) in [(1.0, 50), (0.5, 30), (2.0, 40)] {
        let params = engineering_params(epsilon, n, DEFAULT_D_CANDIDATES)?;
        let audit = audit_binary(&params)?;
        let dist = randomizer_dist(&params, 256)?;
        let mgf = mgf_ratio_check(&dist.r0, &dist.r1, 8.0 / params.s, 10001);
        println!("{epsilon},{n},{:.6},{:.6},{:.4}", audit.epsilon_hat, mgf.sup_log_ratio, mgf.argmax_t);
    }
    Ok(())
}
