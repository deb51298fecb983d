//! Sums real inputs in [0, 1] digit by digit. Every digit protocol is found
//! by the audited search and then audited on its own; the composed budget
//! is the sum of the digit audits.
//!
//! cargo run --release --example real_summation

use pure_shuffle::audit::AuditOptions;
use pure_shuffle::harness::{run_experiment, DatasetSpec, ExperimentConfig};
use pure_shuffle::real::RealProtocol;
use pure_shuffle::search::{SearchOptions, DEFAULT_D_CANDIDATES};

fn main() -> pure_shuffle::Result<()> {
    let (epsilon, n) = (1.0, 64);
    let proto = RealProtocol::engineering(epsilon, n, DEFAULT_D_CANDIDATES, &SearchOptions::default())?;
    let audits = proto.audit_digits(&AuditOptions::default())?;

    println!("bit_index,eps_j,d,s,p,epsilon_hat");
    for (j, (bp, rep)) in proto.digit_params().iter().zip(&audits).enumerate() {
        println!(
            "{},{:.6},{},{},{:.6e},{:.6}",
            j + 1,
            proto.schedule().eps_j[j],
            bp.d,
            bp.s,
            bp.p,
            rep.epsilon_hat
        );
    }
    let spent: f64 = audits.iter().map(|r| r.epsilon_hat).sum();
    println!("# audited budget {spent:.6} of {epsilon}");
    println!("# messages per user {}", proto.messages_per_user());

    let config = ExperimentConfig::new(2000, 0, DatasetSpec::UniformRandom)?;
    let report = run_experiment(&config, &proto)?;
    println!("# mean absolute error {:.4} (bound {:.4})", report.mean_abs_error, proto.error_bound());
    Ok(())
}
