//! Checks the quadratic dual certificate pointwise over every multiset of
//! m messages from a k-symbol alphabet.
//!
//! cargo run --release --example dual_certificate

use pure_shuffle::audit::{check_dual_certificate, enumerate_multisets};

fn main() -> pure_shuffle::Result<()> {
    println!("k,m,epsilon,points,rho,zeta,worst_slack,holds");
    for (k, m, eps) in [(2, 3, 0.1), (3, 2, 0.5), (2, 5, 1.0), (4, 6, 0.3), (5, 8, 2.0)] {
        let r = check_dual_certificate(k, m, eps)?;
        println!(
            "{k},{m},{eps},{},{:.4},{:.4},{:.4},{}",
            r.points, r.certificate.rho, r.certificate.zeta, r.worst_slack, r.holds
        );
    }
    println!("\nmultisets of 3 messages over 3 symbols: {:?}", enumerate_multisets(3, 3)?);
    Ok(())
}
