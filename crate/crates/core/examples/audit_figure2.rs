//! The noise-heavy parameters d = 31, s = 0.5, p = 0.01: the two per-user
//! laws on a log2 scale and the exact audit for ten users.
//!
//! cargo run --release --example audit_figure2

use pure_shuffle::audit::{audit_binary, curve_csv, log_ratio_curve, AuditOptions};
use pure_shuffle::binary::{randomizer_dist, BinaryParams, ParamMode};

fn main() -> pure_shuffle::Result<()> {
    let params = BinaryParams::new(f64::INFINITY, 10, 31, 0.5, 0.01, ParamMode::Engineering)?;
    let dist = randomizer_dist(&params, 256)?;
    println!("value,log2_r0,log2_r1");
    for v in 0..=31 {
        let l0 = dist.r0.mass(v).log2().to_f64();
        let l1 = dist.r1.mass(v).log2().to_f64();
        println!("{v},{l0:.4},{l1:.4}");
    }

    let report = audit_binary(&params)?;
    println!("\n{}", report.to_csv());
    let (c, _) = report.worst_pair();
    let curve = log_ratio_curve(&params, c, &AuditOptions::default())?;
    print!("{}", curve_csv(&curve));
    Ok(())
}
