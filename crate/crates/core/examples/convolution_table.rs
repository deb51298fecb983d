//! P[m][k], the probability that m noise draws sum to k, with the tail
//! inequality and the anti-concentration ratio evaluated on it.
//!
//! cargo run --release --example convolution_table

use pure_shuffle::audit::{anti_concentration, eval_tail_inequality, pmk_table};

fn main() -> pure_shuffle::Result<()> {
    let (d, s) = (31, 6.0);
    let table = pmk_table(d, s, 10, 256, 1_000_000)?;
    println!("a,center_mass,bound,holds,in_regime");
    for a in 0..=10 {
        let ac = anti_concentration(&table, a)?;
        println!("{a},{:.6e},{:.6e},{},{}", ac.lhs.to_f64(), ac.rhs.to_f64(), ac.holds, ac.in_regime);
    }

    let small = pmk_table(31, 0.5, 11, 256, 1_000_000)?;
    println!("\nm,lhs,rhs,holds");
    for m in 2..=10 {
        let k = (m * 31 / 2) as i64;
        let t = eval_tail_inequality(&small, 0.01, 1.0, 20, m, k, 1, 2)?;
        println!("{m},{:.6e},{:.6e},{}", t.lhs.to_f64(), t.rhs.to_f64(), t.holds);
    }
    Ok(())
}
