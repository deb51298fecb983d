//! Two distributions on {0, ..., m} that are almost disjoint yet have
//! nearly equal MGFs, built from discrete Gaussians on the even and odd
//! integers.
//!
//! cargo run --release --example gaussian_tightness

use pure_shuffle::audit::mgf_ratio_check;
use pure_shuffle::lattice::{build_figure3_pair, build_gaussian_pair, solve_ell_star, solve_s_star};

fn main() -> pure_shuffle::Result<()> {
    let epsilon: f64 = 0.1;
    let delta = epsilon / 4.0;
    println!("s* = {}", solve_s_star(2.0, delta)?);
    println!("ell* = {}", solve_ell_star(2.0, delta, -(-delta).exp_m1())?);

    println!("\ngamma,s,ell_star,w,c,m,tv,mgf_sup");
    for gamma in [1e-2, 1e-4, 1e-8] {
        let (y0, y1, p) = build_gaussian_pair(gamma, epsilon, 256)?;
        let mgf = mgf_ratio_check(&y0, &y1, (1.0 / gamma).ln().sqrt(), 10001);
        println!(
            "{gamma:e},{:.4},{},{:.3},{},{},{:.12},{:.6}",
            p.s,
            p.ell_star,
            p.w,
            p.c,
            p.m,
            y0.tv_distance(&y1).to_f64(),
            mgf.sup_log_ratio
        );
    }

    let (y0, y1) = build_figure3_pair(256);
    let mgf = mgf_ratio_check(&y0, &y1, (1.0f64 / 0.02).ln().sqrt(), 10001);
    println!(
        "\nillustrated pair: tv {:.12}, mgf sup {:.6}, mass at 50: {:.4e} vs {:.4e}",
        y0.tv_distance(&y1).to_f64(),
        mgf.sup_log_ratio,
        y0.mass(50).to_f64(),
        y1.mass(50).to_f64()
    );
    Ok(())
}
