//! Pointwise check of the quadratic dual certificate over all multisets of
//! `m` messages from a `k`-symbol alphabet.
//!
//! With `rho = eps + 10 ln(k+1) + 10`, `tau(y) = 2 rho y` and
//! `beta(y) = -rho (|y|^2 + m^2)`, the score of certificate `y'` at `y` is
//! `rho (2 <y', y> - |y'|^2 - m^2) = A(y) - rho |y - y'|^2` with
//! `A(y) = rho (|y|^2 - m^2)`. For every `y` we need
//! `A(y) >= ln 2 + eps + logsumexp over y' != y of score(y', y)`.

use crate::error::{param, Error, Result};

pub const MAX_MULTISETS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualCertificate {
    pub rho: f64,
    pub k: u32,
    pub m: u32,
    /// Smallest `<tau(y), y> + beta(y)` over all `y`.
    pub zeta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualCertificateReport {
    pub certificate: DualCertificate,
    pub holds: bool,
    /// Smallest margin of the pointwise inequality, in log units.
    pub worst_slack: f64,
    pub points: usize,
}

impl DualCertificateReport {
    pub fn to_csv(&self) -> String {
        format!(
            "k,m,rho,zeta,points,worst_slack,holds\n{},{},{},{},{},{},{}\n",
            self.certificate.k,
            self.certificate.m,
            self.certificate.rho,
            self.certificate.zeta,
            self.points,
            self.worst_slack,
            self.holds
        )
    }
}

fn binomial(n: u64, r: u64) -> Option<u64> {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// All count vectors of length `k` with entries summing to `m`.
pub fn enumerate_multisets(k: u32, m: u32) -> Result<Vec<Vec<u32>>> {
    if k == 0 {
        return param("alphabet size k must be at least 1");
    }
    let count = binomial(m as u64 + k as u64 - 1, k as u64 - 1);
    match count {
        Some(c) if c <= MAX_MULTISETS => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "C(m+k-1, k-1) for k = {k}, m = {m} exceeds {MAX_MULTISETS}"
            )))
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; k as usize];
    fill(&mut cur, 0, m, &mut out);
    Ok(out)
}

fn fill(cur: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[i] = v;
        fill(cur, i + 1, left - v, out);
    }
}

fn sq_norm(y: &[u32]) -> f64 {
    y.iter().map(|&v| (v as f64) * (v as f64)).sum()
}

fn sq_dist(a: &[u32], b: &[u32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

pub fn check_dual_certificate(k: u32, m: u32, epsilon: f64) -> Result<DualCertificateReport> {
    if !(epsilon >= 0.0) {
        return param(format!("epsilon must be nonnegative, got {epsilon}"));
    }
    let points = enumerate_multisets(k, m)?;
    let rho = epsilon + 10.0 * ((k + 1) as f64).ln() + 10.0;
    let m2 = (m as f64) * (m as f64);
    let mut zeta = f64::INFINITY;
    let mut worst = f64::INFINITY;
    for y in &points {
        let a = rho * (sq_norm(y) - m2);
        zeta = zeta.min(a);
        // scores relative to A(y): -rho |y - y'|^2
        let rel: Vec<f64> = points
            .iter()
            .filter(|z| *z != y)
            .map(|z| -rho * sq_dist(y, z))
            .collect();
        let slack = if rel.is_empty() {
            f64::INFINITY
        } else {
            let top = rel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + rel.iter().map(|r| (r - top).exp()).sum::<f64>().ln();
            -(std::f64::consts::LN_2 + epsilon + lse)
        };
        worst = worst.min(slack);
    }
    Ok(DualCertificateReport {
        certificate: DualCertificate { rho, k, m, zeta },
        holds: worst >= 0.0,
        worst_slack: worst,
        points: points.len(),
    })
}
