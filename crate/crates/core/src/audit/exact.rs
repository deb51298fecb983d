//! Worst-case log ratio of the total-ones distribution over all neighboring
//! datasets.
//!
//! `D_c` is the law of the number of ones when `c` of the `n` users hold 1:
//! `D_c = R0^(n-c) * R1^c`. The audit compares every adjacent pair
//! `(D_c, D_(c+1))`. Since `R1` is `R0` reflected about `d/2`, pair `c` and
//! pair `n-1-c` are mirror images, so only `c <= (n-1)/2` is visited.
//!
//! The `D_c` are produced by divide and conquer over `c`: a node covering
//! `[lo, hi]` holds the common factor `R0^(n-hi) * R1^lo`, and each child
//! multiplies in the missing powers. Leaves arrive in increasing `c`.
//!
//! Convolving both sides of a pointwise ratio bound with the same
//! nonnegative kernel preserves it, so the pair `(R0^m * R0, R0^m * R1)`
//! with `m = ceil((n-1)/2)` bounds every pair: this is `epsilon_upper`.

use std::fmt::Write as _;

use rug::{Assign, Float};

use crate::binary::{randomizer_dist, BinaryParams};
use crate::error::{param, Error, Result};
use crate::pmf::{convolve_dense, log_ratio, Pmf};
use crate::precision::DEFAULT_PRECISION_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    pub precision_bits: u32,
    /// Largest admissible `n * d`.
    pub support_ceiling: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            precision_bits: DEFAULT_PRECISION_BITS,
            support_ceiling: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditReport {
    /// Largest `|log(D_c(t) / D_(c+1)(t))|`; infinite when a support mismatch exists.
    pub epsilon_hat: f64,
    pub worst_c: u64,
    pub worst_t: u64,
    pub feasible: bool,
    /// The single-pair bound described in the module docs; always `>= epsilon_hat`.
    pub epsilon_upper: f64,
}

pub const AUDIT_HEADER: &str = "epsilon_hat,worst_c,worst_t,feasible";

impl AuditReport {
    pub fn worst_pair(&self) -> (u64, u64) {
        (self.worst_c, self.worst_c + 1)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.epsilon_hat, self.worst_c, self.worst_t, self.feasible
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{AUDIT_HEADER}\n{}\n", self.csv_row())
    }
}

/// Law of the total ones when `c` of `n` users hold 1.
pub fn transcript_dist(r0: &Pmf, r1: &Pmf, n: u64, c: u64) -> Result<Pmf> {
    if c > n {
        return param(format!("ones count c = {c} exceeds n = {n}"));
    }
    if n == 0 {
        return param("n must be at least 1");
    }
    Ok(match (n - c, c) {
        (0, c) => r1.n_fold(c)?,
        (z, 0) => r0.n_fold(z)?,
        (z, c) => r0.n_fold(z)?.convolve(&r1.n_fold(c)?),
    })
}

/// Masses at `0..len` as a dense vector.
fn dense(pmf: &Pmf, len: usize, prec: u32) -> Vec<Float> {
    (0..len as i64).map(|v| Float::with_val(prec, pmf.mass(v))).collect()
}

/// Largest pointwise ratio in either direction between two aligned vectors.
struct PairStat {
    /// `max(a/b, b/a)`, or `None` when exactly one of the two is zero somewhere.
    ratio: Option<Float>,
    t: usize,
}

fn pair_stat(a: &[Float], b: &[Float], prec: u32) -> PairStat {
    debug_assert_eq!(a.len(), b.len());
    let mut best = Float::with_val(prec, 1);
    let mut best_t = 0;
    let mut q = Float::new(prec);
    for (t, (x, y)) in a.iter().zip(b).enumerate() {
        match (x.is_zero(), y.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return PairStat { ratio: None, t },
            _ => {}
        }
        q.assign(x / y);
        if q < 1 {
            q.recip_mut();
        }
        if q > best {
            best.assign(&q);
            best_t = t;
        }
    }
    PairStat {
        ratio: Some(best),
        t: best_t,
    }
}

fn check_ceiling(params: &BinaryParams, opts: &AuditOptions) -> Result<()> {
    let total = params.message_count()?;
    if total > opts.support_ceiling {
        return Err(Error::Feasibility(format!(
            "n*d = {total} exceeds the audit ceiling of {}",
            opts.support_ceiling
        )));
    }
    Ok(())
}

/// `R0^k` for `k = 0..=upto`, dense from 0.
fn power_sweep(r0: &[Float], upto: u64, prec: u32) -> Vec<Vec<Float>> {
    let mut pows = Vec::with_capacity(upto as usize + 1);
    pows.push(vec![Float::with_val(prec, 1)]);
    for k in 1..=upto as usize {
        let next = convolve_dense(&pows[k - 1], r0, prec);
        pows.push(next);
    }
    pows
}

fn reversed(v: &[Float]) -> Vec<Float> {
    v.iter().rev().cloned().collect()
}

fn ln_f64(x: &Float) -> f64 {
    Float::with_val(x.prec(), x.ln_ref()).to_f64()
}

struct Setup {
    prec: u32,
    r0: Vec<Float>,
    half: u64,
}

fn setup(params: &BinaryParams, opts: &AuditOptions) -> Result<Setup> {
    params.validate()?;
    check_ceiling(params, opts)?;
    let prec = opts.precision_bits;
    let dist = randomizer_dist(params, prec)?;
    let r0 = dense(&dist.r0, params.d as usize + 1, prec);
    Ok(Setup {
        prec,
        r0,
        half: params.n / 2,
    })
}

fn upper_from_powers(pows: &[Vec<Float>], half: u64, prec: u32) -> f64 {
    let m = half as usize;
    let a = &pows[m + 1];
    let b = convolve_dense(&pows[m], &reversed(&pows[1]), prec);
    match pair_stat(a, &b, prec).ratio {
        Some(r) => ln_f64(&r),
        None => f64::INFINITY,
    }
}

/// The certified upper bound alone; about a quarter of the work of the full audit.
pub fn ratio_upper_bound(params: &BinaryParams, opts: &AuditOptions) -> Result<f64> {
    let st = setup(params, opts)?;
    let pows = power_sweep(&st.r0, st.half + 1, st.prec);
    Ok(upper_from_powers(&pows, st.half, st.prec))
}

pub fn audit_binary(params: &BinaryParams) -> Result<AuditReport> {
    audit_binary_with(params, &AuditOptions::default())
}

struct Walk<'a> {
    pows: &'a [Vec<Float>],
    prec: u32,
    prev: Option<(u64, Vec<Float>)>,
    best: Float,
    best_c: u64,
    best_t: u64,
    mismatch: Option<(u64, u64)>,
}

impl Walk<'_> {
    fn visit(&mut self, lo: u64, hi: u64, factor: Vec<Float>) {
        if self.mismatch.is_some() {
            return;
        }
        if lo == hi {
            if let Some((c, prev)) = self.prev.take() {
                let stat = pair_stat(&prev, &factor, self.prec);
                match stat.ratio {
                    None => self.mismatch = Some((c, stat.t as u64)),
                    Some(r) if r > self.best => {
                        self.best = r;
                        self.best_c = c;
                        self.best_t = stat.t as u64;
                    }
                    _ => {}
                }
            }
            self.prev = Some((lo, factor));
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let left = convolve_dense(&factor, &self.pows[(hi - mid) as usize], self.prec);
        self.visit(lo, mid, left);
        let right = convolve_dense(&factor, &reversed(&self.pows[(mid + 1 - lo) as usize]), self.prec);
        drop(factor);
        self.visit(mid + 1, hi, right);
    }
}

/// Exact audit over every neighboring pair `(c, c+1)`, `c = 0..n-1`.
pub fn audit_binary_with(params: &BinaryParams, opts: &AuditOptions) -> Result<AuditReport> {
    let st = setup(params, opts)?;
    let n = params.n;
    // leaves c = 0..=top cover the pairs c = 0..=(n-1)/2
    let top = (n - 1) / 2 + 1;
    let pows = power_sweep(&st.r0, st.half + 1, st.prec);
    let epsilon_upper = upper_from_powers(&pows, st.half, st.prec);
    let mut walk = Walk {
        pows: &pows,
        prec: st.prec,
        prev: None,
        best: Float::with_val(st.prec, 1),
        best_c: 0,
        best_t: 0,
        mismatch: None,
    };
    debug_assert_eq!(n - top, st.half);
    walk.visit(0, top, pows[(n - top) as usize].clone());
    Ok(match walk.mismatch {
        Some((c, t)) => AuditReport {
            epsilon_hat: f64::INFINITY,
            worst_c: c,
            worst_t: t,
            feasible: false,
            epsilon_upper,
        },
        None => AuditReport {
            epsilon_hat: ln_f64(&walk.best),
            worst_c: walk.best_c,
            worst_t: walk.best_t,
            feasible: true,
            epsilon_upper,
        },
    })
}

/// `(t, log(D_c(t) / D_(c+1)(t)))` for `t = 0..=n*d`, with infinite sentinels.
pub fn log_ratio_curve(params: &BinaryParams, c: u64, opts: &AuditOptions) -> Result<Vec<(u64, f64)>> {
    params.validate()?;
    check_ceiling(params, opts)?;
    if c >= params.n {
        return param(format!("pair index c = {c} must be below n = {}", params.n));
    }
    let dist = randomizer_dist(params, opts.precision_bits)?;
    let a = transcript_dist(&dist.r0, &dist.r1, params.n, c)?;
    let b = transcript_dist(&dist.r0, &dist.r1, params.n, c + 1)?;
    let total = params.message_count()?;
    Ok((0..=total)
        .map(|t| (t, log_ratio(&a.mass(t as i64), &b.mass(t as i64))))
        .collect())
}

pub fn curve_csv(curve: &[(u64, f64)]) -> String {
    let mut out = String::from("t,log_ratio\n");
    for (t, r) in curve {
        let _ = writeln!(out, "{t},{r}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::ParamMode;

    fn params(n: u64, d: u64, s: f64, p: f64) -> BinaryParams {
        BinaryParams::new(1.0, n, d, s, p, ParamMode::Engineering).unwrap()
    }

    /// Audit by building every `D_c` directly.
    fn brute_audit(bp: &BinaryParams) -> (f64, bool) {
        let dist = randomizer_dist(bp, 256).unwrap();
        let mut best: f64 = 0.0;
        for c in 0..bp.n {
            let a = transcript_dist(&dist.r0, &dist.r1, bp.n, c).unwrap();
            let b = transcript_dist(&dist.r0, &dist.r1, bp.n, c + 1).unwrap();
            for t in 0..=(bp.n * bp.d) as i64 {
                let r = log_ratio(&a.mass(t), &b.mass(t));
                if r.is_nan() {
                    continue;
                }
                if r.is_infinite() {
                    return (f64::INFINITY, false);
                }
                best = best.max(r.abs());
            }
        }
        (best, true)
    }

    #[test]
    fn divide_and_conquer_matches_direct() {
        for n in 1..=9 {
            for (d, s, p) in [(5, 1.0, 0.3), (7, 0.5, 0.05), (3, 2.0, 0.9)] {
                let bp = params(n, d, s, p);
                let rep = audit_binary(&bp).unwrap();
                let (want, feasible) = brute_audit(&bp);
                assert!(feasible && rep.feasible);
                assert!((rep.epsilon_hat - want).abs() < 1e-12, "n={n} d={d}: {} vs {want}", rep.epsilon_hat);
                assert!(rep.epsilon_upper >= rep.epsilon_hat - 1e-12);
                assert!(rep.worst_t <= n * d);
            }
        }
    }

    #[test]
    fn no_noise_is_infeasible_and_pure_noise_is_free() {
        let rep = audit_binary(&params(4, 7, 1.0, 0.0)).unwrap();
        assert!(!rep.feasible);
        assert!(rep.epsilon_hat.is_infinite());
        let rep = audit_binary(&params(4, 7, 1.0, 1.0)).unwrap();
        assert!(rep.feasible);
        // zero up to rounding of the reflected convolution order
        assert!(rep.epsilon_hat < 1e-60);
    }

    #[test]
    fn ceiling_enforced() {
        let opts = AuditOptions {
            support_ceiling: 100,
            ..AuditOptions::default()
        };
        assert!(matches!(
            audit_binary_with(&params(20, 7, 1.0, 0.5), &opts),
            Err(Error::Feasibility(_))
        ));
    }

    #[test]
    fn transcript_dist_edges() {
        let bp = params(3, 5, 1.0, 0.0);
        let dist = randomizer_dist(&bp, 256).unwrap();
        assert_eq!(transcript_dist(&dist.r0, &dist.r1, 1, 0).unwrap(), dist.r0);
        assert_eq!(transcript_dist(&dist.r0, &dist.r1, 3, 2).unwrap(), Pmf::point_mass(3 * 2 + 2, 256));
        assert!(transcript_dist(&dist.r0, &dist.r1, 3, 4).is_err());
    }
}
