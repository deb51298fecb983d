//! Audit-driven parameter search for the binary protocol.
//!
//! Candidates `d` are tried in increasing order. For each `d` the scales
//! `s = d/64, d/32, d/16, d/8, d/4` are paired with the noise grid
//! `p = 2^-20, ..., 2^-1`. A pair passes when the certified upper bound of
//! the audit is at most the target epsilon. For each scale the smallest
//! passing grid `p` is located by binary search, taking the pass test to be
//! monotone in `p`. The scale with the smallest error proxy
//! `pn/2 + sqrt(2) s sqrt(pn)` wins, and its `p` is then refined by
//! bisection against the previous grid point. The first `d` with any passing
//! grid point is returned.
//!
//! When no candidate passes on the grid, `p = 1` (pure noise, which always
//! passes) is used as the upper bracket instead, every candidate is refined
//! by bisection between `1/2` and `1`, and the candidate with the smallest
//! proxy is returned.

use crate::audit::{ratio_upper_bound, AuditOptions};
use crate::binary::{error_proxy, BinaryParams, ParamMode};
use crate::error::{param, Error, Result};

pub const DEFAULT_D_CANDIDATES: &[u64] = &[7, 15, 31, 63, 127, 255, 511];
pub const SCALE_DIVISORS: &[f64] = &[64.0, 32.0, 16.0, 8.0, 4.0];

/// `2^-20, ..., 2^-1`.
pub fn noise_grid() -> Vec<f64> {
    (1..=20).rev().map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub audit: AuditOptions,
    pub bisection_steps: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            audit: AuditOptions::default(),
            bisection_steps: 12,
        }
    }
}

/// The chosen parameters with the bound that certified them.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineeringChoice {
    pub params: BinaryParams,
    pub epsilon_bound: f64,
    pub proxy: f64,
    /// Whether the returned `p` exceeds the grid (fallback bracket).
    pub beyond_grid: bool,
}

struct Searcher<'a> {
    epsilon: f64,
    n: u64,
    opts: &'a SearchOptions,
    best_seen: f64,
}

impl Searcher<'_> {
    fn bound(&mut self, d: u64, s: f64, p: f64) -> Result<f64> {
        if p >= 1.0 {
            return Ok(0.0);
        }
        let bp = BinaryParams::new(self.epsilon, self.n, d, s, p, ParamMode::Engineering)?;
        let u = ratio_upper_bound(&bp, &self.opts.audit)?;
        self.best_seen = self.best_seen.min(u);
        Ok(u)
    }

    fn passes(&mut self, d: u64, s: f64, p: f64) -> Result<bool> {
        Ok(self.bound(d, s, p)? <= self.epsilon)
    }

    /// Smallest passing index into `grid`, if any.
    fn smallest_grid_pass(&mut self, d: u64, s: f64, grid: &[f64]) -> Result<Option<usize>> {
        let last = grid.len() - 1;
        if !self.passes(d, s, grid[last])? {
            return Ok(None);
        }
        let (mut lo, mut hi) = (0usize, last);
        if self.passes(d, s, grid[0])? {
            return Ok(Some(0));
        }
        // invariant: grid[lo] fails, grid[hi] passes
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.passes(d, s, grid[mid])? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }

    /// Refines a passing `hi` down toward a failing `lo`.
    fn bisect(&mut self, d: u64, s: f64, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
        let mut hi_bound = self.bound(d, s, hi)?;
        for _ in 0..self.opts.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let b = self.bound(d, s, mid)?;
            if b <= self.epsilon {
                hi = mid;
                hi_bound = b;
            } else {
                lo = mid;
            }
        }
        Ok((hi, hi_bound))
    }

    fn choice(&self, d: u64, s: f64, p: f64, bound: f64, beyond_grid: bool) -> Result<EngineeringChoice> {
        Ok(EngineeringChoice {
            params: BinaryParams::new(self.epsilon, self.n, d, s, p, ParamMode::Engineering)?,
            epsilon_bound: bound,
            proxy: error_proxy(self.n, s, p),
            beyond_grid,
        })
    }
}

fn check_candidates(d_candidates: &[u64]) -> Result<Vec<u64>> {
    if d_candidates.is_empty() {
        return param("at least one d candidate is required");
    }
    if let Some(d) = d_candidates.iter().find(|&&d| d % 2 == 0) {
        return param(format!("d candidates must be odd, got {d}"));
    }
    let mut ds = d_candidates.to_vec();
    ds.sort_unstable();
    ds.dedup();
    Ok(ds)
}

pub fn engineering_params(epsilon: f64, n: u64, d_candidates: &[u64]) -> Result<BinaryParams> {
    Ok(engineering_search(epsilon, n, d_candidates, &SearchOptions::default())?.params)
}

pub fn engineering_search(
    epsilon: f64,
    n: u64,
    d_candidates: &[u64],
    opts: &SearchOptions,
) -> Result<EngineeringChoice> {
    if !(epsilon > 0.0) {
        return param(format!("epsilon must be positive, got {epsilon}"));
    }
    if n == 0 {
        return param("n must be at least 1");
    }
    let ds: Vec<u64> = check_candidates(d_candidates)?
        .into_iter()
        .filter(|d| d.checked_mul(n).is_some_and(|t| t <= opts.audit.support_ceiling))
        .collect();
    if ds.is_empty() {
        return Err(Error::Feasibility(format!(
            "every d candidate exceeds the audit ceiling n*d <= {}",
            opts.audit.support_ceiling
        )));
    }
    let mut srch = Searcher {
        epsilon,
        n,
        opts,
        best_seen: f64::INFINITY,
    };
    let grid = noise_grid();

    for &d in &ds {
        let mut scored = Vec::new();
        for div in SCALE_DIVISORS {
            let s = d as f64 / div;
            if let Some(i) = srch.smallest_grid_pass(d, s, &grid)? {
                scored.push((error_proxy(n, s, grid[i]), s, i));
            }
        }
        let Some(&(_, s, i)) = scored.iter().min_by(|a, b| a.0.total_cmp(&b.0)) else {
            continue;
        };
        let lo = if i == 0 { 0.0 } else { grid[i - 1] };
        let (p, bound) = srch.bisect(d, s, lo, grid[i])?;
        return srch.choice(d, s, p, bound, false);
    }

    // No grid point passes for any d: bracket with pure noise.
    let mut best: Option<EngineeringChoice> = None;
    for &d in &ds {
        for div in SCALE_DIVISORS {
            let s = d as f64 / div;
            let (p, bound) = srch.bisect(d, s, 0.5, 1.0)?;
            if p >= 1.0 {
                continue;
            }
            let c = srch.choice(d, s, p, bound, true)?;
            if best.as_ref().is_none_or(|b| c.proxy < b.proxy) {
                best = Some(c);
            }
        }
    }
    best.ok_or(Error::Infeasible {
        target: epsilon,
        best_epsilon_hat: srch.best_seen,
    })
}
