//! One-dimensional lattice Gaussians and the pair of distributions whose
//! MGFs are close while their supports are almost disjoint.
//!
//! The solvers work in f64 and in log space; the pair itself is built at
//! full precision.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rug::Float;

use crate::error::{param, Result};
use crate::pmf::{format_sci, Pmf};

/// Number of evenly spaced centers in `[0, a)` checked by the solvers.
pub const CENTER_SAMPLES: usize = 256;
/// Bisection resolution of `solve_s_star`, as a fraction of `a`.
pub const S_STEP_FRACTION: f64 = 1.0 / 65536.0;

/// `x -> exp(-pi (x - c)^2 / s^2)` on the lattice `a Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeGaussian {
    pub a: f64,
    pub c: f64,
    pub s: f64,
    /// Summation cutoff in multiples of `s`.
    pub trunc_radius: f64,
}

/// A truncated lattice sum and a bound on what the truncation dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMass {
    pub value: f64,
    pub tail_bound: f64,
}

impl LatticeGaussian {
    pub fn new(a: f64, c: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return param(format!("lattice step must be positive, got {a}"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return param(format!("s must be positive, got {s}"));
        }
        if !c.is_finite() {
            return param(format!("center must be finite, got {c}"));
        }
        Ok(LatticeGaussian {
            a,
            c,
            s,
            trunc_radius: 20.0,
        })
    }

    fn exponent(&self, x: f64) -> f64 {
        let z = (x - self.c) / self.s;
        -PI * z * z
    }

    /// Lattice indices `k` with `|k a - c| <= trunc_radius * s`, widened to
    /// the two points around `c` so the sum is never empty.
    fn index_range(&self) -> (i64, i64) {
        let r = self.trunc_radius * self.s;
        let lo = ((self.c - r) / self.a).ceil().min((self.c / self.a).floor());
        let hi = ((self.c + r) / self.a).floor().max((self.c / self.a).ceil());
        (lo as i64, hi as i64)
    }

    /// Bound on the mass beyond the cutoff: the `j`-th dropped point on each
    /// side is at least `R s + j a` away, so the tail is at most
    /// `2 e^{-pi R^2} / (1 - e^{-2 pi R a / s})`.
    pub fn tail_bound(&self) -> f64 {
        let r = self.trunc_radius;
        2.0 * (-PI * r * r).exp() / -(-2.0 * PI * r * self.a / self.s).exp_m1()
    }

    /// `ln sum_{x in aZ, |x - c| <= R s} rho(x)`.
    pub fn log_theta(&self) -> f64 {
        let (lo, hi) = self.index_range();
        log_sum_exp((lo..=hi).map(|k| self.exponent(k as f64 * self.a)))
    }

    /// Log of the unnormalized mass on `|x - c| > radius`, within the cutoff.
    fn log_tail_beyond(&self, radius: f64) -> f64 {
        let (lo, hi) = self.index_range();
        log_sum_exp(
            (lo..=hi)
                .map(|k| k as f64 * self.a)
                .filter(|x| (x - self.c).abs() > radius)
                .map(|x| self.exponent(x)),
        )
    }

    /// `Pr[|X - c| > radius]` for `X ~ D_{aZ, s, c}`.
    pub fn tail_probability(&self, radius: f64) -> f64 {
        (self.log_tail_beyond(radius) - self.log_theta()).exp()
    }
}

/// `rho_{s,c}(aZ)` with its truncation error bar.
pub fn theta_mass(g: &LatticeGaussian) -> ThetaMass {
    ThetaMass {
        value: g.log_theta().exp(),
        tail_bound: g.tail_bound(),
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let top = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// The centers checked by the solvers: `k a / 256` for `k < 256`. The
/// symmetric worst case `a / 2` is among them.
pub fn center_grid(a: f64) -> Vec<f64> {
    (0..CENTER_SAMPLES).map(|k| k as f64 * a / CENTER_SAMPLES as f64).collect()
}

/// `min_c ln(rho_{s,c}(aZ) / rho_s(aZ))` over the center grid.
pub fn worst_log_shift_ratio(a: f64, s: f64) -> Result<f64> {
    let base = LatticeGaussian::new(a, 0.0, s)?.log_theta();
    let mut worst = f64::INFINITY;
    for c in center_grid(a).into_iter().chain([a / 2.0]) {
        worst = worst.min(LatticeGaussian::new(a, c, s)?.log_theta() - base);
    }
    Ok(worst)
}

/// Smallest `s` on the grid `a 2^-16 Z` such that shifting the center
/// anywhere costs at most a factor `e^-delta` of normalization mass.
pub fn solve_s_star(a: f64, delta: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return param(format!("lattice step must be positive, got {a}"));
    }
    if !(delta > 0.0) {
        return param(format!("delta must be positive, got {delta}"));
    }
    let h = a * S_STEP_FRACTION;
    let ok = |k: u64| -> Result<bool> { Ok(worst_log_shift_ratio(a, k as f64 * h)? >= -delta) };
    // s = 0 is treated as failing; double until the upper end passes.
    let mut hi: u64 = 1 << 16;
    while !ok(hi)? {
        hi = hi.checked_mul(2).ok_or_else(|| crate::Error::Range("s* bracket overflowed".into()))?;
    }
    let mut lo: u64 = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * h)
}

/// Largest `Pr[|X - c| > ell a]` over the center grid.
pub fn worst_tail(a: f64, s: f64, ell: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in center_grid(a).into_iter().chain([a / 2.0]) {
        worst = worst.max(LatticeGaussian::new(a, c, s)?.tail_probability(ell as f64 * a));
    }
    Ok(worst)
}

/// Smallest `ell >= 1` whose tail `Pr[|X - c| > ell a]` under
/// `D_{aZ, s*, c}` is at most `lambda` for every grid center.
pub fn solve_ell_star(a: f64, delta: f64, lambda: f64) -> Result<u64> {
    if !(lambda > 0.0) {
        return param(format!("lambda must be positive, got {lambda}"));
    }
    let s = solve_s_star(a, delta)?;
    let mut ell = 1;
    while worst_tail(a, s, ell)? > lambda {
        ell += 1;
    }
    Ok(ell)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPairParams {
    pub gamma: f64,
    pub s: f64,
    pub ell_star: u64,
    pub w: f64,
    pub c: u64,
    pub m: u64,
}

impl GaussianPairParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return param(format!("gamma must lie in (0, 0.5), got {}", self.gamma));
        }
        if !(self.s > 0.0 && self.w > 0.0) {
            return param("s and w must be positive");
        }
        if self.m != 2 * self.c {
            return param(format!("m must equal 2c, got m = {}, c = {}", self.m, self.c));
        }
        if self.w >= self.c as f64 {
            return param(format!("window half-width {} must stay inside (0, m)", self.w));
        }
        let (lo, hi) = self.window();
        if hi <= lo {
            return param("window must hold both an even and an odd point");
        }
        Ok(())
    }

    /// Integer range `[ceil(c - w), floor(c + w)]`.
    pub fn window(&self) -> (i64, i64) {
        let c = self.c as f64;
        ((c - self.w).ceil() as i64, (c + self.w).floor() as i64)
    }

    /// Points of the window with the given parity (0 for even).
    pub fn lattice_points(&self, parity: i64) -> Vec<i64> {
        let (lo, hi) = self.window();
        (lo..=hi).filter(|x| x.rem_euclid(2) == parity).collect()
    }

    /// `gamma (delta_0 + delta_m) / 2 + (1 - gamma) D_{S, s, c}` where `S`
    /// is the window's points of the given parity.
    pub fn component(&self, parity: i64, prec: u32) -> Result<Pmf> {
        self.validate()?;
        let m = self.m as usize;
        let mut masses = vec![Float::new(prec); m + 1];
        let c = self.c as f64;
        let scale = Float::with_val(prec, PI) / Float::with_val(prec, self.s).square();
        let pts = self.lattice_points(parity);
        let weights: Vec<Float> = pts
            .iter()
            .map(|&x| {
                let z = Float::with_val(prec, x as f64 - c).square();
                (-(z * &scale)).exp()
            })
            .collect();
        let total = Float::with_val(prec, Float::sum(weights.iter()));
        let bulk = Float::with_val(prec, 1.0 - Float::with_val(prec, self.gamma));
        for (&x, wgt) in pts.iter().zip(weights) {
            masses[x as usize] = wgt * &bulk / &total;
        }
        let half = Float::with_val(prec, self.gamma) / 2u32;
        masses[0] += &half;
        masses[m] += &half;
        Pmf::from_masses(0, masses, prec)
    }

    pub fn pair(&self, prec: u32) -> Result<(Pmf, Pmf)> {
        Ok((self.component(0, prec)?, self.component(1, prec)?))
    }
}

/// Parameters derived from the solvers for target `gamma` and `epsilon`,
/// with epsilon capped at 0.1.
pub fn gaussian_pair_params(gamma: f64, epsilon: f64) -> Result<GaussianPairParams> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return param(format!("gamma must lie in (0, 0.5), got {gamma}"));
    }
    if !(epsilon > 0.0) {
        return param(format!("epsilon must be positive, got {epsilon}"));
    }
    let eps = epsilon.min(0.1);
    let delta = eps / 4.0;
    let s = solve_s_star(2.0, delta)?;
    let ell_star = solve_ell_star(2.0, delta, -(-delta).exp_m1())?;
    let log_inv = (1.0 / gamma).ln();
    let w = s * s * log_inv.sqrt() / PI + 2.0 * ell_star as f64;
    let c = (w + (2.0 / eps.exp_m1()).ln() + log_inv.sqrt()).ceil() as u64;
    let params = GaussianPairParams {
        gamma,
        s,
        ell_star,
        w,
        c,
        m: 2 * c,
    };
    params.validate()?;
    Ok(params)
}

pub fn build_gaussian_pair(gamma: f64, epsilon: f64, prec: u32) -> Result<(Pmf, Pmf, GaussianPairParams)> {
    let params = gaussian_pair_params(gamma, epsilon)?;
    let (y0, y1) = params.pair(prec)?;
    Ok((y0, y1, params))
}

/// The illustrative pair with `gamma = 0.02, c = 50, w = 20, s = 30`.
pub fn figure3_params() -> GaussianPairParams {
    GaussianPairParams {
        gamma: 0.02,
        s: 30.0,
        ell_star: 0,
        w: 20.0,
        c: 50,
        m: 100,
    }
}

pub fn build_figure3_pair(prec: u32) -> (Pmf, Pmf) {
    figure3_params().pair(prec).expect("fixed parameters are valid")
}

/// `value,mass_y0,mass_y1` over the union of both supports.
pub fn pair_csv(y0: &Pmf, y1: &Pmf) -> String {
    let lo = y0.offset().min(y1.offset());
    let hi = y0.max_support().max(y1.max_support());
    let mut out = String::from("value,mass_y0,mass_y1\n");
    for v in lo..=hi {
        let _ = writeln!(out, "{v},{},{}", format_sci(&y0.mass(v)), format_sci(&y1.mass(v)));
    }
    out
}
