//! Truncated discrete Laplace distribution: mass proportional to
//! `exp(-|z - mu| / s)` on the integers of `[mu - w/2, mu + w/2]`.
//!
//! The center is stored doubled (`twice_mu`) so half-integer centers are exact.

use rand::Rng;
use rug::Float;

use crate::error::{param, Result};
use crate::pmf::Pmf;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncDLapParams {
    twice_mu: i64,
    s: f64,
    w: u64,
}

impl TruncDLapParams {
    pub fn new(twice_mu: i64, s: f64, w: u64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return param(format!("scale s must be positive and finite, got {s}"));
        }
        if w == 0 {
            return param("support width w must be at least 1");
        }
        if w > i64::MAX as u64 / 4 {
            return param(format!("support width {w} is too large"));
        }
        let p = TruncDLapParams { twice_mu, s, w };
        let (lo, hi) = p.support();
        if lo > hi {
            return param(format!(
                "empty integer support for mu = {}, w = {w}",
                twice_mu as f64 / 2.0
            ));
        }
        Ok(p)
    }

    /// The noise used by the binary randomizer: center `d/2`, width `d`.
    pub fn centered(d: u64, s: f64) -> Result<Self> {
        if d > i64::MAX as u64 / 4 {
            return param(format!("d = {d} is too large"));
        }
        TruncDLapParams::new(d as i64, s, d)
    }

    pub fn twice_mu(&self) -> i64 {
        self.twice_mu
    }

    pub fn mu(&self) -> f64 {
        self.twice_mu as f64 / 2.0
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    /// Inclusive integer support `(lo, hi)`.
    pub fn support(&self) -> (i64, i64) {
        // z >= mu - w/2  <=>  2z >= twice_mu - w
        let lo = div_ceil(self.twice_mu - self.w as i64, 2);
        let hi = (self.twice_mu + self.w as i64).div_euclid(2);
        (lo, hi)
    }

    /// `|z - mu|` as an exact multiple of one half: returns `2|z - mu|`.
    fn twice_dist(&self, z: i64) -> u64 {
        (2 * z - self.twice_mu).unsigned_abs()
    }

    fn weight(&self, z: i64, prec: u32) -> Float {
        let e = Float::with_val(prec, self.twice_dist(z)) / 2u32 / self.s;
        (-e).exp()
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationConstant {
    /// Sum over the truncated support.
    pub c_w: Float,
    /// Sum over all integers, closed form.
    pub c_unbounded: Float,
}

/// Normalized pmf of the truncated distribution.
pub fn dlap_pmf(params: &TruncDLapParams, prec: u32) -> Pmf {
    let (lo, hi) = params.support();
    let weights: Vec<Float> = (lo..=hi).map(|z| params.weight(z, prec)).collect();
    Pmf::normalized(lo, weights, prec).expect("weights are positive")
}

pub fn normalization(params: &TruncDLapParams, prec: u32) -> NormalizationConstant {
    let (lo, hi) = params.support();
    let c_w = Float::with_val(prec, Float::sum((lo..=hi).map(|z| params.weight(z, prec)).collect::<Vec<_>>().iter()));
    // r = e^{-1/s}. With mu = k + phi, phi in {0, 1/2}, the two geometric tails give
    // (r^phi + r^(1-phi)) / (1 - r).
    let r = (-Float::with_val(prec, 1) / params.s).exp();
    let one_minus_r = Float::with_val(prec, 1 - &r);
    let c_unbounded = if params.twice_mu.rem_euclid(2) == 0 {
        Float::with_val(prec, 1 + &r) / one_minus_r
    } else {
        let half = Float::with_val(prec, r.sqrt_ref());
        Float::with_val(prec, &half * 2u32) / one_minus_r
    };
    NormalizationConstant { c_w, c_unbounded }
}

/// Upper bound `2 / (1 - e^{-1/s})` on both normalization constants.
pub fn normalization_bound(s: f64, prec: u32) -> Float {
    let r = (-Float::with_val(prec, 1) / s).exp();
    Float::with_val(prec, 2) / Float::with_val(prec, 1 - r)
}

/// Inverse-CDF sampler over a cumulative table in double precision.
#[derive(Clone, Debug)]
pub struct DlapSampler {
    lo: i64,
    cdf: Vec<f64>,
}

impl DlapSampler {
    pub fn new(params: &TruncDLapParams) -> Self {
        let (lo, hi) = params.support();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (lo..=hi)
            .map(|z| {
                acc += (-(params.twice_dist(z) as f64) / (2.0 * params.s)).exp();
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        DlapSampler { lo, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.lo + idx as i64
    }
}

/// One draw from the truncated distribution. Builds the table on every call;
/// use [`DlapSampler`] for repeated draws.
pub fn dlap_sample<R: Rng + ?Sized>(params: &TruncDLapParams, rng: &mut R) -> i64 {
    DlapSampler::new(params).sample(rng)
}
