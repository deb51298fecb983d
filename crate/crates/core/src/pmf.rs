//! Finite probability mass functions over the integers, held in MPFR floats.
//!
//! A [`Pmf`] stores a contiguous window of masses starting at `offset`. The
//! first and last stored masses are always positive; interior zeros are
//! allowed. All arithmetic is exact sum-of-products at the working
//! precision: nothing is ever trimmed or dropped.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rug::{Assign, Float};

use crate::error::{param, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    offset: i64,
    masses: Vec<Float>,
    prec: u32,
}

impl Pmf {
    /// Builds a pmf from raw masses. Leading and trailing zeros are trimmed,
    /// negative or non-finite masses are rejected. Masses are not rescaled.
    pub fn from_masses(offset: i64, masses: Vec<Float>, prec: u32) -> Result<Pmf> {
        if let Some(bad) = masses.iter().find(|m| !m.is_finite() || m.is_sign_negative() && !m.is_zero()) {
            return param(format!("masses must be finite and nonnegative, found {bad}"));
        }
        let first = masses.iter().position(|m| !m.is_zero());
        let Some(first) = first else {
            return param("pmf has no positive mass");
        };
        let last = masses.iter().rposition(|m| !m.is_zero()).unwrap_or(first);
        let masses = masses[first..=last]
            .iter()
            .map(|m| Float::with_val(prec, m))
            .collect();
        Ok(Pmf {
            offset: offset + first as i64,
            masses,
            prec,
        })
    }

    pub fn from_f64(offset: i64, masses: &[f64], prec: u32) -> Result<Pmf> {
        Pmf::from_masses(offset, masses.iter().map(|&m| Float::with_val(prec, m)).collect(), prec)
    }

    /// Builds a pmf from nonnegative weights, dividing by their sum.
    pub fn normalized(offset: i64, weights: Vec<Float>, prec: u32) -> Result<Pmf> {
        let mut pmf = Pmf::from_masses(offset, weights, prec)?;
        let total = pmf.total_mass();
        for m in &mut pmf.masses {
            *m /= &total;
        }
        Ok(pmf)
    }

    pub fn point_mass(v: i64, prec: u32) -> Pmf {
        Pmf {
            offset: v,
            masses: vec![Float::with_val(prec, 1)],
            prec,
        }
    }

    /// Uniform distribution on `lo..=hi`.
    pub fn uniform(lo: i64, hi: i64, prec: u32) -> Result<Pmf> {
        if hi < lo {
            return param(format!("empty uniform range [{lo}, {hi}]"));
        }
        let len = (hi - lo + 1) as u32;
        let w = Float::with_val(prec, 1) / len;
        Ok(Pmf {
            offset: lo,
            masses: vec![w; len as usize],
            prec,
        })
    }

    /// Smallest support point.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Largest support point.
    pub fn max_support(&self) -> i64 {
        self.offset + self.masses.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn masses(&self) -> &[Float] {
        &self.masses
    }

    /// Mass at `v`; zero outside the stored window.
    pub fn mass(&self, v: i64) -> Float {
        self.mass_ref(v).cloned()
            .unwrap_or_else(|| Float::new(self.prec))
    }

    pub(crate) fn mass_ref(&self, v: i64) -> Option<&Float> {
        if v < self.offset {
            return None;
        }
        self.masses.get((v - self.offset) as usize)
    }

    /// `(value, mass)` pairs over the stored window, including interior zeros.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Float)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, m)| (self.offset + i as i64, m))
    }

    /// Points carrying positive mass.
    pub fn support(&self) -> Vec<i64> {
        self.iter().filter(|(_, m)| !m.is_zero()).map(|(v, _)| v).collect()
    }

    pub fn total_mass(&self) -> Float {
        Float::with_val(self.prec, Float::sum(self.masses.iter()))
    }

    pub fn mean(&self) -> Float {
        let mut acc = Float::new(self.prec);
        for (v, m) in self.iter() {
            acc += Float::with_val(self.prec, m * v);
        }
        acc
    }

    pub fn variance(&self) -> Float {
        let mean = self.mean();
        let mut acc = Float::new(self.prec);
        for (v, m) in self.iter() {
            let dev = Float::with_val(self.prec, v - &mean);
            acc += Float::with_val(self.prec, dev.square() * m);
        }
        acc
    }

    /// The pmf of `total - X`.
    pub fn reflect(&self, total: i64) -> Pmf {
        let mut masses = self.masses.clone();
        masses.reverse();
        Pmf {
            offset: total - self.max_support(),
            masses,
            prec: self.prec,
        }
    }

    /// The pmf of `X + k`.
    pub fn shift(&self, k: i64) -> Pmf {
        Pmf {
            offset: self.offset + k,
            masses: self.masses.clone(),
            prec: self.prec,
        }
    }

    /// Largest absolute difference between masses of two pmfs.
    pub fn max_abs_diff(&self, other: &Pmf) -> Float {
        let prec = self.prec.max(other.prec);
        let lo = self.offset.min(other.offset);
        let hi = self.max_support().max(other.max_support());
        let mut best = Float::new(prec);
        for v in lo..=hi {
            let d = Float::with_val(prec, self.mass(v) - other.mass(v)).abs();
            if d > best {
                best = d;
            }
        }
        best
    }

    /// Rows `value,mass` with masses in scientific notation at full working precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mass\n");
        for (v, m) in self.iter() {
            let _ = writeln!(out, "{v},{}", format_sci(m));
        }
        out
    }

    /// Pointwise `p*a + (1-p)*b` on the union support.
    pub fn mix(p: f64, a: &Pmf, b: &Pmf) -> Result<Pmf> {
        if !(0.0..=1.0).contains(&p) {
            return param(format!("mixture weight must lie in [0, 1], got {p}"));
        }
        let prec = a.prec.max(b.prec);
        let pa = Float::with_val(prec, p);
        let pb = Float::with_val(prec, 1 - &pa);
        let lo = a.offset.min(b.offset);
        let hi = a.max_support().max(b.max_support());
        let masses = (lo..=hi)
            .map(|v| {
                let mut m = Float::new(prec);
                if let Some(x) = a.mass_ref(v) {
                    m += Float::with_val(prec, x * &pa);
                }
                if let Some(y) = b.mass_ref(v) {
                    m += Float::with_val(prec, y * &pb);
                }
                m
            })
            .collect();
        Pmf::from_masses(lo, masses, prec)
    }

    /// Distribution of the independent sum.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let prec = self.prec.max(other.prec);
        Pmf {
            offset: self.offset + other.offset,
            masses: convolve_dense(&self.masses, &other.masses, prec),
            prec,
        }
    }

    /// `n`-fold self-convolution by repeated squaring.
    pub fn n_fold(&self, n: u64) -> Result<Pmf> {
        if n == 0 {
            return param("n_fold requires n >= 1");
        }
        let mut base = self.clone();
        let mut acc: Option<Pmf> = None;
        let mut k = n;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.convolve(&base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve(&base);
        }
        Ok(acc.expect("n >= 1"))
    }

    /// Total variation distance, `(1/2) * sum |a(v) - b(v)|`.
    pub fn tv_distance(&self, other: &Pmf) -> Float {
        let prec = self.prec.max(other.prec);
        let lo = self.offset.min(other.offset);
        let hi = self.max_support().max(other.max_support());
        let mut acc = Float::new(prec);
        let zero = Float::new(prec);
        for v in lo..=hi {
            let a = self.mass_ref(v).unwrap_or(&zero);
            let b = other.mass_ref(v).unwrap_or(&zero);
            acc += Float::with_val(prec, a - b).abs();
        }
        acc / 2u32
    }

    /// Natural log of the moment generating function at `t`, by log-sum-exp.
    pub fn log_mgf(&self, t: f64) -> Result<Float> {
        let prec = self.prec;
        let extreme = self.offset.unsigned_abs().max(self.max_support().unsigned_abs()) as f64;
        if !t.is_finite() || (t.abs() * extreme) > 1e15 {
            return Err(Error::Range(format!(
                "mgf exponent t*v overflows the working range at t = {t}"
            )));
        }
        let tf = Float::with_val(prec, t);
        let terms: Vec<Float> = self
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(v, m)| Float::with_val(prec, m.ln_ref()) + Float::with_val(prec, &tf * v))
            .collect();
        let max = terms
            .iter()
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .cloned()
            .expect("pmf has positive mass");
        let mut acc = Float::new(prec);
        for x in &terms {
            acc += Float::with_val(prec, x - &max).exp();
        }
        let out = max + acc.ln();
        if !out.is_finite() {
            return Err(Error::Range(format!("mgf is not finite at t = {t}")));
        }
        Ok(out)
    }

    /// Moment generating function `sum_v a(v) e^(t v)`.
    pub fn mgf(&self, t: f64) -> Result<Float> {
        let out = self.log_mgf(t)?.exp();
        if !out.is_finite() || out.is_zero() {
            return Err(Error::Range(format!(
                "mgf leaves the representable exponent range at t = {t}"
            )));
        }
        Ok(out)
    }

    /// `log(a(v+1)/a(v))` for consecutive points of the stored window.
    /// A zero numerator gives `-inf`, a zero denominator `+inf`, and two
    /// zeros give NaN. No division by zero is performed.
    pub fn adjacent_log_ratios(&self) -> Vec<f64> {
        self.masses
            .windows(2)
            .map(|w| log_ratio(&w[1], &w[0]))
            .collect()
    }

    /// Masses converted to f64 natural logs; zero masses map to `-inf`.
    pub fn log_masses_f64(&self) -> Vec<f64> {
        self.masses
            .iter()
            .map(|m| if m.is_zero() { f64::NEG_INFINITY } else { Float::with_val(64, m.ln_ref()).to_f64() })
            .collect()
    }
}

/// `ln(a/b)` with infinite sentinels for zero operands.
pub fn log_ratio(a: &Float, b: &Float) -> f64 {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => f64::NAN,
        (true, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
        (false, false) => {
            let prec = a.prec().max(b.prec());
            Float::with_val(prec, a / b).ln().to_f64()
        }
    }
}

/// Dense convolution of two mass vectors, fused multiply-add at `prec` bits.
pub(crate) fn convolve_dense(a: &[Float], b: &[Float], prec: u32) -> Vec<Float> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Float::new(prec); a.len() + b.len() - 1];
    let mut term = Float::new(prec);
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (y, slot) in b.iter().zip(&mut out[i..]) {
            term.assign(x * y);
            *slot += &term;
        }
    }
    out
}

/// Scientific notation with all significant decimal digits of `x`.
pub fn format_sci(x: &Float) -> String {
    if x.is_zero() {
        return "0e0".to_string();
    }
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    format!("{:.*e}", digits, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn f(x: f64) -> Float {
        Float::with_val(P, x)
    }

    #[test]
    fn point_mass_and_shift_identity() {
        let a = Pmf::point_mass(3, P).convolve(&Pmf::point_mass(4, P));
        assert_eq!(a, Pmf::point_mass(7, P));
        let b = Pmf::point_mass(5, P);
        assert_eq!(b.support(), vec![5]);
        assert_eq!(b.mass(5), 1);
        assert_eq!(Pmf::point_mass(0, P).mass(0), 1);
    }

    #[test]
    fn binomial_from_uniform() {
        let u = Pmf::uniform(0, 1, P).unwrap();
        let b = u.convolve(&u);
        assert_eq!(b.offset(), 0);
        assert_eq!(b.masses(), &[f(0.25), f(0.5), f(0.25)]);
    }

    #[test]
    fn mix_endpoints() {
        let a = Pmf::uniform(0, 3, P).unwrap();
        let b = Pmf::point_mass(10, P);
        assert_eq!(Pmf::mix(0.0, &a, &b).unwrap(), b);
        assert_eq!(Pmf::mix(1.0, &a, &b).unwrap(), a);
        assert!(Pmf::mix(1.5, &a, &b).is_err());
        assert!(Pmf::mix(-0.1, &a, &b).is_err());
    }

    #[test]
    fn n_fold_small_cases() {
        let a = Pmf::from_f64(-1, &[0.2, 0.3, 0.5], P).unwrap();
        assert_eq!(a.n_fold(1).unwrap(), a);
        assert_eq!(a.n_fold(2).unwrap(), a.convolve(&a));
        assert!(a.n_fold(0).is_err());
    }

    #[test]
    fn tv_identical_and_disjoint() {
        let a = Pmf::uniform(0, 4, P).unwrap();
        assert!(a.tv_distance(&a).is_zero());
        let b = Pmf::uniform(10, 12, P).unwrap();
        assert_eq!(a.tv_distance(&b), 1);
    }

    #[test]
    fn mgf_basics() {
        let a = Pmf::from_f64(-2, &[0.25, 0.0, 0.5, 0.25], P).unwrap();
        assert!(Float::with_val(P, a.mgf(0.0).unwrap() - 1u32).abs() < 1e-60);
        let pm = Pmf::point_mass(7, P);
        let want = Float::with_val(P, Float::with_val(P, 0.3) * 7u32).exp();
        let got = pm.mgf(0.3).unwrap();
        assert!(Float::with_val(P, &got - &want).abs() / want < 1e-60);
        assert!(pm.mgf(1e300).is_err());
    }

    #[test]
    fn adjacent_ratios_sentinels() {
        assert!(Pmf::point_mass(4, P).adjacent_log_ratios().is_empty());
        let a = Pmf::from_f64(0, &[0.5, 0.0, 0.0, 0.5], P).unwrap();
        let r = a.adjacent_log_ratios();
        assert_eq!(r[0], f64::NEG_INFINITY);
        assert!(r[1].is_nan());
        assert_eq!(r[2], f64::INFINITY);
    }

    #[test]
    fn trims_zero_ends() {
        let a = Pmf::from_f64(0, &[0.0, 0.5, 0.5, 0.0], P).unwrap();
        assert_eq!(a.offset(), 1);
        assert_eq!(a.max_support(), 2);
        assert!(Pmf::from_f64(0, &[0.0], P).is_err());
        assert!(Pmf::from_f64(0, &[-0.5, 1.5], P).is_err());
    }

    #[test]
    fn reflection_moves_support() {
        let a = Pmf::from_f64(1, &[0.2, 0.8], P).unwrap();
        let r = a.reflect(5);
        assert_eq!(r.offset(), 3);
        assert_eq!(r.mass(4), f(0.2));
        assert_eq!(r.mass(3), f(0.8));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = Pmf::uniform(0, 1, P).unwrap().to_csv();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "value,mass");
        assert!(lines[1].starts_with("0,5.000"));
        assert!(lines[1].contains('e'));
    }
}
