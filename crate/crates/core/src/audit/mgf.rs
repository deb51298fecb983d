//! Necessary conditions: bounded MGF ratio and the accuracy/TV tradeoff.

use crate::pmf::Pmf;

#[derive(Clone, Debug, PartialEq)]
pub struct MgfCheckReport {
    /// Largest `|log(M_a(t) / M_b(t))|` over the grid and both endpoint limits.
    pub sup_log_ratio: f64,
    /// Where the sup was attained; `+-inf` for an endpoint limit.
    pub argmax_t: f64,
    pub t_range: f64,
    pub grid_points: usize,
    /// Limits of `log(M_a(t) / M_b(t))` as `t -> -inf` and `t -> +inf`.
    pub endpoint_limits: (f64, f64),
    /// Largest absolute value seen on the grid alone.
    pub grid_sup: f64,
}

impl MgfCheckReport {
    pub fn to_csv(&self) -> String {
        format!(
            "sup_log_ratio,argmax_t,t_range,grid_points,limit_neg_inf,limit_pos_inf,grid_sup\n{},{},{},{},{},{},{}\n",
            self.sup_log_ratio,
            self.argmax_t,
            self.t_range,
            self.grid_points,
            self.endpoint_limits.0,
            self.endpoint_limits.1,
            self.grid_sup
        )
    }
}

struct LogMasses {
    values: Vec<f64>,
    logs: Vec<f64>,
}

impl LogMasses {
    fn new(pmf: &Pmf) -> Self {
        let (values, logs) = pmf
            .iter()
            .zip(pmf.log_masses_f64())
            .filter(|(_, l)| l.is_finite())
            .map(|((v, _), l)| (v as f64, l))
            .unzip();
        LogMasses { values, logs }
    }

    fn log_mgf(&self, t: f64) -> f64 {
        let max = self
            .values
            .iter()
            .zip(&self.logs)
            .map(|(v, l)| l + t * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self
            .values
            .iter()
            .zip(&self.logs)
            .map(|(v, l)| (l + t * v - max).exp())
            .sum();
        max + sum.ln()
    }
}

fn endpoint_limit(a_point: i64, b_point: i64, a: &Pmf, b: &Pmf, toward_max: bool) -> f64 {
    if a_point == b_point {
        crate::pmf::log_ratio(&a.mass(a_point), &b.mass(b_point))
    } else if (a_point > b_point) == toward_max {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Samples `log(M_a / M_b)` on `grid_points` uniform points of `[-t_range, t_range]`
/// in double-precision log-sum-exp, and adds the closed-form limits at `+-inf`.
pub fn mgf_ratio_check(a: &Pmf, b: &Pmf, t_range: f64, grid_points: usize) -> MgfCheckReport {
    let la = LogMasses::new(a);
    let lb = LogMasses::new(b);
    let grid_points = grid_points.max(2);
    let mut grid_sup = 0.0f64;
    let mut argmax_t = 0.0;
    for i in 0..grid_points {
        let t = -t_range + 2.0 * t_range * i as f64 / (grid_points - 1) as f64;
        let r = (la.log_mgf(t) - lb.log_mgf(t)).abs();
        if r > grid_sup {
            grid_sup = r;
            argmax_t = t;
        }
    }
    let lo = endpoint_limit(a.offset(), b.offset(), a, b, false);
    let hi = endpoint_limit(a.max_support(), b.max_support(), a, b, true);
    let mut sup = grid_sup;
    if lo.abs() > sup {
        sup = lo.abs();
        argmax_t = f64::NEG_INFINITY;
    }
    if hi.abs() > sup {
        sup = hi.abs();
        argmax_t = f64::INFINITY;
    }
    MgfCheckReport {
        sup_log_ratio: sup,
        argmax_t,
        t_range,
        grid_points,
        endpoint_limits: (lo, hi),
        grid_sup,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvAccuracy {
    pub holds: bool,
    /// `sqrt(n) / (8 sqrt 2) * (1 - SD(r0, r1))`.
    pub bound: f64,
    /// `measured_error - bound`.
    pub margin: f64,
    pub tv: f64,
}

/// Checks `measured_error >= bound * (1 - tolerance)`, the lower bound on the
/// error of any protocol whose per-user laws on 0 and 1 are `r0` and `r1`.
pub fn tv_accuracy_check(r0: &Pmf, r1: &Pmf, n: u64, measured_error: f64, tolerance: f64) -> TvAccuracy {
    let tv = r0.tv_distance(r1).to_f64();
    let bound = (n as f64).sqrt() / (8.0 * std::f64::consts::SQRT_2) * (1.0 - tv);
    TvAccuracy {
        holds: measured_error >= bound * (1.0 - tolerance),
        bound,
        margin: measured_error - bound,
        tv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn equal_pmfs_have_zero_ratio() {
        let a = Pmf::from_f64(0, &[0.25, 0.5, 0.25], P).unwrap();
        let rep = mgf_ratio_check(&a, &a, 3.0, 101);
        assert_eq!(rep.sup_log_ratio, 0.0);
        assert_eq!(rep.endpoint_limits, (0.0, 0.0));
    }

    #[test]
    fn pointwise_bound_caps_mgf_ratio() {
        let a = Pmf::from_f64(0, &[0.2, 0.3, 0.5], P).unwrap();
        let b = Pmf::from_f64(0, &[0.3, 0.3, 0.4], P).unwrap();
        let eps = (0.3f64 / 0.2).ln();
        let rep = mgf_ratio_check(&a, &b, 10.0, 1001);
        assert!(rep.sup_log_ratio <= eps + 1e-12);
        assert!((rep.endpoint_limits.1 - (0.5f64 / 0.4).ln()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_extremes_are_infinite() {
        let a = Pmf::from_f64(0, &[0.5, 0.5], P).unwrap();
        let b = Pmf::from_f64(0, &[0.5, 0.25, 0.25], P).unwrap();
        let rep = mgf_ratio_check(&a, &b, 1.0, 11);
        assert_eq!(rep.endpoint_limits.1, f64::NEG_INFINITY);
        assert_eq!(rep.sup_log_ratio, f64::INFINITY);
    }

    #[test]
    fn tv_bound_formula() {
        // identical laws carry no information: the full sqrt(n)/(8 sqrt 2) applies
        let a = Pmf::point_mass(0, P);
        let same = tv_accuracy_check(&a, &a, 128, 0.0, 0.0);
        assert!((same.bound - 1.0).abs() < 1e-15);
        assert!(!same.holds);
        assert!(tv_accuracy_check(&a, &a, 128, 1.5, 0.0).holds);
        // disjoint laws: the bound vanishes
        let b = Pmf::point_mass(1, P);
        let far = tv_accuracy_check(&a, &b, 128, 0.0, 0.0);
        assert_eq!(far.bound, 0.0);
        assert!(far.holds);
    }
}
