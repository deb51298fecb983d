//! Tables of `P[m][k] = Pr[Z_1 + ... + Z_m = k]` for `Z_i` drawn from the
//! binary protocol's noise, and the numeric probes built on them.

use rug::Float;

use crate::dlap::{dlap_pmf, TruncDLapParams};
use crate::error::{param, Error, Result};
use crate::pmf::Pmf;

#[derive(Clone, Debug)]
pub struct ConvolutionTable {
    pub d: u64,
    pub s: f64,
    pub m_max: u64,
    prec: u32,
    rows: Vec<Pmf>,
}

impl ConvolutionTable {
    pub fn row(&self, m: u64) -> Result<&Pmf> {
        self.rows
            .get(m as usize)
            .ok_or_else(|| Error::Index(format!("row m = {m} exceeds m_max = {}", self.m_max)))
    }

    /// `P[m][k]`; zero for `k` outside `0..=m*d`.
    pub fn get(&self, m: u64, k: i64) -> Result<Float> {
        Ok(self.row(m)?.mass(k))
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// `m,k,probability` rows for `k` in `k_range` (clipped to each row's support).
    pub fn to_csv(&self, k_range: Option<(i64, i64)>) -> String {
        let mut out = String::from("m,k,probability\n");
        for (m, row) in self.rows.iter().enumerate() {
            let (lo, hi) = k_range.unwrap_or((row.offset(), row.max_support()));
            for k in lo.max(row.offset())..=hi.min(row.max_support()) {
                out.push_str(&format!("{m},{k},{}\n", crate::pmf::format_sci(&row.mass(k))));
            }
        }
        out
    }
}

/// Rows `0..=m_max`, built by iterated convolution. `m_max * d` must not exceed `ceiling`.
pub fn pmk_table(d: u64, s: f64, m_max: u64, prec: u32, ceiling: u64) -> Result<ConvolutionTable> {
    if d.is_multiple_of(2) {
        return param(format!("d must be odd, got {d}"));
    }
    match m_max.checked_mul(d) {
        Some(v) if v <= ceiling => {}
        _ => {
            return Err(Error::Feasibility(format!(
                "m_max * d = {m_max} * {d} exceeds the ceiling of {ceiling}"
            )))
        }
    }
    let noise = dlap_pmf(&TruncDLapParams::centered(d, s)?, prec);
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    rows.push(Pmf::point_mass(0, prec));
    for m in 1..=m_max as usize {
        let next = rows[m - 1].convolve(&noise);
        rows.push(next);
    }
    Ok(ConvolutionTable {
        d,
        s,
        m_max,
        prec,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailInequality {
    pub lhs: Float,
    pub rhs: Float,
    pub holds: bool,
}

/// Evaluates
/// `e^-eps p (1 - e^(-eps/2)) (P[m+1][k+l1] + (n-m-1)/(m+1) P[m+1][k+l2]) + e^(0.2 eps) P[m][k-1] >= P[m][k]`.
#[allow(clippy::too_many_arguments)]
pub fn eval_tail_inequality(
    table: &ConvolutionTable,
    p: f64,
    epsilon: f64,
    n: u64,
    m: u64,
    k: i64,
    l1: i64,
    l2: i64,
) -> Result<TailInequality> {
    if m + 1 > table.m_max {
        return Err(Error::Index(format!(
            "row m + 1 = {} exceeds m_max = {}",
            m + 1,
            table.m_max
        )));
    }
    if m >= n {
        return Err(Error::Index(format!("m = {m} must be at most n - 1 = {}", n.saturating_sub(1))));
    }
    let prec = table.prec;
    let f = |x: f64| Float::with_val(prec, x);
    let coeff = f((-epsilon).exp()) * f(p) * f(-(-epsilon / 2.0).exp_m1());
    let weight = Float::with_val(prec, (n - m - 1) as f64) / (m + 1);
    let next = table.get(m + 1, k + l1)? + weight * table.get(m + 1, k + l2)?;
    let lhs = coeff * next + f((0.2 * epsilon).exp()) * table.get(m, k - 1)?;
    let rhs = table.get(m, k)?;
    Ok(TailInequality {
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AntiConcentration {
    /// `P[a][a(d-1)/2]`.
    pub lhs: Float,
    /// `sqrt(a) / (40 s^3) * P[0][0]`.
    pub rhs: Float,
    pub holds: bool,
    /// Whether `a <= s^2 / 1000`, the regime in which the bound is claimed.
    pub in_regime: bool,
}

pub fn anti_concentration(table: &ConvolutionTable, a: u64) -> Result<AntiConcentration> {
    let prec = table.prec;
    let lhs = table.get(a, (a * (table.d - 1) / 2) as i64)?;
    let rhs = Float::with_val(prec, (a as f64).sqrt()) / (40.0 * table.s.powi(3)) * table.get(0, 0)?;
    Ok(AntiConcentration {
        holds: lhs >= rhs,
        in_regime: (a as f64) <= table.s * table.s / 1000.0,
        lhs,
        rhs,
    })
}
