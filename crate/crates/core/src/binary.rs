//! Binary summation: every user sends `d` one-bit messages.
//!
//! With probability `1 - p` a user holding `x` sends `(d - 1)/2 + x` ones.
//! Otherwise it sends `z` ones with `z` drawn from the truncated discrete
//! Laplace distribution centered at `d/2` with width `d`. The analyzer
//! returns `n/2 + ones - n*d/2`.

use rand::Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::dlap::{dlap_pmf, DlapSampler, TruncDLapParams};
use crate::error::{param, Error, Result};
use crate::harness::{binary_dataset, DatasetSpec, ShuffleProtocol, Transcript};
use crate::pmf::Pmf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    ClosedForm,
    Engineering,
}

impl std::fmt::Display for ParamMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParamMode::ClosedForm => "closed_form",
            ParamMode::Engineering => "engineering",
        })
    }
}

/// Raw closed-form values that did not fit a runnable configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Infeasibility {
    /// Unclamped noise probability.
    pub p_value: f64,
    /// Unrounded message count.
    pub d_value: f64,
    pub p_exceeds_one: bool,
    pub d_exceeds_ceiling: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryParams {
    pub epsilon: f64,
    pub n: u64,
    pub d: u64,
    pub s: f64,
    pub p: f64,
    pub mode: ParamMode,
    #[serde(skip)]
    pub infeasibility: Option<Infeasibility>,
}

impl BinaryParams {
    pub fn new(epsilon: f64, n: u64, d: u64, s: f64, p: f64, mode: ParamMode) -> Result<Self> {
        let params = BinaryParams {
            epsilon,
            n,
            d,
            s,
            p,
            mode,
            infeasibility: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return param(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.n == 0 {
            return param("n must be at least 1");
        }
        if self.d.is_multiple_of(2) {
            return param(format!("d must be odd, got {}", self.d));
        }
        if !(self.s > 0.0) || !self.s.is_finite() {
            return param(format!("s must be positive and finite, got {}", self.s));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return param(format!("p must lie in [0, 1], got {}", self.p));
        }
        Ok(())
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasibility.is_none()
    }

    pub fn noise_params(&self) -> Result<TruncDLapParams> {
        TruncDLapParams::centered(self.d, self.s)
    }

    /// Total number of messages, `n * d`.
    pub fn message_count(&self) -> Result<u64> {
        self.n
            .checked_mul(self.d)
            .ok_or_else(|| Error::Feasibility(format!("n*d overflows for n = {}, d = {}", self.n, self.d)))
    }

    /// Upper bound `p*n/2 + sqrt(2)*s*sqrt(p*n)` on the expected absolute error.
    pub fn error_bound(&self) -> f64 {
        error_proxy(self.n, self.s, self.p)
    }

    /// Renders the `[binary]` config section.
    pub fn to_toml(&self) -> String {
        format!(
            "[binary]\nepsilon = {:?}\nn = {}\nd = {}\ns = {:?}\np = {:?}\nmode = \"{}\"\n",
            self.epsilon, self.n, self.d, self.s, self.p, self.mode
        )
    }
}

pub fn error_proxy(n: u64, s: f64, p: f64) -> f64 {
    let pn = p * n as f64;
    pn / 2.0 + std::f64::consts::SQRT_2 * s * pn.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormOptions {
    /// Largest epsilon used in the formulas; larger targets are clamped to it.
    pub c0: f64,
    /// `d` above this value is flagged infeasible.
    pub d_ceiling: f64,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        ClosedFormOptions {
            c0: 1.0,
            d_ceiling: 1e7,
        }
    }
}

/// Closed-form parameters for `n` users, analysed as `ceil((n+1)/2)` users.
pub fn closed_form_params(epsilon: f64, n: u64) -> Result<BinaryParams> {
    closed_form_params_with(epsilon, n, &ClosedFormOptions::default())
}

pub fn closed_form_params_with(epsilon: f64, n: u64, opts: &ClosedFormOptions) -> Result<BinaryParams> {
    if !(epsilon > 0.0) {
        return param(format!("epsilon must be positive, got {epsilon}"));
    }
    if n == 0 {
        return param("n must be at least 1");
    }
    let floor = (n as f64).powf(-2.0 / 3.0);
    if epsilon <= floor {
        return param(format!(
            "epsilon = {epsilon} must exceed n^(-2/3) = {floor} for the closed-form parameters"
        ));
    }
    let eps = epsilon.min(opts.c0);
    // ceil((n + 1) / 2)
    let n_half = (n / 2 + 1) as f64;
    let q = -(-0.1 * eps).exp_m1();
    let growth = (100.0 * eps).exp();
    let s = 10.0 / eps;
    let p_value = 100.0 * growth * (1.0 / q).ln() / (n_half * q);
    let inner = (1000.0 * growth / q * (n_half / q).ln()).ceil();
    let d_value = 4.0 * inner + 3.0;
    let d = if inner.is_finite() && inner < ((u64::MAX - 3) / 4) as f64 {
        4 * inner as u64 + 3
    } else {
        u64::MAX
    };
    let p_exceeds_one = !(p_value <= 1.0);
    let d_exceeds_ceiling = !(d_value <= opts.d_ceiling);
    Ok(BinaryParams {
        epsilon,
        n,
        d,
        s,
        p: if p_exceeds_one { 1.0 } else { p_value },
        mode: ParamMode::ClosedForm,
        infeasibility: (p_exceeds_one || d_exceeds_ceiling).then_some(Infeasibility {
            p_value,
            d_value,
            p_exceeds_one,
            d_exceeds_ceiling,
        }),
    })
}

/// Distributions of the number of ones sent on input 0 and on input 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizerDist {
    pub r0: Pmf,
    pub r1: Pmf,
}

pub fn randomizer_dist(params: &BinaryParams, prec: u32) -> Result<RandomizerDist> {
    params.validate()?;
    let noise = dlap_pmf(&params.noise_params()?, prec);
    let half = ((params.d - 1) / 2) as i64;
    let r0 = Pmf::mix(params.p, &noise, &Pmf::point_mass(half, prec))?;
    let r1 = Pmf::mix(params.p, &noise, &Pmf::point_mass(half + 1, prec))?;
    Ok(RandomizerDist { r0, r1 })
}

/// Randomizer and analyzer with a cached noise sampler.
#[derive(Clone, Debug)]
pub struct BinaryProtocol {
    params: BinaryParams,
    sampler: DlapSampler,
}

impl BinaryProtocol {
    pub fn new(params: BinaryParams) -> Result<Self> {
        params.validate()?;
        params.message_count()?;
        let sampler = DlapSampler::new(&params.noise_params()?);
        Ok(BinaryProtocol { params, sampler })
    }

    pub fn params(&self) -> &BinaryParams {
        &self.params
    }

    /// Number of ones one user sends.
    pub fn ones<R: Rng + ?Sized>(&self, x: bool, rng: &mut R) -> u64 {
        let noisy = rng.gen::<f64>() < self.params.p;
        if noisy {
            self.sampler.sample(rng) as u64
        } else {
            (self.params.d - 1) / 2 + x as u64
        }
    }
}

/// One user's multiset of `d` bits.
pub fn binary_randomize<R: Rng + ?Sized>(x: bool, params: &BinaryParams, rng: &mut R) -> Result<Transcript<bool>> {
    BinaryProtocol::new(params.clone())?.randomize(&x, rng)
}

/// `n/2 + ones - n*d/2`, exact for any integer counts.
pub fn binary_analyze(transcript: &Transcript<bool>, params: &BinaryParams) -> Result<f64> {
    let expected = params.message_count()?;
    if transcript.total() != expected {
        return Err(Error::Protocol(format!(
            "binary transcript has {} messages, expected n*d = {expected}",
            transcript.total()
        )));
    }
    Ok(analyze_ones(transcript.count(&true), params.n, params.d))
}

pub(crate) fn analyze_ones(ones: u64, n: u64, d: u64) -> f64 {
    let twice = n as i128 + 2 * ones as i128 - n as i128 * d as i128;
    twice as f64 / 2.0
}

/// Exact expected analyzer output when `ones_users` of the `n` users hold 1.
pub fn expected_output(params: &BinaryParams, ones_users: u64, prec: u32) -> Result<Float> {
    if ones_users > params.n {
        return param(format!("{ones_users} users holding 1 exceeds n = {}", params.n));
    }
    let dist = randomizer_dist(params, prec)?;
    let zeros = params.n - ones_users;
    let mean_ones = Float::with_val(prec, dist.r0.mean() * zeros) + Float::with_val(prec, dist.r1.mean() * ones_users);
    let n = params.n as i128;
    let shift = Float::with_val(prec, n - n * params.d as i128) / 2u32;
    Ok(mean_ones + shift)
}

impl ShuffleProtocol for BinaryProtocol {
    type Input = bool;
    type Message = bool;
    type Output = f64;

    fn name(&self) -> &'static str {
        "binary"
    }

    fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    fn users(&self) -> u64 {
        self.params.n
    }

    fn randomize_into<R: Rng + ?Sized>(&self, x: &bool, rng: &mut R, out: &mut Transcript<bool>) -> Result<()> {
        let ones = self.ones(*x, rng);
        out.add(true, ones);
        out.add(false, self.params.d - ones);
        Ok(())
    }

    fn analyze(&self, transcript: &Transcript<bool>) -> Result<f64> {
        binary_analyze(transcript, &self.params)
    }

    fn dataset<R: Rng + ?Sized>(&self, spec: &DatasetSpec, rng: &mut R) -> Result<Vec<bool>> {
        binary_dataset(self.params.n, spec, rng)
    }

    fn trial_error(&self, inputs: &[bool], output: &f64) -> f64 {
        let truth = inputs.iter().filter(|&&b| b).count() as f64;
        output - truth
    }
}
