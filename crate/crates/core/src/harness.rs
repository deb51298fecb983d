//! Encode, shuffle, analyze.
//!
//! The analyzer only ever sees a [`Transcript`]: per-symbol message counts
//! with no user attribution. Shuffling is therefore the reduction to counts;
//! [`shuffle_messages`] materializes an explicit permutation for debugging.
//!
//! Random streams: every trial owns the ChaCha8 stream `(seed, trial)`.
//! Inside a trial, the dataset draws from word offset 0 and user `u` draws
//! from word offset `(u + 1) * 2^32`, so results do not depend on thread
//! count or scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Multiset of messages, stored as counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript<S: Ord> {
    counts: BTreeMap<S, u64>,
}

impl<S: Ord + Clone> Transcript<S> {
    pub fn new() -> Self {
        Transcript {
            counts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, symbol: S, count: u64) {
        if count > 0 {
            *self.counts.entry(symbol).or_insert(0) += count;
        }
    }

    pub fn merge(&mut self, other: &Transcript<S>) {
        for (s, c) in &other.counts {
            self.add(s.clone(), *c);
        }
    }

    pub fn count(&self, symbol: &S) -> u64 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, u64)> + '_ {
        self.counts.iter().map(|(s, c)| (s, *c))
    }

    /// Expands the multiset into a flat list in symbol order.
    pub fn to_messages(&self) -> Vec<S> {
        self.counts
            .iter()
            .flat_map(|(s, c)| std::iter::repeat_n(s.clone(), *c as usize))
            .collect()
    }
}

impl<S: Ord + Clone> FromIterator<S> for Transcript<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut t = Transcript::new();
        for s in iter {
            t.add(s, 1);
        }
        t
    }
}

/// Concatenates per-user messages and applies a Fisher-Yates shuffle.
pub fn shuffle_messages<S: Ord + Clone, R: Rng + ?Sized>(
    per_user: &[Transcript<S>],
    rng: &mut R,
) -> Vec<S> {
    let mut all: Vec<S> = per_user.iter().flat_map(|t| t.to_messages()).collect();
    for i in (1..all.len()).rev() {
        let j = rng.gen_range(0..=i);
        all.swap(i, j);
    }
    all
}

/// Which inputs the users hold in an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetSpec {
    Explicit(Vec<f64>),
    AllZeros,
    AllOnes,
    UniformRandom,
}

impl DatasetSpec {
    /// Parses `all-zeros`, `all-ones`, `uniform-random` or a comma-separated list.
    pub fn parse(s: &str) -> Result<DatasetSpec> {
        match s.trim() {
            "all-zeros" => Ok(DatasetSpec::AllZeros),
            "all-ones" => Ok(DatasetSpec::AllOnes),
            "uniform-random" | "uniform" => Ok(DatasetSpec::UniformRandom),
            other => {
                let values: std::result::Result<Vec<f64>, _> =
                    other.split(',').map(|v| v.trim().parse::<f64>()).collect();
                match values {
                    Ok(v) if !v.is_empty() => Ok(DatasetSpec::Explicit(v)),
                    _ => param(format!("unrecognized dataset descriptor `{s}`")),
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            DatasetSpec::Explicit(v) => v
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            DatasetSpec::AllZeros => "all-zeros".into(),
            DatasetSpec::AllOnes => "all-ones".into(),
            DatasetSpec::UniformRandom => "uniform-random".into(),
        }
    }
}

/// A protocol in the shuffled model: a local randomizer and a symmetric analyzer.
pub trait ShuffleProtocol: Sync {
    type Input: Clone + Send + Sync;
    type Message: Ord + Clone + Send + Sync;
    type Output: Send;

    fn name(&self) -> &'static str;
    fn epsilon(&self) -> f64;
    fn users(&self) -> u64;

    /// Adds one user's messages to `out`.
    fn randomize_into<R: Rng + ?Sized>(
        &self,
        x: &Self::Input,
        rng: &mut R,
        out: &mut Transcript<Self::Message>,
    ) -> Result<()>;

    fn randomize<R: Rng + ?Sized>(
        &self,
        x: &Self::Input,
        rng: &mut R,
    ) -> Result<Transcript<Self::Message>> {
        let mut t = Transcript::new();
        self.randomize_into(x, rng, &mut t)?;
        Ok(t)
    }

    fn analyze(&self, transcript: &Transcript<Self::Message>) -> Result<Self::Output>;

    fn dataset<R: Rng + ?Sized>(&self, spec: &DatasetSpec, rng: &mut R) -> Result<Vec<Self::Input>>;

    /// Signed error of one run; its absolute value is what experiments average.
    fn trial_error(&self, inputs: &[Self::Input], output: &Self::Output) -> f64;
}

fn check_size<P: ShuffleProtocol>(dataset: &[P::Input], protocol: &P) -> Result<()> {
    if dataset.len() as u64 != protocol.users() {
        return Err(Error::Protocol(format!(
            "dataset has {} users but the protocol expects {}",
            dataset.len(),
            protocol.users()
        )));
    }
    Ok(())
}

/// Runs every randomizer on `rng` in user order, reduces to counts, analyzes.
pub fn run_protocol<P: ShuffleProtocol, R: Rng + ?Sized>(
    dataset: &[P::Input],
    protocol: &P,
    rng: &mut R,
) -> Result<(Transcript<P::Message>, P::Output)> {
    check_size(dataset, protocol)?;
    let mut transcript = Transcript::new();
    for x in dataset {
        protocol.randomize_into(x, rng, &mut transcript)?;
    }
    let out = protocol.analyze(&transcript)?;
    Ok((transcript, out))
}

/// Per-user transcripts and their explicitly shuffled concatenation.
#[derive(Clone, Debug)]
pub struct DebugRun<M: Ord, O> {
    pub per_user: Vec<Transcript<M>>,
    pub shuffled: Vec<M>,
    pub transcript: Transcript<M>,
    pub output: O,
}

/// Like [`run_protocol`] but keeps per-user outputs and a materialized shuffle.
pub fn run_protocol_debug<P: ShuffleProtocol, R: Rng + ?Sized>(
    dataset: &[P::Input],
    protocol: &P,
    rng: &mut R,
) -> Result<DebugRun<P::Message, P::Output>> {
    check_size(dataset, protocol)?;
    let per_user = dataset
        .iter()
        .map(|x| protocol.randomize(x, rng))
        .collect::<Result<Vec<_>>>()?;
    let shuffled = shuffle_messages(&per_user, rng);
    let transcript: Transcript<P::Message> = shuffled.iter().cloned().collect();
    let output = protocol.analyze(&transcript)?;
    Ok(DebugRun {
        per_user,
        shuffled,
        transcript,
        output,
    })
}

/// Stream derivation for one trial.
#[derive(Clone)]
pub struct TrialStreams {
    base: ChaCha8Rng,
}

const USER_STRIDE_WORDS: u128 = 1 << 32;

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(seed);
        base.set_stream(trial);
        TrialStreams { base }
    }

    pub fn dataset_rng(&self) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_word_pos(0);
        r
    }

    pub fn user_rng(&self, user: u64) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_word_pos((user as u128 + 1) * USER_STRIDE_WORDS);
        r
    }
}

/// One trial with per-user substreams.
pub fn run_trial<P: ShuffleProtocol>(
    dataset: &[P::Input],
    protocol: &P,
    streams: &TrialStreams,
) -> Result<(Transcript<P::Message>, P::Output)> {
    check_size(dataset, protocol)?;
    let mut transcript = Transcript::new();
    for (u, x) in dataset.iter().enumerate() {
        let mut rng = streams.user_rng(u as u64);
        protocol.randomize_into(x, &mut rng, &mut transcript)?;
    }
    let out = protocol.analyze(&transcript)?;
    Ok((transcript, out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: u64,
    pub seed: u64,
    pub inputs: DatasetSpec,
}

impl ExperimentConfig {
    pub fn new(trials: u64, seed: u64, inputs: DatasetSpec) -> Result<Self> {
        let c = ExperimentConfig {
            trials,
            seed,
            inputs,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return param("trials must be at least 1");
        }
        Ok(())
    }
}

/// Signed errors of every trial, in trial order.
pub fn run_trials<P: ShuffleProtocol>(config: &ExperimentConfig, protocol: &P) -> Result<Vec<f64>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let streams = TrialStreams::new(config.seed, trial);
            let inputs = protocol.dataset(&config.inputs, &mut streams.dataset_rng())?;
            let (_, out) = run_trial(&inputs, protocol, &streams)?;
            Ok(protocol.trial_error(&inputs, &out))
        })
        .collect()
}

pub fn run_experiment<P: ShuffleProtocol>(config: &ExperimentConfig, protocol: &P) -> Result<ErrorReport> {
    let errors = run_trials(config, protocol)?;
    Ok(ErrorReport::from_errors(
        protocol.name(),
        protocol.epsilon(),
        protocol.users(),
        config.seed,
        &errors,
    ))
}

/// Histogram of `stat(transcript)` over independent trials with a fixed dataset.
pub fn sample_statistic<P, F>(
    dataset: &[P::Input],
    protocol: &P,
    trials: u64,
    seed: u64,
    stat: F,
) -> Result<BTreeMap<i64, u64>>
where
    P: ShuffleProtocol,
    F: Fn(&Transcript<P::Message>) -> i64 + Sync,
{
    check_size(dataset, protocol)?;
    let values: Vec<i64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let streams = TrialStreams::new(seed, trial);
            let mut transcript = Transcript::new();
            for (u, x) in dataset.iter().enumerate() {
                protocol.randomize_into(x, &mut streams.user_rng(u as u64), &mut transcript)?;
            }
            Ok(stat(&transcript))
        })
        .collect::<Result<_>>()?;
    let mut hist = BTreeMap::new();
    for v in values {
        *hist.entry(v).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Draws one input per user for binary-valued datasets.
pub(crate) fn binary_dataset<R: Rng + ?Sized>(n: u64, spec: &DatasetSpec, rng: &mut R) -> Result<Vec<bool>> {
    match spec {
        DatasetSpec::AllZeros => Ok(vec![false; n as usize]),
        DatasetSpec::AllOnes => Ok(vec![true; n as usize]),
        DatasetSpec::UniformRandom => Ok((0..n).map(|_| rng.gen::<bool>()).collect()),
        DatasetSpec::Explicit(v) => {
            if v.len() as u64 != n {
                return Err(Error::Protocol(format!(
                    "explicit dataset has {} values, expected {n}",
                    v.len()
                )));
            }
            v.iter()
                .map(|&x| {
                    if x == 0.0 || x == 1.0 {
                        Ok(x == 1.0)
                    } else {
                        param(format!("binary inputs must be 0 or 1, got {x}"))
                    }
                })
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub protocol: String,
    pub epsilon: f64,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub mean_abs_error: f64,
    pub mean_signed_error: f64,
    pub stderr: f64,
    pub percentiles: BTreeMap<u8, f64>,
}

pub const REPORT_HEADER: &str = "protocol,epsilon,n,trials,seed,mean_abs_error,stderr,p50,p90,p99";

impl ErrorReport {
    pub fn from_errors(protocol: &str, epsilon: f64, n: u64, seed: u64, signed: &[f64]) -> Self {
        let trials = signed.len() as u64;
        let abs: Vec<f64> = signed.iter().map(|e| e.abs()).collect();
        let count = signed.len().max(1) as f64;
        let mean_abs_error = pairwise_sum(&abs) / count;
        let mean_signed_error = pairwise_sum(signed) / count;
        let stderr = if signed.len() > 1 {
            let dev: Vec<f64> = abs.iter().map(|a| (a - mean_abs_error).powi(2)).collect();
            (pairwise_sum(&dev) / (count - 1.0)).sqrt() / count.sqrt()
        } else {
            0.0
        };
        let mut sorted = abs;
        sorted.sort_by(f64::total_cmp);
        let percentiles = [50u8, 90, 99]
            .into_iter()
            .map(|q| (q, nearest_rank(&sorted, q as f64)))
            .collect();
        ErrorReport {
            protocol: protocol.to_string(),
            epsilon,
            n,
            trials,
            seed,
            mean_abs_error,
            mean_signed_error,
            stderr,
            percentiles,
        }
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            self.protocol,
            self.epsilon,
            self.n,
            self.trials,
            self.seed,
            self.mean_abs_error,
            self.stderr,
            self.percentiles[&50],
            self.percentiles[&90],
            self.percentiles[&99]
        );
        s
    }

    pub fn to_csv(&self) -> String {
        format!("{REPORT_HEADER}\n{}\n", self.csv_row())
    }
}

/// Nearest-rank percentile of sorted data.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
