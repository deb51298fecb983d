//! Histograms over `{1, ..., B}`: one binary summation per bucket, run on
//! the indicator of the user's value, at half the privacy budget each.

use std::fmt::Write as _;

use rand::Rng;

use crate::audit::{audit_binary_with, AuditOptions, AuditReport};
use crate::binary::{analyze_ones, BinaryParams, BinaryProtocol};
use crate::error::{param, Error, Result};
use crate::harness::{DatasetSpec, ShuffleProtocol, Transcript};
use crate::search::{engineering_search, SearchOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramParams {
    pub epsilon: f64,
    pub n: u64,
    pub buckets: u32,
    /// Shared by every bucket; built for `epsilon / 2`.
    pub per_coord: BinaryParams,
}

impl HistogramParams {
    pub fn new(epsilon: f64, buckets: u32, per_coord: BinaryParams) -> Result<Self> {
        if buckets < 2 {
            return param(format!("histogram needs at least 2 buckets, got {buckets}"));
        }
        if per_coord.epsilon != epsilon / 2.0 {
            return param(format!(
                "per-bucket protocol must be built for epsilon/2 = {}, got {}",
                epsilon / 2.0,
                per_coord.epsilon
            ));
        }
        per_coord.validate()?;
        Ok(HistogramParams {
            epsilon,
            n: per_coord.n,
            buckets,
            per_coord,
        })
    }

    pub fn engineering(epsilon: f64, n: u64, buckets: u32, d_candidates: &[u64], opts: &SearchOptions) -> Result<Self> {
        let per_coord = engineering_search(epsilon / 2.0, n, d_candidates, opts)?.params;
        HistogramParams::new(epsilon, buckets, per_coord)
    }

    /// Exact audit of the per-bucket protocol.
    pub fn audit_per_coord(&self, opts: &AuditOptions) -> Result<AuditReport> {
        audit_binary_with(&self.per_coord, opts)
    }
}

/// A message tagged with its 1-based bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordMessage {
    pub coordinate: u32,
    pub bit: bool,
}

#[derive(Clone, Debug)]
pub struct HistogramProtocol {
    params: HistogramParams,
    coord: BinaryProtocol,
}

impl HistogramProtocol {
    pub fn new(params: HistogramParams) -> Result<Self> {
        let coord = BinaryProtocol::new(params.per_coord.clone())?;
        Ok(HistogramProtocol { params, coord })
    }

    pub fn params(&self) -> &HistogramParams {
        &self.params
    }

    /// Counts of each bucket in `inputs`.
    pub fn true_counts(&self, inputs: &[u32]) -> Vec<u64> {
        let mut counts = vec![0u64; self.params.buckets as usize];
        for &x in inputs {
            if (1..=self.params.buckets).contains(&x) {
                counts[x as usize - 1] += 1;
            }
        }
        counts
    }
}

pub fn hist_randomize<R: Rng + ?Sized>(x: u32, protocol: &HistogramProtocol, rng: &mut R) -> Result<Transcript<CoordMessage>> {
    protocol.randomize(&x, rng)
}

pub fn hist_analyze(transcript: &Transcript<CoordMessage>, protocol: &HistogramProtocol) -> Result<Vec<f64>> {
    protocol.analyze(transcript)
}

impl ShuffleProtocol for HistogramProtocol {
    type Input = u32;
    type Message = CoordMessage;
    type Output = Vec<f64>;

    fn name(&self) -> &'static str {
        "histogram"
    }

    fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    fn users(&self) -> u64 {
        self.params.n
    }

    fn randomize_into<R: Rng + ?Sized>(&self, x: &u32, rng: &mut R, out: &mut Transcript<CoordMessage>) -> Result<()> {
        let b = self.params.buckets;
        if !(1..=b).contains(x) {
            return param(format!("histogram input must lie in 1..={b}, got {x}"));
        }
        let d = self.params.per_coord.d;
        for coordinate in 1..=b {
            let ones = self.coord.ones(coordinate == *x, rng);
            out.add(CoordMessage { coordinate, bit: true }, ones);
            out.add(CoordMessage { coordinate, bit: false }, d - ones);
        }
        Ok(())
    }

    fn analyze(&self, transcript: &Transcript<CoordMessage>) -> Result<Vec<f64>> {
        let b = self.params.buckets as usize;
        let mut per = vec![(0u64, 0u64); b];
        for (msg, count) in transcript.iter() {
            let j = msg.coordinate as usize;
            if j == 0 || j > b {
                return Err(Error::Protocol(format!("message tagged with bucket {j} out of range")));
            }
            if msg.bit {
                per[j - 1].0 += count;
            } else {
                per[j - 1].1 += count;
            }
        }
        let bp = &self.params.per_coord;
        let expected = bp.message_count()?;
        per.into_iter()
            .enumerate()
            .map(|(j, (ones, zeros))| {
                if ones + zeros != expected {
                    return Err(Error::Protocol(format!(
                        "bucket {} sub-transcript has {} messages, expected {expected}",
                        j + 1,
                        ones + zeros
                    )));
                }
                Ok(analyze_ones(ones, bp.n, bp.d))
            })
            .collect()
    }

    fn dataset<R: Rng + ?Sized>(&self, spec: &DatasetSpec, rng: &mut R) -> Result<Vec<u32>> {
        let n = self.params.n as usize;
        let b = self.params.buckets;
        match spec {
            DatasetSpec::AllOnes => Ok(vec![1; n]),
            DatasetSpec::AllZeros => param("the all-zeros dataset has no histogram meaning; buckets start at 1"),
            DatasetSpec::UniformRandom => Ok((0..n).map(|_| rng.gen_range(1..=b)).collect()),
            DatasetSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::Protocol(format!("explicit dataset has {} values, expected {n}", v.len())));
                }
                v.iter()
                    .map(|&x| {
                        if x.fract() == 0.0 && x >= 1.0 && x <= b as f64 {
                            Ok(x as u32)
                        } else {
                            param(format!("histogram inputs must be integers in 1..={b}, got {x}"))
                        }
                    })
                    .collect()
            }
        }
    }

    /// Signed error of the bucket with the largest absolute error.
    fn trial_error(&self, inputs: &[u32], output: &Vec<f64>) -> f64 {
        self.true_counts(inputs)
            .iter()
            .zip(output)
            .map(|(&t, &e)| e - t as f64)
            .fold(0.0, |acc: f64, e| if e.abs() > acc.abs() { e } else { acc })
    }
}

/// `coordinate,estimate,true_count,abs_error`.
pub fn histogram_csv(estimates: &[f64], true_counts: &[u64]) -> String {
    let mut out = String::from("coordinate,estimate,true_count,abs_error\n");
    for (j, (e, t)) in estimates.iter().zip(true_counts).enumerate() {
        let _ = writeln!(out, "{},{},{},{}", j + 1, e, t, (e - *t as f64).abs());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::ParamMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn honest(n: u64, b: u32) -> HistogramProtocol {
        let bp = BinaryParams::new(0.5, n, 7, 1.0, 0.0, ParamMode::Engineering).unwrap();
        HistogramProtocol::new(HistogramParams::new(1.0, b, bp).unwrap()).unwrap()
    }

    #[test]
    fn honest_histogram_is_exact() {
        let proto = honest(5, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (t, out) = crate::harness::run_protocol(&[1; 5], &proto, &mut rng).unwrap();
        assert_eq!(out, vec![5.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.total(), 5 * 4 * 7);
    }

    #[test]
    fn per_bucket_indicator() {
        let proto = honest(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = proto.randomize(&1, &mut rng).unwrap();
        assert_eq!(t.count(&CoordMessage { coordinate: 1, bit: true }), 4);
        assert_eq!(t.count(&CoordMessage { coordinate: 2, bit: true }), 3);
        assert_eq!(t.total(), 14);
        assert!(proto.randomize(&3, &mut rng).is_err());
        assert!(proto.randomize(&0, &mut rng).is_err());
    }

    #[test]
    fn requires_half_budget() {
        let bp = BinaryParams::new(1.0, 5, 7, 1.0, 0.1, ParamMode::Engineering).unwrap();
        assert!(HistogramParams::new(1.0, 4, bp.clone()).is_err());
        assert!(HistogramParams::new(2.0, 1, bp).is_err());
    }
}
