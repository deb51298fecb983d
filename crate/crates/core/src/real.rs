//! Real summation over inputs in `[0, 1]`.
//!
//! Each input is truncated to `J = ceil(2 log2 n)` binary digits and digit
//! `j` is summed with its own binary protocol at privacy `eps_j`. Messages
//! carry their digit index; the analyzer recombines `sum_j a_j / 2^j`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::audit::{audit_binary_with, AuditOptions, AuditReport};
use crate::binary::{analyze_ones, closed_form_params, BinaryParams, BinaryProtocol};
use crate::error::{param, Error, Result};
use crate::harness::{DatasetSpec, ShuffleProtocol, Transcript};
use crate::search::{engineering_search, SearchOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct RealSumSchedule {
    pub epsilon: f64,
    pub n: u64,
    /// Number of digits, `ceil(2 log2 n)`.
    pub bits: u32,
    /// Privacy of digit `j` at index `j - 1`.
    pub eps_j: Vec<f64>,
}

pub fn make_schedule(epsilon: f64, n: u64) -> Result<RealSumSchedule> {
    // Closed at 1: the budget split still sums to at most epsilon there.
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return param(format!("epsilon must lie in (0, 1], got {epsilon}"));
    }
    if n < 4 {
        return param(format!("n must be at least 4, got {n}"));
    }
    let log_n = (n as f64).log2();
    let bits = (2.0 * log_n).ceil() as u32;
    let floor = epsilon / (4.0 * log_n);
    let eps_j: Vec<f64> = (1..=bits)
        .map(|j| (0.9f64.powi(j as i32) * epsilon / 20.0).max(floor))
        .collect();
    let total: f64 = eps_j.iter().sum();
    if total > epsilon {
        return Err(Error::Parameter(format!(
            "schedule spends {total} > epsilon = {epsilon}"
        )));
    }
    Ok(RealSumSchedule {
        epsilon,
        n,
        bits,
        eps_j,
    })
}

impl RealSumSchedule {
    pub fn total(&self) -> f64 {
        self.eps_j.iter().sum()
    }
}

/// Digits of `floor(x 2^J)`, most significant first; `x = 1` gives all ones.
pub fn decompose(x: f64, bits: u32) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&x) {
        return param(format!("input must lie in [0, 1], got {x}"));
    }
    if x == 1.0 {
        return Ok(vec![true; bits as usize]);
    }
    let mut rest = x;
    Ok((0..bits)
        .map(|_| {
            rest *= 2.0;
            let bit = rest >= 1.0;
            if bit {
                rest -= 1.0;
            }
            bit
        })
        .collect())
}

/// `sum_j bits[j] / 2^(j+1)`.
pub fn recompose(bits: &[bool]) -> f64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| 0.5f64.powi(j as i32 + 1))
        .sum()
}

/// A message tagged with its 1-based digit index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedMessage {
    pub bit_index: u32,
    pub payload: bool,
}

impl TaggedMessage {
    /// Wire form `(bit_index << 1) | payload`, which needs `ceil(log2 J) + 1` bits.
    pub fn encode(&self) -> u32 {
        (self.bit_index << 1) | self.payload as u32
    }

    pub fn decode(word: u32) -> Self {
        TaggedMessage {
            bit_index: word >> 1,
            payload: word & 1 == 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RealProtocol {
    schedule: RealSumSchedule,
    digits: Vec<BinaryProtocol>,
}

impl RealProtocol {
    /// One binary protocol per digit; `digit_params[j]` serves digit `j + 1`.
    pub fn new(schedule: RealSumSchedule, digit_params: Vec<BinaryParams>) -> Result<Self> {
        if digit_params.len() != schedule.bits as usize {
            return param(format!(
                "{} digit protocols supplied for {} digits",
                digit_params.len(),
                schedule.bits
            ));
        }
        if let Some(bp) = digit_params.iter().find(|bp| bp.n != schedule.n) {
            return param(format!("digit protocol has n = {}, schedule has n = {}", bp.n, schedule.n));
        }
        let digits = digit_params
            .into_iter()
            .map(BinaryProtocol::new)
            .collect::<Result<_>>()?;
        Ok(RealProtocol { schedule, digits })
    }

    /// Audited parameters for every digit. Digits sharing an `eps_j` share one search.
    pub fn engineering(epsilon: f64, n: u64, d_candidates: &[u64], opts: &SearchOptions) -> Result<Self> {
        let schedule = make_schedule(epsilon, n)?;
        let mut cache: HashMap<u64, BinaryParams> = HashMap::new();
        let mut params = Vec::with_capacity(schedule.eps_j.len());
        for &e in &schedule.eps_j {
            let bp = match cache.get(&e.to_bits()) {
                Some(bp) => bp.clone(),
                None => {
                    let bp = engineering_search(e, n, d_candidates, opts)?.params;
                    cache.insert(e.to_bits(), bp.clone());
                    bp
                }
            };
            params.push(bp);
        }
        RealProtocol::new(schedule, params)
    }

    /// Closed-form digit parameters. These are usually flagged infeasible.
    pub fn closed_form(epsilon: f64, n: u64) -> Result<Self> {
        let schedule = make_schedule(epsilon, n)?;
        let params = schedule
            .eps_j
            .iter()
            .map(|&e| closed_form_params(e, n))
            .collect::<Result<Vec<_>>>()?;
        RealProtocol::new(schedule, params)
    }

    pub fn schedule(&self) -> &RealSumSchedule {
        &self.schedule
    }

    pub fn digit_params(&self) -> Vec<&BinaryParams> {
        self.digits.iter().map(|p| p.params()).collect()
    }

    /// Messages per user, `sum_j d_j`.
    pub fn messages_per_user(&self) -> u64 {
        self.digits.iter().map(|p| p.params().d).sum()
    }

    /// Exact audit of every digit protocol; digits with equal parameters share one audit.
    pub fn audit_digits(&self, opts: &AuditOptions) -> Result<Vec<AuditReport>> {
        let mut done: Vec<(&BinaryParams, AuditReport)> = Vec::new();
        let mut out = Vec::with_capacity(self.digits.len());
        for p in &self.digits {
            let bp = p.params();
            let rep = match done.iter().find(|(q, _)| *q == bp) {
                Some((_, rep)) => *rep,
                None => {
                    let rep = audit_binary_with(bp, opts)?;
                    done.push((bp, rep));
                    rep
                }
            };
            out.push(rep);
        }
        Ok(out)
    }

    /// Error bound `sum_j (p_j n/2 + sqrt(2) s_j sqrt(p_j n)) / 2^j` plus rounding `n 2^-J`.
    pub fn error_bound(&self) -> f64 {
        let digits: f64 = self
            .digits
            .iter()
            .enumerate()
            .map(|(j, p)| p.params().error_bound() * 0.5f64.powi(j as i32 + 1))
            .sum();
        digits + self.schedule.n as f64 * 0.5f64.powi(self.schedule.bits as i32)
    }
}

pub fn real_randomize<R: Rng + ?Sized>(
    x: f64,
    protocol: &RealProtocol,
    rng: &mut R,
) -> Result<Transcript<TaggedMessage>> {
    protocol.randomize(&x, rng)
}

pub fn real_analyze(transcript: &Transcript<TaggedMessage>, protocol: &RealProtocol) -> Result<f64> {
    protocol.analyze(transcript)
}

impl ShuffleProtocol for RealProtocol {
    type Input = f64;
    type Message = TaggedMessage;
    type Output = f64;

    fn name(&self) -> &'static str {
        "real"
    }

    fn epsilon(&self) -> f64 {
        self.schedule.epsilon
    }

    fn users(&self) -> u64 {
        self.schedule.n
    }

    fn randomize_into<R: Rng + ?Sized>(
        &self,
        x: &f64,
        rng: &mut R,
        out: &mut Transcript<TaggedMessage>,
    ) -> Result<()> {
        let bits = decompose(*x, self.schedule.bits)?;
        for (j, (bit, proto)) in bits.into_iter().zip(&self.digits).enumerate() {
            let ones = proto.ones(bit, rng);
            let bit_index = j as u32 + 1;
            out.add(TaggedMessage { bit_index, payload: true }, ones);
            out.add(TaggedMessage { bit_index, payload: false }, proto.params().d - ones);
        }
        Ok(())
    }

    fn analyze(&self, transcript: &Transcript<TaggedMessage>) -> Result<f64> {
        let mut per_digit = vec![(0u64, 0u64); self.digits.len()];
        for (msg, count) in transcript.iter() {
            let j = msg.bit_index as usize;
            if j == 0 || j > self.digits.len() {
                return Err(Error::Protocol(format!("message tagged with digit {j} out of range")));
            }
            let slot = &mut per_digit[j - 1];
            if msg.payload {
                slot.0 += count;
            } else {
                slot.1 += count;
            }
        }
        let mut total = 0.0;
        for (j, ((ones, zeros), proto)) in per_digit.into_iter().zip(&self.digits).enumerate() {
            let bp = proto.params();
            let expected = bp.message_count()?;
            if ones + zeros != expected {
                return Err(Error::Protocol(format!(
                    "digit {} sub-transcript has {} messages, expected {expected}",
                    j + 1,
                    ones + zeros
                )));
            }
            total += analyze_ones(ones, bp.n, bp.d) * 0.5f64.powi(j as i32 + 1);
        }
        Ok(total)
    }

    fn dataset<R: Rng + ?Sized>(&self, spec: &DatasetSpec, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.schedule.n as usize;
        match spec {
            DatasetSpec::AllZeros => Ok(vec![0.0; n]),
            DatasetSpec::AllOnes => Ok(vec![1.0; n]),
            DatasetSpec::UniformRandom => Ok((0..n).map(|_| rng.gen::<f64>()).collect()),
            DatasetSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::Protocol(format!("explicit dataset has {} values, expected {n}", v.len())));
                }
                if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return param(format!("real inputs must lie in [0, 1], got {x}"));
                }
                Ok(v.clone())
            }
        }
    }

    fn trial_error(&self, inputs: &[f64], output: &f64) -> f64 {
        output - inputs.iter().sum::<f64>()
    }
}

/// Pre-shuffle debug dump, `user,bit_index,payload`.
pub fn pre_shuffle_csv(per_user: &[Transcript<TaggedMessage>]) -> String {
    let mut out = String::from("user,bit_index,payload\n");
    for (u, t) in per_user.iter().enumerate() {
        for m in t.to_messages() {
            let _ = writeln!(out, "{u},{},{}", m.bit_index, m.payload as u8);
        }
    }
    out
}

/// The shuffled artifact, `bit_index,payload`, in shuffled order.
pub fn shuffled_csv(messages: &[TaggedMessage]) -> String {
    let mut out = String::from("bit_index,payload\n");
    for m in messages {
        let _ = writeln!(out, "{},{}", m.bit_index, m.payload as u8);
    }
    out
}
