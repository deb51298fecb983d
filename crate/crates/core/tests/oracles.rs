//! Independent reference computations checked against the library.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

use pure_shuffle::audit::{audit_binary, transcript_dist, tv_accuracy_check};
use pure_shuffle::binary::{expected_output, randomizer_dist, BinaryParams, BinaryProtocol, ParamMode};
use pure_shuffle::dlap::{dlap_pmf, normalization, DlapSampler, TruncDLapParams};
use pure_shuffle::harness::{sample_statistic, Transcript};
use pure_shuffle::pmf::log_ratio;
use pure_shuffle::Pmf;

const P: u32 = 256;

fn tiny() -> Float {
    Float::with_val(P, Float::i_exp(1, -100))
}

fn figure2(n: u64) -> BinaryParams {
    BinaryParams::new(f64::INFINITY, n, 31, 0.5, 0.01, ParamMode::Engineering).unwrap()
}

fn empirical_tv(hist: &BTreeMap<i64, u64>, exact: &Pmf) -> f64 {
    let total = hist.values().sum::<u64>() as f64;
    let lo = exact.offset().min(*hist.keys().next().unwrap());
    let hi = exact.max_support().max(*hist.keys().last().unwrap());
    (lo..=hi)
        .map(|v| (*hist.get(&v).unwrap_or(&0) as f64 / total - exact.mass(v).to_f64()).abs())
        .sum::<f64>()
        / 2.0
}

#[test]
fn dlap_matches_direct_formula() {
    for (twice_mu, s, w) in [(31, 0.5, 31), (30, 2.0, 12), (7, 1.7, 7), (0, 3.0, 4)] {
        let params = TruncDLapParams::new(twice_mu, s, w).unwrap();
        let pmf = dlap_pmf(&params, P);
        let (lo, hi) = params.support();
        let mu = Float::with_val(P, twice_mu) / 2u32;
        let weights: Vec<Float> = (lo..=hi)
            .map(|z| {
                let dist = Float::with_val(P, Float::with_val(P, z) - &mu).abs();
                (-(dist / s)).exp()
            })
            .collect();
        let total = Float::with_val(P, Float::sum(weights.iter()));
        for (z, w) in (lo..=hi).zip(&weights) {
            let direct = Float::with_val(P, w / &total);
            assert!(Float::with_val(P, pmf.mass(z) - direct).abs() < tiny(), "z = {z}");
        }
        assert!(Float::with_val(P, normalization(&params, P).c_w - total).abs() < tiny());
    }
}

#[test]
fn figure2_component_shape() {
    let params = TruncDLapParams::centered(31, 0.5).unwrap();
    let nu = dlap_pmf(&params, P);
    assert_eq!((nu.offset(), nu.max_support()), (0, 31));
    for k in 0..=31 {
        assert!(Float::with_val(P, nu.mass(k) - nu.mass(31 - k)).abs() < tiny());
    }
    for r in nu.adjacent_log_ratios() {
        assert!((r.abs() - 2.0).abs() < 1e-12 || r.abs() < 1e-12, "ratio {r}");
    }
    let dist = randomizer_dist(&figure2(1), P).unwrap();
    let p = Float::with_val(P, 0.01f64);
    let expect = Float::with_val(P, 1 - &p) + p * nu.mass(15);
    assert!(Float::with_val(P, dist.r0.mass(15) - expect).abs() < tiny());
    assert!(Float::with_val(P, dist.r0.reflect(31).max_abs_diff(&dist.r1)) < tiny());
}

#[test]
fn dlap_sampler_frequencies() {
    let params = TruncDLapParams::centered(31, 0.5).unwrap();
    let exact = dlap_pmf(&params, P);
    let sampler = DlapSampler::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hist = BTreeMap::new();
    for _ in 0..1_000_000 {
        *hist.entry(sampler.sample(&mut rng)).or_insert(0u64) += 1;
    }
    assert!(empirical_tv(&hist, &exact) <= 0.005);
}

#[test]
fn randomizer_frequencies() {
    let bp = figure2(1);
    let dist = randomizer_dist(&bp, P).unwrap();
    let proto = BinaryProtocol::new(bp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (x, exact) in [(false, &dist.r0), (true, &dist.r1)] {
        let mut hist = BTreeMap::new();
        for _ in 0..1_000_000 {
            *hist.entry(proto.ones(x, &mut rng) as i64).or_insert(0u64) += 1;
        }
        assert!(empirical_tv(&hist, exact) <= 0.005);
    }
}

#[test]
fn figure2_transcripts_at_ten_users() {
    let bp = figure2(10);
    let report = audit_binary(&bp).unwrap();
    assert!(report.feasible && report.epsilon_hat.is_finite());
    let dist = randomizer_dist(&bp, P).unwrap();
    let exact = transcript_dist(&dist.r0, &dist.r1, 10, 4).unwrap();
    let dataset: Vec<bool> = (0..10).map(|u| u < 4).collect();
    let proto = BinaryProtocol::new(bp).unwrap();
    let hist = sample_statistic(&dataset, &proto, 200_000, 5, |t: &Transcript<bool>| t.count(&true) as i64).unwrap();
    assert!(empirical_tv(&hist, &exact) <= 0.01);
}

/// The audit against every adjacent pair, computed without the recursion.
#[test]
fn audit_matches_pairwise_scan() {
    for (n, d, s, p) in [(6, 5, 0.9, 0.2), (9, 7, 1.4, 0.05), (12, 3, 0.6, 0.5)] {
        let bp = BinaryParams::new(1.0, n, d, s, p, ParamMode::Engineering).unwrap();
        let dist = randomizer_dist(&bp, P).unwrap();
        let mut worst = 0.0f64;
        for c in 0..n {
            let a = transcript_dist(&dist.r0, &dist.r1, n, c).unwrap();
            let b = transcript_dist(&dist.r0, &dist.r1, n, c + 1).unwrap();
            for t in 0..=(n * d) as i64 {
                worst = worst.max(log_ratio(&a.mass(t), &b.mass(t)).abs());
            }
        }
        let rep = audit_binary(&bp).unwrap();
        assert!((rep.epsilon_hat - worst).abs() < 1e-12, "n = {n}: {} vs {worst}", rep.epsilon_hat);
        assert!(rep.epsilon_upper >= rep.epsilon_hat - 1e-12);
    }
}

/// Expectation of the analyzer output taken over the exact transcript law.
#[test]
fn expected_output_matches_transcript_law() {
    let bp = BinaryParams::new(1.0, 8, 7, 1.1, 0.3, ParamMode::Engineering).unwrap();
    let dist = randomizer_dist(&bp, P).unwrap();
    for c in 0..=8u64 {
        let law = transcript_dist(&dist.r0, &dist.r1, 8, c).unwrap();
        let mut mean = Float::new(P);
        for (t, m) in law.iter() {
            let y = Float::with_val(P, 8 + 2 * t - 8 * 7) / 2u32;
            mean += y * m;
        }
        let lib = expected_output(&bp, c, P).unwrap();
        assert!(Float::with_val(P, lib - mean).abs() < tiny());
    }
}

#[test]
fn tv_accuracy_extremes() {
    let n = 50;
    let a = Pmf::point_mass(0, P);
    let b = Pmf::point_mass(1, P);
    let ceiling = (n as f64).sqrt() / (8.0 * 2f64.sqrt());
    let same = tv_accuracy_check(&a, &a, n, ceiling, 1e-12);
    assert!((same.bound - ceiling).abs() < 1e-12 && same.holds);
    let apart = tv_accuracy_check(&a, &b, n, 0.0, 0.0);
    assert_eq!(apart.bound, 0.0);
    assert!(apart.holds);
    assert!(!tv_accuracy_check(&a, &a, n, 0.5 * ceiling, 0.0).holds);
}
