//! Randomized invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

use pure_shuffle::audit::audit_binary;
use pure_shuffle::binary::{BinaryParams, BinaryProtocol, ParamMode};
use pure_shuffle::dlap::{dlap_pmf, TruncDLapParams};
use pure_shuffle::harness::{run_protocol, run_trials, DatasetSpec, ExperimentConfig, ShuffleProtocol};
use pure_shuffle::real::{decompose, recompose, TaggedMessage};
use pure_shuffle::Pmf;

const P: u32 = 192;

fn close(a: &Float, b: &Float) -> bool {
    Float::with_val(P, a - b).abs() < Float::with_val(P, Float::i_exp(1, -150))
}

fn pmf_strategy() -> impl Strategy<Value = Pmf> {
    (-5i64..5, prop::collection::vec(0.0f64..1.0, 1..8))
        .prop_filter("nonzero", |(_, w)| w.iter().any(|&x| x > 0.0))
        .prop_map(|(offset, w)| {
            let weights = w.into_iter().map(|x| Float::with_val(P, x)).collect();
            Pmf::normalized(offset, weights, P).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes_and_keeps_mass(a in pmf_strategy(), b in pmf_strategy()) {
        let ab = a.convolve(&b);
        let ba = b.convolve(&a);
        prop_assert!(close(&ab.max_abs_diff(&ba), &Float::new(P)));
        prop_assert!(close(&ab.total_mass(), &Float::with_val(P, 1)));
        prop_assert_eq!(ab.offset(), a.offset() + b.offset());
    }

    #[test]
    fn n_fold_is_repeated_convolution(a in pmf_strategy(), k in 1u64..6) {
        let mut slow = a.clone();
        for _ in 1..k {
            slow = slow.convolve(&a);
        }
        prop_assert!(close(&a.n_fold(k).unwrap().max_abs_diff(&slow), &Float::new(P)));
    }

    #[test]
    fn tv_is_a_symmetric_fraction(a in pmf_strategy(), b in pmf_strategy()) {
        let ab = a.tv_distance(&b);
        prop_assert!(close(&ab, &b.tv_distance(&a)));
        prop_assert!(ab >= 0 && ab <= 1.000_000_001f64);
        prop_assert!(close(&a.tv_distance(&a), &Float::new(P)));
    }

    #[test]
    fn reflection_is_an_involution(a in pmf_strategy(), t in -10i64..10) {
        prop_assert!(close(&a.reflect(t).reflect(t).max_abs_diff(&a), &Float::new(P)));
    }

    #[test]
    fn dlap_is_symmetric(twice_mu in -20i64..20, s in 0.1f64..5.0, half in 1u64..12) {
        let w = 2 * half + (twice_mu.rem_euclid(2) as u64);
        let params = TruncDLapParams::new(twice_mu, s, w).unwrap();
        let pmf = dlap_pmf(&params, P);
        let (lo, hi) = params.support();
        for z in lo..=hi {
            prop_assert!(close(&pmf.mass(z), &pmf.mass(lo + hi - z)));
        }
    }

    #[test]
    fn decomposition_truncates(x in 0.0f64..=1.0, bits in 1u32..30) {
        let v = recompose(&decompose(x, bits).unwrap());
        let ulp = 0.5f64.powi(bits as i32);
        prop_assert!(v <= x);
        prop_assert!(x - v <= ulp);
    }

    #[test]
    fn tagged_messages_round_trip(j in 1u32..1 << 20, b in any::<bool>()) {
        let m = TaggedMessage { bit_index: j, payload: b };
        prop_assert_eq!(TaggedMessage::decode(m.encode()), m);
    }

    #[test]
    fn honest_binary_sum_is_exact(xs in prop::collection::vec(any::<bool>(), 1..40), seed in any::<u64>()) {
        let bp = BinaryParams::new(1.0, xs.len() as u64, 9, 1.0, 0.0, ParamMode::Engineering).unwrap();
        let proto = BinaryProtocol::new(bp).unwrap();
        let (_, y) = run_protocol(&xs, &proto, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(y, xs.iter().filter(|&&x| x).count() as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn audit_never_exceeds_its_upper_bound(n in 1u64..10, half in 0u64..4, s in 0.3f64..3.0, p in 0.01f64..0.99) {
        let bp = BinaryParams::new(1.0, n, 2 * half + 1, s, p, ParamMode::Engineering).unwrap();
        let rep = audit_binary(&bp).unwrap();
        prop_assert!(rep.feasible);
        prop_assert!(rep.epsilon_hat <= rep.epsilon_upper + 1e-12);
    }
}

#[test]
fn trials_are_reproducible_and_thread_independent() {
    let bp = BinaryParams::new(1.0, 40, 7, 0.875, 0.1, ParamMode::Engineering).unwrap();
    let proto = BinaryProtocol::new(bp).unwrap();
    let config = ExperimentConfig::new(300, 17, DatasetSpec::UniformRandom).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_trials(&config, &proto)).unwrap();
    let b = four.install(|| run_trials(&config, &proto)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, run_trials(&config, &proto).unwrap());
    assert_eq!(proto.name(), "binary");
}
