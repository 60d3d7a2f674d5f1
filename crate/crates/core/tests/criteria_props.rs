//! Property tests for the classifier: verdicts must be internally honest
//! (every reason re-checkable from the profile), dense laws are always
//! robust, and heavier tails never break robustness.

use boolmodel::criteria::{classify, threshold_sequence, Density, Robustness};
use boolmodel::grains::{Flag, TailProfile};
use proptest::prelude::*;

fn flag_strategy() -> impl Strategy<Value = Flag> {
    prop_oneof![Just(Flag::True), Just(Flag::False), Just(Flag::Unknown)]
}

fn profile_strategy() -> impl Strategy<Value = TailProfile> {
    (2usize..=5)
        .prop_flat_map(|d| {
            (
                prop::collection::vec((0.1f64..12.0, prop::bool::weighted(0.2)), d),
                flag_strategy(),
                flag_strategy(),
                flag_strategy(),
            )
        })
        .prop_map(|(raw, l1, l2, ld)| {
            let mut alphas: Vec<f64> = raw
                .iter()
                .map(|&(a, inf)| if inf { f64::INFINITY } else { a })
                .collect();
            alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d = alphas.len();
            TailProfile {
                d,
                alphas,
                vol_l1: l1,
                vol_l2: l2,
                diam_ld: ld,
            }
        })
}

proptest! {
    #[test]
    fn verdict_reasons_are_recheckable(profile in profile_strategy()) {
        let Ok(v) = classify(&profile) else { return Ok(()); };
        let d = profile.d as f64;
        for reason in &v.reasons {
            if let Some(k) = reason.strip_prefix("witness k=") {
                let k: usize = k.parse().unwrap();
                prop_assert!(profile.alphas[k - 1] < (2.0 * k as f64).min(d));
                prop_assert_eq!(v.robustness, Robustness::Robust);
            } else if reason == "vol-l2-gap" {
                prop_assert!(profile.vol_l2.is_true());
                for (i, &a) in profile.alphas.iter().enumerate() {
                    prop_assert!(a > 2.0 * (i + 1) as f64);
                }
                prop_assert_eq!(v.robustness, Robustness::NonRobust);
            } else if reason == "diam-in-ld" {
                prop_assert!(profile.diam_ld.is_true());
                prop_assert_eq!(v.robustness, Robustness::NonRobust);
            } else if reason == "dense-implies-robust" {
                prop_assert!(profile.vol_l1.is_false());
                prop_assert_eq!(v.robustness, Robustness::Robust);
            }
        }
    }

    #[test]
    fn dense_always_robust(profile in profile_strategy()) {
        let mut profile = profile;
        profile.vol_l1 = Flag::False;
        let Ok(v) = classify(&profile) else { return Ok(()); };
        prop_assert_eq!(v.density, Density::Dense);
        prop_assert_eq!(v.robustness, Robustness::Robust);
        prop_assert_eq!(v.reasons[0].as_str(), "dense-implies-robust");
    }

    #[test]
    fn heavier_tails_never_flip_robust_to_nonrobust(
        profile in profile_strategy(),
        idx in 0usize..5,
        shrink in 0.05f64..0.9,
    ) {
        let Ok(before) = classify(&profile) else { return Ok(()); };
        if before.robustness != Robustness::Robust {
            return Ok(());
        }
        let mut p = profile.clone();
        let i = idx % p.d;
        if p.alphas[i].is_finite() {
            p.alphas[i] *= 1.0 - shrink;
        } else {
            p.alphas[i] = 11.0;
        }
        p.alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let Ok(after) = classify(&p) else { return Ok(()); };
        prop_assert_ne!(after.robustness, Robustness::NonRobust);
    }

    #[test]
    fn threshold_sequences_increase(
        d in 2usize..=6,
        k in 1usize..=5,
        alpha in 0.2f64..8.0,
        eps in 0.0f64..0.5,
        f0 in 1.01f64..50.0,
        n in 1usize..6,
    ) {
        prop_assume!(k < d);
        if let Ok(seq) = threshold_sequence(d, k, alpha, eps, f0, n) {
            for w in seq.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            prop_assert!(seq[0] > 1.0);
        }
    }
}
