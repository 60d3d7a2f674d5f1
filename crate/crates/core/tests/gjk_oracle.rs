//! Ground-truth oracle for GJK: pairs are constructed with a known exact
//! gap (supporting-slab translation) or a known common point, covering all
//! body-kind combinations in d = 2..4.

use boolmodel::geom::{proximity, ConvexBody, GjkOptions, Proximity};
use boolmodel::grains::haar_rotation;
use boolmodel::rng::{StreamKey, PURPOSE_GRAINS};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_body(d: usize, rng: &mut ChaCha12Rng) -> ConvexBody {
    let center = DVector::from_fn(d, |_, _| 4.0 * rng.random::<f64>() - 2.0);
    match rng.random_range(0..3u32) {
        0 => ConvexBody::ball(center, 0.3 + 2.0 * rng.random::<f64>()).unwrap(),
        1 => {
            let mut axes: Vec<f64> = (0..d).map(|_| 0.3 + 2.5 * rng.random::<f64>()).collect();
            axes.sort_by(|a, b| b.partial_cmp(a).unwrap());
            ConvexBody::ellipsoid(center, DVector::from_vec(axes), haar_rotation(d, rng)).unwrap()
        }
        _ => loop {
            let n = rng.random_range(d + 1..d + 7);
            let vertices: Vec<DVector<f64>> = (0..n)
                .map(|_| {
                    &center
                        + DVector::from_fn(d, |_, _| {
                            let g: f64 = StandardNormal.sample(rng);
                            1.5 * g
                        })
                })
                .collect();
            if let Ok(b) = ConvexBody::polytope(vertices) {
                break b;
            }
        },
    }
}

fn unit_dir(d: usize, rng: &mut ChaCha12Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Translates `b` so that the supporting hyperplanes of `a` (direction `u`)
/// and `b` (direction `-u`) are exactly `gap` apart; the two support points
/// realize that distance, so the true gap equals `gap`.
fn place_separated(a: &ConvexBody, b: &ConvexBody, u: &DVector<f64>, gap: f64) -> ConvexBody {
    let sa = a.support(u).unwrap();
    let sb = b.support(&(-u)).unwrap();
    let shift = &sa - &sb + u * gap;
    b.translate(&shift)
}

/// Translates `b` so that both bodies contain `a`'s center.
fn place_intersecting(a: &ConvexBody, b: &ConvexBody, rng: &mut ChaCha12Rng) -> ConvexBody {
    // shrink toward b's center to pick a strictly interior point of b
    let t = 0.9 * rng.random::<f64>();
    let inner = b.center() + (b.support(&unit_dir(a.dim(), rng)).unwrap() - b.center()) * t;
    let shift = a.center() - inner;
    b.translate(&shift)
}

#[test]
fn separated_pairs_certified() {
    let mut rng = StreamKey::new(70201, 0).rng(PURPOSE_GRAINS);
    let opts = GjkOptions::default();
    let mut misses = 0u32;
    let total = 5000;
    for case in 0..total {
        let d = 2 + (case % 3) as usize;
        let a = random_body(d, &mut rng);
        let b = random_body(d, &mut rng);
        let u = unit_dir(d, &mut rng);
        // log-uniform gaps from just above the excluded band up to 10
        let gap = 10f64.powf(-6.0 + 7.0 * rng.random::<f64>());
        let b = place_separated(&a, &b, &u, gap);
        match proximity(&a, &b, &opts) {
            Ok(Proximity::Separated { gap_lower }) => {
                assert!(
                    gap_lower <= gap * (1.0 + 1e-7) + 1e-9,
                    "case {case}: certified lower bound {gap_lower} exceeds true gap {gap}"
                );
                assert!(gap_lower > 0.0);
            }
            _ => misses += 1,
        }
    }
    assert!(
        (misses as f64) < 0.001 * total as f64,
        "{misses} of {total} separated pairs misclassified"
    );
}

#[test]
fn intersecting_pairs_detected() {
    let mut rng = StreamKey::new(70202, 0).rng(PURPOSE_GRAINS);
    let opts = GjkOptions::default();
    let mut misses = 0u32;
    let total = 5000;
    for case in 0..total {
        let d = 2 + (case % 3) as usize;
        let a = random_body(d, &mut rng);
        let b = random_body(d, &mut rng);
        let b = place_intersecting(&a, &b, &mut rng);
        match proximity(&a, &b, &opts) {
            Ok(Proximity::Intersecting) => {}
            _ => misses += 1,
        }
    }
    assert!(
        (misses as f64) < 0.001 * total as f64,
        "{misses} of {total} intersecting pairs misclassified"
    );
}

#[test]
fn verdict_symmetric() {
    let mut rng = StreamKey::new(70203, 0).rng(PURPOSE_GRAINS);
    let opts = GjkOptions::default();
    for case in 0..300 {
        let d = 2 + (case % 3) as usize;
        let a = random_body(d, &mut rng);
        let b = random_body(d, &mut rng);
        let ab = matches!(proximity(&a, &b, &opts), Ok(Proximity::Intersecting));
        let ba = matches!(proximity(&b, &a, &opts), Ok(Proximity::Intersecting));
        assert_eq!(ab, ba, "case {case}");
    }
}

#[test]
fn reflexive_intersection() {
    let mut rng = StreamKey::new(70204, 0).rng(PURPOSE_GRAINS);
    let opts = GjkOptions::default();
    for case in 0..120 {
        let d = 2 + (case % 3) as usize;
        let a = random_body(d, &mut rng);
        assert!(
            matches!(proximity(&a, &a, &opts), Ok(Proximity::Intersecting)),
            "case {case}"
        );
    }
}
