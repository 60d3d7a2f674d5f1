//! Monte Carlo cross-checks for exact volumes: hit-or-miss sampling in the
//! axis-aligned bounding box against the analytic and hull formulas.

use boolmodel::geom::ConvexBody;
use boolmodel::grains::haar_rotation;
use boolmodel::rng::{StreamKey, PURPOSE_GRAINS};
use nalgebra::DVector;
use rand::Rng;

fn mc_volume(body: &ConvexBody, n: usize, rng: &mut rand_chacha::ChaCha12Rng) -> (f64, f64) {
    let d = body.dim();
    let (lo, hi) = body.aabb();
    let box_vol: f64 = (0..d).map(|i| hi[i] - lo[i]).product();
    let mut hits = 0usize;
    let mut p = DVector::zeros(d);
    for _ in 0..n {
        for i in 0..d {
            p[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
        }
        if body.contains_point(&p, 1e-9) {
            hits += 1;
        }
    }
    let frac = hits as f64 / n as f64;
    let sigma = box_vol * (frac * (1.0 - frac) / n as f64).sqrt();
    (box_vol * frac, sigma)
}

#[test]
fn ellipsoid_area_matches_mc() {
    let mut rng = StreamKey::new(50301, 0).rng(PURPOSE_GRAINS);
    let frame = haar_rotation(2, &mut rng);
    let body = ConvexBody::ellipsoid(
        DVector::from_vec(vec![0.5, -0.25]),
        DVector::from_vec(vec![2.0, 1.0]),
        frame,
    )
    .unwrap();
    let exact = body.volume().unwrap();
    assert!((exact - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    let (mc, sigma) = mc_volume(&body, 400_000, &mut rng);
    assert!((mc - exact).abs() < 4.0 * sigma, "{mc} vs {exact} (sigma {sigma})");
}

#[test]
fn ball_volume_matches_mc_3d() {
    let mut rng = StreamKey::new(50302, 0).rng(PURPOSE_GRAINS);
    let body = ConvexBody::ball(DVector::zeros(3), 1.3).unwrap();
    let exact = body.volume().unwrap();
    let (mc, sigma) = mc_volume(&body, 300_000, &mut rng);
    assert!((mc - exact).abs() < 4.0 * sigma, "{mc} vs {exact} (sigma {sigma})");
}

#[test]
fn random_polytope_volumes_match_mc() {
    let mut rng = StreamKey::new(50303, 0).rng(PURPOSE_GRAINS);
    for d in [2usize, 3] {
        for case in 0..4 {
            let body = loop {
                let n = rng.random_range(d + 2..d + 9);
                let vertices: Vec<DVector<f64>> = (0..n)
                    .map(|_| DVector::from_fn(d, |_, _| 4.0 * rng.random::<f64>() - 2.0))
                    .collect();
                if let Ok(b) = ConvexBody::polytope(vertices) {
                    break b;
                }
            };
            let exact = body.volume().unwrap();
            let (mc, sigma) = mc_volume(&body, 150_000, &mut rng);
            assert!(
                (mc - exact).abs() < 4.0 * sigma.max(1e-4),
                "d={d} case={case}: {mc} vs {exact} (sigma {sigma})"
            );
        }
    }
}
