//! Independent oracle for the diameter sequence: iterated ambient-space
//! projections with exhaustive pair search, checked against the chart-based
//! implementation on random polytopes and ellipsoids.

use boolmodel::geom::{bounding_rectangle, diameter_sequence, ConvexBody};
use boolmodel::grains::haar_rotation;
use boolmodel::rng::{StreamKey, PURPOSE_GRAINS};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Projects the point set onto successive orthogonal complements, taking the
/// exact pairwise maximum at every stage. Works directly in the ambient
/// space with d x d projectors, unlike the implementation's chart bases.
fn oracle_sequence(points: &[DVector<f64>], d: usize) -> Vec<f64> {
    let mut proj = DMatrix::<f64>::identity(d, d);
    let mut values = Vec::with_capacity(d);
    for _ in 0..d {
        let imgs: Vec<DVector<f64>> = points.iter().map(|p| &proj * p).collect();
        let mut best = 0.0f64;
        let mut dir = DVector::<f64>::zeros(d);
        for i in 0..imgs.len() {
            for j in i + 1..imgs.len() {
                let diff = &imgs[i] - &imgs[j];
                let dist = diff.norm();
                if dist > best {
                    best = dist;
                    dir = diff;
                }
            }
        }
        values.push(best);
        if best > 0.0 {
            let u = dir / best;
            proj = (DMatrix::<f64>::identity(d, d) - &u * u.transpose()) * proj;
        }
    }
    values
}

fn random_polytope(d: usize, rng: &mut ChaCha12Rng) -> ConvexBody {
    loop {
        let n = rng.random_range(d + 1..d + 8);
        let scale = 0.5 + 2.5 * rng.random::<f64>();
        let vertices: Vec<DVector<f64>> = (0..n)
            .map(|_| {
                DVector::from_fn(d, |_, _| {
                    let g: f64 = StandardNormal.sample(rng);
                    scale * g
                })
            })
            .collect();
        if let Ok(body) = ConvexBody::polytope(vertices) {
            return body;
        }
    }
}

fn random_ellipsoid(d: usize, rng: &mut ChaCha12Rng) -> (ConvexBody, Vec<f64>) {
    let mut axes: Vec<f64> = (0..d).map(|_| 0.2 + 4.8 * rng.random::<f64>()).collect();
    axes.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let frame = haar_rotation(d, rng);
    let center = DVector::from_fn(d, |_, _| 10.0 * rng.random::<f64>() - 5.0);
    let body = ConvexBody::ellipsoid(center, DVector::from_vec(axes.clone()), frame).unwrap();
    (body, axes)
}

fn assert_close(a: f64, b: f64, scale: f64, ctx: &str) {
    assert!(
        (a - b).abs() <= 1e-9 * (1.0 + scale),
        "{ctx}: {a} vs {b}"
    );
}

#[test]
fn polytopes_match_projection_oracle() {
    let mut rng = StreamKey::new(90101, 0).rng(PURPOSE_GRAINS);
    for d in [2usize, 3] {
        for case in 0..150 {
            let body = random_polytope(d, &mut rng);
            let pts: Vec<DVector<f64>> = match body.kind() {
                boolmodel::geom::BodyKind::Polytope { vertices } => vertices.clone(),
                _ => unreachable!(),
            };
            let expect = oracle_sequence(&pts, d);
            let seq = diameter_sequence(&body).unwrap();
            let scale = expect[0];
            for k in 0..d {
                assert_close(seq.values[k], expect[k], scale, &format!("d={d} case={case} k={k}"));
            }
            for w in seq.values.windows(2) {
                assert!(w[0] >= w[1] - 1e-9 * (1.0 + scale));
            }
        }
    }
}

#[test]
fn ellipsoids_match_axis_oracle() {
    let mut rng = StreamKey::new(90102, 0).rng(PURPOSE_GRAINS);
    for d in 2..=5usize {
        for case in 0..60 {
            let (body, axes) = random_ellipsoid(d, &mut rng);
            let seq = diameter_sequence(&body).unwrap();
            for k in 0..d {
                assert_close(
                    seq.values[k],
                    2.0 * axes[k],
                    2.0 * axes[0],
                    &format!("d={d} case={case} k={k}"),
                );
            }
        }
    }
}

#[test]
fn rotation_equivariance_of_values() {
    let mut rng = StreamKey::new(90103, 0).rng(PURPOSE_GRAINS);
    for d in [2usize, 3] {
        for case in 0..60 {
            let body = random_polytope(d, &mut rng);
            let seq = diameter_sequence(&body).unwrap();
            let rot = haar_rotation(d, &mut rng);
            let rotated = body.rotate_about_center(&rot);
            let seq_r = diameter_sequence(&rotated).unwrap();
            let scale = seq.values[0];
            for k in 0..d {
                assert_close(
                    seq.values[k],
                    seq_r.values[k],
                    scale,
                    &format!("d={d} case={case} k={k}"),
                );
            }
        }
    }
}

#[test]
fn direction_frames_orthonormal() {
    let mut rng = StreamKey::new(90104, 0).rng(PURPOSE_GRAINS);
    for d in [2usize, 3] {
        for _ in 0..40 {
            let body = random_polytope(d, &mut rng);
            let seq = diameter_sequence(&body).unwrap();
            let q = &seq.directions;
            let dev = (q.transpose() * q - DMatrix::<f64>::identity(d, d)).norm();
            assert!(dev < 1e-9, "deviation {dev}");
        }
    }
}

#[test]
fn rectangle_contains_body_and_obeys_volume_bound() {
    let mut rng = StreamKey::new(90105, 0).rng(PURPOSE_GRAINS);
    for d in [2usize, 3] {
        let dfact: f64 = (1..=d).map(|k| k as f64).product();
        for case in 0..80 {
            let body = if case % 2 == 0 {
                random_polytope(d, &mut rng)
            } else {
                random_ellipsoid(d, &mut rng).0
            };
            let rect = bounding_rectangle(&body).unwrap();
            let vol = body.volume().unwrap();
            assert!(
                rect.volume() <= 2f64.powi(d as i32) * dfact * vol * (1.0 + 1e-9),
                "d={d} case={case}: {} > bound of {}",
                rect.volume(),
                2f64.powi(d as i32) * dfact * vol
            );
            // containment via support probes
            for _ in 0..40 {
                let mut u: DVector<f64> =
                    DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
                let n = u.norm();
                if n < 1e-9 {
                    continue;
                }
                u /= n;
                let slack = rect.support_value(&u) - body.support_value(&u);
                assert!(slack >= -1e-9, "d={d} case={case}: slack {slack}");
            }
        }
    }
}
