//! Diameter sequences by iterated orthogonal projection.
//!
//! The first diameter of a body is its usual diameter. Projecting the body
//! onto the hyperplane orthogonal to a maximizing direction and taking the
//! diameter again yields the second diameter, and so on down to dimension
//! one. Directions are reported in ambient coordinates, lifted back from the
//! projection charts, so they stay pairwise orthogonal.

use nalgebra::{DMatrix, DVector};

use super::{BodyKind, ConvexBody, GeomError, OrientedRectangle};

#[derive(Debug, Clone)]
pub struct DiameterSequence {
    /// Non-increasing diameters D(1) >= ... >= D(d).
    pub values: Vec<f64>,
    /// Columns are the orthonormal ambient directions of the diameters.
    pub directions: DMatrix<f64>,
}

/// Computes the full diameter sequence of a body.
///
/// Polytopes use the exact pairwise-vertex search in a shrinking coordinate
/// chart. Ellipsoids reduce analytically: the diameter is the largest axis,
/// and projecting along a principal axis drops exactly that axis, so the
/// sequence is twice the sorted semi-axes with the frame columns as
/// directions. Ties between vertex pairs are broken by the lexicographically
/// largest sign-normalized difference vector, which keeps results
/// deterministic for symmetric bodies.
pub fn diameter_sequence(body: &ConvexBody) -> Result<DiameterSequence, GeomError> {
    let d = body.dim();
    match body.kind() {
        BodyKind::Ball { radius } => Ok(DiameterSequence {
            values: vec![2.0 * radius; d],
            directions: DMatrix::identity(d, d),
        }),
        BodyKind::Ellipsoid { semi_axes, frame } => {
            let mut directions = frame.clone();
            for j in 0..d {
                let mut col = directions.column_mut(j);
                if !sign_ok(col.as_slice()) {
                    col.neg_mut();
                }
            }
            Ok(DiameterSequence {
                values: semi_axes.iter().map(|a| 2.0 * a).collect(),
                directions,
            })
        }
        BodyKind::Polytope { vertices } => polytope_sequence(vertices, d),
    }
}

/// The diameter-aligned bounding rectangle: centered at the reference point,
/// frame given by the diameter directions, half-length `D(i)` along the i-th
/// direction. Any two points of the body differ by at most `D(i)` along
/// direction i, so the body is contained, and the volume is `2^d * prod D(i)`.
pub fn bounding_rectangle(body: &ConvexBody) -> Result<OrientedRectangle, GeomError> {
    let seq = diameter_sequence(body)?;
    Ok(OrientedRectangle {
        center: body.center().clone(),
        frame: seq.directions,
        half_lengths: seq.values,
    })
}

fn polytope_sequence(vertices: &[DVector<f64>], d: usize) -> Result<DiameterSequence, GeomError> {
    // chart coordinates of the projected vertex set; starts as the ambient set
    let mut coords: Vec<DVector<f64>> = vertices.to_vec();
    // ambient basis of the current chart (d x q, orthonormal columns)
    let mut basis = DMatrix::<f64>::identity(d, d);
    let mut values = Vec::with_capacity(d);
    let mut directions = DMatrix::<f64>::zeros(d, d);

    for step in 0..d {
        let q = d - step;
        if q == 1 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for x in &coords {
                lo = lo.min(x[0]);
                hi = hi.max(x[0]);
            }
            values.push(hi - lo);
            let mut p = basis.column(0).clone_owned();
            if !sign_ok(p.as_slice()) {
                p.neg_mut();
            }
            directions.set_column(step, &p);
            break;
        }

        let (i, j) = best_pair(&coords, &basis)?;
        let mut u = &coords[i] - &coords[j];
        let dist = u.norm();
        if dist <= 0.0 {
            // all projected points coincide; remaining diameters are zero
            for s in step..d {
                values.push(0.0);
                directions.set_column(s, &basis.column(s - step).clone_owned());
            }
            break;
        }
        u /= dist;
        let mut p = &basis * &u;
        if !sign_ok(p.as_slice()) {
            p.neg_mut();
            u.neg_mut();
        }
        values.push(dist);
        directions.set_column(step, &p);

        // orthonormal basis of the hyperplane orthogonal to u inside the chart
        let w = householder_complement(&u);
        coords = coords.iter().map(|x| w.transpose() * x).collect();
        basis = &basis * &w;
    }

    // floating point can produce tiny inversions; clamp them away
    for k in 1..values.len() {
        if values[k] > values[k - 1] {
            debug_assert!(values[k] - values[k - 1] <= 1e-9 * (1.0 + values[k - 1]));
            values[k] = values[k - 1];
        }
    }

    Ok(DiameterSequence { values, directions })
}

/// Farthest pair of chart points. Pairs within a relative band of the best
/// squared distance compete by the lexicographic order of their lifted,
/// sign-normalized difference vectors.
fn best_pair(coords: &[DVector<f64>], basis: &DMatrix<f64>) -> Result<(usize, usize), GeomError> {
    let n = coords.len();
    if n < 2 {
        return Err(GeomError::Degenerate {
            rank: 0,
            dim: basis.nrows(),
        });
    }
    let mut best_d2 = -1.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = (&coords[i] - &coords[j]).norm_squared();
            if d2 > best_d2 {
                best_d2 = d2;
            }
        }
    }
    let band = best_d2 * (1.0 - 1e-12);
    let mut winner: Option<((usize, usize), DVector<f64>)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = (&coords[i] - &coords[j]).norm_squared();
            if d2 < band {
                continue;
            }
            let mut lifted = basis * (&coords[i] - &coords[j]);
            if !sign_ok(lifted.as_slice()) {
                lifted.neg_mut();
            }
            match &winner {
                Some((_, key)) if !lex_greater_vec(&lifted, key) => {}
                _ => winner = Some(((i, j), lifted)),
            }
        }
    }
    Ok(winner.expect("non-empty candidate set").0)
}

/// Returns a q x (q-1) matrix with orthonormal columns spanning the
/// complement of the unit vector `u`, taken from a Householder reflection
/// that maps `u` onto the first coordinate axis.
fn householder_complement(u: &DVector<f64>) -> DMatrix<f64> {
    let q = u.len();
    let mut v = u.clone();
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += s; // |u| = 1
    let vn2 = v.norm_squared();
    let mut w = DMatrix::zeros(q, q - 1);
    for k in 0..q - 1 {
        // column k of the reflection applied to e_{k+1}
        let f = 2.0 * v[k + 1] / vn2;
        for r in 0..q {
            let e = if r == k + 1 { 1.0 } else { 0.0 };
            w[(r, k)] = e - f * v[r];
        }
    }
    w
}

fn sign_ok(x: &[f64]) -> bool {
    for &c in x {
        if c > 1e-12 {
            return true;
        }
        if c < -1e-12 {
            return false;
        }
    }
    true
}

fn lex_greater_vec(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for i in 0..a.len() {
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_row_slice(&[x, y])
    }

    #[test]
    fn ball_sequence_constant() {
        let b = ConvexBody::ball(DVector::zeros(3), 1.0).unwrap();
        let s = diameter_sequence(&b).unwrap();
        assert_eq!(s.values, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn rectangle_4_by_3() {
        // diagonal 5 is the diameter; the projection orthogonal to the
        // diagonal has extent 2 * (4*3) / 5 = 4.8
        let b = ConvexBody::polytope(vec![
            vec2(0.0, 0.0),
            vec2(4.0, 0.0),
            vec2(0.0, 3.0),
            vec2(4.0, 3.0),
        ])
        .unwrap();
        let s = diameter_sequence(&b).unwrap();
        assert!((s.values[0] - 5.0).abs() < 1e-12, "{:?}", s.values);
        assert!((s.values[1] - 4.8).abs() < 1e-12, "{:?}", s.values);
    }

    #[test]
    fn ellipsoid_sorted_axes() {
        let b = ConvexBody::ellipsoid(
            DVector::zeros(3),
            DVector::from_row_slice(&[3.0, 2.0, 1.0]),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let s = diameter_sequence(&b).unwrap();
        assert_eq!(s.values, vec![6.0, 4.0, 2.0]);
        for j in 0..3 {
            let col = s.directions.column(j);
            let mut e = DVector::zeros(3);
            e[j] = 1.0;
            assert!((col - e).norm() < 1e-12);
        }
    }

    #[test]
    fn directions_orthonormal() {
        let b = ConvexBody::polytope(vec![
            vec2(0.1, 0.0),
            vec2(4.0, 0.3),
            vec2(-0.5, 3.0),
            vec2(3.5, 2.8),
            vec2(2.0, -1.0),
        ])
        .unwrap();
        let s = diameter_sequence(&b).unwrap();
        let g = s.directions.transpose() * &s.directions;
        assert!((g - DMatrix::identity(2, 2)).abs().max() < 1e-9);
        assert!(s.values[0] >= s.values[1]);
    }

    #[test]
    fn bounding_rectangle_ball() {
        let b = ConvexBody::ball(DVector::zeros(2), 1.0).unwrap();
        let r = bounding_rectangle(&b).unwrap();
        assert_eq!(r.half_lengths, vec![2.0, 2.0]);
        assert!((r.volume() - 16.0).abs() < 1e-12);
        // 16 <= 2^2 * 2! * pi
        assert!(r.volume() <= 4.0 * 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn householder_complement_orthonormal() {
        let u = DVector::from_row_slice(&[0.6, 0.8, 0.0]);
        let w = householder_complement(&u);
        let g = w.transpose() * &w;
        assert!((g - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert!((w.transpose() * u).abs().max() < 1e-12);
    }
}
