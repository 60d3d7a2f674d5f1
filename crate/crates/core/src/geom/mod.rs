//! Convex bodies in `R^d` and the exact geometry used everywhere else:
//! support functions, GJK proximity tests, volumes, diameter sequences and
//! diameter-aligned bounding rectangles.
//!
//! A body is one of three kinds. Balls and ellipsoids are given analytically,
//! polytopes as the convex hull of a vertex list in world coordinates. All
//! queries go through the support function, so the GJK machinery works
//! uniformly for every kind.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

mod diameter;
pub(crate) mod gjk;
mod hull;

pub use diameter::{bounding_rectangle, diameter_sequence, DiameterSequence};
pub use gjk::{intersects, intersects_with, proximity, GjkOptions, Proximity};

/// Default minimum interior-ball radius required of every body.
pub const EPS_MIN: f64 = 1e-3;

/// Frame orthonormality tolerance.
pub const FRAME_TOL: f64 = 1e-10;

/// Hard cap on the ambient dimension (fixed-size scratch buffers in GJK).
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GeomError {
    #[error("dimension {0} out of range (supported: 2..={MAX_DIM})")]
    BadDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("direction must be a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("semi-axis {index} must be positive, got {value}")]
    BadSemiAxis { index: usize, value: f64 },
    #[error("frame is not orthonormal (deviation {0:.3e})")]
    BadFrame(f64),
    #[error("polytope needs at least d+1 = {need} vertices, got {got}")]
    TooFewVertices { need: usize, got: usize },
    #[error("polytope is not full-dimensional (affine rank {rank} < {dim})")]
    Degenerate { rank: usize, dim: usize },
    #[error("body is too thin: interior ball of radius {required} missing (margin {found:.3e} in a sampled direction)")]
    TooThin { required: f64, found: f64 },
    #[error("gjk did not converge after {iterations} iterations; distance in [{lower:.3e}, {upper:.3e}]")]
    GjkStalled {
        iterations: u32,
        lower: f64,
        upper: f64,
    },
    #[error("exact polytope volume is only available for d in {{2,3}}, got d={0}")]
    VolumeUnsupported(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Ball {
        radius: f64,
    },
    /// Semi-axes sorted descending; columns of `frame` are the axis directions.
    Ellipsoid {
        semi_axes: DVector<f64>,
        frame: DMatrix<f64>,
    },
    /// Convex hull of the vertex list, stored in world coordinates.
    Polytope {
        vertices: Vec<DVector<f64>>,
    },
}

/// A convex grain. `center` is the reference point; it is guaranteed to lie
/// in the interior with an `EPS_MIN` ball around it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    center: DVector<f64>,
    kind: BodyKind,
}

impl ConvexBody {
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self, GeomError> {
        let body = ConvexBody {
            center,
            kind: BodyKind::Ball { radius },
        };
        body.validate(EPS_MIN)?;
        Ok(body)
    }

    /// Builds an ellipsoid from semi-axis lengths and an orthonormal frame
    /// whose columns are the corresponding axis directions. Axes are sorted
    /// descending (the frame columns are permuted along).
    pub fn ellipsoid(
        center: DVector<f64>,
        semi_axes: DVector<f64>,
        frame: DMatrix<f64>,
    ) -> Result<Self, GeomError> {
        let d = center.len();
        if semi_axes.len() != d || frame.nrows() != d || frame.ncols() != d {
            return Err(GeomError::DimensionMismatch(semi_axes.len(), d));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| semi_axes[j].partial_cmp(&semi_axes[i]).unwrap_or(std::cmp::Ordering::Equal));
        let sorted = DVector::from_fn(d, |k, _| semi_axes[order[k]]);
        let permuted = DMatrix::from_fn(d, d, |r, k| frame[(r, order[k])]);
        let body = ConvexBody {
            center,
            kind: BodyKind::Ellipsoid {
                semi_axes: sorted,
                frame: permuted,
            },
        };
        body.validate(EPS_MIN)?;
        Ok(body)
    }

    /// Convex hull of `vertices`; the reference point is the vertex centroid.
    pub fn polytope(vertices: Vec<DVector<f64>>) -> Result<Self, GeomError> {
        let d = vertices.first().map(|v| v.len()).unwrap_or(0);
        let mut center = DVector::zeros(d);
        for v in &vertices {
            if v.len() != d {
                return Err(GeomError::DimensionMismatch(v.len(), d));
            }
            center += v;
        }
        center /= vertices.len().max(1) as f64;
        let body = ConvexBody {
            center,
            kind: BodyKind::Polytope { vertices },
        };
        body.validate(EPS_MIN)?;
        Ok(body)
    }

    /// Same as [`ConvexBody::polytope`] but with an explicit interior
    /// reference point.
    pub fn polytope_with_center(
        vertices: Vec<DVector<f64>>,
        center: DVector<f64>,
    ) -> Result<Self, GeomError> {
        let body = ConvexBody {
            center,
            kind: BodyKind::Polytope { vertices },
        };
        body.validate(EPS_MIN)?;
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// Checks the structural invariants: finite coordinates, orthonormal
    /// frame, full-dimensional vertex set, and an interior ball of radius
    /// `eps_min` around the reference point. The interior check compares the
    /// support margin `h(u) - <center,u>` against `eps_min` in `2d` fixed
    /// pseudo-random directions (exact for balls and ellipsoids).
    pub fn validate(&self, eps_min: f64) -> Result<(), GeomError> {
        let d = self.dim();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(GeomError::BadDimension(d));
        }
        if !self.center.iter().all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        match &self.kind {
            BodyKind::Ball { radius } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(GeomError::BadRadius(*radius));
                }
                if *radius < eps_min {
                    return Err(GeomError::TooThin {
                        required: eps_min,
                        found: *radius,
                    });
                }
            }
            BodyKind::Ellipsoid { semi_axes, frame } => {
                for (i, a) in semi_axes.iter().enumerate() {
                    if !a.is_finite() || *a <= 0.0 {
                        return Err(GeomError::BadSemiAxis { index: i, value: *a });
                    }
                }
                let dev = (frame.transpose() * frame - DMatrix::identity(d, d)).abs().max();
                if dev > FRAME_TOL {
                    return Err(GeomError::BadFrame(dev));
                }
                let a_min = semi_axes.min();
                if a_min < eps_min {
                    return Err(GeomError::TooThin {
                        required: eps_min,
                        found: a_min,
                    });
                }
            }
            BodyKind::Polytope { vertices } => {
                if vertices.len() < d + 1 {
                    return Err(GeomError::TooFewVertices {
                        need: d + 1,
                        got: vertices.len(),
                    });
                }
                if vertices
                    .iter()
                    .any(|v| !v.iter().all(|x| x.is_finite()))
                {
                    return Err(GeomError::NonFinite);
                }
                let rank = affine_rank(vertices);
                if rank < d {
                    return Err(GeomError::Degenerate { rank, dim: d });
                }
                for u in probe_directions(d) {
                    let margin = self.support_value(&u) - self.center.dot(&u);
                    if margin < eps_min {
                        return Err(GeomError::TooThin {
                            required: eps_min,
                            found: margin,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Support point: the maximizer of `<x, dir>` over the body. `dir` must
    /// be a unit vector within 1e-9. Polytope ties are broken by picking the
    /// lexicographically largest vertex.
    pub fn support(&self, dir: &DVector<f64>) -> Result<DVector<f64>, GeomError> {
        if dir.len() != self.dim() {
            return Err(GeomError::DimensionMismatch(dir.len(), self.dim()));
        }
        let n = dir.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(GeomError::NotUnit(n));
        }
        Ok(self.support_point(dir))
    }

    fn support_point(&self, dir: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            BodyKind::Ball { radius } => &self.center + dir * *radius,
            BodyKind::Ellipsoid { semi_axes, frame } => {
                let v = frame.transpose() * dir;
                let aw = semi_axes.component_mul(&v);
                let norm = aw.norm();
                if norm == 0.0 {
                    return self.center.clone();
                }
                let s = semi_axes.component_mul(&aw) / norm;
                &self.center + frame * s
            }
            BodyKind::Polytope { vertices } => {
                let mut best = &vertices[0];
                let mut best_dot = best.dot(dir);
                for v in &vertices[1..] {
                    let dot = v.dot(dir);
                    let tie = 1e-12 * (1.0 + best_dot.abs());
                    if dot > best_dot + tie {
                        best = v;
                        best_dot = dot;
                    } else if (dot - best_dot).abs() <= tie && lex_greater(v, best) {
                        best = v;
                    }
                }
                best.clone()
            }
        }
    }

    /// Support value `h(dir) = max <x, dir>`; `dir` need not be unit.
    pub fn support_value(&self, dir: &DVector<f64>) -> f64 {
        self.support_point(dir).dot(dir)
    }

    pub fn translate(&self, shift: &DVector<f64>) -> ConvexBody {
        let kind = match &self.kind {
            BodyKind::Ball { radius } => BodyKind::Ball { radius: *radius },
            BodyKind::Ellipsoid { semi_axes, frame } => BodyKind::Ellipsoid {
                semi_axes: semi_axes.clone(),
                frame: frame.clone(),
            },
            BodyKind::Polytope { vertices } => BodyKind::Polytope {
                vertices: vertices.iter().map(|v| v + shift).collect(),
            },
        };
        ConvexBody {
            center: &self.center + shift,
            kind,
        }
    }

    /// Rotates the body about its reference point by the rotation `q`.
    pub fn rotate_about_center(&self, q: &DMatrix<f64>) -> ConvexBody {
        let kind = match &self.kind {
            BodyKind::Ball { radius } => BodyKind::Ball { radius: *radius },
            BodyKind::Ellipsoid { semi_axes, frame } => BodyKind::Ellipsoid {
                semi_axes: semi_axes.clone(),
                frame: q * frame,
            },
            BodyKind::Polytope { vertices } => BodyKind::Polytope {
                vertices: vertices
                    .iter()
                    .map(|v| &self.center + q * (v - &self.center))
                    .collect(),
            },
        };
        ConvexBody {
            center: self.center.clone(),
            kind,
        }
    }

    /// Axis-aligned bounding box of the body itself.
    pub fn aabb(&self) -> (DVector<f64>, DVector<f64>) {
        let d = self.dim();
        match &self.kind {
            BodyKind::Ball { radius } => (
                self.center.map(|c| c - radius),
                self.center.map(|c| c + radius),
            ),
            BodyKind::Ellipsoid { semi_axes, frame } => {
                // half-width along axis j is |diag(a) Q^T e_j|
                let mut lo = DVector::zeros(d);
                let mut hi = DVector::zeros(d);
                for j in 0..d {
                    let mut s = 0.0;
                    for i in 0..d {
                        let t = semi_axes[i] * frame[(j, i)];
                        s += t * t;
                    }
                    let w = s.sqrt();
                    lo[j] = self.center[j] - w;
                    hi[j] = self.center[j] + w;
                }
                (lo, hi)
            }
            BodyKind::Polytope { vertices } => {
                let mut lo = vertices[0].clone();
                let mut hi = vertices[0].clone();
                for v in &vertices[1..] {
                    for i in 0..d {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Point membership with tolerance `tol` (distance to the body at most
    /// `tol` counts as inside). Analytic for balls and ellipsoids, GJK
    /// distance for polytopes.
    pub fn contains_point(&self, point: &DVector<f64>, tol: f64) -> bool {
        match &self.kind {
            BodyKind::Ball { radius } => (point - &self.center).norm() <= radius + tol,
            BodyKind::Ellipsoid { semi_axes, frame } => {
                let local = frame.transpose() * (point - &self.center);
                let mut s = 0.0;
                for i in 0..semi_axes.len() {
                    let t = local[i] / semi_axes[i];
                    s += t * t;
                }
                // exact test is s <= 1; allow a tol-ball around the boundary
                s.sqrt() <= 1.0 + tol / semi_axes.min()
            }
            BodyKind::Polytope { .. } => gjk::point_in_body(self, point, tol),
        }
    }

    /// Exact Lebesgue volume. Balls and ellipsoids in any dimension,
    /// polytopes for d in {2,3} (convex hull plus fan triangulation).
    pub fn volume(&self) -> Result<f64, GeomError> {
        let d = self.dim();
        match &self.kind {
            BodyKind::Ball { radius } => Ok(unit_ball_volume(d) * radius.powi(d as i32)),
            BodyKind::Ellipsoid { semi_axes, .. } => {
                Ok(unit_ball_volume(d) * semi_axes.iter().product::<f64>())
            }
            BodyKind::Polytope { vertices } => match d {
                2 => Ok(hull::hull_area_2d(vertices)),
                3 => hull::hull_volume_3d(vertices),
                _ => Err(GeomError::VolumeUnsupported(d)),
            },
        }
    }

    pub fn to_doc(&self) -> BodyDoc {
        match &self.kind {
            BodyKind::Ball { radius } => BodyDoc::Ball {
                center: self.center.iter().copied().collect(),
                radius: *radius,
            },
            BodyKind::Ellipsoid { semi_axes, frame } => BodyDoc::Ellipsoid {
                center: self.center.iter().copied().collect(),
                semi_axes: semi_axes.iter().copied().collect(),
                frame: (0..frame.nrows())
                    .map(|r| (0..frame.ncols()).map(|c| frame[(r, c)]).collect())
                    .collect(),
            },
            BodyKind::Polytope { vertices } => BodyDoc::Polytope {
                vertices: vertices
                    .iter()
                    .map(|v| v.iter().copied().collect())
                    .collect(),
                center: Some(self.center.iter().copied().collect()),
            },
        }
    }

    pub fn from_doc(doc: &BodyDoc) -> Result<Self, GeomError> {
        match doc {
            BodyDoc::Ball { center, radius } => {
                ConvexBody::ball(DVector::from_row_slice(center), *radius)
            }
            BodyDoc::Ellipsoid {
                center,
                semi_axes,
                frame,
            } => {
                let d = center.len();
                if frame.len() != d || frame.iter().any(|row| row.len() != d) {
                    return Err(GeomError::DimensionMismatch(frame.len(), d));
                }
                let m = DMatrix::from_fn(d, d, |r, c| frame[r][c]);
                ConvexBody::ellipsoid(
                    DVector::from_row_slice(center),
                    DVector::from_row_slice(semi_axes),
                    m,
                )
            }
            BodyDoc::Polytope { vertices, center } => {
                let verts: Vec<DVector<f64>> = vertices
                    .iter()
                    .map(|v| DVector::from_row_slice(v))
                    .collect();
                match center {
                    Some(c) => {
                        ConvexBody::polytope_with_center(verts, DVector::from_row_slice(c))
                    }
                    None => ConvexBody::polytope(verts),
                }
            }
        }
    }
}

/// Serializable document form of a body (JSON and TOML both work).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodyDoc {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
        /// Row-major rotation matrix whose columns are the axis directions.
        frame: Vec<Vec<f64>>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

/// A box aligned with the diameter directions of a body, centered at its
/// reference point. `half_lengths` are sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedRectangle {
    pub center: DVector<f64>,
    /// Columns are the (orthonormal) diameter directions.
    pub frame: DMatrix<f64>,
    pub half_lengths: Vec<f64>,
}

impl OrientedRectangle {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        self.half_lengths.iter().map(|h| 2.0 * h).product()
    }

    pub fn support_value(&self, dir: &DVector<f64>) -> f64 {
        let mut s = self.center.dot(dir);
        for (j, h) in self.half_lengths.iter().enumerate() {
            let mut a = 0.0;
            for i in 0..self.center.len() {
                a += self.frame[(i, j)] * dir[i];
            }
            s += h * a.abs();
        }
        s
    }

    pub fn aabb(&self) -> (DVector<f64>, DVector<f64>) {
        let d = self.dim();
        let mut lo = self.center.clone();
        let mut hi = self.center.clone();
        for i in 0..d {
            let mut w = 0.0;
            for (j, h) in self.half_lengths.iter().enumerate() {
                w += h * self.frame[(i, j)].abs();
            }
            lo[i] -= w;
            hi[i] += w;
        }
        (lo, hi)
    }
}

/// Volume of the unit ball in `R^d` via the two-step recursion
/// `kappa_d = kappa_{d-2} * 2 pi / d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

fn lex_greater(a: &DVector<f64>, b: &DVector<f64>) -> bool {
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

fn affine_rank(vertices: &[DVector<f64>]) -> usize {
    let d = vertices[0].len();
    let n = vertices.len() - 1;
    let mut m = DMatrix::zeros(d, n);
    let mut scale: f64 = 0.0;
    for (j, v) in vertices[1..].iter().enumerate() {
        let e = v - &vertices[0];
        scale = scale.max(e.amax());
        m.set_column(j, &e);
    }
    if scale == 0.0 {
        return 0;
    }
    m.rank(1e-9 * scale)
}

/// 2d deterministic pseudo-random unit directions for the interior check.
fn probe_directions(d: usize) -> Vec<DVector<f64>> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x0b0d_15ea_5e1f_0001);
    let mut dirs = Vec::with_capacity(2 * d);
    while dirs.len() < 2 * d {
        let v: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let n = v.norm();
        if n > 1e-6 {
            dirs.push(v / n);
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_row_slice(&[x, y])
    }

    #[test]
    fn ball_support_is_center_plus_radius() {
        let b = ConvexBody::ball(DVector::zeros(3), 1.0).unwrap();
        let dir = DVector::from_row_slice(&[1.0, 0.0, 0.0]);
        let p = b.support(&dir).unwrap();
        assert!((p - DVector::from_row_slice(&[1.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn ellipsoid_support_axis_aligned() {
        let b = ConvexBody::ellipsoid(
            DVector::zeros(2),
            DVector::from_row_slice(&[2.0, 1.0]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let p = b.support(&vec2(1.0, 0.0)).unwrap();
        assert!((p - vec2(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn polytope_support_brute_force() {
        // rectangle [0,4]x[0,3]; direction (0.8, 0.6) picks (4,3)
        let verts = vec![
            vec2(0.0, 0.0),
            vec2(4.0, 0.0),
            vec2(0.0, 3.0),
            vec2(4.0, 3.0),
        ];
        let b = ConvexBody::polytope(verts.clone()).unwrap();
        let dir = vec2(0.8, 0.6);
        let p = b.support(&dir).unwrap();
        let best = verts
            .iter()
            .map(|v| v.dot(&dir))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((p.dot(&dir) - best).abs() < 1e-12);
        assert!((p - vec2(4.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn support_rejects_non_unit() {
        let b = ConvexBody::ball(DVector::zeros(2), 1.0).unwrap();
        assert!(matches!(
            b.support(&vec2(2.0, 0.0)),
            Err(GeomError::NotUnit(_))
        ));
    }

    #[test]
    fn degenerate_polytope_rejected() {
        let verts = vec![vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(2.0, 0.0)];
        assert!(matches!(
            ConvexBody::polytope(verts),
            Err(GeomError::Degenerate { .. })
        ));
    }

    #[test]
    fn thin_ball_rejected() {
        assert!(matches!(
            ConvexBody::ball(DVector::zeros(2), 1e-5),
            Err(GeomError::TooThin { .. })
        ));
    }

    #[test]
    fn volumes_exact() {
        let d2 = ConvexBody::ball(DVector::zeros(2), 1.0).unwrap();
        assert!((d2.volume().unwrap() - std::f64::consts::PI).abs() < 1e-12);
        let e = ConvexBody::ellipsoid(
            DVector::zeros(2),
            DVector::from_row_slice(&[2.0, 1.0]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        assert!((e.volume().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        // right triangle with legs 3 and 4
        let t = ConvexBody::polytope(vec![vec2(0.0, 0.0), vec2(3.0, 0.0), vec2(0.0, 4.0)]).unwrap();
        assert!((t.volume().unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volume_table() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn body_doc_roundtrip() {
        let b = ConvexBody::ellipsoid(
            vec2(1.0, -2.0),
            DVector::from_row_slice(&[3.0, 0.5]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let doc = b.to_doc();
        let back = ConvexBody::from_doc(&doc).unwrap();
        assert_eq!(b, back);
    }
}
