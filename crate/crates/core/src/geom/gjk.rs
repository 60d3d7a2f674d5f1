//! GJK proximity queries on the Minkowski difference of two support maps.
//!
//! The solver tracks a simplex of difference-support points, the point of the
//! simplex hull closest to the origin, and a certified lower bound on the
//! separation extracted from each support call. A pair counts as
//! intersecting when the distance between the bodies is at most `gap_tol`;
//! pairs inside the unresolved band around the tolerance are classified as
//! intersecting (conservative for percolation statistics).

use super::{BodyKind, ConvexBody, GeomError, MAX_DIM};

#[derive(Debug, Clone, Copy)]
pub struct GjkOptions {
    /// Bodies at distance <= gap_tol count as intersecting.
    pub gap_tol: f64,
    pub max_iter: u32,
}

impl Default for GjkOptions {
    fn default() -> Self {
        GjkOptions {
            gap_tol: 1e-9,
            max_iter: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proximity {
    Intersecting,
    /// Certified separation: distance > `gap_lower` >= gap_tol.
    Separated { gap_lower: f64 },
}

/// Anything GJK can query: a support point in an arbitrary direction plus a
/// seed point used for the initial search direction.
pub(crate) trait SupportMap {
    fn dim(&self) -> usize;
    /// `dir` has unit norm except possibly on the first call.
    fn support_into(&self, dir: &[f64], out: &mut [f64]);
    fn seed_into(&self, out: &mut [f64]);
}

impl SupportMap for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }

    fn support_into(&self, dir: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let c = self.center().as_slice();
        match self.kind() {
            BodyKind::Ball { radius } => {
                let n = norm(dir, d);
                if n == 0.0 {
                    out[..d].copy_from_slice(c);
                    return;
                }
                for i in 0..d {
                    out[i] = c[i] + radius * dir[i] / n;
                }
            }
            BodyKind::Ellipsoid { semi_axes, frame } => {
                let q = frame.as_slice(); // column-major
                let a = semi_axes.as_slice();
                let mut aw = [0.0f64; MAX_DIM];
                let mut n2 = 0.0;
                for j in 0..d {
                    let col = &q[j * d..j * d + d];
                    let mut v = 0.0;
                    for i in 0..d {
                        v += col[i] * dir[i];
                    }
                    let t = a[j] * v;
                    aw[j] = t;
                    n2 += t * t;
                }
                let n = n2.sqrt();
                out[..d].copy_from_slice(c);
                if n == 0.0 {
                    return;
                }
                for j in 0..d {
                    let s = a[j] * aw[j] / n;
                    let col = &q[j * d..j * d + d];
                    for i in 0..d {
                        out[i] += col[i] * s;
                    }
                }
            }
            BodyKind::Polytope { vertices } => {
                let mut best = 0usize;
                let mut best_dot = dot(vertices[0].as_slice(), dir, d);
                for (k, v) in vertices.iter().enumerate().skip(1) {
                    let dv = dot(v.as_slice(), dir, d);
                    let tie = 1e-12 * (1.0 + best_dot.abs());
                    if dv > best_dot + tie {
                        best = k;
                        best_dot = dv;
                    } else if (dv - best_dot).abs() <= tie
                        && lex_greater(v.as_slice(), vertices[best].as_slice(), d)
                    {
                        best = k;
                    }
                }
                out[..d].copy_from_slice(vertices[best].as_slice());
            }
        }
    }

    fn seed_into(&self, out: &mut [f64]) {
        out[..self.dim()].copy_from_slice(self.center().as_slice());
    }
}

/// Axis-aligned box as a support map (window face slabs, probe cells).
pub(crate) struct BoxSupport {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
    pub d: usize,
}

impl SupportMap for BoxSupport {
    fn dim(&self) -> usize {
        self.d
    }

    fn support_into(&self, dir: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = if dir[i] >= 0.0 { self.hi[i] } else { self.lo[i] };
        }
    }

    fn seed_into(&self, out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = 0.5 * (self.lo[i] + self.hi[i]);
        }
    }
}

pub(crate) struct PointSupport {
    pub p: [f64; MAX_DIM],
    pub d: usize,
}

impl SupportMap for PointSupport {
    fn dim(&self) -> usize {
        self.d
    }

    fn support_into(&self, _dir: &[f64], out: &mut [f64]) {
        out[..self.d].copy_from_slice(&self.p[..self.d]);
    }

    fn seed_into(&self, out: &mut [f64]) {
        out[..self.d].copy_from_slice(&self.p[..self.d]);
    }
}

/// True iff the bodies are within `gap_tol` of each other (default options).
pub fn intersects(a: &ConvexBody, b: &ConvexBody) -> Result<bool, GeomError> {
    intersects_with(a, b, &GjkOptions::default())
}

pub fn intersects_with(
    a: &ConvexBody,
    b: &ConvexBody,
    opts: &GjkOptions,
) -> Result<bool, GeomError> {
    Ok(matches!(proximity(a, b, opts)?, Proximity::Intersecting))
}

pub fn proximity(
    a: &ConvexBody,
    b: &ConvexBody,
    opts: &GjkOptions,
) -> Result<Proximity, GeomError> {
    gjk_proximity(a, b, opts)
}

pub(crate) fn point_in_body(body: &ConvexBody, point: &nalgebra::DVector<f64>, tol: f64) -> bool {
    let d = body.dim();
    let mut p = [0.0f64; MAX_DIM];
    p[..d].copy_from_slice(point.as_slice());
    let probe = PointSupport { p, d };
    let opts = GjkOptions {
        gap_tol: tol.max(1e-12),
        max_iter: 128,
    };
    match gjk_proximity(body, &probe, &opts) {
        Ok(Proximity::Intersecting) => true,
        Ok(Proximity::Separated { .. }) => false,
        Err(GeomError::GjkStalled { upper, .. }) => upper <= tol,
        Err(_) => false,
    }
}

pub(crate) fn gjk_proximity<A, B>(a: &A, b: &B, opts: &GjkOptions) -> Result<Proximity, GeomError>
where
    A: SupportMap + ?Sized,
    B: SupportMap + ?Sized,
{
    let d = a.dim();
    if d != b.dim() {
        return Err(GeomError::DimensionMismatch(d, b.dim()));
    }
    if d > MAX_DIM {
        return Err(GeomError::BadDimension(d));
    }

    let mut dir = [0.0f64; MAX_DIM];
    {
        let mut sa = [0.0f64; MAX_DIM];
        let mut sb = [0.0f64; MAX_DIM];
        a.seed_into(&mut sa);
        b.seed_into(&mut sb);
        for i in 0..d {
            dir[i] = sa[i] - sb[i];
        }
        if norm(&dir, d) < 1e-300 {
            dir[0] = 1.0;
        }
    }

    let mut simplex = [[0.0f64; MAX_DIM]; MAX_DIM + 2];
    let mut w = [0.0f64; MAX_DIM];
    minkowski_support(a, b, &dir[..d], &mut w, d);
    simplex[0] = w;
    let mut n = 1usize;
    let mut v = w;
    let mut scale = 1.0 + linf(&w, d);
    let mut best_lower = f64::NEG_INFINITY;
    let mut prev_vnorm = f64::INFINITY;
    let mut stall = 0u32;

    for it in 1..=opts.max_iter {
        let tol = opts.gap_tol.max(1e-12 * scale);
        let vnorm = norm(&v, d);
        if vnorm <= tol {
            return Ok(Proximity::Intersecting);
        }
        for i in 0..d {
            dir[i] = -v[i] / vnorm;
        }
        minkowski_support(a, b, &dir[..d], &mut w, d);
        scale = scale.max(linf(&w, d));
        // <w, v/|v|> bounds the distance from below
        let lower = dot(&w, &v, d) / vnorm;
        if lower > best_lower {
            best_lower = lower;
        }
        if best_lower > tol {
            return Ok(Proximity::Separated {
                gap_lower: best_lower,
            });
        }
        if vnorm - lower <= 1e-12 * scale.max(vnorm) {
            // converged: distance pinned inside [lower, vnorm] with lower <= tol
            return Ok(Proximity::Intersecting);
        }
        let dup = (0..n).any(|i| linf_diff(&simplex[i], &w, d) <= 1e-14 * scale);
        if !dup && n < MAX_DIM + 2 {
            simplex[n] = w;
            n += 1;
        } else {
            stall += 1;
        }
        let (cp, mask) = closest_on_hull(&simplex, n, d);
        compact(&mut simplex, &mut n, mask);
        v = cp;
        let new_norm = norm(&v, d);
        if new_norm >= prev_vnorm * (1.0 - 1e-14) {
            stall += 1;
        } else {
            stall = 0;
        }
        prev_vnorm = new_norm;
        if stall >= 3 {
            return Err(GeomError::GjkStalled {
                iterations: it,
                lower: best_lower.max(0.0),
                upper: new_norm,
            });
        }
    }

    Err(GeomError::GjkStalled {
        iterations: opts.max_iter,
        lower: best_lower.max(0.0),
        upper: prev_vnorm,
    })
}

fn minkowski_support<A, B>(a: &A, b: &B, dir: &[f64], out: &mut [f64; MAX_DIM], d: usize)
where
    A: SupportMap + ?Sized,
    B: SupportMap + ?Sized,
{
    let mut neg = [0.0f64; MAX_DIM];
    for i in 0..d {
        neg[i] = -dir[i];
    }
    let mut sa = [0.0f64; MAX_DIM];
    let mut sb = [0.0f64; MAX_DIM];
    a.support_into(dir, &mut sa);
    b.support_into(&neg[..d], &mut sb);
    for i in 0..d {
        out[i] = sa[i] - sb[i];
    }
}

/// Closest point to the origin on the convex hull of `pts[..n]`, found by
/// enumerating every subset, solving the affine least-squares system on it
/// and keeping the best candidate with non-negative barycentric weights.
/// Returns the point and the bitmask of the supporting subset.
fn closest_on_hull(pts: &[[f64; MAX_DIM]], n: usize, d: usize) -> ([f64; MAX_DIM], u32) {
    let mut best_pt = [0.0f64; MAX_DIM];
    let mut best_mask = 0u32;
    let mut best_n2 = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let mut idx = [0usize; MAX_DIM + 2];
        let mut k = 0usize;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                idx[k] = i;
                k += 1;
            }
        }
        if k == 1 {
            let p = &pts[idx[0]];
            let n2 = dot(p, p, d);
            if n2 < best_n2 {
                best_n2 = n2;
                best_pt = *p;
                best_mask = mask;
            }
            continue;
        }
        let m = k - 1;
        let p0 = &pts[idx[0]];
        let mut e = [[0.0f64; MAX_DIM]; MAX_DIM + 1];
        for r in 0..m {
            for c in 0..d {
                e[r][c] = pts[idx[r + 1]][c] - p0[c];
            }
        }
        // augmented Gram system G x = -E^T p0
        let mut g = [[0.0f64; MAX_DIM + 2]; MAX_DIM + 1];
        let mut gscale = 0.0f64;
        for r in 0..m {
            for c in 0..m {
                g[r][c] = dot(&e[r], &e[c], d);
            }
            g[r][m] = -dot(&e[r], p0, d);
            gscale = gscale.max(g[r][r]);
        }
        if gscale <= 0.0 {
            continue;
        }
        let mut singular = false;
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if g[r][col].abs() > g[piv][col].abs() {
                    piv = r;
                }
            }
            if g[piv][col].abs() <= 1e-12 * gscale {
                singular = true;
                break;
            }
            g.swap(col, piv);
            for r in col + 1..m {
                let f = g[r][col] / g[col][col];
                for c in col..=m {
                    g[r][c] -= f * g[col][c];
                }
            }
        }
        if singular {
            continue;
        }
        let mut x = [0.0f64; MAX_DIM + 1];
        for r in (0..m).rev() {
            let mut s = g[r][m];
            for c in r + 1..m {
                s -= g[r][c] * x[c];
            }
            x[r] = s / g[r][r];
        }
        let mut lam0 = 1.0;
        let mut feasible = true;
        for r in 0..m {
            lam0 -= x[r];
            if x[r] < -1e-12 {
                feasible = false;
                break;
            }
        }
        if !feasible || lam0 < -1e-12 {
            continue;
        }
        let mut pt = [0.0f64; MAX_DIM];
        for c in 0..d {
            let mut s = p0[c] * lam0;
            for r in 0..m {
                s += x[r] * pts[idx[r + 1]][c];
            }
            pt[c] = s;
        }
        let n2 = dot(&pt, &pt, d);
        if n2 < best_n2 {
            best_n2 = n2;
            best_pt = pt;
            best_mask = mask;
        }
    }
    (best_pt, best_mask)
}

fn compact(simplex: &mut [[f64; MAX_DIM]; MAX_DIM + 2], n: &mut usize, mask: u32) {
    let mut k = 0usize;
    for i in 0..*n {
        if mask & (1 << i) != 0 {
            simplex[k] = simplex[i];
            k += 1;
        }
    }
    *n = k.max(1);
}

#[inline]
fn dot(a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn norm(a: &[f64], d: usize) -> f64 {
    dot(a, a, d).sqrt()
}

#[inline]
fn linf(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0f64;
    for i in 0..d {
        s = s.max(a[i].abs());
    }
    s
}

#[inline]
fn linf_diff(a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut s = 0.0f64;
    for i in 0..d {
        s = s.max((a[i] - b[i]).abs());
    }
    s
}

fn lex_greater(a: &[f64], b: &[f64], d: usize) -> bool {
    for i in 0..d {
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    false
}
