//! Exact polytope volume in dimensions 2 and 3.
//!
//! d=2: monotone-chain convex hull followed by the shoelace formula.
//! d=3: incremental convex hull (visible-face deletion, horizon re-facing)
//! followed by a signed fan from an interior point.

use nalgebra::DVector;

use super::GeomError;

pub fn hull_area_2d(vertices: &[DVector<f64>]) -> f64 {
    let mut pts: Vec<(f64, f64)> = vertices.iter().map(|v| (v[0], v[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }

    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };

    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    let hull = lower;
    let mut area2 = 0.0;
    for i in 0..hull.len() {
        let (x1, y1) = hull[i];
        let (x2, y2) = hull[(i + 1) % hull.len()];
        area2 += x1 * y2 - x2 * y1;
    }
    area2.abs() / 2.0
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    alive: bool,
}

pub fn hull_volume_3d(vertices: &[DVector<f64>]) -> Result<f64, GeomError> {
    let pts: Vec<[f64; 3]> = vertices.iter().map(|v| [v[0], v[1], v[2]]).collect();
    let n = pts.len();
    if n < 4 {
        return Err(GeomError::Degenerate { rank: 2, dim: 3 });
    }
    let mut scale = 0.0f64;
    for p in &pts {
        for c in p {
            scale = scale.max(c.abs());
        }
    }
    let eps = 1e-10 * (1.0 + scale);

    // initial tetrahedron: spread-out points
    let i0 = 0;
    let i1 = (0..n)
        .max_by(|&a, &b| {
            dist2(&pts[a], &pts[i0])
                .partial_cmp(&dist2(&pts[b], &pts[i0]))
                .unwrap()
        })
        .unwrap();
    let i2 = (0..n)
        .max_by(|&a, &b| {
            line_dist2(&pts[a], &pts[i0], &pts[i1])
                .partial_cmp(&line_dist2(&pts[b], &pts[i0], &pts[i1]))
                .unwrap()
        })
        .unwrap();
    let base_n = cross3(&sub(&pts[i1], &pts[i0]), &sub(&pts[i2], &pts[i0]));
    let i3 = (0..n)
        .max_by(|&a, &b| {
            dot3(&sub(&pts[a], &pts[i0]), &base_n)
                .abs()
                .partial_cmp(&dot3(&sub(&pts[b], &pts[i0]), &base_n).abs())
                .unwrap()
        })
        .unwrap();
    if dist2(&pts[i1], &pts[i0]).sqrt() <= eps
        || line_dist2(&pts[i2], &pts[i0], &pts[i1]).sqrt() <= eps
        || norm3(&base_n) <= eps * eps
        || dot3(&sub(&pts[i3], &pts[i0]), &base_n).abs() <= eps * norm3(&base_n)
    {
        return Err(GeomError::Degenerate { rank: 2, dim: 3 });
    }

    let interior = [
        (pts[i0][0] + pts[i1][0] + pts[i2][0] + pts[i3][0]) / 4.0,
        (pts[i0][1] + pts[i1][1] + pts[i2][1] + pts[i3][1]) / 4.0,
        (pts[i0][2] + pts[i1][2] + pts[i2][2] + pts[i3][2]) / 4.0,
    ];

    let mut faces: Vec<Face> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        faces.push(make_face(&pts, tri, &interior));
    }

    let mut initial = [i0, i1, i2, i3];
    initial.sort_unstable();
    for p in 0..n {
        if initial.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && signed_dist(f, &pts, p) > eps)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // horizon: directed edges of visible faces whose twin face stays
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &k in &visible {
            let f = faces[k];
            for e in 0..3 {
                let a = f.v[e];
                let b = f.v[(e + 1) % 3];
                let twin_visible = visible.iter().any(|&k2| {
                    k2 != k && {
                        let g = faces[k2].v;
                        (0..3).any(|e2| g[e2] == b && g[(e2 + 1) % 3] == a)
                    }
                });
                let twin_exists = faces.iter().enumerate().any(|(k2, g)| {
                    g.alive && k2 != k && (0..3).any(|e2| g.v[e2] == b && g.v[(e2 + 1) % 3] == a)
                });
                if twin_exists && !twin_visible {
                    horizon.push((a, b));
                }
            }
        }
        for &k in &visible {
            faces[k].alive = false;
        }
        for (a, b) in horizon {
            faces.push(make_face(&pts, [a, b, p], &interior));
        }
    }

    let mut vol6 = 0.0;
    for f in faces.iter().filter(|f| f.alive) {
        let a = sub(&pts[f.v[0]], &interior);
        let b = sub(&pts[f.v[1]], &interior);
        let c = sub(&pts[f.v[2]], &interior);
        vol6 += dot3(&cross3(&a, &b), &c).abs();
    }
    Ok(vol6 / 6.0)
}

fn make_face(pts: &[[f64; 3]], mut tri: [usize; 3], interior: &[f64; 3]) -> Face {
    let n = cross3(
        &sub(&pts[tri[1]], &pts[tri[0]]),
        &sub(&pts[tri[2]], &pts[tri[0]]),
    );
    // orient outward (away from the interior point)
    if dot3(&n, &sub(interior, &pts[tri[0]])) > 0.0 {
        tri.swap(1, 2);
    }
    let n = cross3(
        &sub(&pts[tri[1]], &pts[tri[0]]),
        &sub(&pts[tri[2]], &pts[tri[0]]),
    );
    Face {
        v: tri,
        normal: n,
        alive: true,
    }
}

fn signed_dist(f: &Face, pts: &[[f64; 3]], p: usize) -> f64 {
    let nn = norm3(&f.normal);
    if nn == 0.0 {
        return 0.0;
    }
    dot3(&f.normal, &sub(&pts[p], &pts[f.v[0]])) / nn
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = sub(a, b);
    dot3(&d, &d)
}

fn line_dist2(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let c = cross3(&ab, &ap);
    let n2 = dot3(&ab, &ab);
    if n2 == 0.0 {
        return 0.0;
    }
    dot3(&c, &c) / n2
}
