//! Random grain laws: heavy-tailed ellipsoid and triangle families with
//! exactly known diameter tail indices, plus uniform rotations and a Hill
//! tail-index estimator.
//!
//! All radius laws are pure Pareto, `P(R >= x) = x^(-alpha)` for `x >= 1`,
//! so every theoretical tail index below is exact rather than asymptotic.
//! Axis lengths are full lengths; semi-axes are half of them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geom::{diameter_sequence, BodyDoc, ConvexBody, GeomError, MAX_DIM};

#[derive(Debug, Clone, thiserror::Error)]
pub enum GrainError {
    #[error("dimension {0} out of range (supported: 2..={MAX_DIM})")]
    BadDimension(usize),
    #[error("alpha must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("beta values must be finite, non-negative, one per axis")]
    BadBetas,
    #[error("independent-axes beta values must be strictly positive")]
    ZeroBeta,
    #[error("dependent-axes beta values must be sorted ascending")]
    UnsortedBetas,
    #[error("short-axis count m must satisfy 0 <= m <= d, got m={m}, d={d}")]
    BadShortCount { m: usize, d: usize },
    #[error("triangle tail exponent beta must lie in (0,1), got {0}")]
    BadTriangleBeta(f64),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("k must satisfy 10 <= k <= n/2 with n = {n}, got k = {k}")]
    BadTailK { k: usize, n: usize },
    #[error("samples must be strictly positive")]
    NonPositiveSample,
    #[error("degenerate samples: no spacing among the top order statistics")]
    ZeroSpacings,
}

/// Tri-state truth value for moment conditions. Parameter points lying
/// exactly on a threshold report `Unknown` by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    True,
    False,
    Unknown,
}

impl Flag {
    pub fn is_true(self) -> bool {
        self == Flag::True
    }

    pub fn is_false(self) -> bool {
        self == Flag::False
    }
}

impl std::fmt::Display for Flag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flag::True => write!(f, "true"),
            Flag::False => write!(f, "false"),
            Flag::Unknown => write!(f, "unknown"),
        }
    }
}

/// A parameterized random-grain distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum GrainLaw {
    /// Ellipsoid with d-m axes of length R ~ Pareto(alpha) and m axes of
    /// length 1, uniformly rotated.
    LongShortEllipsoid { d: usize, m: usize, alpha: f64 },
    /// Ellipsoid with independent axes R_i ~ Pareto(beta_i), uniformly
    /// rotated.
    IndependentAxesEllipsoid { d: usize, betas: Vec<f64> },
    /// Ellipsoid with fully dependent axes U^(-beta_i) for one uniform U;
    /// betas sorted ascending, zero allowed (axis of length 1).
    DependentAxesEllipsoid { d: usize, betas: Vec<f64> },
    /// Right triangle in the plane with hypotenuse R ~ Pareto(alpha) and
    /// area R^(1+beta)/4; the sampled location sits at a uniformly chosen
    /// corner.
    RightTriangle { alpha: f64, beta: f64 },
    /// A deterministic body, uniformly rotated about its reference point.
    FixedBody { body: ConvexBody },
}

/// The tail-index vector of the diameter sequence together with the moment
/// flags used by the robustness criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    pub d: usize,
    /// Non-decreasing; `f64::INFINITY` encodes a bounded diameter.
    pub alphas: Vec<f64>,
    /// E[Vol(C)] finite?
    pub vol_l1: Flag,
    /// E[Vol(C)^2] finite?
    pub vol_l2: Flag,
    /// E[(D(1))^d] finite?
    pub diam_ld: Flag,
}

impl TailProfile {
    pub fn new(
        d: usize,
        alphas: Vec<f64>,
        vol_l1: Flag,
        vol_l2: Flag,
        diam_ld: Flag,
    ) -> Result<Self, GrainError> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(GrainError::BadDimension(d));
        }
        if alphas.len() != d
            || alphas.iter().any(|a| a.is_nan() || *a <= 0.0)
            || alphas.windows(2).any(|w| w[0] > w[1])
        {
            return Err(GrainError::BadAlpha(
                alphas.iter().copied().fold(f64::NAN, |_, a| a),
            ));
        }
        Ok(TailProfile {
            d,
            alphas,
            vol_l1,
            vol_l2,
            diam_ld,
        })
    }
}

/// Exact tail of the first diameter, as a finite sum of pure powers valid
/// for arguments >= 1, or a bounded-support marker.
#[derive(Debug, Clone, PartialEq)]
pub enum TailForm {
    /// `P(D >= x) = sum of c_j * x^(-a_j)` for `x >= 1` (and 1 below).
    PowerSum(Vec<(f64, f64)>),
    /// `D <= bound` almost surely (`P(D >= x) = 1` for `x <= bound`).
    Bounded(f64),
}

impl GrainLaw {
    pub fn dim(&self) -> usize {
        match self {
            GrainLaw::LongShortEllipsoid { d, .. } => *d,
            GrainLaw::IndependentAxesEllipsoid { d, .. } => *d,
            GrainLaw::DependentAxesEllipsoid { d, .. } => *d,
            GrainLaw::RightTriangle { .. } => 2,
            GrainLaw::FixedBody { body } => body.dim(),
        }
    }

    pub fn validate(&self) -> Result<(), GrainError> {
        match self {
            GrainLaw::LongShortEllipsoid { d, m, alpha } => {
                check_dim(*d)?;
                if *m > *d {
                    return Err(GrainError::BadShortCount { m: *m, d: *d });
                }
                check_alpha(*alpha)
            }
            GrainLaw::IndependentAxesEllipsoid { d, betas } => {
                check_dim(*d)?;
                if betas.len() != *d || betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
                    return Err(GrainError::BadBetas);
                }
                if betas.iter().any(|b| *b == 0.0) {
                    return Err(GrainError::ZeroBeta);
                }
                Ok(())
            }
            GrainLaw::DependentAxesEllipsoid { d, betas } => {
                check_dim(*d)?;
                if betas.len() != *d || betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
                    return Err(GrainError::BadBetas);
                }
                if betas.windows(2).any(|w| w[0] > w[1]) {
                    return Err(GrainError::UnsortedBetas);
                }
                Ok(())
            }
            GrainLaw::RightTriangle { alpha, beta } => {
                check_alpha(*alpha)?;
                if !beta.is_finite() || *beta <= 0.0 || *beta >= 1.0 {
                    return Err(GrainError::BadTriangleBeta(*beta));
                }
                Ok(())
            }
            GrainLaw::FixedBody { body } => {
                body.validate(crate::geom::EPS_MIN)?;
                Ok(())
            }
        }
    }

    /// Draws one grain positioned with its local origin at zero. For the
    /// triangle family the local origin is the chosen corner; for all other
    /// families it is the body center.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<ConvexBody, GrainError> {
        match self {
            GrainLaw::LongShortEllipsoid { d, m, alpha } => {
                if *m == *d {
                    return Ok(ConvexBody::ball(DVector::zeros(*d), 0.5)?);
                }
                let r = pareto(rng, *alpha);
                let semis =
                    DVector::from_fn(*d, |i, _| if i < *d - *m { r / 2.0 } else { 0.5 });
                let q = haar_rotation(*d, rng);
                Ok(ConvexBody::ellipsoid(DVector::zeros(*d), semis, q)?)
            }
            GrainLaw::IndependentAxesEllipsoid { d, betas } => {
                let semis = DVector::from_fn(*d, |i, _| pareto(rng, betas[i]) / 2.0);
                let q = haar_rotation(*d, rng);
                Ok(ConvexBody::ellipsoid(DVector::zeros(*d), semis, q)?)
            }
            GrainLaw::DependentAxesEllipsoid { d, betas } => {
                let u = 1.0 - rng.random::<f64>();
                let semis = DVector::from_fn(*d, |i, _| u.powf(-betas[i]) / 2.0);
                let q = haar_rotation(*d, rng);
                Ok(ConvexBody::ellipsoid(DVector::zeros(*d), semis, q)?)
            }
            GrainLaw::RightTriangle { alpha, beta } => {
                let r = pareto(rng, *alpha);
                let (p, q) = triangle_legs(r, *beta);
                let corners = [
                    DVector::from_row_slice(&[0.0, 0.0]),
                    DVector::from_row_slice(&[p, 0.0]),
                    DVector::from_row_slice(&[0.0, q]),
                ];
                let pick = rng.random_range(0..3usize);
                let rot = haar_rotation(2, rng);
                let vertices: Vec<DVector<f64>> = corners
                    .iter()
                    .map(|c| &rot * (c - &corners[pick]))
                    .collect();
                Ok(ConvexBody::polytope(vertices)?)
            }
            GrainLaw::FixedBody { body } => {
                let shift = body.center().map(|x| -x);
                let centered = body.translate(&shift);
                match centered.kind() {
                    crate::geom::BodyKind::Ball { .. } => Ok(centered),
                    _ => {
                        let q = haar_rotation(body.dim(), rng);
                        Ok(centered.rotate_about_center(&q))
                    }
                }
            }
        }
    }

    /// Closed-form tail profile: the diameter tail indices together with the
    /// volume and diameter moment flags. Exact threshold hits report
    /// `Flag::Unknown`.
    pub fn theoretical_tail_profile(&self) -> Result<TailProfile, GrainError> {
        self.validate()?;
        let profile = match self {
            GrainLaw::LongShortEllipsoid { d, m, alpha } => {
                if *m == *d {
                    return bounded_profile(*d);
                }
                let mut alphas = vec![*alpha; *d - *m];
                alphas.extend(std::iter::repeat(f64::INFINITY).take(*m));
                TailProfile {
                    d: *d,
                    alphas,
                    vol_l1: flag_above(*alpha, (*d - *m) as f64),
                    vol_l2: flag_above(*alpha, 2.0 * (*d - *m) as f64),
                    diam_ld: flag_above(*alpha, *d as f64),
                }
            }
            GrainLaw::IndependentAxesEllipsoid { d, betas } => {
                let mut sorted = betas.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut alphas = Vec::with_capacity(*d);
                let mut acc = 0.0;
                for b in &sorted {
                    acc += b;
                    alphas.push(acc);
                }
                let min = sorted[0];
                TailProfile {
                    d: *d,
                    alphas,
                    vol_l1: flag_above(min, 1.0),
                    vol_l2: flag_above(min, 2.0),
                    diam_ld: flag_above(min, *d as f64),
                }
            }
            GrainLaw::DependentAxesEllipsoid { d, betas } => {
                let sum: f64 = betas.iter().sum();
                let alphas: Vec<f64> = (0..*d)
                    .map(|k| {
                        let b = betas[*d - 1 - k];
                        if b == 0.0 {
                            f64::INFINITY
                        } else {
                            1.0 / b
                        }
                    })
                    .collect();
                TailProfile {
                    d: *d,
                    alphas,
                    vol_l1: flag_below(sum, 1.0),
                    vol_l2: flag_below(sum, 0.5),
                    diam_ld: flag_below(*d as f64 * betas[*d - 1], 1.0),
                }
            }
            GrainLaw::RightTriangle { alpha, beta } => TailProfile {
                d: 2,
                alphas: vec![*alpha, *alpha / *beta],
                vol_l1: flag_above(*alpha, 1.0 + *beta),
                vol_l2: flag_above(*alpha, 2.0 + 2.0 * *beta),
                diam_ld: flag_above(*alpha, 2.0),
            },
            GrainLaw::FixedBody { body } => return bounded_profile(body.dim()),
        };
        Ok(profile)
    }

    /// `P(D(1) >= x)`, exact.
    pub fn diameter_tail(&self, x: f64) -> Result<f64, GrainError> {
        Ok(match self.diameter_tail_form()? {
            TailForm::Bounded(b) => {
                if x <= b {
                    1.0
                } else {
                    0.0
                }
            }
            TailForm::PowerSum(terms) => {
                if x <= 1.0 {
                    1.0
                } else {
                    terms
                        .iter()
                        .map(|(c, a)| c * x.powf(-a))
                        .sum::<f64>()
                        .clamp(0.0, 1.0)
                }
            }
        })
    }

    /// The exact algebraic form of the first-diameter tail.
    pub fn diameter_tail_form(&self) -> Result<TailForm, GrainError> {
        self.validate()?;
        Ok(match self {
            GrainLaw::LongShortEllipsoid { d, m, alpha } => {
                if *m == *d {
                    TailForm::Bounded(1.0)
                } else {
                    TailForm::PowerSum(vec![(1.0, *alpha)])
                }
            }
            GrainLaw::IndependentAxesEllipsoid { betas, .. } => {
                // P(max R_i >= x) by inclusion-exclusion over subsets
                let d = betas.len();
                let mut terms = Vec::new();
                for mask in 1u32..(1u32 << d) {
                    let exponent: f64 = (0..d)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| betas[i])
                        .sum();
                    let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
                    terms.push((sign, exponent));
                }
                TailForm::PowerSum(terms)
            }
            GrainLaw::DependentAxesEllipsoid { d, betas } => {
                let b = betas[*d - 1];
                if b == 0.0 {
                    TailForm::Bounded(1.0)
                } else {
                    TailForm::PowerSum(vec![(1.0, 1.0 / b)])
                }
            }
            GrainLaw::RightTriangle { alpha, .. } => TailForm::PowerSum(vec![(1.0, *alpha)]),
            GrainLaw::FixedBody { body } => {
                let seq = diameter_sequence(body)?;
                TailForm::Bounded(seq.values[0])
            }
        })
    }

    /// Upper quantile of the first diameter: the smallest x with
    /// `P(D(1) >= x) <= p`.
    pub fn diameter_quantile(&self, p: f64) -> Result<f64, GrainError> {
        assert!(p > 0.0 && p < 1.0);
        match self.diameter_tail_form()? {
            TailForm::Bounded(b) => Ok(b),
            TailForm::PowerSum(_) => {
                let mut lo = 1.0f64;
                let mut hi = 2.0f64;
                while self.diameter_tail(hi)? > p {
                    hi *= 2.0;
                    if hi > 1e300 {
                        break;
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.diameter_tail(mid)? > p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    pub fn to_doc(&self) -> LawDoc {
        match self {
            GrainLaw::LongShortEllipsoid { d, m, alpha } => LawDoc::LongShort {
                d: *d,
                m: *m,
                alpha: *alpha,
            },
            GrainLaw::IndependentAxesEllipsoid { d, betas } => LawDoc::IndependentAxes {
                d: *d,
                betas: betas.clone(),
            },
            GrainLaw::DependentAxesEllipsoid { d, betas } => LawDoc::DependentAxes {
                d: *d,
                betas: betas.clone(),
            },
            GrainLaw::RightTriangle { alpha, beta } => LawDoc::RightTriangle {
                alpha: *alpha,
                beta: *beta,
            },
            GrainLaw::FixedBody { body } => LawDoc::Fixed {
                body: body.to_doc(),
            },
        }
    }

    pub fn from_doc(doc: &LawDoc) -> Result<Self, GrainError> {
        let law = match doc {
            LawDoc::LongShort { d, m, alpha } => GrainLaw::LongShortEllipsoid {
                d: *d,
                m: *m,
                alpha: *alpha,
            },
            LawDoc::IndependentAxes { d, betas } => GrainLaw::IndependentAxesEllipsoid {
                d: *d,
                betas: betas.clone(),
            },
            LawDoc::DependentAxes { d, betas } => GrainLaw::DependentAxesEllipsoid {
                d: *d,
                betas: betas.clone(),
            },
            LawDoc::RightTriangle { alpha, beta } => GrainLaw::RightTriangle {
                alpha: *alpha,
                beta: *beta,
            },
            LawDoc::Fixed { body } => GrainLaw::FixedBody {
                body: ConvexBody::from_doc(body)?,
            },
        };
        law.validate()?;
        Ok(law)
    }
}

/// Serializable form of a grain law (config files and snapshots).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawDoc {
    LongShort { d: usize, m: usize, alpha: f64 },
    IndependentAxes { d: usize, betas: Vec<f64> },
    DependentAxes { d: usize, betas: Vec<f64> },
    RightTriangle { alpha: f64, beta: f64 },
    Fixed { body: BodyDoc },
}

/// Haar-uniform rotation matrix: QR of a Gaussian matrix with the sign
/// convention `R_ii > 0`, reflected onto determinant +1.
pub fn haar_rotation(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..d {
            q[(i, d - 1)] = -q[(i, d - 1)];
        }
    }
    q
}

/// Hill estimator on the k largest order statistics:
/// `alpha_hat = k / sum_{i=1..k} ln(x_(i) / x_(k+1))`.
pub fn tail_index_estimate(samples: &[f64], k: usize) -> Result<f64, GrainError> {
    let n = samples.len();
    if n < 100 {
        return Err(GrainError::TooFewSamples { need: 100, got: n });
    }
    if k < 10 || k > n / 2 {
        return Err(GrainError::BadTailK { k, n });
    }
    if samples.iter().any(|x| !(*x > 0.0)) {
        return Err(GrainError::NonPositiveSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = sorted[k];
    let sum: f64 = sorted[..k].iter().map(|x| (x / threshold).ln()).sum();
    if sum <= 0.0 {
        return Err(GrainError::ZeroSpacings);
    }
    Ok(k as f64 / sum)
}

fn check_dim(d: usize) -> Result<(), GrainError> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(GrainError::BadDimension(d))
    }
}

fn check_alpha(alpha: f64) -> Result<(), GrainError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(GrainError::BadAlpha(alpha))
    }
}

fn bounded_profile(d: usize) -> Result<TailProfile, GrainError> {
    Ok(TailProfile {
        d,
        alphas: vec![f64::INFINITY; d],
        vol_l1: Flag::True,
        vol_l2: Flag::True,
        diam_ld: Flag::True,
    })
}

fn flag_above(x: f64, threshold: f64) -> Flag {
    if x > threshold {
        Flag::True
    } else if x < threshold {
        Flag::False
    } else {
        Flag::Unknown
    }
}

fn flag_below(x: f64, threshold: f64) -> Flag {
    if x < threshold {
        Flag::True
    } else if x > threshold {
        Flag::False
    } else {
        Flag::Unknown
    }
}

fn pareto(rng: &mut impl Rng, alpha: f64) -> f64 {
    Pareto::new(1.0, alpha)
        .expect("validated alpha")
        .sample(rng)
}

/// Legs of the right triangle with hypotenuse r and area r^(1+beta)/4,
/// from (p +- q)^2 = r^2 +- r^(1+beta).
fn triangle_legs(r: f64, beta: f64) -> (f64, f64) {
    let rb = r.powf(1.0 + beta);
    let s_plus = (r * r + rb).sqrt();
    let s_minus = (r * r - rb).max(0.0).sqrt();
    ((s_plus + s_minus) / 2.0, (s_plus - s_minus) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{StreamKey, PURPOSE_GRAINS};

    fn rng() -> rand_chacha::ChaCha12Rng {
        StreamKey::new(2024, 0).rng(PURPOSE_GRAINS)
    }

    #[test]
    fn triangle_volume_identity() {
        // conditional on the hypotenuse, the area is exactly r^(1+beta)/4
        for &(r, beta) in &[(1.0, 0.5), (4.0, 0.5), (7.3, 0.25), (100.0, 0.9)] {
            let (p, q) = triangle_legs(r, beta);
            assert!((p * p + q * q - r * r).abs() < 1e-9 * r * r);
            let area = p * q / 2.0;
            assert!(
                (area - r.powf(1.0 + beta) / 4.0).abs() < 1e-9 * area.max(1.0),
                "r={r}, beta={beta}"
            );
        }
        // hypotenuse 4, beta 1/2: area 2, height on the hypotenuse 1
        let (p, q) = triangle_legs(4.0, 0.5);
        assert!((p * q / 2.0 - 2.0).abs() < 1e-12);
        assert!((p * q / 4.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_short_profile() {
        let law = GrainLaw::LongShortEllipsoid {
            d: 2,
            m: 1,
            alpha: 1.5,
        };
        let p = law.theoretical_tail_profile().unwrap();
        assert_eq!(p.alphas[0], 1.5);
        assert!(p.alphas[1].is_infinite());
        assert_eq!(p.vol_l1, Flag::True); // 1.5 > d - m = 1
        assert_eq!(p.vol_l2, Flag::False); // 1.5 < 2
        assert_eq!(p.diam_ld, Flag::False); // 1.5 < 2
    }

    #[test]
    fn independent_axes_profile() {
        let law = GrainLaw::IndependentAxesEllipsoid {
            d: 3,
            betas: vec![1.1, 2.5, 3.0],
        };
        let p = law.theoretical_tail_profile().unwrap();
        assert_eq!(p.alphas, vec![1.1, 3.6, 6.6]);
        assert_eq!(p.vol_l1, Flag::True);
        assert_eq!(p.vol_l2, Flag::False);
    }

    #[test]
    fn dependent_axes_profile() {
        let law = GrainLaw::DependentAxesEllipsoid {
            d: 2,
            betas: vec![0.25, 0.5],
        };
        let p = law.theoretical_tail_profile().unwrap();
        assert_eq!(p.alphas, vec![2.0, 4.0]);
        assert_eq!(p.vol_l1, Flag::True); // 0.75 < 1
        assert_eq!(p.vol_l2, Flag::False); // 0.75 > 1/2
    }

    #[test]
    fn boundary_hits_are_unknown() {
        let law = GrainLaw::LongShortEllipsoid {
            d: 2,
            m: 1,
            alpha: 1.0,
        };
        let p = law.theoretical_tail_profile().unwrap();
        assert_eq!(p.vol_l1, Flag::Unknown);
    }

    #[test]
    fn fixed_body_profile_all_bounded() {
        let ball = ConvexBody::ball(DVector::zeros(2), 1.0).unwrap();
        let law = GrainLaw::FixedBody { body: ball };
        let p = law.theoretical_tail_profile().unwrap();
        assert!(p.alphas.iter().all(|a| a.is_infinite()));
        assert_eq!(p.vol_l1, Flag::True);
        assert_eq!(p.vol_l2, Flag::True);
        assert_eq!(p.diam_ld, Flag::True);
    }

    #[test]
    fn dependent_axes_exact_tail() {
        let law = GrainLaw::DependentAxesEllipsoid {
            d: 2,
            betas: vec![0.25, 0.5],
        };
        // D(1) = U^(-1/2): P(D >= x) = x^(-2)
        assert!((law.diameter_tail(2.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((law.diameter_tail(4.0).unwrap() - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn independent_tail_inclusion_exclusion() {
        let law = GrainLaw::IndependentAxesEllipsoid {
            d: 2,
            betas: vec![1.0, 2.0],
        };
        let x: f64 = 3.0;
        let expect = 1.0 - (1.0 - x.powf(-1.0)) * (1.0 - x.powf(-2.0));
        assert!((law.diameter_tail(x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_tail() {
        let law = GrainLaw::LongShortEllipsoid {
            d: 2,
            m: 1,
            alpha: 1.5,
        };
        let q = law.diameter_quantile(0.01).unwrap();
        assert!((law.diameter_tail(q).unwrap() - 0.01).abs() < 1e-9);
    }

    #[test]
    fn haar_rotation_orthonormal_det_one() {
        let mut r = rng();
        for d in 2..=5 {
            for _ in 0..20 {
                let q = haar_rotation(d, &mut r);
                let dev = (q.transpose() * &q - DMatrix::identity(d, d)).abs().max();
                assert!(dev < 1e-12, "d={d}, dev={dev}");
                assert!((q.determinant() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sampled_grains_are_valid() {
        let mut r = rng();
        let laws = [
            GrainLaw::LongShortEllipsoid {
                d: 3,
                m: 1,
                alpha: 1.5,
            },
            GrainLaw::IndependentAxesEllipsoid {
                d: 2,
                betas: vec![1.0, 2.0],
            },
            GrainLaw::DependentAxesEllipsoid {
                d: 2,
                betas: vec![0.0, 0.5],
            },
            GrainLaw::RightTriangle {
                alpha: 2.0,
                beta: 0.5,
            },
        ];
        for law in &laws {
            for _ in 0..50 {
                let g = law.sample(&mut r).unwrap();
                g.validate(crate::geom::EPS_MIN).unwrap();
            }
        }
    }

    #[test]
    fn triangle_sample_area_matches_conditional_formula() {
        let mut r = rng();
        let law = GrainLaw::RightTriangle {
            alpha: 2.0,
            beta: 0.5,
        };
        for _ in 0..100 {
            let g = law.sample(&mut r).unwrap();
            let seq = diameter_sequence(&g).unwrap();
            let hyp = seq.values[0];
            let vol = g.volume().unwrap();
            assert!(
                (vol - hyp.powf(1.5) / 4.0).abs() < 1e-9 * vol.max(1.0),
                "hyp={hyp}, vol={vol}"
            );
        }
    }

    #[test]
    fn hill_estimator_input_checks() {
        let small = vec![1.0; 50];
        assert!(matches!(
            tail_index_estimate(&small, 10),
            Err(GrainError::TooFewSamples { .. })
        ));
        let constant = vec![3.0; 500];
        assert!(matches!(
            tail_index_estimate(&constant, 50),
            Err(GrainError::ZeroSpacings)
        ));
        let mut with_zero = vec![1.0; 500];
        with_zero[3] = 0.0;
        assert!(matches!(
            tail_index_estimate(&with_zero, 50),
            Err(GrainError::NonPositiveSample)
        ));
    }

    #[test]
    fn hill_recovers_pareto_index_smoke() {
        let mut r = rng();
        let xs: Vec<f64> = (0..20_000).map(|_| pareto(&mut r, 2.0)).collect();
        let a = tail_index_estimate(&xs, 1000).unwrap();
        assert!((a - 2.0).abs() < 0.25, "alpha_hat = {a}");
    }

    #[test]
    fn law_doc_roundtrip() {
        let law = GrainLaw::RightTriangle {
            alpha: 2.5,
            beta: 0.5,
        };
        let doc = law.to_doc();
        let back = GrainLaw::from_doc(&doc).unwrap();
        assert_eq!(law, back);
    }
}
