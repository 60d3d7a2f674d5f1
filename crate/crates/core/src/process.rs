//! Finite-window realizations of the Boolean model.
//!
//! Grain centers follow a homogeneous Poisson process of the requested
//! intensity on the margin-enlarged window `[-M, L+M]^d`; the statistics of
//! interest live on the query box `[0, L]^d`. Margins control the truncation
//! bias from grains centered outside the enlarged window that would still
//! reach the query box; `recommended_margin` quantifies that bias exactly
//! for the built-in grain laws.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::geom::{BodyDoc, ConvexBody, MAX_DIM};
use crate::grains::{GrainError, GrainLaw, TailForm};
use crate::rng::{StreamKey, PURPOSE_PROCESS};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ProcessError {
    #[error("dimension {0} out of range (supported: 2..={MAX_DIM})")]
    BadDimension(usize),
    #[error("window side must be positive and finite, got {0}")]
    BadSide(f64),
    #[error("window margin must be non-negative and finite, got {0}")]
    BadMargin(f64),
    #[error("intensity must be positive and finite, got {0}")]
    BadIntensity(f64),
    #[error("miss probability must lie in (0,1), got {0}")]
    BadMissProb(f64),
    #[error("grain law dimension {law} does not match window dimension {window}")]
    DimensionMismatch { law: usize, window: usize },
    #[error("expected vertex count {expected:.3e} exceeds the cap {cap:.3e}")]
    ResourceCap { expected: f64, cap: f64 },
    #[error("palm grain already present")]
    PalmAlreadySet,
    #[error(transparent)]
    Grain(#[from] GrainError),
}

/// The query box `[0, side]^dim` plus the sampling margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub dim: usize,
    pub side: f64,
    pub margin: f64,
}

impl Window {
    pub fn new(dim: usize, side: f64, margin: f64) -> Result<Self, ProcessError> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(ProcessError::BadDimension(dim));
        }
        if !side.is_finite() || side <= 0.0 {
            return Err(ProcessError::BadSide(side));
        }
        if !margin.is_finite() || margin < 0.0 {
            return Err(ProcessError::BadMargin(margin));
        }
        Ok(Window { dim, side, margin })
    }

    /// Volume of the enlarged sampling box `[-M, L+M]^d`.
    pub fn enlarged_volume(&self) -> f64 {
        (self.side + 2.0 * self.margin).powi(self.dim as i32)
    }
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub location: DVector<f64>,
    /// The grain already placed at its world position.
    pub grain: ConvexBody,
}

/// One realization of the model, with full seed provenance.
#[derive(Debug, Clone)]
pub struct BooleanSample {
    pub window: Window,
    pub intensity: f64,
    pub vertices: Vec<Vertex>,
    pub root_seed: u64,
    pub replica: u64,
    /// Index of the palm vertex pinned at the origin, if any.
    pub palm_index: Option<usize>,
    /// Fraction of grains whose bounding box pokes out of the enlarged
    /// window (truncation-risk indicator).
    pub straddling_fraction: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ProcessOptions {
    /// Upper bound on the expected vertex count.
    pub vertex_cap: f64,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        ProcessOptions { vertex_cap: 1e7 }
    }
}

/// Draws one realization. Deterministic given `(root seed, replica)`: the
/// stream draws the Poisson count, then per vertex the `d` location
/// coordinates followed by the grain.
pub fn sample_process(
    window: &Window,
    intensity: f64,
    law: &GrainLaw,
    key: StreamKey,
) -> Result<BooleanSample, ProcessError> {
    sample_process_with(window, intensity, law, key, &ProcessOptions::default())
}

pub fn sample_process_with(
    window: &Window,
    intensity: f64,
    law: &GrainLaw,
    key: StreamKey,
    opts: &ProcessOptions,
) -> Result<BooleanSample, ProcessError> {
    if !intensity.is_finite() || intensity <= 0.0 {
        return Err(ProcessError::BadIntensity(intensity));
    }
    law.validate()?;
    if law.dim() != window.dim {
        return Err(ProcessError::DimensionMismatch {
            law: law.dim(),
            window: window.dim,
        });
    }
    let expected = intensity * window.enlarged_volume();
    if expected > opts.vertex_cap {
        return Err(ProcessError::ResourceCap {
            expected,
            cap: opts.vertex_cap,
        });
    }

    let mut rng = key.rng(PURPOSE_PROCESS);
    let n = Poisson::new(expected)
        .expect("positive expected count")
        .sample(&mut rng) as usize;

    let d = window.dim;
    let lo = -window.margin;
    let span = window.side + 2.0 * window.margin;
    let mut vertices = Vec::with_capacity(n);
    let mut straddling = 0usize;
    for _ in 0..n {
        let location = DVector::from_fn(d, |_, _| lo + span * rng.random::<f64>());
        let grain = law.sample(&mut rng)?.translate(&location);
        if sticks_out(&grain, window) {
            straddling += 1;
        }
        vertices.push(Vertex { location, grain });
    }

    Ok(BooleanSample {
        window: *window,
        intensity,
        vertices,
        root_seed: key.root_seed,
        replica: key.replica,
        palm_index: None,
        straddling_fraction: if n == 0 {
            0.0
        } else {
            straddling as f64 / n as f64
        },
    })
}

/// Pins an extra vertex with an independent grain at the origin (the palm
/// version of the process). Errors if a palm vertex already exists.
pub fn add_palm_grain(
    sample: &mut BooleanSample,
    law: &GrainLaw,
    rng: &mut impl Rng,
) -> Result<(), ProcessError> {
    if sample.palm_index.is_some() {
        return Err(ProcessError::PalmAlreadySet);
    }
    law.validate()?;
    if law.dim() != sample.window.dim {
        return Err(ProcessError::DimensionMismatch {
            law: law.dim(),
            window: sample.window.dim,
        });
    }
    let grain = law.sample(rng)?;
    sample.vertices.push(Vertex {
        location: DVector::zeros(sample.window.dim),
        grain,
    });
    sample.palm_index = Some(sample.vertices.len() - 1);
    Ok(())
}

impl BooleanSample {
    pub fn palm(&self) -> bool {
        self.palm_index.is_some()
    }

    /// 64-bit FNV-1a digest of the canonical JSON snapshot.
    pub fn digest(&self) -> u64 {
        let doc = self.to_doc();
        let json = serde_json::to_string(&doc).expect("snapshot serialization");
        fnv1a64(json.as_bytes())
    }

    pub fn to_doc(&self) -> SampleDoc {
        SampleDoc {
            version: SNAPSHOT_VERSION.to_string(),
            dim: self.window.dim,
            side: self.window.side,
            margin: self.window.margin,
            intensity: self.intensity,
            root_seed: self.root_seed,
            replica: self.replica,
            palm_index: self.palm_index,
            straddling_fraction: self.straddling_fraction,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDoc {
                    location: v.location.iter().copied().collect(),
                    grain: v.grain.to_doc(),
                })
                .collect(),
        }
    }
}

pub const SNAPSHOT_VERSION: &str = "boolmodel/sample/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub version: String,
    pub dim: usize,
    pub side: f64,
    pub margin: f64,
    pub intensity: f64,
    pub root_seed: u64,
    pub replica: u64,
    pub palm_index: Option<usize>,
    pub straddling_fraction: f64,
    pub vertices: Vec<VertexDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub location: Vec<f64>,
    pub grain: BodyDoc,
}

/// Margin recommendation and the truncation bias it leaves behind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginReport {
    pub margin: f64,
    /// Expected omitted intersecting grains over the expected in-window
    /// count; `f64::INFINITY` when the tail is not integrable.
    pub residual_relative: f64,
    /// Set when the reach integral diverges (first tail index <= d); the
    /// margin is then a quantile cut, not a bias bound.
    pub heavy_tail: bool,
}

/// Smallest margin M with expected omitted intersecting grains at most
/// `miss_prob` times the expected in-window count.
///
/// A grain centered at distance t from the query box can reach it only if
/// `D(1)/2 >= t`, so the omitted expectation is bounded by
/// `u * Int_M^inf P(D >= 2t) * A'(t) dt` with `A'` the surface-volume
/// derivative of the box offset (Steiner polynomial). The built-in laws have
/// pure power tails, so the integral evaluates in closed form.
pub fn recommended_margin(
    law: &GrainLaw,
    intensity: f64,
    window: &Window,
    miss_prob: f64,
) -> Result<MarginReport, ProcessError> {
    if !intensity.is_finite() || intensity <= 0.0 {
        return Err(ProcessError::BadIntensity(intensity));
    }
    if !(miss_prob > 0.0 && miss_prob < 1.0) {
        return Err(ProcessError::BadMissProb(miss_prob));
    }
    law.validate()?;
    if law.dim() != window.dim {
        return Err(ProcessError::DimensionMismatch {
            law: law.dim(),
            window: window.dim,
        });
    }

    let d = window.dim;
    let l = window.side;
    let form = law.diameter_tail_form()?;

    match form {
        TailForm::Bounded(b) => Ok(MarginReport {
            margin: b / 2.0,
            residual_relative: 0.0,
            heavy_tail: false,
        }),
        TailForm::PowerSum(ref terms) => {
            let alpha1 = terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(_, a)| *a)
                .fold(f64::INFINITY, f64::min);
            if alpha1 <= d as f64 {
                let q = law.diameter_quantile(miss_prob)?;
                return Ok(MarginReport {
                    margin: q / 2.0,
                    residual_relative: f64::INFINITY,
                    heavy_tail: true,
                });
            }
            let in_window = intensity * l.powi(d as i32);
            let target = miss_prob * in_window;
            let omitted = |m: f64| intensity * shell_integral(terms, d, l, m);
            let mut hi = 1.0f64;
            let mut guard = 0;
            while omitted(hi) > target && guard < 2000 {
                hi *= 2.0;
                guard += 1;
            }
            let mut lo = 0.0f64;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if omitted(mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(MarginReport {
                margin: hi,
                residual_relative: omitted(hi) / in_window,
                heavy_tail: false,
            })
        }
    }
}

/// Expected number of grains centered outside the enlarged window that still
/// reach the query box, for the window's own margin. Infinite when the reach
/// integral diverges (first tail index <= d). The bound is conservative: it
/// integrates over the Euclidean offset shell, which contains the exact
/// omitted region.
pub fn truncation_bias(
    law: &GrainLaw,
    intensity: f64,
    window: &Window,
) -> Result<f64, ProcessError> {
    if !intensity.is_finite() || intensity <= 0.0 {
        return Err(ProcessError::BadIntensity(intensity));
    }
    law.validate()?;
    if law.dim() != window.dim {
        return Err(ProcessError::DimensionMismatch {
            law: law.dim(),
            window: window.dim,
        });
    }
    let d = window.dim;
    let l = window.side;
    let m = window.margin;
    match law.diameter_tail_form()? {
        // the built-in bounded laws have a deterministic diameter
        TailForm::Bounded(b) => {
            let reach = b / 2.0;
            if m >= reach {
                Ok(0.0)
            } else {
                Ok(intensity * (offset_volume(d, l, reach) - offset_volume(d, l, m)))
            }
        }
        TailForm::PowerSum(ref terms) => {
            let alpha1 = terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(_, a)| *a)
                .fold(f64::INFINITY, f64::min);
            if alpha1 <= d as f64 {
                Ok(f64::INFINITY)
            } else {
                Ok(intensity * shell_integral(terms, d, l, m))
            }
        }
    }
}

/// Steiner polynomial: volume of the Euclidean t-offset of `[0, L]^d`.
fn offset_volume(d: usize, l: f64, t: f64) -> f64 {
    (0..=d)
        .map(|k| binomial(d, k) * l.powi((d - k) as i32) * crate::geom::unit_ball_volume(k) * t.powi(k as i32))
        .sum()
}

/// `Int_M^inf P(D >= 2t) A'(t) dt` for a pure power-sum tail, where
/// `A'(t) = sum_k k C(d,k) L^(d-k) kappa_k t^(k-1)`.
fn shell_integral(terms: &[(f64, f64)], d: usize, l: f64, m: f64) -> f64 {
    let mut total = 0.0;
    for k in 1..=d {
        let coeff = k as f64
            * binomial(d, k)
            * l.powi((d - k) as i32)
            * crate::geom::unit_ball_volume(k);
        // below t = 1/2 the tail is exactly 1
        let mut jk = 0.0;
        if m < 0.5 {
            jk += (0.5f64.powi(k as i32) - m.powi(k as i32)) / k as f64;
            jk += power_tail_integral(terms, k, 0.5);
        } else {
            jk += power_tail_integral(terms, k, m);
        }
        total += coeff * jk;
    }
    total
}

/// `Int_x^inf t^(k-1) * sum_j c_j (2t)^(-a_j) dt`; requires every a_j > k.
fn power_tail_integral(terms: &[(f64, f64)], k: usize, x: f64) -> f64 {
    terms
        .iter()
        .map(|(c, a)| c * 2f64.powf(-a) * x.powf(k as f64 - a) / (a - k as f64))
        .sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn sticks_out(grain: &ConvexBody, window: &Window) -> bool {
    let (lo, hi) = grain.aabb();
    let a = -window.margin;
    let b = window.side + window.margin;
    for i in 0..window.dim {
        if lo[i] < a || hi[i] > b {
            return true;
        }
    }
    false
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
