//! Symbolic classification of grain laws: density and robustness verdicts
//! from a tail profile, regime tables over committed parameter grids, and
//! the renormalization threshold sequence.
//!
//! All thresholds are strict; a parameter point sitting exactly on one
//! reports the unknown/inconclusive branch rather than guessing.

use crate::grains::{Flag, GrainError, GrainLaw, TailProfile};

#[derive(Debug, Clone, thiserror::Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Grain(#[from] GrainError),
    #[error(
        "inconsistent profile: vol_l2=true requires alpha_k >= 2k for all k, \
         but alpha_{k} = {alpha} < {bound}"
    )]
    VolL2Contradiction { k: usize, alpha: f64, bound: f64 },
    #[error("inconsistent profile: vol_l2=true forces vol_l1=true")]
    VolOrderContradiction,
    #[error("inconsistent profile: diam_ld=true requires alpha_1 >= d, got alpha_1 = {alpha} < {d}")]
    DiamTrueContradiction { alpha: f64, d: usize },
    #[error("inconsistent profile: alpha_1 = {alpha} > d = {d} forces diam_ld=true")]
    DiamFalseContradiction { alpha: f64, d: usize },
    #[error("threshold sequence requires 1 <= k < d, got k={k}, d={d}")]
    BadThresholdK { k: usize, d: usize },
    #[error("threshold sequence requires f0 > 1, got {0}")]
    BadThresholdStart(f64),
    #[error("threshold sequence requires eps >= 0, got {0}")]
    BadThresholdEps(f64),
    #[error(
        "threshold exponent min(d-k,k)/(alpha_k-k) - eps = {exponent} must exceed 1 \
         (d={d}, k={k}, alpha_k={alpha}, eps={eps})"
    )]
    ThresholdExponent {
        exponent: f64,
        d: usize,
        k: usize,
        alpha: f64,
        eps: f64,
    },
    #[error("threshold sequence overflows f64 at index {at}; request fewer terms")]
    ThresholdOverflow { at: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Dense,
    Sparse,
    BoundaryUnknown,
}

impl std::fmt::Display for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::Dense => write!(f, "Dense"),
            Density::Sparse => write!(f, "Sparse"),
            Density::BoundaryUnknown => write!(f, "BoundaryUnknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Robustness {
    Robust,
    NonRobust,
    Inconclusive,
}

impl std::fmt::Display for Robustness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Robustness::Robust => write!(f, "Robust"),
            Robustness::NonRobust => write!(f, "NonRobust"),
            Robustness::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// Classification result with machine-readable rule identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub density: Density,
    pub robustness: Robustness,
    /// Fired rules, robustness first: "dense-implies-robust",
    /// "witness k=<k>", "vol-l2-gap", "diam-in-ld", then "vol-l1=<flag>".
    pub reasons: Vec<String>,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}, {}", self.density, self.robustness)?;
        if let Some(first) = self.reasons.first() {
            write!(f, " ({first})")?;
        }
        Ok(())
    }
}

/// Density from the first-moment flag of the grain volume.
pub fn is_sparse(profile: &TailProfile) -> Density {
    match profile.vol_l1 {
        Flag::True => Density::Sparse,
        Flag::False => Density::Dense,
        Flag::Unknown => Density::BoundaryUnknown,
    }
}

fn revalidate(profile: &TailProfile) -> Result<(), CriteriaError> {
    TailProfile::new(
        profile.d,
        profile.alphas.clone(),
        profile.vol_l1,
        profile.vol_l2,
        profile.diam_ld,
    )?;
    Ok(())
}

fn consistency(profile: &TailProfile) -> Result<(), CriteriaError> {
    if profile.vol_l2.is_true() {
        if profile.vol_l1.is_false() {
            return Err(CriteriaError::VolOrderContradiction);
        }
        for (i, &a) in profile.alphas.iter().enumerate() {
            let bound = 2.0 * (i + 1) as f64;
            if a < bound {
                return Err(CriteriaError::VolL2Contradiction {
                    k: i + 1,
                    alpha: a,
                    bound,
                });
            }
        }
    }
    let d = profile.d;
    let a1 = profile.alphas[0];
    if profile.diam_ld.is_true() && a1 < d as f64 {
        return Err(CriteriaError::DiamTrueContradiction { alpha: a1, d });
    }
    if profile.diam_ld.is_false() && a1 > d as f64 {
        return Err(CriteriaError::DiamFalseContradiction { alpha: a1, d });
    }
    Ok(())
}

fn robust_witness(profile: &TailProfile) -> Option<usize> {
    let d = profile.d as f64;
    profile
        .alphas
        .iter()
        .enumerate()
        .find(|(i, &a)| a < (2.0 * (*i as f64 + 1.0)).min(d))
        .map(|(i, _)| i + 1)
}

/// Robustness and density verdict. Contradictory flag combinations error
/// out before any rule fires, which keeps the robust and non-robust rule
/// sets disjoint.
pub fn classify(profile: &TailProfile) -> Result<Verdict, CriteriaError> {
    revalidate(profile)?;
    consistency(profile)?;

    let density = is_sparse(profile);
    let mut reasons = Vec::new();
    let robustness = if density == Density::Dense {
        // full coverage percolates trivially
        reasons.push("dense-implies-robust".to_string());
        Robustness::Robust
    } else if let Some(k) = robust_witness(profile) {
        reasons.push(format!("witness k={k}"));
        Robustness::Robust
    } else {
        let l2_gap = profile.vol_l2.is_true()
            && profile
                .alphas
                .iter()
                .enumerate()
                .all(|(i, &a)| a > 2.0 * (i + 1) as f64);
        let diam = profile.diam_ld.is_true();
        if l2_gap {
            reasons.push("vol-l2-gap".to_string());
        }
        if diam {
            reasons.push("diam-in-ld".to_string());
        }
        if l2_gap || diam {
            Robustness::NonRobust
        } else {
            Robustness::Inconclusive
        }
    };
    match profile.vol_l1 {
        Flag::True => reasons.push("vol-l1=true".to_string()),
        Flag::False => reasons.push("vol-l1=false".to_string()),
        Flag::Unknown => {}
    }
    Ok(Verdict {
        density,
        robustness,
        reasons,
    })
}

/// One regime-table line.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRow {
    pub label: String,
    pub verdict: Verdict,
}

/// Classifies each labeled law through its theoretical tail profile.
pub fn regime_table(points: &[(String, GrainLaw)]) -> Result<Vec<RegimeRow>, CriteriaError> {
    let mut rows = Vec::with_capacity(points.len());
    for (label, law) in points {
        let profile = law.theoretical_tail_profile()?;
        let verdict = classify(&profile)?;
        rows.push(RegimeRow {
            label: label.clone(),
            verdict,
        });
    }
    Ok(rows)
}

/// The committed parameter grid behind the golden regime table. Points avoid
/// every decision boundary except where a boundary verdict is itself the
/// point of the row.
pub fn standard_grid() -> Vec<(String, GrainLaw)> {
    let mut pts = Vec::new();
    let ls = |d: usize, m: usize, alpha: f64| {
        (
            format!("long-short d={d} m={m} alpha={alpha}"),
            GrainLaw::LongShortEllipsoid { d, m, alpha },
        )
    };
    for &(d, m, alphas) in [
        (2usize, 0usize, &[1.5, 2.5, 5.0][..]),
        (2, 1, &[0.5, 1.5, 3.0]),
        (3, 0, &[2.0, 4.0]),
        (3, 1, &[1.5, 2.5, 5.0]),
        (3, 2, &[0.5, 1.5, 3.5]),
        (4, 1, &[2.0, 3.5, 5.0]),
        (4, 2, &[1.5, 3.0, 7.0]),
        (4, 3, &[0.5, 1.5, 3.0]),
    ]
    .iter()
    {
        for &a in alphas {
            pts.push(ls(d, m, a));
        }
    }
    // unit balls (m = d)
    pts.push(ls(2, 2, 1.0));
    pts.push(ls(3, 3, 1.0));

    let ia = |d: usize, betas: &[f64]| {
        (
            format!("independent-axes d={d} betas={}", join_nums(betas)),
            GrainLaw::IndependentAxesEllipsoid {
                d,
                betas: betas.to_vec(),
            },
        )
    };
    pts.push(ia(2, &[0.5, 0.5]));
    pts.push(ia(2, &[1.5, 1.5]));
    pts.push(ia(2, &[3.0, 4.0]));
    pts.push(ia(2, &[1.0, 2.0]));
    pts.push(ia(3, &[0.8, 2.0, 3.0]));
    pts.push(ia(3, &[1.2, 1.3, 1.4]));
    pts.push(ia(3, &[2.5, 3.0, 3.5]));

    let da = |d: usize, betas: &[f64]| {
        (
            format!("dependent-axes d={d} betas={}", join_nums(betas)),
            GrainLaw::DependentAxesEllipsoid {
                d,
                betas: betas.to_vec(),
            },
        )
    };
    pts.push(da(2, &[0.1, 0.15]));
    pts.push(da(2, &[0.2, 0.6]));
    pts.push(da(2, &[0.5, 0.8]));
    // the inconclusive window: alpha = 3 in dimension 4
    pts.push(da(4, &[
        1.0 / 6.0,
        1.0 / 6.0,
        1.0 / 6.0,
        1.0 / 3.0,
    ]));

    let rt = |alpha: f64, beta: f64| {
        (
            format!("right-triangle alpha={alpha} beta={beta}"),
            GrainLaw::RightTriangle { alpha, beta },
        )
    };
    pts.push(rt(1.2, 0.5));
    pts.push(rt(1.9, 0.5));
    pts.push(rt(2.5, 0.5));
    pts.push(rt(3.5, 0.5));

    pts
}

fn join_nums(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join("/")
}

/// The increasing threshold sequence f_0..f_n with
/// `f_i = f_(i-1)^(min(d-k,k)/(alpha_k-k) - eps)`; for `alpha_k = k` the
/// geometric fallback `f_0^1..f_0^n` applies (n values, no leading f_0).
pub fn threshold_sequence(
    d: usize,
    k: usize,
    alpha_k: f64,
    eps: f64,
    f0: f64,
    n: usize,
) -> Result<Vec<f64>, CriteriaError> {
    if k < 1 || k >= d {
        return Err(CriteriaError::BadThresholdK { k, d });
    }
    if !(f0 > 1.0 && f0.is_finite()) {
        return Err(CriteriaError::BadThresholdStart(f0));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CriteriaError::BadThresholdEps(eps));
    }
    if alpha_k == k as f64 {
        return Ok((1..=n).map(|i| f0.powi(i as i32)).collect());
    }
    let exponent = (d - k).min(k) as f64 / (alpha_k - k as f64) - eps;
    if !(exponent > 1.0) {
        return Err(CriteriaError::ThresholdExponent {
            exponent,
            d,
            k,
            alpha: alpha_k,
            eps,
        });
    }
    let mut seq = Vec::with_capacity(n + 1);
    seq.push(f0);
    for i in 0..n {
        let next = seq[i].powf(exponent);
        if !next.is_finite() {
            return Err(CriteriaError::ThresholdOverflow { at: i + 1 });
        }
        seq.push(next);
    }
    Ok(seq)
}
