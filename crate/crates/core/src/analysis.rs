//! Monte Carlo estimators over replicated realizations: crossing curves,
//! covered fraction, palm observables and path-count profiles, each with a
//! 95% confidence interval.
//!
//! Replica streams are keyed globally: grid point `p`, replica `r` uses
//! stream replica id `p * replicas + r`, so every row in an output is
//! individually reproducible and no stream is reused across grid points.

use crate::cluster::{self, ClusterError, GraphOptions, IntersectionGraph};
use crate::geom::MAX_DIM;
use crate::grains::{GrainError, GrainLaw};
use crate::process::{
    add_palm_grain, recommended_margin, sample_process, BooleanSample, ProcessError, Window,
};
use crate::rng::{StreamKey, PURPOSE_PALM};
use crate::stats::normal_quantile;

#[derive(Debug, Clone, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Grain(#[from] GrainError),
    #[error("sweep grid must be non-empty")]
    EmptyGrid,
    #[error("replicas must be at least 1")]
    NoReplicas,
    #[error("grid point has non-positive side or intensity: u={u}, L={l}")]
    BadGridPoint { u: f64, l: f64 },
    #[error("probe spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("probe grid of {cells} cells exceeds the cap {cap}")]
    ProbeCap { cells: usize, cap: usize },
    #[error("graph was built without an edge list; path counts need one")]
    EdgesNotStored,
    #[error("confidence level must lie in (0,1), got {0}")]
    BadLevel(f64),
    #[error("sample has no palm vertex")]
    NoPalm,
}

/// How the sampling margin is chosen per grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginPolicy {
    Fixed(f64),
    /// `recommended_margin` with this truncation budget.
    Auto { miss_prob: f64 },
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub law: GrainLaw,
    /// (intensity, window side) pairs, estimated in order.
    pub grid: Vec<(f64, f64)>,
    pub replicas: u64,
    pub root_seed: u64,
    pub margin: MarginPolicy,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        self.law.validate()?;
        if self.grid.is_empty() {
            return Err(AnalysisError::EmptyGrid);
        }
        if self.replicas == 0 {
            return Err(AnalysisError::NoReplicas);
        }
        for &(u, l) in &self.grid {
            if !(u > 0.0 && u.is_finite() && l > 0.0 && l.is_finite()) {
                return Err(AnalysisError::BadGridPoint { u, l });
            }
        }
        Ok(())
    }
}

/// One aggregated statistic at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub u: f64,
    pub l: f64,
    pub stat: String,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: u64,
    /// Empty when clean; codes like "gjk" or "heavy-margin" otherwise.
    pub taint: Vec<String>,
}

/// Per-replica cluster summary, one CSV row each.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRow {
    pub replica: u64,
    pub u: f64,
    pub l: f64,
    pub n_vertices: u64,
    pub n_edges: u64,
    pub largest_cluster: u64,
    pub crossing: bool,
    pub m0: u32,
    pub n0: u32,
}

#[derive(Debug, Clone)]
pub struct PercolationRun {
    pub estimates: Vec<EstimateRow>,
    pub replica_rows: Vec<ReplicaRow>,
}

fn resolve_margin(
    plan: &SweepPlan,
    u: f64,
    l: f64,
    taint: &mut Vec<String>,
) -> Result<f64, AnalysisError> {
    match plan.margin {
        MarginPolicy::Fixed(m) => Ok(m),
        MarginPolicy::Auto { miss_prob } => {
            let d = plan.law.dim();
            let probe = Window::new(d, l, 0.0)?;
            let report = recommended_margin(&plan.law, u, &probe, miss_prob)?;
            if report.heavy_tail {
                push_taint(taint, "heavy-margin");
            }
            Ok(report.margin)
        }
    }
}

fn push_taint(taint: &mut Vec<String>, code: &str) {
    if !taint.iter().any(|t| t == code) {
        taint.push(code.to_string());
    }
}

fn replica_key(plan: &SweepPlan, point: usize, r: u64) -> StreamKey {
    StreamKey::new(plan.root_seed, point as u64 * plan.replicas + r)
}

/// Full percolation sweep: crossing estimates plus per-replica summaries.
/// Every replica carries a palm vertex; it participates in the graph like
/// any other vertex.
pub fn percolation_sweep(plan: &SweepPlan) -> Result<PercolationRun, AnalysisError> {
    plan.validate()?;
    let d = plan.law.dim();
    let mut estimates = Vec::with_capacity(plan.grid.len());
    let mut replica_rows = Vec::with_capacity(plan.grid.len() * plan.replicas as usize);

    for (p, &(u, l)) in plan.grid.iter().enumerate() {
        let mut taint = Vec::new();
        let margin = resolve_margin(plan, u, l, &mut taint)?;
        let window = Window::new(d, l, margin)?;
        let mut crossings = 0u64;
        for r in 0..plan.replicas {
            let key = replica_key(plan, p, r);
            let mut sample = sample_process(&window, u, &plan.law, key)?;
            let mut palm_rng = key.rng(PURPOSE_PALM);
            add_palm_grain(&mut sample, &plan.law, &mut palm_rng)?;
            let graph = cluster::build_graph(&sample)?;
            if graph.tainted {
                push_taint(&mut taint, "gjk");
            }
            let crossing = cluster::has_crossing(&sample, &graph);
            if crossing {
                crossings += 1;
            }
            let stats = cluster::palm_stats(&sample, &graph)?;
            replica_rows.push(ReplicaRow {
                replica: key.replica,
                u,
                l,
                n_vertices: sample.vertices.len() as u64,
                n_edges: graph.n_edges,
                largest_cluster: graph.clusters.largest() as u64,
                crossing,
                m0: stats.m0,
                n0: stats.n0,
            });
        }
        let est = crossings as f64 / plan.replicas as f64;
        let (lo, hi) = wilson_interval(crossings, plan.replicas, 0.95)?;
        estimates.push(EstimateRow {
            u,
            l,
            stat: "crossing".to_string(),
            estimate: est,
            lo,
            hi,
            n: plan.replicas,
            taint,
        });
    }
    Ok(PercolationRun {
        estimates,
        replica_rows,
    })
}

/// Crossing probability curve only.
pub fn crossing_curve(plan: &SweepPlan) -> Result<Vec<EstimateRow>, AnalysisError> {
    Ok(percolation_sweep(plan)?.estimates)
}

/// Palm observables per grid point: mean M0 and mean N0 with normal CIs.
pub fn palm_sweep(plan: &SweepPlan) -> Result<Vec<EstimateRow>, AnalysisError> {
    plan.validate()?;
    let d = plan.law.dim();
    let mut rows = Vec::with_capacity(plan.grid.len() * 2);
    for (p, &(u, l)) in plan.grid.iter().enumerate() {
        let mut taint = Vec::new();
        let margin = resolve_margin(plan, u, l, &mut taint)?;
        let window = Window::new(d, l, margin)?;
        let mut m0s = Vec::with_capacity(plan.replicas as usize);
        let mut n0s = Vec::with_capacity(plan.replicas as usize);
        for r in 0..plan.replicas {
            let key = replica_key(plan, p, r);
            let mut sample = sample_process(&window, u, &plan.law, key)?;
            let mut palm_rng = key.rng(PURPOSE_PALM);
            add_palm_grain(&mut sample, &plan.law, &mut palm_rng)?;
            let stats = cluster::palm_stats_direct(&sample)?;
            m0s.push(stats.m0 as f64);
            n0s.push(stats.n0 as f64);
        }
        for (name, xs) in [("m0", &m0s), ("n0", &n0s)] {
            let (est, lo, hi) = mean_interval(xs, 0.95)?;
            rows.push(EstimateRow {
                u,
                l,
                stat: name.to_string(),
                estimate: est,
                lo,
                hi,
                n: plan.replicas,
                taint: taint.clone(),
            });
        }
    }
    Ok(rows)
}

const PROBE_CAP: usize = 50_000_000;

/// Fraction of a regular probe grid in `[0, L]^d` covered by the union of
/// the grains. The nominal spacing is rounded so the grid tiles the box
/// exactly; probes sit at cell centers.
pub fn covered_fraction(sample: &BooleanSample, probe_spacing: f64) -> Result<f64, AnalysisError> {
    if !(probe_spacing > 0.0 && probe_spacing.is_finite()) {
        return Err(AnalysisError::BadSpacing(probe_spacing));
    }
    let d = sample.window.dim;
    let l = sample.window.side;
    let m = (l / probe_spacing).round().max(1.0) as usize;
    let cells = m.checked_pow(d as u32).filter(|&c| c <= PROBE_CAP).ok_or(
        AnalysisError::ProbeCap {
            cells: usize::MAX,
            cap: PROBE_CAP,
        },
    )?;
    let step = l / m as f64;

    let mut covered = vec![false; cells];
    let mut lo_idx = [0usize; MAX_DIM];
    let mut hi_idx = [0usize; MAX_DIM];
    let mut probe = nalgebra::DVector::zeros(d);
    for v in &sample.vertices {
        let (blo, bhi) = v.grain.aabb();
        let mut empty = false;
        for j in 0..d {
            if bhi[j] < 0.0 || blo[j] > l {
                empty = true;
                break;
            }
            lo_idx[j] = ((blo[j] / step).floor().max(0.0)) as usize;
            hi_idx[j] = ((bhi[j] / step).ceil() as usize).min(m).saturating_sub(1);
        }
        if empty {
            continue;
        }
        let mut idx = lo_idx;
        'cells: loop {
            let mut flat = 0usize;
            for j in 0..d {
                flat = flat * m + idx[j];
            }
            if !covered[flat] {
                for j in 0..d {
                    probe[j] = (idx[j] as f64 + 0.5) * step;
                }
                if v.grain.contains_point(&probe, 1e-9) {
                    covered[flat] = true;
                }
            }
            // odometer over the grain's index box
            let mut j = 0;
            loop {
                if j == d {
                    break 'cells;
                }
                idx[j] += 1;
                if idx[j] <= hi_idx[j] {
                    break;
                }
                idx[j] = lo_idx[j];
                j += 1;
            }
        }
    }
    let hits = covered.iter().filter(|&&c| c).count();
    Ok(hits as f64 / cells as f64)
}

/// Covered-fraction curve: per grid point the mean over replicas with a
/// normal CI clamped to [0, 1].
pub fn coverage_sweep(
    plan: &SweepPlan,
    probe_spacing: f64,
) -> Result<Vec<EstimateRow>, AnalysisError> {
    plan.validate()?;
    let d = plan.law.dim();
    let mut rows = Vec::with_capacity(plan.grid.len());
    for (p, &(u, l)) in plan.grid.iter().enumerate() {
        let mut taint = Vec::new();
        let margin = resolve_margin(plan, u, l, &mut taint)?;
        let window = Window::new(d, l, margin)?;
        let mut fractions = Vec::with_capacity(plan.replicas as usize);
        for r in 0..plan.replicas {
            let key = replica_key(plan, p, r);
            let sample = sample_process(&window, u, &plan.law, key)?;
            fractions.push(covered_fraction(&sample, probe_spacing)?);
        }
        let (est, lo, hi) = mean_interval(&fractions, 0.95)?;
        rows.push(EstimateRow {
            u,
            l,
            stat: "covered".to_string(),
            estimate: est,
            lo: lo.max(0.0),
            hi: hi.min(1.0),
            n: plan.replicas,
            taint,
        });
    }
    Ok(rows)
}

/// BFS layer counts from the palm vertex: entry `n-1` is the number of
/// vertices at graph distance exactly `n`, for n = 1..=n_max.
pub fn path_count_profile(
    sample: &BooleanSample,
    graph: &IntersectionGraph,
    n_max: usize,
) -> Result<Vec<u64>, AnalysisError> {
    let palm = sample.palm_index.ok_or(AnalysisError::NoPalm)?;
    let edges = graph.edges.as_ref().ok_or(AnalysisError::EdgesNotStored)?;

    // CSR adjacency
    let n = graph.n;
    let mut offsets = vec![0usize; n + 1];
    for &(a, b) in edges {
        offsets[a as usize + 1] += 1;
        offsets[b as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut adj = vec![0u32; edges.len() * 2];
    let mut cursor = offsets.clone();
    for &(a, b) in edges {
        adj[cursor[a as usize]] = b;
        cursor[a as usize] += 1;
        adj[cursor[b as usize]] = a;
        cursor[b as usize] += 1;
    }

    let mut counts = vec![0u64; n_max];
    let mut dist = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[palm] = 0;
    queue.push_back(palm as u32);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v as usize];
        if dv as usize >= n_max {
            continue;
        }
        for &w in &adj[offsets[v as usize]..offsets[v as usize + 1]] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dv + 1;
                counts[dv as usize] += 1;
                queue.push_back(w);
            }
        }
    }
    Ok(counts)
}

/// Mean total path count per grid point (sum of the BFS layer counts).
pub fn pathcount_sweep(plan: &SweepPlan, n_max: usize) -> Result<Vec<EstimateRow>, AnalysisError> {
    plan.validate()?;
    let d = plan.law.dim();
    let opts = GraphOptions {
        store_edges: Some(true),
        ..GraphOptions::default()
    };
    let mut rows = Vec::with_capacity(plan.grid.len());
    for (p, &(u, l)) in plan.grid.iter().enumerate() {
        let mut taint = Vec::new();
        let margin = resolve_margin(plan, u, l, &mut taint)?;
        let window = Window::new(d, l, margin)?;
        let mut totals = Vec::with_capacity(plan.replicas as usize);
        for r in 0..plan.replicas {
            let key = replica_key(plan, p, r);
            let mut sample = sample_process(&window, u, &plan.law, key)?;
            let mut palm_rng = key.rng(PURPOSE_PALM);
            add_palm_grain(&mut sample, &plan.law, &mut palm_rng)?;
            let graph = cluster::build_graph_with(&sample, &opts)?;
            if graph.tainted {
                push_taint(&mut taint, "gjk");
            }
            let profile = path_count_profile(&sample, &graph, n_max)?;
            totals.push(profile.iter().sum::<u64>() as f64);
        }
        let (est, lo, hi) = mean_interval(&totals, 0.95)?;
        rows.push(EstimateRow {
            u,
            l,
            stat: "paths".to_string(),
            estimate: est,
            lo: lo.max(0.0),
            hi,
            n: plan.replicas,
            taint,
        });
    }
    Ok(rows)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64), AnalysisError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::BadLevel(level));
    }
    assert!(trials >= 1 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = normal_quantile(0.5 + level / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Sample mean with a normal-approximation CI; degenerate samples collapse
/// the interval onto the mean.
pub fn mean_interval(xs: &[f64], level: f64) -> Result<(f64, f64, f64), AnalysisError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::BadLevel(level));
    }
    assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, mean, mean));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let z = normal_quantile(0.5 + level / 2.0);
    let half = z * (var / n).sqrt();
    Ok((mean, mean - half, mean + half))
}
