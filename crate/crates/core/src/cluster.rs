//! Intersection graph and connected components of a realization.
//!
//! Grains get an oriented bounding rectangle from their diameter sequence;
//! the rectangle's axis-aligned box feeds a hierarchical uniform grid so that
//! heavy-tailed grain sizes do not degrade candidate generation. Exact pair
//! tests run GJK on the grains themselves.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DVector;

use crate::geom::{self, bounding_rectangle, GeomError, GjkOptions, Proximity, MAX_DIM};
use crate::process::BooleanSample;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ClusterError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("sample has no palm vertex")]
    NoPalm,
}

#[derive(Debug, Clone, Copy)]
pub struct GraphOptions {
    /// Store the explicit edge list; `None` lets the builder decide by size.
    pub store_edges: Option<bool>,
    /// Fraction of pair tests that may fall back to the conservative
    /// contact verdict before the graph is marked tainted.
    pub taint_threshold: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            store_edges: None,
            taint_threshold: 1e-6,
        }
    }
}

const EDGE_STORE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct IntersectionGraph {
    pub n: usize,
    /// Present unless the vertex count exceeded the storage limit.
    pub edges: Option<Vec<(u32, u32)>>,
    pub n_edges: u64,
    pub degrees: Vec<u32>,
    pub gjk_calls: u64,
    /// Pair tests that did not certify either verdict and were counted as
    /// contacts.
    pub gjk_failures: u64,
    pub tainted: bool,
    pub clusters: ClusterForest,
}

/// Connected components with dense labels in vertex order.
#[derive(Debug, Clone)]
pub struct ClusterForest {
    pub labels: Vec<u32>,
    pub sizes: Vec<u32>,
}

impl ClusterForest {
    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest(&self) -> u32 {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn members(&self, cluster: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

struct Dsu {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (hi, lo) = if self.rank[ra as usize] >= self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo as usize] = hi;
        if self.rank[hi as usize] == self.rank[lo as usize] {
            self.rank[hi as usize] += 1;
        }
        true
    }

    fn forest(mut self) -> ClusterForest {
        let n = self.parent.len();
        let mut labels = vec![0u32; n];
        let mut sizes = Vec::new();
        let mut remap: HashMap<u32, u32> = HashMap::new();
        for i in 0..n {
            let root = self.find(i as u32);
            let label = *remap.entry(root).or_insert_with(|| {
                sizes.push(0);
                (sizes.len() - 1) as u32
            });
            labels[i] = label;
            sizes[label as usize] += 1;
        }
        ClusterForest { labels, sizes }
    }
}

/// Hierarchical uniform grid over axis-aligned boxes. Level `l` has cells of
/// side `base * 2^l`; every box lives on the coarsest level that still
/// contains its largest side, so a 3^d neighborhood scan is exhaustive.
pub struct SpatialIndex {
    d: usize,
    base: f64,
    level_of: Vec<u32>,
    cell_of: Vec<[i64; MAX_DIM]>,
    centers: Vec<[f64; MAX_DIM]>,
    levels: BTreeMap<u32, HashMap<[i64; MAX_DIM], Vec<u32>>>,
}

impl SpatialIndex {
    pub fn build(d: usize, boxes: &[(DVector<f64>, DVector<f64>)]) -> Self {
        let n = boxes.len();
        let mut extents: Vec<f64> = boxes
            .iter()
            .map(|(lo, hi)| {
                (0..d)
                    .map(|i| hi[i] - lo[i])
                    .fold(0.0f64, f64::max)
                    .max(1e-12)
            })
            .collect();
        let base = {
            let mut sorted = extents.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.is_empty() {
                1.0
            } else {
                sorted[sorted.len() / 2]
            }
        };

        let mut level_of = vec![0u32; n];
        let mut cell_of = vec![[0i64; MAX_DIM]; n];
        let mut centers = vec![[0f64; MAX_DIM]; n];
        let mut levels: BTreeMap<u32, HashMap<[i64; MAX_DIM], Vec<u32>>> = BTreeMap::new();
        for i in 0..n {
            let (lo, hi) = &boxes[i];
            let level = (extents[i] / base).log2().ceil().max(0.0) as u32;
            let size = base * 2f64.powi(level as i32);
            let mut key = [0i64; MAX_DIM];
            for j in 0..d {
                let c = 0.5 * (lo[j] + hi[j]);
                centers[i][j] = c;
                key[j] = (c / size).floor() as i64;
            }
            level_of[i] = level;
            cell_of[i] = key;
            levels.entry(level).or_default().entry(key).or_default().push(i as u32);
        }
        extents.clear();
        SpatialIndex {
            d,
            base,
            level_of,
            cell_of,
            centers,
            levels,
        }
    }

    /// Collects every j that can pair with i under the once-per-pair
    /// convention: same level with j > i, plus all coarser levels. The
    /// output is sorted and deduplicated.
    pub fn candidates(&self, i: usize, out: &mut Vec<u32>) {
        out.clear();
        let own = self.level_of[i];
        for (&level, cells) in self.levels.range(own..) {
            let size = self.base * 2f64.powi(level as i32);
            let mut key = [0i64; MAX_DIM];
            if level == own {
                key = self.cell_of[i];
            } else {
                for j in 0..self.d {
                    key[j] = (self.centers[i][j] / size).floor() as i64;
                }
            }
            self.scan_neighborhood(level, cells, key, i as u32, level == own, out);
        }
        out.sort_unstable();
        out.dedup();
    }

    fn scan_neighborhood(
        &self,
        _level: u32,
        cells: &HashMap<[i64; MAX_DIM], Vec<u32>>,
        key: [i64; MAX_DIM],
        me: u32,
        same_level: bool,
        out: &mut Vec<u32>,
    ) {
        let mut offset = [-1i64; MAX_DIM];
        loop {
            let mut probe = key;
            for j in 0..self.d {
                probe[j] += offset[j];
            }
            if let Some(bucket) = cells.get(&probe) {
                for &j in bucket {
                    if same_level {
                        if j > me {
                            out.push(j);
                        }
                    } else if j != me {
                        out.push(j);
                    }
                }
            }
            // odometer over {-1,0,1}^d
            let mut k = 0;
            loop {
                if k == self.d {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

pub fn build_graph(sample: &BooleanSample) -> Result<IntersectionGraph, ClusterError> {
    build_graph_with(sample, &GraphOptions::default())
}

pub fn build_graph_with(
    sample: &BooleanSample,
    opts: &GraphOptions,
) -> Result<IntersectionGraph, ClusterError> {
    let n = sample.vertices.len();
    let d = sample.window.dim;
    let store = opts.store_edges.unwrap_or(n <= EDGE_STORE_LIMIT);

    let mut boxes = Vec::with_capacity(n);
    for v in &sample.vertices {
        let rect = bounding_rectangle(&v.grain)?;
        boxes.push(rect.aabb());
    }
    let index = SpatialIndex::build(d, &boxes);

    let mut dsu = Dsu::new(n);
    let mut degrees = vec![0u32; n];
    let mut edges = if store { Some(Vec::new()) } else { None };
    let mut n_edges = 0u64;
    let mut gjk_calls = 0u64;
    let mut gjk_failures = 0u64;
    let gjk_opts = GjkOptions::default();
    let mut scratch = Vec::new();

    for i in 0..n {
        index.candidates(i, &mut scratch);
        for &j in &scratch {
            let j = j as usize;
            if !aabb_overlap(&boxes[i], &boxes[j], d) {
                continue;
            }
            gjk_calls += 1;
            let touching = match geom::gjk::proximity(
                &sample.vertices[i].grain,
                &sample.vertices[j].grain,
                &gjk_opts,
            ) {
                Ok(Proximity::Intersecting) => true,
                Ok(Proximity::Separated { .. }) => false,
                Err(_) => {
                    gjk_failures += 1;
                    true
                }
            };
            if touching {
                n_edges += 1;
                degrees[i] += 1;
                degrees[j] += 1;
                dsu.union(i as u32, j as u32);
                if let Some(list) = edges.as_mut() {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    list.push((a as u32, b as u32));
                }
            }
        }
    }

    if let Some(list) = edges.as_mut() {
        list.sort_unstable();
    }
    let tainted = gjk_calls > 0 && gjk_failures as f64 / gjk_calls as f64 > opts.taint_threshold;

    Ok(IntersectionGraph {
        n,
        edges,
        n_edges,
        degrees,
        gjk_calls,
        gjk_failures,
        tainted,
        clusters: dsu.forest(),
    })
}

fn aabb_overlap(a: &(DVector<f64>, DVector<f64>), b: &(DVector<f64>, DVector<f64>), d: usize) -> bool {
    for i in 0..d {
        if a.1[i] < b.0[i] || b.1[i] < a.0[i] {
            return false;
        }
    }
    true
}

/// Per-cluster flags along axis 1: does the cluster meet both the x1 = 0 and
/// the x1 = L face of the query box (faces restricted to the box itself)?
pub fn crossing_flags(sample: &BooleanSample, graph: &IntersectionGraph) -> Vec<bool> {
    let d = sample.window.dim;
    let l = sample.window.side;
    let k = graph.clusters.n_clusters();
    let mut touches_lo = vec![false; k];
    let mut touches_hi = vec![false; k];
    let gjk_opts = GjkOptions::default();

    let face = |coord: f64| {
        let mut lo = [0.0f64; MAX_DIM];
        let mut hi = [0.0f64; MAX_DIM];
        lo[0] = coord;
        hi[0] = coord;
        for j in 1..d {
            lo[j] = 0.0;
            hi[j] = l;
        }
        geom::gjk::BoxSupport { lo, hi, d }
    };
    let lo_face = face(0.0);
    let hi_face = face(l);

    for (i, v) in sample.vertices.iter().enumerate() {
        let label = graph.clusters.labels[i] as usize;
        if touches_lo[label] && touches_hi[label] {
            continue;
        }
        let (blo, bhi) = v.grain.aabb();
        let in_band = (1..d).all(|j| bhi[j] >= 0.0 && blo[j] <= l);
        if !in_band {
            continue;
        }
        if !touches_lo[label] && blo[0] <= 0.0 && bhi[0] >= 0.0 {
            if let Ok(Proximity::Intersecting) | Err(_) =
                geom::gjk::gjk_proximity(&v.grain, &lo_face, &gjk_opts)
            {
                touches_lo[label] = true;
            }
        }
        if !touches_hi[label] && blo[0] <= l && bhi[0] >= l {
            if let Ok(Proximity::Intersecting) | Err(_) =
                geom::gjk::gjk_proximity(&v.grain, &hi_face, &gjk_opts)
            {
                touches_hi[label] = true;
            }
        }
    }

    (0..k).map(|c| touches_lo[c] && touches_hi[c]).collect()
}

pub fn has_crossing(sample: &BooleanSample, graph: &IntersectionGraph) -> bool {
    crossing_flags(sample, graph).iter().any(|&c| c)
}

/// Palm-vertex observables: M0 counts the process grains covering the origin
/// (the palm grain itself does not count), N0 is the palm vertex degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PalmStats {
    pub m0: u32,
    pub n0: u32,
}

pub fn palm_stats(sample: &BooleanSample, graph: &IntersectionGraph) -> Result<PalmStats, ClusterError> {
    let palm = sample.palm_index.ok_or(ClusterError::NoPalm)?;
    let d = sample.window.dim;
    let origin = DVector::zeros(d);
    let mut m0 = 0u32;
    for (i, v) in sample.vertices.iter().enumerate() {
        if i == palm {
            continue;
        }
        let (lo, hi) = v.grain.aabb();
        if (0..d).all(|j| lo[j] <= 0.0 && hi[j] >= 0.0) && v.grain.contains_point(&origin, 1e-9) {
            m0 += 1;
        }
    }
    Ok(PalmStats {
        m0,
        n0: graph.degrees[palm],
    })
}

/// Same observables without building the full graph: N0 comes from testing
/// the palm grain against every other grain directly.
pub fn palm_stats_direct(sample: &BooleanSample) -> Result<PalmStats, ClusterError> {
    let palm = sample.palm_index.ok_or(ClusterError::NoPalm)?;
    let d = sample.window.dim;
    let origin = DVector::zeros(d);
    let palm_grain = &sample.vertices[palm].grain;
    let palm_box = palm_grain.aabb();
    let gjk_opts = GjkOptions::default();
    let mut m0 = 0u32;
    let mut n0 = 0u32;
    for (i, v) in sample.vertices.iter().enumerate() {
        if i == palm {
            continue;
        }
        let bb = v.grain.aabb();
        if (0..d).all(|j| bb.0[j] <= 0.0 && bb.1[j] >= 0.0)
            && v.grain.contains_point(&origin, 1e-9)
        {
            m0 += 1;
        }
        if aabb_overlap(&palm_box, &bb, d) {
            let touching = match geom::gjk::proximity(palm_grain, &v.grain, &gjk_opts) {
                Ok(Proximity::Intersecting) | Err(_) => true,
                Ok(Proximity::Separated { .. }) => false,
            };
            if touching {
                n0 += 1;
            }
        }
    }
    Ok(PalmStats { m0, n0 })
}

/// Degree histogram, smallest degree first.
pub fn degree_histogram(graph: &IntersectionGraph) -> BTreeMap<u32, u64> {
    let mut hist = BTreeMap::new();
    for &deg in &graph.degrees {
        *hist.entry(deg).or_insert(0u64) += 1;
    }
    hist
}
