//! Approximate patterns: cluster sampled post-jump states by the
//! distribution of their next `n` symbols, `P(k₁…k_n|ρ)`, with
//! single-linkage agglomeration, then draw cluster-level graphs.

use rayon::prelude::*;

use crate::algebra::{trace_distance, Matrix, VectorizedOperator, C64};
use crate::channel::ChannelProcess;
use crate::error::{Error, Result};
use crate::io::{csv, format_float};
use crate::patterns::{PatternEdge, PatternGraph, PatternNode};
use crate::stats::{tuple_probabilities, CLAMP_TOLERANCE, ENUMERATION_CAP};

pub const DEFAULT_HORIZON: usize = 6;
pub const DEFAULT_WEIGHT_MIN: f64 = 0.02;

/// `P(k₁,…,k_n|ρ)` over all tuples in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct FutureSignature {
    pub horizon: usize,
    pub values: Vec<f64>,
}

pub fn future_signature(process: &ChannelProcess<C64>, rho: &[C64], n: usize) -> Result<FutureSignature> {
    let raw = tuple_probabilities(process, rho, n, ENUMERATION_CAP)?;
    let mut values = Vec::with_capacity(raw.len());
    for p in raw {
        let x = p.re;
        if x < -CLAMP_TOLERANCE {
            return Err(Error::PositivityViolation { worst: x });
        }
        values.push(x.max(0.0));
    }
    Ok(FutureSignature { horizon: n, values })
}

/// `D(ρ₁,ρ₂)² = Σ [P(…|ρ₁) − P(…|ρ₂)]²`.
pub fn distance(a: &FutureSignature, b: &FutureSignature) -> Result<f64> {
    if a.horizon != b.horizon || a.values.len() != b.values.len() {
        return Err(Error::Dimension(format!("horizons {} and {} differ", a.horizon, b.horizon)));
    }
    Ok(euclidean(&a.values, &b.values))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistanceBackend {
    /// Euclidean distance of future signatures.
    #[default]
    Probability,
    /// Trace distance of the density matrices.
    TraceDistance,
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let rows: Vec<Vec<f64>> =
            (0..n).into_par_iter().map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) }).collect()).collect();
        Self { n, data: rows.concat() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }
}

pub fn signature_distances(signatures: &[FutureSignature]) -> Result<DistanceMatrix> {
    if let Some(first) = signatures.first() {
        if signatures.iter().any(|s| s.horizon != first.horizon) {
            return Err(Error::Dimension("signatures have mixed horizons".into()));
        }
    }
    Ok(DistanceMatrix::from_fn(signatures.len(), |i, j| euclidean(&signatures[i].values, &signatures[j].values)))
}

pub fn state_distances(states: &[Matrix<C64>]) -> DistanceMatrix {
    DistanceMatrix::from_fn(states.len(), |i, j| trace_distance(&states[i], &states[j]))
}

/// Single-linkage merge history: `merges[t] = (a, b, height)` joins the
/// clusters holding samples `a` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<(usize, usize, f64)>,
}

impl Dendrogram {
    /// Minimum spanning tree by Prim's algorithm on the dense matrix, with
    /// edges sorted by `(weight, lower index, higher index)`; merging along
    /// them is single linkage.
    pub fn single_linkage(dist: &DistanceMatrix) -> Self {
        let n = dist.len();
        let mut merges = Vec::with_capacity(n.saturating_sub(1));
        if n == 0 {
            return Self { n, merges };
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![(f64::INFINITY, usize::MAX); n];
        in_tree[0] = true;
        for j in 1..n {
            best[j] = (dist.get(0, j), 0);
        }
        for _ in 1..n {
            let mut pick = usize::MAX;
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                let key = |v: usize| (best[v].0, best[v].1.min(v), best[v].1.max(v));
                if pick == usize::MAX || key(j).partial_cmp(&key(pick)) == Some(std::cmp::Ordering::Less) {
                    pick = j;
                }
            }
            let (w, from) = best[pick];
            merges.push((from.min(pick), from.max(pick), w));
            in_tree[pick] = true;
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                let d = dist.get(pick, j);
                if d < best[j].0 || (d == best[j].0 && pick < best[j].1) {
                    best[j] = (d, pick);
                }
            }
        }
        merges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        Self { n, merges }
    }

    /// Cluster id per sample after `n − n_clusters` merges; ids count up in
    /// order of each cluster's smallest member.
    pub fn cut(&self, n_clusters: usize) -> Result<Vec<usize>> {
        if n_clusters == 0 || n_clusters > self.n {
            return Err(Error::Precondition(format!("cannot form {n_clusters} clusters from {} samples", self.n)));
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b, _) in self.merges.iter().take(self.n - n_clusters) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut ids = vec![usize::MAX; self.n];
        let mut root_id = vec![usize::MAX; self.n];
        let mut next = 0;
        for i in 0..self.n {
            let r = find(&mut parent, i);
            if root_id[r] == usize::MAX {
                root_id[r] = next;
                next += 1;
            }
            ids[i] = root_id[r];
        }
        Ok(ids)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub n_clusters: usize,
    pub assignment: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    /// Medoid sample of each cluster.
    pub representatives: Vec<usize>,
    /// `D_{i,j} = (1/|S_i||S_j|) Σ_{k∈S_i, q∈S_j} D(ρ_k, ρ_q)`, self pairs
    /// included.
    pub distances: Vec<Vec<f64>>,
    /// Largest pairwise distance inside each cluster.
    pub max_intra: Vec<f64>,
}

impl ClusterModel {
    pub fn from_assignment(assignment: Vec<usize>, dist: &DistanceMatrix) -> Self {
        let n_clusters = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); n_clusters];
        for (i, &c) in assignment.iter().enumerate() {
            members[c].push(i);
        }
        let distances: Vec<Vec<f64>> = (0..n_clusters)
            .into_par_iter()
            .map(|a| {
                (0..n_clusters)
                    .map(|b| {
                        let total: f64 = members[a].iter().flat_map(|&i| members[b].iter().map(move |&j| dist.get(i, j))).sum();
                        total / (members[a].len() * members[b].len()) as f64
                    })
                    .collect()
            })
            .collect();
        let max_intra = members
            .iter()
            .map(|m| m.iter().flat_map(|&i| m.iter().map(move |&j| dist.get(i, j))).fold(0.0, f64::max))
            .collect();
        let representatives = members
            .iter()
            .map(|m| {
                let cost = |i: usize| m.iter().map(|&j| dist.get(i, j)).sum::<f64>();
                *m.iter().min_by(|&&a, &&b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b))).expect("nonempty cluster")
            })
            .collect();
        Self { n_clusters, assignment, members, representatives, distances, max_intra }
    }

    pub fn populations(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// `max_i D_{i,i}`.
    pub fn quality(&self) -> f64 {
        (0..self.n_clusters).map(|i| self.distances[i][i]).fold(0.0, f64::max)
    }

    pub fn max_intra_distance(&self) -> f64 {
        self.max_intra.iter().copied().fold(0.0, f64::max)
    }

    /// `state_index,cluster_id` with 1-based cluster ids.
    pub fn assignment_csv(&self) -> String {
        csv("state_index,cluster_id", self.assignment.iter().enumerate().map(|(i, c)| [i.to_string(), (c + 1).to_string()]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityPoint {
    pub n_clusters: usize,
    /// `max_i D_{i,i}` with averaged diagonal.
    pub max_diagonal: f64,
    /// Largest within-cluster pairwise distance.
    pub max_intra: f64,
}

pub fn quality_csv(points: &[QualityPoint]) -> String {
    csv(
        "n_clusters,max_intra_distance,max_diagonal",
        points.iter().map(|p| [p.n_clusters.to_string(), format_float(p.max_intra), format_float(p.max_diagonal)]),
    )
}

/// Distances and dendrogram of one sample set, cut at any cluster count.
#[derive(Clone, Debug)]
pub struct ClusterAnalysis {
    pub distances: DistanceMatrix,
    pub dendrogram: Dendrogram,
}

impl ClusterAnalysis {
    pub fn new(
        process: &ChannelProcess<C64>,
        samples: &[Vec<C64>],
        horizon: usize,
        backend: DistanceBackend,
    ) -> Result<Self> {
        let distances = match backend {
            DistanceBackend::Probability => {
                let sigs: Vec<FutureSignature> =
                    samples.par_iter().map(|s| future_signature(process, s, horizon)).collect::<Result<_>>()?;
                signature_distances(&sigs)?
            }
            DistanceBackend::TraceDistance => {
                let d = process.dim();
                let states: Vec<Matrix<C64>> =
                    samples.iter().map(|s| VectorizedOperator { dim: d, data: s.clone() }.unvectorize()).collect();
                state_distances(&states)
            }
        };
        Ok(Self::from_distances(distances))
    }

    pub fn from_distances(distances: DistanceMatrix) -> Self {
        let dendrogram = Dendrogram::single_linkage(&distances);
        Self { distances, dendrogram }
    }

    pub fn cut(&self, n_clusters: usize) -> Result<ClusterModel> {
        Ok(ClusterModel::from_assignment(self.dendrogram.cut(n_clusters)?, &self.distances))
    }

    pub fn quality_curve(&self, counts: &[usize]) -> Result<Vec<QualityPoint>> {
        counts
            .iter()
            .map(|&c| {
                let m = self.cut(c)?;
                Ok(QualityPoint { n_clusters: c, max_diagonal: m.quality(), max_intra: m.max_intra_distance() })
            })
            .collect()
    }
}

/// Signature clustering of `samples` into `n_clusters` groups.
pub fn cluster(process: &ChannelProcess<C64>, samples: &[Vec<C64>], horizon: usize, n_clusters: usize) -> Result<ClusterModel> {
    if n_clusters == 0 || n_clusters > samples.len() {
        return Err(Error::Precondition(format!("cannot form {n_clusters} clusters from {} samples", samples.len())));
    }
    ClusterAnalysis::new(process, samples, horizon, DistanceBackend::Probability)?.cut(n_clusters)
}

/// Cluster-level graph. For each cluster `i` and symbol `k`, the edge goes
/// to the cluster `j` receiving most `k`-successors of `i`'s states; its
/// weight is the fraction of `i`'s states whose next symbol is `k` and
/// whose successor lies in `j`. Edges lighter than `weight_min` are dropped.
///
/// `successors[s] = Some((k, t))` says sample `s` emitted `k` and became
/// sample `t`.
pub fn cluster_graph(
    model: &ClusterModel,
    successors: &[Option<(usize, usize)>],
    alphabet: &[String],
    weight_min: f64,
) -> Result<PatternGraph> {
    if successors.len() != model.assignment.len() {
        return Err(Error::Dimension("one successor entry per sample is required".into()));
    }
    let m = alphabet.len();
    let c = model.n_clusters;
    let mut counts = vec![vec![vec![0usize; c]; m]; c];
    for (s, succ) in successors.iter().enumerate() {
        if let Some((k, t)) = *succ {
            if k >= m || t >= model.assignment.len() {
                return Err(Error::Dimension(format!("successor ({k}, {t}) out of range")));
            }
            counts[model.assignment[s]][k][model.assignment[t]] += 1;
        }
    }
    let mut edges = Vec::new();
    for i in 0..c {
        let size = model.members[i].len() as f64;
        for (k, row) in counts[i].iter().enumerate() {
            let Some((j, &n)) = row.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))) else { continue };
            let weight = n as f64 / size;
            if n > 0 && weight >= weight_min {
                edges.push(PatternEdge { from: i + 1, symbol: k, to: j + 1, probability: weight, exact: None });
            }
        }
    }
    let nodes = model
        .members
        .iter()
        .enumerate()
        .map(|(i, mem)| PatternNode { label: i + 1, name: format!("C{}", i + 1), visits: mem.len() as f64 })
        .collect();
    Ok(PatternGraph { alphabet: alphabet.to_vec(), nodes, edges, classification: None })
}

/// Successor table of a trajectory whose states were all kept: sample `i`
/// is `states[i]` and emits `symbols[i]` to become sample `i + 1`.
pub fn consecutive_successors(symbols: &[usize], n_samples: usize) -> Vec<Option<(usize, usize)>> {
    (0..n_samples).map(|i| (i + 1 < n_samples && i < symbols.len()).then(|| (symbols[i], i + 1))).collect()
}
