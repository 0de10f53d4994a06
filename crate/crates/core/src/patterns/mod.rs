//! Closed patterns, recurring states and renewal structure of the
//! post-jump dynamics, found with exact arithmetic.
//!
//! A closed pattern is a finite set of states `{σ_i}` with
//! `M_kσ_i / tr(M_kσ_i) = σ_{f(i,k)}`. Trajectories are run exactly from
//! `π`; every state gets an integer label the first time it appears, and a
//! repeated label seeds a breadth-first closure over all branches.

pub mod exact;
pub mod graph;
pub mod store;

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::{rank, ExactComplex, Field, VectorizedOperator};
use crate::channel::ChannelProcess;
use crate::error::{Error, Result};
use crate::io::csv;
use crate::model::occupation_string;
use crate::trajectory::{sample_index, trajectory_rng};

pub use exact::{ExactState, IntegerChannels};
pub use graph::{Classification, PatternEdge, PatternGraph, PatternNode};
pub use store::{ApproximateStore, LabeledStateStore};

/// Largest integer bit length kept before a trajectory is truncated.
pub const DEFAULT_BIT_CAP: u64 = 1 << 16;
pub const DEFAULT_MAX_STATES: usize = 10_000;
pub const DEFAULT_TOL_MATCH: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectOptions {
    pub max_steps: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub bit_cap: u64,
    /// Also label states approximately at this trace-distance tolerance.
    pub tol_match: Option<f64>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { max_steps: 200, trajectories: 2, seed: 0, bit_cap: DEFAULT_BIT_CAP, tol_match: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLabels {
    pub stream: u64,
    /// Global label at steps `0..=n`; step 0 is `π`.
    pub labels: Vec<usize>,
    pub symbols: Vec<usize>,
    /// Per-trajectory approximate labels, when requested.
    pub approximate_labels: Option<Vec<usize>>,
    /// First step whose state had already appeared in this trajectory.
    pub first_repeat: Option<usize>,
    /// Step at which the bit cap stopped the trajectory.
    pub truncated_at: Option<usize>,
    pub max_bits: u64,
}

impl TrajectoryLabels {
    pub fn distinct(&self) -> usize {
        self.labels.iter().collect::<HashSet<_>>().len()
    }

    /// `step,label` CSV.
    pub fn to_csv(&self) -> String {
        csv("step,label", self.labels.iter().enumerate().map(|(i, l)| [i.to_string(), l.to_string()]))
    }

    pub fn approximate_csv(&self) -> Option<String> {
        self.approximate_labels
            .as_ref()
            .map(|ls| csv("step,label", ls.iter().enumerate().map(|(i, l)| [i.to_string(), l.to_string()])))
    }
}

#[derive(Clone, Debug)]
pub struct Detection {
    /// Global store; labels follow trajectory order, then first-seen order.
    pub store: LabeledStateStore,
    pub trajectories: Vec<TrajectoryLabels>,
    /// Global labels revisited within some trajectory, by trajectory then
    /// step of first revisit.
    pub repeated: Vec<usize>,
}

impl Detection {
    pub fn revisit_fraction(&self) -> f64 {
        if self.trajectories.is_empty() {
            return 0.0;
        }
        let hits = self.trajectories.iter().filter(|t| t.first_repeat.is_some()).count();
        hits as f64 / self.trajectories.len() as f64
    }

    pub fn truncated(&self) -> bool {
        self.trajectories.iter().any(|t| t.truncated_at.is_some())
    }
}

struct LocalRun {
    store: LabeledStateStore,
    labels: Vec<usize>,
    symbols: Vec<usize>,
    approximate: Option<Vec<usize>>,
    repeats: Vec<usize>,
    first_repeat: Option<usize>,
    truncated_at: Option<usize>,
    max_bits: u64,
}

fn run_exact(channels: &IntegerChannels, options: &DetectOptions, stream: u64) -> Result<LocalRun> {
    let mut rng = trajectory_rng(options.seed, stream);
    let mut store = LabeledStateStore::new();
    let mut approx = options.tol_match.map(ApproximateStore::new);
    let mut state = channels.jss().clone();
    let mut labels = vec![store.insert(&state).0];
    let mut approximate = approx.as_mut().map(|a| vec![a.insert(&state.to_c64()).0]);
    let mut symbols = Vec::new();
    let mut repeats = Vec::new();
    let mut first_repeat = None;
    let mut truncated_at = None;
    let mut max_bits = state.bits();
    for step in 1..=options.max_steps {
        let weights = channels.weights(&state);
        let k = sample_index(&exact::weights_to_f64(&weights), &mut rng)?;
        let next = channels.apply(k, &state).ok_or(Error::DarkState)?;
        let bits = next.bits();
        if bits > options.bit_cap {
            truncated_at = Some(step);
            break;
        }
        max_bits = max_bits.max(bits);
        let (label, new) = store.insert(&next);
        if !new {
            first_repeat.get_or_insert(step);
            if !repeats.contains(&label) {
                repeats.push(label);
            }
        }
        if let (Some(a), Some(series)) = (approx.as_mut(), approximate.as_mut()) {
            series.push(a.insert(&next.to_c64()).0);
        }
        labels.push(label);
        symbols.push(k);
        state = next;
    }
    Ok(LocalRun { store, labels, symbols, approximate, repeats, first_repeat, truncated_at, max_bits })
}

/// Runs exact trajectories from `π` in parallel and merges their labels
/// into one deterministic global store.
pub fn detect_pattern(channels: &IntegerChannels, options: &DetectOptions) -> Result<Detection> {
    let runs: Vec<LocalRun> = (0..options.trajectories as u64)
        .into_par_iter()
        .map(|i| run_exact(channels, options, i))
        .collect::<Result<_>>()?;
    let mut store = LabeledStateStore::new();
    let mut repeated = Vec::new();
    let mut trajectories = Vec::with_capacity(runs.len());
    for (i, run) in runs.into_iter().enumerate() {
        let map: Vec<usize> = run.store.iter().map(|(_, s)| store.insert(s).0).collect();
        let global = |l: usize| map[l - 1];
        for &l in &run.repeats {
            if !repeated.contains(&global(l)) {
                repeated.push(global(l));
            }
        }
        trajectories.push(TrajectoryLabels {
            stream: i as u64,
            labels: run.labels.iter().map(|&l| global(l)).collect(),
            symbols: run.symbols,
            approximate_labels: run.approximate,
            first_repeat: run.first_repeat,
            truncated_at: run.truncated_at,
            max_bits: run.max_bits,
        });
    }
    Ok(Detection { store, trajectories, repeated })
}

fn node_name(state: &ExactState, label: usize) -> String {
    let d = state.dim();
    match state.basis_index() {
        Some(i) if d.is_power_of_two() => format!("|{}⟩", occupation_string(i, d.trailing_zeros() as usize)),
        _ => format!("σ{label}"),
    }
}

/// Result of a breadth-first closure.
#[derive(Clone, Debug)]
pub enum Closure {
    Closed { graph: PatternGraph, store: LabeledStateStore },
    /// `max_states` was reached; `frontier` lists discovered but
    /// unexpanded labels.
    Incomplete { partial: PatternGraph, store: LabeledStateStore, frontier: Vec<usize> },
}

impl Closure {
    pub fn graph(&self) -> &PatternGraph {
        match self {
            Closure::Closed { graph, .. } => graph,
            Closure::Incomplete { partial, .. } => partial,
        }
    }

    pub fn store(&self) -> &LabeledStateStore {
        match self {
            Closure::Closed { store, .. } | Closure::Incomplete { store, .. } => store,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Closure::Closed { .. })
    }

    /// Labels the closure with visit counts from detected trajectories.
    pub fn count_visits(&mut self, detection: &Detection) {
        let lookup: HashMap<usize, usize> = detection
            .store
            .iter()
            .filter_map(|(g, s)| self.store().label_of(s).map(|l| (g, l)))
            .collect();
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for t in &detection.trajectories {
            for l in &t.labels {
                if let Some(&local) = lookup.get(l) {
                    *counts.entry(local).or_default() += 1.0;
                }
            }
        }
        let graph = match self {
            Closure::Closed { graph, .. } => graph,
            Closure::Incomplete { partial, .. } => partial,
        };
        for n in graph.nodes.iter_mut() {
            n.visits = counts.get(&n.label).copied().unwrap_or(0.0);
        }
    }
}

/// Explores every branch `M_kσ/tr(M_kσ)` with `tr(M_kσ) ≠ 0` from `seed`,
/// labeling states in breadth-first order.
pub fn close_pattern(channels: &IntegerChannels, seed: &ExactState, max_states: usize) -> Closure {
    let mut store = LabeledStateStore::new();
    store.insert(seed);
    let mut queue = VecDeque::from([1usize]);
    let mut edges = Vec::new();
    let mut overflow = false;
    while let Some(label) = queue.front().copied() {
        let state = store.get(label).expect("queued labels exist").clone();
        let weights = channels.weights(&state);
        let mut new_edges = Vec::new();
        let mut discovered = Vec::new();
        for (k, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let next = channels.apply(k, &state).expect("nonzero weight has an image");
            let to = match store.label_of(&next) {
                Some(l) => l,
                None if store.len() + discovered.len() >= max_states => {
                    overflow = true;
                    break;
                }
                None => {
                    if let Some(pos) = discovered.iter().position(|s: &ExactState| s == &next) {
                        store.len() + pos + 1
                    } else {
                        discovered.push(next);
                        store.len() + discovered.len()
                    }
                }
            };
            let p = num_traits::ToPrimitive::to_f64(w).unwrap_or(0.0);
            new_edges.push(PatternEdge { from: label, symbol: k, to, probability: p, exact: Some(w.clone()) });
        }
        if overflow {
            break;
        }
        queue.pop_front();
        for s in discovered {
            let (l, _) = store.insert(&s);
            queue.push_back(l);
        }
        edges.extend(new_edges);
    }
    let nodes = store.iter().map(|(l, s)| PatternNode { label: l, name: node_name(s, l), visits: 0.0 }).collect();
    let graph = PatternGraph { alphabet: channels.alphabet().to_vec(), nodes, edges, classification: None };
    if overflow {
        Closure::Incomplete { partial: graph, store, frontier: queue.into_iter().collect() }
    } else {
        let mut graph = graph;
        graph.classification = Some(Classification::Closed);
        Closure::Closed { graph, store }
    }
}

/// Strongly connected components with no edge leaving them, each sorted,
/// ordered by smallest label. A closed graph always has at least one; its
/// states are the recurrent ones.
pub fn bottom_components(graph: &PatternGraph) -> Vec<Vec<usize>> {
    let labels: Vec<usize> = {
        let mut l: Vec<usize> = graph.nodes.iter().map(|n| n.label).collect();
        l.sort_unstable();
        l
    };
    let pos: HashMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let n = labels.len();
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for e in &graph.edges {
        if let (Some(&a), Some(&b)) = (pos.get(&e.from), pos.get(&e.to)) {
            fwd[a].push(b);
            rev[b].push(a);
        }
    }
    // Kosaraju with explicit stacks.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < fwd[v].len() {
                stack.push((v, i + 1));
                let w = fwd[v][i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = count;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    let mut leaves = vec![true; count];
    for (a, outs) in fwd.iter().enumerate() {
        if outs.iter().any(|&b| comp[b] != comp[a]) {
            leaves[comp[a]] = false;
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, &c) in comp.iter().enumerate() {
        groups[c].push(labels[i]);
    }
    let mut out: Vec<Vec<usize>> = groups.into_iter().enumerate().filter(|(c, _)| leaves[*c]).map(|(_, g)| g).collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Shrinks a terminated closure to the recurrent pattern holding its
/// smallest-labeled bottom component, relabeled from that state.
pub fn minimal_pattern(channels: &IntegerChannels, closure: &Closure, max_states: usize) -> Option<Closure> {
    if !closure.is_closed() {
        return None;
    }
    let bottom = bottom_components(closure.graph());
    let seed = closure.store().get(*bottom.first()?.first()?)?;
    Some(close_pattern(channels, seed, max_states))
}

#[derive(Clone, Debug)]
pub struct RenewalReport<T> {
    pub renewal: bool,
    /// Rank of each `M_k` as a `d²×d²` map.
    pub ranks: Vec<usize>,
    /// Trace-one image of each rank-one `M_k`.
    pub reset_states: Vec<Option<VectorizedOperator<T>>>,
}

/// Renewal iff every monitored `M_k` has rank one; its image is the reset
/// state `σ_k`.
pub fn is_renewal<T: Field>(process: &ChannelProcess<T>) -> RenewalReport<T> {
    let tol = if T::EXACT { 0.0 } else { process.tolerances().tol_rank };
    let d = process.dim();
    let mut ranks = Vec::new();
    let mut reset_states = Vec::new();
    for m in process.channel_maps() {
        let r = rank(&m.matrix, tol);
        ranks.push(r);
        let image = (r == 1)
            .then(|| {
                // Any column with nonzero trace spans the image.
                (0..m.matrix.cols()).find_map(|c| {
                    let v = VectorizedOperator { dim: d, data: m.matrix.column(c) };
                    let tr = v.trace();
                    (!tr.is_negligible(tol.max(1e-14))).then(|| v.scale(&T::one().div_ref(&tr)))
                })
            })
            .flatten();
        reset_states.push(image);
    }
    let renewal = ranks.iter().all(|&r| r == 1);
    RenewalReport { renewal, ranks, reset_states }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub max_states: usize,
    pub recur_fraction: f64,
    pub bit_cap: u64,
    /// Closures attempted from distinct repeated states.
    pub closure_attempts: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            trials: 20,
            steps: 200,
            seed: 0,
            max_states: DEFAULT_MAX_STATES,
            recur_fraction: 0.9,
            bit_cap: DEFAULT_BIT_CAP,
            closure_attempts: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub classification: Classification,
    pub renewal: RenewalReport<ExactComplex>,
    pub detection: Detection,
    /// The closed graph, or the last partial closure attempted.
    pub closure: Option<Closure>,
    pub revisit_fraction: f64,
}

impl RecurrenceReport {
    pub fn graph(&self) -> Option<&PatternGraph> {
        self.closure.as_ref().map(Closure::graph)
    }
}

/// `renewal` if every `M_k` has rank one; else `closed` if a closure from
/// a repeated state terminates within `max_states`; else `recurring` if at
/// least `recur_fraction` of trials revisit some exact state; else `open`.
///
/// The recurring test is a finite-run stand-in for "revisited with
/// probability one".
pub fn classify_recurrence(process: &ChannelProcess<ExactComplex>, options: &ClassifyOptions) -> Result<RecurrenceReport> {
    let channels = IntegerChannels::new(process)?;
    let renewal = is_renewal(process);
    let detect = DetectOptions {
        max_steps: options.steps,
        trajectories: options.trials,
        seed: options.seed,
        bit_cap: options.bit_cap,
        tol_match: None,
    };
    let detection = detect_pattern(&channels, &detect)?;
    let revisit_fraction = detection.revisit_fraction();
    let finish = |mut closure: Closure, class| {
        closure.count_visits(&detection);
        match &mut closure {
            Closure::Closed { graph, .. } | Closure::Incomplete { partial: graph, .. } => {
                graph.classification = Some(class)
            }
        }
        closure
    };

    if renewal.renewal {
        let reset = renewal.reset_states[0].as_ref().expect("rank-one map has an image");
        let seed = ExactState::from_vectorized(process.dim(), &reset.data)?;
        let closure = finish(close_pattern(&channels, &seed, options.max_states), Classification::Renewal);
        return Ok(RecurrenceReport {
            classification: Classification::Renewal,
            renewal,
            detection,
            closure: Some(closure),
            revisit_fraction,
        });
    }

    let mut explored: Vec<Closure> = Vec::new();
    for &label in &detection.repeated {
        if explored.len() >= options.closure_attempts {
            break;
        }
        let state = detection.store.get(label).expect("repeated label exists");
        // A state already reached by a failed closure cannot close either.
        if explored.iter().any(|c| c.store().label_of(state).is_some()) {
            continue;
        }
        let closure = close_pattern(&channels, state, options.max_states);
        if closure.is_closed() {
            // Repeated transients (e.g. sector mixtures descending from π)
            // can close too; report the recurrent part.
            let minimal = minimal_pattern(&channels, &closure, options.max_states).unwrap_or(closure);
            let closure = finish(minimal, Classification::Closed);
            return Ok(RecurrenceReport {
                classification: Classification::Closed,
                renewal,
                detection,
                closure: Some(closure),
                revisit_fraction,
            });
        }
        explored.push(closure);
    }
    let last = explored.pop();
    let classification = if !detection.repeated.is_empty() && revisit_fraction >= options.recur_fraction {
        Classification::Recurring
    } else {
        Classification::Open
    };
    let closure = last.map(|c| finish(c, classification));
    Ok(RecurrenceReport { classification, renewal, detection, closure, revisit_fraction })
}

fn sector_of(index: usize, dim: usize) -> u32 {
    // Bit value 0 marks an occupied site.
    dim.trailing_zeros() - index.count_ones()
}

/// No coherences between particle-number sectors of a qubit chain.
pub fn sector_block_diagonal(state: &ExactState) -> bool {
    let d = state.dim();
    state.entries().iter().enumerate().all(|(idx, z)| z.is_zero() || sector_of(idx % d, d) == sector_of(idx / d, d))
}

/// Supported on a single particle-number sector of a qubit chain.
pub fn single_sector(state: &ExactState) -> bool {
    let d = state.dim();
    let mut sectors = state
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, z)| !z.is_zero())
        .flat_map(|(idx, _)| [sector_of(idx % d, d), sector_of(idx / d, d)]);
    let Some(first) = sectors.next() else { return true };
    sectors.all(|s| s == first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Matrix, Param, Tolerances, C64};
    use crate::model::{build_xy_chain, occupation_projector, ChainSpec, JumpChannel, OpenSystemModel};

    fn xx(l: usize) -> ChannelProcess<ExactComplex> {
        ChannelProcess::build(&build_xy_chain(&ChainSpec::xx(l, Param::from(1))).unwrap(), Tolerances::default()).unwrap()
    }

    fn state(occ: &str) -> ExactState {
        ExactState::from_matrix(&occupation_projector(occ).unwrap()).unwrap()
    }

    #[test]
    fn single_site_labels() {
        let ch = IntegerChannels::new(&xx(1)).unwrap();
        let det = detect_pattern(&ch, &DetectOptions { max_steps: 20, trajectories: 3, ..Default::default() }).unwrap();
        assert_eq!(det.store.len(), 3);
        for t in &det.trajectories {
            assert_eq!(t.first_repeat, Some(3));
            assert_eq!(t.labels[0], 1);
            assert_eq!(t.distinct(), 3);
            assert!(t.labels[1..].iter().all(|&l| l != 1));
        }
    }

    #[test]
    fn replay_is_identical() {
        let ch = IntegerChannels::new(&xx(3)).unwrap();
        let opts = DetectOptions { max_steps: 60, trajectories: 2, seed: 9, ..Default::default() };
        let a = detect_pattern(&ch, &opts).unwrap();
        let b = detect_pattern(&ch, &opts).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
    }

    #[test]
    fn single_site_closure() {
        let ch = IntegerChannels::new(&xx(1)).unwrap();
        let c = close_pattern(&ch, &state("0"), 100);
        let g = c.graph();
        assert!(c.is_closed());
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.nodes[0].name, "|0⟩");
        assert_eq!(g.successor(1, 1), Some(2));
        assert_eq!(g.successor(2, 0), Some(1));
    }

    #[test]
    fn two_site_closure() {
        let p = xx(2);
        let ch = IntegerChannels::new(&p).unwrap();
        let c = close_pattern(&ch, &state("11"), 100);
        assert!(c.is_closed());
        let g = c.graph();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 4);
        let mid = c.store().label_of(&state("10")).unwrap();
        let out: Vec<&PatternEdge> = g.out_edges(mid).collect();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|e| e.probability == 0.5));
        for n in &g.nodes {
            let total: num_rational::BigRational = g.out_edges(n.label).map(|e| e.exact.clone().unwrap()).sum();
            assert_eq!(total, num_rational::BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn three_site_closure_overflows() {
        let ch = IntegerChannels::new(&xx(3)).unwrap();
        match close_pattern(&ch, &state("111"), 200) {
            Closure::Incomplete { partial, frontier, store } => {
                assert_eq!(partial.nodes.len(), 200);
                assert!(!frontier.is_empty());
                assert_eq!(partial.successor(1, 0), store.label_of(&state("110")));
            }
            Closure::Closed { .. } => panic!("three sites should not close"),
        }
    }

    #[test]
    fn renewal_detection() {
        let r1 = is_renewal(&xx(1));
        assert!(r1.renewal);
        let e = r1.reset_states[0].as_ref().unwrap();
        assert_eq!(e.unvectorize(), occupation_projector("0").unwrap());
        assert!(!is_renewal(&xx(2)).renewal);

        // Classical two-level rate model: jumps between populations only.
        let mut up = Matrix::<ExactComplex>::zeros(2, 2);
        up.set(0, 1, ExactComplex::one());
        let mut down = Matrix::<ExactComplex>::zeros(2, 2);
        down.set(1, 0, ExactComplex::one());
        let model = OpenSystemModel::new(
            Matrix::zeros(2, 2),
            vec![
                JumpChannel { label: "U".into(), rate: ExactComplex::from_i64(2), operator: up },
                JumpChannel { label: "D".into(), rate: ExactComplex::from_i64(3), operator: down },
            ],
            ["U", "D"],
        )
        .unwrap();
        let p = ChannelProcess::build(&model, Tolerances::default()).unwrap();
        assert!(is_renewal(&p).renewal);
        let pf = ChannelProcess::build(&model.to_c64(), Tolerances::default()).unwrap();
        assert!(is_renewal(&pf).renewal);
    }

    #[test]
    fn renewal_implies_first_order_markov() {
        let p = ChannelProcess::build(&build_xy_chain::<C64>(&ChainSpec::xx(1, 1.0)).unwrap(), Tolerances::default())
            .unwrap();
        for h in 0..8usize {
            let history = [h >> 2 & 1, h >> 1 & 1, h & 1];
            let Ok(full) = crate::stats::conditional_next(&p, &history, None) else { continue };
            let last = crate::stats::conditional_next(&p, &history[2..], None).unwrap();
            assert!(full.iter().zip(&last).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn classification_of_small_chains() {
        let opts = ClassifyOptions::default();
        let r1 = classify_recurrence(&xx(1), &opts).unwrap();
        assert_eq!(r1.classification, Classification::Renewal);
        assert_eq!(r1.graph().unwrap().nodes.len(), 2);
        let r2 = classify_recurrence(&xx(2), &opts).unwrap();
        assert_eq!(r2.classification, Classification::Closed);
        let g = r2.graph().unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 4));
        assert!(g.nodes.iter().all(|n| n.visits > 0.0));
        assert_eq!(bottom_components(g), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn number_conserving_states_stay_in_one_sector() {
        let ch = IntegerChannels::new(&xx(3)).unwrap();
        let det = detect_pattern(&ch, &DetectOptions { max_steps: 80, trajectories: 2, ..Default::default() }).unwrap();
        // π is a mixture over sectors, so its descendants start as
        // mixtures too; none ever carries inter-sector coherences.
        for (label, s) in det.store.iter() {
            assert!(sector_block_diagonal(s), "label {label}");
        }
        assert!(!single_sector(det.store.get(1).unwrap()));
        // From a basis projector every reachable state sits in one sector.
        let closure = close_pattern(&ch, &state("111"), 300);
        for (label, s) in closure.store().iter() {
            assert!(single_sector(s), "label {label}");
        }
    }

    #[test]
    fn label_csv() {
        let t = TrajectoryLabels {
            stream: 0,
            labels: vec![1, 2, 3, 2],
            symbols: vec![0, 1, 0],
            approximate_labels: None,
            first_repeat: Some(3),
            truncated_at: None,
            max_bits: 1,
        };
        assert_eq!(t.to_csv(), "step,label\n0,1\n1,2\n2,3\n3,2\n");
    }
}
