//! Post-jump dynamics: sample `k` with weight `tr(M_k ρ)`, then move to
//! `M_k ρ / tr(M_k ρ)`.
//!
//! Randomness: a trajectory with seed `s` and stream `i` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. Ensembles give
//! trajectory `i` the master seed and stream `i`, so runs are reproducible
//! regardless of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{Field, VectorizedOperator};
use crate::channel::ChannelProcess;
use crate::error::{Error, Result};
use crate::stats::{format_sequence, JointDistribution, SymbolSequence};

pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws an index with probability proportional to `weights`; negative
/// weights count as zero.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::DarkState);
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(k);
        if u < acc {
            return Ok(k);
        }
    }
    last.ok_or(Error::DarkState)
}

fn hermitize<T: Field>(dim: usize, data: Vec<T>) -> Vec<T> {
    if T::EXACT {
        return data;
    }
    let m = VectorizedOperator { dim, data }.unvectorize().hermitian_part();
    crate::algebra::vectorize(&m).expect("square").data
}

/// One jump: returns the symbol and the normalized post-jump state.
pub fn step<T: Field, R: Rng + ?Sized>(process: &ChannelProcess<T>, rho: &[T], rng: &mut R) -> Result<(usize, Vec<T>)> {
    let weights: Vec<T> = (0..process.alphabet().len()).map(|k| process.weight(k, rho)).collect();
    let floats: Vec<f64> = weights.iter().map(|w| if w.is_zero() { 0.0 } else { w.to_c64().re }).collect();
    let k = sample_index(&floats, rng)?;
    let next = process.apply(k, rho);
    let normalized: Vec<T> = next.iter().map(|x| x.div_ref(&weights[k])).collect();
    Ok((k, hermitize(process.dim(), normalized)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOptions {
    /// Recorded jumps.
    pub steps: usize,
    /// Jumps simulated and discarded before recording starts.
    pub burn_in: usize,
    /// Keep every `thin`-th state; `None` keeps no states.
    pub keep_states: Option<usize>,
}

impl SimulationOptions {
    pub fn new(steps: usize) -> Self {
        Self { steps, burn_in: 0, keep_states: None }
    }
    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }
    pub fn keep_states(mut self, thin: usize) -> Self {
        self.keep_states = Some(thin.max(1));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub seed: u64,
    pub stream: u64,
    pub symbols: SymbolSequence,
    /// With `keep_states = Some(1)`, `states[i]` is the state before
    /// `symbols[i]` and `states.len() = symbols.len() + 1`.
    pub states: Vec<Vec<T>>,
    /// State at the start of recording (after burn-in).
    pub initial: Vec<T>,
    pub thin: Option<usize>,
}

impl<T: Field> TrajectoryRecord<T> {
    /// `(state, symbol, successor)` triples; needs unthinned states.
    pub fn transitions(&self) -> Result<Vec<(&[T], usize, &[T])>> {
        if self.thin != Some(1) {
            return Err(Error::Precondition("transitions need every state to be kept".into()));
        }
        Ok((0..self.symbols.len()).map(|i| (&self.states[i][..], self.symbols[i], &self.states[i + 1][..])).collect())
    }

    pub fn symbol_string(&self, alphabet: &[String]) -> String {
        format_sequence(alphabet, &self.symbols)
    }
}

/// Runs `burn_in + steps` jumps from `initial` (default `π`) and records
/// the last `steps`.
pub fn simulate<T: Field>(
    process: &ChannelProcess<T>,
    options: &SimulationOptions,
    seed: u64,
    initial: Option<&[T]>,
) -> Result<TrajectoryRecord<T>> {
    simulate_stream(process, options, seed, 0, initial)
}

pub fn simulate_stream<T: Field>(
    process: &ChannelProcess<T>,
    options: &SimulationOptions,
    seed: u64,
    stream: u64,
    initial: Option<&[T]>,
) -> Result<TrajectoryRecord<T>> {
    if options.steps == 0 {
        return Err(Error::Precondition("steps must be at least 1".into()));
    }
    let n = process.dim() * process.dim();
    let mut rho = match initial {
        Some(r) if r.len() != n => return Err(Error::Dimension(format!("initial state must have length {n}"))),
        Some(r) => r.to_vec(),
        None => process.jss().data.clone(),
    };
    let mut rng = trajectory_rng(seed, stream);
    for _ in 0..options.burn_in {
        rho = step(process, &rho, &mut rng)?.1;
    }
    let initial = rho.clone();
    let mut symbols = Vec::with_capacity(options.steps);
    let mut states = Vec::new();
    let keep = |i: usize| options.keep_states.is_some_and(|t| i.is_multiple_of(t));
    if keep(0) {
        states.push(rho.clone());
    }
    for i in 0..options.steps {
        let (k, next) = step(process, &rho, &mut rng)?;
        symbols.push(k);
        rho = next;
        if keep(i + 1) {
            states.push(rho.clone());
        }
    }
    Ok(TrajectoryRecord { seed, stream, symbols, states, initial, thin: options.keep_states })
}

/// `count` independent trajectories, trajectory `i` on stream `i` of the
/// master seed. Output order is by trajectory index.
pub fn ensemble<T: Field>(
    process: &ChannelProcess<T>,
    options: &SimulationOptions,
    master_seed: u64,
    count: usize,
    initial: Option<&[T]>,
) -> Result<Vec<TrajectoryRecord<T>>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_stream(process, options, master_seed, i, initial))
        .collect()
}

/// Sliding-window frequencies of length-`n` tuples over all records.
pub fn empirical_distribution<T>(records: &[TrajectoryRecord<T>], alphabet: &[String], n: usize) -> Result<JointDistribution> {
    if n == 0 {
        return Err(Error::Precondition("order must be at least 1".into()));
    }
    let size = crate::stats::enumeration_size(alphabet.len(), n, crate::stats::ENUMERATION_CAP)?;
    let m = alphabet.len();
    let mut counts = vec![0u64; size];
    let mut windows = 0u64;
    let mut available = 0usize;
    for r in records {
        available += r.symbols.len();
        if r.symbols.len() < n {
            continue;
        }
        for w in r.symbols.windows(n) {
            counts[w.iter().fold(0, |acc, &k| acc * m + k)] += 1;
            windows += 1;
        }
    }
    if windows == 0 {
        return Err(Error::InsufficientData { needed: n, available });
    }
    let probs = counts.iter().map(|&c| c as f64 / windows as f64).collect();
    JointDistribution::from_raw(n, alphabet.to_vec(), probs)
}

/// One line per trajectory, symbols concatenated.
pub fn symbol_stream<T>(records: &[TrajectoryRecord<T>], alphabet: &[String]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format_sequence(alphabet, &r.symbols));
        out.push('\n');
    }
    out
}
