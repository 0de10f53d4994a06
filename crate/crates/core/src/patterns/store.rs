//! Labels for post-jump states, assigned `1, 2, …` in first-seen order.

use std::collections::HashMap;

use crate::algebra::{trace_distance, Matrix, C64};

use super::exact::ExactState;

/// Exact store: equal labels iff equal Gaussian-rational densities.
#[derive(Clone, Debug, Default)]
pub struct LabeledStateStore {
    index: HashMap<ExactState, usize>,
    states: Vec<ExactState>,
}

impl LabeledStateStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the label and whether it was newly assigned.
    pub fn insert(&mut self, state: &ExactState) -> (usize, bool) {
        if let Some(&label) = self.index.get(state) {
            return (label, false);
        }
        self.states.push(state.clone());
        let label = self.states.len();
        self.index.insert(state.clone(), label);
        (label, true)
    }

    pub fn label_of(&self, state: &ExactState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Representative of a label (labels start at 1).
    pub fn get(&self, label: usize) -> Option<&ExactState> {
        label.checked_sub(1).and_then(|i| self.states.get(i))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &ExactState)> {
        self.states.iter().enumerate().map(|(i, s)| (i + 1, s))
    }
}

/// Approximate store: a state joins the lowest label whose representative
/// lies within `tol_match` in trace distance.
#[derive(Clone, Debug)]
pub struct ApproximateStore {
    tol_match: f64,
    representatives: Vec<Matrix<C64>>,
}

impl ApproximateStore {
    pub fn new(tol_match: f64) -> Self {
        Self { tol_match, representatives: Vec::new() }
    }

    pub fn tol_match(&self) -> f64 {
        self.tol_match
    }

    pub fn insert(&mut self, state: &Matrix<C64>) -> (usize, bool) {
        for (i, rep) in self.representatives.iter().enumerate() {
            // ½‖Δ‖₁ ≥ ½ max|Δ_ij| cheaply rules most candidates out.
            if 0.5 * rep.max_abs_diff(state) > self.tol_match {
                continue;
            }
            if trace_distance(rep, state) <= self.tol_match {
                return (i + 1, false);
            }
        }
        self.representatives.push(state.clone());
        (self.representatives.len(), true)
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn get(&self, label: usize) -> Option<&Matrix<C64>> {
        label.checked_sub(1).and_then(|i| self.representatives.get(i))
    }
}
