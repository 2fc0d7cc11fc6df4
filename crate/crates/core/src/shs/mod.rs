//! Stochastic hybrid system models of age processes.
//!
//! A model pairs a finite CTMC with a continuous age vector `x` of length
//! `D`. In discrete state `q` every coordinate `j` with `b_q[j] = 1` grows at
//! unit rate; a transition moves the chain and applies a coordinate-selection
//! reset to `x`. Coordinate 0 is the monitor age of the source of interest.

mod build;
mod solve;
mod table;

use std::fmt;

use thiserror::Error;

use crate::linalg::SolveError;

pub use build::{
    aaoi_vs_truncation, build_finite_model, build_truncated_mm1, build_two_source_mm11_star, TruncationPoint,
    TruncationSpec, TruncationSweep, DEFAULT_CAP_ONE_SOURCE, DEFAULT_CAP_TWO_SOURCES,
};
pub use solve::{solve_age_system, solve_age_system_with, stationary_distribution, AgeSystemSolution};
pub use table::{dump_table, parse_table};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShsError {
    #[error("model has no states")]
    NoStates,
    #[error("age dimension must be at least 1")]
    ZeroAgeDim,
    #[error("state {state}: growth vector has length {len}, expected {expected}")]
    GrowthLength { state: usize, len: usize, expected: usize },
    #[error("state {state}: the monitor coordinate must grow (b[0] = 1)")]
    MonitorNotGrowing { state: usize },
    #[error("transition {l}: rate must be positive and finite, got {rate}")]
    BadRate { l: usize, rate: f64 },
    #[error("transition {l}: state index {index} out of range")]
    StateIndex { l: usize, index: usize },
    #[error("transition {l}: reset has length {len}, expected {expected}")]
    ResetLength { l: usize, len: usize, expected: usize },
    #[error("transition {l}: reset reads coordinate x{index}, outside the age vector")]
    ResetIndex { l: usize, index: usize },
    #[error("state {state} has no outgoing transition")]
    NoOutgoing { state: usize },
    #[error("state {state} does not communicate with state 0")]
    Reducible { state: usize },
    #[error("linear solve failed for {model}: {source}")]
    Solve { model: String, source: SolveError },
    #[error("negative age correlation v[{state}][{coord}] = {value:e} in {model}; the SHS method does not apply")]
    Negative {
        model: String,
        state: usize,
        coord: usize,
        value: f64,
    },
    #[error("{what} residual {residual:e} exceeds {limit:e} for {model}")]
    Inaccurate {
        model: String,
        what: &'static str,
        residual: f64,
        limit: f64,
    },
    #[error("{0} has no finite SHS table; use build_truncated_mm1")]
    NotFinite(crate::closed_form::ClosedFormId),
    #[error("truncation must allow at least one packet")]
    ZeroTruncation,
    #[error("expected 1 or 2 arrival rates, got {0}")]
    SourceCount(usize),
    #[error("source of interest {soi} is not one of 1..={sources}")]
    SourceOfInterest { soi: usize, sources: usize },
    #[error("{name} must be {constraint}, got {value}")]
    InvalidRate {
        name: String,
        constraint: &'static str,
        value: f64,
    },
    #[error("truncation N = {n} exceeds the cap {cap} for {sources} source(s)")]
    TruncationCap { n: usize, cap: usize, sources: usize },
    #[error("truncation list must be nonempty and strictly increasing")]
    TruncationList,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Where an output coordinate of a reset takes its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reset {
    Copy(usize),
    Zero,
}

/// `x' = A x` with `A` a 0/1 matrix having at most one 1 per row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResetMap(pub Vec<Reset>);

impl ResetMap {
    pub fn identity(d: usize) -> Self {
        ResetMap((0..d).map(Reset::Copy).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0
            .iter()
            .map(|r| match r {
                Reset::Copy(i) => x[*i],
                Reset::Zero => 0.0,
            })
            .collect()
    }
}

impl fmt::Display for ResetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, r) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            match r {
                Reset::Copy(i) => write!(f, "x{i}")?,
                Reset::Zero => write!(f, "0")?,
            }
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub label: String,
    pub growth: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: usize,
    pub rate: f64,
    pub from: usize,
    pub to: usize,
    pub reset: ResetMap,
}

/// A validated SHS: every state reachable from and able to reach state 0,
/// every state with an exit, positive rates, in-range resets.
#[derive(Debug, Clone, PartialEq)]
pub struct ShsModel {
    name: String,
    states: Vec<State>,
    age_dim: usize,
    transitions: Vec<Transition>,
    source_of_interest: usize,
}

impl ShsModel {
    pub fn new(
        name: impl Into<String>,
        states: Vec<State>,
        age_dim: usize,
        transitions: Vec<Transition>,
        source_of_interest: usize,
    ) -> Result<Self, ShsError> {
        let m = ShsModel {
            name: name.into(),
            states,
            age_dim,
            transitions,
            source_of_interest,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), ShsError> {
        let n = self.states.len();
        if n == 0 {
            return Err(ShsError::NoStates);
        }
        if self.age_dim == 0 {
            return Err(ShsError::ZeroAgeDim);
        }
        for (q, s) in self.states.iter().enumerate() {
            if s.growth.len() != self.age_dim {
                return Err(ShsError::GrowthLength {
                    state: q,
                    len: s.growth.len(),
                    expected: self.age_dim,
                });
            }
            if !s.growth[0] {
                return Err(ShsError::MonitorNotGrowing { state: q });
            }
        }
        let mut has_exit = vec![false; n];
        for t in &self.transitions {
            let l = t.id;
            if !(t.rate.is_finite() && t.rate > 0.0) {
                return Err(ShsError::BadRate { l, rate: t.rate });
            }
            for index in [t.from, t.to] {
                if index >= n {
                    return Err(ShsError::StateIndex { l, index });
                }
            }
            if t.reset.len() != self.age_dim {
                return Err(ShsError::ResetLength {
                    l,
                    len: t.reset.len(),
                    expected: self.age_dim,
                });
            }
            for r in &t.reset.0 {
                if let Reset::Copy(index) = r {
                    if *index >= self.age_dim {
                        return Err(ShsError::ResetIndex { l, index: *index });
                    }
                }
            }
            has_exit[t.from] = true;
        }
        if let Some(state) = has_exit.iter().position(|e| !e) {
            return Err(ShsError::NoOutgoing { state });
        }
        let forward = self.reach(|t| (t.from, t.to));
        let backward = self.reach(|t| (t.to, t.from));
        if let Some(state) = (0..n).find(|q| !forward[*q] || !backward[*q]) {
            return Err(ShsError::Reducible { state });
        }
        Ok(())
    }

    fn reach(&self, edge: impl Fn(&Transition) -> (usize, usize)) -> Vec<bool> {
        let n = self.states.len();
        let mut adj = vec![Vec::new(); n];
        for t in &self.transitions {
            let (a, b) = edge(t);
            adj[a].push(b);
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(q) = stack.pop() {
            for &r in &adj[q] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn age_dim(&self) -> usize {
        self.age_dim
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn source_of_interest(&self) -> usize {
        self.source_of_interest
    }

    /// Relabels states by `perm` (new index of old state `q` is `perm[q]`).
    pub fn permute_states(&self, perm: &[usize]) -> Result<ShsModel, ShsError> {
        let mut states = self.states.clone();
        for (q, s) in self.states.iter().enumerate() {
            states[perm[q]] = s.clone();
        }
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                from: perm[t.from],
                to: perm[t.to],
                ..t.clone()
            })
            .collect();
        ShsModel::new(
            self.name.clone(),
            states,
            self.age_dim,
            transitions,
            self.source_of_interest,
        )
    }

    /// Same model with transitions listed in the order given by `order`.
    pub fn reorder_transitions(&self, order: &[usize]) -> Result<ShsModel, ShsError> {
        let transitions = order.iter().map(|&k| self.transitions[k].clone()).collect();
        ShsModel::new(
            self.name.clone(),
            self.states.clone(),
            self.age_dim,
            transitions,
            self.source_of_interest,
        )
    }
}
