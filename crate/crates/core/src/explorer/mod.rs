//! Reachable state graph of a model, and queries over it.

mod export;
mod key;

use std::collections::HashMap;

use thiserror::Error;

use crate::bundle::{BundleError, BundleState, Event, Model};
use crate::expr::{Expr, Scope};
use crate::graph::{explore_bfs, Edge, Graph};
use crate::ids::ModuleId;

pub use export::{export_dot, export_json, state_from_json, state_text, state_to_json, StateJsonError};
pub use key::{CanonicalKey, KeyError};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_states: usize,
    /// Worker threads used per BFS level. Results do not depend on it.
    pub jobs: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: DEFAULT_MAX_STATES,
            jobs: 1,
        }
    }
}

impl ExploreLimits {
    pub fn with_max_states(max_states: usize) -> Self {
        ExploreLimits {
            max_states,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("state limit of {limit} reached; partial graph has {} states", partial.node_count())]
    LimitExceeded {
        limit: usize,
        partial: Box<StateGraph>,
    },
    #[error("max_states must be at least 1")]
    InvalidLimit,
    #[error(transparent)]
    InvalidState(#[from] BundleError),
    #[error("graph is truncated; the analysis needs the complete graph")]
    Truncated,
}

/// Explored transition system: states deduplicated by canonical key, node 0
/// is the initial state, and nodes are numbered in BFS discovery order.
#[derive(Debug, Clone)]
pub struct StateGraph {
    graph: Graph<BundleState, Event>,
    keys: Vec<CanonicalKey>,
    index: HashMap<CanonicalKey, usize>,
}

pub fn explore(
    model: &Model,
    init: &BundleState,
    limits: ExploreLimits,
) -> Result<StateGraph, ExploreError> {
    if limits.max_states == 0 {
        return Err(ExploreError::InvalidLimit);
    }
    model.check_state(init)?;
    let (graph, keys) = explore_bfs(
        init.clone(),
        CanonicalKey::encode,
        |s: &BundleState| model.successors(s),
        limits.max_states,
        limits.jobs.max(1),
    );
    let index = keys.iter().cloned().enumerate().map(|(n, k)| (k, n)).collect();
    let sg = StateGraph { graph, keys, index };
    if sg.is_truncated() {
        return Err(ExploreError::LimitExceeded {
            limit: limits.max_states,
            partial: Box::new(sg),
        });
    }
    Ok(sg)
}

impl StateGraph {
    pub fn initial(&self) -> usize {
        self.graph.initial()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn is_truncated(&self) -> bool {
        self.graph.is_truncated()
    }

    pub fn states(&self) -> &[BundleState] {
        self.graph.states()
    }

    pub fn state(&self, node: usize) -> &BundleState {
        self.graph.state(node)
    }

    pub fn key(&self, node: usize) -> &CanonicalKey {
        &self.keys[node]
    }

    pub fn edges(&self) -> &[Edge<Event>] {
        self.graph.edges()
    }

    pub fn lookup(&self, state: &BundleState) -> Option<usize> {
        self.index.get(&CanonicalKey::encode(state)).copied()
    }

    /// Shortest event trace from the initial state to a state satisfying `pred`.
    pub fn trace_to(&self, pred: impl FnMut(&BundleState) -> bool) -> Option<Vec<Event>> {
        let path = self.graph.shortest_trace(pred)?;
        Some(
            path.into_iter()
                .map(|e| self.graph.edges()[e].label.clone())
                .collect(),
        )
    }

    /// Terminal strongly connected components (attractors), each sorted,
    /// ordered by smallest node.
    pub fn terminal_sccs(&self) -> Result<Vec<Vec<usize>>, ExploreError> {
        if self.is_truncated() {
            return Err(ExploreError::Truncated);
        }
        Ok(self.graph.terminal_sccs())
    }

    /// Nodes without successors.
    pub fn deadlocks(&self) -> Result<Vec<usize>, ExploreError> {
        if self.is_truncated() {
            return Err(ExploreError::Truncated);
        }
        let out = self.graph.out_edges();
        Ok((0..self.node_count()).filter(|&n| out[n].is_empty()).collect())
    }
}

/// Evaluation scope for reachability predicates.
///
/// `X@i` reads component `X` of module `i` (0 if `i` is not allocated),
/// `count()` is the number of allocated modules and `alive(i)` tests
/// allocation. A bare component name is read in the module currently bound
/// by [`holds_in`].
struct QueryScope<'a> {
    model: &'a Model,
    state: &'a BundleState,
    module: Option<ModuleId>,
}

impl Scope for QueryScope<'_> {
    fn level(&self, c: usize) -> i64 {
        self.module
            .and_then(|i| self.state.module(i))
            .map_or(0, |l| l[c] as i64)
    }

    fn sigma(&self, s: usize) -> i64 {
        self.module
            .map_or(0, |i| self.model.sigma_value(self.state, i, s) as i64)
    }

    fn module_level(&self, c: usize, i: ModuleId) -> i64 {
        self.state.module(i).map_or(0, |l| l[c] as i64)
    }

    fn module_count(&self) -> i64 {
        self.state.module_count() as i64
    }

    fn alive(&self, i: ModuleId) -> bool {
        self.state.module(i).is_some()
    }
}

fn uses_local_forms(e: &Expr) -> bool {
    let mut local = false;
    e.walk(&mut |n| local |= matches!(n, Expr::Level(_) | Expr::Sigma(_)));
    local
}

/// Does `state` satisfy the query predicate?
///
/// A predicate mentioning bare component names or integrations holds if some
/// allocated module satisfies it; otherwise it is evaluated once on the
/// whole state.
pub fn holds_in(model: &Model, pred: &Expr, state: &BundleState) -> bool {
    let scope = |module| QueryScope {
        model,
        state,
        module,
    };
    if uses_local_forms(pred) {
        state.allocated().any(|i| pred.holds(&scope(Some(i))))
    } else {
        pred.holds(&scope(None))
    }
}

/// Shortest trace to a state satisfying `pred`, or `None` if unreachable.
pub fn query_reach(graph: &StateGraph, model: &Model, pred: &Expr) -> Option<Vec<Event>> {
    graph.trace_to(|s| holds_in(model, pred, s))
}
