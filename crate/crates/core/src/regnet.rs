//! Logical regulatory networks: components with bounded integer levels, one
//! regulation rule per component, and asynchronous unit-step dynamics.

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, Scope};
use crate::graph::{explore_bfs, Graph};
use crate::ids::{Level, MAX_LEVEL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("invalid component name `{0}`")]
    InvalidName(String),
    #[error("duplicate component `{0}`")]
    DuplicateComponent(String),
    #[error("range of `{name}` exceeds the cap of {MAX_LEVEL} (got {max})")]
    RangeTooLarge { name: String, max: Level },
    #[error("component `{0}` has no rule")]
    MissingRule(String),
    #[error("component `{0}` has more than one rule")]
    DuplicateRule(String),
    #[error("rule for unknown component `{0}`")]
    UnknownComponent(String),
    #[error("rule for `{0}` references an undeclared component or input")]
    UnresolvedReference(String),
    #[error("state has {got} levels, network has {expected} components")]
    StateLength { expected: usize, got: usize },
    #[error("level {level} of `{name}` is outside 0..={max}")]
    LevelOutOfRange { name: String, level: Level, max: Level },
    #[error("exploration exceeded {limit} states")]
    LimitExceeded { limit: usize, partial: Box<NetGraph> },
}

/// True for names of the form `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    /// Upper bound of the range `0..=max`.
    pub max: Level,
}

/// Levels of every component, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NetState(Vec<Level>);

impl NetState {
    pub fn new(levels: Vec<Level>) -> Self {
        NetState(levels)
    }

    pub fn levels(&self) -> &[Level] {
        &self.0
    }

    /// Copy with component `g` set to `level`.
    pub fn with(&self, g: usize, level: Level) -> NetState {
        let mut v = self.0.clone();
        v[g] = level;
        NetState(v)
    }
}

impl Deref for NetState {
    type Target = [Level];
    fn deref(&self) -> &[Level] {
        &self.0
    }
}

impl From<Vec<Level>> for NetState {
    fn from(v: Vec<Level>) -> Self {
        NetState(v)
    }
}

/// The step operator: move `current` one unit toward `target`.
pub fn step_toward(current: Level, target: Level) -> Level {
    use std::cmp::Ordering::*;
    match target.cmp(&current) {
        Greater => current + 1,
        Less => current - 1,
        Equal => current,
    }
}

/// Clamp an evaluated rule value into `0..=max`.
pub fn clamp_level(value: i64, max: Level) -> Level {
    value.clamp(0, max as i64) as Level
}

pub type NetGraph = Graph<NetState, usize>;

/// A regulatory network. Immutable once built.
///
/// Rules may reference up to `inputs` integration functions; a plain network
/// has none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    components: Vec<Component>,
    rules: Vec<Expr>,
    inputs: usize,
}

impl NetworkSpec {
    /// Build a plain network. `rules` pairs component names with rule bodies;
    /// every component needs exactly one.
    pub fn new(
        components: Vec<(String, Level)>,
        rules: Vec<(String, Expr)>,
    ) -> Result<Self, NetworkError> {
        Self::with_inputs(components, rules, 0)
    }

    pub(crate) fn with_inputs(
        components: Vec<(String, Level)>,
        rules: Vec<(String, Expr)>,
        inputs: usize,
    ) -> Result<Self, NetworkError> {
        let mut comps: Vec<Component> = Vec::with_capacity(components.len());
        for (name, max) in components {
            if !is_valid_name(&name) {
                return Err(NetworkError::InvalidName(name));
            }
            if comps.iter().any(|c| c.name == name) {
                return Err(NetworkError::DuplicateComponent(name));
            }
            if max > MAX_LEVEL {
                return Err(NetworkError::RangeTooLarge { name, max });
            }
            comps.push(Component { name, max });
        }
        let mut slots: Vec<Option<Expr>> = vec![None; comps.len()];
        for (name, rule) in rules {
            let ix = comps
                .iter()
                .position(|c| c.name == name)
                .ok_or_else(|| NetworkError::UnknownComponent(name.clone()))?;
            if slots[ix].is_some() {
                return Err(NetworkError::DuplicateRule(name));
            }
            if !references_resolve(&rule, comps.len(), inputs) {
                return Err(NetworkError::UnresolvedReference(name));
            }
            slots[ix] = Some(rule);
        }
        let rules = slots
            .into_iter()
            .zip(&comps)
            .map(|(r, c)| r.ok_or_else(|| NetworkError::MissingRule(c.name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NetworkSpec {
            components: comps,
            rules,
            inputs,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn rule(&self, g: usize) -> &Expr {
        &self.rules[g]
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn check_state(&self, state: &NetState) -> Result<(), NetworkError> {
        if state.len() != self.components.len() {
            return Err(NetworkError::StateLength {
                expected: self.components.len(),
                got: state.len(),
            });
        }
        for (c, &level) in self.components.iter().zip(state.iter()) {
            if level > c.max {
                return Err(NetworkError::LevelOutOfRange {
                    name: c.name.clone(),
                    level,
                    max: c.max,
                });
            }
        }
        Ok(())
    }

    /// Evaluate the rule of `g` under an arbitrary scope and clamp into range.
    pub fn target_in<S: Scope + ?Sized>(&self, scope: &S, g: usize) -> Level {
        clamp_level(self.rules[g].eval(scope), self.components[g].max)
    }

    /// Target level `x'_g` for component `g` in `state`.
    pub fn eval_target(&self, state: &NetState, g: usize) -> Level {
        self.target_in(&PlainScope(state), g)
    }

    /// Asynchronous successors: one per component not at its target.
    pub fn successors(&self, state: &NetState) -> Vec<(usize, NetState)> {
        (0..self.components.len())
            .filter_map(|g| {
                let next = step_toward(state[g], self.eval_target(state, g));
                (next != state[g]).then(|| (g, state.with(g, next)))
            })
            .collect()
    }

    /// Reachable state graph from `s0`, edges labelled with the component index.
    pub fn reachable_graph(&self, s0: NetState, limit: usize) -> Result<NetGraph, NetworkError> {
        self.reachable_graph_jobs(s0, limit, 1)
    }

    pub fn reachable_graph_jobs(
        &self,
        s0: NetState,
        limit: usize,
        jobs: usize,
    ) -> Result<NetGraph, NetworkError> {
        self.check_state(&s0)?;
        let (graph, _) = explore_bfs(
            s0,
            |s: &NetState| s.clone(),
            |s: &NetState| self.successors(s),
            limit,
            jobs,
        );
        if graph.is_truncated() {
            return Err(NetworkError::LimitExceeded {
                limit,
                partial: Box::new(graph),
            });
        }
        Ok(graph)
    }
}

fn references_resolve(e: &Expr, components: usize, inputs: usize) -> bool {
    let mut ok = true;
    e.walk(&mut |n| match n {
        Expr::Level(c) => ok &= *c < components,
        Expr::Sigma(s) => ok &= *s < inputs,
        Expr::ModuleLevel { .. } | Expr::Count | Expr::Alive(_) => ok = false,
        _ => {}
    });
    ok
}

struct PlainScope<'a>(&'a NetState);

impl Scope for PlainScope<'_> {
    fn level(&self, c: usize) -> i64 {
        self.0[c] as i64
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// A activates B, B activates C, C inhibits A.
    pub(crate) fn feedback_loop() -> NetworkSpec {
        let (a, b, c) = (Expr::level(0), Expr::level(1), Expr::level(2));
        NetworkSpec::new(
            vec![("A".into(), 1), ("B".into(), 1), ("C".into(), 1)],
            vec![
                ("A".into(), Expr::constant(1) - c),
                ("B".into(), a),
                ("C".into(), b),
            ],
        )
        .unwrap()
    }

    fn st(v: &[Level]) -> NetState {
        NetState::new(v.to_vec())
    }

    #[test]
    fn step_operator_branches() {
        assert_eq!(step_toward(0, 1), 1);
        assert_eq!(step_toward(2, 2), 2);
        assert_eq!(step_toward(3, 0), 2);
    }

    #[test]
    fn loop_targets() {
        let net = feedback_loop();
        let s = st(&[1, 0, 0]);
        assert_eq!(net.eval_target(&s, 0), 1);
        assert_eq!(net.eval_target(&s, 2), 0);
        assert_eq!(net.eval_target(&s, 1), 1);
    }

    #[test]
    fn loop_successors() {
        let net = feedback_loop();
        assert_eq!(net.successors(&st(&[1, 0, 0])), vec![(1, st(&[1, 1, 0]))]);
        assert_eq!(net.successors(&st(&[1, 1, 1])), vec![(0, st(&[0, 1, 1]))]);
    }

    #[test]
    fn identity_rule_is_stable() {
        let net =
            NetworkSpec::new(vec![("A".into(), 3)], vec![("A".into(), Expr::level(0))]).unwrap();
        for v in 0..=3 {
            assert!(net.successors(&st(&[v])).is_empty());
        }
        let g = net.reachable_graph(st(&[0]), 10).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn loop_reachable_cycle() {
        let g = feedback_loop().reachable_graph(st(&[1, 0, 0]), 100).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 6);
        let order = [
            [1, 0, 0],
            [1, 1, 0],
            [1, 1, 1],
            [0, 1, 1],
            [0, 0, 1],
            [0, 0, 0],
        ];
        for (i, s) in order.iter().enumerate() {
            assert_eq!(g.state(i).levels(), s);
        }
    }

    #[test]
    fn rule_values_are_clamped() {
        let net = NetworkSpec::new(
            vec![("A".into(), 2)],
            vec![("A".into(), Expr::constant(9))],
        )
        .unwrap();
        assert_eq!(net.eval_target(&st(&[0]), 0), 2);
        let net = NetworkSpec::new(
            vec![("A".into(), 2)],
            vec![("A".into(), Expr::constant(-4))],
        )
        .unwrap();
        assert_eq!(net.eval_target(&st(&[2]), 0), 0);
    }

    #[test]
    fn construction_errors() {
        let r = NetworkSpec::new(vec![("A".into(), 1)], vec![]);
        assert_eq!(r, Err(NetworkError::MissingRule("A".into())));
        let r = NetworkSpec::new(vec![("A".into(), 16)], vec![]);
        assert!(matches!(r, Err(NetworkError::RangeTooLarge { .. })));
        let r = NetworkSpec::new(vec![("1A".into(), 1)], vec![]);
        assert!(matches!(r, Err(NetworkError::InvalidName(_))));
        let r = NetworkSpec::new(
            vec![("A".into(), 1)],
            vec![("A".into(), Expr::level(3))],
        );
        assert!(matches!(r, Err(NetworkError::UnresolvedReference(_))));
        let r = NetworkSpec::new(
            vec![("A".into(), 1)],
            vec![("A".into(), Expr::sigma(0))],
        );
        assert!(matches!(r, Err(NetworkError::UnresolvedReference(_))));
        let r = NetworkSpec::new(
            vec![("A".into(), 1), ("A".into(), 1)],
            vec![],
        );
        assert!(matches!(r, Err(NetworkError::DuplicateComponent(_))));
    }

    #[test]
    fn limit_exceeded_carries_partial() {
        match feedback_loop().reachable_graph(st(&[1, 0, 0]), 3) {
            Err(NetworkError::LimitExceeded { partial, .. }) => {
                assert_eq!(partial.node_count(), 3);
                assert!(partial.is_truncated());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn step_moves_by_at_most_one(x in 0u8..=15, y in 0u8..=15) {
            let s = step_toward(x, y);
            prop_assert!((s as i16 - x as i16).abs() <= 1);
            prop_assert_eq!((s as i16 - x as i16).signum(), (y as i16 - x as i16).signum());
        }

        #[test]
        fn successors_differ_in_one_component(a in 0u8..2, b in 0u8..2, c in 0u8..2) {
            let net = feedback_loop();
            let s = st(&[a, b, c]);
            for (g, t) in net.successors(&s) {
                let diffs: Vec<usize> = (0..3).filter(|&i| s[i] != t[i]).collect();
                prop_assert_eq!(diffs, vec![g]);
                prop_assert_eq!((s[g] as i16 - t[g] as i16).abs(), 1);
            }
        }

        #[test]
        fn reachable_graph_is_closed(a in 0u8..2, b in 0u8..2, c in 0u8..2) {
            let net = feedback_loop();
            let g = net.reachable_graph(st(&[a, b, c]), 100).unwrap();
            for node in g.states() {
                let sub = net.reachable_graph(node.clone(), 100).unwrap();
                for s in sub.states() {
                    prop_assert!(g.states().contains(s));
                }
            }
        }
    }
}
