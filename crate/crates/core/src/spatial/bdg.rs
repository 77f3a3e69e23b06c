//! Bounded-degree graphs: cells sit on nodes, edges are immediate
//! neighbourhood, and every node keeps degree at most `bound`.
//!
//! Growth happens either by attaching a new node next to an anchor
//! ([`InsertionPoint`]) or, when the anchor is saturated, by splitting one of
//! its edges and pulling the other endpoint away ([`SplitPoint`]).
//!
//! A split of edge `anchor-pulled` by new node `k` removes that edge, links `k`
//! to both endpoints, links `k` to every common neighbour in `keep`, and drops
//! the edge `c-pulled` for each `c` in `keep ∖ retain`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{Neighboring, SpatialError};
use crate::ids::ModuleId;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BdgGraph {
    bound: usize,
    adj: BTreeMap<ModuleId, BTreeSet<ModuleId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InsertionPoint {
    pub anchor: ModuleId,
    pub extra: BTreeSet<ModuleId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitPoint {
    pub anchor: ModuleId,
    pub pulled: ModuleId,
    pub keep: BTreeSet<ModuleId>,
    pub retain: BTreeSet<ModuleId>,
}

/// A position where a node can be (re)inserted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placement {
    Insert(InsertionPoint),
    Split(SplitPoint),
}

fn fmt_set(f: &mut fmt::Formatter<'_>, s: &BTreeSet<ModuleId>) -> fmt::Result {
    write!(f, "{{")?;
    for (n, m) in s.iter().enumerate() {
        if n > 0 {
            write!(f, ",")?;
        }
        write!(f, "{m}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Insert(p) => {
                write!(f, "ins[{}+", p.anchor)?;
                fmt_set(f, &p.extra)?;
                write!(f, "]")
            }
            Placement::Split(s) => {
                write!(f, "split[{}-{} keep", s.anchor, s.pulled)?;
                fmt_set(f, &s.keep)?;
                write!(f, " retain")?;
                fmt_set(f, &s.retain)?;
                write!(f, "]")
            }
        }
    }
}

impl Placement {
    pub fn anchor(&self) -> ModuleId {
        match self {
            Placement::Insert(p) => p.anchor,
            Placement::Split(s) => s.anchor,
        }
    }

    /// Add node `k` at this placement.
    pub fn apply(&self, g: &BdgGraph, k: ModuleId) -> Result<BdgGraph, SpatialError> {
        match self {
            Placement::Insert(p) => g.apply_insertion(p, k),
            Placement::Split(s) => g.apply_split(s, k),
        }
    }
}

/// All subsets of `items` with at most `max_len` elements, in lexicographic order.
fn subsets(items: &[ModuleId], max_len: usize) -> Vec<BTreeSet<ModuleId>> {
    fn go(
        items: &[ModuleId],
        start: usize,
        max_len: usize,
        cur: &mut Vec<ModuleId>,
        out: &mut Vec<BTreeSet<ModuleId>>,
    ) {
        out.push(cur.iter().copied().collect());
        if cur.len() == max_len {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, i + 1, max_len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, 0, max_len, &mut Vec::new(), &mut out);
    out
}

impl BdgGraph {
    pub fn new(bound: usize) -> Result<Self, SpatialError> {
        if bound == 0 {
            return Err(SpatialError::InvalidBound(bound));
        }
        Ok(BdgGraph {
            bound,
            adj: BTreeMap::new(),
        })
    }

    /// Build from a node list and an edge list, checking every invariant.
    pub fn from_edges(
        bound: usize,
        nodes: impl IntoIterator<Item = ModuleId>,
        edges: impl IntoIterator<Item = (ModuleId, ModuleId)>,
    ) -> Result<Self, SpatialError> {
        let mut g = BdgGraph::new(bound)?;
        for n in nodes {
            g = g.add_node(n)?;
        }
        for (a, b) in edges {
            g.link(a, b)?;
        }
        Ok(g)
    }

    /// Ring `0-1-…-(n-1)-0`.
    pub fn ring(bound: usize, n: u16) -> Result<Self, SpatialError> {
        let nodes = (0..n).map(ModuleId);
        let edges = (0..n).map(|i| (ModuleId(i), ModuleId((i + 1) % n)));
        Self::from_edges(bound, nodes, edges)
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn nodes(&self) -> impl Iterator<Item = ModuleId> + '_ {
        self.adj.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn contains(&self, i: ModuleId) -> bool {
        self.adj.contains_key(&i)
    }

    pub fn adjacency(&self) -> &BTreeMap<ModuleId, BTreeSet<ModuleId>> {
        &self.adj
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(ModuleId, ModuleId)> {
        self.adj
            .iter()
            .flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn neighbors(&self, i: ModuleId) -> Result<&BTreeSet<ModuleId>, SpatialError> {
        self.adj.get(&i).ok_or(SpatialError::UnknownNode(i))
    }

    pub fn degree(&self, i: ModuleId) -> Result<usize, SpatialError> {
        Ok(self.neighbors(i)?.len())
    }

    fn deg(&self, i: ModuleId) -> usize {
        self.adj.get(&i).map_or(0, BTreeSet::len)
    }

    pub fn add_node(&self, i: ModuleId) -> Result<Self, SpatialError> {
        if self.contains(i) {
            return Err(SpatialError::DuplicateNode(i));
        }
        let mut g = self.clone();
        g.adj.insert(i, BTreeSet::new());
        Ok(g)
    }

    fn link(&mut self, a: ModuleId, b: ModuleId) -> Result<(), SpatialError> {
        if a == b {
            return Err(SpatialError::SelfLoop(a));
        }
        for n in [a, b] {
            if !self.contains(n) {
                return Err(SpatialError::UnknownNode(n));
            }
        }
        if self.adj[&a].contains(&b) {
            return Err(SpatialError::DuplicateEdge(a, b));
        }
        for n in [a, b] {
            if self.deg(n) + 1 > self.bound {
                return Err(SpatialError::DegreeExceeded {
                    node: n,
                    bound: self.bound,
                });
            }
        }
        self.adj.get_mut(&a).unwrap().insert(b);
        self.adj.get_mut(&b).unwrap().insert(a);
        Ok(())
    }

    fn unlink(&mut self, a: ModuleId, b: ModuleId) {
        if let Some(s) = self.adj.get_mut(&a) {
            s.remove(&b);
        }
        if let Some(s) = self.adj.get_mut(&b) {
            s.remove(&a);
        }
    }

    /// Symmetric, irreflexive, every degree within the bound.
    pub fn check_invariants(&self) -> Result<(), SpatialError> {
        for (&a, ns) in &self.adj {
            if ns.len() > self.bound {
                return Err(SpatialError::DegreeExceeded {
                    node: a,
                    bound: self.bound,
                });
            }
            for &b in ns {
                if a == b {
                    return Err(SpatialError::SelfLoop(a));
                }
                if !self.adj.get(&b).is_some_and(|s| s.contains(&a)) {
                    return Err(SpatialError::Asymmetric(a, b));
                }
            }
        }
        Ok(())
    }

    fn insertion_feasible(&self, p: &InsertionPoint) -> bool {
        let Some(ns) = self.adj.get(&p.anchor) else {
            return false;
        };
        ns.len() < self.bound
            && p.extra.len() < self.bound
            && p.extra
                .iter()
                .all(|c| ns.contains(c) && self.deg(*c) < self.bound)
    }

    fn split_feasible(&self, s: &SplitPoint) -> bool {
        let (Some(ni), Some(nj)) = (self.adj.get(&s.anchor), self.adj.get(&s.pulled)) else {
            return false;
        };
        ni.contains(&s.pulled)
            && 2 + s.keep.len() <= self.bound
            && s.keep.iter().all(|c| ni.contains(c) && nj.contains(c))
            && s.retain.is_subset(&s.keep)
            && s.retain.iter().all(|c| self.deg(*c) < self.bound)
    }

    /// Every feasible insertion point anchored at `i`. Empty iff `i` is saturated.
    pub fn insertion_points(&self, i: ModuleId) -> Result<Vec<InsertionPoint>, SpatialError> {
        let ns = self.neighbors(i)?;
        if ns.len() >= self.bound {
            return Ok(Vec::new());
        }
        let eligible: Vec<ModuleId> = ns
            .iter()
            .copied()
            .filter(|c| self.deg(*c) < self.bound)
            .collect();
        let mut pts: Vec<InsertionPoint> = subsets(&eligible, self.bound - 1)
            .into_iter()
            .map(|extra| InsertionPoint { anchor: i, extra })
            .collect();
        pts.sort();
        Ok(pts)
    }

    /// Every feasible split of an edge incident to `i`, with `i` as anchor.
    pub fn split_points(&self, i: ModuleId) -> Result<Vec<SplitPoint>, SpatialError> {
        let ni = self.neighbors(i)?;
        let mut out = Vec::new();
        if self.bound < 2 {
            return Ok(out);
        }
        for &j in ni {
            let common: Vec<ModuleId> = ni.intersection(&self.adj[&j]).copied().collect();
            for keep in subsets(&common, self.bound - 2) {
                let retainable: Vec<ModuleId> = keep
                    .iter()
                    .copied()
                    .filter(|c| self.deg(*c) < self.bound)
                    .collect();
                for retain in subsets(&retainable, retainable.len()) {
                    out.push(SplitPoint {
                        anchor: i,
                        pulled: j,
                        keep: keep.clone(),
                        retain,
                    });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Positions for a new node next to `i`. With `strict`, edge splits are
    /// offered only when `i` admits no direct insertion.
    pub fn placements(&self, i: ModuleId, strict: bool) -> Result<Vec<Placement>, SpatialError> {
        let ins = self.insertion_points(i)?;
        let with_splits = !strict || ins.is_empty();
        let mut out: Vec<Placement> = ins.into_iter().map(Placement::Insert).collect();
        if with_splits {
            out.extend(self.split_points(i)?.into_iter().map(Placement::Split));
        }
        Ok(out)
    }

    pub fn apply_insertion(&self, p: &InsertionPoint, k: ModuleId) -> Result<Self, SpatialError> {
        if self.contains(k) {
            return Err(SpatialError::DuplicateNode(k));
        }
        if !self.contains(p.anchor) {
            return Err(SpatialError::UnknownNode(p.anchor));
        }
        if !self.insertion_feasible(p) {
            return Err(SpatialError::Infeasible(Placement::Insert(p.clone()).to_string()));
        }
        let mut g = self.add_node(k)?;
        g.link(p.anchor, k)?;
        for &c in &p.extra {
            g.link(c, k)?;
        }
        Ok(g)
    }

    pub fn apply_split(&self, s: &SplitPoint, k: ModuleId) -> Result<Self, SpatialError> {
        if self.contains(k) {
            return Err(SpatialError::DuplicateNode(k));
        }
        for n in [s.anchor, s.pulled] {
            if !self.contains(n) {
                return Err(SpatialError::UnknownNode(n));
            }
        }
        if !self.split_feasible(s) {
            return Err(SpatialError::Infeasible(Placement::Split(s.clone()).to_string()));
        }
        let mut g = self.add_node(k)?;
        g.unlink(s.anchor, s.pulled);
        for &c in s.keep.difference(&s.retain) {
            g.unlink(c, s.pulled);
        }
        g.link(s.anchor, k)?;
        g.link(s.pulled, k)?;
        for &c in &s.keep {
            g.link(c, k)?;
        }
        Ok(g)
    }

    pub fn remove_node(&self, i: ModuleId) -> Result<Self, SpatialError> {
        let ns = self.neighbors(i)?.clone();
        let mut g = self.clone();
        for n in ns {
            g.unlink(i, n);
        }
        g.adj.remove(&i);
        Ok(g)
    }

    /// Re-positions for `i`: placements anchored at its former neighbours in
    /// the graph without `i`. Applying one with `k = i` re-adds `i`.
    pub fn migration_targets(
        &self,
        i: ModuleId,
        strict: bool,
    ) -> Result<Vec<Placement>, SpatialError> {
        let former = self.neighbors(i)?.clone();
        let rest = self.remove_node(i)?;
        let mut out = Vec::new();
        for a in former {
            out.extend(rest.placements(a, strict)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Move `i` to `target`, a placement computed by [`Self::migration_targets`].
    pub fn migrate(&self, i: ModuleId, target: &Placement) -> Result<Self, SpatialError> {
        target.apply(&self.remove_node(i)?, i)
    }

    /// Shortest-path length; `None` when disconnected.
    pub fn distance(&self, i: ModuleId, j: ModuleId) -> Result<Option<u64>, SpatialError> {
        if !self.contains(j) {
            return Err(SpatialError::UnknownNode(j));
        }
        Ok(self.distances_from(i, None)?.get(&j).copied())
    }

    /// BFS distances from `i`, optionally bounded by `max_depth`.
    pub fn distances_from(
        &self,
        i: ModuleId,
        max_depth: Option<u64>,
    ) -> Result<BTreeMap<ModuleId, u64>, SpatialError> {
        self.neighbors(i)?;
        let mut dist = BTreeMap::from([(i, 0u64)]);
        let mut queue = VecDeque::from([i]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if max_depth.is_some_and(|m| d >= m) {
                continue;
            }
            for &w in &self.adj[&v] {
                if let std::collections::btree_map::Entry::Vacant(slot) = dist.entry(w) {
                    slot.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &start in self.adj.keys() {
            if seen.contains(&start) {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adj[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Graph spatial interface. Module identifiers are the graph's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BdgInterface {
    pub graph: BdgGraph,
    pub cutoff: Option<u32>,
    /// Offer edge splits only at saturated anchors.
    pub strict: bool,
    /// Reject transformations that increase the number of connected components.
    pub forbid_disconnect: bool,
}

impl BdgInterface {
    pub fn new(graph: BdgGraph) -> Self {
        BdgInterface {
            graph,
            cutoff: None,
            strict: true,
            forbid_disconnect: false,
        }
    }

    pub fn with_graph(&self, graph: BdgGraph) -> Self {
        BdgInterface {
            graph,
            ..self.clone()
        }
    }

    pub fn neighboring(&self, i: ModuleId, j: ModuleId) -> Result<Neighboring, SpatialError> {
        if i == j {
            return Err(SpatialError::SameIdentifier(i));
        }
        if !self.graph.contains(i) {
            return Err(SpatialError::Unallocated(i));
        }
        if !self.graph.contains(j) {
            return Err(SpatialError::Unallocated(j));
        }
        let d = self.graph.distance(i, j)?;
        Ok(Neighboring::from_distance(d, self.cutoff))
    }

    pub fn neighbors(&self, i: ModuleId) -> Result<Vec<(ModuleId, Neighboring)>, SpatialError> {
        if !self.graph.contains(i) {
            return Err(SpatialError::Unallocated(i));
        }
        let dist = self.graph.distances_from(i, self.cutoff.map(u64::from))?;
        Ok(dist
            .into_iter()
            .filter(|&(j, _)| j != i)
            .map(|(j, d)| (j, Neighboring::from_distance(Some(d), self.cutoff)))
            .filter(|(_, n)| n.is_positive())
            .collect())
    }
}
