//! Labelled transition graphs and the breadth-first closure used to build them.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge<L> {
    pub src: usize,
    pub label: L,
    pub dst: usize,
}

/// Deduplicated reachable graph. Node 0 is the initial state; nodes are numbered
/// in breadth-first discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph<S, L> {
    states: Vec<S>,
    edges: Vec<Edge<L>>,
    truncated: bool,
}

impl<S, L> Graph<S, L> {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn state(&self, node: usize) -> &S {
        &self.states[node]
    }

    pub fn edges(&self) -> &[Edge<L>] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when exploration stopped at the state limit.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Outgoing edge indices per node, in edge order.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (ix, e) in self.edges.iter().enumerate() {
            out[e.src].push(ix);
        }
        out
    }

    /// Shortest path (as edge indices) from the initial node to the first node,
    /// in breadth-first order, satisfying `pred`.
    pub fn shortest_trace(&self, mut pred: impl FnMut(&S) -> bool) -> Option<Vec<usize>> {
        if self.states.is_empty() {
            return None;
        }
        let out = self.out_edges();
        let mut via: Vec<Option<usize>> = vec![None; self.states.len()];
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(node) = queue.pop_front() {
            if pred(&self.states[node]) {
                let mut trace = Vec::new();
                let mut cur = node;
                while let Some(e) = via[cur] {
                    trace.push(e);
                    cur = self.edges[e].src;
                }
                trace.reverse();
                return Some(trace);
            }
            for &e in &out[node] {
                let dst = self.edges[e].dst;
                if !seen[dst] {
                    seen[dst] = true;
                    via[dst] = Some(e);
                    queue.push_back(dst);
                }
            }
        }
        None
    }

    /// Strongly connected components without outgoing edges, each sorted, listed
    /// by smallest member.
    pub fn terminal_sccs(&self) -> Vec<Vec<usize>> {
        let succ: Vec<Vec<usize>> = self
            .out_edges()
            .into_iter()
            .map(|es| es.into_iter().map(|e| self.edges[e].dst).collect())
            .collect();
        let comp = tarjan(&succ);
        let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut closed = vec![true; ncomp];
        for (v, targets) in succ.iter().enumerate() {
            if targets.iter().any(|&w| comp[w] != comp[v]) {
                closed[comp[v]] = false;
            }
        }
        let mut members = vec![Vec::new(); ncomp];
        for (v, &c) in comp.iter().enumerate() {
            members[c].push(v);
        }
        let mut result: Vec<Vec<usize>> = members
            .into_iter()
            .enumerate()
            .filter(|(c, _)| closed[*c])
            .map(|(_, m)| m)
            .collect();
        result.sort_by_key(|m| m[0]);
        result
    }
}

/// Iterative Tarjan. Returns the component index of every vertex.
fn tarjan(succ: &[Vec<usize>]) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        // (vertex, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < succ[v].len() {
                let w = succ[v][top.1];
                top.1 += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Breadth-first closure of `successors` from `init`.
///
/// States are deduplicated through `key`. The successors of each state are
/// ordered by `(key, label)` before merging, and merging is sequential in
/// frontier order, so the result does not depend on `jobs`. Exploration stops
/// (and the graph is marked truncated) when a state beyond `limit` is found.
pub(crate) fn explore_bfs<S, K, L, FK, FS>(
    init: S,
    key: FK,
    successors: FS,
    limit: usize,
    jobs: usize,
) -> (Graph<S, L>, Vec<K>)
where
    S: Send + Sync,
    K: Eq + Hash + Ord + Clone + Send,
    L: Ord + Send,
    FK: Fn(&S) -> K + Sync,
    FS: Fn(&S) -> Vec<(L, S)> + Sync,
{
    let limit = limit.max(1);
    let expand = |s: &S| -> Vec<(K, L, S)> {
        let mut out: Vec<(K, L, S)> = successors(s)
            .into_iter()
            .map(|(l, t)| (key(&t), l, t))
            .collect();
        out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        out
    };

    let mut keys = vec![key(&init)];
    let mut index: HashMap<K, usize> = HashMap::from([(keys[0].clone(), 0)]);
    let mut states = vec![init];
    let mut edges = Vec::new();
    let mut truncated = false;
    let mut frontier = vec![0usize];

    let pool = if jobs > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().ok()
    } else {
        None
    };

    'levels: while !frontier.is_empty() {
        let expanded: Vec<Vec<(K, L, S)>> = match &pool {
            Some(pool) => {
                let states = &states;
                pool.install(|| frontier.par_iter().map(|&n| expand(&states[n])).collect())
            }
            None => frontier.iter().map(|&n| expand(&states[n])).collect(),
        };
        let mut next = Vec::new();
        for (&src, succs) in frontier.iter().zip(expanded) {
            for (k, label, state) in succs {
                let dst = match index.get(&k) {
                    Some(&d) => d,
                    None => {
                        if states.len() >= limit {
                            truncated = true;
                            break 'levels;
                        }
                        let d = states.len();
                        index.insert(k.clone(), d);
                        keys.push(k);
                        states.push(state);
                        next.push(d);
                        d
                    }
                };
                edges.push(Edge { src, label, dst });
            }
        }
        frontier = next;
    }

    (
        Graph {
            states,
            edges,
            truncated,
        },
        keys,
    )
}
