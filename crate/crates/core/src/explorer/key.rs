//! Canonical byte encoding of bundle states.
//!
//! Layout (big-endian):
//! - `u16` module count, then per module in ascending id: `u16` id and the
//!   levels packed two per byte (high nibble first);
//! - a backend tag byte (`0` grid, `1` graph);
//! - grid: per module in ascending id, `i32 a`, `i32 b`;
//! - graph: per node in ascending id, `u16` id, `u8` degree, sorted `u16` neighbour ids.
//!
//! Backend parameters (grid kind, cutoff, degree bound, flags) are fixed by
//! the model and are not encoded.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bundle::{BundleState, Model};
use crate::ids::{Level, ModuleId};
use crate::regnet::NetState;
use crate::spatial::{BdgGraph, GbfCoord, Space};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub(crate) Vec<u8>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("key ends early")]
    Truncated,
    #[error("trailing bytes in key")]
    Trailing,
    #[error("backend tag {0} does not match the model")]
    Backend(u8),
    #[error("invalid state in key: {0}")]
    Invalid(String),
}

const GRID: u8 = 0;
const GRAPH: u8 = 1;

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn encode(state: &BundleState) -> CanonicalKey {
        let mut out = Vec::with_capacity(64);
        out.extend_from_slice(&(state.module_count() as u16).to_be_bytes());
        for (id, levels) in state.levels() {
            out.extend_from_slice(&id.0.to_be_bytes());
            for pair in levels.levels().chunks(2) {
                let hi = pair[0] & 0x0f;
                let lo = pair.get(1).map_or(0, |l| l & 0x0f);
                out.push(hi << 4 | lo);
            }
        }
        match state.space() {
            Space::Grid(g) => {
                out.push(GRID);
                for c in g.theta().values() {
                    out.extend_from_slice(&c.a.to_be_bytes());
                    out.extend_from_slice(&c.b.to_be_bytes());
                }
            }
            Space::Graph(b) => {
                out.push(GRAPH);
                for (id, nbrs) in b.graph.adjacency() {
                    out.extend_from_slice(&id.0.to_be_bytes());
                    out.push(nbrs.len() as u8);
                    for n in nbrs {
                        out.extend_from_slice(&n.0.to_be_bytes());
                    }
                }
            }
        }
        CanonicalKey(out)
    }

    /// Rebuild the state; backend parameters come from `model`.
    pub fn decode(&self, model: &Model) -> Result<BundleState, KeyError> {
        let mut r = Reader(&self.0);
        let n = r.u16()? as usize;
        let width = model.network().len();
        let mut ids = Vec::with_capacity(n);
        let mut levels = BTreeMap::new();
        for _ in 0..n {
            let id = ModuleId(r.u16()?);
            let mut lv: Vec<Level> = Vec::with_capacity(width);
            for _ in 0..width.div_ceil(2) {
                let b = r.u8()?;
                lv.push(b >> 4);
                lv.push(b & 0x0f);
            }
            lv.truncate(width);
            ids.push(id);
            levels.insert(id, NetState::new(lv));
        }
        let tag = r.u8()?;
        let space = match (model.initial().space(), tag) {
            (Space::Grid(g), GRID) => {
                let mut grid = crate::spatial::GbfInterface::new(g.kind(), g.cutoff());
                for &id in &ids {
                    let at = GbfCoord::new(r.i32()?, r.i32()?);
                    grid = grid
                        .allocate(id, at)
                        .map_err(|e| KeyError::Invalid(e.to_string()))?;
                }
                Space::Grid(grid)
            }
            (Space::Graph(b), GRAPH) => {
                let mut edges = BTreeSet::new();
                for &id in &ids {
                    if r.u16()? != id.0 {
                        return Err(KeyError::Invalid("node order".into()));
                    }
                    for _ in 0..r.u8()? {
                        let j = ModuleId(r.u16()?);
                        edges.insert((id.min(j), id.max(j)));
                    }
                }
                let graph = BdgGraph::from_edges(b.graph.bound(), ids.iter().copied(), edges)
                    .map_err(|e| KeyError::Invalid(e.to_string()))?;
                Space::Graph(b.with_graph(graph))
            }
            (_, t) => return Err(KeyError::Backend(t)),
        };
        if !r.0.is_empty() {
            return Err(KeyError::Trailing);
        }
        let state =
            BundleState::new(levels, space).map_err(|e| KeyError::Invalid(e.to_string()))?;
        model
            .check_state(&state)
            .map_err(|e| KeyError::Invalid(e.to_string()))?;
        Ok(state)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], KeyError> {
        if self.0.len() < N {
            return Err(KeyError::Truncated);
        }
        let (head, rest) = self.0.split_at(N);
        self.0 = rest;
        Ok(head.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, KeyError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, KeyError> {
        Ok(u16::from_be_bytes(self.take()?))
    }

    fn i32(&mut self) -> Result<i32, KeyError> {
        Ok(i32::from_be_bytes(self.take()?))
    }
}
