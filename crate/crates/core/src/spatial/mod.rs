//! Spatial backends and the interface the bundle semantics queries:
//! placement θ, neighbouring δ and free neighbour locations η.

pub mod bdg;
pub mod gbf;

use std::fmt;

use thiserror::Error;

use crate::ids::ModuleId;
pub use bdg::{BdgGraph, BdgInterface, InsertionPoint, Placement, SplitPoint};
pub use gbf::{GbfCoord, GbfInterface, Generator, GridKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpatialError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("coordinate overflow")]
    CoordinateOverflow,
    #[error("module {0} is not allocated")]
    Unallocated(ModuleId),
    #[error("neighbouring is undefined for a module and itself ({0})")]
    SameIdentifier(ModuleId),
    #[error("module {0} is already allocated")]
    AlreadyAllocated(ModuleId),
    #[error("location {location} is occupied by module {by}")]
    Occupied { location: String, by: ModuleId },
    #[error("unknown identifier {0}")]
    UnknownIdentifier(ModuleId),
    #[error("unknown node {0}")]
    UnknownNode(ModuleId),
    #[error("node {0} already exists")]
    DuplicateNode(ModuleId),
    #[error("self-loop on node {0}")]
    SelfLoop(ModuleId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(ModuleId, ModuleId),
    #[error("asymmetric adjacency {0}-{1}")]
    Asymmetric(ModuleId, ModuleId),
    #[error("degree of node {node} would exceed {bound}")]
    DegreeExceeded { node: ModuleId, bound: usize },
    #[error("degree bound must be positive (got {0})")]
    InvalidBound(usize),
    #[error("infeasible placement {0}")]
    Infeasible(String),
    #[error("location does not match the spatial backend")]
    WrongBackend,
}

/// Value of δ(i, j): `1/d` for a distance `d` within the cutoff, else 0.
/// Kept as the distance so that integration can round exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Neighboring(Option<u64>);

impl Neighboring {
    pub const ZERO: Neighboring = Neighboring(None);

    pub fn from_distance(distance: Option<u64>, cutoff: Option<u32>) -> Self {
        match distance {
            Some(d) if d > 0 && cutoff.is_none_or(|c| d <= c as u64) => Neighboring(Some(d)),
            _ => Neighboring(None),
        }
    }

    pub fn distance(self) -> Option<u64> {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0.is_some()
    }

    pub fn value(self) -> f64 {
        self.0.map_or(0.0, |d| 1.0 / d as f64)
    }

    /// `round(δ · x)` with halves rounded away from zero, computed exactly.
    pub fn weigh(self, x: u64) -> u64 {
        match self.0 {
            None => 0,
            Some(d) => (2 * x + d) / (2 * d),
        }
    }
}

impl fmt::Display for Neighboring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "0"),
            Some(1) => write!(f, "1"),
            Some(d) => write!(f, "1/{d}"),
        }
    }
}

/// Target of a migration or division.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Grid(GbfCoord),
    Graph(Placement),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Grid(c) => write!(f, "{c}"),
            Location::Graph(p) => write!(f, "{p}"),
        }
    }
}

/// Spatial state of a bundle: one of the two backends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Space {
    Grid(GbfInterface),
    Graph(BdgInterface),
}

impl Space {
    /// Allocated identifiers, ascending.
    pub fn allocated(&self) -> Vec<ModuleId> {
        match self {
            Space::Grid(g) => g.theta().keys().copied().collect(),
            Space::Graph(b) => b.graph.nodes().collect(),
        }
    }

    pub fn contains(&self, i: ModuleId) -> bool {
        match self {
            Space::Grid(g) => g.location(i).is_some(),
            Space::Graph(b) => b.graph.contains(i),
        }
    }

    pub fn neighboring(&self, i: ModuleId, j: ModuleId) -> Result<Neighboring, SpatialError> {
        match self {
            Space::Grid(g) => g.neighboring(i, j),
            Space::Graph(b) => b.neighboring(i, j),
        }
    }

    /// Allocated `j ≠ i` with δ(i, j) > 0, ascending.
    pub fn neighbors(&self, i: ModuleId) -> Result<Vec<(ModuleId, Neighboring)>, SpatialError> {
        match self {
            Space::Grid(g) => g.neighbors(i),
            Space::Graph(b) => b.neighbors(i),
        }
    }

    /// Candidate locations for a cell produced by dividing `i`.
    pub fn division_sites(&self, i: ModuleId) -> Result<Vec<Location>, SpatialError> {
        match self {
            Space::Grid(g) => Ok(g
                .empty_neighbors(i)?
                .into_iter()
                .map(Location::Grid)
                .collect()),
            Space::Graph(b) => Ok(b
                .graph
                .placements(i, b.strict)?
                .into_iter()
                .map(Location::Graph)
                .collect()),
        }
    }

    /// Candidate locations for `i` to migrate to.
    pub fn migration_sites(&self, i: ModuleId) -> Result<Vec<Location>, SpatialError> {
        match self {
            Space::Grid(_) => self.division_sites(i),
            Space::Graph(b) => Ok(b
                .graph
                .migration_targets(i, b.strict)?
                .into_iter()
                .map(Location::Graph)
                .collect()),
        }
    }

    pub fn remove(&self, i: ModuleId) -> Result<Space, SpatialError> {
        match self {
            Space::Grid(g) => Ok(Space::Grid(g.free(i)?)),
            Space::Graph(b) => Ok(Space::Graph(b.with_graph(b.graph.remove_node(i)?))),
        }
    }

    pub fn migrate(&self, i: ModuleId, to: &Location) -> Result<Space, SpatialError> {
        match (self, to) {
            (Space::Grid(g), Location::Grid(c)) => Ok(Space::Grid(g.relocate(i, *c)?)),
            (Space::Graph(b), Location::Graph(p)) => {
                Ok(Space::Graph(b.with_graph(b.graph.migrate(i, p)?)))
            }
            _ => Err(SpatialError::WrongBackend),
        }
    }

    /// Allocate a new identifier `k` at `at`.
    pub fn place(&self, k: ModuleId, at: &Location) -> Result<Space, SpatialError> {
        match (self, at) {
            (Space::Grid(g), Location::Grid(c)) => Ok(Space::Grid(g.allocate(k, *c)?)),
            (Space::Graph(b), Location::Graph(p)) => {
                Ok(Space::Graph(b.with_graph(p.apply(&b.graph, k)?)))
            }
            _ => Err(SpatialError::WrongBackend),
        }
    }

    /// True if moving from `self` to `after` must be rejected under the
    /// backend's connectivity option.
    pub fn forbids(&self, after: &Space) -> bool {
        match (self, after) {
            (Space::Graph(b), Space::Graph(a)) if b.forbid_disconnect => {
                a.graph.component_count() > b.graph.component_count()
            }
            _ => false,
        }
    }

    pub fn module_count(&self) -> usize {
        match self {
            Space::Grid(g) => g.theta().len(),
            Space::Graph(b) => b.graph.node_count(),
        }
    }
}
