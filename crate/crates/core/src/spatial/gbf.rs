//! Group-based-field grids: square (generators e, n) and triangular
//! (generators e, n, nw with n - nw = e).
//!
//! Every word over the generators reduces to a pair `(a, b)` of coefficients
//! of `e` and `n`. The word metric has a closed form in that basis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Neighboring, SpatialError};
use crate::ids::ModuleId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Square,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    E,
    N,
    Nw,
}

impl FromStr for Generator {
    type Err = SpatialError;

    fn from_str(s: &str) -> Result<Self, SpatialError> {
        match s {
            "e" => Ok(Generator::E),
            "n" => Ok(Generator::N),
            "nw" => Ok(Generator::Nw),
            _ => Err(SpatialError::UnknownGenerator(s.to_string())),
        }
    }
}

/// Canonical grid position `a·e + b·n`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct GbfCoord {
    pub a: i32,
    pub b: i32,
}

impl GbfCoord {
    pub const ORIGIN: GbfCoord = GbfCoord { a: 0, b: 0 };

    pub fn new(a: i32, b: i32) -> Self {
        GbfCoord { a, b }
    }

    fn offset(self, d: GbfCoord) -> Option<GbfCoord> {
        Some(GbfCoord {
            a: self.a.checked_add(d.a)?,
            b: self.b.checked_add(d.b)?,
        })
    }
}

impl fmt::Display for GbfCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl GridKind {
    pub fn generators(self) -> &'static [Generator] {
        match self {
            GridKind::Square => &[Generator::E, Generator::N],
            GridKind::Triangular => &[Generator::E, Generator::N, Generator::Nw],
        }
    }

    /// Unit moves (each generator and its inverse), in a fixed order.
    pub fn unit_moves(self) -> &'static [GbfCoord] {
        const SQUARE: [GbfCoord; 4] = [
            GbfCoord { a: 1, b: 0 },
            GbfCoord { a: 0, b: 1 },
            GbfCoord { a: -1, b: 0 },
            GbfCoord { a: 0, b: -1 },
        ];
        const TRI: [GbfCoord; 6] = [
            GbfCoord { a: 1, b: 0 },
            GbfCoord { a: 0, b: 1 },
            GbfCoord { a: -1, b: 1 },
            GbfCoord { a: -1, b: 0 },
            GbfCoord { a: 0, b: -1 },
            GbfCoord { a: 1, b: -1 },
        ];
        match self {
            GridKind::Square => &SQUARE,
            GridKind::Triangular => &TRI,
        }
    }

    fn basis(self, g: Generator) -> Result<(i64, i64), SpatialError> {
        match (self, g) {
            (_, Generator::E) => Ok((1, 0)),
            (_, Generator::N) => Ok((0, 1)),
            // nw = n - e
            (GridKind::Triangular, Generator::Nw) => Ok((-1, 1)),
            (GridKind::Square, Generator::Nw) => {
                Err(SpatialError::UnknownGenerator("nw".to_string()))
            }
        }
    }
}

/// Reduce a word `Σ coeff·generator` to canonical coordinates.
pub fn normalize(word: &[(Generator, i64)], kind: GridKind) -> Result<GbfCoord, SpatialError> {
    let mut a: i64 = 0;
    let mut b: i64 = 0;
    for &(g, k) in word {
        let (da, db) = kind.basis(g)?;
        a = da
            .checked_mul(k)
            .and_then(|v| a.checked_add(v))
            .ok_or(SpatialError::CoordinateOverflow)?;
        b = db
            .checked_mul(k)
            .and_then(|v| b.checked_add(v))
            .ok_or(SpatialError::CoordinateOverflow)?;
    }
    Ok(GbfCoord {
        a: i32::try_from(a).map_err(|_| SpatialError::CoordinateOverflow)?,
        b: i32::try_from(b).map_err(|_| SpatialError::CoordinateOverflow)?,
    })
}

/// Word-metric distance between two canonical coordinates.
pub fn distance(x: GbfCoord, y: GbfCoord, kind: GridKind) -> u64 {
    let dx = y.a as i64 - x.a as i64;
    let dy = y.b as i64 - x.b as i64;
    match kind {
        GridKind::Square => dx.unsigned_abs() + dy.unsigned_abs(),
        GridKind::Triangular => {
            (dx.unsigned_abs() + dy.unsigned_abs() + (dx + dy).unsigned_abs()) / 2
        }
    }
}

/// Grid spatial interface: placement `theta` plus the derived δ and η.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GbfInterface {
    kind: GridKind,
    cutoff: Option<u32>,
    theta: BTreeMap<ModuleId, GbfCoord>,
}

impl GbfInterface {
    pub fn new(kind: GridKind, cutoff: Option<u32>) -> Self {
        GbfInterface {
            kind,
            cutoff,
            theta: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn cutoff(&self) -> Option<u32> {
        self.cutoff
    }

    pub fn theta(&self) -> &BTreeMap<ModuleId, GbfCoord> {
        &self.theta
    }

    pub fn location(&self, i: ModuleId) -> Option<GbfCoord> {
        self.theta.get(&i).copied()
    }

    pub fn occupant(&self, at: GbfCoord) -> Option<ModuleId> {
        self.theta
            .iter()
            .find_map(|(&m, &c)| (c == at).then_some(m))
    }

    fn located(&self, i: ModuleId) -> Result<GbfCoord, SpatialError> {
        self.location(i).ok_or(SpatialError::Unallocated(i))
    }

    /// δ(i, j): `1/Δ`, or 0 beyond the cutoff.
    pub fn neighboring(&self, i: ModuleId, j: ModuleId) -> Result<Neighboring, SpatialError> {
        if i == j {
            return Err(SpatialError::SameIdentifier(i));
        }
        let d = distance(self.located(i)?, self.located(j)?, self.kind);
        Ok(Neighboring::from_distance(Some(d), self.cutoff))
    }

    /// Allocated modules `j ≠ i` with δ(i, j) > 0, ascending.
    pub fn neighbors(&self, i: ModuleId) -> Result<Vec<(ModuleId, Neighboring)>, SpatialError> {
        let at = self.located(i)?;
        Ok(self
            .theta
            .iter()
            .filter(|(&j, _)| j != i)
            .map(|(&j, &c)| {
                let d = distance(at, c, self.kind);
                (j, Neighboring::from_distance(Some(d), self.cutoff))
            })
            .filter(|(_, n)| n.is_positive())
            .collect())
    }

    /// η(i): free locations at distance exactly 1 from θ(i), sorted.
    pub fn empty_neighbors(&self, i: ModuleId) -> Result<Vec<GbfCoord>, SpatialError> {
        let at = self.located(i)?;
        let mut free: Vec<GbfCoord> = self
            .kind
            .unit_moves()
            .iter()
            .filter_map(|&d| at.offset(d))
            .filter(|&l| self.occupant(l).is_none())
            .collect();
        free.sort();
        Ok(free)
    }

    pub fn allocate(&self, i: ModuleId, at: GbfCoord) -> Result<Self, SpatialError> {
        if self.theta.contains_key(&i) {
            return Err(SpatialError::AlreadyAllocated(i));
        }
        if let Some(other) = self.occupant(at) {
            return Err(SpatialError::Occupied {
                location: at.to_string(),
                by: other,
            });
        }
        let mut next = self.clone();
        next.theta.insert(i, at);
        Ok(next)
    }

    pub fn free(&self, i: ModuleId) -> Result<Self, SpatialError> {
        if !self.theta.contains_key(&i) {
            return Err(SpatialError::UnknownIdentifier(i));
        }
        let mut next = self.clone();
        next.theta.remove(&i);
        Ok(next)
    }

    /// θ := {(i, ℓ)} ∪ θ ∖ {(i, θ(i))}.
    pub fn relocate(&self, i: ModuleId, to: GbfCoord) -> Result<Self, SpatialError> {
        self.free(i)?.allocate(i, to)
    }
}
