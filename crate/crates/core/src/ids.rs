use std::fmt;

use serde::{Deserialize, Serialize};

/// Level of a regulatory component. Ranges are capped at [`MAX_LEVEL`].
pub type Level = u8;

/// Largest admissible upper bound of a component range. Keeps a level in one nibble.
pub const MAX_LEVEL: Level = 15;

/// Identifier of a module (a cell), drawn from a finite ordered universe `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(pub u16);

impl ModuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for ModuleId {
    fn from(v: u16) -> Self {
        ModuleId(v)
    }
}
