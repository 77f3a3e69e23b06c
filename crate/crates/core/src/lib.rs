//! Explicit-state modelling of regulation in multi-cellular systems.
//!
//! Cells are regulatory modules (logical regulatory networks with inputs)
//! placed on a discrete spatial backend: a square or triangular grid, or a
//! bounded-degree graph. Cells change component levels, die, migrate and
//! divide; [`explorer::explore`] builds the full reachable state graph.

pub mod bundle;
pub mod dsl;
pub mod explorer;
pub mod expr;
pub mod graph;
pub mod ids;
pub mod regnet;
pub mod render;
pub mod spatial;

pub use bundle::{BundleState, Event, Model, ModuleSpec};
pub use explorer::{explore, ExploreLimits, StateGraph};
pub use expr::Expr;
pub use ids::{Level, ModuleId, MAX_LEVEL};
pub use regnet::{step_toward, NetState, NetworkSpec};
