//! Text, DOT and JSON renderings of states and state graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::StateGraph;
use crate::bundle::{BundleError, BundleState, Model};
use crate::ids::{Level, ModuleId};
use crate::regnet::NetState;
use crate::spatial::{BdgGraph, GbfCoord, GbfInterface, Space, SpatialError};

#[derive(Debug, Error)]
pub enum StateJsonError {
    #[error("malformed state JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("level {level} of `{name}` is outside 0..={max}")]
    Level { name: String, level: i64, max: Level },
    #[error("duplicate module {0}")]
    DuplicateModule(ModuleId),
    #[error("state uses a {got} backend but the model uses {expected}")]
    Backend {
        got: &'static str,
        expected: &'static str,
    },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    levels: Vec<ModuleLevels>,
    spatial: SpatialDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModuleLevels {
    module: u16,
    levels: BTreeMap<String, i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpatialDoc {
    Grid { theta: Vec<Placed> },
    Bdg { adjacency: Vec<Adjacent> },
}

#[derive(Debug, Serialize, Deserialize)]
struct Placed {
    id: u16,
    at: [i32; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct Adjacent {
    id: u16,
    neighbors: Vec<u16>,
}

#[derive(Serialize)]
struct NodeDoc {
    id: usize,
    key: String,
    #[serde(flatten)]
    state: StateDoc,
}

#[derive(Serialize)]
struct EdgeDoc {
    src: usize,
    event: String,
    dst: usize,
}

#[derive(Serialize)]
struct ComponentDoc<'a> {
    name: &'a str,
    max: Level,
}

#[derive(Serialize)]
struct GraphDoc<'a> {
    model: &'a str,
    components: Vec<ComponentDoc<'a>>,
    initial: usize,
    truncated: bool,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

fn state_doc(model: &Model, state: &BundleState) -> StateDoc {
    let comps = model.network().components();
    let levels = state
        .levels()
        .iter()
        .map(|(id, lv)| ModuleLevels {
            module: id.0,
            levels: comps
                .iter()
                .zip(lv.iter())
                .map(|(c, &l)| (c.name.clone(), l as i64))
                .collect(),
        })
        .collect();
    let spatial = match state.space() {
        Space::Grid(g) => SpatialDoc::Grid {
            theta: g
                .theta()
                .iter()
                .map(|(id, c)| Placed {
                    id: id.0,
                    at: [c.a, c.b],
                })
                .collect(),
        },
        Space::Graph(b) => SpatialDoc::Bdg {
            adjacency: b
                .graph
                .adjacency()
                .iter()
                .map(|(id, n)| Adjacent {
                    id: id.0,
                    neighbors: n.iter().map(|m| m.0).collect(),
                })
                .collect(),
        },
    };
    StateDoc { levels, spatial }
}

/// JSON object `{levels, spatial}` describing one state.
pub fn state_to_json(model: &Model, state: &BundleState) -> String {
    serde_json::to_string(&state_doc(model, state)).expect("state serializes")
}

fn backend_name(space: &Space) -> &'static str {
    match space {
        Space::Grid(_) => "grid",
        Space::Graph(_) => "bdg",
    }
}

/// Parse a state in the `{levels, spatial}` schema. Backend parameters come
/// from the model; components missing from a module's `levels` are 0.
pub fn state_from_json(model: &Model, text: &str) -> Result<BundleState, StateJsonError> {
    let doc: StateDoc = serde_json::from_str(text)?;
    let net = model.network();
    let mut levels = BTreeMap::new();
    for m in doc.levels {
        let mut lv = vec![0 as Level; net.len()];
        for (name, level) in m.levels {
            let c = net
                .component_index(&name)
                .ok_or_else(|| StateJsonError::UnknownComponent(name.clone()))?;
            let max = net.components()[c].max;
            if !(0..=max as i64).contains(&level) {
                return Err(StateJsonError::Level { name, level, max });
            }
            lv[c] = level as Level;
        }
        let id = ModuleId(m.module);
        if levels.insert(id, NetState::new(lv)).is_some() {
            return Err(StateJsonError::DuplicateModule(id));
        }
    }
    let template = model.initial().space();
    let space = match (template, doc.spatial) {
        (Space::Grid(g), SpatialDoc::Grid { theta }) => {
            let mut grid = GbfInterface::new(g.kind(), g.cutoff());
            for p in theta {
                grid = grid.allocate(ModuleId(p.id), GbfCoord::new(p.at[0], p.at[1]))?;
            }
            Space::Grid(grid)
        }
        (Space::Graph(b), SpatialDoc::Bdg { adjacency }) => {
            let nodes: Vec<ModuleId> = adjacency.iter().map(|a| ModuleId(a.id)).collect();
            let mut edges = BTreeSet::new();
            for a in &adjacency {
                for &n in &a.neighbors {
                    let (x, y) = (ModuleId(a.id), ModuleId(n));
                    edges.insert((x.min(y), x.max(y)));
                }
            }
            let graph = BdgGraph::from_edges(b.graph.bound(), nodes, edges)?;
            for a in &adjacency {
                if graph.neighbors(ModuleId(a.id))?.len() != a.neighbors.len() {
                    return Err(SpatialError::Asymmetric(ModuleId(a.id), ModuleId(a.id)).into());
                }
            }
            Space::Graph(b.with_graph(graph))
        }
        (t, doc) => {
            return Err(StateJsonError::Backend {
                got: match doc {
                    SpatialDoc::Grid { .. } => "grid",
                    SpatialDoc::Bdg { .. } => "bdg",
                },
                expected: backend_name(t),
            })
        }
    };
    let state = BundleState::new(levels, space)?;
    model.check_state(&state)?;
    Ok(state)
}

fn level_char(l: Level) -> char {
    char::from_digit(l as u32, 16).unwrap_or('?')
}

/// Compact one-line state text: `id:levels@location …` on grids and
/// `id:levels … | a-b …` on graphs. Levels are hex digits in component order.
pub fn state_text(state: &BundleState) -> String {
    let mut out = String::new();
    let levels = |id: &ModuleId| -> String { state.levels()[id].iter().copied().map(level_char).collect() };
    match state.space() {
        Space::Grid(g) => {
            for (n, (id, at)) in g.theta().iter().enumerate() {
                if n > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{id}:{}@{at}", levels(id));
            }
        }
        Space::Graph(b) => {
            for (n, id) in b.graph.nodes().enumerate() {
                if n > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{id}:{}", levels(&id));
            }
            out.push_str(" |");
            for (x, y) in b.graph.edges() {
                let _ = write!(out, " {x}-{y}");
            }
        }
    }
    if state.module_count() == 0 && matches!(state.space(), Space::Grid(_)) {
        out.push_str("empty");
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(graph: &StateGraph, model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(model.name()));
    out.push_str("  node [shape=box, fontname=\"monospace\"];\n");
    for (n, s) in graph.states().iter().enumerate() {
        let extra = if n == graph.initial() { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  n{n} [label=\"{}\"{extra}];", dot_escape(&state_text(s)));
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.src,
            e.dst,
            dot_escape(&model.display_event(&e.label).to_string())
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_json(graph: &StateGraph, model: &Model) -> String {
    let doc = GraphDoc {
        model: model.name(),
        components: model
            .network()
            .components()
            .iter()
            .map(|c| ComponentDoc {
                name: &c.name,
                max: c.max,
            })
            .collect(),
        initial: graph.initial(),
        truncated: graph.is_truncated(),
        nodes: graph
            .states()
            .iter()
            .enumerate()
            .map(|(id, s)| NodeDoc {
                id,
                key: graph.key(id).to_hex(),
                state: state_doc(model, s),
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                src: e.src,
                event: model.display_event(&e.label).to_string(),
                dst: e.dst,
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("graph serializes")
}
