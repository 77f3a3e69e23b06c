use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::diag::{Diagnostic, DiagnosticKind, Pos};
use super::parser::{names_of, Names};
use crate::bundle::{BundleState, Guard, IntegrationSpec, Model, ModuleSpec, TransformSpec};
use crate::expr::Expr;
use crate::ids::{Level, ModuleId};
use crate::regnet::NetState;
use crate::spatial::{BdgGraph, BdgInterface, GbfCoord, GbfInterface, Space, SpatialError};

/// Lower a syntax tree whose names are known to resolve.
pub(super) fn lower(e: &ExprAst, names: &Names) -> Expr {
    match &e.kind {
        ExprKind::Int(v) => Expr::Const(*v),
        ExprKind::Name(n) => match names.components.get(n) {
            Some(&c) => Expr::Level(c),
            None => Expr::Sigma(names.sigmas[n]),
        },
        ExprKind::At(n, m) => Expr::ModuleLevel {
            component: names.components[n],
            module: ModuleId(*m as u16),
        },
        ExprKind::Count => Expr::Count,
        ExprKind::Alive(m) => Expr::Alive(ModuleId(*m as u16)),
        ExprKind::Unary(op, x) => Expr::Unary(*op, Box::new(lower(x, names))),
        ExprKind::Binary(op, l, r) => {
            Expr::Binary(*op, Box::new(lower(l, names)), Box::new(lower(r, names)))
        }
        ExprKind::Call(f, args) => Expr::Call(*f, args.iter().map(|a| lower(a, names)).collect()),
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn push(&mut self, kind: DiagnosticKind, pos: Pos, message: String) {
        self.0.push(Diagnostic::new(kind, pos, message));
    }
}

fn build_grid(
    doc: &Document,
    kind: crate::spatial::GridKind,
    cutoff: Option<u32>,
    diags: &mut Sink,
) -> Space {
    if let Some((_, pos)) = &doc.edges {
        diags.push(
            DiagnosticKind::Semantic,
            *pos,
            "`edges` only applies to bdg models".into(),
        );
    }
    let mut grid = GbfInterface::new(kind, cutoff);
    for init in &doc.inits {
        let Some((a, b)) = init.at else {
            diags.push(
                DiagnosticKind::Semantic,
                init.pos,
                format!("module {} needs a location `at (a,b)` on a grid", init.id),
            );
            continue;
        };
        let (Ok(a), Ok(b)) = (i32::try_from(a), i32::try_from(b)) else {
            diags.push(
                DiagnosticKind::Range,
                init.pos,
                format!("location ({a},{b}) is out of range"),
            );
            continue;
        };
        let Ok(id) = u16::try_from(init.id) else {
            continue;
        };
        match grid.allocate(ModuleId(id), GbfCoord::new(a, b)) {
            Ok(g) => grid = g,
            Err(SpatialError::Occupied { location, by }) => diags.push(
                DiagnosticKind::Semantic,
                init.pos,
                format!("location {location} is already taken by module {by}"),
            ),
            Err(e) => diags.push(DiagnosticKind::Semantic, init.pos, e.to_string()),
        }
    }
    Space::Grid(grid)
}

fn build_bdg(doc: &Document, bound: usize, diags: &mut Sink) -> Option<BdgGraph> {
    let mut nodes = BTreeSet::new();
    for init in &doc.inits {
        if init.at.is_some() {
            diags.push(
                DiagnosticKind::Semantic,
                init.pos,
                "bdg models place modules with `edges`, not `at`".into(),
            );
        }
        if let Ok(id) = u16::try_from(init.id) {
            nodes.insert(ModuleId(id));
        }
    }
    let mut edges = BTreeSet::new();
    let mut degree: BTreeMap<ModuleId, usize> = BTreeMap::new();
    for e in doc.edges.iter().flat_map(|(es, _)| es) {
        let ends = [e.a, e.b].map(|x| u16::try_from(x).ok().map(ModuleId));
        let [Some(a), Some(b)] = ends else {
            diags.push(DiagnosticKind::Range, e.pos, format!("edge {}-{} is out of range", e.a, e.b));
            continue;
        };
        if let Some(x) = [a, b].into_iter().find(|x| !nodes.contains(x)) {
            diags.push(
                DiagnosticKind::Unresolved,
                e.pos,
                format!("edge endpoint {x} is not an initialized module"),
            );
            continue;
        }
        if a == b {
            diags.push(DiagnosticKind::Semantic, e.pos, format!("self-loop on {a}"));
            continue;
        }
        if !edges.insert((a.min(b), a.max(b))) {
            diags.push(DiagnosticKind::Duplicate, e.pos, format!("edge {a}-{b} is listed twice"));
            continue;
        }
        for x in [a, b] {
            let d = degree.entry(x).or_default();
            *d += 1;
            if *d == bound + 1 {
                diags.push(
                    DiagnosticKind::Semantic,
                    e.pos,
                    format!("module {x} exceeds the degree bound {bound}"),
                );
            }
        }
    }
    BdgGraph::from_edges(bound, nodes, edges).ok()
}

/// Check a parsed document and build the model it describes.
pub fn validate(doc: &Document) -> Result<Model, Vec<Diagnostic>> {
    let mut diags = Sink(Vec::new());
    let names = names_of(doc);
    let universe = doc
        .identifiers
        .map_or(DEFAULT_IDENTIFIERS, |(n, _)| n)
        .clamp(1, u16::MAX as i64) as u16;

    let ruled: BTreeSet<&str> = doc.rules.iter().map(|r| r.target.as_str()).collect();
    for c in &doc.components {
        if !ruled.contains(c.name.as_str()) {
            diags.push(
                DiagnosticKind::Semantic,
                c.pos,
                format!("component `{}` has no rule", c.name),
            );
        }
    }

    let max_of = |name: &str| doc.components[names.components[name]].high;
    let mut levels = BTreeMap::new();
    for init in &doc.inits {
        if !(0..universe as i64).contains(&init.id) {
            diags.push(
                DiagnosticKind::Range,
                init.pos,
                format!("module {} is outside identifiers 0..{}", init.id, universe),
            );
        }
        let mut lv = vec![0 as Level; doc.components.len()];
        for a in &init.levels {
            let max = max_of(&a.name);
            if !(0..=max).contains(&a.level) {
                diags.push(
                    DiagnosticKind::Range,
                    a.pos,
                    format!("level {} of `{}` is outside 0..{max}", a.level, a.name),
                );
                continue;
            }
            lv[names.components[&a.name]] = a.level as Level;
        }
        if let Ok(id) = u16::try_from(init.id) {
            levels.insert(ModuleId(id), NetState::new(lv));
        }
    }

    let Some(backend) = &doc.backend else {
        diags.push(
            DiagnosticKind::Semantic,
            doc.pos,
            "missing backend clause (`grid …` or `bdg …`)".into(),
        );
        return Err(diags.0);
    };
    let space = match &backend.backend {
        Backend::Grid { kind, cutoff } => {
            build_grid(doc, *kind, cutoff.map(|c| c as u32), &mut diags)
        }
        Backend::Bdg {
            degree,
            strict,
            forbid_disconnect,
            cutoff,
        } => match build_bdg(doc, *degree as usize, &mut diags) {
            Some(graph) => Space::Graph(BdgInterface {
                graph,
                cutoff: cutoff.map(|c| c as u32),
                strict: *strict,
                forbid_disconnect: *forbid_disconnect,
            }),
            None => {
                if diags.0.is_empty() {
                    diags.push(DiagnosticKind::Semantic, backend.pos, "invalid graph".into());
                }
                diags.0.sort_by_key(|d| d.pos);
                return Err(diags.0);
            }
        },
    };
    if !diags.0.is_empty() {
        diags.0.sort_by_key(|d| d.pos);
        return Err(diags.0);
    }

    let components = doc
        .components
        .iter()
        .map(|c| (c.name.clone(), c.high as Level))
        .collect();
    let rules = doc
        .rules
        .iter()
        .map(|r| (r.target.clone(), lower(&r.body, &names)))
        .collect();
    let integrations = doc
        .sigmas
        .iter()
        .map(|s| IntegrationSpec {
            name: s.name.clone(),
            source: names.components[&s.source],
            kind: s.kind,
        })
        .collect();
    let guard = |k| {
        doc.guard(k).map(|g| Guard {
            expr: lower(&g.expr, &names),
            per_location: g.per_location,
        })
    };
    let transforms = TransformSpec {
        apoptosis: guard(GuardKind::Die).map(|g| g.expr),
        migration: guard(GuardKind::Migrate),
        division: guard(GuardKind::Divide),
    };
    let fail = |e: String| vec![Diagnostic::new(DiagnosticKind::Semantic, doc.pos, e)];
    let module = ModuleSpec::new(components, rules, integrations, transforms)
        .map_err(|e| fail(e.to_string()))?;
    let state = BundleState::new(levels, space).map_err(|e| fail(e.to_string()))?;
    Model::new(doc.name.clone(), module, universe, state).map_err(|e| fail(e.to_string()))
}
