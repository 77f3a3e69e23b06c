//! Static SVG snapshots of a bundle state.
//!
//! Grid cells are drawn as squares (square grids) or hexagons (triangular
//! grids) centred at their coordinates. Graph states use a force-directed
//! layout started from seeded random positions, so output is reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BundleState, Model};
use crate::ids::ModuleId;
use crate::spatial::{BdgGraph, GridKind, Space};

const UNIT: f64 = 48.0;
const MARGIN: f64 = 40.0;
const LAYOUT_SEED: u64 = 0x5eed;
const LAYOUT_ROUNDS: usize = 300;

fn level_text(model: &Model, state: &BundleState, id: ModuleId) -> String {
    let comps = model.network().components();
    state.levels()[&id]
        .iter()
        .zip(comps)
        .map(|(l, c)| format!("{}={l}", c.name))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Fill colour from the mean relative level: pale for all-zero, saturated for all-max.
fn fill(model: &Model, state: &BundleState, id: ModuleId) -> String {
    let comps = model.network().components();
    let (sum, max) = state.levels()[&id]
        .iter()
        .zip(comps)
        .fold((0u32, 0u32), |(s, m), (&l, c)| (s + l as u32, m + c.max as u32));
    let t = if max == 0 { 0.0 } else { sum as f64 / max as f64 };
    let light = 92.0 - 47.0 * t;
    format!("hsl(205,70%,{light:.0}%)")
}

struct Canvas {
    body: String,
    min: (f64, f64),
    max: (f64, f64),
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            body: String::new(),
            min: (f64::INFINITY, f64::INFINITY),
            max: (f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn cover(&mut self, x: f64, y: f64) {
        self.min = (self.min.0.min(x), self.min.1.min(y));
        self.max = (self.max.0.max(x), self.max.1.max(y));
    }

    fn finish(mut self, title: &str) -> String {
        if !self.min.0.is_finite() {
            self.cover(0.0, 0.0);
            self.body.push_str("  <text x=\"0\" y=\"0\" text-anchor=\"middle\">empty</text>\n");
        }
        let (x0, y0) = (self.min.0 - MARGIN, self.min.1 - MARGIN);
        let (w, h) = (
            self.max.0 - self.min.0 + 2.0 * MARGIN,
            self.max.1 - self.min.1 + 2.0 * MARGIN,
        );
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{x0:.2} {y0:.2} {w:.2} {h:.2}\" width=\"{w:.0}\" height=\"{h:.0}\" font-family=\"monospace\" font-size=\"9\">\n\
             <title>{}</title>\n{}</svg>\n",
            escape(title),
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn label(c: &mut Canvas, x: f64, y: f64, id: ModuleId, levels: &str) {
    let _ = writeln!(
        c.body,
        "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-weight=\"bold\">{id}</text>",
        y - 2.0
    );
    let _ = writeln!(
        c.body,
        "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"6\">{}</text>",
        y + 8.0,
        escape(levels)
    );
}

fn render_grid(model: &Model, state: &BundleState, kind: GridKind, theta: &BTreeMap<ModuleId, crate::spatial::GbfCoord>) -> Canvas {
    let mut c = Canvas::new();
    let s3 = 3f64.sqrt();
    for (&id, at) in theta {
        let (a, b) = (at.a as f64, at.b as f64);
        let (x, y) = match kind {
            GridKind::Square => (a * UNIT, -b * UNIT),
            GridKind::Triangular => ((a + b / 2.0) * UNIT, -b * s3 / 2.0 * UNIT),
        };
        let corners: Vec<(f64, f64)> = match kind {
            GridKind::Square => [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
                .iter()
                .map(|&(dx, dy)| (x + dx * UNIT, y + dy * UNIT))
                .collect(),
            GridKind::Triangular => (0..6)
                .map(|k| {
                    let t = std::f64::consts::PI / 6.0 + k as f64 * std::f64::consts::PI / 3.0;
                    let r = UNIT / s3;
                    (x + r * t.cos(), y + r * t.sin())
                })
                .collect(),
        };
        let points: Vec<String> = corners
            .iter()
            .map(|&(px, py)| {
                c.cover(px, py);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            c.body,
            "  <polygon points=\"{}\" fill=\"{}\" stroke=\"#345\" stroke-width=\"1\"/>",
            points.join(" "),
            fill(model, state, id)
        );
        label(&mut c, x, y, id, &level_text(model, state, id));
    }
    c
}

/// Fruchterman-Reingold layout from seeded positions. Returns unit-free coordinates.
pub fn graph_layout(graph: &BdgGraph) -> BTreeMap<ModuleId, (f64, f64)> {
    let nodes: Vec<ModuleId> = graph.nodes().collect();
    let n = nodes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(LAYOUT_SEED);
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    if n <= 1 {
        return nodes.into_iter().map(|id| (id, (0.0, 0.0))).collect();
    }
    let index: BTreeMap<ModuleId, usize> = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let edges: Vec<(usize, usize)> = graph.edges().iter().map(|(a, b)| (index[a], index[b])).collect();
    let k = (4.0 / n as f64).sqrt();
    let mut temp = 0.2;
    for _ in 0..LAYOUT_ROUNDS {
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let d = (dx * dx + dy * dy).sqrt().max(1e-3);
                let f = k * k / d;
                disp[i].0 += dx / d * f;
                disp[i].1 += dy / d * f;
                disp[j].0 -= dx / d * f;
                disp[j].1 -= dy / d * f;
            }
        }
        for &(i, j) in &edges {
            let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
            let d = (dx * dx + dy * dy).sqrt().max(1e-3);
            let f = d * d / k;
            disp[i].0 -= dx / d * f;
            disp[i].1 -= dy / d * f;
            disp[j].0 += dx / d * f;
            disp[j].1 += dy / d * f;
        }
        for i in 0..n {
            let (dx, dy) = disp[i];
            let d = (dx * dx + dy * dy).sqrt().max(1e-9);
            let step = d.min(temp);
            pos[i].0 += dx / d * step;
            pos[i].1 += dy / d * step;
        }
        temp *= 0.985;
    }
    nodes.into_iter().zip(pos).collect()
}

fn render_graph(model: &Model, state: &BundleState, graph: &BdgGraph) -> Canvas {
    let mut c = Canvas::new();
    let layout = graph_layout(graph);
    let scale = UNIT * 1.6 * (graph.node_count().max(1) as f64).sqrt();
    let at = |id: &ModuleId| {
        let (x, y) = layout[id];
        (x * scale, y * scale)
    };
    for (a, b) in graph.edges() {
        let ((x1, y1), (x2, y2)) = (at(&a), at(&b));
        let _ = writeln!(
            c.body,
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#345\" stroke-width=\"1.5\"/>"
        );
    }
    let r = UNIT * 0.42;
    for id in graph.nodes() {
        let (x, y) = at(&id);
        c.cover(x - r, y - r);
        c.cover(x + r, y + r);
        let _ = writeln!(
            c.body,
            "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{}\" stroke=\"#345\" stroke-width=\"1\"/>",
            fill(model, state, id)
        );
        label(&mut c, x, y, id, &level_text(model, state, id));
    }
    c
}

/// SVG 1.1 document showing `state`.
pub fn render_svg(model: &Model, state: &BundleState) -> String {
    let canvas = match state.space() {
        Space::Grid(g) => render_grid(model, state, g.kind(), g.theta()),
        Space::Graph(b) => render_graph(model, state, &b.graph),
    };
    canvas.finish(model.name())
}
