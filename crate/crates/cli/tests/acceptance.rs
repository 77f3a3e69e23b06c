//! Acceptance checks. Runs as a plain binary and prints one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regbundle::bundle::{BundleState, Event, Model};
use regbundle::explorer::{explore, ExploreLimits, StateGraph};
use regbundle::spatial::gbf::{distance, normalize};
use regbundle::spatial::{
    BdgGraph, GbfCoord, GbfInterface, Generator, GridKind, Placement, Space,
};
use regbundle::{dsl, ModuleId};

type Verdict = Result<String, String>;

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn load(name: &str) -> Model {
    let text = std::fs::read_to_string(model_path(name)).expect("model file");
    dsl::load(&text).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Duration, limit: Duration) -> Result<(), String> {
    check(t < limit, format!("took {t:?}, limit {limit:?}"))
}

fn feedback_loop_cycle() -> Verdict {
    let model = load("feedback_loop.model");
    let start = Instant::now();
    let g = explore(&model, model.initial(), ExploreLimits::default()).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    check(
        g.node_count() == 6 && g.edge_count() == 6,
        format!("{} states, {} edges", g.node_count(), g.edge_count()),
    )?;
    let order: [[u8; 3]; 6] = [
        [1, 0, 0],
        [1, 1, 0],
        [1, 1, 1],
        [0, 1, 1],
        [0, 0, 1],
        [0, 0, 0],
    ];
    let id = ModuleId(0);
    let levels = |n: usize| g.state(n).module(id).map(|s| s.levels().to_vec());
    let mut node = g.initial();
    for (step, want) in order.iter().enumerate() {
        check(
            levels(node).as_deref() == Some(&want[..]),
            format!("step {step}: got {:?}, want {want:?}", levels(node)),
        )?;
        let out: Vec<usize> = g.edges().iter().filter(|e| e.src == node).map(|e| e.dst).collect();
        check(out.len() == 1, format!("step {step}: {} outgoing edges", out.len()))?;
        node = out[0];
    }
    check(node == g.initial(), "cycle does not close")?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("6 states, 6 edges, single cycle in order, {t:?}"))
}

fn neighboring_values() -> Verdict {
    let theta = [(0, (0, 0)), (1, (1, 0)), (2, (3, 0))];
    let want = [((0, 1), 1.0), ((1, 2), 0.5), ((0, 2), 0.0)];
    for kind in [GridKind::Square, GridKind::Triangular] {
        let mut grid = GbfInterface::new(kind, Some(2));
        for (id, (a, b)) in theta {
            grid = grid
                .allocate(ModuleId(id), GbfCoord::new(a, b))
                .map_err(|e| e.to_string())?;
        }
        for ((i, j), v) in want {
            let got = grid
                .neighboring(ModuleId(i), ModuleId(j))
                .map_err(|e| e.to_string())?
                .value();
            check(got == v, format!("{kind:?}: delta({i},{j}) = {got}, want {v}"))?;
        }
    }
    Ok("delta(0,1)=1, delta(1,2)=0.5, delta(0,2)=0 on both kinds".into())
}

fn word_identity() -> Verdict {
    use Generator::{Nw, E, N};
    let kind = GridKind::Triangular;
    let lhs = normalize(&[(N, 2), (E, 1)], kind).map_err(|e| e.to_string())?;
    let rhs = normalize(&[(E, 2), (N, 1), (Nw, 1)], kind).map_err(|e| e.to_string())?;
    check(lhs == rhs, format!("{lhs} != {rhs}"))?;
    Ok(format!("2n+e = 2e+n+nw = {lhs}"))
}

/// Breadth-first distances from `src` over unit moves, up to `depth`.
fn bfs_ball(kind: GridKind, src: GbfCoord, depth: u64) -> HashMap<GbfCoord, u64> {
    let mut dist = HashMap::from([(src, 0)]);
    let mut queue = VecDeque::from([src]);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        if d == depth {
            continue;
        }
        for m in kind.unit_moves() {
            let q = GbfCoord::new(p.a + m.a, p.b + m.b);
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(q) {
                slot.insert(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

fn distances() -> Verdict {
    let start = Instant::now();
    let tri = GridKind::Triangular;
    let (e, n) = (GbfCoord::new(1, 0), GbfCoord::new(0, 1));
    check(distance(e, n, tri) == 1, "triangular distance(e, n) != 1")?;
    check(
        distance(n, GbfCoord::new(1, 2), tri) == 2,
        "triangular distance(n, 2n+e) != 2",
    )?;
    let (mut pairs, mut mismatches) = (0usize, 0usize);
    for kind in [GridKind::Square, tri] {
        let ball: Vec<GbfCoord> = bfs_ball(kind, GbfCoord::ORIGIN, 5).into_keys().collect();
        for &x in &ball {
            let oracle = bfs_ball(kind, x, 10);
            for &y in &ball {
                pairs += 1;
                if oracle.get(&y).copied() != Some(distance(x, y, kind)) {
                    mismatches += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    check(pairs >= 8000, format!("only {pairs} pairs"))?;
    check(mismatches == 0, format!("{mismatches} mismatches over {pairs} pairs"))?;
    within(t, Duration::from_secs(5))?;
    Ok(format!("{pairs} pairs, 0 mismatches, {t:?}"))
}

fn bdg(bound: usize, n: u16, edges: &[(u16, u16)]) -> Result<BdgGraph, String> {
    BdgGraph::from_edges(
        bound,
        (0..n).map(ModuleId),
        edges.iter().map(|&(a, b)| (ModuleId(a), ModuleId(b))),
    )
    .map_err(|e| e.to_string())
}

fn bdg_counts() -> Verdict {
    let k3 = bdg(6, 3, &[(0, 1), (1, 2), (0, 2)])?;
    let ins = k3.insertion_points(ModuleId(0)).map_err(|e| e.to_string())?.len();
    check(ins == 4, format!("K3 node 0: {ins} insertion points"))?;
    let mut wheel: Vec<(u16, u16)> = (1..=6).map(|r| (0, r)).collect();
    wheel.extend((1..=6).map(|r| (r, r % 6 + 1)));
    let wheel = bdg(6, 7, &wheel)?;
    let centre = ModuleId(0);
    let ins = wheel.insertion_points(centre).map_err(|e| e.to_string())?.len();
    check(ins == 0, format!("wheel centre: {ins} insertion points"))?;
    let split_edges: BTreeSet<ModuleId> = wheel
        .split_points(centre)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|s| s.pulled)
        .collect();
    check(
        split_edges.len() == 6,
        format!("wheel centre: {} split edges", split_edges.len()),
    )?;
    Ok("K3: 4 insertion points; wheel centre: 0 insertion points, 6 split edges".into())
}

/// Degree bound and simplicity, checked from the adjacency alone.
fn violates(g: &BdgGraph, bound: usize) -> Option<String> {
    let adj = g.adjacency();
    for (i, ns) in adj {
        if ns.len() > bound {
            return Some(format!("node {i} has degree {}", ns.len()));
        }
        if ns.contains(i) {
            return Some(format!("self-loop at {i}"));
        }
        if let Some(j) = ns.iter().find(|j| !adj.get(j).is_some_and(|m| m.contains(i))) {
            return Some(format!("edge {i}-{j} is not symmetric"));
        }
    }
    None
}

fn random_op(g: &BdgGraph, rng: &mut ChaCha8Rng) -> Result<Option<BdgGraph>, String> {
    const MAX_NODES: usize = 12;
    let nodes: Vec<ModuleId> = g.nodes().collect();
    let i = *nodes.choose(rng).expect("graph is non-empty");
    let fresh = (0..).map(ModuleId).find(|k| !g.contains(*k)).expect("free id");
    let err = |e: regbundle::spatial::SpatialError| e.to_string();
    Ok(match rng.random_range(0..4) {
        0 if nodes.len() < MAX_NODES => {
            let pts = g.insertion_points(i).map_err(err)?;
            match pts.choose(rng) {
                Some(p) => Some(g.apply_insertion(p, fresh).map_err(err)?),
                None => None,
            }
        }
        1 if nodes.len() < MAX_NODES => {
            let pts = g.split_points(i).map_err(err)?;
            match pts.choose(rng) {
                Some(s) => Some(g.apply_split(s, fresh).map_err(err)?),
                None => None,
            }
        }
        2 if nodes.len() > 1 => Some(g.remove_node(i).map_err(err)?),
        3 => {
            let targets = g.migration_targets(i, rng.random_bool(0.5)).map_err(err)?;
            let target: Option<&Placement> = targets.choose(rng);
            match target {
                Some(t) => Some(g.migrate(i, t).map_err(err)?),
                None => None,
            }
        }
        _ => None,
    })
}

fn degree_bound() -> Verdict {
    const BOUND: usize = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(0xB06D);
    let (mut ops, mut violations, mut max_nodes) = (0usize, 0usize, 0usize);
    let mut first = None;
    for _ in 0..10_000 {
        let mut g = BdgGraph::from_edges(BOUND, [ModuleId(0)], []).map_err(|e| e.to_string())?;
        for _ in 0..rng.random_range(1..=40) {
            if let Some(next) = random_op(&g, &mut rng)? {
                g = next;
                ops += 1;
                max_nodes = max_nodes.max(g.node_count());
                if let Some(v) = violates(&g, BOUND) {
                    violations += 1;
                    first.get_or_insert(v);
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{violations} violations, first: {}", first.unwrap_or_default()),
    )?;
    Ok(format!(
        "10000 sequences, {ops} applied operations, up to {max_nodes} nodes, 0 violations"
    ))
}

struct Healing {
    model: Model,
    graph: StateGraph,
    elapsed: Duration,
}

fn healing() -> Result<Healing, String> {
    let model = load("healing_ring.model");
    let start = Instant::now();
    let graph = explore(&model, model.initial(), ExploreLimits::with_max_states(200_000))
        .map_err(|e| e.to_string())?;
    Ok(Healing {
        model,
        graph,
        elapsed: start.elapsed(),
    })
}

fn bdg_of(s: &BundleState) -> &BdgGraph {
    match s.space() {
        Space::Graph(b) => &b.graph,
        Space::Grid(_) => panic!("healing model is a graph model"),
    }
}

/// Distances from `src` by breadth-first search over the adjacency.
fn graph_distances(g: &BdgGraph, src: ModuleId) -> BTreeMap<ModuleId, u64> {
    let adj = g.adjacency();
    let mut dist = BTreeMap::from([(src, 0)]);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[&u] {
            if !dist.contains_key(&v) {
                dist.insert(v, dist[&u] + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn healing_ring(h: &Result<Healing, String>) -> Verdict {
    let h = h.as_ref().map_err(Clone::clone)?;
    let g = &h.graph;
    let init = g.state(g.initial());
    let death = g
        .edges()
        .iter()
        .find(|e| e.src == g.initial() && matches!(e.label, Event::Apoptosis { .. }))
        .ok_or("no removal from the initial ring")?;
    let Event::Apoptosis { module: removed } = death.label else {
        unreachable!()
    };
    let former: Vec<ModuleId> = bdg_of(init).adjacency()[&removed].iter().copied().collect();
    let former_text: Vec<String> = former.iter().map(ToString::to_string).collect();

    let at_distance = |want: u64| {
        g.edges().iter().find(|e| match e.label {
            Event::Division { parent, .. } => {
                let pre = bdg_of(g.state(e.src));
                former.iter().any(|&f| {
                    pre.contains(f) && graph_distances(pre, f).get(&parent) == Some(&want)
                })
            }
            _ => false,
        })
    };
    let witness = at_distance(2).ok_or("no division at distance 2 from a former neighbour")?;
    let one_layer = at_distance(1).is_some();
    let mut trace = g
        .trace_to(|s| g.lookup(s) == Some(witness.src))
        .ok_or("witness not reachable")?;
    trace.push(witness.label.clone());
    check(
        trace.contains(&death.label),
        "witness path does not pass through the removal",
    )?;
    within(h.elapsed, Duration::from_secs(60))?;
    let text: Vec<String> = trace
        .iter()
        .map(|e| h.model.display_event(e).to_string())
        .collect();
    Ok(format!(
        "{} states, {:?}; removed {removed}, former neighbours {}; \
         division one hop outside the gap: {one_layer}; witness: {}",
        g.node_count(),
        h.elapsed,
        former_text.join(","),
        text.join(" ")
    ))
}

fn division_semantics(h: &Result<Healing, String>) -> Verdict {
    let h = h.as_ref().map_err(Clone::clone)?;
    let g = &h.graph;
    let (mut checked, mut violations) = (0usize, Vec::new());
    for e in g.edges() {
        let Event::Division { parent, child, .. } = e.label else {
            continue;
        };
        checked += 1;
        let (pre, post) = (g.state(e.src), g.state(e.dst));
        let min_free = (0..h.model.universe())
            .map(ModuleId)
            .find(|k| pre.module(*k).is_none());
        if min_free != Some(child) {
            violations.push(format!("child {child}, min free {min_free:?}"));
        }
        if post.module(child) != pre.module(parent) {
            violations.push(format!("levels of {child} differ from parent {parent}"));
        }
    }
    check(checked > 0, "no division edges")?;
    check(
        violations.is_empty(),
        format!("{} violations, first: {}", violations.len(), violations.first().map_or("", String::as_str)),
    )?;
    Ok(format!("{checked} division edges, 0 violations"))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model = model_path("healing_ring.model");
    let run = |tag: &str, jobs: &str| -> Result<(String, Vec<u8>), String> {
        let out = dir.path().join(format!("{tag}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_regbundle"))
            .arg("explore")
            .arg(&model)
            .args(["--max-states", "200000", "--jobs", jobs, "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        check(o.status.success(), format!("exit {:?}", o.status.code()))?;
        let summary = String::from_utf8_lossy(&o.stdout).trim().to_string();
        Ok((summary, std::fs::read(&out).map_err(|e| e.to_string())?))
    };
    let a = run("a", "1")?;
    let b = run("b", "1")?;
    let c = run("c", "4")?;
    check(a.0 == b.0 && a.0 == c.0, format!("summaries differ: {} / {} / {}", a.0, b.0, c.0))?;
    check(a.1 == b.1, "JSON differs between identical runs")?;
    check(a.1 == c.1, "JSON differs between --jobs 1 and --jobs 4")?;
    Ok(format!("{}; {} JSON bytes identical across 3 runs", a.0, a.1.len()))
}

fn main() -> ExitCode {
    let h = healing();
    let results: Vec<(&str, Verdict)> = vec![
        ("1 state graph of the feedback loop", feedback_loop_cycle()),
        ("2 neighboring values on grids", neighboring_values()),
        ("3 grid word identity", word_identity()),
        ("4 grid distances", distances()),
        ("5 insertion and split counts", bdg_counts()),
        ("6 degree-bound preservation", degree_bound()),
        ("7 healing ring", healing_ring(&h)),
        ("8 division semantics", division_semantics(&h)),
        ("9 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
