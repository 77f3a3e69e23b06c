use proptest::prelude::*;

use regbundle::explorer::{explore, ExploreError, ExploreLimits};
use regbundle::spatial::gbf::{distance, normalize};
use regbundle::spatial::{GbfCoord, Generator, GridKind, Space};
use regbundle::{dsl, Event};

fn kind() -> impl Strategy<Value = GridKind> {
    prop_oneof![Just(GridKind::Square), Just(GridKind::Triangular)]
}

fn coord() -> impl Strategy<Value = GbfCoord> {
    (-1000i32..1000, -1000i32..1000).prop_map(|(a, b)| GbfCoord::new(a, b))
}

proptest! {
    #[test]
    fn distance_is_a_translation_invariant_metric(k in kind(), x in coord(), y in coord(), z in coord()) {
        prop_assert_eq!(distance(x, y, k), distance(y, x, k));
        prop_assert_eq!(distance(x, x, k), 0);
        prop_assert!(distance(x, z, k) <= distance(x, y, k) + distance(y, z, k));
        let shift = |p: GbfCoord| GbfCoord::new(p.a - x.a, p.b - x.b);
        prop_assert_eq!(distance(x, y, k), distance(GbfCoord::ORIGIN, shift(y), k));
    }

    #[test]
    fn unit_moves_are_exactly_the_distance_one_cells(k in kind(), x in coord()) {
        for m in k.unit_moves() {
            prop_assert_eq!(distance(x, GbfCoord::new(x.a + m.a, x.b + m.b), k), 1);
        }
        let ones = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| GbfCoord::new(a, b)))
            .filter(|d| distance(GbfCoord::ORIGIN, *d, k) == 1)
            .count();
        prop_assert_eq!(ones, k.unit_moves().len());
    }

    #[test]
    fn triangular_words_sum_their_generators(word in prop::collection::vec((0usize..3, -50i64..50), 0..12)) {
        let gens = [Generator::E, Generator::N, Generator::Nw];
        let basis = [(1i64, 0i64), (0, 1), (-1, 1)];
        let w: Vec<(Generator, i64)> = word.iter().map(|&(g, c)| (gens[g], c)).collect();
        let (a, b) = word
            .iter()
            .fold((0, 0), |(a, b), &(g, c)| (a + c * basis[g].0, b + c * basis[g].1));
        let got = normalize(&w, GridKind::Triangular).unwrap();
        prop_assert_eq!((got.a as i64, got.b as i64), (a, b));
    }
}

#[test]
fn unbounded_grid_model_truncates_at_the_limit() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/tri_example.model")).unwrap();
    let model = dsl::load(&text).unwrap();
    let err = explore(&model, model.initial(), ExploreLimits::with_max_states(500)).unwrap_err();
    let ExploreError::LimitExceeded { limit, partial } = err else {
        panic!("expected a truncated exploration");
    };
    assert_eq!(limit, 500);
    assert_eq!(partial.node_count(), 500);
    assert!(partial.is_truncated());
    assert!(partial.edges().iter().all(|e| e.src < 500 && e.dst < 500));
    assert!(partial.terminal_sccs().is_err());
}

#[test]
fn healing_ring_states_respect_the_degree_bound() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/healing_ring.model")).unwrap();
    let model = dsl::load(&text).unwrap();
    let g = explore(&model, model.initial(), ExploreLimits::default()).unwrap();
    for s in g.states() {
        let Space::Graph(b) = s.space() else { panic!("graph model") };
        let ids: Vec<_> = s.levels().keys().copied().collect();
        assert_eq!(b.graph.nodes().collect::<Vec<_>>(), ids);
        assert!(b.graph.adjacency().values().all(|n| n.len() <= 2));
        assert!(s.module_count() <= model.universe() as usize);
    }
    let deaths = g.edges().iter().filter(|e| matches!(e.label, Event::Apoptosis { .. })).count();
    assert_eq!(deaths, 1);
}
