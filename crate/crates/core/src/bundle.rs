//! Spatialized regulatory bundles: modules with inputs and transformations
//! placed on a spatial backend, and their interleaving successor semantics.
//!
//! Every edge of the transition system is exactly one of
//! - `Update(i, G)`: component `G` of module `i` steps toward its rule target,
//! - `Apoptosis(i)`: module `i` is removed,
//! - `Migration(i, ℓ)`: module `i` moves to a free neighbouring location,
//! - `Division(i, k, ℓ)`: a copy of `i` is created as module `k = min(free ids)` at `ℓ`.
//!
//! Rules and guards read the pre-state of all modules.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Scope};
use crate::ids::{Level, ModuleId};
use crate::regnet::{step_toward, NetState, NetworkError, NetworkSpec};
use crate::spatial::{Location, Neighboring, Space, SpatialError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error("integration `{name}` reads unknown component index {source_index}")]
    UnknownSource { name: String, source_index: usize },
    #[error("duplicate integration `{0}`")]
    DuplicateIntegration(String),
    #[error("{0} guard references an undeclared component or integration")]
    GuardReference(&'static str),
    #[error("levels are given for {levels:?} but the space allocates {space:?}")]
    DomainMismatch {
        levels: Vec<ModuleId>,
        space: Vec<ModuleId>,
    },
    #[error("module {id} is outside the identifier universe 0..{universe}")]
    OutsideUniverse { id: ModuleId, universe: u16 },
    #[error("module {0} is not allocated")]
    Unallocated(ModuleId),
    #[error("identifier universe must be non-empty")]
    EmptyUniverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegrationKind {
    /// `max_j round(δ(i,j)·x_j)`, 0 on an empty neighbourhood.
    MaxRound,
    /// `min_j round(δ(i,j)·x_j)`, 0 on an empty neighbourhood.
    MinRound,
    /// `Σ_j round(δ(i,j)·x_j)` clamped into the source component's range.
    SumClamp,
}

impl IntegrationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            IntegrationKind::MaxRound => "max_round",
            IntegrationKind::MinRound => "min_round",
            IntegrationKind::SumClamp => "sum_clamp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrationSpec {
    pub name: String,
    /// Index of the component read in neighbouring modules.
    pub source: usize,
    pub kind: IntegrationKind,
}

/// Guard of a migration or division.
///
/// With `per_location == false` the guard filters the whole candidate set
/// (all locations or none). With `per_location == true` it is evaluated once
/// per candidate, in the state that would result, from the point of view of
/// the moved (or newly created) module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub expr: Expr,
    pub per_location: bool,
}

impl Guard {
    pub fn whole_set(expr: Expr) -> Self {
        Guard {
            expr,
            per_location: false,
        }
    }

    pub fn per_location(expr: Expr) -> Self {
        Guard {
            expr,
            per_location: true,
        }
    }
}

/// Transformation guards. An absent guard never fires.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformSpec {
    pub apoptosis: Option<Expr>,
    pub migration: Option<Guard>,
    pub division: Option<Guard>,
}

/// A regulatory module: a network whose rules may read integration functions,
/// plus transformation guards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleSpec {
    network: NetworkSpec,
    integrations: Vec<IntegrationSpec>,
    transforms: TransformSpec,
}

impl ModuleSpec {
    pub fn new(
        components: Vec<(String, Level)>,
        rules: Vec<(String, Expr)>,
        integrations: Vec<IntegrationSpec>,
        transforms: TransformSpec,
    ) -> Result<Self, BundleError> {
        let network = NetworkSpec::with_inputs(components, rules, integrations.len())?;
        for (n, s) in integrations.iter().enumerate() {
            if s.source >= network.len() {
                return Err(BundleError::UnknownSource {
                    name: s.name.clone(),
                    source_index: s.source,
                });
            }
            if integrations[..n].iter().any(|o| o.name == s.name) {
                return Err(BundleError::DuplicateIntegration(s.name.clone()));
            }
        }
        let ok = |e: &Expr| {
            let mut ok = !e.uses_global_forms();
            e.walk(&mut |n| match n {
                Expr::Level(c) => ok &= *c < network.len(),
                Expr::Sigma(s) => ok &= *s < integrations.len(),
                _ => {}
            });
            ok
        };
        if transforms.apoptosis.as_ref().is_some_and(|e| !ok(e)) {
            return Err(BundleError::GuardReference("apoptosis"));
        }
        if transforms.migration.as_ref().is_some_and(|g| !ok(&g.expr)) {
            return Err(BundleError::GuardReference("migration"));
        }
        if transforms.division.as_ref().is_some_and(|g| !ok(&g.expr)) {
            return Err(BundleError::GuardReference("division"));
        }
        Ok(ModuleSpec {
            network,
            integrations,
            transforms,
        })
    }

    /// A module with no inputs and no transformations.
    pub fn from_network(network: NetworkSpec) -> Self {
        ModuleSpec {
            network,
            integrations: Vec::new(),
            transforms: TransformSpec::default(),
        }
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.network
    }

    pub fn integrations(&self) -> &[IntegrationSpec] {
        &self.integrations
    }

    pub fn transforms(&self) -> &TransformSpec {
        &self.transforms
    }
}

/// One argument of an integration function: neighbour `j`, δ(i, j), and the
/// source component's level in `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaArg {
    pub module: ModuleId,
    pub neighboring: Neighboring,
    pub level: Level,
}

/// Collapse neighbour levels into one level of the source component's range.
pub fn integrate(kind: IntegrationKind, args: &[SigmaArg], max: Level) -> Level {
    let weighed = args.iter().map(|a| a.neighboring.weigh(a.level as u64));
    let v = match kind {
        IntegrationKind::MaxRound => weighed.max().unwrap_or(0),
        IntegrationKind::MinRound => weighed.min().unwrap_or(0),
        IntegrationKind::SumClamp => weighed.sum(),
    };
    v.min(max as u64) as Level
}

/// Levels of every allocated module joined with the spatial state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BundleState {
    levels: BTreeMap<ModuleId, NetState>,
    space: Space,
}

impl BundleState {
    /// The domain of `levels` must equal the allocated identifiers of `space`.
    pub fn new(levels: BTreeMap<ModuleId, NetState>, space: Space) -> Result<Self, BundleError> {
        let have: Vec<ModuleId> = levels.keys().copied().collect();
        let alloc = space.allocated();
        if have != alloc {
            return Err(BundleError::DomainMismatch {
                levels: have,
                space: alloc,
            });
        }
        Ok(BundleState { levels, space })
    }

    pub fn levels(&self) -> &BTreeMap<ModuleId, NetState> {
        &self.levels
    }

    pub fn module(&self, i: ModuleId) -> Option<&NetState> {
        self.levels.get(&i)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn allocated(&self) -> impl Iterator<Item = ModuleId> + '_ {
        self.levels.keys().copied()
    }

    pub fn module_count(&self) -> usize {
        self.levels.len()
    }

    /// Drop module `i` from levels and space.
    pub fn without_module(&self, i: ModuleId) -> Result<BundleState, BundleError> {
        if !self.levels.contains_key(&i) {
            return Err(BundleError::Unallocated(i));
        }
        let mut levels = self.levels.clone();
        levels.remove(&i);
        Ok(BundleState {
            levels,
            space: self.space.remove(i)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Update {
        module: ModuleId,
        component: usize,
    },
    Apoptosis {
        module: ModuleId,
    },
    Migration {
        module: ModuleId,
        to: Location,
    },
    Division {
        parent: ModuleId,
        child: ModuleId,
        at: Location,
    },
}

/// Event text with component names resolved through a model.
pub struct EventDisplay<'a> {
    event: &'a Event,
    model: &'a Model,
}

impl fmt::Display for EventDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Event::Update { module, component } => {
                let name = &self.model.network().components()[*component].name;
                write!(f, "update({module},{name})")
            }
            Event::Apoptosis { module } => write!(f, "die({module})"),
            Event::Migration { module, to } => write!(f, "migrate({module},{to})"),
            Event::Division { parent, child, at } => write!(f, "divide({parent},{child},{at})"),
        }
    }
}

/// A checked model: one module sort, an identifier universe and an initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    name: String,
    module: ModuleSpec,
    universe: u16,
    initial: BundleState,
}

struct ModuleScope<'a> {
    model: &'a Model,
    state: &'a BundleState,
    module: ModuleId,
    levels: &'a NetState,
}

impl Scope for ModuleScope<'_> {
    fn level(&self, c: usize) -> i64 {
        self.levels[c] as i64
    }

    fn sigma(&self, s: usize) -> i64 {
        self.model.sigma_value(self.state, self.module, s) as i64
    }
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        module: ModuleSpec,
        universe: u16,
        initial: BundleState,
    ) -> Result<Self, BundleError> {
        if universe == 0 {
            return Err(BundleError::EmptyUniverse);
        }
        let model = Model {
            name: name.into(),
            module,
            universe,
            initial,
        };
        model.check_state(&model.initial)?;
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.module.network
    }

    pub fn universe(&self) -> u16 {
        self.universe
    }

    pub fn initial(&self) -> &BundleState {
        &self.initial
    }

    /// Same model with a different initial state.
    pub fn with_initial(&self, initial: BundleState) -> Result<Model, BundleError> {
        Model::new(self.name.clone(), self.module.clone(), self.universe, initial)
    }

    pub fn check_state(&self, state: &BundleState) -> Result<(), BundleError> {
        for (&id, levels) in &state.levels {
            if id.0 >= self.universe {
                return Err(BundleError::OutsideUniverse {
                    id,
                    universe: self.universe,
                });
            }
            self.network().check_state(levels)?;
        }
        Ok(())
    }

    pub fn display_event<'a>(&'a self, event: &'a Event) -> EventDisplay<'a> {
        EventDisplay { event, model: self }
    }

    /// Arguments of an integration reading component `source` for module `i`.
    pub fn sigma_args(
        &self,
        state: &BundleState,
        i: ModuleId,
        source: usize,
    ) -> Result<Vec<SigmaArg>, BundleError> {
        let neighbors = state.space.neighbors(i).map_err(|e| match e {
            SpatialError::Unallocated(m) | SpatialError::UnknownNode(m) => {
                BundleError::Unallocated(m)
            }
            other => other.into(),
        })?;
        Ok(neighbors
            .into_iter()
            .map(|(j, neighboring)| SigmaArg {
                module: j,
                neighboring,
                level: state.levels[&j][source],
            })
            .collect())
    }

    /// Value of integration function `s` for module `i`.
    pub fn sigma_value(&self, state: &BundleState, i: ModuleId, s: usize) -> Level {
        let spec = &self.module.integrations[s];
        let max = self.network().components()[spec.source].max;
        match self.sigma_args(state, i, spec.source) {
            Ok(args) => integrate(spec.kind, &args, max),
            Err(_) => 0,
        }
    }

    fn scope<'a>(&'a self, state: &'a BundleState, i: ModuleId) -> Option<ModuleScope<'a>> {
        Some(ModuleScope {
            model: self,
            state,
            module: i,
            levels: state.levels.get(&i)?,
        })
    }

    /// Step component `g` of module `i` toward its target, if it moves.
    pub fn update_successor(
        &self,
        state: &BundleState,
        i: ModuleId,
        g: usize,
    ) -> Option<(Event, BundleState)> {
        let scope = self.scope(state, i)?;
        let current = scope.levels[g];
        let next = step_toward(current, self.network().target_in(&scope, g));
        if next == current {
            return None;
        }
        let mut after = state.clone();
        after.levels.insert(i, scope.levels.with(g, next));
        Some((
            Event::Update {
                module: i,
                component: g,
            },
            after,
        ))
    }

    pub fn apoptosis_successor(
        &self,
        state: &BundleState,
        i: ModuleId,
    ) -> Option<(Event, BundleState)> {
        let guard = self.module.transforms.apoptosis.as_ref()?;
        let scope = self.scope(state, i)?;
        if !guard.holds(&scope) {
            return None;
        }
        let after = state.without_module(i).ok()?;
        if state.space.forbids(&after.space) {
            return None;
        }
        Some((Event::Apoptosis { module: i }, after))
    }

    pub fn migration_successors(&self, state: &BundleState, i: ModuleId) -> Vec<(Event, BundleState)> {
        let Some(guard) = &self.module.transforms.migration else {
            return Vec::new();
        };
        let Some(scope) = self.scope(state, i) else {
            return Vec::new();
        };
        if !guard.per_location && !guard.expr.holds(&scope) {
            return Vec::new();
        }
        let sites = state.space.migration_sites(i).unwrap_or_default();
        let mut out = Vec::new();
        for to in sites {
            let Ok(space) = state.space.migrate(i, &to) else {
                continue;
            };
            if space == state.space || state.space.forbids(&space) {
                continue;
            }
            let after = BundleState {
                levels: state.levels.clone(),
                space,
            };
            if guard.per_location && !self.holds_at(&guard.expr, &after, i) {
                continue;
            }
            out.push((Event::Migration { module: i, to }, after));
        }
        out
    }

    /// Smallest identifier of the universe not allocated in `state`.
    pub fn free_identifier(&self, state: &BundleState) -> Option<ModuleId> {
        (0..self.universe)
            .map(ModuleId)
            .find(|k| !state.levels.contains_key(k))
    }

    pub fn division_successors(&self, state: &BundleState, i: ModuleId) -> Vec<(Event, BundleState)> {
        let Some(guard) = &self.module.transforms.division else {
            return Vec::new();
        };
        let Some(scope) = self.scope(state, i) else {
            return Vec::new();
        };
        let Some(k) = self.free_identifier(state) else {
            return Vec::new();
        };
        if !guard.per_location && !guard.expr.holds(&scope) {
            return Vec::new();
        }
        let sites = state.space.division_sites(i).unwrap_or_default();
        let copy = scope.levels.clone();
        let mut out = Vec::new();
        for at in sites {
            let Ok(space) = state.space.place(k, &at) else {
                continue;
            };
            if state.space.forbids(&space) {
                continue;
            }
            let mut levels = state.levels.clone();
            levels.insert(k, copy.clone());
            let after = BundleState { levels, space };
            if guard.per_location && !self.holds_at(&guard.expr, &after, k) {
                continue;
            }
            out.push((
                Event::Division {
                    parent: i,
                    child: k,
                    at,
                },
                after,
            ));
        }
        out
    }

    fn holds_at(&self, guard: &Expr, state: &BundleState, module: ModuleId) -> bool {
        self.scope(state, module).is_some_and(|s| guard.holds(&s))
    }

    /// All one-event successors of `state`.
    pub fn successors(&self, state: &BundleState) -> Vec<(Event, BundleState)> {
        let mut out = Vec::new();
        for i in state.allocated() {
            for g in 0..self.network().len() {
                out.extend(self.update_successor(state, i, g));
            }
            out.extend(self.apoptosis_successor(state, i));
            out.extend(self.migration_successors(state, i));
            out.extend(self.division_successors(state, i));
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::BinOp;
    use crate::spatial::{GbfCoord, GbfInterface, GridKind};

    pub(crate) fn m(i: u16) -> ModuleId {
        ModuleId(i)
    }

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const SC: usize = 0;
    const SA: usize = 1;

    /// The three-component module with external inhibition of B by C, and the
    /// die / migrate / divide guards.
    pub(crate) fn transform_module(with_transforms: bool) -> ModuleSpec {
        let x = Expr::level;
        let transforms = if with_transforms {
            TransformSpec {
                apoptosis: Some(x(A).eq(Expr::constant(0)).and(Expr::sigma(SA).eq(Expr::constant(0)))),
                migration: Some(Guard::whole_set((x(A) + x(B)).gt(Expr::constant(0)))),
                division: Some(Guard::whole_set((Expr::sigma(SA) - x(A)).gt(Expr::constant(0)))),
            }
        } else {
            TransformSpec::default()
        };
        ModuleSpec::new(
            vec![("A".into(), 1), ("B".into(), 1), ("C".into(), 1)],
            vec![
                ("A".into(), Expr::constant(1) - x(C)),
                ("B".into(), Expr::max(vec![Expr::constant(0), x(A) - Expr::sigma(SC)])),
                ("C".into(), x(B)),
            ],
            vec![
                IntegrationSpec {
                    name: "sC".into(),
                    source: C,
                    kind: IntegrationKind::MaxRound,
                },
                IntegrationSpec {
                    name: "sA".into(),
                    source: A,
                    kind: IntegrationKind::MaxRound,
                },
            ],
            transforms,
        )
        .unwrap()
    }

    pub(crate) fn grid_state(
        kind: GridKind,
        cutoff: Option<u32>,
        cells: &[(u16, (i32, i32), [Level; 3])],
    ) -> BundleState {
        let mut space = GbfInterface::new(kind, cutoff);
        let mut levels = BTreeMap::new();
        for &(id, (a, b), l) in cells {
            space = space.allocate(m(id), GbfCoord::new(a, b)).unwrap();
            levels.insert(m(id), NetState::new(l.to_vec()));
        }
        BundleState::new(levels, Space::Grid(space)).unwrap()
    }

    fn three_cell_model(levels: [[Level; 3]; 3], transforms: bool) -> Model {
        let s = grid_state(
            GridKind::Triangular,
            Some(2),
            &[
                (0, (0, 0), levels[0]),
                (1, (1, 0), levels[1]),
                (2, (3, 0), levels[2]),
            ],
        );
        Model::new("three-cell", transform_module(transforms), 16, s).unwrap()
    }

    #[test]
    fn sigma_args_follow_neighboring() {
        let model = three_cell_model([[0, 0, 0], [0, 0, 1], [0, 0, 0]], false);
        let s = model.initial();
        let a0 = model.sigma_args(s, m(0), C).unwrap();
        assert_eq!(a0.len(), 1);
        assert_eq!(a0[0].module, m(1));
        assert_eq!(a0[0].neighboring.value(), 1.0);
        assert_eq!(a0[0].level, 1);
        let a1 = model.sigma_args(s, m(1), C).unwrap();
        let ids: Vec<ModuleId> = a1.iter().map(|a| a.module).collect();
        assert_eq!(ids, vec![m(0), m(2)]);
        assert_eq!(a1[1].neighboring.value(), 0.5);
        assert_eq!(
            model.sigma_args(s, m(7), C),
            Err(BundleError::Unallocated(m(7)))
        );
    }

    #[test]
    fn single_module_has_no_sigma_args() {
        let s = grid_state(GridKind::Square, None, &[(0, (0, 0), [1, 0, 0])]);
        let model = Model::new("one", transform_module(false), 4, s).unwrap();
        assert!(model.sigma_args(model.initial(), m(0), C).unwrap().is_empty());
    }

    #[test]
    fn integrate_kinds() {
        let one = Neighboring::from_distance(Some(1), None);
        let half = Neighboring::from_distance(Some(2), None);
        let arg = |n, l| SigmaArg {
            module: m(9),
            neighboring: n,
            level: l,
        };
        assert_eq!(integrate(IntegrationKind::MaxRound, &[arg(one, 1)], 1), 1);
        assert_eq!(integrate(IntegrationKind::MaxRound, &[], 1), 0);
        assert_eq!(integrate(IntegrationKind::MaxRound, &[arg(half, 1)], 1), 1);
        assert_eq!(integrate(IntegrationKind::MinRound, &[], 3), 0);
        assert_eq!(
            integrate(IntegrationKind::MinRound, &[arg(one, 3), arg(half, 3)], 3),
            2
        );
        assert_eq!(
            integrate(IntegrationKind::SumClamp, &[arg(one, 2), arg(half, 3)], 3),
            3
        );
        assert_eq!(
            integrate(IntegrationKind::SumClamp, &[arg(one, 1), arg(one, 1)], 3),
            2
        );
    }

    #[test]
    fn update_without_inhibition() {
        let model = three_cell_model([[1, 0, 0], [0, 0, 0], [0, 0, 0]], false);
        let (ev, after) = model.update_successor(model.initial(), m(0), B).unwrap();
        assert_eq!(ev, Event::Update { module: m(0), component: B });
        assert_eq!(after.module(m(0)).unwrap().levels(), &[1, 1, 0]);
        assert_eq!(after.space(), model.initial().space());
    }

    #[test]
    fn update_blocked_by_neighbour_c() {
        let model = three_cell_model([[1, 0, 0], [0, 0, 1], [0, 0, 0]], false);
        assert!(model.update_successor(model.initial(), m(0), B).is_none());
    }

    #[test]
    fn update_at_target_is_none() {
        let model = three_cell_model([[1, 0, 0], [1, 0, 0], [1, 0, 0]], false);
        assert!(model.update_successor(model.initial(), m(0), A).is_none());
    }

    #[test]
    fn all_a_bundle_has_exactly_three_b_updates() {
        let model = three_cell_model([[1, 0, 0], [1, 0, 0], [1, 0, 0]], false);
        let succ = model.successors(model.initial());
        let events: Vec<Event> = succ.into_iter().map(|(e, _)| e).collect();
        assert_eq!(
            events,
            (0..3)
                .map(|i| Event::Update { module: m(i), component: B })
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn apoptosis_guard() {
        // lone cell without A dies
        let s = grid_state(GridKind::Square, None, &[(0, (0, 0), [0, 0, 0])]);
        let model = Model::new("d", transform_module(true), 4, s).unwrap();
        let (ev, after) = model.apoptosis_successor(model.initial(), m(0)).unwrap();
        assert_eq!(ev, Event::Apoptosis { module: m(0) });
        assert_eq!(after.module_count(), 0);
        assert!(after.space().allocated().is_empty());

        let s = grid_state(GridKind::Square, None, &[(0, (0, 0), [1, 0, 0])]);
        let model = model.with_initial(s).unwrap();
        assert!(model.apoptosis_successor(model.initial(), m(0)).is_none());

        let s = grid_state(
            GridKind::Square,
            None,
            &[(0, (0, 0), [0, 0, 0]), (1, (1, 0), [1, 0, 0])],
        );
        let model = model.with_initial(s).unwrap();
        assert!(model.apoptosis_successor(model.initial(), m(0)).is_none());
    }

    #[test]
    fn migration_guard_whole_set() {
        let layout = |lv: [Level; 3]| {
            grid_state(
                GridKind::Square,
                None,
                &[
                    (0, (0, 0), lv),
                    (1, (1, 0), [1, 1, 1]),
                    (2, (0, -1), [1, 1, 1]),
                ],
            )
        };
        let model = Model::new("mv", transform_module(true), 8, layout([1, 0, 0])).unwrap();
        let succ = model.migration_successors(model.initial(), m(0));
        let targets: Vec<Location> = succ
            .iter()
            .map(|(e, _)| match e {
                Event::Migration { to, .. } => to.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(
            targets,
            vec![Location::Grid(GbfCoord::new(-1, 0)), Location::Grid(GbfCoord::new(0, 1))]
        );
        for (_, after) in &succ {
            assert_eq!(after.levels(), model.initial().levels());
        }
        let model = model.with_initial(layout([0, 0, 0])).unwrap();
        assert!(model.migration_successors(model.initial(), m(0)).is_empty());
    }

    #[test]
    fn migration_blocked_when_surrounded() {
        let cells = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1), (1, 2), (2, 2)];
        let cells: Vec<(u16, (i32, i32), [Level; 3])> = cells
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u16, c, [1, 1, 0]))
            .collect();
        let s = grid_state(GridKind::Square, None, &cells);
        let model = Model::new("spread", transform_module(true), 16, s).unwrap();
        assert!(model.migration_successors(model.initial(), m(3)).is_empty());
        assert!(model.division_successors(model.initial(), m(3)).is_empty());
    }

    #[test]
    fn division_copies_levels_and_uses_min_identifier() {
        // cell 1 has A=0, neighbour 0 has A=1: σ_A = 1 > x_A
        let s = grid_state(
            GridKind::Square,
            None,
            &[(0, (0, 0), [1, 0, 0]), (2, (1, 0), [0, 1, 1])],
        );
        let model = Model::new("div", transform_module(true), 4, s).unwrap();
        let succ = model.division_successors(model.initial(), m(2));
        assert_eq!(succ.len(), 3);
        for (e, after) in &succ {
            let Event::Division { parent, child, .. } = e else {
                panic!("{e:?}");
            };
            assert_eq!(*parent, m(2));
            assert_eq!(*child, m(1));
            assert_eq!(after.module(m(1)), after.module(m(2)));
            assert_eq!(after.module_count(), 3);
        }
        // σ_A = x_A: no division
        assert!(model.division_successors(model.initial(), m(0)).is_empty());
    }

    #[test]
    fn division_stops_when_identifiers_run_out() {
        let s = grid_state(
            GridKind::Square,
            None,
            &[(0, (0, 0), [1, 0, 0]), (1, (1, 0), [0, 1, 1])],
        );
        let model = Model::new("full", transform_module(true), 2, s).unwrap();
        assert_eq!(model.free_identifier(model.initial()), None);
        assert!(model.division_successors(model.initial(), m(1)).is_empty());
    }

    #[test]
    fn per_location_guard_is_evaluated_at_destination() {
        // divide only next to a cell expressing A
        let mut spec = transform_module(false);
        spec.transforms.division = Some(Guard::per_location(Expr::sigma(SA).gt(Expr::constant(0))));
        let s = grid_state(
            GridKind::Square,
            Some(1),
            &[(0, (0, 0), [0, 0, 0]), (1, (2, 0), [1, 0, 0])],
        );
        let model = Model::new("pl", spec, 4, s).unwrap();
        let succ = model.division_successors(model.initial(), m(0));
        let sites: Vec<Location> = succ
            .into_iter()
            .map(|(e, _)| match e {
                Event::Division { at, .. } => at,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(sites, vec![Location::Grid(GbfCoord::new(1, 0))]);
    }

    #[test]
    fn empty_bundle_has_no_successors() {
        let s = grid_state(GridKind::Square, None, &[]);
        let model = Model::new("empty", transform_module(true), 4, s).unwrap();
        assert!(model.successors(model.initial()).is_empty());
    }

    #[test]
    fn reduces_to_plain_network() {
        let net = crate::regnet::tests::feedback_loop();
        let spec = ModuleSpec::from_network(net.clone());
        for bits in 0..8u8 {
            let lv = [bits >> 2 & 1, bits >> 1 & 1, bits & 1];
            let s = grid_state(GridKind::Square, None, &[(0, (0, 0), lv)]);
            let model = Model::new("plain", spec.clone(), 1, s).unwrap();
            let lifted: Vec<(Event, Vec<Level>)> = net
                .successors(&NetState::new(lv.to_vec()))
                .into_iter()
                .map(|(g, t)| (Event::Update { module: m(0), component: g }, t.levels().to_vec()))
                .collect();
            let got: Vec<(Event, Vec<Level>)> = model
                .successors(model.initial())
                .into_iter()
                .map(|(e, t)| (e, t.module(m(0)).unwrap().levels().to_vec()))
                .collect();
            assert_eq!(got, lifted);
        }
    }

    #[test]
    fn construction_errors() {
        let r = ModuleSpec::new(
            vec![("A".into(), 1)],
            vec![("A".into(), Expr::level(0))],
            vec![IntegrationSpec {
                name: "s".into(),
                source: 3,
                kind: IntegrationKind::SumClamp,
            }],
            TransformSpec::default(),
        );
        assert!(matches!(r, Err(BundleError::UnknownSource { .. })));
        let r = ModuleSpec::new(
            vec![("A".into(), 1)],
            vec![("A".into(), Expr::level(0))],
            vec![],
            TransformSpec {
                apoptosis: Some(Expr::binary(BinOp::Eq, Expr::sigma(0), Expr::constant(0))),
                ..Default::default()
            },
        );
        assert_eq!(r, Err(BundleError::GuardReference("apoptosis")));
        let s = grid_state(GridKind::Square, None, &[(5, (0, 0), [0, 0, 0])]);
        assert!(matches!(
            Model::new("x", transform_module(false), 4, s),
            Err(BundleError::OutsideUniverse { .. })
        ));
        let s = grid_state(GridKind::Square, None, &[(0, (0, 0), [0, 2, 0])]);
        assert!(matches!(
            Model::new("x", transform_module(false), 4, s),
            Err(BundleError::Network(NetworkError::LevelOutOfRange { .. }))
        ));
    }
}
