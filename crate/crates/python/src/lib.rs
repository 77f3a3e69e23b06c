//! Python module `regbundle`: load models, step and explore them, export graphs.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use regbundle::dsl;
use regbundle::explorer::{
    self, export_dot, export_json, query_reach, state_from_json, state_text, state_to_json,
    CanonicalKey, ExploreError, DEFAULT_MAX_STATES,
};
use regbundle::render::render_svg;
use regbundle::{BundleState, ExploreLimits};

create_exception!(regbundle, ModelError, PyValueError);
create_exception!(regbundle, LimitExceeded, PyRuntimeError);

fn diagnostics(source: &str, diags: &[dsl::Diagnostic]) -> PyErr {
    ModelError::new_err(dsl::render_diagnostics(source, diags).trim_end().to_string())
}

#[pyclass(name = "Model", module = "regbundle", frozen)]
struct Model {
    inner: Arc<regbundle::Model>,
}

#[pyclass(name = "State", module = "regbundle", frozen)]
struct State {
    model: Arc<regbundle::Model>,
    inner: BundleState,
}

#[pyclass(name = "StateGraph", module = "regbundle", frozen)]
struct StateGraph {
    model: Arc<regbundle::Model>,
    inner: regbundle::StateGraph,
}

impl Model {
    fn state(&self, inner: BundleState) -> State {
        State {
            model: self.inner.clone(),
            inner,
        }
    }

    fn resolve(&self, state: Option<&State>) -> PyResult<BundleState> {
        match state {
            None => Ok(self.inner.initial().clone()),
            Some(s) if Arc::ptr_eq(&s.model, &self.inner) => Ok(s.inner.clone()),
            Some(s) => {
                self.inner
                    .check_state(&s.inner)
                    .map_err(|e| ModelError::new_err(e.to_string()))?;
                Ok(s.inner.clone())
            }
        }
    }
}

#[pymethods]
impl Model {
    /// Parse and validate model text.
    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        let inner = dsl::load(text).map_err(|d| diagnostics("<text>", &d))?;
        Ok(Model {
            inner: Arc::new(inner),
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("cannot read {path}: {e}")))?;
        let inner = dsl::load(&text).map_err(|d| diagnostics(path, &d))?;
        Ok(Model {
            inner: Arc::new(inner),
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn universe(&self) -> u16 {
        self.inner.universe()
    }

    /// `(name, max_level)` for each component, in declaration order.
    #[getter]
    fn components(&self) -> Vec<(String, u8)> {
        self.inner
            .network()
            .components()
            .iter()
            .map(|c| (c.name.clone(), c.max))
            .collect()
    }

    fn initial_state(&self) -> State {
        self.state(self.inner.initial().clone())
    }

    fn state_from_json(&self, text: &str) -> PyResult<State> {
        let s = state_from_json(&self.inner, text).map_err(|e| ModelError::new_err(e.to_string()))?;
        self.inner
            .check_state(&s)
            .map_err(|e| ModelError::new_err(e.to_string()))?;
        Ok(self.state(s))
    }

    /// One-step successors as `(event, state)` pairs.
    #[pyo3(signature = (state=None))]
    fn successors(&self, state: Option<&State>) -> PyResult<Vec<(String, State)>> {
        let s = self.resolve(state)?;
        Ok(self
            .inner
            .successors(&s)
            .into_iter()
            .map(|(e, t)| (self.inner.display_event(&e).to_string(), self.state(t)))
            .collect())
    }

    /// Reachable state graph. Raises `LimitExceeded` past `max_states`
    /// unless `allow_partial` is set.
    #[pyo3(signature = (state=None, max_states=DEFAULT_MAX_STATES, jobs=1, allow_partial=false))]
    fn explore(
        &self,
        py: Python<'_>,
        state: Option<&State>,
        max_states: usize,
        jobs: usize,
        allow_partial: bool,
    ) -> PyResult<StateGraph> {
        let init = self.resolve(state)?;
        let limits = ExploreLimits { max_states, jobs };
        let model = &*self.inner;
        let result = py.detach(|| explorer::explore(model, &init, limits));
        let inner = match result {
            Ok(g) => g,
            Err(ExploreError::LimitExceeded { partial, .. }) if allow_partial => *partial,
            Err(e @ ExploreError::LimitExceeded { .. }) => {
                return Err(LimitExceeded::new_err(e.to_string()))
            }
            Err(e) => return Err(ModelError::new_err(e.to_string())),
        };
        Ok(StateGraph {
            model: self.inner.clone(),
            inner,
        })
    }

    /// Shortest event trace to a state satisfying `predicate`, or `None`.
    #[pyo3(signature = (predicate, max_states=DEFAULT_MAX_STATES, jobs=1))]
    fn query(
        &self,
        py: Python<'_>,
        predicate: &str,
        max_states: usize,
        jobs: usize,
    ) -> PyResult<Option<Vec<String>>> {
        let pred =
            dsl::parse_query(predicate, &self.inner).map_err(|d| diagnostics("query", &d))?;
        let graph = self.explore(py, None, max_states, jobs, true)?;
        let trace = query_reach(&graph.inner, &self.inner, &pred);
        if trace.is_none() && graph.inner.is_truncated() {
            return Err(LimitExceeded::new_err(format!(
                "state limit of {max_states} reached before completion"
            )));
        }
        Ok(trace.map(|t| {
            t.iter()
                .map(|e| self.inner.display_event(e).to_string())
                .collect()
        }))
    }

    #[pyo3(signature = (state=None))]
    fn render_svg(&self, state: Option<&State>) -> PyResult<String> {
        Ok(render_svg(&self.inner, &self.resolve(state)?))
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner.name())
    }
}

#[pymethods]
impl State {
    /// `{module_id: {component: level}}`.
    #[getter]
    fn levels(&self) -> BTreeMap<u16, BTreeMap<String, u8>> {
        let comps = self.model.network().components();
        self.inner
            .levels()
            .iter()
            .map(|(id, s)| {
                let named = comps
                    .iter()
                    .zip(s.levels())
                    .map(|(c, &l)| (c.name.clone(), l))
                    .collect();
                (id.0, named)
            })
            .collect()
    }

    #[getter]
    fn module_count(&self) -> usize {
        self.inner.module_count()
    }

    /// Canonical key as lowercase hex.
    #[getter]
    fn key(&self) -> String {
        CanonicalKey::encode(&self.inner).to_hex()
    }

    fn to_json(&self) -> String {
        state_to_json(&self.model, &self.inner)
    }

    fn __eq__(&self, other: &State) -> bool {
        self.inner == other.inner
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        CanonicalKey::encode(&self.inner).as_bytes().hash(&mut h);
        h.finish()
    }

    fn __str__(&self) -> String {
        state_text(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("State({})", state_text(&self.inner))
    }
}

#[pymethods]
impl StateGraph {
    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.inner.is_truncated()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn state(&self, node: usize) -> PyResult<State> {
        if node >= self.inner.node_count() {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "node {node} out of range"
            )));
        }
        Ok(State {
            model: self.model.clone(),
            inner: self.inner.state(node).clone(),
        })
    }

    /// `(src, event, dst)` triples in exploration order.
    fn edges(&self) -> Vec<(usize, String, usize)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.src, self.model.display_event(&e.label).to_string(), e.dst))
            .collect()
    }

    fn terminal_sccs(&self) -> PyResult<Vec<Vec<usize>>> {
        self.inner
            .terminal_sccs()
            .map_err(|e| LimitExceeded::new_err(e.to_string()))
    }

    fn deadlocks(&self) -> PyResult<Vec<usize>> {
        self.inner
            .deadlocks()
            .map_err(|e| LimitExceeded::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        export_json(&self.inner, &self.model)
    }

    fn to_dot(&self) -> String {
        export_dot(&self.inner, &self.model)
    }

    fn __repr__(&self) -> String {
        format!(
            "StateGraph(states={}, edges={}, truncated={})",
            self.inner.node_count(),
            self.inner.edge_count(),
            self.inner.is_truncated()
        )
    }
}

/// Diagnostics for model text as `(line, column, kind, message)`; empty when valid.
#[pyfunction]
fn check(text: &str) -> Vec<(u32, u32, String, String)> {
    match dsl::load(text) {
        Ok(_) => Vec::new(),
        Err(diags) => diags
            .into_iter()
            .map(|d| (d.pos.line, d.pos.col, d.kind.label().to_string(), d.message))
            .collect(),
    }
}

#[pymodule]
#[pyo3(name = "regbundle")]
fn regbundle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<State>()?;
    m.add_class::<StateGraph>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add("ModelError", m.py().get_type::<ModelError>())?;
    m.add("LimitExceeded", m.py().get_type::<LimitExceeded>())?;
    Ok(())
}
