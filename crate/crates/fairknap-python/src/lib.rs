//! Python bindings over the core library: instance I/O and generation,
//! exact and sampled evaluators, continuous greedy, both rounding schemes,
//! the three complete solvers, and the brute-force oracle.
//!
//! Reports come back as plain dicts so Python callers can poke at them
//! without a type stub; errors surface as `ValueError` (or `OSError` for
//! file-system failures) carrying the library's message.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fairknap::fractional::{continuous_greedy, GreedyConfig};
use fairknap::model::{self, generate_random, GeneratorParams, ObjectiveKind};
use fairknap::relaxed::{solve_relaxed_fairness, solve_relaxed_knapsack, RelaxedConfig};
use fairknap::rounding::{group_pipage_round, monte_carlo_stats, weighted_pipage_round, Rounder};
use fairknap::submodular::{self, multilinear_exact, multilinear_sample};
use fairknap::truncation::solve_fksm_truncating;
use fairknap::{ElementSet, Error, FractionalVector};

fn py_err(err: Error) -> PyErr {
    match err {
        Error::Io(_) => PyOSError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn objective_kind(name: &str) -> PyResult<ObjectiveKind> {
    match name {
        "coverage" => Ok(ObjectiveKind::Coverage),
        "modular" => Ok(ObjectiveKind::Modular),
        "saturating" => Ok(ObjectiveKind::Saturating),
        other => Err(PyValueError::new_err(format!(
            "unknown objective '{other}' (expected coverage, modular, or saturating)"
        ))),
    }
}

/// A fair knapsack instance: weighted, colored elements, one budget, and a
/// count interval per color group.
#[pyclass(name = "Instance", module = "fairknap_py", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: model::Instance,
}

impl PyInstance {
    fn set(&self, ids: &[usize]) -> PyResult<ElementSet> {
        ElementSet::from_ids(self.inner.n(), ids).map_err(py_err)
    }
}

#[pymethods]
impl PyInstance {
    /// Reads an instance from a JSON file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        model::Instance::load(path)
            .map(|inner| PyInstance { inner })
            .map_err(py_err)
    }

    /// Parses an instance from JSON text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        model::Instance::from_json(text)
            .map(|inner| PyInstance { inner })
            .map_err(py_err)
    }

    /// Draws a random valid, feasible instance; deterministic per seed.
    #[staticmethod]
    #[pyo3(signature = (n, k, seed, tightness=0.3, slack=1.6, objective="coverage"))]
    fn generate(
        n: usize,
        k: usize,
        seed: u64,
        tightness: f64,
        slack: f64,
        objective: &str,
    ) -> PyResult<Self> {
        let params = GeneratorParams {
            n,
            k,
            bound_tightness: tightness,
            budget_slack: slack,
            objective: objective_kind(objective)?,
            ..GeneratorParams::default()
        };
        generate_random(&params, seed)
            .map(|inner| PyInstance { inner })
            .map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights()
    }

    /// Group index of each element, in `1..=k`.
    #[getter]
    fn colors(&self) -> Vec<usize> {
        (0..self.inner.n())
            .map(|e| self.inner.color_of(e))
            .collect()
    }

    /// `(color, lower, upper)` per group; `lower` is `None` when the group
    /// has no lower bound, and the admitted counts are `lower < c <= upper`.
    fn group_bounds(&self) -> Vec<(usize, Option<usize>, usize)> {
        self.inner
            .bounds
            .iter()
            .map(|b| (b.color, b.lower, b.upper))
            .collect()
    }

    /// Human-readable findings; an empty list means the instance is
    /// structurally sound and admits a feasible set.
    fn validate(&self) -> Vec<String> {
        model::validate(&self.inner)
            .findings
            .iter()
            .map(|f| f.message.clone())
            .collect()
    }

    fn is_feasible(&self, ids: Vec<usize>) -> PyResult<bool> {
        Ok(model::is_feasible(&self.inner, &self.set(&ids)?))
    }

    #[pyo3(signature = (x, tol=model::FEASIBILITY_TOL))]
    fn in_polytope(&self, x: Vec<f64>, tol: f64) -> bool {
        model::in_polytope(&self.inner, &FractionalVector(x), tol)
    }

    /// `f(S)` under the instance objective.
    fn value(&self, ids: Vec<usize>) -> PyResult<f64> {
        submodular::eval(&self.inner.objective, &ids).map_err(py_err)
    }

    /// `f(S + e) - f(S)`.
    fn marginal(&self, ids: Vec<usize>, e: usize) -> PyResult<f64> {
        submodular::marginal(&self.inner.objective, &ids, e).map_err(py_err)
    }

    fn weight(&self, ids: Vec<usize>) -> PyResult<f64> {
        Ok(self.inner.weight_of(&self.set(&ids)?))
    }

    fn group_counts(&self, ids: Vec<usize>) -> PyResult<Vec<usize>> {
        Ok(self.inner.group_counts(&self.set(&ids)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, k={}, budget={})",
            self.inner.n(),
            self.inner.k(),
            self.inner.budget
        )
    }
}

fn greedy_config(seed: u64, steps: usize, samples: usize, epsilon: f64) -> GreedyConfig {
    GreedyConfig {
        steps,
        samples_per_gradient: samples,
        seed,
        epsilon,
    }
}

/// Runs continuous greedy over the fair knapsack polytope and returns the
/// fractional point `x`.
#[pyfunction]
#[pyo3(signature = (instance, seed=0, steps=50, samples=10_000, epsilon=0.1))]
fn greedy_point(
    instance: &PyInstance,
    seed: u64,
    steps: usize,
    samples: usize,
    epsilon: f64,
) -> PyResult<Vec<f64>> {
    continuous_greedy(
        &instance.inner,
        &greedy_config(seed, steps, samples, epsilon),
    )
    .map(|x| x.0)
    .map_err(py_err)
}

/// Exact multilinear extension `F(x)` (enumerates the fractional support,
/// so at most 22 coordinates may be strictly between 0 and 1).
#[pyfunction]
fn multilinear(instance: &PyInstance, x: Vec<f64>) -> PyResult<f64> {
    multilinear_exact(&instance.inner.objective, &x).map_err(py_err)
}

/// Monte-Carlo estimate of `F(x)`; returns `(value, stderr)`.
#[pyfunction]
#[pyo3(signature = (instance, x, samples=10_000, seed=0))]
fn multilinear_estimate(
    instance: &PyInstance,
    x: Vec<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    multilinear_sample(&instance.inner.objective, &x, samples, seed)
        .map(|est| (est.value, est.stderr))
        .map_err(py_err)
}

/// Weight-conserving pipage rounding: returns a vector with at most one
/// fractional coordinate and the same `w . x` as the input.
#[pyfunction]
fn weighted_round(instance: &PyInstance, x: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
    weighted_pipage_round(&instance.inner, &FractionalVector(x), seed)
        .map(|(y, _trace)| y.0)
        .map_err(py_err)
}

/// Fairness-preserving group rounding: returns the selected ids of an
/// integral set whose group counts satisfy every bound.
#[pyfunction]
fn group_round(instance: &PyInstance, x: Vec<f64>, seed: u64) -> PyResult<Vec<usize>> {
    group_pipage_round(&instance.inner, &FractionalVector(x), seed)
        .map(|sol| sol.selected)
        .map_err(py_err)
}

/// Repeated-rounding statistics at a fixed fractional point.
#[pyfunction]
#[pyo3(signature = (instance, x, rounder="weighted", trials=1_000, seed=0))]
fn rounding_stats<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    x: Vec<f64>,
    rounder: &str,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let scheme = match rounder {
        "weighted" => Rounder::Weighted,
        "group" => Rounder::Group,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown rounder '{other}' (expected weighted or group)"
            )))
        }
    };
    let stats = monte_carlo_stats(
        &instance.inner,
        &instance.inner.objective,
        &FractionalVector(x),
        scheme,
        trials,
        seed,
    )
    .map_err(py_err)?;

    let d = PyDict::new(py);
    d.set_item("rounder", rounder)?;
    d.set_item("trials", stats.trials)?;
    d.set_item("seed", stats.seed)?;
    d.set_item("x", stats.x.0.clone())?;
    d.set_item(
        "marginal_means",
        stats
            .empirical_marginals
            .iter()
            .map(|m| m.mean())
            .collect::<Vec<f64>>(),
    )?;
    d.set_item(
        "marginal_stderrs",
        stats
            .empirical_marginals
            .iter()
            .map(|m| m.stderr())
            .collect::<Vec<f64>>(),
    )?;
    d.set_item("objective_mean", stats.objective_mean.mean())?;
    d.set_item("objective_stderr", stats.objective_mean.stderr())?;
    d.set_item("weight_mean", stats.weight_mean.mean())?;
    d.set_item("weight_stderr", stats.weight_mean.stderr())?;
    d.set_item("knapsack_violations", stats.knapsack_violations)?;
    d.set_item(
        "fairness_violations",
        stats
            .fairness_counts
            .iter()
            .map(|g| g.violations)
            .collect::<Vec<usize>>(),
    )?;
    Ok(d)
}

/// Knapsack-truncating pipeline: both constraints hold on every run.
#[pyfunction]
#[pyo3(signature = (instance, seed=0, steps=50, samples=10_000, epsilon=0.1, allow_large_k=false))]
fn solve_truncating<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    seed: u64,
    steps: usize,
    samples: usize,
    epsilon: f64,
    allow_large_k: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let report = solve_fksm_truncating(
        &instance.inner,
        &greedy_config(seed, steps, samples, epsilon),
        allow_large_k,
    )
    .map_err(py_err)?;

    let d = PyDict::new(py);
    d.set_item("method", report.method)?;
    d.set_item("objective", report.objective)?;
    d.set_item("selected", report.solution.selected)?;
    d.set_item("gamma", report.params.gamma)?;
    d.set_item("beta", report.params.beta)?;
    d.set_item("seed", report.seed)?;
    d.set_item("epsilon", report.epsilon)?;
    d.set_item("wall_time_ms", report.wall_time_ms)?;
    Ok(d)
}

fn relaxed_dict<'py>(
    py: Python<'py>,
    report: fairknap::relaxed::RelaxedReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", report.method)?;
    d.set_item("constraint_mode", report.constraint_mode.to_string())?;
    d.set_item("objective", report.objective)?;
    d.set_item("selected", report.solution.selected)?;
    d.set_item("group_counts", report.group_counts)?;
    d.set_item("total_weight", report.total_weight)?;
    d.set_item("fractional_group_sums", report.fractional_group_sums)?;
    d.set_item("rounded_group_sums", report.rounded_group_sums)?;
    d.set_item("violated_groups", report.violated_groups)?;
    d.set_item("seed", report.seed)?;
    d.set_item("candidate_index", report.candidate_index)?;
    d.set_item("wall_time_ms", report.wall_time_ms)?;
    Ok(d)
}

/// Budget-exact pipeline: weight holds on every run, fairness in
/// expectation (`violated_groups` lists any groups this run missed).
#[pyfunction]
#[pyo3(signature = (instance, seed=0, steps=50, samples=10_000, epsilon=0.1, eta=0.25, t_max=2))]
#[allow(clippy::too_many_arguments)]
fn solve_expected_fairness<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    seed: u64,
    steps: usize,
    samples: usize,
    epsilon: f64,
    eta: f64,
    t_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = RelaxedConfig {
        greedy: greedy_config(seed, steps, samples, epsilon),
        eta,
        t_max,
    };
    relaxed_dict(
        py,
        solve_relaxed_fairness(&instance.inner, &config).map_err(py_err)?,
    )
}

/// Fairness-exact pipeline: group counts hold on every run, weight in
/// expectation.
#[pyfunction]
#[pyo3(signature = (instance, seed=0, steps=50, samples=10_000, epsilon=0.1))]
fn solve_expected_knapsack<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    seed: u64,
    steps: usize,
    samples: usize,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    relaxed_dict(
        py,
        solve_relaxed_knapsack(
            &instance.inner,
            &greedy_config(seed, steps, samples, epsilon),
        )
        .map_err(py_err)?,
    )
}

/// Exhaustive optimum for small instances (`n <= 22`).
#[pyfunction]
fn brute_force<'py>(py: Python<'py>, instance: &PyInstance) -> PyResult<Bound<'py, PyDict>> {
    let result = fairknap::oracle::brute_force_opt(&instance.inner).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("value", result.best_value)?;
    d.set_item("selected", result.best_set.selected)?;
    d.set_item("gamma", result.params.gamma)?;
    d.set_item("beta", result.params.beta)?;
    d.set_item("enumerated", result.enumerated)?;
    Ok(d)
}

#[pymodule]
fn fairknap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(greedy_point, m)?)?;
    m.add_function(wrap_pyfunction!(multilinear, m)?)?;
    m.add_function(wrap_pyfunction!(multilinear_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_round, m)?)?;
    m.add_function(wrap_pyfunction!(group_round, m)?)?;
    m.add_function(wrap_pyfunction!(rounding_stats, m)?)?;
    m.add_function(wrap_pyfunction!(solve_truncating, m)?)?;
    m.add_function(wrap_pyfunction!(solve_expected_fairness, m)?)?;
    m.add_function(wrap_pyfunction!(solve_expected_knapsack, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add("FEASIBILITY_TOL", model::FEASIBILITY_TOL)?;
    Ok(())
}
