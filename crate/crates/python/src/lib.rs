//! Python bindings. States and matrices cross the boundary as plain lists.

use hypernet::bifurcation::{pi_grid, Attractor, BranchEnd};
use hypernet::dynamics::jacobian as jacobian_of;
use hypernet::hypergraph::{from_text, random_instance, to_text, GenerationConfig};
use hypernet::{
    basin_probe, bistability_interval, consensus_roots, find_all, integrate, newton_find,
    normal_form_coeffs, pi1_star, sweep, thresholds, vector_field, Hypergraph2, IntegrateOptions,
    PairwiseMatrix, ScalarReduced, SeedSpec, SigmoidFamily, SweepOptions, SystemInstance,
    TwoInteractionTensor,
};
use nalgebra::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyhypernet, HypernetError, PyValueError);

fn err(e: hypernet::Error) -> PyErr {
    HypernetError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(HypernetError::new_err("matrix rows must all have length n"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// An order-2 hypernetwork: pairwise weights `a2` and one slice `B_i` per node.
#[pyclass(name = "Hypergraph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHypergraph {
    inner: Hypergraph2,
}

#[pymethods]
impl PyHypergraph {
    #[new]
    fn new(a2: Vec<Vec<f64>>, slices: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        let a2 = PairwiseMatrix::new(matrix(&a2)?).map_err(err)?;
        let slices = slices
            .iter()
            .map(|s| matrix(s))
            .collect::<PyResult<Vec<_>>>()?;
        let a3 = TwoInteractionTensor::new(slices).map_err(err)?;
        Ok(Self {
            inner: Hypergraph2::build(a2, a3).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n=5, p2=0.8, p3=0.2, alpha=1.0, seed=1))]
    fn random(n: usize, p2: f64, p3: f64, alpha: f64, seed: u64) -> PyResult<Self> {
        let cfg = GenerationConfig {
            n,
            p2,
            p3,
            alpha,
            seed,
        };
        Ok(Self {
            inner: random_instance(&cfg).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: from_text(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        to_text(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Proportional-influence ratio, or None when the slices are not proportional.
    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.alpha()
    }

    #[getter]
    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees().iter().copied().collect()
    }

    #[getter]
    fn a2(&self) -> Vec<Vec<f64>> {
        rows(self.inner.a2().matrix())
    }

    #[getter]
    fn slices(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.a3().slices().iter().map(rows).collect()
    }

    fn with_scaled_interactions(&self, factor: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_scaled_interactions(factor).map_err(err)?,
        })
    }

    /// `pi1`, `pi2`, `pi_tilde1` and, when alpha is known, `pi1_star`.
    fn thresholds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = thresholds(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("pi1", t.pi1)?;
        d.set_item("pi2", t.pi2)?;
        d.set_item("pi_tilde1", t.pi_tilde1)?;
        if let Some(alpha) = self.inner.alpha() {
            d.set_item(
                "pi1_star",
                pi1_star(&SigmoidFamily::tanh(), alpha).map_err(err)?.pi,
            )?;
        }
        Ok(d)
    }

    fn normal_form<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let nf = normal_form_coeffs(&self.inner, &SigmoidFamily::tanh()).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("pi1", nf.pi1)?;
        d.set_item("kappa1", nf.kappa1)?;
        d.set_item("kappa2", nf.kappa2)?;
        d.set_item("v", nf.v.iter().copied().collect::<Vec<_>>())?;
        d.set_item("w", nf.w.iter().copied().collect::<Vec<_>>())?;
        Ok(d)
    }

    /// `(pi1_star, pi1)`, checked at interior points.
    fn bistability_interval(&self) -> PyResult<(f64, f64)> {
        let b = bistability_interval(&self.inner, &SigmoidFamily::tanh()).map_err(err)?;
        Ok((b.lo, b.hi))
    }

    fn __repr__(&self) -> String {
        match self.inner.alpha() {
            Some(a) => format!("Hypergraph(n={}, alpha={a})", self.inner.n()),
            None => format!("Hypergraph(n={}, alpha=None)", self.inner.n()),
        }
    }
}

#[pyclass(name = "Equilibrium", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEquilibrium {
    state: Vec<f64>,
    pi: f64,
    classification: String,
    max_real_eig: f64,
    is_consensus: bool,
    residual: f64,
}

#[pymethods]
impl PyEquilibrium {
    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(pi={}, {}, state={:?})",
            self.pi, self.classification, self.state
        )
    }
}

impl From<&hypernet::Equilibrium> for PyEquilibrium {
    fn from(e: &hypernet::Equilibrium) -> Self {
        Self {
            state: e.state.iter().copied().collect(),
            pi: e.pi,
            classification: e.classification.to_string(),
            max_real_eig: e.max_real_eig,
            is_consensus: e.is_consensus,
            residual: e.residual,
        }
    }
}

/// The dynamics on a hypernetwork at a fixed social effort `pi`, with tanh.
#[pyclass(name = "System", frozen)]
struct PySystem {
    inner: SystemInstance,
}

impl PySystem {
    fn state(&self, x: Vec<f64>) -> PyResult<DVector<f64>> {
        if x.len() != self.inner.n() {
            return Err(HypernetError::new_err(format!(
                "state has {} entries, expected {}",
                x.len(),
                self.inner.n()
            )));
        }
        Ok(DVector::from_vec(x))
    }
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(graph: &PyHypergraph, pi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SystemInstance::tanh(graph.inner.clone(), pi).map_err(err)?,
        })
    }

    #[getter]
    fn pi(&self) -> f64 {
        self.inner.pi()
    }

    fn vector_field(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let f = vector_field(&self.inner, &self.state(x)?).map_err(err)?;
        Ok(f.iter().copied().collect())
    }

    fn jacobian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(
            &jacobian_of(&self.inner, &self.state(x)?).map_err(err)?,
        ))
    }

    /// RK4 trajectory as a dict with `times`, `states`, `converged`.
    #[pyo3(signature = (x0, dt=0.01, t_max=200.0, residual_tol=1e-10))]
    fn integrate<'py>(
        &self,
        py: Python<'py>,
        x0: Vec<f64>,
        dt: f64,
        t_max: f64,
        residual_tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = IntegrateOptions {
            dt,
            t_max,
            residual_tol,
        };
        let traj = integrate(&self.inner, &self.state(x0)?, &opts).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("times", traj.times.clone())?;
        let states: Vec<Vec<f64>> = traj
            .states
            .iter()
            .map(|x| x.iter().copied().collect())
            .collect();
        d.set_item("states", states)?;
        d.set_item("converged", traj.converged)?;
        d.set_item("final_residual", traj.final_residual)?;
        Ok(d)
    }

    fn newton(&self, x0: Vec<f64>) -> PyResult<PyEquilibrium> {
        let e = newton_find(&self.inner, &self.state(x0)?).map_err(err)?;
        Ok(PyEquilibrium::from(&e))
    }

    #[pyo3(signature = (grid_points=21, random=20, seed=0))]
    fn equilibria(
        &self,
        grid_points: usize,
        random: usize,
        seed: u64,
    ) -> PyResult<Vec<PyEquilibrium>> {
        let spec = SeedSpec {
            grid_points,
            random,
            seed,
            radius: None,
        };
        let eqs = find_all(&self.inner, &spec).map_err(err)?;
        Ok(eqs.iter().map(PyEquilibrium::from).collect())
    }

    /// Attractor reached from `c * 1` for each radius: "origin", "upper",
    /// "other" or "unconverged".
    fn basin_probe(&self, radii: Vec<f64>) -> PyResult<Vec<(f64, String)>> {
        let report = basin_probe(&self.inner, &radii).map_err(err)?;
        Ok(report
            .entries
            .into_iter()
            .map(|(c, a)| {
                let name = match a {
                    Attractor::Origin => "origin",
                    Attractor::Upper => "upper",
                    Attractor::Other(_) => "other",
                    Attractor::Unconverged => "unconverged",
                };
                (c, name.to_string())
            })
            .collect())
    }
}

/// Fold of the consensus branch for tanh: `(pi1_star, eps_star)`.
#[pyfunction(name = "pi1_star")]
fn py_pi1_star(alpha: f64) -> PyResult<(f64, f64)> {
    let f = pi1_star(&SigmoidFamily::tanh(), alpha).map_err(err)?;
    Ok((f.pi, f.eps))
}

/// Positive roots of the scalar consensus equation.
#[pyfunction(name = "consensus_roots")]
fn py_consensus_roots(alpha: f64, pi: f64) -> PyResult<Vec<f64>> {
    Ok(consensus_roots(
        &ScalarReduced::tanh(alpha, pi).map_err(err)?,
    ))
}

/// Sweeps `pi` over `pi_min:pi_step:pi_max`. Returns a dict with the grid,
/// the branches and the bistable run, plus the diagram CSV.
#[pyfunction(name = "sweep")]
#[pyo3(signature = (graph, pi_min=0.005, pi_max=5.0, pi_step=0.005))]
fn py_sweep<'py>(
    py: Python<'py>,
    graph: &PyHypergraph,
    pi_min: f64,
    pi_max: f64,
    pi_step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = pi_grid(pi_min, pi_max, pi_step).map_err(err)?;
    let g = graph.inner.clone();
    let res = py
        .detach(|| sweep(&g, &SigmoidFamily::tanh(), &grid, &SweepOptions::default()))
        .map_err(err)?;
    let branches = res
        .branches
        .iter()
        .map(|b| -> PyResult<Bound<'py, PyDict>> {
            let d = PyDict::new(py);
            d.set_item("id", b.id)?;
            d.set_item(
                "points",
                b.points.iter().map(PyEquilibrium::from).collect::<Vec<_>>(),
            )?;
            d.set_item("fold_at", b.fold_at)?;
            d.set_item("stability_change_at", b.stability_change_at)?;
            let end = match b.end {
                BranchEnd::Open => "open".to_string(),
                BranchEnd::Merged { pi, into } => format!("merged into {into} at {pi}"),
                BranchEnd::Lost { pi } => format!("lost after {pi}"),
            };
            d.set_item("end", end)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("grid", res.grid.clone())?;
    d.set_item("branches", branches)?;
    d.set_item("bistability", res.bistability)?;
    d.set_item("csv", res.to_csv())?;
    Ok(d)
}

#[pymodule]
fn pyhypernet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HypernetError", m.py().get_type::<HypernetError>())?;
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_function(wrap_pyfunction!(py_pi1_star, m)?)?;
    m.add_function(wrap_pyfunction!(py_consensus_roots, m)?)?;
    m.add_function(wrap_pyfunction!(py_sweep, m)?)?;
    Ok(())
}
