//! Python bindings. Reports cross the boundary as JSON and arrive in Python
//! as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lattice_spectral::cli::{self, Command, RunConfig};
use lattice_spectral::connectivity::{
    hexagonal_connect, random_surface_points, square_connect, verify_path,
};
use lattice_spectral::momentum::{
    char_poly, exclusion_set_t1, fermi_slice, spectrum, thresholds, Symbol,
};
use lattice_spectral::pipeline::{rellich_demo, RellichConfig};
use lattice_spectral::ucp::{
    boundary_graph_from_box, check_a5, dirichlet_neumann_nullity, kagome_hexagon_rings,
    two_points_condition_with, SearchMode,
};
use lattice_spectral::{builtin_lattice, BuiltinLattice, Error, LatticeSpec};
use num_complex::Complex64;

fn to_py(e: Error) -> PyErr {
    if cli::exit_code(&e) == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

type Res<T> = Result<T, Error>;

fn spectrum_json(kind: BuiltinLattice, d: usize, grid: usize) -> Res<serde_json::Value> {
    let sym = Symbol::from_lattice(&builtin_lattice(kind, d)?);
    let iv = spectrum(&sym, grid)?;
    Ok(serde_json::to_value(iv)?)
}

fn ucp_json(
    kind: BuiltinLattice,
    d: usize,
    r: f64,
    mode: &SearchMode,
    lambda: f64,
) -> Res<serde_json::Value> {
    let spec = builtin_lattice(kind, d)?;
    let g = boundary_graph_from_box(&spec, r)?;
    let candidates = if kind == BuiltinLattice::Kagome {
        kagome_hexagon_rings(&spec, &g)?
    } else {
        Vec::new()
    };
    let tp = two_points_condition_with(&g, mode, &candidates)?;
    let a5 = check_a5(&g);
    let nullity = dirichlet_neumann_nullity(&g, &vec![0.0; g.interior_len()], lambda)?;
    Ok(serde_json::json!({
        "interior": g.interior_len(),
        "boundary": g.boundary_len(),
        "two_points": tp,
        "a5": a5,
        "a5_passed": a5.passed(),
        "nullity_zero_potential": nullity,
    }))
}

fn connect_json(
    kind: BuiltinLattice,
    d: usize,
    lambda: f64,
    a: f64,
    steps: usize,
    seed: u64,
) -> Res<serde_json::Value> {
    let sym = Symbol::from_lattice(&builtin_lattice(kind, d)?);
    if exclusion_set_t1(kind, d).contains(lambda, 1e-12) == Some(true) {
        return Err(Error::ExcludedEnergy(lambda));
    }
    let z0 = random_surface_points(&sym, lambda, a, 1, seed)?.remove(0);
    let path = match kind {
        BuiltinLattice::Square => square_connect(&z0, lambda, a, steps)?,
        BuiltinLattice::Hexagonal => hexagonal_connect(&z0, lambda, a, steps)?,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "explicit paths exist for the square and hexagonal lattices, not `{kind}`"
            )))
        }
    };
    let report = verify_path(&path, &sym, 1e-8);
    Ok(serde_json::json!({
        "header": path.csv_header(),
        "rows": path.csv_rows(),
        "notes": path.notes,
        "report": report,
        "passed": report.passed(),
    }))
}

/// A builtin periodic lattice.
#[pyclass(frozen, module = "lattice_spectral_py")]
struct Lattice {
    kind: BuiltinLattice,
    d: usize,
    spec: LatticeSpec,
}

#[pymethods]
impl Lattice {
    #[new]
    #[pyo3(signature = (name, d = 2))]
    fn new(name: &str, d: usize) -> PyResult<Self> {
        let kind: BuiltinLattice = name.parse().map_err(to_py)?;
        let spec = builtin_lattice(kind, d).map_err(to_py)?;
        Ok(Self { kind, d, spec })
    }

    #[getter]
    fn name(&self) -> &str {
        self.spec.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[getter]
    fn cells(&self) -> usize {
        self.spec.num_cells()
    }

    fn degrees(&self) -> Vec<usize> {
        (0..self.spec.num_cells())
            .map(|j| self.spec.degree(j))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.spec).map_err(|e| to_py(e.into()))
    }

    /// Band spectrum as `(lo, hi)` pairs.
    #[pyo3(signature = (grid = 201))]
    fn spectrum(&self, grid: usize) -> PyResult<Vec<(f64, f64)>> {
        let sym = Symbol::from_lattice(&self.spec);
        let iv = spectrum(&sym, grid).map_err(to_py)?;
        Ok(iv.iter().map(|i| (i.lo, i.hi)).collect())
    }

    #[pyo3(signature = (grid = 64, refine_tol = 1e-10))]
    fn thresholds(&self, grid: usize, refine_tol: f64) -> PyResult<Vec<f64>> {
        let sym = Symbol::from_lattice(&self.spec);
        Ok(thresholds(&sym, grid, refine_tol)
            .map_err(to_py)?
            .all_values())
    }

    /// Real Fermi-surface points at `lam`.
    #[pyo3(signature = (lam, grid = 64, tol = 1e-8))]
    fn fermi(&self, lam: f64, grid: usize, tol: f64) -> PyResult<Vec<Vec<f64>>> {
        let sym = Symbol::from_lattice(&self.spec);
        Ok(fermi_slice(&sym, lam, grid, tol).map_err(to_py)?.points)
    }

    /// `det(H0(z) - lam)` at a complex torus point.
    fn char_poly(&self, z: Vec<Complex64>, lam: Complex64) -> PyResult<Complex64> {
        if z.len() != self.spec.dim() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.spec.dim(),
                got: z.len(),
            }));
        }
        Ok(char_poly(&Symbol::from_lattice(&self.spec), &z, lam))
    }

    /// Whether `lam` lies in the exclusion set; `None` when none is known.
    #[pyo3(signature = (lam, tol = 1e-12))]
    fn excluded(&self, lam: f64, tol: f64) -> Option<bool> {
        exclusion_set_t1(self.kind, self.d).contains(lam, tol)
    }

    fn __repr__(&self) -> String {
        format!("Lattice('{}', d={})", self.spec.name(), self.spec.dim())
    }
}

#[pyfunction]
#[pyo3(signature = (lattice, d = 2, grid = 201))]
fn spectrum_intervals<'py>(
    py: Python<'py>,
    lattice: &str,
    d: usize,
    grid: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = lattice.parse().map_err(to_py)?;
    json_to_py(py, &spectrum_json(kind, d, grid).map_err(to_py)?)
}

/// Two-points, triangle-condition and nullity audit on the Euclidean box of radius `r`.
#[pyfunction]
#[pyo3(signature = (lattice, r, d = 2, mode = "exhaustive", samples = 10000, seed = 1, lam = 0.5))]
#[allow(clippy::too_many_arguments)]
fn ucp_audit<'py>(
    py: Python<'py>,
    lattice: &str,
    r: f64,
    d: usize,
    mode: &str,
    samples: usize,
    seed: u64,
    lam: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = lattice.parse().map_err(to_py)?;
    let mode = match mode {
        "exhaustive" => SearchMode::Exhaustive,
        "random" => SearchMode::Random { samples, seed },
        m => return Err(PyValueError::new_err(format!("unknown mode `{m}`"))),
    };
    json_to_py(py, &ucp_json(kind, d, r, &mode, lam).map_err(to_py)?)
}

/// Path from a seeded complex Fermi-surface point to the real torus.
#[pyfunction]
#[pyo3(signature = (lattice, lam, d = 2, a = 1.0, steps = 1000, seed = 1))]
fn connect<'py>(
    py: Python<'py>,
    lattice: &str,
    lam: f64,
    d: usize,
    a: f64,
    steps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = lattice.parse().map_err(to_py)?;
    json_to_py(
        py,
        &connect_json(kind, d, lam, a, steps, seed).map_err(to_py)?,
    )
}

#[pyfunction(name = "rellich_demo")]
#[pyo3(signature = (radii = vec![10.0, 20.0, 30.0], lam = 0.5, amplitude = 0.5, alpha = 1.0, seed = 1))]
fn rellich_demo_py<'py>(
    py: Python<'py>,
    radii: Vec<f64>,
    lam: f64,
    amplitude: f64,
    alpha: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RellichConfig {
        radii,
        lambda: lam,
        amplitude,
        alpha,
        seed,
        ..RellichConfig::default()
    };
    let report = py.detach(|| rellich_demo(&cfg)).map_err(to_py)?;
    json_to_py(
        py,
        &serde_json::to_value(report).map_err(|e| to_py(e.into()))?,
    )
}

/// Runs a CLI subcommand with a JSON configuration; returns the artifact paths.
#[pyfunction]
fn run<'py>(py: Python<'py>, command: &str, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let cmd = match command {
        "info" => Command::Info,
        "spectrum" => Command::Spectrum,
        "thresholds" => Command::Thresholds,
        "fermi" => Command::Fermi,
        "ucp" => Command::Ucp,
        "rellich-demo" => Command::RellichDemo,
        "connect" => Command::Connect,
        c => return Err(PyValueError::new_err(format!("unknown command `{c}`"))),
    };
    let cfg = RunConfig::from_json(config_json).map_err(to_py)?;
    let out = cli::run(cmd, &cfg).map_err(to_py)?;
    let v = serde_json::json!({
        "ok": out.ok,
        "summary": out.summary,
        "failures": out.failures,
        "artifacts": out.artifacts,
    });
    json_to_py(py, &v)
}

#[pymodule]
fn lattice_spectral_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_function(wrap_pyfunction!(spectrum_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(ucp_audit, m)?)?;
    m.add_function(wrap_pyfunction!(connect, m)?)?;
    m.add_function(wrap_pyfunction!(rellich_demo_py, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kagome_spectrum_json() {
        let v = spectrum_json(BuiltinLattice::Kagome, 2, 101).unwrap();
        assert!((v[0]["hi"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn ucp_json_square() {
        let v = ucp_json(
            BuiltinLattice::Square,
            2,
            2f64.sqrt(),
            &SearchMode::Exhaustive,
            0.5,
        )
        .unwrap();
        assert_eq!(v["two_points"]["verdict"], "holds");
        assert_eq!(v["a5_passed"], true);
        assert_eq!(v["nullity_zero_potential"], 0);
    }

    #[test]
    fn connect_json_rejects_excluded_energy() {
        let e = connect_json(BuiltinLattice::Hexagonal, 2, 0.0, 1.0, 100, 1).unwrap_err();
        assert_eq!(cli::exit_code(&e), 2);
        let ok = connect_json(BuiltinLattice::Square, 2, 0.2, 1.0, 200, 1).unwrap();
        assert_eq!(ok["passed"], true);
    }
}
