//! Python bindings for `needle_core`.
//!
//! Configurations cross the boundary as plain lists of positions, ends
//! included. Invalid input raises `ValueError`; a solver or integrator that
//! gives up raises `RuntimeError`.

use needle_core::distribution::{self, DyadicTarget};
use needle_core::dynamics::{self, DynamicsSpec, System};
use needle_core::equilibrium::{self, default_tolerance, EquilibriumReport};
use needle_core::field::{self, SpacePoint};
use needle_core::{special, ChargeConfiguration, EmpiricalCdf, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged(_)
        | Error::StepUnderflow(_)
        | Error::DegenerateIterate { .. }
        | Error::OrderingBreached { .. }
        | Error::QuadratureFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn config(positions: Vec<f64>) -> PyResult<ChargeConfiguration> {
    ChargeConfiguration::new(positions).map_err(py_err)
}

fn report_dict<'py>(py: Python<'py>, r: EquilibriumReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("positions", r.configuration.into_positions())?;
    d.set_item("residual", r.residual)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("method", format!("{:?}", r.method))?;
    Ok(d)
}

fn system(name: &str) -> PyResult<System> {
    match name {
        "newton" => Ok(System::Newtonian),
        "flow" => Ok(System::GradientFlow),
        _ => Err(PyValueError::new_err(format!("system must be 'newton' or 'flow', got {name:?}"))),
    }
}

/// Equilibrium of `n` charges: a dict with positions, residual, iterations
/// and method.
#[pyfunction]
#[pyo3(signature = (n, tol=None))]
fn solve(py: Python<'_>, n: usize, tol: Option<f64>) -> PyResult<Bound<'_, PyDict>> {
    let tol = tol.unwrap_or_else(|| default_tolerance(n));
    let r = py.detach(|| equilibrium::solve(n, tol)).map_err(py_err)?;
    report_dict(py, r)
}

#[pyfunction]
fn equispaced(n: usize) -> PyResult<Vec<f64>> {
    Ok(ChargeConfiguration::equispaced(n).map_err(py_err)?.into_positions())
}

/// Net force on charge `i` (0-based, interior only).
#[pyfunction]
fn net_force(positions: Vec<f64>, i: usize) -> PyResult<f64> {
    equilibrium::net_force(&config(positions)?, i).map_err(py_err)
}

/// Net force on every charge, ends included.
#[pyfunction]
fn forces(positions: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(equilibrium::forces(config(positions)?.positions()))
}

#[pyfunction]
fn energy(positions: Vec<f64>) -> PyResult<f64> {
    Ok(equilibrium::energy(&config(positions)?.interior()))
}

/// Integrates `system` ('newton' or 'flow') and returns `(times, states)`.
#[pyfunction]
#[pyo3(signature = (system_name, positions, horizon, step=0.01))]
fn simulate(
    py: Python<'_>,
    system_name: &str,
    positions: Vec<f64>,
    horizon: f64,
    step: f64,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let spec = DynamicsSpec::new(system(system_name)?, config(positions)?, horizon, step).map_err(py_err)?;
    let traj = py.detach(|| dynamics::simulate(&spec)).map_err(py_err)?;
    Ok((traj.times, traj.states.into_iter().map(ChargeConfiguration::into_positions).collect()))
}

/// Newtonian run from `positions`, averaged over the samples with
/// `t >= start`.
#[pyfunction]
#[pyo3(signature = (positions, horizon, start, step=0.01))]
fn time_average(py: Python<'_>, positions: Vec<f64>, horizon: f64, start: f64, step: f64) -> PyResult<Vec<f64>> {
    let spec = DynamicsSpec::new(System::Newtonian, config(positions)?, horizon, step).map_err(py_err)?;
    let avg = py
        .detach(|| dynamics::simulate(&spec).and_then(|t| dynamics::time_average(&t, start)))
        .map_err(py_err)?;
    Ok(avg.into_positions())
}

#[pyfunction]
#[pyo3(signature = (positions, tol=None))]
fn flow_to_equilibrium(py: Python<'_>, positions: Vec<f64>, tol: Option<f64>) -> PyResult<Bound<'_, PyDict>> {
    let start = config(positions)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(start.n()));
    let r = py.detach(|| dynamics::flow_to_equilibrium(&start, tol)).map_err(py_err)?;
    report_dict(py, r)
}

/// Kolmogorov distance between the empirical law of `positions` and the
/// uniform law on `[0, 1]`.
#[pyfunction]
fn sup_distance(positions: Vec<f64>) -> PyResult<f64> {
    Ok(EmpiricalCdf::from_configuration(&config(positions)?).sup_distance_to_uniform())
}

/// Position of the charge at dyadic fraction `gamma`, given as a string
/// such as `"1/4"`.
#[pyfunction]
fn dyadic_position(positions: Vec<f64>, gamma: &str) -> PyResult<f64> {
    let target: DyadicTarget = gamma.parse().map_err(py_err)?;
    distribution::dyadic_position(&config(positions)?, target).map_err(py_err)
}

#[pyfunction]
fn predict_added_charge(positions: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(distribution::predict_added_charge(&config(positions)?).map_err(py_err)?.into_positions())
}

#[pyfunction]
fn second_charge_ratio(py: Python<'_>, n: usize) -> PyResult<f64> {
    py.detach(|| distribution::second_charge_ratio(n)).map_err(py_err)
}

/// Field of the charges at `positions`, each weighing `1/n`.
#[pyfunction]
fn discrete_field(positions: Vec<f64>, x: f64, y: f64, z: f64) -> PyResult<[f64; 3]> {
    Ok(field::discrete_field(&config(positions)?, SpacePoint::new(x, y, z)).map_err(py_err)?.vector)
}

/// Field of unit charge spread uniformly over the needle.
#[pyfunction]
fn uniform_field(x: f64, y: f64, z: f64) -> PyResult<[f64; 3]> {
    Ok(field::uniform_field_offneedle(SpacePoint::new(x, y, z)).map_err(py_err)?.vector)
}

/// Principal-value field along the needle at `0 < x < 1`.
#[pyfunction]
fn pv_field(x: f64) -> PyResult<f64> {
    field::pv_field_on_needle(x).map_err(py_err)
}

#[pyfunction]
fn trigamma(x: f64) -> PyResult<f64> {
    special::trigamma(x).map_err(py_err)
}

/// `{"q_minus": (sum, closed), "q_plus": (sum, closed)}` for the charge
/// at `q/2^s` among `2^n + 1` equispaced charges.
#[pyfunction]
fn nearest_charge_ratios(py: Python<'_>, q: u64, s: u32, n: u32) -> PyResult<Bound<'_, PyDict>> {
    let r = field::nearest_charge_ratios(q, s, n).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("q_minus", (r.q_minus.finite_sum, r.q_minus.closed_form))?;
    d.set_item("q_plus", (r.q_plus.finite_sum, r.q_plus.closed_form))?;
    Ok(d)
}

/// `(sum, closed)` for the one-sided force at `q/2^s`.
#[pyfunction]
fn partial_force_sum(q: u64, s: u32, n: u32) -> PyResult<(f64, f64)> {
    let e = field::partial_force_sum(q, s, n).map_err(py_err)?;
    Ok((e.finite_sum, e.closed_form))
}

/// `(sum, closed)` for the net force at `q/2^s`.
#[pyfunction]
fn net_force_sum(q: u64, s: u32, n: u32) -> PyResult<(f64, f64)> {
    let e = field::net_force_sum(q, s, n).map_err(py_err)?;
    Ok((e.finite_sum, e.closed_form))
}

#[pymodule]
fn needle(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(equispaced, m)?)?;
    m.add_function(wrap_pyfunction!(net_force, m)?)?;
    m.add_function(wrap_pyfunction!(forces, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(time_average, m)?)?;
    m.add_function(wrap_pyfunction!(flow_to_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(sup_distance, m)?)?;
    m.add_function(wrap_pyfunction!(dyadic_position, m)?)?;
    m.add_function(wrap_pyfunction!(predict_added_charge, m)?)?;
    m.add_function(wrap_pyfunction!(second_charge_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_field, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_field, m)?)?;
    m.add_function(wrap_pyfunction!(pv_field, m)?)?;
    m.add_function(wrap_pyfunction!(trigamma, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_charge_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(partial_force_sum, m)?)?;
    m.add_function(wrap_pyfunction!(net_force_sum, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_module(check: impl FnOnce(Python<'_>, &Bound<'_, PyModule>)) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "needle").unwrap();
            needle(&m).unwrap();
            check(py, &m);
        });
    }

    #[test]
    fn solve_returns_a_symmetric_report() {
        with_module(|_, m| {
            let r = m.getattr("solve").unwrap().call1((5,)).unwrap();
            let x: Vec<f64> = r.get_item("positions").unwrap().extract().unwrap();
            assert_eq!(x.len(), 5);
            assert!((x[1] + x[3] - 1.0).abs() < 1e-12);
            let method: String = r.get_item("method").unwrap().extract().unwrap();
            assert_eq!(method, "Hybrid");
        });
    }

    #[test]
    fn bad_input_is_a_value_error() {
        with_module(|py, m| {
            let e = m.getattr("solve").unwrap().call1((2,)).unwrap_err();
            assert!(e.is_instance_of::<PyValueError>(py));
            let e = m.getattr("simulate").unwrap().call1(("orbit", vec![0.0, 0.5, 1.0], 1.0)).unwrap_err();
            assert!(e.is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn giving_up_is_a_runtime_error() {
        with_module(|py, m| {
            let e = m.getattr("solve").unwrap().call1((9, 1e-30)).unwrap_err();
            assert!(e.is_instance_of::<PyRuntimeError>(py), "{e}");
        });
    }
}
