//! Forces, the pairwise energy and the equilibrium solvers.
//!
//! The net force on an interior charge `i` (0-based) is
//!
//! ```text
//! f_i = sum_{j < i} 1 / (x_i - x_j)^2  -  sum_{j > i} 1 / (x_i - x_j)^2
//! ```
//!
//! and the equilibrium is the configuration where every interior force
//! vanishes. It is also the unique minimizer of the strictly convex energy
//! `sum_{j < k} 1 / (x_k - x_j)`, whose gradient is the negated force.
//!
//! Two independent solvers are provided: iteration of a continuous self-map
//! of the closed simplex whose fixed points are the equilibria
//! ([`solve_fixed_point`]), and descent on the energy
//! ([`solve_gradient_descent`]). [`solve`] chains them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{ChargeConfiguration, ClosedSimplexPoint, OpenSimplexPoint};
use crate::error::{Error, Result};

/// Which algorithm produced an [`EquilibriumReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FixedPoint,
    GradientDescent,
    GradientFlow,
    Hybrid,
}

/// A solved configuration with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub configuration: ChargeConfiguration,
    /// Max over interior charges of `|net force|`.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    n: usize,
    method: Method,
    iterations: usize,
    residual: f64,
    positions: Vec<f64>,
}

impl EquilibriumReport {
    pub(crate) fn new(configuration: ChargeConfiguration, iterations: usize, method: Method) -> Self {
        let residual = max_abs_force(configuration.positions());
        Self { configuration, residual, iterations, method }
    }

    /// `{n, method, iterations, residual, positions[]}`.
    pub fn to_json(&self) -> String {
        let out = ReportJson {
            n: self.configuration.n(),
            method: self.method,
            iterations: self.iterations,
            residual: self.residual,
            positions: self.configuration.positions().to_vec(),
        };
        serde_json::to_string_pretty(&out).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ReportJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let configuration = ChargeConfiguration::new(raw.positions)?;
        if configuration.n() != raw.n {
            return Err(Error::Parse(format!("n = {} but {} positions", raw.n, configuration.n())));
        }
        Ok(Self { configuration, residual: raw.residual, iterations: raw.iterations, method: raw.method })
    }
}

/// Net force on charge `i` of a strictly ordered position vector.
///
/// Terms are accumulated from the farthest charge inwards on each side so
/// that small contributions are not swamped by the nearest neighbour.
pub(crate) fn force_at(x: &[f64], i: usize) -> f64 {
    let xi = x[i];
    let left: f64 = x[..i].iter().map(|&xj| (xi - xj).powi(-2)).sum();
    let right: f64 = x[i + 1..].iter().rev().map(|&xj| (xi - xj).powi(-2)).sum();
    left - right
}

/// Net forces on all charges; the pinned ends get `0`.
pub fn forces(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut f = vec![0.0; n];
    for (i, fi) in f.iter_mut().enumerate().take(n.saturating_sub(1)).skip(1) {
        *fi = force_at(x, i);
    }
    f
}

pub(crate) fn max_abs_force(x: &[f64]) -> f64 {
    (1..x.len().saturating_sub(1)).map(|i| force_at(x, i).abs()).fold(0.0, f64::max)
}

/// Net force on the interior charge `i` (0-based, `1 <= i <= n - 2`).
pub fn net_force(config: &ChargeConfiguration, i: usize) -> Result<f64> {
    let n = config.n();
    if i == 0 || i + 1 >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(force_at(config.positions(), i))
}

fn energy_of(x: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 1..x.len() {
        for j in 0..k {
            total += 1.0 / (x[k] - x[j]);
        }
    }
    total
}

/// Pairwise energy `sum_{j<k} 1/(a_k - a_j)` over all charges, the pinned
/// ends included.
pub fn energy(point: &OpenSimplexPoint) -> f64 {
    energy_of(&point.with_endpoints())
}

/// Gradient of [`energy`] with respect to the free coordinates. Component
/// `k` is minus the net force on free charge `k`.
pub fn energy_gradient(point: &OpenSimplexPoint) -> Vec<f64> {
    let x = point.with_endpoints();
    (1..x.len() - 1).map(|i| -force_at(&x, i)).collect()
}

/// Hessian of the energy with respect to the free coordinates.
///
/// `H_kk = sum_{j != k} 2/|a_k - a_j|^3` and `H_kj = -2/|a_k - a_j|^3`.
fn energy_hessian(x: &[f64]) -> DMatrix<f64> {
    let m = x.len() - 2;
    let mut h = DMatrix::zeros(m, m);
    for k in 0..m {
        let xk = x[k + 1];
        let mut diag = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            if j == k + 1 {
                continue;
            }
            let c = 2.0 / (xk - xj).abs().powi(3);
            diag += c;
            if j >= 1 && j <= m {
                h[(k, j - 1)] = -c;
            }
        }
        h[(k, k)] = diag;
    }
    h
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The continuous self-map of the closed simplex whose fixed points are
/// exactly the equilibria.
///
/// Ends go to `0` and `1`. An interior coordinate stays put inside a triple
/// coincidence, moves a third of the way to the distinct neighbour when it
/// coincides with one side, and otherwise moves by
/// `min(gap_left, gap_right)/3 * sgn(F) * exp(-1/F^2)` with `F` the net force.
/// `sgn(0) = 0`, so a charge feeling no force does not move; a force that
/// evaluates to NaN (both neighbours closer than the square root of the
/// smallest double) is treated the same way.
pub fn phi_map(point: &ClosedSimplexPoint) -> ClosedSimplexPoint {
    ClosedSimplexPoint::from_valid(phi_step(point.coords()))
}

fn phi_step(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = x.to_vec();
    y[0] = 0.0;
    y[n - 1] = 1.0;
    for i in 1..n - 1 {
        let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
        y[i] = if a == b && b == c {
            b
        } else if a != b && b == c {
            b - (b - a) / 3.0
        } else if a == b {
            b + (c - b) / 3.0
        } else {
            let f = force_at(x, i);
            if f.is_nan() {
                b
            } else {
                let bound = (b - a).abs().min((c - b).abs()) / 3.0;
                b + bound * sgn(f) * (-1.0 / (f * f)).exp()
            }
        };
    }
    y
}

fn max_displacement(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn strictly_increasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] < w[1])
}

/// Iterates [`phi_map`] until the largest coordinate displacement drops
/// below `tol` or `max_iter` maps have been applied.
///
/// The map creeps extremely slowly near the fixed point (its damping factor
/// is flat to all orders at zero force), and in double precision it stalls
/// once `exp(-1/F^2)` falls below an ulp. From far starts with more than a
/// handful of charges it tends to settle into a sign-flipping cycle instead.
/// Use it for coarse localization; [`solve_gradient_descent`] polishes.
///
/// On `NotConverged` the error carries the last iterate.
pub fn solve_fixed_point(start: &ClosedSimplexPoint, max_iter: usize, tol: f64) -> Result<EquilibriumReport> {
    if !(tol > 0.0) {
        return Err(Error::DomainViolation(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = start.coords().to_vec();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let y = phi_step(&x);
        iterations += 1;
        let moved = max_displacement(&x, &y);
        x = y;
        if moved < tol {
            converged = true;
            break;
        }
    }
    if !strictly_increasing(&x) {
        return Err(Error::DegenerateIterate { iterations });
    }
    let report = EquilibriumReport::new(ChargeConfiguration::from_valid(x), iterations, Method::FixedPoint);
    if converged {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}

/// How [`solve_gradient_descent_with`] picks its search direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Negative gradient.
    Steepest,
    /// Negative gradient preconditioned by the (positive definite) Hessian.
    /// Falls back to steepest descent if the factorization fails.
    Newton,
}

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub direction: Direction,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { direction: Direction::Newton, max_iter: 1_000, armijo: 1e-4 }
    }
}

/// Minimizes the energy from `start` until the gradient max-norm is below
/// `tol`, using the default (Newton-preconditioned) descent direction.
pub fn solve_gradient_descent(start: &OpenSimplexPoint, tol: f64) -> Result<EquilibriumReport> {
    solve_gradient_descent_with(start, tol, &DescentOptions::default())
}

/// Descent with backtracking: the step is halved until the trial point is
/// strictly ordered inside `(0, 1)` and passes an Armijo decrease test.
///
/// Close to the minimum the energy (a sum of `O(n^2)` terms) stops
/// resolving the decrease, so a trial point whose energy rises by no more
/// than rounding noise is also accepted when it lowers the gradient norm.
pub fn solve_gradient_descent_with(
    start: &OpenSimplexPoint,
    tol: f64,
    options: &DescentOptions,
) -> Result<EquilibriumReport> {
    if !(tol > 0.0) {
        return Err(Error::DomainViolation(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = start.with_endpoints();
    let m = x.len() - 2;
    let finish = |x: Vec<f64>, iterations| {
        EquilibriumReport::new(ChargeConfiguration::from_valid(x), iterations, Method::GradientDescent)
    };

    let mut fx = energy_of(&x);
    let mut grad: Vec<f64> = (1..=m).map(|i| -force_at(&x, i)).collect();
    let mut gmax = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let mut last_step = f64::INFINITY;

    for iter in 0..options.max_iter {
        if gmax < tol {
            return Ok(finish(x, iter));
        }

        let mut dir: Vec<f64> = match options.direction {
            Direction::Steepest => grad.iter().map(|g| -g).collect(),
            Direction::Newton => energy_hessian(&x)
                .cholesky()
                .map(|ch| ch.solve(&DVector::from_column_slice(&grad)))
                .map(|d| d.iter().map(|v| -v).collect())
                .unwrap_or_else(|| grad.iter().map(|g| -g).collect()),
        };
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }

        // For steepest descent the raw gradient can be enormous; start from
        // twice the last accepted step, but never move a charge by more than
        // a tenth of the smallest gap.
        let mut t = match options.direction {
            Direction::Newton => 1.0,
            Direction::Steepest => {
                let gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let dmax = dir.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
                (0.1 * gap / dmax).min(2.0 * last_step)
            }
        };

        let noise = 64.0 * f64::EPSILON * fx.abs();
        let mut trial = x.clone();
        loop {
            let mut moved = false;
            for k in 0..m {
                let v = x[k + 1] + t * dir[k];
                moved |= v != x[k + 1];
                trial[k + 1] = v;
            }
            if !moved {
                return Err(Error::StepUnderflow(Box::new(finish(x, iter))));
            }
            if strictly_increasing(&trial) {
                let ft = energy_of(&trial);
                if ft <= fx + options.armijo * t * slope {
                    break;
                }
                if ft <= fx + noise {
                    let gt = (1..=m).map(|i| force_at(&trial, i).abs()).fold(0.0, f64::max);
                    if gt < gmax {
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        last_step = t;

        x.copy_from_slice(&trial);
        fx = energy_of(&x);
        grad = (1..=m).map(|i| -force_at(&x, i)).collect();
        gmax = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    }

    if gmax < tol {
        return Ok(finish(x, options.max_iter));
    }
    Err(Error::NotConverged(Box::new(finish(x, options.max_iter))))
}

/// Default force tolerance: `1e-10` up to 32 charges, then
/// `1e-10 * (n/32)^3.5`.
///
/// Moving a charge next to the pinned end at `1` by one ulp changes its
/// force by about `2^-52 / g^3`, `g` the end gap, and `g` shrinks roughly
/// like `n^-1.1`. No configuration representable in doubles has a smaller
/// residual than that, so the tolerance follows the same power of `n`
/// with a safety factor of about five.
pub fn default_tolerance(n: usize) -> f64 {
    if n <= 32 {
        1e-10
    } else {
        1e-10 * (n as f64 / 32.0).powf(3.5)
    }
}

/// Iteration cap for the fixed-point warm start of [`solve`].
pub const WARM_START_MAX_ITER: usize = 500;
/// Displacement at which the warm start hands over to descent.
pub const WARM_START_TOL: f64 = 1e-3;

/// Equilibrium of `n` charges: fixed-point iterations from the evenly
/// spaced configuration for coarse localization, then descent to `tol`.
///
/// The warm start is capped at [`WARM_START_MAX_ITER`] maps; whatever it
/// reaches is handed to descent, which converges from any interior point.
pub fn solve(n: usize, tol: f64) -> Result<EquilibriumReport> {
    if n < 3 {
        return Err(Error::InvalidCount(n));
    }
    let start = ClosedSimplexPoint::from(&ChargeConfiguration::equispaced(n)?);
    let (warm, warm_iters) = match solve_fixed_point(&start, WARM_START_MAX_ITER, WARM_START_TOL) {
        Ok(r) => (r.configuration, r.iterations),
        Err(Error::NotConverged(r)) => (r.configuration, r.iterations),
        Err(Error::DegenerateIterate { iterations }) => (ChargeConfiguration::equispaced(n)?, iterations),
        Err(e) => return Err(e),
    };

    let relabel = |mut r: EquilibriumReport| {
        r.method = Method::Hybrid;
        r.iterations += warm_iters;
        r
    };
    match solve_gradient_descent(&warm.interior(), tol) {
        Ok(r) => Ok(relabel(r)),
        Err(Error::NotConverged(r)) => Err(Error::NotConverged(Box::new(relabel(*r)))),
        Err(Error::StepUnderflow(r)) => Err(Error::StepUnderflow(Box::new(relabel(*r)))),
        Err(e) => Err(e),
    }
}

/// [`solve`] with [`default_tolerance`].
pub fn solve_default(n: usize) -> Result<EquilibriumReport> {
    solve(n, default_tolerance(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: &[f64]) -> ChargeConfiguration {
        ChargeConfiguration::new(p.to_vec()).unwrap()
    }

    #[test]
    fn net_force_examples() {
        assert_eq!(net_force(&cfg(&[0.0, 0.5, 1.0]), 1).unwrap(), 0.0);
        let f = net_force(&cfg(&[0.0, 0.25, 1.0]), 1).unwrap();
        assert!((f - (16.0 - 16.0 / 9.0)).abs() < 1e-12);
        assert!(matches!(net_force(&cfg(&[0.0, 0.25, 1.0]), 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(net_force(&cfg(&[0.0, 0.25, 1.0]), 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(net_force(&cfg(&[0.0, 0.25, 1.0]), 7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn energy_examples() {
        let e3 = energy(&OpenSimplexPoint::new(vec![0.5]).unwrap());
        assert!((e3 - 5.0).abs() < 1e-14);
        assert_eq!(energy(&OpenSimplexPoint::new(vec![]).unwrap()), 1.0);
        let e4 = energy(&OpenSimplexPoint::new(vec![0.25, 0.75]).unwrap());
        let hand = 1.0 / 0.25 + 1.0 / 0.75 + 1.0 / 1.0 + 1.0 / 0.5 + 1.0 / 0.75 + 1.0 / 0.25;
        assert!((e4 - hand).abs() < 1e-13);
        assert!((e4 - 41.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(energy_gradient(&OpenSimplexPoint::new(vec![0.5]).unwrap()), vec![0.0]);
        let g = energy_gradient(&OpenSimplexPoint::new(vec![0.25]).unwrap());
        assert!((g[0] - (1.0 / 0.5625 - 1.0 / 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let x = vec![0.0, 0.15, 0.4, 0.55, 0.9, 1.0];
        let h = energy_hessian(&x);
        let grad = |x: &[f64]| (1..x.len() - 1).map(|i| -force_at(x, i)).collect::<Vec<_>>();
        let step = 1e-7;
        for k in 0..4 {
            let mut up = x.clone();
            let mut down = x.clone();
            up[k + 1] += step;
            down[k + 1] -= step;
            let (gu, gd) = (grad(&up), grad(&down));
            for j in 0..4 {
                let fd = (gu[j] - gd[j]) / (2.0 * step);
                assert!((fd - h[(j, k)]).abs() < 1e-5 * h[(j, k)].abs().max(1.0), "{j},{k}");
            }
        }
    }

    #[test]
    fn phi_examples() {
        let eq = ClosedSimplexPoint::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(phi_map(&eq), eq);

        let corner = ClosedSimplexPoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(phi_map(&corner).coords(), &[0.0, 1.0 / 3.0, 1.0]);

        let right = ClosedSimplexPoint::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!((phi_map(&right).coords()[1] - 2.0 / 3.0).abs() < 1e-15);

        let triple = ClosedSimplexPoint::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(phi_map(&triple).coords(), &[0.0, 0.0, 1.0 / 3.0, 1.0]);

        // Ends are reset even if the input has them elsewhere.
        let loose = ClosedSimplexPoint::new(vec![0.1, 0.5, 0.9]).unwrap();
        assert_eq!(phi_map(&loose).coords()[0], 0.0);
        assert_eq!(phi_map(&loose).coords()[2], 1.0);
    }

    #[test]
    fn phi_general_branch() {
        // Oracle written out independently: F = 16 - 16/9, step bound 0.25/3.
        let f: f64 = 16.0 - 16.0 / 9.0;
        let expected = 0.25 + (0.25 / 3.0) * (-1.0 / (f * f)).exp();
        let y = phi_map(&ClosedSimplexPoint::new(vec![0.0, 0.25, 1.0]).unwrap());
        assert!((y.coords()[1] - expected).abs() < 1e-15);
        assert!((y.coords()[1] - 0.33292).abs() < 1e-5);
    }

    #[test]
    fn report_json_round_trip() {
        let r = solve(5, 1e-10).unwrap();
        let back = EquilibriumReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["n"], 5);
        assert_eq!(v["method"], "Hybrid");
        assert_eq!(v["positions"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn tolerance_schedule() {
        assert_eq!(default_tolerance(10), 1e-10);
        assert_eq!(default_tolerance(32), 1e-10);
        assert!((default_tolerance(128) - 1.28e-8).abs() < 1e-20);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let p = OpenSimplexPoint::new(vec![0.5]).unwrap();
        assert!(matches!(solve_gradient_descent(&p, 0.0), Err(Error::DomainViolation(_))));
        assert!(matches!(solve(2, 1e-10), Err(Error::InvalidCount(2))));
    }
}
