//! Time evolution of the charges.
//!
//! Two systems share the force field of [`crate::equilibrium::forces`]:
//!
//! * [`System::Newtonian`]: `x_i'' = f_i`, started at rest. Written in first
//!   order form over (positions, velocities); velocities are unconstrained
//!   while positions must stay strictly ordered. Energy is conserved, so the
//!   charges oscillate forever around the equilibrium.
//! * [`System::GradientFlow`]: `x_i' = f_i`. This is steepest descent on the
//!   pairwise energy and converges to the equilibrium.
//!
//! The pinned end charges have zero velocity and acceleration throughout.

mod dopri;

pub use dopri::IntegratorOptions;

use crate::config::ChargeConfiguration;
use crate::equilibrium::{self, EquilibriumReport, Method};
use crate::error::{Error, Result};
use dopri::Stepper;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Newtonian,
    GradientFlow,
}

/// What to integrate, from where, for how long, and how often to record.
#[derive(Debug, Clone)]
pub struct DynamicsSpec {
    pub system: System,
    pub initial_positions: ChargeConfiguration,
    pub horizon: f64,
    pub sampling_step: f64,
}

impl DynamicsSpec {
    pub fn new(system: System, initial_positions: ChargeConfiguration, horizon: f64, sampling_step: f64) -> Result<Self> {
        let spec = Self { system, initial_positions, horizon, sampling_step };
        spec.check()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.initial_positions.n()
    }

    fn check(&self) -> Result<()> {
        if !(self.sampling_step > 0.0 && self.sampling_step.is_finite()) {
            return Err(Error::InvalidSpec(format!("sampling step must be positive, got {}", self.sampling_step)));
        }
        if !(self.horizon >= self.sampling_step && self.horizon.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "horizon {} must be finite and at least the sampling step {}",
                self.horizon, self.sampling_step
            )));
        }
        Ok(())
    }

    /// Sample times: multiples of the sampling step up to the horizon, plus
    /// the horizon itself when it is not a multiple.
    pub fn sample_times(&self) -> Vec<f64> {
        let count = (self.horizon / self.sampling_step * (1.0 + 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * self.sampling_step).collect();
        let last = *times.last().expect("at least t = 0");
        if (self.horizon - last) > 1e-9 * self.sampling_step {
            times.push(self.horizon);
        } else {
            *times.last_mut().expect("nonempty") = self.horizon;
        }
        times
    }
}

/// Configurations recorded on a fixed time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChargeConfiguration>,
    /// Present for the Newtonian system only; ends are exactly zero.
    pub velocities: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Positions of charge `i` (0-based) over time.
    pub fn track(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.positions()[i]).collect()
    }

    /// Header `t,x1,...,xn` then one row per sample, 17 significant digits.
    pub fn to_csv(&self) -> String {
        use crate::text::format_g17;
        let n = self.states.first().map_or(0, ChargeConfiguration::n);
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format_g17(*t));
            for &x in s.positions() {
                out.push(',');
                out.push_str(&format_g17(x));
            }
            out.push('\n');
        }
        out
    }
}

fn newtonian_rhs(n: usize) -> impl FnMut(&[f64], &mut [f64]) {
    move |y: &[f64], dy: &mut [f64]| {
        let (x, v) = y.split_at(n);
        let (dx, dv) = dy.split_at_mut(n);
        dx.copy_from_slice(v);
        dx[0] = 0.0;
        dx[n - 1] = 0.0;
        dv[0] = 0.0;
        dv[n - 1] = 0.0;
        for i in 1..n - 1 {
            dv[i] = equilibrium::force_at(x, i);
        }
    }
}

fn flow_rhs(n: usize) -> impl FnMut(&[f64], &mut [f64]) {
    move |x: &[f64], dx: &mut [f64]| {
        dx[0] = 0.0;
        dx[n - 1] = 0.0;
        for i in 1..n - 1 {
            dx[i] = equilibrium::force_at(x, i);
        }
    }
}

/// Largest step for which the method stays stable on the linearized flow.
///
/// The flow's Jacobian is minus the energy Hessian; Gershgorin bounds its
/// spectral radius by twice the largest diagonal entry, and the explicit
/// scheme is stable on the negative real axis down to about -3.3. Without
/// this cap the error control alone lets the iterate hover at the
/// tolerance level around the equilibrium instead of converging.
fn flow_step_cap(x: &[f64]) -> f64 {
    let n = x.len();
    let mut radius = 0.0_f64;
    for k in 1..n - 1 {
        let diag: f64 = (0..n).filter(|&j| j != k).map(|j| 2.0 / (x[k] - x[j]).abs().powi(3)).sum();
        radius = radius.max(2.0 * diag);
    }
    if radius > 0.0 { 3.0 / radius } else { f64::INFINITY }
}

/// Integrates `spec` with the default integrator settings.
pub fn simulate(spec: &DynamicsSpec) -> Result<Trajectory> {
    simulate_with(spec, &IntegratorOptions::default())
}

/// Integrates `spec` with adaptive steps and records the state at every
/// sample time. Fails with `OrderingBreached` rather than let two charges
/// cross.
pub fn simulate_with(spec: &DynamicsSpec, opts: &IntegratorOptions) -> Result<Trajectory> {
    spec.check()?;
    let n = spec.n();
    let x0 = spec.initial_positions.positions().to_vec();
    let times = spec.sample_times();
    match spec.system {
        System::Newtonian => {
            let mut y0 = x0;
            y0.resize(2 * n, 0.0);
            let stepper = Stepper::new(newtonian_rhs(n), y0, n, *opts);
            let (states, full) = record(stepper, n, &times)?;
            let velocities = full.into_iter().map(|y| y[n..].to_vec()).collect();
            Ok(Trajectory { times, states, velocities: Some(velocities) })
        }
        System::GradientFlow => {
            let stepper = Stepper::new(flow_rhs(n), x0, n, *opts).with_step_cap(flow_step_cap);
            let (states, _) = record(stepper, n, &times)?;
            Ok(Trajectory { times, states, velocities: None })
        }
    }
}

fn record<F: FnMut(&[f64], &mut [f64])>(
    mut stepper: Stepper<F>,
    n: usize,
    times: &[f64],
) -> Result<(Vec<ChargeConfiguration>, Vec<Vec<f64>>)> {
    let mut states = Vec::with_capacity(times.len());
    let mut full = Vec::with_capacity(times.len());
    for &ts in times {
        while stepper.t < ts {
            stepper.advance(ts)?;
        }
        states.push(ChargeConfiguration::from_valid(stepper.y[..n].to_vec()));
        full.push(stepper.y.clone());
    }
    Ok((states, full))
}

/// Componentwise trapezoidal time average of the positions over
/// `[from, end]`, `end` being the last sample. If `from` falls between two
/// samples the state there is linearly interpolated.
pub fn time_average(traj: &Trajectory, from: f64) -> Result<ChargeConfiguration> {
    let (Some(&end), Some(first)) = (traj.times.last(), traj.states.first()) else {
        return Err(Error::InsufficientSamples("empty trajectory".into()));
    };
    if !(from >= 0.0) || from >= end {
        return Err(Error::InsufficientSamples(format!("window [{from}, {end}] is empty")));
    }
    let start = traj.times.partition_point(|&t| t < from);

    let n = first.n();
    let mut acc = vec![0.0; n];
    let (mut t_prev, mut x_prev): (f64, Vec<f64>) = if traj.times[start] == from || start == 0 {
        (traj.times[start], traj.states[start].positions().to_vec())
    } else {
        let (t0, t1) = (traj.times[start - 1], traj.times[start]);
        let w = (from - t0) / (t1 - t0);
        let (a, b) = (traj.states[start - 1].positions(), traj.states[start].positions());
        (from, a.iter().zip(b).map(|(a, b)| a + w * (b - a)).collect())
    };
    let first_sample = if t_prev == traj.times[start] { start + 1 } else { start };
    for k in first_sample..traj.times.len() {
        let (t, x) = (traj.times[k], traj.states[k].positions());
        let dt = t - t_prev;
        for ((a, p), q) in acc.iter_mut().zip(&x_prev).zip(x) {
            *a += 0.5 * dt * (p + q);
        }
        t_prev = t;
        x_prev.copy_from_slice(x);
    }
    let span = end - from;
    let mut avg: Vec<f64> = acc.into_iter().map(|a| a / span).collect();
    avg[0] = 0.0;
    avg[n - 1] = 1.0;
    ChargeConfiguration::new(avg)
}

/// Time budget used by [`flow_to_equilibrium`].
pub const DEFAULT_FLOW_BUDGET: f64 = 100.0;

/// Runs the gradient flow from `start` until every interior force is below
/// `tol` in magnitude.
pub fn flow_to_equilibrium(start: &ChargeConfiguration, tol: f64) -> Result<EquilibriumReport> {
    flow_to_equilibrium_with(start, tol, DEFAULT_FLOW_BUDGET, &IntegratorOptions::default())
}

/// [`flow_to_equilibrium`] with an explicit time budget and integrator
/// settings. `NotConverged` carries the state reached at the budget.
pub fn flow_to_equilibrium_with(
    start: &ChargeConfiguration,
    tol: f64,
    max_time: f64,
    opts: &IntegratorOptions,
) -> Result<EquilibriumReport> {
    if !(tol > 0.0) {
        return Err(Error::DomainViolation(format!("tolerance must be positive, got {tol}")));
    }
    let n = start.n();
    let mut stepper = Stepper::new(flow_rhs(n), start.positions().to_vec(), n, *opts).with_step_cap(flow_step_cap);
    loop {
        // In the flow the derivative is the force itself.
        let fmax = stepper.dy.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let done = fmax < tol;
        if done || stepper.t >= max_time {
            let config = ChargeConfiguration::from_valid(stepper.positions().to_vec());
            let report = EquilibriumReport::new(config, stepper.accepted, Method::GradientFlow);
            return if done { Ok(report) } else { Err(Error::NotConverged(Box::new(report))) };
        }
        stepper.advance(max_time)?;
    }
}

/// Equally spaced start used with the gradient flow: `x_i = i / n` for the
/// first `n - 1` charges and the last pinned at `1`.
pub fn shifted_start(n: usize) -> Result<ChargeConfiguration> {
    if n < 2 {
        return Err(Error::InvalidCount(n));
    }
    let mut p: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    p[n - 1] = 1.0;
    ChargeConfiguration::new(p)
}

/// Charges crowded on the left half: `x_i = i / (2n - 1)` for interior `i`,
/// ends pinned.
pub fn half_needle_start(n: usize) -> Result<ChargeConfiguration> {
    if n < 2 {
        return Err(Error::InvalidCount(n));
    }
    let denom = (2 * n - 1) as f64;
    let mut p: Vec<f64> = (0..n).map(|i| i as f64 / denom).collect();
    p[n - 1] = 1.0;
    ChargeConfiguration::new(p)
}

/// For each charge, how many consecutive samples show `|f_i|` increasing.
///
/// Along the gradient flow one might expect every `|f_i|` to decrease; this
/// counts the exceptions.
pub fn force_increase_counts(traj: &Trajectory) -> Vec<usize> {
    let n = traj.states.first().map_or(0, ChargeConfiguration::n);
    let mut counts = vec![0; n];
    let mut prev: Option<Vec<f64>> = None;
    for s in &traj.states {
        let f: Vec<f64> = equilibrium::forces(s.positions()).iter().map(|v| v.abs()).collect();
        if let Some(p) = &prev {
            for i in 0..n {
                if f[i] > p[i] {
                    counts[i] += 1;
                }
            }
        }
        prev = Some(f);
    }
    counts
}
