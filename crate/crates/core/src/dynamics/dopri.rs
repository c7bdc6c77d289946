//! Dormand–Prince 5(4) stepping with an ordering guard on the positions.
//!
//! Both systems integrated here are autonomous, so the stage times are not
//! needed.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order solution minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// A step may not shrink any neighbour gap below this fraction of its
    /// current length; otherwise it is halved and retried.
    pub gap_guard: f64,
    /// Smallest admissible step, relative to `max(1, t)`.
    pub min_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-9, gap_guard: 0.1, min_step: 1e-14 }
    }
}

/// Integrator state. The first `n` state components are charge positions;
/// any further components (velocities) are unconstrained.
pub struct Stepper<F> {
    rhs: F,
    opts: IntegratorOptions,
    n: usize,
    pub t: f64,
    pub y: Vec<f64>,
    /// Derivative at `(t, y)`; reused as the first stage of the next step.
    pub dy: Vec<f64>,
    h: f64,
    step_cap: Option<fn(&[f64]) -> f64>,
    pub accepted: usize,
    pub rejected: usize,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    trial: Vec<f64>,
}

impl<F: FnMut(&[f64], &mut [f64])> Stepper<F> {
    pub fn new(mut rhs: F, y0: Vec<f64>, n: usize, opts: IntegratorOptions) -> Self {
        let dim = y0.len();
        let mut dy = vec![0.0; dim];
        rhs(&y0, &mut dy);
        // Initial step: move the fastest component by about 1e-3 of the
        // smallest gap.
        let gap = y0[..n].windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let speed = dy.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let h = if speed > 0.0 { (1e-3 * gap / speed).min(1e-2) } else { 1e-2 };
        Self {
            rhs,
            opts,
            n,
            t: 0.0,
            y: y0,
            dy,
            h,
            step_cap: None,
            accepted: 0,
            rejected: 0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            stage: vec![0.0; dim],
            trial: vec![0.0; dim],
        }
    }

    /// Bounds every step by `cap(y)` at the start of the step.
    pub fn with_step_cap(mut self, cap: fn(&[f64]) -> f64) -> Self {
        self.step_cap = Some(cap);
        self
    }

    /// Positions are the leading `n` components.
    pub fn positions(&self) -> &[f64] {
        &self.y[..self.n]
    }

    /// Takes one accepted step, never passing `t_limit`.
    pub fn advance(&mut self, t_limit: f64) -> Result<()> {
        let cap = self.step_cap.map_or(f64::INFINITY, |c| c(&self.y));
        loop {
            let remaining = t_limit - self.t;
            let natural = self.h.min(cap);
            let clipped = natural >= remaining;
            let h = if clipped { remaining } else { natural };

            let err = self.attempt(h);
            let ordered = err.is_finite() && self.gaps_ok();

            if ordered && err <= 1.0 {
                self.t = if clipped { t_limit } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.trial);
                std::mem::swap(&mut self.dy, &mut self.k[6]);
                self.accepted += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A clipped step says nothing about the natural step size.
                self.h = if clipped { self.h.max(h * grow) } else { h * grow };
                return Ok(());
            }

            self.rejected += 1;
            self.h = if ordered { h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.5 * h };
            if self.h < self.opts.min_step * self.t.abs().max(1.0) {
                return Err(Error::OrderingBreached { time: self.t });
            }
        }
    }

    /// Computes a trial step into `self.trial` and `self.k[6]` and returns
    /// the scaled error norm.
    fn attempt(&mut self, h: f64) -> f64 {
        let dim = self.y.len();
        self.k[0].copy_from_slice(&self.dy);
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, a) in A[s][..s].iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.stage[i] = self.y[i] + h * acc;
            }
            (self.rhs)(&self.stage, &mut self.k[s]);
        }
        // The last stage point is the fifth-order solution (FSAL).
        self.trial.copy_from_slice(&self.stage);

        let mut err = 0.0_f64;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, c) in E.iter().enumerate() {
                e += c * self.k[j][i];
            }
            let scale = self.opts.atol + self.opts.rtol * self.y[i].abs().max(self.trial[i].abs());
            let r = (h * e).abs() / scale;
            if !(r <= err) {
                err = if r.is_nan() { f64::INFINITY } else { r.max(err) };
            }
        }
        err
    }

    fn gaps_ok(&self) -> bool {
        let old = &self.y[..self.n];
        let new = &self.trial[..self.n];
        old.windows(2).zip(new.windows(2)).all(|(o, w)| {
            let g = w[1] - w[0];
            g > 0.0 && g >= self.opts.gap_guard * (o[1] - o[0])
        })
    }
}
