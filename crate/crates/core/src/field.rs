//! Electric fields of charges on the needle.
//!
//! The needle is `[0, 1] x {0} x {0}`. Every field here carries total
//! charge one and drops the Coulomb prefactor: a configuration of `n`
//! charges puts `1/n` on each, the continuous distribution has density one.
//!
//! Orientation: along the needle, positive means toward increasing `x`.

use crate::config::ChargeConfiguration;
use crate::distribution::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::text::format_g17;

pub use crate::special::trigamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Lies on the closed segment `[0, 1] x {0} x {0}`.
    pub fn on_needle(&self) -> bool {
        self.y == 0.0 && self.z == 0.0 && (0.0..=1.0).contains(&self.x)
    }

    /// Mirror image under `x -> 1 - x`.
    pub fn reflect(&self) -> Self {
        Self { x: 1.0 - self.x, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: SpacePoint,
    pub vector: [f64; 3],
}

impl FieldSample {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the difference of two field vectors.
    pub fn distance(&self, other: &FieldSample) -> f64 {
        self.vector.iter().zip(other.vector).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// `sum_i weight * (p - X_i) / |p - X_i|^3` over charges on the axis.
fn coulomb_sum(positions: &[f64], weight: f64, p: SpacePoint) -> Result<FieldSample> {
    let mut acc = [0.0; 3];
    let transverse = p.y * p.y + p.z * p.z;
    for (index, &xi) in positions.iter().enumerate() {
        let dx = p.x - xi;
        let r2 = dx * dx + transverse;
        if r2 == 0.0 {
            return Err(Error::PointOnCharge { index });
        }
        let kernel = weight / (r2 * r2.sqrt());
        acc[0] += dx * kernel;
        acc[1] += p.y * kernel;
        acc[2] += p.z * kernel;
    }
    Ok(FieldSample { point: p, vector: acc })
}

/// Field of `n` charges of `1/n` each.
pub fn discrete_field(config: &ChargeConfiguration, p: SpacePoint) -> Result<FieldSample> {
    coulomb_sum(config.positions(), 1.0 / config.n() as f64, p)
}

/// `int (p - (t, 0, 0)) / |p - (t, 0, 0)|^3 dF(t)` against the step
/// function `F`. The integral reduces to the weighted sum over jumps, so
/// the result is bit-identical to [`discrete_field`].
pub fn stieltjes_field(cdf: &EmpiricalCdf, p: SpacePoint) -> Result<FieldSample> {
    if p.on_needle() {
        return Err(Error::PointOnNeedle);
    }
    coulomb_sum(cdf.jump_points(), cdf.jump_height(), p)
}

/// Field of the uniform unit density on the needle, at a point off it.
///
/// With `a = x`, `b = x - 1`, `rho` the distance to the axis and
/// `A = sqrt(a^2 + rho^2)`, `B = sqrt(b^2 + rho^2)`:
/// `E_x = 1/B - 1/A` and `E_rho = (a/A - b/B) / rho`. Both are rewritten
/// to avoid cancellation.
pub fn uniform_field_offneedle(p: SpacePoint) -> Result<FieldSample> {
    if p.on_needle() {
        return Err(Error::PointOnNeedle);
    }
    let (a, b) = (p.x, p.x - 1.0);
    let rho = p.y.hypot(p.z);
    let big_a = a.hypot(rho);
    let big_b = b.hypot(rho);
    let ex = (a + b) / (big_a * big_b * (big_a + big_b));
    if rho == 0.0 {
        return Ok(FieldSample { point: p, vector: [ex, 0.0, 0.0] });
    }
    let e_rho = if a * b > 0.0 {
        rho * (a + b) * (a - b) / (big_a * big_b * (a * big_b + b * big_a))
    } else {
        (a / big_a - b / big_b) / rho
    };
    Ok(FieldSample { point: p, vector: [ex, e_rho * p.y / rho, e_rho * p.z / rho] })
}

/// Principal-value field of the uniform density at `x` on the needle:
/// `lim (int_0^{x-e} - int_{x+e}^1) dt / (x - t)^2 = (2x - 1) / (x (1 - x))`.
pub fn pv_field_on_needle(x: f64) -> Result<f64> {
    if x == 0.0 || x == 1.0 {
        return Err(Error::Endpoint(x));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::DomainViolation(format!("x = {x} is not inside the needle")));
    }
    Ok((2.0 * x - 1.0) / (x * (1.0 - x)))
}

/// `int_0^{x-e} + int_{x+e}^1` of `dt / (x - t)^2`, which is
/// `1/(x - 1) - 1/x + 2/e` and blows up as `e -> 0`.
pub fn same_sign_divergence_check(x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && x - eps > 0.0 && x + eps < 1.0) {
        return Err(Error::DomainViolation(format!("need 0 < x - eps and x + eps < 1 with eps > 0, got x = {x}, eps = {eps}")));
    }
    Ok(1.0 / (x - 1.0) - 1.0 / x + 2.0 / eps)
}

/// A quantity computed both by direct summation and in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub finite_sum: f64,
    pub closed_form: f64,
}

impl Evaluated {
    pub fn relative_gap(&self) -> f64 {
        (self.finite_sum - self.closed_form).abs() / self.closed_form.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestChargeRatios {
    pub q_minus: Evaluated,
    pub q_plus: Evaluated,
}

/// Largest `n` accepted by the equispaced sums; `2^n + 1` terms are added.
pub const MAX_DYADIC_LEVEL: u32 = 30;

/// Checks the setting shared by the equispaced sums and returns
/// `K = q 2^(n-s)`, the index of the charge at `q / 2^s` among the
/// `2^n + 1` charges `k / 2^n`.
fn center_index(q: u64, s: u32, n: u32) -> Result<u64> {
    if s == 0 || s > 62 || q == 0 || q >= 1u64 << s {
        return Err(Error::DomainViolation(format!("{q}/2^{s} is not a dyadic in (0, 1)")));
    }
    if n < s + 1 || n > MAX_DYADIC_LEVEL {
        return Err(Error::DomainViolation(format!("need s + 1 <= n <= {MAX_DYADIC_LEVEL}, got n = {n}, s = {s}")));
    }
    Ok(q << (n - s))
}

/// `sum_{j=1}^{count} 1/j^2`, smallest terms first.
fn inverse_squares(count: u64) -> f64 {
    (1..=count).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum()
}

/// Sums over the equispaced charges left and right of the one at `u`,
/// in units where the spacing is one; the physical sums are `4^n` times
/// these.
fn side_sums(k: u64, n: u32) -> (f64, f64) {
    (inverse_squares(k), inverse_squares((1u64 << n) - k))
}

/// `(pi^2 - 6 psi_1(1 + m)) / 6 = sum_{j=1}^{m} 1/j^2`.
fn inverse_squares_closed(m: u64) -> Result<f64> {
    Ok((std::f64::consts::PI.powi(2) - 6.0 * trigamma(1.0 + m as f64)?) / 6.0)
}

/// With `2^n + 1` equally spaced charges and `u = q / 2^s`: the ratios
/// `Q- = 2^(-2n) / sum_left` and `Q+ = 2^(-2n) / sum_right`, where the sums
/// run over `1 / (k/2^n - u)^2` for the charges on each side of `u`.
/// Both tend to zero as `n` grows.
pub fn nearest_charge_ratios(q: u64, s: u32, n: u32) -> Result<NearestChargeRatios> {
    let k = center_index(q, s, n)?;
    let (left, right) = side_sums(k, n);
    let right_count = (1u64 << n) - k;
    let scale = 3.0 * (2.0f64).powi(1 - 4 * n as i32);
    let closed = |m: u64| -> Result<f64> {
        Ok(scale / (std::f64::consts::PI.powi(2) - 6.0 * trigamma(1.0 + m as f64)?))
    };
    // The physical side sums are 4^n times the unit-spacing ones.
    let four_n = (4.0f64).powi(n as i32);
    Ok(NearestChargeRatios {
        q_minus: Evaluated { finite_sum: 1.0 / (four_n * four_n * left), closed_form: closed(k)? },
        q_plus: Evaluated { finite_sum: 1.0 / (four_n * four_n * right), closed_form: closed(right_count)? },
    })
}

/// Force on the charge at `u = q / 2^s` from the charges left of it, each
/// carrying `1 / (2^n + 1)`; grows without bound in `n`.
pub fn partial_force_sum(q: u64, s: u32, n: u32) -> Result<Evaluated> {
    let k = center_index(q, s, n)?;
    let (left, _) = side_sums(k, n);
    let four_n = (4.0f64).powi(n as i32);
    let charges = (1u64 << n) as f64 + 1.0;
    Ok(Evaluated {
        finite_sum: four_n * left / charges,
        closed_form: four_n * inverse_squares_closed(k)? / charges,
    })
}

/// Net force (right side minus left side) on the charge at `u = q / 2^s`,
/// each charge carrying `1 / (2^n + 1)`. Tends to `1/u - 1/(1 - u)`.
pub fn net_force_sum(q: u64, s: u32, n: u32) -> Result<Evaluated> {
    let k = center_index(q, s, n)?;
    let (left, right) = side_sums(k, n);
    let four_n = (4.0f64).powi(n as i32);
    let charges = (1u64 << n) as f64 + 1.0;
    let closed = four_n * (trigamma(1.0 + k as f64)? - trigamma(1.0 + ((1u64 << n) - k) as f64)?) / charges;
    Ok(Evaluated { finite_sum: four_n * (right - left) / charges, closed_form: closed })
}

/// What produces a field.
#[derive(Debug, Clone)]
pub enum FieldSource {
    /// Uniform unit density on the needle.
    Continuous,
    Discrete(ChargeConfiguration),
}

impl FieldSource {
    pub fn evaluate(&self, p: SpacePoint) -> Result<FieldSample> {
        match self {
            FieldSource::Continuous => uniform_field_offneedle(p),
            FieldSource::Discrete(config) => discrete_field(config, p),
        }
    }

    /// Label used in field-map files.
    pub fn label(&self) -> &'static str {
        match self {
            FieldSource::Continuous => "uniform",
            FieldSource::Discrete(_) => "discrete",
        }
    }
}

/// `|E_a(p) - E_b(p)|` at each point; points where either field is
/// undefined are reported as errors.
pub fn compare_fields(a: &FieldSource, b: &FieldSource, points: &[SpacePoint]) -> Result<Vec<f64>> {
    points.iter().map(|&p| Ok(a.evaluate(p)?.distance(&b.evaluate(p)?))).collect()
}

/// Rectangular grid in the `z = 0` plane. Both ranges are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

fn linspace(lo: f64, hi: f64, count: usize, i: usize) -> f64 {
    if count == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (count - 1) as f64
    }
}

impl Grid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let finite = [x_range.0, x_range.1, y_range.0, y_range.1].iter().all(|v| v.is_finite());
        if !finite || nx == 0 || ny == 0 {
            return Err(Error::DomainViolation("grid needs finite ranges and a positive resolution".into()));
        }
        Ok(Self { x_range, y_range, nx, ny })
    }

    /// Row-major with `y` outer and `x` inner.
    pub fn points(&self) -> impl Iterator<Item = SpacePoint> + '_ {
        (0..self.ny).flat_map(move |j| {
            let y = linspace(self.y_range.0, self.y_range.1, self.ny, j);
            (0..self.nx).map(move |i| SpacePoint::new(linspace(self.x_range.0, self.x_range.1, self.nx, i), y, 0.0))
        })
    }
}

#[derive(Debug, Clone)]
pub struct FieldMap {
    pub source: &'static str,
    pub samples: Vec<FieldSample>,
    /// Grid points where the field is undefined (on the needle or on a
    /// charge).
    pub skipped: usize,
}

impl FieldMap {
    /// Header `x,y,Ex,Ey,source`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,Ex,Ey,source\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_g17(s.point.x),
                format_g17(s.point.y),
                format_g17(s.vector[0]),
                format_g17(s.vector[1]),
                self.source
            ));
        }
        out
    }
}

pub fn field_map(source: &FieldSource, grid: &Grid) -> FieldMap {
    let mut samples = Vec::with_capacity(grid.nx * grid.ny);
    let mut skipped = 0;
    for p in grid.points() {
        match source.evaluate(p) {
            Ok(s) => samples.push(s),
            Err(_) => skipped += 1,
        }
    }
    FieldMap { source: source.label(), samples, skipped }
}
