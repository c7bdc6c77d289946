//! Distribution functions of normalized configurations.
//!
//! Each of the `n` charges carries mass `1/n`; the distribution function
//! `F_n(x) = #{i : x_i <= x} / n` is what converges to the identity on
//! `[0, 1]` as the number of charges grows.

use std::fmt;
use std::str::FromStr;

use crate::config::ChargeConfiguration;
use crate::dynamics::Trajectory;
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::text::format_g17;

/// Right-continuous step function with a jump of `1/n` at every charge.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    jump_points: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_configuration(config: &ChargeConfiguration) -> Self {
        Self { jump_points: config.positions().to_vec() }
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.jump_points
    }

    pub fn n(&self) -> usize {
        self.jump_points.len()
    }

    pub fn jump_height(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// `F(x)`: the fraction of charges at or left of `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.jump_points.partition_point(|&p| p <= x);
        count as f64 / self.n() as f64
    }

    /// `F(x-)`: the fraction of charges strictly left of `x`.
    pub fn left_limit(&self, x: f64) -> f64 {
        let count = self.jump_points.partition_point(|&p| p < x);
        count as f64 / self.n() as f64
    }

    /// `sup_x |F(x) - x|` over `[0, 1]`.
    ///
    /// Between jumps `F - x` is linear, so the supremum is attained at a
    /// jump point or at its left limit.
    pub fn sup_distance_to_uniform(&self) -> f64 {
        let n = self.n() as f64;
        self.jump_points.iter().enumerate().fold(0.0, |acc: f64, (k, &x)| {
            let before = k as f64 / n;
            let after = (k + 1) as f64 / n;
            acc.max((after - x).abs()).max((before - x).abs())
        })
    }

    /// Header `x,F(x)` then one row per jump with the post-jump value.
    pub fn to_csv(&self) -> String {
        let n = self.n() as f64;
        let mut out = String::from("x,F(x)\n");
        for (k, &x) in self.jump_points.iter().enumerate() {
            out.push_str(&format!("{},{}\n", format_g17(x), format_g17((k + 1) as f64 / n)));
        }
        out
    }
}

pub fn sup_distance_to_uniform(cdf: &EmpiricalCdf) -> f64 {
    cdf.sup_distance_to_uniform()
}

/// A dyadic `q / 2^s` in `(0, 1)` with `q` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicTarget {
    q: u64,
    s: u32,
}

impl DyadicTarget {
    pub fn new(q: u64, s: u32) -> Result<Self> {
        if s == 0 || s > 62 || q % 2 == 0 || q >= 1u64 << s {
            return Err(Error::InvalidDyadic { q, s });
        }
        Ok(Self { q, s })
    }

    /// Reduces `num / den`; `den` must be a power of two.
    pub fn from_fraction(num: u64, den: u64) -> Result<Self> {
        if den == 0 || !den.is_power_of_two() {
            return Err(Error::Parse(format!("{num}/{den} is not dyadic")));
        }
        let (mut q, mut s) = (num, den.trailing_zeros());
        while q != 0 && q % 2 == 0 && s > 0 {
            q /= 2;
            s -= 1;
        }
        Self::new(q, s)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn value(&self) -> f64 {
        self.q as f64 / (1u64 << self.s) as f64
    }
}

impl fmt::Display for DyadicTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.q, 1u64 << self.s)
    }
}

impl FromStr for DyadicTarget {
    type Err = Error;

    /// Accepts `num/den`, e.g. `1/4` or `10/16`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected a fraction like 1/4, got {text:?}"));
        let (num, den) = text.trim().split_once('/').ok_or_else(bad)?;
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        Self::from_fraction(num, den)
    }
}

/// `m` such that `n = 2^m + 1`.
pub fn dyadic_exponent(n: usize) -> Result<u32> {
    match n.checked_sub(1) {
        Some(k) if k >= 2 && k.is_power_of_two() => Ok(k.trailing_zeros()),
        _ => Err(Error::CountNotDyadic { n }),
    }
}

/// 1-based index `gamma * 2^m + 1` of the charge with a fraction `gamma` of
/// the other charges strictly to its left.
pub fn dyadic_index(n: usize, target: DyadicTarget) -> Result<usize> {
    let m = dyadic_exponent(n)?;
    if m < target.s {
        return Err(Error::ResolutionTooCoarse { n, m, s: target.s });
    }
    Ok((target.q << (m - target.s)) as usize + 1)
}

pub fn dyadic_position(config: &ChargeConfiguration, target: DyadicTarget) -> Result<f64> {
    let index = dyadic_index(config.n(), target)?;
    Ok(config.positions()[index - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicRow {
    pub n: usize,
    pub gamma: DyadicTarget,
    /// 1-based.
    pub index: usize,
    pub position: f64,
}

/// Tracks each target across the equilibria with `2^m + 1` charges,
/// solving every size once.
pub fn dyadic_table(exponents: &[u32], targets: &[DyadicTarget]) -> Result<Vec<DyadicRow>> {
    let mut rows = Vec::new();
    for &m in exponents {
        let n = (1usize << m) + 1;
        let config = equilibrium::solve_default(n)?.configuration;
        for &gamma in targets {
            let index = dyadic_index(n, gamma)?;
            rows.push(DyadicRow { n, gamma, index, position: config.positions()[index - 1] });
        }
    }
    Ok(rows)
}

/// Header `n,gamma,index,position`.
pub fn dyadic_table_csv(rows: &[DyadicRow]) -> String {
    let mut out = String::from("n,gamma,index,position\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            format_g17(r.gamma.value()),
            r.index,
            format_g17(r.position)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStats {
    pub max_gap: f64,
    pub min_gap: f64,
    pub ratio: f64,
    pub gaps: Vec<f64>,
}

pub fn gap_stats(config: &ChargeConfiguration) -> GapStats {
    let gaps: Vec<f64> = config.positions().windows(2).map(|w| w[1] - w[0]).collect();
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    GapStats { max_gap, min_gap, ratio: max_gap / min_gap, gaps }
}

/// First-order guess of the `(n + 1)`-charge equilibrium from the
/// `n`-charge one: in 1-based terms
/// `y_k = (k-1)/n * x_{k-1} + (n+1-k)/n * x_k` for `k = 2..n`.
pub fn predict_added_charge(config: &ChargeConfiguration) -> Result<ChargeConfiguration> {
    let x = config.positions();
    let n = x.len();
    let nf = n as f64;
    let mut y = Vec::with_capacity(n + 1);
    y.push(0.0);
    for j in 1..n {
        y.push((j as f64 / nf) * x[j - 1] + ((n - j) as f64 / nf) * x[j]);
    }
    y.push(1.0);
    ChargeConfiguration::new(y)
}

/// `X_{n,2} / X_{2n-1,2}`: the second charge of the `n`-equilibrium over
/// the second charge of the `(2n - 1)`-equilibrium.
pub fn second_charge_ratio(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidCount(n));
    }
    let small = equilibrium::solve_default(n)?.configuration;
    let large = equilibrium::solve_default(2 * n - 1)?.configuration;
    Ok(small.positions()[1] / large.positions()[1])
}

/// Distribution functions of the recorded states at the requested times.
/// Each time must coincide with a sample time of the trajectory.
pub fn cdf_snapshots(traj: &Trajectory, times: &[f64]) -> Result<Vec<EmpiricalCdf>> {
    times
        .iter()
        .map(|&t| {
            let slack = 1e-9 * t.abs().max(1.0);
            traj.times
                .iter()
                .position(|&s| (s - t).abs() <= slack)
                .map(|i| EmpiricalCdf::from_configuration(&traj.states[i]))
                .ok_or_else(|| Error::InvalidSpec(format!("t = {t} is not a sample time of the trajectory")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(x: &[f64]) -> ChargeConfiguration {
        ChargeConfiguration::new(x.to_vec()).unwrap()
    }

    #[test]
    fn cdf_counts() {
        let cdf = EmpiricalCdf::from_configuration(&config(&[0.0, 0.5, 1.0]));
        assert_eq!(cdf.eval(0.6), 2.0 / 3.0);
        assert_eq!(cdf.eval(-0.1), 0.0);
        assert_eq!(cdf.eval(1.0), 1.0);
        assert_eq!(cdf.eval(0.5), 2.0 / 3.0);
        assert_eq!(cdf.left_limit(0.5), 1.0 / 3.0);
        assert_eq!(cdf.to_csv(), "x,F(x)\n0,0.33333333333333331\n0.5,0.66666666666666663\n1,1\n");
    }

    #[test]
    fn two_point_sup_distance() {
        let cdf = EmpiricalCdf::from_configuration(&config(&[0.0, 1.0]));
        assert_eq!(cdf.sup_distance_to_uniform(), 0.5);
    }

    #[test]
    fn equispaced_sup_distance_shrinks() {
        let d = |n| EmpiricalCdf::from_configuration(&ChargeConfiguration::equispaced(n).unwrap()).sup_distance_to_uniform();
        assert!(d(101) < d(11));
        // For equispaced charges the distance is exactly 1/n at x = 0.
        assert!((d(11) - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_targets() {
        assert_eq!("1/4".parse::<DyadicTarget>().unwrap(), DyadicTarget::new(1, 2).unwrap());
        assert_eq!("10/16".parse::<DyadicTarget>().unwrap(), DyadicTarget::new(5, 3).unwrap());
        assert!("1/3".parse::<DyadicTarget>().is_err());
        assert!("2/2".parse::<DyadicTarget>().is_err());
        assert!("0/4".parse::<DyadicTarget>().is_err());
        assert!(DyadicTarget::new(2, 3).is_err());
        assert_eq!(DyadicTarget::new(5, 3).unwrap().to_string(), "5/8");
    }

    #[test]
    fn dyadic_indices() {
        let quarter = DyadicTarget::new(1, 2).unwrap();
        let five_eighths = DyadicTarget::new(5, 3).unwrap();
        assert_eq!(dyadic_index(9, quarter), Ok(3));
        assert_eq!(dyadic_index(17, five_eighths), Ok(11));
        assert_eq!(dyadic_index(10, quarter), Err(Error::CountNotDyadic { n: 10 }));
        assert_eq!(dyadic_index(5, five_eighths), Err(Error::ResolutionTooCoarse { n: 5, m: 2, s: 3 }));
        // Exactly the target fraction of the other charges lies to the left.
        for m in 3..12u32 {
            let n = (1usize << m) + 1;
            let idx = dyadic_index(n, five_eighths).unwrap();
            assert_eq!((idx - 1) as f64 / (n - 1) as f64, 0.625);
        }
    }

    #[test]
    fn center_of_five() {
        let c = equilibrium::solve_default(5).unwrap().configuration;
        let half = DyadicTarget::new(1, 1).unwrap();
        assert!((dyadic_position(&c, half).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gaps() {
        assert!((gap_stats(&ChargeConfiguration::equispaced(5).unwrap()).ratio - 1.0).abs() < 1e-12);
        let four = equilibrium::solve_default(4).unwrap().configuration;
        let g = gap_stats(&four);
        assert_eq!(g.gaps.len(), 3);
        assert!((g.ratio - 1.1328).abs() < 1e-3, "{}", g.ratio);
        assert_eq!(g.max_gap, g.gaps[1]);
    }

    #[test]
    fn predictor_from_three() {
        let y = predict_added_charge(&config(&[0.0, 0.5, 1.0])).unwrap();
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in y.positions().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn snapshots_need_sample_times() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![config(&[0.0, 0.3, 1.0]), config(&[0.0, 0.4, 1.0])],
            velocities: None,
        };
        let snaps = cdf_snapshots(&traj, &[1.0]).unwrap();
        assert_eq!(snaps[0].jump_points()[1], 0.4);
        assert!(cdf_snapshots(&traj, &[0.5]).is_err());
    }

    fn arb_config() -> impl Strategy<Value = ChargeConfiguration> {
        prop::collection::vec(0.001f64..1.0, 0..20).prop_map(|mut gaps| {
            gaps.push(0.5);
            let total: f64 = gaps.iter().sum();
            let mut x = vec![0.0];
            let mut acc = 0.0;
            for g in &gaps[..gaps.len() - 1] {
                acc += g / total;
                x.push(acc);
            }
            x.push(1.0);
            ChargeConfiguration::new(x).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_with_limits(c in arb_config(), a in -0.5f64..1.5, b in -0.5f64..1.5) {
            let cdf = EmpiricalCdf::from_configuration(&c);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cdf.eval(lo) <= cdf.eval(hi));
            prop_assert_eq!(cdf.eval(-1e-300), 0.0);
            prop_assert_eq!(cdf.eval(1.0), 1.0);
            // Right-continuity at a jump.
            let p = c.positions()[c.n() / 2];
            prop_assert!((cdf.eval(p) - cdf.left_limit(p) - cdf.jump_height()).abs() < 1e-15);
        }

        #[test]
        fn sup_distance_beats_grid(c in arb_config()) {
            let cdf = EmpiricalCdf::from_configuration(&c);
            let exact = cdf.sup_distance_to_uniform();
            let grid = (0..=2000).map(|i| i as f64 / 2000.0).fold(0.0f64, |m, x| m.max((cdf.eval(x) - x).abs()));
            prop_assert!(grid <= exact + 1e-15);
            prop_assert!(exact - grid <= 1.0 / 2000.0 + 1e-12);
        }

        #[test]
        fn predictor_brackets_and_commutes_with_reflection(c in arb_config()) {
            let y = predict_added_charge(&c).unwrap();
            let x = c.positions();
            for k in 1..x.len() {
                prop_assert!(x[k - 1] <= y.positions()[k] && y.positions()[k] <= x[k]);
            }
            let a = predict_added_charge(&c.reflect()).unwrap();
            let b = y.reflect();
            for (u, v) in a.positions().iter().zip(b.positions()) {
                prop_assert!((u - v).abs() < 1e-14);
            }
        }
    }
}
