//! Charge configurations on the unit needle and the simplex points the
//! solvers work with.
//!
//! A [`ChargeConfiguration`] is the physical state: `n >= 2` strictly
//! increasing positions with the first pinned at exactly `0.0` and the last
//! at exactly `1.0`. [`OpenSimplexPoint`] holds only the free (interior)
//! coordinates, and [`ClosedSimplexPoint`] relaxes strict ordering so that
//! coincident charges can be represented.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::format_g17;

/// Positions of `n` charges on `[0, 1]`, pinned ends, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChargeConfiguration {
    positions: Vec<f64>,
}

/// Checks the configuration invariants and reports the first violation.
///
/// Checks run in this order: count, pinned endpoints, range, ordering.
/// Reported indices are 0-based.
pub fn validate(positions: &[f64]) -> Result<()> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::InvalidCount(n));
    }
    // Pinning is exact, not within a tolerance.
    if positions[0] != 0.0 {
        return Err(Error::EndpointNotPinned { index: 0, value: positions[0], expected: 0.0 });
    }
    if positions[n - 1] != 1.0 {
        return Err(Error::EndpointNotPinned { index: n - 1, value: positions[n - 1], expected: 1.0 });
    }
    if let Some(index) = positions.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::OutOfRange { index, value: positions[index] });
    }
    if let Some(k) = positions.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::OrderViolation { index: k + 1 });
    }
    Ok(())
}

impl ChargeConfiguration {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        validate(&positions)?;
        Ok(Self { positions })
    }

    /// Wraps positions the caller has already validated.
    pub(crate) fn from_valid(positions: Vec<f64>) -> Self {
        debug_assert!(validate(&positions).is_ok(), "invalid configuration {positions:?}");
        Self { positions }
    }

    /// Evenly spaced charges, `x_i = i / (n - 1)` for `i = 0..n`.
    pub fn equispaced(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidCount(n));
        }
        let last = (n - 1) as f64;
        let mut positions: Vec<f64> = (0..n).map(|i| i as f64 / last).collect();
        positions[n - 1] = 1.0;
        Ok(Self { positions })
    }

    /// Builds a configuration from its free coordinates by adding the
    /// pinned ends.
    pub fn from_interior(point: &OpenSimplexPoint) -> Self {
        let mut positions = Vec::with_capacity(point.len() + 2);
        positions.push(0.0);
        positions.extend_from_slice(point.coords());
        positions.push(1.0);
        Self { positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }

    /// The free coordinates `x_1..x_{n-2}` (0-based).
    pub fn interior(&self) -> OpenSimplexPoint {
        OpenSimplexPoint { coords: self.positions[1..self.n() - 1].to_vec() }
    }

    /// Mirror image under `x -> 1 - x`, renumbered so positions stay
    /// increasing: `y_k = 1 - x_{n-1-k}`.
    ///
    /// The equilibrium is a fixed point of this map.
    pub fn reflect(&self) -> Self {
        let n = self.n();
        let mut positions: Vec<f64> = (0..n).map(|k| 1.0 - self.positions[n - 1 - k]).collect();
        positions[0] = 0.0;
        positions[n - 1] = 1.0;
        Self { positions }
    }

    /// One position per line, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n() * 24);
        for &x in &self.positions {
            out.push_str(&format_g17(x));
            out.push('\n');
        }
        out
    }

    /// Parses the line-oriented text form. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let positions = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("{l:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(positions)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.positions).expect("a vector of finite floats serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let positions: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(positions)
    }
}

impl TryFrom<Vec<f64>> for ChargeConfiguration {
    type Error = Error;

    fn try_from(positions: Vec<f64>) -> Result<Self> {
        Self::new(positions)
    }
}

impl From<ChargeConfiguration> for Vec<f64> {
    fn from(config: ChargeConfiguration) -> Self {
        config.positions
    }
}

/// Free coordinates `0 < a_1 < ... < a_{n-2} < 1` of a configuration whose
/// ends are pinned. This is the open convex domain of the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSimplexPoint {
    coords: Vec<f64>,
}

impl OpenSimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(Error::OutOfRange { index, value: coords[index] });
        }
        if let Some(k) = coords.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::OrderViolation { index: k + 1 });
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Total number of charges, pinned ends included.
    pub fn charge_count(&self) -> usize {
        self.coords.len() + 2
    }

    /// Coordinates with `0` and `1` prepended and appended.
    pub fn with_endpoints(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.coords.len() + 2);
        all.push(0.0);
        all.extend_from_slice(&self.coords);
        all.push(1.0);
        all
    }
}

/// A point of the closed simplex `0 <= a_0 <= ... <= a_{n-1} <= 1`;
/// coincident coordinates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSimplexPoint {
    coords: Vec<f64>,
}

impl ClosedSimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidCount(coords.len()));
        }
        if let Some(index) = coords.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfRange { index, value: coords[index] });
        }
        if let Some(k) = coords.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::OrderViolation { index: k + 1 });
        }
        Ok(Self { coords })
    }

    pub(crate) fn from_valid(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// The strict configuration this point represents, if its ends are
    /// pinned and no two coordinates coincide.
    pub fn to_configuration(&self) -> Result<ChargeConfiguration> {
        ChargeConfiguration::new(self.coords.clone())
    }
}

impl From<&ChargeConfiguration> for ClosedSimplexPoint {
    fn from(config: &ChargeConfiguration) -> Self {
        Self { coords: config.positions.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        assert!(validate(&[0.0, 0.5, 1.0]).is_ok());
        assert_eq!(validate(&[0.0, 0.5, 0.5, 1.0]), Err(Error::OrderViolation { index: 2 }));
        assert!(matches!(
            validate(&[0.1, 0.5, 1.0]),
            Err(Error::EndpointNotPinned { index: 0, .. })
        ));
        assert!(matches!(
            validate(&[0.0, 0.5, 0.999_999]),
            Err(Error::EndpointNotPinned { index: 2, .. })
        ));
        assert_eq!(validate(&[0.0, 1.5, 1.0]), Err(Error::OutOfRange { index: 1, value: 1.5 }));
        assert!(matches!(validate(&[0.0, f64::NAN, 1.0]), Err(Error::OutOfRange { index: 1, .. })));
        assert_eq!(validate(&[0.0]), Err(Error::InvalidCount(1)));
        assert_eq!(validate(&[0.0, 0.7, 0.3, 1.0]), Err(Error::OrderViolation { index: 2 }));
    }

    #[test]
    fn equispaced_examples() {
        assert_eq!(ChargeConfiguration::equispaced(3).unwrap().positions(), &[0.0, 0.5, 1.0]);
        assert_eq!(
            ChargeConfiguration::equispaced(5).unwrap().positions(),
            &[0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(ChargeConfiguration::equispaced(2).unwrap().positions(), &[0.0, 1.0]);
        assert_eq!(ChargeConfiguration::equispaced(1), Err(Error::InvalidCount(1)));
    }

    #[test]
    fn reflect_examples() {
        let c = ChargeConfiguration::new(vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(c.reflect().positions(), &[0.0, 0.75, 1.0]);
        let ends = ChargeConfiguration::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(ends.reflect(), ends);
        let sym = ChargeConfiguration::new(vec![0.0, 0.319, 0.681, 1.0]).unwrap();
        let r = sym.reflect();
        for (a, b) in r.positions().iter().zip(sym.positions()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn text_and_json_round_trip() {
        let c = ChargeConfiguration::new(vec![0.0, 0.1, 1.0 / 3.0, 0.7, 1.0]).unwrap();
        assert_eq!(ChargeConfiguration::from_text(&c.to_text()).unwrap(), c);
        assert_eq!(ChargeConfiguration::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.to_text().lines().nth(1), Some("0.10000000000000001"));
        assert!(ChargeConfiguration::from_json("[0.0, 0.5]").is_err());
        assert!(ChargeConfiguration::from_text("0\nabc\n1\n").is_err());
    }

    #[test]
    fn simplex_points() {
        assert!(OpenSimplexPoint::new(vec![0.2, 0.4]).is_ok());
        assert!(OpenSimplexPoint::new(vec![]).is_ok());
        assert!(OpenSimplexPoint::new(vec![0.0, 0.4]).is_err());
        assert!(OpenSimplexPoint::new(vec![0.4, 0.4]).is_err());
        assert!(ClosedSimplexPoint::new(vec![0.0, 0.0, 1.0, 1.0]).is_ok());
        assert!(ClosedSimplexPoint::new(vec![0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(ClosedSimplexPoint::new(vec![0.0, 0.0, 1.0]).unwrap().to_configuration().is_err());
    }

    fn valid_positions() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-6f64..1.0 - 1e-6, 0..20).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup();
            let mut p = vec![0.0];
            p.extend(v);
            p.push(1.0);
            p
        })
    }

    proptest! {
        #[test]
        fn reflect_is_an_involution(p in valid_positions()) {
            let c = ChargeConfiguration::new(p).unwrap();
            let back = c.reflect().reflect();
            for (a, b) in back.positions().iter().zip(c.positions()) {
                prop_assert!((a - b).abs() <= 2.0 * f64::EPSILON);
            }
        }

        #[test]
        fn equispaced_is_reflect_symmetric(n in 2usize..200) {
            let c = ChargeConfiguration::equispaced(n).unwrap();
            for (a, b) in c.reflect().positions().iter().zip(c.positions()) {
                prop_assert!((a - b).abs() <= 2.0 * f64::EPSILON);
            }
        }

        #[test]
        fn validate_accepts_sorted_pinned(p in valid_positions()) {
            prop_assert!(validate(&p).is_ok());
        }

        #[test]
        fn validate_rejects_perturbed(p in valid_positions(), which in 0usize..3, k in any::<prop::sample::Index>()) {
            let mut p = p;
            let n = p.len();
            match which {
                0 => p[0] = 1e-9,
                1 => { let i = k.index(n - 1); p.swap(i, i + 1); }
                _ => { let i = k.index(n); p[i] = 1.5; }
            }
            prop_assert!(validate(&p).is_err());
        }
    }
}
