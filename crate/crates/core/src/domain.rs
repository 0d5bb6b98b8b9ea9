//! Points of the bidisk, coordinate selectors and the evaluation radius guard.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BdkError, Result};

/// One of the two coordinate functions of the bidisk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Z,
    W,
}

impl Variable {
    pub fn other(self) -> Self {
        match self {
            Variable::Z => Variable::W,
            Variable::W => Variable::Z,
        }
    }

    /// Unit exponent step of the variable as (z-degree, w-degree).
    pub(crate) fn step(self) -> (i64, i64) {
        match self {
            Variable::Z => (1, 0),
            Variable::W => (0, 1),
        }
    }
}

impl std::fmt::Display for Variable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variable::Z => f.write_str("z"),
            Variable::W => f.write_str("w"),
        }
    }
}

/// A point (z, w) of the bidisk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiPoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl BiPoint {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    pub fn real(z: f64, w: f64) -> Self {
        Self::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    pub fn origin() -> Self {
        Self::real(0.0, 0.0)
    }

    pub fn max_modulus(&self) -> f64 {
        self.z.norm().max(self.w.norm())
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.w, self.z)
    }
}

/// Evaluation radius r_max: truncated series are only evaluated where their
/// tails decay geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RadiusGuard(f64);

impl RadiusGuard {
    pub const DEFAULT: f64 = 0.9;

    pub fn new(radius: f64) -> Result<Self> {
        if radius.is_finite() && radius > 0.0 && radius < 1.0 {
            Ok(Self(radius))
        } else {
            Err(invalid(format!(
                "evaluation radius must lie in (0, 1), got {radius}"
            )))
        }
    }

    pub fn radius(&self) -> f64 {
        self.0
    }

    pub fn check(&self, value: Complex64) -> Result<()> {
        let modulus = value.norm();
        // A few ulps of slack so that r·e^{it} with r = r_max passes.
        if modulus.is_finite() && modulus <= self.0 * (1.0 + 4.0 * f64::EPSILON) {
            Ok(())
        } else {
            Err(BdkError::Domain {
                modulus,
                radius: self.0,
            })
        }
    }

    pub fn check_point(&self, point: BiPoint) -> Result<()> {
        self.check(point.z)?;
        self.check(point.w)
    }

    /// Geometric tail bound `scale * r^(level+1) / (1 - r)`.
    pub fn tail_bound(&self, level: usize, scale: f64) -> f64 {
        geometric_tail(self.0, level, scale)
    }
}

impl Default for RadiusGuard {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

impl TryFrom<f64> for RadiusGuard {
    type Error = BdkError;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RadiusGuard> for f64 {
    fn from(value: RadiusGuard) -> f64 {
        value.0
    }
}

pub(crate) fn geometric_tail(radius: f64, level: usize, scale: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    scale * radius.powi(level as i32 + 1) / (1.0 - radius)
}

/// Checks `|a| < 1` strictly, as required for Möbius shifts and Szegő weights.
pub(crate) fn check_open_disk(value: Complex64, what: &str) -> Result<()> {
    let modulus = value.norm();
    if modulus.is_finite() && modulus < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} must lie in the open unit disk, got modulus {modulus}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_rejects_outside_points() {
        let guard = RadiusGuard::default();
        assert!(guard.check(Complex64::new(0.9, 0.0)).is_ok());
        assert!(matches!(
            guard.check(Complex64::new(0.0, 0.95)),
            Err(BdkError::Domain { .. })
        ));
        assert!(RadiusGuard::new(1.0).is_err());
        assert!(RadiusGuard::new(0.0).is_err());
    }

    #[test]
    fn tail_bound_is_geometric() {
        let guard = RadiusGuard::new(0.5).unwrap();
        assert!((guard.tail_bound(3, 1.0) - 0.0625 / 0.5).abs() < 1e-15);
    }
}
