//! Verification reports and the fixed test grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::BiPoint;

/// Seed of the pseudo-random part of [`standard_grid`].
pub const GRID_SEED: u64 = 0x5EED;

/// Radius of the bidisk sampled by [`standard_grid`].
pub const GRID_RADIUS: f64 = 0.5;

/// A pair (λμ, zw) at which a two-point kernel identity is checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub first: BiPoint,
    pub second: BiPoint,
}

impl PointPair {
    pub fn new(first: BiPoint, second: BiPoint) -> Self {
        Self { first, second }
    }
}

/// Uniform sample of the disk of the given radius.
pub fn disk_sample(rng: &mut impl Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, t)
}

/// `count` seeded points of the bidisk of the given radius.
pub fn seeded_points(seed: u64, count: usize, radius: f64) -> Vec<BiPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = disk_sample(&mut rng, radius);
            BiPoint::new(z, disk_sample(&mut rng, radius))
        })
        .collect()
}

/// 10 seeded pairs in the radius-0.5 bidisk followed by 5 structured pairs
/// on the diagonal and the coordinate axes.
pub fn standard_grid() -> Vec<PointPair> {
    let pts = seeded_points(GRID_SEED, 20, GRID_RADIUS);
    let mut out: Vec<PointPair> = pts.chunks(2).map(|p| PointPair::new(p[0], p[1])).collect();
    let c = Complex64::new;
    out.extend([
        PointPair::new(BiPoint::origin(), BiPoint::origin()),
        PointPair::new(BiPoint::real(0.3, 0.3), BiPoint::real(0.3, 0.3)),
        PointPair::new(
            BiPoint::new(c(0.0, 0.35), c(0.0, 0.35)),
            BiPoint::real(-0.25, -0.25),
        ),
        PointPair::new(BiPoint::real(0.45, 0.0), BiPoint::real(-0.2, 0.0)),
        PointPair::new(
            BiPoint::real(0.0, 0.45),
            BiPoint::new(c(0.0, 0.0), c(0.0, -0.2)),
        ),
    ]);
    out
}

/// Outcome of a numerical identity check over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub identity: String,
    pub level: usize,
    pub grid: Vec<PointPair>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
    pub tolerance: f64,
}

impl Report {
    pub fn new(
        identity: impl Into<String>,
        level: usize,
        grid: Vec<PointPair>,
        residuals: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let finite = residuals.iter().all(|r| r.is_finite());
        Self {
            identity: identity.into(),
            level,
            grid,
            residuals,
            max_residual,
            pass: finite && max_residual <= tolerance,
            tolerance,
        }
    }

    /// Combines reports of the same identity into one.
    pub fn merge(identity: impl Into<String>, parts: Vec<Report>, tolerance: f64) -> Self {
        let level = parts.iter().map(|r| r.level).max().unwrap_or(0);
        let mut grid = Vec::new();
        let mut residuals = Vec::new();
        for p in parts {
            grid.extend(p.grid);
            residuals.extend(p.residuals);
        }
        Self::new(identity, level, grid, residuals, tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_deterministic_and_inside_radius() {
        let a = standard_grid();
        let b = standard_grid();
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
        for p in &a {
            assert!(p.first.max_modulus() <= GRID_RADIUS && p.second.max_modulus() <= GRID_RADIUS);
        }
    }

    #[test]
    fn report_pass_flag() {
        let r = Report::new("x", 4, vec![], vec![1e-4, 2e-4], 1e-3);
        assert!(r.pass);
        assert_eq!(r.max_residual, 2e-4);
        assert!(!Report::new("x", 4, vec![], vec![f64::NAN], 1e-3).pass);
    }
}
