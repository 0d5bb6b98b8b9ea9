//! Shared fixtures for the benchmarks.

use bdk_core::{Complex64, Series2D};

/// The generator z − w.
pub fn z_minus_w() -> Series2D {
    let one = Complex64::new(1.0, 0.0);
    Series2D::from_terms(&[(one, 1, 0), (-one, 0, 1)])
}

/// The generator z² − w³.
pub fn z2_minus_w3() -> Series2D {
    let one = Complex64::new(1.0, 0.0);
    Series2D::from_terms(&[(one, 2, 0), (-one, 0, 3)])
}
