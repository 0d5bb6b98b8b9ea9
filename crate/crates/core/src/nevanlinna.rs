//! Nevanlinna counting functions of finite Blaschke products, the
//! change-of-variable formula for ‖f∘φ‖₂ and Littlewood's subordination
//! bounds.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::error::{invalid, BdkError, Result};
use crate::series::Series1D;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Targets closer than this to φ(0) are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Preimages must reproduce the target to this accuracy.
pub const PREIMAGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingResult {
    pub target: Complex64,
    /// Solutions of φ(z) = w in the disk, repeated by multiplicity.
    pub preimages: Vec<Complex64>,
    /// Σ log(1/|z_j|).
    pub value: f64,
}

fn check_target(phi: &BlaschkeProduct, w: Complex64) -> Result<()> {
    if !w.norm().is_finite() || w.norm() >= 1.0 {
        return Err(invalid(format!("target {w} is not inside the unit disk")));
    }
    if (w - phi.at_origin()).norm() <= SINGULAR_TOL {
        return Err(BdkError::SingularTarget(w));
    }
    Ok(())
}

/// N_φ(w) from the roots of φ(z) = w.
pub fn counting_function(phi: &BlaschkeProduct, w: Complex64) -> Result<CountingResult> {
    check_target(phi, w)?;
    let preimages = phi.preimages(w)?;
    if let Some(bad) = preimages
        .iter()
        .find(|z| (phi.eval(**z) - w).norm() > PREIMAGE_TOL)
    {
        return Err(BdkError::Linalg(format!(
            "inaccurate preimage {bad} of {w}"
        )));
    }
    let value = preimages.iter().map(|z| -z.norm().ln()).sum();
    Ok(CountingResult {
        target: w,
        preimages,
        value,
    })
}

/// log|(1 − c̄w)/(c − w)| with c = φ(0); equals N_φ(w) for inner φ.
pub fn counting_closed_form(phi: &BlaschkeProduct, w: Complex64) -> Result<f64> {
    check_target(phi, w)?;
    let c = phi.at_origin();
    Ok(((ONE - c.conj() * w) / (c - w)).norm().ln())
}

/// One CSV record `w_re,w_im,N_root,N_closed,abs_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub w_re: f64,
    pub w_im: f64,
    #[serde(rename = "N_root")]
    pub n_root: f64,
    #[serde(rename = "N_closed")]
    pub n_closed: f64,
    pub abs_gap: f64,
}

/// Root-based and closed-form counting functions at one target.
pub fn counting_row(phi: &BlaschkeProduct, w: Complex64) -> Result<CountingRow> {
    let root = counting_function(phi, w)?.value;
    let closed = counting_closed_form(phi, w)?;
    Ok(CountingRow {
        w_re: w.re,
        w_im: w.im,
        n_root: root,
        n_closed: closed,
        abs_gap: (root - closed).abs(),
    })
}

/// Polar product quadrature on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes in the radial variable.
    pub radial: usize,
    /// Uniform angular nodes.
    pub angular: usize,
    /// Integrate in s with r = s², which smooths the r·log r behaviour at the center.
    pub square_radius: bool,
    /// Center the polar grid at φ(0) through the disk automorphism exchanging 0 and φ(0).
    pub recenter: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial: 64,
            angular: 128,
            square_radius: true,
            recenter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroReport {
    /// ‖f∘φ‖² − |f(φ(0))|².
    pub lhs: f64,
    /// 2∫|f′|² N_φ dA/π.
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// Taylor cap used for f∘φ.
    pub cap: usize,
}

fn composed_norm_sqr(f: &Series1D, phi: &BlaschkeProduct) -> Result<(f64, usize)> {
    let inner_cap = phi.safe_cap(1e-17);
    let cap = inner_cap * f.degree().max(1);
    let composed = f.compose(&phi.taylor(inner_cap.max(phi.degree()))?, cap)?;
    Ok((composed.norm_sqr(), cap))
}

/// Both sides of ‖f∘φ‖² − |f(φ(0))|² = 2∫_D |f′(w)|² N_φ(w) dA(w)/π.
///
/// The left side comes from Taylor coefficients of f∘φ; the right side
/// from polar quadrature with root-based N_φ at every node.
pub fn shapiro_change_of_variable(
    f: &Series1D,
    phi: &BlaschkeProduct,
    quad: QuadratureConfig,
) -> Result<ShapiroReport> {
    if quad.radial == 0 || quad.angular == 0 {
        return Err(invalid("quadrature needs at least one node per direction"));
    }
    let c = phi.at_origin();
    let (norm_sqr, cap) = composed_norm_sqr(f, phi)?;
    let lhs = norm_sqr - f.eval(c).norm_sqr();

    let df = f.derivative();
    let rule = GaussLegendre::new(quad.radial).map_err(|e| invalid(e.to_string()))?;
    let center = if quad.recenter {
        c
    } else {
        Complex64::new(0.0, 0.0)
    };
    // Map from the integration variable u to w, with Jacobian |dw/du|².
    let to_w = |u: Complex64| -> (Complex64, f64) {
        if quad.recenter {
            let den = ONE - center.conj() * u;
            (
                (center - u) / den,
                ((1.0 - center.norm_sqr()) / den.norm_sqr()).powi(2),
            )
        } else {
            (u, 1.0)
        }
    };
    let dt = std::f64::consts::TAU / quad.angular as f64;
    let mut offset = 0.0;
    let mut acc = 0.0;
    'attempt: for _ in 0..4 {
        acc = 0.0;
        for &(x, wt) in rule.as_node_weight_pairs() {
            let s = 0.5 * (x + 1.0);
            let (r, dr) = if quad.square_radius {
                (s * s, 2.0 * s)
            } else {
                (s, 1.0)
            };
            let weight = 0.5 * wt * dr * r * dt;
            for j in 0..quad.angular {
                let u = Complex64::from_polar(r, offset + dt * j as f64);
                let (w, jac) = to_w(u);
                let n = match counting_function(phi, w) {
                    Ok(res) => res.value,
                    Err(BdkError::SingularTarget(_)) => {
                        offset += 0.5 * dt;
                        continue 'attempt;
                    }
                    Err(e) => return Err(e),
                };
                acc += weight * df.eval(w).norm_sqr() * jac * n;
            }
        }
        break;
    }
    let rhs = 2.0 * acc / std::f64::consts::PI;
    let abs_gap = (lhs - rhs).abs();
    let rel_gap = abs_gap / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(ShapiroReport {
        lhs,
        rhs,
        abs_gap,
        rel_gap,
        cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodReport {
    /// ‖f∘φ‖₂ / ‖f‖₂.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    /// Truncation error allowance on the ratio.
    pub slack: f64,
    pub holds: bool,
}

/// √((1−|φ(0)|)/(1+|φ(0)|)) ≤ ‖f∘φ‖₂/‖f‖₂ ≤ √((1+|φ(0)|)/(1−|φ(0)|)).
pub fn littlewood_subordination_check(
    f: &Series1D,
    phi: &BlaschkeProduct,
) -> Result<LittlewoodReport> {
    if f.is_zero() {
        return Err(invalid("f must be nonzero"));
    }
    let rho = phi.at_origin().norm();
    let upper = ((1.0 + rho) / (1.0 - rho)).sqrt();
    let lower = 1.0 / upper;
    let (norm_sqr, _) = composed_norm_sqr(f, phi)?;
    let ratio = (norm_sqr / f.norm_sqr()).sqrt();
    let slack = 1e-12;
    Ok(LittlewoodReport {
        ratio,
        lower,
        upper,
        slack,
        holds: ratio >= lower - slack && ratio <= upper + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_counting() {
        let phi = BlaschkeProduct::identity();
        let w = Complex64::new(0.5, 0.0);
        let n = counting_function(&phi, w).unwrap();
        assert!((n.value - 2f64.ln()).abs() < 1e-12);
        assert!(matches!(
            counting_function(&phi, Complex64::new(0.0, 0.0)),
            Err(BdkError::SingularTarget(_))
        ));
    }

    #[test]
    fn shapiro_identity_case() {
        let f = Series1D::identity(1);
        let r = shapiro_change_of_variable(
            &f,
            &BlaschkeProduct::identity(),
            QuadratureConfig::default(),
        )
        .unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-6, "rhs {}", r.rhs);
    }
}
