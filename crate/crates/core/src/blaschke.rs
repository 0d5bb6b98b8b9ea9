//! Finite Blaschke products and orthonormal bases of their model spaces.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, BdkError, Result};
use crate::linalg;
use crate::series::Series1D;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Zeros must satisfy |a| ≤ 1 − this margin.
pub const ZERO_MARGIN: f64 = 1e-12;

/// γ·∏ (z − a_k)/(1 − ā_k z) with |γ| = 1 and at least one zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlaschkeRepr", into = "BlaschkeRepr")]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    gamma: Complex64,
}

#[derive(Serialize, Deserialize)]
struct BlaschkeRepr {
    zeros: Vec<[f64; 2]>,
    gamma: [f64; 2],
}

impl TryFrom<BlaschkeRepr> for BlaschkeProduct {
    type Error = BdkError;
    fn try_from(value: BlaschkeRepr) -> Result<Self> {
        Self::new(
            value
                .zeros
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
            Complex64::new(value.gamma[0], value.gamma[1]),
        )
    }
}

impl From<BlaschkeProduct> for BlaschkeRepr {
    fn from(value: BlaschkeProduct) -> Self {
        BlaschkeRepr {
            zeros: value.zeros.iter().map(|c| [c.re, c.im]).collect(),
            gamma: [value.gamma.re, value.gamma.im],
        }
    }
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>, gamma: Complex64) -> Result<Self> {
        if zeros.is_empty() {
            return Err(invalid("a Blaschke product needs at least one zero"));
        }
        if let Some(bad) = zeros
            .iter()
            .find(|a| !a.norm().is_finite() || a.norm() > 1.0 - ZERO_MARGIN)
        {
            return Err(invalid(format!(
                "Blaschke zero {bad} is not inside the unit disk"
            )));
        }
        if !gamma.norm().is_finite() || (gamma.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "unimodular constant {gamma} has modulus != 1"
            )));
        }
        Ok(Self { zeros, gamma })
    }

    /// The identity map z.
    pub fn identity() -> Self {
        Self {
            zeros: vec![ZERO],
            gamma: ONE,
        }
    }

    /// z^d.
    pub fn power(degree: usize) -> Result<Self> {
        Self::new(vec![ZERO; degree], ONE)
    }

    /// The single factor (z − a)/(1 − ā z).
    pub fn factor(a: Complex64) -> Result<Self> {
        Self::new(vec![a], ONE)
    }

    /// The involutive automorphism (a − z)/(1 − ā z).
    pub fn automorphism(a: Complex64) -> Result<Self> {
        Self::new(vec![a], -ONE)
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.gamma, |acc, a| acc * (z - a) / (ONE - a.conj() * z))
    }

    pub fn at_origin(&self) -> Complex64 {
        self.eval(ZERO)
    }

    /// Taylor coefficients through `cap` (cap ≥ degree).
    pub fn taylor(&self, cap: usize) -> Result<Series1D> {
        if cap < self.degree() {
            return Err(invalid(format!(
                "cap {cap} is below the Blaschke degree {}",
                self.degree()
            )));
        }
        Ok(self.taylor_unchecked(cap))
    }

    pub(crate) fn taylor_unchecked(&self, cap: usize) -> Series1D {
        self.zeros
            .iter()
            .fold(Series1D::constant(self.gamma, cap), |acc, a| {
                acc.mul_blaschke_factor(*a, cap)
            })
    }

    /// Smallest cap at which the Taylor tail drops below `tol`.
    pub fn safe_cap(&self, tol: f64) -> usize {
        let rho = self.zeros.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let d = self.degree();
        if rho == 0.0 {
            return d;
        }
        let extra = (tol.ln() / rho.ln()).ceil().max(0.0) as usize;
        d + extra + 4 * d
    }

    /// Numerator γ∏(z − a_k) and denominator ∏(1 − ā_k z), ascending coefficients.
    pub(crate) fn numerator_denominator(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut num = vec![self.gamma];
        let mut den = vec![ONE];
        for a in &self.zeros {
            num = poly_mul(&num, &[-a, ONE]);
            den = poly_mul(&den, &[ONE, -a.conj()]);
        }
        (num, den)
    }

    /// All solutions of b(z) = target inside the unit disk, with repetition.
    ///
    /// Roots of the cleared numerator are found as companion-matrix
    /// eigenvalues and polished by Newton steps on the rational function.
    pub fn preimages(&self, target: Complex64) -> Result<Vec<Complex64>> {
        if !target.norm().is_finite() || target.norm() >= 1.0 {
            return Err(invalid(format!(
                "target {target} is not inside the unit disk"
            )));
        }
        let (num, den) = self.numerator_denominator();
        let poly: Vec<Complex64> = num.iter().zip(&den).map(|(n, d)| n - target * d).collect();
        let roots = polynomial_roots(&poly)?;
        let deriv = |z: Complex64| {
            let h = 1e-7;
            (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
        };
        Ok(roots
            .into_iter()
            .map(|mut z| {
                for _ in 0..3 {
                    let d = deriv(z);
                    if d.norm() < 1e-6 {
                        break;
                    }
                    let step = (self.eval(z) - target) / d;
                    if !step.is_finite() || step.norm() > 1e-3 {
                        break;
                    }
                    z -= step;
                }
                z
            })
            .filter(|z| z.norm() <= 1.0 - ZERO_MARGIN)
            .collect())
    }

    /// The composition self∘inner, again a finite Blaschke product.
    pub fn compose(&self, inner: &BlaschkeProduct) -> Result<Self> {
        let mut zeros = Vec::with_capacity(self.degree() * inner.degree());
        for a in &self.zeros {
            zeros.extend(inner.preimages(*a)?);
        }
        if zeros.len() != self.degree() * inner.degree() {
            return Err(BdkError::Linalg("lost preimages while composing".into()));
        }
        let probe = Complex64::new(0.123, 0.231);
        let unit = Self {
            zeros: zeros.clone(),
            gamma: ONE,
        }
        .eval(probe);
        let gamma = self.eval(inner.eval(probe)) / unit;
        Self::new(zeros, gamma / gamma.norm())
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of Σ c_k z^k (ascending coefficients) via the companion matrix.
pub(crate) fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let companion = Mat::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -coeffs[degree - 1 - j] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    linalg::eigenvalues(companion.as_ref())
}

/// Orthonormal basis of K_b = H² ⊖ b·H² by the Takenaka–Malmquist system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpaceBasis {
    elements: Vec<Series1D>,
    source: BlaschkeProduct,
}

impl ModelSpaceBasis {
    pub fn elements(&self) -> &[Series1D] {
        &self.elements
    }

    pub fn source(&self) -> &BlaschkeProduct {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (m, a) in self.elements.iter().enumerate() {
            for (n, b) in self.elements.iter().enumerate() {
                let target = if m == n { ONE } else { ZERO };
                worst = worst.max((a.inner(b) - target).norm());
            }
        }
        worst
    }
}

/// α_m = √(1−|a_{m+1}|²)/(1−ā_{m+1}z) · ∏_{k≤m} (z−a_k)/(1−ā_k z), through `cap`.
pub fn model_space_basis(b: &BlaschkeProduct, cap: usize) -> ModelSpaceBasis {
    let mut prefix = Series1D::constant(ONE, cap);
    let mut elements = Vec::with_capacity(b.degree());
    for a in b.zeros() {
        let scale = Complex64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
        let alpha = prefix.div_szego(*a, cap);
        let alpha = Series1D::new(alpha.coeffs().iter().map(|c| c * scale).collect())
            .expect("finite coefficients");
        elements.push(alpha);
        prefix = prefix.mul_blaschke_factor(*a, cap);
    }
    ModelSpaceBasis {
        elements,
        source: b.clone(),
    }
}

/// Free-function form of [`BlaschkeProduct::taylor`].
pub fn blaschke_taylor(b: &BlaschkeProduct, cap: usize) -> Result<Series1D> {
    b.taylor(cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn taylor_examples() {
        let id = BlaschkeProduct::identity().taylor(4).unwrap();
        assert_eq!(id.coeffs(), &[ZERO, ONE, ZERO, ZERO, ZERO]);
        let half = BlaschkeProduct::factor(c(0.5)).unwrap().taylor(20).unwrap();
        assert!((half.coeff(0) - c(-0.5)).norm() < 1e-15);
        for k in 1..=20 {
            assert!((half.coeff(k) - c(0.75 * 0.5f64.powi(k as i32 - 1))).norm() < 1e-15);
        }
        let sq = BlaschkeProduct::power(2).unwrap().taylor(3).unwrap();
        assert_eq!(sq.coeffs(), &[ZERO, ZERO, ONE, ZERO]);
        assert!(BlaschkeProduct::power(3).unwrap().taylor(2).is_err());
    }

    #[test]
    fn invalid_products_rejected() {
        assert!(BlaschkeProduct::new(vec![c(1.0)], ONE).is_err());
        assert!(BlaschkeProduct::new(vec![c(0.2)], c(2.0)).is_err());
        assert!(BlaschkeProduct::new(vec![], ONE).is_err());
        let text = r#"{"zeros":[[0.5,0.0]],"gamma":[1.0,0.0]}"#;
        let b: BlaschkeProduct = serde_json::from_str(text).unwrap();
        assert_eq!(b.zeros(), &[c(0.5)]);
        assert_eq!(serde_json::to_string(&b).unwrap(), text);
    }

    #[test]
    fn model_space_examples() {
        let k = model_space_basis(&BlaschkeProduct::identity(), 5);
        assert_eq!(k.len(), 1);
        assert_eq!(k.elements()[0].coeffs()[..2], [ONE, ZERO]);
        let k = model_space_basis(&BlaschkeProduct::power(2).unwrap(), 5);
        assert_eq!(k.elements()[1].coeffs()[..3], [ZERO, ONE, ZERO]);
        let k = model_space_basis(&BlaschkeProduct::factor(c(0.5)).unwrap(), 60);
        for j in 0..=60 {
            let expected = 0.75f64.sqrt() * 0.5f64.powi(j);
            assert!((k.elements()[0].coeff(j as usize) - c(expected)).norm() < 1e-15);
        }
    }

    #[test]
    fn preimages_of_square() {
        let b = BlaschkeProduct::power(2).unwrap();
        let mut roots = b.preimages(c(0.25)).unwrap();
        roots.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((roots[0] - c(-0.5)).norm() < 1e-12);
        assert!((roots[1] - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn composition_matches_pointwise() {
        let outer = BlaschkeProduct::new(vec![c(0.3), Complex64::new(0.0, -0.4)], ONE).unwrap();
        let inner = BlaschkeProduct::factor(c(0.5)).unwrap();
        let comp = outer.compose(&inner).unwrap();
        for z in [c(0.1), Complex64::new(-0.3, 0.4), c(0.7)] {
            assert!((comp.eval(z) - outer.eval(inner.eval(z))).norm() < 1e-10);
        }
    }
}
