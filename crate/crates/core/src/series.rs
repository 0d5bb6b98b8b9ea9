//! Truncated Taylor series in one and two variables with the Hardy-space
//! inner product (monomials are orthonormal).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{check_open_disk, RadiusGuard, Variable};
use crate::error::{invalid, BdkError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Caps (Nz, Nw) of a bivariate coefficient grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Caps {
    pub z: usize,
    pub w: usize,
}

impl Caps {
    pub fn new(z: usize, w: usize) -> Self {
        Self { z, w }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    /// Number of coefficients in the grid.
    pub fn grid_len(&self) -> usize {
        (self.z + 1) * (self.w + 1)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i <= self.z && j <= self.w
    }

    pub fn max(self, other: Caps) -> Caps {
        Caps::new(self.z.max(other.z), self.w.max(other.w))
    }

    /// Row-major index of the monomial z^i w^j.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * (self.w + 1) + j
    }

    pub fn exponents(&self, index: usize) -> (usize, usize) {
        (index / (self.w + 1), index % (self.w + 1))
    }
}

/// Truncated one-variable Taylor series c_0 + c_1 z + ... + c_N z^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Series1D {
    coeffs: Vec<Complex64>,
}

impl Series1D {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("a series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite Taylor coefficient"));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(cap: usize) -> Self {
        Self {
            coeffs: vec![ZERO; cap + 1],
        }
    }

    pub fn constant(value: Complex64, cap: usize) -> Self {
        let mut s = Self::zero(cap);
        s.coeffs[0] = value;
        s
    }

    /// The coordinate function z at the given cap (cap ≥ 1).
    pub fn identity(cap: usize) -> Self {
        Self::monomial(1, ONE, cap.max(1))
    }

    pub fn monomial(degree: usize, value: Complex64, cap: usize) -> Self {
        let mut s = Self::zero(cap.max(degree));
        s.coeffs[degree] = value;
        s
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Highest index with a nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != ZERO).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &Series1D) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn truncated(&self, cap: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(cap + 1, ZERO);
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        Self { coeffs }
    }

    /// Product truncated at `cap`.
    pub fn mul_trunc(&self, other: &Series1D, cap: usize) -> Self {
        let mut out = vec![ZERO; cap + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(cap + 1) {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(cap + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Division by (1 − ā z), truncated at `cap`.
    pub fn div_szego(&self, a: Complex64, cap: usize) -> Self {
        let abar = a.conj();
        let mut out = vec![ZERO; cap + 1];
        let mut carry = ZERO;
        for (k, slot) in out.iter_mut().enumerate() {
            carry = self.coeff(k) + abar * carry;
            *slot = carry;
        }
        Self { coeffs: out }
    }

    /// Multiplication by the Blaschke factor (z − a)/(1 − ā z), truncated at `cap`.
    pub fn mul_blaschke_factor(&self, a: Complex64, cap: usize) -> Self {
        let mut numer = vec![ZERO; cap + 1];
        for (k, slot) in numer.iter_mut().enumerate() {
            let shifted = if k == 0 { ZERO } else { self.coeff(k - 1) };
            *slot = shifted - a * self.coeff(k);
        }
        Self { coeffs: numer }.div_szego(a, cap)
    }

    /// Composition self∘inner truncated at `cap` (Horner substitution).
    pub fn compose(&self, inner: &Series1D, cap: usize) -> Result<Self> {
        if inner.coeff(0).norm() >= 1.0 {
            return Err(invalid("inner series leaves the unit disk at the origin"));
        }
        let mut acc = Self::zero(cap);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_trunc(inner, cap);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }
}

impl TryFrom<Vec<[f64; 2]>> for Series1D {
    type Error = BdkError;
    fn try_from(value: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(
            value
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<Series1D> for Vec<[f64; 2]> {
    fn from(value: Series1D) -> Self {
        value.coeffs.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

/// Truncated bivariate Taylor series Σ c_ij z^i w^j, 0 ≤ i ≤ Nz, 0 ≤ j ≤ Nw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Series2DRepr", into = "Series2DRepr")]
pub struct Series2D {
    caps: Caps,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct Series2DRepr {
    caps: [usize; 2],
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<Series2DRepr> for Series2D {
    type Error = BdkError;
    fn try_from(value: Series2DRepr) -> Result<Self> {
        let caps = Caps::new(value.caps[0], value.caps[1]);
        let coeffs = value
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Self::from_grid(caps, coeffs)
    }
}

impl From<Series2D> for Series2DRepr {
    fn from(value: Series2D) -> Self {
        Series2DRepr {
            caps: [value.caps.z, value.caps.w],
            coeffs: value.coeffs.into_iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl Series2D {
    pub fn zero(caps: Caps) -> Self {
        Self {
            caps,
            coeffs: vec![ZERO; caps.grid_len()],
        }
    }

    /// Builds a series from a row-major coefficient grid.
    pub fn from_grid(caps: Caps, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != caps.grid_len() {
            return Err(invalid(format!(
                "grid with caps ({}, {}) needs {} coefficients, got {}",
                caps.z,
                caps.w,
                caps.grid_len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite Taylor coefficient"));
        }
        Ok(Self { caps, coeffs })
    }

    pub fn from_fn(caps: Caps, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut s = Self::zero(caps);
        for i in 0..=caps.z {
            for j in 0..=caps.w {
                s.coeffs[caps.index(i, j)] = f(i, j);
            }
        }
        s
    }

    /// Builds the smallest grid holding the given terms (c, i, j).
    pub fn from_terms(terms: &[(Complex64, usize, usize)]) -> Self {
        let caps = terms
            .iter()
            .fold(Caps::new(0, 0), |acc, &(_, i, j)| acc.max(Caps::new(i, j)));
        let mut s = Self::zero(caps);
        for &(c, i, j) in terms {
            s.coeffs[caps.index(i, j)] += c;
        }
        s
    }

    pub fn constant(value: Complex64) -> Self {
        Self::from_terms(&[(value, 0, 0)])
    }

    pub fn monomial(i: usize, j: usize) -> Self {
        Self::from_terms(&[(ONE, i, j)])
    }

    /// The coordinate function of the given variable.
    pub fn coordinate(var: Variable) -> Self {
        match var {
            Variable::Z => Self::monomial(1, 0),
            Variable::W => Self::monomial(0, 1),
        }
    }

    /// A one-variable series placed in the given variable.
    pub fn from_univariate(series: &Series1D, var: Variable) -> Self {
        let caps = match var {
            Variable::Z => Caps::new(series.cap(), 0),
            Variable::W => Caps::new(0, series.cap()),
        };
        let mut s = Self::zero(caps);
        s.coeffs.copy_from_slice(series.coeffs());
        s
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Row-major coefficient grid.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if self.caps.contains(i, j) {
            self.coeffs[self.caps.index(i, j)]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(self.caps.contains(i, j), "coefficient outside the caps");
        let idx = self.caps.index(i, j);
        self.coeffs[idx] = value;
    }

    /// Nonzero terms (c, i, j).
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, usize, usize)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(k, c)| {
                let (i, j) = self.caps.exponents(k);
                (*c, i, j)
            })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Largest z- and w-exponents carrying a nonzero coefficient.
    pub fn support_caps(&self) -> Caps {
        self.terms()
            .fold(Caps::new(0, 0), |acc, (_, i, j)| acc.max(Caps::new(i, j)))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Copy at new caps: coefficients outside are dropped, new ones are zero.
    pub fn truncated(&self, caps: Caps) -> Self {
        let mut s = Self::zero(caps);
        for i in 0..=caps.z.min(self.caps.z) {
            for j in 0..=caps.w.min(self.caps.w) {
                s.coeffs[caps.index(i, j)] = self.coeffs[self.caps.index(i, j)];
            }
        }
        s
    }

    /// Multiplication by z^dz w^dw, truncated at `caps`.
    pub fn shifted(&self, dz: usize, dw: usize, caps: Caps) -> Self {
        let mut s = Self::zero(caps);
        for (c, i, j) in self.terms() {
            if caps.contains(i + dz, j + dw) {
                s.coeffs[caps.index(i + dz, j + dw)] = c;
            }
        }
        s
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            caps: self.caps,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn eval_unchecked(&self, z: Complex64, w: Complex64) -> Complex64 {
        let stride = self.caps.w + 1;
        self.coeffs.chunks(stride).rev().fold(ZERO, |acc, row| {
            acc * z + row.iter().rev().fold(ZERO, |r, c| r * w + c)
        })
    }

    fn zip_with(&self, other: &Series2D, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let caps = self.caps.max(other.caps);
        Self::from_fn(caps, |i, j| op(self.coeff(i, j), other.coeff(i, j)))
    }
}

/// Hardy-space inner product Σ f_ij conj(g_ij); missing coefficients are zero.
pub fn inner_product(f: &Series2D, g: &Series2D) -> Result<Complex64> {
    if f.coeffs.iter().chain(&g.coeffs).any(|c| !c.is_finite()) {
        return Err(invalid("non-finite coefficient in inner product"));
    }
    let zc = f.caps.z.min(g.caps.z);
    let wc = f.caps.w.min(g.caps.w);
    let mut acc = ZERO;
    for i in 0..=zc {
        let fr = &f.coeffs[f.caps.index(i, 0)..=f.caps.index(i, wc)];
        let gr = &g.coeffs[g.caps.index(i, 0)..=g.caps.index(i, wc)];
        acc += fr
            .iter()
            .zip(gr)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>();
    }
    Ok(acc)
}

/// Coefficientwise convolution truncated to `caps`.
pub fn multiply(f: &Series2D, g: &Series2D, caps: Caps) -> Series2D {
    let mut out = Series2D::zero(caps);
    let gt: Vec<_> = g.terms().collect();
    for (a, i, j) in f.terms() {
        for &(b, k, l) in &gt {
            if caps.contains(i + k, j + l) {
                out.coeffs[caps.index(i + k, j + l)] += a * b;
            }
        }
    }
    out
}

/// Taylor grid of f/(1 − ā·var) truncated at `caps`.
pub fn geometric_weight(f: &Series2D, a: Complex64, var: Variable, caps: Caps) -> Result<Series2D> {
    check_open_disk(a, "geometric weight point")?;
    let mut out = f.truncated(caps);
    let abar = a.conj();
    match var {
        Variable::Z => {
            for i in 1..=caps.z {
                for j in 0..=caps.w {
                    let prev = out.coeffs[caps.index(i - 1, j)];
                    out.coeffs[caps.index(i, j)] += abar * prev;
                }
            }
        }
        Variable::W => {
            for i in 0..=caps.z {
                for j in 1..=caps.w {
                    let prev = out.coeffs[caps.index(i, j - 1)];
                    out.coeffs[caps.index(i, j)] += abar * prev;
                }
            }
        }
    }
    Ok(out)
}

/// Taylor grid of f(θ(z), φ(w)) through `caps`.
pub fn compose_pair(
    f: &Series2D,
    theta: &Series1D,
    phi: &Series1D,
    caps: Caps,
) -> Result<Series2D> {
    if theta.coeff(0).norm() >= 1.0 || phi.coeff(0).norm() >= 1.0 {
        return Err(invalid(
            "composition symbol leaves the unit disk at the origin",
        ));
    }
    let fcaps = f.support_caps();
    // h_i(w) = Σ_j c_ij φ(w)^j by Horner in w.
    let rows: Vec<Series1D> = (0..=fcaps.z)
        .map(|i| {
            let mut acc = Series1D::zero(caps.w);
            for j in (0..=fcaps.w).rev() {
                acc = acc.mul_trunc(phi, caps.w);
                acc.coeffs[0] += f.coeff(i, j);
            }
            acc
        })
        .collect();
    // Horner in z: acc ← acc·θ(z) + h_i(w).
    let theta = theta.truncated(caps.z);
    let mut acc = Series2D::zero(caps);
    for row in rows.iter().rev() {
        let mut next = Series2D::zero(caps);
        for (t, tk) in theta.coeffs().iter().enumerate() {
            if *tk == ZERO {
                continue;
            }
            for i in 0..=caps.z - t {
                for j in 0..=caps.w {
                    let v = acc.coeffs[caps.index(i, j)];
                    if v != ZERO {
                        next.coeffs[caps.index(i + t, j)] += tk * v;
                    }
                }
            }
        }
        for (j, c) in row.coeffs().iter().enumerate() {
            next.coeffs[caps.index(0, j)] += c;
        }
        acc = next;
    }
    Ok(acc)
}

/// Horner evaluation guarded by the evaluation radius.
pub fn evaluate(
    f: &Series2D,
    lambda: Complex64,
    mu: Complex64,
    guard: RadiusGuard,
) -> Result<Complex64> {
    guard.check(lambda)?;
    guard.check(mu)?;
    Ok(f.eval_unchecked(lambda, mu))
}

impl Add for &Series2D {
    type Output = Series2D;
    fn add(self, rhs: &Series2D) -> Series2D {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Series2D {
    type Output = Series2D;
    fn sub(self, rhs: &Series2D) -> Series2D {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Series2D {
    type Output = Series2D;
    /// Exact product on the enlarged caps.
    fn mul(self, rhs: &Series2D) -> Series2D {
        let caps = Caps::new(self.caps.z + rhs.caps.z, self.caps.w + rhs.caps.w);
        multiply(self, rhs, caps)
    }
}

impl Mul<Complex64> for &Series2D {
    type Output = Series2D;
    fn mul(self, rhs: Complex64) -> Series2D {
        self.scaled(rhs)
    }
}

impl Neg for &Series2D {
    type Output = Series2D;
    fn neg(self) -> Series2D {
        self.scaled(-ONE)
    }
}
