//! Closed forms for the submodule [z − w]: explicit bases, the series for
//! Σ₁, the two scalar lemmas behind the bound Σ₁ ≤ 2, and closed-form
//! example submodules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::domain::BiPoint;
use crate::error::{invalid, BdkError, Result};
use crate::invariants::{hs_norm_core, InvariantValue, Quantity, Truncation};
use crate::series::{inner_product, Caps, Series2D};
use crate::submodule::{GeneratorSource, SubmoduleApprox, DEFAULT_RANK_TOL};

/// Default cutoff for the Σ₁ series.
pub const DEFAULT_CUTOFF: usize = 10_000;

/// Upper bound on Σ₁ for [z − w].
pub const SIGMA1_BOUND: f64 = 2.0;

/// Upper bound on ‖C‖²_HS for [θ(z) − φ(w)].
pub const HS_BOUND: f64 = 5.0;

/// Σ₁ of [z − w] at the origin: π²/6 − 1.
pub fn sigma1_at_origin() -> f64 {
    std::f64::consts::PI.powi(2) / 6.0 - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZwBasisKind {
    /// e_n, spanning the quotient [z − w]^⊥.
    Quotient,
    /// φ_n, spanning M ⊖ zM.
    ZWedge,
    /// ψ_n, spanning M ⊖ wM.
    WWedge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZwBasisElement {
    pub kind: ZwBasisKind,
    pub index: usize,
    pub series: Series2D,
}

fn quotient_element(n: usize, caps: Caps) -> Series2D {
    let scale = Complex64::new(1.0 / ((n + 1) as f64).sqrt(), 0.0);
    let mut s = Series2D::zero(caps);
    for i in 0..=n {
        s.set(n - i, i, scale);
    }
    s
}

/// e_n, φ_n or ψ_n realized on `caps`; needs both caps ≥ n + 1.
pub fn zw_basis(kind: ZwBasisKind, n: usize, caps: Caps) -> Result<ZwBasisElement> {
    if caps.z < n + 1 || caps.w < n + 1 {
        return Err(invalid(format!(
            "caps {}x{} too small for index {n}",
            caps.z, caps.w
        )));
    }
    let series = match kind {
        ZwBasisKind::Quotient => quotient_element(n, caps),
        ZwBasisKind::ZWedge | ZwBasisKind::WWedge => {
            let e = quotient_element(n, caps);
            let norm = 1.0 / ((n + 2) as f64).sqrt();
            let corner = -((n + 1) as f64).sqrt() * norm;
            let (mut s, (ci, cj)) = match kind {
                ZwBasisKind::ZWedge => (e.shifted(1, 0, caps), (0, n + 1)),
                _ => (e.shifted(0, 1, caps), (n + 1, 0)),
            };
            s = s.scaled(Complex64::new(norm, 0.0));
            s.set(ci, cj, Complex64::new(corner, 0.0));
            s
        }
    };
    Ok(ZwBasisElement {
        kind,
        index: n,
        series,
    })
}

/// Both sides of ⟨w^{n+1}φ_k, z^{m+1}ψ_l⟩ = ⟨w^n e_k, z^m e_l⟩/√((k+2)(l+2)).
pub fn zw_inner_product_relation(
    k: usize,
    l: usize,
    m: usize,
    n: usize,
) -> Result<(Complex64, Complex64)> {
    let caps = Caps::square(k + l + m + n + 2);
    let phi = zw_basis(ZwBasisKind::ZWedge, k, caps)?.series;
    let psi = zw_basis(ZwBasisKind::WWedge, l, caps)?.series;
    let lhs = inner_product(&phi.shifted(0, n + 1, caps), &psi.shifted(m + 1, 0, caps))?;
    let ek = zw_basis(ZwBasisKind::Quotient, k, caps)?.series;
    let el = zw_basis(ZwBasisKind::Quotient, l, caps)?.series;
    let scale = 1.0 / (((k + 2) * (l + 2)) as f64).sqrt();
    let rhs = inner_product(&ek.shifted(0, n, caps), &el.shifted(m, 0, caps))? * scale;
    Ok((lhs, rhs))
}

/// Σ_{i=0}^{k} (k+1−i)·c^i, summed directly.
pub fn weighted_power_sum(c: Complex64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..=k {
        acc += p * (k + 1 - i) as f64;
        p *= c;
    }
    acc
}

/// Σ_{d≥1} x^d / ((k+d+1)(k+d+2)) for every k < cutoff, by backward recurrence.
fn offdiagonal_weights(x: f64, cutoff: usize) -> Vec<f64> {
    let mut out = vec![0.0; cutoff];
    if x == 0.0 {
        return out;
    }
    let kk = cutoff as f64;
    let mut last = 0.0;
    let mut p = 1.0;
    for d in 1..=10_000_000u64 {
        p *= x;
        let df = d as f64;
        last += p / ((kk + df + 1.0) * (kk + df + 2.0));
        if p < 1e-18 * last {
            break;
        }
    }
    for k in (0..cutoff).rev() {
        let kf = k as f64;
        last = x / ((kf + 2.0) * (kf + 3.0)) + x * last;
        out[k] = last;
    }
    out
}

/// ψ'(n) = Σ_{j≥0} 1/(n+j)².
fn trigamma(mut n: f64) -> f64 {
    let mut acc = 0.0;
    while n < 10.0 {
        acc += 1.0 / (n * n);
        n += 1.0;
    }
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    acc + inv + inv2 / 2.0 + inv2 * inv / 6.0 - inv2 * inv2 * inv / 30.0
        + inv2 * inv2 * inv2 * inv / 42.0
}

fn check_in_disk(value: Complex64) -> Result<()> {
    let modulus = value.norm();
    if modulus.is_finite() && modulus < 1.0 {
        Ok(())
    } else {
        Err(BdkError::Domain {
            modulus,
            radius: 1.0,
        })
    }
}

/// Σ₁ for [z − w] from the explicit double series, with moduli |a|, |b| in
/// the weights and the phase pair c for the inner sums.
fn sigma1_series(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    cutoff: usize,
) -> Result<InvariantValue> {
    check_in_disk(a)?;
    check_in_disk(b)?;
    if cutoff == 0 {
        return Err(invalid("series cutoff must be at least 1"));
    }
    let (x, y) = (a.norm_sqr(), b.norm_sqr());
    let wx = offdiagonal_weights(x, cutoff);
    let wy = offdiagonal_weights(y, cutoff);
    let mut geometric = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    let mut inner = Complex64::new(0.0, 0.0);
    let mut partial = 0.0;
    for k in 0..cutoff {
        geometric += power;
        power *= c;
        inner += geometric;
        let kf = k as f64;
        let pair = (kf + 1.0) * (kf + 2.0);
        partial += inner.norm_sqr() / pair * (1.0 / pair + wx[k] + wy[k]);
    }
    let scale = (1.0 - x) * (1.0 - y);
    partial *= scale;
    // Beyond the cutoff the summand is L/(k+2)² up to O(k⁻³).
    let one_minus_c = (Complex64::new(1.0, 0.0) - c).norm_sqr();
    let lead = (scale + x * (1.0 - y) + y * (1.0 - x)) / one_minus_c;
    let kf = cutoff as f64;
    let correction = lead * trigamma(kf + 2.0);
    let spread = 1.0 / (1.0 - x.max(y));
    let tail_estimate = lead * (4.0 + 4.0 * spread * spread + 4.0 / one_minus_c.sqrt()) / (kf * kf)
        + lead * c.norm().powf(kf) / (1.0 - c.norm());
    Ok(InvariantValue {
        quantity: Quantity::Sigma,
        value: partial + correction,
        order: 1,
        point: BiPoint::new(a, b),
        level: cutoff,
        tail_estimate,
        raw: partial,
        refined: None,
        refined_level: None,
    })
}

/// Σ₁(a, b) for [z − w], with the inner sums evaluated at the complex
/// product a·b̄. `level` of the result is the cutoff K.
pub fn sigma1_zw(a: Complex64, b: Complex64, cutoff: usize) -> Result<InvariantValue> {
    sigma1_series(a, b, a * b.conj(), cutoff)
}

/// The same series evaluated at (|a|, |b|); an upper bound for [`sigma1_zw`].
pub fn sigma1_zw_modulus(a: Complex64, b: Complex64, cutoff: usize) -> Result<InvariantValue> {
    let c = Complex64::new(a.norm() * b.norm(), 0.0);
    sigma1_series(a, b, c, cutoff)
}

/// Doubles the cutoff from [`DEFAULT_CUTOFF`] until the tail estimate is at most `tol`.
pub fn sigma1_zw_auto(a: Complex64, b: Complex64, tol: f64) -> Result<InvariantValue> {
    let mut cutoff = DEFAULT_CUTOFF;
    loop {
        let v = sigma1_zw(a, b, cutoff)?;
        if v.tail_estimate <= tol || cutoff >= 1 << 24 {
            return Ok(v);
        }
        cutoff *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma64Report {
    pub a: f64,
    pub b: f64,
    pub power: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Both sides agree to rounding.
    pub equality: bool,
    /// a = b or i = 1, where the two sides coincide.
    pub boundary_case: bool,
}

/// (1−aⁱbⁱ)²(1−a²)(1−b²) ≤ (1−ab)²(1−a²ⁱ)(1−b²ⁱ) for 0 ≤ a, b < 1.
pub fn lemma64_check(a: f64, b: f64, power: u32) -> Result<Lemma64Report> {
    if !((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b)) || power == 0 {
        return Err(invalid(format!(
            "need 0 <= a, b < 1 and i >= 1, got a={a}, b={b}, i={power}"
        )));
    }
    let i = power as i32;
    let lhs = (1.0 - (a * b).powi(i)).powi(2) * (1.0 - a * a) * (1.0 - b * b);
    let rhs = (1.0 - a * b).powi(2) * (1.0 - a.powi(2 * i)) * (1.0 - b.powi(2 * i));
    let slack = 8.0 * f64::EPSILON * rhs.max(lhs).max(f64::MIN_POSITIVE);
    Ok(Lemma64Report {
        a,
        b,
        power,
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
        equality: (rhs - lhs).abs() <= slack,
        boundary_case: a == b || power == 1,
    })
}

/// 50 cases: a, b ∈ {0, 0.25, 0.5, 0.75, 0.95} and i ∈ {1, 4}.
pub fn lemma64_grid() -> Result<Vec<Lemma64Report>> {
    const VALUES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.95];
    let mut out = Vec::with_capacity(50);
    for &a in &VALUES {
        for &b in &VALUES {
            for i in [1, 4] {
                out.push(lemma64_check(a, b, i)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma65Sum {
    pub a: f64,
    pub cutoff: usize,
    /// Σ over 1 ≤ k ≤ K and all m.
    pub partial: f64,
    /// Remaining k > K contribution.
    pub tail: f64,
}

impl Lemma65Sum {
    pub fn total(&self) -> f64 {
        self.partial + self.tail
    }
}

/// Σ_{m≥0, k≥1} (1−a^k)a^m / ((m+k)(m+k+1)), split at k = K.
pub fn lemma65_sum(a: f64, cutoff: usize) -> Result<Lemma65Sum> {
    if !(0.0..1.0).contains(&a) || cutoff == 0 {
        return Err(invalid(format!(
            "need 0 <= a < 1 and K >= 1, got a={a}, K={cutoff}"
        )));
    }
    let kk = cutoff as f64;
    // U_k = Σ_m a^m/((m+k)(m+k+1)); Σ_{k>K} U_k = Σ_m a^m/(m+K+1);
    // Σ_{k>K} a^k U_k = Σ_{n>K} a^n (n−K)/(n(n+1)).
    let mut head: f64 = 0.0;
    let mut mixed = 0.0;
    let mut start = 0.0;
    let mut p = 1.0;
    let mut m = 0u64;
    while p > 1e-18 * head.max(1e-300) || m == 0 {
        let mf = m as f64;
        head += p / (mf + kk + 1.0);
        start += p / ((mf + kk + 1.0) * (mf + kk + 2.0));
        let n = mf + kk + 1.0;
        mixed += p * a * (n - kk) / (n * (n + 1.0));
        p *= a;
        m += 1;
        if a == 0.0 || m > 50_000_000 {
            break;
        }
    }
    let tail = head - a.powf(kk) * mixed;
    let mut u = start;
    let mut partial = 0.0;
    for k in (1..=cutoff).rev() {
        let kf = k as f64;
        u = 1.0 / (kf * (kf + 1.0)) + a * u;
        partial += (1.0 - a.powi(k as i32)) * u;
    }
    Ok(Lemma65Sum {
        a,
        cutoff,
        partial,
        tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleSubmodule {
    /// zH² + wH².
    ZPlusW,
    /// θH² for an inner θ in one variable.
    Beurling,
}

/// (Σ₀, Σ₁) in closed form for the example submodules.
pub fn example_closed_forms(
    which: ExampleSubmodule,
    a: Complex64,
    b: Complex64,
) -> Result<(f64, f64)> {
    check_in_disk(a)?;
    check_in_disk(b)?;
    Ok(match which {
        ExampleSubmodule::ZPlusW => {
            let p = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr());
            (p + 1.0, p)
        }
        ExampleSubmodule::Beurling => (1.0, 0.0),
    })
}

/// Trapezoidal mean of the product of Poisson kernels over the torus.
pub fn poisson_identity_check(a: Complex64, b: Complex64, nodes: usize) -> Result<f64> {
    check_in_disk(a)?;
    check_in_disk(b)?;
    if nodes == 0 {
        return Err(invalid("need at least one angular node"));
    }
    let mean = |c: Complex64| {
        let mut acc = 0.0;
        for j in 0..nodes {
            let t = std::f64::consts::TAU * j as f64 / nodes as f64;
            let zeta = Complex64::from_polar(1.0, t);
            acc += (1.0 - c.norm_sqr()) / (Complex64::new(1.0, 0.0) - c.conj() * zeta).norm_sqr();
        }
        acc / nodes as f64
    };
    let (ma, mb) = (mean(a), mean(b));
    let mut acc = 0.0;
    for _ in 0..nodes {
        acc += ma * mb;
    }
    Ok(acc / nodes as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsCorollaryReport {
    pub theta_at_origin: Complex64,
    pub phi_at_origin: Complex64,
    pub sigma1: InvariantValue,
    /// 2Σ₁(θ(0), φ(0)) + 1.
    pub hs_norm_sqr: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// ‖C‖²_HS of the truncated submodule [θ(z) − φ(w)], when requested.
    pub engine: Option<InvariantValue>,
}

impl HsCorollaryReport {
    /// Gap between the series value and the engine value, if computed.
    pub fn engine_gap(&self) -> Option<f64> {
        self.engine
            .as_ref()
            .map(|e| (e.value - self.hs_norm_sqr).abs())
    }
}

/// ‖C_{[θ(z)−φ(w)]}‖²_HS = 2Σ₁(θ(0), φ(0)) + 1, checked against the bound 5;
/// optionally recomputed from the truncated submodule at `engine_level`.
pub fn hs_corollary_check(
    theta: &BlaschkeProduct,
    phi: &BlaschkeProduct,
    engine_level: Option<usize>,
    truncation: Truncation,
) -> Result<HsCorollaryReport> {
    if theta.degree() == 0 || phi.degree() == 0 {
        return Err(invalid("inner functions must be nonconstant"));
    }
    let (a, b) = (theta.at_origin(), phi.at_origin());
    let sigma1 = sigma1_zw(a, b, DEFAULT_CUTOFF * 10)?;
    let hs = 2.0 * sigma1.value + 1.0;
    let engine = match engine_level {
        Some(level) => {
            let one = Complex64::new(1.0, 0.0);
            let base = vec![Series2D::from_terms(&[(one, 1, 0), (-one, 0, 1)])];
            let source = GeneratorSource::Composed {
                base,
                theta: theta.clone(),
                phi: phi.clone(),
            };
            let m = SubmoduleApprox::build(source, level, DEFAULT_RANK_TOL)?;
            Some(hs_norm_core(&m, BiPoint::origin(), truncation)?)
        }
        None => None,
    };
    Ok(HsCorollaryReport {
        theta_at_origin: a,
        phi_at_origin: b,
        sigma1,
        hs_norm_sqr: hs,
        bound: HS_BOUND,
        within_bound: hs <= HS_BOUND,
        engine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_basis_elements() {
        let caps = Caps::square(3);
        let e0 = zw_basis(ZwBasisKind::Quotient, 0, caps).unwrap().series;
        assert_eq!(e0.coeff(0, 0), c(1.0, 0.0));
        assert!((e0.norm() - 1.0).abs() < 1e-15);
        let phi0 = zw_basis(ZwBasisKind::ZWedge, 0, caps).unwrap().series;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((phi0.coeff(1, 0) - c(h, 0.0)).norm() < 1e-15);
        assert!((phi0.coeff(0, 1) - c(-h, 0.0)).norm() < 1e-15);
        assert!(zw_basis(ZwBasisKind::WWedge, 3, caps).is_err());
    }

    #[test]
    fn origin_series_value() {
        let v = sigma1_zw(c(0.0, 0.0), c(0.0, 0.0), 1000).unwrap();
        assert!((v.value - sigma1_at_origin()).abs() < 1e-9);
    }

    #[test]
    fn trigamma_matches_direct_sum() {
        let direct: f64 = (0..2_000_000)
            .map(|j| 1.0 / ((3.0 + j as f64).powi(2)))
            .sum();
        assert!((trigamma(3.0) - direct).abs() < 1e-6);
    }

    #[test]
    fn lemma65_exact_split() {
        for a in [0.0, 0.3, 0.5, 0.9] {
            let s = lemma65_sum(a, 100).unwrap();
            assert!((s.total() - 1.0).abs() < 1e-12, "a={a}: {}", s.total());
        }
    }
}
