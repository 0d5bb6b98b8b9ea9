//! Numerical invariant functions Σ_k(a, b), core-operator norms and the
//! fringe operator.
//!
//! Every value is computed at level N and N + Δ. The reported value is the
//! extrapolation of the pair under a c/N error model; the tail estimate is
//! the level-to-level change plus the geometric tail of the weights.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{geometric_tail, BiPoint, RadiusGuard, Variable};
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::series::Caps;
use crate::submodule::{SubmoduleApprox, WedgeBasis};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncation policy shared by the invariant computations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Refinement step Δ; `None` means N/2, `Some(0)` disables refinement.
    pub delta: Option<usize>,
    pub guard: RadiusGuard,
}

impl Truncation {
    pub fn with_delta(delta: usize) -> Self {
        Self {
            delta: Some(delta),
            ..Self::default()
        }
    }

    pub fn delta_for(&self, level: usize) -> usize {
        self.delta.unwrap_or(level / 2)
    }
}

/// Which quantity an [`InvariantValue`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Sigma,
    HsNormCore,
    Gap,
}

/// A certified invariant value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantValue {
    pub quantity: Quantity,
    pub value: f64,
    pub order: usize,
    pub point: BiPoint,
    pub level: usize,
    pub tail_estimate: f64,
    /// Raw value at level N.
    pub raw: f64,
    /// Raw value at level N + Δ, when refined.
    pub refined: Option<f64>,
    pub refined_level: Option<usize>,
}

/// Extrapolates v(N1), v(N2) under v(N) ≈ v∞ − c/N.
pub fn extrapolate(v1: f64, n1: usize, v2: f64, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    (n2 * v2 - n1 * v1) / (n2 - n1)
}

fn certify(
    quantity: Quantity,
    order: usize,
    point: BiPoint,
    raws: &[(usize, f64)],
    signed: bool,
) -> InvariantValue {
    let (level, raw) = raws[0];
    let rho = point.max_modulus();
    let geometric = |v: f64, n: usize| geometric_tail(rho, n, v.abs().max(1.0));
    match raws.get(1) {
        Some(&(level2, v2)) => {
            let mut value = extrapolate(raw, level, v2, level2);
            if !signed {
                value = value.max(0.0);
            }
            InvariantValue {
                quantity,
                value,
                order,
                point,
                level,
                tail_estimate: (v2 - raw).abs() + geometric(v2, level2),
                raw,
                refined: Some(v2),
                refined_level: Some(level2),
            }
        }
        None => InvariantValue {
            quantity,
            value: raw,
            order,
            point,
            level,
            tail_estimate: geometric(raw, level),
            raw,
            refined: None,
            refined_level: None,
        },
    }
}

/// The 0-wedges of one level, as dense coefficient matrices.
#[derive(Debug, Clone)]
struct WedgeFrame {
    level: usize,
    caps: Caps,
    ez: CMat,
    fw: CMat,
}

impl WedgeFrame {
    fn new(m: &SubmoduleApprox) -> Result<Self> {
        let ez = m.wedge(Variable::Z, ZERO)?.dense();
        let fw = m.wedge(Variable::W, ZERO)?.dense();
        Ok(Self {
            level: m.level(),
            caps: m.caps(),
            ez,
            fw,
        })
    }

    /// Σ₀ = P·Σ|⟨e_i/(1−āz), f_j/(1−b̄w)⟩|² and, for k ≥ 1,
    /// Σ_k = P·Σ|⟨w^k e_i/(1−b̄w), z^k f_j/(1−āz)⟩|², with P = (1−|a|²)(1−|b|²).
    fn sigma(&self, order: usize, a: Complex64, b: Complex64) -> f64 {
        let (u, v) = if order == 0 {
            (
                weighted(&self.ez, self.caps, Variable::Z, 0, a),
                weighted(&self.fw, self.caps, Variable::W, 0, b),
            )
        } else {
            (
                weighted(&self.ez, self.caps, Variable::W, order, b),
                weighted(&self.fw, self.caps, Variable::Z, order, a),
            )
        };
        let g = v.adjoint() * &u;
        (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr()) * linalg::frobenius_sqr(g.as_ref())
    }
}

/// Columns multiplied by var^shift and divided by (1 − c̄·var), on the caps.
fn weighted(cols: &CMat, caps: Caps, var: Variable, shift: usize, c: Complex64) -> CMat {
    let cbar = c.conj();
    let mut out = CMat::zeros(cols.nrows(), cols.ncols());
    for k in 0..cols.ncols() {
        let src = cols.col(k);
        let mut dst = out.col_mut(k);
        match var {
            Variable::W => {
                for i in 0..=caps.z {
                    let mut carry = ZERO;
                    for j in 0..=caps.w {
                        let base = if j >= shift {
                            src[caps.index(i, j - shift)]
                        } else {
                            ZERO
                        };
                        carry = base + cbar * carry;
                        dst[caps.index(i, j)] = carry;
                    }
                }
            }
            Variable::Z => {
                for j in 0..=caps.w {
                    let mut carry = ZERO;
                    for i in 0..=caps.z {
                        let base = if i >= shift {
                            src[caps.index(i - shift, j)]
                        } else {
                            ZERO
                        };
                        carry = base + cbar * carry;
                        dst[caps.index(i, j)] = carry;
                    }
                }
            }
        }
    }
    out
}

/// Cached wedge frames at level N (and N + Δ) for repeated Σ evaluations.
#[derive(Debug, Clone)]
pub struct SigmaEngine {
    frames: Vec<WedgeFrame>,
    truncation: Truncation,
}

impl SigmaEngine {
    pub fn new(m: &SubmoduleApprox, truncation: Truncation) -> Result<Self> {
        let mut frames = vec![WedgeFrame::new(m)?];
        let delta = truncation.delta_for(m.level());
        if delta > 0 {
            frames.push(WedgeFrame::new(&m.refined(delta)?)?);
        }
        Ok(Self { frames, truncation })
    }

    pub fn level(&self) -> usize {
        self.frames[0].level
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Raw Σ_k at each cached level.
    pub fn raw(&self, order: usize, point: BiPoint) -> Result<Vec<(usize, f64)>> {
        self.truncation.guard.check_point(point)?;
        Ok(self
            .frames
            .iter()
            .map(|f| (f.level, f.sigma(order, point.z, point.w)))
            .collect())
    }

    pub fn sigma(&self, order: usize, point: BiPoint) -> Result<InvariantValue> {
        let raws = self.raw(order, point)?;
        Ok(certify(Quantity::Sigma, order, point, &raws, false))
    }

    /// Σ₀ − Σ₁ with the tails of both terms.
    pub fn gap(&self, point: BiPoint) -> Result<InvariantValue> {
        let s0 = self.raw(0, point)?;
        let s1 = self.raw(1, point)?;
        let diff: Vec<(usize, f64)> = s0.iter().zip(&s1).map(|(x, y)| (x.0, x.1 - y.1)).collect();
        let mut out = certify(Quantity::Gap, 0, point, &diff, true);
        let t0 = certify(Quantity::Sigma, 0, point, &s0, false).tail_estimate;
        let t1 = certify(Quantity::Sigma, 1, point, &s1, false).tail_estimate;
        out.tail_estimate = out.tail_estimate.max(t0 + t1);
        Ok(out)
    }
}

pub fn sigma0(
    m: &SubmoduleApprox,
    point: BiPoint,
    truncation: Truncation,
) -> Result<InvariantValue> {
    sigma_k(m, 0, point, truncation)
}

pub fn sigma1(
    m: &SubmoduleApprox,
    point: BiPoint,
    truncation: Truncation,
) -> Result<InvariantValue> {
    sigma_k(m, 1, point, truncation)
}

pub fn sigma_k(
    m: &SubmoduleApprox,
    order: usize,
    point: BiPoint,
    truncation: Truncation,
) -> Result<InvariantValue> {
    truncation.guard.check_point(point)?;
    SigmaEngine::new(m, truncation)?.sigma(order, point)
}

pub fn sigma_gap(
    m: &SubmoduleApprox,
    point: BiPoint,
    truncation: Truncation,
) -> Result<InvariantValue> {
    truncation.guard.check_point(point)?;
    SigmaEngine::new(m, truncation)?.gap(point)
}

/// ‖C_M(a, b)‖²_HS certified across levels N and N + Δ.
pub fn hs_norm_core(
    m: &SubmoduleApprox,
    point: BiPoint,
    truncation: Truncation,
) -> Result<InvariantValue> {
    truncation.guard.check_point(point)?;
    let mut raws = vec![(m.level(), m.core_hs_sqr(point.z, point.w)?)];
    let delta = truncation.delta_for(m.level());
    if delta > 0 {
        let fine = m.refined(delta)?;
        raws.push((fine.level(), fine.core_hs_sqr(point.z, point.w)?));
    }
    Ok(certify(Quantity::HsNormCore, 0, point, &raws, false))
}

/// Sweep of Σ_k over a list of points, in input order.
pub fn sweep(
    m: &SubmoduleApprox,
    points: &[BiPoint],
    orders: &[usize],
    truncation: Truncation,
) -> Result<Vec<InvariantValue>> {
    let engine = SigmaEngine::new(m, truncation)?;
    let mut out = Vec::with_capacity(points.len() * orders.len());
    for p in points {
        for &k in orders {
            out.push(engine.sigma(k, *p)?);
        }
    }
    Ok(out)
}

/// One CSV record `a_re,a_im,b_re,b_im,order,value,tail,level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
    pub order: usize,
    pub value: f64,
    pub tail: f64,
    pub level: usize,
}

impl From<&InvariantValue> for SweepRow {
    fn from(v: &InvariantValue) -> Self {
        Self {
            a_re: v.point.z.re,
            a_im: v.point.z.im,
            b_re: v.point.w.re,
            b_im: v.point.w.im,
            order: v.order,
            value: v.value,
            tail: v.tail_estimate,
            level: v.level,
        }
    }
}

/// Fringe operator f ↦ P_a(φ_b(w)·f) on the z-wedge at a.
#[derive(Debug, Clone)]
pub struct FringeMatrix {
    entries: CMat,
    point: BiPoint,
    /// Orthonormal coordinates (in the wedge basis) of the wedge at level N/2.
    window: CMat,
}

/// Numerical kernel and cokernel dimensions of the fringe operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FringeIndex {
    pub kernel: usize,
    pub cokernel: usize,
    pub index: i64,
}

/// Relative singular-value threshold of the index estimate.
pub const INDEX_TOL: f64 = 1e-8;

impl FringeMatrix {
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn point(&self) -> BiPoint {
        self.point
    }

    pub fn operator_norm(&self) -> Result<f64> {
        Ok(linalg::singular_values(self.entries.as_ref())?
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    /// tr(V*[F*, F]V) over the low-level window V, away from the truncation edge.
    pub fn commutator_trace(&self) -> f64 {
        let fv = &self.entries * &self.window;
        let fsv = self.entries.adjoint() * &self.window;
        linalg::frobenius_sqr(fv.as_ref()) - linalg::frobenius_sqr(fsv.as_ref())
    }

    /// dim ker − dim coker on the window, thresholded at 1e-8·σ_max.
    pub fn index(&self) -> Result<FringeIndex> {
        let fv = &self.entries * &self.window;
        let sv = linalg::singular_values(fv.as_ref())?;
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank_fv = sv.iter().filter(|s| **s > INDEX_TOL * smax).count();
        let kernel = self.window.ncols() - rank_fv;
        let vf = self.window.adjoint() * &self.entries;
        let sv = linalg::singular_values(vf.as_ref())?;
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank_vf = sv.iter().filter(|s| **s > INDEX_TOL * smax).count();
        let cokernel = self.window.ncols() - rank_vf;
        Ok(FringeIndex {
            kernel,
            cokernel,
            index: kernel as i64 - cokernel as i64,
        })
    }
}

/// Multiplies grid columns by φ_b(w) = (b − w)/(1 − b̄w), truncated at caps.
fn times_automorphism_w(cols: &CMat, caps: Caps, b: Complex64) -> CMat {
    let mut numer = CMat::zeros(cols.nrows(), cols.ncols());
    for k in 0..cols.ncols() {
        for i in 0..=caps.z {
            for j in 0..=caps.w {
                let prev = if j > 0 {
                    cols[(caps.index(i, j - 1), k)]
                } else {
                    ZERO
                };
                numer[(caps.index(i, j), k)] = b * cols[(caps.index(i, j), k)] - prev;
            }
        }
    }
    weighted(&numer, caps, Variable::W, 0, b)
}

fn embed(cols: &CMat, from: Caps, to: Caps) -> CMat {
    let mut out = CMat::zeros(to.grid_len(), cols.ncols());
    for idx in 0..from.grid_len() {
        let (i, j) = from.exponents(idx);
        if to.contains(i, j) {
            for k in 0..cols.ncols() {
                out[(to.index(i, j), k)] = cols[(idx, k)];
            }
        }
    }
    out
}

pub fn fringe_operator(
    m: &SubmoduleApprox,
    point: BiPoint,
    guard: RadiusGuard,
) -> Result<FringeMatrix> {
    guard.check_point(point)?;
    let wedge: WedgeBasis = m.wedge(Variable::Z, point.z)?;
    let w = wedge.dense();
    let moved = times_automorphism_w(&w, m.caps(), point.w);
    let entries = w.adjoint() * &moved;
    let coarse = m.at_level((m.level() / 2).max(1))?;
    let small = coarse.wedge(Variable::Z, point.z)?;
    let v = embed(&small.dense(), coarse.caps(), m.caps());
    let coords = w.adjoint() * &v;
    let window = linalg::orthonormal_columns(coords.as_ref(), 1e-10);
    Ok(FringeMatrix {
        entries,
        point,
        window,
    })
}

/// Hilbert–Schmidt norm squared of a dense matrix.
pub fn hs_norm_sqr(m: &CMat) -> f64 {
    linalg::frobenius_sqr(m.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Series2D;
    use crate::submodule::{build_submodule, DEFAULT_RANK_TOL};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn h2_invariants() {
        let m = build_submodule(&[Series2D::constant(one())], 12, DEFAULT_RANK_TOL).unwrap();
        let t = Truncation::with_delta(0);
        let p = BiPoint::real(0.3, -0.2);
        let s0 = sigma0(&m, p, t).unwrap().value;
        let s1 = sigma1(&m, p, t).unwrap().value;
        assert!((s0 - 1.0).abs() < 1e-8, "{s0}");
        assert!(s1.abs() < 1e-12);
        let s2 = sigma_k(&m, 2, BiPoint::origin(), t).unwrap().value;
        assert!(s2.abs() < 1e-12);
    }

    #[test]
    fn extrapolation_removes_harmonic_term() {
        let f = |n: usize| 2.0 - 3.0 / n as f64;
        assert!((extrapolate(f(10), 10, f(15), 15) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn h2_fringe_is_the_shift() {
        let m = build_submodule(&[Series2D::constant(one())], 10, DEFAULT_RANK_TOL).unwrap();
        let f = fringe_operator(&m, BiPoint::origin(), RadiusGuard::default()).unwrap();
        assert!((f.commutator_trace() - 1.0).abs() < 1e-10);
        assert_eq!(f.index().unwrap().index, -1);
        assert!(f.operator_norm().unwrap() <= 1.0 + 1e-8);
    }
}
