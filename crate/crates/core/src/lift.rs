//! Lifting a submodule by a pair of inner functions, B = (θ, φ), and the
//! identities relating M and M_{θ,φ} = [C_B M].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{model_space_basis, BlaschkeProduct};
use crate::domain::{BiPoint, RadiusGuard, Variable};
use crate::error::{invalid, BdkError, Result};
use crate::invariants::{hs_norm_core, InvariantValue, SigmaEngine, Truncation};
use crate::linalg;
use crate::report::{PointPair, Report};
use crate::series::{compose_pair, multiply, Caps, Series2D};
use crate::submodule::{GeneratorSource, SubmoduleApprox};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gram matrices count as positive semidefinite above this eigenvalue.
pub const PSD_TOL: f64 = -1e-9;

/// A submodule M together with its lift M_{θ,φ}.
#[derive(Debug, Clone)]
pub struct LiftedSubmodule {
    source: SubmoduleApprox,
    theta: BlaschkeProduct,
    phi: BlaschkeProduct,
    lifted: SubmoduleApprox,
}

impl LiftedSubmodule {
    pub fn source(&self) -> &SubmoduleApprox {
        &self.source
    }

    pub fn theta(&self) -> &BlaschkeProduct {
        &self.theta
    }

    pub fn phi(&self) -> &BlaschkeProduct {
        &self.phi
    }

    pub fn lifted(&self) -> &SubmoduleApprox {
        &self.lifted
    }

    pub fn level(&self) -> usize {
        self.lifted.level()
    }

    /// B(p) = (θ(z), φ(w)).
    pub fn map(&self, p: BiPoint) -> BiPoint {
        BiPoint::new(self.theta.eval(p.z), self.phi.eval(p.w))
    }

    /// The source generators composed with B, as Taylor series on `caps`.
    pub fn composed_generators(&self, caps: Caps) -> Result<Vec<Series2D>> {
        let t = self.theta.taylor(caps.z.max(self.theta.degree()))?;
        let p = self.phi.taylor(caps.w.max(self.phi.degree()))?;
        self.source
            .generators()
            .iter()
            .map(|g| compose_pair(g, &t, &p, caps))
            .collect()
    }
}

/// Builds M_{θ,φ} at `level` from the generators of M composed with B.
pub fn lift(
    m: &SubmoduleApprox,
    theta: &BlaschkeProduct,
    phi: &BlaschkeProduct,
    level: usize,
) -> Result<LiftedSubmodule> {
    let source = match m.source() {
        GeneratorSource::Polynomial(g) => GeneratorSource::Composed {
            base: g.clone(),
            theta: theta.clone(),
            phi: phi.clone(),
        },
        GeneratorSource::Composed {
            base,
            theta: t0,
            phi: p0,
        } => GeneratorSource::Composed {
            base: base.clone(),
            theta: t0.compose(theta)?,
            phi: p0.compose(phi)?,
        },
    };
    let lifted = SubmoduleApprox::build(source, level, m.rank_tol())?;
    Ok(LiftedSubmodule {
        source: m.clone(),
        theta: theta.clone(),
        phi: phi.clone(),
        lifted,
    })
}

/// Szegő kernel of the bidisk, 1/((1 − λ̄z)(1 − μ̄w)).
pub fn szego_kernel(lm: BiPoint, zw: BiPoint) -> Complex64 {
    ONE / ((ONE - lm.z.conj() * zw.z) * (ONE - lm.w.conj() * zw.w))
}

/// R(λμ; zw) = (1 − conj θ(λ)·θ(z))/(1 − λ̄z) · (1 − conj φ(μ)·φ(w))/(1 − μ̄w).
pub fn rk_factor(
    theta: &BlaschkeProduct,
    phi: &BlaschkeProduct,
    lm: BiPoint,
    zw: BiPoint,
    guard: RadiusGuard,
) -> Result<Complex64> {
    guard.check_point(lm)?;
    guard.check_point(zw)?;
    let zpart = (ONE - theta.eval(lm.z).conj() * theta.eval(zw.z)) / (ONE - lm.z.conj() * zw.z);
    let wpart = (ONE - phi.eval(lm.w).conj() * phi.eval(zw.w)) / (ONE - lm.w.conj() * zw.w);
    Ok(zpart * wpart)
}

fn relative_gap(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / (lhs.norm() + 1.0)
}

fn check_grid(l: &LiftedSubmodule, grid: &[PointPair], guard: RadiusGuard) -> Result<()> {
    for pair in grid {
        for p in [pair.first, pair.second] {
            guard.check_point(p)?;
            guard.check_point(l.map(p))?;
        }
    }
    Ok(())
}

/// K^{M_{θ,φ}}(p, q) against K^M(B(p), B(q))·R(p, q), relative to |K| + 1.
pub fn verify_kernel_identity(
    l: &LiftedSubmodule,
    grid: &[PointPair],
    guard: RadiusGuard,
    tol: f64,
) -> Result<Report> {
    check_grid(l, grid, guard)?;
    let mut residuals = Vec::with_capacity(grid.len());
    for pair in grid {
        let (p, q) = (pair.first, pair.second);
        let lhs = l.lifted.kernel_eval(p, q, guard)?;
        let base = l.source.kernel_eval(l.map(p), l.map(q), guard)?;
        let rhs = base * rk_factor(&l.theta, &l.phi, p, q, guard)?;
        residuals.push(relative_gap(lhs, rhs));
    }
    Ok(Report::new(
        "kernel-identity",
        l.level(),
        grid.to_vec(),
        residuals,
        tol,
    ))
}

/// G^{M_{θ,φ}}(p, q) against G^M(B(p), B(q)), relative to |G| + 1.
pub fn verify_core_pullback(
    l: &LiftedSubmodule,
    grid: &[PointPair],
    guard: RadiusGuard,
    tol: f64,
) -> Result<Report> {
    check_grid(l, grid, guard)?;
    let mut residuals = Vec::with_capacity(grid.len());
    for pair in grid {
        let (p, q) = (pair.first, pair.second);
        let lhs = l.lifted.core_function_eval(p, q, guard)?;
        let rhs = l.source.core_function_eval(l.map(p), l.map(q), guard)?;
        residuals.push(relative_gap(lhs, rhs));
    }
    Ok(Report::new(
        "core-pullback",
        l.level(),
        grid.to_vec(),
        residuals,
        tol,
    ))
}

/// Σ_i^{M_{θ,φ}}(a, b) against Σ_i^M(θ(a), φ(b)) for i = 0, 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantPullback {
    pub point: BiPoint,
    pub order: usize,
    pub lifted: InvariantValue,
    pub source: InvariantValue,
    pub gap: f64,
}

/// Evaluates both sides of the invariant pullback at every point.
pub fn invariant_pullbacks(
    l: &LiftedSubmodule,
    points: &[BiPoint],
    truncation: Truncation,
) -> Result<Vec<InvariantPullback>> {
    for p in points {
        truncation.guard.check_point(*p)?;
        truncation.guard.check_point(l.map(*p))?;
    }
    let lifted = SigmaEngine::new(&l.lifted, truncation)?;
    let source = SigmaEngine::new(&l.source, truncation)?;
    let mut out = Vec::with_capacity(2 * points.len());
    for &p in points {
        for order in [0, 1] {
            let lv = lifted.sigma(order, p)?;
            let sv = source.sigma(order, l.map(p))?;
            out.push(InvariantPullback {
                point: p,
                order,
                gap: (lv.value - sv.value).abs(),
                lifted: lv,
                source: sv,
            });
        }
    }
    Ok(out)
}

/// Report over the first point of every grid pair; residuals are |Σ_i gaps|.
pub fn verify_invariant_pullback(
    l: &LiftedSubmodule,
    grid: &[PointPair],
    truncation: Truncation,
    tol: f64,
) -> Result<Report> {
    let points: Vec<BiPoint> = grid.iter().map(|p| p.first).collect();
    let rows = invariant_pullbacks(l, &points, truncation)?;
    let residuals = rows.iter().map(|r| r.gap).collect();
    let doubled = grid.iter().flat_map(|p| [*p, *p]).collect();
    Ok(Report::new(
        "invariant-pullback",
        l.level(),
        doubled,
        residuals,
        tol,
    ))
}

/// Two-sided bound between ‖C_M‖_HS and ‖C_{M_{θ,φ}}‖_HS at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub source_norm: f64,
    pub lifted_norm: f64,
    pub lower: f64,
    pub upper: f64,
    /// Allowance from the truncation tails of both norms.
    pub slack: f64,
    pub holds: bool,
    /// θ(0) = φ(0) = 0, where both factors are 1.
    pub equality_expected: bool,
    pub source: InvariantValue,
    pub lifted: InvariantValue,
}

impl SandwichReport {
    pub fn norm_gap(&self) -> f64 {
        (self.lifted_norm - self.source_norm).abs()
    }
}

fn contraction(c: Complex64) -> f64 {
    let r = c.norm();
    (1.0 - r) / (1.0 + r)
}

/// lower·‖C_M‖ ≤ ‖C_{M_{θ,φ}}‖ ≤ upper·‖C_M‖ with
/// lower = ((1−|θ(0)|)/(1+|θ(0)|))·((1−|φ(0)|)/(1+|φ(0)|)) and upper = 1/lower.
pub fn littlewood_sandwich(l: &LiftedSubmodule, truncation: Truncation) -> Result<SandwichReport> {
    let source = hs_norm_core(&l.source, BiPoint::origin(), truncation)?;
    let lifted = hs_norm_core(&l.lifted, BiPoint::origin(), truncation)?;
    let (t0, p0) = (l.theta.at_origin(), l.phi.at_origin());
    let lower = contraction(t0) * contraction(p0);
    let upper = 1.0 / lower;
    let sn = source.value.sqrt();
    let ln = lifted.value.sqrt();
    let tail_norm = |v: &InvariantValue| v.tail_estimate / (2.0 * v.value.sqrt().max(1e-12));
    let slack = tail_norm(&source) * upper + tail_norm(&lifted);
    let holds = lower * sn <= ln + slack && ln <= upper * sn + slack;
    Ok(SandwichReport {
        source_norm: sn,
        lifted_norm: ln,
        lower,
        upper,
        slack,
        holds,
        equality_expected: t0 == ZERO && p0 == ZERO,
        source,
        lifted,
    })
}

/// Checks |‖f·(p∘B)‖ − ‖p‖| for every sample polynomial p, where f is a
/// unit vector of K_θ ⊗ K_φ.
pub fn weighted_composition_isometry(
    f: &Series2D,
    theta: &BlaschkeProduct,
    phi: &BlaschkeProduct,
    samples: &[Series2D],
    tol: f64,
) -> Result<Report> {
    if (f.norm() - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("f must have unit norm, got {}", f.norm())));
    }
    let fc = f.support_caps();
    let alpha = model_space_basis(theta, fc.z);
    let beta = model_space_basis(phi, fc.w);
    let mut captured = 0.0;
    for a in alpha.elements() {
        for b in beta.elements() {
            let ab = Series2D::from_fn(Caps::new(a.cap(), b.cap()), |i, j| a.coeff(i) * b.coeff(j));
            captured += crate::series::inner_product(f, &ab)?.norm_sqr();
        }
    }
    if (f.norm_sqr() - captured).abs() > 1e-8 {
        return Err(invalid("f is not orthogonal to θH² ⊗ H² + H² ⊗ φH²"));
    }
    let mut residuals = Vec::with_capacity(samples.len());
    let mut level = 0;
    for p in samples {
        let pc = p.support_caps();
        let cz = theta.safe_cap(1e-17) * pc.z.max(1);
        let cw = phi.safe_cap(1e-17) * pc.w.max(1);
        let inner = Caps::new(cz, cw);
        let pb = compose_pair(
            p,
            &theta.taylor(cz.max(theta.degree()))?,
            &phi.taylor(cw.max(phi.degree()))?,
            inner,
        )?;
        let caps = Caps::new(cz + fc.z, cw + fc.w);
        level = level.max(caps.z.max(caps.w));
        let prod = multiply(f, &pb, caps);
        residuals.push((prod.norm() - p.norm()).abs());
    }
    Ok(Report::new(
        "weighted-composition-isometry",
        level,
        Vec::new(),
        residuals,
        tol,
    ))
}

/// Values of every frame element at a point.
pub type FrameEval<'a> = dyn Fn(BiPoint) -> Result<Vec<Complex64>> + 'a;

/// Two-point kernel K(λμ; zw).
pub type KernelEval<'a> = dyn Fn(BiPoint, BiPoint) -> Result<Complex64> + 'a;

/// Frame evaluator for an explicit list of series.
pub fn series_frame(frame: &[Series2D]) -> impl Fn(BiPoint) -> Result<Vec<Complex64>> + '_ {
    move |p| Ok(frame.iter().map(|f| f.eval_unchecked(p.z, p.w)).collect())
}

/// K(p; q) against Σ_s f_s(q)·conj(f_s(p)), relative to |K| + 1.
pub fn parseval_frame_check(
    frame: &FrameEval<'_>,
    kernel: &KernelEval<'_>,
    grid: &[PointPair],
    tol: f64,
) -> Result<Report> {
    let mut residuals = Vec::with_capacity(grid.len());
    for pair in grid {
        let fp = frame(pair.first)?;
        let fq = frame(pair.second)?;
        let sum: Complex64 = fq.iter().zip(&fp).map(|(x, y)| x * y.conj()).sum();
        residuals.push(relative_gap(kernel(pair.first, pair.second)?, sum));
    }
    Ok(Report::new(
        "parseval-frame",
        0,
        grid.to_vec(),
        residuals,
        tol,
    ))
}

/// The frame {β_n(w)·e_k(θ(z), φ(w))} of M_{θ,φ} ⊖ z·M_{θ,φ} (for Z), or
/// {α_m(z)·f_l(θ(z), φ(w))} of M_{θ,φ} ⊖ w·M_{θ,φ} (for W), built from
/// the wedges of the source and orthonormal bases of K_φ or K_θ.
pub fn lifted_wedge_frame(
    l: &LiftedSubmodule,
    var: Variable,
) -> Result<impl Fn(BiPoint) -> Result<Vec<Complex64>> + '_> {
    let wedge = l.source.wedge(var, ZERO)?;
    Ok(move |p: BiPoint| {
        let inner = wedge.basis().values_at(l.map(p));
        let (zeros, x) = match var {
            Variable::Z => (l.phi.zeros(), p.w),
            Variable::W => (l.theta.zeros(), p.z),
        };
        let mut out = Vec::with_capacity(inner.len() * zeros.len());
        for m in 0..zeros.len() {
            let w = takenaka_value(zeros, m, x);
            out.extend(inner.iter().map(|e| w * e));
        }
        Ok(out)
    })
}

/// α_m(x) = √(1−|a_m|²)/(1 − ā_m x) · ∏_{k<m} (x − a_k)/(1 − ā_k x).
pub fn takenaka_value(zeros: &[Complex64], index: usize, x: Complex64) -> Complex64 {
    let a = zeros[index];
    let mut v = Complex64::new((1.0 - a.norm_sqr()).sqrt(), 0.0) / (ONE - a.conj() * x);
    for ak in &zeros[..index] {
        v *= (x - ak) / (ONE - ak.conj() * x);
    }
    v
}

/// Wedge kernel Σ e(zw)·conj(e(λμ)) of M ⊖ var·M at the current level.
pub fn wedge_kernel(
    m: &SubmoduleApprox,
    var: Variable,
) -> Result<impl Fn(BiPoint, BiPoint) -> Result<Complex64>> {
    let wedge = m.wedge(var, ZERO)?;
    Ok(move |lm: BiPoint, zw: BiPoint| {
        let a = wedge.basis().values_at(lm);
        let b = wedge.basis().values_at(zw);
        Ok(b.iter().zip(&a).map(|(x, y)| x * y.conj()).sum())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub name: String,
    pub size: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub pass: bool,
}

/// Smallest eigenvalue of the Gram matrix [K(p_j; p_i)].
pub fn kernel_psd_check(
    name: &str,
    kernel: &KernelEval<'_>,
    points: &[BiPoint],
) -> Result<PsdReport> {
    if points.is_empty() {
        return Err(invalid("need at least one point"));
    }
    let n = points.len();
    let mut gram = linalg::CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = kernel(points[j], points[i])?;
        }
    }
    let eig = linalg::hermitian_eigenvalues(gram.as_ref())?;
    let (min, max) = (eig[0], eig[n - 1]);
    if !min.is_finite() {
        return Err(BdkError::Linalg("non-finite Gram eigenvalue".into()));
    }
    Ok(PsdReport {
        name: name.to_string(),
        size: n,
        min_eigenvalue: min,
        max_eigenvalue: max,
        pass: min >= PSD_TOL,
    })
}
