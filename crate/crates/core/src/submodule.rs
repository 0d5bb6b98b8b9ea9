//! Finite-level realizations of finitely generated submodules.
//!
//! At level N the submodule [g_1, ..., g_m] is replaced by
//! M_N = span{z^i w^j g_k : 0 ≤ i, j ≤ N}, inside the ambient grid with caps
//! (N + deg_z g, N + deg_w g).

use std::io::{Read, Write};
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::blocks::{
    self, candidates, factor_product, linear_factor, unit_factor, BlockBasis, MultiplierBox,
};
use crate::domain::{check_open_disk, BiPoint, RadiusGuard, Variable};
use crate::error::{invalid, BdkError, Result};
use crate::lattice::{BlockLayout, Lattice};
use crate::linalg::{self, CMat};
use crate::series::{Caps, Series2D};

/// Default relative rank threshold of the orthogonalization.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Absolute threshold on residual norms of unit candidates when splitting
/// off a wedge or a difference of nested spans.
pub const WEDGE_TOL: f64 = 1e-8;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the generators at a given level are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    /// Fixed polynomial generators.
    Polynomial(Vec<Series2D>),
    /// Generators g(θ(z), φ(w)), with Blaschke denominators cleared.
    Composed {
        base: Vec<Series2D>,
        theta: BlaschkeProduct,
        phi: BlaschkeProduct,
    },
}

impl GeneratorSource {
    pub fn generators_at(&self, _level: usize) -> Result<Vec<Series2D>> {
        match self {
            GeneratorSource::Polynomial(g) => Ok(g.clone()),
            GeneratorSource::Composed { base, theta, phi } => Ok(base
                .iter()
                .map(|g| cleared_composition(g, theta, phi))
                .collect()),
        }
    }
}

fn poly_powers(p: &[Complex64], n: usize) -> Vec<Vec<Complex64>> {
    let mut out = vec![vec![ONE]];
    for k in 1..=n {
        let prev = &out[k - 1];
        let mut next = vec![ZERO; prev.len() + p.len() - 1];
        for (i, a) in prev.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out.push(next);
    }
    out
}

/// g(θ(z), φ(w)) multiplied by D_θ(z)^{deg_z g}·D_φ(w)^{deg_w g}, where
/// D is the Blaschke denominator ∏(1 − ā_k ·). The factor is invertible
/// in H^∞, so the result generates the same submodule and is a polynomial.
pub fn cleared_composition(
    g: &Series2D,
    theta: &BlaschkeProduct,
    phi: &BlaschkeProduct,
) -> Series2D {
    let sup = g.support_caps();
    let (tn, td) = theta.numerator_denominator();
    let (pn, pd) = phi.numerator_denominator();
    let (tnp, tdp) = (poly_powers(&tn, sup.z), poly_powers(&td, sup.z));
    let (pnp, pdp) = (poly_powers(&pn, sup.w), poly_powers(&pd, sup.w));
    let caps = Caps::new(sup.z * theta.degree(), sup.w * phi.degree());
    let mut out = Series2D::zero(caps);
    for (c, i, j) in g.terms() {
        let zpart = poly_product(&tnp[i], &tdp[sup.z - i]);
        let wpart = poly_product(&pnp[j], &pdp[sup.w - j]);
        for (p, x) in zpart.iter().enumerate() {
            for (q, y) in wpart.iter().enumerate() {
                let v = out.coeff(p, q) + c * x * y;
                out.set(p, q, v);
            }
        }
    }
    out
}

fn poly_product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Orthonormal basis of M_N for a finitely generated submodule.
#[derive(Debug, Clone)]
pub struct SubmoduleApprox {
    source: GeneratorSource,
    generators: Vec<Series2D>,
    level: usize,
    rank_tol: f64,
    lattice: Lattice,
    basis: BlockBasis,
}

/// Normalizes nonzero generators and trims them to their support.
fn prepare_generators(generators: &[Series2D]) -> Result<Vec<Series2D>> {
    if generators
        .iter()
        .any(|g| g.coeffs().iter().any(|c| !c.is_finite()))
    {
        return Err(invalid("non-finite generator coefficient"));
    }
    let out: Vec<Series2D> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            g.truncated(g.support_caps())
                .scaled(Complex64::new(1.0 / g.norm(), 0.0))
        })
        .collect();
    if out.is_empty() {
        return Err(invalid("the generator set is empty or identically zero"));
    }
    Ok(out)
}

/// Builds M_N = span{z^i w^j g_k} by rank-revealing orthogonalization.
pub fn build_submodule(
    generators: &[Series2D],
    level: usize,
    rank_tol: f64,
) -> Result<SubmoduleApprox> {
    SubmoduleApprox::build(
        GeneratorSource::Polynomial(generators.to_vec()),
        level,
        rank_tol,
    )
}

impl SubmoduleApprox {
    pub fn build(source: GeneratorSource, level: usize, rank_tol: f64) -> Result<Self> {
        if level == 0 {
            return Err(invalid("level must be at least 1"));
        }
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(invalid(format!("rank tolerance {rank_tol} outside (0, 1)")));
        }
        let generators = prepare_generators(&source.generators_at(level)?)?;
        let deg = generators
            .iter()
            .fold(Caps::new(0, 0), |acc, g| acc.max(g.caps()));
        if deg.z.max(deg.w) > level {
            return Err(invalid(format!(
                "level {level} is below the generator degree {}",
                deg.z.max(deg.w)
            )));
        }
        let caps = Caps::new(level + deg.z, level + deg.w);
        let lattice = Lattice::of_generators(&generators);
        let layout = Arc::new(BlockLayout::new(caps, lattice));
        let cands = candidates(
            &layout,
            &generators,
            MultiplierBox {
                z_max: level,
                w_max: level,
            },
            &unit_factor(),
        );
        let basis = BlockBasis::orthonormalize(layout, &cands, rank_tol);
        Ok(Self {
            source,
            generators,
            level,
            rank_tol,
            lattice,
            basis,
        })
    }

    /// The same submodule rebuilt at level N + delta.
    pub fn refined(&self, delta: usize) -> Result<Self> {
        Self::build(self.source.clone(), self.level + delta, self.rank_tol)
    }

    /// The same submodule rebuilt at another level.
    pub fn at_level(&self, level: usize) -> Result<Self> {
        Self::build(self.source.clone(), level, self.rank_tol)
    }

    pub fn source(&self) -> &GeneratorSource {
        &self.source
    }

    /// Normalized generators actually used at this level.
    pub fn generators(&self) -> &[Series2D] {
        &self.generators
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn caps(&self) -> Caps {
        self.basis.caps()
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &BlockBasis {
        &self.basis
    }

    /// Basis vectors as series on the ambient caps.
    pub fn basis_series(&self) -> Vec<Series2D> {
        self.basis.to_series()
    }

    /// Layout whose blocks are invariant under the given Möbius shifts.
    fn layout_for(&self, shifts: &[(Variable, Complex64)]) -> Arc<BlockLayout> {
        let mut lattice = self.lattice;
        for &(var, a) in shifts {
            if a != ZERO {
                lattice = lattice.join(var.step());
            }
        }
        if lattice == self.lattice {
            self.basis.layout_arc().clone()
        } else {
            Arc::new(BlockLayout::new(self.caps(), lattice))
        }
    }

    fn cands(
        &self,
        layout: &BlockLayout,
        z_max: usize,
        w_max: usize,
        factor: &blocks::Factor,
    ) -> Vec<CMat> {
        candidates(
            layout,
            &self.generators,
            MultiplierBox { z_max, w_max },
            factor,
        )
    }

    /// Orthonormal basis of span(shifted) ⊕ residual: the part of
    /// span(top) orthogonal to the already orthonormalized `lower`.
    fn complement(layout: &Arc<BlockLayout>, lower: &BlockBasis, top: &[CMat]) -> BlockBasis {
        let resid = blocks::project_out_blocks(lower.blocks(), top);
        let blocks = resid
            .iter()
            .map(|r| linalg::orthonormal_columns_abs(r.as_ref(), WEDGE_TOL))
            .collect();
        BlockBasis::new(layout.clone(), blocks)
    }

    /// Orthonormal basis of (var − a)·M_{N−1}, where M_{N−1} lowers only
    /// the multiplier degree in `var`.
    fn shifted_span(&self, layout: &Arc<BlockLayout>, var: Variable, a: Complex64) -> BlockBasis {
        let n = self.level;
        let (zm, wm) = match var {
            Variable::Z => (n - 1, n),
            Variable::W => (n, n - 1),
        };
        let s = var.step();
        let factor = linear_factor((s.0 as usize, s.1 as usize), a);
        BlockBasis::orthonormalize(
            layout.clone(),
            &self.cands(layout, zm, wm, &factor),
            self.rank_tol,
        )
    }

    /// The wedge space M_N ⊖ (var − a)·M_{N−1}.
    pub fn wedge(&self, var: Variable, a: Complex64) -> Result<WedgeBasis> {
        check_open_disk(a, "wedge point")?;
        let layout = self.layout_for(&[(var, a)]);
        let shifted = self.shifted_span(&layout, var, a);
        let n = self.level;
        let (zm, wm) = match var {
            Variable::Z => (0, n),
            Variable::W => (n, 0),
        };
        let top = self.cands(&layout, zm, wm, &unit_factor());
        let basis = Self::complement(&layout, &shifted, &top);
        Ok(WedgeBasis {
            variable: var,
            point: a,
            level: n,
            shifted_dim: shifted.dim(),
            basis,
        })
    }

    /// Bases E = M_N ⊖ S1 and F = S2 ⊖ S3 with S1 = (z−a)M, S2 = (w−b)M,
    /// S3 = (z−a)(w−b)M at the appropriate multiplier levels, so that the
    /// core operator is P_E − P_F.
    fn core_pieces(&self, a: Complex64, b: Complex64) -> Result<(BlockBasis, BlockBasis)> {
        check_open_disk(a, "core operator point")?;
        check_open_disk(b, "core operator point")?;
        let layout = self.layout_for(&[(Variable::Z, a), (Variable::W, b)]);
        let n = self.level;
        let fz = linear_factor((1, 0), a);
        let fw = linear_factor((0, 1), b);
        let s1 = BlockBasis::orthonormalize(
            layout.clone(),
            &self.cands(&layout, n - 1, n, &fz),
            self.rank_tol,
        );
        let e = Self::complement(&layout, &s1, &self.cands(&layout, 0, n, &unit_factor()));
        let s3 = BlockBasis::orthonormalize(
            layout.clone(),
            &self.cands(&layout, n - 1, n - 1, &factor_product(&fz, &fw)),
            self.rank_tol,
        );
        let f = Self::complement(&layout, &s3, &self.cands(&layout, 0, n - 1, &fw));
        Ok((e, f))
    }

    /// ‖C_N(a, b)‖²_HS = dim E + dim F − 2‖E*F‖² for the current level.
    pub(crate) fn core_hs_sqr(&self, a: Complex64, b: Complex64) -> Result<f64> {
        let (e, f) = self.core_pieces(a, b)?;
        let cross: f64 = blocks::cross_gram(&e, &f)
            .iter()
            .map(|g| linalg::frobenius_sqr(g.as_ref()))
            .sum();
        Ok(e.dim() as f64 + f.dim() as f64 - 2.0 * cross)
    }

    /// Matrix of C_N(a, b) in the basis of M_N.
    pub fn core_operator_matrix(&self, a: Complex64, b: Complex64) -> Result<CoreOperatorMatrix> {
        let (e, f) = self.core_pieces(a, b)?;
        let basis = self.basis.regroup(e.layout_arc());
        let r = self.dim();
        let mut entries = CMat::zeros(r, r);
        for (blk, q) in basis.blocks().iter().enumerate() {
            let qe = q.adjoint() * &e.blocks()[blk];
            let qf = q.adjoint() * &f.blocks()[blk];
            let local = &qe * qe.adjoint() - &qf * qf.adjoint();
            let labels = &basis.labels()[blk];
            for (i, &li) in labels.iter().enumerate() {
                for (j, &lj) in labels.iter().enumerate() {
                    entries[(li, lj)] = local[(i, j)];
                }
            }
        }
        Ok(CoreOperatorMatrix {
            entries,
            point: (a, b),
        })
    }

    /// Matrices of R_z = T_z P_{M_{N−1}} and R_w in the basis of M_N.
    ///
    /// Multiplication by z is applied to the part of M_N lying in the
    /// z-lowered span, where it stays inside M_N without truncation.
    pub fn shift_compressions(&self) -> (CMat, CMat) {
        let q = self.basis.dense();
        let layout = self.basis.layout_arc().clone();
        let n = self.level;
        let caps = self.caps();
        let one = unit_factor();
        let compress = |var: Variable| {
            let (zm, wm) = match var {
                Variable::Z => (n - 1, n),
                Variable::W => (n, n - 1),
            };
            let lower = BlockBasis::orthonormalize(
                layout.clone(),
                &self.cands(&layout, zm, wm, &one),
                self.rank_tol,
            );
            let u = lower.dense();
            let (dz, dw) = match var {
                Variable::Z => (1, 0),
                Variable::W => (0, 1),
            };
            let mut shifted = CMat::zeros(u.nrows(), u.ncols());
            for idx in 0..caps.grid_len() {
                let (i, j) = caps.exponents(idx);
                if caps.contains(i + dz, j + dw) {
                    let dst = caps.index(i + dz, j + dw);
                    for k in 0..u.ncols() {
                        shifted[(dst, k)] = u[(idx, k)];
                    }
                }
            }
            let coords = u.adjoint() * &q;
            q.adjoint() * &shifted * &coords
        };
        (compress(Variable::Z), compress(Variable::W))
    }

    /// Truncated reproducing kernel K(λμ; zw) = Σ e_k(z,w)·conj(e_k(λ,μ)).
    pub fn kernel_eval(&self, lm: BiPoint, zw: BiPoint, guard: RadiusGuard) -> Result<Complex64> {
        guard.check_point(lm)?;
        guard.check_point(zw)?;
        let a = self.basis.values_at(lm);
        let b = self.basis.values_at(zw);
        Ok(b.iter().zip(&a).map(|(x, y)| x * y.conj()).sum())
    }

    /// Core function G = (1 − λ̄z)(1 − μ̄w)·K.
    pub fn core_function_eval(
        &self,
        lm: BiPoint,
        zw: BiPoint,
        guard: RadiusGuard,
    ) -> Result<Complex64> {
        let k = self.kernel_eval(lm, zw, guard)?;
        Ok((ONE - lm.z.conj() * zw.z) * (ONE - lm.w.conj() * zw.w) * k)
    }

    /// Kernel Gram matrix [K(p_j; p_i)] over a point set.
    pub fn kernel_gram(&self, points: &[BiPoint], guard: RadiusGuard) -> Result<CMat> {
        for p in points {
            guard.check_point(*p)?;
        }
        let values: Vec<Vec<Complex64>> = points.iter().map(|p| self.basis.values_at(*p)).collect();
        let v = Mat::from_fn(points.len(), self.dim(), |i, k| values[i][k]);
        Ok(&v * v.adjoint())
    }

    /// Metadata record for JSON export.
    pub fn export(&self) -> SubmoduleExport {
        SubmoduleExport {
            generators: self.generators.clone(),
            level: self.level,
            rank_tol: self.rank_tol,
            basis_dim: self.dim(),
        }
    }

    /// Writes the basis as a column-major complex array with a 16-byte header.
    pub fn write_basis_binary(&self, out: &mut impl Write) -> std::io::Result<()> {
        write_matrix_binary(&self.basis.dense(), out)
    }
}

/// JSON export record of a submodule approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmoduleExport {
    pub generators: Vec<Series2D>,
    pub level: usize,
    pub rank_tol: f64,
    pub basis_dim: usize,
}

pub const BASIS_MAGIC: [u8; 4] = *b"BDKM";
pub const BASIS_FORMAT_VERSION: u32 = 1;

/// Header: magic, version, rows, cols (little-endian u32), then
/// column-major (re, im) f64 pairs.
pub fn write_matrix_binary(m: &CMat, out: &mut impl Write) -> std::io::Result<()> {
    let too_big = || std::io::Error::new(std::io::ErrorKind::InvalidInput, "matrix too large");
    out.write_all(&BASIS_MAGIC)?;
    out.write_all(&BASIS_FORMAT_VERSION.to_le_bytes())?;
    out.write_all(
        &u32::try_from(m.nrows())
            .map_err(|_| too_big())?
            .to_le_bytes(),
    )?;
    out.write_all(
        &u32::try_from(m.ncols())
            .map_err(|_| too_big())?
            .to_le_bytes(),
    )?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let c = m[(i, j)];
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary(input: &mut impl Read) -> Result<CMat> {
    let io = |e: std::io::Error| invalid(format!("basis file: {e}"));
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(io)?;
    if header[..4] != BASIS_MAGIC {
        return Err(invalid("basis file: bad magic"));
    }
    let word = |k: usize| u32::from_le_bytes(header[4 * k..4 * k + 4].try_into().unwrap());
    if word(1) != BASIS_FORMAT_VERSION {
        return Err(invalid(format!(
            "basis file: unsupported version {}",
            word(1)
        )));
    }
    let (rows, cols) = (word(2) as usize, word(3) as usize);
    let mut data = vec![0u8; rows * cols * 16];
    input.read_exact(&mut data).map_err(io)?;
    let f = |off: usize| f64::from_le_bytes(data[off..off + 8].try_into().unwrap());
    Ok(Mat::from_fn(rows, cols, |i, j| {
        let off = 16 * (j * rows + i);
        Complex64::new(f(off), f(off + 8))
    }))
}

/// Orthonormal basis of M_N ⊖ (var − a)·M_{N−1}.
#[derive(Debug, Clone)]
pub struct WedgeBasis {
    variable: Variable,
    point: Complex64,
    level: usize,
    shifted_dim: usize,
    basis: BlockBasis,
}

impl WedgeBasis {
    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn caps(&self) -> Caps {
        self.basis.caps()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Dimension of the removed shifted copy (var − a)·M_{N−1}.
    pub fn shifted_dim(&self) -> usize {
        self.shifted_dim
    }

    pub fn basis(&self) -> &BlockBasis {
        &self.basis
    }

    pub fn to_series(&self) -> Vec<Series2D> {
        self.basis.to_series()
    }

    /// Dense ambient coefficient matrix (grid length × dim).
    pub fn dense(&self) -> CMat {
        self.basis.dense()
    }
}

/// Free-function form of [`SubmoduleApprox::wedge`].
pub fn wedge(m: &SubmoduleApprox, var: Variable, a: Complex64) -> Result<WedgeBasis> {
    m.wedge(var, a)
}

/// Hermitian matrix of the core operator C_N(a, b) in the basis of M_N.
#[derive(Debug, Clone)]
pub struct CoreOperatorMatrix {
    entries: CMat,
    point: (Complex64, Complex64),
}

impl CoreOperatorMatrix {
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn point(&self) -> (Complex64, Complex64) {
        self.point
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.entries.nrows())
            .map(|i| self.entries[(i, i)])
            .sum()
    }

    pub fn hs_norm_sqr(&self) -> f64 {
        linalg::frobenius_sqr(self.entries.as_ref())
    }

    /// Largest entry of C − C*.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// C = I − RzRz* − RwRw* + RzRwRz*Rw* from shift compressions.
pub fn core_from_compressions(rz: &CMat, rw: &CMat) -> CMat {
    let n = rz.nrows();
    let id = Mat::<Complex64>::identity(n, n);
    let rzs = rz.adjoint().to_owned();
    let rws = rw.adjoint().to_owned();
    &id - rz * &rzs - rw * &rws + rz * rw * &rzs * &rws
}

/// Largest principal-angle sine between two orthonormal column spans of
/// equal dimension: ‖(I − P_B) A‖₂.
pub fn span_distance(a: &CMat, b: &CMat) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(BdkError::InvalidInput("span dimensions disagree".into()));
    }
    let resid = linalg::project_out(b.as_ref(), a.as_ref());
    Ok(linalg::singular_values(resid.as_ref())?
        .first()
        .copied()
        .unwrap_or(0.0))
}
