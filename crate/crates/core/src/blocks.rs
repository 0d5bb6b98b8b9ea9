//! Block-structured families of coefficient columns.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;

use crate::domain::BiPoint;
use crate::lattice::BlockLayout;
use crate::linalg::{self, CMat};
use crate::series::{Caps, Series2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse polynomial factor given by its terms (c, i, j).
pub(crate) type Factor = Vec<(Complex64, usize, usize)>;

pub(crate) fn unit_factor() -> Factor {
    vec![(Complex64::new(1.0, 0.0), 0, 0)]
}

/// (var − a) as a sparse factor; `step` is (1,0) for z and (0,1) for w.
pub(crate) fn linear_factor(step: (usize, usize), a: Complex64) -> Factor {
    let mut f = vec![(Complex64::new(1.0, 0.0), step.0, step.1)];
    if a != ZERO {
        f.push((-a, 0, 0));
    }
    f
}

pub(crate) fn factor_product(f: &Factor, g: &Factor) -> Factor {
    let mut out: Factor = Vec::new();
    for &(a, i, j) in f {
        for &(b, k, l) in g {
            match out.iter_mut().find(|t| t.1 == i + k && t.2 == j + l) {
                Some(t) => t.0 += a * b,
                None => out.push((a * b, i + k, j + l)),
            }
        }
    }
    out
}

/// Multipliers z^i w^j with i ≤ z_max, j ≤ w_max (inclusive upper bounds).
#[derive(Debug, Clone, Copy)]
pub(crate) struct MultiplierBox {
    pub z_max: usize,
    pub w_max: usize,
}

impl MultiplierBox {
    /// Graded order: total degree, then z-degree.
    fn ordered(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity((self.z_max + 1) * (self.w_max + 1));
        for total in 0..=self.z_max + self.w_max {
            for i in (0..=total.min(self.z_max)).rev() {
                let j = total - i;
                if j <= self.w_max {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Candidate columns z^i w^j · factor · g_k, grouped into the blocks of `layout`.
pub(crate) fn candidates(
    layout: &BlockLayout,
    generators: &[Series2D],
    multipliers: MultiplierBox,
    factor: &Factor,
) -> Vec<CMat> {
    let caps = layout.caps();
    let gen_terms: Vec<Factor> = generators
        .iter()
        .map(|g| factor_product(&g.terms().collect(), factor))
        .collect();
    let mut counts = vec![0usize; layout.num_blocks()];
    let mut placed: Vec<(usize, Vec<(usize, Complex64)>)> = Vec::new();
    for (i, j) in multipliers.ordered() {
        for terms in &gen_terms {
            let mut col = Vec::with_capacity(terms.len());
            let mut block = None;
            for &(c, p, q) in terms {
                if c == ZERO {
                    continue;
                }
                let (zi, wj) = (p + i, q + j);
                debug_assert!(caps.contains(zi, wj), "candidate leaves the ambient caps");
                let (b, pos) = layout.locate(caps.index(zi, wj));
                debug_assert!(block.is_none_or(|bb| bb == b), "factor is not homogeneous");
                block = Some(b);
                col.push((pos, c));
            }
            if let Some(b) = block {
                counts[b] += 1;
                placed.push((b, col));
            }
        }
    }
    let mut mats: Vec<CMat> = (0..layout.num_blocks())
        .map(|b| CMat::zeros(layout.block_size(b), counts[b]))
        .collect();
    let mut next = vec![0usize; layout.num_blocks()];
    for (b, col) in placed {
        let k = next[b];
        next[b] += 1;
        for (pos, c) in col {
            mats[b][(pos, k)] += c;
        }
    }
    mats
}

/// Orthonormal columns stored per block of a layout.
#[derive(Debug, Clone)]
pub struct BlockBasis {
    layout: Arc<BlockLayout>,
    blocks: Vec<CMat>,
    /// Global column index of each block column, in the owning family's order.
    labels: Vec<Vec<usize>>,
}

impl BlockBasis {
    pub(crate) fn new(layout: Arc<BlockLayout>, blocks: Vec<CMat>) -> Self {
        let mut next = 0;
        let labels = blocks
            .iter()
            .map(|m| {
                let l: Vec<usize> = (next..next + m.ncols()).collect();
                next += m.ncols();
                l
            })
            .collect();
        Self {
            layout,
            blocks,
            labels,
        }
    }

    pub(crate) fn orthonormalize(layout: Arc<BlockLayout>, cands: &[CMat], rel_tol: f64) -> Self {
        let blocks = cands
            .iter()
            .map(|c| linalg::orthonormal_columns(c.as_ref(), rel_tol))
            .collect();
        Self::new(layout, blocks)
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub(crate) fn layout_arc(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn caps(&self) -> Caps {
        self.layout.caps()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.ncols()).sum()
    }

    pub(crate) fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub(crate) fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    /// The basis vectors as series on the ambient caps, in global order.
    pub fn to_series(&self) -> Vec<Series2D> {
        let caps = self.caps();
        let mut out = vec![Series2D::zero(caps); self.dim()];
        for (b, m) in self.blocks.iter().enumerate() {
            let members = self.layout.members(b);
            for (k, &label) in self.labels[b].iter().enumerate() {
                let s = &mut out[label];
                for (p, &idx) in members.iter().enumerate() {
                    let (i, j) = caps.exponents(idx);
                    s.set(i, j, m[(p, k)]);
                }
            }
        }
        out
    }

    /// Dense ambient matrix (grid length × dim), columns in global order.
    pub fn dense(&self) -> CMat {
        let mut out = CMat::zeros(self.caps().grid_len(), self.dim());
        for (b, m) in self.blocks.iter().enumerate() {
            let members = self.layout.members(b);
            for (k, &label) in self.labels[b].iter().enumerate() {
                for (p, &idx) in members.iter().enumerate() {
                    out[(idx, label)] = m[(p, k)];
                }
            }
        }
        out
    }

    /// Values of every basis vector at a point, in global order.
    pub fn values_at(&self, point: BiPoint) -> Vec<Complex64> {
        let caps = self.caps();
        let zp = powers(point.z, caps.z);
        let wp = powers(point.w, caps.w);
        let mut out = vec![ZERO; self.dim()];
        for (b, m) in self.blocks.iter().enumerate() {
            let members = self.layout.members(b);
            let mono: Vec<Complex64> = members
                .iter()
                .map(|&idx| {
                    let (i, j) = caps.exponents(idx);
                    zp[i] * wp[j]
                })
                .collect();
            for (k, &label) in self.labels[b].iter().enumerate() {
                let col = m.col(k);
                out[label] = mono.iter().enumerate().map(|(p, v)| col[p] * v).sum();
            }
        }
        out
    }

    /// The same columns grouped by a coarser layout on the same caps.
    pub(crate) fn regroup(&self, layout: &Arc<BlockLayout>) -> Self {
        if Arc::ptr_eq(layout, &self.layout) || layout.lattice() == self.layout.lattice() {
            return Self {
                layout: layout.clone(),
                ..self.clone()
            };
        }
        let caps = self.caps();
        debug_assert_eq!(caps, layout.caps());
        let nb = layout.num_blocks();
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); nb];
        for b in 0..self.blocks.len() {
            if let Some(&first) = self.layout.members(b).first() {
                owners[layout.locate(first).0].push(b);
            }
        }
        let mut blocks = Vec::with_capacity(nb);
        let mut labels = Vec::with_capacity(nb);
        for (nbk, olds) in owners.iter().enumerate() {
            let ncols: usize = olds.iter().map(|&b| self.blocks[b].ncols()).sum();
            let mut m = CMat::zeros(layout.block_size(nbk), ncols);
            let mut lab = Vec::with_capacity(ncols);
            let mut col0 = 0;
            for &b in olds {
                let src = &self.blocks[b];
                for (p, &idx) in self.layout.members(b).iter().enumerate() {
                    let row = layout.locate(idx).1;
                    for k in 0..src.ncols() {
                        m[(row, col0 + k)] = src[(p, k)];
                    }
                }
                lab.extend_from_slice(&self.labels[b]);
                col0 += src.ncols();
            }
            blocks.push(m);
            labels.push(lab);
        }
        Self {
            layout: layout.clone(),
            blocks,
            labels,
        }
    }
}

pub(crate) fn powers(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(acc);
        acc *= x;
    }
    out
}

/// Residual of `x` after removing the span of `basis`, block by block.
pub(crate) fn project_out_blocks(basis: &[CMat], x: &[CMat]) -> Vec<CMat> {
    basis
        .iter()
        .zip(x)
        .map(|(b, c)| linalg::project_out(b.as_ref(), c.as_ref()))
        .collect()
}

/// Block-wise cross Gram matrices B1* B2.
pub(crate) fn cross_gram(a: &BlockBasis, b: &BlockBasis) -> Vec<Mat<Complex64>> {
    a.blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| x.adjoint() * y)
        .collect()
}
