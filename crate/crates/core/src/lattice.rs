//! Exponent lattices and the block decomposition of a coefficient grid.
//!
//! Monomials z^i w^j are grouped by the coset of (i, j) modulo a sublattice
//! L of Z². When every generator is supported on a single coset, spans of
//! monomial multiples split into independent blocks.

use std::collections::BTreeMap;

use crate::series::{Caps, Series2D};

/// Sublattice of Z² in Hermite normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// {0}: every monomial is its own coset.
    Trivial,
    /// Z·(a, b) with a > 0, or a = 0 and b > 0.
    Line(i64, i64),
    /// Rows (a, b), (0, c) with a, c > 0 and 0 ≤ b < c.
    Full(i64, i64, i64),
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Lattice {
    /// Lattice generated by the given vectors.
    pub fn generated_by(vectors: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut rows: Vec<(i64, i64)> = vectors.into_iter().filter(|v| *v != (0, 0)).collect();
        // Euclid on the first coordinate.
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&k| rows[k].0 != 0).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&k| rows[k].0.abs()).unwrap();
            let (px, py) = rows[p];
            for &k in &nonzero {
                if k != p {
                    let q = rows[k].0.div_euclid(px);
                    rows[k] = (rows[k].0 - q * px, rows[k].1 - q * py);
                }
            }
        }
        let pivot =
            rows.iter().copied().find(|v| v.0 != 0).map(
                |(x, y)| {
                    if x < 0 {
                        (-x, -y)
                    } else {
                        (x, y)
                    }
                },
            );
        let c = rows.iter().filter(|v| v.0 == 0).fold(0, |g, v| gcd(g, v.1));
        match (pivot, c) {
            (None, 0) => Lattice::Trivial,
            (None, c) => Lattice::Line(0, c),
            (Some((a, b)), 0) => Lattice::Line(a, b),
            (Some((a, b)), c) => Lattice::Full(a, b.rem_euclid(c), c),
        }
    }

    /// Lattice spanned by exponent differences inside each generator's support.
    pub fn of_generators(generators: &[Series2D]) -> Self {
        let mut diffs = Vec::new();
        for g in generators {
            let mut terms = g.terms();
            if let Some((_, i0, j0)) = terms.next() {
                for (_, i, j) in terms {
                    diffs.push((i as i64 - i0 as i64, j as i64 - j0 as i64));
                }
            }
        }
        Self::generated_by(diffs)
    }

    fn generators(&self) -> Vec<(i64, i64)> {
        match *self {
            Lattice::Trivial => vec![],
            Lattice::Line(a, b) => vec![(a, b)],
            Lattice::Full(a, b, c) => vec![(a, b), (0, c)],
        }
    }

    /// The smallest lattice containing `self` and `v`.
    pub fn join(&self, v: (i64, i64)) -> Self {
        let mut gens = self.generators();
        gens.push(v);
        Self::generated_by(gens)
    }

    /// Canonical representative of the coset of `v`.
    pub fn coset(&self, v: (i64, i64)) -> (i64, i64) {
        let (x, y) = v;
        match *self {
            Lattice::Trivial => v,
            Lattice::Line(0, c) => (x, y.rem_euclid(c)),
            Lattice::Line(a, b) => {
                let k = x.div_euclid(a);
                (x - k * a, y - k * b)
            }
            Lattice::Full(a, b, c) => {
                let k = x.div_euclid(a);
                (x - k * a, (y - k * b).rem_euclid(c))
            }
        }
    }

    pub fn contains(&self, v: (i64, i64)) -> bool {
        self.coset(v) == self.coset((0, 0))
    }
}

/// Partition of the monomials of a grid into lattice cosets.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    caps: Caps,
    lattice: Lattice,
    keys: Vec<(i64, i64)>,
    /// Monomial grid indices of each block, ascending.
    members: Vec<Vec<usize>>,
    /// For each grid index: (block, position within block).
    locate: Vec<(u32, u32)>,
}

impl BlockLayout {
    pub fn new(caps: Caps, lattice: Lattice) -> Self {
        let mut map: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for idx in 0..caps.grid_len() {
            let (i, j) = caps.exponents(idx);
            map.entry(lattice.coset((i as i64, j as i64)))
                .or_default()
                .push(idx);
        }
        let mut keys = Vec::with_capacity(map.len());
        let mut members = Vec::with_capacity(map.len());
        let mut locate = vec![(0u32, 0u32); caps.grid_len()];
        for (b, (key, idxs)) in map.into_iter().enumerate() {
            for (p, &idx) in idxs.iter().enumerate() {
                locate[idx] = (b as u32, p as u32);
            }
            keys.push(key);
            members.push(idxs);
        }
        Self {
            caps,
            lattice,
            keys,
            members,
            locate,
        }
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn num_blocks(&self) -> usize {
        self.keys.len()
    }

    pub fn members(&self, block: usize) -> &[usize] {
        &self.members[block]
    }

    pub fn block_size(&self, block: usize) -> usize {
        self.members[block].len()
    }

    /// Block containing the monomial z^i w^j.
    pub fn block_of(&self, i: usize, j: usize) -> usize {
        self.locate[self.caps.index(i, j)].0 as usize
    }

    pub fn locate(&self, grid_index: usize) -> (usize, usize) {
        let (b, p) = self.locate[grid_index];
        (b as usize, p as usize)
    }

    /// Block index for a coset key, if present in the grid.
    pub fn block_for_key(&self, key: (i64, i64)) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }
}
