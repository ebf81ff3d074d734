//! Finite-dimensional C*-algebras in abstract block form.
//!
//! Every algebra is `M_{n_1} ⊕ … ⊕ M_{n_k}`; elements are tuples of square
//! complex blocks. Linear coordinates are the entries of the blocks in
//! row-major order, block after block, which coincides with the
//! lexicographic `(block, row, column)` ordering of the matrix units.

mod element;
mod hom;
mod subalgebra;

pub use element::{linear_combination, Element};
pub use hom::{HomReport, StarHomomorphism, UnitalInclusion};
pub use subalgebra::{
    commutant_by_kernel, decompose_subalgebra, generated_subalgebra, relative_commutant,
    relative_commutant_decomposed, SubalgebraBasis,
};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ONE};

/// The abstract algebra `⊕ᵢ M_{nᵢ}(ℂ)`, described by its dimension vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiMatrixAlgebra {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl MultiMatrixAlgebra {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidAlgebra("empty dimension vector".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidAlgebra(format!(
                "zero block in dimension vector {dims:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &n in &dims {
            offsets.push(acc);
            acc += n * n;
        }
        Ok(MultiMatrixAlgebra {
            dims,
            offsets,
            total_dim: acc,
        })
    }

    /// `M_n(ℂ)`.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n]).expect("n >= 1")
    }

    /// `ℂ^k`, the commutative algebra with `k` one-dimensional blocks.
    pub fn diagonal(k: usize) -> Self {
        Self::new(vec![1; k]).expect("k >= 1")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// `Σ nᵢ²`.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn block_offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn unit_index(&self, block: usize, row: usize, col: usize) -> usize {
        self.offsets[block] + row * self.dims[block] + col
    }

    /// Inverse of [`unit_index`](Self::unit_index).
    pub fn unit_label(&self, index: usize) -> (usize, usize, usize) {
        let block = match self.offsets.binary_search(&index) {
            Ok(b) => b,
            Err(b) => b - 1,
        };
        let n = self.dims[block];
        let local = index - self.offsets[block];
        (block, local / n, local % n)
    }

    pub fn zero(&self) -> Element {
        Element::from_blocks(self.dims.iter().map(|&n| CMat::zeros(n, n)).collect())
    }

    pub fn one(&self) -> Element {
        Element::from_blocks(self.dims.iter().map(|&n| CMat::identity(n, n)).collect())
    }

    pub fn unit(&self, block: usize, row: usize, col: usize) -> Element {
        let mut x = self.zero();
        x.blocks_mut()[block][(row, col)] = ONE;
        x
    }

    /// Minimal central projection of block `block`.
    pub fn central_projection(&self, block: usize) -> Element {
        let mut x = self.zero();
        let n = self.dims[block];
        x.blocks_mut()[block] = CMat::identity(n, n);
        x
    }

    /// Embeds a single block into the algebra, zero elsewhere.
    pub fn from_block(&self, block: usize, m: CMat) -> Result<Element> {
        let n = self.dims[block];
        if m.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "block {block} expects {n}x{n}, got {:?}",
                m.shape()
            )));
        }
        let mut x = self.zero();
        x.blocks_mut()[block] = m;
        Ok(x)
    }

    /// The system of matrix units `e^{(i)}_{(κ,β)}`, lexicographic in `(i, κ, β)`.
    pub fn matrix_units(&self) -> Vec<Element> {
        (0..self.total_dim)
            .map(|idx| {
                let (b, k, l) = self.unit_label(idx);
                self.unit(b, k, l)
            })
            .collect()
    }

    pub fn coords(&self, x: &Element) -> CVec {
        debug_assert!(self.contains_shape(x));
        let mut v = CVec::zeros(self.total_dim);
        for (b, blk) in x.blocks().iter().enumerate() {
            let n = self.dims[b];
            let off = self.offsets[b];
            for i in 0..n {
                for j in 0..n {
                    v[off + i * n + j] = blk[(i, j)];
                }
            }
        }
        v
    }

    pub fn element(&self, v: &CVec) -> Element {
        assert_eq!(v.len(), self.total_dim, "coordinate length mismatch");
        let blocks = self
            .dims
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &off)| CMat::from_fn(n, n, |i, j| v[off + i * n + j]))
            .collect();
        Element::from_blocks(blocks)
    }

    pub fn contains_shape(&self, x: &Element) -> bool {
        x.blocks().len() == self.dims.len()
            && x.blocks()
                .iter()
                .zip(&self.dims)
                .all(|(b, &n)| b.shape() == (n, n))
    }

    pub fn check(&self, x: &Element) -> Result<()> {
        if self.contains_shape(x) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "element with block shapes {:?} is not in algebra {:?}",
                x.blocks().iter().map(|b| b.shape()).collect::<Vec<_>>(),
                self.dims
            )))
        }
    }

    /// Linear basis of the center: the minimal central projections.
    pub fn center_basis(&self) -> Vec<Element> {
        (0..self.num_blocks())
            .map(|b| self.central_projection(b))
            .collect()
    }

    /// Residual of `x` from commuting with every matrix unit.
    pub fn centrality_residual(&self, x: &Element) -> f64 {
        self.matrix_units()
            .iter()
            .map(|u| (&(x * u) - &(u * x)).norm())
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for MultiMatrixAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .dims
            .iter()
            .map(|&n| {
                if n == 1 {
                    "C".to_string()
                } else {
                    format!("M{n}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}
