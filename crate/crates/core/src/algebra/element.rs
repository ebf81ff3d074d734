use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{frob, hermitian_eigen, CMat, C64};

/// An element of a multi-matrix algebra: one square block per summand.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    blocks: Vec<CMat>,
}

impl Element {
    pub fn from_blocks(blocks: Vec<CMat>) -> Self {
        Element { blocks }
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [CMat] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn adjoint(&self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Element {
        Element {
            blocks: self.blocks.iter().map(|b| b * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Element {
        self.scale(C64::new(s, 0.0))
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| frob(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                crate::linalg::singular_values(b)
                    .first()
                    .copied()
                    .unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Unnormalized trace `Σ_blocks Tr`.
    pub fn raw_trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// `Σ_blocks Tr(x* y)`, the Frobenius inner product.
    pub fn frob_inner(&self, other: &Element) -> C64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum::<C64>()
            })
            .sum()
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| hermitian_eigen(b).0.first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_close(&self, other: &Element, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    /// `‖u*u − 1‖ + ‖uu* − 1‖`.
    pub fn unitarity_residual(&self) -> f64 {
        let one = Element::from_blocks(
            self.blocks
                .iter()
                .map(|b| CMat::identity(b.nrows(), b.ncols()))
                .collect(),
        );
        (&(&self.adjoint() * self) - &one).norm() + (&(self * &self.adjoint()) - &one).norm()
    }

    pub fn commutator(&self, other: &Element) -> Element {
        &(self * other) - &(other * self)
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|b| -b).collect(),
        }
    }
}

/// Sums `Σ coeffᵢ xᵢ`; `zero` fixes the shape for empty input.
pub fn linear_combination<'a>(
    zero: &Element,
    terms: impl IntoIterator<Item = (C64, &'a Element)>,
) -> Element {
    let mut acc = zero.clone();
    for (c, x) in terms {
        for (a, b) in acc.blocks.iter_mut().zip(&x.blocks) {
            a.zip_apply(b, |s, t| *s += c * t);
        }
    }
    acc
}
