use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{linear_combination, Element, MultiMatrixAlgebra, StarHomomorphism};
use crate::error::{Error, Result};
use crate::linalg::{null_space_scaled, polar_unitary, singular_values, CMat, C64};
use crate::tol::Tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Inner,
    Outer,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Inner => "inner",
            Classification::Outer => "outer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AutomorphismReport {
    pub classification: Classification,
    /// No nonzero `y` with `yx = θ(x)y` for all `x`.
    pub free: bool,
    pub intertwiner_dim: usize,
    /// Unitary `w` with `θ = Ad(w)`, when inner.
    pub witness: Option<Element>,
    /// `max ‖w x w* − θ(x)‖` over matrix units, when a witness exists.
    pub witness_residual: f64,
    pub center_trivial: bool,
    /// On a trivial center, whether "outer" and "free" agree.
    pub consistent: bool,
}

/// Solves `yx = θ(x)y` for all matrix units `x` and decides innerness from a
/// generic intertwiner.
pub fn classify_automorphism(
    c: &MultiMatrixAlgebra,
    theta: &StarHomomorphism,
    tol: &Tol,
) -> Result<AutomorphismReport> {
    if theta.source() != c || theta.target() != c {
        return Err(Error::NotAutomorphism("map must send C to C".into()));
    }
    let rep = theta.verify();
    if !(rep.passes(tol) && rep.injective) {
        return Err(Error::NotAutomorphism(format!("{rep:?}")));
    }
    let d = c.total_dim();
    let units = c.matrix_units();
    let basis = c.matrix_units();
    let mut stacked = CMat::zeros(units.len() * d, d);
    for (k, y) in basis.iter().enumerate() {
        for (p, x) in units.iter().enumerate() {
            let v = c.coords(&(&(y * x) - &(&theta.apply(x) * y)));
            stacked.view_mut((p * d, k), (d, 1)).copy_from(&v);
        }
    }
    let ker = null_space_scaled(&stacked, tol.rank, 2.0);
    let intertwiner_dim = ker.ncols();
    let free = intertwiner_dim == 0;

    let mut witness = None;
    let mut witness_residual = f64::INFINITY;
    if !free {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e);
        let coeffs: Vec<C64> = (0..intertwiner_dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let v = &ker * nalgebra::DVector::from_vec(coeffs);
        let y = linear_combination(&c.zero(), v.iter().copied().zip(basis.iter()));
        let invertible = y.blocks().iter().all(|b| {
            let s = singular_values(b);
            let top = s.iter().copied().fold(0.0, f64::max);
            s.iter().all(|&x| x > tol.rank.sqrt() * top.max(1.0))
        });
        if invertible {
            let w = Element::from_blocks(y.blocks().iter().map(polar_unitary).collect());
            witness_residual = units
                .iter()
                .map(|x| (&(&(&w * x) * &w.adjoint()) - &theta.apply(x)).norm())
                .fold(0.0, f64::max);
            witness = Some(w);
        }
    }
    let classification = if witness.is_some() && tol.ok(witness_residual) {
        Classification::Inner
    } else {
        Classification::Outer
    };
    if classification == Classification::Outer {
        witness = None;
        witness_residual = f64::INFINITY;
    }
    let center_trivial = c.num_blocks() == 1;
    let consistent = !center_trivial || ((classification == Classification::Outer) == free);
    Ok(AutomorphismReport {
        classification,
        free,
        intertwiner_dim,
        witness,
        witness_residual,
        center_trivial,
        consistent,
    })
}
