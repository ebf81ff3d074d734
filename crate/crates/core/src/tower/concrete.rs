//! Basic construction on the GNS space of `ω = τ_B ∘ E`, realised inside
//! `M_{dim A}`. Used to cross-check the block-structured construction.

use crate::algebra::{
    decompose_subalgebra, generated_subalgebra, Element, MultiMatrixAlgebra, StarHomomorphism,
    SubalgebraBasis,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_fn, CMat};
use crate::tol::Tol;
use crate::traces::{ConditionalExpectation, TraceState};

#[derive(Debug, Clone)]
pub struct ConcreteBasicConstruction {
    /// `M_{dim A}` acting on `L²(A, ω)` in an orthonormal basis.
    pub space: MultiMatrixAlgebra,
    /// `λ(a_p)` for the matrix units `a_p` of `A`.
    pub lambda_images: Vec<Element>,
    pub jones: Element,
    pub a1: SubalgebraBasis,
    pub decomposition: (MultiMatrixAlgebra, StarHomomorphism),
}

pub fn concrete_basic_construction(
    e: &ConditionalExpectation,
    tau_b: Option<&TraceState>,
    tol: &Tol,
) -> Result<ConcreteBasicConstruction> {
    let inc = e.inclusion();
    let amb = inc.ambient();
    let tau = match tau_b {
        Some(t) => t.clone(),
        None => TraceState::canonical(inc.sub()),
    };
    tau.require_faithful()?;
    let d = amb.total_dim();
    let units = amb.matrix_units();
    let omega = |x: &Element| tau.eval(&e.apply_sub(x));
    let gram = CMat::from_fn(d, d, |p, q| omega(&(&units[p].adjoint() * &units[q])));
    let (vals, _) = hermitian_eigen(&gram);
    if vals[0] <= tol.rank * vals[d - 1] {
        return Err(Error::NotFaithful(format!(
            "GNS Gram matrix is singular (smallest eigenvalue {:e})",
            vals[0]
        )));
    }
    let half = hermitian_fn(&gram, f64::sqrt);
    let inv_half = hermitian_fn(&gram, |v| 1.0 / v.sqrt());
    let represent = |m: CMat| Element::from_blocks(vec![&half * m * &inv_half]);

    let mut lambda_images = Vec::with_capacity(d);
    for x in &units {
        let mut m = CMat::zeros(d, d);
        for (q, u) in units.iter().enumerate() {
            m.set_column(q, &amb.coords(&(x * u)));
        }
        lambda_images.push(represent(m));
    }
    let mut p = CMat::zeros(d, d);
    for (q, u) in units.iter().enumerate() {
        p.set_column(q, &amb.coords(&e.apply(u)));
    }
    let jones = represent(p);

    let space = MultiMatrixAlgebra::full(d);
    let mut gens = lambda_images.clone();
    gens.push(jones.clone());
    let a1 = generated_subalgebra(&space, &gens, tol)?;
    let decomposition = decompose_subalgebra(&a1, tol)?;
    Ok(ConcreteBasicConstruction {
        space,
        lambda_images,
        jones,
        a1,
        decomposition,
    })
}
