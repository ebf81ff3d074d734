//! Frequently used inclusions, matrices and group actions.

use crate::algebra::{Element, MultiMatrixAlgebra, StarHomomorphism, UnitalInclusion};
use crate::group::{conjugation, CocycleAction, FiniteGroup};
use crate::linalg::{c, kron, r, CMat, ONE, ZERO};
use crate::tol::Tol;

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, r(-1.0)])
}

/// `diag(1, ω, …, ω^{n−1})` with `ω = e^{2πi/n}`.
pub fn clock(n: usize) -> CMat {
    let w = 2.0 * std::f64::consts::PI / n as f64;
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            c((w * i as f64).cos(), (w * i as f64).sin())
        } else {
            ZERO
        }
    })
}

fn inclusion(
    sub: MultiMatrixAlgebra,
    amb: MultiMatrixAlgebra,
    images: Vec<Element>,
) -> UnitalInclusion {
    UnitalInclusion::from_images(sub, amb, images, &Tol::default())
        .expect("catalog inclusions are valid")
}

/// `ℂ ⊂ P` through the unit.
pub fn scalars_in(p: &MultiMatrixAlgebra) -> UnitalInclusion {
    inclusion(MultiMatrixAlgebra::full(1), p.clone(), vec![p.one()])
}

/// The diagonal `ℂ ⊕ ℂ ⊂ M₂`.
pub fn diagonal_in_m2() -> UnitalInclusion {
    diagonal_in_full(2)
}

/// The diagonal `ℂⁿ ⊂ Mₙ`.
pub fn diagonal_in_full(n: usize) -> UnitalInclusion {
    let a = MultiMatrixAlgebra::full(n);
    let images = (0..n).map(|k| a.unit(0, k, k)).collect();
    inclusion(MultiMatrixAlgebra::diagonal(n), a, images)
}

/// `M_k ⊗ 1_m ⊂ M_{km}`.
pub fn tensor_one(k: usize, m: usize) -> UnitalInclusion {
    let b = MultiMatrixAlgebra::full(k);
    let a = MultiMatrixAlgebra::full(k * m);
    let id = CMat::identity(m, m);
    let images = b
        .matrix_units()
        .iter()
        .map(|e| Element::from_blocks(vec![kron(&e.blocks()[0], &id)]))
        .collect();
    inclusion(b, a, images)
}

/// Block-diagonal embedding of `B` into `A`: ambient block `j` receives the
/// sub-blocks listed in `layout[j]`, in order, each once per occurrence.
pub fn block_diagonal(
    sub: &MultiMatrixAlgebra,
    amb: &MultiMatrixAlgebra,
    layout: &[Vec<usize>],
) -> UnitalInclusion {
    let images = sub
        .matrix_units()
        .iter()
        .map(|e| {
            let blocks = layout
                .iter()
                .zip(amb.dims())
                .map(|(parts, &n)| {
                    let mut m = CMat::zeros(n, n);
                    let mut off = 0;
                    for &i in parts {
                        let ni = sub.dims()[i];
                        m.view_mut((off, off), (ni, ni)).copy_from(&e.blocks()[i]);
                        off += ni;
                    }
                    assert_eq!(off, n, "layout does not fill ambient block");
                    m
                })
                .collect();
            Element::from_blocks(blocks)
        })
        .collect();
    inclusion(sub.clone(), amb.clone(), images)
}

/// `ℂ ⊂ ℂ ⊕ M₂`.
pub fn scalars_in_c_plus_m2() -> UnitalInclusion {
    scalars_in(&MultiMatrixAlgebra::new(vec![1, 2]).expect("valid"))
}

/// `ℂ ⊕ ℂ ⊂ ℂ ⊕ M₂` with `(a, b) ↦ a ⊕ diag(a, b)`, a connected inclusion
/// with a non-simple subalgebra.
pub fn c2_in_c_plus_m2() -> UnitalInclusion {
    let sub = MultiMatrixAlgebra::diagonal(2);
    let amb = MultiMatrixAlgebra::new(vec![1, 2]).expect("valid");
    block_diagonal(&sub, &amb, &[vec![0], vec![0, 1]])
}

/// `ℤ₂` swapping the two points of `ℂ²`.
pub fn swap_action() -> CocycleAction {
    cyclic_shift_action(2)
}

/// `ℤₙ` rotating the points of `ℂⁿ`.
pub fn cyclic_shift_action(n: usize) -> CocycleAction {
    let perm = (0..n)
        .map(|g| (0..n).map(|k| (k + g) % n).collect())
        .collect();
    CocycleAction::permutation(FiniteGroup::cyclic(n), perm).expect("valid")
}

/// `S₃` permuting the points of `ℂ³`.
pub fn symmetric_action() -> CocycleAction {
    let g = FiniteGroup::symmetric3();
    let perm = g
        .labels()
        .iter()
        .map(|l| {
            l.chars()
                .filter_map(|ch| ch.to_digit(10))
                .map(|d| d as usize)
                .collect()
        })
        .collect();
    CocycleAction::permutation(g, perm).expect("valid")
}

/// `ℤ₂` on `M₂` by `Ad(Z)`.
pub fn pauli_z_action() -> CocycleAction {
    let m2 = MultiMatrixAlgebra::full(2);
    let z = Element::from_blocks(vec![pauli_z()]);
    CocycleAction::untwisted(
        FiniteGroup::cyclic(2),
        m2.clone(),
        vec![
            StarHomomorphism::identity(&m2),
            conjugation(&m2, &z).expect("unitary"),
        ],
    )
    .expect("valid")
}

/// `ℤ₃` on `M₂` by `Ad(diag(1, ω))`, `ω = e^{2πi/3}`.
pub fn clock_action() -> CocycleAction {
    let m2 = MultiMatrixAlgebra::full(2);
    let w = 2.0 * std::f64::consts::PI / 3.0;
    let alpha = (0..3)
        .map(|k| {
            let phase = c((w * k as f64).cos(), (w * k as f64).sin());
            let u =
                Element::from_blocks(vec![CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, phase])]);
            conjugation(&m2, &u).expect("unitary")
        })
        .collect();
    CocycleAction::untwisted(FiniteGroup::cyclic(3), m2, alpha).expect("valid")
}

fn pauli_unitaries() -> Vec<Element> {
    let x = Element::from_blocks(vec![pauli_x()]);
    let z = Element::from_blocks(vec![pauli_z()]);
    vec![
        MultiMatrixAlgebra::full(2).one(),
        x.clone(),
        z.clone(),
        &x * &z,
    ]
}

/// Klein four-group on `M₂` by conjugation with `1, X, Z, XZ`, untwisted;
/// the crossed product is `M₄`.
pub fn pauli_action() -> CocycleAction {
    let m2 = MultiMatrixAlgebra::full(2);
    let alpha = pauli_unitaries()
        .iter()
        .map(|u| conjugation(&m2, u).expect("unitary"))
        .collect();
    CocycleAction::untwisted(FiniteGroup::klein_four(), m2, alpha).expect("valid")
}

/// Klein four-group on `M₂` by the same conjugations, twisted by the sign
/// cocycle `σ(g,h) = w_g w_h w_{gh}*` of the Pauli projective representation;
/// the twist cancels the projective phases and the crossed product is `M₂⁴`.
pub fn pauli_twisted_action() -> CocycleAction {
    CocycleAction::inner(
        FiniteGroup::klein_four(),
        MultiMatrixAlgebra::full(2),
        pauli_unitaries(),
    )
    .expect("valid")
}

/// Klein four-group acting trivially on `ℂ`, twisted by the Pauli sign cocycle.
pub fn twisted_scalar_action() -> CocycleAction {
    let proj = pauli_twisted_action();
    let c1 = MultiMatrixAlgebra::full(1);
    let sigma = proj
        .sigma
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    Element::from_blocks(vec![CMat::from_element(1, 1, s.blocks()[0][(0, 0)])])
                })
                .collect()
        })
        .collect();
    CocycleAction::new(
        FiniteGroup::klein_four(),
        c1.clone(),
        vec![StarHomomorphism::identity(&c1); 4],
        sigma,
    )
    .expect("valid")
}

/// `G` permuting the points of `ℂ^{|G|}` by left multiplication; the crossed
/// product is `M_{|G|}`.
pub fn regular_permutation_action(group: FiniteGroup) -> CocycleAction {
    let n = group.order();
    let perm = (0..n)
        .map(|g| (0..n).map(|k| group.mul(g, k)).collect())
        .collect();
    CocycleAction::permutation(group, perm).expect("valid")
}

/// Named actions with small crossed products, used by tests and the CLI.
pub fn action_catalog() -> Vec<(&'static str, CocycleAction)> {
    vec![
        (
            "trivial on C",
            CocycleAction::trivial(FiniteGroup::trivial(), MultiMatrixAlgebra::full(1)),
        ),
        (
            "Z2 trivially on C",
            CocycleAction::trivial(FiniteGroup::cyclic(2), MultiMatrixAlgebra::full(1)),
        ),
        ("swap on C2", swap_action()),
        ("Ad Z on M2", pauli_z_action()),
        ("clock on M2", clock_action()),
        ("Pauli on M2", pauli_action()),
        ("Pauli twisted on M2", pauli_twisted_action()),
        ("twisted scalar", twisted_scalar_action()),
        ("shift Z3 on C3", cyclic_shift_action(3)),
        ("shift Z4 on C4", cyclic_shift_action(4)),
        (
            "Klein four on C4",
            regular_permutation_action(FiniteGroup::klein_four()),
        ),
        ("S3 on C3", symmetric_action()),
        (
            "D4 on C8",
            regular_permutation_action(FiniteGroup::dihedral(4)),
        ),
        (
            "Q8 on C8",
            regular_permutation_action(FiniteGroup::quaternion()),
        ),
    ]
}
