//! Property-based tests of the invariants the library promises.
//!
//! Properties tested:
//! - trace-preserving expectations pass every expectation check
//! - the index does not depend on the trace used to build the quasi-basis
//! - a family is a right quasi-basis exactly when `Σ λ e₁ λ* = 1`
//! - `Ẽ(e₁) = Ind⁻¹` and the basic-construction identities hold
//! - the Markov vector solves `ΛᵗΛ t = β t`; the trace index of `ℂ ⊂ P` is
//!   scalar exactly at that vector
//! - `dim(B' ∩ A) = Σ Λᵢⱼ²` and `A₁ = ⊕ M_{Nᵢ}` with `Nᵢ = Σⱼ nⱼΛᵢⱼ`
//! - exterior-equivalent cocycle actions give isomorphic crossed products

use fdcstar::algebra::relative_commutant;
use fdcstar::group::{crossed_product, verify_cocycle_action, CocycleAction};
use fdcstar::linalg::polar_unitary;
use fdcstar::quasi_basis::{generic_quasi_basis, generic_quasi_basis_elements, scalar_inclusion};
use fdcstar::standard::{
    block_diagonal, clock_action, pauli_action, pauli_twisted_action, pauli_z_action,
    symmetric_action, twisted_scalar_action,
};
use fdcstar::tower::basic_construction;
use fdcstar::traces::{
    markov_residual, markov_trace, trace_index, trace_preserving_expectation, watatani_index,
};
use fdcstar::{Element, MultiMatrixAlgebra, Tol, TraceState, UnitalInclusion};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> Tol {
    Tol::default()
}

/// A connected unital inclusion given by sub-block sizes and, per ambient
/// block, the list of sub-blocks stacked on its diagonal.
fn inclusion() -> impl Strategy<Value = UnitalInclusion> {
    (
        prop::collection::vec(1usize..=2, 1..=3),
        prop::collection::vec(prop::collection::vec(0usize..3, 1..=3), 1..=2),
    )
        .prop_filter_map("every sub-block must appear", |(sub_dims, layout)| {
            let k = sub_dims.len();
            let layout: Vec<Vec<usize>> = layout
                .into_iter()
                .map(|l| l.into_iter().map(|i| i % k).collect())
                .collect();
            if !(0..k).all(|i| layout.iter().flatten().any(|&j| j == i)) {
                return None;
            }
            let amb_dims = layout
                .iter()
                .map(|l| l.iter().map(|&i| sub_dims[i]).sum())
                .collect();
            let sub = MultiMatrixAlgebra::new(sub_dims).ok()?;
            let amb = MultiMatrixAlgebra::new(amb_dims).ok()?;
            let inc = block_diagonal(&sub, &amb, &layout);
            inc.is_connected().then_some(inc)
        })
}

/// Positive weights normalized to a faithful trace on `a`.
fn trace_on(a: &MultiMatrixAlgebra, w: &[f64]) -> TraceState {
    let mass: f64 = w.iter().zip(a.dims()).map(|(x, &n)| x * n as f64).sum();
    TraceState::new(a, w.iter().map(|x| x / mass).collect()).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, 3)
}

fn random_unitary(c: &MultiMatrixAlgebra, seed: &[f64]) -> Element {
    let mut k = 0;
    let blocks = c
        .dims()
        .iter()
        .map(|&n| {
            let m = DMatrix::from_fn(n, n, |_, _| {
                let z = Complex64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()]);
                k += 2;
                z + Complex64::new(k as f64 * 0.37 % 1.0, 0.0)
            });
            polar_unitary(&m)
        })
        .collect();
    Element::from_blocks(blocks)
}

/// `(Ad(w_g) α_g, w_g α_g(w_h) σ(g,h) w_{gh}*)` with `w_e = 1`.
fn perturb(act: &CocycleAction, seed: &[f64]) -> CocycleAction {
    let g = &act.group;
    let c = &act.algebra;
    let w: Vec<Element> = (0..g.order())
        .map(|k| {
            if k == g.identity() {
                c.one()
            } else {
                let shifted: Vec<f64> = seed.iter().map(|s| s * (k as f64 + 1.0)).collect();
                random_unitary(c, &shifted)
            }
        })
        .collect();
    let alpha = (0..g.order())
        .map(|k| {
            let ad = fdcstar::group::conjugation(c, &w[k]).unwrap();
            act.alpha[k].then(&ad).unwrap()
        })
        .collect();
    let sigma = (0..g.order())
        .map(|a| {
            (0..g.order())
                .map(|b| {
                    let wa_alpha_wb = &w[a] * &act.alpha[a].apply(&w[b]);
                    &(&wa_alpha_wb * &act.sigma[a][b]) * &w[g.mul(a, b)].adjoint()
                })
                .collect()
        })
        .collect();
    CocycleAction::new(g.clone(), c.clone(), alpha, sigma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    /// Property: an expectation preserving a faithful trace is unital,
    /// idempotent, bimodular, positive and faithful.
    #[test]
    fn trace_preserving_expectations_are_valid(inc in inclusion(), w in weights()) {
        let tau = trace_on(inc.ambient(), &w[..inc.ambient().num_blocks()]);
        let e = trace_preserving_expectation(&inc, &tau).unwrap();
        let rep = e.verify();
        prop_assert!(rep.passes(&tol()), "{rep:?}");
        prop_assert!(e.trace_preservation_residual(&tau) < 1e-9);
    }

    /// Property: quasi-bases built from different traces on `B` give the same
    /// central, positive index.
    #[test]
    fn index_is_independent_of_the_quasi_basis(inc in inclusion(), w in weights(), v in weights()) {
        let tau = trace_on(inc.ambient(), &w[..inc.ambient().num_blocks()]);
        let e = trace_preserving_expectation(&inc, &tau).unwrap();
        let tau_b = trace_on(inc.sub(), &v[..inc.sub().num_blocks()]);
        let qa = generic_quasi_basis(&e, None, &tol()).unwrap();
        let qb = generic_quasi_basis(&e, Some(&tau_b), &tol()).unwrap();
        prop_assert!(qa.is_right() && qb.is_right());
        let ia = watatani_index(&e, &qa, &tol()).unwrap();
        let ib = watatani_index(&e, &qb, &tol()).unwrap();
        prop_assert!((&ia.element - &ib.element).norm() < 1e-8);
        prop_assert!(ia.centrality_residual < 1e-9);
        prop_assert!(ia.is_positive_invertible());
    }

    /// Property: `Σ λ e₁ λ* = 1` holds for a quasi-basis and fails once an
    /// element is dropped, matching the quasi-basis identity itself.
    #[test]
    fn jones_sum_characterizes_quasi_bases(inc in inclusion(), w in weights(), drop in 0usize..64) {
        let tau = trace_on(inc.ambient(), &w[..inc.ambient().num_blocks()]);
        let e = trace_preserving_expectation(&inc, &tau).unwrap();
        let bc = basic_construction(&e, None, &tol()).unwrap();
        let one = bc.a1().one();
        let full = generic_quasi_basis_elements(&e, None).unwrap();
        let ok = (&bc.jones_sum(&full) - &one).norm();
        prop_assert!(ok < 1e-9);
        let mut short = full.clone();
        short.remove(drop % full.len());
        let sum_holds = (&bc.jones_sum(&short) - &one).norm() < 1e-9;
        let qb = fdcstar::quasi_basis::verify_quasi_basis(&e, &short, &tol());
        prop_assert_eq!(sum_holds, qb.is_right());
        prop_assert!(!sum_holds);
    }

    /// Property: the dual expectation sends `e₁` to `Ind_W(E)⁻¹`.
    #[test]
    fn dual_expectation_of_jones_projection(inc in inclusion(), w in weights()) {
        let tau = trace_on(inc.ambient(), &w[..inc.ambient().num_blocks()]);
        let e = trace_preserving_expectation(&inc, &tau).unwrap();
        let bc = basic_construction(&e, None, &tol()).unwrap();
        let dual = bc.dual_expectation(&tol()).unwrap();
        let inv = bc.index().inverse(inc.ambient());
        prop_assert!((&dual.apply_sub(bc.jones_projection()) - &inv).norm() < 1e-9);
        let rep = bc.verify(&tol());
        prop_assert!(rep.passes(&tol(), bc.a1().total_dim()), "{rep:?}");
    }

    /// Property: the Markov trace is a positive eigenvector of `ΛᵗΛ`.
    #[test]
    fn markov_trace_is_perron_vector(inc in inclusion()) {
        let (tr, beta) = markov_trace(&inc).unwrap();
        prop_assert!(tr.vector().iter().all(|&t| t > 0.0));
        prop_assert!(markov_residual(&inc, &tr, beta) < 1e-10);
        let l = inc.lambda_f64();
        let norm2 = l.singular_values().max().powi(2);
        prop_assert!((beta - norm2).abs() < 1e-9 * norm2.max(1.0));
    }

    /// Property: the trace index of `ℂ ⊂ P` is scalar exactly for the Markov
    /// vector, where it equals `dim P`.
    #[test]
    fn trace_index_scalar_iff_markov(dims in prop::collection::vec(1usize..=3, 1..=3), w in weights(), markov in any::<bool>()) {
        let p = MultiMatrixAlgebra::new(dims).unwrap();
        let tr = if markov {
            markov_trace(&scalar_inclusion(&p)).unwrap().0
        } else {
            trace_on(&p, &w[..p.num_blocks()])
        };
        let canonical = TraceState::canonical(&p);
        let is_markov = tr
            .vector()
            .iter()
            .zip(canonical.vector())
            .all(|(a, b)| (a - b).abs() < 1e-12);
        let ind = trace_index(&tr, &tol()).unwrap();
        prop_assert_eq!(ind.scalar.is_some(), is_markov);
        if let Some(v) = ind.scalar {
            prop_assert!((v - p.total_dim() as f64).abs() < 1e-9);
        }
    }

    /// Property: `dim(B' ∩ A) = Σᵢⱼ Λᵢⱼ²`.
    #[test]
    fn relative_commutant_dimension_formula(inc in inclusion()) {
        let expected: usize = inc.inclusion_matrix().iter().flatten().map(|l| l * l).sum();
        prop_assert_eq!(relative_commutant(&inc, &tol()).unwrap().dim(), expected);
    }

    /// Property: the basic construction has blocks `Nᵢ = Σⱼ nⱼ Λᵢⱼ`.
    #[test]
    fn basic_construction_block_sizes(inc in inclusion()) {
        let e = trace_preserving_expectation(&inc, &TraceState::canonical(inc.ambient())).unwrap();
        let bc = basic_construction(&e, None, &tol()).unwrap();
        let expected: Vec<usize> = inc
            .inclusion_matrix()
            .iter()
            .map(|row| row.iter().zip(inc.ambient().dims()).map(|(l, n)| l * n).sum())
            .collect();
        prop_assert_eq!(bc.a1().dims(), &expected[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    /// Property: perturbing a cocycle action by unitaries `w_g` keeps the
    /// cocycle identities and the shape of the crossed product.
    #[test]
    fn exterior_equivalent_actions_have_isomorphic_crossed_products(
        which in 0usize..6,
        seed in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let act = [
            pauli_z_action(),
            clock_action(),
            pauli_action(),
            pauli_twisted_action(),
            twisted_scalar_action(),
            symmetric_action(),
        ][which].clone();
        let moved = perturb(&act, &seed);
        prop_assert!(verify_cocycle_action(&moved).passes(&tol()));
        let a = crossed_product(&act, &tol()).unwrap();
        let b = crossed_product(&moved, &tol()).unwrap();
        let mut da = a.algebra.dims().to_vec();
        let mut db = b.algebra.dims().to_vec();
        da.sort();
        db.sort();
        prop_assert_eq!(da, db);
        prop_assert!(b.verify(&tol()).passes(&tol()));
    }
}
