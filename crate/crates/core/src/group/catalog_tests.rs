use super::*;
use crate::algebra::{Element, MultiMatrixAlgebra, UnitalInclusion};
use crate::standard::{
    clock_action, cyclic_shift_action, diagonal_in_m2, pauli_action, pauli_twisted_action, pauli_x,
    pauli_z_action, swap_action, symmetric_action, tensor_one, twisted_scalar_action,
};
use crate::tol::Tol;
use crate::traces::minimal_expectation;

fn tol() -> Tol {
    Tol::default()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort();
    v
}

fn catalog() -> Vec<(&'static str, CocycleAction, Vec<usize>)> {
    vec![
        (
            "trivial on C",
            CocycleAction::trivial(FiniteGroup::trivial(), MultiMatrixAlgebra::full(1)),
            vec![1],
        ),
        (
            "C x Z2",
            CocycleAction::trivial(FiniteGroup::cyclic(2), MultiMatrixAlgebra::full(1)),
            vec![1, 1],
        ),
        ("swap", swap_action(), vec![2]),
        ("Ad Z", pauli_z_action(), vec![2, 2]),
        ("clock", clock_action(), vec![2, 2, 2]),
        ("Pauli", pauli_action(), vec![4]),
        ("Pauli twisted", pauli_twisted_action(), vec![2, 2, 2, 2]),
        ("twisted scalar", twisted_scalar_action(), vec![2]),
        ("shift Z3", cyclic_shift_action(3), vec![3]),
        ("S3", symmetric_action(), vec![3, 3]),
    ]
}

#[test]
fn crossed_products_have_expected_shape_and_contracts() {
    for (name, act, dims) in catalog() {
        let cp = crossed_product(&act, &tol()).unwrap();
        assert_eq!(sorted(cp.algebra.dims().to_vec()), dims, "{name}");
        let rep = cp.verify(&tol());
        assert!(rep.passes(&tol()), "{name}: {rep:?}");
        assert!(rep.expectation_of_u < 1e-12, "{name}");
    }
}

#[test]
fn trivial_group_gives_identity_expectation() {
    let c = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
    let cp = crossed_product(
        &CocycleAction::trivial(FiniteGroup::trivial(), c.clone()),
        &tol(),
    )
    .unwrap();
    let e = canonical_expectation(&cp);
    for x in cp.algebra.matrix_units() {
        let back = cp.inclusion.embed(&e.apply_sub(&x));
        assert!(back.is_close(&x, 1e-10));
    }
}

#[test]
fn coefficients_reconstruct_elements() {
    let cp = crossed_product(&symmetric_action(), &tol()).unwrap();
    for x in cp.algebra.matrix_units() {
        let back = cp.compose(&cp.coefficients(&x));
        assert!(back.is_close(&x, 1e-10));
    }
}

#[test]
fn corrupted_action_is_refused() {
    let mut act = twisted_scalar_action();
    act.sigma[1][2] = act.sigma[1][2].scale_re(-1.0);
    let err = crossed_product(&act, &tol()).unwrap_err();
    assert!(matches!(err, crate::error::Error::CocycleIdentity { .. }));
}

#[test]
fn coset_partition_examples() {
    let inc = diagonal_in_m2();
    let e0 = minimal_expectation(&inc, &tol()).unwrap();
    let x = Element::from_blocks(vec![pauli_x()]);
    let one = inc.ambient().one();
    let p = coset_partition(&e0, &inc, &[one.clone(), x.clone()], &tol()).unwrap();
    assert_eq!(p.len(), 2);
    assert!(e0.apply_sub(&x).norm() < 1e-14);

    // witnesses in U(B): one class
    let d = Element::from_blocks(vec![crate::standard::pauli_z()]);
    let p = coset_partition(&e0, &inc, &[one.clone(), d], &tol()).unwrap();
    assert_eq!(p.len(), 1);
    assert!(p.has_identity_class);

    // with F the identity of M₂, X falls into the identity class
    let id = UnitalInclusion::identity(inc.ambient());
    let f = crate::traces::trace_preserving_expectation(
        &id,
        &crate::traces::TraceState::canonical(inc.ambient()),
    )
    .unwrap();
    let p = coset_partition(&f, &inc, &[one, x], &tol()).unwrap();
    assert_eq!(p.len(), 1);
}

#[test]
fn non_normalizing_witness_is_rejected() {
    let inc = diagonal_in_m2();
    let e0 = minimal_expectation(&inc, &tol()).unwrap();
    let h = Element::from_blocks(vec![
        (pauli_x() + crate::standard::pauli_z())
            * crate::linalg::r(std::f64::consts::FRAC_1_SQRT_2),
    ]);
    let err = coset_partition(&e0, &inc, &[h], &tol()).unwrap_err();
    assert!(matches!(
        err,
        crate::error::Error::NotNormalizing { index: 0, .. }
    ));
}

#[test]
fn crossed_product_unitaries_give_group_many_classes() {
    for (name, act, _) in catalog() {
        let cp = crossed_product(&act, &tol()).unwrap();
        let p = coset_partition(&cp.expectation, &cp.inclusion, &cp.u, &tol()).unwrap();
        assert_eq!(p.len(), act.order(), "{name}");
        assert_eq!(p.representatives[0], 0);
    }
}

#[test]
fn regularity_examples() {
    let a = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
    let r = verify_regularity(&UnitalInclusion::identity(&a), &[], &tol()).unwrap();
    assert!(r.regular);
    let inc = diagonal_in_m2();
    let x = Element::from_blocks(vec![pauli_x()]);
    assert!(verify_regularity(&inc, &[x], &tol()).unwrap().regular);
    let r = verify_regularity(&inc, &[], &tol()).unwrap();
    assert!(!r.regular);
    assert_eq!(r.generated_dim, 2);
}

#[test]
fn index_arithmetic_for_tensor_inclusion() {
    let inc = tensor_one(2, 2);
    let (rep, _, _) = regular_index_pipeline(&inc, &[inc.ambient().one()], &tol()).unwrap();
    assert_eq!(rep.classes, 1);
    assert_eq!(rep.commutant_dim, 4);
    assert!((rep.index_e0 - 4.0).abs() < 1e-9);
    assert!(rep.passes(), "{rep:?}");
}

#[test]
fn index_arithmetic_for_diagonal() {
    let inc = diagonal_in_m2();
    let x = Element::from_blocks(vec![pauli_x()]);
    let (rep, _, _) = regular_index_pipeline(&inc, &[inc.ambient().one(), x], &tol()).unwrap();
    assert_eq!(rep.classes, 2);
    assert_eq!(rep.raw_classes, Some(2));
    assert_eq!(rep.commutant_dim, 2);
    // B is not simple: Ind_W(E₀) = 2 while classes · dim C_A(B) = 4
    assert!(!rep.simple_sub);
    assert!((rep.index_e0 - 2.0).abs() < 1e-9);
    assert!(!rep.checks[1].pass);
    assert!(!rep.passes());
}

#[test]
fn diagonal_structure_is_swap_crossed_product() {
    let inc = diagonal_in_m2();
    let e0 = minimal_expectation(&inc, &tol()).unwrap();
    let x = Element::from_blocks(vec![pauli_x()]);
    let rec = recover_structure(&inc, &e0, &[inc.ambient().one(), x], &tol()).unwrap();
    assert!(rec
        .group
        .find_isomorphism(&FiniteGroup::cyclic(2))
        .is_some());
    assert!(rec.passes(&tol()));
    assert!(rec.phi_residual() < 1e-10);
    // α is the swap and σ is trivial
    let c = &rec.action.algebra;
    assert!(rec.action.alpha[1]
        .apply(&c.unit(0, 0, 0))
        .is_close(&c.unit(1, 0, 0), 1e-10));
    for s in rec.action.sigma.iter().flatten() {
        assert!(s.is_close(&c.one(), 1e-10));
    }
    assert_eq!(rec.restricted.len(), 1);
    assert_eq!(rec.restricted[0].1.classification, Classification::Outer);
}

#[test]
fn identity_structure_is_trivial() {
    let a = MultiMatrixAlgebra::full(2);
    let inc = UnitalInclusion::identity(&a);
    let e = minimal_expectation(&inc, &tol()).unwrap();
    let rec = recover_structure(&inc, &e, &[a.one()], &tol()).unwrap();
    assert_eq!(rec.group.order(), 1);
    assert!(rec.passes(&tol()));
}

#[test]
fn round_trip_recovers_group_and_isomorphism() {
    for (name, act, _) in catalog() {
        let cp = crossed_product(&act, &tol()).unwrap();
        let rec = recover_structure(&cp.inclusion, &cp.expectation, &cp.u, &tol()).unwrap();
        assert!(rec.group.find_isomorphism(&act.group).is_some(), "{name}");
        assert!(rec.passes(&tol()), "{name}");
        assert!(rec.phi_residual() < 1e-8, "{name}");
    }
}

#[test]
fn missing_representatives_do_not_certify_regularity() {
    let cp = crossed_product(&swap_action(), &tol()).unwrap();
    let err = recover_structure(&cp.inclusion, &cp.expectation, &cp.u[..1], &tol()).unwrap_err();
    assert!(err
        .to_string()
        .contains("witness set does not certify regularity"));
}

#[test]
fn crossed_products_have_depth_at_most_two() {
    for (name, act, _) in catalog() {
        let cp = crossed_product(&act, &tol()).unwrap();
        let (_, d) = crate::tower::depth(&cp.expectation, 2, 4096, &tol()).unwrap();
        assert!(d.value.is_some_and(|k| k <= 2), "{name}: {d}");
    }
}

#[test]
fn index_formula_on_simple_crossed_products() {
    for (name, act, _) in catalog() {
        if act.algebra.num_blocks() != 1 {
            continue;
        }
        let cp = crossed_product(&act, &tol()).unwrap();
        let (rep, _, _) = regular_index_pipeline(&cp.inclusion, &cp.u, &tol()).unwrap();
        assert!(rep.passes(), "{name}: {rep:?}");
    }
}
