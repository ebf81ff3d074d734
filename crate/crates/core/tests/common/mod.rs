//! Instances shared by the integration tests.

#![allow(dead_code)]

use fdcstar::group::{crossed_product, CrossedProduct};
use fdcstar::standard::{
    action_catalog, c2_in_c_plus_m2, diagonal_in_full, diagonal_in_m2, pauli_x, pauli_z,
    scalars_in, scalars_in_c_plus_m2, tensor_one,
};
use fdcstar::traces::{minimal_expectation, trace_preserving_expectation};
use fdcstar::{
    ConditionalExpectation, Element, MultiMatrixAlgebra, Result, Tol, TraceState, UnitalInclusion,
};

/// Inclusions that are not crossed products, with ambient dimension ≤ 16.
pub fn small_inclusions() -> Vec<(String, UnitalInclusion)> {
    let c_m2 = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
    vec![
        (
            "identity on M2".into(),
            UnitalInclusion::identity(&MultiMatrixAlgebra::full(2)),
        ),
        ("identity on C+M2".into(), UnitalInclusion::identity(&c_m2)),
        ("C in M2".into(), scalars_in(&MultiMatrixAlgebra::full(2))),
        ("C in M3".into(), scalars_in(&MultiMatrixAlgebra::full(3))),
        ("C in M4".into(), scalars_in(&MultiMatrixAlgebra::full(4))),
        (
            "C in C+C".into(),
            scalars_in(&MultiMatrixAlgebra::diagonal(2)),
        ),
        ("C in C+M2".into(), scalars_in_c_plus_m2()),
        ("diag in M2".into(), diagonal_in_m2()),
        ("diag in M3".into(), diagonal_in_full(3)),
        ("M2 x 1 in M4".into(), tensor_one(2, 2)),
        ("C2 in C+M2".into(), c2_in_c_plus_m2()),
    ]
}

/// Every catalogued crossed product, built with default tolerances.
pub fn crossed_products() -> Vec<(String, CrossedProduct)> {
    action_catalog()
        .into_iter()
        .map(|(name, act)| {
            let cp = crossed_product(&act, &Tol::default()).expect(name);
            (name.to_string(), cp)
        })
        .collect()
}

/// `1, X, Z, XZ` in `M₂`, the normalizer representatives of the diagonal.
pub fn pauli_witnesses() -> Vec<Element> {
    let x = Element::from_blocks(vec![pauli_x()]);
    let z = Element::from_blocks(vec![pauli_z()]);
    vec![
        MultiMatrixAlgebra::full(2).one(),
        x.clone(),
        z.clone(),
        &x * &z,
    ]
}

/// The minimal expectation of a connected inclusion (flagged `true`), or the
/// expectation preserving the canonical trace of the ambient algebra.
pub fn default_expectation(inc: &UnitalInclusion) -> Result<(ConditionalExpectation, bool)> {
    if inc.is_connected() {
        Ok((minimal_expectation(inc, &Tol::default())?, true))
    } else {
        let tau = TraceState::canonical(inc.ambient());
        Ok((trace_preserving_expectation(inc, &tau)?, false))
    }
}
