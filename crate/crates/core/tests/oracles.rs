//! Library results against independent recomputations on random small
//! inclusions: dense brute-force commutants and generated algebras, the
//! concrete GNS basic construction, and the direct span in the depth test.

mod oracle;

use fdcstar::algebra::{generated_subalgebra, relative_commutant, relative_commutant_decomposed};
use fdcstar::standard::block_diagonal;
use fdcstar::tower::concrete::concrete_basic_construction;
use fdcstar::tower::{basic_construction, jones_tower, projected_dimension};
use fdcstar::traces::trace_preserving_expectation;
use fdcstar::{Element, MultiMatrixAlgebra, Tol, TraceState, UnitalInclusion};
use proptest::prelude::*;

fn tol() -> Tol {
    Tol::default()
}

/// Unital inclusions with ambient dimension at most 16.
fn small_inclusion() -> impl Strategy<Value = UnitalInclusion> {
    (
        prop::collection::vec(1usize..=2, 1..=3),
        prop::collection::vec(prop::collection::vec(0usize..3, 1..=3), 1..=3),
    )
        .prop_filter_map("valid layout within 16 dimensions", |(sub_dims, layout)| {
            let k = sub_dims.len();
            let layout: Vec<Vec<usize>> = layout
                .into_iter()
                .map(|l| l.into_iter().map(|i| i % k).collect())
                .collect();
            if !(0..k).all(|i| layout.iter().flatten().any(|&j| j == i)) {
                return None;
            }
            let amb_dims: Vec<usize> = layout
                .iter()
                .map(|l| l.iter().map(|&i| sub_dims[i]).sum())
                .collect();
            if amb_dims.iter().map(|n| n * n).sum::<usize>() > 16 {
                return None;
            }
            let sub = MultiMatrixAlgebra::new(sub_dims).ok()?;
            let amb = MultiMatrixAlgebra::new(amb_dims).ok()?;
            Some(block_diagonal(&sub, &amb, &layout))
        })
}

/// A deterministic non-normal element built from `seed`.
fn element_from(a: &MultiMatrixAlgebra, seed: &[f64]) -> Element {
    let mut x = a.zero();
    for (p, u) in a.matrix_units().iter().enumerate() {
        x = &x + &u.scale_re(seed[p % seed.len()] + 0.1 * p as f64);
    }
    x
}

fn dense_all(xs: &[Element]) -> Vec<fdcstar::linalg::CMat> {
    xs.iter().map(oracle::dense).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn relative_commutant_matches_dense_kernel(inc in small_inclusion()) {
        let lib = relative_commutant(&inc, &tol()).unwrap();
        let sub = dense_all(inc.embedding().unit_images());
        let ora = oracle::relative_commutant(&sub, inc.ambient().dims());
        let (same, res) = oracle::same_span(&dense_all(&lib.elements()), &ora);
        prop_assert!(same, "dims {} vs {}, residual {res:e}", lib.dim(), ora.len());
    }

    #[test]
    fn decomposed_commutant_spans_the_same_space(inc in small_inclusion()) {
        let (alg, hom) = relative_commutant_decomposed(&inc).unwrap();
        prop_assert!(hom.verify().passes(&tol()));
        let lib = relative_commutant(&inc, &tol()).unwrap();
        prop_assert_eq!(alg.total_dim(), lib.dim());
        for y in hom.unit_images() {
            prop_assert!(lib.residual(y) < 1e-9);
        }
    }

    #[test]
    fn generated_subalgebra_matches_dense_closure(
        inc in small_inclusion(),
        seed in prop::collection::vec(-1.0f64..1.0, 4),
        with_sub in any::<bool>(),
    ) {
        let amb = inc.ambient();
        let mut gens = vec![element_from(amb, &seed)];
        if with_sub {
            gens.extend(inc.embedding().unit_images().iter().cloned());
        }
        let lib = generated_subalgebra(amb, &gens, &tol()).unwrap();
        let d: usize = amb.dims().iter().sum();
        let ora = oracle::generated(&dense_all(&gens), d);
        let (same, res) = oracle::same_span(&dense_all(&lib.elements()), &ora);
        prop_assert!(same, "dims {} vs {}, residual {res:e}", lib.dim(), ora.len());
    }

    #[test]
    fn abstract_and_gns_basic_constructions_agree(inc in small_inclusion()) {
        prop_assume!(inc.is_connected());
        let e = trace_preserving_expectation(&inc, &TraceState::canonical(inc.ambient())).unwrap();
        let bc = basic_construction(&e, None, &tol()).unwrap();
        let gns = concrete_basic_construction(&e, None, &tol()).unwrap();
        let mut a = bc.a1().dims().to_vec();
        let mut b = gns.decomposition.0.dims().to_vec();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn depth_ideal_criterion_matches_direct_span(inc in small_inclusion()) {
        prop_assume!(inc.is_connected());
        let e = trace_preserving_expectation(&inc, &TraceState::canonical(inc.ambient())).unwrap();
        let mut tower = jones_tower(&e, 1, 4096, &tol()).unwrap();
        if projected_dimension(&tower.levels[1].inclusion) <= 256 {
            tower.extend().unwrap();
        }
        let first = tower.depth_step(1);
        prop_assert!(first.direct);
        for k in 1..=tower.height() {
            let step = tower.depth_step(k);
            if step.direct {
                prop_assert_eq!(step.span_dim, step.ideal_dim);
                prop_assert_eq!(step.equal, step.span_dim == step.commutant_dim);
            }
        }
    }
}
