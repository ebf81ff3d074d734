//! Quasi-bases for conditional expectations.
//!
//! A family `{λᵢ}` is a right quasi-basis for `E` when `x = Σ E(xλᵢ)λᵢ*`
//! for every `x`, and a left one when `x = Σ E(xλᵢ*)λᵢ`.

mod search;

pub use search::{unitary_basis_search, UnitarySearchConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{Element, MultiMatrixAlgebra, StarHomomorphism, UnitalInclusion};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, hermitian_fn, r, CMat, CVec, C64, ONE, ZERO};
use crate::tol::Tol;
use crate::traces::{trace_preserving_expectation, ConditionalExpectation, IndexValue, TraceState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
    TwoSided,
    Neither,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
            Side::TwoSided => "two_sided",
            Side::Neither => "none",
        }
    }
}

/// Residuals of the reconstruction, orthonormality and unitarity identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiBasisReport {
    /// `max ‖x − Σ E(xλᵢ)λᵢ*‖` over the test elements.
    pub right: f64,
    /// `max ‖x − Σ E(xλᵢ*)λᵢ‖` over the test elements.
    pub left: f64,
    /// `max ‖E(λᵢ*λⱼ) − δᵢⱼ‖`.
    pub orthonormal: f64,
    /// `max ‖E(λᵢλⱼ*) − δᵢⱼ‖`.
    pub orthonormal_left: f64,
    /// `max ‖λᵢ*λᵢ − 1‖ + ‖λᵢλᵢ* − 1‖`.
    pub unitary: f64,
}

#[derive(Debug, Clone)]
pub struct QuasiBasis {
    pub elements: Vec<Element>,
    pub side: Side,
    pub orthonormal: bool,
    pub unitary: bool,
    pub report: QuasiBasisReport,
}

impl QuasiBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_right(&self) -> bool {
        matches!(self.side, Side::Right | Side::TwoSided)
    }

    pub fn is_left(&self) -> bool {
        matches!(self.side, Side::Left | Side::TwoSided)
    }

    /// `Σ λᵢλᵢ*`.
    pub fn right_sum(&self, algebra: &MultiMatrixAlgebra) -> Element {
        let mut s = algebra.zero();
        for l in &self.elements {
            s = &s + &(l * &l.adjoint());
        }
        s
    }

    /// `Σ λᵢ*λᵢ`.
    pub fn left_sum(&self, algebra: &MultiMatrixAlgebra) -> Element {
        let mut s = algebra.zero();
        for l in &self.elements {
            s = &s + &(&l.adjoint() * l);
        }
        s
    }

    /// Elements ordered by their rounded coordinates, for reproducible output.
    pub fn canonical_order(&self, algebra: &MultiMatrixAlgebra) -> Vec<Element> {
        let mut keyed: Vec<(Vec<(i64, i64)>, Element)> = self
            .elements
            .iter()
            .map(|x| {
                let key = algebra
                    .coords(x)
                    .iter()
                    .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
                    .collect();
                (key, x.clone())
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, x)| x).collect()
    }
}

const FULL_CHECK_DIM: usize = 256;

fn test_elements(amb: &MultiMatrixAlgebra) -> Vec<Element> {
    if amb.total_dim() <= FULL_CHECK_DIM {
        return amb.matrix_units();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9b5e);
    (0..8)
        .map(|_| {
            let v = CVec::from_fn(amb.total_dim(), |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            amb.element(&v)
        })
        .collect()
}

/// Measures every quasi-basis identity for `elements` against `e`.
pub fn quasi_basis_report(e: &ConditionalExpectation, elements: &[Element]) -> QuasiBasisReport {
    let amb = e.inclusion().ambient();
    let adj: Vec<Element> = elements.iter().map(|l| l.adjoint()).collect();
    let mut right: f64 = 0.0;
    let mut left: f64 = 0.0;
    for x in test_elements(amb) {
        let mut rs = amb.zero();
        let mut ls = amb.zero();
        for (l, la) in elements.iter().zip(&adj) {
            rs = &rs + &(&e.apply(&(&x * l)) * la);
            ls = &ls + &(&e.apply(&(&x * la)) * l);
        }
        right = right.max((&x - &rs).norm());
        left = left.max((&x - &ls).norm());
    }
    let sub = e.inclusion().sub();
    let one = sub.one();
    let zero = sub.zero();
    let mut orthonormal: f64 = 0.0;
    let mut orthonormal_left: f64 = 0.0;
    for i in 0..elements.len() {
        for j in 0..elements.len() {
            let target = if i == j { &one } else { &zero };
            let rgt = e.apply_sub(&(&adj[i] * &elements[j]));
            let lft = e.apply_sub(&(&elements[i] * &adj[j]));
            orthonormal = orthonormal.max((&rgt - target).norm());
            orthonormal_left = orthonormal_left.max((&lft - target).norm());
        }
    }
    let unitary = elements
        .iter()
        .map(|l| l.unitarity_residual())
        .fold(0.0, f64::max);
    QuasiBasisReport {
        right,
        left,
        orthonormal,
        orthonormal_left,
        unitary,
    }
}

/// Verifies `elements` against `e` and records which identities hold.
pub fn verify_quasi_basis(
    e: &ConditionalExpectation,
    elements: &[Element],
    tol: &Tol,
) -> QuasiBasis {
    let report = quasi_basis_report(e, elements);
    let side = match (tol.ok(report.right), tol.ok(report.left)) {
        (true, true) => Side::TwoSided,
        (true, false) => Side::Right,
        (false, true) => Side::Left,
        (false, false) => Side::Neither,
    };
    let orthonormal = match side {
        Side::Left => tol.ok(report.orthonormal_left),
        _ => tol.ok(report.orthonormal),
    };
    QuasiBasis {
        elements: elements.to_vec(),
        side,
        orthonormal,
        unitary: tol.ok(report.unitary),
        report,
    }
}

/// `ℂ ⊂ P` as a unital inclusion.
pub fn scalar_inclusion(p: &MultiMatrixAlgebra) -> UnitalInclusion {
    UnitalInclusion::from_images(
        MultiMatrixAlgebra::full(1),
        p.clone(),
        vec![p.one()],
        &Tol::default(),
    )
    .expect("unit embedding is a unital inclusion")
}

/// The expectation `x ↦ tr(x)·1` onto the scalars.
pub fn trace_expectation(tr: &TraceState) -> Result<ConditionalExpectation> {
    trace_preserving_expectation(&scalar_inclusion(tr.algebra()), tr)
}

/// `{ √(nᵢ/tr(pᵢ)) e⁽ⁱ⁾_{κβ} }` for the expectation onto the scalars.
pub fn matrix_unit_basis_for_trace(tr: &TraceState, tol: &Tol) -> Result<QuasiBasis> {
    tr.require_faithful()?;
    let p = tr.algebra();
    let elements: Vec<Element> = (0..p.total_dim())
        .map(|idx| {
            let (i, k, b) = p.unit_label(idx);
            let n = p.dims()[i] as f64;
            let tp = n * tr.vector()[i];
            p.unit(i, k, b).scale_re((n / tp).sqrt())
        })
        .collect();
    let e = trace_expectation(tr)?;
    Ok(verify_quasi_basis(&e, &elements, tol))
}

/// Clock and shift unitaries `UᵃVᵇ` of `M_n`, an orthonormal basis for the
/// normalized trace.
pub fn clock_shift_unitaries(n: usize) -> Vec<CMat> {
    let omega = 2.0 * std::f64::consts::PI / n as f64;
    let clock = CMat::from_fn(n, n, |i, j| {
        if i == j {
            c((omega * i as f64).cos(), (omega * i as f64).sin())
        } else {
            ZERO
        }
    });
    let shift = CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { ONE } else { ZERO });
    let mut out = Vec::with_capacity(n * n);
    let mut ua = CMat::identity(n, n);
    for _ in 0..n {
        let mut m = ua.clone();
        for _ in 0..n {
            out.push(m.clone());
            m = &m * &shift;
        }
        ua = &ua * &clock;
    }
    out
}

pub fn weyl_clock_shift_basis(n: usize, tol: &Tol) -> Result<QuasiBasis> {
    if n == 0 {
        return Err(Error::InvalidAlgebra("M_0".into()));
    }
    let p = MultiMatrixAlgebra::full(n);
    let elements: Vec<Element> = clock_shift_unitaries(n)
        .into_iter()
        .map(|m| Element::from_blocks(vec![m]))
        .collect();
    let e = trace_expectation(&TraceState::canonical(&p))?;
    Ok(verify_quasi_basis(&e, &elements, tol))
}

/// `{λᵢμⱼ}` (right) or `{μⱼλᵢ}` (left) for `F ∘ E`, where `λ` is a
/// quasi-basis of `E: A → C` and `μ` of `F: C → B`, embedded through `c_in_a`.
pub fn compose_quasi_bases(
    outer: &QuasiBasis,
    inner: &QuasiBasis,
    c_in_a: &StarHomomorphism,
    side: Side,
) -> Vec<Element> {
    let mus: Vec<Element> = inner.elements.iter().map(|m| c_in_a.apply(m)).collect();
    let mut out = Vec::with_capacity(outer.len() * mus.len());
    for l in &outer.elements {
        for m in &mus {
            out.push(match side {
                Side::Left => m * l,
                _ => l * m,
            });
        }
    }
    out
}

/// Re-verifies a quasi-basis of the relative commutant's trace as a quasi-basis
/// of `E₀` restricted to an intermediate algebra `C ⊂ A`.
///
/// `elements` live in `A`; they are pulled back into `C` through `c_in_a`.
pub fn lift_trace_basis_to_c(
    elements: &[Element],
    e0_on_c: &ConditionalExpectation,
    c_in_a: &StarHomomorphism,
    tol: &Tol,
) -> Result<QuasiBasis> {
    let mut pulled = Vec::with_capacity(elements.len());
    for x in elements {
        let (y, res) = c_in_a.preimage(x);
        if !tol.ok(res) {
            return Err(Error::QuasiBasis(format!(
                "element outside the intermediate algebra (residual {res:.3e})"
            )));
        }
        pulled.push(y);
    }
    let qb = verify_quasi_basis(e0_on_c, &pulled, tol);
    if qb.side != Side::TwoSided {
        return Err(Error::QuasiBasis(format!(
            "lifted family is not two-sided: right {:.3e}, left {:.3e}",
            qb.report.right, qb.report.left
        )));
    }
    Ok(qb)
}

/// A right quasi-basis for any faithful expectation.
///
/// With `ω = τ_B ∘ E`, each `Kᵢ = A·ι(e⁽ⁱ⁾₁₁)` gets an `ω`-orthonormal basis
/// `e_s w_c*` per ambient block, where the columns `w_c` span the range of
/// `ι(e⁽ⁱ⁾₁₁)` and satisfy `W*ρW = 1`. Scaling by `√tᵢ` turns these into a
/// quasi-basis of size `Σᵢ Σⱼ nⱼ Λᵢⱼ`.
pub fn generic_quasi_basis(
    e: &ConditionalExpectation,
    tau_b: Option<&TraceState>,
    tol: &Tol,
) -> Result<QuasiBasis> {
    let elements = generic_quasi_basis_elements(e, tau_b)?;
    Ok(verify_quasi_basis(e, &elements, tol))
}

/// `Ind_W(E) = Σ λλ*` over the unverified generic quasi-basis.
pub fn generic_index(e: &ConditionalExpectation, tol: &Tol) -> Result<IndexValue> {
    let amb = e.inclusion().ambient();
    let mut sum = amb.zero();
    for l in generic_quasi_basis_elements(e, None)? {
        sum = &sum + &(&l * &l.adjoint());
    }
    Ok(IndexValue::from_element(amb, sum, tol))
}

/// Elements of [`generic_quasi_basis`] without verification, indexed by
/// sub-block `i`, then ambient block `j`, row `s` and range vector `c`.
pub fn generic_quasi_basis_elements(
    e: &ConditionalExpectation,
    tau_b: Option<&TraceState>,
) -> Result<Vec<Element>> {
    let inc = e.inclusion();
    let sub = inc.sub();
    let amb = inc.ambient();
    let tau = match tau_b {
        Some(t) => t.clone(),
        None => TraceState::canonical(sub),
    };
    tau.require_faithful()?;
    let rho = e.state_density(&tau);
    let lambda = inc.inclusion_matrix();
    let mut out = Vec::new();
    for (i, row) in lambda.iter().enumerate() {
        let scale = tau.vector()[i].sqrt();
        for (j, &m) in row.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let w = weighted_range(&inc.embedding().unit_image(i, 0, 0).blocks()[j], &rho[j], m)?;
            let nj = amb.dims()[j];
            for s in 0..nj {
                for col in 0..m {
                    let mut blk = CMat::zeros(nj, nj);
                    for q in 0..nj {
                        blk[(s, q)] = w[(q, col)].conj() * r(scale);
                    }
                    out.push(amb.from_block(j, blk)?);
                }
            }
        }
    }
    Ok(out)
}

/// Columns spanning the range of the projection `p` (rank `m`), normalized so
/// that `W* ρ W = 1`.
pub(crate) fn weighted_range(p: &CMat, rho: &CMat, m: usize) -> Result<CMat> {
    let n = p.nrows();
    let (vals, vecs) = hermitian_eigen(p);
    let cols: Vec<usize> = (0..n).filter(|&k| vals[k] > 0.5).collect();
    if cols.len() != m {
        return Err(Error::InvalidHomomorphism(format!(
            "projection of rank {} where multiplicity {m} was expected",
            cols.len()
        )));
    }
    let mut v = CMat::zeros(n, m);
    for (k, &c0) in cols.iter().enumerate() {
        v.set_column(k, &vecs.column(c0));
    }
    let g = v.adjoint() * rho * &v;
    let (gv, _) = hermitian_eigen(&g);
    let top = gv.last().copied().unwrap_or(0.0);
    if gv.first().copied().unwrap_or(0.0) <= 1e-12 * top.max(1.0) {
        return Err(Error::NotFaithful(
            "expectation state vanishes on a nonzero element".into(),
        ));
    }
    Ok(v * hermitian_fn(&g, |x| 1.0 / x.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_basis_is_everything() {
        let a = MultiMatrixAlgebra::full(2);
        let inc = UnitalInclusion::identity(&a);
        let e = trace_preserving_expectation(&inc, &TraceState::canonical(&a)).unwrap();
        let qb = verify_quasi_basis(&e, &[a.one()], &Tol::default());
        assert_eq!(qb.side, Side::TwoSided);
        assert!(qb.orthonormal && qb.unitary);
    }

    #[test]
    fn matrix_unit_basis_m2_scaling() {
        let p = MultiMatrixAlgebra::full(2);
        let qb = matrix_unit_basis_for_trace(&TraceState::canonical(&p), &Tol::default()).unwrap();
        assert_eq!(qb.len(), 4);
        assert_eq!(qb.side, Side::TwoSided);
        assert!(qb.orthonormal);
        let s = 2f64.sqrt();
        assert!((qb.elements[0].blocks()[0][(0, 0)].re - s).abs() < 1e-15);
    }

    #[test]
    fn matrix_unit_basis_of_c2() {
        let p = MultiMatrixAlgebra::diagonal(2);
        let tr = TraceState::new(&p, vec![0.5, 0.5]).unwrap();
        let qb = matrix_unit_basis_for_trace(&tr, &Tol::default()).unwrap();
        for (k, x) in qb.elements.iter().enumerate() {
            let want = p.central_projection(k).scale_re(2f64.sqrt());
            assert!((x - &want).norm() < 1e-15);
        }
        assert!(qb.orthonormal);
    }

    #[test]
    fn clock_shift_small() {
        let tol = Tol::default();
        let one = weyl_clock_shift_basis(1, &tol).unwrap();
        assert_eq!(one.len(), 1);
        for n in 2..=3 {
            let qb = weyl_clock_shift_basis(n, &tol).unwrap();
            assert_eq!(qb.len(), n * n);
            assert_eq!(qb.side, Side::TwoSided);
            assert!(qb.orthonormal && qb.unitary);
            assert!(qb.report.orthonormal < 1e-12);
        }
    }

    #[test]
    fn adjoint_swaps_sides() {
        let tol = Tol::default();
        let e =
            crate::traces::minimal_expectation(&crate::standard::c2_in_c_plus_m2(), &tol).unwrap();
        let right = generic_quasi_basis(&e, None, &tol).unwrap();
        assert!(right.is_right());
        let adj: Vec<Element> = right.elements.iter().map(|x| x.adjoint()).collect();
        let left = verify_quasi_basis(&e, &adj, &tol);
        assert!(left.is_left());
        assert_eq!(right.is_left(), left.is_right());
    }

    #[test]
    fn generic_basis_size() {
        let tol = Tol::default();
        let inc = crate::standard::tensor_one(2, 3);
        let e = crate::traces::minimal_expectation(&inc, &tol).unwrap();
        let qb = generic_quasi_basis(&e, None, &tol).unwrap();
        // N = nⱼ Λ = 6 · 3
        assert_eq!(qb.len(), 18);
        assert!(qb.is_right());
    }

    #[test]
    fn commutant_basis_lifts_to_intermediate() {
        let tol = Tol::default();
        let inc = crate::standard::tensor_one(2, 2);
        let e0 = crate::traces::minimal_expectation(&inc, &tol).unwrap();
        let (calg, chom, tr) = crate::traces::commutant_trace(&e0, &tol).unwrap();
        assert_eq!(calg.dims(), &[2]);
        let tqb = matrix_unit_basis_for_trace(&tr, &tol).unwrap();
        let lifted: Vec<Element> = tqb.elements.iter().map(|x| chom.apply(x)).collect();
        let a = inc.ambient();
        let c_in_a = UnitalInclusion::identity(a);
        let e0c = crate::traces::restrict_expectation(&e0, &c_in_a, &tol).unwrap();
        let qb = lift_trace_basis_to_c(&lifted, &e0c, c_in_a.embedding(), &tol).unwrap();
        assert!(qb.report.right < 1e-10 && qb.report.left < 1e-10);
    }

    #[test]
    fn scalar_commutant_lifts_trivially() {
        let tol = Tol::default();
        let inc = UnitalInclusion::identity(&MultiMatrixAlgebra::full(2));
        let e0 = crate::traces::minimal_expectation(&inc, &tol).unwrap();
        let (_, chom, tr) = crate::traces::commutant_trace(&e0, &tol).unwrap();
        let tqb = matrix_unit_basis_for_trace(&tr, &tol).unwrap();
        let lifted: Vec<Element> = tqb.elements.iter().map(|x| chom.apply(x)).collect();
        assert_eq!(lifted.len(), 1);
        assert!((&lifted[0] - &inc.ambient().one()).norm() < 1e-14);
    }

    #[test]
    fn composing_with_identity_keeps_basis() {
        let tol = Tol::default();
        let inc = crate::standard::diagonal_in_m2();
        let a = inc.ambient().clone();
        let e = crate::traces::minimal_expectation(&inc, &tol).unwrap();
        let qb = generic_quasi_basis(&e, None, &tol).unwrap();
        let id = trace_preserving_expectation(
            &UnitalInclusion::identity(&a),
            &TraceState::canonical(&a),
        )
        .unwrap();
        let one = verify_quasi_basis(&id, &[a.one()], &tol);
        let composed = compose_quasi_bases(&one, &qb, &StarHomomorphism::identity(&a), Side::Right);
        for (x, y) in composed.iter().zip(&qb.elements) {
            assert!((x - y).norm() < 1e-15);
        }
        let two = e
            .then(
                &crate::traces::trace_preserving_expectation(
                    &scalar_inclusion(&MultiMatrixAlgebra::diagonal(2)),
                    &TraceState::canonical(&MultiMatrixAlgebra::diagonal(2)),
                )
                .unwrap(),
            )
            .unwrap();
        let _ = two;
    }
}
