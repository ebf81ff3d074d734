//! Traces, conditional expectations, minimality and index values.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{
    decompose_subalgebra, relative_commutant_decomposed, Element, MultiMatrixAlgebra,
    SubalgebraBasis, UnitalInclusion,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, null_space_scaled, r, CMat, CVec, C64};
use crate::quasi_basis::{generic_quasi_basis, QuasiBasis, Side};
use crate::tol::Tol;

/// A tracial state given by its trace vector: `t[i]` is the trace of a
/// minimal projection in block `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    algebra: MultiMatrixAlgebra,
    vector: Vec<f64>,
}

impl TraceState {
    pub fn new(algebra: &MultiMatrixAlgebra, vector: Vec<f64>) -> Result<Self> {
        if vector.len() != algebra.num_blocks() {
            return Err(Error::Shape(format!(
                "trace vector of length {} for {} blocks",
                vector.len(),
                algebra.num_blocks()
            )));
        }
        if vector.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::NotFaithful(format!("negative entry in {vector:?}")));
        }
        let total: f64 = vector
            .iter()
            .zip(algebra.dims())
            .map(|(t, &n)| t * n as f64)
            .sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Shape(format!(
                "trace vector {vector:?} has total mass {total}, expected 1"
            )));
        }
        Ok(TraceState {
            algebra: algebra.clone(),
            vector,
        })
    }

    /// `tᵢ = nᵢ / dim P`, the Markov trace of `ℂ ⊂ P`.
    pub fn canonical(algebra: &MultiMatrixAlgebra) -> Self {
        let d = algebra.total_dim() as f64;
        TraceState {
            algebra: algebra.clone(),
            vector: algebra.dims().iter().map(|&n| n as f64 / d).collect(),
        }
    }

    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        &self.algebra
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn is_faithful(&self) -> bool {
        self.vector.iter().all(|&t| t > 0.0)
    }

    pub fn require_faithful(&self) -> Result<()> {
        if self.is_faithful() {
            Ok(())
        } else {
            Err(Error::NotFaithful(format!(
                "trace vector {:?}",
                self.vector
            )))
        }
    }

    pub fn eval(&self, x: &Element) -> C64 {
        x.blocks()
            .iter()
            .zip(&self.vector)
            .map(|(b, &t)| b.trace() * t)
            .sum()
    }

    /// Restriction along `B ⊂ A`: `sᵢ = Σⱼ Λᵢⱼ tⱼ`.
    pub fn restrict(&self, inc: &UnitalInclusion) -> TraceState {
        let lambda = inc.inclusion_matrix();
        let vector = lambda
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.vector)
                    .map(|(&l, &t)| l as f64 * t)
                    .sum()
            })
            .collect();
        TraceState {
            algebra: inc.sub().clone(),
            vector,
        }
    }

    /// Largest `|tr(xy) − tr(yx)|` over pairs of matrix units.
    pub fn traciality_residual(&self) -> f64 {
        let units = self.algebra.matrix_units();
        let mut worst: f64 = 0.0;
        for x in &units {
            for y in &units {
                worst = worst.max((self.eval(&(x * y)) - self.eval(&(y * x))).norm());
            }
        }
        worst
    }
}

/// A central element of `A` recorded as an index, with its block coefficients.
#[derive(Debug, Clone)]
pub struct IndexValue {
    pub element: Element,
    /// Coefficient of each minimal central projection of `A`.
    pub coefficients: Vec<f64>,
    /// Distance of the element from the span of the central projections.
    pub centrality_residual: f64,
    pub scalar: Option<f64>,
}

impl IndexValue {
    pub fn from_element(algebra: &MultiMatrixAlgebra, element: Element, tol: &Tol) -> Self {
        let coefficients: Vec<f64> = element
            .blocks()
            .iter()
            .zip(algebra.dims())
            .map(|(b, &n)| b.trace().re / n as f64)
            .collect();
        let mut central = algebra.zero();
        for (j, c) in coefficients.iter().enumerate() {
            central = &central + &algebra.central_projection(j).scale_re(*c);
        }
        let centrality_residual = (&element - &central).norm();
        let hi = coefficients
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
        let scalar = if hi - lo <= tol.eq * hi.abs().max(1.0) {
            Some(coefficients.iter().sum::<f64>() / coefficients.len() as f64)
        } else {
            None
        };
        IndexValue {
            element,
            coefficients,
            centrality_residual,
            scalar,
        }
    }

    pub fn is_positive_invertible(&self) -> bool {
        self.coefficients.iter().all(|&c| c > 0.0)
    }

    /// Inverse as an element of the center.
    pub fn inverse(&self, algebra: &MultiMatrixAlgebra) -> Element {
        let mut out = algebra.zero();
        for (j, c) in self.coefficients.iter().enumerate() {
            out = &out + &algebra.central_projection(j).scale_re(1.0 / c);
        }
        out
    }
}

/// `Σᵢ nᵢ²/tr(pᵢ) · pᵢ`, the index of a faithful trace viewed as an
/// expectation onto the scalars.
pub fn trace_index(tr: &TraceState, tol: &Tol) -> Result<IndexValue> {
    tr.require_faithful()?;
    let alg = tr.algebra();
    let mut x = alg.zero();
    for (i, (&n, &t)) in alg.dims().iter().zip(tr.vector()).enumerate() {
        let tp = n as f64 * t;
        x = &x + &alg.central_projection(i).scale_re((n * n) as f64 / tp);
    }
    Ok(IndexValue::from_element(alg, x, tol))
}

/// Perron eigenvector of `ΛᵗΛ` normalized to a trace state on `A`, and the
/// modulus `β = ‖Λ‖²`.
pub fn markov_trace(inc: &UnitalInclusion) -> Result<(TraceState, f64)> {
    let comps = inc.bratteli_components();
    if comps.len() > 1 {
        return Err(Error::Disconnected { components: comps });
    }
    let l = inc.lambda_f64();
    let gram: DMatrix<f64> = l.transpose() * &l;
    let eig = SymmetricEigen::new(gram);
    let (top, beta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &v)| (k, v))
        .expect("nonempty");
    let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let amb = inc.ambient();
    let mass: f64 = v.iter().zip(amb.dims()).map(|(t, &n)| t * n as f64).sum();
    let t: Vec<f64> = v.iter().map(|x| x / mass).collect();
    if t.iter().any(|&x| x <= 0.0) {
        return Err(Error::Disconnected { components: comps });
    }
    Ok((TraceState::new(amb, t)?, beta))
}

/// `‖ΛᵗΛ t − β t‖` for a candidate trace vector.
pub fn markov_residual(inc: &UnitalInclusion, tr: &TraceState, beta: f64) -> f64 {
    let l = inc.lambda_f64();
    let t = nalgebra::DVector::from_column_slice(tr.vector());
    (l.transpose() * &l * &t - &t * beta).norm()
}

/// A conditional expectation `E: A → B`, stored as the matrix taking
/// matrix-unit coordinates of `A` to those of `B`.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    inclusion: UnitalInclusion,
    to_sub: CMat,
}

/// Residuals of the defining properties of a conditional expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport {
    /// `‖E(ι(b)) − b‖` over matrix units of `B`.
    pub idempotent: f64,
    pub unital: f64,
    /// `‖E(ι(b)x) − bE(x)‖ + ‖E(xι(b)) − E(x)b‖`.
    pub bimodule: f64,
    /// Smallest eigenvalue of `E(x*x)` over the test elements.
    pub min_positive_eigenvalue: f64,
    /// Smallest eigenvalue of the density of `τ_B ∘ E`.
    pub faithfulness_margin: f64,
}

impl ExpectationReport {
    pub fn passes(&self, tol: &Tol) -> bool {
        tol.ok(self.idempotent)
            && tol.ok(self.unital)
            && tol.ok(self.bimodule)
            && self.min_positive_eigenvalue >= -tol.eq
            && self.faithfulness_margin > tol.eq
    }
}

/// Above this ambient dimension the bimodule and positivity checks run on a
/// seeded sample of elements instead of all matrix units.
const FULL_CHECK_DIM: usize = 256;

impl ConditionalExpectation {
    pub fn from_map(inclusion: UnitalInclusion, to_sub: CMat) -> Result<Self> {
        let want = (inclusion.sub().total_dim(), inclusion.ambient().total_dim());
        if to_sub.shape() != want {
            return Err(Error::Shape(format!(
                "expectation map {:?}, expected {want:?}",
                to_sub.shape()
            )));
        }
        Ok(ConditionalExpectation { inclusion, to_sub })
    }

    pub fn inclusion(&self) -> &UnitalInclusion {
        &self.inclusion
    }

    pub fn map(&self) -> &CMat {
        &self.to_sub
    }

    /// `E(x)` as an element of `B`.
    pub fn apply_sub(&self, x: &Element) -> Element {
        let v = self.inclusion.ambient().coords(x);
        self.inclusion.sub().element(&(&self.to_sub * v))
    }

    /// `ι(E(x))`, the expectation as a map on `A`.
    pub fn apply(&self, x: &Element) -> Element {
        self.inclusion.embed(&self.apply_sub(x))
    }

    /// `E' ∘ E` for `E: A → C` (self) and `E': C → B`.
    pub fn then(&self, inner: &ConditionalExpectation) -> Result<ConditionalExpectation> {
        let inc = inner.inclusion.then(&self.inclusion)?;
        Ok(ConditionalExpectation {
            inclusion: inc,
            to_sub: &inner.to_sub * &self.to_sub,
        })
    }

    /// Densities `ρⱼ` of `ω = τ_B ∘ E`, so that `ω(x) = Σⱼ Tr(ρⱼ xⱼ)`.
    pub fn state_density(&self, tau_b: &TraceState) -> Vec<CMat> {
        let sub = self.inclusion.sub();
        let amb = self.inclusion.ambient();
        let mut w = CVec::zeros(sub.total_dim());
        for (i, &n) in sub.dims().iter().enumerate() {
            for k in 0..n {
                w[sub.unit_index(i, k, k)] = r(tau_b.vector()[i]);
            }
        }
        let row = w.transpose() * &self.to_sub;
        amb.dims()
            .iter()
            .enumerate()
            .map(|(j, &n)| CMat::from_fn(n, n, |b, a| row[amb.unit_index(j, a, b)]))
            .collect()
    }

    fn test_elements(&self) -> Vec<Element> {
        let amb = self.inclusion.ambient();
        if amb.total_dim() <= FULL_CHECK_DIM {
            return amb.matrix_units();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xe5e5);
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

    pub fn verify(&self) -> ExpectationReport {
        let inc = &self.inclusion;
        let sub = inc.sub();
        let amb = inc.ambient();
        let b_units = sub.matrix_units();
        let idempotent = b_units
            .iter()
            .map(|b| (&self.apply_sub(&inc.embed(b)) - b).norm())
            .fold(0.0, f64::max);
        let unital = (&self.apply_sub(&amb.one()) - &sub.one()).norm();
        let xs = self.test_elements();
        let mut bimodule: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        for x in &xs {
            let ex = self.apply_sub(x);
            for b in &b_units {
                let ib = inc.embed(b);
                let left = (&self.apply_sub(&(&ib * x)) - &(b * &ex)).norm();
                let right = (&self.apply_sub(&(x * &ib)) - &(&ex * b)).norm();
                bimodule = bimodule.max(left + right);
            }
            min_eig = min_eig.min(self.apply_sub(&(&x.adjoint() * x)).min_eigenvalue());
        }
        let faithfulness_margin = self
            .state_density(&TraceState::canonical(sub))
            .iter()
            .map(|rho| hermitian_eigen(rho).0.first().copied().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min);
        ExpectationReport {
            idempotent,
            unital,
            bimodule,
            min_positive_eigenvalue: min_eig,
            faithfulness_margin,
        }
    }

    /// Largest `|τ(E(x)) − τ(x)|` over matrix units of `A`.
    pub fn trace_preservation_residual(&self, tau: &TraceState) -> f64 {
        self.inclusion
            .ambient()
            .matrix_units()
            .iter()
            .map(|x| (tau.eval(&self.apply(x)) - tau.eval(x)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `‖E(x) − E'(x)‖` over matrix units of `A`.
    pub fn distance(&self, other: &ConditionalExpectation) -> f64 {
        let d = &self.to_sub - &other.to_sub;
        d.column_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// The `τ`-orthogonal projection of `A` onto `ι(B)`.
///
/// The images `ι(e⁽ⁱ⁾_{κβ})` are `τ`-orthogonal with squared norm
/// `sᵢ = τ(ι(e⁽ⁱ⁾₁₁))`, so each coordinate of `E(x)` is `τ(ι(e_{βκ}) x) / sᵢ`.
pub fn trace_preserving_expectation(
    inc: &UnitalInclusion,
    tau: &TraceState,
) -> Result<ConditionalExpectation> {
    tau.require_faithful()?;
    if tau.algebra() != inc.ambient() {
        return Err(Error::Shape("trace lives on a different algebra".into()));
    }
    let sub = inc.sub();
    let amb = inc.ambient();
    let s = tau.restrict(inc);
    let mut m = CMat::zeros(sub.total_dim(), amb.total_dim());
    for row in 0..sub.total_dim() {
        let (i, k, b) = sub.unit_label(row);
        let img = inc.embedding().unit_image(i, b, k);
        let si = s.vector()[i];
        for (j, blk) in img.blocks().iter().enumerate() {
            let nj = amb.dims()[j];
            let w = tau.vector()[j] / si;
            for p in 0..nj {
                for q in 0..nj {
                    let v = blk[(q, p)];
                    if v.norm_sqr() > 0.0 {
                        m[(row, amb.unit_index(j, p, q))] = v * w;
                    }
                }
            }
        }
    }
    ConditionalExpectation::from_map(inc.clone(), m)
}

/// Outcome of the minimality test.
#[derive(Debug, Clone)]
pub struct MinimalityReport {
    /// `‖E(xy) − E(yx)‖` over a basis of the relative commutant.
    pub tracial_residual: f64,
    /// Distance of `E(C_A(B))` from the center of `B`.
    pub center_residual: f64,
    /// Spread of the index coefficients over the blocks of `A`.
    pub index_spread: f64,
    pub index: IndexValue,
    pub minimal: bool,
}

pub fn is_minimal(e: &ConditionalExpectation, tol: &Tol) -> Result<MinimalityReport> {
    let inc = e.inclusion();
    let sub = inc.sub();
    let (_, comm) = relative_commutant_decomposed(inc)?;
    let basis = comm.unit_images();
    let mut tracial: f64 = 0.0;
    let mut center: f64 = 0.0;
    for x in basis {
        for y in basis {
            let d = &e.apply_sub(&(x * y)) - &e.apply_sub(&(y * x));
            tracial = tracial.max(d.norm());
        }
        let ex = e.apply_sub(x);
        let mut z = sub.zero();
        for (i, &n) in sub.dims().iter().enumerate() {
            let c = ex.blocks()[i].trace() / r(n as f64);
            z = &z + &sub.central_projection(i).scale(c);
        }
        center = center.max((&ex - &z).norm());
    }
    let qb = generic_quasi_basis(e, None, tol)?;
    let index = watatani_index(e, &qb, tol)?;
    let hi = index
        .coefficients
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = index
        .coefficients
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let minimal = tol.ok(tracial) && tol.ok(center) && index.scalar.is_some();
    Ok(MinimalityReport {
        tracial_residual: tracial,
        center_residual: center,
        index_spread: spread,
        index,
        minimal,
    })
}

/// The expectation preserving the Markov trace of `A`; it is the unique
/// trace-preserving expectation with scalar index on a connected inclusion.
pub fn minimal_expectation(inc: &UnitalInclusion, tol: &Tol) -> Result<ConditionalExpectation> {
    let (tau, _) = markov_trace(inc)?;
    let e = trace_preserving_expectation(inc, &tau)?;
    let rep = is_minimal(&e, tol)?;
    if !rep.minimal {
        return Err(Error::MinimalExpectation(format!(
            "tracial residual {:.3e}, center residual {:.3e}, index spread {:.3e}",
            rep.tracial_residual, rep.center_residual, rep.index_spread
        )));
    }
    Ok(e)
}

/// `Σ λᵢλᵢ*` for a right quasi-basis, `Σ λᵢ*λᵢ` for a left one.
pub fn watatani_index(
    e: &ConditionalExpectation,
    qb: &QuasiBasis,
    tol: &Tol,
) -> Result<IndexValue> {
    let rep = crate::quasi_basis::quasi_basis_report(e, &qb.elements);
    let needs_right = matches!(qb.side, Side::Right | Side::TwoSided | Side::Neither);
    let needs_left = matches!(qb.side, Side::Left | Side::TwoSided);
    if (needs_right && !tol.ok(rep.right)) || (needs_left && !tol.ok(rep.left)) {
        return Err(Error::QuasiBasis(format!(
            "right residual {:.3e}, left residual {:.3e}",
            rep.right, rep.left
        )));
    }
    let amb = e.inclusion().ambient();
    let sum = if needs_right {
        qb.right_sum(amb)
    } else {
        qb.left_sum(amb)
    };
    Ok(IndexValue::from_element(amb, sum, tol))
}

/// `‖E₀(x) − Ind⁻¹ Σ λᵢ x λᵢ*‖` for `x` in the relative commutant.
pub fn averaging_check(
    e0: &ConditionalExpectation,
    qb: &QuasiBasis,
    x: &Element,
    tol: &Tol,
) -> Result<f64> {
    let inc = e0.inclusion();
    let comm = inc
        .embedding()
        .unit_images()
        .iter()
        .map(|b| x.commutator(b).norm())
        .fold(0.0, f64::max);
    if !tol.ok(comm) {
        return Err(Error::NotInCommutant(comm));
    }
    let amb = inc.ambient();
    let index = watatani_index(e0, qb, tol)?;
    let mut avg = amb.zero();
    for l in &qb.elements {
        avg = &avg + &(&(l * x) * &l.adjoint());
    }
    let rhs = &index.inverse(amb) * &avg;
    Ok((&e0.apply(x) - &rhs).norm())
}

/// `E|_C: C → B` for an intermediate algebra `B ⊆ C ⊆ A` given by `c_in_a`.
pub fn restrict_expectation(
    e: &ConditionalExpectation,
    c_in_a: &UnitalInclusion,
    tol: &Tol,
) -> Result<ConditionalExpectation> {
    let inc = e.inclusion();
    let c = c_in_a.sub();
    let mut images = Vec::with_capacity(inc.sub().total_dim());
    for b in inc.embedding().unit_images() {
        let (y, res) = c_in_a.embedding().preimage(b);
        if !tol.ok(res) {
            return Err(Error::NotSubalgebra(format!(
                "subalgebra not inside the intermediate algebra (residual {res:.3e})"
            )));
        }
        images.push(y);
    }
    let b_in_c = UnitalInclusion::from_images(inc.sub().clone(), c.clone(), images, tol)?;
    ConditionalExpectation::from_map(b_in_c, e.map() * c_in_a.embedding().matrix())
}

/// `E₀` on the relative commutant as a trace state, when it is scalar-valued
/// there. Returns the commutant, its embedding and the trace.
pub fn commutant_trace(
    e0: &ConditionalExpectation,
    tol: &Tol,
) -> Result<(
    MultiMatrixAlgebra,
    crate::algebra::StarHomomorphism,
    TraceState,
)> {
    let (alg, hom) = relative_commutant_decomposed(e0.inclusion())?;
    let sub = e0.inclusion().sub();
    let mut t = Vec::with_capacity(alg.num_blocks());
    for blk in 0..alg.num_blocks() {
        let x = e0.apply_sub(hom.unit_image(blk, 0, 0));
        let val = x.raw_trace() / r(sub.dims().iter().sum::<usize>() as f64);
        let scalar = sub.one().scale(val);
        let res = (&x - &scalar).norm();
        if !tol.ok(res) {
            return Err(Error::MinimalExpectation(format!(
                "expectation is not scalar on the relative commutant (residual {res:.3e})"
            )));
        }
        t.push(val.re);
    }
    let tr = TraceState::new(&alg, t)?;
    Ok((alg, hom, tr))
}

/// Result of constructing the expectation onto an intermediate algebra.
#[derive(Debug, Clone)]
pub struct CompatibleExpectation {
    pub intermediate: UnitalInclusion,
    pub expectation: ConditionalExpectation,
    /// `max ‖E₀(F(x)) − E₀(x)‖` over matrix units of `A`.
    pub compatibility_residual: f64,
    /// Distance between the expectations built from two independent
    /// invariant traces, when the invariant traces are not unique.
    pub uniqueness_residual: Option<f64>,
}

/// Faithful traces `τ` on `A` with `τ ∘ E = τ`, as a basis of trace vectors.
fn invariant_trace_vectors(e: &ConditionalExpectation, tol: &Tol) -> CMat {
    let amb = e.inclusion().ambient();
    let units = amb.matrix_units();
    let k = amb.num_blocks();
    let mut m = CMat::zeros(units.len(), k);
    for (row, x) in units.iter().enumerate() {
        let ex = e.apply(x);
        for j in 0..k {
            m[(row, j)] = ex.blocks()[j].trace() - x.blocks()[j].trace();
        }
    }
    null_space_scaled(&m, tol.rank, 1.0)
}

fn positive_trace(amb: &MultiMatrixAlgebra, v: Vec<f64>) -> Option<TraceState> {
    let sign = if v.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let v: Vec<f64> = v.into_iter().map(|x| x * sign).collect();
    if v.iter().any(|&x| x <= 1e-12) {
        return None;
    }
    let mass: f64 = v.iter().zip(amb.dims()).map(|(t, &n)| t * n as f64).sum();
    TraceState::new(amb, v.into_iter().map(|x| x / mass).collect()).ok()
}

/// The expectation `F: A → C` with `E₀|_C ∘ F = E₀`, for `B ⊆ C ⊆ A`.
///
/// `F` is the orthogonal projection onto `C` for a faithful trace `τ` on `A`
/// with `τ ∘ E₀ = τ`.
pub fn compatible_expectation(
    e0: &ConditionalExpectation,
    c: &SubalgebraBasis,
    tol: &Tol,
) -> Result<CompatibleExpectation> {
    let inc = e0.inclusion();
    let amb = inc.ambient();
    for b in inc.embedding().unit_images() {
        let res = c.residual(b);
        if !tol.ok(res) {
            return Err(Error::NoCompatibleExpectation(format!(
                "intermediate algebra does not contain the subalgebra (residual {res:.3e})"
            )));
        }
    }
    let (calg, chom) = decompose_subalgebra(c, tol)?;
    let _ = calg;
    let c_inc = UnitalInclusion::new(chom, &Tol::with_eq(tol.eq.max(1e-7)))?;

    let kernel = invariant_trace_vectors(e0, tol);
    let mut traces: Vec<TraceState> = Vec::new();
    for col in kernel.column_iter() {
        if let Some(t) = positive_trace(amb, col.iter().map(|z| z.re).collect()) {
            traces.push(t);
        }
    }
    if traces.is_empty() && kernel.ncols() > 0 {
        // look for a positive combination
        let sum: Vec<f64> = (0..amb.num_blocks())
            .map(|j| kernel.row(j).iter().map(|z| z.re).sum())
            .collect();
        if let Some(t) = positive_trace(amb, sum) {
            traces.push(t);
        }
    }
    let tau = match markov_trace(inc) {
        Ok((t, _)) if tol.ok(e0.trace_preservation_residual(&t)) => t,
        _ => traces
            .first()
            .cloned()
            .ok_or_else(|| Error::NoCompatibleExpectation("no invariant faithful trace".into()))?,
    };
    let f = trace_preserving_expectation(&c_inc, &tau)?;
    let compat = amb
        .matrix_units()
        .iter()
        .map(|x| (&e0.apply(&f.apply(x)) - &e0.apply(x)).norm())
        .fold(0.0, f64::max);
    if !tol.ok(compat) {
        return Err(Error::NoCompatibleExpectation(format!(
            "E0 after F differs from E0 by {compat:.3e}"
        )));
    }
    let other = traces
        .iter()
        .find(|t| {
            t.vector()
                .iter()
                .zip(tau.vector())
                .any(|(a, b)| (a - b).abs() > 1e-6)
        })
        .cloned();
    let uniqueness_residual = match other {
        Some(t2) => Some(f.distance(&trace_preserving_expectation(&c_inc, &t2)?)),
        None => None,
    };
    Ok(CompatibleExpectation {
        intermediate: c_inc,
        expectation: f,
        compatibility_residual: compat,
        uniqueness_residual,
    })
}
