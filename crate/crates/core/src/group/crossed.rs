use super::action::{verify_cocycle_action, CocycleAction};
use crate::algebra::{
    decompose_subalgebra, generated_subalgebra, Element, MultiMatrixAlgebra, StarHomomorphism,
    SubalgebraBasis, UnitalInclusion,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_fn, CMat, CVec};
use crate::quasi_basis::{verify_quasi_basis, QuasiBasisReport};
use crate::tol::Tol;
use crate::traces::{ConditionalExpectation, TraceState};

/// `C ⋊_{(α,σ)} G` in abstract block form, with the unitaries `u_g`, the
/// embedding of `C` and the canonical expectation.
///
/// The concrete model is the left action of the formal sums `Σ x_g u_g` on
/// themselves, made a *-representation by the inner product
/// `⟨a, b⟩ = τ(E(a*b))` for the canonical trace `τ` of `C`.
#[derive(Debug, Clone)]
pub struct CrossedProduct {
    pub action: CocycleAction,
    pub algebra: MultiMatrixAlgebra,
    pub u: Vec<Element>,
    pub inclusion: UnitalInclusion,
    pub expectation: ConditionalExpectation,
    /// The isomorphism onto the concrete model in `M_{|G| dim C}`.
    pub to_model: StarHomomorphism,
    half: CMat,
    inv_half: CMat,
}

/// Formal sums `Σ x_g u_g`, indexed by group element.
type Formal = Vec<Element>;

fn formal_mul(act: &CocycleAction, a: &Formal, b: &Formal) -> Formal {
    let g = &act.group;
    let mut out = vec![act.algebra.zero(); g.order()];
    for (p, x) in a.iter().enumerate() {
        if x.norm() == 0.0 {
            continue;
        }
        for (q, y) in b.iter().enumerate() {
            if y.norm() == 0.0 {
                continue;
            }
            // x u_p y u_q = x α_p(y) σ(p,q) u_{pq}
            let term = &(x * &act.alpha[p].apply(y)) * &act.sigma[p][q];
            let pq = g.mul(p, q);
            out[pq] = &out[pq] + &term;
        }
    }
    out
}

fn formal_star(act: &CocycleAction, a: &Formal) -> Formal {
    let g = &act.group;
    let mut out = vec![act.algebra.zero(); g.order()];
    for (p, x) in a.iter().enumerate() {
        // (x u_p)* = u_{p⁻¹} σ(p,p⁻¹)* x* = α_{p⁻¹}(σ(p,p⁻¹)* x*) u_{p⁻¹}
        let pi = g.inv(p);
        let inner = &act.sigma[p][pi].adjoint() * &x.adjoint();
        out[pi] = &out[pi] + &act.alpha[pi].apply(&inner);
    }
    out
}

fn formal_coords(act: &CocycleAction, a: &Formal) -> CVec {
    let d = act.algebra.total_dim();
    let mut v = CVec::zeros(d * a.len());
    for (g, x) in a.iter().enumerate() {
        v.rows_mut(g * d, d).copy_from(&act.algebra.coords(x));
    }
    v
}

fn basis_vector(act: &CocycleAction, g: usize, x: Element) -> Formal {
    let mut f = vec![act.algebra.zero(); act.order()];
    f[g] = x;
    f
}

/// Builds the crossed product after verifying the action.
pub fn crossed_product(action: &CocycleAction, tol: &Tol) -> Result<CrossedProduct> {
    verify_cocycle_action(action).into_result(tol)?;
    let c = &action.algebra;
    let g = &action.group;
    let d = c.total_dim();
    let n = g.order() * d;
    let units = c.matrix_units();
    let basis: Vec<Formal> = (0..g.order())
        .flat_map(|h| units.iter().map(move |x| (h, x.clone())))
        .map(|(h, x)| basis_vector(action, h, x))
        .collect();
    let tau = TraceState::canonical(c);
    let e = g.identity();
    let stars: Vec<Formal> = basis.iter().map(|v| formal_star(action, v)).collect();
    let gram = CMat::from_fn(n, n, |p, q| {
        let prod = formal_mul(action, &stars[p], &basis[q]);
        tau.eval(&prod[e])
    });
    let (vals, _) = hermitian_eigen(&gram);
    if vals[0] <= tol.rank * vals[n - 1] {
        return Err(Error::NotFaithful(
            "crossed-product inner product is degenerate".into(),
        ));
    }
    let half = hermitian_fn(&gram, f64::sqrt);
    let inv_half = hermitian_fn(&gram, |v| 1.0 / v.sqrt());
    let model = MultiMatrixAlgebra::full(n);
    let represent = |a: &Formal| {
        let mut m = CMat::zeros(n, n);
        for (q, v) in basis.iter().enumerate() {
            m.set_column(q, &formal_coords(action, &formal_mul(action, a, v)));
        }
        Element::from_blocks(vec![&half * m * &inv_half])
    };
    let c_model: Vec<Element> = units
        .iter()
        .map(|x| represent(&basis_vector(action, e, x.clone())))
        .collect();
    let u_model: Vec<Element> = (0..g.order())
        .map(|h| represent(&basis_vector(action, h, c.one())))
        .collect();
    // the images of the basis x u_g span the model; n of them must be independent
    let images: Vec<Element> = basis.iter().map(represent).collect();
    let span = SubalgebraBasis::from_elements(&model, &images, tol);
    if span.dim() != n {
        return Err(Error::NotSubalgebra(format!(
            "model spans dimension {} instead of {n}",
            span.dim()
        )));
    }
    let (algebra, to_model) = decompose_subalgebra(&span, tol)?;
    let pull = |y: &Element| -> Result<Element> {
        let (x, res) = to_model.preimage(y);
        if res > 1e-7 * y.norm().max(1.0) {
            return Err(Error::NotSubalgebra(format!("preimage residual {res:.3e}")));
        }
        Ok(x)
    };
    let u = u_model.iter().map(pull).collect::<Result<Vec<_>>>()?;
    let c_images = c_model.iter().map(pull).collect::<Result<Vec<_>>>()?;
    let inclusion = UnitalInclusion::from_images(
        c.clone(),
        algebra.clone(),
        c_images,
        &Tol::with_eq(tol.eq.max(1e-7)),
    )?;
    let mut cp = CrossedProduct {
        action: action.clone(),
        algebra: algebra.clone(),
        u,
        expectation: ConditionalExpectation::from_map(
            inclusion.clone(),
            CMat::zeros(d, algebra.total_dim()),
        )?,
        inclusion,
        to_model,
        half,
        inv_half,
    };
    let mut map = CMat::zeros(d, algebra.total_dim());
    for (k, x) in algebra.matrix_units().iter().enumerate() {
        map.set_column(k, &c.coords(&cp.coefficients(x)[e]));
    }
    cp.expectation = ConditionalExpectation::from_map(cp.inclusion.clone(), map)?;
    Ok(cp)
}

impl CrossedProduct {
    pub fn group_order(&self) -> usize {
        self.action.order()
    }

    /// The `x_g ∈ C` with `x = Σ x_g u_g`.
    pub fn coefficients(&self, x: &Element) -> Vec<Element> {
        let y = self.to_model.apply(x);
        let left = &self.inv_half * &y.blocks()[0] * &self.half;
        let c = &self.action.algebra;
        let one = basis_vector(&self.action, self.action.group.identity(), c.one());
        let v = left * formal_coords(&self.action, &one);
        let d = c.total_dim();
        (0..self.group_order())
            .map(|g| c.element(&v.rows(g * d, d).into_owned()))
            .collect()
    }

    /// `Σ ι(x_g) u_g`.
    pub fn compose(&self, coeffs: &[Element]) -> Element {
        let mut acc = self.algebra.zero();
        for (x, u) in coeffs.iter().zip(&self.u) {
            acc = &acc + &(&self.inclusion.embed(x) * u);
        }
        acc
    }

    pub fn verify(&self, tol: &Tol) -> CrossedProductReport {
        let act = &self.action;
        let g = &act.group;
        let c_units = act.algebra.matrix_units();
        let emb = |x: &Element| self.inclusion.embed(x);
        let mut covariance: f64 = 0.0;
        for (h, u) in self.u.iter().enumerate() {
            for x in &c_units {
                let lhs = &(u * &emb(x)) * &u.adjoint();
                covariance = covariance.max((&lhs - &emb(&act.alpha[h].apply(x))).norm());
            }
        }
        let mut multiplication: f64 = 0.0;
        for a in 0..g.order() {
            for b in 0..g.order() {
                let lhs = &self.u[a] * &self.u[b];
                let rhs = &emb(&act.sigma[a][b]) * &self.u[g.mul(a, b)];
                multiplication = multiplication.max((&lhs - &rhs).norm());
            }
        }
        let mut star: f64 = 0.0;
        let mut star_left_cocycle: f64 = 0.0;
        for a in 0..g.order() {
            let ai = g.inv(a);
            let s = emb(&act.sigma[a][ai]).adjoint();
            let adj = self.u[a].adjoint();
            star = star.max((&adj - &(&self.u[ai] * &s)).norm());
            star_left_cocycle = star_left_cocycle.max((&adj - &(&s * &self.u[ai])).norm());
        }
        let mut gens: Vec<Element> = c_units.iter().map(emb).collect();
        gens.extend(self.u.iter().cloned());
        let generated_dim = generated_subalgebra(&self.algebra, &gens, tol)
            .map(|s| s.dim())
            .unwrap_or(0);
        let e = &self.expectation;
        let kills_u = (0..g.order())
            .filter(|&a| a != g.identity())
            .map(|a| e.apply_sub(&self.u[a]).norm())
            .fold(0.0, f64::max);
        let mut equivariance: f64 = 0.0;
        for x in self.algebra.matrix_units() {
            let ex = e.apply_sub(&x);
            for (a, u) in self.u.iter().enumerate() {
                let lhs = e.apply_sub(&(&(u * &x) * &u.adjoint()));
                equivariance = equivariance.max((&lhs - &act.alpha[a].apply(&ex)).norm());
            }
        }
        let quasi_basis = verify_quasi_basis(e, &self.u, tol).report;
        let mut ind = self.algebra.zero();
        for u in &self.u {
            ind = &ind + &(u * &u.adjoint());
        }
        let index = (&ind - &self.algebra.one().scale_re(g.order() as f64)).norm();
        CrossedProductReport {
            covariance,
            multiplication,
            star,
            star_left_cocycle,
            generated_dim,
            dim: self.algebra.total_dim(),
            expectation_of_u: kills_u,
            equivariance,
            quasi_basis,
            index,
            expectation_valid: e.verify().passes(tol),
        }
    }
}

/// `E(Σ x_g u_g) = x_e`.
pub fn canonical_expectation(cp: &CrossedProduct) -> ConditionalExpectation {
    cp.expectation.clone()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossedProductReport {
    /// `u_g x u_g* = α_g(x)`.
    pub covariance: f64,
    /// `u_g u_h = σ(g,h) u_{gh}`.
    pub multiplication: f64,
    /// `u_g* = u_{g⁻¹} σ(g,g⁻¹)*`.
    pub star: f64,
    /// `u_g* = σ(g,g⁻¹)* u_{g⁻¹}`; equal to the above only when
    /// `σ(g,g⁻¹) = σ(g⁻¹,g)`, so it is reported but not required.
    pub star_left_cocycle: f64,
    pub generated_dim: usize,
    pub dim: usize,
    /// `max_{g≠e} ‖E(u_g)‖`.
    pub expectation_of_u: f64,
    /// `E(u_g x u_g*) = α_g(E(x))`.
    pub equivariance: f64,
    pub quasi_basis: QuasiBasisReport,
    /// `‖Σ u_g u_g* − |G|‖`.
    pub index: f64,
    pub expectation_valid: bool,
}

impl CrossedProductReport {
    pub fn passes(&self, tol: &Tol) -> bool {
        tol.ok(self.covariance)
            && tol.ok(self.multiplication)
            && tol.ok(self.star)
            && self.generated_dim == self.dim
            && tol.ok(self.expectation_of_u)
            && tol.ok(self.equivariance)
            && tol.ok(self.quasi_basis.left)
            && tol.ok(self.quasi_basis.right)
            && tol.ok(self.index)
            && self.expectation_valid
    }
}
