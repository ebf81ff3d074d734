use super::FiniteGroup;
use crate::algebra::{Element, MultiMatrixAlgebra, StarHomomorphism};
use crate::error::{Error, Result};
use crate::tol::Tol;

/// A twisted action `(α, σ)` of a finite group on `C`.
#[derive(Debug, Clone)]
pub struct CocycleAction {
    pub group: FiniteGroup,
    pub algebra: MultiMatrixAlgebra,
    /// `α_g` for each group element, as maps `C → C`.
    pub alpha: Vec<StarHomomorphism>,
    /// `σ(g, h)` indexed `[g][h]`.
    pub sigma: Vec<Vec<Element>>,
}

impl CocycleAction {
    pub fn new(
        group: FiniteGroup,
        algebra: MultiMatrixAlgebra,
        alpha: Vec<StarHomomorphism>,
        sigma: Vec<Vec<Element>>,
    ) -> Result<Self> {
        let n = group.order();
        if alpha.len() != n || sigma.len() != n || sigma.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!(
                "action needs {n} automorphisms and {n}x{n} cocycle values"
            )));
        }
        for a in &alpha {
            if a.source() != &algebra || a.target() != &algebra {
                return Err(Error::Shape("α_g must map C to C".into()));
            }
        }
        for s in sigma.iter().flatten() {
            algebra.check(s)?;
        }
        Ok(CocycleAction {
            group,
            algebra,
            alpha,
            sigma,
        })
    }

    /// `σ ≡ 1`.
    pub fn untwisted(
        group: FiniteGroup,
        algebra: MultiMatrixAlgebra,
        alpha: Vec<StarHomomorphism>,
    ) -> Result<Self> {
        let n = group.order();
        let sigma = vec![vec![algebra.one(); n]; n];
        CocycleAction::new(group, algebra, alpha, sigma)
    }

    pub fn trivial(group: FiniteGroup, algebra: MultiMatrixAlgebra) -> Self {
        let alpha = vec![StarHomomorphism::identity(&algebra); group.order()];
        CocycleAction::untwisted(group, algebra, alpha).expect("shapes agree")
    }

    /// `α_g = Ad(w_g)` for unitaries `w_g ∈ C`, with `σ(g,h) = w_g w_h w_{gh}*`.
    ///
    /// When `g ↦ w_g` is a projective representation with `w_e = 1`, the
    /// cocycle is central and the identities hold.
    pub fn inner(group: FiniteGroup, algebra: MultiMatrixAlgebra, w: Vec<Element>) -> Result<Self> {
        if w.len() != group.order() {
            return Err(Error::Shape("one unitary per group element".into()));
        }
        let alpha = w
            .iter()
            .map(|u| conjugation(&algebra, u))
            .collect::<Result<Vec<_>>>()?;
        let n = group.order();
        let sigma = (0..n)
            .map(|g| {
                (0..n)
                    .map(|h| &(&w[g] * &w[h]) * &w[group.mul(g, h)].adjoint())
                    .collect()
            })
            .collect();
        CocycleAction::new(group, algebra, alpha, sigma)
    }

    /// `G` acting on `ℂⁿ` by permuting coordinates through `perm[g]`, i.e.
    /// `α_g(e_k) = e_{perm[g][k]}`.
    pub fn permutation(group: FiniteGroup, perm: Vec<Vec<usize>>) -> Result<Self> {
        let n = perm.first().map_or(0, Vec::len);
        let c = MultiMatrixAlgebra::diagonal(n);
        let alpha = perm
            .iter()
            .map(|p| {
                let images = (0..n).map(|k| c.unit(p[k], 0, 0)).collect();
                StarHomomorphism::new(c.clone(), c.clone(), images)
            })
            .collect::<Result<Vec<_>>>()?;
        CocycleAction::untwisted(group, c, alpha)
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }
}

/// `x ↦ u x u*` on `C`.
pub fn conjugation(c: &MultiMatrixAlgebra, u: &Element) -> Result<StarHomomorphism> {
    c.check(u)?;
    let images = c
        .matrix_units()
        .iter()
        .map(|x| &(u * x) * &u.adjoint())
        .collect();
    StarHomomorphism::new(c.clone(), c.clone(), images)
}

/// Largest residual of each defining identity, checked over all of `G`,
/// `G × G`, `G × G × G` and a basis of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleReport {
    /// Each `α_g` is a unital injective *-homomorphism.
    pub automorphism: f64,
    /// `σ(g,h)` unitary.
    pub unitary: f64,
    /// `α_g ∘ α_h = Ad(σ(g,h)) ∘ α_{gh}`.
    pub twisted_composition: f64,
    /// `σ(g,h)σ(gh,k) = α_g(σ(h,k))σ(g,hk)`.
    pub cocycle: f64,
    /// `σ(g,e) = σ(e,g) = 1`.
    pub normalization: f64,
}

pub const IDENTITY_COMPOSITION: &str = "alpha_g alpha_h = Ad(sigma(g,h)) alpha_gh";
pub const IDENTITY_COCYCLE: &str = "sigma(g,h) sigma(gh,k) = alpha_g(sigma(h,k)) sigma(g,hk)";
pub const IDENTITY_NORMALIZATION: &str = "sigma(g,e) = sigma(e,g) = 1";

impl CocycleReport {
    /// Named identities whose residual exceeds `tol`, in a fixed order.
    pub fn failures(&self, tol: &Tol) -> Vec<(&'static str, f64)> {
        [
            ("alpha_g is an automorphism", self.automorphism),
            ("sigma(g,h) is unitary", self.unitary),
            (IDENTITY_COMPOSITION, self.twisted_composition),
            (IDENTITY_COCYCLE, self.cocycle),
            (IDENTITY_NORMALIZATION, self.normalization),
        ]
        .into_iter()
        .filter(|(_, r)| !tol.ok(*r))
        .collect()
    }

    pub fn passes(&self, tol: &Tol) -> bool {
        self.failures(tol).is_empty()
    }

    /// The first failing identity as an error.
    pub fn into_result(self, tol: &Tol) -> Result<Self> {
        match self.failures(tol).first() {
            None => Ok(self),
            Some(&(identity, residual)) => Err(Error::CocycleIdentity {
                identity: identity.to_string(),
                residual,
            }),
        }
    }
}

pub fn verify_cocycle_action(action: &CocycleAction) -> CocycleReport {
    let g = &action.group;
    let n = g.order();
    let c = &action.algebra;
    let units = c.matrix_units();
    let e = g.identity();

    let automorphism = action
        .alpha
        .iter()
        .map(|a| {
            let r = a.verify();
            let inj = if r.injective { 0.0 } else { f64::INFINITY };
            r.multiplicative.max(r.star).max(r.unital).max(inj)
        })
        .fold(0.0, f64::max);
    let one = c.one();
    let unitary = action
        .sigma
        .iter()
        .flatten()
        .map(|s| (&(s * &s.adjoint()) - &one).norm() + (&(&s.adjoint() * s) - &one).norm())
        .fold(0.0, f64::max);

    let mut twisted_composition: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let s = &action.sigma[a][b];
            let ab = g.mul(a, b);
            for x in &units {
                let lhs = action.alpha[a].apply(&action.alpha[b].apply(x));
                let rhs = &(s * &action.alpha[ab].apply(x)) * &s.adjoint();
                twisted_composition = twisted_composition.max((&lhs - &rhs).norm());
            }
        }
    }

    let mut cocycle: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            for k in 0..n {
                let lhs = &action.sigma[a][b] * &action.sigma[ab][k];
                let rhs =
                    &action.alpha[a].apply(&action.sigma[b][k]) * &action.sigma[a][g.mul(b, k)];
                cocycle = cocycle.max((&lhs - &rhs).norm());
            }
        }
    }

    let normalization = (0..n)
        .map(|a| {
            (&action.sigma[a][e] - &one)
                .norm()
                .max((&action.sigma[e][a] - &one).norm())
        })
        .fold(0.0, f64::max);

    CocycleReport {
        automorphism,
        unitary,
        twisted_composition,
        cocycle,
        normalization,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::standard::{pauli_x, pauli_z};

    fn tol() -> Tol {
        Tol::default()
    }

    #[test]
    fn trivial_action_passes() {
        let c = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        let act = CocycleAction::trivial(FiniteGroup::klein_four(), c);
        assert!(verify_cocycle_action(&act).passes(&tol()));
    }

    #[test]
    fn swap_on_two_points_passes() {
        let act = CocycleAction::permutation(FiniteGroup::cyclic(2), vec![vec![0, 1], vec![1, 0]])
            .unwrap();
        assert!(verify_cocycle_action(&act).passes(&tol()));
    }

    #[test]
    fn pauli_projective_action_has_central_cocycle() {
        let c = MultiMatrixAlgebra::full(2);
        let x = Element::from_blocks(vec![pauli_x()]);
        let z = Element::from_blocks(vec![pauli_z()]);
        let w = vec![c.one(), x.clone(), z.clone(), &x * &z];
        let act = CocycleAction::inner(FiniteGroup::klein_four(), c, w).unwrap();
        let rep = verify_cocycle_action(&act);
        assert!(rep.passes(&tol()), "{rep:?}");
        let nontrivial = act
            .sigma
            .iter()
            .flatten()
            .any(|s| (s - &act.algebra.one()).norm() > 0.5);
        assert!(nontrivial);
    }

    #[test]
    fn corrupted_cocycle_names_the_identity() {
        let c = MultiMatrixAlgebra::full(1);
        let x = Element::from_blocks(vec![pauli_x()]);
        let z = Element::from_blocks(vec![pauli_z()]);
        let m2 = MultiMatrixAlgebra::full(2);
        let proj = CocycleAction::inner(
            FiniteGroup::klein_four(),
            m2,
            vec![
                MultiMatrixAlgebra::full(2).one(),
                x.clone(),
                z.clone(),
                &x * &z,
            ],
        )
        .unwrap();
        // the scalar cocycle of the Pauli projective representation, on ℂ
        let sigma: Vec<Vec<Element>> = proj
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
        let mut act = CocycleAction::new(
            FiniteGroup::klein_four(),
            c.clone(),
            vec![StarHomomorphism::identity(&c); 4],
            sigma,
        )
        .unwrap();
        assert!(verify_cocycle_action(&act).passes(&tol()));
        act.sigma[1][2] = act.sigma[1][2].scale_re(-1.0);
        let rep = verify_cocycle_action(&act);
        let fails = rep.failures(&tol());
        assert_eq!(fails.len(), 1);
        assert_eq!(fails[0].0, IDENTITY_COCYCLE);
        let err = rep.into_result(&tol()).unwrap_err();
        assert!(err.to_string().contains(IDENTITY_COCYCLE));
    }
}
