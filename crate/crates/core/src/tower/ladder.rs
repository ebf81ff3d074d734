use super::basic_construction;
use crate::algebra::{
    relative_commutant_decomposed, Element, MultiMatrixAlgebra, StarHomomorphism, UnitalInclusion,
};
use crate::error::{Error, Result};
use crate::linalg::{vnorm, OrthoSpan};
use crate::quasi_basis::generic_index;
use crate::tol::Tol;
use crate::traces::{ConditionalExpectation, IndexValue};

/// `A_k` with its inclusion `A_{k−1} ⊂ A_k` and expectation `E_k: A_k → A_{k−1}`.
/// Level 0 holds the original `B ⊂ A` and `E`.
#[derive(Debug, Clone)]
pub struct TowerLevel {
    pub inclusion: UnitalInclusion,
    pub expectation: ConditionalExpectation,
    /// `e_k ∈ A_k`; absent at level 0.
    pub jones: Option<Element>,
    /// `Ind_W(E_k)`.
    pub index: IndexValue,
    /// `B ⊂ A_k`.
    pub from_base: UnitalInclusion,
    /// `B' ∩ A_k` as an abstract algebra with its embedding into `A_k`.
    pub commutant: (MultiMatrixAlgebra, StarHomomorphism),
}

impl TowerLevel {
    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        self.inclusion.ambient()
    }

    pub fn commutant_dim(&self) -> usize {
        self.commutant.0.total_dim()
    }
}

#[derive(Debug, Clone)]
pub struct JonesTower {
    pub levels: Vec<TowerLevel>,
    pub cap: usize,
    tol: Tol,
}

/// `Σᵢ Nᵢ²` with `Nᵢ = Σⱼ nⱼΛᵢⱼ`, the dimension of the next basic construction.
pub fn projected_dimension(inc: &UnitalInclusion) -> usize {
    let dims = inc.ambient().dims();
    inc.inclusion_matrix()
        .iter()
        .map(|row| {
            let n: usize = row.iter().zip(dims).map(|(&l, &d)| l * d).sum();
            n * n
        })
        .sum()
}

impl JonesTower {
    pub fn new(e: &ConditionalExpectation, cap: usize, tol: &Tol) -> Result<Self> {
        let inc = e.inclusion().clone();
        if inc.ambient().total_dim() > cap {
            return Err(Error::DimensionCap {
                projected: inc.ambient().total_dim(),
                cap,
            });
        }
        let commutant = relative_commutant_decomposed(&inc)?;
        let level = TowerLevel {
            index: generic_index(e, tol)?,
            expectation: e.clone(),
            jones: None,
            from_base: inc.clone(),
            inclusion: inc,
            commutant,
        };
        Ok(JonesTower {
            levels: vec![level],
            cap,
            tol: *tol,
        })
    }

    /// Highest level index built so far.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// Adds `A_{k+1}` by the basic construction for `E_k`.
    pub fn extend(&mut self) -> Result<()> {
        let top = self.levels.last().expect("nonempty");
        let projected = projected_dimension(&top.inclusion);
        if projected > self.cap {
            return Err(Error::DimensionCap {
                projected,
                cap: self.cap,
            });
        }
        let bc = basic_construction(&top.expectation, None, &self.tol)?;
        let dual = bc.dual_expectation(&self.tol)?;
        let from_base = top.from_base.then(bc.lambda())?;
        let commutant = relative_commutant_decomposed(&from_base)?;
        let level = TowerLevel {
            index: generic_index(&dual, &self.tol)?,
            inclusion: bc.lambda().clone(),
            expectation: dual,
            jones: Some(bc.jones_projection().clone()),
            from_base,
            commutant,
        };
        self.levels.push(level);
        Ok(())
    }

    pub fn commutant_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.commutant_dim()).collect()
    }

    pub fn algebra_dims(&self) -> Vec<Vec<usize>> {
        self.levels
            .iter()
            .map(|l| l.algebra().dims().to_vec())
            .collect()
    }

    /// Compares `span{N e_k N}` with `B' ∩ A_k` for `N = B' ∩ A_{k−1}`.
    ///
    /// The span is a two-sided ideal of `B' ∩ A_k` (push-down lemma:
    /// `w e_k = Ind·Ẽ(w e_k) e_k`), so it is the sum of the summands whose
    /// central projection `z_r` has `z_r e_k ≠ 0`. When the sizes allow, the
    /// span is also built directly and its projection residual recorded.
    pub fn depth_step(&self, k: usize) -> DepthStep {
        let lvl = &self.levels[k];
        let ek = lvl.jones.as_ref().expect("levels above 0 carry e_k");
        let (calg, chom) = &lvl.commutant;
        let target = calg.total_dim();
        let mut ideal_dim = 0;
        let mut missing = 0;
        for (r, &d) in calg.dims().iter().enumerate() {
            let mut z = lvl.algebra().zero();
            for a in 0..d {
                z = &z + chom.unit_image(r, a, a);
            }
            // z_r e_k is a projection, so it is either 0 or of norm ≥ 1
            if (&z * ek).norm() > 0.5 {
                ideal_dim += d * d;
            } else {
                missing += 1;
            }
        }
        let direct = (target * target).saturating_mul(lvl.algebra().total_dim()) <= DIRECT_BUDGET;
        let (span_dim, residual) = if direct {
            self.direct_span(k)
        } else {
            (ideal_dim, if missing == 0 { 0.0 } else { 1.0 })
        };
        DepthStep {
            k,
            span_dim,
            ideal_dim,
            commutant_dim: target,
            residual,
            direct,
            equal: span_dim == target && ideal_dim == target && self.tol.ok(residual),
        }
    }

    /// Gram–Schmidt on `x e_k y` and the largest relative distance of a
    /// commutant matrix unit from the span.
    fn direct_span(&self, k: usize) -> (usize, f64) {
        let lvl = &self.levels[k];
        let prev = &self.levels[k - 1];
        let ek = lvl.jones.as_ref().expect("levels above 0 carry e_k");
        let n: Vec<Element> = prev
            .commutant
            .1
            .unit_images()
            .iter()
            .map(|x| lvl.inclusion.embed(x))
            .collect();
        let target = lvl.commutant_dim();
        let amb = lvl.algebra();
        let mut span = OrthoSpan::new(amb.total_dim(), self.tol.rank);
        let top = n.iter().map(Element::norm).fold(0.0, f64::max);
        let scale = top * top * ek.norm();
        'outer: for x in &n {
            let xe = x * ek;
            for y in &n {
                span.push_scaled(&amb.coords(&(&xe * y)), scale);
                if span.len() >= target {
                    break 'outer;
                }
            }
        }
        let residual = lvl
            .commutant
            .1
            .unit_images()
            .iter()
            .map(|c| {
                let v = amb.coords(c);
                vnorm(&span.residual(&v)) / vnorm(&v)
            })
            .fold(0.0, f64::max);
        (span.len(), residual)
    }
}

/// Above `dim(B'∩A_k)² · dim A_k` the direct span is skipped.
const DIRECT_BUDGET: usize = 1 << 30;

/// One comparison in the depth test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthStep {
    pub k: usize,
    /// Dimension of `span{N e_k N}`.
    pub span_dim: usize,
    /// Dimension predicted by the ideal structure.
    pub ideal_dim: usize,
    pub commutant_dim: usize,
    /// Largest relative distance of `B' ∩ A_k` from the span.
    pub residual: f64,
    /// Whether the span was built directly.
    pub direct: bool,
    pub equal: bool,
}

/// Least `k` at which the relative commutant is generated by its predecessor
/// and `e_k`, or `None` ("> m") when no tested level qualifies.
#[derive(Debug, Clone, PartialEq)]
pub struct Depth {
    pub value: Option<usize>,
    pub tested_up_to: usize,
    pub steps: Vec<DepthStep>,
    /// Projected dimension that stopped the search, if the cap was hit.
    pub capped_at: Option<usize>,
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.value {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "> {}", self.tested_up_to),
        }
    }
}

/// Builds `B ⊂ A ⊂ A₁ ⊂ … ⊂ A_m`.
pub fn jones_tower(
    e: &ConditionalExpectation,
    m: usize,
    cap: usize,
    tol: &Tol,
) -> Result<JonesTower> {
    let mut t = JonesTower::new(e, cap, tol)?;
    for _ in 0..m {
        t.extend()?;
    }
    Ok(t)
}

/// Depth of `E`, building levels only as far as needed and at most `max_k`.
pub fn depth(
    e: &ConditionalExpectation,
    max_k: usize,
    cap: usize,
    tol: &Tol,
) -> Result<(JonesTower, Depth)> {
    let mut t = JonesTower::new(e, cap, tol)?;
    let mut steps = Vec::new();
    for k in 1..=max_k {
        match t.extend() {
            Ok(()) => {}
            Err(Error::DimensionCap { projected, .. }) => {
                return Ok((
                    t,
                    Depth {
                        value: None,
                        tested_up_to: k - 1,
                        steps,
                        capped_at: Some(projected),
                    },
                ))
            }
            Err(other) => return Err(other),
        }
        let step = t.depth_step(k);
        steps.push(step);
        if step.equal {
            return Ok((
                t,
                Depth {
                    value: Some(k),
                    tested_up_to: k,
                    steps,
                    capped_at: None,
                },
            ));
        }
    }
    Ok((
        t,
        Depth {
            value: None,
            tested_up_to: max_k,
            steps,
            capped_at: None,
        },
    ))
}
