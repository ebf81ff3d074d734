//! The basic construction, dual expectations and the tower of algebras.
//!
//! For `E: A → B` and a faithful trace `τ_B`, the GNS space of `ω = τ_B ∘ E`
//! splits as `⊕ᵢ Kᵢ ⊗ ℂ^{nᵢ}` with `Kᵢ = A·ι(e⁽ⁱ⁾₁₁)`. Right `B`-linear maps
//! act as `T ⊗ 1` on this splitting, so `A₁ = ⊕ᵢ M_{Nᵢ}` with
//! `Nᵢ = dim Kᵢ = Σⱼ nⱼΛᵢⱼ`. Each `Kᵢ` carries the `ω`-orthonormal basis
//! `f_{jsc} = e_s w_c*` of [`generic_quasi_basis`](crate::quasi_basis::generic_quasi_basis).

pub mod concrete;
mod ladder;

pub use ladder::{
    depth, jones_tower, projected_dimension, Depth, DepthStep, JonesTower, TowerLevel,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{
    Element, MultiMatrixAlgebra, StarHomomorphism, SubalgebraBasis, UnitalInclusion,
};
use crate::error::{Error, Result};
use crate::linalg::{kron, r, CMat, CVec, C64};
use crate::quasi_basis::weighted_range;
use crate::tol::Tol;
use crate::traces::{ConditionalExpectation, IndexValue, TraceState};

/// One ambient block `j` inside `Kᵢ`: coordinates `offset..offset + nⱼ·m`.
#[derive(Debug, Clone)]
struct Part {
    block: usize,
    offset: usize,
    mult: usize,
    w: CMat,
}

/// The `ω`-orthonormal frame of `Kᵢ`.
#[derive(Debug, Clone)]
struct Frame {
    weight: f64,
    size: usize,
    parts: Vec<Part>,
}

#[derive(Debug, Clone)]
pub struct BasicConstructionData {
    inclusion: UnitalInclusion,
    expectation: ConditionalExpectation,
    tau_b: TraceState,
    rho: Vec<CMat>,
    frames: Vec<Frame>,
    lambda: UnitalInclusion,
    e1: Element,
    index: IndexValue,
}

/// Residuals of the basic-construction identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicConstructionReport {
    /// `‖e₁² − e₁‖ + ‖e₁* − e₁‖`.
    pub projection: f64,
    /// `max ‖[e₁, λ(ι(b))]‖` over matrix units of `B`.
    pub commutes_with_sub: f64,
    /// `max ‖e₁λ(x)e₁ − λ(E(x))e₁‖`.
    pub compression: f64,
    /// `‖Σ λ(λᵢ) e₁ λ(λᵢ)* − 1‖` for the frame quasi-basis.
    pub frame_sum: f64,
    /// `dim span{λ(x) e₁ λ(y)}` when it was computed.
    pub span_dim: Option<usize>,
}

impl BasicConstructionReport {
    pub fn passes(&self, tol: &Tol, a1_dim: usize) -> bool {
        tol.ok(self.projection)
            && tol.ok(self.commutes_with_sub)
            && tol.ok(self.compression)
            && tol.ok(self.frame_sum)
            && self.span_dim.is_none_or(|d| d == a1_dim)
    }
}

/// Above this many products the `span{x e₁ y}` dimension check is skipped.
const SPAN_CHECK_BUDGET: usize = 1 << 22;
const FULL_CHECK_DIM: usize = 256;

/// Builds `A ⊂ A₁` and `e₁` for a faithful `E: A → B`; `τ_B` defaults to the
/// Markov trace of `ℂ ⊂ B`.
pub fn basic_construction(
    e: &ConditionalExpectation,
    tau_b: Option<&TraceState>,
    tol: &Tol,
) -> Result<BasicConstructionData> {
    let inc = e.inclusion().clone();
    let sub = inc.sub().clone();
    let amb = inc.ambient().clone();
    let tau = match tau_b {
        Some(t) => t.clone(),
        None => TraceState::canonical(&sub),
    };
    tau.require_faithful()?;
    let rho = e.state_density(&tau);
    let lam = inc.inclusion_matrix();

    let mut frames = Vec::with_capacity(sub.num_blocks());
    for (i, row) in lam.iter().enumerate() {
        let mut parts = Vec::new();
        let mut offset = 0;
        for (j, &m) in row.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let w = weighted_range(&inc.embedding().unit_image(i, 0, 0).blocks()[j], &rho[j], m)?;
            parts.push(Part {
                block: j,
                offset,
                mult: m,
                w,
            });
            offset += amb.dims()[j] * m;
        }
        frames.push(Frame {
            weight: tau.vector()[i],
            size: offset,
            parts,
        });
    }
    let a1 = MultiMatrixAlgebra::new(frames.iter().map(|f| f.size).collect())?;

    // λ(e⁽ʲ⁾_{ab}) = ⊕ᵢ e_{ab} ⊗ 1_{Λᵢⱼ}
    let mut images = Vec::with_capacity(amb.total_dim());
    for idx in 0..amb.total_dim() {
        let (j, a, b) = amb.unit_label(idx);
        let nj = amb.dims()[j];
        let mut unit = CMat::zeros(nj, nj);
        unit[(a, b)] = r(1.0);
        let mut x = a1.zero();
        for (i, fr) in frames.iter().enumerate() {
            for part in fr.parts.iter().filter(|p| p.block == j) {
                let k = kron(&unit, &CMat::identity(part.mult, part.mult));
                x.blocks_mut()[i]
                    .view_mut((part.offset, part.offset), (k.nrows(), k.ncols()))
                    .copy_from(&k);
            }
        }
        images.push(x);
    }
    let lambda = UnitalInclusion::trusted(StarHomomorphism::new(amb.clone(), a1.clone(), images)?)?;

    let mut data = BasicConstructionData {
        inclusion: inc,
        expectation: e.clone(),
        tau_b: tau,
        rho,
        frames,
        lambda,
        e1: a1.zero(),
        index: IndexValue::from_element(&amb, amb.zero(), tol),
    };

    // e₁ restricted to Kᵢ projects onto span{ι(e_{κ1})}, each of norm² tᵢ
    let mut e1 = a1.zero();
    for i in 0..sub.num_blocks() {
        let fr = &data.frames[i];
        let mut blk = CMat::zeros(fr.size, fr.size);
        for k in 0..sub.dims()[i] {
            let v = data.embed_unit(i, k);
            let c = data.k_coords(i, &v);
            blk += &c * c.adjoint() * r(1.0 / fr.weight);
        }
        e1.blocks_mut()[i] = blk;
    }
    data.e1 = e1;

    let mut ind = amb.zero();
    for l in data.frame_quasi_basis() {
        ind = &ind + &(&l * &l.adjoint());
    }
    data.index = IndexValue::from_element(&amb, ind, tol);
    Ok(data)
}

impl BasicConstructionData {
    pub fn inclusion(&self) -> &UnitalInclusion {
        &self.inclusion
    }

    pub fn expectation(&self) -> &ConditionalExpectation {
        &self.expectation
    }

    pub fn gns_trace(&self) -> &TraceState {
        &self.tau_b
    }

    /// Dimension of the GNS space, equal to `dim A`.
    pub fn gns_dim(&self) -> usize {
        self.inclusion.ambient().total_dim()
    }

    pub fn a1(&self) -> &MultiMatrixAlgebra {
        self.lambda.ambient()
    }

    /// `A ⊂ A₁` through the left regular representation `λ`.
    pub fn lambda(&self) -> &UnitalInclusion {
        &self.lambda
    }

    pub fn jones_projection(&self) -> &Element {
        &self.e1
    }

    /// `Ind_W(E)` computed from the frame quasi-basis.
    pub fn index(&self) -> &IndexValue {
        &self.index
    }

    fn embed_unit(&self, i: usize, k: usize) -> Element {
        self.inclusion.embedding().unit_image(i, k, 0).clone()
    }

    /// Coordinates of `u ∈ Kᵢ` in the frame: block `j` contributes `uⱼρⱼW`.
    fn k_coords(&self, i: usize, u: &Element) -> CVec {
        let fr = &self.frames[i];
        let amb = self.inclusion.ambient();
        let mut out = CVec::zeros(fr.size);
        for part in &fr.parts {
            let nj = amb.dims()[part.block];
            let alpha = &u.blocks()[part.block] * &self.rho[part.block] * &part.w;
            for s in 0..nj {
                for c in 0..part.mult {
                    out[part.offset + s * part.mult + c] = alpha[(s, c)];
                }
            }
        }
        out
    }

    /// Inverse of [`k_coords`](Self::k_coords): `Σ α_{sc} e_s w_c*`.
    fn k_element(&self, i: usize, alpha: &CVec) -> Element {
        let fr = &self.frames[i];
        let amb = self.inclusion.ambient();
        let mut x = amb.zero();
        for part in &fr.parts {
            let nj = amb.dims()[part.block];
            let a = CMat::from_fn(nj, part.mult, |s, c| alpha[part.offset + s * part.mult + c]);
            x.blocks_mut()[part.block] = a * part.w.adjoint();
        }
        x
    }

    /// Frame vector `f_p` of `Kᵢ` as an element of `A`.
    fn frame_vector(&self, i: usize, p: usize) -> Element {
        let mut alpha = CVec::zeros(self.frames[i].size);
        alpha[p] = r(1.0);
        self.k_element(i, &alpha)
    }

    /// The right quasi-basis `√tᵢ f_p`, ordered by `(i, p)`.
    pub fn frame_quasi_basis(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for (i, fr) in self.frames.iter().enumerate() {
            for p in 0..fr.size {
                out.push(self.frame_vector(i, p).scale_re(fr.weight.sqrt()));
            }
        }
        out
    }

    /// Action of `T ∈ A₁` on the GNS vector of `v ∈ A`.
    pub fn act(&self, t: &Element, v: &Element) -> Element {
        let sub = self.inclusion.sub();
        let emb = self.inclusion.embedding();
        let mut out = self.inclusion.ambient().zero();
        for (i, &ni) in sub.dims().iter().enumerate() {
            for k in 0..ni {
                let u = v * emb.unit_image(i, k, 0);
                let c = self.k_coords(i, &u);
                let tc = &t.blocks()[i] * c;
                let back = self.k_element(i, &tc);
                out = &out + &(&back * emb.unit_image(i, 0, k));
            }
        }
        out
    }

    /// `Σ λ(s) e₁ λ(s)*` over `s ∈ S`.
    pub fn jones_sum(&self, s: &[Element]) -> Element {
        let mut acc = self.a1().zero();
        for x in s {
            let lx = self.lambda.embed(x);
            acc = &acc + &(&(&lx * &self.e1) * &lx.adjoint());
        }
        acc
    }

    fn sample(&self) -> Vec<Element> {
        let amb = self.inclusion.ambient();
        if amb.total_dim() <= FULL_CHECK_DIM {
            amb.matrix_units()
        } else {
            random_elements(amb, 8, 0xbc01)
        }
    }

    pub fn verify(&self, tol: &Tol) -> BasicConstructionReport {
        let e1 = &self.e1;
        let projection = (&(e1 * e1) - e1).norm() + (&e1.adjoint() - e1).norm();
        let commutes_with_sub = self
            .inclusion
            .embedding()
            .unit_images()
            .iter()
            .map(|b| e1.commutator(&self.lambda.embed(b)).norm())
            .fold(0.0, f64::max);
        let compression = self
            .sample()
            .iter()
            .map(|x| {
                let lhs = &(e1 * &self.lambda.embed(x)) * e1;
                let rhs = &self.lambda.embed(&self.expectation.apply(x)) * e1;
                (&lhs - &rhs).norm()
            })
            .fold(0.0, f64::max);
        let frame_sum = (&self.jones_sum(&self.frame_quasi_basis()) - &self.a1().one()).norm();
        let d = self.gns_dim();
        let span_dim = if d * d * self.a1().total_dim() <= SPAN_CHECK_BUDGET {
            Some(self.span_x_e1_y(tol).dim())
        } else {
            None
        };
        BasicConstructionReport {
            projection,
            commutes_with_sub,
            compression,
            frame_sum,
            span_dim,
        }
    }

    /// `span{λ(x) e₁ λ(y)}` over matrix units `x, y` of `A`.
    pub fn span_x_e1_y(&self, tol: &Tol) -> SubalgebraBasis {
        let amb = self.inclusion.ambient();
        let lx: Vec<Element> = amb
            .matrix_units()
            .iter()
            .map(|x| self.lambda.embed(x))
            .collect();
        let mut out = Vec::with_capacity(lx.len() * lx.len());
        for x in &lx {
            let xe = x * &self.e1;
            for y in &lx {
                out.push(&xe * y);
            }
        }
        SubalgebraBasis::from_elements(self.a1(), &out, tol)
    }

    /// The dual expectation `Ẽ: A₁ → A`, `Ẽ(x e₁ y) = x Ind⁻¹ y`.
    ///
    /// Matrix units of `A₁` are `tᵢ λ(f_p) e₁ λ(f_q)*`, which fixes `Ẽ` on a
    /// basis; the extension is then checked against `x e₁ y` for sampled
    /// `x, y`.
    pub fn dual_expectation(&self, tol: &Tol) -> Result<ConditionalExpectation> {
        let amb = self.inclusion.ambient();
        let a1 = self.a1();
        let inv = self.index.inverse(amb);
        let mut m = CMat::zeros(amb.total_dim(), a1.total_dim());
        for (i, fr) in self.frames.iter().enumerate() {
            let fs: Vec<Element> = (0..fr.size).map(|p| self.frame_vector(i, p)).collect();
            let left: Vec<Element> = fs.iter().map(|f| (f * &inv).scale_re(fr.weight)).collect();
            for p in 0..fr.size {
                for q in 0..fr.size {
                    let val = &left[p] * &fs[q].adjoint();
                    m.set_column(a1.unit_index(i, p, q), &amb.coords(&val));
                }
            }
        }
        let dual = ConditionalExpectation::from_map(self.lambda.clone(), m)?;
        let xs = if amb.total_dim() <= 64 {
            amb.matrix_units()
        } else {
            random_elements(amb, 8, 0xd0a1)
        };
        let mut worst: f64 = 0.0;
        for x in &xs {
            let lxe = &self.lambda.embed(x) * &self.e1;
            let xi = x * &inv;
            for y in &xs {
                let t = &lxe * &self.lambda.embed(y);
                worst = worst.max((&dual.apply_sub(&t) - &(&xi * y)).norm());
            }
        }
        if !tol.ok(worst) {
            return Err(Error::DualInconsistent(worst));
        }
        Ok(dual)
    }
}

pub(crate) fn random_elements(a: &MultiMatrixAlgebra, count: usize, seed: u64) -> Vec<Element> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = CVec::from_fn(a.total_dim(), |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            a.element(&v)
        })
        .collect()
}

/// Verified `e_C = Σ λᵢ* e₁ λᵢ` for an intermediate algebra.
#[derive(Debug, Clone)]
pub struct IntermediateProjection {
    pub projection: Element,
    /// `‖e_C² − e_C‖ + ‖e_C* − e_C‖`.
    pub projection_residual: f64,
    /// `max ‖[e_C, λ(c)]‖` over matrix units of `C`.
    pub commutes_with_c: f64,
    /// `max ‖e_C λ(x) e_C − λ(F(x)) e_C‖`.
    pub compression: f64,
}

/// `e_C` from a left quasi-basis `{λᵢ}` of `E₀|_C`, given in `C`; then
/// `{λᵢ*}` is a right quasi-basis and `Σ λᵢ* e₁ λᵢ` is the projection.
pub fn intermediate_jones_projection(
    bc: &BasicConstructionData,
    c_in_a: &UnitalInclusion,
    f: &ConditionalExpectation,
    qb_in_c: &[Element],
    tol: &Tol,
) -> Result<IntermediateProjection> {
    let lam = bc.lambda();
    let e1 = bc.jones_projection();
    let mut ec = bc.a1().zero();
    for m in qb_in_c {
        let lm = lam.embed(&c_in_a.embed(m));
        ec = &ec + &(&(&lm.adjoint() * e1) * &lm);
    }
    let projection_residual = (&(&ec * &ec) - &ec).norm() + (&ec.adjoint() - &ec).norm();
    let commutes_with_c = c_in_a
        .embedding()
        .unit_images()
        .iter()
        .map(|c| ec.commutator(&lam.embed(c)).norm())
        .fold(0.0, f64::max);
    let compression = bc
        .sample()
        .iter()
        .map(|x| {
            let lhs = &(&ec * &lam.embed(x)) * &ec;
            let rhs = &lam.embed(&f.apply(x)) * &ec;
            (&lhs - &rhs).norm()
        })
        .fold(0.0, f64::max);
    let out = IntermediateProjection {
        projection: ec,
        projection_residual,
        commutes_with_c,
        compression,
    };
    if !(tol.ok(projection_residual) && tol.ok(commutes_with_c) && tol.ok(compression)) {
        return Err(Error::QuasiBasis(format!(
            "intermediate projection fails: projection {projection_residual:.3e}, \
             commutation {commutes_with_c:.3e}, compression {compression:.3e}"
        )));
    }
    Ok(out)
}
