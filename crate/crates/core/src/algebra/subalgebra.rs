use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::element::linear_combination;
use super::{Element, MultiMatrixAlgebra, StarHomomorphism, UnitalInclusion};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, null_space_scaled, r, CMat, CVec, OrthoSpan, C64, ONE};
use crate::tol::Tol;

/// A linear subspace of an algebra, held as a Frobenius-orthonormal basis.
#[derive(Debug, Clone)]
pub struct SubalgebraBasis {
    ambient: MultiMatrixAlgebra,
    span: OrthoSpan,
}

impl SubalgebraBasis {
    /// Span of `elements`, dropping linearly dependent ones.
    pub fn from_elements(ambient: &MultiMatrixAlgebra, elements: &[Element], tol: &Tol) -> Self {
        let mut span = OrthoSpan::new(ambient.total_dim(), tol.rank);
        let scale = elements.iter().map(Element::norm).fold(0.0, f64::max);
        for x in elements {
            span.push_scaled(&ambient.coords(x), scale);
        }
        SubalgebraBasis {
            ambient: ambient.clone(),
            span,
        }
    }

    pub fn ambient(&self) -> &MultiMatrixAlgebra {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.span.len()
    }

    pub fn elements(&self) -> Vec<Element> {
        self.span
            .basis()
            .iter()
            .map(|v| self.ambient.element(v))
            .collect()
    }

    pub fn project(&self, x: &Element) -> Element {
        let v = self.ambient.coords(x);
        let w = &v - self.span.residual(&v);
        self.ambient.element(&w)
    }

    /// Frobenius distance from `x` to the subspace.
    pub fn residual(&self, x: &Element) -> f64 {
        crate::linalg::vnorm(&self.span.residual(&self.ambient.coords(x)))
    }

    pub fn contains(&self, x: &Element, tol: &Tol) -> bool {
        tol.ok(self.residual(x))
    }

    /// Largest distance of a basis vector of either space from the other.
    pub fn span_distance(&self, other: &SubalgebraBasis) -> f64 {
        let a = self
            .elements()
            .iter()
            .map(|x| other.residual(x))
            .fold(0.0, f64::max);
        let b = other
            .elements()
            .iter()
            .map(|x| self.residual(x))
            .fold(0.0, f64::max);
        a.max(b)
    }

    fn generic(&self, rng: &mut ChaCha8Rng, hermitian: bool) -> Element {
        let elems = self.elements();
        let coeffs: Vec<C64> = (0..elems.len())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        let x = linear_combination(
            &self.ambient.zero(),
            coeffs.iter().copied().zip(elems.iter()),
        );
        if hermitian {
            (&x + &x.adjoint()).scale_re(0.5)
        } else {
            x
        }
    }
}

/// Linear map `X ↦ gX − Xg` on row-major `vec(X)` for an `n x n` block.
fn commutator_operator(g: &CMat) -> CMat {
    let n = g.nrows();
    let mut m = CMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            let row = a * n + b;
            for c in 0..n {
                m[(row, c * n + b)] += g[(a, c)];
                m[(row, a * n + c)] -= g[(c, b)];
            }
        }
    }
    m
}

/// Commutant of `gens` inside `ambient`, computed block by block as the
/// kernel of the stacked commutator maps.
pub fn commutant_by_kernel(
    ambient: &MultiMatrixAlgebra,
    gens: &[Element],
    tol: &Tol,
) -> SubalgebraBasis {
    let mut found = Vec::new();
    let gscale = gens.iter().map(Element::op_norm).fold(0.0, f64::max);
    for (j, &n) in ambient.dims().iter().enumerate() {
        let rows = gens.len().max(1) * n * n;
        let mut stacked = CMat::zeros(rows, n * n);
        for (k, g) in gens.iter().enumerate() {
            stacked
                .view_mut((k * n * n, 0), (n * n, n * n))
                .copy_from(&commutator_operator(&g.blocks()[j]));
        }
        let ker = null_space_scaled(&stacked, tol.rank, 2.0 * gscale);
        for col in ker.column_iter() {
            let m = CMat::from_fn(n, n, |a, b| col[a * n + b]);
            found.push(ambient.from_block(j, m).expect("block shape"));
        }
    }
    SubalgebraBasis::from_elements(ambient, &found, tol)
}

/// Relative commutant `B' ∩ A` as an abstract algebra with its embedding.
///
/// For every ambient block `J` and sub-block `i` with `Λᵢⱼ > 0`, the range of
/// the image of `e⁽ⁱ⁾₁₁` in block `J` has an orthonormal basis `v_a`; the
/// elements `Σ_κ ι(e_{κ1}) v_a v_b* ι(e_{1κ})` are matrix units of a copy of
/// `M_{Λᵢⱼ}`. The abstract algebra lists these summands ordered by `(J, i)`.
pub fn relative_commutant_decomposed(
    inc: &UnitalInclusion,
) -> Result<(MultiMatrixAlgebra, StarHomomorphism)> {
    let sub = inc.sub();
    let amb = inc.ambient();
    let lambda = inc.inclusion_matrix();
    let mut dims = Vec::new();
    let mut images = Vec::new();
    for (jb, &nj) in amb.dims().iter().enumerate() {
        for (i, &ni) in sub.dims().iter().enumerate() {
            let m = lambda[i][jb];
            if m == 0 {
                continue;
            }
            let emb = inc.embedding();
            let p = &emb.unit_image(i, 0, 0).blocks()[jb];
            let (vals, vecs) = hermitian_eigen(p);
            let range: Vec<usize> = (0..nj).filter(|&k| vals[k] > 0.5).collect();
            if range.len() != m {
                return Err(Error::InvalidHomomorphism(format!(
                    "projection rank {} differs from multiplicity {m}",
                    range.len()
                )));
            }
            let down: Vec<&CMat> = (0..ni)
                .map(|k| &emb.unit_image(i, k, 0).blocks()[jb])
                .collect();
            let up: Vec<&CMat> = (0..ni)
                .map(|k| &emb.unit_image(i, 0, k).blocks()[jb])
                .collect();
            dims.push(m);
            for a in 0..m {
                for b in 0..m {
                    let va = vecs.column(range[a]);
                    let vb = vecs.column(range[b]);
                    let rank_one: CMat = va * vb.adjoint();
                    let mut blk = CMat::zeros(nj, nj);
                    for k in 0..ni {
                        blk += down[k] * &rank_one * up[k];
                    }
                    images.push(amb.from_block(jb, blk)?);
                }
            }
        }
    }
    let alg = MultiMatrixAlgebra::new(dims)?;
    let hom = StarHomomorphism::new(alg.clone(), amb.clone(), images)?;
    Ok((alg, hom))
}

/// Relative commutant `B' ∩ A` as an orthonormal basis in `A`.
pub fn relative_commutant(inc: &UnitalInclusion, tol: &Tol) -> Result<SubalgebraBasis> {
    let (_, hom) = relative_commutant_decomposed(inc)?;
    Ok(SubalgebraBasis::from_elements(
        inc.ambient(),
        hom.unit_images(),
        tol,
    ))
}

/// Unital *-subalgebra generated by `gens`, grown from `1` by repeated
/// left multiplication with `gens ∪ gens*` until the span is stable.
pub fn generated_subalgebra(
    ambient: &MultiMatrixAlgebra,
    gens: &[Element],
    tol: &Tol,
) -> Result<SubalgebraBasis> {
    for g in gens {
        ambient.check(g)?;
    }
    let mut letters: Vec<Element> = Vec::with_capacity(2 * gens.len());
    for g in gens {
        letters.push(g.clone());
        letters.push(g.adjoint());
    }
    let mut span = OrthoSpan::new(ambient.total_dim(), tol.rank);
    let mut queue = vec![ambient.one()];
    span.push(&ambient.coords(&queue[0]));
    let scale = letters.iter().map(Element::op_norm).fold(1.0, f64::max);
    let mut head = 0;
    while head < queue.len() {
        let w = queue[head].clone();
        head += 1;
        for g in &letters {
            let next = g * &w;
            if span.push_scaled(&ambient.coords(&next), scale * w.norm()) {
                let q = span.basis().last().expect("just pushed");
                queue.push(ambient.element(q));
            }
        }
    }
    Ok(SubalgebraBasis {
        ambient: ambient.clone(),
        span,
    })
}

const DECOMPOSE_ATTEMPTS: u64 = 8;

/// Abstract form `⊕ M_{n_m}` of a unital *-subalgebra and an isomorphism
/// onto it, obtained from a generic element of the center and generic
/// elements of each central summand.
pub fn decompose_subalgebra(
    s: &SubalgebraBasis,
    tol: &Tol,
) -> Result<(MultiMatrixAlgebra, StarHomomorphism)> {
    let amb = s.ambient();
    if s.dim() == 0 {
        return Err(Error::NotSubalgebra("empty subspace".into()));
    }
    if !s.contains(&amb.one(), &Tol::with_eq(tol.rank.sqrt())) {
        return Err(Error::NotSubalgebra("does not contain the unit".into()));
    }
    let mut last = Error::NotSubalgebra("decomposition did not converge".into());
    for attempt in 0..DECOMPOSE_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dec_0de5 + attempt);
        match decompose_once(s, tol, &mut rng) {
            Ok(out) => return Ok(out),
            Err(e @ Error::NotSubalgebra(_)) if attempt == 0 && is_closure_failure(&e) => {
                return Err(e)
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn is_closure_failure(e: &Error) -> bool {
    matches!(e, Error::NotSubalgebra(msg) if msg.starts_with("not closed"))
}

fn decompose_once(
    s: &SubalgebraBasis,
    tol: &Tol,
    rng: &mut ChaCha8Rng,
) -> Result<(MultiMatrixAlgebra, StarHomomorphism)> {
    let amb = s.ambient();
    let a = s.generic(rng, false);
    let b = s.generic(rng, false);
    let scale = a.norm() * b.norm();
    let prod_res = s.residual(&(&a * &b));
    let star_res = s.residual(&a.adjoint());
    if prod_res > tol.rank * scale.max(1.0) || star_res > tol.rank * a.norm().max(1.0) {
        return Err(Error::NotSubalgebra(format!(
            "not closed: product residual {prod_res:.3e}, adjoint residual {star_res:.3e}"
        )));
    }

    // center: elements of S commuting with a generic generating set
    let elems = s.elements();
    let witnesses = [a.clone(), a.adjoint(), b.clone(), b.adjoint()];
    let d = amb.total_dim();
    let mut stacked = CMat::zeros(witnesses.len() * d, elems.len());
    for (k, x) in elems.iter().enumerate() {
        for (w, g) in witnesses.iter().enumerate() {
            let cv = amb.coords(&x.commutator(g));
            stacked.view_mut((w * d, k), (d, 1)).copy_from(&cv);
        }
    }
    let wscale = witnesses.iter().map(Element::op_norm).fold(0.0, f64::max);
    let ker = null_space_scaled(&stacked, tol.rank, 2.0 * wscale);
    let center: Vec<Element> = ker
        .column_iter()
        .map(|col| linear_combination(&amb.zero(), col.iter().copied().zip(elems.iter())))
        .collect();
    for z in &center {
        for x in &elems {
            if z.commutator(x).norm() > tol.rank.sqrt() * z.norm() {
                return Err(Error::NotSubalgebra("center witness not generic".into()));
            }
        }
    }

    // minimal central projections from a generic central self-adjoint element
    let zspan = SubalgebraBasis::from_elements(amb, &center, tol);
    let h = zspan.generic(rng, true);
    let clusters = spectral_clusters(&h, None)?;
    if clusters.len() != zspan.dim() {
        return Err(Error::NotSubalgebra(format!(
            "center of dimension {} split into {} spectral clusters",
            zspan.dim(),
            clusters.len()
        )));
    }

    struct Summand {
        n: usize,
        signature: Vec<usize>,
        order: usize,
        units: Vec<Element>,
    }
    let mut summands = Vec::new();
    for (order, p) in clusters.into_iter().enumerate() {
        let cut: Vec<Element> = elems.iter().map(|x| &p * x).collect();
        let ps = SubalgebraBasis::from_elements(amb, &cut, tol);
        let n = (ps.dim() as f64).sqrt().round() as usize;
        if n * n != ps.dim() {
            return Err(Error::NotSubalgebra(format!(
                "central summand of dimension {} is not a full matrix algebra",
                ps.dim()
            )));
        }
        let k = ps.generic(rng, true);
        let minimal = spectral_clusters(&k, Some(&p))?;
        if minimal.len() != n {
            return Err(Error::NotSubalgebra(
                "minimal projections not separated".into(),
            ));
        }
        let g = ps.generic(rng, false);
        let q0 = &minimal[0];
        let q0_tr = q0.raw_trace().re;
        let mut col = Vec::with_capacity(n);
        for qa in &minimal {
            let y = &(qa * &g) * q0;
            let cnorm = y.frob_inner(&y).re / q0_tr;
            if cnorm < tol.rank {
                return Err(Error::NotSubalgebra("degenerate off-diagonal unit".into()));
            }
            col.push(y.scale_re(1.0 / cnorm.sqrt()));
        }
        let mut units = Vec::with_capacity(n * n);
        for ea in &col {
            for eb in &col {
                units.push(ea * &eb.adjoint());
            }
        }
        let signature = p
            .blocks()
            .iter()
            .map(|m| m.trace().re.round() as usize)
            .collect();
        summands.push(Summand {
            n,
            signature,
            order,
            units,
        });
    }
    summands.sort_by(|x, y| (x.n, &x.signature, x.order).cmp(&(y.n, &y.signature, y.order)));
    let dims: Vec<usize> = summands.iter().map(|m| m.n).collect();
    if dims.iter().map(|n| n * n).sum::<usize>() != s.dim() {
        return Err(Error::NotSubalgebra(
            "summand dimensions do not add up".into(),
        ));
    }
    let alg = MultiMatrixAlgebra::new(dims)?;
    let images = summands.into_iter().flat_map(|m| m.units).collect();
    let hom = StarHomomorphism::new(alg.clone(), amb.clone(), images)?;
    let report = hom.verify();
    let loose = Tol::with_eq(tol.eq.max(1e-7));
    if !report.passes(&loose) {
        return Err(Error::NotSubalgebra(format!(
            "reconstructed matrix units fail relations: {report:?}"
        )));
    }
    Ok((alg, hom))
}

/// Spectral projections of a self-adjoint element, one per cluster of
/// eigenvalues. With `support = Some(p)` only the part under `p` is used.
fn spectral_clusters(h: &Element, support: Option<&Element>) -> Result<Vec<Element>> {
    let shift = 2.0 * (h.op_norm() + 1.0);
    let mut entries: Vec<(f64, usize, CVec)> = Vec::new();
    for (j, blk) in h.blocks().iter().enumerate() {
        let n = blk.nrows();
        let work = match support {
            Some(p) => blk + (CMat::identity(n, n) - &p.blocks()[j]) * r(shift),
            None => blk.clone(),
        };
        let (vals, vecs) = hermitian_eigen(&work);
        for (k, v) in vals.into_iter().enumerate() {
            if support.is_some() && v > shift / 2.0 {
                continue;
            }
            entries.push((v, j, vecs.column(k).into_owned()));
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    let spread = entries
        .last()
        .zip(entries.first())
        .map(|(hi, lo)| hi.0 - lo.0)
        .unwrap_or(0.0);
    let gap = 1e-6 * spread.max(1.0);
    let mut out: Vec<Element> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let zero = Element::from_blocks(
        h.blocks()
            .iter()
            .map(|b| CMat::zeros(b.nrows(), b.ncols()))
            .collect(),
    );
    for (v, j, vec) in entries {
        if v - prev > gap {
            out.push(zero.clone());
        }
        prev = v;
        let last = out.last_mut().expect("cluster opened");
        last.blocks_mut()[j] += &vec * vec.adjoint() * ONE;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, null_space};

    fn m2_tensor_one(m: usize) -> UnitalInclusion {
        let b = MultiMatrixAlgebra::full(2);
        let a = MultiMatrixAlgebra::full(2 * m);
        let id = CMat::identity(m, m);
        let imgs = b
            .matrix_units()
            .iter()
            .map(|e| Element::from_blocks(vec![kron(&e.blocks()[0], &id)]))
            .collect();
        UnitalInclusion::from_images(b, a, imgs, &Tol::default()).unwrap()
    }

    /// Brute-force commutant: kernel over all of `A` against every image of a
    /// matrix unit of `B`, via a single dense stacked system.
    fn dense_commutant_dim(inc: &UnitalInclusion) -> usize {
        let amb = inc.ambient();
        let d = amb.total_dim();
        let gens = inc.embedding().unit_images();
        let mut stacked = CMat::zeros(gens.len() * d, d);
        for (k, g) in gens.iter().enumerate() {
            for col in 0..d {
                let (bj, a, b) = amb.unit_label(col);
                let x = amb.unit(bj, a, b);
                let cv = amb.coords(&x.commutator(g));
                stacked.view_mut((k * d, col), (d, 1)).copy_from(&cv);
            }
        }
        null_space(&stacked, 1e-8).ncols()
    }

    #[test]
    fn commutant_of_m2_tensor_one() {
        let tol = Tol::default();
        let inc = m2_tensor_one(2);
        let rc = relative_commutant(&inc, &tol).unwrap();
        assert_eq!(rc.dim(), 4);
        assert_eq!(dense_commutant_dim(&inc), 4);
        let kern = commutant_by_kernel(inc.ambient(), inc.embedding().unit_images(), &tol);
        assert!(rc.span_distance(&kern) < 1e-9);
        for x in rc.elements() {
            for g in inc.embedding().unit_images() {
                assert!(x.commutator(g).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn commutant_of_diagonal_in_m2() {
        let a = MultiMatrixAlgebra::full(2);
        let inc = UnitalInclusion::from_images(
            MultiMatrixAlgebra::diagonal(2),
            a.clone(),
            vec![a.unit(0, 0, 0), a.unit(0, 1, 1)],
            &Tol::default(),
        )
        .unwrap();
        let (alg, hom) = relative_commutant_decomposed(&inc).unwrap();
        assert_eq!(alg.dims(), &[1, 1]);
        assert!(hom.verify().passes(&Tol::default()));
    }

    #[test]
    fn commutant_dimension_is_sum_of_squares() {
        // C+M2 -> M4 via a ⊕ a ⊕ X ... : diag(a, a, X) gives Λ = [[2],[1]]
        let b = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        let a = MultiMatrixAlgebra::full(4);
        let tol = Tol::default();
        let imgs = b
            .matrix_units()
            .iter()
            .map(|e| {
                let mut m = CMat::zeros(4, 4);
                m[(0, 0)] = e.blocks()[0][(0, 0)];
                m[(1, 1)] = e.blocks()[0][(0, 0)];
                m.view_mut((2, 2), (2, 2)).copy_from(&e.blocks()[1]);
                Element::from_blocks(vec![m])
            })
            .collect();
        let inc = UnitalInclusion::from_images(b, a, imgs, &tol).unwrap();
        assert_eq!(inc.inclusion_matrix(), &[vec![2], vec![1]]);
        let rc = relative_commutant(&inc, &tol).unwrap();
        assert_eq!(rc.dim(), 5);
        assert_eq!(dense_commutant_dim(&inc), 5);
    }

    #[test]
    fn generated_by_pauli_x_is_two_dimensional() {
        let a = MultiMatrixAlgebra::full(2);
        let x = Element::from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[r(0.), r(1.), r(1.), r(0.)],
        )]);
        let s = generated_subalgebra(&a, &[x], &Tol::default()).unwrap();
        assert_eq!(s.dim(), 2);
        let (alg, _) = decompose_subalgebra(&s, &Tol::default()).unwrap();
        assert_eq!(alg.dims(), &[1, 1]);
    }

    #[test]
    fn generated_by_x_and_z_is_everything() {
        let a = MultiMatrixAlgebra::full(2);
        let x = Element::from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[r(0.), r(1.), r(1.), r(0.)],
        )]);
        let z = Element::from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[r(1.), r(0.), r(0.), r(-1.)],
        )]);
        let s = generated_subalgebra(&a, &[x, z], &Tol::default()).unwrap();
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn decompose_recovers_block_structure() {
        // M2 ⊗ 1_2 ⊕ diag inside M4 ⊕ M2: abstract form C + C + M2
        let amb = MultiMatrixAlgebra::new(vec![4, 2]).unwrap();
        let tol = Tol::default();
        let id2 = CMat::identity(2, 2);
        let mut gens = Vec::new();
        let pauli_x = CMat::from_row_slice(2, 2, &[r(0.), r(1.), r(1.), r(0.)]);
        let pauli_y = CMat::from_row_slice(2, 2, &[r(0.), c(0., -1.), c(0., 1.), r(0.)]);
        gens.push(Element::from_blocks(vec![
            kron(&pauli_x, &id2),
            CMat::zeros(2, 2),
        ]));
        gens.push(Element::from_blocks(vec![
            kron(&pauli_y, &id2),
            CMat::zeros(2, 2),
        ]));
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = ONE;
        gens.push(Element::from_blocks(vec![CMat::zeros(4, 4), d]));
        let s = generated_subalgebra(&amb, &gens, &tol).unwrap();
        assert_eq!(s.dim(), 6);
        let (alg, hom) = decompose_subalgebra(&s, &tol).unwrap();
        assert_eq!(alg.dims(), &[1, 1, 2]);
        let back = SubalgebraBasis::from_elements(&amb, hom.unit_images(), &tol);
        assert!(back.span_distance(&s) < 1e-8);
    }

    #[test]
    fn decompose_rejects_non_algebra() {
        let a = MultiMatrixAlgebra::full(2);
        let x = Element::from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[r(0.), r(1.), r(0.), r(0.)],
        )]);
        let s = SubalgebraBasis::from_elements(&a, &[a.one(), x], &Tol::default());
        assert!(matches!(
            decompose_subalgebra(&s, &Tol::default()),
            Err(Error::NotSubalgebra(_))
        ));
    }
}
