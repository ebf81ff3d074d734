use super::element::linear_combination;
use super::{Element, MultiMatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::tol::Tol;

/// A linear map between multi-matrix algebras given by the images of the
/// source matrix units.
#[derive(Debug, Clone)]
pub struct StarHomomorphism {
    source: MultiMatrixAlgebra,
    target: MultiMatrixAlgebra,
    images: Vec<Element>,
}

/// Residuals of the *-homomorphism identities, measured on matrix units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomReport {
    pub multiplicative: f64,
    pub star: f64,
    pub unital: f64,
    pub injective: bool,
}

impl HomReport {
    pub fn passes(&self, tol: &Tol) -> bool {
        tol.ok(self.multiplicative) && tol.ok(self.star) && tol.ok(self.unital) && self.injective
    }
}

impl StarHomomorphism {
    pub fn new(
        source: MultiMatrixAlgebra,
        target: MultiMatrixAlgebra,
        images: Vec<Element>,
    ) -> Result<Self> {
        if images.len() != source.total_dim() {
            return Err(Error::Shape(format!(
                "expected {} unit images, got {}",
                source.total_dim(),
                images.len()
            )));
        }
        for x in &images {
            target.check(x)?;
        }
        Ok(StarHomomorphism {
            source,
            target,
            images,
        })
    }

    pub fn identity(a: &MultiMatrixAlgebra) -> Self {
        StarHomomorphism {
            source: a.clone(),
            target: a.clone(),
            images: a.matrix_units(),
        }
    }

    pub fn source(&self) -> &MultiMatrixAlgebra {
        &self.source
    }

    pub fn target(&self) -> &MultiMatrixAlgebra {
        &self.target
    }

    /// Images of the source matrix units in lexicographic order.
    pub fn unit_images(&self) -> &[Element] {
        &self.images
    }

    pub fn unit_image(&self, block: usize, row: usize, col: usize) -> &Element {
        &self.images[self.source.unit_index(block, row, col)]
    }

    pub fn apply(&self, x: &Element) -> Element {
        let coords = self.source.coords(x);
        linear_combination(
            &self.target.zero(),
            coords
                .iter()
                .zip(&self.images)
                .filter(|(c, _)| **c != ZERO)
                .map(|(c, y)| (*c, y)),
        )
    }

    /// Dense `target_dim x source_dim` matrix in matrix-unit coordinates.
    pub fn matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.target.total_dim(), self.source.total_dim());
        for (k, y) in self.images.iter().enumerate() {
            m.set_column(k, &self.target.coords(y));
        }
        m
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &StarHomomorphism) -> Result<StarHomomorphism> {
        if self.target != outer.source {
            return Err(Error::Shape("composition of mismatched maps".into()));
        }
        Ok(StarHomomorphism {
            source: self.source.clone(),
            target: outer.target.clone(),
            images: self.images.iter().map(|y| outer.apply(y)).collect(),
        })
    }

    pub fn verify(&self) -> HomReport {
        let src = &self.source;
        let mut mult: f64 = 0.0;
        let mut star: f64 = 0.0;
        for p in 0..src.total_dim() {
            let (i, k, b) = src.unit_label(p);
            let ip = &self.images[p];
            for q in 0..src.total_dim() {
                let (j, g, d) = src.unit_label(q);
                let prod = ip * &self.images[q];
                let res = if i == j && b == g {
                    (&prod - &self.images[src.unit_index(i, k, d)]).norm()
                } else {
                    prod.norm()
                };
                mult = mult.max(res);
            }
            star = star.max((&ip.adjoint() - &self.images[src.unit_index(i, b, k)]).norm());
        }
        let unital = (&self.apply(&src.one()) - &self.target.one()).norm();
        let injective = (0..src.num_blocks()).all(|i| self.unit_image(i, 0, 0).norm() > 0.5);
        HomReport {
            multiplicative: mult,
            star,
            unital,
            injective,
        }
    }

    /// Least-squares preimage of `y` and the residual `‖φ(x) − y‖`.
    ///
    /// Images of distinct matrix units are Frobenius-orthogonal for a
    /// *-homomorphism, so each coordinate is a single projection.
    pub fn preimage(&self, y: &Element) -> (Element, f64) {
        let mut coords = crate::linalg::CVec::zeros(self.source.total_dim());
        for (k, img) in self.images.iter().enumerate() {
            let nn = img.frob_inner(img).re;
            if nn > 0.0 {
                coords[k] = img.frob_inner(y) / C64::new(nn, 0.0);
            }
        }
        let x = self.source.element(&coords);
        let res = (&self.apply(&x) - y).norm();
        (x, res)
    }
}

/// A verified unital inclusion `B ⊂ A` with its inclusion matrix.
///
/// `inclusion_matrix()[i][j]` is the multiplicity of block `i` of `B` in
/// block `j` of `A`, so `Σᵢ Λᵢⱼ nᵢ(B) = nⱼ(A)`.
#[derive(Debug, Clone)]
pub struct UnitalInclusion {
    embedding: StarHomomorphism,
    lambda: Vec<Vec<usize>>,
}

impl UnitalInclusion {
    pub fn new(embedding: StarHomomorphism, tol: &Tol) -> Result<Self> {
        let report = embedding.verify();
        if !report.passes(tol) {
            return Err(Error::InvalidHomomorphism(format!(
                "multiplicative {:.3e}, star {:.3e}, unital {:.3e}, injective {}",
                report.multiplicative, report.star, report.unital, report.injective
            )));
        }
        let lambda = multiplicities(&embedding)?;
        Ok(UnitalInclusion { embedding, lambda })
    }

    /// Builds an inclusion from unit images without re-deriving anything else.
    pub fn from_images(
        sub: MultiMatrixAlgebra,
        ambient: MultiMatrixAlgebra,
        images: Vec<Element>,
        tol: &Tol,
    ) -> Result<Self> {
        Self::new(StarHomomorphism::new(sub, ambient, images)?, tol)
    }

    /// Skips the *-homomorphism identities; for embeddings that hold by
    /// construction. Multiplicities are still derived and checked.
    pub(crate) fn trusted(embedding: StarHomomorphism) -> Result<Self> {
        let lambda = multiplicities(&embedding)?;
        Ok(UnitalInclusion { embedding, lambda })
    }

    pub fn identity(a: &MultiMatrixAlgebra) -> Self {
        let k = a.num_blocks();
        let lambda = (0..k)
            .map(|i| (0..k).map(|j| usize::from(i == j)).collect())
            .collect();
        UnitalInclusion {
            embedding: StarHomomorphism::identity(a),
            lambda,
        }
    }

    pub fn sub(&self) -> &MultiMatrixAlgebra {
        self.embedding.source()
    }

    pub fn ambient(&self) -> &MultiMatrixAlgebra {
        self.embedding.target()
    }

    pub fn embedding(&self) -> &StarHomomorphism {
        &self.embedding
    }

    pub fn embed(&self, b: &Element) -> Element {
        self.embedding.apply(b)
    }

    pub fn inclusion_matrix(&self) -> &[Vec<usize>] {
        &self.lambda
    }

    /// `Λ` as a real `k_B x k_A` matrix.
    pub fn lambda_f64(&self) -> nalgebra::DMatrix<f64> {
        let kb = self.lambda.len();
        let ka = self.ambient().num_blocks();
        nalgebra::DMatrix::from_fn(kb, ka, |i, j| self.lambda[i][j] as f64)
    }

    /// Composite `B ⊂ C ⊂ A` from `self = B ⊂ C` and `outer = C ⊂ A`.
    pub fn then(&self, outer: &UnitalInclusion) -> Result<UnitalInclusion> {
        let embedding = self.embedding.then(&outer.embedding)?;
        let lambda = multiplicities(&embedding)?;
        Ok(UnitalInclusion { embedding, lambda })
    }

    /// Connected components of the bipartite Bratteli diagram, labelled
    /// `B<i>` for sub-blocks and `A<j>` for ambient blocks.
    pub fn bratteli_components(&self) -> Vec<Vec<String>> {
        let kb = self.lambda.len();
        let ka = self.ambient().num_blocks();
        let mut parent: Vec<usize> = (0..kb + ka).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for i in 0..kb {
            for j in 0..ka {
                if self.lambda[i][j] > 0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, kb + j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
        for node in 0..kb + ka {
            let root = find(&mut parent, node);
            let label = if node < kb {
                format!("B{node}")
            } else {
                format!("A{}", node - kb)
            };
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(label),
                None => groups.push((root, vec![label])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.bratteli_components().len() == 1
    }
}

fn multiplicities(emb: &StarHomomorphism) -> Result<Vec<Vec<usize>>> {
    let sub = emb.source();
    let amb = emb.target();
    let mut lambda = vec![vec![0usize; amb.num_blocks()]; sub.num_blocks()];
    for (i, row) in lambda.iter_mut().enumerate() {
        let p = emb.unit_image(i, 0, 0);
        for (j, slot) in row.iter_mut().enumerate() {
            let value = p.blocks()[j].trace().re;
            let rounded = value.round();
            if (value - rounded).abs() > 1e-6 || rounded < 0.0 {
                return Err(Error::NonIntegerMultiplicity {
                    sub_block: i,
                    block: j,
                    value,
                });
            }
            *slot = rounded as usize;
        }
    }
    for (j, &nj) in amb.dims().iter().enumerate() {
        let s: usize = (0..sub.num_blocks())
            .map(|i| lambda[i][j] * sub.dims()[i])
            .sum();
        if s != nj {
            return Err(Error::InvalidHomomorphism(format!(
                "block {j} of the ambient algebra has size {nj} but receives {s}"
            )));
        }
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r, CMat};

    fn c_in_c_plus_m2() -> UnitalInclusion {
        let b = MultiMatrixAlgebra::full(1);
        let a = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        UnitalInclusion::from_images(b, a.clone(), vec![a.one()], &Tol::default()).unwrap()
    }

    #[test]
    fn scalar_inclusion_matrix() {
        let inc = c_in_c_plus_m2();
        assert_eq!(inc.inclusion_matrix(), &[vec![1, 2]]);
    }

    #[test]
    fn diagonal_in_m2() {
        let b = MultiMatrixAlgebra::diagonal(2);
        let a = MultiMatrixAlgebra::full(2);
        let imgs = vec![a.unit(0, 0, 0), a.unit(0, 1, 1)];
        let inc = UnitalInclusion::from_images(b, a, imgs, &Tol::default()).unwrap();
        assert_eq!(inc.inclusion_matrix(), &[vec![1], vec![1]]);
        assert!(inc.is_connected());
    }

    #[test]
    fn non_multiplicative_map_rejected() {
        let b = MultiMatrixAlgebra::diagonal(2);
        let a = MultiMatrixAlgebra::full(2);
        let half = a.one().scale_re(0.5);
        let err = UnitalInclusion::from_images(b, a, vec![half.clone(), half], &Tol::default());
        assert!(matches!(err, Err(Error::InvalidHomomorphism(_))));
    }

    #[test]
    fn twisted_unit_images_preimage() {
        // M2 inside M2 by a rotation: preimage inverts the conjugation
        let a = MultiMatrixAlgebra::full(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMat::from_row_slice(2, 2, &[r(s), c(0.0, s), c(0.0, s), r(s)]);
        let imgs = a
            .matrix_units()
            .iter()
            .map(|e| Element::from_blocks(vec![&u * &e.blocks()[0] * u.adjoint()]))
            .collect();
        let hom = StarHomomorphism::new(a.clone(), a.clone(), imgs).unwrap();
        assert!(hom.verify().passes(&Tol::default()));
        let x = Element::from_blocks(vec![CMat::from_row_slice(
            2,
            2,
            &[r(1.0), c(2.0, -1.0), r(0.5), c(0.0, 3.0)],
        )]);
        let (pre, res) = hom.preimage(&hom.apply(&x));
        assert!(res < 1e-12);
        assert!((&pre - &x).norm() < 1e-12);
    }

    #[test]
    fn disconnected_components_are_named() {
        let b = MultiMatrixAlgebra::diagonal(2);
        let a = MultiMatrixAlgebra::diagonal(2);
        let inc = UnitalInclusion::identity(&b);
        assert_eq!(inc.ambient(), &a);
        let comps = inc.bratteli_components();
        assert_eq!(comps, vec![vec!["B0", "A0"], vec!["B1", "A1"]]);
    }

    #[test]
    fn composite_matrix_is_product() {
        // C ⊂ C+C ⊂ M3 with C+C -> diag(a, b, b)
        let c1 = MultiMatrixAlgebra::full(1);
        let d = MultiMatrixAlgebra::diagonal(2);
        let m3 = MultiMatrixAlgebra::full(3);
        let tol = Tol::default();
        let inner = UnitalInclusion::from_images(c1, d.clone(), vec![d.one()], &tol).unwrap();
        let p = m3.unit(0, 0, 0);
        let q = &m3.one() - &p;
        let outer = UnitalInclusion::from_images(d, m3, vec![p, q], &tol).unwrap();
        let comp = inner.then(&outer).unwrap();
        assert_eq!(outer.inclusion_matrix(), &[vec![1], vec![2]]);
        assert_eq!(comp.inclusion_matrix(), &[vec![3]]);
    }
}
