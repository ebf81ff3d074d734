//! Dense brute-force recomputations used as oracles.
//!
//! Everything here works on the block-diagonal matrix of an element inside
//! `M_D`, `D = Σ nᵢ`, with plain SVDs and Hermitian eigensolvers. None of the
//! block bookkeeping of the library is reused beyond reading the blocks out.

#![allow(dead_code)]

use fdcstar::algebra::Element;
use fdcstar::linalg::{CMat, C64};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative singular-value cutoff for every rank decision below.
pub const RANK_TOL: f64 = 1e-8;

pub fn dense(x: &Element) -> CMat {
    let d: usize = x.blocks().iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(d, d);
    let mut off = 0;
    for b in x.blocks() {
        let n = b.nrows();
        out.view_mut((off, off), (n, n)).copy_from(b);
        off += n;
    }
    out
}

pub fn central_projections(dims: &[usize]) -> Vec<CMat> {
    let d: usize = dims.iter().sum();
    let mut off = 0;
    dims.iter()
        .map(|&n| {
            let mut p = CMat::zeros(d, d);
            for k in off..off + n {
                p[(k, k)] = C64::new(1.0, 0.0);
            }
            off += n;
            p
        })
        .collect()
}

fn vec_of(m: &CMat) -> DVector<C64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

fn mat_of(v: &DVector<C64>, d: usize) -> CMat {
    CMat::from_iterator(d, d, v.iter().copied())
}

/// Orthonormal basis (as vectors) of the span of `ms`.
pub fn span(ms: &[CMat]) -> Vec<DVector<C64>> {
    if ms.is_empty() {
        return Vec::new();
    }
    let cols: Vec<DVector<C64>> = ms.iter().map(vec_of).collect();
    let m = DMatrix::from_columns(&cols);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_TOL * top.max(1.0))
        .map(|(k, _)| u.column(k).into_owned())
        .collect()
}

/// Relative distance of `x` from the span of an orthonormal family.
pub fn distance(basis: &[DVector<C64>], x: &CMat) -> f64 {
    let v = vec_of(x);
    let mut r = v.clone();
    for b in basis {
        let c = b.dotc(&v);
        r -= b * c;
    }
    r.norm() / v.norm().max(1e-300)
}

/// `{X ∈ M_D : [X, g] = 0}` for every `g` in `gens`, by the kernel of the
/// stacked commutator map.
pub fn commutant(gens: &[CMat], d: usize) -> Vec<CMat> {
    let n = d * d;
    let mut gram = DMatrix::<C64>::zeros(n, n);
    for g in gens {
        let mut op = DMatrix::<C64>::zeros(n, n);
        for p in 0..n {
            let mut e = CMat::zeros(d, d);
            e[p] = C64::new(1.0, 0.0);
            let c = g * &e - &e * g;
            op.set_column(p, &vec_of(&c));
        }
        gram += op.adjoint() * &op;
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1.0);
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= RANK_TOL * RANK_TOL * top * 1e4)
        .map(|(k, _)| mat_of(&eig.eigenvectors.column(k).into_owned(), d))
        .collect()
}

/// `B' ∩ A` for `B` spanned by `sub_images` inside `A = ⊕ M_{nᵢ}`.
pub fn relative_commutant(sub_images: &[CMat], dims: &[usize]) -> Vec<CMat> {
    let mut gens = sub_images.to_vec();
    gens.extend(central_projections(dims));
    commutant(&gens, dims.iter().sum())
}

/// The unital *-algebra generated by `gens`, by closing the span of
/// `gens ∪ gens*` under products.
pub fn generated(gens: &[CMat], d: usize) -> Vec<CMat> {
    let mut elems: Vec<CMat> = vec![CMat::identity(d, d)];
    elems.extend(gens.iter().cloned());
    elems.extend(gens.iter().map(|g| g.adjoint()));
    let mut basis = span(&elems);
    loop {
        let current: Vec<CMat> = basis.iter().map(|v| mat_of(v, d)).collect();
        let mut all = current.clone();
        for a in &current {
            for b in &current {
                all.push(a * b);
            }
        }
        let next = span(&all);
        if next.len() == basis.len() {
            return current;
        }
        basis = next;
    }
}

/// Groups `witnesses` by `v*u ∈ C`, with `C` spanned by `c_images`.
pub fn coset_classes(c_images: &[CMat], witnesses: &[CMat]) -> Vec<Vec<usize>> {
    let c = span(c_images);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, u) in witnesses.iter().enumerate() {
        let home = classes.iter_mut().find(|cls| {
            let v = &witnesses[cls[0]];
            distance(&c, &(v.adjoint() * u)) < 1e-8
        });
        match home {
            Some(cls) => cls.push(k),
            None => classes.push(vec![k]),
        }
    }
    classes
}

/// Same partition up to the order of classes.
pub fn same_partition(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    let norm = |p: &[Vec<usize>]| {
        let mut v: Vec<Vec<usize>> = p
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        v.sort();
        v
    };
    norm(a) == norm(b)
}

/// Dimension agreement and mutual containment of two spans.
pub fn same_span(lib: &[CMat], oracle: &[CMat]) -> (bool, f64) {
    let ls = span(lib);
    let os = span(oracle);
    let there = lib.iter().map(|x| distance(&os, x)).fold(0.0, f64::max);
    let back = oracle.iter().map(|x| distance(&ls, x)).fold(0.0, f64::max);
    let res = there.max(back);
    (ls.len() == os.len() && res < 1e-8, res)
}
