use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{trace_expectation, verify_quasi_basis, weyl_clock_shift_basis, QuasiBasis};
use crate::algebra::{Element, MultiMatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{polar_unitary, r, CMat, C64};
use crate::tol::Tol;
use crate::traces::TraceState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarySearchConfig {
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub target_residual: f64,
}

impl Default for UnitarySearchConfig {
    fn default() -> Self {
        UnitarySearchConfig {
            max_iterations: 5000,
            restarts: 64,
            seed: 0,
            target_residual: 1e-6,
        }
    }
}

/// Restarts are launched in batches of this size; the first batch holding a
/// success ends the search, so the result does not depend on thread timing.
const BATCH: usize = 8;

/// Searches for `dim P` unitaries, orthonormal for the trace `tr`.
pub fn unitary_basis_search(
    tr: &TraceState,
    cfg: &UnitarySearchConfig,
    tol: &Tol,
) -> Result<QuasiBasis> {
    let p = tr.algebra();
    let markov = TraceState::canonical(p);
    let gap = tr
        .vector()
        .iter()
        .zip(markov.vector())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > 1e-9 {
        return Err(Error::NoUnitaryBasis(format!(
            "trace vector {:?} is not the Markov trace {:?}",
            tr.vector(),
            markov.vector()
        )));
    }
    if p.num_blocks() == 1 {
        return weyl_clock_shift_basis(p.dims()[0], tol);
    }
    if cfg.max_iterations == 0 || cfg.restarts == 0 || !(cfg.target_residual > 0.0) {
        return Err(Error::InvalidAlgebra(
            "search configuration must be positive".into(),
        ));
    }
    let weights = tr.vector().to_vec();
    let mut best: Option<(f64, usize, Vec<Vec<CMat>>)> = None;
    let mut start = 0;
    while start < cfg.restarts {
        let end = (start + BATCH).min(cfg.restarts);
        let results: Vec<(f64, usize, Vec<Vec<CMat>>)> = (start..end)
            .into_par_iter()
            .map(|k| {
                let (res, w) = run_restart(p, &weights, cfg, k);
                (res, k, w)
            })
            .collect();
        for cand in results {
            let better = match &best {
                None => true,
                Some((b, bk, _)) => cand.0 < *b || (cand.0 == *b && cand.1 < *bk),
            };
            if better {
                best = Some(cand);
            }
        }
        if best.as_ref().is_some_and(|b| b.0 <= cfg.target_residual) {
            break;
        }
        start = end;
    }
    let (res, _, tuple) = best.expect("at least one restart");
    if res > cfg.target_residual {
        return Err(Error::SearchFailed { best_residual: res });
    }
    let elements: Vec<Element> = tuple.into_iter().map(Element::from_blocks).collect();
    let e = trace_expectation(tr)?;
    Ok(verify_quasi_basis(
        &e,
        &elements,
        &Tol::with_eq(tol.eq.max(cfg.target_residual)),
    ))
}

/// Weighted inner product `Σᵢ tᵢ Tr(aᵢ* bᵢ)`.
fn winner(weights: &[f64], a: &[CMat], b: &[CMat]) -> C64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), &t)| {
            x.iter()
                .zip(y.iter())
                .map(|(p, q)| p.conj() * q)
                .sum::<C64>()
                * t
        })
        .sum()
}

fn off_diagonal(weights: &[f64], w: &[Vec<CMat>]) -> f64 {
    let mut f = 0.0;
    for j in 0..w.len() {
        for k in 0..w.len() {
            if j != k {
                f += winner(weights, &w[j], &w[k]).norm_sqr();
            }
        }
    }
    f
}

fn haar(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    polar_unitary(&g)
}

/// Projected gradient descent on `Σ_{j≠k} |⟨wⱼ, w_k⟩|²` with a polar
/// retraction per block and an adaptive step. Returns `(√f, tuple)`.
fn run_restart(
    p: &MultiMatrixAlgebra,
    weights: &[f64],
    cfg: &UnitarySearchConfig,
    restart: usize,
) -> (f64, Vec<Vec<CMat>>) {
    let seed = cfg
        .seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(restart as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = p.total_dim();
    let mut w: Vec<Vec<CMat>> = (0..d)
        .map(|_| p.dims().iter().map(|&n| haar(&mut rng, n)).collect())
        .collect();
    let mut f = off_diagonal(weights, &w);
    let mut step = 0.5;
    let target_sq = cfg.target_residual * cfg.target_residual;
    for _ in 0..cfg.max_iterations {
        if f <= target_sq {
            break;
        }
        let gram: Vec<Vec<C64>> = (0..d)
            .map(|j| (0..d).map(|k| winner(weights, &w[j], &w[k])).collect())
            .collect();
        let trial: Vec<Vec<CMat>> = (0..d)
            .map(|k| {
                (0..p.num_blocks())
                    .map(|b| {
                        let mut g = CMat::zeros(p.dims()[b], p.dims()[b]);
                        for j in 0..d {
                            if j != k {
                                g += &w[j][b] * gram[j][k];
                            }
                        }
                        let moved = &w[k][b] - g * r(2.0 * step * weights[b]);
                        polar_unitary(&moved)
                    })
                    .collect()
            })
            .collect();
        let ft = off_diagonal(weights, &trial);
        if ft < f {
            w = trial;
            f = ft;
            step = (step * 1.2).min(10.0);
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    (f.sqrt(), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_markov_trace_is_rejected() {
        let p = MultiMatrixAlgebra::diagonal(2);
        let tr = TraceState::new(&p, vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let err = unitary_basis_search(&tr, &UnitarySearchConfig::default(), &Tol::default());
        assert!(matches!(err, Err(Error::NoUnitaryBasis(_))));
    }

    #[test]
    fn two_points_found() {
        let p = MultiMatrixAlgebra::diagonal(2);
        let tr = TraceState::canonical(&p);
        let qb =
            unitary_basis_search(&tr, &UnitarySearchConfig::default(), &Tol::default()).unwrap();
        assert_eq!(qb.len(), 2);
        assert!(qb.unitary && qb.orthonormal);
    }

    #[test]
    fn single_block_short_circuits() {
        let p = MultiMatrixAlgebra::full(2);
        let qb = unitary_basis_search(
            &TraceState::canonical(&p),
            &UnitarySearchConfig::default(),
            &Tol::default(),
        )
        .unwrap();
        assert!(qb.report.orthonormal < 1e-14);
    }

    #[test]
    fn c_plus_m2_markov_has_five_unitaries() {
        let p = MultiMatrixAlgebra::new(vec![1, 2]).unwrap();
        let tr = TraceState::new(&p, vec![0.2, 0.4]).unwrap();
        let qb =
            unitary_basis_search(&tr, &UnitarySearchConfig::default(), &Tol::default()).unwrap();
        assert_eq!(qb.len(), 5);
        assert!(qb.unitary);
        assert!(qb.report.orthonormal <= 1e-6);
        assert!(qb.is_right());
    }
}
