use super::action::{verify_cocycle_action, CocycleAction, CocycleReport};
use super::automorphism::{classify_automorphism, AutomorphismReport};
use super::crossed::{crossed_product, CrossedProduct};
use super::FiniteGroup;
use crate::algebra::{
    generated_subalgebra, relative_commutant_decomposed, Element, HomReport, MultiMatrixAlgebra,
    StarHomomorphism, SubalgebraBasis, UnitalInclusion,
};
use crate::error::{Error, Result};
use crate::linalg::{rank, CMat, C64};
use crate::quasi_basis::{clock_shift_unitaries, generic_index, scalar_inclusion};
use crate::tol::Tol;
use crate::tower::basic_construction;
use crate::traces::{
    commutant_trace, compatible_expectation, markov_trace, minimal_expectation,
    ConditionalExpectation,
};

/// Overlaps `‖F(v*u)‖` within this distance of neither 0 nor 1 are ambiguous.
const DEGENERATE_BAND: f64 = 0.1;

fn normalization_residual(sub: &SubalgebraBasis, u: &Element, b_units: &[Element]) -> f64 {
    let unitary = u.unitarity_residual();
    let inside = b_units
        .iter()
        .map(|b| sub.residual(&(&(u * b) * &u.adjoint())) / b.norm())
        .fold(0.0, f64::max);
    unitary.max(inside)
}

fn check_witnesses(inc: &UnitalInclusion, witnesses: &[Element], tol: &Tol) -> Result<()> {
    let units = inc.embedding().unit_images();
    let sub = SubalgebraBasis::from_elements(inc.ambient(), units, tol);
    for (index, u) in witnesses.iter().enumerate() {
        inc.ambient().check(u)?;
        let residual = normalization_residual(&sub, u, units);
        if !tol.ok(residual) {
            return Err(Error::NotNormalizing { index, residual });
        }
    }
    Ok(())
}

/// Witnesses grouped by `‖F(v*u)‖ > 1/2`, identity's class first.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetPartition {
    pub classes: Vec<Vec<usize>>,
    /// First member of each class.
    pub representatives: Vec<usize>,
    /// `‖F(vᵢ* vⱼ)‖` in operator norm.
    pub overlaps: Vec<Vec<f64>>,
    /// Whether the first class is the one containing `1`.
    pub has_identity_class: bool,
}

impl CosetPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

fn classify_overlap(v: f64, what: &str) -> Result<bool> {
    if v.min((1.0 - v).abs()) > DEGENERATE_BAND {
        return Err(Error::Degenerate(format!("{what} has overlap {v:.4}")));
    }
    Ok(v > 0.5)
}

/// Partitions normalizing unitaries of `inc` by the expectation `f: A → C`.
pub fn coset_partition(
    f: &ConditionalExpectation,
    inc: &UnitalInclusion,
    witnesses: &[Element],
    tol: &Tol,
) -> Result<CosetPartition> {
    if f.inclusion().ambient() != inc.ambient() {
        return Err(Error::Shape(
            "expectation and inclusion have different ambients".into(),
        ));
    }
    check_witnesses(inc, witnesses, tol)?;
    let n = witnesses.len();
    let mut overlaps = vec![vec![0.0; n]; n];
    let mut same = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = f
                .apply_sub(&(&witnesses[i].adjoint() * &witnesses[j]))
                .op_norm();
            overlaps[i][j] = v;
            same[i][j] = classify_overlap(v, &format!("witness pair ({i}, {j})"))?;
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut owner = vec![usize::MAX; n];
    for i in 0..n {
        if owner[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (i..n).filter(|&j| same[i][j]).collect();
        for &a in &members {
            for &b in &members {
                if !same[a][b] {
                    return Err(Error::Degenerate(format!(
                        "overlap relation is not transitive at ({a}, {b})"
                    )));
                }
            }
            if owner[a] != usize::MAX {
                return Err(Error::Degenerate(format!(
                    "witness {a} lies in two classes"
                )));
            }
            owner[a] = classes.len();
        }
        classes.push(members);
    }
    let mut has_identity_class = false;
    let mut ident = None;
    for (k, cls) in classes.iter().enumerate() {
        let v = f.apply_sub(&witnesses[cls[0]]).op_norm();
        if classify_overlap(v, &format!("witness {}", cls[0]))? {
            ident = Some(k);
        }
    }
    if let Some(k) = ident {
        let c = classes.remove(k);
        classes.insert(0, c);
        has_identity_class = true;
    }
    let representatives = classes.iter().map(|c| c[0]).collect();
    Ok(CosetPartition {
        classes,
        representatives,
        overlaps,
        has_identity_class,
    })
}

/// Unitaries generating `B`: `W ⊕ 1` for Weyl unitaries `W` of each block,
/// and a central unitary with distinct eigenvalues on the blocks.
fn unitary_generators(b: &MultiMatrixAlgebra) -> Vec<Element> {
    let k = b.num_blocks();
    let mut out = Vec::new();
    for (i, &n) in b.dims().iter().enumerate() {
        for w in clock_shift_unitaries(n) {
            let mut x = b.one();
            x.blocks_mut()[i] = w;
            out.push(x);
        }
    }
    let z = Element::from_blocks(
        b.dims()
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let phase = C64::from_polar(1.0, std::f64::consts::TAU * i as f64 / k as f64);
                CMat::identity(n, n) * phase
            })
            .collect(),
    );
    out.push(z);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularityReport {
    pub generated_dim: usize,
    pub ambient_dim: usize,
    pub regular: bool,
}

/// Whether `U(B)` and the witnesses generate `A`.
pub fn verify_regularity(
    inc: &UnitalInclusion,
    witnesses: &[Element],
    tol: &Tol,
) -> Result<RegularityReport> {
    check_witnesses(inc, witnesses, tol)?;
    let mut gens: Vec<Element> = unitary_generators(inc.sub())
        .iter()
        .map(|u| inc.embed(u))
        .collect();
    gens.extend(witnesses.iter().cloned());
    let generated_dim = generated_subalgebra(inc.ambient(), &gens, tol)?.dim();
    let ambient_dim = inc.ambient().total_dim();
    Ok(RegularityReport {
        generated_dim,
        ambient_dim,
        regular: generated_dim == ambient_dim,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexCheck {
    pub name: &'static str,
    pub pass: bool,
    pub residual: f64,
    pub detail: String,
}

const MARKOV_CHECK: &str = "E0 on C_A(B) is the Markov trace of C in C_A(B)";

/// The identities hold when `B` is simple; on other inclusions the report
/// records them as computed, with `simple_sub = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylIndexReport {
    pub simple_sub: bool,
    /// Classes under `F`, i.e. modulo `U(B)U(C_A(B))`.
    pub classes: usize,
    /// Classes under `E₀`, i.e. modulo `U(B)`, when computed.
    pub raw_classes: Option<usize>,
    pub commutant_dim: usize,
    pub first_level_commutant_dim: usize,
    pub index_e0: f64,
    pub index_f: f64,
    pub checks: Vec<IndexCheck>,
}

impl WeylIndexReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn scalar_index(e: &ConditionalExpectation, tol: &Tol, what: &str) -> Result<f64> {
    generic_index(e, tol)?
        .scalar
        .ok_or_else(|| Error::MinimalExpectation(format!("{what} has a non-scalar index")))
}

/// Index arithmetic for a regular inclusion: `Ind_W(F) = #classes`,
/// `Ind_W(E₀) = #classes · dim C_A(B)`, `#classes ≤ dim(B' ∩ A₁)` and the
/// Markov property of `E₀` on `C_A(B)`.
pub fn weyl_and_index_report(
    e0: &ConditionalExpectation,
    f: &ConditionalExpectation,
    partition: &CosetPartition,
    raw: Option<&CosetPartition>,
    tol: &Tol,
) -> Result<WeylIndexReport> {
    let inc = e0.inclusion();
    let classes = partition.len();
    let index_e0 = scalar_index(e0, tol, "E0")?;
    let index_f = scalar_index(f, tol, "F")?;
    let (comm, _) = relative_commutant_decomposed(inc)?;
    let commutant_dim = comm.total_dim();
    let bc = basic_construction(e0, None, tol)?;
    let (first, _) = relative_commutant_decomposed(&inc.then(bc.lambda())?)?;
    let first_level_commutant_dim = first.total_dim();

    let mut checks = Vec::new();
    let r_a = (index_f - classes as f64).abs();
    checks.push(IndexCheck {
        name: "Ind_W(F) = number of coset classes",
        pass: tol.ok(r_a),
        residual: r_a,
        detail: format!("Ind_W(F) = {index_f:.12}, classes = {classes}"),
    });
    let want = (classes * commutant_dim) as f64;
    let r_b = (index_e0 - want).abs();
    checks.push(IndexCheck {
        name: "Ind_W(E0) = classes * dim C_A(B)",
        pass: tol.ok(r_b),
        residual: r_b,
        detail: format!("Ind_W(E0) = {index_e0:.12}, classes * dim = {want}"),
    });
    let r_int = (index_e0 - index_e0.round()).abs();
    checks.push(IndexCheck {
        name: "Ind_W(E0) is a positive integer",
        pass: tol.ok(r_int) && index_e0.round() >= 1.0,
        residual: r_int,
        detail: format!("nearest integer {}", index_e0.round()),
    });
    checks.push(IndexCheck {
        name: "classes <= dim(B' cap A_1)",
        pass: classes <= first_level_commutant_dim,
        residual: 0.0,
        detail: format!("{classes} <= {first_level_commutant_dim}"),
    });
    let markov_check = match commutant_trace(e0, tol) {
        Ok((p, _, tr)) => {
            let (markov, beta) = markov_trace(&scalar_inclusion(&p))?;
            let r_d = tr
                .vector()
                .iter()
                .zip(markov.vector())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                .max((beta - p.total_dim() as f64).abs());
            IndexCheck {
                name: MARKOV_CHECK,
                pass: tol.ok(r_d),
                residual: r_d,
                detail: format!(
                    "trace {:?}, Markov {:?}, modulus {beta:.12}",
                    tr.vector(),
                    markov.vector()
                ),
            }
        }
        Err(err) => IndexCheck {
            name: MARKOV_CHECK,
            pass: false,
            residual: f64::INFINITY,
            detail: err.to_string(),
        },
    };
    checks.push(markov_check);
    Ok(WeylIndexReport {
        simple_sub: inc.sub().num_blocks() == 1,
        classes,
        raw_classes: raw.map(CosetPartition::len),
        commutant_dim,
        first_level_commutant_dim,
        index_e0,
        index_f,
        checks,
    })
}

/// Builds `E₀`, `C = B ∨ C_A(B)` and the compatible `F`, partitions the
/// witnesses under both and reports the index arithmetic.
pub fn regular_index_pipeline(
    inc: &UnitalInclusion,
    witnesses: &[Element],
    tol: &Tol,
) -> Result<(
    WeylIndexReport,
    ConditionalExpectation,
    ConditionalExpectation,
)> {
    let e0 = minimal_expectation(inc, tol)?;
    let (_, comm) = relative_commutant_decomposed(inc)?;
    let mut gens: Vec<Element> = inc.embedding().unit_images().to_vec();
    gens.extend(comm.unit_images().iter().cloned());
    let c = generated_subalgebra(inc.ambient(), &gens, tol)?;
    let f = compatible_expectation(&e0, &c, tol)?.expectation;
    let partition = coset_partition(&f, inc, witnesses, tol)?;
    let raw = coset_partition(&e0, inc, witnesses, tol)?;
    let report = weyl_and_index_report(&e0, &f, &partition, Some(&raw), tol)?;
    Ok((report, e0, f))
}

/// `G`, `(α, σ)` on `C` and `φ: A → C ⋊ G` read off from coset
/// representatives `{u_g}` with `u_e = 1`.
#[derive(Debug, Clone)]
pub struct RecoveredStructure {
    pub group: FiniteGroup,
    pub action: CocycleAction,
    pub cocycle_report: CocycleReport,
    pub crossed: CrossedProduct,
    /// `x ↦ Σ_g F(x u_g*) u_g`.
    pub phi: StarHomomorphism,
    pub phi_report: HomReport,
    pub phi_rank: usize,
    /// `max ‖φ(ι(c)) − c‖` over matrix units of `C`.
    pub phi_fixes_c: f64,
    /// `max_{g≠h} ‖F(u_g* u_h)‖`.
    pub orthogonality: f64,
    /// `α_g` restricted to `B`, for `g ≠ e`, when it preserves `B`.
    pub restricted: Vec<(usize, AutomorphismReport)>,
}

impl RecoveredStructure {
    /// Largest residual of the isomorphism checks.
    pub fn phi_residual(&self) -> f64 {
        self.phi_report
            .multiplicative
            .max(self.phi_report.star)
            .max(self.phi_report.unital)
            .max(self.phi_fixes_c)
    }

    pub fn passes(&self, tol: &Tol) -> bool {
        let n = self.phi.source().total_dim();
        tol.ok(self.phi_residual())
            && self.phi_report.injective
            && self.phi_rank == n
            && self.phi.target().total_dim() == n
            && self.cocycle_report.passes(tol)
    }
}

fn pull_back(inc: &UnitalInclusion, y: &Element, tol: &Tol, what: &str) -> Result<Element> {
    let (x, res) = inc.embedding().preimage(y);
    if !tol.ok(res) {
        return Err(Error::NotRegular(format!(
            "{what} leaves the subalgebra (residual {res:.3e})"
        )));
    }
    Ok(x)
}

/// Recovers the twisted action from `F: A → C` and representatives `u_g`.
pub fn recover_structure(
    inc: &UnitalInclusion,
    f: &ConditionalExpectation,
    reps: &[Element],
    tol: &Tol,
) -> Result<RecoveredStructure> {
    let c_in_a = f.inclusion();
    let a = c_in_a.ambient();
    let c = c_in_a.sub();
    let n = reps.len();
    if n == 0 || !reps[0].is_close(&a.one(), tol.eq.max(1e-9)) {
        return Err(Error::NotRegular(
            "the first representative must be 1".into(),
        ));
    }
    check_witnesses(inc, reps, tol)?;
    let mut orthogonality: f64 = 0.0;
    for g in 0..n {
        for h in 0..n {
            if g != h {
                let v = f.apply_sub(&(&reps[g].adjoint() * &reps[h])).op_norm();
                orthogonality = orthogonality.max(v);
            }
        }
    }
    if !tol.ok(orthogonality) {
        return Err(Error::NotRegular(format!(
            "representatives are not F-orthogonal ({orthogonality:.3e})"
        )));
    }
    let mut span = Vec::with_capacity(n * c.total_dim());
    for u in reps {
        for x in c_in_a.embedding().unit_images() {
            span.push(x * u);
        }
    }
    let dim = SubalgebraBasis::from_elements(a, &span, tol).dim();
    if dim != a.total_dim() {
        return Err(Error::NotRegular(format!(
            "witness set does not certify regularity: span of C u_g has dimension {dim} < {}",
            a.total_dim()
        )));
    }

    // multiplication table from F-supports of u_g u_h
    let mut table = vec![vec![0; n]; n];
    for g in 0..n {
        for h in 0..n {
            let prod = &reps[g] * &reps[h];
            let hits: Vec<usize> = (0..n)
                .filter(|&k| f.apply_sub(&(&prod * &reps[k].adjoint())).op_norm() > 0.5)
                .collect();
            if hits.len() != 1 {
                return Err(Error::Degenerate(format!(
                    "product of representatives {g}, {h} meets {} classes",
                    hits.len()
                )));
            }
            table[g][h] = hits[0];
        }
    }
    let labels = (0..n).map(|k| format!("u{k}")).collect();
    let group = FiniteGroup::new(labels, table)?;

    let c_units = c.matrix_units();
    let mut alpha = Vec::with_capacity(n);
    for u in reps {
        let images = c_units
            .iter()
            .map(|x| {
                pull_back(
                    c_in_a,
                    &(&(u * &c_in_a.embed(x)) * &u.adjoint()),
                    tol,
                    "Ad(u_g)(C)",
                )
            })
            .collect::<Result<Vec<_>>>()?;
        alpha.push(StarHomomorphism::new(c.clone(), c.clone(), images)?);
    }
    let mut sigma = vec![vec![c.one(); n]; n];
    for g in 0..n {
        for h in 0..n {
            let s = &(&reps[g] * &reps[h]) * &reps[group.mul(g, h)].adjoint();
            sigma[g][h] = pull_back(c_in_a, &s, tol, "sigma(g,h)")?;
        }
    }
    let action = CocycleAction::new(group.clone(), c.clone(), alpha, sigma)?;
    let cocycle_report = verify_cocycle_action(&action).into_result(tol)?;
    let crossed = crossed_product(&action, tol)?;

    let images: Vec<Element> = a
        .matrix_units()
        .iter()
        .map(|x| {
            let coeffs: Vec<Element> = reps
                .iter()
                .map(|u| f.apply_sub(&(x * &u.adjoint())))
                .collect();
            crossed.compose(&coeffs)
        })
        .collect();
    let phi = StarHomomorphism::new(a.clone(), crossed.algebra.clone(), images)?;
    let phi_report = phi.verify();
    let phi_rank = rank(&phi.matrix(), tol.rank);
    let phi_fixes_c = c_units
        .iter()
        .map(|x| (&phi.apply(&c_in_a.embed(x)) - &crossed.inclusion.embed(x)).norm())
        .fold(0.0, f64::max);

    let b = inc.sub();
    let mut restricted = Vec::new();
    for (g, u) in reps.iter().enumerate().skip(1) {
        let imgs: Result<Vec<Element>> = b
            .matrix_units()
            .iter()
            .map(|x| {
                pull_back(
                    inc,
                    &(&(u * &inc.embed(x)) * &u.adjoint()),
                    tol,
                    "Ad(u_g)(B)",
                )
            })
            .collect();
        if let Ok(imgs) = imgs {
            let theta = StarHomomorphism::new(b.clone(), b.clone(), imgs)?;
            restricted.push((g, classify_automorphism(b, &theta, tol)?));
        }
    }
    Ok(RecoveredStructure {
        group,
        action,
        cocycle_report,
        crossed,
        phi,
        phi_report,
        phi_rank,
        phi_fixes_c,
        orthogonality,
        restricted,
    })
}
