//! Runs resolved tasks against the library and records each identity checked.

use std::collections::BTreeMap;

use fdcstar::group::{
    crossed_product, recover_structure, regular_index_pipeline, verify_cocycle_action,
    verify_regularity, CocycleAction, CrossedProduct, IDENTITY_COCYCLE, IDENTITY_COMPOSITION,
    IDENTITY_NORMALIZATION,
};
use fdcstar::quasi_basis::{
    generic_quasi_basis, unitary_basis_search, verify_quasi_basis, QuasiBasisReport,
    UnitarySearchConfig,
};
use fdcstar::tower::{depth, jones_tower};
use fdcstar::traces::{
    markov_residual, markov_trace, minimal_expectation, trace_preserving_expectation,
    watatani_index,
};
use fdcstar::{ConditionalExpectation, IndexValue, QuasiBasis, Tol, UnitalInclusion};
use serde_json::{json, Value};

use crate::report::{Check, TaskRecord};
use crate::spec::{Job, TaskDef};

const HOM: &str = "ι(xy) = ι(x)ι(y), ι(x*) = ι(x)*, ι(1) = 1";
const MARKOV: &str = "ΛᵗΛ t = β t";
const EXPECTATION: &str = "E(b x b') = b E(x) b', E(1) = 1, E(x*x) ≥ 0";
const RIGHT_BASIS: &str = "x = Σ E(xλᵢ)λᵢ*";
const LEFT_BASIS: &str = "x = Σ λᵢE(λᵢ*x)";
const ORTHONORMAL: &str = "E(λᵢ*λⱼ) = δᵢⱼ";
const UNITARY: &str = "λᵢ*λᵢ = λᵢλᵢ* = 1";
const INDEX: &str = "Ind(E) = Σ λᵢλᵢ* is central";
const DUAL: &str = "E_k(e_k) = Ind(E_{k-1})⁻¹ and E_k is a conditional expectation";
const DEPTH: &str = "B' ∩ A_k = span{(B' ∩ A_{k-1}) e_k (B' ∩ A_{k-1})}";
const COVARIANCE: &str = "u_g x u_g* = α_g(x)";
const MULTIPLICATION: &str = "u_g u_h = σ(g,h) u_gh";
const STAR: &str = "u_g* = u_{g⁻¹} σ(g,g⁻¹)*";
const CANONICAL_E: &str = "E(Σ x_g u_g) = x_e";
const RECOVERY: &str = "φ(x) = Σ_g F(x u_g*) u_g is an isomorphism onto C ⋊ G";
const REGULAR: &str = "A is generated by U(B) and the normalizing unitaries";

type Values = BTreeMap<String, Value>;

/// Runs one job; library errors become an `error` check with the message.
pub fn run(index: usize, job: &Job, tol: &Tol, cfg: &RunConfig) -> TaskRecord {
    let mut checks = Vec::new();
    let mut values = Values::new();
    if let Err(e) = dispatch(job, tol, cfg, &mut checks, &mut values) {
        checks.push(Check::error(
            job.def.kind(),
            anchor_of(&job.def),
            e.to_string(),
        ));
    }
    TaskRecord::new(index, job.def.kind(), job.def.subject(), checks, values)
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub seed: u64,
    pub max_tower: usize,
    pub gns_cap: usize,
}

fn anchor_of(def: &TaskDef) -> &'static str {
    match def {
        TaskDef::VerifyInclusion { .. } => HOM,
        TaskDef::MarkovTrace { .. } => MARKOV,
        TaskDef::Expectation { .. } => EXPECTATION,
        TaskDef::Index { .. } | TaskDef::QuasiBasis { .. } => RIGHT_BASIS,
        TaskDef::Tower { .. } => DUAL,
        TaskDef::Depth { .. } => DEPTH,
        TaskDef::UnitarySearch { .. } => UNITARY,
        TaskDef::Cocycle { .. } => IDENTITY_COCYCLE,
        TaskDef::CrossedProduct { .. } => MULTIPLICATION,
        TaskDef::RoundTrip { .. } => RECOVERY,
        TaskDef::RegularIndex { .. } => REGULAR,
    }
}

fn dispatch(
    job: &Job,
    tol: &Tol,
    cfg: &RunConfig,
    checks: &mut Vec<Check>,
    values: &mut Values,
) -> fdcstar::Result<()> {
    match &job.def {
        TaskDef::VerifyInclusion { .. } => verify_inclusion(job, tol, checks, values),
        TaskDef::MarkovTrace { .. } => {
            let inc = inclusion(job, tol)?;
            let (t, beta) = markov_trace(&inc)?;
            checks.push(Check::residual(
                "Perron eigenvector",
                MARKOV,
                markov_residual(&inc, &t, beta),
                tol,
            ));
            values.insert("beta".into(), json!(beta));
            values.insert("trace_vector".into(), json!(t.vector()));
            Ok(())
        }
        TaskDef::Expectation { .. } => {
            let inc = inclusion(job, tol)?;
            let e = expectation(job, &inc, tol)?;
            let r = e.verify();
            checks.push(Check::residual(
                "idempotent on B",
                EXPECTATION,
                r.idempotent,
                tol,
            ));
            checks.push(Check::residual("unital", EXPECTATION, r.unital, tol));
            checks.push(Check::residual(
                "B-bimodule map",
                EXPECTATION,
                r.bimodule,
                tol,
            ));
            checks.push(Check::flag(
                "positive",
                EXPECTATION,
                r.min_positive_eigenvalue >= -tol.eq,
                format!("least eigenvalue {:.3e}", r.min_positive_eigenvalue),
            ));
            checks.push(Check::flag(
                "faithful",
                EXPECTATION,
                r.faithfulness_margin > tol.eq,
                format!("margin {:.3e}", r.faithfulness_margin),
            ));
            if let Some(tau) = &job.trace {
                let res = e.trace_preservation_residual(tau);
                checks.push(Check::residual(
                    "preserves the trace",
                    "τ ∘ E = τ",
                    res,
                    tol,
                ));
            }
            Ok(())
        }
        TaskDef::Index { expect, .. } => {
            let inc = inclusion(job, tol)?;
            let e = expectation(job, &inc, tol)?;
            let qb = generic_quasi_basis(&e, None, tol)?;
            basis_checks(&qb.report, checks, tol);
            let ind = watatani_index(&e, &qb, tol)?;
            index_checks(&ind, checks, values, tol);
            describe_basis(&qb, values);
            if let Some(want) = expect {
                let got = ind.scalar.unwrap_or(f64::NAN);
                let r = (got - want).abs();
                checks.push(
                    Check::residual("index equals expected", INDEX, r, tol)
                        .with_detail(format!("expected {want}")),
                );
            }
            Ok(())
        }
        TaskDef::QuasiBasis { .. } => {
            let inc = inclusion(job, tol)?;
            let e = expectation(job, &inc, tol)?;
            let qb = verify_quasi_basis(&e, &job.elements, tol);
            basis_checks(&qb.report, checks, tol);
            describe_basis(&qb, values);
            if tol.ok(qb.report.right) {
                index_checks(&watatani_index(&e, &qb, tol)?, checks, values, tol);
            }
            Ok(())
        }
        TaskDef::Tower { levels, .. } => {
            let inc = inclusion(job, tol)?;
            let e = expectation(job, &inc, tol)?;
            let m = levels.unwrap_or(cfg.max_tower);
            let tower = jones_tower(&e, m, cfg.gns_cap, tol)?;
            for (k, level) in tower.levels.iter().enumerate().skip(1) {
                let valid = level.expectation.verify().passes(tol);
                checks.push(Check::flag(
                    &format!("level {k} dual expectation"),
                    DUAL,
                    valid,
                    "",
                ));
                if let Some(ek) = &level.jones {
                    let prev = &tower.levels[k - 1].index;
                    let want = prev.inverse(level.inclusion.sub());
                    let got = level.expectation.apply_sub(ek);
                    let r = (&got - &want).norm();
                    checks.push(Check::residual(
                        &format!("level {k} E_k(e_k)"),
                        DUAL,
                        r,
                        tol,
                    ));
                }
            }
            values.insert("algebra_dims".into(), json!(tower.algebra_dims()));
            values.insert("commutant_dims".into(), json!(tower.commutant_dims()));
            let indices: Vec<Value> = tower.levels.iter().map(|l| index_value(&l.index)).collect();
            values.insert("indices".into(), Value::Array(indices));
            Ok(())
        }
        TaskDef::Depth {
            max_level,
            expect_at_most,
            ..
        } => {
            let inc = inclusion(job, tol)?;
            let e = expectation(job, &inc, tol)?;
            let m = max_level.unwrap_or(cfg.max_tower);
            let (_, d) = depth(&e, m, cfg.gns_cap, tol)?;
            for s in d.steps.iter().filter(|s| s.direct) {
                checks.push(Check::flag(
                    &format!("level {} direct span matches the ideal criterion", s.k),
                    DEPTH,
                    s.span_dim == s.ideal_dim,
                    format!(
                        "span {} ideal {} commutant {}",
                        s.span_dim, s.ideal_dim, s.commutant_dim
                    ),
                ));
            }
            if let Some(n) = expect_at_most {
                let ok = d.value.is_some_and(|k| k <= *n);
                checks.push(Check::flag(
                    &format!("depth at most {n}"),
                    DEPTH,
                    ok,
                    format!("depth {d}"),
                ));
            }
            values.insert("depth".into(), json!(d.to_string()));
            values.insert("tested_up_to".into(), json!(d.tested_up_to));
            if let Some(p) = d.capped_at {
                values.insert("capped_at".into(), json!(p));
            }
            let steps: Vec<Value> = d
                .steps
                .iter()
                .map(|s| json!({"k": s.k, "span_dim": s.span_dim, "commutant_dim": s.commutant_dim, "equal": s.equal}))
                .collect();
            values.insert("steps".into(), Value::Array(steps));
            Ok(())
        }
        TaskDef::UnitarySearch { .. } => {
            let tr = job.trace.as_ref().expect("resolved");
            let search = UnitarySearchConfig {
                seed: cfg.seed,
                target_residual: tol.eq,
                ..UnitarySearchConfig::default()
            };
            let qb = unitary_basis_search(tr, &search, tol)?;
            basis_checks(&qb.report, checks, tol);
            checks.push(Check::residual(
                "orthonormal",
                ORTHONORMAL,
                qb.report.orthonormal,
                tol,
            ));
            checks.push(Check::residual("unitary", UNITARY, qb.report.unitary, tol));
            describe_basis(&qb, values);
            Ok(())
        }
        TaskDef::Cocycle { .. } => {
            cocycle_checks(action(job), checks, tol);
            Ok(())
        }
        TaskDef::CrossedProduct { .. } => {
            let Some(cp) = checked_crossed_product(action(job), checks, tol)? else {
                return Ok(());
            };
            let r = cp.verify(tol);
            checks.push(Check::residual("covariance", COVARIANCE, r.covariance, tol));
            checks.push(Check::residual(
                "twisted multiplication",
                MULTIPLICATION,
                r.multiplication,
                tol,
            ));
            checks.push(Check::residual("adjoint of u_g", STAR, r.star, tol));
            checks.push(Check::flag(
                "C and u_g generate the crossed product",
                MULTIPLICATION,
                r.generated_dim == r.dim,
                format!("generated {} of {}", r.generated_dim, r.dim),
            ));
            checks.push(Check::residual(
                "E(u_g) = 0 for g ≠ e",
                CANONICAL_E,
                r.expectation_of_u,
                tol,
            ));
            checks.push(Check::residual(
                "equivariance",
                "E(u_g x u_g*) = α_g(E(x))",
                r.equivariance,
                tol,
            ));
            checks.push(Check::residual(
                "u_g form a right quasi-basis",
                RIGHT_BASIS,
                r.quasi_basis.right,
                tol,
            ));
            checks.push(Check::residual(
                "u_g form a left quasi-basis",
                LEFT_BASIS,
                r.quasi_basis.left,
                tol,
            ));
            checks.push(Check::residual(
                "index is |G|",
                "Σ u_g u_g* = |G|",
                r.index,
                tol,
            ));
            values.insert("dim".into(), json!(r.dim));
            values.insert("block_dims".into(), json!(cp.algebra.dims()));
            values.insert("group_order".into(), json!(cp.group_order()));
            Ok(())
        }
        TaskDef::RoundTrip { .. } => {
            let Some(cp) = checked_crossed_product(action(job), checks, tol)? else {
                return Ok(());
            };
            let rec = recover_structure(&cp.inclusion, &cp.expectation, &cp.u, tol)?;
            checks.push(Check::residual(
                "φ is a unital *-homomorphism fixing C",
                RECOVERY,
                rec.phi_residual(),
                tol,
            ));
            let n = rec.phi.source().total_dim();
            checks.push(Check::flag(
                "φ is bijective",
                RECOVERY,
                rec.phi_report.injective && rec.phi_rank == n && rec.phi.target().total_dim() == n,
                format!("rank {} of {n}", rec.phi_rank),
            ));
            let rc = &rec.cocycle_report;
            let worst = rc
                .failures(tol)
                .first()
                .map(|f| f.0)
                .unwrap_or("all identities hold");
            checks.push(Check::flag(
                "recovered action is a cocycle action",
                IDENTITY_COCYCLE,
                rc.passes(tol),
                worst,
            ));
            let iso = rec.group.find_isomorphism(&cp.action.group).is_some();
            checks.push(Check::flag(
                "recovered group is isomorphic",
                "G ≅ N_A(C)/U(C)",
                iso,
                "",
            ));
            checks.push(Check::residual(
                "F(u_g* u_h) = 0 for g ≠ h",
                ORTHONORMAL,
                rec.orthogonality,
                tol,
            ));
            values.insert("group_order".into(), json!(rec.group.order()));
            Ok(())
        }
        TaskDef::RegularIndex { .. } => {
            let inc = inclusion(job, tol)?;
            let reg = verify_regularity(&inc, &job.elements, tol)?;
            checks.push(Check::flag(
                "regular",
                REGULAR,
                reg.regular,
                format!("generated {} of {}", reg.generated_dim, reg.ambient_dim),
            ));
            let (report, _, _) = regular_index_pipeline(&inc, &job.elements, tol)?;
            // the index arithmetic is a theorem only for simple B; otherwise it is reported
            if report.simple_sub {
                for c in &report.checks {
                    checks.push(Check {
                        residual: Some(c.residual),
                        ..Check::flag(c.name, c.name, c.pass, c.detail.clone())
                    });
                }
            } else {
                let computed: Vec<Value> = report
                    .checks
                    .iter()
                    .map(|c| json!({"identity": c.name, "holds": c.pass, "detail": c.detail}))
                    .collect();
                values.insert("index_identities_unchecked".into(), Value::Array(computed));
            }
            values.insert("simple_sub".into(), json!(report.simple_sub));
            values.insert("classes".into(), json!(report.classes));
            values.insert("raw_classes".into(), json!(report.raw_classes));
            values.insert("commutant_dim".into(), json!(report.commutant_dim));
            values.insert("index_e0".into(), json!(report.index_e0));
            values.insert("index_f".into(), json!(report.index_f));
            Ok(())
        }
    }
}

fn inclusion(job: &Job, tol: &Tol) -> fdcstar::Result<UnitalInclusion> {
    let data = job.inclusion.as_ref().expect("resolved");
    UnitalInclusion::new(data.embedding.clone(), tol)
}

fn action(job: &Job) -> &CocycleAction {
    job.action.as_ref().expect("resolved")
}

/// The trace-preserving expectation when a trace was named, else the minimal one.
fn expectation(
    job: &Job,
    inc: &UnitalInclusion,
    tol: &Tol,
) -> fdcstar::Result<ConditionalExpectation> {
    match &job.trace {
        Some(tau) => trace_preserving_expectation(inc, tau),
        None => minimal_expectation(inc, tol),
    }
}

fn verify_inclusion(
    job: &Job,
    tol: &Tol,
    checks: &mut Vec<Check>,
    values: &mut Values,
) -> fdcstar::Result<()> {
    let data = job.inclusion.as_ref().expect("resolved");
    let r = data.embedding.verify();
    checks.push(Check::residual(
        "multiplicative",
        HOM,
        r.multiplicative,
        tol,
    ));
    checks.push(Check::residual("preserves adjoints", HOM, r.star, tol));
    checks.push(Check::residual("unital", HOM, r.unital, tol));
    checks.push(Check::flag("injective", HOM, r.injective, ""));
    if r.passes(tol) {
        let inc = UnitalInclusion::new(data.embedding.clone(), tol)?;
        values.insert("inclusion_matrix".into(), json!(inc.inclusion_matrix()));
        values.insert("connected".into(), json!(inc.is_connected()));
    }
    Ok(())
}

fn basis_checks(r: &QuasiBasisReport, checks: &mut Vec<Check>, tol: &Tol) {
    checks.push(Check::residual(
        "right reconstruction",
        RIGHT_BASIS,
        r.right,
        tol,
    ));
}

fn describe_basis(qb: &QuasiBasis, values: &mut Values) {
    values.insert("basis_size".into(), json!(qb.len()));
    values.insert("side".into(), json!(qb.side.as_str()));
    values.insert("left_residual".into(), json!(qb.report.left));
    values.insert("orthonormal".into(), json!(qb.orthonormal));
    values.insert("unitary".into(), json!(qb.unitary));
    values.insert("unitary_residual".into(), json!(qb.report.unitary));
}

fn index_value(ind: &IndexValue) -> Value {
    json!({"coefficients": ind.coefficients, "scalar": ind.scalar})
}

fn index_checks(ind: &IndexValue, checks: &mut Vec<Check>, values: &mut Values, tol: &Tol) {
    checks.push(Check::residual(
        "index is central",
        INDEX,
        ind.centrality_residual,
        tol,
    ));
    checks.push(Check::flag(
        "index is positive and invertible",
        INDEX,
        ind.is_positive_invertible(),
        "",
    ));
    values.insert("index".into(), index_value(ind));
}

fn cocycle_checks(act: &CocycleAction, checks: &mut Vec<Check>, tol: &Tol) -> bool {
    let r = verify_cocycle_action(act);
    checks.push(Check::residual(
        "α_g are automorphisms",
        "α_g ∈ Aut(C)",
        r.automorphism,
        tol,
    ));
    checks.push(Check::residual(
        "σ is unitary",
        "σ(g,h) ∈ U(C)",
        r.unitary,
        tol,
    ));
    checks.push(Check::residual(
        "twisted composition",
        IDENTITY_COMPOSITION,
        r.twisted_composition,
        tol,
    ));
    checks.push(Check::residual(
        "cocycle identity",
        IDENTITY_COCYCLE,
        r.cocycle,
        tol,
    ));
    checks.push(Check::residual(
        "normalization",
        IDENTITY_NORMALIZATION,
        r.normalization,
        tol,
    ));
    r.passes(tol)
}

/// Verifies the action first; the crossed product is built only if it holds.
fn checked_crossed_product(
    act: &CocycleAction,
    checks: &mut Vec<Check>,
    tol: &Tol,
) -> fdcstar::Result<Option<CrossedProduct>> {
    if !cocycle_checks(act, checks, tol) {
        return Ok(None);
    }
    crossed_product(act, tol).map(Some)
}
