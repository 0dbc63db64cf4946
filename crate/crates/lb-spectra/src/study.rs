//! Convergence studies: one solve per level, errors per target, EOC tables,
//! fitted slopes and the files that carry them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lb_spectra_core::analysis::{
    eigenvalue_errors_and_mu, geometric_consistency_probe, lifted_error_norms, Discrete, EigenfunctionError,
};
use lb_spectra_core::exact::{exact_spectrum, ExactEigenpair};
use lb_spectra_core::pipeline::{self, Discretization, LevelSolution};
use lb_spectra_core::spectral::{match_cluster, SolverOptions};
use lb_spectra_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ReferencePlan, Study, TargetSpec};
use crate::io;
use crate::parallel;
use crate::rate::{fit_rate, pairwise_eoc, NOISE_FLOOR};

/// Stable short name of a core failure, used as a reason code.
pub fn reason_code(e: &CoreError) -> &'static str {
    match e {
        CoreError::NonConvergence { .. } => "NonConvergence",
        CoreError::OutsideStrip { .. } => "OutsideStrip",
        CoreError::DegenerateHessian => "DegenerateHessian",
        CoreError::UnsupportedCombination(_) => "UnsupportedCombination",
        CoreError::ProjectionFailure { .. } => "ProjectionFailure",
        CoreError::ContinuityViolation => "ContinuityViolation",
        CoreError::DegenerateCell { .. } => "DegenerateCell",
        CoreError::OracleInsufficient(_) => "OracleInsufficient",
        CoreError::NoConvergence { .. } => "NoConvergence",
        CoreError::IndefiniteMass { .. } => "IndefiniteMass",
        CoreError::SingularShift { .. } => "SingularShift",
        CoreError::ClusterNotSeparated { .. } => "ClusterNotSeparated",
        CoreError::EmptyComplement => "EmptyComplement",
        CoreError::UnsupportedSurface => "UnsupportedSurface",
        CoreError::ExtrapolationUnstable { .. } => "ExtrapolationUnstable",
        CoreError::InvalidArgument(_) => "InvalidArgument",
    }
}

/// One CSV line: a (level, target) pair. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub level: usize,
    pub h: Option<f64>,
    pub n_dofs: Option<usize>,
    pub target_lambda: Option<f64>,
    /// 0-based, `;`-separated.
    pub cluster_indices: Option<String>,
    pub lambda_values: Option<String>,
    pub eigenvalue_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub energy_error: Option<f64>,
    pub mu: Option<f64>,
    pub consistency_stiffness: Option<f64>,
    pub consistency_mass: Option<f64>,
    pub wall_clock_s: Option<f64>,
    /// `column=code` for every empty column, `;`-separated.
    pub null_reasons: String,
}

/// A study target: exact eigenvalue with its eigenspace, or an
/// extrapolated simple eigenvalue.
#[derive(Debug, Clone)]
struct Target {
    lambda: f64,
    multiplicity: usize,
    exact: Option<ExactEigenpair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetLevel {
    pub level: usize,
    pub h: f64,
    pub cluster_indices: Vec<usize>,
    pub lambda_values: Vec<f64>,
    pub eigenvalue_error: f64,
    pub per_index_errors: Vec<f64>,
    pub mu: f64,
    pub mu_truncated: bool,
    pub l2_error: Option<f64>,
    pub energy_error: Option<f64>,
    /// `‖u − Zu‖_Ã` with `Z` the Galerkin projection.
    pub energy_error_galerkin: Option<f64>,
    /// `‖u − Zu‖_Ã ≤ ‖u − Pu‖_Ã` up to rounding.
    pub projection_ordering_holds: Option<bool>,
    /// `‖u − Pu‖_Ã / (√λ(1 + μ)h^{k+1})`
    pub energy_ratio_one_plus_mu: Option<f64>,
    /// `‖u − Pu‖_Ã / (√λ(2 + √μ)h^{k+1})`
    pub energy_ratio_two_plus_sqrt_mu: Option<f64>,
    /// `|λ − Λ| / (λh²)`
    pub eigenvalue_over_lambda_h2: f64,
    pub consistency_stiffness: Option<f64>,
    pub consistency_mass: Option<f64>,
}

#[derive(Debug, Clone)]
enum TargetOutcome {
    Done(Box<TargetLevel>),
    Failed(&'static str, String),
}

#[derive(Debug, Clone)]
struct LevelOutcome {
    level: usize,
    h: Option<f64>,
    n_dofs: Option<usize>,
    seconds: f64,
    solver: Option<Value>,
    result: Result<Vec<TargetOutcome>, (&'static str, String)>,
    /// Set when the consistency probe or eigenfunction analysis was skipped.
    notes: Vec<(&'static str, &'static str)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceReport {
    pub k: usize,
    pub r: usize,
    pub levels: [usize; 2],
    pub rate: f64,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub estimates: Vec<f64>,
    /// `max_fraction × smallest study error`
    pub limit: Option<f64>,
    pub accepted: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub target: Option<f64>,
    pub expected: f64,
    pub window: f64,
    pub observed: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

/// Everything a study produced.
#[derive(Debug, Clone)]
pub struct StudyReport {
    pub name: String,
    pub rows: Vec<StudyRow>,
    pub summary: Value,
    pub checks: Vec<Check>,
    pub all_levels_completed: bool,
    pub reference: Option<ReferenceReport>,
    /// Per target, per completed level.
    pub target_levels: Vec<Vec<TargetLevel>>,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 if every level completed, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_levels_completed && self.reference.as_ref().is_none_or(|r| r.accepted) {
            0
        } else {
            3
        }
    }
}

fn analytic_targets(study: &Study, select: &[usize]) -> lb_spectra_core::Result<Vec<Target>> {
    let top = *select.last().expect("validated non-empty");
    let spectrum = exact_spectrum(&study.disc.surface, top)?;
    Ok(select
        .iter()
        .map(|&l| {
            let e = spectrum[l - 1].clone();
            Target { lambda: e.eigenvalue, multiplicity: e.multiplicity(), exact: Some(e) }
        })
        .collect())
}

/// Eigenpairs to compute: every target cluster plus six above the top one.
fn pairs_needed(study: &Study) -> usize {
    let top = match &study.targets {
        // exact clusters are consecutive from the bottom of the spectrum
        TargetSpec::Analytic(levels) => exact_spectrum(&study.disc.surface, *levels.last().unwrap())
            .map_or(0, |s| s.iter().map(|e| e.multiplicity()).sum()),
        TargetSpec::Extrapolated { indices, .. } => indices.last().unwrap() + 1,
    };
    study.config.solver.num_eigs.unwrap_or(top + 6)
}

fn solve_one(disc: &Discretization, level: usize, n_eigs: usize, opts: &SolverOptions) -> lb_spectra_core::Result<LevelSolution> {
    let space = disc.space(level)?;
    let forms = parallel::assemble(&space, &disc.rule(&space))?;
    // the constant mode is deflated, so at most n_dofs − 1 pairs exist
    let n_eigs = n_eigs.min(space.n_dofs().saturating_sub(1));
    pipeline::solve_assembled(disc, level, space, forms, n_eigs, opts)
}

fn run_reference(plan: &ReferencePlan, indices: &[usize], opts: &SolverOptions) -> Result<ReferenceReport, ReferenceReport> {
    let mut report = ReferenceReport {
        k: plan.disc.lift_degree,
        r: plan.disc.fe_degree,
        levels: [plan.levels.min, plan.levels.max],
        rate: plan.rate,
        indices: indices.to_vec(),
        values: Vec::new(),
        estimates: Vec::new(),
        limit: None,
        accepted: false,
        failure: None,
    };
    let n_eigs = indices.last().unwrap() + 6;
    let seq: Result<Vec<Vec<f64>>, CoreError> = plan
        .levels
        .range()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| solve_one(&plan.disc, l, n_eigs, opts).map(|s| s.spectrum.eigenvalues))
        .collect();
    let seq = match seq {
        Ok(s) => s,
        Err(e) => {
            report.failure = Some(format!("{}: {e}", reason_code(&e)));
            return Err(report);
        }
    };
    for &i in indices {
        let values: Vec<f64> = seq.iter().map(|v| v[i]).collect();
        match lb_spectra_core::analysis::richardson(&values, plan.rate, f64::INFINITY) {
            Ok(x) => {
                report.values.push(x.value);
                report.estimates.push(x.estimate);
            }
            Err(e) => {
                report.failure = Some(format!("{}: {e}", reason_code(&e)));
                return Err(report);
            }
        }
    }
    Ok(report)
}

fn analyze_level(study: &Study, level: usize, targets: &[Target], n_eigs: usize) -> LevelOutcome {
    let start = Instant::now();
    let mut out = LevelOutcome { level, h: None, n_dofs: None, seconds: 0.0, solver: None, result: Ok(Vec::new()), notes: Vec::new() };
    let sol = match solve_one(&study.disc, level, n_eigs, &study.solver) {
        Ok(s) => s,
        Err(e) => {
            out.h = study.disc.base_mesh(level).ok().map(|m| m.metrics().h);
            out.result = Err((reason_code(&e), e.to_string()));
            out.seconds = start.elapsed().as_secs_f64();
            return out;
        }
    };
    out.h = Some(sol.h);
    out.n_dofs = Some(sol.n_dofs());
    let sp = &sol.spectrum;
    out.solver = Some(json!({
        "method": sp.method.name(),
        "max_residual": sp.residual_norms.iter().copied().fold(0.0, f64::max),
        "ortho_defect": sp.ortho_defect,
        "mean_defect": sp.mean_defect,
        "eigenvalues": sp.eigenvalues,
    }));
    let k = study.disc.lift_degree as i32;
    let analysis = &study.config.analysis;
    let mut results = Vec::with_capacity(targets.len());
    for t in targets {
        let outcome = (|| -> lb_spectra_core::Result<TargetLevel> {
            let cluster = match_cluster(sol.eigenvalues(), t.lambda, t.multiplicity)?;
            let ev = eigenvalue_errors_and_mu(sol.eigenvalues(), &cluster, t.lambda)?;
            let mut tl = TargetLevel {
                level,
                h: sol.h,
                cluster_indices: cluster.indices.clone(),
                lambda_values: cluster.indices.iter().map(|&j| sol.eigenvalues()[j]).collect(),
                eigenvalue_error: ev.cluster,
                per_index_errors: ev.per_index.clone(),
                mu: ev.mu,
                mu_truncated: ev.mu_truncated,
                l2_error: None,
                energy_error: None,
                energy_error_galerkin: None,
                projection_ordering_holds: None,
                energy_ratio_one_plus_mu: None,
                energy_ratio_two_plus_sqrt_mu: None,
                eigenvalue_over_lambda_h2: ev.cluster / (t.lambda * sol.h * sol.h),
                consistency_stiffness: None,
                consistency_mass: None,
            };
            if let (Some(exact), true) = (&t.exact, analysis.eigenfunctions) {
                let errs: Vec<EigenfunctionError> =
                    lifted_error_norms(&sol.space, &sp.eigenvectors, &cluster, exact, study.alpha)?;
                let l2 = errs.iter().map(|e| e.l2).fold(0.0, f64::max);
                let en = errs.iter().map(|e| e.energy).fold(0.0, f64::max);
                let gal = errs.iter().map(|e| e.energy_galerkin).fold(0.0, f64::max);
                let scale = t.lambda.sqrt() * sol.h.powi(k + 1);
                tl.l2_error = Some(l2);
                tl.energy_error = Some(en);
                tl.energy_error_galerkin = Some(gal);
                tl.projection_ordering_holds =
                    Some(errs.iter().all(|e| e.energy_galerkin <= e.energy * (1.0 + 1e-8) + 1e-14));
                tl.energy_ratio_one_plus_mu = Some(en / (scale * (1.0 + ev.mu)));
                tl.energy_ratio_two_plus_sqrt_mu = Some(en / (scale * (2.0 + ev.mu.sqrt())));
            }
            if analysis.consistency_probe {
                let v = Discrete(&sp.eigenvectors[cluster.indices[0]]);
                match geometric_consistency_probe(&sol.space, &v) {
                    Ok(p) => {
                        tl.consistency_stiffness = Some(p.stiffness);
                        tl.consistency_mass = Some(p.mass);
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(tl)
        })();
        results.push(match outcome {
            Ok(tl) => TargetOutcome::Done(Box::new(tl)),
            Err(e) => TargetOutcome::Failed(reason_code(&e), e.to_string()),
        });
    }
    if !analysis.consistency_probe {
        out.notes.push(("consistency_stiffness", "disabled"));
        out.notes.push(("consistency_mass", "disabled"));
    }
    let any_exact = targets.iter().any(|t| t.exact.is_some());
    if !any_exact {
        out.notes.push(("l2_error", "no_exact_eigenfunction"));
        out.notes.push(("energy_error", "no_exact_eigenfunction"));
    } else if !analysis.eigenfunctions {
        out.notes.push(("l2_error", "disabled"));
        out.notes.push(("energy_error", "disabled"));
    }
    out.result = Ok(results);
    out.seconds = start.elapsed().as_secs_f64();
    out
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn rows_for(outcome: &LevelOutcome, targets: &[Target], timings: bool) -> Vec<StudyRow> {
    let wall = timings.then_some(outcome.seconds);
    let mut base_reasons: Vec<String> = Vec::new();
    if !timings {
        base_reasons.push("wall_clock_s=disabled".into());
    }
    let blank = |level: usize, target: Option<f64>, code: &str, reasons: &[String]| {
        let mut r = vec![format!("all={code}")];
        r.extend_from_slice(reasons);
        StudyRow {
            level,
            h: outcome.h,
            n_dofs: outcome.n_dofs,
            target_lambda: target,
            cluster_indices: None,
            lambda_values: None,
            eigenvalue_error: None,
            l2_error: None,
            energy_error: None,
            mu: None,
            consistency_stiffness: None,
            consistency_mass: None,
            wall_clock_s: wall,
            null_reasons: r.join(";"),
        }
    };
    match &outcome.result {
        Err((code, _)) => targets.iter().map(|t| blank(outcome.level, Some(t.lambda), code, &base_reasons)).collect(),
        Ok(results) => results
            .iter()
            .zip(targets)
            .map(|(res, t)| match res {
                TargetOutcome::Failed(code, _) => blank(outcome.level, Some(t.lambda), code, &base_reasons),
                TargetOutcome::Done(tl) => {
                    let mut reasons: Vec<String> =
                        outcome.notes.iter().map(|(col, code)| format!("{col}={code}")).collect();
                    reasons.extend(base_reasons.iter().cloned());
                    StudyRow {
                        level: outcome.level,
                        h: outcome.h,
                        n_dofs: outcome.n_dofs,
                        target_lambda: Some(t.lambda),
                        cluster_indices: Some(join(&tl.cluster_indices)),
                        lambda_values: Some(join(&tl.lambda_values)),
                        eigenvalue_error: Some(tl.eigenvalue_error),
                        l2_error: tl.l2_error,
                        energy_error: tl.energy_error,
                        mu: Some(tl.mu),
                        consistency_stiffness: tl.consistency_stiffness,
                        consistency_mass: tl.consistency_mass,
                        wall_clock_s: wall,
                        null_reasons: reasons.join(";"),
                    }
                }
            })
            .collect(),
    }
}

fn fit_json(h: &[f64], e: &[f64]) -> Value {
    match fit_rate(h, e) {
        Ok(f) => serde_json::to_value(f).expect("fit serializes"),
        Err(err) => json!({ "error": err.to_string() }),
    }
}

/// Runs the study on a pool sized by [`parallel::thread_count`]. Numerical
/// failures are recorded per level, never raised.
pub fn run_study(study: &Study) -> StudyReport {
    run_study_on(study, &parallel::pool())
}

/// [`run_study`] on a caller-supplied pool. The report does not depend on
/// the pool size.
pub fn run_study_on(study: &Study, pool: &rayon::ThreadPool) -> StudyReport {
    pool.install(|| run_study_inner(study))
}

fn run_study_inner(study: &Study) -> StudyReport {
    let name = study.config.name.clone();
    let mut reference: Option<ReferenceReport> = None;
    let targets: Result<Vec<Target>, String> = match &study.targets {
        TargetSpec::Analytic(select) => analytic_targets(study, select).map_err(|e| e.to_string()),
        TargetSpec::Extrapolated { indices, reference: plan } => match run_reference(plan, indices, &study.solver) {
            Ok(rep) => {
                let t = rep.values.iter().map(|&v| Target { lambda: v, multiplicity: 1, exact: None }).collect();
                reference = Some(rep);
                Ok(t)
            }
            Err(rep) => {
                let msg = format!("reference unavailable: {}", rep.failure.clone().unwrap_or_default());
                reference = Some(rep);
                Err(msg)
            }
        },
    };
    let targets = match targets {
        Ok(t) => t,
        Err(msg) => return failed_report(study, reference, msg),
    };
    let n_eigs = pairs_needed(study);

    let outcomes: Vec<LevelOutcome> = study
        .levels
        .range()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| analyze_level(study, l, &targets, n_eigs))
        .collect();

    let timings = study.config.output.timings;
    let rows: Vec<StudyRow> = outcomes.iter().flat_map(|o| rows_for(o, &targets, timings)).collect();
    let all_levels_completed = outcomes
        .iter()
        .all(|o| matches!(&o.result, Ok(r) if r.iter().all(|t| matches!(t, TargetOutcome::Done(_)))));

    let target_levels: Vec<Vec<TargetLevel>> = (0..targets.len())
        .map(|ti| {
            outcomes
                .iter()
                .filter_map(|o| match &o.result {
                    Ok(r) => match &r[ti] {
                        TargetOutcome::Done(tl) => Some((**tl).clone()),
                        TargetOutcome::Failed(..) => None,
                    },
                    Err(_) => None,
                })
                .collect()
        })
        .collect();

    // reference gate: estimate against the smallest error it has to resolve
    if let Some(rep) = reference.as_mut() {
        let smallest = target_levels.iter().flatten().map(|t| t.eigenvalue_error).fold(f64::INFINITY, f64::min);
        let plan_fraction = match &study.targets {
            TargetSpec::Extrapolated { reference, .. } => reference.max_fraction,
            _ => unreachable!(),
        };
        let limit = plan_fraction * smallest;
        rep.limit = limit.is_finite().then_some(limit);
        rep.accepted = limit.is_finite() && rep.estimates.iter().all(|&e| e <= limit);
    }

    let checks = evaluate_checks(study, &targets, &target_levels, reference.as_ref());
    let summary = summary_json(study, &targets, &outcomes, &target_levels, &checks, reference.as_ref(), all_levels_completed);
    StudyReport { name, rows, summary, checks, all_levels_completed, reference, target_levels }
}

fn failed_report(study: &Study, reference: Option<ReferenceReport>, msg: String) -> StudyReport {
    let rows = study
        .levels
        .range()
        .map(|level| StudyRow {
            level,
            h: None,
            n_dofs: None,
            target_lambda: None,
            cluster_indices: None,
            lambda_values: None,
            eigenvalue_error: None,
            l2_error: None,
            energy_error: None,
            mu: None,
            consistency_stiffness: None,
            consistency_mass: None,
            wall_clock_s: None,
            null_reasons: "all=ReferenceUnavailable".into(),
        })
        .collect();
    let checks = vec![Check {
        name: "reference".into(),
        target: None,
        expected: 0.0,
        window: 0.0,
        observed: None,
        pass: false,
        note: Some(msg.clone()),
    }];
    let summary = json!({
        "name": study.config.name,
        "status": "failed",
        "failure": msg,
        "reference": reference,
        "checks": checks,
        "pass": false,
    });
    StudyReport {
        name: study.config.name.clone(),
        rows,
        summary,
        checks,
        all_levels_completed: false,
        reference,
        target_levels: Vec::new(),
    }
}

/// The last `n` points above the noise floor, plus the `h` of floored points.
fn fit_window(pts: &[(f64, f64)], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let floored: Vec<f64> = pts.iter().filter(|p| p.1 <= NOISE_FLOOR).map(|p| p.0).collect();
    let usable: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.1 > NOISE_FLOOR).collect();
    let (h, e) = usable[usable.len().saturating_sub(n)..].iter().copied().unzip();
    (h, e, floored)
}

fn evaluate_checks(
    study: &Study,
    targets: &[Target],
    target_levels: &[Vec<TargetLevel>],
    reference: Option<&ReferenceReport>,
) -> Vec<Check> {
    let ex = &study.config.expect;
    let mut checks = Vec::new();
    if let Some(rep) = reference {
        checks.push(Check {
            name: "reference".into(),
            target: None,
            expected: rep.limit.unwrap_or(0.0),
            window: 0.0,
            observed: rep.estimates.iter().copied().reduce(f64::max),
            pass: rep.accepted,
            note: Some("Richardson estimate must not exceed the limit".into()),
        });
    }
    let quantities: [(&str, Option<f64>, fn(&TargetLevel) -> Option<f64>); 3] = [
        ("eigenvalue", ex.eigenvalue_rate, |t| Some(t.eigenvalue_error)),
        ("l2", ex.l2_rate, |t| t.l2_error),
        ("energy", ex.energy_rate, |t| t.energy_error),
    ];
    for (qname, expected, get) in quantities {
        let Some(expected) = expected else { continue };
        for (t, levels) in targets.iter().zip(target_levels) {
            let pts: Vec<(f64, f64)> = levels.iter().filter_map(|l| get(l).map(|e| (l.h, e))).collect();
            let (h, e, floored) = fit_window(&pts, ex.fit_levels);
            let (observed, note) = match fit_rate(&h, &e) {
                Ok(f) => (Some(f.slope), (!floored.is_empty()).then(|| format!("below noise floor at h = {floored:?}"))),
                Err(err) => (None, Some(err.to_string())),
            };
            let pass = observed.is_some_and(|s| (s - expected).abs() <= ex.window);
            checks.push(Check {
                name: format!("{qname}_rate"),
                target: Some(t.lambda),
                expected,
                window: ex.window,
                observed,
                pass,
                note,
            });
        }
    }
    if let Some(bound) = ex.constant_spread {
        let finest: Vec<f64> = target_levels
            .iter()
            .filter_map(|l| l.iter().max_by_key(|t| t.level).map(|t| t.eigenvalue_over_lambda_h2))
            .collect();
        let same_level = target_levels.iter().filter_map(|l| l.iter().map(|t| t.level).max()).collect::<Vec<_>>();
        let consistent = finest.len() == targets.len() && same_level.windows(2).all(|w| w[0] == w[1]);
        let (lo, hi) = finest.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let observed = (consistent && lo > 0.0).then(|| hi / lo);
        checks.push(Check {
            name: "eigenvalue_constant_spread".into(),
            target: None,
            expected: bound,
            window: 0.0,
            observed,
            pass: observed.is_some_and(|s| s < bound),
            note: Some("max/min of |λ−Λ|/(λh²) across targets at the finest level".into()),
        });
    }
    checks
}

fn summary_json(
    study: &Study,
    targets: &[Target],
    outcomes: &[LevelOutcome],
    target_levels: &[Vec<TargetLevel>],
    checks: &[Check],
    reference: Option<&ReferenceReport>,
    all_levels_completed: bool,
) -> Value {
    let levels: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "level": o.level,
                "h": o.h,
                "n_dofs": o.n_dofs,
                "solver": o.solver,
                "failure": o.result.as_ref().err().map(|(c, m)| json!({"code": c, "message": m})),
                "target_failures": o.result.as_ref().ok().map(|r| r.iter().filter_map(|t| match t {
                    TargetOutcome::Failed(c, m) => Some(json!({"code": c, "message": m})),
                    TargetOutcome::Done(_) => None,
                }).collect::<Vec<_>>()),
            })
        })
        .collect();
    let per_target: Vec<Value> = targets
        .iter()
        .zip(target_levels)
        .map(|(t, tl)| {
            let h: Vec<f64> = tl.iter().map(|x| x.h).collect();
            let series = |f: fn(&TargetLevel) -> Option<f64>| -> Option<Vec<f64>> { tl.iter().map(f).collect() };
            let mut eoc = serde_json::Map::new();
            let mut fits = serde_json::Map::new();
            for (q, f) in [
                ("eigenvalue", (|x: &TargetLevel| Some(x.eigenvalue_error)) as fn(&TargetLevel) -> Option<f64>),
                ("l2", |x| x.l2_error),
                ("energy", |x| x.energy_error),
            ] {
                if let Some(e) = series(f) {
                    eoc.insert(q.into(), json!(pairwise_eoc(&h, &e)));
                    let pts: Vec<(f64, f64)> = h.iter().copied().zip(e.iter().copied()).collect();
                    let (fh, fe, floored) = fit_window(&pts, study.config.expect.fit_levels);
                    let mut fit = fit_json(&fh, &fe);
                    fit["below_noise_floor"] = json!(floored);
                    fits.insert(q.into(), fit);
                }
            }
            json!({
                "lambda": t.lambda,
                "multiplicity": t.multiplicity,
                "levels": tl,
                "eoc": eoc,
                "fits": fits,
            })
        })
        .collect();
    json!({
        "name": study.config.name,
        "status": if all_levels_completed { "completed" } else { "failed_levels" },
        "config": study.config,
        "reference": reference,
        "levels": levels,
        "targets": per_target,
        "checks": checks,
        "pass": checks.iter().all(|c| c.pass),
    })
}

/// Writes `<name>.csv`, `<name>.json` and one `.dat` per curve into `dir`.
pub fn write_outputs(report: &StudyReport, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join(format!("{}.csv", report.name));
    let mut w = csv::Writer::from_path(&csv_path)?;
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    written.push(csv_path);

    let json_path = dir.join(format!("{}.json", report.name));
    std::fs::write(&json_path, serde_json::to_string_pretty(&report.summary)? + "\n")?;
    written.push(json_path);

    for (ti, levels) in report.target_levels.iter().enumerate() {
        let curves: [(&str, fn(&TargetLevel) -> Option<f64>); 3] = [
            ("eigenvalue", |t| Some(t.eigenvalue_error)),
            ("l2", |t| t.l2_error),
            ("energy", |t| t.energy_error),
        ];
        for (q, f) in curves {
            let rows: Vec<Vec<f64>> = levels.iter().filter_map(|t| f(t).map(|e| vec![t.h, e])).collect();
            if rows.is_empty() {
                continue;
            }
            let path = dir.join(format!("{}_{q}_t{ti}.dat", report.name));
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            io::write_dat(&["h", &format!("{q}_error")], &rows, &mut file)?;
            written.push(path);
        }
    }
    Ok(written)
}
