//! Subcommand pipelines. Each returns a finished [`Report`]; failed
//! invariants are recorded as violations, not errors.

use std::path::Path;

use hardyfiber::beurling::{phi_representation, range_of_phi};
use hardyfiber::factorization::{decompose_range, merge_all, verify_decomposition_fibers};
use hardyfiber::field::eval_field;
use hardyfiber::full_hardy::is_full_hardy;
use hardyfiber::range::{band_distance, range_from_generators};
use hardyfiber::shift::{invariance_leaks, invariant_closure, is_s_invariant};
use hardyfiber::wandering::wandering_range;
use hardyfiber::{DecompositionResult, Diagnostics, Error, FiberedField, RangeFunction};

use crate::error::{CliError, CliResult};
use crate::persist::{load_result, save_result, StoredResult};
use crate::problem::ProblemFile;
use crate::report::{sci, tool_version, Column, Report};

/// Largest allowed drift between stored and recomputed diagnostics.
pub const ROUNDTRIP_TOL: f64 = 1e-12;

fn span_of_generators(problem: &ProblemFile) -> CliResult<RangeFunction> {
    let gens = problem.generators.iter().map(|p| eval_field(p, &problem.lattice)).collect::<Result<Vec<FiberedField>, _>>()?;
    Ok(range_from_generators(&gens, &problem.lattice)?)
}

/// `J_M` of the space generated by the file: the smallest band-invariant
/// range containing the generator values (unchanged when already invariant).
fn generator_range(problem: &ProblemFile) -> CliResult<RangeFunction> {
    Ok(invariant_closure(&span_of_generators(problem)?)?)
}

fn report_for(command: &str, problem: &ProblemFile, jm: &RangeFunction) -> Report {
    Report::new(command, &problem.digest, problem.lattice, problem.inner_tol, jm.ranks())
}

fn push_diagnostics(report: &mut Report, total: &Diagnostics, per_fiber: &[Diagnostics], tol: f64) {
    for (name, v) in total.entries() {
        report.bounded(name, v, tol);
    }
    for (i, name) in Diagnostics::NAMES.iter().enumerate() {
        report.columns.push((name.to_string(), Column::Residual(per_fiber.iter().map(|d| d.values()[i]).collect())));
    }
}

/// Ranks and spectrum of the generated range.
pub fn spectrum(problem: &ProblemFile) -> CliResult<Report> {
    let jm = generator_range(problem)?;
    Ok(report_for("spectrum", problem, &jm))
}

/// Invariance of the generator span, then ranks, wandering ranks, partition
/// and the full-Hardy test of the generated range.
pub fn analyze(problem: &ProblemFile) -> CliResult<Report> {
    let lat = problem.lattice;
    let span = span_of_generators(problem)?;
    let leaks = invariance_leaks(&span)?;
    let worst = leaks.iter().copied().fold(0.0, f64::max);
    let jm = invariant_closure(&span)?;
    let mut report = report_for("analyze", problem, &jm);
    report.checks.push(("generators_invariant".into(), worst <= lat.orth_tol));
    report.values.push(("generator_invariance_leak".into(), worst));
    report.columns.push(("rank_span".into(), Column::Count(span.ranks())));
    report.columns.push(("generator_invariance_leak".into(), Column::Residual(leaks)));
    let (invariant, leak) = is_s_invariant(&jm)?;
    report.check("s_invariant", invariant, || format!("NotInvariant: closure leak {} exceeds {}", sci(leak), sci(lat.orth_tol)));
    match wandering_range(&jm) {
        Ok(jr) => {
            report.ranks_jr = Some(jr.ranks());
            report.check("rank_bound", true, String::new);
        }
        Err(e @ Error::RankTooLarge { .. }) => report.check("rank_bound", false, || format!("{}: {e}", e.name())),
        Err(e) => return Err(e.into()),
    }
    let full = is_full_hardy(&jm)?.is_some();
    report.checks.push(("full_hardy".into(), full));
    Ok(report)
}

/// The factorization pipeline: its report, `J_M` and the result.
pub fn decompose_detailed(problem: &ProblemFile) -> CliResult<(Report, RangeFunction, DecompositionResult)> {
    let jm = generator_range(problem)?;
    let res = decompose_range(&jm)?;
    let mut report = report_for("decompose", problem, &jm);
    report.ranks_jr = Some(res.partition.dims().to_vec());
    push_diagnostics(&mut report, &res.diagnostics, &res.fiber_diagnostics, problem.lattice.orth_tol);
    report.columns.insert(0, ("band".into(), Column::Count(res.bands.clone())));
    Ok((report, jm, res))
}

/// Runs the factorization pipeline and, with `out`, persists the result.
pub fn decompose(problem: &ProblemFile, out: Option<&Path>) -> CliResult<Report> {
    let (report, jm, result) = decompose_detailed(problem)?;
    if let Some(dir) = out {
        let stored = StoredResult {
            jm,
            result,
            inner_tol: problem.inner_tol,
            input_digest: problem.digest.clone(),
            tool_version: tool_version().to_string(),
        };
        save_result(dir, &stored, &problem.source)?;
    }
    Ok(report)
}

/// Inner-function representation of a `k = 1` problem and its range check.
pub fn beurling(problem: &ProblemFile) -> CliResult<Report> {
    let lat = problem.lattice;
    if lat.k != 1 {
        return Err(CliError::Usage { message: format!("beurling needs k = 1, the problem has k = {}", lat.k) });
    }
    let jm = generator_range(problem)?;
    let res = decompose_range(&jm)?;
    let mut report = report_for("beurling", problem, &jm);
    report.ranks_jr = Some(res.partition.dims().to_vec());
    // Defects are judged here, so the representation itself must not reject.
    let phi = phi_representation(&res, f64::INFINITY)?;
    report.bounded("inner_defect", phi.max_defect(), problem.inner_tol);
    let distance = band_distance(&range_of_phi(&phi)?, &jm, &res.bands)?;
    report.bounded("phi_range_distance", distance, lat.orth_tol);
    push_diagnostics(&mut report, &res.diagnostics, &res.fiber_diagnostics, lat.orth_tol);
    report.columns.insert(0, ("inner_defect".into(), Column::Residual(phi.defects().to_vec())));
    report.columns.insert(0, ("band".into(), Column::Count(res.bands.clone())));
    Ok(report)
}

/// Reloads a persisted result and recomputes its diagnostics.
pub fn verify(dir: &Path) -> CliResult<Report> {
    let StoredResult { jm, result, inner_tol, input_digest, .. } = load_result(dir)?;
    let lat = *result.lattice();
    let per = verify_decomposition_fibers(&result, &jm)?;
    let total = merge_all(&per);
    let mut report = Report::new("verify", &input_digest, lat, inner_tol, jm.ranks());
    report.ranks_jr = Some(result.partition.dims().to_vec());
    push_diagnostics(&mut report, &total, &per, lat.orth_tol);
    let drift = per
        .iter()
        .zip(&result.fiber_diagnostics)
        .flat_map(|(a, b)| a.values().into_iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    report.bounded("stored_drift", drift, ROUNDTRIP_TOL);
    report.columns.insert(0, ("band".into(), Column::Count(result.bands.clone())));
    Ok(report)
}
