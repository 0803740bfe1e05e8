//! Problem files: a versioned TOML document.
//!
//! ```toml
//! schema = "hardyfiber-problem/1"
//!
//! [lattice]
//! n_lambda = 64
//! n_z = 64
//! k = 2
//! rank_tol = 1e-9     # optional
//! orth_tol = 1e-8     # optional
//! inner_tol = 1e-6    # optional
//!
//! [[generator]]
//! label = "g1"        # optional
//! terms = [
//!   { lambda = 0, z = 1, coord = 1, re = 1.0 },
//!   { lambda = 1, z = 0, coord = 2, re = 0.3, im = -0.1 },
//! ]
//! ```
//!
//! A term is `(re + i·im) λ^lambda z^z ε_coord`. Coordinates are 1-based,
//! `lambda` may be negative, and `lambda` and `im` default to 0.

use std::path::Path;

use hardyfiber::fixtures;
use hardyfiber::lattice::{DEFAULT_INNER_TOL, DEFAULT_ORTH_TOL, DEFAULT_RANK_TOL};
use hardyfiber::{c64, LaurentPolyField, LaurentTerm, TruncationLattice};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "hardyfiber-problem/1";

/// Lattice used for `@random` problems.
pub const RANDOM_N_LAMBDA: usize = 64;
pub const RANDOM_N_Z: usize = 64;
pub const RANDOM_DEFAULT_K: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub lattice: TruncationLattice,
    pub inner_tol: f64,
    pub generators: Vec<LaurentPolyField>,
    pub labels: Vec<Option<String>>,
    /// SHA-256 of the source bytes.
    pub digest: String,
    pub source: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema: Spanned<String>,
    lattice: Spanned<LatticeSpec>,
    #[serde(default, rename = "generator")]
    generators: Vec<Spanned<GeneratorSpec>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LatticeSpec {
    n_lambda: usize,
    n_z: usize,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orth_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner_tol: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GeneratorSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    terms: Vec<Spanned<TermSpec>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    #[serde(default)]
    lambda: i64,
    z: usize,
    coord: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Reads and validates a problem file.
pub fn load_problem(path: &Path) -> CliResult<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_problem(&text, &path.display().to_string())
}

/// Parses problem text; `origin` names the source in error messages.
pub fn parse_problem(text: &str, origin: &str) -> CliResult<ProblemFile> {
    let parse_err = |offset: usize, field: &str, message: String| CliError::Parse {
        path: origin.to_string(),
        line: line_of(text, offset),
        field: field.to_string(),
        message,
    };
    let doc: Document = toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        parse_err(offset, "document", e.message().to_string())
    })?;
    if doc.schema.get_ref() != SCHEMA {
        return Err(parse_err(
            doc.schema.span().start,
            "schema",
            format!("unsupported schema {:?}, expected {SCHEMA:?}", doc.schema.get_ref()),
        ));
    }
    let spec = doc.lattice.get_ref();
    let lattice = TruncationLattice::with_tolerances(
        spec.n_lambda,
        spec.n_z,
        spec.k,
        spec.rank_tol.unwrap_or(DEFAULT_RANK_TOL),
        spec.orth_tol.unwrap_or(DEFAULT_ORTH_TOL),
    )
    .map_err(|e| parse_err(doc.lattice.span().start, "lattice", e.to_string()))?;
    let inner_tol = spec.inner_tol.unwrap_or(DEFAULT_INNER_TOL);
    if !(inner_tol > 0.0 && inner_tol < 1.0) {
        return Err(parse_err(doc.lattice.span().start, "lattice.inner_tol", format!("must lie in (0, 1), got {inner_tol}")));
    }
    if doc.generators.is_empty() {
        return Err(parse_err(text.len(), "generator", "at least one [[generator]] is required".into()));
    }

    let mut generators = Vec::with_capacity(doc.generators.len());
    let mut labels = Vec::with_capacity(doc.generators.len());
    for (g_idx, g) in doc.generators.iter().enumerate() {
        let mut terms = Vec::with_capacity(g.get_ref().terms.len());
        for (t_idx, t) in g.get_ref().terms.iter().enumerate() {
            let line = line_of(text, t.span().start);
            let term = t.get_ref();
            let bounds = |message: String| CliError::Bounds {
                path: origin.to_string(),
                generator: g_idx + 1,
                term: t_idx + 1,
                line,
                message,
            };
            if term.coord == 0 || term.coord > lattice.k {
                return Err(bounds(format!("coord = {} outside 1..={}", term.coord, lattice.k)));
            }
            if term.z >= lattice.n_z {
                return Err(bounds(format!("z = {} exceeds n_z - 1 = {}", term.z, lattice.n_z - 1)));
            }
            if !term.re.is_finite() || !term.im.is_finite() {
                return Err(bounds("coefficient is not finite".into()));
            }
            terms.push(LaurentTerm {
                lambda_power: term.lambda,
                z_power: term.z,
                coord: term.coord - 1,
                coeff: c64::new(term.re, term.im),
            });
        }
        generators.push(LaurentPolyField::new(terms));
        labels.push(g.get_ref().label.clone());
    }

    Ok(ProblemFile {
        lattice,
        inner_tol,
        generators,
        labels,
        digest: hex::encode(Sha256::digest(text.as_bytes())),
        source: text.to_string(),
    })
}

/// Canonical TOML text of a problem (tolerances always written).
pub fn problem_to_toml(lattice: &TruncationLattice, inner_tol: f64, generators: &[LaurentPolyField], labels: &[Option<String>]) -> String {
    let doc = Document {
        schema: Spanned::new(0..0, SCHEMA.to_string()),
        lattice: Spanned::new(
            0..0,
            LatticeSpec {
                n_lambda: lattice.n_lambda,
                n_z: lattice.n_z,
                k: lattice.k,
                rank_tol: Some(lattice.rank_tol),
                orth_tol: Some(lattice.orth_tol),
                inner_tol: Some(inner_tol),
            },
        ),
        generators: generators
            .iter()
            .enumerate()
            .map(|(g, p)| {
                let terms = p
                    .terms
                    .iter()
                    .map(|t| {
                        Spanned::new(
                            0..0,
                            TermSpec { lambda: t.lambda_power, z: t.z_power, coord: t.coord + 1, re: t.coeff.re, im: t.coeff.im },
                        )
                    })
                    .collect();
                Spanned::new(0..0, GeneratorSpec { label: labels.get(g).cloned().flatten(), terms })
            })
            .collect(),
    };
    toml::to_string(&doc).expect("problem documents always serialize")
}

/// Parses `@random` or `@random:k`.
pub fn random_spec(input: &str) -> Option<CliResult<usize>> {
    let rest = input.strip_prefix("@random")?;
    if rest.is_empty() {
        return Some(Ok(RANDOM_DEFAULT_K));
    }
    Some(
        rest.strip_prefix(':')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| CliError::Usage { message: format!("bad random spec {input:?}, expected @random or @random:<k>") }),
    )
}

/// The seeded random `Ŝ`-invariant problem on the default random lattice,
/// as if read from its canonical TOML text.
pub fn random_problem_file(seed: u64, k: usize, rank_tol: f64, orth_tol: f64, inner_tol: f64) -> CliResult<ProblemFile> {
    let lattice = TruncationLattice::with_tolerances(RANDOM_N_LAMBDA, RANDOM_N_Z, k, rank_tol, orth_tol)?;
    let generators = fixtures::random_problem(seed, &lattice);
    let text = problem_to_toml(&lattice, inner_tol, &generators, &[]);
    parse_problem(&text, &format!("@random:{k} (seed {seed})"))
}
