//! Command-line front end: problem files, result persistence and reports.

pub mod commands;
pub mod error;
pub mod persist;
pub mod problem;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hardyfiber::lattice::{DEFAULT_INNER_TOL, DEFAULT_ORTH_TOL, DEFAULT_RANK_TOL};

pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_INVARIANT};
pub use problem::{load_problem, ProblemFile};
pub use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "hardyfiber", version, about = "Fibered Hardy-space decompositions on a truncated lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for the report file (and, for decompose, the result).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the problem file's rank tolerance.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true)]
    pub orth_tol: Option<f64>,
    #[arg(long, global = true)]
    pub inner_tol: Option<f64>,
    /// Worker threads for the per-fiber loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for `@random[:k]` inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ranks, S-invariance, wandering ranks, partition and full-Hardy test.
    Analyze { input: String },
    /// Factorization pipeline; persists the result with --out.
    Decompose { input: String },
    /// Inner-function representation (k = 1).
    Beurling { input: String },
    /// Recomputes the diagnostics of a persisted result.
    Verify { result: PathBuf },
    /// Ranks and spectrum of the generated range.
    Spectrum { input: String },
}

/// Loads `input` (a path, `@random` or `@random:k`) with flag overrides.
pub fn resolve_input(input: &str, cli: &Cli) -> CliResult<ProblemFile> {
    let mut problem = match problem::random_spec(input) {
        Some(k) => problem::random_problem_file(
            cli.seed,
            k?,
            cli.rank_tol.unwrap_or(DEFAULT_RANK_TOL),
            cli.orth_tol.unwrap_or(DEFAULT_ORTH_TOL),
            cli.inner_tol.unwrap_or(DEFAULT_INNER_TOL),
        )?,
        None => load_problem(Path::new(input))?,
    };
    if let Some(t) = cli.rank_tol {
        problem.lattice.rank_tol = t;
    }
    if let Some(t) = cli.orth_tol {
        problem.lattice.orth_tol = t;
    }
    if let Some(t) = cli.inner_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage { message: format!("--inner-tol must lie in (0, 1), got {t}") });
        }
        problem.inner_tol = t;
    }
    problem.lattice.validate()?;
    Ok(problem)
}

fn execute(cli: &Cli) -> CliResult<Report> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze { input } => commands::analyze(&resolve_input(input, cli)?),
        Command::Decompose { input } => commands::decompose(&resolve_input(input, cli)?, out),
        Command::Beurling { input } => commands::beurling(&resolve_input(input, cli)?),
        Command::Verify { result } => commands::verify(result),
        Command::Spectrum { input } => commands::spectrum(&resolve_input(input, cli)?),
    }
}

/// Runs a parsed command line; returns the exit status.
pub fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return EXIT_INPUT;
        }
    };
    let result = pool.install(|| execute(cli));
    let report = match result {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let (body, name) = match cli.format {
        Format::Text => (report.to_text(), "report.txt"),
        Format::Csv => (report.to_csv(), "report.csv"),
    };
    if let Some(dir) = &cli.out {
        let written = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(name), &body));
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: {}", CliError::io(dir.join(name), e));
            return EXIT_INPUT;
        }
    }
    let _ = stdout.write_all(body.as_bytes());
    if report.ok() {
        0
    } else {
        for v in &report.violations {
            let _ = writeln!(stderr, "violation: {v}");
        }
        EXIT_INVARIANT
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_cli(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            code
        }
    }
}
