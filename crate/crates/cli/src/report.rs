//! Deterministic reports: every value is formatted with a fixed precision and
//! every list is in grid order, so equal inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write;

use hardyfiber::TruncationLattice;

pub const REPORT_FORMAT: &str = "hardyfiber-report/1";

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Per-fiber column of a report.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Count(Vec<usize>),
    Residual(Vec<f64>),
}

impl Column {
    fn cell(&self, m: usize) -> String {
        match self {
            Column::Count(v) => v[m].to_string(),
            Column::Residual(v) => sci(v[m]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub lattice: TruncationLattice,
    pub inner_tol: f64,
    pub ranks_jm: Vec<usize>,
    /// Wandering ranks; absent when the range is not `S`-invariant.
    pub ranks_jr: Option<Vec<usize>>,
    pub spectrum: Vec<usize>,
    pub checks: Vec<(String, bool)>,
    pub values: Vec<(String, f64)>,
    pub columns: Vec<(String, Column)>,
    /// Failed invariants; nonempty means exit status 2.
    pub violations: Vec<String>,
}

pub fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn joined(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

impl Report {
    pub fn new(command: &str, input_digest: &str, lattice: TruncationLattice, inner_tol: f64, ranks_jm: Vec<usize>) -> Self {
        let spectrum = ranks_jm.iter().enumerate().filter(|(_, &r)| r > 0).map(|(m, _)| m).collect();
        Report {
            command: command.to_string(),
            input_digest: input_digest.to_string(),
            lattice,
            inner_tol,
            ranks_jm,
            ranks_jr: None,
            spectrum,
            checks: Vec::new(),
            values: Vec::new(),
            columns: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records `value` and a violation when it exceeds `tol`.
    pub fn bounded(&mut self, name: &str, value: f64, tol: f64) {
        self.values.push((name.to_string(), value));
        if !(value <= tol) {
            self.violations.push(format!("{name} = {} exceeds {}", sci(value), sci(tol)));
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, violation: impl FnOnce() -> String) {
        self.checks.push((name.to_string(), passed));
        if !passed {
            self.violations.push(violation());
        }
    }

    /// Partition classes `A_n`, ordered by `n`.
    pub fn classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (m, &n) in self.ranks_jr.iter().flatten().enumerate() {
            classes.entry(n).or_default().push(m);
        }
        classes
    }

    pub fn to_text(&self) -> String {
        let lat = &self.lattice;
        let mut s = String::new();
        let _ = writeln!(s, "format = {REPORT_FORMAT}");
        let _ = writeln!(s, "tool_version = {}", tool_version());
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "input_sha256 = {}", self.input_digest);
        let _ = writeln!(s, "\n[lattice]");
        let _ = writeln!(s, "n_lambda = {}\nn_z = {}\nk = {}", lat.n_lambda, lat.n_z, lat.k);
        let _ = writeln!(s, "rank_tol = {}\north_tol = {}\ninner_tol = {}", sci(lat.rank_tol), sci(lat.orth_tol), sci(self.inner_tol));
        let _ = writeln!(s, "\n[ranks]");
        let _ = writeln!(s, "J_M = {}", joined(&self.ranks_jm));
        if let Some(jr) = &self.ranks_jr {
            let _ = writeln!(s, "J_R = {}", joined(jr));
            let _ = writeln!(s, "\n[partition]");
            for (n, fibers) in self.classes() {
                let _ = writeln!(s, "A_{n} = {}", joined(&fibers));
            }
        }
        let _ = writeln!(s, "\n[spectrum]");
        let _ = writeln!(s, "size = {}", self.spectrum.len());
        let _ = writeln!(s, "fibers = {}", joined(&self.spectrum));
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\n[checks]");
            for (name, passed) in &self.checks {
                let _ = writeln!(s, "{name} = {passed}");
            }
        }
        if !self.values.is_empty() {
            let _ = writeln!(s, "\n[diagnostics]");
            for (name, v) in &self.values {
                let _ = writeln!(s, "{name} = {}", sci(*v));
            }
        }
        let _ = writeln!(s, "\n[status]");
        let _ = writeln!(s, "result = {}", if self.ok() { "ok" } else { "violated" });
        for v in &self.violations {
            let _ = writeln!(s, "violation = {v}");
        }
        s
    }

    /// One row per fiber: index, grid angle, ranks, partition class and the
    /// per-fiber columns.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fiber,theta_over_2pi,rank_jm,rank_jr,class");
        for (name, _) in &self.columns {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for m in 0..self.lattice.n_lambda {
            let jr = self.ranks_jr.as_ref().map(|r| r[m].to_string()).unwrap_or_default();
            let _ = write!(s, "{m},{},{},{jr},{}", sci(m as f64 / self.lattice.n_lambda as f64), self.ranks_jm[m], jr);
            for (_, col) in &self.columns {
                s.push(',');
                s.push_str(&col.cell(m));
            }
            s.push('\n');
        }
        s
    }
}
