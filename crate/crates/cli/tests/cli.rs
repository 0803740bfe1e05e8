use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn hardyfiber(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardyfiber")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_constant_field_is_full_hardy() {
    let p = problem("constant.toml");
    let o = hardyfiber(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("J_R = 1 1 1 1 1 1 1 1\n"), "{text}");
    assert!(text.contains("A_1 = 0 1 2 3 4 5 6 7\n"));
    assert!(text.contains("s_invariant = true\n"));
    assert!(text.contains("full_hardy = true\n"));
}

#[test]
fn even_fibers_split_the_spectrum() {
    let p = problem("even_fibers.toml");
    let o = hardyfiber(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("J_R = 2 1 2 1 2 1 2 1\n"), "{text}");
    assert!(text.contains("full_hardy = false\n"));
}

#[test]
fn decompose_then_verify_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result");
    let p = problem("even_fibers.toml");
    let o = hardyfiber(&["decompose", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for file in ["manifest.toml", "problem.toml", "jm.bin", "base.bin", "f.bin", "frames.bin", "report.txt"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    assert_eq!(std::fs::read_to_string(out.join("report.txt")).unwrap(), stdout(&o));

    let v = hardyfiber(&["verify", out.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stderr));
    assert!(stdout(&v).contains("stored_drift = 0.000000e0\n"), "{}", stdout(&v));
}

#[test]
fn verify_rejects_a_corrupted_result() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("constant.toml");
    assert_eq!(hardyfiber(&["decompose", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]).status.code(), Some(0));
    let f = dir.path().join("f.bin");
    let mut bytes = std::fs::read(&f).unwrap();
    bytes.truncate(bytes.len() - 8);
    std::fs::write(&f, bytes).unwrap();
    assert_eq!(hardyfiber(&["verify", dir.path().to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn beurling_recovers_the_blaschke_factor() {
    let p = problem("blaschke.toml");
    let o = hardyfiber(&["beurling", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let defect: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("inner_defect = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(defect < 1e-8, "{text}");
}

#[test]
fn beurling_needs_a_single_coordinate() {
    let p = problem("constant.toml");
    let o = hardyfiber(&["beurling", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_of_range_terms_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(
        &p,
        "schema = \"hardyfiber-problem/1\"\n[lattice]\nn_lambda = 4\nn_z = 8\nk = 1\n\n[[generator]]\nterms = [{ z = 9, coord = 1, re = 1.0 }]\n",
    )
    .unwrap();
    let o = hardyfiber(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml") && err.contains("line 8"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_with_input_error() {
    assert_eq!(hardyfiber(&["analyze", "/nonexistent/p.toml"]).status.code(), Some(3));
    assert_eq!(hardyfiber(&["analyze", "@random:2", "--threads", "many"]).status.code(), Some(3));
    assert_eq!(hardyfiber(&["analyze", "@random:0"]).status.code(), Some(3));
}

#[test]
fn csv_has_a_row_per_fiber() {
    let p = problem("even_fibers.toml");
    let o = hardyfiber(&["decompose", p.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("fiber,theta_over_2pi,rank_jm,rank_jr,class,band,"));
    assert!(lines[2].starts_with("1,1.250000e-1,"));
}

#[test]
fn spectrum_lists_supported_fibers() {
    let p = problem("even_fibers.toml");
    let text = stdout(&hardyfiber(&["spectrum", p.to_str().unwrap()]));
    assert!(text.contains("size = 8\n"), "{text}");
}

#[test]
fn random_inputs_are_reproducible_across_thread_counts() {
    let a = hardyfiber(&["decompose", "@random:2", "--seed", "5", "--threads", "1"]);
    let b = hardyfiber(&["decompose", "@random:2", "--seed", "5", "--threads", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = hardyfiber(&["decompose", "@random:2", "--seed", "6", "--threads", "1"]);
    assert_ne!(a.stdout, c.stdout);
}
