use std::path::Path;
use std::process::{Command, Output};

use hodge_cstar::io::save_samples;
use hodge_cstar::torus::TorusGeometry;
use hodge_cstar::{AlgebraSpec, ModuleSpec};

const TWO_TERM: &str = r#"{"algebra":{"blocks":[1]},"modules":[{"rank":1},{"rank":1}],
    "differentials":[[[[[[[1,0]]]]]]]}"#;

// D_1 D_0 = 1 ≠ 0.
const BROKEN: &str = r#"{"algebra":{"blocks":[1]},"modules":[{"rank":1},{"rank":1},{"rank":1}],
    "differentials":[[[[[[[1,0]]]]]],[[[[[[1,0]]]]]]]}"#;

// 0 → ℂ → 0 → ℂ: one harmonic class in degrees 0 and 2.
const WITH_COHOMOLOGY: &str = r#"{"algebra":{"blocks":[1]},"modules":[{"rank":1},{"rank":0},{"rank":1}],
    "differentials":[[[]],[]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hodge-cstar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn hodge_on_two_term_isomorphism_has_no_harmonics() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "two.json", TWO_TERM);
    let o = run(&["hodge", &f]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("harmonic dimensions: (0,0)"), "{}", stdout(&o));
}

#[test]
fn hodge_reports_cohomology_of_a_zero_differential() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "gap.json", WITH_COHOMOLOGY);
    let o = run(&["hodge", &f]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("harmonic dimensions: (1,0,1)"), "{}", stdout(&o));
    let o = run(&["hodge", &f, "--degree", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("harmonic dimensions: (1)"));
}

#[test]
fn broken_complex_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.json", BROKEN);
    let o = run(&["check-complex", &f]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("degree 0"), "{err}");
}

#[test]
fn unparsable_and_missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "junk.json", "{ not json");
    assert_eq!(run(&["check-complex", &f]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["hodge", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn check_complex_accepts_valid_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "two.json", TWO_TERM);
    let o = run(&["check-complex", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result: PASS"));
}

#[test]
fn parametrix_lists_chain_map_identities() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "two.json", TWO_TERM);
    let o = run(&["parametrix", &f, "--degree", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("D_0 g_0 = g_1 D_0"), "{out}");
    assert!(out.contains("g_0△_0 + p_0 = 1"), "{out}");
    let o = run(&["parametrix", &f, "--degree", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_below_cutoff_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "two.json", TWO_TERM);
    // tol must exceed the cutoff.
    let o = run(&["--tol", "1e-12", "--cutoff", "1e-10", "hodge", &f]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn torus_demo_gives_betti_numbers_of_the_two_torus() {
    let o = run(&["torus-demo", "--n", "2", "--band", "2", "--fiber", "(2)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("harmonic A-ranks: (1,2,1)"), "{}", stdout(&o));
}

#[test]
fn torus_demo_rejects_bad_fiber() {
    let o = run(&["torus-demo", "--n", "2", "--band", "2", "--fiber", "(2,x)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn torus_demo_regularity_and_embedding_pass() {
    let o = run(&["torus-demo", "--n", "2", "--band", "2", "--fiber", "(1)", "--suite", "regularity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["torus-demo", "--n", "1", "--band", "3", "--fiber", "(2)", "--suite", "embedding"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn json_report_is_deterministic_and_versioned() {
    let args = [
        "--format", "json", "--seed", "7", "torus-demo", "--n", "1", "--band", "2", "--fiber", "(1)", "--suite",
        "regularity",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["--format", "json", "torus-demo", "--n", "1", "--band", "2", "--fiber", "(1)", "--suite", "embedding"];
    let a = bin().args(args).env("HODGE_CSTAR_THREADS", "1").output().unwrap();
    let b = bin().args(args).env("HODGE_CSTAR_THREADS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let bad = bin().args(args).env("HODGE_CSTAR_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn ellipticity_of_de_rham_symbol_samples() {
    let spec = AlgebraSpec::new(vec![2]).unwrap();
    let g = TorusGeometry::new(2, 1, ModuleSpec::free(&spec, 1)).unwrap();
    let samples: Vec<_> = [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]]
        .iter()
        .map(|xi| g.de_rham_symbol_sample(xi).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("samples.json");
    save_samples(&samples, &f).unwrap();
    let o = run(&["ellipticity", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict elliptic"));

    // ξ = 0 makes the symbol vanish, so the sequence is not exact.
    let zero = vec![g.de_rham_symbol_sample(&[0.0, 0.0]).unwrap()];
    save_samples(&zero, &f).unwrap();
    let o = run(&["ellipticity", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}
