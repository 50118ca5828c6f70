use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn maxwist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxwist")).args(args).output().expect("failed to spawn maxwist")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = maxwist(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn exit_code(args: &[&str]) -> i32 {
    maxwist(args).status.code().expect("terminated by signal")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let path = dir.path().join(name);
    let path = path.to_str().unwrap();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path]);
    ok(&full);
    path.to_owned()
}

fn header(text: &str) -> &str {
    text.lines().next().unwrap()
}

const K4: &str = "4 6\n1 1 1 1\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
const K5: &str = "5 10\n1 1 1 1 1\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";

#[test]
fn gen_prism_matches_golden() {
    assert_eq!(ok(&["gen", "--family", "prism"]), fs::read_to_string(golden("prism.graph")).unwrap());
}

#[test]
fn gen_is_reproducible() {
    let args = ["gen", "--family", "cubic-random", "--n", "40", "--weights", "uniform:50", "--seed", "11"];
    assert_eq!(ok(&args), ok(&args));
    let other = ok(&["gen", "--family", "cubic-random", "--n", "40", "--weights", "uniform:50", "--seed", "12"]);
    assert_ne!(ok(&args), other);
}

#[test]
fn cubic_on_k4() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", K4);
    let out = ok(&["solve", "--algo", "cubic", "--input", &input]);
    assert_eq!(header(&out), "internal 2 total 4 bound 0/1 n 4 m 6 algo cubic");
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn clawfree_on_unit_k5() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k5.graph", K5);
    let out = ok(&["solve", "--algo", "clawfree", "--input", &input]);
    assert_eq!(header(&out), "internal 3 total 5 bound 12/25 n 5 m 10 algo clawfree");
}

#[test]
fn clawfree_on_weighted_k5_matches_golden() {
    let input = golden("k5.graph");
    let out = ok(&["solve", "--algo", "clawfree", "--input", input.to_str().unwrap()]);
    assert_eq!(out, fs::read_to_string(golden("k5.clawfree")).unwrap());
}

#[test]
fn exact_on_prism() {
    let input = golden("prism.graph");
    let out = ok(&["solve", "--algo", "exact", "--input", input.to_str().unwrap()]);
    assert_eq!(header(&out), "internal 4 total 6 bound 0/1 n 6 m 9 algo exact");
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", K4);
    let target = dir.path().join("tree.txt");
    let printed = ok(&["solve", "--algo", "cubic", "--input", &input, "--output", target.to_str().unwrap()]);
    assert!(printed.is_empty());
    assert!(fs::read_to_string(&target).unwrap().starts_with("internal 2 total 4"));
}

#[test]
fn round_trip_gen_solve_verify() {
    let dir = TempDir::new().unwrap();
    let cases: &[(&str, &str, &[&str])] = &[
        ("cubic", "cubic", &["--family", "cubic-random", "--n", "60"]),
        ("cubic", "cubic", &["--family", "prism"]),
        ("cubic", "cubic", &["--family", "petersen"]),
        ("clawfree", "clawfree", &["--family", "line-graph-of-cubic-random", "--n", "20"]),
        ("clawfree", "clawfree", &["--family", "complete", "--n", "7"]),
        ("exact", "none", &["--family", "complete", "--n", "6"]),
    ];
    for (i, &(algo, kind, family)) in cases.iter().enumerate() {
        for weights in ["unit", "uniform:100", "zero-one:0.5"] {
            for seed in ["0", "1", "7"] {
                let mut args = family.to_vec();
                args.extend_from_slice(&["--weights", weights, "--seed", seed]);
                let graph = gen(&dir, &format!("g{i}.graph"), &args);
                let tree = dir.path().join(format!("t{i}.txt"));
                let tree = tree.to_str().unwrap();
                ok(&["solve", "--algo", algo, "--input", &graph, "--output", tree]);
                let report = ok(&["verify", "--input", &graph, "--tree", tree, "--kind", kind]);
                assert!(report.contains("is_spanning true"), "{algo} {family:?} {weights} {seed}: {report}");
                assert!(report.contains("bound_satisfied true"), "{algo} {family:?} {weights} {seed}: {report}");
                assert!(report.ends_with("violations 0\n"), "{report}");
            }
        }
    }
}

#[test]
fn verify_reports_bad_tree() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", K4);
    let tree = write(&dir, "cycle.txt", "0 1\n1 2\n0 2\n");
    let out = maxwist(&["verify", "--input", &input, "--tree", &tree, "--kind", "cubic"]);
    assert_eq!(out.status.code(), Some(3));
    let report = stdout(&out);
    assert!(report.contains("is_spanning false"), "{report}");
    assert!(!report.contains("violations 0"), "{report}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", K4);
    let missing = dir.path().join("missing.graph");
    let missing = missing.to_str().unwrap();
    let garbage = write(&dir, "bad.graph", "4 6\n1 1\n");
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", &input, "--bogus"]), 2);
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", missing]), 2);
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", &garbage]), 2);
    assert_eq!(exit_code(&["solve", "--algo", "clawfree", "--input", &input, "--epsilon", "0.6"]), 2);
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", &input, "--epsilon", "abc"]), 2);
    assert_eq!(exit_code(&["solve", "--algo", "exact", "--input", &input, "--epsilon", "0.1"]), 2);
    let trace = dir.path().join("trace.txt");
    let trace = trace.to_str().unwrap();
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", &input, "--trace", trace]), 2);
    assert_eq!(exit_code(&["gen", "--family", "wheel"]), 2);
    assert_eq!(exit_code(&["gen", "--family", "cubic-random", "--n", "7"]), 2);
    assert_eq!(exit_code(&["bench", "--family", "prism", "--sizes", "10"]), 2);
}

#[test]
fn precondition_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let k5 = write(&dir, "k5.graph", K5);
    let out = maxwist(&["solve", "--algo", "cubic", "--input", &k5]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not cubic"));
    let star = gen(&dir, "k13.graph", &["--family", "k13"]);
    assert_eq!(exit_code(&["solve", "--algo", "clawfree", "--input", &star]), 3);
}

#[test]
fn epsilon_selects_branch() {
    let dir = TempDir::new().unwrap();
    let k4 = write(&dir, "k4.graph", K4);
    let k5 = write(&dir, "k5.graph", K5);
    let prism = golden("prism.graph");
    let prism = prism.to_str().unwrap();
    assert!(header(&ok(&["solve", "--algo", "cubic", "--input", &k4, "--epsilon", "0.5"])).ends_with("algo exact"));
    let out = ok(&["solve", "--algo", "cubic", "--input", prism, "--epsilon", "2/5"]);
    assert!(header(&out).starts_with("internal 4 "), "{out}");
    let out = ok(&["solve", "--algo", "clawfree", "--input", &k5, "--epsilon", "0.3"]);
    assert!(header(&out).starts_with("internal 3 "), "{out}");
}

#[test]
fn trace_file_is_written() {
    let dir = TempDir::new().unwrap();
    let graph = gen(&dir, "lg.graph", &["--family", "line-graph-of-cubic-random", "--n", "12", "--seed", "3"]);
    let trace = dir.path().join("trace.txt");
    ok(&["solve", "--algo", "clawfree", "--input", &graph, "--trace", trace.to_str().unwrap()]);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(!text.trim().is_empty());
}

#[test]
fn dot_output() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", K4);
    let out = ok(&["solve", "--algo", "cubic", "--input", &input, "--dot"]);
    assert!(out.starts_with("graph T {"), "{out}");
    assert!(out.trim_end().ends_with('}'));
}

#[test]
fn decimal_weights_are_scaled() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k4.graph", "4 6\n0.5 1.25 2 0\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    assert_eq!(exit_code(&["solve", "--algo", "cubic", "--input", &input]), 2);
    let out = ok(&["solve", "--algo", "exact", "--input", &input, "--decimals", "2"]);
    assert_eq!(header(&out), "internal 325 total 375 bound 0/1 n 4 m 6 algo exact");
}

#[test]
fn bench_prints_csv() {
    let out = ok(&["bench", "--sizes", "100,200", "--repeats", "1"]);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "n,millis");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("100,") && lines[2].starts_with("200,"));
}
