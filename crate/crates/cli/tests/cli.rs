use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.cdpcf"))
}

fn cdpcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdpcf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes `text` to a file unique to this test and returns its path.
fn scratch_file(tag: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("cdpcf-cli-{}-{tag}.cdpcf", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_det_prints_result_and_steps() {
    let o = cdpcf(&["run", corpus("t").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "result: 5\nsteps: 12\n");
}

#[test]
fn run_multiset_agrees_with_det() {
    let f = corpus("iter");
    let det = cdpcf(&["run", f.to_str().unwrap(), "--machine", "det"]);
    let ms = cdpcf(&["run", f.to_str().unwrap(), "--machine", "multiset"]);
    assert_eq!(stdout(&det), stdout(&ms));
    assert!(stdout(&ms).starts_with("result: 2\n"));
}

#[test]
fn zero_outcome() {
    let o = cdpcf(&["run", corpus("micro_inj_mismatch").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "result: zero\n");
}

#[test]
fn divergence_times_out_with_code_two() {
    let f = corpus("omega");
    for machine in ["det", "multiset"] {
        let o = cdpcf(&["run", f.to_str().unwrap(), "--machine", machine, "--fuel", "200"]);
        assert_eq!(o.status.code(), Some(2), "{machine}");
        assert_eq!(stdout(&o), "timeout\n");
    }
}

#[test]
fn trace_goes_to_the_requested_stream() {
    let f = corpus("micro_succ");
    let o = cdpcf(&["run", f.to_str().unwrap(), "--trace", "stdout"]);
    let out = stdout(&o);
    assert!(out.lines().count() > 2, "{out}");
    assert!(out.ends_with("result: 4\nsteps: 4\n"));
    let quiet = cdpcf(&["run", f.to_str().unwrap(), "--trace"]);
    assert_eq!(stdout(&quiet), "result: 4\nsteps: 4\n");
    assert!(!quiet.stderr.is_empty());
}

#[test]
fn typecheck_prints_the_type() {
    let o = cdpcf(&["typecheck", corpus("dt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(Nat -> D Nat) -> Nat -> D Nat");
}

#[test]
fn type_errors_exit_with_one() {
    let p = scratch_file("illtyped", "succ[0] (\\x:Nat. x)");
    let o = cdpcf(&["typecheck", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let _ = std::fs::remove_file(p);
}

#[test]
fn parse_errors_exit_with_one() {
    let p = scratch_file("garbled", "(\\x:Nat. ");
    let o = cdpcf(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let _ = std::fs::remove_file(p);
}

#[test]
fn wrong_declared_type_is_a_mismatch() {
    let p = scratch_file("wrongty", "# expect-type: Nat\n\\x:Nat. x");
    let o = cdpcf(&["typecheck", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let _ = std::fs::remove_file(p);
}

#[test]
fn interp_finds_the_value() {
    let o = cdpcf(&["interp", corpus("iter").to_str().unwrap()]);
    assert_eq!(stdout(&o), "{2}\n");
    let o = cdpcf(&["interp", corpus("omega").to_str().unwrap(), "--nu-bound", "4"]);
    assert_eq!(stdout(&o), "{}\n");
}

#[test]
fn check_sim_reports_agreement() {
    let o = cdpcf(&["check-sim", corpus("t_lin").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "agree: result: 3 in 24 steps\n");
}

#[test]
fn reduce_prints_steps() {
    let o = cdpcf(&["reduce", corpus("micro_succ").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("normal form after"));
    assert!(stdout(&o).trim_end().ends_with('4'), "{}", stdout(&o));
}

#[test]
fn diff_prints_the_differential() {
    let p = scratch_file("diffvar", "succ[0] x");
    let o = cdpcf(&["diff", p.to_str().unwrap(), "--var", "x"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).trim().is_empty());
    let _ = std::fs::remove_file(p);
}
