use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lldforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn lldforge")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn tmp(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("lldforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gallery_alt4_piped_into_urk() {
    let g = run(&["gallery", "alt4"]);
    assert!(g.status.success());
    let u = run_stdin(&["urk", "-"], &g.stdout);
    assert_eq!(u.status.code(), Some(0));
    assert_eq!(stdout(&u).trim(), "4");
}

#[test]
fn quaternion_hyperplane_verify() {
    let o = run(&["hyperplane", &data("quat.twisted"), "--alpha", "-1", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "mrk=8 certified=positive-definite");
}

#[test]
fn represented_alpha_is_a_violation() {
    // 2 = 1 + 1 is a value of the quaternion norm
    let o = run(&["hyperplane", &data("quat.twisted"), "--alpha", "2", "--verify"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_suite_flanders() {
    let o = run(&["verify-suite", "--filter", "flanders"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS flanders"));
}

#[test]
fn verify_suite_unknown_filter() {
    assert_eq!(run(&["verify-suite", "--filter", "no-such-scenario"]).status.code(), Some(2));
}

#[test]
fn malformed_field_line_is_an_input_error() {
    let p = tmp("bad.matspace", "matspace v1\nfield R\ndims 1 1\nbasis 0\n");
    let o = run(&["urk", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(run(&["flanders"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn small_field_counterexample_is_refused() {
    let o = run(&["flanders", &data("smallfield-f2.matspace"), "--r", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("#K > r"));
}

#[test]
fn check_lld_json() {
    let o = run(&["--json", "check-lld", &data("mata4-f2.matspace"), "--c", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["c_max"], 3);
    assert_eq!(run(&["check-lld", &data("mata4-f2.matspace"), "--c", "4"]).status.code(), Some(1));
}

#[test]
fn build_algebra_then_twisted() {
    let a = run(&["build", "algebra", "quaternion:-1,-1"]);
    assert!(a.status.success());
    let p = tmp("q.ldb", &stdout(&a));
    let t = run(&["build", "twisted", &p]);
    assert!(t.status.success());
    assert_eq!(stdout(&t), std::fs::read_to_string(data("quat.twisted")).unwrap());
}

#[test]
fn closure_over_f9_is_exact() {
    let o = run(&["--json", "closure", &data("f9.matspace")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["dim"], 6);
    assert_eq!(v["exact"], true);
}

#[test]
fn rectify_rejects_axis_in_k2() {
    let o = run(&["rectify", &data("quat.twisted"), "--axis", "0,0,0,0,1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rectify", &data("quat.twisted"), "--axis", "0,1,0,0,2,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# H"));
}

#[test]
fn extract_gaussian_and_emit() {
    let out = std::env::temp_dir().join(format!("lldforge-emit-{}.ldb", std::process::id()));
    let o = run(&[
        "extract",
        &data("gaussian-scrambled.matspace"),
        "--hyperplane",
        &data("gaussian-scrambled-h.matspace"),
        "--emit-algebra",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("ldb v1\nfield Q\ndim 2\n"));
}

#[test]
fn bad_thread_count() {
    let o = bin().env("LLDFORGE_THREADS", "zero").args(["urk", &data("f9.matspace")]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
