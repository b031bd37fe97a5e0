use std::path::Path;
use std::process::{Command, Output};

use rankscatter::report::Report;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankscatter")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tamper(src: &Path, dst: &Path, edit: impl FnOnce(&mut Value)) {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    edit(&mut v);
    std::fs::write(dst, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&["bogus"]), 3);
    assert_eq!(code(&["construct"]), 3);
    assert_eq!(code(&["construct", "--n", "4", "--q", "6"]), 3);
}

#[test]
fn vacuous_family_needs_force() {
    let base = ["verify-scattered", "--n", "8", "--m", "3", "--h", "1", "--alphas", "1,1,1"];
    assert_eq!(code(&base), 4);
    let mut forced = base.to_vec();
    forced.extend(["--force", "--mode", "sampled", "--budget", "50"]);
    assert_eq!(code(&forced), 2);
}

#[test]
fn construct_then_verify_from_generators() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    assert_eq!(code(&["construct", "--n", "4", "--system", "pseudoregulus", "--h", "1", "--out", p(&c)]), 0);
    let report = Report::read(&c).unwrap();
    let sys = report.system.as_ref().unwrap();
    assert_eq!((sys.k, sys.t, sys.spans_ambient), (2, 4, true));

    let v = dir.path().join("v.json");
    let args = ["verify-scattered", "--n", "4", "--system", "generators", "--generators", p(&c), "--dim", "1"];
    let mut with_out = args.to_vec();
    with_out.extend(["--mode", "exhaustive", "--out", p(&v)]);
    assert_eq!(code(&with_out), 0);
    let verdict = Report::read(&v).unwrap();
    assert_eq!(verdict.result["status"], "holds");
    assert_eq!(code(&["recheck", p(&v)]), 0);

    // a generators file over another field is rejected
    assert_eq!(code(&["verify-scattered", "--n", "5", "--system", "generators", "--generators", p(&c), "--dim", "1"]), 3);
}

#[test]
fn recheck_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    assert_eq!(code(&["construct", "--n", "4", "--system", "pseudoregulus", "--h", "1", "--out", p(&c)]), 0);
    assert_eq!(code(&["recheck", p(&c)]), 0);
    let bad = dir.path().join("bad.json");
    tamper(&c, &bad, |v| v["system"]["generators"][0][1] = serde_json::json!([1, 1, 0, 0]));
    assert_eq!(code(&["recheck", p(&bad)]), 1);

    let line = dir.path().join("line.json");
    assert_eq!(code(&["verify-scattered", "--n", "4", "--system", "line", "--dim", "1", "--mode", "exhaustive", "--out", p(&line)]), 1);
    assert_eq!(code(&["recheck", p(&line)]), 0);
    tamper(&line, &bad, |v| v["result"]["witness"]["weight"] = 3.into());
    assert_eq!(code(&["recheck", p(&bad)]), 1);
    tamper(&line, &bad, |v| v["result"]["witness"]["h_basis"][0][1] = serde_json::json!([0, 1, 0, 0]));
    assert_eq!(code(&["recheck", p(&bad)]), 1);

    assert_eq!(code(&["recheck", p(&dir.path().join("missing.json"))]), 3);
}

#[test]
fn weights_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let out = dir.path().join("w.json");
    let args = ["weights", "--n", "4", "--system", "pseudoregulus", "--h", "1", "--csv", p(&csv), "--out", p(&out)];
    assert_eq!(code(&args), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho,value,provenance,lower,upper,subspaces_checked");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("2,4,exact,"));
    assert_eq!(code(&["recheck", p(&out)]), 0);

    let bad = dir.path().join("bad.json");
    tamper(&out, &bad, |v| v["result"]["profile"]["entries"][0]["value"] = 2.into());
    assert_eq!(code(&["recheck", p(&bad)]), 1);
}

#[test]
fn timing_is_outside_the_body() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["verify-evasive", "--n", "6", "--system", "pseudoregulus", "--h", "2", "--dim", "2", "--r", "3"];
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let mut args = base.to_vec();
        args.extend(["--mode", "exhaustive", "--workers", workers, "--out", p(path)]);
        let c = code(&args);
        assert!(c == 0 || c == 1, "exit {c}");
    }
    let (ra, rb) = (Report::read(&a).unwrap(), Report::read(&b).unwrap());
    assert_eq!(ra.body(), rb.body());
    assert_eq!(rb.timing.workers, 3);
}
