use std::path::Path;
use std::process::{Command, Output};

use nscert::io;
use nscert::polytope::BoxVector;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nscert")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pr_box_is_a_vertex() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pr.json", &io::box_to_json(&BoxVector::pr_box()));
    let out = run(&["vertex-check", "--box", &f]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["is_vertex"], true);
    assert_eq!(r["rank"], 16);
    assert_eq!(r["mode"], "rational");

    let out = run(&["local-check", "--box", &f]);
    assert_eq!(out.status.code(), Some(1));

    let u = write(&dir, "u.json", &io::box_to_json(&BoxVector::uniform(nscert::scenario::SequentialScenario::chsh())));
    let out = run(&["vertex-check", "--box", &u]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["is_vertex"], false);
    assert_eq!(run(&["local-check", "--box", &u]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", "{ \"scenario\": ");
    let out = run(&["vertex-check", "--box", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["vertex-check", "--box", "/nonexistent/box.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-verb"]).status.code(), Some(2));
    let wrong_len = write(
        &dir,
        "short.json",
        r#"{"scenario":{"runs_a":1,"runs_b":1,"inputs":2,"outputs":2},"mode":"rational","entries":["1"]}"#,
    );
    assert_eq!(run(&["validate-box", "--box", &wrong_len]).status.code(), Some(2));
}

#[test]
fn ghz_demo_reports_the_gap() {
    let out = run(&["ghz-demo"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let text = r.to_string();
    assert!(text.contains("2 + 1/2*sqrt(10)"), "{text}");
    assert!(r["mode"].is_string());
}

#[test]
fn artifacts_are_byte_stable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["enum-vertices", "--runs", "1", "--out", path_str(p)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(ta.ends_with(b"\n"));

    let asm = dir.path().join("ghz.json");
    assert_eq!(run(&["asm-realize", "--out", path_str(&asm)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&asm).unwrap();
    let parsed = io::assemblage_from_json(&text).unwrap();
    assert_eq!(io::assemblage_to_json(&parsed), text);
    let out = run(&["asm-lhs", "--assemblage", path_str(&asm)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["asm-inflexible", "--assemblage", path_str(&asm)]).status.code(), Some(0));
}

#[test]
fn rationals_are_canonicalized() {
    let text = r#"{"scenario":{"runs_a":1,"runs_b":1,"inputs":2,"outputs":2},"mode":"rational","entries":["3/6","0","0","1/2","3/6","0","0","1/2","1/2","0","0","1/2","0","2/4","1/2","0"]}"#;
    let p = io::box_from_json(text).unwrap();
    let out = io::box_to_json(&p);
    assert!(out.contains("\"1/2\"") && !out.contains("3/6") && !out.contains("2/4"));
    assert_eq!(io::box_to_json(&io::box_from_json(&out).unwrap()), out);
    assert_eq!(p, BoxVector::pr_box());
}

#[test]
fn theta_check_on_pr_box_is_negative() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pr.json", &io::box_to_json(&BoxVector::pr_box()));
    let out = run(&["theta-check", "--box", &f, "--max-iter", "5000"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "Infeasible");
}
