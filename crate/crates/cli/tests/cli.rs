use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn dcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcs"))
        .args(args)
        .env_remove("DCS_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn tl() -> String {
    model("transfer_line.fsp").display().to_string()
}

#[test]
fn synth_transfer_line_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let ctrl = dir.path().join("ctrl.aut");
    let stats = dir.path().join("stats.json");
    let out = dcs(&[
        "synth",
        &tl(),
        "--param",
        "M=2",
        "--param",
        "W=1",
        "--param",
        "C=1",
        "-o",
        ctrl.to_str().unwrap(),
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let aut = std::fs::read_to_string(&ctrl).unwrap();
    assert!(aut.starts_with("des (0, 8, 7)\n"), "{aut}");

    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().next().unwrap();
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["verdict"], "controller");
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(file, v);

    let out = dcs(&["verify", &tl(), ctrl.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("accepted"));
}

#[test]
fn synth_without_file_is_usage_error() {
    let out = dcs(&["synth"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn oracle_on_uncontrolled_example_says_none() {
    let m = model("worked_example_uncontrolled.fsp");
    let out = dcs(&["oracle", m.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: none"));
    let m = model("worked_example.fsp");
    assert_eq!(code(&dcs(&["oracle", m.to_str().unwrap()])), 0);
}

#[test]
fn outputs_are_deterministic() {
    for format in ["aut", "dot", "json"] {
        let args = ["synth", &tl(), "--param", "M=3", "--format", format];
        let a = dcs(&args);
        let b = dcs(&args);
        assert_eq!(code(&a), 0);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
    let a = dcs(&["compose", &tl()]);
    assert_eq!(a.stdout, dcs(&["compose", &tl()]).stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("des (0, 154, 82)"));
}

#[test]
fn caps_exit_three() {
    let out = dcs(&["synth", &tl(), "--param", "M=6", "--max-expansions", "3"]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("\"verdict\":\"expansion-limit\""),
        "{stderr}"
    );
    assert!(stderr.contains("error[E-CAP]"));
    let out = dcs(&["compose", &tl(), "--max-states", "10"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn diagnostics_carry_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fsp");
    std::fs::write(&bad, "P = (a -> ).").unwrap();
    let out = dcs(&["synth", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E-PARSE]: line 1"));

    let unbound = dir.path().join("unbound.fsp");
    std::fs::write(&unbound, "P = (a[N] -> P).").unwrap();
    let out = dcs(&["synth", unbound.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E-ELAB]"));

    let out = dcs(&["synth", "/nonexistent/model.fsp"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E-IO]"));

    let junk = dir.path().join("junk.aut");
    std::fs::write(&junk, "not an automaton").unwrap();
    let out = dcs(&["verify", &tl(), junk.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E-AUT]"));
}

#[test]
fn verify_rejects_a_bad_controller() {
    let dir = tempfile::tempdir().unwrap();
    let ctrl = dir.path().join("c.aut");
    // Stops after the first part is fetched.
    std::fs::write(&ctrl, "des (0, 1, 2)\n(0,\"get.0\",1)\n").unwrap();
    let out = dcs(&["verify", &tl(), ctrl.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rejected"));
}

#[test]
fn graph_at_named_state() {
    let at = "Working[0],At[0],Working[0],At[0],Testing";
    let out = dcs(&["graph", &tl(), "--at", at]);
    assert_eq!(code(&out), 0);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("TU:Testing"));
    assert_eq!(code(&dcs(&["graph", &tl(), "--at", "0,0"])), 2);
}

#[test]
fn bench_writes_csv() {
    let out = dcs(&["bench", "--config", "2,1,1", "--engine", "both"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,1,1,dcs,controller,"));
    assert!(lines[2].starts_with("2,1,1,monolithic,controller,"));
}
