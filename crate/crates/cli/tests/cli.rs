use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn csent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csent")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("csent-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no `{key}` in {report}"))
        .to_string()
}

#[test]
fn bures_entanglement_of_shipped_bell_state() {
    let o = csent(&["compute", "bures-entanglement", &data("bell.state"), "--seed", "1", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let v: f64 = field(&out, "value").parse().unwrap();
    assert!((v - (2.0 - 2f64.sqrt())).abs() < 1e-6, "{v}");
    assert_eq!(field(&out, "bound_direction"), "upper-bound");
    assert_eq!(field(&out, "certificate_sha256").len(), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("runtime_seconds"));
}

#[test]
fn compute_is_deterministic_and_json_is_available() {
    let args = ["compute", "cse-bures", &data("bell.state"), "--seed", "9", "--restarts", "2"];
    let a = csent(&args);
    let b = csent(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut j = args.to_vec();
    j.push("--json");
    let o = csent(&j);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["measure"], "cse-bures");
    assert_eq!(v["config"]["seed"], 9);
}

#[test]
fn malformed_row_exits_with_input_error() {
    let text = std::fs::read_to_string(data("bell.state")).unwrap();
    let bad = text.replacen("[[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]", "[[0.0,0.0],[0.0,0.0],[0.0,0.0]]", 1);
    let p = scratch("short-row.state");
    std::fs::write(&p, bad).unwrap();
    let o = csent(&["compute", "bures-discord", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
}

#[test]
fn syntax_error_reports_position() {
    let p = scratch("syntax.state");
    std::fs::write(&p, "{\n  \"version\": 1,\n  \"layout\": [,]\n}\n").unwrap();
    let o = csent(&["compute", "hs-discord", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn negative_eigenvalue_exits_with_validation_error() {
    // diag(1.1, -0.1) on a qubit pair
    let text = r#"{"version":1,"layout":[{"label":"a","dim":2,"party":"A"},{"label":"b","dim":1,"party":"B"}],
        "matrix":[[[1.1,0.0],[0.0,0.0]],[[0.0,0.0],[-0.1,0.0]]]}"#;
    let p = scratch("indefinite.state");
    std::fs::write(&p, text).unwrap();
    let o = csent(&["compute", "bures-entanglement", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("psd"));
}

#[test]
fn unknown_names_exit_with_input_error() {
    assert_eq!(csent(&["verify", "theorem9"]).status.code(), Some(2));
    assert_eq!(csent(&["compute", "negativity", &data("bell.state")]).status.code(), Some(2));
    let p = scratch("never.state");
    assert_eq!(csent(&["gen", "ghz", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(csent(&["gen", "werner", p.to_str().unwrap(), "--param", "p=3"]).status.code(), Some(2));
    assert_eq!(csent(&["compute", "cse-hs", &data("bell.state"), "--restarts", "0"]).status.code(), Some(2));
}

#[test]
fn gen_round_trips_and_is_seeded() {
    let (a, b) = (scratch("mixed-a.state"), scratch("mixed-b.state"));
    for p in [&a, &b] {
        let o = csent(&["gen", "random-mixed", p.to_str().unwrap(), "--param", "rank=2", "--seed", "4"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let parsed = csent_cli::statefile::StateFile::parse(&text).unwrap();
    assert_eq!(parsed.to_text(), text);
    let meta = parsed.metadata.unwrap();
    assert_eq!((meta.family.as_str(), meta.seed, meta.params["rank"]), ("random-mixed", Some(4), 2.0));
}

#[test]
fn cc_family_has_no_discord() {
    let p = scratch("cc.state");
    assert_eq!(csent(&["gen", "cc", p.to_str().unwrap(), "--seed", "2"]).status.code(), Some(0));
    let o = csent(&["compute", "bures-discord", p.to_str().unwrap(), "--restarts", "4"]);
    let v: f64 = field(&stdout(&o), "value").parse().unwrap();
    assert!(v <= 1e-6, "{v}");
}

#[test]
fn fidelity_pair_uses_second_file() {
    let p = scratch("werner.state");
    csent(&["gen", "werner", p.to_str().unwrap(), "--param", "p=1"]);
    // Ψ⁻ against Φ⁺
    let o = csent(&["compute", "fidelity-pair", &data("bell.state"), "--other", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = field(&stdout(&o), "value").parse().unwrap();
    assert!(v.abs() < 1e-7, "{v}");
    assert_eq!(csent(&["compute", "fidelity-pair", &data("bell.state")]).status.code(), Some(2));
}

#[test]
fn verify_hs_noncontractive_prints_witness() {
    let o = csent(&["verify", "hs-noncontractive"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("hs_before = 1.00000000000000000e0"));
    assert!(out.contains("hs_after = 1.41421356237309515e0"));
    assert!(out.ends_with("result pass\n"));
}

#[test]
fn verify_fast_mode_runs_reduced_suite() {
    let o = csent(&["verify", "distances", "--fast", "--seed", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["fast_mode"], true);
    assert_eq!(v["checks"][0]["trials"], 100);
}
