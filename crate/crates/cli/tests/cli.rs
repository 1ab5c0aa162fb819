use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pseudoflat"));
    c.env_remove("PSEUDOFLAT_OUT");
    c
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn grid3_run_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid3.json", r#"{"scenario": "grid-lines", "sizes": [3]}"#);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "grid-lines,9,20,3,8,48,0"), "{csv}");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"scenario": "grid-lines", "sizes": [3], "outputs": {"svg": "yes"}}"#,
    );
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("outputs.svg"), "{err}");

    let unknown = write_config(dir.path(), "unknown.json", r#"{"scenario": "grid-lines", "sizes": [3], "colour": 1}"#);
    assert_eq!(run(&unknown, &dir.path().join("out"), &[]).status.code(), Some(1));

    let decreasing = write_config(dir.path(), "dec.json", r#"{"scenario": "grid-lines", "sizes": [4, 3]}"#);
    let o = run(&decreasing, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("increasing"));
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&dir.path().join("nope.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
}

#[test]
fn failing_certificate_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fail.json",
        r#"{"scenario": "grid-lines", "sizes": [8, 12], "c_thresh": 0.5,
            "certify": [{"theorem": "1.3", "r": 2}]}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(2));
    let certs = std::fs::read_to_string(out.join("certificates.csv")).unwrap();
    assert!(certs.lines().nth(1).unwrap().ends_with(",fail"), "{certs}");

    let limited = write_config(
        dir.path(),
        "limit.json",
        r#"{"scenario": "grid-lines", "sizes": [8, 12], "certify": [{"theorem": "1.3", "r": 2, "c_limit": 0.001}]}"#,
    );
    assert_eq!(run(&limited, &dir.path().join("out2"), &[]).status.code(), Some(2));
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn manifest_digests_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        r#"{"scenario": "grid-lines", "sizes": [6, 8], "certify": [{"theorem": "1.3", "r": 2}],
            "outputs": {"svg": true, "points": true}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 6);
    for o in outputs {
        let name = o["path"].as_str().unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), sha(&out.join(name)), "{name}");
    }
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap(), sha(&cfg));
    assert!(out.join("timings.json").exists());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"scenario": "lattice-lines", "sizes": [50, 120], "seed": 9,
            "certify": [{"theorem": "1.3", "r": 2}, {"theorem": "remark", "r": 2}]}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &a, &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &["--threads", "4"]).status.code(), Some(0));
    for f in ["profile.csv", "certificates.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_override_changes_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"scenario": "lattice-lines", "sizes": [30], "outputs": {"points": true}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&cfg, &a, &[]);
    run(&cfg, &b, &["--seed", "5"]);
    assert_ne!(
        std::fs::read(a.join("points_30.txt")).unwrap(),
        std::fs::read(b.join("points_30.txt")).unwrap()
    );
    let csv = std::fs::read_to_string(b.join("profile.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",5"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", r#"{"scenario": "grid-lines", "sizes": [3]}"#);
    let out = dir.path().join("from-env");
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("PSEUDOFLAT_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("profile.csv").exists());
}

#[test]
fn custom_points_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ps = pseudoflat_core::pointgen::perturbed_lattice(3, 8, 4).unwrap();
    std::fs::write(dir.path().join("pts.txt"), ps.to_text()).unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"scenario": "custom", "n": 3, "points_file": "pts.txt", "family": "planes",
            "diagnose": {"k": 3, "r": 2, "index": true}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("diagnose_0.json")).unwrap()).unwrap();
    assert_eq!(d["theorem13"]["bound_ok"], true);
    assert_eq!(d["index"]["lemma"]["pass"], true);
    assert_eq!(d["index"]["pigeonhole_ok"], true);
    assert_eq!(d["index"]["admissible"]["lower_bound_ok"], true);
}

#[test]
fn selftest_passes_and_filters() {
    let o = bin().arg("selftest").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = bin().args(["selftest", "--filter", "prooflab"]).output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("2 checks, 0 failed"), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("ok")).all(|l| l.contains("prooflab/")));
}

#[test]
fn selftest_catches_injected_fault() {
    let o = bin().args(["selftest", "--inject-fault", "canonical"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("FAIL flats/line-canonical-form-unique"), "{text}");
}
