//! CLI behavior: exit-code conventions, flag handling, diagnostics, and
//! the selftest surface.

use std::path::{Path, PathBuf};
use std::process::Command;

use condent::io::{state_to_json, to_json_string};
use condent::linalg::SubsystemLayout;
use condent::states::{max_entangled_ket, maximally_mixed, DensityMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condent"))
}

fn write_state(dir: &Path, name: &str, rho: &DensityMatrix) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_json_string(&state_to_json(rho)).unwrap()).unwrap();
    path
}

fn export_gallery(dir: &Path, entry: &str, dim: usize) -> PathBuf {
    let path = dir.join(format!("{entry}_{dim}.json"));
    let status = bin()
        .args(["gallery", entry, "--dim", &dim.to_string(), "-o"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    path
}

#[test]
fn detect_exit_codes_separate_verdicts_from_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sp = export_gallery(dir.path(), "swap_prepare", 2);
    let r0 = export_gallery(dir.path(), "replace_zero", 2);

    let pass = bin().args(["detect", "aunital"]).arg(&sp).output().unwrap();
    assert_eq!(pass.status.code(), Some(0));

    let fail = bin().args(["detect", "aunital"]).arg(&r0).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));

    // a huge tolerance flips the verdict
    let loose = bin()
        .args(["detect", "aunital"])
        .arg(&r0)
        .args(["--tol", "10.0"])
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));

    // non-positive tolerance is an argument error
    let bad_tol = bin()
        .args(["detect", "aunital"])
        .arg(&r0)
        .args(["--tol", "-1.0"])
        .output()
        .unwrap();
    assert_eq!(bad_tol.status.code(), Some(2));

    let missing = bin()
        .args(["detect", "aunital", "no_such_file.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
}

#[test]
fn malformed_inputs_exit_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"kraus\", \"in_dims\": [2,").unwrap();
    let out = bin().args(["detect", "unital"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "diagnostics should mention the position: {err}");
}

#[test]
fn dimension_cap_exceeded_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("huge.json");
    // dims multiply to 8192 > 4096; matrix content never gets built
    let rows: Vec<Vec<[f64; 2]>> = vec![vec![[0.0, 0.0]]];
    let sj = condent::io::StateJson {
        dims: vec![128, 64],
        labels: Some(vec!["A".into(), "B".into()]),
        matrix: rows,
    };
    std::fs::write(&path, to_json_string(&sj).unwrap()).unwrap();
    let out = bin().arg("entropy").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn entropy_and_cve_report_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let layout = SubsystemLayout::bipartite(2, 2).unwrap();
    let mixed = write_state(dir.path(), "mixed.json", &maximally_mixed(layout.clone()));
    let bell = write_state(
        dir.path(),
        "bell.json",
        &DensityMatrix::from_ket(&max_entangled_ket(2), layout).unwrap(),
    );

    let out = bin()
        .args(["--format", "json", "entropy"])
        .arg(&mixed)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["entropy"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = bin()
        .args(["--format", "json", "cve"])
        .arg(&bell)
        .args(["--a-labels", "A"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["conditional_entropy"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    // unknown label is an input error
    let out = bin()
        .arg("cve")
        .arg(&bell)
        .args(["--a-labels", "Q"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn acvenn_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let layout = SubsystemLayout::bipartite(2, 2).unwrap();
    let mixed = write_state(dir.path(), "mixed.json", &maximally_mixed(layout.clone()));
    let bell = write_state(
        dir.path(),
        "bell.json",
        &DensityMatrix::from_ket(&max_entangled_ket(2), layout).unwrap(),
    );
    assert_eq!(bin().arg("acvenn").arg(&mixed).status().unwrap().code(), Some(0));
    assert_eq!(bin().arg("acvenn").arg(&bell).status().unwrap().code(), Some(1));
}

#[test]
fn validate_reports_on_good_and_broken_channels() {
    let dir = tempfile::tempdir().unwrap();
    let sp = export_gallery(dir.path(), "swap_prepare", 2);
    let out = bin()
        .args(["--format", "json", "validate"])
        .arg(&sp)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["accepted"].as_bool().unwrap());
    assert!(v["tp_deviation"].as_f64().unwrap() < 1e-9);

    // a lone projector is not trace preserving: verdict false, not error
    let broken = dir.path().join("broken.json");
    std::fs::write(
        &broken,
        r#"{"kind":"kraus","in_dims":[2],"out_dims":[2],"kraus":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]]]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["--format", "json", "validate"])
        .arg(&broken)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!v["accepted"].as_bool().unwrap());
}

#[test]
fn gallery_lists_and_rejects_unknown_entries() {
    let out = bin().args(["gallery", "list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("swap_prepare"));
    assert!(text.contains("replace_mixed_a"));

    let out = bin().args(["gallery", "nonsense", "--dim", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_emits_one_json_record_per_check() {
    let out = bin().args(["--format", "json", "selftest"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut theorems = Vec::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["passed"].as_bool().unwrap());
        theorems.push(v["theorem"].as_str().unwrap().to_string());
    }
    assert_eq!(theorems.len(), 9);
    assert!(theorems.contains(&"gallery_verdicts".to_string()));
}

#[test]
fn selftest_fault_injection_names_the_failing_entry() {
    let out = bin()
        .args(["selftest", "--inject-fault", "swap_prepare"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("swap_prepare"), "{text}");
    assert!(text.contains("FAIL"), "{text}");
}

#[test]
fn choi_channel_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let ch = condent::channels::random_channel(
        &SubsystemLayout::bipartite(2, 2).unwrap(),
        2,
        99,
    )
    .unwrap();
    let choi = ch.to_choi().unwrap();
    let cj = condent::io::ChannelJson::Choi {
        in_dims: vec![2, 2],
        out_dims: vec![2, 2],
        in_labels: None,
        out_labels: None,
        matrix: condent::io::matrix_to_json(choi.op()),
    };
    let path = dir.path().join("choi.json");
    std::fs::write(&path, to_json_string(&cj).unwrap()).unwrap();
    let out = bin().args(["detect", "aunital"]).arg(&path).output().unwrap();
    // a random channel is not A-unital: verdict false, not an error
    assert_eq!(out.status.code(), Some(1));
    let ok = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
}
