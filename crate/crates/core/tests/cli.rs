use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_causal-cluster");

fn cc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// simulate -> fit -> cluster -> metrics on a small gauss3 instance.
#[test]
fn pipeline_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    ok(&["simulate", "gauss3", "--n", "120", "--seed", "5", "--beta", "1", "--out", s(&d("sim"))]);
    ok(&[
        "fit", "--input", s(&d("sim/observations.csv")), "--out", s(&d("m.csv")), "--seed", "6",
        "--truth", s(&d("sim/truth.csv")), "--truth-out", s(&d("m_true.csv")),
    ]);
    ok(&["cluster", "hier", "--input", s(&d("m.csv")), "--linkage", "average", "--k", "3", "--out", s(&d("hier"))]);
    for (input, out) in [("m.csv", "dens"), ("m_true.csv", "dens_true")] {
        ok(&["cluster", "density", "--input", s(&d(input)), "--h", "0.4", "--t", "0.2", "--out", s(&d(out))]);
    }
    let record = ok(&[
        "metrics", "hausdorff", "--estimate", s(&d("m.csv")), "--reference", s(&d("m_true.csv")),
        "--estimate-labels", s(&d("dens/labels.csv")), "--reference-labels", s(&d("dens_true/labels.csv")),
    ]);

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden("")).unwrap();
        for (src, dst) in [("hier/labels.csv", "hier_labels.csv"), ("dens/labels.csv", "density_labels.csv")] {
            std::fs::copy(d(src), golden(dst)).unwrap();
        }
        std::fs::write(golden("hausdorff.json"), &record).unwrap();
    }
    for (src, dst) in [("hier/labels.csv", "hier_labels.csv"), ("dens/labels.csv", "density_labels.csv")] {
        assert_eq!(std::fs::read(d(src)).unwrap(), std::fs::read(golden(dst)).unwrap(), "{src}");
    }
    let got: serde_json::Value = serde_json::from_str(&record).unwrap();
    let want: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(golden("hausdorff.json")).unwrap()).unwrap();
    assert_eq!(got["outcome"], want["outcome"]);
    let (g, w) = (got["hausdorff"].as_f64().unwrap(), want["hausdorff"].as_f64().unwrap());
    assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}");

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d("m.json")).unwrap()).unwrap();
    assert_eq!(sidecar["seed"], 6);
    assert_eq!(sidecar["split"]["project_indices"].as_array().unwrap().len(), 60);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(cc(&["--version"]).status.code(), Some(0));
    assert_eq!(cc(&["cluster", "hier"]).status.code(), Some(1));
    assert_eq!(
        cc(&["simulate", "voronoi", "--n", "0", "--seed", "1", "--out", s(&out)]).status.code(),
        Some(1)
    );
    let missing = cc(&[
        "--json-errors", "cluster", "hier", "--input", "/no/such.csv", "--linkage", "single",
        "--k", "2", "--out", s(&out),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "io");
    assert_eq!(err["exit_code"], 2);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "mu1,mu2\n1,nan\n").unwrap();
    let code = cc(&["cluster", "hier", "--input", s(&bad), "--linkage", "single", "--k", "1", "--out", s(&out)]);
    assert_eq!(code.status.code(), Some(2));
}

#[test]
fn metrics_print_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "mu1\n0\n1\n").unwrap();
    std::fs::write(&b, "mu1\n0.5\n3\n").unwrap();
    let line = ok(&["metrics", "hausdorff", "--estimate", s(&a), "--reference", s(&b)]);
    assert_eq!(line.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["hausdorff"], 2.0);

    let la = dir.path().join("la.csv");
    let lb = dir.path().join("lb.csv");
    std::fs::write(&la, "label\n0\n0\n").unwrap();
    std::fs::write(&lb, "label\n1\n1\n").unwrap();
    let line = ok(&[
        "metrics", "hausdorff", "--estimate", s(&a), "--reference", s(&b),
        "--estimate-labels", s(&la), "--reference-labels", s(&lb),
    ]);
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["hausdorff"], serde_json::Value::Null);
    assert_eq!(v["outcome"], "disjoint");

    let split = dir.path().join("split.csv");
    std::fs::write(&split, "label\n1\n2\n").unwrap();
    let line = ok(&["metrics", "class-error", "--labels", s(&split), "--truth", s(&lb)]);
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["error"], 0.5);
}
