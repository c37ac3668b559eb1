use std::path::Path;
use std::process::{Command, Output};

const T_GOLDEN: &str = "0.6136486381292343";

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel-lab")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classify_golden_has_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(&["classify", "--alpha", "golden", "--terms", "12"], dir.path()));
    assert_eq!(v["version"], format!("siegel-lab/{}", env!("CARGO_PKG_VERSION")));
    assert_eq!(v["subcommand"], "classify");
    assert_eq!(v["config"]["terms"], 12);
    let entries = v["payload"]["expansion"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    assert!(entries.iter().all(|a| a == 1));
    assert_eq!(v["payload"]["periodic"], true);
    let v = json(&run(&["classify", "--cf", "1,2,3", "--period", "2", "--terms", "5"], dir.path()));
    assert_eq!(v["payload"]["expansion"]["entries"], serde_json::json!([1, 2, 3, 2, 3]));
}

#[test]
fn usage_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["density-scan", "--alpha", "golden", "--bogus", "--out", "scan.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("scan.csv").exists());
    let out = run(
        &["density-scan", "--alpha", "golden", "--center", "nowhere", "--t", T_GOLDEN, "--out", "scan.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
    assert!(!dir.path().join("scan.csv").exists());
    assert_eq!(run(&["cover-check", "--lemma", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["classify"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn domain_errors_exit_1_with_structured_json() {
    let dir = tempfile::tempdir().unwrap();
    // c = 1 admits no synthetic cell set
    let out = run(&["cover-check", "--lemma", "1", "--c", "1", "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "covering");
    assert!(!dir.path().join("r.json").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_siegel-lab"))
        .args(["classify", "--alpha", "golden"])
        .env("SIEGEL_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn saved_instances_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = run(&["cover-check", "--lemma", "1", "--seed", "9", "--save-instance", "e.json", "--out", "a.json"], p);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(
        &[
            "cover-check",
            "--lemma",
            "1",
            "--seed",
            "9",
            "--instance",
            "e.json",
            "--save-instance",
            "e2.json",
            "--out",
            "b.json",
        ],
        p,
    );
    assert!(b.status.success());
    assert_eq!(std::fs::read(p.join("e.json")).unwrap(), std::fs::read(p.join("e2.json")).unwrap());
    let ra: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("a.json")).unwrap()).unwrap();
    let rb: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("b.json")).unwrap()).unwrap();
    assert_eq!(ra["payload"], rb["payload"]);
    assert_eq!(ra["payload"]["bound_holds"], true);
    // wrong instance kind for the lemma
    let out = run(&["cover-check", "--lemma", "2", "--instance", "e.json"], p);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(p.join("bad.json"), "{\"r_tables\": [], \"cells\": []}").unwrap();
    let out = run(&["cover-check", "--lemma", "1", "--instance", "bad.json"], p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing field"));
}

#[test]
fn witness_file_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let w = serde_json::json!({ "theta": { "entries": [1], "tail": { "periodic": [1] } }, "M": 1, "s": [2, 10], "t": [5], "C": 0.5 });
    std::fs::write(dir.path().join("w.json"), w.to_string()).unwrap();
    let v = json(&run(&["classify", "--alpha", "golden", "--witness", "w.json"], dir.path()));
    assert_eq!(v["payload"]["e0"]["verdict"], "holds");
    std::fs::write(dir.path().join("w.json"), "{\"theta\": 1}").unwrap();
    assert_eq!(run(&["classify", "--alpha", "golden", "--witness", "w.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn scan_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = [
        "density-scan",
        "--alpha",
        "golden",
        "--t",
        T_GOLDEN,
        "--center",
        "crit",
        "--r0",
        "0.25",
        "--scales",
        "4",
        "--grid",
        "64",
        "--budget",
        "2000",
        "--seed",
        "3",
        "--out",
        "s.csv",
    ];
    assert!(run(&args, p).status.success());
    let csv = std::fs::read_to_string(p.join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "scale,radius,frac_escaped,frac_captured,frac_undecided,samples,ci");
    assert_eq!(lines.count(), 4);
    let fit = run(&["deep-fit", "--input", "s.csv"], p);
    // the smallest ball sees no escape at this resolution and drops out of the fit
    let v = json(&fit);
    assert_eq!(v["payload"]["n_scales"], 3);
    assert!(v["payload"]["slope"].as_f64().unwrap().is_finite());
}

#[test]
fn render_writes_a_greyscale_pixmap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "render", "--alpha", "golden", "--t", T_GOLDEN, "--width", "40", "--height", "30", "--budget", "200",
            "--out", "f.pgm",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let bytes = std::fs::read(dir.path().join("f.pgm")).unwrap();
    let text = String::from_utf8_lossy(&bytes);
    assert!(text.starts_with("P5\n# config: "));
    let pixels = &bytes[bytes.len() - 1200..];
    assert!(pixels.iter().all(|&b| b == 0 || b == 128 || b == 255));
    // the closed unit disk is captured
    assert!(pixels.contains(&255) && pixels.contains(&0));
}

#[test]
fn cellgraph_reports_cells_and_heights() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(&["cellgraph", "--alpha", "golden", "--graph", "rotation", "--n-max", "8"], dir.path()));
    let cells = v["payload"]["cells"].as_array().unwrap();
    assert!(!cells.is_empty());
    assert!(cells.iter().all(|c| c["k"] == 1 || c["k"] == 2));
    assert!(v["payload"]["max_slope"].as_f64().unwrap() <= 0.5);
    let sigma = v["payload"]["sigma_fit"].as_f64().unwrap();
    assert!(sigma > 0.0 && sigma < 1.0);
}
