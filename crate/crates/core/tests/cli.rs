use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_edge-reconnect"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn queue_kernel_csv() {
    let out = bin().args(["limits-eval", "queue", "--t", "0", "--h", "2", "--mu", "1", "--kmax", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,q");
    assert_eq!(rows.len(), 6);
    let q2: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((q2 - 1.0).abs() < 1e-12);
}

#[test]
fn stationary_slice_is_a_law() {
    let out = bin()
        .args(["limits-eval", "stationary", "--kappa", "2", "--rho", "1", "--x", "0.3", "--y", "0.7", "--kmax", "60"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let total: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let snap = dir.path().join("final.snap");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "n = 30\nkappa = 1.5\nseed = 3\nsteps = 5000\ncadence = 500\ntrajectory = {:?}\nfinal_snapshot = {:?}\n\
             [initial]\nkind = \"two-block\"\nc11 = 2\nc12 = 1\nc22 = 0\n",
            traj, snap
        ),
    )
    .unwrap();
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&traj).unwrap().lines().count() > 5);
    let text = fs::read_to_string(&snap).unwrap();
    assert!(text.starts_with("edge-reconnect snapshot v1"));
    assert!(text.contains("step 5000"));
}

#[test]
fn gof_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.txt");
    fs::write(&obs, "135\n271\n271\n180\n90\n53\n").unwrap();
    let status = |lambda: &str| bin().args(["gof", "--observed"]).arg(&obs).args(["--poisson", lambda]).status().unwrap();
    assert_eq!(status("2").code(), Some(0));
    assert_eq!(status("8").code(), Some(1));
    let missing = bin().args(["gof", "--observed", "/nonexistent/obs.txt", "--poisson", "2"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
}

#[test]
fn experiment_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "n = 50\nkappa = 1.0\nbogus = 1\n[initial]\nkind = \"near-regular\"\nm = 100\n").unwrap();
    let out = bin().args(["experiment", "edge-scale", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_edge_scale_experiment_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "n = 40\nkappa = 2.0\nseeds = 2\nreplicas = 50\nmaster_seed = 3\nedge_times = [0.5]\n\
         [initial]\nkind = \"two-block\"\nc11 = 2\nc12 = 1\nc22 = 0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("report");
    let out = bin().args(["experiment", "edge-scale", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["master_seed"], 3);
    assert!(out_dir.join("cells.csv").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            if path.file_stem().is_some_and(|s| s == "simulate") {
                edge_reconnect::harness::load_run_config(&path).unwrap();
            } else {
                edge_reconnect::harness::load_experiment_config(&path).unwrap();
            }
            seen += 1;
        }
    }
    assert_eq!(seen, 5);
}
