use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kgfluct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgfluct")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const ENSEMBLE: &str = r#"{
  "model": {"mass_squared": 1.0, "coupling": 0.5, "spatial_dim": 1, "lattice_spacing": 0.05,
            "laplacian_prefactor": 0.2, "lattice_dims": [8]},
  "engine": "ensemble",
  "ensemble": {"members": 3000, "snapshot": true},
  "initial": {"mean_sigma": 0.5, "mean_pi": 0.0, "width_sigma": 1.0, "width_pi": 1.0},
  "observables": [{"name": "sigma", "site": 0}, {"name": "pi_squared", "site": 3}],
  "n_steps": 40,
  "sample_every": 10
}"#;

#[test]
fn ensemble_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ens.json", ENSEMBLE);
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(run);
        let o = kgfluct(&["run-ensemble", "--config", &cfg, "--seed", "42", "--threads", threads, "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(out);
    }
    for file in ["ensemble.csv", "snapshot.bin"] {
        let a = fs::read(outputs[0].join(file)).unwrap();
        let b = fs::read(outputs[1].join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs");
    }
    let csv = fs::read_to_string(outputs[0].join("ensemble.csv")).unwrap();
    assert!(csv.starts_with("time,site,observable,mean,std_error,n\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 2);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(outputs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["engine"], "ensemble");
    assert!(manifest["wall_time_seconds"].is_number());
}

#[test]
fn snapshot_restart_continues_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ens.json", ENSEMBLE);
    let first = dir.path().join("first");
    assert!(kgfluct(&["run-ensemble", "--config", &cfg, "--output", first.to_str().unwrap()]).status.success());
    let snap = first.join("snapshot.bin");
    let restart = ENSEMBLE.replace(
        r#""ensemble": {"members": 3000, "snapshot": true}"#,
        &format!(r#""ensemble": {{"members": 3000, "initial_snapshot": {:?}}}"#, snap.to_str().unwrap()),
    );
    let cfg2 = write_config(dir.path(), "restart.json", &restart);
    let second = dir.path().join("second");
    let o = kgfluct(&["run-ensemble", "--config", &cfg2, "--output", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(second.join("ensemble.csv")).unwrap();
    // the restart begins where the first run stopped: 40 blocks of 0.1
    assert!(csv.lines().nth(1).unwrap().starts_with("4.0"), "{csv}");
}

#[test]
fn three_site_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{
      "model": {"mass_squared": 1.0, "coupling": 0.0, "spatial_dim": 1, "lattice_spacing": 0.1},
      "engine": "grid_liouville",
      "grid": {"sites": 3, "sigma": {"half_width": 5.0, "count": 9}, "pi": {"half_width": 5.0, "count": 9}},
      "initial": {"width_sigma": 0.5, "width_pi": 0.5},
      "n_steps": 1
    }"#,
    );
    let o = kgfluct(&["evolve-liouville", "--config", &cfg, "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 sites"));
}

#[test]
fn invalid_config_exits_with_2_and_lists_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"model": {"coupling": 0.0, "lattice_spacing": -1}, "engine": "ensemble"}"#,
    );
    let o = kgfluct(&["run-ensemble", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for path in ["model.mass_squared", "model.lattice_spacing", "ensemble"] {
        assert!(err.contains(path), "{path} not in {err}");
    }
}

#[test]
fn divergence_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = ENSEMBLE
        .replace(r#""mean_sigma": 0.5"#, r#""mean_sigma": 1e80"#)
        .replace(r#""coupling": 0.5"#, r#""coupling": 1.0"#);
    let cfg = write_config(dir.path(), "div.json", &body);
    let o = kgfluct(&["run-ensemble", "--config", &cfg, "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn engine_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ens.json", ENSEMBLE);
    let o = kgfluct(&["evolve-liouville", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn saddle_point_json_matches_the_library() {
    use kgfluct_core::effective_action::{solve_mirror_series, tree_level_delta_s};
    use kgfluct_core::ModelParams;

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ea.json",
        r#"{
      "model": {"mass_squared": 2.0, "coupling": 0.5, "spatial_dim": 3, "lattice_spacing": 0.5},
      "engine": "effective_action",
      "effective_action": {"truncation_order": 4, "phi_values": [0.1, 0.3], "lattice_dims": [4, 4, 4, 4]}
    }"#,
    );
    let out = dir.path().join("o");
    for cmd in ["saddle-point", "one-loop"] {
        let o = kgfluct(&[cmd, "--config", &cfg, "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(out.join("saddle_point.json")).unwrap()).unwrap();
    let params = ModelParams::new(2.0, 0.5, 3, 0.5).unwrap();
    let chi = solve_mirror_series(&params, 4).unwrap().chi;
    let ds = tree_level_delta_s(&chi, &params, 4).unwrap();
    for (p, _) in chi.terms() {
        assert_eq!(doc["coefficients"]["chi"][p.to_string()].as_f64(), Some(chi.coefficient_f64(p)));
    }
    for (p, _) in ds.terms() {
        assert_eq!(doc["coefficients"]["delta_s"][p.to_string()].as_f64(), Some(ds.coefficient_f64(p)));
    }
    assert_eq!(doc["coefficients"]["chi"]["3"].as_f64(), Some(0.5 / 16.0));
    assert_eq!(doc["saddle_checks"].as_array().unwrap().len(), 2);
    let one_loop: serde_json::Value = serde_json::from_slice(&fs::read(out.join("one_loop.json")).unwrap()).unwrap();
    assert!(one_loop["coefficients"]["4"].as_f64().unwrap() > 0.0);
    assert!(one_loop["deviations"].is_object());
}

#[test]
fn validate_passes_at_defaults_and_fails_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = kgfluct(&["validate", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    assert!(out.join("validate.json").exists());

    let strict = r#"{
      "model": {"mass_squared": 1.0, "coupling": 0.0, "spatial_dim": 0, "lattice_spacing": 0.01},
      "engine": "effective_action",
      "effective_action": {"phi_values": [0.1], "lattice_dims": [2]},
      "tolerances": {"rule_equivalence": 1e-300}
    }"#;
    let cfg = write_config(dir.path(), "strict.json", strict);
    let o = kgfluct(&["validate", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL rule_equivalence"));
}

#[test]
fn grid_commands_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let grid = r#"{
      "model": {"mass_squared": 1.0, "coupling": 0.5, "spatial_dim": 0, "lattice_spacing": 0.02},
      "engine": "ENGINE",
      "grid": {"sites": 1, "sigma": {"half_width": 8.0, "count": 65}, "pi": {"half_width": 8.0, "count": 65}},
      "initial": {"mean_sigma": 0.3, "width_sigma": 0.7, "width_pi": 0.7},
      "observables": [{"name": "sigma", "site": 0}, {"name": "var_phi", "site": 0}],
      "n_steps": 20,
      "sample_every": 10,
      "tolerances": {"leak": 1e-6}
    }"#;
    for (engine, cmd, files) in [
        ("grid_liouville", "evolve-liouville", &["observables.csv", "diagnostics.csv", "q_final.csv"][..]),
        ("schroedinger", "evolve-schroedinger", &["observables.csv", "diagnostics.csv", "psi_final.csv"][..]),
        ("schroedinger", "check-operators", &["operators.json"][..]),
    ] {
        let cfg = write_config(dir.path(), "grid.json", &grid.replace("ENGINE", engine));
        let out = dir.path().join(cmd);
        let o = kgfluct(&[cmd, "--config", &cfg, "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files.iter().chain(&["manifest.json"]) {
            assert!(out.join(f).exists(), "{cmd} did not write {f}");
        }
    }
    let obs = fs::read_to_string(dir.path().join("evolve-liouville/observables.csv")).unwrap();
    assert!(obs.starts_with("time,observable_name,site,value\n"));
    assert_eq!(obs.lines().count(), 1 + 3 * 2);
}
