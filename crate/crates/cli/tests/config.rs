use kgfluct::config::{parse_config, ConfigError, Engine, TransportMode};
use kgfluct_core::effective_action::Dispersion;

const HARMONIC: &str = r#"{
  "model": {"mass_squared": 1.0, "coupling": 0.0, "spatial_dim": 0, "lattice_spacing": 0.01},
  "engine": "grid_liouville",
  "grid": {"sites": 1, "sigma": {"half_width": 8.0, "count": 65}, "pi": {"half_width": 8.0, "count": 65}},
  "initial": {"mean_sigma": 0.5, "width_sigma": 1.0, "width_pi": 1.0},
  "seed": 3,
  "n_steps": 100
}"#;

#[test]
fn minimal_harmonic_config_parses() {
    let cfg = parse_config(HARMONIC).unwrap();
    assert_eq!(cfg.engine, Engine::GridLiouville);
    assert_eq!(cfg.model.mass_squared, 1.0);
    assert_eq!(cfg.grid.as_ref().unwrap().sigma.count, 65);
    assert_eq!(cfg.initial.unwrap().mean_pi, 0.0);
    assert_eq!(cfg.transport_mode, TransportMode::Characteristics);
}

#[test]
fn missing_mass_squared_is_reported_by_path() {
    let text = HARMONIC.replace(r#""mass_squared": 1.0, "#, "");
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("model.mass_squared"), "{err}");
}

#[test]
fn negative_lattice_spacing_is_rejected() {
    let text = HARMONIC.replace("0.01}", "-0.01}");
    let err = parse_config(&text).unwrap_err();
    assert!(err.issues().iter().any(|i| i.path == "model.lattice_spacing"), "{err}");
}

#[test]
fn every_error_is_listed() {
    let text = HARMONIC
        .replace(r#""mass_squared": 1.0, "#, "")
        .replace(r#""width_pi": 1.0"#, r#""width_pi": -1.0"#)
        .replace(r#""seed": 3"#, r#""seed": "three""#);
    let err = parse_config(&text).unwrap_err();
    let paths: Vec<&str> = err.issues().iter().map(|i| i.path.as_str()).collect();
    for p in ["model.mass_squared", "initial.width_pi", "seed"] {
        assert!(paths.contains(&p), "{p} missing from {paths:?}");
    }
}

#[test]
fn syntax_error_reports_line_and_column() {
    let text = "{\n  \"model\": {\"mass_squared\": 1.0,,}\n}";
    match parse_config(text).unwrap_err() {
        ConfigError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 33)),
        other => panic!("{other}"),
    }
}

#[test]
fn configs_round_trip() {
    let ensemble = r#"{
      "model": {"mass_squared": 0.5, "coupling": 0.25, "spatial_dim": 2, "lattice_spacing": 0.1,
                "laplacian_prefactor": 0.2, "lattice_dims": [4, 6]},
      "engine": "ensemble",
      "ensemble": {"members": 100, "snapshot": true},
      "initial": {"mean_sigma": 0.1, "mean_pi": -0.2, "width_sigma": 0.3, "width_pi": 0.4},
      "observables": [{"name": "sigma_squared", "site": 5}],
      "seed": 18446744073709551615,
      "n_steps": 7,
      "sample_every": 3,
      "tolerances": {"standard_errors": 2.5}
    }"#;
    let effective = r#"{
      "model": {"mass_squared": 1, "coupling": 1, "spatial_dim": 3, "lattice_spacing": 0.25},
      "engine": "effective_action",
      "effective_action": {"truncation_order": 4, "phi_values": [0.1, 0.2], "lattice_dims": [4, 4, 4, 4],
                           "dispersion": "linear"},
      "splitting": "lie",
      "transport_mode": "stepwise"
    }"#;
    for text in [HARMONIC, ensemble, effective] {
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), cfg.to_json());
    }
    let cfg = parse_config(effective).unwrap();
    assert_eq!(cfg.effective_action.unwrap().dispersion, Dispersion::Linear);
}

#[test]
fn engine_blocks_are_required() {
    let text = HARMONIC.replace(r#""engine": "grid_liouville""#, r#""engine": "schroedinger""#);
    assert!(parse_config(&text).is_ok());
    let no_grid = r#"{"model": {"mass_squared": 1, "coupling": 0, "lattice_spacing": 0.1},
                      "engine": "grid_liouville", "initial": {"width_sigma": 1, "width_pi": 1}}"#;
    let err = parse_config(no_grid).unwrap_err();
    assert!(err.issues().iter().any(|i| i.path == "grid"), "{err}");
}

#[test]
fn unknown_observables_are_rejected() {
    let text = HARMONIC.replace(r#""seed": 3"#, r#""seed": 3, "observables": [{"name": "entropy", "site": 0}]"#);
    let err = parse_config(&text).unwrap_err();
    assert!(err.issues().iter().any(|i| i.path == "observables[0].name"), "{err}");
}
