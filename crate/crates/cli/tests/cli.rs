use std::process::Command;

use mera_qec_cli::{execute, run, CliError, Experiment, ExperimentConfig, NetworkSpec, Status};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn unknown_fields_are_rejected_by_name() {
    let err = ExperimentConfig::from_json(r#"{"experiment":"spectrum","network":{"kind":"haar","layers":3},"seeds":[0],"colour":1}"#)
        .unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
    let err = ExperimentConfig::from_json(r#"{"experiment":"spectrum","network":{"kind":"haar","layers":3},"seeds":[0],"sweep":{"scale":[1]}}"#)
        .unwrap_err();
    assert!(err.to_string().contains("scale"), "{err}");
    let err = ExperimentConfig::from_json(r#"{"experiment":"decoupling","network":{"kind":"haar","layers":3},"seeds":[0],"sweep":{"scales":[4]}}"#)
        .unwrap_err();
    assert!(matches!(err, CliError::Config { ref field, .. } if field == "sweep.scales"), "{err}");
    let err = ExperimentConfig::from_json(r#"{"experiment":"spectrum","network":{"kind":"haar","layers":3}}"#).unwrap_err();
    assert!(matches!(err, CliError::Config { ref field, .. } if field == "seeds"));
}

#[test]
fn hash_tracks_the_config() {
    let a = ExperimentConfig::preset(Experiment::Spectrum);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.seeds = vec![1];
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn trivial_spectrum_is_reported_not_regular() {
    let cfg = config(r#"{"experiment":"spectrum","network":{"kind":"trivial","layers":3},"seeds":[0]}"#);
    let out = execute(&cfg).unwrap();
    assert_eq!(out.manifest.seeds[0].status, Status::NotRegular);
    assert_eq!(out.table.column("is_regular")[0], &serde_json::json!(false));
    assert!(out.manifest.satisfied());
}

#[test]
fn distance_reports_the_exponent() {
    let cfg = config(r#"{"experiment":"distance","network":{"kind":"haar","layers":1}}"#);
    let out = execute(&cfg).unwrap();
    assert!(out.table.to_csv().contains("0.630929"));
    assert!(out.manifest.satisfied());
}

#[test]
fn empty_sweep_gives_header_only_plot() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(r#"{"experiment":"distance","network":{"kind":"haar","layers":1},"sweep":{"z":[]}}"#);
    cfg.output.path = dir.path().to_path_buf();
    run(&cfg).unwrap();
    let plot = std::fs::read_to_string(dir.path().join("distance.plot.csv")).unwrap();
    assert_eq!(plot, "z,level,pieces,ideal_size,min_size,max_size\n");
}

#[test]
fn decoupling_plot_schema_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(
        r#"{"experiment":"decoupling","network":{"kind":"haar","layers":3},"seeds":[0,1],
            "sweep":{"scales":[2,3],"region_sizes":[1,2],"codewords":4}}"#,
    );
    cfg.output.path = dir.path().to_path_buf();
    let out = run(&cfg).unwrap();
    let plot = std::fs::read_to_string(dir.path().join("decoupling.plot.csv")).unwrap();
    assert!(plot.starts_with("seed,s,a_size,defect,bound\n"));
    assert_eq!(plot.lines().count(), 1 + 2 * 2 * 2);
    for s in &out.manifest.seeds {
        assert!(matches!(s.status, Status::Ok | Status::NotRegular), "{s:?}");
    }
}

#[test]
fn lightcone_plot_follows_the_sweep_contract() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(Experiment::Lightcone);
    cfg.sweep.t_grid = vec![0.0, 0.5, 1.0];
    cfg.output.path = dir.path().to_path_buf();
    let out = run(&cfg).unwrap();
    let plot = std::fs::read_to_string(dir.path().join("lightcone.plot.csv")).unwrap();
    let header = plot.lines().next().unwrap();
    assert_eq!(header, format!("seed,{}", mera_qec::dynamics::LightconeReport::CSV_HEADER));
    assert_eq!(out.table.rows.len(), 3);
}

#[test]
fn identical_configs_write_identical_files() {
    let mut cfg = config(
        r#"{"experiment":"local-correctability","network":{"kind":"haar","layers":4},"seeds":[3,4],
            "sweep":{"shield_radii":[2,4],"codewords":2},"output":{"path":"unused","format":"json"}}"#,
    );
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cfg.output.path = d1.path().to_path_buf();
    run(&cfg).unwrap();
    cfg.output.path = d2.path().to_path_buf();
    run(&cfg).unwrap();
    for f in ["local-correctability.json", "local-correctability.plot.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert!(!a.is_empty() && a == b, "{f}");
    }
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d1.path().join("local-correctability.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn file_networks_load() {
    let dir = tempfile::tempdir().unwrap();
    let net = mera_qec::mera::MeraNetwork::haar(2, 3, 1, 5).unwrap();
    let path = dir.path().join("net.json");
    std::fs::write(&path, mera_qec::mera::io::to_json(&net)).unwrap();
    let mut cfg = ExperimentConfig::preset(Experiment::Spectrum);
    cfg.network = NetworkSpec::File { path };
    let out = execute(&cfg).unwrap();
    let from_seed = execute(&config(r#"{"experiment":"spectrum","network":{"kind":"haar","layers":3},"seeds":[5]}"#)).unwrap();
    assert_eq!(out.table.column("nu"), from_seed.table.column("nu"));
}

fn binary(args: &[&str], out: &std::path::Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_mera-qec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(binary(&["distance"], dir.path()), 0);
    assert_eq!(binary(&["spectrum", "--seeds", "0,1", "--format", "json"], dir.path()), 0);
    assert!(dir.path().join("spectrum.json").exists());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment":"spectrum","network":{"kind":"haar","layers":2},"seeds":[0],"extra":true}"#).unwrap();
    assert_eq!(binary(&["spectrum", "--config", bad.to_str().unwrap()], dir.path()), 1);
    // the literal eigenstate symmetry fails away from t = 0
    let lc = dir.path().join("lc.json");
    std::fs::write(&lc, r#"{"experiment":"lightcone","network":{"kind":"haar","layers":3},"seeds":[0],"sweep":{"t_grid":[0.0,0.5]}}"#)
        .unwrap();
    assert_eq!(binary(&["lightcone", "--config", lc.to_str().unwrap()], dir.path()), 2);
}
