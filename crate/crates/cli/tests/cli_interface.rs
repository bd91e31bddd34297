//! Exercises the documented CLI surface: subcommand semantics, file
//! schemas and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spin-toolkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spin-toolkit")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn presets_document_contains_family_constants() {
    let out = run(&["presets"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let nu1 = text.split("[family.nu1]").nth(1).expect("[family.nu1] section");
    let nu1 = nu1.split('[').next().unwrap();
    assert!(nu1.contains("d_mhz = 560"), "{nu1}");
    assert!(nu1.contains("e_mhz = 60"), "{nu1}");
    assert!(nu1.contains("a_mhz = -34"), "{nu1}");
    assert!(text.contains("[family.nu2]"));
    assert!(text.contains("[family.nu3]"));
    assert!(text.contains("[family.nu4]"));
    assert!(text.contains("[rates]"));
}

#[test]
fn spectrum_matches_sweep_first_row() {
    let out_spec = run(&[
        "spectrum",
        "--b-mt",
        "0",
        "--preset",
        "nu1",
        "--f-min-mhz",
        "400",
        "--f-max-mhz",
        "700",
        "--f-step-mhz",
        "1",
    ]);
    assert!(out_spec.status.success());
    let out_sweep = run(&[
        "sweep",
        "--preset",
        "nu1",
        "--b-min-mt",
        "0",
        "--b-max-mt",
        "1",
        "--b-step-mt",
        "0.5",
        "--f-min-mhz",
        "400",
        "--f-max-mhz",
        "700",
        "--f-step-mhz",
        "1",
    ]);
    assert!(out_sweep.status.success());

    let spec_text = stdout_str(&out_spec);
    let spec_lines: Vec<&str> = spec_text.lines().skip(1).map(str::trim).collect();
    let sweep_text = stdout_str(&out_sweep);
    let sweep_row0: Vec<&str> = sweep_text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("0,"))
        .collect();
    assert_eq!(spec_lines.len(), sweep_row0.len());
    for (s, w) in spec_lines.iter().zip(&sweep_row0) {
        let spec_amp = s.split(',').nth(1).unwrap();
        let sweep_amp = w.split(',').nth(2).unwrap();
        assert_eq!(spec_amp, sweep_amp, "amplitude columns must be identical");
    }
}

#[test]
fn ramsey_pipeline_recovers_fringe_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let json = dir.path().join("fit.json");
    let out = run(&["ramsey-sim", "--out", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&[
        "fit-ramsey",
        "--input",
        trace.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let params = report["parameters"].as_array().unwrap();
    let get = |name: &str| -> f64 {
        params
            .iter()
            .find(|p| p["name"] == name)
            .unwrap_or_else(|| panic!("parameter {name}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((get("f1_mhz") - 1.6).abs() < 0.01);
    assert!((get("f2_mhz") - 10.1).abs() < 0.01);
    assert!((get("t2star_us") - 2.0).abs() < 0.05);
    assert_eq!(report["fit"], "ramsey-fringes");
    assert_eq!(report["converged"], true);
}

#[test]
fn dw_factor_prints_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("optical.csv");
    let mut text = String::from("wavelength_nm,intensity\n");
    for k in 0..=400 {
        let x = 1300.0 + 0.5 * k as f64;
        let tri = |c: f64, h: f64, a: f64| {
            let d: f64 = (x - c).abs();
            if d < h {
                a * (1.0 - d / h)
            } else {
                0.0
            }
        };
        text.push_str(&format!("{x},{}\n", tri(1348.0, 6.0, 6.5) + tri(1420.0, 10.0, 6.1)));
    }
    write(&input, &text);
    let out = run(&[
        "dw-factor",
        "--input",
        input.to_str().unwrap(),
        "--zpl-min-nm",
        "1340",
        "--zpl-max-nm",
        "1356",
    ]);
    assert!(out.status.success());
    let fraction: f64 = stdout_str(&out).trim().parse().unwrap();
    assert!((fraction - 0.39).abs() < 1e-6, "fraction {fraction}");
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["levels", "--preset", "nu9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nu9"));
}

#[test]
fn parse_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();

    // non-numeric cell with row/column in the message
    let bad_csv = dir.path().join("bad.csv");
    write(&bad_csv, "tau_ns,contrast\n0,0.5\n10,zap\n");
    let out = run(&["fit-t1", "--input", bad_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains(":3"), "{err}");
    assert!(err.contains("column 2"), "{err}");

    // missing column named in the message
    let wrong_cols = dir.path().join("cols.csv");
    write(&wrong_cols, "x,y\n1,2\n");
    let out = run(&["fit-t1", "--input", wrong_cols.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau_ns"));

    // config with an unknown key
    let cfg = dir.path().join("bad.conf");
    write(&cfg, "[family.a]\nd_mhz = 5\nbogus = 1\n");
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--f-min-mhz",
        "10",
        "--f-max-mhz",
        "20",
        "--f-step-mhz",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains(":3"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn numerical_failures_exit_3() {
    // Ramsey simulation from a spin system with the RF parked far away
    // from every transition
    let out = run(&[
        "ramsey-sim",
        "--preset",
        "nu3",
        "--rf-mhz",
        "1900",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no addressable transitions"));
}

#[test]
fn config_roundtrip_through_spectrum() {
    // presets -> config file -> spectrum must equal preset spectrum
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toolkit.conf");
    let out = run(&["presets", "--out", cfg.to_str().unwrap()]);
    assert!(out.status.success());

    let grid_flags = [
        "--f-min-mhz",
        "200",
        "--f-max-mhz",
        "700",
        "--f-step-mhz",
        "1",
    ];
    let mut with_config = vec!["spectrum", "--config", cfg.to_str().unwrap()];
    with_config.extend_from_slice(&grid_flags);
    let a = run(&with_config);
    let mut with_presets = vec!["spectrum"];
    with_presets.extend_from_slice(&grid_flags);
    let b = run(&with_presets);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout_str(&a), stdout_str(&b));
}

#[test]
fn levels_csv_schema() {
    let out = run(&[
        "levels",
        "--preset",
        "nu1",
        "--b-max-mt",
        "1",
        "--b-step-mt",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "b_mt,level_index,energy_mhz");
    // 12 levels at each of two field values
    assert_eq!(lines.count(), 24);
}
