use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spraylab_cli::{commands, RunConfig, ScenarioName, Table};
use spraylab_core::scenarios::ScenarioReport;
use tempfile::TempDir;

fn spraylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spraylab"))
        .args(args)
        .env_remove("SPRAYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_table(path: &Path) -> Table {
    Table::from_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

fn path_arg(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn poincare_curvature_rows_report_minus_one() {
    let dir = TempDir::new().unwrap();
    let out = path_arg(&dir, "curv.csv");
    let run = spraylab(&[
        "curvature",
        "--metric",
        "poincare",
        "--dim",
        "2",
        "--samples",
        "50",
        "--out",
        &out,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = read_table(Path::new(&out));
    assert_eq!(table.rows.len(), 50);
    assert_eq!(table.columns[..4], ["x1", "x2", "y1", "y2"]);
    assert_eq!(
        table.columns[4..],
        ["phi_1_1", "phi_1_2", "phi_2_1", "phi_2_2", "rho", "iso_res", "kappa", "sfc_res"]
    );
    for k in table.column("kappa").unwrap() {
        assert!((k + 1.0).abs() < 1e-9, "{k}");
    }
    for r in table.column("sfc_res").unwrap() {
        assert!(r < 1e-9, "{r}");
    }
}

#[test]
fn flat_spray_has_zero_jacobi_columns() {
    let run = spraylab(&["curvature", "--spray", "flat", "--samples", "10"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = Table::from_csv(&String::from_utf8(run.stdout).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 10);
    for name in ["phi_1_1", "phi_1_2", "phi_2_1", "phi_2_2"] {
        assert!(table.column(name).unwrap().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn malformed_expression_in_config_exits_two_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[spray]\nspec = \"expr\"\ncoefficients = [\"y1*y1\", \"sqrt(y2\"]\n",
    )
    .unwrap();
    let run = spraylab(&["curvature", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("spray.coefficients[1]"), "{}", stderr(&run));

    fs::write(&cfg, "[grid]\nsamples = 5\nsede = 1\n").unwrap();
    let run = spraylab(&["curvature", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&run), 2);
    assert!(
        stderr(&run).contains("line 3") && stderr(&run).contains("sede"),
        "{}",
        stderr(&run)
    );
}

#[test]
fn flags_override_config_values() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[metric]\nspec = \"poincare:-4\"\n[grid]\nsamples = 5\nseed = 9\n",
    )
    .unwrap();
    let out = path_arg(&dir, "c.csv");
    let run = spraylab(&[
        "curvature",
        "--config",
        cfg.to_str().unwrap(),
        "--samples",
        "7",
        "--out",
        &out,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = read_table(Path::new(&out));
    assert_eq!(table.rows.len(), 7);
    assert!(table.column("kappa").unwrap().iter().all(|k| (k + 4.0).abs() < 1e-8));
}

#[test]
fn funk_command_controls() {
    let dir = TempDir::new().unwrap();
    let out = path_arg(&dir, "funk.csv");

    let run = spraylab(&[
        "funk",
        "--spray",
        "flat",
        "--factor",
        "funk",
        "--samples",
        "100",
        "--out",
        &out,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = read_table(Path::new(&out));
    assert!(table.column("normalized").unwrap().iter().all(|r| *r < 1e-8));

    let run = spraylab(&[
        "funk",
        "--spray",
        "flat",
        "--factor",
        "zero",
        "--samples",
        "20",
        "--out",
        &out,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = read_table(Path::new(&out));
    for (k, name) in table.columns.iter().enumerate().skip(4) {
        if name != "side_ratio" {
            assert!(table.rows.iter().all(|r| r[k] == 0.0), "{name}");
        }
    }
}

#[test]
fn proposition_factor_has_side_ratio_two() {
    // S₀ = S̃ − 2λF̃𝒞 with λ = 2, candidate P = −λF̃
    let dir = TempDir::new().unwrap();
    let out = path_arg(&dir, "prop.csv");
    let args = [
        "funk",
        "--metric",
        "poincare",
        "--dim",
        "3",
        "--deform",
        "metric:2",
        "--factor",
        "metric:-2",
        "--samples",
        "50",
        "--out",
        &out,
    ];
    let run = spraylab(&args);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = read_table(Path::new(&out));
    for ratio in table.column("side_ratio").unwrap() {
        assert!((ratio - 2.0).abs() < 1e-6, "{ratio}");
    }
}

#[test]
fn check_commands_exit_one_on_failure() {
    let run = spraylab(&["metrizability", "--metric", "poincare", "--samples", "20"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = spraylab(&[
        "metrizability",
        "--metric",
        "poincare",
        "--spray",
        "flat",
        "--samples",
        "20",
    ]);
    assert_eq!(code(&run), 1, "{}", stderr(&run));
    let run = spraylab(&[
        "deform-check",
        "--metric",
        "funk",
        "--factor",
        "lift:x1*x2",
        "--samples",
        "20",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = spraylab(&["deform-check", "--factor", "lift:x1 + y1", "--samples", "5"]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("factor.spec"), "{}", stderr(&run));
}

#[test]
fn scenario_exit_codes() {
    let run = spraylab(&["scenario", "prop1", "--lambda", "2", "--dim", "3"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = spraylab(&["scenario", "prop1", "--lambda", "1"]);
    assert_eq!(code(&run), 2, "{}", stderr(&run));
    let run = spraylab(&["scenario", "thm1", "--metric", "euclidean"]);
    assert_eq!(code(&run), 2, "{}", stderr(&run));
    let run = spraylab(&["scenario", "flat"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = spraylab(&["scenario", "nonsense"]);
    assert_eq!(code(&run), 2);
}

#[test]
fn scenario_reports_round_trip_and_repeat() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path_arg(&dir, "a.json"), path_arg(&dir, "b.json"));
    for out in [&a, &b] {
        let run = spraylab(&["scenario", "thm1", "--samples", "60", "--seed", "4", "--out", out]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    let json = fs::read_to_string(&a).unwrap();
    assert_eq!(json, fs::read_to_string(&b).unwrap());
    let text = fs::read_to_string(dir.path().join("a.txt")).unwrap();
    assert!(text.contains("verdict PASS"), "{text}");

    let reread = ScenarioReport::from_json(&json).unwrap();
    let mut cfg = RunConfig::default();
    cfg.grid.samples = Some(60);
    cfg.grid.seed = Some(4);
    let in_memory = commands::scenario_report(ScenarioName::Thm1, &cfg).unwrap();
    assert_eq!(reread, in_memory);
    assert_eq!(reread.to_json(), json);
}

#[test]
fn csv_and_json_outputs_agree_bitwise() {
    let dir = TempDir::new().unwrap();
    let (csv, json) = (path_arg(&dir, "t.csv"), path_arg(&dir, "t.json"));
    let common = [
        "funk",
        "--metric",
        "poincare",
        "--factor",
        "lift:x1^2 - x2",
        "--samples",
        "25",
    ];
    let run = spraylab(&[&common[..], &["--out", &csv]].concat());
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = spraylab(&[&common[..], &["--out", &json, "--format", "json"]].concat());
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let from_csv = read_table(Path::new(&csv));
    let from_json = Table::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(from_csv.columns, from_json.columns);
    let bits = |t: &Table| -> Vec<u64> { t.rows.iter().flatten().map(|v| v.to_bits()).collect() };
    assert_eq!(bits(&from_csv), bits(&from_json));
    assert_eq!(from_csv.to_csv(), fs::read_to_string(&csv).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["curvature", "--metric", "funk", "--samples", "30"];
    let default = spraylab(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_spraylab"))
        .args(args)
        .env("SPRAYLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&single), 0);
    assert_eq!(default.stdout, single.stdout);
}
