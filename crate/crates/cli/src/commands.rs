//! Command dispatch. Table commands evaluate one row per grid sample; the
//! scenario command wraps the scenario runners of the core crate.

use std::fs;
use std::path::Path;

use spraylab_core::coords::{sample_grid, Chart, TangentSample};
use spraylab_core::expr;
use spraylab_core::finsler::{self, FinslerFunction};
use spraylab_core::projective::{self, ProjectiveFactor};
use spraylab_core::scenarios::{self, FlatSetup, Proposition1Setup, ScenarioReport, Theorem1Setup};
use spraylab_core::spraycalc::{self, Spray};
use spraylab_core::{par, Result as CoreResult};

use crate::config::{Format, RunConfig, DEFAULT_SAMPLES};
use crate::error::CliError;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScenarioName {
    Thm1,
    Prop1,
    Flat,
}

impl ScenarioName {
    pub fn id(self) -> &'static str {
        match self {
            ScenarioName::Thm1 => "thm1",
            ScenarioName::Prop1 => "prop1",
            ScenarioName::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curvature,
    Funk,
    Metrizability,
    DeformCheck,
    Scenario(ScenarioName),
}

/// What a command concluded. `passed = false` maps to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Curvature => curvature(cfg),
        Command::Funk => funk(cfg),
        Command::Metrizability => metrizability(cfg),
        Command::DeformCheck => deform_check(cfg),
        Command::Scenario(name) => scenario(name, cfg),
    }
}

/// Chart, metric and samples shared by the table commands.
struct Setup {
    chart: Chart,
    metric: FinslerFunction,
    samples: Vec<TangentSample>,
}

impl Setup {
    fn resolve(cfg: &RunConfig) -> Result<Self, CliError> {
        let chart = cfg.chart(2)?;
        let metric = cfg.metric(&chart, "euclidean")?;
        let (scenario_cfg, _) = cfg.tolerances()?;
        let grid = cfg.grid(DEFAULT_SAMPLES, scenario_cfg.max_base_norm)?;
        let samples = sample_grid(&chart, &grid).map_err(|source| CliError::Eval {
            context: "grid".into(),
            source,
        })?;
        Ok(Setup { chart, metric, samples })
    }

    fn spray(&self, cfg: &RunConfig) -> Result<Spray, CliError> {
        cfg.spray(&self.chart, &self.metric, &self.samples)
    }

    fn factor(&self, cfg: &RunConfig) -> Result<ProjectiveFactor, CliError> {
        cfg.factor(&self.chart, &self.metric, &self.samples)
    }

    fn columns(&self, extra: impl IntoIterator<Item = String>) -> Vec<String> {
        let n = self.chart.dim();
        (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("y{i}")))
            .chain(extra)
            .collect()
    }

    /// One row per sample: coordinates followed by `f(p)`. The first failing
    /// sample, in grid order, becomes the error.
    fn table<F>(&self, columns: Vec<String>, f: F) -> Result<Table, CliError>
    where
        F: Fn(&TangentSample) -> CoreResult<Vec<f64>> + Sync + Send,
    {
        let indexed: Vec<(usize, &TangentSample)> = self.samples.iter().enumerate().collect();
        let rows = par::try_map(&indexed, |(i, p)| {
            let values = f(p).map_err(|source| CliError::Eval {
                context: format!("sample {i} at x = {:?}, y = {:?}", p.x, p.y),
                source,
            })?;
            Ok::<_, CliError>(p.x.iter().chain(&p.y).copied().chain(values).collect())
        })?;
        Ok(Table { columns, rows })
    }
}

fn write_table(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let body = match cfg.format() {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    emit(cfg.output.path.as_deref(), &body)
}

fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }),
        None => {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn curvature(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = Setup::resolve(cfg)?;
    let spray = setup.spray(cfg)?;
    let n = setup.chart.dim();
    let phi_names = (1..=n).flat_map(|i| (1..=n).map(move |j| format!("phi_{i}_{j}")));
    let tail = ["rho", "iso_res", "kappa", "sfc_res"].map(String::from);
    let columns = setup.columns(phi_names.chain(tail));
    let table = setup.table(columns, |p| {
        let phi = spraycalc::jacobi_endomorphism(spray.as_ref(), p)?.0;
        let iso = spraycalc::decompose_isotropic(&phi, &p.y);
        let flag = finsler::fit_scalar_flag(&phi, &finsler::flag_template(&setup.metric, p)?);
        let mut row: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|ij| phi[ij])
            .collect();
        row.extend([iso.rho, iso.residual, flag.kappa, flag.residual]);
        Ok(row)
    })?;
    write_table(cfg, &table)?;
    let kappa = table.column("kappa").expect("column present");
    let sfc = table.column("sfc_res").expect("column present");
    Ok(Outcome {
        passed: true,
        summary: format!(
            "curvature: {} samples, kappa in [{:.9}, {:.9}], max sfc_res {:.3e}",
            table.rows.len(),
            min_of(&kappa),
            max_of(&kappa),
            max_of(&sfc)
        ),
    })
}

fn funk(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = Setup::resolve(cfg)?;
    let spray = setup.spray(cfg)?;
    let factor = setup.factor(cfg)?;
    let (scenario_cfg, _) = cfg.tolerances()?;
    let n = setup.chart.dim();
    let names = std::iter::once("P".to_string())
        .chain((1..=n).map(|j| format!("dh_P_{j}")))
        .chain((1..=n).map(|j| format!("P_dJ_P_{j}")))
        .chain(["residual_norm", "normalized", "side_ratio"].map(String::from));
    let table = setup.table(setup.columns(names), |p| {
        let r = projective::funk_residual(spray.as_ref(), &factor, p)?;
        let mut row = vec![r.value];
        row.extend(&r.horizontal);
        row.extend(&r.product);
        row.extend([r.norm, r.normalized, r.side_ratio()]);
        Ok(row)
    })?;
    write_table(cfg, &table)?;
    let normalized = table.column("normalized").expect("column present");
    let solved = normalized.iter().filter(|v| **v <= scenario_cfg.funk_tol).count();
    let ratios: Vec<f64> = table
        .column("side_ratio")
        .expect("column present")
        .into_iter()
        .filter(|v| v.is_finite())
        .collect();
    let ratio_text = if ratios.is_empty() {
        "side ratio undefined".to_string()
    } else {
        format!("side ratio in [{:.9}, {:.9}]", min_of(&ratios), max_of(&ratios))
    };
    Ok(Outcome {
        passed: true,
        summary: format!(
            "funk: {} samples, max normalized residual {:.3e}, {solved} within {:e}, {ratio_text}",
            table.rows.len(),
            max_of(&normalized),
            scenario_cfg.funk_tol
        ),
    })
}

fn metrizability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = Setup::resolve(cfg)?;
    let spray = setup.spray(cfg)?;
    let (_, checks) = cfg.tolerances()?;
    let columns = setup.columns(["geodesic_res", "metrizability_res"].map(String::from));
    let table = setup.table(columns, |p| {
        Ok(vec![
            finsler::geodesic_equation_residual(spray.as_ref(), &setup.metric, p)?,
            finsler::metrizability_residual(spray.as_ref(), &setup.metric, p)?,
        ])
    })?;
    write_table(cfg, &table)?;
    let worst = max_of(&table.column("metrizability_res").expect("column present"));
    let passed = worst <= checks.metrizability;
    Ok(Outcome {
        passed,
        summary: format!(
            "metrizability: {} samples, max residual {worst:.3e} (<= {:e}): {}",
            table.rows.len(),
            checks.metrizability,
            verdict(passed)
        ),
    })
}

fn deform_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = Setup::resolve(cfg)?;
    let spray = setup.spray(cfg)?;
    let factor = setup.factor(cfg)?;
    let (_, checks) = cfg.tolerances()?;
    let columns = setup.columns(["connection_res", "jacobi_res"].map(String::from));
    let table = setup.table(columns, |p| {
        Ok(vec![
            projective::deformed_connection_residual(&spray, &factor, p)?,
            projective::deformed_jacobi_residual(&spray, &factor, p)?,
        ])
    })?;
    write_table(cfg, &table)?;
    let connection = max_of(&table.column("connection_res").expect("column present"));
    let jacobi = max_of(&table.column("jacobi_res").expect("column present"));
    let passed = connection <= checks.connection && jacobi <= checks.jacobi;
    Ok(Outcome {
        passed,
        summary: format!(
            "deform-check: {} samples, connection {connection:.3e} (<= {:e}), jacobi {jacobi:.3e} (<= {:e}): {}",
            table.rows.len(),
            checks.connection,
            checks.jacobi,
            verdict(passed)
        ),
    })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs a scenario. With an output path the JSON report goes there and the
/// text report next to it with a `.txt` extension; otherwise the report is
/// printed in the requested format.
fn scenario(name: ScenarioName, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = scenario_report(name, cfg)?;
    let text = report.to_text();
    match &cfg.output.path {
        Some(path) => {
            emit(Some(path), &report.to_json())?;
            emit(Some(&path.with_extension("txt")), &text)?;
        }
        None => match cfg.format() {
            Format::Json => emit(None, &report.to_json())?,
            Format::Csv => emit(None, &text)?,
        },
    }
    Ok(Outcome {
        passed: report.verdict,
        summary: format!(
            "scenario {}: {} samples tested, {} excluded: {}",
            report.scenario_id,
            report.samples_tested,
            report.samples_excluded,
            verdict(report.verdict)
        ),
    })
}

pub fn scenario_report(name: ScenarioName, cfg: &RunConfig) -> Result<ScenarioReport, CliError> {
    let (scenario_cfg, _) = cfg.tolerances()?;
    let grid = cfg.grid(200, scenario_cfg.max_base_norm)?;
    let default_dim = if name == ScenarioName::Prop1 { 3 } else { 2 };
    let chart = cfg.chart(default_dim)?;
    // resolve user strings here so that errors name their config key
    let metric = cfg.metric.spec.clone().unwrap_or_else(|| "poincare".into());
    if name != ScenarioName::Flat {
        cfg.metric(&chart, &metric)?;
    }
    let expression = |value: &Option<String>, default: &str, field: &str| -> Result<String, CliError> {
        let src = value.clone().unwrap_or_else(|| default.into());
        expr::field(&src, &chart).map_err(|e| CliError::Config {
            field: field.into(),
            message: e.to_string(),
        })?;
        Ok(src)
    };
    let context = format!("scenario {}", name.id());
    let result = match name {
        ScenarioName::Thm1 => {
            let setup = Theorem1Setup {
                chart: chart.clone(),
                metric,
                base_function: expression(&cfg.scenario.base_function, "x1", "scenario.base_function")?,
                coefficient: expression(&cfg.scenario.coefficient, "1", "scenario.coefficient")?,
            };
            scenarios::run_theorem1(&setup, &grid, &scenario_cfg)
        }
        ScenarioName::Prop1 => {
            let setup = Proposition1Setup {
                chart: chart.clone(),
                metric,
                lambda: cfg.scenario.lambda.unwrap_or(2.0),
            };
            scenarios::run_proposition1(&setup, &grid, &scenario_cfg)
        }
        ScenarioName::Flat => scenarios::run_flat_control(&FlatSetup { chart: chart.clone() }, &grid, &scenario_cfg),
    };
    result.map_err(|source| CliError::Eval { context, source })
}
