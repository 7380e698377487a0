//! Run configuration: a TOML document with one section per spec kind.
//!
//! Every field is optional so that command-specific defaults can fill the
//! gaps; command-line flags are merged on top of the file with
//! [`RunConfig::apply`]. Resolution methods turn the raw strings into core
//! objects and report failures against the config key that produced them.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use spraylab_core::coords::{BaseDomain, Chart, FiberCone, GridSpec, TangentSample};
use spraylab_core::expr;
use spraylab_core::finsler::{self, builtin, FinslerFunction};
use spraylab_core::projective::{self, deform, ProjectiveFactor};
use spraylab_core::scenarios::ScenarioConfig;
use spraylab_core::spraycalc::{FieldSpray, FlatSpray, Spray};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chart: ChartSection,
    pub metric: MetricSection,
    pub spray: SpraySection,
    pub factor: FactorSection,
    pub grid: GridSection,
    /// Scenario thresholds plus the per-command check tolerances.
    pub tolerances: toml::Table,
    pub output: OutputSection,
    pub scenario: ScenarioSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSection {
    pub dim: Option<usize>,
    /// `"ball"` (default) or `"all_space"`.
    pub domain: Option<String>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub spec: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpraySection {
    /// `geodesic` (of the metric), `flat`, `expr` or `expr:<G1>;<G2>;...`.
    pub spec: Option<String>,
    /// Coefficients for `spec = "expr"`.
    pub coefficients: Option<Vec<String>>,
    /// Factor specs applied in order as `S ↦ S − 2P𝒞`.
    pub deform: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorSection {
    pub spec: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub samples: Option<usize>,
    pub max_norm: Option<f64>,
    pub min_norm: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub lambda: Option<f64>,
    pub base_function: Option<String>,
    pub coefficient: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub metric: Option<String>,
    pub spray: Option<String>,
    pub factor: Option<String>,
    pub deform: Vec<String>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub max_norm: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub lambda: Option<f64>,
    pub base_function: Option<String>,
    pub coefficient: Option<String>,
}

/// Tolerances of the pointwise check commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    pub connection: f64,
    pub jacobi: f64,
    pub metrizability: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            connection: 1e-9,
            jacobi: 1e-7,
            metrizability: 1e-8,
        }
    }
}

/// Default number of grid samples when neither file nor flags set one.
pub const DEFAULT_SAMPLES: usize = 100;

fn config_error(field: &str, message: impl ToString) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| config_error("config", e.to_string().trim_end()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&src)
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        set(&mut self.metric.spec, &o.metric);
        set(&mut self.spray.spec, &o.spray);
        set(&mut self.factor.spec, &o.factor);
        self.spray.deform.extend(o.deform.iter().cloned());
        set(&mut self.chart.dim, &o.dim);
        set(&mut self.grid.samples, &o.samples);
        set(&mut self.grid.seed, &o.seed);
        set(&mut self.grid.max_norm, &o.max_norm);
        set(&mut self.output.path, &o.out);
        set(&mut self.output.format, &o.format);
        set(&mut self.scenario.lambda, &o.lambda);
        set(&mut self.scenario.base_function, &o.base_function);
        set(&mut self.scenario.coefficient, &o.coefficient);
    }

    pub fn chart(&self, default_dim: usize) -> Result<Chart, CliError> {
        let dim = self.chart.dim.unwrap_or(default_dim);
        let domain = match self.chart.domain.as_deref().unwrap_or("ball") {
            "ball" => BaseDomain::Ball {
                radius: self.chart.radius.unwrap_or(1.0),
            },
            "all_space" => BaseDomain::AllSpace,
            other => return Err(config_error("chart.domain", format!("unknown domain `{other}`"))),
        };
        Chart::new(dim, domain, FiberCone::Full).map_err(|e| config_error("chart", e))
    }

    pub fn metric(&self, chart: &Chart, default: &str) -> Result<FinslerFunction, CliError> {
        let spec = self.metric.spec.as_deref().unwrap_or(default);
        builtin::from_spec(spec, chart).map_err(|e| config_error("metric.spec", e))
    }

    /// The configured spray with its deformations applied.
    pub fn spray(&self, chart: &Chart, metric: &FinslerFunction, samples: &[TangentSample]) -> Result<Spray, CliError> {
        let spec = self.spray.spec.as_deref().unwrap_or("geodesic");
        let base: Spray = match spec.split_once(':') {
            None if spec == "geodesic" => Arc::new(finsler::geodesic_spray(metric)),
            None if spec == "flat" => Arc::new(FlatSpray::new(chart.dim())),
            None if spec == "expr" => {
                let sources = self
                    .spray
                    .coefficients
                    .as_ref()
                    .ok_or_else(|| config_error("spray.coefficients", "required when spray.spec = \"expr\""))?;
                Arc::new(field_spray(
                    sources.iter().map(String::as_str),
                    chart,
                    "spray.coefficients",
                )?)
            }
            Some(("expr", list)) => Arc::new(field_spray(list.split(';'), chart, "spray.spec")?),
            _ => return Err(config_error("spray.spec", format!("unknown spray `{spec}`"))),
        };
        if self.spray.deform.is_empty() {
            return Ok(base);
        }
        let mut factors = Vec::with_capacity(self.spray.deform.len());
        for (i, spec) in self.spray.deform.iter().enumerate() {
            factors.push(factor_from_spec(
                spec,
                chart,
                metric,
                samples,
                &format!("spray.deform[{i}]"),
            )?);
        }
        let mut iter = factors.into_iter();
        let first = iter.next().expect("nonempty");
        let mut deformed = deform(base, first);
        for f in iter {
            deformed = deformed.deform(f);
        }
        Ok(Arc::new(deformed))
    }

    pub fn factor(
        &self,
        chart: &Chart,
        metric: &FinslerFunction,
        samples: &[TangentSample],
    ) -> Result<ProjectiveFactor, CliError> {
        let spec = self
            .factor
            .spec
            .as_deref()
            .ok_or_else(|| config_error("factor.spec", "required by this command"))?;
        factor_from_spec(spec, chart, metric, samples, "factor.spec")
    }

    pub fn grid(&self, default_samples: usize, default_max_norm: f64) -> Result<GridSpec, CliError> {
        let mut grid = GridSpec::random_ball(
            self.grid.samples.unwrap_or(default_samples),
            self.grid.max_norm.unwrap_or(default_max_norm),
            self.grid.seed.unwrap_or(0),
        );
        grid.min_base_norm = self.grid.min_norm.unwrap_or(0.0);
        if grid.min_base_norm > grid.max_base_norm.unwrap_or(f64::INFINITY) {
            return Err(config_error("grid.min_norm", "exceeds grid.max_norm"));
        }
        Ok(grid)
    }

    /// Splits `[tolerances]` into scenario thresholds and check tolerances.
    pub fn tolerances(&self) -> Result<(ScenarioConfig, CheckTolerances), CliError> {
        let mut scenario_keys = toml::Table::new();
        let mut checks = CheckTolerances::default();
        let known = toml::Table::try_from(ScenarioConfig::default()).expect("serializable defaults");
        for (key, value) in &self.tolerances {
            let field = format!("tolerances.{key}");
            let slot = match key.as_str() {
                "connection_tol" => Some(&mut checks.connection),
                "jacobi_tol" => Some(&mut checks.jacobi),
                "metrizability_tol" => Some(&mut checks.metrizability),
                k if known.contains_key(k) => None,
                _ => return Err(config_error(&field, "unknown tolerance")),
            };
            let number = value
                .as_float()
                .or_else(|| value.as_integer().map(|i| i as f64))
                .ok_or_else(|| config_error(&field, "expected a number"))?;
            match slot {
                Some(s) => *s = number,
                None => {
                    scenario_keys.insert(key.clone(), toml::Value::Float(number));
                }
            }
        }
        let scenario: ScenarioConfig = toml::Value::Table(scenario_keys)
            .try_into()
            .map_err(|e| config_error("tolerances", e))?;
        Ok((scenario, checks))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }
}

/// Coefficient expressions, one per dimension; errors name the offending
/// entry as `field[i]`.
fn field_spray<'a>(sources: impl Iterator<Item = &'a str>, chart: &Chart, field: &str) -> Result<FieldSpray, CliError> {
    let coeffs = sources
        .enumerate()
        .map(|(i, src)| expr::field(src, chart).map_err(|e| config_error(&format!("{field}[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != chart.dim() {
        let message = format!("expected {} coefficients, got {}", chart.dim(), coeffs.len());
        return Err(config_error(field, message));
    }
    FieldSpray::new(coeffs).map_err(|e| config_error(field, e))
}

/// Resolves a factor spec: `zero`, `funk`, `expr:<src>`, `lift:<a>` (the
/// complete lift of a basic function) or `metric[:<c>]` (`c` times the
/// configured metric).
pub fn factor_from_spec(
    spec: &str,
    chart: &Chart,
    metric: &FinslerFunction,
    samples: &[TangentSample],
    field: &str,
) -> Result<ProjectiveFactor, CliError> {
    let wrap = |e: spraylab_core::Error| config_error(field, e);
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a)),
        None => (spec.trim(), None),
    };
    match (head, arg) {
        ("zero", None) => Ok(ProjectiveFactor::new(expr::field("0", chart).map_err(wrap)?)),
        ("funk", None) => Ok(ProjectiveFactor::new(builtin::funk_field(chart).map_err(wrap)?)),
        ("expr", Some(src)) => Ok(ProjectiveFactor::new(expr::field(src, chart).map_err(wrap)?)),
        ("lift", Some(src)) => projective::complete_lift(expr::field(src, chart).map_err(wrap)?, samples).map_err(wrap),
        ("metric", None) => Ok(ProjectiveFactor::new(metric.field().clone())),
        ("metric", Some(c)) => {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| config_error(field, format!("bad coefficient `{c}`")))?;
            Ok(ProjectiveFactor::new(metric.field().clone()).scaled(c))
        }
        _ => Err(config_error(field, format!("unknown factor `{spec}`"))),
    }
}
