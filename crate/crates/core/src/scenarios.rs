//! End-to-end numeric replays of the non-metrizability results and a flat
//! positive control, each producing a [`ScenarioReport`] with per-check
//! summaries and an overall verdict.
//!
//! Every per-sample computation runs through [`crate::par::try_map`]; the
//! summaries are reduced sequentially in sample order, so a report depends
//! only on its setup, grid and config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coords::{
    dot, norm, sample_grid, yvar, BaseDomain, Chart, Conformal, GridSpec, ScalarField, TangentSample, Tolerances,
};
use crate::error::{Error, Result};
use crate::finsler::{self, builtin};
use crate::projective::{self, ProjectiveFactor};
use crate::spraycalc::{self, FlatSpray, Spray, SprayField};
use crate::{expr, par};

/// Version of the report JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Thresholds shared by all scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Samples with `|x|` above this are excluded before any check.
    pub max_base_norm: f64,
    /// Inner radius of the annulus used for nonvanishing checks.
    pub annulus_inner: f64,
    /// A normalised residual above this counts as nonvanishing.
    pub nonvanishing_floor: f64,
    /// Fraction of annulus samples that must be nonvanishing.
    pub nonvanishing_fraction: f64,
    /// Relative tolerance for scalar-flag-curvature forms.
    pub form_tol: f64,
    /// Relative tolerance for the two sides of the Funk equation.
    pub ratio_tol: f64,
    /// Relative tolerance for the conformal identity.
    pub conformal_tol: f64,
    /// Normalised Funk residual below this counts as a solution.
    pub funk_tol: f64,
    /// Normalised Jacobi endomorphism below this counts as zero.
    pub curvature_tol: f64,
    /// `|κ₀|` must stay above this for the curvature hypothesis.
    pub kappa_min: f64,
    /// Allowed `max κ − min κ` for constant flag curvature.
    pub kappa_spread: f64,
    /// Scaled determinant below this counts as degenerate.
    pub degenerate_det: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            max_base_norm: 0.8,
            annulus_inner: 0.3,
            nonvanishing_floor: 1e-3,
            nonvanishing_fraction: 0.95,
            form_tol: 1e-6,
            ratio_tol: 1e-6,
            conformal_tol: 1e-8,
            funk_tol: 1e-8,
            curvature_tol: 1e-7,
            kappa_min: 1e-6,
            kappa_spread: 1e-5,
            degenerate_det: 1e-12,
        }
    }
}

/// How a check's per-sample values are judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Criterion {
    /// Every value `≤ threshold`.
    AtMost,
    /// Every value `> threshold`.
    Above,
    /// At least `fraction` of the values `> threshold`.
    FractionAbove { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub claim: String,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub threshold: f64,
    pub criterion: Criterion,
    /// Fraction of samples meeting the per-sample condition.
    pub passing_fraction: f64,
    pub passed: bool,
}

impl CheckSummary {
    fn new(name: &str, claim: &str, values: &[f64], threshold: f64, criterion: Criterion) -> Self {
        let ok = |v: f64| match criterion {
            Criterion::AtMost => v <= threshold,
            Criterion::Above | Criterion::FractionAbove { .. } => v > threshold,
        };
        let good = values.iter().filter(|&&v| ok(v)).count();
        let passing_fraction = good as f64 / values.len() as f64;
        let passed = !values.is_empty()
            && match criterion {
                Criterion::AtMost | Criterion::Above => good == values.len(),
                Criterion::FractionAbove { fraction } => passing_fraction >= fraction,
            };
        let mut sum = 0.0;
        for v in values {
            sum += v;
        }
        CheckSummary {
            name: name.to_string(),
            claim: claim.to_string(),
            samples: values.len(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: sum / values.len() as f64,
            threshold,
            criterion,
            passing_fraction,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Setup {
    pub chart: Chart,
    /// Metric spec for `F₀`, see [`builtin::from_spec`].
    pub metric: String,
    /// Basic function `a(x)`.
    pub base_function: String,
    /// Coefficient `b(x)` of the degenerate 1-form metric `b ⟨da, y⟩`.
    pub coefficient: String,
}

impl Default for Theorem1Setup {
    fn default() -> Self {
        Theorem1Setup {
            chart: Chart::unit_ball(2).expect("valid chart"),
            metric: "poincare".into(),
            base_function: "x1".into(),
            coefficient: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposition1Setup {
    pub chart: Chart,
    /// Metric spec for `F̃`, of constant flag curvature.
    pub metric: String,
    pub lambda: f64,
}

impl Default for Proposition1Setup {
    fn default() -> Self {
        Proposition1Setup {
            chart: Chart::unit_ball(3).expect("valid chart"),
            metric: "poincare".into(),
            lambda: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSetup {
    pub chart: Chart,
}

impl Default for FlatSetup {
    fn default() -> Self {
        FlatSetup {
            chart: Chart::unit_ball(2).expect("valid chart"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scenario")]
pub enum ScenarioInputs {
    Theorem1(Theorem1Setup),
    Proposition1(Proposition1Setup),
    Flat(FlatSetup),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: ScenarioInputs,
    pub grid: GridSpec,
    pub config: ScenarioConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario_id: String,
    pub samples_tested: usize,
    /// Grid samples dropped by the `max_base_norm` margin.
    pub samples_excluded: usize,
    pub checks: Vec<CheckSummary>,
    /// Scalar by-products such as fitted curvatures.
    pub metadata: BTreeMap<String, f64>,
    pub verdict: bool,
    pub provenance: Provenance,
}

impl ScenarioReport {
    fn new(
        id: &str,
        samples: &Samples,
        checks: Vec<CheckSummary>,
        metadata: BTreeMap<String, f64>,
        provenance: Provenance,
    ) -> Self {
        let verdict = checks.iter().all(|c| c.passed);
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario_id: id.to_string(),
            samples_tested: samples.kept.len(),
            samples_excluded: samples.excluded,
            checks,
            metadata,
            verdict,
            provenance,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(src: &str) -> serde_json::Result<Self> {
        serde_json::from_str(src)
    }

    /// Plain-text rendering, one line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario_id);
        let _ = writeln!(
            out,
            "samples {} (excluded {}), seed {}",
            self.samples_tested, self.samples_excluded, self.provenance.seed
        );
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "  {k} = {v:.16e}");
        }
        for c in &self.checks {
            let rule = match c.criterion {
                Criterion::AtMost => format!("max <= {:e}", c.threshold),
                Criterion::Above => format!("min > {:e}", c.threshold),
                Criterion::FractionAbove { fraction } => {
                    format!(
                        "{:.1}% > {:e} (need {:.1}%)",
                        100.0 * c.passing_fraction,
                        c.threshold,
                        100.0 * fraction
                    )
                }
            };
            let _ = writeln!(
                out,
                "[{}] {}: min {:.6e} max {:.6e} mean {:.6e}; {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.min,
                c.max,
                c.mean,
                rule
            );
            let _ = writeln!(out, "       {}", c.claim);
        }
        let _ = writeln!(out, "verdict {}", if self.verdict { "PASS" } else { "FAIL" });
        out
    }
}

struct Samples {
    kept: Vec<TangentSample>,
    excluded: usize,
}

fn samples(chart: &Chart, grid: &GridSpec, config: &ScenarioConfig) -> Result<Samples> {
    let all = sample_grid(chart, grid)?;
    let total = all.len();
    let kept: Vec<TangentSample> = all.into_iter().filter(|p| norm(&p.x) <= config.max_base_norm).collect();
    if kept.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(Samples {
        excluded: total - kept.len(),
        kept,
    })
}

fn floor() -> f64 {
    Tolerances::default().abs_floor
}

fn l2(v: &[f64]) -> f64 {
    norm(v)
}

fn spread(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

struct Theorem1Row {
    kappa: f64,
    form: f64,
    conformal: f64,
    lift_scale: f64,
    funk: f64,
    in_annulus: bool,
    det: f64,
}

/// Replays the non-metrizability argument for deformations of a spray of
/// nonvanishing scalar flag curvature:
///
/// * `sfc_form`: `Φ₀ = κ₀(F₀² J − F₀ d_JF₀ ⊗ 𝒞)`;
/// * `conformal_lift`: `S₀(e^{2a}F₀) / (2e^{2a}F₀) = aᶜ`;
/// * `lift_not_funk`: `aᶜ` fails the Funk equation on the annulus;
/// * `one_form_degenerate`: `b ⟨da, y⟩` has singular fiber Hessian.
pub fn run_theorem1(setup: &Theorem1Setup, grid: &GridSpec, config: &ScenarioConfig) -> Result<ScenarioReport> {
    let chart = &setup.chart;
    let s = samples(chart, grid, config)?;
    let f0 = builtin::from_spec(&setup.metric, chart)?;
    let a = expr::field(&setup.base_function, chart)?;
    let lift = projective::complete_lift(a.clone(), &s.kept)?;
    let degenerate = builtin::one_form(chart, &setup.base_function, &setup.coefficient)?;
    let s0 = finsler::geodesic_spray(&f0);
    let conformal: Arc<dyn ScalarField> = Arc::new(Conformal {
        exponent: a.clone(),
        base: f0.field().clone(),
    });
    let n = chart.dim();

    let rows = par::try_map(&s.kept, |p| -> Result<Theorem1Row> {
        let sfc = finsler::scalar_flag_decompose(&s0, &f0, p)?;
        let g = s0.coefficients(p, 1)?;
        let fj = conformal.jet(p, 1)?;
        let ratio = spraycalc::apply_spray(p, &g, &fj).value() / (2.0 * fj.value());
        let pj = lift.field().jet(p, 1)?;
        let grad: Vec<f64> = (0..n).map(|i| pj.partial(&[yvar(n, i)])).collect();
        let lift_scale = l2(&grad) * l2(&p.y);
        let conformal_err = (ratio - pj.value()).abs() / (lift_scale + floor());
        let funk = projective::funk_residual(&s0, &lift, p)?;
        let det = finsler::metric_tensor(&degenerate, p)?.scaled_det();
        Ok(Theorem1Row {
            kappa: sfc.kappa,
            form: sfc.residual,
            conformal: conformal_err,
            lift_scale,
            funk: funk.normalized,
            in_annulus: norm(&p.x) >= config.annulus_inner,
            det,
        })
    })?;

    let kappas: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    if let Some(k) = kappas.iter().find(|k| k.abs() < config.kappa_min) {
        return Err(Error::PreconditionFailed(format!(
            "flag curvature {k:e} of `{}` vanishes on the grid (|kappa| < {:e})",
            setup.metric, config.kappa_min
        )));
    }
    if rows.iter().all(|r| r.lift_scale <= floor()) {
        return Err(Error::PreconditionFailed(format!(
            "projective factor P = complete lift of `{}` vanishes on the grid",
            setup.base_function
        )));
    }
    let annulus: Vec<f64> = rows.iter().filter(|r| r.in_annulus).map(|r| r.funk).collect();
    if annulus.is_empty() {
        return Err(Error::PreconditionFailed(format!(
            "no samples with {} <= |x| <= {}",
            config.annulus_inner, config.max_base_norm
        )));
    }

    let col = |f: fn(&Theorem1Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let checks = vec![
        CheckSummary::new(
            "sfc_form",
            "Jacobi endomorphism of S0 has scalar flag curvature form",
            &col(|r| r.form),
            config.form_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "conformal_lift",
            "S0(e^{2a}F0)/(2 e^{2a}F0) equals the complete lift of a",
            &col(|r| r.conformal),
            config.conformal_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "lift_not_funk",
            "complete lift of a is not a Funk function for S0",
            &annulus,
            config.nonvanishing_floor,
            Criterion::FractionAbove {
                fraction: config.nonvanishing_fraction,
            },
        ),
        CheckSummary::new(
            "one_form_degenerate",
            "fiber Hessian of b(x)<da, y>^2 is singular",
            &col(|r| r.det),
            config.degenerate_det,
            Criterion::AtMost,
        ),
    ];
    let (kmin, kmax) = spread(&kappas);
    let metadata = BTreeMap::from([("kappa0_min".to_string(), kmin), ("kappa0_max".to_string(), kmax)]);
    Ok(ScenarioReport::new(
        "theorem1",
        &s,
        checks,
        metadata,
        Provenance {
            inputs: ScenarioInputs::Theorem1(setup.clone()),
            grid: grid.clone(),
            config: config.clone(),
            seed: grid.seed,
        },
    ))
}

struct Proposition1Row {
    form: f64,
    kappa_fit: f64,
    ratio: f64,
    horizontal: f64,
    product: f64,
    residual_norm: f64,
    metrizability: f64,
}

/// Builds `S₀ = S̃ − 2λF̃𝒞` from a metric of constant flag curvature `k̃` and
/// checks:
///
/// * `sfc_form`: `Φ₀ = (k̃ + λ²)(F̃² J − F̃ d_JF̃ ⊗ 𝒞)`;
/// * `side_ratio`: for `P = −λF̃`, `d_{h₀}P = 2 P d_JP`;
/// * `horizontal_side`, `product_side`: `d_{h₀}P = 2λ²F̃ d_JF̃` and
///   `P d_JP = λ²F̃ d_JF̃`;
/// * `funk_residual_norm`: `|d_{h₀}P − P d_JP| = λ²F̃ |d_JF̃|`;
///
/// The signs follow from `N₀ = Ñ + λF̃ Id + λ y ⊗ d_JF̃` and `d_h̃F̃ = 0`;
/// they are also the only ones compatible with the Jacobi transformation
/// law and the form of `Φ₀`.
/// * `not_metrizable_by_f`: `S₀` is not the geodesic spray of `F̃`.
pub fn run_proposition1(setup: &Proposition1Setup, grid: &GridSpec, config: &ScenarioConfig) -> Result<ScenarioReport> {
    let chart = &setup.chart;
    let n = chart.dim();
    let lambda = setup.lambda;
    if n < 3 {
        return Err(Error::PreconditionFailed(format!("dimension {n} < 3")));
    }
    if !lambda.is_finite() || lambda == 0.0 {
        return Err(Error::PreconditionFailed(format!(
            "lambda must be finite and nonzero, got {lambda}"
        )));
    }
    let s = samples(chart, grid, config)?;
    let ft = builtin::from_spec(&setup.metric, chart)?;
    let st = finsler::geodesic_spray(&ft);

    let fits = par::try_map(&s.kept, |p| finsler::scalar_flag_decompose(&st, &ft, p))?;
    if let Some(bad) = fits.iter().find(|f| f.residual > config.form_tol) {
        return Err(Error::PreconditionFailed(format!(
            "`{}` is not of scalar flag curvature (fit residual {:e})",
            setup.metric, bad.residual
        )));
    }
    let kappas: Vec<f64> = fits.iter().map(|f| f.kappa).collect();
    let (kmin, kmax) = spread(&kappas);
    if kmax - kmin > config.kappa_spread {
        return Err(Error::PreconditionFailed(format!(
            "flag curvature of `{}` is not constant (spread {:e})",
            setup.metric,
            kmax - kmin
        )));
    }
    let k_tilde = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let coefficient = k_tilde + lambda * lambda;
    if coefficient.abs() <= config.kappa_min {
        return Err(Error::PreconditionFailed(format!(
            "k + lambda^2 = {coefficient:e} vanishes for k = {k_tilde}, lambda = {lambda}"
        )));
    }

    let base: Spray = Arc::new(st);
    let ft_factor = ProjectiveFactor::new(ft.field().clone());
    let s0 = projective::deform(base, ft_factor.scaled(lambda));
    let candidate = ft_factor.scaled(-lambda);
    let l2sq = lambda * lambda;

    let rows = par::try_map(&s.kept, |p| -> Result<Proposition1Row> {
        let phi0 = spraycalc::jacobi_endomorphism(&s0, p)?.0;
        let template = finsler::flag_template(&ft, p)?;
        let expected = &template * coefficient;
        let form = (&phi0 - &expected).norm() / (expected.norm() + floor());
        let kappa_fit = finsler::fit_scalar_flag(&phi0, &template).kappa;

        let fj = ft.field().jet(p, 1)?;
        let fv = fj.value();
        let djf: Vec<f64> = (0..n).map(|j| fj.partial(&[yvar(n, j)])).collect();
        let r = projective::funk_residual(&s0, &candidate, p)?;
        let rel = |got: &[f64], want: &[f64]| {
            let diff: Vec<f64> = got.iter().zip(want).map(|(g, w)| g - w).collect();
            l2(&diff) / (l2(want) + floor())
        };
        let want_h: Vec<f64> = djf.iter().map(|d| 2.0 * l2sq * fv * d).collect();
        let want_q: Vec<f64> = djf.iter().map(|d| l2sq * fv * d).collect();
        let two_q: Vec<f64> = r.product.iter().map(|q| 2.0 * q).collect();
        let norm_expected = l2sq * fv * l2(&djf);
        Ok(Proposition1Row {
            form,
            kappa_fit,
            ratio: rel(&r.horizontal, &two_q),
            horizontal: rel(&r.horizontal, &want_h),
            product: rel(&r.product, &want_q),
            residual_norm: (r.norm - norm_expected).abs() / (norm_expected + floor()),
            metrizability: finsler::metrizability_residual(&s0, &ft, p)?,
        })
    })?;

    let col = |f: fn(&Proposition1Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let checks = vec![
        CheckSummary::new(
            "sfc_form",
            "Jacobi endomorphism of S0 is (k + lambda^2)(F^2 J - F d_JF (x) C)",
            &col(|r| r.form),
            config.form_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "side_ratio",
            "for P = -lambda F, d_h0 P = 2 P d_J P",
            &col(|r| r.ratio),
            config.ratio_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "horizontal_side",
            "d_h0 P = 2 lambda^2 F d_J F",
            &col(|r| r.horizontal),
            config.ratio_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "product_side",
            "P d_J P = lambda^2 F d_J F",
            &col(|r| r.product),
            config.ratio_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "funk_residual_norm",
            "|d_h0 P - P d_J P| = lambda^2 F |d_J F|, so P is not a Funk function",
            &col(|r| r.residual_norm),
            config.ratio_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "not_metrizable_by_f",
            "S0 is not the geodesic spray of F",
            &col(|r| r.metrizability),
            config.nonvanishing_floor,
            Criterion::Above,
        ),
    ];
    let (fmin, fmax) = spread(&col(|r| r.kappa_fit));
    let metadata = BTreeMap::from([
        ("k_tilde".to_string(), k_tilde),
        ("k_tilde_plus_lambda_sq".to_string(), coefficient),
        ("kappa0_fit_min".to_string(), fmin),
        ("kappa0_fit_max".to_string(), fmax),
    ]);
    Ok(ScenarioReport::new(
        "proposition1",
        &s,
        checks,
        metadata,
        Provenance {
            inputs: ScenarioInputs::Proposition1(setup.clone()),
            grid: grid.clone(),
            config: config.clone(),
            seed: grid.seed,
        },
    ))
}

struct FlatRow {
    phi_flat: f64,
    funk: f64,
    phi_deformed: f64,
    negated: f64,
}

/// Positive control on the unit ball: the Funk function solves the Funk
/// equation for the flat spray, and deforming by it keeps `Φ = 0`.
/// The negated function `−P` must fail the equation.
pub fn run_flat_control(setup: &FlatSetup, grid: &GridSpec, config: &ScenarioConfig) -> Result<ScenarioReport> {
    let chart = &setup.chart;
    if *chart.domain() != (BaseDomain::Ball { radius: 1.0 }) {
        return Err(Error::PreconditionFailed(
            "flat control needs the unit-ball chart".into(),
        ));
    }
    let n = chart.dim();
    let s = samples(chart, grid, config)?;
    let flat: Spray = Arc::new(FlatSpray::new(n));
    let funk = ProjectiveFactor::new(builtin::funk_field(chart)?);
    let negated = funk.negated();
    let deformed = projective::deform(flat.clone(), funk.clone());

    let rows = par::try_map(&s.kept, |p| -> Result<FlatRow> {
        let phi = spraycalc::jacobi_endomorphism(flat.as_ref(), p)?;
        let r = projective::funk_residual(flat.as_ref(), &funk, p)?;
        let phi_d = spraycalc::jacobi_endomorphism(&deformed, p)?;
        let pv = r.value;
        let neg = projective::funk_residual(flat.as_ref(), &negated, p)?;
        Ok(FlatRow {
            phi_flat: phi.frobenius(),
            funk: r.normalized,
            phi_deformed: phi_d.frobenius() / (pv * pv * dot(&p.y, &p.y).max(1.0) + floor()),
            negated: neg.normalized,
        })
    })?;

    let col = |f: fn(&FlatRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let checks = vec![
        CheckSummary::new(
            "flat_phi",
            "flat spray has vanishing Jacobi endomorphism",
            &col(|r| r.phi_flat),
            config.curvature_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "funk_equation",
            "ball Funk function solves d_h P = P d_J P for the flat spray",
            &col(|r| r.funk),
            config.funk_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "deformed_phi",
            "deforming the flat spray by the Funk function keeps the Jacobi endomorphism zero",
            &col(|r| r.phi_deformed),
            config.curvature_tol,
            Criterion::AtMost,
        ),
        CheckSummary::new(
            "negated_not_funk",
            "the negated function fails the Funk equation",
            &col(|r| r.negated),
            config.nonvanishing_floor,
            Criterion::Above,
        ),
    ];
    Ok(ScenarioReport::new(
        "flat",
        &s,
        checks,
        BTreeMap::new(),
        Provenance {
            inputs: ScenarioInputs::Flat(setup.clone()),
            grid: grid.clone(),
            config: config.clone(),
            seed: grid.seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(seed: u64) -> GridSpec {
        GridSpec::random_ball(20, 0.8, seed)
    }

    #[test]
    fn summary_statistics() {
        let c = CheckSummary::new("c", "", &[1.0, 3.0, 2.0], 2.5, Criterion::AtMost);
        assert_eq!((c.min, c.max, c.mean, c.samples), (1.0, 3.0, 2.0, 3));
        assert!(!c.passed);
        assert_eq!(c.passing_fraction, 2.0 / 3.0);
        let f = CheckSummary::new(
            "f",
            "",
            &[1.0, 3.0, 2.0],
            1.5,
            Criterion::FractionAbove { fraction: 0.6 },
        );
        assert!(f.passed);
        let a = CheckSummary::new("a", "", &[1.0, 3.0], 1.0, Criterion::Above);
        assert!(!a.passed);
    }

    #[test]
    fn scenarios_pass_on_small_grids() {
        let config = ScenarioConfig::default();
        let t = run_theorem1(&Theorem1Setup::default(), &small_grid(1), &config).unwrap();
        assert!(t.verdict, "{}", t.to_text());
        let p = run_proposition1(&Proposition1Setup::default(), &small_grid(2), &config).unwrap();
        assert!(p.verdict, "{}", p.to_text());
        let f = run_flat_control(&FlatSetup::default(), &small_grid(3), &config).unwrap();
        assert!(f.verdict, "{}", f.to_text());
    }

    #[test]
    fn guards() {
        let config = ScenarioConfig::default();
        let grid = small_grid(4);
        let euclid = Theorem1Setup {
            metric: "euclidean".into(),
            ..Theorem1Setup::default()
        };
        assert!(matches!(
            run_theorem1(&euclid, &grid, &config),
            Err(Error::PreconditionFailed(_))
        ));
        let constant = Theorem1Setup {
            base_function: "3".into(),
            ..Theorem1Setup::default()
        };
        assert!(matches!(
            run_theorem1(&constant, &grid, &config),
            Err(Error::PreconditionFailed(_))
        ));
        for lambda in [0.0, 1.0, -1.0] {
            let setup = Proposition1Setup {
                lambda,
                ..Proposition1Setup::default()
            };
            assert!(matches!(
                run_proposition1(&setup, &grid, &config),
                Err(Error::PreconditionFailed(_))
            ));
        }
        let flat2 = Proposition1Setup {
            chart: Chart::unit_ball(2).unwrap(),
            ..Proposition1Setup::default()
        };
        assert!(matches!(
            run_proposition1(&flat2, &grid, &config),
            Err(Error::PreconditionFailed(_))
        ));
        let wide = FlatSetup {
            chart: Chart::all_space(2).unwrap(),
        };
        assert!(run_flat_control(&wide, &grid, &config).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = run_flat_control(&FlatSetup::default(), &small_grid(5), &ScenarioConfig::default()).unwrap();
        let back = ScenarioReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_text().contains("verdict PASS"));
    }
}
