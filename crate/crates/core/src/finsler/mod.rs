//! Finsler functions: regularity, geodesic sprays, metrizability residuals and
//! the scalar-flag-curvature decomposition.
//!
//! Regularity is tested through the fiber Hessian `gᵢⱼ = ½ ∂²F²/∂yⁱ∂yʲ`. In
//! induced coordinates the 2-form `dd_J F²` has the block form
//! `[[A − Aᵀ, −2g], [2g, 0]]`, so it is symplectic exactly when `g` is
//! nondegenerate.

pub mod builtin;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::coords::{check_dim, xvar, yvar, Field, Jet, TangentSample, Tolerances};
use crate::error::{Error, Result};
use crate::expr::homogeneity_degree;
use crate::spraycalc::{self, check_order, SprayField, VerticalEndomorphism};

/// A positive, fiber 1-homogeneous field with nondegenerate fiber Hessian of
/// its square. Positivity and homogeneity are only checked at samples.
#[derive(Debug, Clone)]
pub struct FinslerFunction {
    field: Field,
    name: String,
}

impl FinslerFunction {
    pub fn new(name: impl Into<String>, field: Field) -> Self {
        FinslerFunction {
            field,
            name: name.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn value(&self, p: &TangentSample) -> Result<f64> {
        self.field.value(p)
    }

    /// Jet of `F²`.
    pub fn energy(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let f = self.field.jet(p, order)?;
        Ok(&f * &f)
    }

    /// Verifies positivity, 1-homogeneity and regularity at `p`.
    pub fn check_at(&self, p: &TangentSample, tol: &Tolerances) -> Result<()> {
        let h = homogeneity_degree(self.field.as_ref(), p)?;
        if (h.degree - 1.0).abs() > tol.homogeneity.max(1e-9) || !h.is_homogeneous(tol.homogeneity.max(1e-9)) {
            return Err(Error::PreconditionFailed(format!(
                "{} is not 1-homogeneous at {p:?} (estimates {:?})",
                self.name, h.estimates
            )));
        }
        let m = metric_tensor(self, p)?;
        if m.degenerate {
            return Err(Error::DegenerateMetric { det: m.det });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    /// `None` when the metric is degenerate.
    pub g_inv: Option<DMatrix<f64>>,
    pub det: f64,
    /// Ratio of extreme singular values; infinite when singular.
    pub condition_estimate: f64,
    /// `|det g| < degenerate_det · (max |gᵢⱼ|)ⁿ`.
    pub degenerate: bool,
}

impl MetricData {
    pub fn from_matrix(g: DMatrix<f64>, tol: &Tolerances) -> Self {
        let n = g.nrows();
        let det = g.determinant();
        let scale = g.amax().powi(n as i32).max(f64::MIN_POSITIVE);
        let degenerate = det.abs() < tol.degenerate_det * scale;
        let sv = g.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        let condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let g_inv = if degenerate { None } else { g.clone().try_inverse() };
        MetricData {
            g,
            g_inv,
            det,
            condition_estimate,
            degenerate,
        }
    }

    /// `|det g| / (max |gᵢⱼ|)ⁿ`.
    pub fn scaled_det(&self) -> f64 {
        let n = self.g.nrows();
        self.det.abs() / self.g.amax().powi(n as i32).max(f64::MIN_POSITIVE)
    }
}

/// `gᵢⱼ = ½ ∂²F²/∂yⁱ∂yʲ` with inverse and degeneracy flag.
pub fn metric_tensor(f: &FinslerFunction, p: &TangentSample) -> Result<MetricData> {
    check_dim(f.dim(), p)?;
    let n = p.dim();
    let e = f.energy(p, 2)?;
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * e.partial(&[yvar(n, i), yvar(n, j)]));
    Ok(MetricData::from_matrix(g, &Tolerances::default()))
}

/// Geodesic spray of a Finsler function:
/// `Gⁱ = ¼ gⁱᵏ (yʲ ∂²F²/∂yᵏ∂xʲ − ∂F²/∂xᵏ)`.
#[derive(Debug, Clone)]
pub struct GeodesicSpray {
    metric: FinslerFunction,
}

impl GeodesicSpray {
    pub fn metric(&self) -> &FinslerFunction {
        &self.metric
    }
}

pub fn geodesic_spray(f: &FinslerFunction) -> GeodesicSpray {
    GeodesicSpray { metric: f.clone() }
}

impl SprayField for GeodesicSpray {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.dim(), p)?;
        check_order(order)?;
        let n = p.dim();
        let e = self.metric.energy(p, order + 2)?;
        let vars = p.seed(order);
        let ey: Vec<Jet> = (0..n).map(|k| e.diff(yvar(n, k))).collect();
        let g: Vec<Vec<Jet>> = (0..n)
            .map(|k| (0..n).map(|l| ey[k].diff(yvar(n, l)) * 0.5).collect())
            .collect();
        let g_values = DMatrix::from_fn(n, n, |k, l| g[k][l].value());
        let metric = MetricData::from_matrix(g_values, &Tolerances::default());
        if metric.degenerate {
            return Err(Error::DegenerateMetric { det: metric.det });
        }
        let rhs: Vec<Jet> = (0..n)
            .map(|k| {
                let mut acc = e.diff(xvar(k)).truncate(order) * -1.0;
                for j in 0..n {
                    acc = acc + &vars[yvar(n, j)] * ey[k].diff(xvar(j));
                }
                acc * 0.25
            })
            .collect();
        solve_jets(g, rhs)
    }
}

/// Gaussian elimination with partial pivoting on jet-valued systems.
fn solve_jets(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>) -> Result<Vec<Jet>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .expect("non-empty");
        if a[pivot][col].value() == 0.0 {
            return Err(Error::DegenerateMetric { det: 0.0 });
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip()?;
        for row in col + 1..n {
            let factor = &a[row][col] * &inv;
            let (above, below) = a.split_at_mut(row);
            for (target, pivot_entry) in below[0][col..].iter_mut().zip(&above[col][col..]) {
                *target = &*target - &factor * pivot_entry;
            }
            let update = &factor * &b[col];
            b[row] = &b[row] - update;
        }
    }
    let mut x: Vec<Option<Jet>> = vec![None; n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - &a[row][k] * x[k].as_ref().expect("solved");
        }
        x[row] = Some(acc.try_div(&a[row][row])?);
    }
    Ok(x.into_iter().map(|v| v.expect("solved")).collect())
}

/// The 1-form `i_S dd_J F² + dF²` on all `2n` frame vectors, normalised by
/// `|F²| + |dF²|`. Vanishes exactly when `S` is the geodesic spray of `F`.
pub fn geodesic_equation_residual(spray: &dyn SprayField, f: &FinslerFunction, p: &TangentSample) -> Result<f64> {
    let form = geodesic_equation_form(spray, f, p)?;
    let e = f.energy(p, 1)?;
    let de: f64 = (0..2 * p.dim()).map(|a| e.partial(&[a]).powi(2)).sum::<f64>().sqrt();
    Ok(form.norm() / (e.value().abs() + de + Tolerances::default().abs_floor))
}

/// Components of `i_S dd_J F² + dF²` in the coframe `(dx, dy)`.
pub fn geodesic_equation_form(spray: &dyn SprayField, f: &FinslerFunction, p: &TangentSample) -> Result<DVector<f64>> {
    check_dim(f.dim(), p)?;
    let n = p.dim();
    let m = 2 * n;
    let e = f.energy(p, 2)?;
    let g = spray.coefficients(p, 0)?;
    // ω = d(d_J E) = Σᵢ Σₐ ∂ₐ(∂E/∂yⁱ) dzᵃ ∧ dxⁱ, stored as ω(U, V) = Uᵀ W V
    let mut w = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for a in 0..m {
            let c = e.partial(&[a, yvar(n, i)]);
            w[(a, xvar(i))] += c;
            w[(xvar(i), a)] -= c;
        }
    }
    let s = DVector::from_iterator(m, p.y.iter().copied().chain(g.iter().map(|gi| -2.0 * gi.value())));
    let de = DVector::from_fn(m, |a, _| e.partial(&[a]));
    Ok(w.transpose() * s + de)
}

/// `|d_h F²| / (|F²| + |dF²|)` with `(d_h F²)ⱼ = ∂F²/∂xʲ − Nⁱⱼ ∂F²/∂yⁱ`.
pub fn metrizability_residual(spray: &dyn SprayField, f: &FinslerFunction, p: &TangentSample) -> Result<f64> {
    check_dim(f.dim(), p)?;
    let n = p.dim();
    let e = f.energy(p, 1)?;
    let conn = spraycalc::connection(spray, p)?;
    let dh = DVector::from_fn(n, |j, _| {
        e.partial(&[xvar(j)]) - (0..n).map(|i| conn[(i, j)] * e.partial(&[yvar(n, i)])).sum::<f64>()
    });
    let de: f64 = (0..2 * n).map(|a| e.partial(&[a]).powi(2)).sum::<f64>().sqrt();
    Ok(dh.norm() / (e.value().abs() + de + Tolerances::default().abs_floor))
}

/// The template `F² J − F d_JF ⊗ 𝒞`, i.e. `F² δⁱⱼ − F yⁱ ∂F/∂yʲ`.
pub fn flag_template(f: &FinslerFunction, p: &TangentSample) -> Result<DMatrix<f64>> {
    let n = p.dim();
    let jet = f.field().jet(p, 1)?;
    let fv = jet.value();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { fv * fv } else { 0.0 };
        id - fv * p.y[i] * jet.partial(&[yvar(n, j)])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFlag {
    pub kappa: f64,
    /// `|Φ − κ T|_F / (|Φ|_F + floor)`.
    pub residual: f64,
}

/// Least-squares `κ` in `Φ = κ(F² J − F d_JF ⊗ 𝒞)` over all matrix entries.
pub fn fit_scalar_flag(phi: &DMatrix<f64>, template: &DMatrix<f64>) -> ScalarFlag {
    let tt = template.dot(template);
    let kappa = if tt > 0.0 { phi.dot(template) / tt } else { 0.0 };
    let residual = (phi - template * kappa).norm() / (phi.norm() + Tolerances::default().abs_floor);
    ScalarFlag { kappa, residual }
}

pub fn scalar_flag_decompose(spray: &dyn SprayField, f: &FinslerFunction, p: &TangentSample) -> Result<ScalarFlag> {
    let fv = f.value(p)?;
    if fv <= 0.0 {
        return Err(Error::NonPositiveValue { value: fv, scale: 1.0 });
    }
    let VerticalEndomorphism(phi) = spraycalc::jacobi_endomorphism(spray, p)?;
    Ok(fit_scalar_flag(&phi, &flag_template(f, p)?))
}

#[cfg(test)]
mod tests {
    use super::builtin;
    use super::*;
    use crate::coords::Chart;
    use crate::spraycalc::FlatSpray;

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let chart = Chart::all_space(3).unwrap();
        let f = builtin::euclidean(&chart).unwrap();
        let m = metric_tensor(&f, &sample(&[1.0, 2.0, 3.0], &[0.0, 0.6, 0.8])).unwrap();
        assert!((m.g - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert!(!m.degenerate);
    }

    #[test]
    fn poincare_metric_at_origin() {
        let chart = Chart::unit_ball(2).unwrap();
        let f = builtin::poincare(&chart, -1.0).unwrap();
        let m = metric_tensor(&f, &sample(&[0.0, 0.0], &[0.3, -1.1])).unwrap();
        assert!((m.g - DMatrix::identity(2, 2) * 4.0).norm() < 1e-13);
        let inv = m.g_inv.unwrap();
        assert!((inv * DMatrix::identity(2, 2) * 4.0 - DMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn one_form_metric_is_degenerate() {
        let chart = Chart::unit_ball(2).unwrap();
        let f = builtin::one_form(&chart, "x1", "1 + dot(x,x)").unwrap();
        let m = metric_tensor(&f, &sample(&[0.3, 0.1], &[0.6, 0.8])).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.det, 0.0);
        assert!(m.g_inv.is_none());
        let s = geodesic_spray(&f);
        assert!(matches!(
            s.coefficients(&sample(&[0.3, 0.1], &[0.6, 0.8]), 0),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn flat_geodesic_sprays() {
        let chart = Chart::all_space(2).unwrap();
        let p = sample(&[0.4, -2.0], &[0.6, 0.8]);
        let eu = builtin::euclidean(&chart).unwrap();
        let g = geodesic_spray(&eu).coefficients(&p, 2).unwrap();
        assert!(g.iter().all(|gi| gi.coeffs().iter().all(|c| c.abs() < 1e-15)));
        let c = builtin::constant(&chart, &DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let g = geodesic_spray(&c).coefficients(&p, 2).unwrap();
        assert!(g.iter().all(|gi| gi.coeffs().iter().all(|c| c.abs() < 1e-14)));
    }

    #[test]
    fn flat_spray_is_not_hyperbolic_geodesic() {
        let chart = Chart::unit_ball(2).unwrap();
        let f = builtin::poincare(&chart, -1.0).unwrap();
        let p = sample(&[0.5, 0.2], &[0.6, 0.8]);
        assert!(metrizability_residual(&FlatSpray::new(2), &f, &p).unwrap() > 0.1);
        assert!(metrizability_residual(&geodesic_spray(&f), &f, &p).unwrap() < 1e-12);
        assert!(geodesic_equation_residual(&geodesic_spray(&f), &f, &p).unwrap() < 1e-12);
    }

    #[test]
    fn flat_scalar_flag() {
        let chart = Chart::all_space(2).unwrap();
        let f = builtin::euclidean(&chart).unwrap();
        let sf = scalar_flag_decompose(&FlatSpray::new(2), &f, &sample(&[0.0, 1.0], &[1.0, 1.0])).unwrap();
        assert_eq!((sf.kappa, sf.residual), (0.0, 0.0));
    }
}
