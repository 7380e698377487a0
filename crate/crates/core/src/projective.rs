//! Projective deformations `S ↦ S − 2P𝒞` and the Funk-function equation.
//!
//! Deforming by a 1-homogeneous factor `P` changes the spray coefficients to
//! `Gⁱ + P yⁱ`. The transformation laws checked here, in matrix form, are
//!
//! ```text
//! N  = N₀ + P·Id + y ⊗ d_J P
//! Φ  = Φ₀ + (P² − S₀(P))·Id − y ⊗ (d_J(S₀(P) − P²) + 3(P d_J P − d_{h₀} P))
//! ```
//!
//! and `P` is a Funk function for `S₀` when `d_{h₀}P = P d_J P`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::coords::{check_dim, xvar, yvar, Field, Jet, Negated, ScalarField, Scaled, TangentSample, Tolerances};
use crate::error::{Error, Result};
use crate::spraycalc::{self, check_order, Spray, SprayField, VerticalEndomorphism};

/// A fiber 1-homogeneous function used as a projective deformation factor.
#[derive(Debug, Clone)]
pub struct ProjectiveFactor {
    field: Field,
}

impl ProjectiveFactor {
    pub fn new(field: Field) -> Self {
        ProjectiveFactor { field }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// `-P`.
    pub fn negated(&self) -> Self {
        ProjectiveFactor::new(Arc::new(Negated(self.field.clone())))
    }

    /// `c · P`.
    pub fn scaled(&self, c: f64) -> Self {
        ProjectiveFactor::new(Arc::new(Scaled(c, self.field.clone())))
    }

    /// `|P(x, 2y) − 2P(x, y)| / (|P(x, y)| + floor)`; zero for exact
    /// 1-homogeneity, works for sign-indefinite `P`.
    pub fn homogeneity_defect(&self, p: &TangentSample) -> Result<f64> {
        let v = self.field.value(p)?;
        let v2 = self.field.value(&p.with_scaled_fiber(2.0))?;
        Ok((v2 - 2.0 * v).abs() / (v.abs() + Tolerances::default().abs_floor))
    }
}

impl From<Field> for ProjectiveFactor {
    fn from(field: Field) -> Self {
        ProjectiveFactor::new(field)
    }
}

/// `S − 2(P₁ + … + Pₖ)𝒞`. Factors are summed before they touch the
/// coefficients, so deforming by `P` and then `−P` restores `S` exactly.
#[derive(Debug, Clone)]
pub struct DeformedSpray {
    base: Spray,
    factors: Vec<ProjectiveFactor>,
}

impl DeformedSpray {
    pub fn base(&self) -> &Spray {
        &self.base
    }

    pub fn factors(&self) -> &[ProjectiveFactor] {
        &self.factors
    }

    /// Further deformation, accumulated into the same factor list.
    pub fn deform(&self, factor: ProjectiveFactor) -> DeformedSpray {
        let mut factors = self.factors.clone();
        factors.push(factor);
        DeformedSpray {
            base: self.base.clone(),
            factors,
        }
    }

    fn total_factor(&self, p: &TangentSample, order: usize) -> Result<Option<Jet>> {
        let mut acc: Option<Jet> = None;
        for f in &self.factors {
            let j = f.field.jet(p, order)?;
            acc = Some(match acc {
                None => j,
                Some(a) => a + j,
            });
        }
        Ok(acc)
    }
}

pub fn deform(spray: Spray, factor: ProjectiveFactor) -> DeformedSpray {
    DeformedSpray {
        base: spray,
        factors: vec![factor],
    }
}

impl SprayField for DeformedSpray {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.dim(), p)?;
        check_order(order)?;
        let mut g = self.base.coefficients(p, order)?;
        if let Some(total) = self.total_factor(p, order)? {
            let vars = p.seed(order);
            let n = p.dim();
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = &*gi + &total * &vars[yvar(n, i)];
            }
        }
        Ok(g)
    }
}

/// Complete lift `aᶜ = yⁱ ∂a/∂xⁱ` of a basic function `a(x)`.
#[derive(Debug, Clone)]
pub struct CompleteLift {
    base: Field,
}

impl CompleteLift {
    /// Wraps `a` without checking that it is basic; see [`complete_lift`].
    pub fn new(base: Field) -> Self {
        CompleteLift { base }
    }
}

impl ScalarField for CompleteLift {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn smoothness(&self) -> usize {
        self.base.smoothness().saturating_sub(1)
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        if order + 1 > self.base.smoothness() {
            return Err(Error::Smoothness {
                requested: order + 1,
                available: self.base.smoothness(),
            });
        }
        let n = p.dim();
        let a = self.base.jet(p, order + 1)?;
        let vars = p.seed(order);
        let mut acc = &vars[yvar(n, 0)] * a.diff(xvar(0));
        for i in 1..n {
            acc = acc + &vars[yvar(n, i)] * a.diff(xvar(i));
        }
        Ok(acc)
    }
}

/// Builds `aᶜ` after checking at every sample that `a` has no fiber
/// dependence.
pub fn complete_lift(a: Field, samples: &[TangentSample]) -> Result<ProjectiveFactor> {
    for p in samples {
        check_dim(a.dim(), p)?;
        let jet = a.jet(p, 1)?;
        let n = p.dim();
        let vertical: f64 = (0..n).map(|i| jet.partial(&[yvar(n, i)]).powi(2)).sum::<f64>().sqrt();
        let scale = jet.value().abs() + Tolerances::default().abs_floor;
        if vertical > 1e-12 * scale.max(1.0) {
            return Err(Error::NotBasic { magnitude: vertical });
        }
    }
    Ok(ProjectiveFactor::new(Arc::new(CompleteLift::new(a))))
}

fn column(y: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(y)
}

/// Normalised discrepancy between the connection of `S₀ − 2P𝒞` computed
/// directly and `N₀ + P·Id + y ⊗ d_J P`.
pub fn deformed_connection_residual(s0: &Spray, factor: &ProjectiveFactor, p: &TangentSample) -> Result<f64> {
    let n = p.dim();
    let deformed = deform(s0.clone(), factor.clone());
    let direct = spraycalc::connection(&deformed, p)?;
    let n0 = spraycalc::connection(s0.as_ref(), p)?;
    let pj = factor.field.jet(p, 1)?;
    let djp = DVector::from_fn(n, |j, _| pj.partial(&[yvar(n, j)]));
    let y = column(&p.y);
    let lifted = &y * djp.transpose();
    let predicted = &n0 + DMatrix::identity(n, n) * pj.value() + &lifted;
    let scale = direct.norm()
        + n0.norm()
        + pj.value().abs() * (n as f64).sqrt()
        + lifted.norm()
        + Tolerances::default().abs_floor;
    Ok((direct - predicted).norm() / scale)
}

/// Both evaluations of the deformed Jacobi endomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiComparison {
    /// `Φ` of the deformed spray from the bracket definition.
    pub direct: VerticalEndomorphism,
    /// The transformation-law prediction from `Φ₀`, `P` and `S₀`.
    pub predicted: VerticalEndomorphism,
    /// `|direct − predicted|_F` over the summed sizes of all terms.
    pub discrepancy: f64,
}

pub fn deformed_jacobi(s0: &Spray, factor: &ProjectiveFactor, p: &TangentSample) -> Result<JacobiComparison> {
    let n = p.dim();
    let deformed = deform(s0.clone(), factor.clone());
    let direct = spraycalc::jacobi_endomorphism(&deformed, p)?;

    let g0 = s0.coefficients(p, 2)?;
    let phi0 = spraycalc::jacobi_endomorphism(s0.as_ref(), p)?.0;
    let n0 = spraycalc::connection_from_jets(n, &g0);
    let pj = factor.field.jet(p, 2)?;
    let s0p = spraycalc::apply_spray(p, &g0, &pj);
    let p_sq = (&pj * &pj).truncate(1);
    let pv = pj.value();
    let djp = |j: usize| pj.partial(&[yvar(n, j)]);
    let dh0p = |j: usize| pj.partial(&[xvar(j)]) - (0..n).map(|i| n0[(i, j)] * djp(i)).sum::<f64>();
    let dj = |f: &Jet| DVector::from_fn(n, |j, _| f.partial(&[yvar(n, j)]));
    let (dj_s0p, dj_psq) = (dj(&s0p), dj(&p_sq));
    let p_djp = DVector::from_fn(n, |j, _| pv * djp(j));
    let dh0 = DVector::from_fn(n, |j, _| dh0p(j));
    let covector = &dj_s0p - &dj_psq + (&p_djp - &dh0) * 3.0;
    let j_coeff = pv * pv - s0p.value();
    let vertical = column(&p.y) * covector.transpose();
    let predicted = &phi0 + DMatrix::identity(n, n) * j_coeff - &vertical;

    // the terms cancel exactly for Funk functions, so the scale is built
    // from their individual sizes
    let term_sizes = (pv * pv).abs() + s0p.value().abs();
    let covector_sizes = dj_s0p.norm() + dj_psq.norm() + 3.0 * (p_djp.norm() + dh0.norm());
    let scale = direct.0.norm()
        + phi0.norm()
        + term_sizes * (n as f64).sqrt()
        + covector_sizes * column(&p.y).norm()
        + Tolerances::default().abs_floor;
    let discrepancy = (&direct.0 - &predicted).norm() / scale;
    Ok(JacobiComparison {
        direct,
        predicted: VerticalEndomorphism(predicted),
        discrepancy,
    })
}

/// Normalised discrepancy of the Jacobi transformation law.
pub fn deformed_jacobi_residual(s0: &Spray, factor: &ProjectiveFactor, p: &TangentSample) -> Result<f64> {
    Ok(deformed_jacobi(s0, factor, p)?.discrepancy)
}

/// Both sides of `d_{h₀}P = P d_J P` and their difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunkResidual {
    pub value: f64,
    /// `(d_{h₀}P)ⱼ = ∂P/∂xʲ − N₀ⁱⱼ ∂P/∂yⁱ`.
    pub horizontal: Vec<f64>,
    /// `P ∂P/∂yʲ`.
    pub product: Vec<f64>,
    /// `horizontal − product`.
    pub residual: Vec<f64>,
    pub norm: f64,
    /// `norm / (|d_{h₀}P| + |P d_J P| + floor)`.
    pub normalized: f64,
}

impl FunkResidual {
    /// Whether `P` solves the Funk equation at this sample within `tol`.
    pub fn is_funk(&self, tol: f64) -> bool {
        self.normalized <= tol
    }

    /// Least-squares ratio `⟨d_{h₀}P, P d_J P⟩ / |P d_J P|²`; NaN when the
    /// right-hand side vanishes.
    pub fn side_ratio(&self) -> f64 {
        let pp: f64 = self.product.iter().map(|c| c * c).sum();
        let hp: f64 = self.horizontal.iter().zip(&self.product).map(|(a, b)| a * b).sum();
        if pp == 0.0 {
            f64::NAN
        } else {
            hp / pp
        }
    }
}

pub fn funk_residual(s0: &dyn SprayField, factor: &ProjectiveFactor, p: &TangentSample) -> Result<FunkResidual> {
    let n = p.dim();
    let pj = factor.field.jet(p, 1)?;
    let n0 = spraycalc::connection(s0, p)?;
    let pv = pj.value();
    let djp: Vec<f64> = (0..n).map(|j| pj.partial(&[yvar(n, j)])).collect();
    let horizontal: Vec<f64> = (0..n)
        .map(|j| pj.partial(&[xvar(j)]) - (0..n).map(|i| n0[(i, j)] * djp[i]).sum::<f64>())
        .collect();
    let product: Vec<f64> = djp.iter().map(|d| pv * d).collect();
    let residual: Vec<f64> = horizontal.iter().zip(&product).map(|(h, q)| h - q).collect();
    let l2 = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let norm = l2(&residual);
    let normalized = norm / (l2(&horizontal) + l2(&product) + Tolerances::default().abs_floor);
    Ok(FunkResidual {
        value: pv,
        horizontal,
        product,
        residual,
        norm,
        normalized,
    })
}
