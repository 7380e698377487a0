//! Spray-side calculus: nonlinear connection, horizontal projector, Jacobi
//! endomorphism, isotropy and the Ricci scalar.
//!
//! Vector-valued semi-basic 1-forms `Mⁱⱼ ∂/∂yⁱ ⊗ dxʲ` are plain `n × n`
//! matrices ([`VerticalEndomorphism`]); in this representation the tangent
//! structure `J` is the identity and the Liouville field `𝒞` is the column
//! vector `y`, so `α ⊗ 𝒞` is the outer product `y αᵀ`.

pub mod bracket;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coords::{check_dim, yvar, Chart, Field, Jet, TangentSample, Tolerances};
use crate::error::{Error, Result};

/// Highest order of coefficient jets a spray must provide.
pub const SPRAY_ORDER: usize = 2;

/// Spray coefficients `Gⁱ(x, y)`, positively 2-homogeneous in `y`.
pub trait SprayField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Jets of `G¹..Gⁿ` of the given order (at most [`SPRAY_ORDER`]) at `p`.
    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>>;
}

pub type Spray = Arc<dyn SprayField>;

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order > SPRAY_ORDER {
        return Err(Error::Smoothness {
            requested: order,
            available: SPRAY_ORDER,
        });
    }
    Ok(())
}

/// `G ≡ 0`.
#[derive(Debug, Clone)]
pub struct FlatSpray {
    dim: usize,
}

impl FlatSpray {
    pub fn new(dim: usize) -> Self {
        FlatSpray { dim }
    }
}

impl SprayField for FlatSpray {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.dim, p)?;
        check_order(order)?;
        Ok(vec![Jet::constant(2 * self.dim, order, 0.0); self.dim])
    }
}

/// A spray given by explicit coefficient fields.
#[derive(Debug, Clone)]
pub struct FieldSpray {
    coeffs: Vec<Field>,
}

impl FieldSpray {
    pub fn new(coeffs: Vec<Field>) -> Result<Self> {
        let n = coeffs.len();
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(FieldSpray { coeffs })
    }

    /// Coefficients from expression sources, one per dimension.
    pub fn from_exprs(sources: &[&str], chart: &Chart) -> Result<Self> {
        if sources.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                found: sources.len(),
            });
        }
        let coeffs = sources
            .iter()
            .map(|s| crate::expr::field(s, chart))
            .collect::<Result<Vec<_>>>()?;
        FieldSpray::new(coeffs)
    }

    pub fn fields(&self) -> &[Field] {
        &self.coeffs
    }
}

impl SprayField for FieldSpray {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.dim(), p)?;
        check_order(order)?;
        self.coeffs.iter().map(|g| g.jet(p, order)).collect()
    }
}

/// Semi-basic vector-valued 1-form `Mⁱⱼ ∂/∂yⁱ ⊗ dxʲ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalEndomorphism(pub DMatrix<f64>);

impl VerticalEndomorphism {
    /// The tangent structure `J`.
    pub fn tangent_structure(n: usize) -> Self {
        VerticalEndomorphism(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }
}

/// Semi-basic 1-form `aⱼ dxʲ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiBasicForm(pub DVector<f64>);

impl SemiBasicForm {
    pub fn components(&self) -> &DVector<f64> {
        &self.0
    }

    /// `i_S a = aⱼ yʲ`.
    pub fn contract(&self, y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// `Nⁱⱼ = ∂Gⁱ/∂yʲ`. The horizontal lift of `∂/∂xʲ` is `∂/∂xʲ − Nⁱⱼ ∂/∂yⁱ`.
pub fn connection(spray: &dyn SprayField, p: &TangentSample) -> Result<DMatrix<f64>> {
    let g = spray.coefficients(p, 1)?;
    Ok(connection_from_jets(p.dim(), &g))
}

pub(crate) fn connection_from_jets(n: usize, g: &[Jet]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| g[i].partial(&[yvar(n, j)]))
}

/// Horizontal projector `h = ½(Id − [S, J])` on `T_pTM` as a `2n × 2n` matrix,
/// computed from the bracket definition.
pub fn horizontal_projector(spray: &dyn SprayField, p: &TangentSample) -> Result<DMatrix<f64>> {
    let g = spray.coefficients(p, 1)?;
    Ok(bracket::values(&bracket::horizontal_projector_jets(p, &g)))
}

/// Jacobi endomorphism `Φ = (Id − h) ∘ [S, h]`, restricted to its
/// semi-basic block `Φⁱⱼ` (the `∂/∂yⁱ` component of `Φ(∂/∂xʲ)`).
pub fn jacobi_endomorphism(spray: &dyn SprayField, p: &TangentSample) -> Result<VerticalEndomorphism> {
    let g = spray.coefficients(p, 2)?;
    Ok(jacobi_from_jets(p, &g))
}

pub(crate) fn jacobi_from_jets(p: &TangentSample, g: &[Jet]) -> VerticalEndomorphism {
    let n = p.dim();
    let full = bracket::jacobi_full(p, g);
    VerticalEndomorphism(full.view((n, 0), (n, n)).into_owned())
}

/// `ρ = Tr(Φ) / (n − 1)`.
pub fn ricci_scalar(phi: &DMatrix<f64>, n: usize) -> f64 {
    debug_assert!(n >= 2);
    phi.trace() / (n as f64 - 1.0)
}

/// `S(f) = yᵏ ∂f/∂xᵏ − 2Gᵏ ∂f/∂yᵏ`; the result is one order below the inputs.
pub fn apply_spray(p: &TangentSample, g: &[Jet], f: &Jet) -> Jet {
    bracket::apply(&bracket::spray_vector(p, g), f)
}

/// Result of fitting `Φ = ρ J − α ⊗ 𝒞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotropy {
    pub rho: f64,
    pub alpha: SemiBasicForm,
    /// `|Φ − (ρ Id − y αᵀ)|_F / (|Φ|_F + floor)`.
    pub residual: f64,
    /// `|i_S α − ρ| / (|ρ| + floor)`; meaningful when `residual` is small.
    pub contraction_defect: f64,
}

impl Isotropy {
    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.residual < tol
    }
}

pub fn isotropy_decompose(spray: &dyn SprayField, p: &TangentSample) -> Result<Isotropy> {
    let phi = jacobi_endomorphism(spray, p)?;
    Ok(decompose_isotropic(&phi.0, &p.y))
}

/// Least-squares isotropic fit of a given `Φ` at fiber vector `y`.
pub fn decompose_isotropic(phi: &DMatrix<f64>, y: &[f64]) -> Isotropy {
    let floor = Tolerances::default().abs_floor;
    let n = phi.nrows();
    let rho = ricci_scalar(phi, n);
    let shifted = phi - DMatrix::identity(n, n) * rho;
    let yy: f64 = y.iter().map(|c| c * c).sum();
    // minimise Σᵢⱼ (shiftedⁱⱼ + yⁱ αⱼ)² for each column j
    let alpha = DVector::from_fn(n, |j, _| -(0..n).map(|i| y[i] * shifted[(i, j)]).sum::<f64>() / yy);
    let yv = DVector::from_column_slice(y);
    let model = DMatrix::identity(n, n) * rho - &yv * alpha.transpose();
    let residual = (phi - model).norm() / (phi.norm() + floor);
    let contraction: f64 = alpha.iter().zip(y).map(|(a, b)| a * b).sum();
    Isotropy {
        rho,
        alpha: SemiBasicForm(alpha),
        residual,
        contraction_defect: (contraction - rho).abs() / (rho.abs() + floor),
    }
}

/// A random spray whose coefficients are quadratic forms in `y` with
/// polynomial coefficients of degree `x_degree` (≤ 2) in `x`.
pub fn random_polynomial_spray(chart: &Chart, seed: u64, x_degree: usize, amplitude: f64) -> Result<FieldSpray> {
    let n = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_monomials = vec![String::from("1")];
    if x_degree >= 1 {
        x_monomials.extend((1..=n).map(|k| format!("x{k}")));
    }
    if x_degree >= 2 {
        for k in 1..=n {
            for l in k..=n {
                x_monomials.push(format!("x{k}*x{l}"));
            }
        }
    }
    let mut sources = Vec::with_capacity(n);
    for _ in 0..n {
        let mut terms = Vec::new();
        for a in 1..=n {
            for b in a..=n {
                for xm in &x_monomials {
                    let c: f64 = rng.random_range(-amplitude..=amplitude);
                    terms.push(format!("({c:?})*{xm}*y{a}*y{b}"));
                }
            }
        }
        sources.push(terms.join(" + "));
    }
    let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
    FieldSpray::from_exprs(&refs, chart)
}
