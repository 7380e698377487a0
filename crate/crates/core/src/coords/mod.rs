//! Coordinate charts, tangent-bundle samples and the derivative contract.
//!
//! Every geometric object in this crate is evaluated pointwise at a
//! [`TangentSample`] `(x, y)` of the slit tangent bundle in a single chart.
//! Scalar fields expose their Taylor jets in the `2n` variables
//! `(x¹..xⁿ, y¹..yⁿ)`, in that order.

mod compose;
mod grid;
pub mod jet;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use compose::{Conformal, Negated, Product, Scaled, Sum};
pub use grid::{sample_grid, BaseSampling, FiberSampling, GridSpec};
pub use jet::Jet;

use crate::error::{Error, Result};

/// Index of `x^i` among the jet variables.
#[inline]
pub fn xvar(i: usize) -> usize {
    i
}

/// Index of `y^i` among the jet variables of a chart of dimension `n`.
#[inline]
pub fn yvar(n: usize, i: usize) -> usize {
    n + i
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BaseDomain {
    AllSpace,
    /// Open ball `|x| < radius` centred at the origin.
    Ball {
        radius: f64,
    },
}

/// Admissible fiber directions at each base point. Always a positive cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FiberCone {
    /// All of `Rⁿ \ {0}`.
    Full,
    /// Open half-space `⟨y, normal⟩ > 0`.
    HalfSpace { normal: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    dim: usize,
    domain: BaseDomain,
    cone: FiberCone,
}

impl Chart {
    pub fn new(dim: usize, domain: BaseDomain, cone: FiberCone) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidChart(format!("dimension {dim} < 2")));
        }
        if let BaseDomain::Ball { radius } = domain {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidChart(format!("ball radius {radius}")));
            }
        }
        if let FiberCone::HalfSpace { normal } = &cone {
            if normal.len() != dim || normal.iter().all(|&c| c == 0.0) {
                return Err(Error::InvalidChart(
                    "half-space normal must be a nonzero n-vector".into(),
                ));
            }
        }
        Ok(Chart { dim, domain, cone })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Chart::new(dim, BaseDomain::Ball { radius: 1.0 }, FiberCone::Full)
    }

    pub fn all_space(dim: usize) -> Result<Self> {
        Chart::new(dim, BaseDomain::AllSpace, FiberCone::Full)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &BaseDomain {
        &self.domain
    }

    pub fn cone(&self) -> &FiberCone {
        &self.cone
    }

    pub fn contains_base(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self.domain {
            BaseDomain::AllSpace => true,
            BaseDomain::Ball { radius } => norm(x) < radius,
        }
    }

    pub fn contains_fiber(&self, x: &[f64], y: &[f64]) -> bool {
        if y.len() != self.dim || y.iter().any(|c| !c.is_finite()) || y.iter().all(|&c| c == 0.0) {
            return false;
        }
        let _ = x;
        match &self.cone {
            FiberCone::Full => true,
            FiberCone::HalfSpace { normal } => dot(y, normal) > 0.0,
        }
    }

    pub fn admits(&self, p: &TangentSample) -> bool {
        self.contains_base(&p.x) && self.contains_fiber(&p.x, &p.y)
    }
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if y.iter().all(|&c| c == 0.0) {
            return Err(Error::Domain("fiber vector is zero".into()));
        }
        Ok(TangentSample { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Coordinates in jet-variable order `(x, y)`.
    pub fn point(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// Variable jets of the given order seeded at this sample.
    pub fn seed(&self, order: usize) -> Vec<Jet> {
        Jet::seed(&self.point(), order)
    }

    pub fn with_scaled_fiber(&self, factor: f64) -> Self {
        TangentSample {
            x: self.x.clone(),
            y: self.y.iter().map(|c| c * factor).collect(),
        }
    }
}

/// A real function on (a conic region of) the slit tangent bundle whose jets
/// can be evaluated pointwise. Implementations are immutable and shareable.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Highest derivative order the field can provide.
    fn smoothness(&self) -> usize {
        jet::MAX_ORDER
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet>;

    fn value(&self, p: &TangentSample) -> Result<f64> {
        Ok(self.jet(p, 0)?.value())
    }
}

pub type Field = Arc<dyn ScalarField>;

pub(crate) fn check_dim(expected: usize, p: &TangentSample) -> Result<()> {
    if p.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: p.dim(),
        });
    }
    Ok(())
}

/// Value and partial derivatives of a scalar field at one sample, in the
/// variable order `(x¹..xⁿ, y¹..yⁿ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTower {
    pub order: usize,
    pub value: f64,
    /// `∂f/∂zᵃ`, empty when `order < 1`.
    pub first: Vec<f64>,
    /// `∂²f/∂zᵃ∂zᵇ`, empty when `order < 2`.
    pub second: Vec<Vec<f64>>,
    /// `∂³f/∂zᵃ∂zᵇ∂zᶜ` flattened row-major, empty when `order < 3`.
    third: Vec<f64>,
    nvars: usize,
}

impl DerivativeTower {
    pub fn from_jet(jet: &Jet, order: usize) -> Self {
        let m = jet.nvars();
        let first = if order >= 1 {
            (0..m).map(|a| jet.partial(&[a])).collect()
        } else {
            Vec::new()
        };
        let second = if order >= 2 {
            (0..m).map(|a| (0..m).map(|b| jet.partial(&[a, b])).collect()).collect()
        } else {
            Vec::new()
        };
        let mut third = Vec::new();
        if order >= 3 {
            third.reserve(m * m * m);
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        third.push(jet.partial(&[a, b, c]));
                    }
                }
            }
        }
        DerivativeTower {
            order,
            value: jet.value(),
            first,
            second,
            third,
            nvars: m,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn third(&self, a: usize, b: usize, c: usize) -> Option<f64> {
        if self.third.is_empty() {
            return None;
        }
        let m = self.nvars;
        Some(self.third[(a * m + b) * m + c])
    }
}

/// Value and all partials of `field` up to `order` (at most 3) at `p`.
pub fn evaluate_tower(
    field: &dyn ScalarField,
    chart: &Chart,
    p: &TangentSample,
    order: usize,
) -> Result<DerivativeTower> {
    check_dim(chart.dim(), p)?;
    check_dim(field.dim(), p)?;
    if !chart.admits(p) {
        return Err(Error::Domain(format!("sample {p:?} is not admissible in the chart")));
    }
    let available = field.smoothness().min(3);
    if order > available {
        return Err(Error::Smoothness {
            requested: order,
            available,
        });
    }
    let jet = field.jet(p, order)?;
    Ok(DerivativeTower::from_jet(&jet, order))
}

/// Numerical tolerances shared across checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative tolerance for exact identities.
    pub identity_rel: f64,
    /// Absolute floor added to every normalising scale.
    pub abs_floor: f64,
    /// Relative spread allowed between homogeneity estimates.
    pub homogeneity: f64,
    /// `|det g|` below `degenerate_det · scale` counts as degenerate.
    pub degenerate_det: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity_rel: 1e-7,
            abs_floor: 1e-10,
            homogeneity: 1e-9,
            degenerate_det: 1e-12,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
