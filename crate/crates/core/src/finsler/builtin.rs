//! Built-in Finsler functions and the metric-spec registry.
//!
//! | spec                 | function                                                  |
//! |----------------------|-----------------------------------------------------------|
//! | `euclidean`          | `|y|`                                                     |
//! | `constant:<rows>`    | `√(g₀(y, y))` for a constant SPD matrix, rows `;`-separated |
//! | `poincare[:<k>]`     | `2|y| / ((1 − |x|²)√−k)`, constant flag curvature `k < 0`  |
//! | `funk`               | Funk metric of the unit ball (flag curvature −1/4)         |
//! | `oneform:<a>`        | `⟨da, y⟩`, a degenerate negative control                   |
//! | `expr:<source>`      | any expression                                            |

use std::sync::Arc;

use nalgebra::DMatrix;

use super::FinslerFunction;
use crate::coords::{Chart, Field, Product};
use crate::error::{Error, Result};
use crate::expr;
use crate::projective::CompleteLift;

pub const FUNK_SOURCE: &str = "(dot(x,y) + sqrt(dot(x,y)^2 + dot(y,y)*(1 - dot(x,x))))/(1 - dot(x,x))";

pub fn euclidean(chart: &Chart) -> Result<FinslerFunction> {
    Ok(FinslerFunction::new("euclidean", expr::field("sqrt(dot(y,y))", chart)?))
}

/// Riemannian norm of a constant symmetric positive definite matrix.
pub fn constant(chart: &Chart, g: &DMatrix<f64>) -> Result<FinslerFunction> {
    let n = chart.dim();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.nrows(),
        });
    }
    if (g - g.transpose()).amax() > 1e-12 * g.amax() || g.clone().cholesky().is_none() {
        return Err(Error::PreconditionFailed(
            "constant metric must be symmetric positive definite".into(),
        ));
    }
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(format!("({:?})*y{}*y{}", g[(i, j)], i + 1, j + 1));
        }
    }
    let src = format!("sqrt({})", terms.join(" + "));
    Ok(FinslerFunction::new("constant", expr::field(&src, chart)?))
}

/// Poincaré ball metric rescaled to constant flag curvature `curvature < 0`.
pub fn poincare(chart: &Chart, curvature: f64) -> Result<FinslerFunction> {
    if !(curvature < 0.0 && curvature.is_finite()) {
        return Err(Error::PreconditionFailed(format!(
            "Poincaré curvature must be negative, got {curvature}"
        )));
    }
    let src = if curvature == -1.0 {
        "2*sqrt(dot(y,y))/(1 - dot(x,x))".to_string()
    } else {
        format!("2*sqrt(dot(y,y))/((1 - dot(x,x))*{:?})", (-curvature).sqrt())
    };
    Ok(FinslerFunction::new("poincare", expr::field(&src, chart)?))
}

/// The Funk function of the unit ball as a scalar field.
pub fn funk_field(chart: &Chart) -> Result<Field> {
    expr::field(FUNK_SOURCE, chart)
}

pub fn funk(chart: &Chart) -> Result<FinslerFunction> {
    Ok(FinslerFunction::new("funk", funk_field(chart)?))
}

/// `b(x) ⟨da, y⟩`, whose fiber Hessian has rank one.
pub fn one_form(chart: &Chart, a: &str, b: &str) -> Result<FinslerFunction> {
    let lift: Field = Arc::new(CompleteLift::new(expr::field(a, chart)?));
    let b = expr::field(b, chart)?;
    Ok(FinslerFunction::new("oneform", Arc::new(Product(b, lift))))
}

fn parse_matrix(src: &str, n: usize) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = src
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::PreconditionFailed(format!("bad matrix entry `{}`", v.trim())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rows.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Resolves a metric spec string (see the module table).
pub fn from_spec(spec: &str, chart: &Chart) -> Result<FinslerFunction> {
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a)),
        None => (spec.trim(), None),
    };
    match (head, arg) {
        ("euclidean", None) => euclidean(chart),
        ("poincare", None) => poincare(chart, -1.0),
        ("poincare", Some(k)) => {
            let k: f64 = k
                .trim()
                .parse()
                .map_err(|_| Error::PreconditionFailed(format!("bad curvature `{k}`")))?;
            poincare(chart, k)
        }
        ("funk", None) => funk(chart),
        ("constant", Some(m)) => constant(chart, &parse_matrix(m, chart.dim())?),
        ("oneform", Some(a)) => one_form(chart, a, "1"),
        ("expr", Some(src)) => Ok(FinslerFunction::new("expr", expr::field(src, chart)?)),
        _ => Err(Error::PreconditionFailed(format!("unknown metric `{spec}`"))),
    }
}
