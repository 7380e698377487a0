//! A small expression language for user-supplied fields `F(x, y)`, `P(x, y)`
//! and base functions `a(x)`.

mod ast;
mod parser;

use std::sync::Arc;

use serde::Serialize;

pub use ast::{BinOp, Block, Expr, Func};
pub use parser::parse;

use crate::coords::{check_dim, Chart, Field, Jet, ScalarField, TangentSample};
use crate::error::{Error, Result};

/// A compiled expression, evaluable as values or as jets.
#[derive(Debug, Clone)]
pub struct ExprField {
    ast: Expr,
    dim: usize,
}

/// Checks `ast` against `chart` and wraps it as a scalar field.
pub fn compile(ast: Expr, chart: &Chart) -> Result<ExprField> {
    let dim = chart.dim();
    if ast.max_index() > dim {
        return Err(Error::IndexOutOfRange {
            name: format!("index {}", ast.max_index()),
            offset: 0,
            dim,
        });
    }
    Ok(ExprField { ast, dim })
}

/// Parses and compiles in one step, returning a shareable field.
pub fn field(src: &str, chart: &Chart) -> Result<Field> {
    Ok(Arc::new(compile(parse(src, chart.dim())?, chart)?))
}

impl ExprField {
    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Direct floating-point evaluation, independent of the jet machinery.
    pub fn eval(&self, p: &TangentSample) -> Result<f64> {
        check_dim(self.dim, p)?;
        eval_value(&self.ast, p)
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        check_dim(self.dim, p)?;
        let vars = p.seed(order);
        let out = eval_jet(&self.ast, &vars, self.dim)?;
        if !out.is_finite() {
            return Err(Error::Domain(format!("non-finite value of `{}`", self.ast)));
        }
        Ok(out)
    }

    fn value(&self, p: &TangentSample) -> Result<f64> {
        self.eval(p)
    }
}

fn block(p: &TangentSample, b: Block) -> &[f64] {
    match b {
        Block::X => &p.x,
        Block::Y => &p.y,
    }
}

fn eval_value(e: &Expr, p: &TangentSample) -> Result<f64> {
    let v = match e {
        Expr::Num(v) => *v,
        Expr::Var(b, i) => block(p, *b)[*i],
        Expr::Neg(a) => -eval_value(a, p)?,
        Expr::Call(f, a) => {
            let a = eval_value(a, p)?;
            match f {
                Func::Sqrt if a < 0.0 => return Err(Error::Domain(format!("sqrt of {a}"))),
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Ln if a <= 0.0 => return Err(Error::Domain(format!("ln of {a}"))),
                Func::Ln => a.ln(),
                Func::Abs => a.abs(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_value(a, p)?, eval_value(b, p)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return Err(Error::Domain("division by zero".into())),
                BinOp::Div => a / b,
            }
        }
        Expr::Pow(a, k) => {
            let a = eval_value(a, p)?;
            if k.fract() == 0.0 && k.abs() <= 64.0 {
                if a == 0.0 && *k < 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.powi(*k as i32)
            } else if a < 0.0 || (a == 0.0 && *k < 0.0) {
                return Err(Error::Domain(format!("{a} raised to non-integer power {k}")));
            } else {
                a.powf(*k)
            }
        }
        Expr::Dot(a, b) => crate::coords::dot(block(p, *a), block(p, *b)),
        Expr::Norm2(a) => crate::coords::dot(block(p, *a), block(p, *a)),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-finite value of `{e}`")))
    }
}

fn eval_jet(e: &Expr, vars: &[Jet], n: usize) -> Result<Jet> {
    let var = |b: Block, i: usize| match b {
        Block::X => &vars[i],
        Block::Y => &vars[n + i],
    };
    let dot = |a: Block, b: Block| {
        let mut acc = var(a, 0) * var(b, 0);
        for i in 1..n {
            acc = acc + var(a, i) * var(b, i);
        }
        acc
    };
    Ok(match e {
        Expr::Num(v) => Jet::constant(vars.len(), vars[0].order(), *v),
        Expr::Var(b, i) => var(*b, *i).clone(),
        Expr::Neg(a) => -eval_jet(a, vars, n)?,
        Expr::Call(f, a) => {
            let a = eval_jet(a, vars, n)?;
            match f {
                Func::Sqrt => a.sqrt()?,
                Func::Exp => a.exp(),
                Func::Ln => a.ln()?,
                Func::Abs => a.abs()?,
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_jet(a, vars, n)?, eval_jet(b, vars, n)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a.try_div(&b)?,
            }
        }
        Expr::Pow(a, k) => eval_jet(a, vars, n)?.powf(*k)?,
        Expr::Dot(a, b) => dot(*a, *b),
        Expr::Norm2(a) => dot(*a, *a),
    })
}

/// Fiber homogeneity estimate of a positive field at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Homogeneity {
    /// Mean of the per-scale estimates.
    pub degree: f64,
    /// Estimates `ln(f(x, λy) / f(x, y)) / ln λ` for `λ = 0.5, 2, 4`.
    pub estimates: [f64; 3],
    /// `max - min` of the estimates.
    pub spread: f64,
}

impl Homogeneity {
    /// True when all scale estimates agree within `tol`.
    pub fn is_homogeneous(&self, tol: f64) -> bool {
        self.spread <= tol
    }
}

pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 4.0];

/// Estimates `d` in `f(x, λy) = λ^d f(x, y)` from three fiber rescalings.
pub fn homogeneity_degree(f: &dyn ScalarField, p: &TangentSample) -> Result<Homogeneity> {
    let base = f.value(p)?;
    if base <= 0.0 {
        return Err(Error::NonPositiveValue {
            value: base,
            scale: 1.0,
        });
    }
    let mut estimates = [0.0; 3];
    for (slot, &lambda) in estimates.iter_mut().zip(&HOMOGENEITY_SCALES) {
        let scaled = f.value(&p.with_scaled_fiber(lambda))?;
        if scaled <= 0.0 {
            return Err(Error::NonPositiveValue {
                value: scaled,
                scale: lambda,
            });
        }
        *slot = (scaled / base).ln() / lambda.ln();
    }
    let max = estimates.iter().copied().fold(f64::MIN, f64::max);
    let min = estimates.iter().copied().fold(f64::MAX, f64::min);
    Ok(Homogeneity {
        degree: estimates.iter().sum::<f64>() / 3.0,
        estimates,
        spread: max - min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn compile_and_evaluate() {
        let chart = Chart::unit_ball(2).unwrap();
        let f = field("y1", &chart).unwrap();
        assert_eq!(f.value(&sample(&[0.0, 0.0], &[3.0, 4.0])).unwrap(), 3.0);
        let poincare = field("2*sqrt(dot(y,y))/(1 - dot(x,x))", &chart).unwrap();
        assert_eq!(poincare.value(&sample(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), 2.0);
    }

    #[test]
    fn jet_and_value_paths_agree() {
        let chart = Chart::unit_ball(2).unwrap();
        let src = "exp(x1*y2)/sqrt(norm2(y) + x2^2) - ln(1 + dot(x,x))*abs(y1)^1.5";
        let f = compile(parse(src, 2).unwrap(), &chart).unwrap();
        let p = sample(&[0.2, -0.4], &[0.7, 0.3]);
        let direct = f.eval(&p).unwrap();
        let via_jet = f.jet(&p, 3).unwrap().value();
        assert!((direct - via_jet).abs() < 1e-14 * direct.abs().max(1.0));
    }

    #[test]
    fn evaluation_domain_errors() {
        let chart = Chart::all_space(2).unwrap();
        let p = sample(&[1.0, 0.0], &[1.0, 0.0]);
        for src in ["sqrt(-y1)", "ln(x2)", "1/x2", "(x2 - y2)^(-1)"] {
            let f = field(src, &chart).unwrap();
            assert!(matches!(f.value(&p), Err(Error::Domain(_))), "{src}");
            assert!(matches!(f.jet(&p, 1), Err(Error::Domain(_))), "{src}");
        }
        // abs at its kink: fine as a value, no derivatives
        let f = field("abs(y2)", &chart).unwrap();
        assert_eq!(f.value(&p).unwrap(), 0.0);
        assert!(matches!(f.jet(&p, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn compile_checks_dimension() {
        let ast = parse("x3 + y1", 3).unwrap();
        assert!(compile(ast, &Chart::unit_ball(2).unwrap()).is_err());
    }

    #[test]
    fn homogeneity_estimates() {
        let chart = Chart::unit_ball(2).unwrap();
        let p = sample(&[0.3, -0.1], &[0.6, 0.8]);
        let norm = field("sqrt(dot(y,y))", &chart).unwrap();
        let h = homogeneity_degree(norm.as_ref(), &p).unwrap();
        assert!((h.degree - 1.0).abs() < 1e-10 && h.is_homogeneous(1e-10));

        let sq = field("4*dot(y,y)/(1 - dot(x,x))^2", &chart).unwrap();
        assert!((homogeneity_degree(sq.as_ref(), &p).unwrap().degree - 2.0).abs() < 1e-10);

        let mixed = field("y1*y1/sqrt(dot(y,y)) + x1", &chart).unwrap();
        let h = homogeneity_degree(mixed.as_ref(), &p).unwrap();
        assert!(!h.is_homogeneous(1e-6), "{h:?}");

        let neg = field("-sqrt(dot(y,y))", &chart).unwrap();
        assert!(matches!(
            homogeneity_degree(neg.as_ref(), &p),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn base_only_detection() {
        assert!(parse("x1*x2 + norm2(x)", 2).unwrap().is_base_only());
        assert!(!parse("x1 + dot(x,y)", 2).unwrap().is_base_only());
    }
}
