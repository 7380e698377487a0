mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use spraylab_core::coords::{Chart, ScalarField, TangentSample};
use spraylab_core::expr::{self, BinOp, Block, Expr, Func};
use spraylab_core::finsler::{self, builtin};
use spraylab_core::projective::ProjectiveFactor;
use spraylab_core::spraycalc;

const DIM: usize = 3;

fn block() -> impl Strategy<Value = Block> {
    prop_oneof![Just(Block::X), Just(Block::Y)]
}

fn ast() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(Expr::Num),
        (block(), 0..DIM).prop_map(|(b, i)| Expr::Var(b, i)),
        (block(), block()).prop_map(|(a, b)| Expr::Dot(a, b)),
        block().prop_map(Expr::Norm2),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let func = prop_oneof![Just(Func::Sqrt), Just(Func::Exp), Just(Func::Ln), Just(Func::Abs)];
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let exponent = prop_oneof![Just(2.0), Just(-1.0), Just(0.5), Just(3.0), Just(-1.5)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (func, inner.clone()).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
            (inner, exponent).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
        ]
    })
}

fn tangent() -> impl Strategy<Value = TangentSample> {
    (
        prop::collection::vec(-0.45..0.45f64, DIM),
        prop::collection::vec(-1.0..1.0f64, DIM),
    )
        .prop_filter("nonzero fiber", |(_, y)| y.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(|(x, y)| TangentSample::new(x, y).unwrap())
}

fn scale_close(a: f64, b: f64, rel: f64) -> bool {
    close(a, b, rel, 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_idempotent(e in ast()) {
        let first = expr::parse(&e.to_string(), DIM).unwrap();
        let second = expr::parse(&first.to_string(), DIM).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(first.to_string(), second.to_string());
    }

    #[test]
    fn jet_and_value_paths_agree(e in ast(), p in tangent()) {
        let chart = Chart::all_space(DIM).unwrap();
        let f = expr::compile(e, &chart).unwrap();
        if let (Ok(v), Ok(j)) = (f.value(&p), f.jet(&p, 1)) {
            prop_assert!(close(v, j.value(), 1e-12, 1e-300), "{} vs {}", v, j.value());
        }
    }

    #[test]
    fn geometric_objects_scale_with_their_degrees(p in tangent()) {
        let chart = Chart::unit_ball(DIM).unwrap();
        let p2 = p.with_scaled_fiber(2.0);
        for (name, spray) in builtin_sprays().into_iter().filter(|(_, s)| s.dim() == DIM) {
            let (g, g2) = (spray.coefficients(&p, 0).unwrap(), spray.coefficients(&p2, 0).unwrap());
            for i in 0..DIM {
                prop_assert!(scale_close(g2[i].value(), 4.0 * g[i].value(), 1e-9), "{} G", name);
            }
            let (n1, n2) = (spraycalc::connection(spray.as_ref(), &p).unwrap(), spraycalc::connection(spray.as_ref(), &p2).unwrap());
            let (f1, f2) = (
                spraycalc::jacobi_endomorphism(spray.as_ref(), &p).unwrap().0,
                spraycalc::jacobi_endomorphism(spray.as_ref(), &p2).unwrap().0,
            );
            for k in 0..DIM * DIM {
                prop_assert!(scale_close(n2[k], 2.0 * n1[k], 1e-9), "{} N", name);
                prop_assert!(close(f2[k], 4.0 * f1[k], 1e-9, 1e-9 * f1.amax()), "{} Phi", name);
            }
        }
        let factors = [
            ProjectiveFactor::new(builtin::funk_field(&chart).unwrap()),
            spraylab_core::projective::complete_lift(expr::field("x1*x2 - x3^2", &chart).unwrap(), std::slice::from_ref(&p)).unwrap(),
        ];
        for factor in factors {
            prop_assert!(factor.homogeneity_defect(&p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn builtin_metrics_have_declared_degrees(p in tangent()) {
        for f in builtin_metrics(DIM) {
            let h = expr::homogeneity_degree(f.field().as_ref(), &p).unwrap();
            prop_assert!((h.degree - 1.0).abs() < 1e-9 && h.is_homogeneous(1e-9), "{}: {:?}", f.name(), h);
            let sq: Arc<dyn ScalarField> = Arc::new(spraylab_core::coords::Product(f.field().clone(), f.field().clone()));
            let h2 = expr::homogeneity_degree(sq.as_ref(), &p).unwrap();
            prop_assert!((h2.degree - 2.0).abs() < 1e-9, "{}: {:?}", f.name(), h2);
        }
    }

    #[test]
    fn geodesic_spray_is_metrizable_by_its_metric(p in tangent()) {
        for f in builtin_metrics(DIM) {
            let s = finsler::geodesic_spray(&f);
            prop_assert!(finsler::metrizability_residual(&s, &f, &p).unwrap() < 1e-8);
        }
    }
}
