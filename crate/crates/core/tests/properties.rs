use std::sync::Arc;

use finjet::connections::{chern_coeffs, ConnectionKind};
use finjet::diffeo::corpus::{rotation, translation};
use finjet::diffeo::Diffeo;
use finjet::fields::{eval_field, ScalarField, SymbolField};
use finjet::finsler::{fundamental_tensor, homogeneity_residuals, FinslerModel, PointOnSlit};
use finjet::jets::lift_variables;
use finjet::quantization::beta_constants;
use finjet::schwarzian::schwarzian;
use proptest::prelude::*;

fn randers() -> Arc<FinslerModel> {
    Arc::new(FinslerModel::parse_randers(2, &["1 + 0.1*x2^2", "0", "0", "1"], &["0.25*x2", "0.25*x1"]).unwrap())
}

fn slit() -> impl Strategy<Value = PointOnSlit> {
    (prop::array::uniform2(-0.8..0.8f64), prop::array::uniform2(-2.0..2.0f64))
        .prop_filter("y away from the zero section", |(_, y)| y[0].hypot(y[1]) > 0.1)
        .prop_map(|(x, y)| PointOnSlit::new(x.to_vec(), y.to_vec()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_is_positively_homogeneous(p in slit(), t in 0.1..10.0f64) {
        let m = randers();
        let f = m.f_value(&p.x, &p.y).unwrap();
        let ty: Vec<f64> = p.y.iter().map(|v| v * t).collect();
        prop_assert!((m.f_value(&p.x, &ty).unwrap() - t * f).abs() <= 1e-12 * t * f.max(1.0));
    }

    #[test]
    fn euler_identities_hold(p in slit()) {
        prop_assert!(homogeneity_residuals(&randers(), &p).unwrap().worst() < 1e-9);
    }

    #[test]
    fn fundamental_tensor_is_symmetric_and_positive(p in slit()) {
        let g = fundamental_tensor(&randers(), &p).unwrap();
        prop_assert!((g[(0, 1)] - g[(1, 0)]).abs() < 1e-14);
        prop_assert!(g[(0, 0)] > 0.0 && g.determinant() > 0.0);
    }

    #[test]
    fn chern_connection_is_torsion_free(p in slit()) {
        let c = chern_coeffs(&randers(), &p).unwrap().horizontal;
        for k in 0..2 {
            prop_assert!((c.get(&[k, 0, 1]) - c.get(&[k, 1, 0])).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_has_zero_cocycle(p in slit(), delta in -1.0..1.5f64) {
        let sym = SymbolField::parse(2, &["1 + 0.2*x1^2", "0.1*x1*x2", "0.1*x1*x2", "2 - 0.3*x2"], delta).unwrap();
        for kind in ConnectionKind::ALL {
            let v = schwarzian(&Diffeo::identity(2), &randers(), kind, &sym, &p).unwrap();
            prop_assert!(v.max_abs() < 1e-11);
        }
    }

    #[test]
    fn euclidean_motions_have_zero_cocycle(p in slit(), angle in -3.0..3.0f64, c in prop::array::uniform2(-1.0..1.0f64)) {
        let f = Arc::new(rotation(2, 0, 1, angle).compose(&translation(&c)));
        let sym = SymbolField::parse(2, &["1 + x1^2", "x2", "x2", "2"], 0.3).unwrap();
        let v = schwarzian(&f, &FinslerModel::euclidean(2), ConnectionKind::Cartan, &sym, &p).unwrap();
        prop_assert!(v.max_abs() < 1e-10);
    }

    #[test]
    fn beta_ratio_identity(m in 3usize..9, lambda in -2.0..2.0f64, mu in -2.0..2.0f64) {
        if let Ok(b) = beta_constants(m, lambda, mu) {
            let scale = (b.beta[4] * (m as f64 * b.delta - 2.0)).abs().max(1.0);
            prop_assert!(b.ratio_defect() / scale < 1e-12);
            prop_assert!((b.delta - (mu - lambda)).abs() < 1e-15);
        }
    }

    #[test]
    fn jet_product_rule(a in prop::array::uniform2(-1.0..1.0f64)) {
        let f = ScalarField::parse("sin(x1)*exp(x2)", 2, false).unwrap();
        let u = ScalarField::parse("sin(x1)", 2, false).unwrap();
        let v = ScalarField::parse("exp(x2)", 2, false).unwrap();
        let whole = eval_field(&f, &a, 4).unwrap();
        let vars = lift_variables(&a, 4);
        let prod = &u.eval_jets(&vars).unwrap() * &v.eval_jets(&vars).unwrap();
        for (x, y) in whole.coeffs().iter().zip(prod.coeffs()) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }
}
