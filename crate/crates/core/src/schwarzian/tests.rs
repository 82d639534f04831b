use std::sync::Arc;

use approx::assert_relative_eq;

use super::corpus::*;
use super::*;
use crate::fields::SymbolField;

fn pt(x: &[f64], y: &[f64]) -> PointOnSlit {
    PointOnSlit::new(x.to_vec(), y.to_vec()).unwrap()
}

fn randers_const() -> Arc<FinslerModel> {
    Arc::new(FinslerModel::parse_randers(2, &["1", "0", "0", "1"], &["0.5", "0"]).unwrap())
}

fn randers_varying() -> Arc<FinslerModel> {
    Arc::new(
        FinslerModel::parse_randers(2, &["1 + 0.1*x2^2", "0", "0", "1"], &["0.25*x2", "0.25*x1"]).unwrap(),
    )
}

fn symbol2(delta: f64) -> SymbolField {
    SymbolField::parse(2, &["1 + 0.2*x1^2", "0.1*x1*x2", "0.1*x1*x2", "2 - 0.3*x2"], delta).unwrap()
}

fn samples2() -> Vec<PointOnSlit> {
    vec![pt(&[0.3, -0.2], &[1.0, 0.4]), pt(&[-0.5, 0.6], &[-0.3, 0.8]), pt(&[0.1, 0.45], &[0.7, -0.6])]
}

#[test]
fn identity_gives_zero() {
    let f = Diffeo::identity(2);
    let p = symbol2(0.3);
    for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
        for s in samples2() {
            let v = schwarzian(&f, &randers_varying(), kind, &p, &s).unwrap();
            assert!(v.max_abs() < 1e-12, "{kind:?}: {:?}", v.components);
        }
    }
}

#[test]
fn lift_of_inversion() {
    let f = inversion(2);
    let img = lift_diffeo(&f, &pt(&[1.0, 0.0], &[1.0, 1.0])).unwrap();
    assert_relative_eq!(img.x[0], 1.0, epsilon = 1e-14);
    assert_relative_eq!(img.x[1], 0.0, epsilon = 1e-14);
    // D(x/|x|²) at e₁ is diag(-1, 1)
    assert_relative_eq!(img.y[0], -1.0, epsilon = 1e-14);
    assert_relative_eq!(img.y[1], 1.0, epsilon = 1e-14);
}

#[test]
fn weighted_pullback_of_constant_density() {
    let f = dilation(3, 2.0);
    let delta = 0.3;
    let one = |_: &PointOnSlit| Ok(Tensor::from_data(3, 0, vec![1.0]));
    let v = pullback_weighted(&f, &one, &[], delta, &pt(&[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0])).unwrap();
    assert_relative_eq!(v.get(&[]), 2f64.powf(-3.0 * delta), epsilon = 1e-14);
}

#[test]
fn affine_maps_of_flat_space_give_zero() {
    let model = FinslerModel::euclidean(2);
    let p = symbol2(0.4);
    let f = Arc::new(rotation(2, 0, 1, 0.7).compose(&translation(&[0.2, -0.1])));
    for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
        let v = schwarzian(&f, &model, kind, &p, &pt(&[0.3, 0.2], &[1.0, 0.5])).unwrap();
        assert!(v.max_abs() < 1e-12);
    }
}

#[test]
fn conformal_maps_of_flat_space_give_zero() {
    let model = FinslerModel::euclidean(3);
    let p = SymbolField::parse(
        3,
        &["1 + x1^2", "x2", "0.5", "x2", "2 + x3", "x1*x3", "0.5", "x1*x3", "3 - x2^2"],
        0.3,
    )
    .unwrap();
    let maps = [inversion(3), Arc::new(inversion(3).compose(&translation(&[0.1, 0.2, -0.3])))];
    let at = pt(&[0.8, -0.4, 0.5], &[0.2, 1.0, -0.3]);
    for f in maps {
        for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
            let v = schwarzian(&f, &model, kind, &p, &at).unwrap();
            assert!(v.max_abs() < 1e-9, "{kind:?}: {:?}", v.components);
        }
    }
}

#[test]
fn non_conformal_maps_do_not_vanish() {
    let model = FinslerModel::euclidean(2);
    let f = cubic_perturbation(2, 0.05, 3);
    let v = schwarzian(&f, &model, ConnectionKind::Chern, &symbol2(0.3), &pt(&[0.3, 0.2], &[1.0, 0.5])).unwrap();
    assert!(v.max_abs() > 1e-4);
}

#[test]
fn cocycle_identity_on_randers() {
    let f = cubic_perturbation(2, 0.04, 11);
    let h = cubic_perturbation(2, 0.03, 5);
    for model in [randers_const(), randers_varying()] {
        for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
            for delta in [0.0, 0.3, 1.0] {
                let r = verify_cocycle(&f, &h, &model, kind, &symbol2(delta), &samples2()).unwrap();
                assert!(r.max < 1e-6, "{kind:?} δ={delta}: {}", r.max);
            }
        }
    }
}

#[test]
fn rescaling_leaves_the_operator_unchanged() {
    let model = randers_varying();
    let psi = ScalarField::parse("exp(sin(x1))", 2, false).unwrap();
    let f = cubic_perturbation(2, 0.04, 9);
    for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
        for delta in [0.0, 0.3] {
            let rep = verify_rescaling_invariance(&model, &psi, &f, kind, &symbol2(delta), &samples2()).unwrap();
            assert!(rep.connection.max < 1e-9, "{kind:?} connection {}", rep.connection.max);
            assert!(rep.derivative.max < 1e-9, "{kind:?} derivative {}", rep.derivative.max);
            assert!(rep.ell.max < 1e-9, "{kind:?} ell {}", rep.ell.max);
            assert!(rep.operator.max < 1e-6, "{kind:?} δ={delta} operator {}", rep.operator.max);
        }
    }
}

#[test]
fn non_positive_rescaling_is_rejected() {
    let psi = ScalarField::parse("x1", 2, false).unwrap();
    let err = rescale_model(&randers_const(), &psi, &[vec![-0.5, 0.0]]).unwrap_err();
    assert!(matches!(err, FinjetError::Precondition(_)));
}

#[test]
fn riemannian_variants_agree_with_the_reduced_form() {
    let model = FinslerModel::parse_riemannian(2, &["1 + 0.2*x1^2", "0.1*x2", "0.1*x2", "1"]).unwrap();
    let f = cubic_perturbation(2, 0.04, 2);
    let p = symbol2(0.3);
    let x = [0.25, -0.35];
    let reduced = schwarzian_reduced(&f, &model, &p, &x).unwrap();
    for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
        for y in [[1.0, 0.0], [0.3, -0.9]] {
            let v = schwarzian(&f, &model, kind, &p, &pt(&x, &y)).unwrap();
            for k in 0..2 {
                assert_relative_eq!(v.components[k], reduced.components[k], epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn b_tensor_vanishes_for_riemannian_models() {
    let model = FinslerModel::parse_riemannian(2, &["exp(x1)", "0", "0", "1 + x2^2"]).unwrap();
    for kind in [ConnectionKind::Chern, ConnectionKind::Berwald, ConnectionKind::Cartan] {
        let b = b_tensor(&model, kind, &pt(&[0.2, 0.3], &[1.0, -0.4])).unwrap();
        assert!(b.max_abs() < 1e-12);
    }
}

#[test]
fn horizontal_log_derivative_vanishes() {
    for s in samples2() {
        let v = horizontal_d_log_f(&randers_varying(), &s).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-12), "{v:?}");
    }
}

#[test]
fn ell_of_a_shear_on_flat_space() {
    // f(x) = (x1 + 0.1 x2², x2): ℓ = J^{-1} ∂J, ℓ^1_22 = 0.2 everywhere.
    let f = Diffeo::parse(&["x1 + 0.1*x2^2", "x2"], Some(&["x1 - 0.1*x2^2", "x2"]), Domain::default()).unwrap();
    let model = FinslerModel::euclidean(2);
    let l = ell(&f, &model, ConnectionKind::Chern, &pt(&[0.4, 0.7], &[1.0, 0.2])).unwrap();
    assert_relative_eq!(l.get(&[0, 1, 1]), 0.2, epsilon = 1e-13);
    assert_relative_eq!(l.get(&[1, 1, 1]), 0.0, epsilon = 1e-13);
}

#[test]
fn ell_matches_the_pulled_back_model() {
    let f = Diffeo::parse(&["x1 + 0.1*x2^2", "x2"], Some(&["x1 - 0.1*x2^2", "x2"]), Domain::default()).unwrap();
    let model = randers_varying();
    let at = pt(&[0.4, 0.2], &[1.0, 0.3]);
    let l = ell(&f, &model, ConnectionKind::Chern, &at).unwrap();
    // oracle: the connection of the pulled-back model
    let pulled = model.pullback(Arc::new(f));
    let here = crate::connections::chern_coeffs(&model, &at).unwrap().horizontal;
    let there = crate::connections::chern_coeffs(&pulled, &at).unwrap().horizontal;
    let expected = there.sub(&here);
    assert!(l.max_abs_diff(&expected) < 1e-10, "{}", l.max_abs_diff(&expected));
}

#[test]
fn degenerate_weight_is_flagged() {
    let v = schwarzian(&Diffeo::identity(2), &randers_const(), ConnectionKind::Chern, &symbol2(1.0), &samples2()[0]).unwrap();
    assert!(v.degenerate_weight);
}

#[test]
fn breve_form_requires_a_nonvanishing_field() {
    let zero = [ScalarField::constant(2, 0.0), ScalarField::constant(2, 0.0)];
    let err = breve_schwarzian(&Diffeo::identity(2), &randers_const(), ConnectionKind::Chern, &symbol2(0.3), &zero, &[0.1, 0.1])
        .unwrap_err();
    assert!(matches!(err, FinjetError::Precondition(_)));
}
