use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use evodyn::certify::{classify_lead_lag, classify_matrix_game, lead_lag_frequency_response, GameClass};
use evodyn::dynamics::DynamicsModel;
use evodyn::interconnection::{assemble, integrate, IntegratorConfig};
use evodyn::{make_rps_game, GameModel, SimplexState};

fn closed_forms(alpha: f64, beta: f64, omega: f64) -> (f64, f64) {
    let re = beta * (alpha / beta - 1.0) / (beta * beta * omega * omega + 1.0);
    let im = -(alpha * beta * omega * omega + 1.0) / (beta * beta * omega.powi(3) + omega);
    (re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn lead_lag_matches_closed_forms(
        alpha in 0.05f64..20.0,
        beta in 0.05f64..20.0,
        log_omega in -3.0f64..3.0,
    ) {
        let omega = 10f64.powf(log_omega);
        let (re, im) = closed_forms(alpha, beta, omega);
        let r = lead_lag_frequency_response(alpha, beta, omega).unwrap();
        let s = Complex64::new(0.0, omega);
        let direct = (1.0 + alpha * s) / (s * (1.0 + beta * s));
        prop_assert!((r.re() - re).abs() <= 1e-12, "re {} vs {re}", r.re());
        prop_assert!((r.im() - im).abs() <= 1e-12, "im {} vs {im}", r.im());
        prop_assert!((direct.re - re).abs() <= 1e-12 && (direct.im - im).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lead_lag_verdict_matches_sweep_signs(alpha in 0.05f64..20.0, beta in 0.05f64..20.0) {
        let v = classify_lead_lag(alpha, beta).unwrap();
        prop_assert!(v.sweep_agrees, "alpha={alpha} beta={beta}: {v:?}");
        prop_assert!(v.max_im < 0.0);
    }
}

#[test]
fn rps_classes_follow_sign_of_w_minus_l() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(467);
    for k in 0..100 {
        let w: f64 = rng.gen_range(0.0..5.0);
        let l = match k % 4 {
            0 => w,
            _ => rng.gen_range(0.0..5.0),
        };
        let class = classify_matrix_game(&make_rps_game(w, l).unwrap(), 1e-10);
        let expected = if w > l {
            GameClass::StrictlyPassive
        } else if w < l {
            GameClass::NonPassive
        } else {
            GameClass::Lossless
        };
        assert_eq!(class, expected, "w={w} l={l}");
    }
}

// Halving h shrinks the endpoint error by about 2^4.
#[test]
fn rk4_endpoint_error_has_fourth_order() {
    let x0 = SimplexState::from_slice(&[0.6, 0.3, 0.1]).unwrap();
    let sys =
        assemble(DynamicsModel::standard(), GameModel::Matrix(make_rps_game(2.0, 1.0).unwrap()), &x0, None).unwrap();
    let end = |h: f64| -> DVector<f64> {
        integrate(&sys, &IntegratorConfig::new(h, 10.0).unwrap()).unwrap().final_state().clone()
    };
    let (a, b, c) = (end(0.2), end(0.1), end(0.05));
    let ratio = (&a - &b).norm() / (&b - &c).norm();
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}
