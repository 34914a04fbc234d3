use std::f64::consts::{FRAC_PI_4, PI};

use ou_epr::cramer::{
    cramer, cramer_prime, cramer_quadrature, free_energy_f, lambda_finite_t, rate_legendre,
    rate_paper, FMethod,
};
use ou_epr::Model;
use proptest::prelude::*;

fn theta_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.05f64..1.5, -1.5f64..-0.05]
}

#[test]
fn closed_form_identities() {
    for theta in [PI / 6.0, FRAC_PI_4, PI / 3.0, -0.4] {
        let m = Model::new(theta).unwrap();
        let (s, c) = theta.sin_cos();
        assert!((cramer(&m, -0.5).value - (c - 1.0)).abs() < 1e-15);
        assert!(cramer(&m, 0.0).value.abs() < 1e-15);
        assert!((cramer_prime(&m, 0.0).unwrap() - m.ep()).abs() < 1e-13);
        assert!((rate_paper(&m, 0.0).value - (1.0 - c)).abs() < 1e-12);
        assert!(rate_paper(&m, m.ep()).value.abs() < 1e-12);
        let x: f64 = 0.8;
        let direct = (1.0 + x * x / (4.0 * s * s)).sqrt() - x / 2.0 - c;
        assert!((rate_paper(&m, x).value - direct).abs() < 1e-12);
    }
}

#[test]
fn finite_horizon_increases_toward_limit() {
    let m = Model::new(FRAC_PI_4).unwrap();
    for lambda in [-0.9, -0.3, 0.1] {
        let limit = cramer(&m, lambda).value;
        let vals: Vec<f64> = [5.0, 10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&t| lambda_finite_t(&m, lambda, t, 64).unwrap().value)
            .collect();
        let gaps: Vec<f64> = vals.iter().map(|v| (v - limit).abs()).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "λ={lambda}: {vals:?}");
        // the gap is O(1/T)
        assert!(gaps[4] * 80.0 < 2.0 * gaps[3] * 40.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gallavotti_cohen_for_cramer(theta in theta_strategy(), u in 0.0f64..1.0) {
        let m = Model::new(theta).unwrap();
        let dc = m.derived_constants();
        let lambda = dc.lambda_lo + (dc.lambda_hi - dc.lambda_lo) * (0.001 + 0.998 * u);
        let a = cramer(&m, lambda).value;
        let b = cramer(&m, -1.0 - lambda).value;
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn gallavotti_cohen_at_finite_horizon(theta in theta_strategy(), lambda in -1.5f64..0.5, t in 0.5f64..60.0) {
        let m = Model::new(theta).unwrap();
        let a = lambda_finite_t(&m, lambda, t, 64).unwrap().value;
        let b = lambda_finite_t(&m, -1.0 - lambda, t, 64).unwrap().value;
        if a.is_finite() {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        } else {
            prop_assert_eq!(b, f64::INFINITY);
        }
    }

    #[test]
    fn rate_symmetry_and_nonnegativity(theta in theta_strategy(), x in -6.0f64..6.0) {
        let m = Model::new(theta).unwrap();
        let i_pos = rate_paper(&m, x).value;
        let i_neg = rate_paper(&m, -x).value;
        prop_assert!(i_pos >= -1e-14);
        prop_assert!((i_pos - i_neg + x).abs() < 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn legendre_duality(theta in 0.2f64..1.3, x in -3.0f64..3.0) {
        let m = Model::new(theta).unwrap();
        let a = rate_paper(&m, x).value;
        let b = rate_legendre(&m, x).unwrap();
        prop_assert!((a - b.value).abs() < 1e-7);
        let lam = b.argmax_lambda.unwrap();
        prop_assert!((cramer_prime(&m, lam).unwrap() - x).abs() < 1e-6 * (1.0 + x.abs()));
    }

    #[test]
    fn cramer_is_convex(theta in theta_strategy(), u in 0.02f64..0.98, h in 1e-3f64..1e-2) {
        let m = Model::new(theta).unwrap();
        let dc = m.derived_constants();
        let l = dc.lambda_lo + (dc.lambda_hi - dc.lambda_lo) * u;
        prop_assume!(m.in_domain(l - h) && m.in_domain(l + h));
        let second = cramer(&m, l + h).value - 2.0 * cramer(&m, l).value + cramer(&m, l - h).value;
        prop_assert!(second > 0.0);
    }

    #[test]
    fn quadrature_matches_closed_form(r in 0.05f64..1.0, v in 0.0f64..1.0) {
        let ell = -5.0 + v * (5.0 + 0.49 * r);
        let q = free_energy_f(ell, r, FMethod::Quadrature).unwrap();
        let c = free_energy_f(ell, r, FMethod::ClosedForm).unwrap();
        prop_assert!((q - c).abs() < 1e-9);
    }

    #[test]
    fn cramer_quadrature_agrees(theta in theta_strategy(), u in 0.01f64..0.99) {
        let m = Model::new(theta).unwrap();
        let dc = m.derived_constants();
        let l = dc.lambda_lo + (dc.lambda_hi - dc.lambda_lo) * u;
        let a = cramer(&m, l).value;
        let b = cramer_quadrature(&m, l).unwrap().value;
        prop_assert!((a - b).abs() < 1e-8);
    }
}
