use approx::assert_relative_eq;
use kpp_sharp::reaction_ode::{f_tilde, reaction_zeros, solve_y};
use proptest::prelude::*;

fn logistic(tau: f64, xi: f64) -> (f64, f64) {
    let e = tau.exp();
    let den = 1.0 - xi + xi * e;
    (xi * e / den, e / (den * den))
}

#[test]
fn zeros_match_the_quadratic_formula() {
    for delta in [-0.08, -0.03, 0.03, 0.08] {
        let z = reaction_zeros(delta).unwrap();
        let a_plus = 0.5 * (1.0 + (1.0 + 4.0 * delta).sqrt());
        let a_minus = -0.5 * (1.0 + (1.0 - 4.0 * delta).sqrt());
        let a = if delta > 0.0 {
            -0.5 * (1.0 - (1.0 - 4.0 * delta).sqrt())
        } else {
            0.5 * (1.0 - (1.0 + 4.0 * delta).sqrt())
        };
        assert_relative_eq!(z.a_plus, a_plus, epsilon = 1e-10);
        assert_relative_eq!(z.a_minus, a_minus, epsilon = 1e-10);
        assert_relative_eq!(z.a, a, epsilon = 1e-10);
        for r in [z.a_minus, z.a, z.a_plus] {
            assert!((f_tilde(r) + delta).abs() < 1e-10);
        }
    }
}

#[test]
fn unperturbed_flow_is_logistic() {
    for &tau in &[0.1, 1.0, 3.0] {
        for &xi in &[0.01, 0.3, 0.9, 1.4] {
            let s = solve_y(tau, xi, 0.0).unwrap();
            let (y, y_xi) = logistic(tau, xi);
            assert_relative_eq!(s.y, y, epsilon = 1e-9);
            assert_relative_eq!(s.y_xi, y_xi, epsilon = 1e-8, max_relative = 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_is_increasing_in_the_initial_value(
        delta in -0.05f64..0.05,
        tau in 0.05f64..4.0,
        xi in -1.5f64..1.5,
    ) {
        let s = solve_y(tau, xi, delta).unwrap();
        prop_assert!(s.y_xi > 0.0);
        let z = reaction_zeros(delta).unwrap();
        let (lo, hi) = (xi.min(z.a_minus), xi.max(z.a_plus));
        prop_assert!(s.y >= lo - 1e-9 && s.y <= hi + 1e-9);
    }
}
