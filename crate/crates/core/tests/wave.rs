use approx::assert_abs_diff_eq;
use kpp_sharp::traveling_wave::{compute_wave, explicit_m2};

#[test]
fn quadratic_wave_matches_the_closed_form() {
    let w = compute_wave(2.0, 1e-8).unwrap();
    assert_abs_diff_eq!(w.c_star, 1.0, epsilon = 1e-6);
    let err = (0..=400)
        .map(|k| -8.0 + 8.0 * k as f64 / 400.0)
        .map(|z| (w.u(z) - explicit_m2(z).u).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "profile error {err}");
}

#[test]
fn closed_form_solves_the_profile_equation() {
    for k in 1..200 {
        let z = -10.0 + 10.0 * k as f64 / 200.0;
        let e = explicit_m2(z);
        // (U^2)'' + c U' + U(1-U) with c = 1
        let r = e.d2um + e.du + e.u * (1.0 - e.u);
        assert!(r.abs() < 1e-12, "z = {z}: {r}");
    }
}

#[test]
fn cubic_wave_is_monotone_with_a_sharp_edge() {
    let w = compute_wave(3.0, 1e-8).unwrap();
    assert!(w.c_star > 0.0 && w.c_star < 2.0);
    assert!(w.u(0.0).abs() < 1e-12);
    let mut prev = 1.0;
    for k in 0..=500 {
        let z = -10.0 + 10.0 * k as f64 / 500.0;
        let u = w.u(z);
        assert!(u <= prev + 1e-12 && (0.0..=1.0 + 1e-12).contains(&u));
        prev = u;
    }
}
