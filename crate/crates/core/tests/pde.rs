use kpp_sharp::config::RunConfig;
use kpp_sharp::model::{Boundary, Domain, Grid, ScalarField};
use kpp_sharp::pde_solver::{layer_thickness, simulate, stable_dt, step};
use kpp_sharp::traveling_wave::explicit_m2;
use kpp_sharp::verification::{check_comparison, check_mass_conservation};

#[test]
fn thickness_of_a_sampled_quadratic_layer() {
    let eps = 0.02;
    let domain = Domain::interval(0.0, 2.0).unwrap();
    let grid = Grid::new(&domain, &[4000]).unwrap();
    let field = ScalarField::from_fn(grid, Boundary::NoFlux, |x| explicit_m2((x[0] - 1.0) / eps).u);
    let w = layer_thickness(&field, 0.1).unwrap();
    let exact = 2.0 * eps * 9f64.ln();
    assert!((w - exact).abs() <= 2.0 * grid.h(), "{w} vs {exact}");
}

#[test]
fn solution_stays_non_negative_and_conserves_mass_without_reaction() {
    let sc = RunConfig::preset("ac3").unwrap().scenario().unwrap();
    let s0 = sc.initial_state().unwrap();
    let mut s = s0.clone();
    for _ in 0..50 {
        s = step(&s, stable_dt(&s)).unwrap();
        assert!(s.u.min() >= 0.0);
    }
    assert!(check_mass_conservation(&s0, 200).unwrap() <= 1e-8);
}

#[test]
fn discrete_comparison_holds() {
    let sc = RunConfig::preset("ac7").unwrap().scenario().unwrap();
    let grid = Grid::new(&sc.params.domain, &[48]).unwrap();
    let r = check_comparison(&sc.params, &sc.chemo, grid, 10, 50, 7).unwrap();
    assert!(r.passed(), "violation {}", r.max_violation);
}

#[test]
fn snapshots_include_generation_and_final_times() {
    let sc = RunConfig::preset("ac3").unwrap().scenario().unwrap();
    let snaps = simulate(&sc.initial_state().unwrap(), &[0.01, 0.05]).unwrap();
    let t: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let mut expected = vec![0.0, 0.01, 0.05, sc.params.generation_time(), sc.params.t_final];
    expected.sort_by(f64::total_cmp);
    assert_eq!(t.len(), expected.len());
    for (a, b) in t.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}
