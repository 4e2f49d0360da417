//! End-to-end acceptance suite. Each test prints one `PASS` or `FAIL` line
//! naming its criterion and the measured quantities, then asserts.

use std::time::{Duration, Instant};

use kpp_sharp::config::RunConfig;
use kpp_sharp::model::{Boundary, Grid, ScalarField};
use kpp_sharp::pde_solver::{advance_to, layer_thickness, simulate, PdeState};
use kpp_sharp::traveling_wave::{compute_wave, explicit_m2};
use kpp_sharp::verification::{
    check_comparison, check_flow, check_generation, check_generation_residuals, check_generation_sandwich,
    check_mass_conservation, check_ordering, check_propagation_residuals, check_propagation_sandwich, check_wave,
    circle_benchmark, compare_front_solvers, d_constant_1d, front_table_1d, run_sweep, sigma_max, GenComparators,
    PropComparators, PropLattice, SandwichRecord, TOL_NUM,
};

fn report(criterion: u32, pass: bool, detail: String) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn preset(name: &str) -> RunConfig {
    RunConfig::preset(name).unwrap()
}

#[test]
fn criterion_1_quadratic_wave() {
    let cfg = preset("ac1");
    let start = Instant::now();
    let r = check_wave(2.0, cfg.verify.wave_tol).unwrap();
    let elapsed = start.elapsed();
    let sup_err = (0..=2000)
        .map(|k| -10.0 + 10.0 * k as f64 / 2000.0)
        .map(|z| (r.profile.u(z) - explicit_m2(z).u).abs())
        .fold(0.0, f64::max);
    let residual = r.explicit_residual.unwrap_or(f64::INFINITY);
    let pass = (r.c_star - 1.0).abs() <= 1e-3 && sup_err <= 1e-3 && residual <= 1e-12 && elapsed < Duration::from_secs(5);
    report(
        1,
        pass,
        format!("c* = {:.8}, sup error {sup_err:.2e}, explicit residual {residual:.2e}, {elapsed:?}", r.c_star),
    );
    assert!(pass);
}

#[test]
fn criterion_2_cubic_wave() {
    let cfg = preset("ac2");
    let start = Instant::now();
    let r = check_wave(3.0, cfg.verify.wave_tol).unwrap();
    let elapsed = start.elapsed();
    let checks = r.checks();
    let pass = checks.iter().all(|c| c.1) && elapsed < Duration::from_secs(10);
    report(
        2,
        pass,
        format!(
            "c* = {:.6}, beta drift {:.2e}, edge C = {:.4}, |U'(-1e-3)| = {:.3}, checks {checks:?}, {elapsed:?}",
            r.c_star,
            r.beta_drift(),
            r.edge_constant,
            r.sharpness
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_generation() {
    let cfg = preset("ac3");
    let sc = cfg.scenario().unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let g = check_generation(&sc.with_epsilon(eps).unwrap(), &cfg.verify.m0).unwrap();
        let ok = g.passed() && g.m0.is_some_and(|m| m <= 40.0);
        pass &= ok;
        detail.push(format!("eps {eps}: M0 = {:?}, conditions {:?}", g.m0, g.conditions));
    }
    report(3, pass, detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_4_thickness() {
    let cfg = preset("ac4");
    let sc = cfg.scenario().unwrap();
    let wave = compute_wave(2.0, cfg.verify.wave_tol).unwrap();

    let eps = 0.02;
    let grid = Grid::new(&sc.params.domain, &[4000]).unwrap();
    let field = ScalarField::from_fn(grid, Boundary::NoFlux, |x| explicit_m2((x[0] - 1.0) / eps).u);
    let width = layer_thickness(&field, 0.1).unwrap();
    let exact = 2.0 * eps * 9f64.ln();
    let oracle_ok = (width - exact).abs() <= 2.0 * grid.h();

    let r = run_sweep(&sc, &cfg.eps_list(), &[0.5, 1.0], &wave, &[]).unwrap();
    let t = sc.params.t_final;
    let slopes = [r.thickness_slope(0.5 * t), r.thickness_slope(t)];
    let slopes_ok = slopes.iter().all(|s| s.is_some_and(|s| (0.8..=1.2).contains(&s)));
    let pass = oracle_ok && slopes_ok;
    report(
        4,
        pass,
        format!("analytic layer {width:.5} vs {exact:.5}, slopes at T/2 and T {slopes:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_front_distance() {
    let cfg = preset("ac5");
    let sc = cfg.scenario().unwrap();
    let wave = compute_wave(2.0, cfg.verify.wave_tol).unwrap();
    let r = run_sweep(&sc, &cfg.eps_list(), &[0.5, 1.0], &wave, &[]).unwrap();
    let t = sc.params.t_final;
    let slope = r.hausdorff_slope(t);
    let pass = slope.is_some_and(|s| s >= 0.8);
    let dist: Vec<(f64, f64)> = r
        .rows
        .iter()
        .filter(|row| (row.t - t).abs() < 1e-12)
        .map(|row| (row.eps, row.hausdorff))
        .collect();
    report(5, pass, format!("Hausdorff slope at T {slope:?}, distances {dist:?}"));
    assert!(pass);
}

#[test]
fn criterion_6_front_solvers() {
    let wave = compute_wave(2.0, 1e-8).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["ac3", "ac5", "ac9"] {
        let f = compare_front_solvers(&preset(name).scenario().unwrap(), wave.c_star).unwrap();
        pass &= f.passed();
        detail.push(format!("{name} markers vs {}: {:.2e} (3h = {:.2e})", f.reference, f.hausdorff, 3.0 * f.h));
    }
    let c = circle_benchmark(&preset("ac6").scenario().unwrap(), wave.c_star).unwrap();
    pass &= c.passed();
    detail.push(format!(
        "circle: markers {:.2e}, level set {:.2e} (2h = {:.2e})",
        c.marker_error,
        c.levelset_error,
        2.0 * c.h
    ));
    report(6, pass, detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_7_comparison() {
    let cfg = preset("ac7");
    let sc = cfg.scenario().unwrap();
    let n = cfg.verify.comparison_cells;
    let grid = Grid::new(&sc.params.domain, &[n]).unwrap();
    let r = check_comparison(&sc.params, &sc.chemo, grid, 100, 200, cfg.seed).unwrap();
    report(
        7,
        r.passed(),
        format!("{} pairs x {} steps, max violation {:.2e}", r.pairs, r.steps, r.max_violation),
    );
    assert!(r.passed());
}

#[test]
fn criterion_8_structure() {
    let cfg = preset("ac8");
    let sc = cfg.scenario().unwrap();
    let s0 = sc.initial_state().unwrap();
    let literal = PdeState::literal_bound(s0.u.max());
    let mut s = s0.clone();
    advance_to(&mut s, sc.params.t_final).unwrap();
    let bound_ok = s.max_seen <= literal;
    let drift = check_mass_conservation(&s0, 1000).unwrap();
    let flow = check_flow(&sc.flow().unwrap(), &sc.params.domain, sc.params.t_final, cfg.verify.flow_samples, cfg.seed)
        .unwrap();
    let pass = bound_ok && drift <= 1e-8 && flow.round_trip <= 1e-8 && flow.identity <= 1e-6;
    report(
        8,
        pass,
        format!(
            "max u {:.6} vs literal bound {literal}, mass drift {drift:.2e}, round trip {:.2e}, identity {:.2e}",
            s.max_seen, flow.round_trip, flow.identity
        ),
    );
    assert!(pass);
}

fn sandwich_ok(records: &[SandwichRecord]) -> bool {
    !records.is_empty() && records.iter().all(SandwichRecord::holds)
}

#[test]
fn criterion_9_comparators() {
    let start = Instant::now();
    let cfg = preset("ac9");
    let sc = cfg.scenario().unwrap().with_epsilon(0.02).unwrap();
    let params = sc.params;
    let wave = compute_wave(params.m, cfg.verify.wave_tol).unwrap();
    let (samples, seed) = (cfg.verify.samples, cfg.seed);

    let gen = check_generation(&sc, &cfg.verify.m0).unwrap();
    let gres = check_generation_residuals(&sc, &cfg.verify.c_g, samples, seed, TOL_NUM).unwrap();
    let gen_sandwich = match (gres.c_g, gen.m0) {
        (Some(c_g), Some(m0)) => {
            let gc = GenComparators::new(&params, &sc, c_g, m0).unwrap();
            sandwich_ok(&check_generation_sandwich(&sc, &gc, cfg.verify.sandwich_times).unwrap())
        }
        _ => false,
    };

    let lattice = cfg.verify.prop_lattice();
    let pres = check_propagation_residuals(&sc, &wave, &lattice, samples, seed, TOL_NUM).unwrap();
    let table = front_table_1d(&sc, wave.c_star).unwrap();
    let front = table.trajectory();
    let s_max = sigma_max(wave.c_star, params.m, d_constant_1d(table.d0), params.eta);
    let t_gen = params.generation_time();
    let n = cfg.verify.sandwich_times;
    let times: Vec<f64> = (0..=n).map(|k| t_gen + (params.t_final - t_gen) * k as f64 / n as f64).collect();
    let snaps = simulate(&sc.initial_state().unwrap(), &times).unwrap();
    let at_gen = snaps.iter().find(|s| (s.t - t_gen).abs() <= 1e-12).unwrap();

    let mut prop_residual_at_k = false;
    let mut prop_sandwich = false;
    let mut used = None;
    if let Some(w) = pres.witness {
        let ordering = check_ordering(at_gen, &front, &wave, &w, table.d0, &cfg.verify.k).unwrap();
        if let Some(k) = ordering.k {
            let fixed_k = PropLattice {
                sigma_fractions: vec![w.sigma / s_max],
                l: lattice.l.clone(),
                k: vec![k],
            };
            let r = check_propagation_residuals(&sc, &wave, &fixed_k, samples, seed, TOL_NUM).unwrap();
            if let Some(pk) = r.witness {
                prop_residual_at_k = true;
                prop_sandwich = sandwich_ok(&check_propagation_sandwich(&snaps, &front, &wave, &pk, table.d0).unwrap());
                used = Some(pk);
            }
        }
    }
    let used: Option<PropComparators> = used;
    let elapsed = start.elapsed();
    let pass = gen.passed()
        && gres.passed()
        && gen_sandwich
        && pres.passed()
        && prop_residual_at_k
        && prop_sandwich
        && elapsed < Duration::from_secs(300);
    report(
        9,
        pass,
        format!(
            "C_G = {:?}, M0 = {:?}, generation sandwich {gen_sandwich}, propagation comparators {used:?}, \
             residuals at ordering K {prop_residual_at_k}, propagation sandwich {prop_sandwich}, {elapsed:?}",
            gres.c_g, gen.m0
        ),
    );
    assert!(pass);
}
