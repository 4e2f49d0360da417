//! Comparison functions for the propagation phase,
//! `u^±(t, x) = (1 ± q(t)) U((d^ε(t,x) ∓ εp(t))/ε)` with
//! `p(t) = -e^{-t/ε} + e^{Lt} + K` and `q(t) = σ(e^{-t/ε} + εLe^{Lt})`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::residual::{residual_pde, Region, SpaceTime, FD_STEP};
use super::{sandwich_violation, SandwichRecord, Scenario, Sign, SANDWICH_VALUE_TOL};
use crate::error::{Error, Result};
use crate::flow::Interface;
use crate::front_solver::{cutoff_distance, zeta, FrontTrajectory};
use crate::integrate::rk4_fixed;
use crate::model::{ChemoFieldSpec, Point, ScalarField};
use crate::pde_solver::PdeState;
use crate::reaction_ode::bisect;
use crate::traveling_wave::WaveProfile;

/// Samples with `L t` above this are skipped: the comparators no longer
/// carry information there and their derivatives overflow.
pub const SATURATION: f64 = 200.0;

/// Constants of the propagation comparators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropComparators {
    pub sigma: f64,
    pub k: f64,
    pub l: f64,
}

impl PropComparators {
    pub fn p(&self, eps: f64, t: f64) -> f64 {
        -(-t / eps).exp() + (self.l * t).exp() + self.k
    }

    pub fn q(&self, eps: f64, t: f64) -> f64 {
        self.sigma * ((-t / eps).exp() + eps * self.l * (self.l * t).exp())
    }

    /// Value of `u^±` given `d^ε(t, x)`, and whether the wave argument is
    /// negative (inside the support of `U`).
    pub fn value(&self, sign: Sign, eps: f64, wave: &WaveProfile, t: f64, d: f64) -> (f64, bool) {
        let s = sign.factor();
        let z = (d - s * eps * self.p(eps, t)) / eps;
        let amp = (1.0 + s * self.q(eps, t)).max(0.0);
        (amp * wave.u(z), z < 0.0)
    }

    pub fn saturated(&self, t: f64) -> bool {
        self.l * t > SATURATION
    }

    /// Checks `c*(m-1)D²(1+2σ)^{m-2}σ ≤ 1/2`, `σ ≤ η/2`, `K ≥ 1`, `L > 0`.
    pub fn validate(&self, c_star: f64, m: f64, d_const: f64, eta: f64) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma <= sigma_max(c_star, m, d_const, eta) * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} violates the admissibility bound {}",
                self.sigma,
                sigma_max(c_star, m, d_const, eta)
            )));
        }
        if !(self.k >= 1.0) || !(self.l > 0.0) {
            return Err(Error::InvalidParameter("K must be >= 1 and L positive".into()));
        }
        Ok(())
    }
}

/// Largest `σ` with `c*(m-1)D²(1+2σ)^{m-2}σ ≤ 1/2` and `σ ≤ η/2`.
pub fn sigma_max(c_star: f64, m: f64, d_const: f64, eta: f64) -> f64 {
    let g = |s: f64| c_star * (m - 1.0) * d_const * d_const * (1.0 + 2.0 * s).powf(m - 2.0) * s - 0.5;
    let s = if g(1.0) <= 0.0 { 1.0 } else { bisect(g, 0.0, 1.0) };
    // The bisection lands within rounding of the root; step below it.
    let s = if g(s) > 0.0 { s * (1.0 - 1e-12) } else { s };
    s.min(0.5 * eta)
}

/// `sup|∂ₓd| + sup|∂ₓₓd|` of the one-dimensional cut-off distance:
/// `1 + max|ζ''|`.
pub fn d_constant_1d(d0: f64) -> f64 {
    let h2 = |t: f64| 24.0 * t - 84.0 * t * t + 60.0 * t * t * t;
    let peak = (0..=10_000)
        .map(|k| h2(k as f64 / 10_000.0).abs())
        .fold(0.0f64, f64::max);
    1.0 + peak / d0
}

/// `sup|∇d| + sup|Δd|` of a cut-off distance sampled on a grid, from
/// central differences at interior cells.
pub fn d_constant_grid(d: &ScalarField) -> f64 {
    let g = d.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut grad = 0.0f64;
    let mut lap = 0.0f64;
    let jr = if g.dim == 2 { 1..ny - 1 } else { 0..1 };
    for j in jr {
        for i in 1..nx - 1 {
            let c = d.at(i, j);
            let gx = (d.at(i + 1, j) - d.at(i - 1, j)) / (2.0 * g.dx);
            let mut l = (d.at(i + 1, j) - 2.0 * c + d.at(i - 1, j)) / (g.dx * g.dx);
            let mut g2 = gx * gx;
            if g.dim == 2 {
                let gy = (d.at(i, j + 1) - d.at(i, j - 1)) / (2.0 * g.dy);
                l += (d.at(i, j + 1) - 2.0 * c + d.at(i, j - 1)) / (g.dy * g.dy);
                g2 += gy * gy;
            }
            grad = grad.max(g2.sqrt());
            lap = lap.max(l.abs());
        }
    }
    grad + lap
}

/// Endpoints of the one-dimensional limit front, `ȧ = -c* + ∂ₓv(t, a)`,
/// `ḃ = c* + ∂ₓv(t, b)`, tabulated by RK4 and interpolated by cubic Hermite
/// polynomials with the exact slopes, so that they are `C¹` in time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTable1d {
    pub d0: f64,
    times: Vec<f64>,
    nodes: Vec<[f64; 4]>,
}

impl FrontTable1d {
    pub fn new(a0: f64, b0: f64, c_star: f64, chemo: &ChemoFieldSpec, t_end: f64, dt: f64, d0: f64) -> Result<Self> {
        if !(a0 < b0) || !(dt > 0.0) || !(t_end >= 0.0) || !(d0 > 0.0) {
            return Err(Error::InvalidParameter(
                "front table needs a0 < b0, positive dt, d0 and t_end >= 0".into(),
            ));
        }
        let vx = |t: f64, x: f64| chemo.eval(t, [x, 0.0]).grad[0];
        let rhs = |t: f64, s: &[f64; 2]| [-c_star + vx(t, s[0]), c_star + vx(t, s[1])];
        let n = (t_end / dt).ceil().max(1.0) as usize;
        let h = t_end / n as f64;
        let mut times = Vec::with_capacity(n + 1);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut y = [a0, b0];
        for k in 0..=n {
            let t = k as f64 * h;
            if k > 0 {
                y = rk4_fixed(rhs, t - h, y, t, 1);
            }
            let r = rhs(t, &y);
            if !(y[0] < y[1]) {
                return Err(Error::SelfIntersection { t });
            }
            times.push(t);
            nodes.push([y[0], r[0], y[1], r[1]]);
        }
        Ok(Self { d0, times, nodes })
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("table is never empty")
    }

    pub fn endpoints(&self, t: f64) -> (f64, f64) {
        let n = self.times.len();
        if n == 1 {
            return (self.nodes[0][0], self.nodes[0][2]);
        }
        let t = t.clamp(0.0, self.t_end());
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1).min(n - 2);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let herm = |y0: f64, m0: f64, y1: f64, m1: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * m0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * m1
        };
        (herm(a[0], a[1], b[0], b[1]), herm(a[2], a[3], b[2], b[3]))
    }

    /// `d^ε(t, x)` and whether `x` lies closer to the left endpoint.
    pub fn cutoff(&self, t: f64, x: f64) -> (f64, bool) {
        let (a, b) = self.endpoints(t);
        let left = x < 0.5 * (a + b);
        let raw = if left { a - x } else { x - b };
        (zeta(raw, self.d0), left)
    }

    pub fn interface(&self, t: f64) -> Interface {
        let (a, b) = self.endpoints(t);
        Interface {
            dim: 1,
            points: vec![[a, 0.0], [b, 0.0]],
        }
    }

    /// The table as a trajectory with one snapshot per node.
    pub fn trajectory(&self) -> FrontTrajectory {
        FrontTrajectory {
            method: crate::front_solver::FrontMethod::Markers,
            times: self.times.clone(),
            interfaces: self
                .nodes
                .iter()
                .map(|n| Interface {
                    dim: 1,
                    points: vec![[n[0], 0.0], [n[2], 0.0]],
                })
                .collect(),
            phi: Vec::new(),
        }
    }
}

/// `u^+` or `u^-` over a tabulated one-dimensional front.
pub struct PropComparator<'a> {
    pub pc: PropComparators,
    pub sign: Sign,
    pub eps: f64,
    pub wave: &'a WaveProfile,
    pub front: &'a FrontTable1d,
}

impl PropComparator<'_> {
    pub fn value(&self, t: f64, x: Point) -> f64 {
        self.eval(t, x).0
    }
}

impl SpaceTime for PropComparator<'_> {
    /// Tags: bit 0 for the left branch of the distance, bit 1 for a
    /// negative wave argument.
    fn eval(&self, t: f64, x: Point) -> (f64, Region) {
        let (d, left) = self.front.cutoff(t, x[0]);
        let (v, inside) = self.pc.value(self.sign, self.eps, self.wave, t, d);
        (v, u32::from(left) | (u32::from(inside) << 1))
    }
}

/// Search ladders for `(σ, L, K)`; `σ` is given as fractions of its
/// admissible maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct PropLattice {
    pub sigma_fractions: Vec<f64>,
    pub l: Vec<f64>,
    pub k: Vec<f64>,
}

impl Default for PropLattice {
    fn default() -> Self {
        Self {
            sigma_fractions: vec![1.0, 0.5, 0.25],
            l: vec![25.0, 50.0, 100.0, 200.0, 400.0, 800.0],
            k: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        }
    }
}

/// Outcome of the residual sign search.
#[derive(Debug, Clone, PartialEq)]
pub struct PropResidualReport {
    pub eps: f64,
    pub d0: f64,
    /// `D` of the admissibility condition on `σ`.
    pub d_const: f64,
    pub sigma_max: f64,
    pub witness: Option<PropComparators>,
    /// Lattice point with the smallest violation when there is no witness.
    pub best: Option<PropComparators>,
    pub min_plus: f64,
    pub max_minus: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub saturated: usize,
}

impl PropResidualReport {
    pub fn passed(&self) -> bool {
        self.witness.is_some()
    }
}

/// The drifted one-dimensional front of a scenario in the propagation
/// clock, from `0` to `T - t^ε`.
pub fn front_table_1d(scenario: &Scenario, c_star: f64) -> Result<FrontTable1d> {
    if scenario.params.domain.dim != 1 {
        return Err(Error::InvalidParameter(
            "the tabulated front is one-dimensional".into(),
        ));
    }
    let params = scenario.params;
    let flow = scenario.flow()?;
    let gamma = crate::flow::drift_interface(&scenario.gamma0(), &flow, &params)?;
    let horizon = (params.t_final - params.generation_time()).max(0.0);
    let grid = scenario.build_grid()?;
    FrontTable1d::new(
        gamma.points[0][0],
        gamma.points[1][0],
        c_star,
        &scenario.chemo,
        horizon,
        scenario.dt_flow,
        scenario.d0(&grid),
    )
}

/// Searches the lattice for `(σ, L, K)` with `L^ε[u^-] ≤ tol` where
/// `u^- > 0` and `L^ε[u^+] ≥ -tol`, on `n` random samples near the
/// one-dimensional drifted front over `[0, T - t^ε]`.
pub fn check_propagation_residuals(
    scenario: &Scenario,
    wave: &WaveProfile,
    lattice: &PropLattice,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<PropResidualReport> {
    let params = scenario.params;
    let eps = params.epsilon;
    let front = front_table_1d(scenario, wave.c_star)?;
    let d0 = front.d0;
    let d_const = d_constant_1d(d0);
    let s_max = sigma_max(wave.c_star, params.m, d_const, params.eta);
    let dom = params.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_end = front.t_end();
    let samples: Vec<(f64, Point)> = (0..n)
        .map(|_| {
            let t = rng.gen_range(2.0 * FD_STEP..t_end.max(4.0 * FD_STEP));
            let (a, b) = front.endpoints(t);
            let lo = (a - 3.0 * d0).max(dom.lower[0] + FD_STEP);
            let hi = (b + 3.0 * d0).min(dom.upper[0] - FD_STEP);
            (t, [rng.gen_range(lo..hi), 0.0])
        })
        .collect();
    let mut report = PropResidualReport {
        eps,
        d0,
        d_const,
        sigma_max: s_max,
        witness: None,
        best: None,
        min_plus: f64::NAN,
        max_minus: f64::NAN,
        evaluated: 0,
        skipped: 0,
        saturated: 0,
    };
    let mut best_violation = f64::INFINITY;
    for &frac in &lattice.sigma_fractions {
        for &l in &lattice.l {
            for &k in &lattice.k {
                let pc = PropComparators {
                    sigma: frac * s_max,
                    k,
                    l,
                };
                pc.validate(wave.c_star, params.m, d_const, params.eta)?;
                let make = |sign| PropComparator {
                    pc,
                    sign,
                    eps,
                    wave,
                    front: &front,
                };
                let (plus, minus) = (make(Sign::Plus), make(Sign::Minus));
                let res: Vec<Option<(Option<f64>, Option<f64>)>> = samples
                    .par_iter()
                    .map(|&(t, x)| {
                        if pc.saturated(t + 2.0 * FD_STEP) {
                            return None;
                        }
                        let rp = residual_pde(&plus, &params, &scenario.chemo, t, x);
                        let rm = if minus.value(t, x) > 0.0 {
                            residual_pde(&minus, &params, &scenario.chemo, t, x)
                        } else {
                            Some(0.0)
                        };
                        Some((rp, rm))
                    })
                    .collect();
                let mut min_plus = f64::INFINITY;
                let mut max_minus = f64::NEG_INFINITY;
                let (mut evaluated, mut skipped, mut saturated) = (0, 0, 0);
                for r in res {
                    match r {
                        None => saturated += 1,
                        Some((rp, rm)) => {
                            for (v, plus_side) in [(rp, true), (rm, false)] {
                                match v {
                                    Some(v) if plus_side => {
                                        min_plus = min_plus.min(v);
                                        evaluated += 1;
                                    }
                                    Some(v) => {
                                        max_minus = max_minus.max(v);
                                        evaluated += 1;
                                    }
                                    None => skipped += 1,
                                }
                            }
                        }
                    }
                }
                let violation = (-tol - min_plus).max(max_minus - tol);
                if violation < best_violation {
                    best_violation = violation;
                    report.best = Some(pc);
                    report.min_plus = min_plus;
                    report.max_minus = max_minus;
                    report.evaluated = evaluated;
                    report.skipped = skipped;
                    report.saturated = saturated;
                }
                if violation <= 0.0 {
                    report.witness = Some(pc);
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// `u^±(t, ·)` sampled on the grid of `d`.
fn comparator_on_grid(pc: &PropComparators, sign: Sign, eps: f64, wave: &WaveProfile, t: f64, d: &ScalarField) -> Vec<f64> {
    d.values
        .par_iter()
        .map(|&dv| pc.value(sign, eps, wave, t, dv).0)
        .collect()
}

/// Outcome of the ordering check at the generation time.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub eps: f64,
    /// Smallest ladder value of `K` for which the ordering holds.
    pub k: Option<f64>,
    pub below: f64,
    pub above: f64,
    /// Worst offending cell center at the last rung tried.
    pub location: Point,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.k.is_some()
    }
}

/// Checks `u^-(0, ·) ≤ u^ε(t^ε, ·) ≤ u^+(0, ·)` on the grid of `snapshot`,
/// raising `K` along `k_ladder`; `front` runs in the propagation clock.
pub fn check_ordering(
    snapshot: &PdeState,
    front: &FrontTrajectory,
    wave: &WaveProfile,
    pc: &PropComparators,
    d0: f64,
    k_ladder: &[f64],
) -> Result<OrderingReport> {
    let eps = snapshot.params.epsilon;
    let grid = snapshot.u.grid;
    let cut = cutoff_distance(front, front.times[0], grid, d0)?;
    let t0 = 0.0;
    let mut report = OrderingReport {
        eps,
        k: None,
        below: f64::NAN,
        above: f64::NAN,
        location: [f64::NAN; 2],
    };
    for &k in k_ladder {
        let pk = PropComparators { k, ..*pc };
        let lower = comparator_on_grid(&pk, Sign::Minus, eps, wave, t0, &cut.d);
        let upper = comparator_on_grid(&pk, Sign::Plus, eps, wave, t0, &cut.d);
        let ((below, ib), (above, ia)) = sandwich_violation(&grid, &snapshot.u.values, &lower, &upper);
        report.below = below;
        report.above = above;
        let worst = if below >= above { ib } else { ia };
        report.location = grid.center(worst % grid.nx, worst / grid.nx);
        if below <= SANDWICH_VALUE_TOL && above <= SANDWICH_VALUE_TOL {
            report.k = Some(k);
            break;
        }
    }
    Ok(report)
}

/// Checks `u^-(t, ·) ≤ u^ε(t + t^ε, ·) ≤ u^+(t, ·)` for each snapshot, where
/// `t` is the snapshot time minus `t^ε`.
pub fn check_propagation_sandwich(
    snapshots: &[PdeState],
    front: &FrontTrajectory,
    wave: &WaveProfile,
    pc: &PropComparators,
    d0: f64,
) -> Result<Vec<SandwichRecord>> {
    let mut out = Vec::new();
    for s in snapshots {
        let eps = s.params.epsilon;
        let t = s.t - s.params.generation_time();
        if t < -1e-12 {
            continue;
        }
        let t = t.max(0.0);
        if pc.saturated(t) {
            continue;
        }
        let cut = cutoff_distance(front, t, s.u.grid, d0)?;
        let lower = comparator_on_grid(pc, Sign::Minus, eps, wave, t, &cut.d);
        let upper = comparator_on_grid(pc, Sign::Plus, eps, wave, t, &cut.d);
        let ((below, _), (above, _)) = sandwich_violation(&s.u.grid, &s.u.values, &lower, &upper);
        out.push(SandwichRecord {
            t: s.t,
            below: below - SANDWICH_VALUE_TOL,
            above: above - SANDWICH_VALUE_TOL,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Domain, Grid, Params};
    use crate::traveling_wave::compute_wave;

    #[test]
    fn sigma_bound() {
        let s = sigma_max(1.0, 2.0, 10.0, 0.1);
        assert!((s - 0.005).abs() < 1e-12);
        assert_eq!(sigma_max(1.0, 2.0, 0.1, 0.1), 0.05);
        let s3 = sigma_max(1.0, 3.0, 5.0, 0.4);
        assert!((2.0 * 25.0 * (1.0 + 2.0 * s3) * s3 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn d_constant_matches_curvature_peak() {
        let d = d_constant_1d(0.25);
        assert!((d - (1.0 + 3.9402 / 0.25)).abs() < 1e-2, "{d}");
    }

    #[test]
    fn front_table_without_drift() {
        let f = FrontTable1d::new(0.4, 0.6, 1.0, &ChemoFieldSpec::zero(1), 0.3, 1e-3, 0.1).unwrap();
        let (a, b) = f.endpoints(0.1234);
        assert!((a - 0.2766).abs() < 1e-12 && (b - 0.7234).abs() < 1e-12);
        let (d, left) = f.cutoff(0.1, 0.3);
        assert!(d.abs() < 1e-12 && left);
        assert!((f.cutoff(0.1, 0.2).0 - 0.1).abs() < 1e-12);
        assert_eq!(f.cutoff(0.1, 0.5).0, -0.2);
    }

    #[test]
    fn ordering_bracket_widens_with_k() {
        let wave = compute_wave(2.0, 1e-8).unwrap();
        let g = Grid::new(&Domain::interval(0.0, 1.0).unwrap(), &[400]).unwrap();
        let d = ScalarField::from_fn(g, Boundary::NoFlux, |x| zeta((x[0] - 0.5).abs() - 0.2, 0.1));
        let eps = 0.02;
        let small = PropComparators { sigma: 0.01, k: 1.0, l: 10.0 };
        let big = PropComparators { k: 2.0, ..small };
        for t in [0.0, 0.01, 0.05] {
            let lo1 = comparator_on_grid(&small, Sign::Minus, eps, &wave, t, &d);
            let hi1 = comparator_on_grid(&small, Sign::Plus, eps, &wave, t, &d);
            let lo2 = comparator_on_grid(&big, Sign::Minus, eps, &wave, t, &d);
            let hi2 = comparator_on_grid(&big, Sign::Plus, eps, &wave, t, &d);
            for k in 0..lo1.len() {
                assert!(lo1[k] <= hi1[k]);
                assert!(lo2[k] <= lo1[k] && hi1[k] <= hi2[k]);
            }
        }
    }

    #[test]
    fn deep_interior_residual_is_positive() {
        let wave = compute_wave(2.0, 1e-8).unwrap();
        let eps = 0.02;
        let params = Params::new(eps, 2.0, 0.4, 0.1, Domain::interval(0.0, 3.0).unwrap(), 0.1).unwrap();
        let chemo = ChemoFieldSpec::zero(1);
        let front = FrontTable1d::new(0.75, 2.25, 1.0, &chemo, 0.3, 1e-3, 0.25).unwrap();
        let pc = PropComparators { sigma: 0.001, k: 1.0, l: 100.0 };
        let plus = PropComparator { pc, sign: Sign::Plus, eps, wave: &wave, front: &front };
        let r = residual_pde(&plus, &params, &chemo, 0.01, [1.4, 0.0]).unwrap();
        assert!(r > 0.0, "{r}");
        // Far outside the support the super-solution vanishes identically.
        let zero = residual_pde(&plus, &params, &chemo, 0.01, [0.05, 0.0]).unwrap();
        assert_eq!(zero, 0.0);
    }
}
