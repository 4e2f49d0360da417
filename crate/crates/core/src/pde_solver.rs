//! Finite-volume solver for
//! `u_t = εΔ(u^m) - ∇·(u∇v^ε) + ε⁻¹u(1-u)` with `∂(u^m)/∂ν = 0`.
//!
//! Strang splitting: exact logistic half-steps around one explicit
//! conservative transport-diffusion step (centered two-point flux on
//! `w = u^m`, donor-cell flux for `u∇v^ε`).

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::{Boundary, ChemoFieldSpec, Grid, InitialDataSpec, Params, Point, ScalarField};

/// Fraction of ε allowed as a time step.
pub const SAFETY: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct PdeState {
    pub t: f64,
    pub u: ScalarField,
    pub params: Params,
    pub chemo: ChemoFieldSpec,
    /// `false` switches the reaction off (transport-diffusion only).
    pub reaction: bool,
    /// Running upper bound carried by the scheme: the image of the constant
    /// supersolution under every step taken so far.
    pub upper_bound: f64,
    /// Largest value seen over all steps taken so far, initial datum included.
    pub max_seen: f64,
    cache: DriftCache,
}

/// Drift data that does not change between steps: the global gradient bound
/// and, for steady fields, the face values.
#[derive(Debug, Clone)]
struct DriftCache {
    grad_bound: f64,
    steady_faces: Option<Arc<FaceDrift>>,
}

impl DriftCache {
    fn new(grid: &Grid, chemo: &ChemoFieldSpec, params: &Params) -> Self {
        let eps = params.epsilon;
        let (grad_bound, _) = chemo.drift_bounds(eps, 0.0, params.t_final + SAFETY * eps);
        let steady_faces = chemo
            .is_steady()
            .then(|| Arc::new(FaceDrift::new(grid, chemo, eps, 0.0)));
        Self {
            grad_bound,
            steady_faces,
        }
    }
}

/// The individual step-size limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtBounds {
    pub diffusion: f64,
    pub advection: f64,
    pub safety: f64,
    /// `1 / (1/diffusion + 1/advection)` capped by `safety`.
    pub combined: f64,
}

#[inline]
fn logistic(u: f64, s: f64) -> f64 {
    logistic_decay(u, (-s).exp())
}

#[inline]
fn logistic_decay(u: f64, decay: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    u / (u + (1.0 - u) * decay)
}

// Below this many cells the work is not split across threads.
const PAR_MIN: usize = 1 << 14;

fn react(values: &mut [f64], decay: f64) {
    if values.len() >= PAR_MIN {
        values
            .par_iter_mut()
            .for_each(|u| *u = logistic_decay(*u, decay));
    } else {
        values.iter_mut().for_each(|u| *u = logistic_decay(*u, decay));
    }
}

#[inline]
fn pow_m(u: f64, m: f64, mi: Option<i32>) -> f64 {
    match mi {
        Some(k) => u.powi(k),
        None => u.powf(m),
    }
}

fn integer_exponent(m: f64) -> Option<i32> {
    (m.fract() == 0.0 && m <= 16.0).then_some(m as i32)
}

impl PdeState {
    pub fn new(u0: ScalarField, params: Params, chemo: ChemoFieldSpec) -> Result<Self> {
        params.validate()?;
        chemo.validate()?;
        if u0.grid.dim != params.domain.dim || chemo.dim != params.domain.dim {
            return Err(Error::InvalidParameter(
                "grid, chemo field and domain dimensions differ".into(),
            ));
        }
        if !u0.all_finite() || u0.min() < 0.0 {
            return Err(Error::InvalidParameter(
                "initial field must be finite and non-negative".into(),
            ));
        }
        let upper_bound = u0.max().max(1.0);
        let cache = DriftCache::new(&u0.grid, &chemo, &params);
        let max_seen = u0.max();
        Ok(Self {
            t: 0.0,
            u: u0,
            params,
            chemo,
            reaction: true,
            upper_bound,
            max_seen,
            cache,
        })
    }

    /// Samples the initial datum at cell centers.
    pub fn from_initial(grid: Grid, u0: &InitialDataSpec, params: Params, chemo: ChemoFieldSpec) -> Result<Self> {
        u0.validate(&params.domain, params.boundary_margin)?;
        let field = ScalarField::from_fn(grid, Boundary::NoFlux, |x| u0.eval(x));
        Self::new(field, params, chemo)
    }

    pub fn with_reaction(mut self, on: bool) -> Self {
        self.reaction = on;
        self
    }

    /// The bound `max(1, sup u₀)` stated for the continuous problem.
    pub fn literal_bound(u0_sup: f64) -> f64 {
        u0_sup.max(1.0)
    }

    pub fn dt_bounds(&self) -> DtBounds {
        let eps = self.params.epsilon;
        let g = &self.u.grid;
        let n = g.dim as f64;
        let h = g.h();
        let m = self.params.m;
        let umax = self.u.max().max(0.0);
        // The transport step sees the field after a reaction half-step.
        let ubar = if self.reaction && umax < 1.0 {
            logistic(umax, 0.5 * SAFETY)
        } else {
            umax
        };
        let dcoef = 2.0 * n * eps * m * ubar.powf(m - 1.0) / (h * h);
        let bmax = self.cache.grad_bound;
        let acoef = 2.0 * n * bmax / h;
        let inv = |c: f64| if c > 0.0 { 1.0 / c } else { f64::INFINITY };
        let safety = SAFETY * eps;
        DtBounds {
            diffusion: inv(dcoef),
            advection: inv(acoef),
            safety,
            combined: inv(dcoef + acoef).min(safety),
        }
    }

    /// Largest admissible step.
    pub fn stable_dt(&self) -> f64 {
        self.dt_bounds().combined
    }

    /// Advances by `dt`.
    pub fn step(&self, dt: f64) -> Result<PdeState> {
        let mut next = self.clone();
        next.step_mut(dt)?;
        Ok(next)
    }

    pub fn step_mut(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let b = self.dt_bounds();
        let tol = 1.0 + 1e-12;
        for (limit, name) in [
            (b.safety, "reaction safety"),
            (b.diffusion, "diffusion"),
            (b.advection, "advection"),
            (b.combined, "combined transport-diffusion"),
        ] {
            if dt > limit * tol {
                return Err(Error::Cfl {
                    dt,
                    limit,
                    bound: name,
                });
            }
        }
        let eps = self.params.epsilon;
        let s = 0.5 * dt / eps;
        let decay = (-s).exp();
        if self.reaction {
            react(&mut self.u.values, decay);
        }
        let fresh;
        let faces = match &self.cache.steady_faces {
            Some(f) => f.as_ref(),
            None => {
                fresh = FaceDrift::new(&self.u.grid, &self.chemo, eps, self.t + 0.5 * dt);
                &fresh
            }
        };
        let growth = 1.0 + dt * faces.compression;
        self.u.values = transport(&self.u, faces, eps, self.params.m, dt);
        if self.reaction {
            react(&mut self.u.values, decay);
        }
        self.t += dt;
        let mut k = self.upper_bound;
        if self.reaction {
            k = logistic(k, s);
        }
        k *= growth;
        if self.reaction {
            k = logistic(k, s);
        }
        self.upper_bound = k;
        self.check_bounds()
    }

    fn check_bounds(&mut self) -> Result<()> {
        let upper = self.upper_bound * (1.0 + 1e-12);
        let mut max = self.max_seen;
        for v in self.u.values.iter_mut() {
            if !v.is_finite() || *v < -1e-12 || *v > upper {
                return Err(Error::BoundViolation {
                    t: self.t,
                    value: *v,
                    upper: self.upper_bound,
                });
            }
            // Zero is a proven lower bound; only rounding can cross it.
            if *v < 0.0 {
                *v = 0.0;
            }
            max = max.max(*v);
        }
        self.max_seen = max;
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.u.mass()
    }
}

/// Normal components of `∇v^ε` on interior faces; boundary faces carry no
/// flux. `bx` has `(nx+1)·ny` entries, `by` has `nx·(ny+1)`.
#[derive(Debug)]
struct FaceDrift {
    bx: Vec<f64>,
    by: Vec<f64>,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    /// `max(-div_h b)⁺` over cells.
    compression: f64,
}

impl FaceDrift {
    fn new(grid: &Grid, chemo: &ChemoFieldSpec, eps: f64, t: f64) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let zero = chemo.is_zero();
        let face = |x: Point, d: usize| {
            if zero {
                0.0
            } else {
                chemo.eval_drift(eps, t, x).grad[d]
            }
        };
        let bx: Vec<f64> = (0..(nx + 1) * ny)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % (nx + 1), k / (nx + 1));
                if i == 0 || i == nx {
                    return 0.0;
                }
                let c = grid.center(i, j);
                face([c[0] - 0.5 * grid.dx, c[1]], 0)
            })
            .collect();
        let by: Vec<f64> = if grid.dim == 2 {
            (0..nx * (ny + 1))
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k % nx, k / nx);
                    if j == 0 || j == ny {
                        return 0.0;
                    }
                    let c = grid.center(i, j);
                    face([c[0], c[1] - 0.5 * grid.dy], 1)
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut f = Self {
            bx,
            by,
            nx,
            ny,
            dx: grid.dx,
            dy: grid.dy,
            compression: 0.0,
        };
        f.compression = f.max_compression();
        f
    }

    #[inline]
    fn x(&self, i: usize, j: usize) -> f64 {
        self.bx[j * (self.nx + 1) + i]
    }

    #[inline]
    fn y(&self, i: usize, j: usize) -> f64 {
        self.by[j * self.nx + i]
    }

    /// `max(-div_h b)⁺` over cells.
    fn max_compression(&self) -> f64 {
        let mut d = 0.0f64;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let mut div = (self.x(i + 1, j) - self.x(i, j)) / self.dx;
                if !self.by.is_empty() {
                    div += (self.y(i, j + 1) - self.y(i, j)) / self.dy;
                }
                d = d.max(-div);
            }
        }
        d
    }
}

#[inline]
fn face_flux(ul: f64, ur: f64, wl: f64, wr: f64, b: f64, eps: f64, h: f64) -> f64 {
    -eps * (wr - wl) / h + b.max(0.0) * ul - (-b).max(0.0) * ur
}

fn transport(u: &ScalarField, faces: &FaceDrift, eps: f64, m: f64, dt: f64) -> Vec<f64> {
    let g = &u.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mi = integer_exponent(m);
    let w: Vec<f64> = u.values.iter().map(|&x| pow_m(x, m, mi)).collect();
    let free = u.bc == Boundary::FreeSpace;
    let vals = &u.values;
    let mut out = vec![0.0; vals.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for i in 0..nx {
            let k = j * nx + i;
            // x faces
            let fl = if i > 0 {
                face_flux(vals[k - 1], vals[k], w[k - 1], w[k], faces.x(i, j), eps, g.dx)
            } else if free {
                face_flux(0.0, vals[k], 0.0, w[k], 0.0, eps, g.dx)
            } else {
                0.0
            };
            let fr = if i + 1 < nx {
                face_flux(vals[k], vals[k + 1], w[k], w[k + 1], faces.x(i + 1, j), eps, g.dx)
            } else if free {
                face_flux(vals[k], 0.0, w[k], 0.0, 0.0, eps, g.dx)
            } else {
                0.0
            };
            let mut du = -(fr - fl) / g.dx;
            if g.dim == 2 {
                let fb = if j > 0 {
                    face_flux(vals[k - nx], vals[k], w[k - nx], w[k], faces.y(i, j), eps, g.dy)
                } else if free {
                    face_flux(0.0, vals[k], 0.0, w[k], 0.0, eps, g.dy)
                } else {
                    0.0
                };
                let ft = if j + 1 < ny {
                    face_flux(vals[k], vals[k + nx], w[k], w[k + nx], faces.y(i, j + 1), eps, g.dy)
                } else if free {
                    face_flux(vals[k], 0.0, w[k], 0.0, 0.0, eps, g.dy)
                } else {
                    0.0
                };
                du -= (ft - fb) / g.dy;
            }
            row[i] = vals[k] + dt * du;
        }
    });
    out
}

/// Largest admissible step for a state.
pub fn stable_dt(state: &PdeState) -> f64 {
    state.stable_dt()
}

/// One Strang step.
pub fn step(state: &PdeState, dt: f64) -> Result<PdeState> {
    state.step(dt)
}

/// Integrates to `params.t_final`, recording snapshots at `0`, at the
/// generation time `ε|ln ε|` (when inside the horizon), at every requested
/// time and at the final time.
pub fn simulate(state0: &PdeState, output_times: &[f64]) -> Result<Vec<PdeState>> {
    let t_final = state0.params.t_final;
    let mut times: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > state0.t && t <= t_final)
        .collect();
    let t_gen = state0.params.generation_time();
    if t_gen > state0.t && t_gen <= t_final {
        times.push(t_gen);
    }
    if t_final > state0.t {
        times.push(t_final);
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    let mut snaps = vec![state0.clone()];
    let mut state = state0.clone();
    for target in times {
        advance_to(&mut state, target)?;
        snaps.push(state.clone());
    }
    Ok(snaps)
}

/// Steps `state` until `state.t == target` with `dt = stable_dt`.
pub fn advance_to(state: &mut PdeState, target: f64) -> Result<()> {
    while state.t < target {
        let remaining = target - state.t;
        let dt = state.stable_dt();
        if remaining <= dt * (1.0 + 1e-9) {
            state.step_mut(remaining.min(dt))?;
            state.t = target;
        } else {
            state.step_mut(dt)?;
        }
    }
    Ok(())
}

/// Points where linear interpolation between neighboring cell centers
/// crosses level `a`.
pub fn extract_level_set(field: &ScalarField, a: f64) -> Vec<Point> {
    let g = &field.grid;
    let mut pts = Vec::new();
    let edge = |pts: &mut Vec<Point>, pa: Point, pb: Point, fa: f64, fb: f64| {
        if fa == a {
            pts.push(pa);
        } else if (fa - a) * (fb - a) < 0.0 {
            let w = (a - fa) / (fb - fa);
            pts.push([pa[0] + w * (pb[0] - pa[0]), pa[1] + w * (pb[1] - pa[1])]);
        }
    };
    for j in 0..g.ny {
        for i in 0..g.nx {
            let f = field.at(i, j);
            let p = g.center(i, j);
            if i + 1 < g.nx {
                edge(&mut pts, p, g.center(i + 1, j), f, field.at(i + 1, j));
            } else if f == a {
                pts.push(p);
            }
            if g.dim == 2 && j + 1 < g.ny {
                edge(&mut pts, p, g.center(i, j + 1), f, field.at(i, j + 1));
            }
        }
    }
    if g.dim == 2 {
        pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
        pts.dedup();
    }
    pts
}

/// Width of the transition layer: the symmetric maximal distance between the
/// `η` and `1 - η` level sets.
pub fn layer_thickness(field: &ScalarField, eta: f64) -> Result<f64> {
    let inner = extract_level_set(field, 1.0 - eta);
    let outer = extract_level_set(field, eta);
    if inner.is_empty() {
        return Err(Error::NoLayer { level: 1.0 - eta });
    }
    if outer.is_empty() {
        return Err(Error::NoLayer { level: eta });
    }
    if field.grid.dim == 1 {
        if inner.len() != outer.len() {
            return Err(Error::Domain(format!(
                "level sets {} and {} cross the grid {} and {} times; no single transition",
                eta,
                1.0 - eta,
                outer.len(),
                inner.len()
            )));
        }
        return Ok(geometry::hausdorff_points(&inner, &outer));
    }
    let seg_in = geometry::contour_segments(field, 1.0 - eta);
    let seg_out = geometry::contour_segments(field, eta);
    let a = inner
        .iter()
        .map(|p| geometry::segments_distance(*p, &seg_out))
        .fold(0.0f64, f64::max);
    let b = outer
        .iter()
        .map(|p| geometry::segments_distance(*p, &seg_in))
        .fold(0.0f64, f64::max);
    Ok(a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChemoTerm, Domain, Envelope};
    use crate::traveling_wave::explicit_m2;

    fn params_1d(eps: f64) -> Params {
        Params::new(eps, 2.0, 1.0, 0.1, Domain::interval(0.0, 1.0).unwrap(), 0.05).unwrap()
    }

    fn grid_1d(n: usize) -> Grid {
        Grid::new(&Domain::interval(0.0, 1.0).unwrap(), &[n]).unwrap()
    }

    #[test]
    fn stable_dt_formula() {
        let g = grid_1d(200);
        let u = ScalarField::constant(g, Boundary::NoFlux, 1.0);
        let s = PdeState::new(u, params_1d(0.02), ChemoFieldSpec::zero(1)).unwrap();
        assert!((s.stable_dt() - 3.125e-4).abs() < 1e-15);
        let z = ScalarField::constant(g, Boundary::NoFlux, 0.0);
        let s = PdeState::new(z, params_1d(0.02), ChemoFieldSpec::zero(1)).unwrap();
        assert_eq!(s.stable_dt(), 0.01);
    }

    #[test]
    fn equilibria_are_preserved() {
        let g = grid_1d(50);
        for c in [0.0, 1.0] {
            let u = ScalarField::constant(g, Boundary::NoFlux, c);
            let s = PdeState::new(u, params_1d(0.05), ChemoFieldSpec::zero(1)).unwrap();
            let dt = s.stable_dt();
            let n = s.step(dt).unwrap();
            assert!(n.u.values.iter().all(|&v| v == c));
        }
    }

    #[test]
    fn rejects_oversized_step() {
        let g = grid_1d(200);
        let u = ScalarField::constant(g, Boundary::NoFlux, 1.0);
        let s = PdeState::new(u, params_1d(0.02), ChemoFieldSpec::zero(1)).unwrap();
        let err = s.step(1e-3).unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }), "{err}");
    }

    #[test]
    fn mass_conserved_without_reaction() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let g = Grid::new(&d, &[32, 32]).unwrap();
        let u = ScalarField::from_fn(g, Boundary::NoFlux, |x| {
            (1.0 - 10.0 * ((x[0] - 0.4).powi(2) + (x[1] - 0.5).powi(2))).max(0.0)
        });
        let chemo = ChemoFieldSpec::new(
            2,
            [0.5, 0.5],
            2.0,
            vec![ChemoTerm {
                amplitude: 0.2,
                center: [0.55, 0.5],
                width: 0.3,
                envelope: Envelope::Constant,
            }],
            vec![],
        )
        .unwrap();
        let p = Params::new(0.05, 2.0, 1.0, 0.1, d, 0.0).unwrap();
        let mut s = PdeState::new(u, p, chemo).unwrap().with_reaction(false);
        let m0 = s.mass();
        for _ in 0..100 {
            let dt = s.stable_dt();
            let before = s.mass();
            s.step_mut(dt).unwrap();
            assert!((s.mass() - before).abs() <= 1e-12 * m0.max(1.0));
        }
    }

    #[test]
    fn ramp_level_set() {
        let g = grid_1d(10);
        let f = ScalarField::from_fn(g, Boundary::NoFlux, |x| x[0]);
        let pts = extract_level_set(&f, 0.5);
        assert_eq!(pts.len(), 1);
        assert!((pts[0][0] - 0.5).abs() < 1e-14);
        let c = ScalarField::constant(g, Boundary::NoFlux, 0.3);
        assert!(extract_level_set(&c, 0.5).is_empty());
    }

    #[test]
    fn analytic_layer_position_and_width() {
        let eps = 0.02;
        let n = 2000;
        let h = 1.0 / n as f64;
        let x0 = 0.6;
        let f = ScalarField::from_fn(grid_1d(n), Boundary::NoFlux, |x| explicit_m2((x[0] - x0) / eps).u);
        let pts = extract_level_set(&f, 0.5);
        assert_eq!(pts.len(), 1);
        assert!((pts[0][0] - (x0 + eps * 2.0 * 0.5f64.ln())).abs() <= h);
        let w = layer_thickness(&f, 0.1).unwrap();
        assert!((w - 2.0 * eps * 9f64.ln()).abs() <= 2.0 * h);
    }

    #[test]
    fn sharp_step_thickness() {
        let g = grid_1d(100);
        let f = ScalarField::from_fn(g, Boundary::NoFlux, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        assert!(layer_thickness(&f, 0.1).unwrap() <= 2.0 * g.dx);
        let c = ScalarField::constant(g, Boundary::NoFlux, 0.0);
        assert!(matches!(layer_thickness(&c, 0.1), Err(Error::NoLayer { .. })));
    }

    #[test]
    fn zero_horizon_gives_initial_snapshot() {
        let g = grid_1d(50);
        let u = ScalarField::from_fn(g, Boundary::NoFlux, |x| (0.3 - (x[0] - 0.5).abs()).max(0.0));
        let mut p = params_1d(0.05);
        p.t_final = 0.0;
        let s = PdeState::new(u, p, ChemoFieldSpec::zero(1)).unwrap();
        let snaps = simulate(&s, &[]).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].u, s.u);
    }
}
