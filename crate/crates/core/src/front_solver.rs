//! The limit free boundary `V_n = c* + ∂v/∂n`, solved by marker tracking and
//! by a first-order level-set scheme, and the cut-off signed distance `d^ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::Interface;
use crate::geometry;
use crate::model::{Boundary, ChemoFieldSpec, Grid, Point, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrontMethod {
    #[default]
    Markers,
    Levelset,
}

impl std::str::FromStr for FrontMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markers" => Ok(FrontMethod::Markers),
            "levelset" => Ok(FrontMethod::Levelset),
            other => Err(Error::Config(format!("unknown front method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrajectory {
    pub method: FrontMethod,
    pub times: Vec<f64>,
    pub interfaces: Vec<Interface>,
    /// Level-set fields at the snapshot times (level-set method only).
    pub phi: Vec<ScalarField>,
}

impl FrontTrajectory {
    pub fn last(&self) -> &Interface {
        self.interfaces.last().expect("trajectory has at least one snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one snapshot")
    }

    /// Interface at time `t`: linear interpolation between the bracketing
    /// snapshots when they carry the same marker count, otherwise the
    /// nearest snapshot.
    pub fn at(&self, t: f64) -> Result<Interface> {
        let (t0, t1) = (self.times[0], self.final_time());
        let tol = 1e-9 * t1.abs().max(1.0);
        if t < t0 - tol || t > t1 + tol {
            return Err(Error::Domain(format!(
                "time {t} outside the trajectory range [{t0}, {t1}]"
            )));
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Ok(self.interfaces[0].clone());
        }
        if k == self.times.len() {
            return Ok(self.last().clone());
        }
        let (a, b) = (&self.interfaces[k - 1], &self.interfaces[k]);
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        if (t - ta).abs() <= tol {
            return Ok(a.clone());
        }
        if a.len() != b.len() {
            return Ok(if t - ta < tb - t { a.clone() } else { b.clone() });
        }
        let w = (t - ta) / (tb - ta);
        let points = a
            .points
            .iter()
            .zip(&b.points)
            .map(|(p, q)| [p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])])
            .collect();
        Ok(Interface { dim: a.dim, points })
    }

    /// Rows `(t, marker_index, x, y)`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "marker_index", "x", "y"])?;
        for (t, gamma) in self.times.iter().zip(&self.interfaces) {
            for (k, p) in gamma.points.iter().enumerate() {
                w.write_record(&[t.to_string(), k.to_string(), p[0].to_string(), p[1].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Normal velocity field `(c* + ∇v·n) n` at the markers.
fn marker_velocity(gamma: &Interface, c_star: f64, chemo: &ChemoFieldSpec, t: f64) -> Vec<Point> {
    let normals = gamma.normals();
    gamma
        .points
        .par_iter()
        .zip(normals.par_iter())
        .map(|(p, n)| {
            let g = chemo.eval(t, *p).grad;
            let vn = c_star + g[0] * n[0] + g[1] * n[1];
            [vn * n[0], vn * n[1]]
        })
        .collect()
}

fn shifted(gamma: &Interface, k: &[Point], h: f64) -> Interface {
    Interface {
        dim: gamma.dim,
        points: gamma
            .points
            .iter()
            .zip(k)
            .map(|(p, v)| [p[0] + h * v[0], p[1] + h * v[1]])
            .collect(),
    }
}

fn min_spacing(gamma: &Interface) -> f64 {
    if gamma.dim == 1 {
        return f64::INFINITY;
    }
    let n = gamma.len();
    (0..n)
        .map(|k| {
            let (a, b) = (gamma.points[k], gamma.points[(k + 1) % n]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Moves each marker with `(c* + ∇v·n) n` by classical RK4, normals
/// recomputed at every stage, followed by arc-length redistribution.
pub fn track_front_markers(
    gamma_init: &Interface,
    c_star: f64,
    chemo: &ChemoFieldSpec,
    t_final: f64,
    dt: f64,
) -> Result<FrontTrajectory> {
    track_front_markers_from(gamma_init, c_star, chemo, 0.0, t_final, dt)
}

/// Same as [`track_front_markers`] starting at time `t0`.
pub fn track_front_markers_from(
    gamma_init: &Interface,
    c_star: f64,
    chemo: &ChemoFieldSpec,
    t0: f64,
    t_final: f64,
    dt: f64,
) -> Result<FrontTrajectory> {
    if !(dt > 0.0) || !(t_final >= t0) {
        return Err(Error::InvalidParameter("marker step and horizon must be positive".into()));
    }
    if !gamma_init.is_simple() {
        return Err(Error::SelfIntersection { t: t0 });
    }
    let (gmax, _) = chemo.drift_bounds(0.0, t0, t_final);
    let limit = min_spacing(gamma_init) / (2.0 * (c_star + gmax));
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl {
            dt,
            limit,
            bound: "marker",
        });
    }
    let n_steps = ((t_final - t0) / dt).round().max(0.0) as usize;
    let n_steps = if t0 + n_steps as f64 * dt < t_final - 1e-12 {
        n_steps + 1
    } else {
        n_steps
    };
    let mut gamma = gamma_init.clone();
    let mut times = vec![t0];
    let mut interfaces = vec![gamma.clone()];
    let mut t = t0;
    for _ in 0..n_steps {
        let h = dt.min(t_final - t);
        if h <= 0.0 {
            break;
        }
        let k1 = marker_velocity(&gamma, c_star, chemo, t);
        let k2 = marker_velocity(&shifted(&gamma, &k1, 0.5 * h), c_star, chemo, t + 0.5 * h);
        let k3 = marker_velocity(&shifted(&gamma, &k2, 0.5 * h), c_star, chemo, t + 0.5 * h);
        let k4 = marker_velocity(&shifted(&gamma, &k3, h), c_star, chemo, t + h);
        for (i, p) in gamma.points.iter_mut().enumerate() {
            for d in 0..2 {
                p[d] += h / 6.0 * (k1[i][d] + 2.0 * k2[i][d] + 2.0 * k3[i][d] + k4[i][d]);
            }
        }
        t += h;
        if gamma.dim == 2 {
            if geometry::self_intersects(&gamma.points) {
                return Err(Error::SelfIntersection { t });
            }
            gamma.points = geometry::resample_closed_smooth(&gamma.points, gamma.points.len());
        } else if !(gamma.points[0][0] < gamma.points[1][0]) {
            return Err(Error::SelfIntersection { t });
        }
        times.push(t);
        interfaces.push(gamma.clone());
    }
    Ok(FrontTrajectory {
        method: FrontMethod::Markers,
        times,
        interfaces,
        phi: Vec::new(),
    })
}

/// Options of the level-set evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetOptions {
    /// Redistancing period in steps.
    pub reinit_every: usize,
    /// Snapshot times besides 0 and the final time.
    pub snapshots: Vec<f64>,
    /// Fraction of the CFL limit used as the step.
    pub cfl: f64,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        Self {
            reinit_every: 20,
            snapshots: Vec::new(),
            cfl: 1.0,
        }
    }
}

/// Signed distance to a closed interface sampled on a grid (negative
/// inside).
pub fn signed_distance_field(gamma: &Interface, grid: Grid) -> ScalarField {
    let centers: Vec<Point> = grid.centers().collect();
    let values = centers.par_iter().map(|&x| gamma.signed_distance(x)).collect();
    ScalarField {
        grid,
        values,
        bc: Boundary::NoFlux,
    }
}

/// Exact redistancing from the zero contour, keeping the sign of `phi`.
pub fn redistance(phi: &ScalarField) -> ScalarField {
    let g = phi.grid;
    if g.dim == 1 {
        let pts = crate::pde_solver::extract_level_set(phi, 0.0);
        let values = g
            .centers()
            .zip(&phi.values)
            .map(|(x, &f)| {
                let d = pts.iter().map(|p| (p[0] - x[0]).abs()).fold(f64::INFINITY, f64::min);
                if f < 0.0 {
                    -d
                } else {
                    d
                }
            })
            .collect();
        return ScalarField { values, ..phi.clone() };
    }
    let segs = geometry::contour_segments(phi, 0.0);
    let centers: Vec<Point> = g.centers().collect();
    let values = centers
        .par_iter()
        .zip(phi.values.par_iter())
        .map(|(&x, &f)| {
            let d = geometry::segments_distance(x, &segs);
            if f < 0.0 {
                -d
            } else {
                d
            }
        })
        .collect();
    ScalarField { values, ..phi.clone() }
}

/// Level-set step limit `0.5 h / (2c* + 2‖∇v‖)`.
pub fn levelset_dt_limit(grid: &Grid, c_star: f64, grad_bound: f64) -> f64 {
    0.5 * grid.h() / (2.0 * c_star + 2.0 * grad_bound)
}

/// One explicit step of `φ_t + c*|∇φ| + ∇v·∇φ = 0`: Godunov (Rouy-Tourin)
/// upwinding for the eikonal part, donor-cell for the advection.
pub fn levelset_step(phi: &ScalarField, c_star: f64, chemo: &ChemoFieldSpec, t: f64, dt: f64) -> ScalarField {
    let g = phi.grid;
    let (nx, ny) = (g.nx, g.ny);
    let f = &phi.values;
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, nx as isize - 1) as usize;
        let j = j.clamp(0, ny as isize - 1) as usize;
        f[j * nx + i]
    };
    let mut out = vec![0.0; f.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for i in 0..nx {
            let (ii, jj) = (i as isize, j as isize);
            let c = at(ii, jj);
            let dxm = (c - at(ii - 1, jj)) / g.dx;
            let dxp = (at(ii + 1, jj) - c) / g.dx;
            let mut grad2 = dxm.max(-dxp).max(0.0).powi(2);
            let b = chemo.eval(t, g.center(i, j)).grad;
            let mut adv = b[0].max(0.0) * dxm + b[0].min(0.0) * dxp;
            if g.dim == 2 {
                let dym = (c - at(ii, jj - 1)) / g.dy;
                let dyp = (at(ii, jj + 1) - c) / g.dy;
                grad2 += dym.max(-dyp).max(0.0).powi(2);
                adv += b[1].max(0.0) * dym + b[1].min(0.0) * dyp;
            }
            row[i] = c - dt * (c_star * grad2.sqrt() + adv);
        }
    });
    ScalarField { values: out, ..phi.clone() }
}

fn zero_interface(phi: &ScalarField, t: f64) -> Result<Interface> {
    let g = phi.grid;
    if g.dim == 1 {
        let pts = crate::pde_solver::extract_level_set(phi, 0.0);
        if pts.len() != 2 {
            return Err(Error::Domain(format!(
                "zero level set has {} points at t = {t}, expected 2",
                pts.len()
            )));
        }
        return Ok(Interface {
            dim: 1,
            points: pts,
        });
    }
    let mut loops = geometry::contour_loops(phi, 0.0);
    if loops.is_empty() {
        return Err(Error::NoLayer { level: 0.0 });
    }
    let mut pts = loops.swap_remove(0);
    if geometry::signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    Ok(Interface { dim: 2, points: pts })
}

/// Level-set evolution of `phi0` to `t_final`.
pub fn evolve_levelset(
    phi0: &ScalarField,
    c_star: f64,
    chemo: &ChemoFieldSpec,
    t_final: f64,
    opts: &LevelSetOptions,
) -> Result<FrontTrajectory> {
    evolve_levelset_from(phi0, c_star, chemo, 0.0, t_final, opts)
}

/// Same as [`evolve_levelset`] starting at time `t0`.
pub fn evolve_levelset_from(
    phi0: &ScalarField,
    c_star: f64,
    chemo: &ChemoFieldSpec,
    t0: f64,
    t_final: f64,
    opts: &LevelSetOptions,
) -> Result<FrontTrajectory> {
    let (gmax, _) = chemo.drift_bounds(0.0, t0, t_final);
    let limit = levelset_dt_limit(&phi0.grid, c_star, gmax);
    if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(Error::Cfl {
            dt: opts.cfl * limit,
            limit,
            bound: "level-set",
        });
    }
    let dt = opts.cfl * limit;
    let mut targets: Vec<f64> = opts
        .snapshots
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < t_final)
        .collect();
    targets.push(t_final);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut phi = phi0.clone();
    let mut t = t0;
    let mut times = vec![t0];
    let mut interfaces = vec![zero_interface(&phi, t0)?];
    let mut fields = vec![phi.clone()];
    let mut since_reinit = 0;
    for target in targets {
        while t < target - 1e-14 {
            let h = dt.min(target - t);
            phi = levelset_step(&phi, c_star, chemo, t, h);
            t += h;
            since_reinit += 1;
            if since_reinit >= opts.reinit_every.max(1) {
                phi = redistance(&phi);
                since_reinit = 0;
            }
        }
        t = target;
        times.push(t);
        interfaces.push(zero_interface(&phi, t)?);
        fields.push(phi.clone());
    }
    Ok(FrontTrajectory {
        method: FrontMethod::Levelset,
        times,
        interfaces,
        phi: fields,
    })
}

/// The clamp `ζ`: identity on `[-d0, d0]`, constant `±2d0` beyond `±2d0`,
/// joined by the quintic `d0 + d0·h(τ)`, `h = τ + 4τ³ - 7τ⁴ + 3τ⁵`, which is
/// monotone and matches value, slope and curvature at both ends.
pub fn zeta(s: f64, d0: f64) -> f64 {
    let a = s.abs();
    let v = if a <= d0 {
        a
    } else if a >= 2.0 * d0 {
        2.0 * d0
    } else {
        let tau = (a - d0) / d0;
        let t2 = tau * tau;
        d0 + d0 * (tau + 4.0 * tau * t2 - 7.0 * t2 * t2 + 3.0 * t2 * t2 * tau)
    };
    v.copysign(s)
}

/// `ζ'(s)`.
pub fn zeta_prime(s: f64, d0: f64) -> f64 {
    let a = s.abs();
    if a <= d0 {
        1.0
    } else if a >= 2.0 * d0 {
        0.0
    } else {
        let tau = (a - d0) / d0;
        (1.0 - tau).powi(2) * (1.0 + 2.0 * tau + 15.0 * tau * tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffDistance {
    pub d: ScalarField,
    pub d0: f64,
}

/// `d^ε = ζ(signed distance to Γ_t)` on the grid, negative inside.
pub fn cutoff_distance(traj: &FrontTrajectory, t: f64, grid: Grid, d0: f64) -> Result<CutoffDistance> {
    if !(d0 > 0.0) {
        return Err(Error::InvalidParameter("d0 must be positive".into()));
    }
    let gamma = traj.at(t)?;
    let mut d = signed_distance_field(&gamma, grid);
    d.values.par_iter_mut().for_each(|v| *v = zeta(*v, d0));
    Ok(CutoffDistance { d, d0 })
}

/// Default cut-off scale: a tenth of the shortest domain side.
pub fn default_d0(grid: &Grid) -> f64 {
    0.1 * grid.domain().min_side()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    #[test]
    fn zeta_properties() {
        let d0 = 0.1;
        assert_eq!(zeta(0.05, d0), 0.05);
        assert_eq!(zeta(-0.5, d0), -0.2);
        assert_eq!(zeta(0.2, d0), 0.2);
        let mut prev = -1.0;
        for k in 0..=400 {
            let s = -0.3 + 0.6 * k as f64 / 400.0;
            let z = zeta(s, d0);
            assert!(z >= prev);
            prev = z;
            let h = 1e-6;
            let fd = (zeta(s + h, d0) - zeta(s - h, d0)) / (2.0 * h);
            assert!((fd - zeta_prime(s, d0)).abs() < 1e-5);
        }
    }

    #[test]
    fn circle_markers_expand() {
        let g0 = Interface::circle([0.0, 0.0], 0.5, 512);
        let traj = track_front_markers(&g0, 1.0, &ChemoFieldSpec::zero(2), 1.0, 1e-3).unwrap();
        assert!((traj.final_time() - 1.0).abs() < 1e-12);
        for p in &traj.last().points {
            assert!((p[0].hypot(p[1]) - 1.5).abs() <= 1e-3);
        }
    }

    #[test]
    fn endpoints_move_apart() {
        let g0 = Interface::new(1, vec![[-0.3, 0.0], [0.3, 0.0]]).unwrap();
        let traj = track_front_markers(&g0, 1.0, &ChemoFieldSpec::zero(1), 0.5, 1e-3).unwrap();
        let p = &traj.last().points;
        assert!((p[0][0] + 0.8).abs() < 1e-12 && (p[1][0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn marker_step_limit() {
        let g0 = Interface::circle([0.0, 0.0], 0.5, 512);
        let err = track_front_markers(&g0, 1.0, &ChemoFieldSpec::zero(2), 1.0, 0.01).unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }));
    }

    #[test]
    fn levelset_circle() {
        let domain = Domain::rectangle([-2.0, -2.0], [2.0, 2.0]).unwrap();
        let grid = Grid::new(&domain, &[128, 128]).unwrap();
        let phi0 = signed_distance_field(&Interface::circle([0.0, 0.0], 0.5, 512), grid);
        let traj = evolve_levelset(&phi0, 1.0, &ChemoFieldSpec::zero(2), 1.0, &LevelSetOptions::default()).unwrap();
        let h = grid.h();
        for p in &traj.last().points {
            assert!((p[0].hypot(p[1]) - 1.5).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn constant_shift_commutes_with_one_step() {
        let domain = Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let grid = Grid::new(&domain, &[40, 40]).unwrap();
        let phi = signed_distance_field(&Interface::circle([0.1, 0.0], 0.4, 256), grid);
        let mut shifted = phi.clone();
        shifted.values.iter_mut().for_each(|v| *v += 0.05);
        let a = levelset_step(&phi, 1.0, &ChemoFieldSpec::zero(2), 0.0, 0.005);
        let b = levelset_step(&shifted, 1.0, &ChemoFieldSpec::zero(2), 0.0, 0.005);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x + 0.05 - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_on_circle() {
        let domain = Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let grid = Grid::new(&domain, &[64, 64]).unwrap();
        let g = Interface::circle([0.0, 0.0], 0.5, 1024);
        let traj = FrontTrajectory {
            method: FrontMethod::Markers,
            times: vec![0.0],
            interfaces: vec![g.clone()],
            phi: vec![],
        };
        let d0 = 0.1;
        let cd = cutoff_distance(&traj, 0.0, grid, d0).unwrap();
        for (x, v) in grid.centers().zip(&cd.d.values) {
            let r = x[0].hypot(x[1]);
            if r < 0.5 - 2.0 * d0 {
                assert_eq!(*v, -2.0 * d0);
            }
            if (r - 0.5).abs() < d0 {
                assert!((v - (r - 0.5)).abs() < 1e-5);
            }
        }
        assert!(g.signed_distance([0.5, 0.0]).abs() < 1e-12);
    }
}
