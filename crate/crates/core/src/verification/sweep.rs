//! ε-sweeps: layer thickness and distance of the half level set to the
//! drifted limit front, with log-log slope fits.

use std::io::Write;

use rayon::prelude::*;

use super::Scenario;
use crate::error::{Error, Result};
use crate::flow::{drift_interface, Interface};
use crate::front_solver::{track_front_markers, FrontTrajectory};
use crate::geometry;
use crate::pde_solver::{extract_level_set, layer_thickness, simulate, PdeState};
use crate::traveling_wave::WaveProfile;

/// Witness constants found by the other checks, echoed in the report.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Witnesses {
    pub m0: Option<f64>,
    pub sigma: Option<f64>,
    pub k: Option<f64>,
    pub l: Option<f64>,
}

/// One `(ε, t)` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub t: f64,
    /// `NaN` when no layer could be measured.
    pub thickness: f64,
    /// `NaN` before the generation time.
    pub hausdorff: f64,
    pub witnesses: Witnesses,
    pub pass_flags: String,
}

/// Bounds observed over a whole run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    pub eps: f64,
    /// `max(1, sup u₀)`.
    pub literal: f64,
    /// Largest value taken by the solution.
    pub max_seen: f64,
    /// Bound carried by the scheme at the final time.
    pub running: f64,
}

impl BoundRecord {
    pub fn literal_holds(&self) -> bool {
        self.max_seen <= self.literal * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    /// `(t, slope)` of log(thickness) against log(ε), per checkpoint.
    pub thickness_slopes: Vec<(f64, f64)>,
    /// `(t, slope)` of log(Hausdorff distance) against log(ε).
    pub hausdorff_slopes: Vec<(f64, f64)>,
    pub bounds: Vec<BoundRecord>,
}

impl ConvergenceReport {
    pub fn thickness_slope(&self, t: f64) -> Option<f64> {
        lookup(&self.thickness_slopes, t)
    }

    pub fn hausdorff_slope(&self, t: f64) -> Option<f64> {
        lookup(&self.hausdorff_slopes, t)
    }

    /// Rows `(eps, t, thickness, hausdorff, m0_witness, sigma, K, L,
    /// pass_flags)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "eps",
            "t",
            "thickness",
            "hausdorff",
            "m0_witness",
            "sigma",
            "K",
            "L",
            "pass_flags",
        ])?;
        let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| x.to_string());
        for r in &self.rows {
            w.write_record(&[
                r.eps.to_string(),
                r.t.to_string(),
                r.thickness.to_string(),
                r.hausdorff.to_string(),
                opt(r.witnesses.m0),
                opt(r.witnesses.sigma),
                opt(r.witnesses.k),
                opt(r.witnesses.l),
                r.pass_flags.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows `(quantity, t, slope)`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["quantity", "t", "slope"])?;
        for (name, list) in [
            ("thickness", &self.thickness_slopes),
            ("hausdorff", &self.hausdorff_slopes),
        ] {
            for (t, s) in list {
                w.write_record(&[name.to_string(), t.to_string(), s.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn lookup(list: &[(f64, f64)], t: f64) -> Option<f64> {
    list.iter()
        .find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
        .map(|&(_, v)| v)
        .filter(|v| v.is_finite())
}

/// Least-squares slope of `ln y` against `ln x` over the finite positive
/// pairs; `NaN` with fewer than two.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Marker step for the drifted front: `1e-3`, reduced to half the marker
/// CFL limit when needed.
fn marker_dt(gamma: &Interface, c_star: f64, scenario: &Scenario, horizon: f64) -> f64 {
    if gamma.dim == 1 {
        return 1e-3;
    }
    let n = gamma.len();
    let spacing = (0..n)
        .map(|k| {
            let (a, b) = (gamma.points[k], gamma.points[(k + 1) % n]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(f64::INFINITY, f64::min);
    let (g, _) = scenario.chemo.drift_bounds(0.0, 0.0, horizon);
    (0.5 * spacing / (2.0 * (c_star + g))).min(1e-3)
}

/// The drifted limit front of a scenario in the propagation clock,
/// `[0, T - t^ε]`, by marker tracking.
pub fn drifted_front(scenario: &Scenario, wave: &WaveProfile) -> Result<FrontTrajectory> {
    let params = scenario.params;
    let flow = scenario.flow()?;
    let gamma = drift_interface(&scenario.gamma0(), &flow, &params)?;
    let horizon = (params.t_final - params.generation_time()).max(0.0);
    let dt = marker_dt(&gamma, wave.c_star, scenario, horizon);
    track_front_markers(&gamma, wave.c_star, &scenario.chemo, horizon, dt)
}

/// Distance between the half level set of `state` and `gamma`.
pub fn half_level_distance(state: &PdeState, gamma: &Interface) -> Result<f64> {
    if state.u.grid.dim == 1 {
        let pts = extract_level_set(&state.u, 0.5);
        if pts.is_empty() {
            return Err(Error::NoLayer { level: 0.5 });
        }
        return Ok(geometry::hausdorff_points(&pts, &gamma.points));
    }
    let segs = geometry::contour_segments(&state.u, 0.5);
    if segs.is_empty() {
        return Err(Error::NoLayer { level: 0.5 });
    }
    Ok(geometry::hausdorff_segments_closed(&segs, &gamma.points))
}

struct RunResult {
    rows: Vec<SweepRow>,
    bound: BoundRecord,
}

fn run_one(
    base: &Scenario,
    eps: f64,
    checkpoints: &[f64],
    wave: &WaveProfile,
    witnesses: Witnesses,
) -> Result<RunResult> {
    let scenario = base.with_epsilon(eps)?;
    let params = scenario.params;
    let t_gen = params.generation_time();
    let state0 = scenario.initial_state()?;
    let snaps = simulate(&state0, checkpoints)?;
    let front = if params.t_final >= t_gen {
        Some(drifted_front(&scenario, wave)?)
    } else {
        None
    };
    let last = snaps.last().expect("simulate returns at least one snapshot");
    let bound = BoundRecord {
        eps,
        literal: PdeState::literal_bound(scenario.initial.sup()),
        max_seen: last.max_seen,
        running: last.upper_bound,
    };
    let mut rows = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let snap = snaps
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * t.max(1.0))
            .ok_or_else(|| Error::Domain(format!("no snapshot at t = {t}")))?;
        let thickness = layer_thickness(&snap.u, params.eta).unwrap_or(f64::NAN);
        let hausdorff = match &front {
            Some(f) if t >= t_gen => half_level_distance(snap, &f.at(t - t_gen)?).unwrap_or(f64::NAN),
            _ => f64::NAN,
        };
        let flags = format!(
            "literal_bound:{};layer:{}",
            if snap.max_seen <= bound.literal * (1.0 + 1e-12) {
                "pass"
            } else {
                "fail"
            },
            if thickness.is_finite() { "pass" } else { "none" }
        );
        rows.push(SweepRow {
            eps,
            t,
            thickness,
            hausdorff,
            witnesses,
            pass_flags: flags,
        });
    }
    Ok(RunResult { rows, bound })
}

/// Runs the scenario for every ε (concurrently) and measures, at
/// `fractions · T`, the layer thickness and the distance of the half level
/// set to the drifted limit front. `eps_list` must be decreasing with at
/// least three entries.
pub fn run_sweep(
    scenario: &Scenario,
    eps_list: &[f64],
    fractions: &[f64],
    wave: &WaveProfile,
    witnesses: &[Witnesses],
) -> Result<ConvergenceReport> {
    if eps_list.len() < 3 || eps_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidParameter(
            "the ε list must be decreasing with at least three entries".into(),
        ));
    }
    if !witnesses.is_empty() && witnesses.len() != eps_list.len() {
        return Err(Error::InvalidParameter(
            "one witness record per ε is required".into(),
        ));
    }
    let t_final = scenario.params.t_final;
    let checkpoints: Vec<f64> = fractions.iter().map(|f| f * t_final).collect();
    let results: Vec<Result<RunResult>> = eps_list
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| {
            let w = witnesses.get(k).copied().unwrap_or_default();
            run_one(scenario, eps, &checkpoints, wave, w)
        })
        .collect();
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for r in results {
        let r = r?;
        rows.extend(r.rows);
        bounds.push(r.bound);
    }
    let mut thickness_slopes = Vec::new();
    let mut hausdorff_slopes = Vec::new();
    for &t in &checkpoints {
        let at_t: Vec<&SweepRow> = rows.iter().filter(|r| r.t == t).collect();
        let eps: Vec<f64> = at_t.iter().map(|r| r.eps).collect();
        let th: Vec<f64> = at_t.iter().map(|r| r.thickness).collect();
        let hd: Vec<f64> = at_t.iter().map(|r| r.hausdorff).collect();
        thickness_slopes.push((t, loglog_slope(&eps, &th)));
        hausdorff_slopes.push((t, loglog_slope(&eps, &hd)));
    }
    Ok(ConvergenceReport {
        rows,
        thickness_slopes,
        hausdorff_slopes,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let xs = [0.04, 0.02, 0.01, 0.005];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.3)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.3).abs() < 1e-12);
        assert!(loglog_slope(&xs[..1], &ys[..1]).is_nan());
        let with_gap = [f64::NAN, ys[1], ys[2], ys[3]];
        assert!((loglog_slope(&xs, &with_gap) - 1.3).abs() < 1e-12);
    }
}
