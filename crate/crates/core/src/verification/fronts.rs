//! Agreement between the two free-boundary solvers, and the expanding
//! circle benchmark.

use super::propagation::front_table_1d;
use super::Scenario;
use crate::error::{Error, Result};
use crate::flow::{drift_interface, Interface};
use crate::front_solver::{
    evolve_levelset, signed_distance_field, track_front_markers, FrontTrajectory, LevelSetOptions,
};
use crate::geometry;

/// Marker step of the comparisons.
const MARKER_DT: f64 = 1e-3;

/// Distance between two front solvers at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontComparison {
    /// Grid step of the level-set (or tabulated) reference.
    pub h: f64,
    pub t: f64,
    pub hausdorff: f64,
    /// Name of the solver compared against the markers.
    pub reference: &'static str,
}

impl FrontComparison {
    pub fn passed(&self) -> bool {
        self.hausdorff <= 3.0 * self.h
    }
}

/// Marker step bounded by half the spacing over the largest speed.
fn marker_dt(gamma: &Interface, speed: f64) -> f64 {
    if gamma.dim == 1 {
        return MARKER_DT;
    }
    let n = gamma.len();
    let spacing = (0..n)
        .map(|k| {
            let (a, b) = (gamma.points[k], gamma.points[(k + 1) % n]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(f64::INFINITY, f64::min);
    (0.5 * spacing / speed).min(MARKER_DT)
}

fn markers_from(gamma: &Interface, c_star: f64, scenario: &Scenario, horizon: f64) -> Result<FrontTrajectory> {
    let (g, _) = scenario.chemo.drift_bounds(0.0, 0.0, horizon);
    let dt = marker_dt(gamma, 2.0 * (c_star + g));
    track_front_markers(gamma, c_star, &scenario.chemo, horizon, dt)
}

/// Evolves the drifted initial front `Γ̃₀` over `[0, T - t^ε]` with
/// markers and with the level-set solver (2D) or the tabulated front (1D),
/// and measures the Hausdorff distance at the end.
pub fn compare_front_solvers(scenario: &Scenario, c_star: f64) -> Result<FrontComparison> {
    let params = scenario.params;
    let flow = scenario.flow()?;
    let gamma = drift_interface(&scenario.gamma0(), &flow, &params)?;
    let horizon = (params.t_final - params.generation_time()).max(0.0);
    let markers = markers_from(&gamma, c_star, scenario, horizon)?;
    let grid = scenario.build_grid()?;
    if params.domain.dim == 1 {
        let table = front_table_1d(scenario, c_star)?;
        let reference = table.interface(table.t_end());
        return Ok(FrontComparison {
            h: grid.h(),
            t: horizon,
            hausdorff: geometry::hausdorff_points(&markers.last().points, &reference.points),
            reference: "table",
        });
    }
    let phi0 = signed_distance_field(&gamma, grid);
    let ls = evolve_levelset(&phi0, c_star, &scenario.chemo, horizon, &LevelSetOptions::default())?;
    let phi = ls.phi.last().expect("level-set trajectory keeps its fields");
    let segs = geometry::contour_segments(phi, 0.0);
    if segs.is_empty() {
        return Err(Error::NoLayer { level: 0.0 });
    }
    Ok(FrontComparison {
        h: grid.h(),
        t: horizon,
        hausdorff: geometry::hausdorff_segments_closed(&segs, &markers.last().points),
        reference: "levelset",
    })
}

/// Radial errors of the expanding circle `r(t) = r₀ + c* t` with `v ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleReport {
    pub h: f64,
    pub t: f64,
    pub radius: f64,
    pub marker_error: f64,
    pub levelset_error: f64,
}

impl CircleReport {
    pub fn passed(&self) -> bool {
        self.marker_error <= 1e-3 && self.levelset_error <= 2.0 * self.h
    }
}

/// Runs both solvers from the disk support of `scenario` (its chemo field
/// is ignored) up to the final time.
pub fn circle_benchmark(scenario: &Scenario, c_star: f64) -> Result<CircleReport> {
    let (center, r0) = match scenario.initial.support {
        crate::model::SupportShape::Disk { center, radius } => (center, radius),
        _ => {
            return Err(Error::InvalidParameter(
                "the circle benchmark needs a disk support".into(),
            ))
        }
    };
    let mut plain = scenario.clone();
    plain.chemo = crate::model::ChemoFieldSpec::zero(2);
    let t = scenario.params.t_final;
    let radius = r0 + c_star * t;
    let gamma = Interface::circle(center, r0, scenario.markers);
    let markers = markers_from(&gamma, c_star, &plain, t)?;
    let radial = |p: &[f64; 2]| ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs();
    let marker_error = markers.last().points.iter().map(radial).fold(0.0, f64::max);
    let grid = scenario.build_grid()?;
    let phi0 = signed_distance_field(&gamma, grid);
    let ls = evolve_levelset(&phi0, c_star, &plain.chemo, t, &LevelSetOptions::default())?;
    let phi = ls.phi.last().expect("level-set trajectory keeps its fields");
    let levelset_error = geometry::contour_segments(phi, 0.0)
        .iter()
        .flat_map(|s| s.iter())
        .map(radial)
        .fold(0.0, f64::max);
    Ok(CircleReport {
        h: grid.h(),
        t,
        radius,
        marker_error,
        levelset_error,
    })
}
