//! Comparison functions of the asymptotic analysis and the experiments that
//! check the generation, propagation and thickness statements numerically.

mod fronts;
mod generation;
mod propagation;
mod residual;
mod structure;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowMap, Interface};
use crate::model::{ChemoFieldSpec, Grid, InitialDataSpec, Params, ScalarField};
use crate::pde_solver::PdeState;

pub use fronts::{circle_benchmark, compare_front_solvers, CircleReport, FrontComparison};
pub use generation::{
    check_generation, check_generation_residuals, check_generation_sandwich, eval_gen_comparator, GenComparator,
    GenComparators, GenResidualReport, GenerationReport,
};
pub use propagation::{
    check_ordering, check_propagation_residuals, check_propagation_sandwich, d_constant_1d, d_constant_grid, front_table_1d, sigma_max, FrontTable1d,
    OrderingReport, PropComparator, PropComparators, PropLattice, PropResidualReport,
};
pub use residual::{residual_pde, Region, SpaceTime, FD_STEP};
pub use structure::{
    check_comparison, check_flow, check_mass_conservation, check_ode_lattice, check_wave, ComparisonReport,
    FlowReport, OdeLattice, OdeReport, OdeRow, WaveReport,
};
pub use sweep::{drifted_front, half_level_distance, loglog_slope, run_sweep, BoundRecord, ConvergenceReport, SweepRow, Witnesses};

/// Numerical tolerance of the residual sign checks.
pub const TOL_NUM: f64 = 1e-3;

/// Value tolerance of the sandwich checks, on top of the spatial one.
pub const SANDWICH_VALUE_TOL: f64 = 1e-10;

/// Spatial tolerance of the sandwich checks, in cells.
pub const SANDWICH_CELLS: usize = 2;

/// Sub- (`Minus`) or super-solution (`Plus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Grid resolution: fixed cell counts or a number of cells per ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Cells { cells: Vec<usize> },
    PerEpsilon { cells_per_eps: f64 },
}

/// Everything needed to run one problem at one ε.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: Params,
    pub chemo: ChemoFieldSpec,
    pub initial: InitialDataSpec,
    pub grid: GridSpec,
    pub dt_flow: f64,
    pub markers: usize,
    /// Cut-off scale of `d^ε`; `None` selects the default.
    pub d0: Option<f64>,
}

impl Scenario {
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        let mut s = self.clone();
        s.params = self.params.with_epsilon(eps)?;
        Ok(s)
    }

    pub fn with_final_time(&self, t_final: f64) -> Result<Self> {
        let mut s = self.clone();
        s.params.t_final = t_final;
        s.params.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.chemo.validate()?;
        if self.chemo.dim != self.params.domain.dim {
            return Err(Error::InvalidParameter(
                "chemo field and domain dimensions differ".into(),
            ));
        }
        self.initial
            .validate(&self.params.domain, self.params.boundary_margin)?;
        self.build_grid()?;
        if !(self.dt_flow > 0.0) || (self.params.domain.dim == 2 && self.markers < 3) {
            return Err(Error::InvalidParameter(
                "dt_flow must be positive and 2D fronts need at least 3 markers".into(),
            ));
        }
        if let Some(d0) = self.d0 {
            if !(d0 > 0.0) {
                return Err(Error::InvalidParameter("d0 must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let dom = &self.params.domain;
        let cells: Vec<usize> = match &self.grid {
            GridSpec::Cells { cells } => cells.clone(),
            GridSpec::PerEpsilon { cells_per_eps } => {
                if !(*cells_per_eps > 0.0) {
                    return Err(Error::InvalidParameter("cells_per_eps must be positive".into()));
                }
                let h = self.params.epsilon / cells_per_eps;
                (0..dom.dim).map(|d| (dom.side(d) / h).ceil() as usize).collect()
            }
        };
        Grid::new(dom, &cells)
    }

    pub fn initial_state(&self) -> Result<PdeState> {
        PdeState::from_initial(self.build_grid()?, &self.initial, self.params, self.chemo.clone())
    }

    pub fn initial_field(&self) -> Result<ScalarField> {
        Ok(self.initial_state()?.u)
    }

    pub fn flow(&self) -> Result<FlowMap> {
        FlowMap::new(self.chemo.clone(), self.dt_flow)
    }

    /// `Γ₀ = ∂Ω₀` sampled with the configured marker count.
    pub fn gamma0(&self) -> Interface {
        Interface::from_support(&self.initial.support, self.markers)
    }

    pub fn d0(&self, grid: &Grid) -> f64 {
        self.d0.unwrap_or_else(|| crate::front_solver::default_d0(grid))
    }
}

/// Worst violations of a sandwich at one time; positive values are
/// violations beyond the tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRecord {
    pub t: f64,
    pub below: f64,
    pub above: f64,
}

impl SandwichRecord {
    pub fn holds(&self) -> bool {
        self.below <= 0.0 && self.above <= 0.0
    }
}

/// For every cell, the minimum and maximum of `values` over the cells at
/// most `r` away in each direction.
pub(crate) fn neighborhood_extrema(grid: &Grid, values: &[f64], r: usize) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut lo = vec![0.0; values.len()];
    let mut hi = vec![0.0; values.len()];
    let ry = if grid.dim == 2 { r } else { 0 };
    for j in 0..ny {
        for i in 0..nx {
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            for jj in j.saturating_sub(ry)..=(j + ry).min(ny - 1) {
                for ii in i.saturating_sub(r)..=(i + r).min(nx - 1) {
                    let v = values[jj * nx + ii];
                    a = a.min(v);
                    b = b.max(v);
                }
            }
            lo[j * nx + i] = a;
            hi[j * nx + i] = b;
        }
    }
    (lo, hi)
}

/// Worst violations of `lower ≤ u ≤ upper` with the spatial and value
/// tolerances of the sandwich checks: `(max(lower - u), max(u - upper))`
/// after relaxation, with the offending cell indices.
pub(crate) fn sandwich_violation(
    grid: &Grid,
    u: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> ((f64, usize), (f64, usize)) {
    let (lo, _) = neighborhood_extrema(grid, lower, SANDWICH_CELLS);
    let (_, hi) = neighborhood_extrema(grid, upper, SANDWICH_CELLS);
    let mut below = (f64::NEG_INFINITY, 0);
    let mut above = (f64::NEG_INFINITY, 0);
    for k in 0..u.len() {
        let b = lo[k] - u[k];
        if b > below.0 {
            below = (b, k);
        }
        let a = u[k] - hi[k];
        if a > above.0 {
            above = (a, k);
        }
    }
    (below, above)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    #[test]
    fn neighborhood_extrema_1d() {
        let g = Grid::new(&Domain::interval(0.0, 1.0).unwrap(), &[6]).unwrap();
        let v = [0.0, 5.0, 1.0, 2.0, -1.0, 3.0];
        let (lo, hi) = neighborhood_extrema(&g, &v, 1);
        assert_eq!(lo, vec![0.0, 0.0, 1.0, -1.0, -1.0, -1.0]);
        assert_eq!(hi, vec![5.0, 5.0, 5.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn sandwich_tolerates_shift_by_two_cells() {
        let g = Grid::new(&Domain::interval(0.0, 1.0).unwrap(), &[10]).unwrap();
        let step = |k0: usize| (0..10).map(|k| if k < k0 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let u = step(5);
        let ((b, _), (a, _)) = sandwich_violation(&g, &u, &step(7), &step(3));
        assert!(b <= 0.0 && a <= 0.0);
        let ((b, _), _) = sandwich_violation(&g, &u, &step(8), &step(5));
        assert_eq!(b, 1.0);
    }
}
