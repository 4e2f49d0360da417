//! Run configuration: TOML with `[params]`, `[chemo]`, `[initial]`, `[grid]`,
//! `[sweep]` and `[verify]` sections plus a top-level `seed`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{DEFAULT_DT_FLOW, DEFAULT_MARKERS};
use crate::model::{ChemoFieldSpec, ChemoTerm, Domain, InitialDataSpec, Params};
use crate::verification::{GridSpec, OdeLattice, PropLattice, Scenario};

/// Shipped scenarios, named after the acceptance criteria they serve.
pub const PRESETS: &[(&str, &str)] = &[
    ("ac1", include_str!("../presets/ac1.toml")),
    ("ac2", include_str!("../presets/ac2.toml")),
    ("ac3", include_str!("../presets/ac3.toml")),
    ("ac4", include_str!("../presets/ac4.toml")),
    ("ac5", include_str!("../presets/ac5.toml")),
    ("ac6", include_str!("../presets/ac6.toml")),
    ("ac7", include_str!("../presets/ac7.toml")),
    ("ac8", include_str!("../presets/ac8.toml")),
    ("ac9", include_str!("../presets/ac9.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub epsilon: f64,
    pub m: f64,
    pub t_final: f64,
    pub eta: f64,
    /// Lower corner; its length sets the dimension.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub boundary_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemoSection {
    pub outer_center: Vec<f64>,
    pub outer_radius: f64,
    #[serde(default)]
    pub base: Vec<ChemoTerm>,
    #[serde(default)]
    pub perturbation: Vec<ChemoTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub cells: Option<Vec<usize>>,
    #[serde(default)]
    pub cells_per_eps: Option<f64>,
    #[serde(default = "default_dt_flow")]
    pub dt_flow: f64,
    #[serde(default = "default_markers")]
    pub markers: usize,
    #[serde(default)]
    pub d0: Option<f64>,
}

fn default_dt_flow() -> f64 {
    DEFAULT_DT_FLOW
}

fn default_markers() -> usize {
    DEFAULT_MARKERS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Decreasing ε values.
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Checkpoints as fractions of the final time.
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            eps: Vec::new(),
            fractions: default_fractions(),
        }
    }
}

fn default_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Tolerance of the wave computation.
    pub wave_tol: f64,
    /// Tolerance of the residual sign checks.
    pub tol: f64,
    /// Random space-time samples of the residual checks.
    pub samples: usize,
    pub c_g: Vec<f64>,
    pub m0: Vec<f64>,
    pub sigma_fractions: Vec<f64>,
    pub k: Vec<f64>,
    pub l: Vec<f64>,
    /// Sandwich comparison times per phase.
    pub sandwich_times: usize,
    /// Random ordered pairs of the comparison check.
    pub pairs: usize,
    /// Steps per pair, and of the mass check.
    pub steps: usize,
    /// Cells per direction of the comparison check.
    pub comparison_cells: usize,
    /// Samples of the flow check.
    pub flow_samples: usize,
    pub ode_deltas: Vec<f64>,
    pub ode_taus: Vec<f64>,
    pub ode_xi: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        let ode = OdeLattice::default();
        let prop = PropLattice::default();
        Self {
            wave_tol: 1e-8,
            tol: crate::verification::TOL_NUM,
            samples: 2000,
            c_g: vec![1.0, 4.0, 16.0, 64.0, 256.0, 1024.0],
            m0: vec![5.0, 10.0, 20.0, 40.0],
            sigma_fractions: prop.sigma_fractions,
            k: prop.k,
            l: prop.l,
            sandwich_times: 8,
            pairs: 100,
            steps: 200,
            comparison_cells: 64,
            flow_samples: 1000,
            ode_deltas: ode.deltas,
            ode_taus: ode.taus,
            ode_xi: ode.n_xi,
        }
    }
}

impl VerifySection {
    pub fn prop_lattice(&self) -> PropLattice {
        PropLattice {
            sigma_fractions: self.sigma_fractions.clone(),
            l: self.l.clone(),
            k: self.k.clone(),
        }
    }

    pub fn ode_lattice(&self) -> OdeLattice {
        OdeLattice {
            deltas: self.ode_deltas.clone(),
            taus: self.ode_taus.clone(),
            n_xi: self.ode_xi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub params: ParamsSection,
    #[serde(default)]
    pub chemo: Option<ChemoSection>,
    pub initial: InitialDataSpec,
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub verify: VerifySection,
}

fn point(v: &[f64], dim: usize, what: &str) -> Result<[f64; 2]> {
    if v.len() != dim {
        return Err(Error::Config(format!(
            "{what} has {} components, the domain has {dim}",
            v.len()
        )));
    }
    Ok([v[0], v.get(1).copied().unwrap_or(0.0)])
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
                Error::Config(format!("unknown preset {name:?}, expected one of {names:?}"))
            })?;
        Self::from_toml(text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.params.lower.len()
    }

    pub fn domain(&self) -> Result<Domain> {
        let dim = self.dim();
        if !(dim == 1 || dim == 2) {
            return Err(Error::Config("domain corners need 1 or 2 components".into()));
        }
        Domain::new(
            dim,
            point(&self.params.lower, dim, "params.lower")?,
            point(&self.params.upper, dim, "params.upper")?,
        )
    }

    pub fn model_params(&self) -> Result<Params> {
        let p = &self.params;
        Params::new(p.epsilon, p.m, p.t_final, p.eta, self.domain()?, p.boundary_margin)
    }

    pub fn chemo_spec(&self) -> Result<ChemoFieldSpec> {
        let dim = self.dim();
        match &self.chemo {
            None => Ok(ChemoFieldSpec::zero(dim)),
            Some(c) => ChemoFieldSpec::new(
                dim,
                point(&c.outer_center, dim, "chemo.outer_center")?,
                c.outer_radius,
                c.base.clone(),
                c.perturbation.clone(),
            ),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        match (&self.grid.cells, self.grid.cells_per_eps) {
            (Some(cells), None) => Ok(GridSpec::Cells { cells: cells.clone() }),
            (None, Some(cells_per_eps)) => Ok(GridSpec::PerEpsilon { cells_per_eps }),
            _ => Err(Error::Config(
                "[grid] needs exactly one of `cells` and `cells_per_eps`".into(),
            )),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = Scenario {
            params: self.model_params()?,
            chemo: self.chemo_spec()?,
            initial: self.initial,
            grid: self.grid_spec()?,
            dt_flow: self.grid.dt_flow,
            markers: self.grid.markers,
            d0: self.grid.d0,
        };
        s.validate()?;
        Ok(s)
    }

    /// The ε values of the sweep, or the single configured ε.
    pub fn eps_list(&self) -> Vec<f64> {
        if self.sweep.eps.is_empty() {
            vec![self.params.epsilon]
        } else {
            self.sweep.eps.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        let eps = &self.sweep.eps;
        if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::Config(
                "sweep.eps must be positive and strictly decreasing".into(),
            ));
        }
        for &e in eps {
            self.scenario()?.with_epsilon(e)?.validate()?;
        }
        if self.sweep.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(Error::Config("sweep.fractions must lie in (0, 1]".into()));
        }
        let v = &self.verify;
        let positive = |xs: &[f64]| !xs.is_empty() && xs.iter().all(|x| *x > 0.0 && x.is_finite());
        if !positive(&v.c_g) || !positive(&v.m0) || !positive(&v.sigma_fractions) || !positive(&v.l) {
            return Err(Error::Config(
                "verify ladders must be non-empty lists of positive values".into(),
            ));
        }
        if v.k.is_empty() || v.k.iter().any(|k| !(*k >= 1.0)) {
            return Err(Error::Config("verify.k values must be >= 1".into()));
        }
        if !(v.wave_tol > 0.0) || !(v.tol > 0.0) {
            return Err(Error::Config("verify tolerances must be positive".into()));
        }
        if v.samples == 0 || v.pairs == 0 || v.steps == 0 || v.flow_samples == 0 || v.comparison_cells < 4 {
            return Err(Error::Config("verify counts must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for (name, _) in PRESETS {
            let cfg = RunConfig::preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(cfg, again, "{name}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = PRESETS[2].1;
        assert!(RunConfig::from_toml(&base.replace("[sweep]", "[sweeps]")).is_err());
        let increasing = base.replace("eps = [0.04, 0.02, 0.01]", "eps = [0.01, 0.02]");
        assert!(matches!(RunConfig::from_toml(&increasing), Err(Error::Config(_))));
        assert!(RunConfig::from_toml(&base.replace("eta = 0.1", "eta = 0.7")).is_err());
        assert!(RunConfig::preset("nope").is_err());
    }
}
