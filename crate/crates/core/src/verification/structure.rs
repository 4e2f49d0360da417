//! Structural checks: the reaction ODE lattice, the travelling wave, the
//! flow map, discrete comparison and mass conservation.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{determinant, FlowMap};
use crate::model::{Boundary, ChemoFieldSpec, Domain, Grid, Params, Point, ScalarField};
use crate::pde_solver::PdeState;
use crate::reaction_ode::PerturbedReaction;
use crate::traveling_wave::{compute_wave, compute_wave_with, explicit_m2, WaveOptions, WaveProfile};

/// Bound `C0` on `|ξ|` and `|Y|` used by the lattice.
pub const ODE_BOUND: f64 = 2.0;

/// Largest admissible fitted constant in `0 < Y_ξ ≤ C e^{μτ}`.
pub const ODE_GROWTH_BOUND: f64 = 2.0;

/// Points of the `(δ, τ, ξ)` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeLattice {
    pub deltas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Number of ξ values in `(-C0, C0)`.
    pub n_xi: usize,
}

impl Default for OdeLattice {
    fn default() -> Self {
        Self {
            deltas: vec![-0.05, -0.01, 0.0, 0.01, 0.05],
            taus: vec![0.1, 0.5, 1.0, 2.0, 4.0],
            n_xi: 41,
        }
    }
}

/// One lattice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeRow {
    pub delta: f64,
    pub tau: f64,
    pub xi: f64,
    pub y: f64,
    pub y_xi: f64,
    pub y_xixi: f64,
    /// `Y - a` has the sign of `ξ - a`.
    pub sign_ok: bool,
    /// `|Y| ≤ C0`.
    pub bounded: bool,
    /// `Y_ξ e^{-μτ}`.
    pub growth: f64,
    /// `|Y_ξξ / Y_ξ| / (e^{μτ} - 1)`.
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeReport {
    pub rows: Vec<OdeRow>,
    pub max_growth: f64,
    pub min_y_xi: f64,
    pub max_curvature: f64,
    /// Largest distance to the closed-form logistic solution at `δ = 0`.
    pub oracle_error: f64,
}

impl OdeReport {
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("sign", self.rows.iter().all(|r| r.sign_ok)),
            ("bounded", self.rows.iter().all(|r| r.bounded)),
            (
                "growth",
                self.min_y_xi > 0.0 && self.max_growth <= ODE_GROWTH_BOUND,
            ),
            ("curvature", self.max_curvature.is_finite()),
            ("logistic_oracle", self.oracle_error <= 1e-8),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }

    /// Rows `(delta, tau, xi, Y, Y_xi, Y_xixi, sign_ok, bounded, growth,
    /// curvature)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "delta", "tau", "xi", "Y", "Y_xi", "Y_xixi", "sign_ok", "bounded", "growth", "curvature",
        ])?;
        for r in &self.rows {
            w.write_record(&[
                r.delta.to_string(),
                r.tau.to_string(),
                r.xi.to_string(),
                r.y.to_string(),
                r.y_xi.to_string(),
                r.y_xixi.to_string(),
                r.sign_ok.to_string(),
                r.bounded.to_string(),
                r.growth.to_string(),
                r.curvature.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn logistic(tau: f64, xi: f64) -> f64 {
    let e = tau.exp();
    xi * e / (1.0 - xi + xi * e)
}

/// Checks the sign, boundedness, growth and curvature properties of `Y`
/// over the lattice, and the `δ = 0` logistic closed form.
pub fn check_ode_lattice(lattice: &OdeLattice) -> Result<OdeReport> {
    if lattice.n_xi < 2 || lattice.taus.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter(
            "the ODE lattice needs positive τ values and at least two ξ values".into(),
        ));
    }
    let xis: Vec<f64> = (0..lattice.n_xi)
        .map(|k| ODE_BOUND * (-1.0 + 2.0 * (k as f64 + 0.5) / lattice.n_xi as f64))
        .collect();
    let mut points = Vec::new();
    for &delta in &lattice.deltas {
        let reaction = PerturbedReaction::new(delta)?;
        for &tau in &lattice.taus {
            for &xi in &xis {
                points.push((reaction, tau, xi));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(reaction, tau, xi)| -> Result<OdeRow> {
            let zeros = reaction.zeros();
            let s = reaction.solve(tau, xi)?;
            let a = zeros.a;
            let sign_ok = match xi.partial_cmp(&a) {
                Some(std::cmp::Ordering::Greater) => s.y > a,
                Some(std::cmp::Ordering::Less) => s.y < a,
                _ => (s.y - a).abs() <= 1e-12,
            };
            let grow = (zeros.mu * tau).exp();
            Ok(OdeRow {
                delta: reaction.delta,
                tau,
                xi,
                y: s.y,
                y_xi: s.y_xi,
                y_xixi: s.y_xixi,
                sign_ok,
                bounded: s.y.abs() <= ODE_BOUND,
                growth: s.y_xi / grow,
                curvature: (s.y_xixi / s.y_xi).abs() / (grow - 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let logistic_reaction = PerturbedReaction::new(0.0)?;
    let mut oracle_error: f64 = 0.0;
    for &tau in &lattice.taus {
        for k in 1..20 {
            let xi = k as f64 / 20.0;
            let y = logistic_reaction.solve(tau, xi)?.y;
            oracle_error = oracle_error.max((y - logistic(tau, xi)).abs());
        }
    }
    Ok(OdeReport {
        max_growth: rows.iter().map(|r| r.growth).fold(f64::NEG_INFINITY, f64::max),
        min_y_xi: rows.iter().map(|r| r.y_xi).fold(f64::INFINITY, f64::min),
        max_curvature: rows.iter().map(|r| r.curvature).fold(0.0, f64::max),
        rows,
        oracle_error,
    })
}

/// Travelling-wave properties at one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveReport {
    pub m: f64,
    pub c_star: f64,
    /// Sup distance to `(1 - e^{z/2})₊` (only for `m = 2`).
    pub oracle_error: Option<f64>,
    /// Largest residual of the closed-form profile on 10³ points (only for
    /// `m = 2`).
    pub explicit_residual: Option<f64>,
    pub monotone: bool,
    /// Tail rate fitted from the table.
    pub beta: f64,
    /// Tail rate fitted from a table on a twice finer node spacing.
    pub beta_refined: f64,
    /// Smallest `C` with `|(U^m)'| ≤ C U` on the sampled points.
    pub edge_constant: f64,
    /// `|U'(-10⁻³)|`.
    pub sharpness: f64,
    /// Largest wave-equation residual of the table at points between nodes.
    pub residual: f64,
    pub profile: WaveProfile,
}

impl WaveReport {
    pub fn beta_drift(&self) -> f64 {
        ((self.beta - self.beta_refined) / self.beta_refined).abs()
    }

    /// Named pass/fail flags; `m = 2` adds the closed-form comparisons,
    /// `m > 2` the sharpness check.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let mut c = vec![
            ("monotone", self.monotone),
            ("tail_rate_stable", self.beta_drift() <= 0.05),
            ("edge_constant_finite", self.edge_constant.is_finite()),
        ];
        if let (Some(e), Some(r)) = (self.oracle_error, self.explicit_residual) {
            c.push(("speed", (self.c_star - 1.0).abs() <= 1e-3));
            c.push(("profile", e <= 1e-3));
            c.push(("explicit_residual", r <= 1e-12));
        } else {
            c.push(("sharpness", self.sharpness > 100.0));
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

/// Least-squares rate of `ln(1 - U)` against `z` over the points where
/// `1 - U ∈ [10⁻⁹, 10⁻³]`.
fn fit_tail(w: &WaveProfile) -> f64 {
    let pts: Vec<(f64, f64)> = (0..4000)
        .map(|k| w.z_min() * (1.0 - k as f64 / 4000.0))
        .filter_map(|z| {
            let v = 1.0 - w.u(z);
            (1e-9..=1e-3).contains(&v).then(|| (z, v.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - mv)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    sxy / sxx
}

/// Computes the wave at `m` and measures speed, shape, tail, edge and
/// residual properties.
pub fn check_wave(m: f64, tol: f64) -> Result<WaveReport> {
    let profile = compute_wave(m, tol)?;
    let base = WaveOptions::default();
    let fine = WaveOptions {
        dz0: 0.5 * base.dz0,
        max_dz: 0.5 * base.max_dz,
        growth: 1.0 + 0.5 * (base.growth - 1.0),
        ..base
    };
    let refined = compute_wave_with(m, tol, &fine)?;
    let zs: Vec<f64> = (1..=1000)
        .map(|k| profile.z_min() * (1.0 - k as f64 / 1000.0) - 1e-9)
        .collect();
    let mut monotone = true;
    let mut edge_constant: f64 = 0.0;
    for &z in &zs {
        let e = profile.eval_full(z);
        monotone &= e.du < 0.0;
        edge_constant = edge_constant.max(e.dum.abs() / e.u);
    }
    let nodes: Vec<f64> = profile.node_z().collect();
    let residual = nodes
        .windows(2)
        .map(|w| profile.residual(0.5 * (w[0] + w[1])).abs())
        .fold(0.0, f64::max);
    let (oracle_error, explicit_residual) = if m == 2.0 {
        let err = zs
            .iter()
            .map(|&z| (profile.u(z) - explicit_m2(z).u).abs())
            .fold(0.0, f64::max);
        let res = (0..1000)
            .map(|k| {
                let z = -20.0 * (k as f64 + 0.5) / 1000.0;
                let e = explicit_m2(z);
                (e.d2um + e.du + e.u * (1.0 - e.u)).abs()
            })
            .fold(0.0, f64::max);
        (Some(err), Some(res))
    } else {
        (None, None)
    };
    Ok(WaveReport {
        m,
        c_star: profile.c_star,
        oracle_error,
        explicit_residual,
        monotone,
        beta: fit_tail(&profile),
        beta_refined: fit_tail(&refined),
        edge_constant,
        sharpness: profile.eval_full(-1e-3).du.abs(),
        residual,
        profile,
    })
}

/// Flow-map identities on random samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowReport {
    pub samples: usize,
    /// `max |Φ(t₀, t, Φ(t, t₀, x)) - x|`.
    pub round_trip: f64,
    /// `max |Φ(t, s, Φ(s, r, x)) - Φ(t, r, x)|`.
    pub group: f64,
    /// `max |∂Φ/∂t₂ + D₃Φ ∇v(t₀, x)|`.
    pub identity: f64,
    pub min_determinant: f64,
}

impl FlowReport {
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("round_trip", self.round_trip <= 1e-8),
            ("group", self.group <= 1e-8),
            ("identity", self.identity <= 1e-6),
            ("determinant", self.min_determinant > 0.0),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

/// Step of the central difference in `t₀`.
const FLOW_FD_STEP: f64 = 1e-4;

/// Fixed RK4 step count of the finite-differenced map.
const FLOW_FD_STEPS: usize = 400;

/// Checks the round trip, group property, the `t₀`-derivative identity and
/// positivity of the Jacobian determinant at `samples` random
/// `(t, t₀, x)` with times in `[0, t_max]` and `x` in `domain`.
pub fn check_flow(map: &FlowMap, domain: &Domain, t_max: f64, samples: usize, seed: u64) -> Result<FlowReport> {
    if !(t_max > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter(
            "flow check needs t_max > 0 and at least one sample".into(),
        ));
    }
    let dim = domain.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64, Point)> = (0..samples)
        .map(|_| {
            let mut x = [0.0; 2];
            for (d, xd) in x.iter_mut().enumerate().take(dim) {
                *xd = rng.gen_range(domain.lower[d]..domain.upper[d]);
            }
            (
                rng.gen_range(0.0..t_max),
                rng.gen_range(FLOW_FD_STEP..t_max - FLOW_FD_STEP),
                rng.gen_range(0.0..t_max),
                x,
            )
        })
        .collect();
    let dist = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
    let per: Vec<[f64; 4]> = draws
        .par_iter()
        .map(|&(t, t0, s, x)| {
            let y = map.map(t, t0, x);
            let back = map.map(t0, t, y);
            let via = map.map(t, s, map.map(s, t0, x));
            let (_, jac) = map.advance_steps(t, t0, x, FLOW_FD_STEPS);
            let plus = map.map_steps(t, t0 + FLOW_FD_STEP, x, FLOW_FD_STEPS);
            let minus = map.map_steps(t, t0 - FLOW_FD_STEP, x, FLOW_FD_STEPS);
            let g = map.chemo.eval(t0, x).grad;
            let g = [g[0], if dim == 2 { g[1] } else { 0.0 }];
            let mut r = [0.0; 2];
            for d in 0..dim {
                let dphi = (plus[d] - minus[d]) / (2.0 * FLOW_FD_STEP);
                r[d] = dphi + jac[d][0] * g[0] + jac[d][1] * g[1];
            }
            let det = if dim == 2 { determinant(&jac) } else { jac[0][0] };
            [dist(back, x), dist(via, y), r[0].hypot(r[1]), det]
        })
        .collect();
    Ok(FlowReport {
        samples,
        round_trip: per.iter().map(|p| p[0]).fold(0.0, f64::max),
        group: per.iter().map(|p| p[1]).fold(0.0, f64::max),
        identity: per.iter().map(|p| p[2]).fold(0.0, f64::max),
        min_determinant: per.iter().map(|p| p[3]).fold(f64::INFINITY, f64::min),
    })
}

/// Discrete comparison principle on random ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub pairs: usize,
    pub steps: usize,
    /// Largest `max(u_lo - u_hi)` over all pairs and steps (0 if ordered).
    pub max_violation: f64,
    /// Pair index reaching `max_violation`.
    pub worst_pair: usize,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= 1e-12
    }
}

fn random_pair(grid: Grid, rng: &mut ChaCha8Rng) -> (ScalarField, ScalarField) {
    let lo: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.2)).collect();
    let hi: Vec<f64> = lo.iter().map(|&v| v + rng.gen_range(0.0..0.3)).collect();
    (
        ScalarField {
            grid,
            values: lo,
            bc: Boundary::NoFlux,
        },
        ScalarField {
            grid,
            values: hi,
            bc: Boundary::NoFlux,
        },
    )
}

/// Advances `pairs` random ordered pairs `u_lo ≤ u_hi` by `steps` common
/// steps (the smaller of the two stable steps) and records the largest
/// ordering violation.
pub fn check_comparison(
    params: &Params,
    chemo: &ChemoFieldSpec,
    grid: Grid,
    pairs: usize,
    steps: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    let runs: Vec<Result<f64>> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let (lo, hi) = random_pair(grid, &mut rng);
            let mut a = PdeState::new(lo, *params, chemo.clone())?;
            let mut b = PdeState::new(hi, *params, chemo.clone())?;
            let mut worst: f64 = 0.0;
            for _ in 0..steps {
                let dt = a.stable_dt().min(b.stable_dt());
                a.step_mut(dt)?;
                b.step_mut(dt)?;
                for (x, y) in a.u.values.iter().zip(&b.u.values) {
                    worst = worst.max(x - y);
                }
            }
            Ok(worst)
        })
        .collect();
    let mut report = ComparisonReport {
        pairs,
        steps,
        max_violation: 0.0,
        worst_pair: 0,
    };
    for (k, r) in runs.into_iter().enumerate() {
        let v = r?;
        if v > report.max_violation {
            report.max_violation = v;
            report.worst_pair = k;
        }
    }
    Ok(report)
}

/// Largest relative mass drift over `steps` stable steps with the reaction
/// switched off.
pub fn check_mass_conservation(state: &PdeState, steps: usize) -> Result<f64> {
    let mut s = state.clone().with_reaction(false);
    let m0 = s.mass();
    if !(m0 > 0.0) {
        return Err(Error::InvalidParameter("mass check needs positive mass".into()));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let dt = s.stable_dt();
        s.step_mut(dt)?;
        worst = worst.max(((s.mass() - m0) / m0).abs());
    }
    Ok(worst)
}
