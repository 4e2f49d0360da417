//! Sharp travelling wave of minimal speed for `(U^m)'' + c U' + U(1-U) = 0`,
//! `U(-∞) = 1`, `U > 0` on `z < 0`, `U = 0` on `z >= 0`.
//!
//! With `W = (U^m)'` and `U` as the independent variable the wave solves
//!
//! ```text
//! dW/dU = -c - m U^m (1-U) / W,      dz/dU = m U^(m-1) / W,
//! ```
//!
//! and the sharp wave leaves the edge along `W = -cU + U^m/c + ...`. The speed
//! is found by bisection: below `c*` the trajectory turns back (`W` reaches
//! zero before `U = 1`), above it arrives at `U = 1` with `W < 0`.
//!
//! The profile is assembled from two branches, both integrated in their
//! stable direction for the saddle at `U = 1`: an edge branch from `U = 0`
//! up to `u_match`, and a saddle branch launched on the unstable manifold of
//! `(1, 0)` and integrated down to `u_match`. The table stores the pressure
//! `P = U^(m-1)` with its first two derivatives, which stay bounded at the
//! edge, and is interpolated by quintic Hermite polynomials.

use std::io::Write;

use crate::error::{Error, Result};
use crate::integrate::{dopri45, dopri45_until, Tolerance};

const SHOOT_START: f64 = 1e-9;

/// Result of one shot from the edge at a trial speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotOutcome {
    /// `W` reached zero at `U = u_turn < 1`: no monotone connection.
    TurnsBack { u_turn: f64 },
    /// Reached `U = 1` with `W = w_at_one < 0`.
    Overshoots { w_at_one: f64 },
}

/// Construction knobs for the profile table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOptions {
    /// Node spacing next to the edge.
    pub dz0: f64,
    /// Geometric growth factor of the spacing away from the edge.
    pub growth: f64,
    /// Largest node spacing.
    pub max_dz: f64,
    /// Value of `U` where the edge and saddle branches are joined.
    pub u_match: f64,
    /// Launch distance `1 - U` on the saddle's unstable manifold.
    pub tail_v0: f64,
    /// The table extends at least down to this `z`.
    pub z_min_target: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            dz0: 1e-4,
            growth: 1.03,
            max_dz: 0.02,
            u_match: 0.99,
            tail_v0: 1e-12,
            z_min_target: -40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    z: f64,
    p: f64,
    dp: f64,
    d2p: f64,
}

/// Minimal speed and sampled sharp profile.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub m: f64,
    pub c_star: f64,
    /// Decay rate of `1 - U` as `z → -∞`.
    pub tail_rate: f64,
    /// Mismatch of `W` between the two branches at `u_match`.
    pub match_defect: f64,
    nodes: Vec<Node>,
}

/// `U`, `U'`, `(U^m)'` and `(U^m)''` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveEval {
    pub u: f64,
    pub du: f64,
    pub dum: f64,
    pub d2um: f64,
}

/// Closed-form `m = 2` wave `(1 - e^{z/2})₊` with `c* = 1`.
pub fn explicit_m2(z: f64) -> WaveEval {
    if z >= 0.0 {
        return WaveEval::default();
    }
    let e = (0.5 * z).exp();
    let u = 1.0 - e;
    let du = -0.5 * e;
    WaveEval {
        u,
        du,
        dum: 2.0 * u * du,
        d2um: -0.5 * e + e * e,
    }
}

fn edge_rhs(m: f64, c: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |u: f64, s: &[f64; 2]| {
        let w = s[0];
        let um1 = u.powf(m - 1.0);
        [-c - m * um1 * u * (1.0 - u) / w, m * um1 / w]
    }
}

fn edge_launch(m: f64, c: f64, u: f64) -> [f64; 2] {
    let w = -c * u + u.powf(m) / c;
    // z(u) = -∫₀ᵘ (m/c) s^(m-2) (1 + s^(m-1)/c²) ds
    let z = -(m / c) * (u.powf(m - 1.0) / (m - 1.0) + u.powf(2.0 * m - 2.0) / (c * c * (2.0 * m - 2.0)));
    [w, z]
}

fn tail_rate(m: f64, c: f64) -> f64 {
    (-c + (c * c + 4.0 * m).sqrt()) / (2.0 * m)
}

/// Shoots from the edge at speed `c`.
pub fn classify_speed(m: f64, c: f64) -> Result<ShotOutcome> {
    if !(m >= 2.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shooting needs m >= 2 and c > 0 (m = {m}, c = {c})"
        )));
    }
    let tol = Tolerance {
        atol: 1e-14,
        rtol: 1e-12,
    };
    let start = edge_launch(m, c, SHOOT_START);
    let res = dopri45_until(edge_rhs(m, c), SHOOT_START, start, 1.0, tol, |_, s| s[0] >= 0.0);
    match res {
        Ok(s) if s.event => Ok(ShotOutcome::TurnsBack { u_turn: s.t }),
        Ok(s) => Ok(ShotOutcome::Overshoots { w_at_one: s.y[0] }),
        // Step underflow happens as W → 0⁻ with U < 1.
        Err(_) => Ok(ShotOutcome::TurnsBack { u_turn: f64::NAN }),
    }
}

/// Minimal-speed wave with the default table options.
pub fn compute_wave(m: f64, tol: f64) -> Result<WaveProfile> {
    compute_wave_with(m, tol, &WaveOptions::default())
}

pub fn compute_wave_with(m: f64, tol: f64, opts: &WaveOptions) -> Result<WaveProfile> {
    if !(m >= 2.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "wave solver supports m >= 2, got {m}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let c = find_speed(m, tol)?;
    build_profile(m, c, opts)
}

fn find_speed(m: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.1f64, 5.0f64);
    let turns = |c: f64| -> Result<bool> { Ok(matches!(classify_speed(m, c)?, ShotOutcome::TurnsBack { .. })) };
    let mut widen = 0;
    while !turns(lo)? {
        lo *= 0.5;
        widen += 1;
        if widen > 20 {
            return Err(Error::WaveShooting {
                lo,
                hi,
                detail: "lower end never turns back".into(),
            });
        }
    }
    while turns(hi)? {
        hi *= 2.0;
        widen += 1;
        if widen > 40 {
            return Err(Error::WaveShooting {
                lo,
                hi,
                detail: "upper end never overshoots".into(),
            });
        }
    }
    // Bisect well past the requested tolerance: the profile is built at this c.
    let target = tol.min(1e-13);
    for _ in 0..200 {
        if hi - lo <= target * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if turns(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo > tol {
        return Err(Error::WaveShooting {
            lo,
            hi,
            detail: "bisection stalled above tolerance".into(),
        });
    }
    Ok(0.5 * (lo + hi))
}

fn node_from(m: f64, c: f64, z: f64, u: f64, w: f64) -> Node {
    let k = (m - 1.0) / m;
    let p = u.powf(m - 1.0);
    let du = w / (m * p);
    let ratio = w / u;
    let dw = -c * du - u * (1.0 - u);
    Node {
        z,
        p,
        dp: k * ratio,
        d2p: k * (dw * u - w * du) / (u * u),
    }
}

fn build_profile(m: f64, c: f64, opts: &WaveOptions) -> Result<WaveProfile> {
    let tol = Tolerance {
        atol: 1e-15,
        rtol: 1e-12,
    };
    let rhs = edge_rhs(m, c);
    let k = (m - 1.0) / m;

    // Edge branch, marching in U with node spacing chosen in z.
    let mut edge = vec![Node {
        z: 0.0,
        p: 0.0,
        dp: -k * c,
        d2p: -k * k,
    }];
    let mut u = SHOOT_START;
    let mut state = edge_launch(m, c, u);
    let mut dz = opts.dz0;
    while u < opts.u_match {
        let slope = (state[0] / (m * u.powf(m - 1.0))).abs();
        let next = (u + dz * slope).min(opts.u_match);
        state = dopri45(&rhs, u, state, next, tol)?;
        u = next;
        if !(state[0] < 0.0) {
            return Err(Error::WaveShooting {
                lo: c,
                hi: c,
                detail: format!("edge branch lost monotonicity at U = {u}"),
            });
        }
        edge.push(node_from(m, c, state[1], u, state[0]));
        dz = (dz * opts.growth).min(opts.max_dz);
    }
    let z_match = state[1];
    let w_edge = state[0];

    // Saddle branch: 1 - U = v₀, W = -m λ v₀, local z = 0, integrated toward
    // smaller U (increasing z).
    let lam = tail_rate(m, c);
    let v0 = opts.tail_v0;
    let mut u = 1.0 - v0;
    let mut state = [-m * lam * v0, 0.0];
    let mut tail = vec![node_from(m, c, 0.0, u, state[0])];
    let mut dz = opts.max_dz;
    while u > opts.u_match {
        let slope = (state[0] / (m * u.powf(m - 1.0))).abs();
        // In the far tail dz is set by the exponential scale.
        let step_u = (dz * slope).max(1e-3 * (1.0 - u)).min(u - opts.u_match);
        let next = (u - step_u).max(opts.u_match);
        state = dopri45(&rhs, u, state, next, tol)?;
        u = next;
        tail.push(node_from(m, c, state[1], u, state[0]));
        dz = opts.max_dz;
    }
    let shift = z_match - state[1];
    let match_defect = (state[0] - w_edge).abs();

    let mut nodes: Vec<Node> = tail
        .into_iter()
        .map(|mut n| {
            n.z += shift;
            n
        })
        .collect();
    // Drop the duplicated matching node from the tail side.
    nodes.pop();
    nodes.extend(edge.into_iter().rev());

    let profile = WaveProfile {
        m,
        c_star: c,
        tail_rate: lam,
        match_defect,
        nodes,
    };
    if profile.z_min() > opts.z_min_target {
        return Err(Error::WaveShooting {
            lo: c,
            hi: c,
            detail: format!(
                "table reaches only z = {}, increase the tail launch accuracy",
                profile.z_min()
            ),
        });
    }
    Ok(profile)
}

impl WaveProfile {
    pub fn z_min(&self) -> f64 {
        self.nodes[0].z
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node abscissae, ascending (the last one is `z = 0`).
    pub fn node_z(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.z)
    }

    /// `(U, U', (U^m)')`.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let e = self.eval_full(z);
        (e.u, e.du, e.dum)
    }

    pub fn u(&self, z: f64) -> f64 {
        self.eval_full(z).u
    }

    pub fn eval_full(&self, z: f64) -> WaveEval {
        if z >= 0.0 {
            return WaveEval::default();
        }
        let m = self.m;
        if z <= self.z_min() {
            let n0 = self.nodes[0];
            let u0 = n0.p.powf(1.0 / (m - 1.0));
            let v = (1.0 - u0) * (self.tail_rate * (z - n0.z)).exp();
            let u = 1.0 - v;
            let du = -self.tail_rate * v;
            let um1 = u.powf(m - 1.0);
            let dum = m * um1 * du;
            // (U^m)'' from the wave equation.
            let d2um = -self.c_star * du - u * (1.0 - u);
            return WaveEval { u, du, dum, d2um };
        }
        let i = self.nodes.partition_point(|n| n.z <= z).saturating_sub(1);
        let i = i.min(self.nodes.len() - 2);
        let (p, dp, d2p) = hermite5(&self.nodes[i], &self.nodes[i + 1], z);
        if p <= 0.0 {
            return WaveEval::default();
        }
        let k = (m - 1.0) / m;
        let u = p.powf(1.0 / (m - 1.0));
        let du = dp * u / ((m - 1.0) * p);
        let dum = u * dp / k;
        let d2um = (du * dp + u * d2p) / k;
        WaveEval { u, du, dum, d2um }
    }

    /// Residual of the wave equation at `z`, using the interpolated
    /// second derivative of the pressure.
    pub fn residual(&self, z: f64) -> f64 {
        let e = self.eval_full(z);
        e.d2um + self.c_star * e.du + e.u * (1.0 - e.u)
    }

    /// Writes `(z, U, dU, dUm)` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["z", "U", "dU", "dUm"])?;
        for n in &self.nodes {
            let (u, du, dum) = if n.z >= 0.0 {
                (0.0, 0.0, 0.0)
            } else {
                self.eval(n.z)
            };
            wtr.write_record(&[
                format!("{:.17e}", n.z),
                format!("{:.17e}", u),
                format!("{:.17e}", du),
                format!("{:.17e}", dum),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Quintic Hermite interpolation of value, slope and curvature.
fn hermite5(a: &Node, b: &Node, z: f64) -> (f64, f64, f64) {
    let h = b.z - a.z;
    let t = (z - a.z) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    // Basis functions and their t-derivatives.
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;

    let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;

    let s0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let s1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let s2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
    let s3 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);
    let s4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let s5 = 60.0 * t - 180.0 * t2 + 120.0 * t3;

    let p = h0 * a.p + h1 * h * a.dp + h2 * h * h * a.d2p + h5 * b.p + h4 * h * b.dp + h3 * h * h * b.d2p;
    let dp = (d0 * a.p + d1 * h * a.dp + d2 * h * h * a.d2p + d5 * b.p + d4 * h * b.dp + d3 * h * h * b.d2p) / h;
    let d2p = (s0 * a.p + s1 * h * a.dp + s2 * h * h * a.d2p + s5 * b.p + s4 * h * b.dp + s3 * h * h * b.d2p)
        / (h * h);
    (p, dp, d2p)
}
