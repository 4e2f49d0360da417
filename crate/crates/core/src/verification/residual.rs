//! Pointwise residual `L^ε[u] = u_t - εΔ(u^m) + ∇·(u∇v^ε) - ε⁻¹u(1-u)` of
//! piecewise smooth space-time functions.

use std::cell::Cell;

use crate::model::{ChemoFieldSpec, Params, Point};

/// Finite-difference step; each derivative is Richardson-extrapolated from
/// this step and its half.
pub const FD_STEP: f64 = 1e-5;

/// Tag of the smooth piece a point falls in. Stencils mixing tags are
/// skipped.
pub type Region = u32;

/// A space-time function that is smooth inside each tagged region.
pub trait SpaceTime: Sync {
    fn eval(&self, t: f64, x: Point) -> (f64, Region);
}

impl<F> SpaceTime for F
where
    F: Fn(f64, Point) -> (f64, Region) + Sync,
{
    fn eval(&self, t: f64, x: Point) -> (f64, Region) {
        self(t, x)
    }
}

#[inline]
fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// `L^ε[u](t, x)`, or `None` when the stencil crosses a region boundary.
pub fn residual_pde<F: SpaceTime + ?Sized>(
    u: &F,
    params: &Params,
    chemo: &ChemoFieldSpec,
    t: f64,
    x: Point,
) -> Option<f64> {
    let eps = params.epsilon;
    let m = params.m;
    let dim = params.domain.dim;
    let (u0, r0) = u.eval(t, x);
    let smooth = Cell::new(true);
    let at = |s: f64, y: Point| {
        let (v, r) = u.eval(s, y);
        if r != r0 {
            smooth.set(false);
        }
        v
    };
    let k = FD_STEP;
    let dt = |h: f64| (at(t + h, x) - at(t - h, x)) / (2.0 * h);
    let ut = richardson(dt(k), dt(0.5 * k));
    let w0 = u0.powf(m);
    let mut lap_w = 0.0;
    let mut grad_u = [0.0; 2];
    for axis in 0..dim {
        let shift = |h: f64| {
            let mut y = x;
            y[axis] += h;
            y
        };
        let mut first = [0.0; 2];
        let mut second = [0.0; 2];
        for (slot, h) in [k, 0.5 * k].into_iter().enumerate() {
            let up = at(t, shift(h));
            let um = at(t, shift(-h));
            first[slot] = (up - um) / (2.0 * h);
            second[slot] = (up.powf(m) - 2.0 * w0 + um.powf(m)) / (h * h);
        }
        grad_u[axis] = richardson(first[0], first[1]);
        lap_w += richardson(second[0], second[1]);
    }
    if !smooth.get() {
        return None;
    }
    let v = chemo.eval_drift(eps, t, x);
    let div = grad_u[0] * v.grad[0] + grad_u[1] * v.grad[1] + u0 * v.lap;
    Some(ut - eps * lap_w + div - u0 * (1.0 - u0) / eps)
}
