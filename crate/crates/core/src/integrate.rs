//! Small explicit ODE integrators over fixed-size states.
//!
//! `dopri45` is an adaptive Dormand-Prince 5(4) pair with mixed
//! absolute/relative error control. `rk4_fixed` takes a prescribed number of
//! classical Runge-Kutta steps; because the step count does not depend on the
//! data, its output is a smooth function of the initial state, which matters
//! when it is finite-differenced.

use crate::error::{Error, Result};

/// Outcome of an adaptive integration that may stop early on an event.
#[derive(Debug, Clone, Copy)]
pub struct Stop<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// `true` when the stop predicate fired before reaching the end time.
    pub event: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub const fn uniform(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
        }
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

// Dormand-Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
pub fn dopri45<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    dopri45_until(rhs, t0, y0, t1, tol, |_, _| false).map(|s| s.y)
}

/// Adaptive integration that stops at the first accepted step whose end
/// state satisfies `stop`. The returned state is that step's end point, not a
/// located root.
pub fn dopri45_until<const N: usize, F, S>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerance,
    mut stop: S,
) -> Result<Stop<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> bool,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Stop {
            t: t0,
            y: y0,
            event: false,
        });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() * 1e-3).clamp(1e-12, 1e-2);
    let mut k1 = rhs(t, &y);
    let h_min = span.abs() * 1e-15;
    let mut steps = 0usize;

    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > 5_000_000 {
            return Err(Error::Domain(format!(
                "adaptive integrator exceeded step budget at t = {t}"
            )));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = rhs(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            if h.abs() < h_min {
                return Err(Error::Domain(format!(
                    "non-finite state in adaptive integrator at t = {t}"
                )));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            if stop(t, &y) {
                return Ok(Stop { t, y, event: true });
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < h_min {
                return Err(Error::Domain(format!(
                    "adaptive step underflow at t = {t}"
                )));
            }
        }
    }
    Ok(Stop {
        t,
        y,
        event: false,
    })
}

/// `n` classical RK4 steps from `t0` to `t1`.
pub fn rk4_fixed<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let n = n.max(1);
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..n {
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]));
        let k3 = rhs(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]));
        let k4 = rhs(t + h, &axpy(&y, h, &[(1.0, &k3)]));
        y = axpy(
            &y,
            h,
            &[
                (1.0 / 6.0, &k1),
                (1.0 / 3.0, &k2),
                (1.0 / 3.0, &k3),
                (1.0 / 6.0, &k4),
            ],
        );
        t += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let y = dopri45(|_, y| [-y[0]], 0.0, [1.0], 3.0, Tolerance::uniform(1e-12)).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -y[0] + 0.1 * t.sin()];
        let tol = Tolerance::uniform(1e-12);
        let fwd = dopri45(rhs, 0.0, [1.0, 0.0], 2.0, tol).unwrap();
        let back = dopri45(rhs, 2.0, fwd, 0.0, tol).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn event_stops_early() {
        let s = dopri45_until(
            |_, _| [1.0],
            0.0,
            [0.0],
            10.0,
            Tolerance::uniform(1e-10),
            |_, y| y[0] > 2.0,
        )
        .unwrap();
        assert!(s.event && s.t < 10.0 && s.y[0] > 2.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = (1.0f64).exp();
        let e1 = (rk4_fixed(|_, y| [y[0]], 0.0, [1.0], 1.0, 10)[0] - exact).abs();
        let e2 = (rk4_fixed(|_, y| [y[0]], 0.0, [1.0], 1.0, 20)[0] - exact).abs();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
    }
}
