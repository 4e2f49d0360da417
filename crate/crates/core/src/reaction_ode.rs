//! The perturbed bistable reaction `f_δ = f̃ + δ` and the flow `Y(τ, ξ; δ)`
//! of `Y_τ = f_δ(Y)`, `Y(0) = ξ`, together with its first two ξ-derivatives.
//!
//! `f̃` is the odd extension of `u(1-u)`: `u(1-u)` for `u >= 0` and
//! `u(1+u)` for `u < 0`.

use crate::error::{Error, Result};
use crate::integrate::{dopri45, rk4_fixed, Tolerance};

/// Default bound on |δ| for which bistability is assumed.
pub const DEFAULT_DELTA0: f64 = 0.1;

/// Odd extension of `u(1-u)`.
#[inline]
pub fn f_tilde(u: f64) -> f64 {
    if u >= 0.0 {
        u * (1.0 - u)
    } else {
        u * (1.0 + u)
    }
}

#[inline]
pub fn f_tilde_prime(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 - 2.0 * u
    } else {
        1.0 + 2.0 * u
    }
}

#[inline]
pub fn f_tilde_second(u: f64) -> f64 {
    if u >= 0.0 {
        -2.0
    } else {
        2.0
    }
}

/// `f_δ(u) = f̃(u) + δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedReaction {
    pub delta: f64,
    pub delta0: f64,
}

/// The three zeros of `f_δ` and the slope at the unstable one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionZeros {
    pub a_minus: f64,
    pub a: f64,
    pub a_plus: f64,
    pub mu: f64,
}

/// Values of `Y` and its ξ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YSolution {
    pub y: f64,
    pub y_xi: f64,
    pub y_xixi: f64,
}

impl PerturbedReaction {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_bound(delta, DEFAULT_DELTA0)
    }

    pub fn with_bound(delta: f64, delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta0 < 0.25) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must lie in (0, 1/4), got {delta0}"
            )));
        }
        if !(delta.abs() < delta0) {
            return Err(Error::PerturbationTooLarge { delta, delta0 });
        }
        Ok(Self { delta, delta0 })
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        f_tilde(u) + self.delta
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        f_tilde_prime(u)
    }

    pub fn zeros(&self) -> ReactionZeros {
        // f_δ is monotone on each bracket: decreasing on [-2, -1/2],
        // increasing on [-1/2, 1/2], decreasing on [1/2, 2].
        let a_minus = bisect(|u| self.f(u), -2.0, -0.5);
        let a = bisect(|u| self.f(u), -0.5, 0.5);
        let a_plus = bisect(|u| self.f(u), 0.5, 2.0);
        ReactionZeros {
            a_minus,
            a,
            a_plus,
            mu: f_tilde_prime(a),
        }
    }

    /// `Y(τ, ξ; δ)` with `Y_ξ`, `Y_ξξ` from the variational equations,
    /// adaptive Dormand-Prince at tolerance 1e-10.
    pub fn solve(&self, tau: f64, xi: f64) -> Result<YSolution> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("tau must be >= 0, got {tau}")));
        }
        let y = dopri45(
            |_, s| self.variational_rhs(s),
            0.0,
            [xi, 1.0, 0.0],
            tau,
            Tolerance {
                atol: 1e-12,
                rtol: 1e-10,
            },
        )?;
        Ok(YSolution {
            y: y[0],
            y_xi: y[1],
            y_xixi: y[2],
        })
    }

    /// Same as [`PerturbedReaction::solve`] but with `steps` fixed RK4 steps;
    /// smooth in (τ, ξ) so it can be finite-differenced.
    pub fn solve_fixed(&self, tau: f64, xi: f64, steps: usize) -> YSolution {
        let y = rk4_fixed(|_, s| self.variational_rhs(s), 0.0, [xi, 1.0, 0.0], tau, steps);
        YSolution {
            y: y[0],
            y_xi: y[1],
            y_xixi: y[2],
        }
    }

    #[inline]
    fn variational_rhs(&self, s: &[f64; 3]) -> [f64; 3] {
        let (y, p, q) = (s[0], s[1], s[2]);
        let d1 = f_tilde_prime(y);
        [
            self.f(y),
            d1 * p,
            f_tilde_second(y) * p * p + d1 * q,
        ]
    }
}

/// `f_δ` zeros for a given δ with the default bound.
pub fn reaction_zeros(delta: f64) -> Result<ReactionZeros> {
    Ok(PerturbedReaction::new(delta)?.zeros())
}

/// `Y(τ, ξ; δ)` with the default bound on δ.
pub fn solve_y(tau: f64, xi: f64, delta: f64) -> Result<YSolution> {
    PerturbedReaction::new(delta)?.solve(tau, xi)
}

/// Bisection to |interval| <= 1e-14 for a function with a sign change.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic(tau: f64, xi: f64) -> f64 {
        xi * tau.exp() / (1.0 - xi + xi * tau.exp())
    }

    #[test]
    fn odd_extension() {
        for u in [0.0, 0.1, 0.7, 1.0, 1.9] {
            assert_eq!(f_tilde(-u), -f_tilde(u));
        }
        assert_eq!(f_tilde_prime(0.0), 1.0);
        assert_eq!(f_tilde_prime(1.0), -1.0);
        assert_eq!(f_tilde_prime(-1.0), -1.0);
    }

    #[test]
    fn unperturbed_zeros() {
        let z = reaction_zeros(0.0).unwrap();
        assert!((z.a_minus + 1.0).abs() < 1e-13);
        assert!(z.a.abs() < 1e-13);
        assert!((z.a_plus - 1.0).abs() < 1e-13);
        assert!((z.mu - 1.0).abs() < 1e-13);
    }

    #[test]
    fn small_perturbation_zeros() {
        // Oracle: plain bisection on f_δ over sign-change brackets.
        let d = 0.01;
        let f = |u: f64| f_tilde(u) + d;
        let oracle = [
            bisect(f, -1.5, -0.6),
            bisect(f, -0.2, 0.2),
            bisect(f, 0.6, 1.5),
        ];
        let z = reaction_zeros(d).unwrap();
        assert!((z.a_minus - oracle[0]).abs() < 1e-12);
        assert!((z.a - oracle[1]).abs() < 1e-12);
        assert!((z.a_plus - oracle[2]).abs() < 1e-12);
        let dev = (z.a_minus + 1.0).abs() + z.a.abs() + (z.a_plus - 1.0).abs();
        assert!(dev <= 0.1, "deviation {dev}");
        for r in [z.a_minus, z.a, z.a_plus] {
            assert!(f(r).abs() < 1e-12);
        }
    }

    #[test]
    fn zeros_are_odd_in_delta() {
        let p = reaction_zeros(0.01).unwrap();
        let m = reaction_zeros(-0.01).unwrap();
        assert!((m.a + p.a).abs() < 1e-13);
        assert!((m.a_minus + p.a_plus).abs() < 1e-13);
    }

    #[test]
    fn rejects_large_perturbation() {
        assert!(matches!(
            reaction_zeros(0.1),
            Err(Error::PerturbationTooLarge { .. })
        ));
        assert!(PerturbedReaction::with_bound(0.2, 0.3).is_err());
    }

    #[test]
    fn initial_condition() {
        let s = solve_y(0.0, 0.37, 0.05).unwrap();
        assert_eq!((s.y, s.y_xi, s.y_xixi), (0.37, 1.0, 0.0));
    }

    #[test]
    fn logistic_closed_form() {
        let s = solve_y(3f64.ln(), 0.5, 0.0).unwrap();
        assert!((s.y - 0.75).abs() < 1e-9);
        for &xi in &[0.01, 0.2, 0.5, 0.9, 0.999] {
            for &tau in &[0.1, 1.0, 4.0, 9.0] {
                let s = solve_y(tau, xi, 0.0).unwrap();
                assert!((s.y - logistic(tau, xi)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equilibrium_stays() {
        for tau in [0.5, 5.0, 30.0] {
            assert!((solve_y(tau, 1.0, 0.0).unwrap().y - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_negative_tau() {
        assert!(solve_y(-1.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn variational_derivatives_match_differences() {
        let r = PerturbedReaction::new(0.04).unwrap();
        let (tau, xi, h) = (2.5, 0.3, 1e-4);
        let s = r.solve(tau, xi).unwrap();
        let p = r.solve(tau, xi + h).unwrap().y;
        let m = r.solve(tau, xi - h).unwrap().y;
        assert!(((p - m) / (2.0 * h) - s.y_xi).abs() < 1e-5 * s.y_xi);
        let pp = r.solve(tau, xi + h).unwrap().y_xi;
        let mm = r.solve(tau, xi - h).unwrap().y_xi;
        assert!(((pp - mm) / (2.0 * h) - s.y_xixi).abs() < 1e-4 * s.y_xixi.abs().max(1.0));
    }

    #[test]
    fn fixed_step_agrees_with_adaptive() {
        let r = PerturbedReaction::new(-0.03).unwrap();
        let a = r.solve(4.0, 0.2).unwrap();
        let b = r.solve_fixed(4.0, 0.2, 4000);
        assert!((a.y - b.y).abs() < 1e-9);
        assert!((a.y_xi - b.y_xi).abs() < 1e-8 * a.y_xi);
    }
}
