use serde::{Deserialize, Serialize};

use super::{norm, sub, Point};
use crate::error::{Error, Result};

/// Time modulation of a bump amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Envelope {
    #[default]
    Constant,
    Exponential {
        rate: f64,
    },
    Cosine {
        omega: f64,
    },
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Exponential { rate } => (rate * t).exp(),
            Envelope::Cosine { omega } => (omega * t).cos(),
        }
    }

    fn sup_abs(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Exponential { .. } => self.at(t0).abs().max(self.at(t1).abs()),
            Envelope::Cosine { .. } => 1.0,
        }
    }
}

/// One compactly supported bump
/// `A·env(t)·exp(-q/(1-q))` with `q = |x - c|²/s²`, zero for `q >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemoTerm {
    pub amplitude: f64,
    pub center: Point,
    pub width: f64,
    #[serde(default)]
    pub envelope: Envelope,
}

/// Value, gradient and Laplacian of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChemoEval {
    pub value: f64,
    pub grad: Point,
    pub lap: f64,
}

impl ChemoEval {
    fn add_scaled(&mut self, other: &ChemoEval, s: f64) {
        self.value += s * other.value;
        self.grad[0] += s * other.grad[0];
        self.grad[1] += s * other.grad[1];
        self.lap += s * other.lap;
    }
}

// Radial profile g(q) = exp(-q/(1-q)) and its q-derivatives.
#[inline]
fn profile(q: f64) -> (f64, f64, f64) {
    if q >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 - q;
    let g = (-q / w).exp();
    let w2 = w * w;
    let g1 = -g / w2;
    let g2 = g * (2.0 * q - 1.0) / (w2 * w2);
    (g, g1, g2)
}

impl ChemoTerm {
    pub fn eval(&self, dim: usize, t: f64, x: Point) -> ChemoEval {
        let s2 = self.width * self.width;
        let mut dx = sub(x, self.center);
        if dim == 1 {
            dx[1] = 0.0;
        }
        let r2 = dx[0] * dx[0] + dx[1] * dx[1];
        let q = r2 / s2;
        if q >= 1.0 {
            return ChemoEval::default();
        }
        let a = self.amplitude * self.envelope.at(t);
        let (g, g1, g2) = profile(q);
        // ∇q = 2 dx / s², |∇q|² = 4q/s², Δq = 2N/s².
        let gq = [2.0 * dx[0] / s2, 2.0 * dx[1] / s2];
        ChemoEval {
            value: a * g,
            grad: [a * g1 * gq[0], a * g1 * gq[1]],
            lap: a * (g2 * 4.0 * q / s2 + g1 * 2.0 * dim as f64 / s2),
        }
    }

    /// Hessian `[[v_xx, v_xy], [v_xy, v_yy]]`; in 1D only `v_xx` is nonzero.
    pub fn hessian(&self, dim: usize, t: f64, x: Point) -> [[f64; 2]; 2] {
        let s2 = self.width * self.width;
        let mut dx = sub(x, self.center);
        if dim == 1 {
            dx[1] = 0.0;
        }
        let q = (dx[0] * dx[0] + dx[1] * dx[1]) / s2;
        if q >= 1.0 {
            return [[0.0; 2]; 2];
        }
        let a = self.amplitude * self.envelope.at(t);
        let (_, g1, g2) = profile(q);
        let gq = [2.0 * dx[0] / s2, 2.0 * dx[1] / s2];
        let mut h = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                let delta = if i == j { 2.0 / s2 } else { 0.0 };
                h[i][j] = a * (g2 * gq[i] * gq[j] + g1 * delta);
            }
        }
        h
    }

    /// Sup over space of (|∇|, |Δ|) of the unit-envelope bump, from a dense
    /// radial scan.
    fn radial_bounds(&self, dim: usize) -> (f64, f64) {
        let s2 = self.width * self.width;
        let n = 4000;
        let mut gmax = 0.0f64;
        let mut lmax = 0.0f64;
        for k in 0..=n {
            let q = k as f64 / n as f64;
            let (_, g1, g2) = profile(q);
            let r = q.sqrt() * self.width;
            gmax = gmax.max((g1 * 2.0 * r / s2).abs());
            lmax = lmax.max((g2 * 4.0 * q / s2 + g1 * 2.0 * dim as f64 / s2).abs());
        }
        // The scan can miss the exact extremum between samples.
        (
            1.001 * gmax * self.amplitude.abs(),
            1.001 * lmax * self.amplitude.abs(),
        )
    }
}

/// Analytic description of the chemoattractant `v` and its perturbation
/// `v₁^ε`; the drift field is `v^ε = v + ε v₁^ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemoFieldSpec {
    pub dim: usize,
    pub outer_center: Point,
    pub outer_radius: f64,
    #[serde(default)]
    pub base: Vec<ChemoTerm>,
    #[serde(default)]
    pub perturbation: Vec<ChemoTerm>,
}

impl ChemoFieldSpec {
    /// The zero field.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            outer_center: [0.0; 2],
            outer_radius: f64::INFINITY,
            base: Vec::new(),
            perturbation: Vec::new(),
        }
    }

    pub fn new(
        dim: usize,
        outer_center: Point,
        outer_radius: f64,
        base: Vec<ChemoTerm>,
        perturbation: Vec<ChemoTerm>,
    ) -> Result<Self> {
        let spec = Self {
            dim,
            outer_center,
            outer_radius,
            base,
            perturbation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::InvalidParameter("chemo dimension must be 1 or 2".into()));
        }
        if !(self.outer_radius > 0.0) {
            return Err(Error::InvalidParameter("outer radius must be positive".into()));
        }
        for term in self.base.iter().chain(&self.perturbation) {
            if !(term.width > 0.0) || !term.amplitude.is_finite() {
                return Err(Error::InvalidParameter(
                    "bump width must be positive and amplitude finite".into(),
                ));
            }
            let mut off = sub(term.center, self.outer_center);
            if self.dim == 1 {
                off[1] = 0.0;
            }
            if !(norm(off) + term.width < self.outer_radius) {
                return Err(Error::InvalidParameter(format!(
                    "bump at {:?} (width {}) is not strictly inside the outer ball",
                    term.center, term.width
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.base.iter().all(|t| t.amplitude == 0.0)
            && self.perturbation.iter().all(|t| t.amplitude == 0.0)
    }

    /// True when neither `v` nor `v₁` depends on time.
    pub fn is_steady(&self) -> bool {
        self.base
            .iter()
            .chain(&self.perturbation)
            .all(|t| t.envelope == Envelope::Constant)
    }

    fn outside(&self, x: Point) -> bool {
        let mut off = sub(x, self.outer_center);
        if self.dim == 1 {
            off[1] = 0.0;
        }
        norm(off) >= self.outer_radius
    }

    fn sum(&self, terms: &[ChemoTerm], t: f64, x: Point) -> ChemoEval {
        let mut acc = ChemoEval::default();
        if self.outside(x) {
            return acc;
        }
        for term in terms {
            acc.add_scaled(&term.eval(self.dim, t, x), 1.0);
        }
        acc
    }

    /// `v(t, x)` with its gradient and Laplacian.
    pub fn eval(&self, t: f64, x: Point) -> ChemoEval {
        self.sum(&self.base, t, x)
    }

    /// Hessian of `v(t, x)`.
    pub fn hessian(&self, t: f64, x: Point) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        if self.outside(x) {
            return h;
        }
        for term in &self.base {
            let th = term.hessian(self.dim, t, x);
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += th[i][j];
                }
            }
        }
        h
    }

    /// `v₁^ε(t, x)` with its gradient and Laplacian.
    pub fn eval_perturbation(&self, t: f64, x: Point) -> ChemoEval {
        self.sum(&self.perturbation, t, x)
    }

    /// The drift potential `v^ε = v + ε v₁^ε`.
    pub fn eval_drift(&self, epsilon: f64, t: f64, x: Point) -> ChemoEval {
        let mut e = self.eval(t, x);
        if !self.perturbation.is_empty() {
            e.add_scaled(&self.eval_perturbation(t, x), epsilon);
        }
        e
    }

    /// Upper bounds on sup |∇v^ε| and sup |Δv^ε| over all space and `t ∈ [t0, t1]`.
    pub fn drift_bounds(&self, epsilon: f64, t0: f64, t1: f64) -> (f64, f64) {
        let mut g = 0.0;
        let mut l = 0.0;
        for (terms, w) in [(&self.base, 1.0), (&self.perturbation, epsilon)] {
            for term in terms.iter() {
                let (tg, tl) = term.radial_bounds(self.dim);
                let env = term.envelope.sup_abs(t0, t1);
                g += w * env * tg;
                l += w * env * tl;
            }
        }
        (g, l)
    }

    /// Sup of |v₁| + |∇v₁| + |Δv₁| over the given points and times.
    pub fn perturbation_magnitude(&self, times: &[f64], points: &[Point]) -> f64 {
        let mut sup = 0.0f64;
        for &t in times {
            for &x in points {
                let e = self.eval_perturbation(t, x);
                sup = sup.max(e.value.abs() + norm(e.grad) + e.lap.abs());
            }
        }
        sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump(dim: usize) -> ChemoFieldSpec {
        ChemoFieldSpec::new(
            dim,
            [0.5, 0.5],
            3.0,
            vec![ChemoTerm {
                amplitude: 0.7,
                center: [0.4, 0.6],
                width: 0.35,
                envelope: Envelope::Cosine { omega: 2.0 },
            }],
            vec![ChemoTerm {
                amplitude: -0.2,
                center: [0.7, 0.3],
                width: 0.25,
                envelope: Envelope::Constant,
            }],
        )
        .unwrap()
    }

    #[test]
    fn empty_spec_is_zero_everywhere() {
        let spec = ChemoFieldSpec::zero(2);
        let e = spec.eval(1.3, [0.2, -4.0]);
        assert_eq!(e, ChemoEval::default());
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let spec = ChemoFieldSpec::new(
            2,
            [0.0; 2],
            2.0,
            vec![ChemoTerm {
                amplitude: 1.3,
                center: [0.1, -0.2],
                width: 0.5,
                envelope: Envelope::Constant,
            }],
            vec![],
        )
        .unwrap();
        let e = spec.eval(0.0, [0.1, -0.2]);
        assert_eq!(e.grad, [0.0, 0.0]);
        assert!((e.value - 1.3).abs() < 1e-15);
    }

    fn fd_check(spec: &ChemoFieldSpec, richardson: bool, rtol: f64, seed: u64) {
        let dim = spec.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-4;
        let mut checked = 0;
        while checked < 10 {
            let x = [
                rng.gen_range(0.1..0.9),
                if dim == 2 { rng.gen_range(0.2..0.9) } else { 0.0 },
            ];
            let t = rng.gen_range(0.0..1.0);
            let e = spec.eval(t, x);
            if e.value.abs() < 1e-3 {
                continue;
            }
            let f = |p: Point| spec.eval(t, p).value;
            let central = |d: usize, h: f64| {
                let mut xp = x;
                let mut xm = x;
                xp[d] += h;
                xm[d] -= h;
                ((f(xp) - f(xm)) / (2.0 * h), (f(xp) - 2.0 * f(x) + f(xm)) / (h * h))
            };
            let mut lap = 0.0;
            for d in 0..dim {
                let (g, l) = if richardson {
                    let (g1, l1) = central(d, h);
                    let (g2, l2) = central(d, 0.5 * h);
                    ((4.0 * g2 - g1) / 3.0, (4.0 * l2 - l1) / 3.0)
                } else {
                    central(d, h)
                };
                assert!(
                    (g - e.grad[d]).abs() <= rtol * e.grad[d].abs().max(1e-2),
                    "grad[{d}] {} vs fd {}",
                    e.grad[d],
                    g
                );
                lap += l;
            }
            assert!(
                (lap - e.lap).abs() <= rtol * e.lap.abs().max(1.0),
                "lap {} vs fd {}",
                e.lap,
                lap
            );
            checked += 1;
        }
    }

    #[test]
    fn single_bump_matches_central_differences() {
        for dim in [1usize, 2] {
            let spec = ChemoFieldSpec::new(
                dim,
                [0.5, 0.5],
                4.0,
                vec![ChemoTerm {
                    amplitude: 0.8,
                    center: [0.45, 0.55],
                    width: 1.0,
                    envelope: Envelope::Constant,
                }],
                vec![],
            )
            .unwrap();
            fd_check(&spec, false, 1e-6, 3);
        }
    }

    #[test]
    fn compound_field_matches_extrapolated_differences() {
        for dim in [1usize, 2] {
            fd_check(&bump(dim), true, 1e-6, 11);
        }
    }

    #[test]
    fn hessian_trace_is_laplacian() {
        let spec = bump(2);
        for x in [[0.35, 0.55], [0.5, 0.7], [0.2, 0.5]] {
            let h = spec.hessian(0.3, x);
            let e = spec.eval(0.3, x);
            assert!((h[0][0] + h[1][1] - e.lap).abs() < 1e-12 * e.lap.abs().max(1.0));
            assert_eq!(h[0][1], h[1][0]);
            // Column of the Hessian against differences of the gradient.
            let d = 1e-5;
            let gp = spec.eval(0.3, [x[0], x[1] + d]).grad;
            let gm = spec.eval(0.3, [x[0], x[1] - d]).grad;
            assert!(((gp[0] - gm[0]) / (2.0 * d) - h[0][1]).abs() < 1e-5 * h[0][1].abs().max(1.0));
            assert!(((gp[1] - gm[1]) / (2.0 * d) - h[1][1]).abs() < 1e-5 * h[1][1].abs().max(1.0));
        }
    }

    #[test]
    fn vanishes_outside_supports_and_outer_ball() {
        let spec = bump(2);
        assert_eq!(spec.eval(0.3, [5.0, 5.0]), ChemoEval::default());
        assert_eq!(spec.eval(0.3, [0.4 + 0.35, 0.6]), ChemoEval::default());
        assert_eq!(spec.eval_perturbation(0.3, [2.0, 0.3]), ChemoEval::default());
    }

    #[test]
    fn rejects_terms_crossing_outer_ball() {
        let r = ChemoFieldSpec::new(
            1,
            [0.0; 2],
            1.0,
            vec![ChemoTerm {
                amplitude: 1.0,
                center: [0.8, 0.0],
                width: 0.3,
                envelope: Envelope::Constant,
            }],
            vec![],
        );
        assert!(r.is_err());
    }

    #[test]
    fn bounds_dominate_samples() {
        let spec = bump(2);
        let (g, l) = spec.drift_bounds(0.05, 0.0, 1.0);
        for i in 0..60 {
            for j in 0..60 {
                let x = [i as f64 / 59.0, j as f64 / 59.0];
                let e = spec.eval_drift(0.05, 0.4, x);
                assert!(norm(e.grad) <= g && e.lap.abs() <= l);
            }
        }
    }
}
