use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Axis-aligned box in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub dim: usize,
    pub lower: Point,
    pub upper: Point,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(1, [a, 0.0], [b, 0.0])
    }

    pub fn rectangle(lower: Point, upper: Point) -> Result<Self> {
        Self::new(2, lower, upper)
    }

    pub fn new(dim: usize, lower: Point, upper: Point) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        for d in 0..dim {
            if !(upper[d] > lower[d]) || !lower[d].is_finite() || !upper[d].is_finite() {
                return Err(Error::InvalidParameter(
                    "domain box must have positive volume".into(),
                ));
            }
        }
        let mut lower = lower;
        let mut upper = upper;
        if dim == 1 {
            lower[1] = 0.0;
            upper[1] = 0.0;
        }
        Ok(Self { dim, lower, upper })
    }

    pub fn side(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim).map(|d| self.side(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: Point) -> bool {
        (0..self.dim).all(|d| x[d] >= self.lower[d] && x[d] <= self.upper[d])
    }

    /// Distance from an interior point to the boundary of the box.
    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        (0..self.dim)
            .map(|d| (x[d] - self.lower[d]).min(self.upper[d] - x[d]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scalar parameters of the ε-problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub epsilon: f64,
    pub m: f64,
    pub t_final: f64,
    pub eta: f64,
    pub domain: Domain,
    /// Required clearance between the initial support and the box boundary.
    pub boundary_margin: f64,
}

impl Params {
    pub fn new(
        epsilon: f64,
        m: f64,
        t_final: f64,
        eta: f64,
        domain: Domain,
        boundary_margin: f64,
    ) -> Result<Self> {
        let p = Self {
            epsilon,
            m,
            t_final,
            eta,
            domain,
            boundary_margin,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.m >= 2.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "m must be >= 2, got {}",
                self.m
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1/2), got {}",
                self.eta
            )));
        }
        if !(self.boundary_margin >= 0.0) {
            return Err(Error::InvalidParameter("boundary margin must be >= 0".into()));
        }
        Domain::new(self.domain.dim, self.domain.lower, self.domain.upper)?;
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut p = *self;
        p.epsilon = epsilon;
        p.validate()?;
        Ok(p)
    }

    /// Generation time ε|ln ε|.
    pub fn generation_time(&self) -> f64 {
        generation_time(self.epsilon)
    }
}

pub(crate) fn generation_time(epsilon: f64) -> f64 {
    epsilon * epsilon.ln().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Params::new(0.0, 2.0, 1.0, 0.1, unit(), 0.0).is_err());
        assert!(Params::new(0.1, 1.5, 1.0, 0.1, unit(), 0.0).is_err());
        assert!(Params::new(0.1, 2.0, 1.0, 0.5, unit(), 0.0).is_err());
        assert!(Params::new(0.1, 2.0, 1.0, 0.0, unit(), 0.0).is_err());
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::new(3, [0.0; 2], [1.0; 2]).is_err());
        assert!(Params::new(0.1, 2.0, 1.0, 0.25, unit(), 0.05).is_ok());
    }

    #[test]
    fn generation_time_value() {
        let p = Params::new(0.01, 2.0, 1.0, 0.1, unit(), 0.0).unwrap();
        assert!((p.generation_time() - 0.01 * 100f64.ln()).abs() < 1e-15);
    }
}
