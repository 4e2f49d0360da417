use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Domain, Point};
use crate::error::{Error, Result};

/// Convex support of the initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum SupportShape {
    Interval { center: f64, half_width: f64 },
    Disk { center: Point, radius: f64 },
    Ellipse { center: Point, semi_axes: [f64; 2] },
}

/// Cap profile as a function of the normalized squared radius `ρ²`, which is
/// 0 at the center and 1 on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CapProfile {
    /// `h (1 - ρ²)`
    #[default]
    Quadratic,
    /// `h cos(π ρ² / 2)`
    Cosine,
}

impl CapProfile {
    fn value(self, r2: f64) -> f64 {
        match self {
            CapProfile::Quadratic => 1.0 - r2,
            CapProfile::Cosine => (0.5 * PI * r2).cos(),
        }
    }

    fn derivative(self, r2: f64) -> f64 {
        match self {
            CapProfile::Quadratic => -1.0,
            CapProfile::Cosine => -0.5 * PI * (0.5 * PI * r2).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub support: SupportShape,
    #[serde(default)]
    pub profile: CapProfile,
    pub height: f64,
    /// Required lower bound on |∂ũ₀/∂n| along the initial interface.
    pub delta_slope: f64,
}

impl SupportShape {
    pub fn dim(&self) -> usize {
        match self {
            SupportShape::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            SupportShape::Interval { center, .. } => [center, 0.0],
            SupportShape::Disk { center, .. } => center,
            SupportShape::Ellipse { center, .. } => center,
        }
    }

    fn axes(&self) -> [f64; 2] {
        match *self {
            SupportShape::Interval { half_width, .. } => [half_width, 1.0],
            SupportShape::Disk { radius, .. } => [radius, radius],
            SupportShape::Ellipse { semi_axes, .. } => semi_axes,
        }
    }

    /// Normalized squared radius and its gradient.
    fn rho2(&self, x: Point) -> (f64, Point) {
        let c = self.center();
        let a = self.axes();
        let dx = [x[0] - c[0], x[1] - c[1]];
        if self.dim() == 1 {
            let r2 = (dx[0] / a[0]).powi(2);
            return (r2, [2.0 * dx[0] / (a[0] * a[0]), 0.0]);
        }
        let r2 = (dx[0] / a[0]).powi(2) + (dx[1] / a[1]).powi(2);
        (r2, [2.0 * dx[0] / (a[0] * a[0]), 2.0 * dx[1] / (a[1] * a[1])])
    }

    pub fn contains(&self, x: Point) -> bool {
        self.rho2(x).0 < 1.0
    }

    /// Distance from `x` to the closed support (0 inside).
    pub fn distance(&self, x: Point) -> f64 {
        self.signed_distance(x).max(0.0)
    }

    /// Signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        let c = self.center();
        match *self {
            SupportShape::Interval { half_width, .. } => (x[0] - c[0]).abs() - half_width,
            SupportShape::Disk { radius, .. } => (x[0] - c[0]).hypot(x[1] - c[1]) - radius,
            SupportShape::Ellipse { semi_axes, .. } => {
                let d = ellipse_distance(semi_axes, [x[0] - c[0], x[1] - c[1]]);
                if self.contains(x) {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// `n` boundary points in counter-clockwise order, with outward unit
    /// normals. In 1D the two endpoints, left first.
    pub fn boundary(&self, n: usize) -> Vec<(Point, Point)> {
        let c = self.center();
        match *self {
            SupportShape::Interval { half_width, .. } => vec![
                ([c[0] - half_width, 0.0], [-1.0, 0.0]),
                ([c[0] + half_width, 0.0], [1.0, 0.0]),
            ],
            _ => {
                let a = self.axes();
                (0..n)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / n as f64;
                        let p = [c[0] + a[0] * th.cos(), c[1] + a[1] * th.sin()];
                        let nx = th.cos() / a[0];
                        let ny = th.sin() / a[1];
                        let l = nx.hypot(ny);
                        (p, [nx / l, ny / l])
                    })
                    .collect()
            }
        }
    }

    /// Smallest distance from the support to the box boundary.
    pub fn clearance(&self, domain: &Domain) -> f64 {
        let c = self.center();
        let a = self.axes();
        (0..domain.dim)
            .map(|d| (c[d] - a[d] - domain.lower[d]).min(domain.upper[d] - c[d] - a[d]))
            .fold(f64::INFINITY, f64::min)
    }
}

impl InitialDataSpec {
    pub fn new(support: SupportShape, profile: CapProfile, height: f64, delta_slope: f64) -> Result<Self> {
        let s = Self {
            support,
            profile,
            height,
            delta_slope,
        };
        s.validate_shape()?;
        Ok(s)
    }

    fn validate_shape(&self) -> Result<()> {
        let a = self.support.axes();
        if !(a[0] > 0.0 && a[1] > 0.0) {
            return Err(Error::InvalidParameter("support radii must be positive".into()));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::InvalidParameter("initial height must be positive".into()));
        }
        if !(self.delta_slope > 0.0) {
            return Err(Error::InvalidParameter("delta_slope must be positive".into()));
        }
        let slope = self.min_normal_slope(360);
        if slope < self.delta_slope {
            return Err(Error::InvalidParameter(format!(
                "boundary slope {slope} is below delta_slope {}",
                self.delta_slope
            )));
        }
        Ok(())
    }

    /// Checks shape, slope and boundary clearance against a domain.
    pub fn validate(&self, domain: &Domain, margin: f64) -> Result<()> {
        self.validate_shape()?;
        if self.support.dim() != domain.dim {
            return Err(Error::InvalidParameter(
                "initial support and domain dimensions differ".into(),
            ));
        }
        let clear = self.support.clearance(domain);
        if clear < margin || clear <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "initial support is {clear} from the boundary, margin {margin} required"
            )));
        }
        Ok(())
    }

    /// `u₀(x)`: the cap inside the support, exactly zero elsewhere.
    pub fn eval(&self, x: Point) -> f64 {
        let (r2, _) = self.support.rho2(x);
        if r2 >= 1.0 {
            0.0
        } else {
            self.height * self.profile.value(r2)
        }
    }

    /// Gradient of the cap `ũ₀` (the smooth interior expression, also valid
    /// on the boundary).
    pub fn cap_gradient(&self, x: Point) -> Point {
        let (r2, g) = self.support.rho2(x);
        let s = self.height * self.profile.derivative(r2);
        [s * g[0], s * g[1]]
    }

    pub fn sup(&self) -> f64 {
        self.height
    }

    /// Minimum of |∂ũ₀/∂n| over `n` boundary samples.
    pub fn min_normal_slope(&self, n: usize) -> f64 {
        self.support
            .boundary(n)
            .into_iter()
            .map(|(p, nrm)| {
                let g = self.cap_gradient(p);
                (g[0] * nrm[0] + g[1] * nrm[1]).abs()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }
}

/// Distance from `p` (relative to the center) to the ellipse with the given
/// semi-axes, by bisection on the Lagrange-multiplier equation.
fn ellipse_distance(semi_axes: [f64; 2], p: Point) -> f64 {
    // Reduce to the first quadrant with e0 >= e1.
    let (e0, e1, y0, y1) = if semi_axes[0] >= semi_axes[1] {
        (semi_axes[0], semi_axes[1], p[0].abs(), p[1].abs())
    } else {
        (semi_axes[1], semi_axes[0], p[1].abs(), p[0].abs())
    };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1) * (e0 / e1);
                let s = root_bisect(r0, z0, z1, g);
                let x0 = r0 * y0 / (s + r0);
                let x1 = y1 / (s + 1.0);
                return (x0 - y0).hypot(x1 - y1);
            }
            return 0.0;
        }
        return (y1 - e1).abs();
    }
    let numer = e0 * y0;
    let denom = e0 * e0 - e1 * e1;
    if numer < denom {
        let xde0 = numer / denom;
        let x0 = e0 * xde0;
        let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
        (x0 - y0).hypot(x1)
    } else {
        (y0 - e0).abs()
    }
}

fn root_bisect(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> InitialDataSpec {
        InitialDataSpec::new(
            SupportShape::Disk {
                center: [0.5, 0.5],
                radius: 0.25,
            },
            CapProfile::Quadratic,
            0.9,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn center_value_is_height() {
        assert!((disk().eval([0.5, 0.5]) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_on_and_outside_boundary() {
        let u0 = disk();
        assert_eq!(u0.eval([0.75, 0.5]), 0.0);
        assert_eq!(u0.eval([0.9, 0.9]), 0.0);
        for (p, _) in u0.support.boundary(64) {
            assert!(u0.eval(p).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_slope_bound() {
        let u0 = disk();
        // |∇ũ₀| on the circle is 2h/R = 7.2.
        assert!((u0.min_normal_slope(360) - 7.2).abs() < 1e-9);
        assert!(InitialDataSpec::new(u0.support, u0.profile, 0.9, 7.5).is_err());
    }

    #[test]
    fn ellipse_distance_against_brute_force() {
        let axes = [0.3, 0.12];
        let shape = SupportShape::Ellipse {
            center: [0.0, 0.0],
            semi_axes: axes,
        };
        let pts: Vec<Point> = (0..20000)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 20000.0;
                [axes[0] * th.cos(), axes[1] * th.sin()]
            })
            .collect();
        for q in [[0.5, 0.2], [0.05, 0.01], [-0.2, 0.3], [0.0, -0.05], [0.31, 0.0], [0.1, 0.0]] {
            let brute = pts
                .iter()
                .map(|p| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            let d = shape.signed_distance(q).abs();
            assert!((d - brute).abs() < 1e-5, "q={q:?}: {d} vs {brute}");
        }
    }

    #[test]
    fn interval_support() {
        let u0 = InitialDataSpec::new(
            SupportShape::Interval {
                center: 1.0,
                half_width: 0.3,
            },
            CapProfile::Cosine,
            1.0,
            0.5,
        )
        .unwrap();
        assert_eq!(u0.eval([1.3, 0.0]), 0.0);
        assert_eq!(u0.eval([0.6, 0.0]), 0.0);
        assert!((u0.eval([1.0, 0.0]) - 1.0).abs() < 1e-15);
        let dom = Domain::interval(0.0, 2.0).unwrap();
        assert!(u0.validate(&dom, 0.5).is_ok());
        assert!(u0.validate(&dom, 0.8).is_err());
    }
}
