//! Lagrangian flow `Φ(t₁, t₂, x)` of `dX/dt = ∇v(t, X)`, its Jacobian
//! `D₃Φ`, and interfaces carried by it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;
use crate::integrate::rk4_fixed;
use crate::model::{ChemoFieldSpec, Params, Point, SupportShape};

pub type Jacobian = [[f64; 2]; 2];

/// Default flow step.
pub const DEFAULT_DT_FLOW: f64 = 1e-3;

/// Default marker count for 2D interfaces.
pub const DEFAULT_MARKERS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub chemo: ChemoFieldSpec,
    pub dt_flow: f64,
}

impl FlowMap {
    pub fn new(chemo: ChemoFieldSpec, dt_flow: f64) -> Result<Self> {
        if !(dt_flow > 0.0) {
            return Err(Error::InvalidParameter("dt_flow must be positive".into()));
        }
        Ok(Self { chemo, dt_flow })
    }

    /// RK4 step count used between `t1` and `t2`.
    pub fn steps_for(&self, t1: f64, t2: f64) -> usize {
        ((t1 - t2).abs() / self.dt_flow).ceil().max(1.0) as usize
    }

    /// `Φ(t1, t2, x3)` and `D₃Φ(t1, t2, x3)`.
    pub fn advance(&self, t1: f64, t2: f64, x3: Point) -> (Point, Jacobian) {
        self.advance_steps(t1, t2, x3, self.steps_for(t1, t2))
    }

    /// Same as [`FlowMap::advance`] with a prescribed number of steps.
    pub fn advance_steps(&self, t1: f64, t2: f64, x3: Point, steps: usize) -> (Point, Jacobian) {
        if t1 == t2 || self.chemo.is_zero() {
            return (x3, [[1.0, 0.0], [0.0, 1.0]]);
        }
        let dim = self.chemo.dim;
        let y = rk4_fixed(
            |t, s: &[f64; 6]| {
                let x = [s[0], s[1]];
                let g = self.chemo.eval(t, x).grad;
                let h = self.chemo.hessian(t, x);
                // J' = H J, row-major J = [s2 s3; s4 s5].
                let mut out = [
                    g[0],
                    if dim == 2 { g[1] } else { 0.0 },
                    h[0][0] * s[2] + h[0][1] * s[4],
                    h[0][0] * s[3] + h[0][1] * s[5],
                    h[1][0] * s[2] + h[1][1] * s[4],
                    h[1][0] * s[3] + h[1][1] * s[5],
                ];
                if dim == 1 {
                    out[3] = 0.0;
                    out[4] = 0.0;
                    out[5] = 0.0;
                }
                out
            },
            t2,
            [x3[0], x3[1], 1.0, 0.0, 0.0, 1.0],
            t1,
            steps,
        );
        ([y[0], y[1]], [[y[2], y[3]], [y[4], y[5]]])
    }

    /// `Φ(t1, t2, x3)` without the Jacobian.
    pub fn map(&self, t1: f64, t2: f64, x3: Point) -> Point {
        self.map_steps(t1, t2, x3, self.steps_for(t1, t2))
    }

    pub fn map_steps(&self, t1: f64, t2: f64, x3: Point, steps: usize) -> Point {
        if t1 == t2 || self.chemo.is_zero() {
            return x3;
        }
        let dim = self.chemo.dim;
        
        rk4_fixed(
            |t, s: &[f64; 2]| {
                let g = self.chemo.eval(t, *s).grad;
                [g[0], if dim == 2 { g[1] } else { 0.0 }]
            },
            t2,
            x3,
            t1,
            steps,
        )
    }
}

/// `Φ(t1, t2, x3)` and `D₃Φ` for a flow map.
pub fn advance_flow(map: &FlowMap, t1: f64, t2: f64, x3: Point) -> (Point, Jacobian) {
    map.advance(t1, t2, x3)
}

pub fn determinant(j: &Jacobian) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// A front: in 2D a closed counter-clockwise polyline whose outward normal
/// is the tangent rotated clockwise; in 1D the two endpoints of an interval,
/// left first.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub dim: usize,
    pub points: Vec<Point>,
}

impl Interface {
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        let s = Self { dim, points };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        match self.dim {
            1 => {
                if self.points.len() != 2 || !(self.points[0][0] < self.points[1][0]) {
                    return Err(Error::InvalidParameter(
                        "1D interface needs two ordered endpoints".into(),
                    ));
                }
            }
            2 => {
                if self.points.len() < 3 {
                    return Err(Error::InvalidParameter(
                        "2D interface needs at least three markers".into(),
                    ));
                }
                if geometry::self_intersects(&self.points) {
                    return Err(Error::SelfIntersection { t: f64::NAN });
                }
            }
            _ => return Err(Error::InvalidParameter("interface dimension must be 1 or 2".into())),
        }
        Ok(())
    }

    /// Boundary of an initial support with `n` markers in 2D.
    pub fn from_support(support: &SupportShape, n: usize) -> Self {
        Self {
            dim: support.dim(),
            points: support.boundary(n).into_iter().map(|(p, _)| p).collect(),
        }
    }

    pub fn circle(center: Point, radius: f64, n: usize) -> Self {
        Self::from_support(&SupportShape::Disk { center, radius }, n)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Outward unit normals from central differences along the polyline.
    pub fn normals(&self) -> Vec<Point> {
        if self.dim == 1 {
            return vec![[-1.0, 0.0], [1.0, 0.0]];
        }
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let a = self.points[(k + n - 1) % n];
                let b = self.points[(k + 1) % n];
                let t = [b[0] - a[0], b[1] - a[1]];
                let l = t[0].hypot(t[1]);
                [t[1] / l, -t[0] / l]
            })
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        self.dim == 1 || !geometry::self_intersects(&self.points)
    }

    /// Signed distance to the interface, negative inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        if self.dim == 1 {
            let (a, b) = (self.points[0][0], self.points[1][0]);
            return (a - x[0]).max(x[0] - b);
        }
        let d = geometry::polyline_distance(x, &self.points, true);
        if geometry::inside_polygon(x, &self.points) {
            -d
        } else {
            d
        }
    }

    /// Hausdorff distance between two interfaces of the same dimension.
    pub fn hausdorff(&self, other: &Interface) -> f64 {
        if self.dim == 1 {
            return geometry::hausdorff_points(&self.points, &other.points);
        }
        geometry::hausdorff_closed(&self.points, &other.points)
    }

    /// Arc-length reparametrization when adjacent spacings differ by more
    /// than `max_ratio`.
    pub fn reparametrize_if_needed(&mut self, max_ratio: f64) {
        if self.dim == 2 && geometry::spacing_ratio(&self.points) > max_ratio {
            self.points = geometry::resample_closed(&self.points, self.points.len());
        }
    }

    /// Errors if a marker lies within `margin` of the box boundary.
    pub fn check_inside(&self, params: &Params) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            if !params.domain.contains(*p)
                || params.domain.distance_to_boundary(*p) < params.boundary_margin
            {
                return Err(Error::InterfaceLeftDomain {
                    index,
                    x: p[0],
                    y: p[1],
                });
            }
        }
        Ok(())
    }
}

/// `Γ̃₀^ε = {Φ(t^ε, 0, x) : x ∈ Γ₀}` with `t^ε = ε|ln ε|`.
pub fn drift_interface(gamma0: &Interface, map: &FlowMap, params: &Params) -> Result<Interface> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    let t_eps = params.generation_time();
    let points: Vec<Point> = gamma0
        .points
        .par_iter()
        .map(|&x| map.map(t_eps, 0.0, x))
        .collect();
    let mut out = Interface {
        dim: gamma0.dim,
        points,
    };
    out.check_inside(params)?;
    if !out.is_simple() {
        return Err(Error::SelfIntersection { t: t_eps });
    }
    out.reparametrize_if_needed(3.0);
    Ok(out)
}
