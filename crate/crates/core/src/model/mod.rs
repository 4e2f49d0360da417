//! Problem parameters, analytic chemotactic fields and initial data.

mod chemo;
mod grid;
mod initial;
mod params;

pub use chemo::{ChemoEval, ChemoFieldSpec, ChemoTerm, Envelope};
pub use grid::{Boundary, Grid, ScalarField};
pub use initial::{CapProfile, InitialDataSpec, SupportShape};
pub use params::{Domain, Params};

/// Points are stored in two components; one-dimensional problems use `x[0]`
/// and keep `x[1] = 0`.
pub type Point = [f64; 2];

#[inline]
pub(crate) fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}
