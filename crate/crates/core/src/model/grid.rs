use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Domain, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    NoFlux,
    FreeSpace,
}

/// Cell-centered uniform grid on a box. In 1D, `ny == 1` and `dy == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: Point,
}

impl Grid {
    pub fn new(domain: &Domain, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.dim || cells.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter(format!(
                "grid needs {} cell counts >= 2, got {cells:?}",
                domain.dim
            )));
        }
        let nx = cells[0];
        let ny = if domain.dim == 2 { cells[1] } else { 1 };
        Ok(Self {
            dim: domain.dim,
            nx,
            ny,
            dx: domain.side(0) / nx as f64,
            dy: if domain.dim == 2 {
                domain.side(1) / ny as f64
            } else {
                0.0
            },
            origin: domain.lower,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.dx,
            if self.dim == 2 {
                self.origin[1] + (j as f64 + 0.5) * self.dy
            } else {
                0.0
            },
        ]
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.center(i, j)))
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 2 {
            self.dx * self.dy
        } else {
            self.dx
        }
    }

    /// Smallest spacing.
    pub fn h(&self) -> f64 {
        if self.dim == 2 {
            self.dx.min(self.dy)
        } else {
            self.dx
        }
    }

    pub fn domain(&self) -> Domain {
        let upper = [
            self.origin[0] + self.nx as f64 * self.dx,
            self.origin[1] + self.ny as f64 * self.dy,
        ];
        Domain {
            dim: self.dim,
            lower: self.origin,
            upper: if self.dim == 2 {
                upper
            } else {
                [upper[0], 0.0]
            },
        }
    }
}

/// Cell-centered values with a boundary-condition tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub bc: Boundary,
}

impl ScalarField {
    pub fn from_fn<F: FnMut(Point) -> f64>(grid: Grid, bc: Boundary, mut f: F) -> Self {
        let values = grid.centers().map(&mut f).collect();
        Self { grid, values, bc }
    }

    pub fn constant(grid: Grid, bc: Boundary, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
            bc,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Text dump: header `N nx [ny] dx [dy] t`, then one row of values per
    /// grid row (row-major, x fastest).
    pub fn to_text(&self, t: f64) -> String {
        let g = &self.grid;
        let mut s = String::new();
        if g.dim == 2 {
            let _ = writeln!(s, "2 {} {} {:e} {:e} {:e}", g.nx, g.ny, g.dx, g.dy, t);
        } else {
            let _ = writeln!(s, "1 {} {:e} {:e}", g.nx, g.dx, t);
        }
        for j in 0..g.ny {
            let row: Vec<String> = (0..g.nx).map(|i| format!("{:e}", self.at(i, j))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses a dump written by [`ScalarField::to_text`]; the origin is taken
    /// from the caller since the header does not carry it.
    pub fn from_text(text: &str, origin: Point) -> Result<(Self, f64)> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<&str> {
            tokens
                .next()
                .ok_or_else(|| Error::Config(format!("field dump truncated at {what}")))
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|e| Error::Config(format!("bad count {s:?}: {e}")))
        };
        let dim = parse_u(next("dimension")?)?;
        let (nx, ny, dx, dy, t) = match dim {
            1 => {
                let nx = parse_u(next("nx")?)?;
                let dx = parse_f(next("dx")?)?;
                let t = parse_f(next("t")?)?;
                (nx, 1, dx, 0.0, t)
            }
            2 => {
                let nx = parse_u(next("nx")?)?;
                let ny = parse_u(next("ny")?)?;
                let dx = parse_f(next("dx")?)?;
                let dy = parse_f(next("dy")?)?;
                let t = parse_f(next("t")?)?;
                (nx, ny, dx, dy, t)
            }
            _ => return Err(Error::Config(format!("bad dimension {dim}"))),
        };
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            values.push(parse_f(next("values")?)?);
        }
        let grid = Grid {
            dim,
            nx,
            ny,
            dx,
            dy,
            origin,
        };
        Ok((
            Self {
                grid,
                values,
                bc: Boundary::NoFlux,
            },
            t,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centers_and_volume() {
        let d = Domain::rectangle([0.0, -1.0], [1.0, 1.0]).unwrap();
        let g = Grid::new(&d, &[4, 8]).unwrap();
        assert_eq!(g.center(0, 0), [0.125, -0.875]);
        assert!((g.cell_volume() - 0.0625).abs() < 1e-15);
        assert_eq!(g.domain(), d);
    }

    #[test]
    fn dump_header_layout() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let g = Grid::new(&d, &[3]).unwrap();
        let f = ScalarField::constant(g, Boundary::NoFlux, 0.5);
        let text = f.to_text(0.25);
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(header.len(), 4);
        assert_eq!(header[0], "1");
        assert_eq!(header[1], "3");
        assert_eq!(lines.next().unwrap().split_whitespace().count(), 3);
    }

    proptest! {
        #[test]
        fn dump_roundtrip(vals in proptest::collection::vec(-1e3f64..1e3, 12), t in 0.0f64..10.0) {
            let d = Domain::rectangle([0.0, 0.0], [2.0, 1.0]).unwrap();
            let g = Grid::new(&d, &[4, 3]).unwrap();
            let f = ScalarField { grid: g, values: vals, bc: Boundary::NoFlux };
            let (back, tb) = ScalarField::from_text(&f.to_text(t), g.origin).unwrap();
            prop_assert_eq!(back.values, f.values);
            prop_assert_eq!(tb, t);
            prop_assert_eq!(back.grid, g);
        }
    }
}
