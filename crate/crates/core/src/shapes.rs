//! Indicator densities of discs, balls, squares and cubes.
//!
//! A cell belongs to a shape when its centre does; there is no
//! anti-aliasing. Shapes are written `disc:cx,cy,r`, `ball:cx,cy,cz,r`,
//! `square:cx,cy,side` and `cube:cx,cy,cz,side`, and joined with `+` for a
//! union.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{normalize, DensityField, Grid};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disc { center: [f64; 2], radius: f64 },
    Ball { center: [f64; 3], radius: f64 },
    Square { center: [f64; 2], side: f64 },
    Cube { center: [f64; 3], side: f64 },
}

impl Shape {
    pub fn ndim(&self) -> usize {
        match self {
            Shape::Disc { .. } | Shape::Square { .. } => 2,
            Shape::Ball { .. } | Shape::Cube { .. } => 3,
        }
    }

    /// Whether the point `x` (length `ndim`) lies in the closed shape.
    pub fn contains(&self, x: &[f64]) -> bool {
        fn within_radius(c: &[f64], x: &[f64], r: f64) -> bool {
            c.iter().zip(x).map(|(c, x)| (x - c) * (x - c)).sum::<f64>() <= r * r
        }
        fn within_box(c: &[f64], x: &[f64], side: f64) -> bool {
            c.iter().zip(x).all(|(c, x)| (x - c).abs() <= 0.5 * side)
        }
        match self {
            Shape::Disc { center, radius } => within_radius(center, x, *radius),
            Shape::Ball { center, radius } => within_radius(center, x, *radius),
            Shape::Square { center, side } => within_box(center, x, *side),
            Shape::Cube { center, side } => within_box(center, x, *side),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidShape(format!("'{s}' has no ':' before its parameters")))?;
        let v = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::InvalidShape(format!("bad number '{a}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |k: usize| {
            if v.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!(
                    "{name} takes {k} parameters, got {}",
                    v.len()
                )))
            }
        };
        let shape = match name.trim() {
            "disc" => {
                want(3)?;
                Shape::Disc { center: [v[0], v[1]], radius: v[2] }
            }
            "ball" => {
                want(4)?;
                Shape::Ball { center: [v[0], v[1], v[2]], radius: v[3] }
            }
            "square" => {
                want(3)?;
                Shape::Square { center: [v[0], v[1]], side: v[2] }
            }
            "cube" => {
                want(4)?;
                Shape::Cube { center: [v[0], v[1], v[2]], side: v[3] }
            }
            other => return Err(Error::InvalidShape(format!("unknown shape '{other}'"))),
        };
        let size = match &shape {
            Shape::Disc { radius, .. } | Shape::Ball { radius, .. } => *radius,
            Shape::Square { side, .. } | Shape::Cube { side, .. } => *side,
        };
        if size <= 0.0 {
            return Err(Error::InvalidShape(format!("'{s}' has non-positive size")));
        }
        Ok(shape)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Disc { center: [x, y], radius } => write!(f, "disc:{x},{y},{radius}"),
            Shape::Ball { center: [x, y, z], radius } => write!(f, "ball:{x},{y},{z},{radius}"),
            Shape::Square { center: [x, y], side } => write!(f, "square:{x},{y},{side}"),
            Shape::Cube { center: [x, y, z], side } => write!(f, "cube:{x},{y},{z},{side}"),
        }
    }
}

/// Union of shapes of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeUnion(pub Vec<Shape>);

impl ShapeUnion {
    pub fn ndim(&self) -> usize {
        self.0[0].ndim()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.0.iter().any(|s| s.contains(x))
    }

    /// 0/1 indicator of the union at the cell centres of `grid`.
    pub fn indicator(&self, grid: Grid) -> Result<Vec<f64>> {
        if grid.ndim() != self.ndim() {
            return Err(Error::InvalidShape(format!(
                "{}-dimensional shape on a {}-dimensional grid",
                self.ndim(),
                grid.ndim()
            )));
        }
        let d = grid.ndim();
        let mut out = vec![0.0; grid.len()];
        par::fill_indexed(&mut out, |i| {
            let p = grid.point(i);
            if self.contains(&p[..d]) {
                1.0
            } else {
                0.0
            }
        });
        Ok(out)
    }

    /// Normalised indicator density.
    pub fn density(&self, grid: Grid) -> Result<DensityField> {
        normalize(grid, &self.indicator(grid)?)
    }
}

impl FromStr for ShapeUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let shapes = s
            .split('+')
            .map(str::parse::<Shape>)
            .collect::<Result<Vec<_>>>()?;
        if shapes.iter().any(|x| x.ndim() != shapes[0].ndim()) {
            return Err(Error::InvalidShape(format!("'{s}' mixes 2-D and 3-D shapes")));
        }
        Ok(ShapeUnion(shapes))
    }
}

impl fmt::Display for ShapeUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_roundtrip() {
        for s in [
            "disc:0.25,0.25,0.125",
            "ball:0.5,0.5,0.5,0.2",
            "square:0.5,0.5,0.25",
            "cube:0.25,0.25,0.25,0.125+cube:0.75,0.75,0.75,0.125",
        ] {
            let u: ShapeUnion = s.parse().unwrap();
            assert_eq!(u.to_string(), s);
        }
        assert!("disc:0.5,0.5".parse::<ShapeUnion>().is_err());
        assert!("disc:0.5,0.5,-1".parse::<ShapeUnion>().is_err());
        assert!("blob:1,2,3".parse::<ShapeUnion>().is_err());
        assert!("disc:0.5,0.5,0.1+ball:0.5,0.5,0.5,0.1".parse::<ShapeUnion>().is_err());
    }

    #[test]
    fn disc_marks_cells_by_centre() {
        let g = Grid::cube(2, 64).unwrap();
        let u: ShapeUnion = "disc:0.25,0.25,0.125".parse().unwrap();
        let ind = u.indicator(g).unwrap();
        for i in 0..g.len() {
            let p = g.point(i);
            let r2 = (p[0] - 0.25).powi(2) + (p[1] - 0.25).powi(2);
            assert_eq!(ind[i] == 1.0, r2 <= 0.125 * 0.125);
        }
    }

    #[test]
    fn square_cell_count_is_exact() {
        let g = Grid::cube(2, 64).unwrap();
        let u: ShapeUnion = "square:0.5,0.5,0.25".parse().unwrap();
        let count: f64 = u.indicator(g).unwrap().iter().sum();
        assert_eq!(count, 16.0 * 16.0);
        assert!(u.indicator(Grid::cube(3, 8).unwrap()).is_err());
    }
}
