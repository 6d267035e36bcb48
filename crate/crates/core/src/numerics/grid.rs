use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary treatment of a grid axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Points `x_min + i*dx` for `i < n`; `x_max` is identified with `x_min`.
    Periodic,
    /// Points `x_min + i*dx` for `i <= n-1`, both end points included.
    DirichletZero,
}

/// Uniform one-dimensional grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
    boundary: Boundary,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n = {n} is below the minimum of {}",
                Self::MIN_POINTS
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "bounds [{x_min}, {x_max}] do not define a positive interval"
            )));
        }
        Ok(Self {
            n,
            x_min,
            x_max,
            boundary,
        })
    }

    pub fn periodic(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(n, x_min, x_max, Boundary::Periodic)
    }

    pub fn dirichlet(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(n, x_min, x_max, Boundary::DirichletZero)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.length() / self.n as f64,
            Boundary::DirichletZero => self.length() / (self.n - 1) as f64,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order for a periodic axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as isize;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < (n + 1) / 2 { j } else { j - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Same grid with a different point count (bounds and boundary unchanged).
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.x_min, self.x_max, self.boundary)
    }
}

/// Tensor-product grid over the two-particle configuration space `(x1, x2)`.
///
/// Storage is row-major with `x1` as the outer (slow) index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub axis1: Grid1D,
    pub axis2: Grid1D,
}

impl Grid2D {
    pub fn new(axis1: Grid1D, axis2: Grid1D) -> Self {
        Self { axis1, axis2 }
    }

    pub fn square(axis: Grid1D) -> Self {
        Self::new(axis, axis)
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.axis2.n() + i2
    }

    pub fn identical_axes(&self) -> bool {
        self.axis1 == self.axis2
    }
}

/// Grid of either dimensionality; fields carry one by value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    One(Grid1D),
    Two(Grid2D),
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::One(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Two(g)
    }
}

impl Grid {
    pub fn dims(&self) -> usize {
        match self {
            Grid::One(_) => 1,
            Grid::Two(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::One(g) => g.n(),
            Grid::Two(g) => g.axis1.n() * g.axis2.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, axis: usize) -> Result<Grid1D> {
        match (self, axis) {
            (Grid::One(g), 0) => Ok(*g),
            (Grid::Two(g), 0) => Ok(g.axis1),
            (Grid::Two(g), 1) => Ok(g.axis2),
            _ => Err(Error::AxisOutOfRange {
                axis,
                dims: self.dims(),
            }),
        }
    }

    pub fn axes(&self) -> Vec<Grid1D> {
        match self {
            Grid::One(g) => vec![*g],
            Grid::Two(g) => vec![g.axis1, g.axis2],
        }
    }

    /// `(outer, inner)` extents of the row-major layout; a 1D grid is one row.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Grid::One(g) => (1, g.n()),
            Grid::Two(g) => (g.axis1.n(), g.axis2.n()),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes().iter().map(Grid1D::dx).product()
    }

    pub fn all_periodic(&self) -> bool {
        self.axes().iter().all(Grid1D::is_periodic)
    }

    /// Largest spacing over the axes, the refinement parameter of a study.
    pub fn max_dx(&self) -> f64 {
        self.axes().iter().map(Grid1D::dx).fold(0.0, f64::max)
    }

    /// Coordinates of flat index `idx`, `[x]` in 1D and `[x1, x2]` in 2D.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self {
            Grid::One(g) => vec![g.x(idx)],
            Grid::Two(g) => {
                let n2 = g.axis2.n();
                vec![g.axis1.x(idx / n2), g.axis2.x(idx % n2)]
            }
        }
    }

    pub fn as_1d(&self) -> Option<&Grid1D> {
        match self {
            Grid::One(g) => Some(g),
            Grid::Two(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&Grid2D> {
        match self {
            Grid::Two(g) => Some(g),
            Grid::One(_) => None,
        }
    }

    pub fn with_n(&self, n: usize) -> Result<Grid> {
        Ok(match self {
            Grid::One(g) => Grid::One(g.with_n(n)?),
            Grid::Two(g) => Grid::Two(Grid2D::new(g.axis1.with_n(n)?, g.axis2.with_n(n)?)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_depends_on_boundary() {
        let p = Grid1D::periodic(10, 0.0, 1.0).unwrap();
        let d = Grid1D::dirichlet(11, 0.0, 1.0).unwrap();
        assert!((p.dx() - 0.1).abs() < 1e-15);
        assert!((d.dx() - 0.1).abs() < 1e-15);
        assert!((d.x(10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_empty_grids() {
        assert!(Grid1D::periodic(7, 0.0, 1.0).is_err());
        assert!(Grid1D::periodic(16, 1.0, 1.0).is_err());
        assert!(Grid1D::periodic(16, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let g = Grid1D::periodic(8, 0.0, 2.0 * PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn row_major_indexing() {
        let a = Grid1D::periodic(8, 0.0, 1.0).unwrap();
        let b = Grid1D::periodic(16, 0.0, 2.0).unwrap();
        let g = Grid::Two(Grid2D::new(a, b));
        assert_eq!(g.shape(), (8, 16));
        assert_eq!(g.point(17), vec![a.x(1), b.x(1)]);
        assert!(g.axis(2).is_err());
    }
}
