use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Scalar type stored in a [`Field`]: `f64` or `Complex64`.
pub trait Sample:
    Copy
    + Send
    + Sync
    + Default
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    fn is_finite(&self) -> bool;
    fn to_complex(self) -> Complex64;
    fn from_complex(c: Complex64) -> Self;
    fn magnitude(&self) -> f64;
}

impl Sample for f64 {
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Samples on a grid, row-major over `(x1, x2)` in two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    /// Checked constructor: the sample count must match the grid and every
    /// sample must be finite.
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for values produced by finite arithmetic on
    /// finite inputs.
    pub(crate) fn from_parts(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![T::default(); grid.len()])
    }

    pub fn constant(grid: Grid, value: T) -> Self {
        Self::from_parts(grid, vec![value; grid.len()])
    }

    /// Samples `f` at every grid point; the closure receives `[x]` or `[x1, x2]`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> T) -> Result<Self> {
        let values = match grid {
            Grid::One(g) => (0..g.n()).map(|i| f(&[g.x(i)])).collect(),
            Grid::Two(g) => {
                let mut out = Vec::with_capacity(grid.len());
                for i1 in 0..g.axis1.n() {
                    let x1 = g.axis1.x(i1);
                    for i2 in 0..g.axis2.n() {
                        out.push(f(&[x1, g.axis2.x(i2)]));
                    }
                }
                out
            }
        };
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<U: Sample, V: Sample>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.ensure_same_grid(other.grid())?;
        Ok(Field::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(other.values())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn ensure_same_grid(&self, other: &Grid) -> Result<()> {
        if &self.grid != other {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other
            )));
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(Sample::magnitude).fold(0.0, f64::max)
    }
}

impl RealField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Cell-weighted sum, the discrete integral over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

impl ComplexField {
    /// `|psi|^2` pointwise.
    pub fn density(&self) -> RealField {
        self.map(|c| c.norm_sqr())
    }
}

fn assert_same_grid(a: &Grid, b: &Grid) {
    assert_eq!(a, b, "pointwise field arithmetic on different grids");
}

impl<'a, T: Sample> Add for &'a Field<T> {
    type Output = Field<T>;
    fn add(self, rhs: Self) -> Field<T> {
        assert_same_grid(&self.grid, &rhs.grid);
        Field::from_parts(
            self.grid,
            self.values.iter().zip(&rhs.values).map(|(&a, &b)| a + b).collect(),
        )
    }
}

impl<'a, T: Sample> Sub for &'a Field<T> {
    type Output = Field<T>;
    fn sub(self, rhs: Self) -> Field<T> {
        assert_same_grid(&self.grid, &rhs.grid);
        Field::from_parts(
            self.grid,
            self.values.iter().zip(&rhs.values).map(|(&a, &b)| a - b).collect(),
        )
    }
}

impl<'a> Mul for &'a RealField {
    type Output = RealField;
    fn mul(self, rhs: Self) -> RealField {
        assert_same_grid(&self.grid, &rhs.grid);
        Field::from_parts(
            self.grid,
            self.values.iter().zip(&rhs.values).map(|(&a, &b)| a * b).collect(),
        )
    }
}

impl<'a, T: Sample> Mul<f64> for &'a Field<T> {
    type Output = Field<T>;
    fn mul(self, rhs: f64) -> Field<T> {
        self.scale(rhs)
    }
}
