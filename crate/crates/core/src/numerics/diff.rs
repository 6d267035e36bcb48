use serde::{Deserialize, Serialize};

use super::field::{Field, Sample};
use super::grid::{Boundary, Grid1D};
use super::spectral::{map_lines, spectral_diff_axis};
use crate::error::{Error, Result};

/// Spatial differentiation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Fourier pseudo-spectral; periodic axes only.
    #[default]
    Spectral,
    /// Centered second-order finite differences.
    Fd2,
    /// Centered fourth-order finite differences.
    Fd4,
}

impl Scheme {
    /// Half width of the centered stencil.
    fn half_width(self) -> usize {
        match self {
            Scheme::Spectral => 0,
            Scheme::Fd2 => 1,
            Scheme::Fd4 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Spectral => "spectral",
            Scheme::Fd2 => "fd2",
            Scheme::Fd4 => "fd4",
        }
    }
}

/// Finite-difference weights for derivatives `0..=max_order` at `z` from the
/// nodes `xs` (Fornberg's recursion). `weights[d][j]` multiplies `f(xs[j])`.
pub fn fornberg_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Clone, Debug)]
struct Stencil {
    offsets: Vec<isize>,
    weights: Vec<f64>,
}

impl Stencil {
    fn build(point: isize, nodes: std::ops::Range<isize>, order: u32, dx: f64) -> Self {
        let offsets: Vec<isize> = nodes.map(|j| j - point).collect();
        let xs: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let w = fornberg_weights(0.0, &xs, order as usize);
        let scale = dx.powi(order as i32);
        Self {
            offsets,
            weights: w[order as usize].iter().map(|v| v / scale).collect(),
        }
    }
}

/// Stencils for one axis: the centered one plus one-sided closures for the
/// points near a non-periodic boundary.
struct AxisStencils {
    centered: Stencil,
    left: Vec<Stencil>,
    right: Vec<Stencil>,
    periodic: bool,
}

impl AxisStencils {
    fn new(axis: &Grid1D, order: u32, scheme: Scheme) -> Result<Self> {
        let p = scheme.half_width() as isize;
        let n = axis.n() as isize;
        let dx = axis.dx();
        let centered = Stencil::build(0, -p..p + 1, order, dx);
        let periodic = axis.boundary() == Boundary::Periodic;
        let width = 2 * p + order as isize;
        if !periodic && n < width {
            return Err(Error::InvalidGrid(format!(
                "{n} points cannot host a one-sided {} closure",
                scheme.name()
            )));
        }
        let (left, right) = if periodic {
            (Vec::new(), Vec::new())
        } else {
            let left = (0..p).map(|i| Stencil::build(i, 0..width, order, dx)).collect();
            let right = (n - p..n)
                .map(|i| Stencil::build(i, n - width..n, order, dx))
                .collect();
            (left, right)
        };
        Ok(Self {
            centered,
            left,
            right,
            periodic,
        })
    }

    fn apply<T: Sample>(&self, input: &[T], output: &mut [T]) {
        let n = input.len() as isize;
        let dot = |s: &Stencil, i: isize, wrap: bool| -> T {
            let mut acc = T::default();
            for (&o, &w) in s.offsets.iter().zip(&s.weights) {
                let mut j = i + o;
                if wrap {
                    j = j.rem_euclid(n);
                }
                acc = acc + input[j as usize] * w;
            }
            acc
        };
        if self.periodic {
            for i in 0..n {
                output[i as usize] = dot(&self.centered, i, true);
            }
            return;
        }
        let p = self.left.len() as isize;
        for i in 0..p {
            output[i as usize] = dot(&self.left[i as usize], i, false);
        }
        for i in p..n - p {
            output[i as usize] = dot(&self.centered, i, false);
        }
        for (k, i) in (n - p..n).enumerate() {
            output[i as usize] = dot(&self.right[k], i, false);
        }
    }
}

/// Discrete derivative of `order` (1 or 2) along `axis` (0 = x or x1, 1 = x2).
pub fn diff<T: Sample>(field: &Field<T>, axis: usize, order: u32, scheme: Scheme) -> Result<Field<T>> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    let grid = *field.grid();
    let ax = grid.axis(axis)?;
    match scheme {
        Scheme::Spectral => spectral_diff_axis(field, axis, order),
        Scheme::Fd2 | Scheme::Fd4 => {
            let stencils = AxisStencils::new(&ax, order, scheme)?;
            let out = map_lines(field.values(), &grid, axis, |i, o| stencils.apply(i, o))?;
            Ok(Field::from_parts(grid, out))
        }
    }
}

/// Mixed partial `d^2/dx1 dx2` on a 2D grid.
pub fn diff_mixed<T: Sample>(field: &Field<T>, scheme: Scheme) -> Result<Field<T>> {
    let d1 = diff(field, 0, 1, scheme)?;
    diff(&d1, 1, 1, scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::RealField;
    use crate::numerics::grid::{Grid, Grid2D};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Grid {
        Grid::One(Grid1D::periodic(n, 0.0, 2.0 * PI).unwrap())
    }

    #[test]
    fn fornberg_reproduces_textbook_stencils() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((w[1][j] - d1[j]).abs() < 1e-14);
            assert!((w[2][j] - d2[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let dir = Grid::One(Grid1D::dirichlet(17, -1.0, 1.0).unwrap());
        for (grid, schemes) in [
            (periodic(16), vec![Scheme::Spectral, Scheme::Fd2, Scheme::Fd4]),
            (dir, vec![Scheme::Fd2, Scheme::Fd4]),
        ] {
            let f = RealField::constant(grid, 3.5);
            for s in schemes {
                for order in 1..=2 {
                    let d = diff(&f, 0, order, s).unwrap();
                    assert!(d.max_magnitude() < 1e-10, "{s:?} order {order}");
                }
            }
        }
    }

    #[test]
    fn spectral_sine_derivative() {
        let grid = periodic(64);
        let k = 5.0;
        let f = RealField::from_fn(grid, |x| (k * x[0]).sin()).unwrap();
        let d = diff(&f, 0, 1, Scheme::Spectral).unwrap();
        let exact = RealField::from_fn(grid, |x| k * (k * x[0]).cos()).unwrap();
        let rel = (&d - &exact).max_magnitude() / exact.max_magnitude();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn fd2_second_difference_exact_for_quadratic() {
        let grid = Grid::One(Grid1D::dirichlet(21, -1.0, 3.0).unwrap());
        let f = RealField::from_fn(grid, |x| x[0] * x[0]).unwrap();
        let d = diff(&f, 0, 2, Scheme::Fd2).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            assert!((v - 2.0).abs() < 1e-10, "point {i}: {v}");
        }
    }

    #[test]
    fn spectral_rejects_dirichlet() {
        let grid = Grid::One(Grid1D::dirichlet(16, 0.0, 1.0).unwrap());
        let f = RealField::zeros(grid);
        assert!(matches!(diff(&f, 0, 1, Scheme::Spectral), Err(Error::SchemeBoundaryMismatch)));
        assert!(matches!(diff(&f, 1, 1, Scheme::Fd2), Err(Error::AxisOutOfRange { .. })));
        assert!(matches!(diff(&f, 0, 3, Scheme::Fd2), Err(Error::InvalidOrder(3))));
    }

    fn fd_error(n: usize, scheme: Scheme, order: u32, boundary: Boundary) -> f64 {
        let g = Grid1D::new(n, -1.0, 1.0, boundary).unwrap();
        let grid = Grid::One(g);
        let f = RealField::from_fn(grid, |x| (PI * x[0]).sin() + 0.3 * (2.0 * PI * x[0]).cos()).unwrap();
        let exact = RealField::from_fn(grid, |x| {
            let s = PI * x[0];
            if order == 1 {
                PI * s.cos() - 0.6 * PI * (2.0 * s).sin()
            } else {
                -PI * PI * s.sin() - 1.2 * PI * PI * (2.0 * s).cos()
            }
        })
        .unwrap();
        let d = diff(&f, 0, order, scheme).unwrap();
        (&d - &exact).max_magnitude()
    }

    #[test]
    fn finite_difference_orders_by_two_grid_refinement() {
        for boundary in [Boundary::Periodic, Boundary::DirichletZero] {
            for order in 1..=2 {
                for (scheme, formal) in [(Scheme::Fd2, 2.0), (Scheme::Fd4, 4.0)] {
                    let (n1, n2) = match boundary {
                        Boundary::Periodic => (128, 256),
                        Boundary::DirichletZero => (129, 257),
                    };
                    let e1 = fd_error(n1, scheme, order, boundary);
                    let e2 = fd_error(n2, scheme, order, boundary);
                    let p = (e1 / e2).log2();
                    // boundary closures share the order but not the constant,
                        // so the estimate may overshoot before it settles
                    assert!(
                        p > formal - 0.3 && p < formal + 0.7,
                        "{boundary:?} {scheme:?} order {order}: observed {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn mixed_partials_commute() {
        let ax = Grid1D::periodic(48, -PI, PI).unwrap();
        let grid = Grid::Two(Grid2D::square(ax));
        let f = RealField::from_fn(grid, |x| (x[0] + 0.5 * x[1]).sin() * (-(x[0] * x[1]).powi(2) / 8.0).exp()).unwrap();
        for s in [Scheme::Spectral, Scheme::Fd2, Scheme::Fd4] {
            let a = diff(&diff(&f, 0, 1, s).unwrap(), 1, 1, s).unwrap();
            let b = diff(&diff(&f, 1, 1, s).unwrap(), 0, 1, s).unwrap();
            assert!((&a - &b).max_magnitude() < 1e-10, "{s:?}");
        }
    }

    proptest! {
        #[test]
        fn spectral_plane_wave_eigenfunction(k in -31i32..=31) {
            let grid = periodic(64);
            let kf = k as f64;
            let f = Field::<Complex64>::from_fn(grid, |x| Complex64::new(0.0, kf * x[0]).exp()).unwrap();
            let d = diff(&f, 0, 1, Scheme::Spectral).unwrap();
            let expected = f.map(|c| c * Complex64::new(0.0, kf));
            let err = (&d - &expected).max_magnitude();
            prop_assert!(err <= 1e-12 * kf.abs().max(1.0), "k={} err={}", k, err);
        }
    }
}
