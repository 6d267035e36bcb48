//! FFT plumbing: cached plans, line-wise transforms over row-major grids and
//! multi-index spectral partial derivatives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::field::{ComplexField, Field, Sample};
use super::grid::Grid;
use crate::error::{Error, Result};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

pub(crate) fn transpose<T: Copy + Send + Sync>(values: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(values.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(values[r * cols + c]);
        }
    }
    out
}

/// Maps every grid line along `axis` through `op(input_line, output_line)`.
///
/// Lines are processed independently (in parallel for 2D grids); the result
/// does not depend on scheduling.
pub(crate) fn map_lines<T, F>(values: &[T], grid: &Grid, axis: usize, op: F) -> Result<Vec<T>>
where
    T: Copy + Send + Sync + Default,
    F: Fn(&[T], &mut [T]) + Sync,
{
    let (outer, inner) = grid.shape();
    grid.axis(axis)?;
    let contiguous = grid.dims() == 1 || axis == 1;
    if contiguous {
        let mut out = vec![T::default(); values.len()];
        out.par_chunks_mut(inner)
            .zip(values.par_chunks(inner))
            .for_each(|(o, i)| op(i, o));
        Ok(out)
    } else {
        let t = transpose(values, outer, inner);
        let mut out = vec![T::default(); values.len()];
        out.par_chunks_mut(outer)
            .zip(t.par_chunks(outer))
            .for_each(|(o, i)| op(i, o));
        Ok(transpose(&out, inner, outer))
    }
}

/// Unnormalised FFT of every line along `axis`.
pub(crate) fn fft_axis(values: &[Complex64], grid: &Grid, axis: usize, inverse: bool) -> Result<Vec<Complex64>> {
    let n = grid.axis(axis)?.n();
    let fft = plan(n, inverse);
    map_lines(values, grid, axis, |input, output| {
        output.copy_from_slice(input);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(output, &mut scratch);
    })
}

/// Forward (or inverse) transform over all axes; the inverse includes the
/// `1/N` normalisation.
pub(crate) fn fft_all(values: &[Complex64], grid: &Grid, inverse: bool) -> Result<Vec<Complex64>> {
    let mut data = values.to_vec();
    for axis in (0..grid.dims()).rev() {
        data = fft_axis(&data, grid, axis, inverse)?;
    }
    if inverse {
        let s = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }
    Ok(data)
}

/// Multiplier `(i k)^order` for every mode of an axis; the unpaired Nyquist
/// mode of an even-length axis is dropped for odd orders.
pub(crate) fn derivative_symbol(wavenumbers: &[f64], order: u32) -> Vec<Complex64> {
    let n = wavenumbers.len();
    wavenumbers
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            if order % 2 == 1 && n % 2 == 0 && j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(order)
            }
        })
        .collect()
}

pub(crate) fn require_periodic(grid: &Grid, axis: usize) -> Result<()> {
    if grid.axis(axis)?.is_periodic() {
        Ok(())
    } else {
        Err(Error::SchemeBoundaryMismatch)
    }
}

/// Spectral derivative of `order` along a single axis.
pub(crate) fn spectral_diff_axis<T: Sample>(field: &Field<T>, axis: usize, order: u32) -> Result<Field<T>> {
    let grid = *field.grid();
    require_periodic(&grid, axis)?;
    let ax = grid.axis(axis)?;
    let symbol = derivative_symbol(&ax.wavenumbers(), order);
    let fwd = plan(ax.n(), false);
    let inv = plan(ax.n(), true);
    let scale = 1.0 / ax.n() as f64;
    let input: Vec<Complex64> = field.values().iter().map(|v| v.to_complex()).collect();
    let out = map_lines(&input, &grid, axis, |line, o| {
        o.copy_from_slice(line);
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        fwd.process_with_scratch(o, &mut scratch);
        for (c, s) in o.iter_mut().zip(&symbol) {
            *c *= s * scale;
        }
        inv.process_with_scratch(o, &mut scratch);
    })?;
    Ok(Field::from_parts(grid, out.into_iter().map(T::from_complex).collect()))
}

/// All requested mixed partials `d^a/dx1^a d^b/dx2^b` from one forward
/// transform. In 1D only `[a, 0]` is meaningful.
pub fn spectral_partials(field: &ComplexField, orders: &[[u32; 2]]) -> Result<Vec<ComplexField>> {
    let grid = *field.grid();
    for axis in 0..grid.dims() {
        require_periodic(&grid, axis)?;
    }
    let hat = fft_all(field.values(), &grid, false)?;
    let axes = grid.axes();
    let (outer, inner) = grid.shape();
    orders
        .iter()
        .map(|ord| {
            if grid.dims() == 1 && ord[1] != 0 {
                return Err(Error::AxisOutOfRange { axis: 1, dims: 1 });
            }
            let mut spec = hat.clone();
            match grid.dims() {
                1 => {
                    let s = derivative_symbol(&axes[0].wavenumbers(), ord[0]);
                    spec.iter_mut().zip(&s).for_each(|(c, m)| *c *= m);
                }
                _ => {
                    let s1 = derivative_symbol(&axes[0].wavenumbers(), ord[0]);
                    let s2 = derivative_symbol(&axes[1].wavenumbers(), ord[1]);
                    spec.par_chunks_mut(inner).enumerate().for_each(|(i1, row)| {
                        let a = s1[i1];
                        row.iter_mut().zip(&s2).for_each(|(c, b)| *c *= a * b);
                    });
                    debug_assert_eq!(spec.len(), outer * inner);
                }
            }
            let back = fft_all(&spec, &grid, true)?;
            Ok(Field::from_parts(grid, back))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{Grid1D, Grid2D};
    use std::f64::consts::PI;

    #[test]
    fn round_trip_2d() {
        let a = Grid1D::periodic(8, 0.0, 1.0).unwrap();
        let b = Grid1D::periodic(12, 0.0, 2.0).unwrap();
        let grid = Grid::Two(Grid2D::new(a, b));
        let f = ComplexField::from_fn(grid, |x| Complex64::new(x[0] * x[1], x[0] - x[1])).unwrap();
        let hat = fft_all(f.values(), &grid, false).unwrap();
        let back = fft_all(&hat, &grid, true).unwrap();
        for (u, v) in back.iter().zip(f.values()) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn mixed_partial_of_product_of_sines() {
        let ax = Grid1D::periodic(32, 0.0, 2.0 * PI).unwrap();
        let grid = Grid::Two(Grid2D::square(ax));
        let f = ComplexField::from_fn(grid, |x| Complex64::new((2.0 * x[0]).sin() * x[1].cos(), 0.0)).unwrap();
        let d = spectral_partials(&f, &[[1, 1]]).unwrap();
        let exact = ComplexField::from_fn(grid, |x| Complex64::new(-2.0 * (2.0 * x[0]).cos() * x[1].sin(), 0.0)).unwrap();
        let err = (&d[0] - &exact).max_magnitude();
        assert!(err < 1e-12, "{err}");
    }
}
