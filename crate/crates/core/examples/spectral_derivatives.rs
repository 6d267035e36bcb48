//! Differentiation schemes on a periodic grid: error of d/dx sin(3x) under
//! refinement, and the observed order each scheme reaches.

use bornwave::numerics::{diff, norm, Grid, Grid1D, NormKind, RealField, Scheme};
use bornwave::verify::observed_orders;
use std::f64::consts::PI;

fn main() -> bornwave::Result<()> {
    let ns = [16, 32, 64, 128];
    for scheme in [Scheme::Fd2, Scheme::Fd4, Scheme::Spectral] {
        let mut errs = Vec::new();
        let mut dxs = Vec::new();
        for &n in &ns {
            let grid = Grid::One(Grid1D::periodic(n, -PI, PI)?);
            let f = RealField::from_fn(grid, |x| (3.0 * x[0]).sin())?;
            let exact = RealField::from_fn(grid, |x| 3.0 * (3.0 * x[0]).cos())?;
            let d = diff(&f, 0, 1, scheme)?;
            errs.push(norm(&(&d - &exact), NormKind::Linf, false));
            dxs.push(grid.max_dx());
        }
        let orders = observed_orders(&errs, &dxs);
        println!("{:<9} errors {:?}", scheme.name(), errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>());
        // spectral errors sit at round-off, where an order means nothing
        if errs.iter().all(|e| *e > 1e-12) {
            println!("{:<9} orders {:?}", "", orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>());
        }
    }
    Ok(())
}
