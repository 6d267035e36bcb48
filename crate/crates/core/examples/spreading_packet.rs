//! A free Gaussian spreading under split-step and Crank-Nicolson evolution,
//! against the closed-form width.

use bornwave::numerics::{Grid, Grid1D};
use bornwave::schrodinger::*;

fn width(s: &QuantumState) -> f64 {
    let rho = s.density();
    let grid = s.grid().as_1d().copied().expect("1D grid");
    let xs = grid.coords();
    let mean: f64 = xs.iter().zip(rho.values()).map(|(x, r)| x * r).sum::<f64>() * grid.dx();
    let var: f64 = xs.iter().zip(rho.values()).map(|(x, r)| (x - mean).powi(2) * r).sum::<f64>() * grid.dx();
    var.sqrt()
}

fn main() -> bornwave::Result<()> {
    let grid = Grid::One(Grid1D::periodic(1024, -30.0, 30.0)?);
    let p = PhysParams::default();
    let pot = Potential::free();
    let s0 = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0: 0.0 }, &grid, &p, &pot)?;
    let t = 2.0;
    for (method, dt) in [(Method::SplitStepSpectral, 0.01), (Method::CrankNicolson, 0.001)] {
        let s = evolve(&s0, &pot, dt, (t / dt).round() as usize, method)?;
        let exact = free_gaussian_width(1.0, s.t(), &p);
        println!(
            "{:<20} t = {:.2}  width {:.10}  exact {:.10}  norm - 1 = {:.1e}",
            method.name(),
            s.t(),
            width(&s),
            exact,
            s.norm() - 1.0
        );
    }
    Ok(())
}
