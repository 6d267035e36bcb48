//! Integrates the closed (ln rho, v) system for a spreading free Gaussian and
//! compares the density with Crank-Nicolson evolution of the wavefunction.

use bornwave::nonequilibrium::*;
use bornwave::numerics::{Grid, Grid1D};
use bornwave::schrodinger::*;

fn main() -> bornwave::Result<()> {
    let p = PhysParams::default();
    let pot = Potential::free();
    // unit-width packet at 20% width growth
    let t_end = 2.0 * (1.2f64.powi(2) - 1.0).sqrt();
    for n in [129, 257] {
        let grid = Grid::One(Grid1D::dirichlet(n, -8.0, 8.0)?);
        let psi = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0: 0.0 }, &grid, &p, &pot)?;
        let dx = grid.max_dx();
        let dt = 0.04 * dx * dx;
        let steps = (t_end / dt).round() as usize;
        let run = run_self_consistent(&psi, &pot, equilibrium_initial(&psi)?, dt, steps, steps)?;
        let last = run.trace.last().expect("final sample");
        println!(
            "n = {n}: t = {:.3}, width {:.4} (start 1.0), L1 {:.3e}, L1 / (dx^2 + dt) = {:.4}",
            last.time,
            free_gaussian_width(1.0, last.time, &p),
            last.l1,
            last.l1 / (dx * dx + dt)
        );
    }
    Ok(())
}
