//! Transports a density with the guidance velocity of an oscillator packet,
//! once from |psi|^2 and once from a perturbed start, and prints both
//! deviation traces as CSV.

use bornwave::nonequilibrium::*;
use bornwave::numerics::{Grid, Grid1D};
use bornwave::schrodinger::*;

fn main() -> bornwave::Result<()> {
    let grid = Grid::One(Grid1D::periodic(1024, -20.0, 20.0)?);
    let p = PhysParams::default();
    let pot = Potential::harmonic(1.0, 0.0);
    let psi = initial_state(&InitialSpec::Gaussian { x0: 1.5, sigma: 0.5f64.sqrt(), k0: 0.0 }, &grid, &p, &pot)?;
    let dt = 0.25 * grid.max_dx();
    let (steps, stride) = (1000, 100);

    let eq = run_guided(&psi, &pot, &psi.density(), dt, steps, stride)?;
    let off = run_guided(&psi, &pot, &perturb_density(&psi.density(), 0.3, 1.0)?, dt, steps, stride)?;
    println!("equilibrium start: max L1 {:.3e}", eq.trace.max_l1());
    println!("perturbed start:   final L1 {:.3e}", off.trace.last().map_or(f64::NAN, |e| e.l1));

    let mut out = std::io::stdout().lock();
    eq.trace.write_csv(&mut out, "equilibrium")?;
    off.trace.write_csv(&mut out, "perturbed")?;
    Ok(())
}
