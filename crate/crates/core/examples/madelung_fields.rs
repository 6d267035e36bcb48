//! Hydrodynamic fields of an oscillator packet: density, velocity, quantum
//! potential from the wavefunction and from the density alone, and the stress.

use bornwave::madelung::*;
use bornwave::numerics::{masked_norm, Grid, Grid1D, NormKind};
use bornwave::schrodinger::*;

fn main() -> bornwave::Result<()> {
    let grid = Grid::One(Grid1D::periodic(512, -12.0, 12.0)?);
    let p = PhysParams::default();
    let pot = Potential::harmonic(1.0, 0.0);
    let spec = InitialSpec::Gaussian { x0: 1.5, sigma: 0.5f64.sqrt(), k0: 0.0 };
    let s = evolve(&initial_state(&spec, &grid, &p, &pot)?, &pot, 0.01, 50, Method::SplitStepSpectral)?;
    let f = extract_1p(&s, &pot, &ExtractOptions::default())?;

    let peak = f.rho.argmax();
    let x = grid.point(peak)[0];
    println!("t = {:.2}: density peak at x = {x:.4}, v there = {:.6}", s.t(), f.v.values()[peak]);

    let keep = interior_mask(&f.rho, 1e-10, 2);
    let q2 = quantum_potential_from_density(&f.rho, &p, f.scheme, 1e-12)?;
    let dq = masked_norm(&(&f.q - &q2), Some(&keep), NormKind::Linf, false);
    println!("Q from psi vs Q from rho: Linf gap {dq:.2e} over {} interior cells", keep.iter().filter(|k| **k).count());
    let dpi = masked_norm(&(&f.pi - &f.stress_from_density()?), Some(&keep), NormKind::Linf, false);
    println!("stress from psi vs from rho: Linf gap {dpi:.2e}");
    Ok(())
}
