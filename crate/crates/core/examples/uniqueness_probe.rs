//! Replaces v by v + c/rho, which also satisfies continuity, and compares the
//! equilibrium wave-equation residual against the clean one.

use bornwave::madelung::ExtractOptions;
use bornwave::numerics::{Grid, Grid1D};
use bornwave::schrodinger::*;
use bornwave::verify::*;

fn main() -> bornwave::Result<()> {
    let n = 2048;
    let grid = Grid::One(Grid1D::periodic(n, -20.0, 20.0)?);
    let p = PhysParams::default();
    let pot = Potential::free();
    let k0 = 2.0 * std::f64::consts::PI * 4.0 / 40.0;
    let s = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0 }, &grid, &p, &pot)?;
    let dt = 10.0 / n as f64;
    let s = evolve(&s, &pot, dt, (0.5 / dt).round() as usize, Method::SplitStepSpectral)?;
    let FieldSlabs::One(slabs) = FieldSlabs::from_state(&s, &pot, dt, Method::SplitStepSpectral, &ExtractOptions::default())? else {
        unreachable!()
    };
    for c in [0.0, 1e-3, 1e-1] {
        let probe = velocity_uniqueness_probe(&slabs, c)?;
        println!(
            "c = {c:<6} clean Linf {:.3e}  corrupted Linf {:.3e}  factor {:.3e}",
            probe.clean.norms.linf,
            probe.corrupted.norms.linf,
            probe.factor()
        );
    }
    Ok(())
}
