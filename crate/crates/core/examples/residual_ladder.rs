//! One-body balance laws and wave equations evaluated on a refinement ladder,
//! printed as convergence tables.

use bornwave::madelung::ExtractOptions;
use bornwave::numerics::{Grid, Grid1D, NormKind};
use bornwave::schrodinger::*;
use bornwave::verify::*;

fn slabs(n: usize) -> bornwave::Result<FieldSlabs> {
    let grid = Grid::One(Grid1D::periodic(n, -20.0, 20.0)?);
    let p = PhysParams::default();
    let pot = Potential::free();
    let k0 = 2.0 * std::f64::consts::PI * 4.0 / 40.0;
    let s = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0 }, &grid, &p, &pot)?;
    let dt = 10.0 / n as f64;
    let s = evolve(&s, &pot, dt, (0.5 / dt).round() as usize, Method::SplitStepSpectral)?;
    FieldSlabs::from_state(&s, &pot, dt, Method::SplitStepSpectral, &ExtractOptions::default())
}

fn main() -> bornwave::Result<()> {
    let ladder = [512, 1024, 2048].map(slabs);
    let ladder: Vec<FieldSlabs> = ladder.into_iter().collect::<bornwave::Result<_>>()?;
    for eq in [
        EquationId::Continuity1p,
        EquationId::Hj1p,
        EquationId::Momentum1p,
        EquationId::Wave1p,
        EquationId::WaveEquilibrium1p,
    ] {
        let table = convergence_study(ladder.len(), NormKind::L2, |k| residual(eq, &ladder[k], AssemblyMode::Derived))?;
        println!("{eq}");
        for r in &table.rows {
            let order = r.order.map_or("-".to_string(), |p| format!("{p:.3}"));
            println!("  n = {:>5}  L2 = {:.3e}  order {order}", r.n, r.residual);
        }
    }
    Ok(())
}
