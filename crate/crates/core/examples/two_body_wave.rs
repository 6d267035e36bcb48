//! Coupled oscillators in an entangled normal-mode Gaussian: the two-body
//! density wave equation, the size of its cross terms, and the mixed-velocity
//! identity.

use bornwave::madelung::{mixed_velocity_check, ExtractOptions};
use bornwave::numerics::{Grid, Grid1D, Grid2D, NormKind};
use bornwave::schrodinger::*;
use bornwave::verify::*;

fn slabs(n: usize) -> bornwave::Result<TwoBodySlabs> {
    let grid = Grid::Two(Grid2D::square(Grid1D::periodic(n, -10.0, 10.0)?));
    let p = PhysParams::two_particle(1.0, 1.0, 1.0)?;
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let spec = InitialSpec::NormalModeGaussian { center: [1.0, 0.0], sigma: [0.8, 0.65], k: [0.0, 0.0] };
    let s = initial_state(&spec, &grid, &p, &pot)?;
    let dt = 4.0 / n as f64;
    let s = evolve(&s, &pot, dt, (0.5 / dt).round() as usize, Method::SplitStepSpectral)?;
    TwoBodySlabs::from_state(&s, &pot, dt, Method::SplitStepSpectral, &ExtractOptions::default())
}

fn main() -> bornwave::Result<()> {
    let ladder: Vec<FieldSlabs> = [128, 256]
        .into_iter()
        .map(|n| slabs(n).map(|s| FieldSlabs::Two(Box::new(s))))
        .collect::<bornwave::Result<_>>()?;
    let table = convergence_study(2, NormKind::L2, |k| residual(EquationId::Wave2p, &ladder[k], AssemblyMode::Derived))?;
    for r in &table.rows {
        let order = r.order.map_or("-".to_string(), |p| format!("{p:.3}"));
        println!("wave_2p n = {:>3}^2  L2 = {:.3e}  order {order}", r.n, r.residual);
    }
    let FieldSlabs::Two(fine) = &ladder[1] else { unreachable!() };
    let c = classicality(fine)?;
    println!("cross terms: norm {:.3e}, share of the total {:.3}", c.cross_norm, c.ratio);
    println!("dropping them leaves a residual of {:.3e}", c.single_only_residual);
    println!("mixed-velocity identity: Linf {:.2e}", mixed_velocity_check(&fine.cur)?);
    Ok(())
}
