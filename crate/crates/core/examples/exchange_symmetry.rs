//! Exchange symmetry of the two-body density and of the wave operator Lambda,
//! for identical particles and for m2 = 2 m1.

use bornwave::madelung::ExtractOptions;
use bornwave::numerics::{Grid, Grid1D, Grid2D};
use bornwave::permutation::*;
use bornwave::schrodinger::*;
use bornwave::verify::TwoBodySlabs;

fn g(x0: f64) -> Box<InitialSpec> {
    Box::new(InitialSpec::Gaussian { x0, sigma: 0.7, k0: 0.0 })
}

fn main() -> bornwave::Result<()> {
    let grid = Grid::Two(Grid2D::square(Grid1D::periodic(192, -12.0, 12.0)?));
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let opts = ExtractOptions::default();
    let dt = 0.03125;
    let cases = [
        ("symmetric pair", 1.0, InitialSpec::Symmetrized { first: g(-1.5), second: g(1.0), exchange: Exchange::Symmetric }),
        ("product, m2 = 2 m1", 2.0, InitialSpec::Product { first: g(-1.5), second: g(1.0) }),
    ];
    for (label, m2, spec) in cases {
        let p = PhysParams::two_particle(1.0, 1.0, m2)?;
        let s = initial_state(&spec, &grid, &p, &pot)?;
        let report = born_permutation_test(&s, &pot, dt, Method::SplitStepSpectral, 32, 2, &opts)?;
        println!("{label}: identical particles = {}", report.identical_particles);
        for r in &report.rows {
            println!("  t = {:.2}  |rho - swap rho| = {:.2e} (relative {:.2e})", r.time, r.delta_linf, r.delta_rel);
        }
        let later = evolve(&s, &pot, dt, 64, Method::SplitStepSpectral)?;
        let op = LambdaOperator::from_slabs(&TwoBodySlabs::from_state(&later, &pot, dt, Method::SplitStepSpectral, &opts)?)?;
        let probes = random_probe_densities(&grid, 20, 7)?;
        let defect = lambda_symmetry_defect(&op, &probes, &SwapMap::new(&grid)?)?;
        println!("  Lambda swap defect over 20 probes: {defect:.3e}");
    }
    Ok(())
}
