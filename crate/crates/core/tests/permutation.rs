use bornwave::madelung::ExtractOptions;
use bornwave::numerics::{Grid, Grid1D, Grid2D, RealField};
use bornwave::permutation::*;
use bornwave::schrodinger::*;
use bornwave::verify::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn g(x0: f64, sigma: f64) -> Box<InitialSpec> {
    Box::new(InitialSpec::Gaussian { x0, sigma, k0: 0.0 })
}

fn square(n: usize) -> Grid {
    Grid::Two(Grid2D::square(Grid1D::periodic(n, -8.0, 8.0).unwrap()))
}

fn pair(exchange: Exchange) -> InitialSpec {
    InitialSpec::Symmetrized { first: g(-1.5, 0.6), second: g(1.0, 0.7), exchange }
}

fn setup(spec: &InitialSpec, m2: f64, n: usize) -> (QuantumState, Potential, f64) {
    let p = PhysParams::two_particle(1.0, 1.0, m2).unwrap();
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let s = initial_state(spec, &square(n), &p, &pot).unwrap();
    (s, pot, 4.0 / n as f64)
}

fn operator(spec: &InitialSpec, m2: f64, n: usize) -> (LambdaOperator, TwoBodySlabs) {
    let (s, pot, dt) = setup(spec, m2, n);
    let slabs = TwoBodySlabs::from_state(&s, &pot, dt, Method::SplitStepSpectral, &ExtractOptions::default()).unwrap();
    (LambdaOperator::from_slabs(&slabs).unwrap(), slabs)
}

#[test]
fn swap_is_an_isometric_involution() {
    let grid = square(32);
    let map = SwapMap::new(&grid).unwrap();
    let f = RealField::from_fn(grid, |x| (x[0] - 0.3 * x[1]).sin() + x[1] * 0.1).unwrap();
    let s = swap(&f, &map).unwrap();
    assert_eq!(swap(&s, &map).unwrap().values(), f.values());
    assert_eq!(s.max_magnitude(), f.max_magnitude());
    let sym = RealField::from_fn(grid, |x| (x[0] * x[1]).cos() + (x[0] + x[1])).unwrap();
    assert_eq!(swap(&sym, &map).unwrap().values(), sym.values());
    let rect = Grid::Two(Grid2D::new(Grid1D::periodic(32, -8.0, 8.0).unwrap(), Grid1D::periodic(16, -8.0, 8.0).unwrap()));
    assert!(SwapMap::new(&rect).is_err());
    assert!(SwapMap::new(&Grid::One(Grid1D::periodic(8, 0.0, 1.0).unwrap())).is_err());
}

#[test]
fn identical_particles_keep_swap_symmetric_densities() {
    for exchange in [Exchange::Symmetric, Exchange::Antisymmetric] {
        let (s, pot, dt) = setup(&pair(exchange), 1.0, 128);
        let rep = born_permutation_test(&s, &pot, dt, Method::SplitStepSpectral, 32, 3, &ExtractOptions::default()).unwrap();
        assert!(rep.identical_particles);
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.max_delta() < 1e-8, "{exchange:?}: {rep:?}");
        for r in &rep.rows {
            assert!(r.wave_residual < 1e-9);
        }
    }
}

/// Measured relative asymmetry of the m2 = 2 m1 product state: 1.0 at t = 0,
/// minimum 0.236 over t <= 3.
#[test]
fn unequal_masses_break_swap_symmetry() {
    let spec = InitialSpec::Product { first: g(-1.5, 0.6), second: g(1.0, 0.7) };
    let (s, pot, dt) = setup(&spec, 2.0, 128);
    let rep = born_permutation_test(&s, &pot, dt, Method::SplitStepSpectral, 32, 3, &ExtractOptions::default()).unwrap();
    assert!(!rep.identical_particles);
    assert!(rep.rows[0].delta_rel > 0.1);
    for r in &rep.rows[1..] {
        assert!(r.delta_rel > 0.236 / 1.5, "{r:?}");
    }
}

/// `max defect / dx^2` over n = 128, 256 for the symmetric pair: 3.1e-5.
/// The defect itself sits at the round-off floor (spectral derivatives commute
/// with the swap exactly).
const EQUAL_MASS_DEFECT_C: f64 = 3.1e-5;

/// Lambda swap-defect for m2 = 2 m1 at n = 128.
const UNEQUAL_MASS_DEFECT: f64 = 4.5;

#[test]
fn lambda_commutes_with_swap_only_for_identical_particles() {
    let grid = square(128);
    let map = SwapMap::new(&grid).unwrap();
    let dx = 16.0 / 128.0;
    let probes = random_probe_densities(&grid, 8, 7).unwrap();
    let constant = [RealField::constant(grid, 1.0)];
    for exchange in [Exchange::Symmetric, Exchange::Antisymmetric] {
        let (op, _) = operator(&pair(exchange), 1.0, 128);
        let d = lambda_symmetry_defect(&op, &probes, &map).unwrap();
        assert!(d < 1.5 * EQUAL_MASS_DEFECT_C * dx * dx, "{exchange:?}: {d}");
        let dc = lambda_symmetry_defect(&op, &constant, &map).unwrap();
        assert!(dc < 1.5 * EQUAL_MASS_DEFECT_C * dx * dx, "{exchange:?} constant probe: {dc}");
    }
    let spec = InitialSpec::Product { first: g(-1.5, 0.6), second: g(1.0, 0.7) };
    let (op, _) = operator(&spec, 2.0, 128);
    let d = lambda_symmetry_defect(&op, &probes, &map).unwrap();
    assert!(d > UNEQUAL_MASS_DEFECT / 1.5, "{d}");
}

#[test]
fn lambda_residual_is_the_two_body_wave_residual() {
    let spec = InitialSpec::NormalModeGaussian { center: [1.0, 0.0], sigma: [0.7, 0.55], k: [0.0, 0.0] };
    let (op, slabs) = operator(&spec, 1.0, 128);
    let r = lambda_residual(&op, [&slabs.prev.rho, &slabs.cur.rho, &slabs.next.rho]).unwrap();
    let (field, keep) = residual_field(EquationId::Wave2p, &FieldSlabs::Two(Box::new(slabs)), AssemblyMode::Derived).unwrap();
    let a = bornwave::numerics::NormTriple::of(&r, Some(&keep));
    let b = bornwave::numerics::NormTriple::of(&field, Some(&keep));
    assert!((a.l2 - b.l2).abs() <= 1e-12 * b.l2);
    assert!((a.linf - b.linf).abs() <= 1e-12 * b.linf);
}

fn shared_operator() -> &'static (LambdaOperator, Vec<RealField>) {
    static OP: OnceLock<(LambdaOperator, Vec<RealField>)> = OnceLock::new();
    OP.get_or_init(|| {
        let (op, _) = operator(&pair(Exchange::Symmetric), 1.0, 128);
        let probes = random_probe_densities(op.grid(), 2, 1).unwrap();
        (op, probes)
    })
}

#[test]
fn lambda_of_zero_is_zero() {
    let (op, _) = shared_operator();
    let z = apply_lambda(op, &RealField::zeros(*op.grid())).unwrap();
    assert_eq!(z.max_magnitude(), 0.0);
    assert!(apply_lambda(op, &RealField::zeros(square(64))).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn lambda_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let (op, _) = shared_operator();
        let p = random_probe_densities(op.grid(), 2, seed).unwrap();
        let mix = &p[0].scale(alpha) + &p[1].scale(beta);
        let lhs = apply_lambda(op, &mix).unwrap();
        let la = apply_lambda(op, &p[0]).unwrap();
        let lb = apply_lambda(op, &p[1]).unwrap();
        let rhs = &la.scale(alpha) + &lb.scale(beta);
        let scale = alpha.abs() * la.max_magnitude() + beta.abs() * lb.max_magnitude();
        prop_assert!((&lhs - &rhs).max_magnitude() <= 1e-12 * scale);
    }
}
