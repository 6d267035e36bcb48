use bornwave::numerics::{Grid, Grid1D, Grid2D, RealField};
use bornwave::schrodinger::*;
use std::f64::consts::PI;

fn line(n: usize, l: f64) -> Grid {
    Grid::One(Grid1D::periodic(n, -l, l).unwrap())
}

fn gauss(x0: f64, sigma: f64, k0: f64) -> InitialSpec {
    InitialSpec::Gaussian { x0, sigma, k0 }
}

fn width(rho: &RealField) -> f64 {
    let g = rho.grid().as_1d().unwrap();
    let xs = g.coords();
    let m: f64 = rho.values().iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>() * g.dx();
    let v: f64 = rho.values().iter().zip(&xs).map(|(r, x)| r * (x - m).powi(2)).sum::<f64>() * g.dx();
    v.sqrt()
}

#[test]
fn free_gaussian_spreads_like_the_analytic_packet() {
    let p = PhysParams::default();
    let grid = line(1024, 40.0);
    let s0 = initial_state(&gauss(0.0, 1.0, 0.0), &grid, &p, &Potential::free()).unwrap();
    let t = 2.0 * 3f64.sqrt();
    for (method, steps) in [(Method::SplitStepSpectral, 400), (Method::CrankNicolson, 4000)] {
        let s = evolve(&s0, &Potential::free(), t / steps as f64, steps, method).unwrap();
        let w = width(&s.density());
        let exact = free_gaussian_width(1.0, t, &p);
        assert!((exact - 2.0).abs() < 1e-12);
        assert!(((w - exact) / exact).abs() < 1e-6, "{method:?}: {w} vs {exact}");
    }
}

#[test]
fn harmonic_ground_state_is_stationary_over_a_period() {
    let p = PhysParams::default();
    let grid = line(128, 10.0);
    let pot = Potential::harmonic(1.0, 0.0);
    let s0 = initial_state(&InitialSpec::HoGround, &grid, &p, &pot).unwrap();
    let steps = 2000;
    let s = evolve(&s0, &pot, 2.0 * PI / steps as f64, steps, Method::SplitStepSpectral).unwrap();
    let d = (&s.density() - &s0.density()).max_magnitude();
    assert!(d < 1e-8, "{d}");
    assert!((s.t() - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn unitarity_both_methods() {
    let p = PhysParams::default();
    let grid = line(256, 16.0);
    let pot = Potential::harmonic(0.7, 1.0);
    let s0 = initial_state(&gauss(-2.0, 0.8, 1.5), &grid, &p, &pot).unwrap();
    for method in [Method::SplitStepSpectral, Method::CrankNicolson] {
        let s = evolve(&s0, &pot, 0.01, 1000, method).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10, "{method:?} {}", s.norm());
    }
    let dgrid = Grid::One(Grid1D::dirichlet(257, -16.0, 16.0).unwrap());
    let s0 = initial_state(&gauss(-2.0, 0.8, 1.5), &dgrid, &p, &pot).unwrap();
    let s = evolve(&s0, &pot, 0.01, 1000, Method::CrankNicolson).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn split_step_and_crank_nicolson_agree_at_second_order() {
    let p = PhysParams::default();
    let grid = line(256, 16.0);
    let pot = Potential::harmonic(1.0, 0.0);
    let s0 = initial_state(&gauss(1.0, 0.8, 0.5), &grid, &p, &pot).unwrap();
    let t = 1.0;
    let diff = |steps: usize| {
        let dt = t / steps as f64;
        let a = evolve(&s0, &pot, dt, steps, Method::SplitStepSpectral).unwrap();
        let b = evolve(&s0, &pot, dt, steps, Method::CrankNicolson).unwrap();
        (a.psi() - b.psi()).max_magnitude()
    };
    let (e1, e2) = (diff(100), diff(200));
    let order = (e1 / e2).log2();
    assert!(order > 1.8 && order < 2.2, "{e1} {e2} {order}");
}

#[test]
fn energy_is_conserved_for_static_potentials() {
    let p = PhysParams::default();
    let grid = line(256, 16.0);
    let pot = Potential::harmonic(1.0, 0.0);
    let s0 = initial_state(&gauss(1.0, 0.8, 0.5), &grid, &p, &pot).unwrap();
    let e0 = energy(&s0, &pot).unwrap();
    let s = evolve(&s0, &pot, 0.01, 500, Method::CrankNicolson).unwrap();
    let e1 = energy(&s, &pot).unwrap();
    assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} {e1}");
    let free = Potential::free();
    let s0 = initial_state(&gauss(1.0, 0.8, 0.5), &grid, &p, &free).unwrap();
    let e0 = energy(&s0, &free).unwrap();
    let s = evolve(&s0, &free, 0.01, 500, Method::SplitStepSpectral).unwrap();
    let e1 = energy(&s, &free).unwrap();
    assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} {e1}");
}

#[test]
fn ground_state_energy_matches_oscillator() {
    let p = PhysParams::default();
    let pot = Potential::harmonic(1.3, 0.0);
    let s = initial_state(&InitialSpec::HoGround, &line(192, 10.0), &p, &pot).unwrap();
    assert!((energy(&s, &pot).unwrap() - 0.65).abs() < 1e-10);
    let ax = Grid1D::periodic(112, -6.0, 6.0).unwrap();
    let g2 = Grid::Two(Grid2D::square(ax));
    let p2 = PhysParams::two_particle(1.0, 1.0, 2.0).unwrap();
    let pot2 = Potential::coupled_harmonic(1.0, 0.5);
    let s2 = initial_state(&InitialSpec::HoGround, &g2, &p2, &pot2).unwrap();
    let e = harmonic_ground_energy(&pot2, &p2, 2).unwrap();
    assert!((energy(&s2, &pot2).unwrap() - e).abs() < 1e-9);
}

#[test]
fn slabs_of_stationary_and_spreading_states() {
    let p = PhysParams::default();
    let grid = line(128, 10.0);
    let pot = Potential::harmonic(1.0, 0.0);
    let s0 = initial_state(&InitialSpec::HoGround, &grid, &p, &pot).unwrap();
    let sl = snapshot_slabs(&s0, &pot, 0.01, Method::CrankNicolson).unwrap();
    assert!((sl.prev() - sl.cur()).max_magnitude() < 1e-10);
    assert!((sl.next() - sl.cur()).max_magnitude() < 1e-10);

    let free = Potential::free();
    let s0 = initial_state(&gauss(0.0, 1.0, 0.0), &line(256, 20.0), &p, &free).unwrap();
    let sl = snapshot_slabs(&s0, &free, 0.01, Method::SplitStepSpectral).unwrap();
    let d2 = bornwave::numerics::second_time_derivative(&sl).unwrap();
    assert!(d2.values()[128] < 0.0);

    let k = 2.0 * PI / 40.0 * 3.0;
    let g = line(128, 20.0);
    let xs = g.as_1d().unwrap().coords();
    let spec = InitialSpec::Custom { re: xs.iter().map(|x| (k * x).cos()).collect(), im: xs.iter().map(|x| (k * x).sin()).collect() };
    let s0 = initial_state(&spec, &g, &p, &free).unwrap();
    let sl = snapshot_slabs(&s0, &free, 0.01, Method::SplitStepSpectral).unwrap();
    let d2 = bornwave::numerics::second_time_derivative(&sl).unwrap();
    assert!(d2.max_magnitude() < 1e-8);
}

#[test]
fn two_particle_unequal_masses_conserve_norm() {
    let ax = Grid1D::periodic(128, -6.0, 6.0).unwrap();
    let g2 = Grid::Two(Grid2D::square(ax));
    let p2 = PhysParams::two_particle(1.0, 1.0, 3.0).unwrap();
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let spec = InitialSpec::Boosted { base: Box::new(InitialSpec::HoGround), k: vec![1.0, -0.5] };
    let s0 = initial_state(&spec, &g2, &p2, &pot).unwrap();
    for method in [Method::SplitStepSpectral, Method::CrankNicolson] {
        let s = evolve(&s0, &pot, 0.02, 100, method).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn aliasing_time_step_is_refused() {
    let p = PhysParams::default();
    let grid = line(256, 16.0);
    let s0 = initial_state(&gauss(0.0, 0.5, 8.0), &grid, &p, &Potential::free()).unwrap();
    let err = evolve(&s0, &Potential::free(), 1.0, 1, Method::SplitStepSpectral).unwrap_err();
    assert!(err.is_numerical_abort());
    let dgrid = Grid::One(Grid1D::dirichlet(129, -8.0, 8.0).unwrap());
    let s0 = initial_state(&gauss(0.0, 1.0, 0.0), &dgrid, &p, &Potential::free()).unwrap();
    assert!(evolve(&s0, &Potential::free(), 0.01, 1, Method::SplitStepSpectral).is_err());
}
