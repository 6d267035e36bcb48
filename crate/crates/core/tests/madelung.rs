use bornwave::madelung::*;
use bornwave::numerics::{diff, masked_norm, Grid, Grid1D, Grid2D, NormKind, RealField, Scheme};
use bornwave::schrodinger::*;
use std::f64::consts::PI;

fn line(n: usize, l: f64) -> Grid {
    Grid::One(Grid1D::periodic(n, -l, l).unwrap())
}

fn opts() -> ExtractOptions {
    ExtractOptions::default()
}

fn plane_wave(grid: &Grid, modes: f64) -> (QuantumState, f64) {
    let g = grid.as_1d().unwrap();
    let k = 2.0 * PI * modes / g.length();
    let xs = g.coords();
    let spec = InitialSpec::Custom {
        re: xs.iter().map(|x| (k * x).cos()).collect(),
        im: xs.iter().map(|x| (k * x).sin()).collect(),
    };
    (initial_state(&spec, grid, &PhysParams::default(), &Potential::free()).unwrap(), k)
}

#[test]
fn plane_wave_fields() {
    let grid = line(64, 5.0);
    let (s, k) = plane_wave(&grid, 3.0);
    let h = extract_1p(&s, &Potential::free(), &opts()).unwrap();
    let rho0 = h.rho.values()[0];
    for i in 0..64 {
        assert!((h.v.values()[i] - k).abs() < 1e-12);
        assert!(h.q.values()[i].abs() < 1e-12);
        assert!((h.pi.values()[i] - rho0 * k * k).abs() < 1e-12);
    }
}

#[test]
fn gaussian_quantum_potential_matches_closed_form() {
    let sigma = 1.3;
    let grid = line(512, 24.0);
    let p = PhysParams::default();
    let s = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma, k0: 0.0 }, &grid, &p, &Potential::free()).unwrap();
    let h = extract_1p(&s, &Potential::free(), &opts()).unwrap();
    let g = grid.as_1d().unwrap();
    let centre = g.coords().iter().position(|x| x.abs() < 1e-12).unwrap();
    let exact0 = 1.0 / (4.0 * sigma * sigma);
    assert!(((h.q.values()[centre] - exact0) / exact0).abs() < 1e-8);
    for (i, x) in g.coords().iter().enumerate() {
        if x.abs() < 4.0 * sigma {
            let exact = exact0 * (1.0 - x * x / (2.0 * sigma * sigma));
            assert!((h.q.values()[i] - exact).abs() < 1e-8, "x = {x}");
        }
    }
}

#[test]
fn harmonic_ground_state_is_static_and_bernoulli() {
    let p = PhysParams::default();
    let pot = Potential::harmonic(1.0, 0.0);
    let grid = line(128, 10.0);
    let s = initial_state(&InitialSpec::HoGround, &grid, &p, &pot).unwrap();
    let h = extract_1p(&s, &pot, &opts()).unwrap();
    let keep = interior_mask(&h.rho, 1e-10, 2);
    // round-off in psi is amplified by 1/sqrt(rho) in the far interior
    assert!(masked_norm(&h.v, Some(&keep), NormKind::Linf, false) < 1e-10);
    for i in 0..128 {
        if keep[i] {
            let e = h.potential.values()[i] + h.q.values()[i];
            assert!((e - 0.5).abs() < 1e-8, "{e}");
        }
    }
}

#[test]
fn current_and_phase_are_consistent_with_velocity() {
    let p = PhysParams::default();
    let grid = line(512, 20.0);
    let pot = Potential::harmonic(0.5, 0.0);
    let s0 = initial_state(&InitialSpec::Gaussian { x0: -1.0, sigma: 1.0, k0: 2.0 }, &grid, &p, &pot).unwrap();
    let s = evolve(&s0, &pot, 0.01, 50, Method::SplitStepSpectral).unwrap();
    let h = extract_1p(&s, &pot, &opts()).unwrap();
    let keep = interior_mask(&h.rho, 1e-10, 2);
    for i in 0..h.rho.len() {
        if !h.node_mask[i] {
            let mvr = p.m1 * h.v.values()[i] * h.rho.values()[i];
            assert!((mvr - h.j.values()[i]).abs() <= 1e-14 * h.j.max_magnitude().max(1.0));
        }
    }
    // phase gradient: fd4 on the unwrapped (non-periodic) action
    let ds = diff(&h.s, 0, 1, Scheme::Fd4).unwrap();
    let dx = grid.max_dx();
    let err = ds.zip_map(&h.v, |a, b| a / p.m1 - b).unwrap();
    let ok: Vec<bool> = keep.iter().zip(&h.seam_mask).map(|(k, s)| *k && !*s).collect();
    let e = masked_norm(&err, Some(&ok), NormKind::Linf, false);
    assert!(e < 50.0 * dx * dx, "{e}");
}

#[test]
fn both_quantum_potential_forms_agree() {
    let p = PhysParams::default();
    let grid = line(512, 20.0);
    let s0 = initial_state(&InitialSpec::Gaussian { x0: 0.5, sigma: 1.0, k0: 1.0 }, &grid, &p, &Potential::free()).unwrap();
    let s = evolve(&s0, &Potential::free(), 0.01, 100, Method::SplitStepSpectral).unwrap();
    let h = extract_1p(&s, &Potential::free(), &opts()).unwrap();
    let q2 = quantum_potential_from_density(&h.rho, &p, Scheme::Spectral, DEFAULT_NODE_EPS).unwrap();
    let keep = interior_mask(&h.rho, 1e-6, 2);
    let d = masked_norm(&(&h.q - &q2), Some(&keep), NormKind::Linf, false);
    assert!(d < 1e-7, "{d}");
    let pi2 = h.stress_from_density().unwrap();
    let d = masked_norm(&(&h.pi - &pi2), Some(&keep), NormKind::Linf, false);
    assert!(d < 1e-10, "{d}");
}

fn material_for(state: &QuantumState, pot: &Potential, dt: f64) -> (RealField, HydroFields) {
    let sl = state_slabs(state, pot, dt, Method::SplitStepSpectral).unwrap();
    let o = opts();
    let a = extract_1p(&sl.prev, pot, &o).unwrap();
    let b = extract_1p(&sl.cur, pot, &o).unwrap();
    let c = extract_1p(&sl.next, pot, &o).unwrap();
    (material_derivative(&a, &b, &c, dt).unwrap(), b)
}

#[test]
fn material_derivative_examples() {
    let p = PhysParams::default();
    let pot = Potential::harmonic(1.0, 0.0);
    let g = line(128, 10.0);
    let s = initial_state(&InitialSpec::HoGround, &g, &p, &pot).unwrap();
    let sl = state_slabs(&s, &pot, 0.01, Method::CrankNicolson).unwrap();
    let o = opts();
    let (a, b, c) = (
        extract_1p(&sl.prev, &pot, &o).unwrap(),
        extract_1p(&sl.cur, &pot, &o).unwrap(),
        extract_1p(&sl.next, &pot, &o).unwrap(),
    );
    let keep = interior_mask(&b.rho, 1e-10, 2);
    let m = material_derivative(&a, &b, &c, 0.01).unwrap();
    assert!(masked_norm(&m, Some(&keep), NormKind::Linf, false) < 1e-8);
    assert!(material_derivative(&a, &b, &c, 0.02).is_err());

    let (pw, _) = plane_wave(&line(64, 5.0), 2.0);
    let (m, _) = material_for(&pw, &Potential::free(), 0.01);
    assert!(m.max_magnitude() < 1e-10);

    // free Gaussian: Dv/Dt = -(1/m) dQ/dx, error O(dt^2)
    let free = Potential::free();
    let mut errs = vec![];
    for dt in [0.02, 0.01] {
        let s0 = initial_state(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0: 0.5 }, &line(512, 20.0), &p, &free).unwrap();
        let s = evolve(&s0, &free, 0.01, 50, Method::SplitStepSpectral).unwrap();
        let (m, h) = material_for(&s, &free, dt);
        let keep = interior_mask(&h.rho, 1e-10, 2);
        let r = m.zip_map(&h.dq, |a, b| a + b).unwrap();
        errs.push(masked_norm(&r, Some(&keep), NormKind::Linf, false));
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!((errs[0] / errs[1]).log2() > 1.7, "{errs:?}");
}

fn square(n: usize, l: f64) -> Grid {
    Grid::Two(Grid2D::square(Grid1D::periodic(n, -l, l).unwrap()))
}

#[test]
fn mixed_velocity_identity() {
    let p = PhysParams::default();
    let free = Potential::free();
    let g = |x0: f64, k0: f64| Box::new(InitialSpec::Gaussian { x0, sigma: 1.0, k0 });
    let prod = InitialSpec::Product { first: g(-1.0, 1.0), second: g(1.0, -0.5) };
    let s = initial_state(&prod, &square(64, 8.0), &p, &free).unwrap();
    let f = extract_2p(&s, &free, &opts()).unwrap();
    assert!(mixed_velocity_check(&f).unwrap() < 1e-9);

    // boosts commensurate with the box keep psi periodic
    let k = 2.0 * PI / 24.0 * 2.0;
    let sym = InitialSpec::Symmetrized { first: g(-1.0, k), second: g(1.0, k), exchange: Exchange::Symmetric };
    let mut res = vec![];
    for n in [96, 192] {
        let s = initial_state(&sym, &square(n, 12.0), &p, &free).unwrap();
        let s = evolve(&s, &free, 0.01, 20, Method::SplitStepSpectral).unwrap();
        res.push(mixed_velocity_check(&extract_2p(&s, &free, &opts()).unwrap()).unwrap());
    }
    // fd4 on nearly linear velocity fields: already at the conditioning floor
    for (r, dx) in res.iter().zip([0.25, 0.125]) {
        assert!(*r < dx * dx * 1e-3, "{res:?}");
    }

    let p2 = PhysParams::two_particle(1.0, 1.0, 2.0).unwrap();
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let kb = 2.0 * PI / 16.0;
    let spec = InitialSpec::Boosted { base: Box::new(InitialSpec::HoGround), k: vec![2.0 * kb, kb] };
    let mut res = vec![];
    for n in [150, 300] {
        let s = initial_state(&spec, &square(n, 8.0), &p2, &pot).unwrap();
        let s = evolve(&s, &pot, 0.005, 20, Method::SplitStepSpectral).unwrap();
        res.push(mixed_velocity_check(&extract_2p(&s, &pot, &opts()).unwrap()).unwrap());
    }
    assert!(res.iter().all(|r| *r < 1e-6), "{res:?}");
}

#[test]
fn extraction_rejects_vanishing_state() {
    let grid = line(16, 1.0);
    let z = bornwave::numerics::ComplexField::zeros(grid);
    let s = QuantumState::new(z, 0.0, PhysParams::default());
    assert!(s.is_err());
}


