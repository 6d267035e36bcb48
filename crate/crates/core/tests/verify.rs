use bornwave::madelung::ExtractOptions;
use bornwave::numerics::{Grid, Grid1D, Grid2D, NormKind};
use bornwave::schrodinger::*;
use bornwave::verify::*;
use proptest::prelude::*;
use std::f64::consts::PI;

const ONE_BODY: [EquationId; 5] = [
    EquationId::Continuity1p,
    EquationId::Hj1p,
    EquationId::Momentum1p,
    EquationId::Wave1p,
    EquationId::WaveEquilibrium1p,
];

fn slabs_1p(spec: &InitialSpec, pot: &Potential, n: usize, l: f64, t0: f64) -> FieldSlabs {
    let grid = Grid::One(Grid1D::periodic(n, -l, l).unwrap());
    let s = initial_state(spec, &grid, &PhysParams::default(), pot).unwrap();
    let dt = 0.25 * 2.0 * l / n as f64;
    let s = evolve(&s, pot, dt, (t0 / dt).round() as usize, Method::SplitStepSpectral).unwrap();
    FieldSlabs::from_state(&s, pot, dt, Method::SplitStepSpectral, &ExtractOptions::default()).unwrap()
}

fn free_gauss(n: usize) -> FieldSlabs {
    let k0 = 2.0 * PI * 4.0 / 40.0;
    slabs_1p(&InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0 }, &Potential::free(), n, 20.0, 0.5)
}

fn displaced_ho(n: usize) -> FieldSlabs {
    let spec = InitialSpec::Gaussian { x0: 1.5, sigma: 0.5f64.sqrt(), k0: 0.0 };
    slabs_1p(&spec, &Potential::harmonic(1.0, 0.0), n, 12.0, 0.7)
}

fn ladder(build: fn(usize) -> FieldSlabs) {
    let levels = [512, 1024, 2048];
    let slabs: Vec<FieldSlabs> = levels.iter().map(|&n| build(n)).collect();
    for eq in ONE_BODY {
        let table = convergence_study(levels.len(), NormKind::L2, |k| residual(eq, &slabs[k], AssemblyMode::Derived)).unwrap();
        let p = table.finest_order().unwrap();
        assert!(p >= 1.7, "{eq}: order {p}");
        assert!(!table.non_monotone, "{eq}");
        let last = residual(eq, &slabs[2], AssemblyMode::Derived).unwrap();
        assert!(last.norms.linf < 1e-4, "{eq}: Linf {}", last.norms.linf);
    }
}

#[test]
fn free_gaussian_residuals_converge_at_second_order() {
    ladder(free_gauss);
}

#[test]
fn oscillating_packet_residuals_converge_at_second_order() {
    ladder(displaced_ho);
}

/// Measured factor for `c = 0.1` on the free packet at n = 2048 (Linf ratio
/// corrupted/clean), 4.21e10.
const PROBE_FACTOR: f64 = 4.21e10;

#[test]
fn corrupted_velocity_is_detected() {
    let FieldSlabs::One(s) = free_gauss(2048) else { unreachable!() };
    let probe = velocity_uniqueness_probe(&s, 0.1).unwrap();
    assert!(probe.clean.norms.linf < 1e-4);
    assert!(probe.factor() > 1e2);
    assert!(probe.factor() > PROBE_FACTOR / 1.5, "factor {}", probe.factor());
    let zero = velocity_uniqueness_probe(&s, 0.0).unwrap();
    assert_eq!(zero.clean.norms, zero.corrupted.norms);
}

fn slabs_2p(p: PhysParams, n: usize) -> TwoBodySlabs {
    let grid = Grid::Two(Grid2D::square(Grid1D::periodic(n, -8.0, 8.0).unwrap()));
    let pot = Potential::coupled_harmonic(1.0, 0.5);
    let spec = InitialSpec::NormalModeGaussian { center: [1.0, 0.0], sigma: [0.7, 0.55], k: [0.0, 0.0] };
    let s = initial_state(&spec, &grid, &p, &pot).unwrap();
    let dt = 0.25 * 16.0 / n as f64;
    let s = evolve(&s, &pot, dt, (0.5 / dt).round() as usize, Method::SplitStepSpectral).unwrap();
    TwoBodySlabs::from_state(&s, &pot, dt, Method::SplitStepSpectral, &ExtractOptions::default()).unwrap()
}

#[test]
fn two_body_wave_equation_converges_and_has_cross_terms() {
    let p = PhysParams::two_particle(1.0, 1.0, 1.0).unwrap();
    let slabs: Vec<FieldSlabs> = [128, 256].iter().map(|&n| FieldSlabs::Two(Box::new(slabs_2p(p, n)))).collect();
    for eq in [EquationId::Continuity2p, EquationId::Momentum2p1, EquationId::Momentum2p2, EquationId::Wave2p] {
        let table = convergence_study(2, NormKind::L2, |k| residual(eq, &slabs[k], AssemblyMode::Derived)).unwrap();
        assert!(table.finest_order().unwrap() >= 1.7, "{eq}: {table:?}");
        // the literal coefficients are exact for equal masses
        let lit = residual(eq, &slabs[1], AssemblyMode::LiteralPaper).unwrap();
        let der = residual(eq, &slabs[1], AssemblyMode::Derived).unwrap();
        assert!((lit.norms.l2 - der.norms.l2).abs() <= 1e-12 * der.norms.l2);
    }
    let FieldSlabs::Two(s) = &slabs[1] else { unreachable!() };
    let c = classicality(s).unwrap();
    assert!(c.cross_norm > 0.1 && c.ratio > 0.1);
    assert!((c.single_only_residual - c.cross_norm).abs() < 1e-3 * c.cross_norm);
}

#[test]
fn literal_momentum_assembly_fails_for_unequal_masses() {
    let p = PhysParams::two_particle(1.0, 1.0, 2.0).unwrap();
    let coarse = FieldSlabs::Two(Box::new(slabs_2p(p, 128)));
    let fine = FieldSlabs::Two(Box::new(slabs_2p(p, 256)));
    for eq in [EquationId::Momentum2p1, EquationId::Momentum2p2] {
        let d = [&coarse, &fine].map(|s| residual(eq, s, AssemblyMode::Derived).unwrap().norms.l2);
        let l = [&coarse, &fine].map(|s| residual(eq, s, AssemblyMode::LiteralPaper).unwrap().norms.l2);
        assert!(d[0] / d[1] > 3.5, "{eq} derived {d:?}");
        assert!(l[0] / l[1] < 1.1 && l[1] > 1e-3, "{eq} literal {l:?}");
    }
    let w = residual(EquationId::Wave2p, &fine, AssemblyMode::Derived).unwrap();
    assert!(w.norms.linf < 1e-3);
}

#[test]
fn equation_ids_and_dimension_checks() {
    for eq in EquationId::ALL {
        assert_eq!(eq.name().parse::<EquationId>().unwrap(), eq);
        assert_eq!(serde_json::to_string(&eq).unwrap(), format!("\"{}\"", eq.name()));
    }
    assert!("eq_twelve".parse::<EquationId>().is_err());
    let s = free_gauss(512);
    assert!(residual(EquationId::Wave2p, &s, AssemblyMode::Derived).is_err());
}

#[test]
fn slabs_reject_inconsistent_spacing() {
    let FieldSlabs::One(s) = free_gauss(512) else { unreachable!() };
    let s = *s;
    assert!(HydroSlabs::new(s.prev.clone(), s.cur.clone(), s.next.clone(), 2.0 * s.dt).is_err());
    assert!(HydroSlabs::new(s.prev, s.cur, s.next, s.dt).is_ok());
}

#[test]
fn observed_order_of_exact_power_law() {
    let o = observed_orders(&[4.0, 1.0, 0.25], &[0.2, 0.1, 0.05]);
    for p in o {
        assert!((p - 2.0).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn observed_order_recovers_exponent(c in 1e-6f64..1e3, p in 0.5f64..6.0, h in 1e-3f64..1.0, r in 1.2f64..4.0) {
        let dx = [h, h / r, h / (r * r)];
        let res: Vec<f64> = dx.iter().map(|d| c * d.powf(p)).collect();
        for q in observed_orders(&res, &dx) {
            prop_assert!((q - p).abs() < 1e-9 * p.max(1.0));
        }
    }
}
