use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::PhysParams;
use super::potential::{Potential, PotentialKind};
use crate::error::{Error, Result};
use crate::numerics::{ComplexField, Grid, Grid1D, RealField};

/// Normalisation tolerance carried by every [`QuantumState`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// A normalised wavefunction at time `t`.
#[derive(Clone, Debug)]
pub struct QuantumState {
    psi: ComplexField,
    t: f64,
    params: PhysParams,
}

/// Cell-weighted `sum |psi|^2 dV`.
pub fn norm_squared(psi: &ComplexField) -> f64 {
    psi.values().iter().map(|c| c.norm_sqr()).sum::<f64>() * psi.grid().cell_volume()
}

impl QuantumState {
    pub fn new(psi: ComplexField, t: f64, params: PhysParams) -> Result<Self> {
        let params = params.validated()?;
        let n = norm_squared(&psi);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "state norm {n} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(Self { psi, t, params })
    }

    /// Scales `psi` to unit norm first.
    pub fn normalized(psi: ComplexField, t: f64, params: PhysParams) -> Result<Self> {
        let n = norm_squared(&psi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        let psi = psi.scale(1.0 / n.sqrt());
        Self::new(psi, t, params)
    }

    pub(crate) fn from_parts(psi: ComplexField, t: f64, params: PhysParams) -> Self {
        Self { psi, t, params }
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn norm(&self) -> f64 {
        norm_squared(&self.psi).sqrt()
    }

    pub fn density(&self) -> RealField {
        self.psi.density()
    }
}

/// Sign of a two-particle (anti)symmetrisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exchange {
    Symmetric,
    Antisymmetric,
}

impl Exchange {
    pub fn sign(self) -> f64 {
        match self {
            Exchange::Symmetric => 1.0,
            Exchange::Antisymmetric => -1.0,
        }
    }
}

/// Declarative initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// `exp(-(x - x0)^2 / (4 sigma^2) + i k0 x)`; `sigma` is the standard
    /// deviation of the density.
    Gaussian { x0: f64, sigma: f64, k0: f64 },
    /// Ground state of the run's harmonic or coupled-harmonic potential.
    HoGround,
    /// `phi(x1) chi(x2)`.
    Product { first: Box<InitialSpec>, second: Box<InitialSpec> },
    /// `phi(x1) chi(x2) +/- phi(x2) chi(x1)`, normalised.
    Symmetrized {
        first: Box<InitialSpec>,
        second: Box<InitialSpec>,
        exchange: Exchange,
    },
    /// Gaussian in the normal coordinates `R = (x1 + x2)/sqrt2`,
    /// `r = (x1 - x2)/sqrt2`; entangled in `(x1, x2)` when the two widths differ.
    NormalModeGaussian { center: [f64; 2], sigma: [f64; 2], k: [f64; 2] },
    /// `base * exp(i k . x)`.
    Boosted { base: Box<InitialSpec>, k: Vec<f64> },
    /// Tabulated amplitude on the run's grid.
    Custom { re: Vec<f64>, im: Vec<f64> },
}

/// Fewest grid points the density's standard deviation must span, counted
/// across the `[-sigma, sigma]` core.
pub const MIN_POINTS_PER_TWO_SIGMA: f64 = 8.0;

fn check_resolved(sigma: f64, dx: f64, what: &str) -> Result<()> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("{what}: width {sigma} must be positive")));
    }
    if 2.0 * sigma / dx < MIN_POINTS_PER_TWO_SIGMA {
        return Err(Error::UnderResolved(format!(
            "{what}: sigma = {sigma} spans {:.1} points across 2 sigma (need {MIN_POINTS_PER_TWO_SIGMA})",
            2.0 * sigma / dx
        )));
    }
    Ok(())
}

fn gaussian(x: f64, x0: f64, sigma: f64, k0: f64) -> Complex64 {
    let env = (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
    Complex64::from_polar(env, k0 * x)
}

fn harmonic_frequency(potential: &Potential) -> Result<(f64, f64)> {
    match potential.kind {
        PotentialKind::Harmonic { omega, center } => Ok((omega, center)),
        PotentialKind::CoupledHarmonic { omega, .. } => Ok((omega, 0.0)),
        _ => Err(Error::InvalidParameter(
            "ho_ground requires a harmonic or coupled_harmonic potential".into(),
        )),
    }
}

/// Unnormalised single-particle amplitude on one axis.
fn one_body(spec: &InitialSpec, axis: &Grid1D, mass: f64, hbar: f64, potential: &Potential) -> Result<Vec<Complex64>> {
    let xs = axis.coords();
    match spec {
        InitialSpec::Gaussian { x0, sigma, k0 } => {
            check_resolved(*sigma, axis.dx(), "gaussian")?;
            Ok(xs.iter().map(|&x| gaussian(x, *x0, *sigma, *k0)).collect())
        }
        InitialSpec::HoGround => {
            let (omega, center) = harmonic_frequency(potential)?;
            if !(omega > 0.0) {
                return Err(Error::InvalidParameter("ho_ground needs omega > 0".into()));
            }
            let sigma = (hbar / (2.0 * mass * omega)).sqrt();
            check_resolved(sigma, axis.dx(), "ho_ground")?;
            Ok(xs.iter().map(|&x| gaussian(x, center, sigma, 0.0)).collect())
        }
        InitialSpec::Boosted { base, k } => {
            let b = one_body(base, axis, mass, hbar, potential)?;
            let k0 = *k.first().ok_or_else(|| Error::InvalidParameter("boost needs one wavenumber".into()))?;
            Ok(b.iter().zip(&xs).map(|(c, &x)| c * Complex64::from_polar(1.0, k0 * x)).collect())
        }
        InitialSpec::Custom { re, im } if re.len() == xs.len() && im.len() == xs.len() => {
            Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
        }
        other => Err(Error::InvalidParameter(format!(
            "{other:?} is not a single-particle initial state"
        ))),
    }
}

/// Ground state of `w^2 (m1 x1^2 + m2 x2^2)/2 + kappa (x1 - x2)^2` as the
/// quadratic form `exp(-x^T M x / (2 hbar))`.
fn coupled_ground_form(omega: f64, kappa: f64, p: &PhysParams) -> Result<[f64; 3]> {
    // mass-weighted coordinates y_i = sqrt(m_i) x_i turn the potential into
    // y^T A y / 2 with A = w^2 I + 2 kappa u u^T, u = (1/sqrt m1, -1/sqrt m2)
    let u = [1.0 / p.m1.sqrt(), -1.0 / p.m2.sqrt()];
    let u2 = u[0] * u[0] + u[1] * u[1];
    let lam = omega * omega + 2.0 * kappa * u2;
    if !(omega > 0.0) || !(lam > 0.0) {
        return Err(Error::InvalidParameter("coupled oscillator is not confining".into()));
    }
    let extra = lam.sqrt() - omega;
    let root = |a: usize, b: usize| {
        let id = if a == b { omega } else { 0.0 };
        id + extra * u[a] * u[b] / u2
    };
    let d = [p.m1.sqrt(), p.m2.sqrt()];
    Ok([
        d[0] * d[0] * root(0, 0),
        d[0] * d[1] * root(0, 1),
        d[1] * d[1] * root(1, 1),
    ])
}

/// Builds a normalised initial state on `grid`.
pub fn initial_state(spec: &InitialSpec, grid: &Grid, params: &PhysParams, potential: &Potential) -> Result<QuantumState> {
    let params = params.validated()?;
    let hbar = params.hbar;
    let psi: Vec<Complex64> = match (grid, spec) {
        (Grid::One(axis), _) => one_body(spec, axis, params.m1, hbar, potential)?,
        (Grid::Two(g), InitialSpec::Product { first, second }) => {
            let a = one_body(first, &g.axis1, params.m1, hbar, potential)?;
            let b = one_body(second, &g.axis2, params.m2, hbar, potential)?;
            a.iter().flat_map(|&u| b.iter().map(move |&w| u * w)).collect()
        }
        (Grid::Two(g), InitialSpec::Symmetrized { first, second, exchange }) => {
            if !g.identical_axes() {
                return Err(Error::NonSquareGrid("symmetrisation needs identical axes".into()));
            }
            let phi = one_body(first, &g.axis1, params.m1, hbar, potential)?;
            let chi = one_body(second, &g.axis1, params.m2, hbar, potential)?;
            let n = phi.len();
            let s = exchange.sign();
            let mut out = Vec::with_capacity(n * n);
            let mut direct = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d = phi[i] * chi[j];
                    direct += d.norm_sqr();
                    out.push(d + phi[j] * chi[i] * s);
                }
            }
            let sym: f64 = out.iter().map(|c| c.norm_sqr()).sum();
            if sym <= 1e-12 * direct {
                return Err(Error::ZeroNorm);
            }
            out
        }
        (Grid::Two(g), InitialSpec::HoGround) => match potential.kind {
            PotentialKind::CoupledHarmonic { omega, kappa } => {
                let [a, b, c] = coupled_ground_form(omega, kappa, &params)?;
                // narrowest density width: sqrt(hbar / (2 lambda_max(M)))
                let tr = a + c;
                let det = a * c - b * b;
                let lmax = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
                check_resolved((hbar / (2.0 * lmax)).sqrt(), g.axis1.dx().max(g.axis2.dx()), "ho_ground")?;
                let f = |x: &[f64]| {
                    let q = a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + c * x[1] * x[1];
                    Complex64::new((-q / (2.0 * hbar)).exp(), 0.0)
                };
                ComplexField::from_fn(*grid, f)?.into_values()
            }
            _ => {
                let a = one_body(&InitialSpec::HoGround, &g.axis1, params.m1, hbar, potential)?;
                let b = one_body(&InitialSpec::HoGround, &g.axis2, params.m2, hbar, potential)?;
                a.iter().flat_map(|&u| b.iter().map(move |&w| u * w)).collect()
            }
        },
        (Grid::Two(g), InitialSpec::NormalModeGaussian { center, sigma, k }) => {
            let dx = g.axis1.dx().max(g.axis2.dx());
            check_resolved(sigma[0], dx, "normal_mode_gaussian R")?;
            check_resolved(sigma[1], dx, "normal_mode_gaussian r")?;
            ComplexField::from_fn(*grid, |x| {
                let big = (x[0] + x[1]) * FRAC_1_SQRT_2;
                let rel = (x[0] - x[1]) * FRAC_1_SQRT_2;
                gaussian(big, center[0], sigma[0], k[0]) * gaussian(rel, center[1], sigma[1], k[1])
            })?
            .into_values()
        }
        (Grid::Two(_), InitialSpec::Boosted { base, k }) => {
            if k.len() != 2 {
                return Err(Error::InvalidParameter("two-particle boost needs two wavenumbers".into()));
            }
            let b = initial_state(base, grid, &params, potential)?;
            let phase = ComplexField::from_fn(*grid, |x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]))?;
            b.psi.values().iter().zip(phase.values()).map(|(a, p)| a * p).collect()
        }
        (Grid::Two(_), InitialSpec::Custom { re, im }) => {
            if re.len() != grid.len() || im.len() != grid.len() {
                return Err(Error::GridMismatch("custom amplitude does not match the grid".into()));
            }
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
        }
        (Grid::Two(_), InitialSpec::Gaussian { .. }) => {
            return Err(Error::InvalidParameter(
                "a bare gaussian is single-particle; wrap it in product or symmetrized".into(),
            ))
        }
    };
    let field = ComplexField::new(*grid, psi)?;
    QuantumState::normalized(field, 0.0, params)
}

/// Ground-state energy of the harmonic kinds, used by tests and reports.
pub fn harmonic_ground_energy(potential: &Potential, params: &PhysParams, dims: usize) -> Option<f64> {
    let h = params.hbar;
    match potential.kind {
        PotentialKind::Harmonic { omega, .. } => Some(0.5 * h * omega * dims as f64),
        PotentialKind::CoupledHarmonic { omega, kappa } if dims == 2 => {
            let u2 = 1.0 / params.m1 + 1.0 / params.m2;
            Some(0.5 * h * (omega + (omega * omega + 2.0 * kappa * u2).sqrt()))
        }
        _ => None,
    }
}

/// Free Gaussian density width at time `t` for an initial width `sigma0`.
pub fn free_gaussian_width(sigma0: f64, t: f64, params: &PhysParams) -> f64 {
    let tau = params.hbar * t / (2.0 * params.m1 * sigma0 * sigma0);
    sigma0 * (1.0 + tau * tau).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid2D;

    fn line() -> Grid1D {
        Grid1D::periodic(256, -12.0, 12.0).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let g = Grid::One(line());
        let s = initial_state(
            &InitialSpec::Gaussian { x0: 0.0, sigma: 1.0, k0: 0.0 },
            &g,
            &PhysParams::default(),
            &Potential::free(),
        )
        .unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let rho = s.density();
        assert!((g.point(rho.argmax())[0]).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_state_is_swap_invariant() {
        let g = Grid::Two(Grid2D::square(Grid1D::periodic(160, -8.0, 8.0).unwrap()));
        let spec = InitialSpec::Symmetrized {
            first: Box::new(InitialSpec::Gaussian { x0: -1.5, sigma: 0.8, k0: 0.7 }),
            second: Box::new(InitialSpec::Gaussian { x0: 1.0, sigma: 0.9, k0: -0.4 }),
            exchange: Exchange::Symmetric,
        };
        let s = initial_state(&spec, &g, &PhysParams::default(), &Potential::free()).unwrap();
        let n = 160;
        let v = s.psi().values();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(v[i * n + j], v[j * n + i]);
            }
        }
    }

    #[test]
    fn antisymmetrized_identical_orbitals_fail() {
        let g = Grid::Two(Grid2D::square(Grid1D::periodic(160, -8.0, 8.0).unwrap()));
        let orb = InitialSpec::Gaussian { x0: 0.5, sigma: 0.8, k0: 0.3 };
        let spec = InitialSpec::Symmetrized {
            first: Box::new(orb.clone()),
            second: Box::new(orb),
            exchange: Exchange::Antisymmetric,
        };
        let r = initial_state(&spec, &g, &PhysParams::default(), &Potential::free());
        assert!(matches!(r, Err(Error::ZeroNorm)));
    }

    #[test]
    fn under_resolved_width_is_rejected() {
        let g = Grid::One(Grid1D::periodic(64, -30.0, 30.0).unwrap());
        let r = initial_state(
            &InitialSpec::Gaussian { x0: 0.0, sigma: 0.5, k0: 0.0 },
            &g,
            &PhysParams::default(),
            &Potential::free(),
        );
        assert!(matches!(r, Err(Error::UnderResolved(_))));
    }

    #[test]
    fn coupled_ground_reduces_to_product_without_coupling() {
        let g = Grid::Two(Grid2D::square(Grid1D::periodic(160, -8.0, 8.0).unwrap()));
        let p = PhysParams::two_particle(1.0, 1.0, 2.0).unwrap();
        let a = initial_state(&InitialSpec::HoGround, &g, &p, &Potential::coupled_harmonic(1.3, 0.0)).unwrap();
        let b = initial_state(&InitialSpec::HoGround, &g, &p, &Potential::harmonic(1.3, 0.0)).unwrap();
        assert!((a.psi() - b.psi()).max_magnitude() < 1e-12);
    }
}
