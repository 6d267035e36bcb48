use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linsolve::{bicgstab, thomas_constant_offdiag};
use super::params::PhysParams;
use super::potential::Potential;
use super::state::{norm_squared, QuantumState};
use crate::error::{Error, Result};
use crate::numerics::spectral::{fft_all, map_lines};
use crate::numerics::{ComplexField, Grid, TimeSlabs};

/// Time integrator for the Schrödinger equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Strang splitting, half potential kick / exact kinetic flow in Fourier
    /// space / half kick. Periodic grids only.
    SplitStepSpectral,
    /// Cayley form `(1 + i dt H / 2hbar) psi' = (1 - i dt H / 2hbar) psi`;
    /// spectral kinetic operator on periodic grids, second differences with
    /// zero ghosts on Dirichlet grids.
    CrankNicolson,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SplitStepSpectral => "split_step_spectral",
            Method::CrankNicolson => "crank_nicolson",
        }
    }
}

/// Largest admissible change of `|norm - 1|` over a single step.
pub const STEP_NORM_DRIFT_LIMIT: f64 = 1e-12;
/// Largest admissible accumulated norm drift before a run aborts.
pub const TOTAL_NORM_DRIFT_LIMIT: f64 = 1e-8;
/// Spectral power (relative to the peak) above which a mode counts as occupied.
const OCCUPIED_POWER: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Kinetic {
    /// `T(k) = hbar^2 sum k_i^2 / (2 m_i)` in FFT order.
    Spectral { symbol: Vec<f64> },
    /// `T = -c_i * (second difference along axis i)`, `c_i = hbar^2 / (2 m_i dx_i^2)`.
    Fd2 { coef: Vec<f64> },
}

fn kinetic_for(grid: &Grid, params: &PhysParams) -> Result<Kinetic> {
    let axes = grid.axes();
    let h2 = params.hbar * params.hbar;
    if grid.all_periodic() {
        let ks: Vec<Vec<f64>> = axes.iter().map(|a| a.wavenumbers()).collect();
        let symbol = match grid.dims() {
            1 => ks[0].iter().map(|k| h2 * k * k / (2.0 * params.m1)).collect(),
            _ => {
                let mut s = Vec::with_capacity(grid.len());
                for k1 in &ks[0] {
                    for k2 in &ks[1] {
                        s.push(h2 * (k1 * k1 / (2.0 * params.m1) + k2 * k2 / (2.0 * params.m2)));
                    }
                }
                s
            }
        };
        Ok(Kinetic::Spectral { symbol })
    } else if axes.iter().all(|a| !a.is_periodic()) {
        Ok(Kinetic::Fd2 {
            coef: axes
                .iter()
                .enumerate()
                .map(|(i, a)| h2 / (2.0 * params.mass(i) * a.dx() * a.dx()))
                .collect(),
        })
    } else {
        Err(Error::InvalidGrid("mixed periodic/dirichlet axes are not supported by the propagators".into()))
    }
}

impl Kinetic {
    fn apply(&self, grid: &Grid, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Kinetic::Spectral { symbol } => {
                let mut hat = fft_all(psi, grid, false)?;
                hat.iter_mut().zip(symbol).for_each(|(c, s)| *c *= s);
                fft_all(&hat, grid, true)
            }
            Kinetic::Fd2 { coef } => {
                let mut out = vec![Complex64::default(); psi.len()];
                for (axis, &c) in coef.iter().enumerate() {
                    let part = map_lines(psi, grid, axis, |line, o| {
                        let n = line.len();
                        for j in 0..n {
                            let left = if j > 0 { line[j - 1] } else { Complex64::default() };
                            let right = if j + 1 < n { line[j + 1] } else { Complex64::default() };
                            o[j] = -(left - line[j] * 2.0 + right) * c;
                        }
                    })?;
                    out.iter_mut().zip(part).for_each(|(a, b)| *a += b);
                }
                Ok(out)
            }
        }
    }
}

/// Reusable one-step propagator for a fixed grid, potential and step.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid,
    params: PhysParams,
    potential: Potential,
    dt: f64,
    method: Method,
    kinetic: Kinetic,
    static_v: Option<Vec<f64>>,
}

impl Propagator {
    pub fn new(grid: &Grid, params: &PhysParams, potential: &Potential, dt: f64, method: Method) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidParameter(format!("time step {dt} must be finite and non-zero")));
        }
        if method == Method::SplitStepSpectral && !grid.all_periodic() {
            return Err(Error::SchemeBoundaryMismatch);
        }
        potential.validate(grid)?;
        let kinetic = kinetic_for(grid, params)?;
        let static_v = if potential.is_time_dependent() {
            None
        } else {
            Some(potential.samples(grid, params, 0.0)?.into_values())
        };
        Ok(Self {
            grid: *grid,
            params: *params,
            potential: potential.clone(),
            dt,
            method,
            kinetic,
            static_v,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn potential_at(&self, t: f64) -> Result<Vec<f64>> {
        match &self.static_v {
            Some(v) => Ok(v.clone()),
            None => Ok(self.potential.samples(&self.grid, &self.params, t)?.into_values()),
        }
    }

    /// Advances `psi` from `t` to `t + dt` (backwards when `dt < 0`).
    pub fn step(&self, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let v = self.potential_at(t + 0.5 * self.dt)?;
        match self.method {
            Method::SplitStepSpectral => self.split_step(psi, &v),
            Method::CrankNicolson => self.crank_nicolson(psi, &v),
        }
    }

    fn split_step(&self, psi: &[Complex64], v: &[f64]) -> Result<Vec<Complex64>> {
        let Kinetic::Spectral { symbol } = &self.kinetic else {
            return Err(Error::SchemeBoundaryMismatch);
        };
        let hbar = self.params.hbar;
        let half = 0.5 * self.dt / hbar;
        let kick = |p: &mut [Complex64]| {
            p.iter_mut()
                .zip(v)
                .for_each(|(c, &vv)| *c *= Complex64::from_polar(1.0, -vv * half));
        };
        let mut work = psi.to_vec();
        kick(&mut work);
        let mut hat = fft_all(&work, &self.grid, false)?;
        let drift = self.dt / hbar;
        hat.iter_mut()
            .zip(symbol)
            .for_each(|(c, &s)| *c *= Complex64::from_polar(1.0, -s * drift));
        let mut out = fft_all(&hat, &self.grid, true)?;
        kick(&mut out);
        Ok(out)
    }

    fn crank_nicolson(&self, psi: &[Complex64], v: &[f64]) -> Result<Vec<Complex64>> {
        let tau = Complex64::new(0.0, 0.5 * self.dt / self.params.hbar);
        let grid = self.grid;
        let apply_h = |x: &[Complex64]| -> Result<Vec<Complex64>> {
            let mut t = self.kinetic.apply(&grid, x)?;
            t.iter_mut().zip(x).zip(v).for_each(|((a, b), &vv)| *a += b * vv);
            Ok(t)
        };
        let hpsi = apply_h(psi)?;
        let rhs: Vec<Complex64> = psi.iter().zip(&hpsi).map(|(p, h)| p - tau * h).collect();
        match (&self.kinetic, grid.dims()) {
            (Kinetic::Fd2 { coef }, 1) => {
                let c = coef[0];
                let diag: Vec<Complex64> = v.iter().map(|&vv| 1.0 + tau * (2.0 * c + vv)).collect();
                Ok(thomas_constant_offdiag(&diag, -tau * c, &rhs))
            }
            _ => {
                let apply_a = |x: &[Complex64]| -> Result<Vec<Complex64>> {
                    let h = apply_h(x)?;
                    Ok(x.iter().zip(h).map(|(a, b)| a + tau * b).collect())
                };
                let precond = |r: &[Complex64]| -> Result<Vec<Complex64>> {
                    match &self.kinetic {
                        Kinetic::Spectral { symbol } => {
                            let mut hat = fft_all(r, &grid, false)?;
                            hat.iter_mut().zip(symbol).for_each(|(c, &s)| *c /= 1.0 + tau * s);
                            fft_all(&hat, &grid, true)
                        }
                        Kinetic::Fd2 { coef } => {
                            let mut x = r.to_vec();
                            for (axis, &c) in coef.iter().enumerate() {
                                x = map_lines(&x, &grid, axis, |line, o| {
                                    let diag = vec![1.0 + tau * 2.0 * c; line.len()];
                                    o.copy_from_slice(&thomas_constant_offdiag(&diag, -tau * c, line));
                                })?;
                            }
                            Ok(x)
                        }
                    }
                };
                bicgstab(apply_a, precond, &rhs, psi, 1e-14, 500)
            }
        }
    }

    /// `<H>` of a wavefunction at time `t`.
    pub fn energy(&self, psi: &[Complex64], t: f64) -> Result<f64> {
        let v = self.potential_at(t)?;
        let tpsi = self.kinetic.apply(&self.grid, psi)?;
        let e: f64 = psi
            .iter()
            .zip(&tpsi)
            .zip(&v)
            .map(|((p, tp), &vv)| (p.conj() * tp).re + vv * p.norm_sqr())
            .sum();
        Ok(e * self.grid.cell_volume())
    }
}

/// Refuses time steps whose per-step phases alias: the kinetic phase of the
/// highest occupied Fourier mode and the spread of the potential phase over
/// the occupied cells must both stay below pi.
pub fn check_time_step(state: &QuantumState, potential: &Potential, dt: f64) -> Result<()> {
    let grid = *state.grid();
    let p = state.params();
    let hat = fft_all(state.psi().values(), &grid, false)?;
    let power: Vec<f64> = hat.iter().map(|c| c.norm_sqr()).collect();
    let peak = power.iter().copied().fold(0.0, f64::max);
    let ks: Vec<Vec<f64>> = grid.axes().iter().map(|a| {
        let mut g = *a;
        if !g.is_periodic() {
            // spectral content estimate only; the sampled values are the same
            g = crate::numerics::Grid1D::periodic(a.n(), a.x_min(), a.x_min() + a.n() as f64 * a.dx())
                .expect("valid axis");
        }
        g.wavenumbers()
    }).collect();
    let (_, inner) = grid.shape();
    let mut kinetic_max: f64 = 0.0;
    for (idx, &pw) in power.iter().enumerate() {
        if pw > OCCUPIED_POWER * peak {
            let t = match grid.dims() {
                1 => ks[0][idx].powi(2) / (2.0 * p.m1),
                _ => ks[0][idx / inner].powi(2) / (2.0 * p.m1) + ks[1][idx % inner].powi(2) / (2.0 * p.m2),
            };
            kinetic_max = kinetic_max.max(t);
        }
    }
    let kinetic_phase = dt.abs() * p.hbar * kinetic_max;
    let rho = state.density();
    let rho_max = rho.max();
    let v = potential.samples(&grid, p, state.t())?;
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&r, &vv) in rho.values().iter().zip(v.values()) {
        if r > OCCUPIED_POWER * rho_max {
            vmin = vmin.min(vv);
            vmax = vmax.max(vv);
        }
    }
    let potential_phase = dt.abs() * (vmax - vmin).max(0.0) / p.hbar;
    let limit = std::f64::consts::PI;
    if kinetic_phase > limit || potential_phase > limit {
        return Err(Error::Cfl(format!(
            "dt = {dt}: kinetic phase {kinetic_phase:.3} and potential phase {potential_phase:.3} per step, limit {limit:.3}"
        )));
    }
    Ok(())
}

/// Evolves `state` by `n_steps` steps of size `dt`. The norm is checked after
/// every step and never renormalised.
pub fn evolve(state: &QuantumState, potential: &Potential, dt: f64, n_steps: usize, method: Method) -> Result<QuantumState> {
    let prop = Propagator::new(state.grid(), state.params(), potential, dt, method)?;
    evolve_with(&prop, state, n_steps)
}

pub fn evolve_with(prop: &Propagator, state: &QuantumState, n_steps: usize) -> Result<QuantumState> {
    check_time_step(state, &prop.potential, prop.dt)?;
    let grid = *state.grid();
    let mut psi = state.psi().values().to_vec();
    let mut t = state.t();
    let start = norm_squared(state.psi()).sqrt();
    let mut last = start;
    for step in 0..n_steps {
        psi = prop.step(&psi, t)?;
        t = state.t() + (step + 1) as f64 * prop.dt;
        let field = ComplexField::new(grid, psi)?;
        let now = norm_squared(&field).sqrt();
        if (now - last).abs() > STEP_NORM_DRIFT_LIMIT || (now - start).abs() > TOTAL_NORM_DRIFT_LIMIT {
            let limit = if (now - last).abs() > STEP_NORM_DRIFT_LIMIT {
                STEP_NORM_DRIFT_LIMIT
            } else {
                TOTAL_NORM_DRIFT_LIMIT
            };
            return Err(Error::NormDrift {
                drift: now - start,
                limit,
                steps: step + 1,
            });
        }
        last = now;
        psi = field.into_values();
    }
    Ok(QuantumState::from_parts(ComplexField::new(grid, psi)?, t, *state.params()))
}

/// `<H>` at the state's own time.
pub fn energy(state: &QuantumState, potential: &Potential) -> Result<f64> {
    let prop = Propagator::new(state.grid(), state.params(), potential, 1.0, Method::CrankNicolson)?;
    prop.energy(state.psi().values(), state.t())
}

/// Wavefunctions at `t - dt`, `t`, `t + dt`; the earlier one comes from the
/// time-reversed step of the same scheme.
#[derive(Clone, Debug)]
pub struct StateSlabs {
    pub prev: QuantumState,
    pub cur: QuantumState,
    pub next: QuantumState,
    pub dt: f64,
}

pub fn state_slabs(state: &QuantumState, potential: &Potential, dt: f64, method: Method) -> Result<StateSlabs> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("slab spacing must be positive".into()));
    }
    let next = evolve(state, potential, dt, 1, method)?;
    let prev = evolve(state, potential, -dt, 1, method)?;
    Ok(StateSlabs {
        prev,
        cur: state.clone(),
        next,
        dt,
    })
}

/// Densities `|psi|^2` at `t - dt`, `t`, `t + dt`.
pub fn snapshot_slabs(state: &QuantumState, potential: &Potential, dt: f64, method: Method) -> Result<TimeSlabs> {
    let s = state_slabs(state, potential, dt, method)?;
    TimeSlabs::new(s.prev.density(), s.cur.density(), s.next.density(), dt)
}

impl StateSlabs {
    pub fn densities(&self) -> Result<TimeSlabs> {
        TimeSlabs::new(self.prev.density(), self.cur.density(), self.next.density(), self.dt)
    }
}

