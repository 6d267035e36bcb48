//! Densities evolved without the constraint `rho = |psi|^2`.
//!
//! Two instruments share the log-density representation `rho = exp(w)`:
//! guided transport of an arbitrary density by the velocity field of a
//! Schrödinger evolution, and the self-consistent `(w, v)` system in which the
//! quantum potential is recomputed from the evolving density itself.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::madelung::{extract_1p, ExtractOptions};
use crate::numerics::{diff, Grid, RealField, Scheme};
use crate::schrodinger::{check_time_step, evolve_with, Method, PhysParams, Potential, Propagator, QuantumState, TOTAL_NORM_DRIFT_LIMIT};

/// Largest log-density change accepted in one self-consistent step.
pub const MAX_W_JUMP: f64 = 2.0;
/// Mass monitor tolerance.
pub const MASS_TOLERANCE: f64 = 1e-6;
/// Lowest density, relative to the maximum, the self-consistent system accepts.
pub const SELF_CONSISTENT_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoneqMode {
    GuidedTransport,
    SelfConsistent,
}

impl NoneqMode {
    pub fn name(self) -> &'static str {
        match self {
            NoneqMode::GuidedTransport => "guided_transport",
            NoneqMode::SelfConsistent => "self_consistent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NoneqState {
    pub w: RealField,
    /// Own velocity field; present in self-consistent mode only.
    pub v: Option<RealField>,
    pub t: f64,
    pub mode: NoneqMode,
}

fn log_density(rho: &RealField) -> Result<RealField> {
    if let Some(i) = rho.values().iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::Degenerate(format!(
            "density {} at cell {i} has no logarithm",
            rho.values()[i]
        )));
    }
    Ok(rho.map(f64::ln))
}

impl NoneqState {
    /// Density to be carried by an external velocity field.
    pub fn guided(rho: &RealField, t: f64) -> Result<Self> {
        if rho.grid().dims() != 1 {
            return Err(Error::InvalidParameter("non-equilibrium densities are one-particle".into()));
        }
        Ok(Self {
            w: log_density(rho)?,
            v: None,
            t,
            mode: NoneqMode::GuidedTransport,
        })
    }

    /// Density and velocity of the self-consistent system. The grid must have
    /// Dirichlet boundaries: `w` is not periodic for localized densities.
    pub fn self_consistent(rho: &RealField, v: RealField, t: f64) -> Result<Self> {
        let grid = *rho.grid();
        v.ensure_same_grid(&grid)?;
        if grid.dims() != 1 || grid.all_periodic() {
            return Err(Error::InvalidParameter(
                "the self-consistent system needs a one-particle Dirichlet grid".into(),
            ));
        }
        let floor = SELF_CONSISTENT_FLOOR * rho.max();
        if let Some(i) = rho.values().iter().position(|&r| r < floor) {
            return Err(Error::InvalidParameter(format!(
                "density at cell {i} is below {SELF_CONSISTENT_FLOOR:e} of its maximum; shrink the box"
            )));
        }
        Ok(Self {
            w: log_density(rho)?,
            v: Some(v),
            t,
            mode: NoneqMode::SelfConsistent,
        })
    }

    pub fn rho(&self) -> RealField {
        self.w.map(f64::exp)
    }

    pub fn mass(&self) -> f64 {
        self.rho().integral()
    }
}

/// `rho (1 + amplitude sin(2 pi modes (x - x_min) / L))`, renormalised.
pub fn perturb_density(rho: &RealField, amplitude: f64, modes: f64) -> Result<RealField> {
    let axis = rho.grid().axis(0)?;
    let k = 2.0 * std::f64::consts::PI * modes / axis.length();
    let xs = axis.coords();
    let raw: Vec<f64> = rho
        .values()
        .iter()
        .zip(&xs)
        .map(|(r, x)| r * (1.0 + amplitude * (k * (x - axis.x_min())).sin()))
        .collect();
    let f = RealField::new(*rho.grid(), raw)?;
    let mass = f.integral();
    Ok(f.scale(1.0 / mass))
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// `-d_x (rho v)` by upwinded MUSCL fluxes.
fn transport_rate(rho: &[f64], v: &[f64], dx: f64, periodic: bool) -> Vec<f64> {
    let n = rho.len();
    let at = |i: isize| -> f64 {
        if periodic {
            rho[i.rem_euclid(n as isize) as usize]
        } else if i < 0 || i >= n as isize {
            0.0
        } else {
            rho[i as usize]
        }
    };
    let vel = |i: isize| -> f64 {
        if periodic {
            v[i.rem_euclid(n as isize) as usize]
        } else if i < 0 || i >= n as isize {
            0.0
        } else {
            v[i as usize]
        }
    };
    // monotonized-central limiter
    let slope = |i: isize| {
        let (a, b) = (at(i + 1) - at(i), at(i) - at(i - 1));
        minmod(0.5 * (a + b), 2.0 * minmod(a, b))
    };
    // flux through the face between cells i and i + 1
    let flux = |i: isize| -> f64 {
        if !periodic && (i < 0 || i >= n as isize - 1) {
            return 0.0;
        }
        let u = 0.5 * (vel(i) + vel(i + 1));
        let face = if u >= 0.0 {
            at(i) + 0.5 * slope(i)
        } else {
            at(i + 1) - 0.5 * slope(i + 1)
        };
        u * face
    };
    let faces: Vec<f64> = (-1..n as isize).map(flux).collect();
    (0..n).map(|i| -(faces[i + 1] - faces[i]) / dx).collect()
}

fn face_courant(v: &[f64], dt: f64, dx: f64) -> f64 {
    v.windows(2)
        .map(|p| (0.5 * (p[0] + p[1])).abs())
        .fold(0.0, f64::max)
        * dt
        / dx
}

/// One Heun step of guided transport with the guidance velocity at the start
/// and end of the step.
pub fn step_guided(state: &NoneqState, v_now: &RealField, v_next: &RealField, dt: f64) -> Result<NoneqState> {
    if state.mode != NoneqMode::GuidedTransport {
        return Err(Error::InvalidParameter("state is not in guided-transport mode".into()));
    }
    let grid = *state.w.grid();
    v_now.ensure_same_grid(&grid)?;
    v_next.ensure_same_grid(&grid)?;
    let axis = grid.axis(0)?;
    let dx = axis.dx();
    let courant = face_courant(v_now.values(), dt, dx).max(face_courant(v_next.values(), dt, dx));
    if courant > 1.0 {
        return Err(Error::Cfl(format!("transport Courant number {courant:.3} exceeds 1 at t = {}", state.t)));
    }
    let periodic = axis.is_periodic();
    let rho = state.rho().into_values();
    let k1 = transport_rate(&rho, v_now.values(), dx, periodic);
    let mid: Vec<f64> = rho.iter().zip(&k1).map(|(r, k)| r + dt * k).collect();
    let k2 = transport_rate(&mid, v_next.values(), dx, periodic);
    let out: Vec<f64> = (0..rho.len()).map(|i| rho[i] + 0.5 * dt * (k1[i] + k2[i])).collect();
    if let Some(i) = out.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::StepRejected(format!(
            "transported density lost positivity at cell {i} (t = {})",
            state.t + dt
        )));
    }
    Ok(NoneqState {
        w: RealField::new(grid, out)?.map(f64::ln),
        v: None,
        t: state.t + dt,
        mode: NoneqMode::GuidedTransport,
    })
}

/// Quantum potential of `rho = exp(w)`: `-(hbar^2/4m)(w'' + w'^2/2)`.
pub fn quantum_potential_of_log_density(w: &RealField, params: &PhysParams, scheme: Scheme) -> Result<RealField> {
    let d1 = diff(w, 0, 1, scheme)?;
    let d2 = diff(w, 0, 2, scheme)?;
    let c = -params.hbar * params.hbar / (4.0 * params.m1);
    d2.zip_map(&d1, |a, b| c * (a + 0.5 * b * b))
}

/// Limit on [`dispersive_number`]; Heun's method amplifies undamped
/// oscillatory modes by `1 + y^4/8` per step.
pub const MAX_DISPERSIVE_NUMBER: f64 = 0.25;

/// `y = dt hbar (16/3) / (2 m dx^2)`: the phase per step of the fastest
/// grid mode of the quantum-potential term under the fourth-order stencil.
pub fn dispersive_number(params: &PhysParams, dt: f64, dx: f64) -> f64 {
    dt.abs() * params.hbar * 16.0 / 3.0 / (2.0 * params.m1 * dx * dx)
}

/// `w + amplitude sin(2 pi modes (x - x_min) / L)`, shifted so that
/// `int exp(w) = 1`.
pub fn perturb_log_density(w: &RealField, amplitude: f64, modes: f64) -> Result<RealField> {
    let axis = w.grid().axis(0)?;
    let k = 2.0 * std::f64::consts::PI * modes / axis.length();
    let xs = axis.coords();
    let raw: Vec<f64> = w
        .values()
        .iter()
        .zip(&xs)
        .map(|(w, x)| w + amplitude * (k * (x - axis.x_min())).sin())
        .collect();
    let f = RealField::new(*w.grid(), raw)?;
    let mass = f.map(f64::exp).integral();
    Ok(f.map(|x| x - mass.ln()))
}

/// Spatial scheme of the self-consistent system.
pub const SELF_CONSISTENT_SCHEME: Scheme = Scheme::Fd4;

/// Fourth-difference damping strength per unit `|w'|` (see
/// [`step_self_consistent`]).
pub const DAMPING_PER_SLOPE: f64 = 2.0;
/// Background fourth-difference damping strength.
pub const DAMPING_FLOOR: f64 = 0.5;

/// `-(sigma_i / 16 dx) delta^4 f` with `sigma_i = floor + per_slope |w'_i|`;
/// zero in the two outermost cells at each end.
fn damping(f: &[f64], dw: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i < 2 || i + 2 >= n {
                return 0.0;
            }
            let d4 = f[i - 2] - 4.0 * f[i - 1] + 6.0 * f[i] - 4.0 * f[i + 1] + f[i + 2];
            let sigma = DAMPING_FLOOR + DAMPING_PER_SLOPE * dw[i].abs();
            -sigma * d4 / (16.0 * dx)
        })
        .collect()
}

fn sc_rates(w: &RealField, v: &RealField, potential: &Potential, params: &PhysParams, t: f64) -> Result<(RealField, RealField)> {
    let s = SELF_CONSISTENT_SCHEME;
    let grid = *w.grid();
    let dw = diff(w, 0, 1, s)?;
    let dv = diff(v, 0, 1, s)?;
    let q = quantum_potential_of_log_density(w, params, s)?;
    let total = &potential.samples(&grid, params, t)? + &q;
    let force = diff(&total, 0, 1, s)?;
    let n = grid.len();
    let dx = grid.max_dx();
    let (vv, dwv, dvv, fv) = (v.values(), dw.values(), dv.values(), force.values());
    let damp_w = damping(w.values(), dwv, dx);
    let damp_v = damping(vv, dwv, dx);
    let rw = (0..n).map(|i| -vv[i] * dwv[i] - dvv[i] + damp_w[i]).collect();
    let rv = (0..n).map(|i| -vv[i] * dvv[i] - fv[i] / params.m1 + damp_v[i]).collect();
    Ok((RealField::new(grid, rw)?, RealField::new(grid, rv)?))
}

/// One explicit RK2 (Heun) step of the self-consistent `(w, v)` system.
///
/// Both fields carry a fourth-difference damping whose strength grows with
/// `|w'|`. Without it, grid modes at the peak of the discrete first-derivative
/// symbol have zero group velocity and grow at a rate `~ |w'| / dx` in the
/// low-density tails. The fourth difference vanishes on quadratic `w`.
pub fn step_self_consistent(state: &NoneqState, potential: &Potential, params: &PhysParams, dt: f64) -> Result<NoneqState> {
    let v = state
        .v
        .as_ref()
        .filter(|_| state.mode == NoneqMode::SelfConsistent)
        .ok_or_else(|| Error::InvalidParameter("state is not in self-consistent mode".into()))?;
    let dx = state.w.grid().max_dx();
    let courant = v.max_magnitude() * dt / dx;
    if courant > 1.0 {
        return Err(Error::Cfl(format!("velocity Courant number {courant:.3} exceeds 1 at t = {}", state.t)));
    }
    let dispersive = dispersive_number(params, dt, dx);
    if dispersive > MAX_DISPERSIVE_NUMBER {
        return Err(Error::Cfl(format!(
            "dispersive number {dispersive:.3} exceeds {MAX_DISPERSIVE_NUMBER} (dt must scale like dx^2)"
        )));
    }
    let (kw1, kv1) = sc_rates(&state.w, v, potential, params, state.t)?;
    let w1 = &state.w + &kw1.scale(dt);
    let v1 = v + &kv1.scale(dt);
    let (kw2, kv2) = sc_rates(&w1, &v1, potential, params, state.t + dt)?;
    let dw = (&kw1 + &kw2).scale(0.5 * dt);
    let jump = dw.max_magnitude();
    if !(jump <= MAX_W_JUMP) {
        let at = dw.values().iter().position(|x| !(x.abs() <= MAX_W_JUMP)).unwrap_or(0);
        return Err(Error::StepRejected(format!(
            "log-density jump {jump:.3e} at x = {:.4} (t = {}) exceeds {MAX_W_JUMP}",
            state.w.grid().point(at)[0],
            state.t
        )));
    }
    let w = &state.w + &dw;
    let v = v + &(&kv1 + &kv2).scale(0.5 * dt);
    if let Some(i) = w.values().iter().chain(v.values()).position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i % state.w.len()));
    }
    Ok(NoneqState {
        w,
        v: Some(v),
        t: state.t + dt,
        mode: NoneqMode::SelfConsistent,
    })
}

/// Distances between a density and a reference at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationEntry {
    pub time: f64,
    /// `int |rho - rho_ref|`
    pub l1: f64,
    pub linf: f64,
    /// `int rho`
    pub mass: f64,
}

pub fn deviation(rho: &RealField, reference: &RealField, time: f64) -> Result<DeviationEntry> {
    rho.ensure_same_grid(reference.grid())?;
    let d = rho - reference;
    Ok(DeviationEntry {
        time,
        l1: d.map(f64::abs).integral(),
        linf: d.max_magnitude(),
        mass: rho.integral(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationTrace {
    pub entries: Vec<DeviationEntry>,
}

impl DeviationTrace {
    pub fn push(&mut self, e: DeviationEntry) {
        self.entries.push(e);
    }

    pub fn last(&self) -> Option<&DeviationEntry> {
        self.entries.last()
    }

    pub fn max_l1(&self) -> f64 {
        self.entries.iter().map(|e| e.l1).fold(0.0, f64::max)
    }

    /// Largest `|int rho - 1|` seen.
    pub fn max_mass_error(&self) -> f64 {
        self.entries.iter().map(|e| (e.mass - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `L1 / L1(t0)`, or `None` when the first distance is zero.
    pub fn ratio(&self) -> Option<Vec<f64>> {
        let first = self.entries.first()?.l1;
        (first > 0.0).then(|| self.entries.iter().map(|e| e.l1 / first).collect())
    }

    /// CSV with header `scenario_id,time,L1,Linf`.
    pub fn write_csv<W: Write>(&self, out: W, scenario_id: &str) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["scenario_id", "time", "L1", "Linf"])?;
        for e in &self.entries {
            w.serialize((scenario_id, e.time, e.l1, e.linf))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NoneqRun {
    pub state: NoneqState,
    pub reference: QuantumState,
    pub trace: DeviationTrace,
}

fn guidance(state: &QuantumState, potential: &Potential) -> Result<RealField> {
    let opts = ExtractOptions::default();
    Ok(extract_1p(state, potential, &opts)?.v)
}

/// Transports `rho0` with the velocity of `psi` (evolved by split-step)
/// and records the distance to `|psi|^2` every `stride` steps.
pub fn run_guided(psi: &QuantumState, potential: &Potential, rho0: &RealField, dt: f64, steps: usize, stride: usize) -> Result<NoneqRun> {
    let prop = Propagator::new(psi.grid(), psi.params(), potential, dt, Method::SplitStepSpectral)?;
    check_time_step(psi, potential, dt)?;
    let stride = stride.max(1);
    let mut reference = psi.clone();
    let mut state = NoneqState::guided(rho0, psi.t())?;
    let mut trace = DeviationTrace::default();
    trace.push(deviation(&state.rho(), &reference.density(), state.t)?);
    let start = reference.norm();
    let mut v_now = guidance(&reference, potential)?;
    for step in 1..=steps {
        let next = evolve_with(&prop, &reference, 1)?;
        if (next.norm() - start).abs() > TOTAL_NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                drift: next.norm() - start,
                limit: TOTAL_NORM_DRIFT_LIMIT,
                steps: step,
            });
        }
        let v_next = guidance(&next, potential)?;
        state = step_guided(&state, &v_now, &v_next, dt)?;
        reference = next;
        v_now = v_next;
        if step % stride == 0 || step == steps {
            trace.push(deviation(&state.rho(), &reference.density(), state.t)?);
        }
    }
    Ok(NoneqRun { state, reference, trace })
}

/// Evolves the self-consistent system from `(w0, v0)` alongside a
/// Crank-Nicolson Schrödinger reference started from `psi`.
pub fn run_self_consistent(
    psi: &QuantumState,
    potential: &Potential,
    initial: NoneqState,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<NoneqRun> {
    initial.w.ensure_same_grid(psi.grid())?;
    let params = *psi.params();
    let prop = Propagator::new(psi.grid(), &params, potential, dt, Method::CrankNicolson)?;
    let stride = stride.max(1);
    let mut reference = psi.clone();
    let mut state = initial;
    let mut trace = DeviationTrace::default();
    trace.push(deviation(&state.rho(), &reference.density(), state.t)?);
    let mut recorded = 0;
    for step in 1..=steps {
        state = step_self_consistent(&state, potential, &params, dt)?;
        if step % stride == 0 || step == steps {
            reference = evolve_with(&prop, &reference, step - recorded)?;
            recorded = step;
            trace.push(deviation(&state.rho(), &reference.density(), state.t)?);
        }
    }
    Ok(NoneqRun { state, reference, trace })
}

/// Equilibrium initial data `(ln |psi|^2, v)` for the self-consistent system;
/// `v` is taken pointwise from the current `Im(psi* psi') / |psi|^2`.
pub fn equilibrium_initial(psi: &QuantumState) -> Result<NoneqState> {
    let grid: Grid = *psi.grid();
    let p = psi.params();
    let dpsi = diff(psi.psi(), 0, 1, SELF_CONSISTENT_SCHEME)?;
    let v = psi
        .psi()
        .values()
        .iter()
        .zip(dpsi.values())
        .map(|(a, b)| p.hbar / p.m1 * (a.conj() * b).im / a.norm_sqr())
        .collect();
    NoneqState::self_consistent(&psi.density(), RealField::new(grid, v)?, psi.t())
}
