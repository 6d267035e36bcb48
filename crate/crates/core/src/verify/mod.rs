//! Residual engine: assembles each hydrodynamic balance law and density wave
//! equation from extracted fields at three consecutive times and measures it.

mod convergence;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use convergence::{convergence_study, observed_orders, ConvergenceRow, ConvergenceTable};

use crate::error::{Error, Result};
use crate::madelung::{extract_1p, extract_2p, interior_mask, ExtractOptions, HydroFields, PiForm, TwoBodyFields};
use crate::numerics::{diff, diff_mixed, masked_norm, Grid, NormKind, NormTriple, RealField, Scheme};
use crate::schrodinger::{state_slabs, Method, Potential, QuantumState};

/// Relative density floor for the residual interior.
pub const INTERIOR_REL: f64 = 1e-10;
/// Cells removed around the excluded region.
pub const INTERIOR_HALO: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquationId {
    /// `d_t rho + d_x (rho v) = 0`
    #[serde(rename = "continuity_1p")]
    Continuity1p,
    /// `-d_t S - (d_x S)^2 / 2m = V + Q`
    #[serde(rename = "hj_1p")]
    Hj1p,
    /// `d_t (rho v) = -d_x Pi - (rho/m) d_x V`
    #[serde(rename = "momentum_1p")]
    Momentum1p,
    /// `d_t^2 rho = d_x^2 Pi + (1/m) d_x (rho d_x V)`
    #[serde(rename = "wave_1p")]
    Wave1p,
    /// `d_t^2 rho = d_x^2 (rho v^2) - d_x [rho (d_t + v d_x) v]`
    #[serde(rename = "wave_equilibrium_1p")]
    WaveEquilibrium1p,
    #[serde(rename = "continuity_2p")]
    Continuity2p,
    #[serde(rename = "hj_2p")]
    Hj2p,
    /// Momentum balance for `rho v1`.
    #[serde(rename = "momentum_2p_1")]
    Momentum2p1,
    /// Momentum balance for `rho v2`.
    #[serde(rename = "momentum_2p_2")]
    Momentum2p2,
    /// Two-body density wave equation with cross terms.
    #[serde(rename = "wave_2p")]
    Wave2p,
}

impl EquationId {
    pub const ALL: [EquationId; 10] = [
        EquationId::Continuity1p,
        EquationId::Hj1p,
        EquationId::Momentum1p,
        EquationId::Wave1p,
        EquationId::WaveEquilibrium1p,
        EquationId::Continuity2p,
        EquationId::Hj2p,
        EquationId::Momentum2p1,
        EquationId::Momentum2p2,
        EquationId::Wave2p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquationId::Continuity1p => "continuity_1p",
            EquationId::Hj1p => "hj_1p",
            EquationId::Momentum1p => "momentum_1p",
            EquationId::Wave1p => "wave_1p",
            EquationId::WaveEquilibrium1p => "wave_equilibrium_1p",
            EquationId::Continuity2p => "continuity_2p",
            EquationId::Hj2p => "hj_2p",
            EquationId::Momentum2p1 => "momentum_2p_1",
            EquationId::Momentum2p2 => "momentum_2p_2",
            EquationId::Wave2p => "wave_2p",
        }
    }

    pub fn dims(self) -> usize {
        match self {
            EquationId::Continuity1p
            | EquationId::Hj1p
            | EquationId::Momentum1p
            | EquationId::Wave1p
            | EquationId::WaveEquilibrium1p => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquationId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EquationId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown equation '{s}'")))
    }
}

/// How the two-body momentum balances are assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMode {
    /// Derived from the two-body Hamilton-Jacobi equation for general masses.
    #[default]
    Derived,
    /// The literal velocity equations substituted as written (coefficients
    /// valid for equal masses only).
    LiteralPaper,
}

impl AssemblyMode {
    pub fn name(self) -> &'static str {
        match self {
            AssemblyMode::Derived => "derived",
            AssemblyMode::LiteralPaper => "literal_paper",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: EquationId,
    pub norms: NormTriple,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub interior_fraction: f64,
    pub scenario_id: String,
    pub scheme: Scheme,
    pub level: usize,
    pub mode: AssemblyMode,
    pub pi_form: PiForm,
}

impl ResidualReport {
    pub fn with_meta(mut self, scenario_id: &str, level: usize) -> Self {
        self.scenario_id = scenario_id.to_string();
        self.level = level;
        self
    }
}

/// One-particle fields at `t - dt`, `t`, `t + dt`.
#[derive(Clone, Debug)]
pub struct HydroSlabs {
    pub prev: HydroFields,
    pub cur: HydroFields,
    pub next: HydroFields,
    pub dt: f64,
}

/// Two-particle fields at `t - dt`, `t`, `t + dt`.
#[derive(Clone, Debug)]
pub struct TwoBodySlabs {
    pub prev: TwoBodyFields,
    pub cur: TwoBodyFields,
    pub next: TwoBodyFields,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub enum FieldSlabs {
    One(Box<HydroSlabs>),
    Two(Box<TwoBodySlabs>),
}

fn check_times(t: [f64; 3], dt: f64) -> Result<()> {
    let ok = |a: f64, b: f64| ((b - a) - dt).abs() <= 1e-9 * dt.max(1.0);
    if !(dt > 0.0 && ok(t[0], t[1]) && ok(t[1], t[2])) {
        return Err(Error::TimeMismatch(format!("slab times {t:?} with dt = {dt}")));
    }
    Ok(())
}

impl HydroSlabs {
    pub fn new(prev: HydroFields, cur: HydroFields, next: HydroFields, dt: f64) -> Result<Self> {
        check_times([prev.t, cur.t, next.t], dt)?;
        if prev.scheme != cur.scheme || next.scheme != cur.scheme {
            return Err(Error::SchemeMismatch("slabs extracted with different schemes".into()));
        }
        cur.rho.ensure_same_grid(prev.rho.grid())?;
        cur.rho.ensure_same_grid(next.rho.grid())?;
        Ok(Self { prev, cur, next, dt })
    }

    /// Evolves one step each way and extracts all three.
    pub fn from_state(state: &QuantumState, potential: &Potential, dt: f64, method: Method, opts: &ExtractOptions) -> Result<Self> {
        let s = state_slabs(state, potential, dt, method)?;
        Self::new(
            extract_1p(&s.prev, potential, opts)?,
            extract_1p(&s.cur, potential, opts)?,
            extract_1p(&s.next, potential, opts)?,
            dt,
        )
    }

    fn any_node(&self) -> Vec<bool> {
        (0..self.cur.rho.len())
            .map(|i| self.prev.node_mask[i] || self.cur.node_mask[i] || self.next.node_mask[i])
            .collect()
    }
}

impl TwoBodySlabs {
    pub fn new(prev: TwoBodyFields, cur: TwoBodyFields, next: TwoBodyFields, dt: f64) -> Result<Self> {
        check_times([prev.t, cur.t, next.t], dt)?;
        if prev.scheme != cur.scheme || next.scheme != cur.scheme {
            return Err(Error::SchemeMismatch("slabs extracted with different schemes".into()));
        }
        cur.rho.ensure_same_grid(prev.rho.grid())?;
        cur.rho.ensure_same_grid(next.rho.grid())?;
        Ok(Self { prev, cur, next, dt })
    }

    pub fn from_state(state: &QuantumState, potential: &Potential, dt: f64, method: Method, opts: &ExtractOptions) -> Result<Self> {
        let s = state_slabs(state, potential, dt, method)?;
        Self::new(
            extract_2p(&s.prev, potential, opts)?,
            extract_2p(&s.cur, potential, opts)?,
            extract_2p(&s.next, potential, opts)?,
            dt,
        )
    }

    fn any_node(&self) -> Vec<bool> {
        (0..self.cur.rho.len())
            .map(|i| self.prev.node_mask[i] || self.cur.node_mask[i] || self.next.node_mask[i])
            .collect()
    }

    /// `d_t v_i` by centered differences, zero on nodes of any slab.
    pub fn velocity_rate(&self, i: usize) -> Result<RealField> {
        let nodes = self.any_node();
        centered_rate(&self.prev.v[i], &self.next.v[i], self.dt, &nodes)
    }
}

impl FieldSlabs {
    pub fn from_state(state: &QuantumState, potential: &Potential, dt: f64, method: Method, opts: &ExtractOptions) -> Result<Self> {
        match state.grid().dims() {
            1 => Ok(FieldSlabs::One(Box::new(HydroSlabs::from_state(state, potential, dt, method, opts)?))),
            _ => Ok(FieldSlabs::Two(Box::new(TwoBodySlabs::from_state(state, potential, dt, method, opts)?))),
        }
    }

    fn grid(&self) -> Grid {
        match self {
            FieldSlabs::One(s) => *s.cur.rho.grid(),
            FieldSlabs::Two(s) => *s.cur.rho.grid(),
        }
    }
}

pub(crate) fn centered_rate(prev: &RealField, next: &RealField, dt: f64, nodes: &[bool]) -> Result<RealField> {
    let v = prev
        .values()
        .iter()
        .zip(next.values())
        .zip(nodes)
        .map(|((a, b), &m)| if m { 0.0 } else { (b - a) / (2.0 * dt) })
        .collect();
    RealField::new(*prev.grid(), v)
}

fn second_rate(prev: &RealField, cur: &RealField, next: &RealField, dt: f64) -> Vec<f64> {
    (0..cur.len())
        .map(|i| (next.values()[i] - 2.0 * cur.values()[i] + prev.values()[i]) / (dt * dt))
        .collect()
}

fn zip(a: &RealField, b: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<RealField> {
    a.zip_map(b, f)
}

fn from_fn(grid: Grid, f: impl Fn(usize) -> f64) -> Result<RealField> {
    RealField::new(grid, (0..grid.len()).map(f).collect())
}

/// `d_t S` from the wrapped phase difference `arg(psi+ conj(psi-))`.
fn phase_rate(prev: &crate::numerics::ComplexField, next: &crate::numerics::ComplexField, hbar: f64, dt: f64, nodes: &[bool]) -> Vec<f64> {
    prev.values()
        .iter()
        .zip(next.values())
        .zip(nodes)
        .map(|((a, b), &m)| if m { 0.0 } else { hbar * (b * a.conj()).arg() / (2.0 * dt) })
        .collect()
}

/// Residual `LHS - RHS` of the equilibrium wave equation for densities
/// `rho` at three times with velocity fields `v` (three times) and `dv`
/// (current time). Spatial derivatives use `scheme`.
pub(crate) fn wave_equilibrium_terms(
    rho: [&RealField; 3],
    v: [&RealField; 3],
    dv: &RealField,
    nodes: &[bool],
    dt: f64,
    scheme: Scheme,
) -> Result<RealField> {
    let grid = *rho[1].grid();
    let d2t = second_rate(rho[0], rho[1], rho[2], dt);
    let dtv = centered_rate(v[0], v[2], dt, nodes)?;
    let flux = zip(rho[1], v[1], |r, u| r * u * u)?;
    let accel = from_fn(grid, |i| {
        let r = rho[1].values()[i];
        r * (dtv.values()[i] + v[1].values()[i] * dv.values()[i])
    })?;
    let a = diff(&flux, 0, 2, scheme)?;
    let b = diff(&accel, 0, 1, scheme)?;
    from_fn(grid, |i| d2t[i] - a.values()[i] + b.values()[i])
}

/// Pointwise residual of `eq` and the cells it is measured on.
pub fn residual_field(eq: EquationId, slabs: &FieldSlabs, mode: AssemblyMode) -> Result<(RealField, Vec<bool>)> {
    match (slabs, eq.dims()) {
        (FieldSlabs::One(s), 1) => residual_1p(eq, s),
        (FieldSlabs::Two(s), 2) => residual_2p(eq, s, mode),
        _ => Err(Error::InvalidParameter(format!(
            "{eq} does not apply to a {}D state",
            slabs.grid().dims()
        ))),
    }
}

fn interior(rho: &RealField, nodes: &[bool]) -> Vec<bool> {
    let mut keep = interior_mask(rho, INTERIOR_REL, INTERIOR_HALO);
    for (k, &m) in keep.iter_mut().zip(nodes) {
        *k = *k && !m;
    }
    keep
}

fn residual_1p(eq: EquationId, s: &HydroSlabs) -> Result<(RealField, Vec<bool>)> {
    let c = &s.cur;
    let grid = *c.rho.grid();
    let scheme = c.scheme;
    let dt = s.dt;
    let (hbar, m) = (c.params.hbar, c.params.m1);
    let nodes = s.any_node();
    let keep = interior(&c.rho, &nodes);
    let r = match eq {
        EquationId::Continuity1p => {
            let dtr = centered_rate(&s.prev.rho, &s.next.rho, dt, &vec![false; grid.len()])?;
            zip(&dtr, &c.dj, |a, b| a + b)?
        }
        EquationId::Hj1p => {
            let dts = phase_rate(&s.prev.psi, &s.next.psi, hbar, dt, &nodes);
            from_fn(grid, |i| {
                if nodes[i] {
                    return 0.0;
                }
                let v = c.v.values()[i];
                -dts[i] - 0.5 * m * v * v - c.potential.values()[i] - c.q.values()[i]
            })?
        }
        EquationId::Momentum1p => {
            let dtj = centered_rate(&s.prev.j, &s.next.j, dt, &vec![false; grid.len()])?;
            let dpi = diff(&c.pi, 0, 1, scheme)?;
            from_fn(grid, |i| {
                dtj.values()[i] + dpi.values()[i] + c.rho.values()[i] / m * c.dpotential.values()[i]
            })?
        }
        EquationId::Wave1p => {
            let d2t = second_rate(&s.prev.rho, &c.rho, &s.next.rho, dt);
            let d2pi = diff(&c.pi, 0, 2, scheme)?;
            let force = zip(&c.rho, &c.dpotential, |r, dv| r * dv)?;
            let dforce = diff(&force, 0, 1, scheme)?;
            from_fn(grid, |i| d2t[i] - d2pi.values()[i] - dforce.values()[i] / m)?
        }
        EquationId::WaveEquilibrium1p => wave_equilibrium_terms(
            [&s.prev.rho, &c.rho, &s.next.rho],
            [&s.prev.v, &c.v, &s.next.v],
            &c.dv,
            &nodes,
            dt,
            scheme,
        )?,
        _ => unreachable!("dimension checked by caller"),
    };
    Ok((r, keep))
}

/// The two groups of the two-body wave equation's right-hand side.
pub(crate) struct Wave2pGroups {
    pub single: RealField,
    pub cross: RealField,
}

/// `sum_i [d_i^2 (rho v_i^2) - d_i (rho (d_t v_i + v_i d_i v_i))]` and
/// `d_1 v_1 d_2 (rho v_2) + v_1 d_1 d_2 (rho v_2) + (1 <-> 2)` for a density
/// `rho` and fixed velocity data.
pub(crate) fn wave_2p_groups(
    rho: &RealField,
    v: [&RealField; 2],
    dtv: [&RealField; 2],
    dvii: [&RealField; 2],
    scheme: Scheme,
) -> Result<Wave2pGroups> {
    let grid = *rho.grid();
    let mut single = vec![0.0; grid.len()];
    let mut cross = vec![0.0; grid.len()];
    for i in 0..2 {
        let o = 1 - i;
        let rv = zip(rho, v[i], |r, u| r * u)?;
        let rvv = zip(&rv, v[i], |a, u| a * u)?;
        let acc = from_fn(grid, |n| rho.values()[n] * (dtv[i].values()[n] + v[i].values()[n] * dvii[i].values()[n]))?;
        let a = diff(&rvv, i, 2, scheme)?;
        let b = diff(&acc, i, 1, scheme)?;
        // cross terms pair particle `o`'s velocity with derivatives of rho v_i
        let d_other = diff(&rv, i, 1, scheme)?;
        let d_mixed = diff_mixed(&rv, scheme)?;
        for n in 0..grid.len() {
            single[n] += a.values()[n] - b.values()[n];
            cross[n] += dvii[o].values()[n] * d_other.values()[n] + v[o].values()[n] * d_mixed.values()[n];
        }
    }
    Ok(Wave2pGroups {
        single: RealField::new(grid, single)?,
        cross: RealField::new(grid, cross)?,
    })
}

fn residual_2p(eq: EquationId, s: &TwoBodySlabs, mode: AssemblyMode) -> Result<(RealField, Vec<bool>)> {
    let c = &s.cur;
    let grid = *c.rho.grid();
    let scheme = c.scheme;
    let dt = s.dt;
    let p = c.params;
    let nodes = s.any_node();
    let keep = interior(&c.rho, &nodes);
    let none = vec![false; grid.len()];
    let r = match eq {
        EquationId::Continuity2p => {
            let dtr = centered_rate(&s.prev.rho, &s.next.rho, dt, &none)?;
            from_fn(grid, |n| dtr.values()[n] + c.dj[0][0].values()[n] + c.dj[1][1].values()[n])?
        }
        EquationId::Hj2p => {
            let dts = phase_rate(&s.prev.psi, &s.next.psi, p.hbar, dt, &nodes);
            from_fn(grid, |n| {
                if nodes[n] {
                    return 0.0;
                }
                let (v1, v2) = (c.v[0].values()[n], c.v[1].values()[n]);
                -dts[n] - 0.5 * p.m1 * v1 * v1 - 0.5 * p.m2 * v2 * v2 - c.potential.values()[n] - c.q.values()[n]
            })?
        }
        EquationId::Momentum2p1 | EquationId::Momentum2p2 => {
            let i = if eq == EquationId::Momentum2p1 { 0 } else { 1 };
            let o = 1 - i;
            let dtj = centered_rate(&s.prev.j[i], &s.next.j[i], dt, &none)?;
            let force = |n: usize, mass: f64| {
                c.rho.values()[n] / mass * (c.dpotential[i].values()[n] + c.dq[i].values()[n])
            };
            match mode {
                AssemblyMode::Derived => {
                    let flux = zip(&c.j[i], &c.v[i], |a, b| a * b)?;
                    let dflux = diff(&flux, i, 1, scheme)?;
                    from_fn(grid, |n| {
                        dtj.values()[n]
                            + dflux.values()[n]
                            + c.j[o].values()[n] * c.dv[i][o].values()[n]
                            + c.v[i].values()[n] * c.dj[o][o].values()[n]
                            + force(n, p.mass(i))
                    })?
                }
                AssemblyMode::LiteralPaper => {
                    // rho * (literal velocity equation) + v_i * d_t rho, with the
                    // literal coefficients: -v_o d_i v_o and a 1/m1 force on both
                    from_fn(grid, |n| {
                        dtj.values()[n]
                            + c.j[i].values()[n] * c.dv[i][i].values()[n]
                            + c.j[o].values()[n] * c.dv[o][i].values()[n]
                            + force(n, p.m1)
                            + c.v[i].values()[n] * (c.dj[0][0].values()[n] + c.dj[1][1].values()[n])
                    })?
                }
            }
        }
        EquationId::Wave2p => {
            let d2t = second_rate(&s.prev.rho, &c.rho, &s.next.rho, dt);
            let dtv = [s.velocity_rate(0)?, s.velocity_rate(1)?];
            let g = wave_2p_groups(&c.rho, [&c.v[0], &c.v[1]], [&dtv[0], &dtv[1]], [&c.dv[0][0], &c.dv[1][1]], scheme)?;
            from_fn(grid, |n| d2t[n] - (g.single.values()[n] + g.cross.values()[n]))?
        }
        _ => unreachable!("dimension checked by caller"),
    };
    Ok((r, keep))
}

fn report(eq: EquationId, field: &RealField, keep: &[bool], dt: f64, scheme: Scheme, mode: AssemblyMode, pi_form: PiForm) -> ResidualReport {
    let grid = field.grid();
    let kept = keep.iter().filter(|k| **k).count();
    ResidualReport {
        equation: eq,
        norms: NormTriple::of(field, Some(keep)),
        n: grid.axis(0).map(|a| a.n()).unwrap_or(0),
        dx: grid.max_dx(),
        dt,
        interior_fraction: kept as f64 / grid.len() as f64,
        scenario_id: String::new(),
        scheme,
        level: 0,
        mode,
        pi_form,
    }
}

/// Residual norms of `eq` over the interior.
pub fn residual(eq: EquationId, slabs: &FieldSlabs, mode: AssemblyMode) -> Result<ResidualReport> {
    let (field, keep) = residual_field(eq, slabs, mode)?;
    if !keep.iter().any(|k| *k) {
        return Err(Error::Degenerate("residual interior is empty".into()));
    }
    let (dt, scheme, pi_form) = match slabs {
        FieldSlabs::One(s) => (s.dt, s.cur.scheme, s.cur.pi_form),
        FieldSlabs::Two(s) => (s.dt, s.cur.scheme, PiForm::Standard),
    };
    Ok(report(eq, &field, &keep, dt, scheme, mode, pi_form))
}

/// Clean and corrupted equilibrium-wave residuals for `v' = v + c / rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub c: f64,
    pub clean: ResidualReport,
    pub corrupted: ResidualReport,
}

impl UniquenessProbe {
    /// `Linf(corrupted) / Linf(clean)`.
    pub fn factor(&self) -> f64 {
        self.corrupted.norms.linf / self.clean.norms.linf
    }
}

/// Spatial scheme the probe differentiates with: `c / rho` is not periodic,
/// so spectral extractions fall back to the local fourth-order stencil.
pub const PROBE_SCHEME: Scheme = Scheme::Fd4;

/// Evaluates the equilibrium wave equation with the extracted velocity and
/// with `v + c/rho`, which carries the same probability flux divergence.
pub fn velocity_uniqueness_probe(s: &HydroSlabs, c: f64) -> Result<UniquenessProbe> {
    let nodes = s.any_node();
    let keep = interior(&s.cur.rho, &nodes);
    if !keep.iter().any(|k| *k) {
        return Err(Error::Degenerate("no cells above the node threshold".into()));
    }
    let scheme = match s.cur.scheme {
        Scheme::Spectral => PROBE_SCHEME,
        other => other,
    };
    let shift = |h: &HydroFields| -> Result<RealField> {
        from_fn(*h.rho.grid(), |i| {
            if nodes[i] {
                0.0
            } else {
                h.v.values()[i] + c / h.rho.values()[i]
            }
        })
    };
    let vp = [shift(&s.prev)?, shift(&s.cur)?, shift(&s.next)?];
    let cur = &s.cur;
    let dvp = from_fn(*cur.rho.grid(), |i| {
        if nodes[i] {
            0.0
        } else {
            let r = cur.rho.values()[i];
            cur.dv.values()[i] - c * cur.drho.values()[i] / (r * r)
        }
    })?;
    let rho = [&s.prev.rho, &cur.rho, &s.next.rho];
    let clean = wave_equilibrium_terms(rho, [&s.prev.v, &cur.v, &s.next.v], &cur.dv, &nodes, s.dt, scheme)?;
    let bad = wave_equilibrium_terms(rho, [&vp[0], &vp[1], &vp[2]], &dvp, &nodes, s.dt, scheme)?;
    let eq = EquationId::WaveEquilibrium1p;
    let mk = |f: &RealField| report(eq, f, &keep, s.dt, scheme, AssemblyMode::Derived, cur.pi_form);
    Ok(UniquenessProbe {
        c,
        clean: mk(&clean),
        corrupted: mk(&bad),
    })
}

/// Size of the inter-particle cross-term group of the two-body wave equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalityMetric {
    /// L2 of the cross-term group.
    pub cross_norm: f64,
    /// L2 of the full right-hand side.
    pub total_norm: f64,
    pub ratio: f64,
    /// L2 of `d_t^2 rho - single-particle groups` (the equation without its
    /// cross terms).
    pub single_only_residual: f64,
}

pub fn classicality(s: &TwoBodySlabs) -> Result<ClassicalityMetric> {
    let c = &s.cur;
    let nodes = s.any_node();
    let keep = interior(&c.rho, &nodes);
    let dtv = [s.velocity_rate(0)?, s.velocity_rate(1)?];
    let g = wave_2p_groups(&c.rho, [&c.v[0], &c.v[1]], [&dtv[0], &dtv[1]], [&c.dv[0][0], &c.dv[1][1]], c.scheme)?;
    let total = &g.single + &g.cross;
    let d2t = second_rate(&s.prev.rho, &c.rho, &s.next.rho, s.dt);
    let single_res = from_fn(*c.rho.grid(), |n| d2t[n] - g.single.values()[n])?;
    let l2 = |f: &RealField| masked_norm(f, Some(&keep), NormKind::L2, true);
    let cross_norm = l2(&g.cross);
    let total_norm = l2(&total);
    Ok(ClassicalityMetric {
        cross_norm,
        total_norm,
        ratio: if total_norm > 0.0 { cross_norm / total_norm } else { 0.0 },
        single_only_residual: l2(&single_res),
    })
}
