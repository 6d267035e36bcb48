//! Hydrodynamic (Madelung) fields of a wavefunction.
//!
//! Everything is evaluated pointwise from the partial derivatives of `psi`,
//! which are smooth even where the phase winds or the density is tiny;
//! quotients by `rho` are formed only off the node mask.

mod jets;
mod unwrap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub(crate) use jets::Jets;
use jets::{ORDERS_1P, ORDERS_2P};
pub use unwrap::unwrap_phase;

use crate::error::{Error, Result};
use crate::numerics::{diff, Grid, NormKind, RealField, Scheme};
use crate::schrodinger::{PhysParams, Potential, QuantumState};

/// Default node threshold, relative to `max rho`.
pub const DEFAULT_NODE_EPS: f64 = 1e-12;

/// Which quantum stress to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PiForm {
    /// `rho v^2 + (hbar^2 / 4 m^2) ((d rho)^2 / rho - d^2 rho)`.
    #[default]
    Standard,
    /// `rho v^2 + (hbar^2 / 4 m^2) ((d ln rho) / rho - d^2 rho)`, taken literally.
    LiteralPaper,
}

impl PiForm {
    pub fn name(self) -> &'static str {
        match self {
            PiForm::Standard => "standard",
            PiForm::LiteralPaper => "literal_paper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractOptions {
    /// Node threshold relative to `max rho`.
    pub node_eps: f64,
    pub scheme: Scheme,
    pub pi_form: PiForm,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            node_eps: DEFAULT_NODE_EPS,
            scheme: Scheme::Spectral,
            pi_form: PiForm::Standard,
        }
    }
}

/// One-particle hydrodynamic fields plus the auxiliary derivatives the
/// residual engine needs. Masked entries (nodes) are zero in `v`, `q`, `dv`,
/// `dq`; `rho`, `j` and their derivatives are defined everywhere.
#[derive(Clone, Debug)]
pub struct HydroFields {
    pub rho: RealField,
    pub s: RealField,
    pub v: RealField,
    pub q: RealField,
    pub pi: RealField,
    pub node_mask: Vec<bool>,
    /// Cells whose unwrapped phase path crossed a node.
    pub seam_mask: Vec<bool>,
    /// Probability current `rho v`.
    pub j: RealField,
    pub drho: RealField,
    pub d2rho: RealField,
    pub dj: RealField,
    pub dv: RealField,
    pub dq: RealField,
    pub potential: RealField,
    pub dpotential: RealField,
    pub psi: crate::numerics::ComplexField,
    pub t: f64,
    pub params: PhysParams,
    pub scheme: Scheme,
    pub pi_form: PiForm,
}

/// Two-particle fields on the `(x1, x2)` grid. Indexing: `v[i]` is the
/// velocity of particle `i`, `dv[i][k] = d v_i / d x_k`.
#[derive(Clone, Debug)]
pub struct TwoBodyFields {
    pub rho: RealField,
    pub s: RealField,
    pub v: [RealField; 2],
    pub q: RealField,
    pub potential: RealField,
    pub dpotential: [RealField; 2],
    pub j: [RealField; 2],
    pub drho: [RealField; 2],
    pub dj: [[RealField; 2]; 2],
    pub dv: [[RealField; 2]; 2],
    pub dq: [RealField; 2],
    pub node_mask: Vec<bool>,
    pub seam_mask: Vec<bool>,
    pub psi: crate::numerics::ComplexField,
    pub t: f64,
    pub params: PhysParams,
    pub scheme: Scheme,
}

#[derive(Clone, Debug)]
pub enum Extracted {
    One(Box<HydroFields>),
    Two(Box<TwoBodyFields>),
}

fn node_mask(rho: &[f64], eps: f64) -> Result<Vec<bool>> {
    let max = rho.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Degenerate("density vanishes everywhere".into()));
    }
    let floor = eps * max;
    Ok(rho.iter().map(|&r| r < floor).collect())
}

fn real(grid: Grid, values: Vec<f64>) -> Result<RealField> {
    RealField::new(grid, values)
}

/// Pointwise helpers on `psi` and its partials.
struct Point<'a> {
    psi: &'a [Complex64],
    mask: &'a [bool],
}

impl Point<'_> {
    fn map(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..self.psi.len()).map(f).collect()
    }

    fn masked(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..self.psi.len())
            .map(|i| if self.mask[i] { 0.0 } else { f(i) })
            .collect()
    }
}

fn unit(axis: usize) -> [u32; 2] {
    if axis == 0 {
        [1, 0]
    } else {
        [0, 1]
    }
}

fn add(a: [u32; 2], b: [u32; 2]) -> [u32; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

/// Per-axis pointwise quantities shared by both extractions.
struct AxisData {
    /// `Im(psi* psi_i)`
    b: Vec<f64>,
    /// `Re(psi* psi_ii)`
    a: Vec<f64>,
    /// `d rho / d x_i`
    drho: Vec<f64>,
    /// `d_k Im(psi* psi_i)` for each `k`
    db: Vec<Vec<f64>>,
    /// `d_k Re(psi* psi_ii)` for each `k`
    da: Vec<Vec<f64>>,
}

fn axis_data(psi: &[Complex64], jets: &Jets, dims: usize) -> Result<Vec<AxisData>> {
    let mut out = Vec::with_capacity(dims);
    for i in 0..dims {
        let ei = unit(i);
        let pi = jets.get(ei)?;
        let pii = jets.get(add(ei, ei))?;
        let b = psi.iter().zip(pi).map(|(p, d)| (p.conj() * d).im).collect();
        let a = psi.iter().zip(pii).map(|(p, d)| (p.conj() * d).re).collect();
        let drho = psi.iter().zip(pi).map(|(p, d)| 2.0 * (p.conj() * d).re).collect();
        let mut db = Vec::with_capacity(dims);
        let mut da = Vec::with_capacity(dims);
        for k in 0..dims {
            let ek = unit(k);
            let pk = jets.get(ek)?;
            let pik = jets.get(add(ei, ek))?;
            let piik = jets.get(add(add(ei, ei), ek))?;
            db.push(
                (0..psi.len())
                    .map(|n| (pk[n].conj() * pi[n] + psi[n].conj() * pik[n]).im)
                    .collect(),
            );
            da.push(
                (0..psi.len())
                    .map(|n| (pk[n].conj() * pii[n] + psi[n].conj() * piik[n]).re)
                    .collect(),
            );
        }
        out.push(AxisData { b, a, drho, db, da });
    }
    Ok(out)
}

/// `Q = -(hbar^2/2) sum_i (1/m_i) (Re(psi* psi_ii)/rho + (Im(psi* psi_i)/rho)^2)`,
/// the `(d^2 sqrt rho)/sqrt rho` form written through `psi`.
fn quantum_potential(ax: &[AxisData], rho: &[f64], p: &PhysParams, n: usize) -> f64 {
    let mut s = 0.0;
    for (i, d) in ax.iter().enumerate() {
        let r = rho[n];
        s += (d.a[n] / r + (d.b[n] / r).powi(2)) / p.mass(i);
    }
    -0.5 * p.hbar * p.hbar * s
}

fn quantum_force(ax: &[AxisData], rho: &[f64], p: &PhysParams, k: usize, n: usize) -> f64 {
    let r = rho[n];
    let drk = ax[k].drho[n];
    let mut s = 0.0;
    for (i, d) in ax.iter().enumerate() {
        let t1 = (d.da[k][n] * r - d.a[n] * drk) / (r * r);
        let t2 = 2.0 * d.b[n] * (d.db[k][n] * r - d.b[n] * drk) / (r * r * r);
        s += (t1 + t2) / p.mass(i);
    }
    -0.5 * p.hbar * p.hbar * s
}

/// One-particle extraction.
pub fn extract_1p(state: &QuantumState, potential: &Potential, opts: &ExtractOptions) -> Result<HydroFields> {
    let grid = *state.grid();
    if grid.dims() != 1 {
        return Err(Error::InvalidParameter("one-particle extraction needs a 1D grid".into()));
    }
    let p = *state.params();
    let (hbar, m) = (p.hbar, p.m1);
    let psi = state.psi().values();
    let rho: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let mask = node_mask(&rho, opts.node_eps)?;
    let jets = Jets::new(state.psi(), &ORDERS_1P, opts.scheme)?;
    let ax = axis_data(psi, &jets, 1)?;
    let d1 = jets.get([1, 0])?;
    let d2 = jets.get([2, 0])?;
    let pt = Point { psi, mask: &mask };

    let j = pt.map(|n| hbar / m * ax[0].b[n]);
    let dj = pt.map(|n| hbar / m * ax[0].db[0][n]);
    let drho = ax[0].drho.clone();
    let d2rho = pt.map(|n| 2.0 * ax[0].a[n] + 2.0 * d1[n].norm_sqr());
    let v = pt.masked(|n| j[n] / rho[n]);
    let dv = pt.masked(|n| (dj[n] * rho[n] - j[n] * drho[n]) / (rho[n] * rho[n]));
    let q = pt.masked(|n| quantum_potential(&ax, &rho, &p, n));
    let dq = pt.masked(|n| quantum_force(&ax, &rho, &p, 0, n));
    let c = hbar * hbar / (4.0 * m * m);
    let pi = match opts.pi_form {
        // equals rho v^2 + c (rho'^2/rho - rho'') identically, without the quotient
        PiForm::Standard => pt.map(|n| 2.0 * c * (d1[n].norm_sqr() - (psi[n].conj() * d2[n]).re)),
        PiForm::LiteralPaper => pt.masked(|n| {
            let r = rho[n];
            j[n] * j[n] / r + c * (drho[n] / (r * r) - d2rho[n])
        }),
    };
    let (s, seam) = unwrap_phase(state.psi(), &rho, &mask, hbar)?;
    Ok(HydroFields {
        rho: real(grid, rho)?,
        s,
        v: real(grid, v)?,
        q: real(grid, q)?,
        pi: real(grid, pi)?,
        node_mask: mask,
        seam_mask: seam,
        j: real(grid, j)?,
        drho: real(grid, drho)?,
        d2rho: real(grid, d2rho)?,
        dj: real(grid, dj)?,
        dv: real(grid, dv)?,
        dq: real(grid, dq)?,
        potential: potential.samples(&grid, &p, state.t())?,
        dpotential: potential.gradient(&grid, &p, 0, state.t())?,
        psi: state.psi().clone(),
        t: state.t(),
        params: p,
        scheme: opts.scheme,
        pi_form: opts.pi_form,
    })
}

/// Two-particle extraction.
pub fn extract_2p(state: &QuantumState, potential: &Potential, opts: &ExtractOptions) -> Result<TwoBodyFields> {
    let grid = *state.grid();
    if grid.dims() != 2 {
        return Err(Error::InvalidParameter("two-particle extraction needs a 2D grid".into()));
    }
    let p = *state.params();
    let hbar = p.hbar;
    let psi = state.psi().values();
    let rho: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let mask = node_mask(&rho, opts.node_eps)?;
    let jets = Jets::new(state.psi(), &ORDERS_2P, opts.scheme)?;
    let ax = axis_data(psi, &jets, 2)?;
    let pt = Point { psi, mask: &mask };

    let jv: Vec<Vec<f64>> = (0..2).map(|i| pt.map(|n| hbar / p.mass(i) * ax[i].b[n])).collect();
    let djv: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|i| (0..2).map(|k| pt.map(|n| hbar / p.mass(i) * ax[i].db[k][n])).collect())
        .collect();
    let field = |v: Vec<f64>| real(grid, v);
    let pair = |f: &dyn Fn(usize) -> Vec<f64>| -> Result<[RealField; 2]> { Ok([field(f(0))?, field(f(1))?]) };

    let v = pair(&|i| pt.masked(|n| jv[i][n] / rho[n]))?;
    let dv = [
        pair(&|k| pt.masked(|n| (djv[0][k][n] * rho[n] - jv[0][n] * ax[k].drho[n]) / (rho[n] * rho[n])))?,
        pair(&|k| pt.masked(|n| (djv[1][k][n] * rho[n] - jv[1][n] * ax[k].drho[n]) / (rho[n] * rho[n])))?,
    ];
    let dj = [
        pair(&|k| djv[0][k].clone())?,
        pair(&|k| djv[1][k].clone())?,
    ];
    let q = field(pt.masked(|n| quantum_potential(&ax, &rho, &p, n)))?;
    let dq = pair(&|k| pt.masked(|n| quantum_force(&ax, &rho, &p, k, n)))?;
    let drho = pair(&|k| ax[k].drho.clone())?;
    let j = pair(&|i| jv[i].clone())?;
    let (s, seam) = unwrap_phase(state.psi(), &rho, &mask, hbar)?;
    Ok(TwoBodyFields {
        rho: field(rho)?,
        s,
        v,
        q,
        potential: potential.samples(&grid, &p, state.t())?,
        dpotential: [
            potential.gradient(&grid, &p, 0, state.t())?,
            potential.gradient(&grid, &p, 1, state.t())?,
        ],
        j,
        drho,
        dj,
        dv,
        dq,
        node_mask: mask,
        seam_mask: seam,
        psi: state.psi().clone(),
        t: state.t(),
        params: p,
        scheme: opts.scheme,
    })
}

/// Extraction dispatched on the grid dimension.
pub fn extract(state: &QuantumState, potential: &Potential, opts: &ExtractOptions) -> Result<Extracted> {
    match state.grid().dims() {
        1 => Ok(Extracted::One(Box::new(extract_1p(state, potential, opts)?))),
        _ => Ok(Extracted::Two(Box::new(extract_2p(state, potential, opts)?))),
    }
}

fn check_triple(times: [f64; 3], dt: f64) -> Result<()> {
    let ok = |a: f64, b: f64| ((b - a) - dt).abs() <= 1e-9 * dt.abs().max(1.0);
    if !(dt > 0.0) || !ok(times[0], times[1]) || !ok(times[1], times[2]) {
        return Err(Error::TimeMismatch(format!(
            "slabs at {times:?} are not spaced by dt = {dt}"
        )));
    }
    Ok(())
}

/// `(d_t + v d_x) v` from three consecutive extractions: centered time
/// difference of `v` plus the pointwise convective term. Zero on nodes of
/// any slab.
pub fn material_derivative(prev: &HydroFields, cur: &HydroFields, next: &HydroFields, dt: f64) -> Result<RealField> {
    check_triple([prev.t, cur.t, next.t], dt)?;
    cur.rho.ensure_same_grid(prev.rho.grid())?;
    cur.rho.ensure_same_grid(next.rho.grid())?;
    let n = cur.v.len();
    let vals = (0..n)
        .map(|i| {
            if prev.node_mask[i] || cur.node_mask[i] || next.node_mask[i] {
                0.0
            } else {
                (next.v.values()[i] - prev.v.values()[i]) / (2.0 * dt) + cur.v.values()[i] * cur.dv.values()[i]
            }
        })
        .collect();
    RealField::new(*cur.rho.grid(), vals)
}

/// Cells kept in residual norms: `rho > rel * max rho`, shrunk by `halo` cells.
pub fn interior_mask(rho: &RealField, rel: f64, halo: usize) -> Vec<bool> {
    let max = rho.max();
    let keep: Vec<bool> = rho.values().iter().map(|&r| r > rel * max).collect();
    let grid = rho.grid();
    let (outer, inner) = grid.shape();
    let periodic: Vec<bool> = grid.axes().iter().map(|a| a.is_periodic()).collect();
    let mut out = keep.clone();
    let h = halo as isize;
    for idx in 0..keep.len() {
        if !keep[idx] {
            continue;
        }
        let (i1, i2) = (idx / inner, idx % inner);
        let near = |i: usize, d: isize, n: usize, per: bool| -> Option<usize> {
            let k = i as isize + d;
            if per {
                Some(k.rem_euclid(n as isize) as usize)
            } else if k < 0 || k >= n as isize {
                None
            } else {
                Some(k as usize)
            }
        };
        'scan: for d1 in -h..=h {
            for d2 in -h..=h {
                let (a, b) = if grid.dims() == 1 {
                    if d1 != 0 {
                        continue;
                    }
                    (Some(0), near(i2, d2, inner, periodic[0]))
                } else {
                    (near(i1, d1, outer, periodic[0]), near(i2, d2, inner, periodic[1]))
                };
                match (a, b) {
                    (Some(a), Some(b)) if keep[a * inner + b] => {}
                    _ => {
                        out[idx] = false;
                        break 'scan;
                    }
                }
            }
        }
    }
    out
}

/// `Linf` of `(1/m2) d_2 v_1 - (1/m1) d_1 v_2` over the interior.
///
/// The velocity fields are differentiated as fields (not through `psi`), with
/// the extraction scheme when it is a finite-difference one and with `fd4`
/// otherwise, since `v` is not periodic.
pub fn mixed_velocity_check(f: &TwoBodyFields) -> Result<f64> {
    let scheme = match f.scheme {
        Scheme::Spectral => Scheme::Fd4,
        s => s,
    };
    let d2v1 = diff(&f.v[0], 1, 1, scheme)?;
    let d1v2 = diff(&f.v[1], 0, 1, scheme)?;
    let (m1, m2) = (f.params.m1, f.params.m2);
    let r = d2v1.zip_map(&d1v2, |a, b| a / m2 - b / m1)?;
    let mut keep = interior_mask(&f.rho, 1e-10, 2);
    // v jumps across a periodic seam; stencils straddling it are dropped
    let (outer, inner) = f.rho.grid().shape();
    let w = 2 * scheme_half_width(scheme);
    for (idx, k) in keep.iter_mut().enumerate() {
        let (i1, i2) = (idx / inner, idx % inner);
        if i1 < w || i1 + w >= outer || i2 < w || i2 + w >= inner {
            *k = false;
        }
    }
    Ok(crate::numerics::masked_norm(&r, Some(&keep), NormKind::Linf, false))
}

fn scheme_half_width(scheme: Scheme) -> usize {
    match scheme {
        Scheme::Fd2 => 1,
        _ => 2,
    }
}

/// Second form of the quantum potential, from the density alone:
/// `-(hbar^2 / 4m) (rho''/rho - rho'^2 / (2 rho^2))`. Masked below `node_eps`.
pub fn quantum_potential_from_density(rho: &RealField, params: &PhysParams, scheme: Scheme, node_eps: f64) -> Result<RealField> {
    let mask = node_mask(rho.values(), node_eps)?;
    let mut out = vec![0.0; rho.len()];
    for axis in 0..rho.grid().dims() {
        let d1 = diff(rho, axis, 1, scheme)?;
        let d2 = diff(rho, axis, 2, scheme)?;
        let c = params.hbar * params.hbar / (4.0 * params.mass(axis));
        for (n, o) in out.iter_mut().enumerate() {
            if !mask[n] {
                let r = rho.values()[n];
                *o -= c * (d2.values()[n] / r - d1.values()[n].powi(2) / (2.0 * r * r));
            }
        }
    }
    RealField::new(*rho.grid(), out)
}

impl HydroFields {
    /// `rho v^2 + (hbar^2/4m^2)(rho'^2/rho - rho'')` built from the extracted
    /// density fields (off nodes); agrees with the `psi`-based stress.
    pub fn stress_from_density(&self) -> Result<RealField> {
        let c = self.params.hbar.powi(2) / (4.0 * self.params.m1.powi(2));
        let vals = (0..self.rho.len())
            .map(|n| {
                if self.node_mask[n] {
                    return 0.0;
                }
                let r = self.rho.values()[n];
                let v = self.v.values()[n];
                r * v * v + c * (self.drho.values()[n].powi(2) / r - self.d2rho.values()[n])
            })
            .collect();
        RealField::new(*self.rho.grid(), vals)
    }
}
