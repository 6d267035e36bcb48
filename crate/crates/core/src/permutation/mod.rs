//! Particle-label interchange and the linear wave operator `Lambda` acting on
//! two-body densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::madelung::ExtractOptions;
use crate::numerics::{masked_norm, Field, Grid, Grid2D, NormKind, RealField, Sample, Scheme};
use crate::schrodinger::{evolve, Method, Potential, QuantumState};
use crate::verify::{wave_2p_groups, TwoBodySlabs, INTERIOR_HALO, INTERIOR_REL};

/// Index interchange `(i, j) -> (j, i)` on a square two-body grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapMap {
    grid: Grid2D,
}

impl SwapMap {
    pub fn new(grid: &Grid) -> Result<Self> {
        let g = grid
            .as_2d()
            .ok_or_else(|| Error::NonSquareGrid("swap needs a two-particle grid".into()))?;
        if !g.identical_axes() {
            return Err(Error::NonSquareGrid("swap needs identical axes".into()));
        }
        Ok(Self { grid: *g })
    }

    pub fn grid(&self) -> Grid {
        Grid::Two(self.grid)
    }
}

/// `out(i, j) = in(j, i)`.
pub fn swap<T: Sample>(field: &Field<T>, map: &SwapMap) -> Result<Field<T>> {
    field.ensure_same_grid(&map.grid())?;
    let n = map.grid.axis1.n();
    let v = field.values();
    let out = (0..n * n).map(|k| v[(k % n) * n + k / n]).collect();
    Field::new(map.grid(), out)
}

/// The right-hand side of the two-body density wave equation as a linear
/// map on densities, with velocities frozen at the centre slab.
#[derive(Clone, Debug)]
pub struct LambdaOperator {
    v: [RealField; 2],
    dtv: [RealField; 2],
    dvii: [RealField; 2],
    masses: [f64; 2],
    scheme: Scheme,
    dt: f64,
}

impl LambdaOperator {
    pub fn from_slabs(s: &TwoBodySlabs) -> Result<Self> {
        let c = &s.cur;
        Ok(Self {
            v: c.v.clone(),
            dtv: [s.velocity_rate(0)?, s.velocity_rate(1)?],
            dvii: [c.dv[0][0].clone(), c.dv[1][1].clone()],
            masses: [c.params.m1, c.params.m2],
            scheme: c.scheme,
            dt: s.dt,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.v[0].grid()
    }

    pub fn masses(&self) -> [f64; 2] {
        self.masses
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Single-particle and cross-term groups separately.
    pub fn groups(&self, rho: &RealField) -> Result<(RealField, RealField)> {
        rho.ensure_same_grid(self.grid())?;
        let g = wave_2p_groups(
            rho,
            [&self.v[0], &self.v[1]],
            [&self.dtv[0], &self.dtv[1]],
            [&self.dvii[0], &self.dvii[1]],
            self.scheme,
        )?;
        Ok((g.single, g.cross))
    }
}

pub fn apply_lambda(op: &LambdaOperator, rho: &RealField) -> Result<RealField> {
    let (single, cross) = op.groups(rho)?;
    single.zip_map(&cross, |a, b| a + b)
}

/// `d_t^2 rho - Lambda rho` for three density slabs.
pub fn lambda_residual(op: &LambdaOperator, rho: [&RealField; 3]) -> Result<RealField> {
    let l = apply_lambda(op, rho[1])?;
    let dt2 = op.dt * op.dt;
    let v = (0..l.len())
        .map(|n| (rho[2].values()[n] - 2.0 * rho[1].values()[n] + rho[0].values()[n]) / dt2 - l.values()[n])
        .collect();
    RealField::new(*op.grid(), v)
}

/// Smooth positive random densities: sums of a few Gaussian bumps placed in
/// the central half of the box, normalised to unit mass.
pub fn random_probe_densities(grid: &Grid, count: usize, seed: u64) -> Result<Vec<RealField>> {
    let g = grid
        .as_2d()
        .ok_or_else(|| Error::InvalidParameter("probe densities live on a two-particle grid".into()))?;
    let (a1, a2) = (g.axis1, g.axis2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let bumps: Vec<[f64; 4]> = (0..3)
                .map(|_| {
                    let c1 = a1.x_min() + a1.length() * rng.gen_range(0.3..0.7);
                    let c2 = a2.x_min() + a2.length() * rng.gen_range(0.3..0.7);
                    let w = a1.length().min(a2.length()) * rng.gen_range(0.04..0.1);
                    [c1, c2, w, rng.gen_range(0.2..1.0)]
                })
                .collect();
            let f = RealField::from_fn(*grid, |x| {
                bumps
                    .iter()
                    .map(|b| b[3] * (-((x[0] - b[0]).powi(2) + (x[1] - b[1]).powi(2)) / (2.0 * b[2] * b[2])).exp())
                    .sum()
            })?;
            let mass = f.integral();
            Ok(f.scale(1.0 / mass))
        })
        .collect()
}

/// `max_p Linf(swap(Lambda p) - Lambda(swap p)) / Linf(Lambda p)`.
pub fn lambda_symmetry_defect(op: &LambdaOperator, probes: &[RealField], map: &SwapMap) -> Result<f64> {
    let defects: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let lp = apply_lambda(op, p)?;
            let ls = apply_lambda(op, &swap(p, map)?)?;
            let d = &swap(&lp, map)? - &ls;
            Ok(d.max_magnitude() / lp.max_magnitude())
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// One row of the exchange-asymmetry report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationRow {
    pub time: f64,
    /// `Linf(rho - swap rho)`
    pub delta_linf: f64,
    /// `delta_linf / Linf(rho)`
    pub delta_rel: f64,
    /// L2 of `(d_t^2 - Lambda)(rho - swap rho)` over the interior.
    pub wave_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub identical_particles: bool,
    pub rows: Vec<PermutationRow>,
}

impl PermutationReport {
    pub fn max_delta(&self) -> f64 {
        self.rows.iter().map(|r| r.delta_linf).fold(0.0, f64::max)
    }
}

fn delta(rho: &RealField, map: &SwapMap) -> Result<RealField> {
    Ok(rho - &swap(rho, map)?)
}

/// Measures `rho - swap rho` at `snapshots + 1` times spaced `stride` steps
/// apart, and the residual of the density wave equation applied to it.
pub fn born_permutation_test(
    state: &QuantumState,
    potential: &Potential,
    dt: f64,
    method: Method,
    stride: usize,
    snapshots: usize,
    opts: &ExtractOptions,
) -> Result<PermutationReport> {
    let map = SwapMap::new(state.grid())?;
    let p = *state.params();
    let identical = p.equal_masses() && potential.is_swap_symmetric(&p);
    let mut rows = Vec::with_capacity(snapshots + 1);
    let mut s = state.clone();
    for k in 0..=snapshots {
        if k > 0 {
            s = evolve(&s, potential, dt, stride, method)?;
        }
        let slabs = TwoBodySlabs::from_state(&s, potential, dt, method, opts)?;
        let op = LambdaOperator::from_slabs(&slabs)?;
        let d = [delta(&slabs.prev.rho, &map)?, delta(&slabs.cur.rho, &map)?, delta(&slabs.next.rho, &map)?];
        let r = lambda_residual(&op, [&d[0], &d[1], &d[2]])?;
        let mut keep = crate::madelung::interior_mask(&slabs.cur.rho, INTERIOR_REL, INTERIOR_HALO);
        for (n, k) in keep.iter_mut().enumerate() {
            *k = *k && !(slabs.prev.node_mask[n] || slabs.cur.node_mask[n] || slabs.next.node_mask[n]);
        }
        let delta_linf = d[1].max_magnitude();
        rows.push(PermutationRow {
            time: s.t(),
            delta_linf,
            delta_rel: delta_linf / slabs.cur.rho.max_magnitude(),
            wave_residual: masked_norm(&r, Some(&keep), NormKind::L2, true),
        });
    }
    Ok(PermutationReport {
        identical_particles: identical,
        rows,
    })
}
