use std::f64::consts::PI;

use crate::error::Result;
use crate::numerics::{ComplexField, RealField};

/// Unwrapped action `S` with `psi = |psi| exp(i S / hbar)`.
///
/// Paths run along grid lines from the density maximum: first along `x1`
/// through the anchor, then along `x2` from that column. Increments are the
/// wrapped phase differences of neighbours. `S(anchor)` lies in
/// `[0, 2 pi hbar)`. Returns the flag field of cells whose path crossed a
/// node cell (their `S` may be off by multiples of `2 pi hbar`).
pub fn unwrap_phase(psi: &ComplexField, rho: &[f64], node_mask: &[bool], hbar: f64) -> Result<(RealField, Vec<bool>)> {
    let grid = *psi.grid();
    let (outer, inner) = grid.shape();
    let vals = psi.values();
    let anchor = rho
        .iter()
        .enumerate()
        .fold(0, |best, (i, &r)| if r > rho[best] { i } else { best });
    let (a1, a2) = (anchor / inner, anchor % inner);
    let mut s = vec![0.0; vals.len()];
    let mut seam = vec![false; vals.len()];
    let base = vals[anchor].arg().rem_euclid(2.0 * PI);
    s[anchor] = hbar * base;

    let step = |from: usize, to: usize, s: &mut [f64], seam: &mut [bool]| {
        let d = (vals[to] * vals[from].conj()).arg();
        s[to] = s[from] + hbar * d;
        seam[to] = seam[from] || node_mask[from] || node_mask[to];
    };

    // anchor column along x1 (outer index); in 1D outer = 1
    for i1 in (a1 + 1)..outer {
        step((i1 - 1) * inner + a2, i1 * inner + a2, &mut s, &mut seam);
    }
    for i1 in (0..a1).rev() {
        step((i1 + 1) * inner + a2, i1 * inner + a2, &mut s, &mut seam);
    }
    for i1 in 0..outer {
        let row = i1 * inner;
        for i2 in (a2 + 1)..inner {
            step(row + i2 - 1, row + i2, &mut s, &mut seam);
        }
        for i2 in (0..a2).rev() {
            step(row + i2 + 1, row + i2, &mut s, &mut seam);
        }
    }
    Ok((RealField::new(grid, s)?, seam))
}
