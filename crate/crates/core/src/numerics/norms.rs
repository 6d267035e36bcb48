use serde::{Deserialize, Serialize};

use super::field::RealField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

/// Discrete norm; when `weighted_by_cell_volume` the L1/L2 sums carry the
/// cell volume (`dx` or `dx1*dx2`) so they approximate integrals.
pub fn norm(field: &RealField, kind: NormKind, weighted_by_cell_volume: bool) -> f64 {
    masked_norm(field, None, kind, weighted_by_cell_volume)
}

/// Norm restricted to the cells where `include[i]` is true.
pub fn masked_norm(field: &RealField, include: Option<&[bool]>, kind: NormKind, weighted: bool) -> f64 {
    let w = if weighted { field.grid().cell_volume() } else { 1.0 };
    let cells = field
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| include.map_or(true, |m| m[*i]))
        .map(|(_, v)| *v);
    match kind {
        NormKind::L1 => cells.map(f64::abs).sum::<f64>() * w,
        NormKind::L2 => (cells.map(|v| v * v).sum::<f64>() * w).sqrt(),
        NormKind::Linf => cells.map(f64::abs).fold(0.0, f64::max),
    }
}

/// The three norms at once, sharing a mask.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTriple {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl NormTriple {
    pub fn of(field: &RealField, include: Option<&[bool]>) -> Self {
        Self {
            l1: masked_norm(field, include, NormKind::L1, true),
            l2: masked_norm(field, include, NormKind::L2, true),
            linf: masked_norm(field, include, NormKind::Linf, true),
        }
    }

    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
        }
    }
}
