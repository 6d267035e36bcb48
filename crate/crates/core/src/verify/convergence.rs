use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EquationId, ResidualReport};
use crate::error::{Error, Result};
use crate::numerics::NormKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub residual: f64,
    /// Order observed between this level and the previous one.
    pub order: Option<f64>,
}

/// Residual norms of one equation over a refinement ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub equation: EquationId,
    pub norm: NormKind,
    pub rows: Vec<ConvergenceRow>,
    /// Set when some refinement failed to reduce the residual.
    pub non_monotone: bool,
}

impl ConvergenceTable {
    /// Builds the table from reports sorted by level.
    pub fn from_reports(reports: &[ResidualReport], norm: NormKind) -> Result<Self> {
        let first = reports.first().ok_or_else(|| Error::InvalidParameter("no convergence levels".into()))?;
        if reports.iter().any(|r| r.equation != first.equation) {
            return Err(Error::InvalidParameter("mixed equations in one convergence table".into()));
        }
        let mut sorted = reports.to_vec();
        sorted.sort_by_key(|r| r.level);
        let res: Vec<f64> = sorted.iter().map(|r| r.norms.get(norm)).collect();
        let dx: Vec<f64> = sorted.iter().map(|r| r.dx).collect();
        let orders = observed_orders(&res, &dx);
        let rows = sorted
            .iter()
            .enumerate()
            .map(|(k, r)| ConvergenceRow {
                level: r.level,
                n: r.n,
                dx: r.dx,
                dt: r.dt,
                residual: res[k],
                order: if k == 0 { None } else { Some(orders[k - 1]) },
            })
            .collect();
        Ok(Self {
            equation: first.equation,
            norm,
            rows,
            non_monotone: res.windows(2).any(|w| w[1] >= w[0]),
        })
    }

    /// Order between the two finest levels.
    pub fn finest_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }
}

/// `p_k = ln(r_k / r_{k+1}) / ln(dx_k / dx_{k+1})` for consecutive pairs.
pub fn observed_orders(residuals: &[f64], dx: &[f64]) -> Vec<f64> {
    residuals
        .windows(2)
        .zip(dx.windows(2))
        .map(|(r, h)| (r[0] / r[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Evaluates `run(level)` for every level in parallel and tabulates the
/// chosen norm. Results are ordered by level regardless of completion order.
pub fn convergence_study<F>(levels: usize, norm: NormKind, run: F) -> Result<ConvergenceTable>
where
    F: Fn(usize) -> Result<ResidualReport> + Sync,
{
    let reports: Vec<ResidualReport> = (0..levels)
        .into_par_iter()
        .map(|level| run(level).map(|r| ResidualReport { level, ..r }))
        .collect::<Result<_>>()?;
    ConvergenceTable::from_reports(&reports, norm)
}
