use serde::{Deserialize, Serialize};

use super::params::PhysParams;
use crate::error::{Error, Result};
use crate::numerics::{diff, Grid, RealField, Scheme};

/// Spatial shape of an external potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Free,
    /// `m w^2 (x - c)^2 / 2` for each particle, with that particle's mass.
    Harmonic { omega: f64, center: f64 },
    /// Smooth Gaussian bump `h exp(-(x - c)^2 / (2 w^2))` felt by each particle.
    Barrier { height: f64, width: f64, center: f64 },
    /// Two particles: `w^2 (m1 x1^2 + m2 x2^2) / 2 + kappa (x1 - x2)^2`.
    CoupledHarmonic { omega: f64, kappa: f64 },
    /// Tabulated samples on the run's grid.
    CustomSamples { values: Vec<f64> },
}

/// Scalar multiplier `f(t)` applied to the spatial shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    /// `1 + amplitude * sin(frequency * t)`.
    Sinusoidal { amplitude: f64, frequency: f64 },
}

impl Modulation {
    pub fn factor(&self, t: f64) -> f64 {
        match *self {
            Modulation::Sinusoidal { amplitude, frequency } => 1.0 + amplitude * (frequency * t).sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<Modulation>,
}

impl From<PotentialKind> for Potential {
    fn from(kind: PotentialKind) -> Self {
        Self { kind, modulation: None }
    }
}

impl Potential {
    pub fn free() -> Self {
        PotentialKind::Free.into()
    }

    pub fn harmonic(omega: f64, center: f64) -> Self {
        PotentialKind::Harmonic { omega, center }.into()
    }

    pub fn coupled_harmonic(omega: f64, kappa: f64) -> Self {
        PotentialKind::CoupledHarmonic { omega, kappa }.into()
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        self.modulation = Some(m);
        self
    }

    pub fn is_time_dependent(&self) -> bool {
        self.modulation.is_some()
    }

    fn factor(&self, t: f64) -> f64 {
        self.modulation.map_or(1.0, |m| m.factor(t))
    }

    /// Checks the potential against a grid without sampling it.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match &self.kind {
            PotentialKind::CoupledHarmonic { .. } if grid.dims() != 2 => Err(Error::InvalidParameter(
                "coupled_harmonic requires a two-particle grid".into(),
            )),
            PotentialKind::CustomSamples { values } if values.len() != grid.len() => {
                Err(Error::GridMismatch(format!(
                    "custom potential has {} samples, grid has {}",
                    values.len(),
                    grid.len()
                )))
            }
            PotentialKind::CustomSamples { values } if values.iter().any(|v| !v.is_finite()) => {
                Err(Error::InvalidParameter("custom potential samples must be finite".into()))
            }
            PotentialKind::Barrier { width, .. } if *width <= 0.0 => {
                Err(Error::InvalidParameter("barrier width must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// `V(x, t)` (or `V(x1, x2, t)`) on the grid.
    pub fn samples(&self, grid: &Grid, params: &PhysParams, t: f64) -> Result<RealField> {
        self.validate(grid)?;
        let s = self.factor(t);
        let p = *params;
        let field = match &self.kind {
            PotentialKind::Free => RealField::zeros(*grid),
            PotentialKind::Harmonic { omega, center } => RealField::from_fn(*grid, |x| {
                x.iter()
                    .enumerate()
                    .map(|(a, xi)| 0.5 * p.mass(a) * omega * omega * (xi - center).powi(2))
                    .sum()
            })?,
            PotentialKind::Barrier { height, width, center } => RealField::from_fn(*grid, |x| {
                x.iter()
                    .map(|xi| height * (-(xi - center).powi(2) / (2.0 * width * width)).exp())
                    .sum()
            })?,
            PotentialKind::CoupledHarmonic { omega, kappa } => RealField::from_fn(*grid, |x| {
                0.5 * omega * omega * (p.m1 * x[0] * x[0] + p.m2 * x[1] * x[1]) + kappa * (x[0] - x[1]).powi(2)
            })?,
            PotentialKind::CustomSamples { values } => RealField::new(*grid, values.clone())?,
        };
        Ok(if s == 1.0 { field } else { field.scale(s) })
    }

    /// `dV/dx_axis`, analytic for the closed-form kinds.
    pub fn gradient(&self, grid: &Grid, params: &PhysParams, axis: usize, t: f64) -> Result<RealField> {
        self.validate(grid)?;
        grid.axis(axis)?;
        let s = self.factor(t);
        let p = *params;
        let field = match &self.kind {
            PotentialKind::Free => RealField::zeros(*grid),
            PotentialKind::Harmonic { omega, center } => {
                RealField::from_fn(*grid, |x| p.mass(axis) * omega * omega * (x[axis] - center))?
            }
            PotentialKind::Barrier { height, width, center } => RealField::from_fn(*grid, |x| {
                let d = x[axis] - center;
                -height * d / (width * width) * (-d * d / (2.0 * width * width)).exp()
            })?,
            PotentialKind::CoupledHarmonic { omega, kappa } => RealField::from_fn(*grid, |x| {
                let sign = if axis == 0 { 1.0 } else { -1.0 };
                omega * omega * p.mass(axis) * x[axis] + sign * 2.0 * kappa * (x[0] - x[1])
            })?,
            PotentialKind::CustomSamples { values } => {
                let v = RealField::new(*grid, values.clone())?;
                let scheme = if grid.axis(axis)?.is_periodic() {
                    Scheme::Spectral
                } else {
                    Scheme::Fd4
                };
                diff(&v, axis, 1, scheme)?
            }
        };
        Ok(if s == 1.0 { field } else { field.scale(s) })
    }

    /// True when `V(x1, x2) = V(x2, x1)` holds for these masses.
    pub fn is_swap_symmetric(&self, params: &PhysParams) -> bool {
        match &self.kind {
            PotentialKind::Free | PotentialKind::Barrier { .. } => true,
            PotentialKind::Harmonic { .. } | PotentialKind::CoupledHarmonic { .. } => params.equal_masses(),
            PotentialKind::CustomSamples { .. } => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Grid1D, Grid2D};

    #[test]
    fn coupled_harmonic_needs_two_particles() {
        let g = Grid::One(Grid1D::periodic(16, -1.0, 1.0).unwrap());
        let v = Potential::coupled_harmonic(1.0, 0.5);
        assert!(v.samples(&g, &PhysParams::default(), 0.0).is_err());
    }

    #[test]
    fn analytic_gradients_match_spectral() {
        let ax = Grid1D::periodic(64, -12.0, 12.0).unwrap();
        let g = Grid::Two(Grid2D::square(ax));
        let p = PhysParams::two_particle(1.0, 1.0, 2.0).unwrap();
        let v = Potential {
            kind: PotentialKind::Barrier { height: 2.0, width: 1.0, center: 0.5 },
            modulation: Some(Modulation::Sinusoidal { amplitude: 0.2, frequency: 3.0 }),
        };
        for axis in 0..2 {
            let exact = v.gradient(&g, &p, axis, 0.3).unwrap();
            let num = diff(&v.samples(&g, &p, 0.3).unwrap(), axis, 1, Scheme::Spectral).unwrap();
            assert!((&exact - &num).max_magnitude() < 1e-9);
        }
        let c = Potential::coupled_harmonic(1.2, 0.7);
        let s = c.samples(&g, &p, 0.0).unwrap();
        let g0 = c.gradient(&g, &p, 0, 0.0).unwrap();
        // spot check by central difference in x1 at an interior point
        let n = ax.n();
        let (i1, i2) = (20, 37);
        let fd = (s.values()[(i1 + 1) * n + i2] - s.values()[(i1 - 1) * n + i2]) / (2.0 * ax.dx());
        assert!((fd - g0.values()[i1 * n + i2]).abs() < 1e-9);
    }

    #[test]
    fn swap_symmetry_requires_equal_masses() {
        let c = Potential::coupled_harmonic(1.0, 0.5);
        assert!(c.is_swap_symmetric(&PhysParams::default()));
        assert!(!c.is_swap_symmetric(&PhysParams::two_particle(1.0, 1.0, 2.0).unwrap()));
    }
}
