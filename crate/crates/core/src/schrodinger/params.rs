use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of a run. One-particle problems use `m1` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub hbar: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            m1: 1.0,
            m2: 1.0,
        }
    }
}

impl PhysParams {
    pub fn one_particle(hbar: f64, m: f64) -> Result<Self> {
        Self { hbar, m1: m, m2: m }.validated()
    }

    pub fn two_particle(hbar: f64, m1: f64, m2: f64) -> Result<Self> {
        Self { hbar, m1, m2 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        for (name, v) in [("hbar", self.hbar), ("m1", self.m1), ("m2", self.m2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(self)
    }

    /// Mass attached to grid axis `axis` (0 = particle 1, 1 = particle 2).
    pub fn mass(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.m1
        } else {
            self.m2
        }
    }

    pub fn equal_masses(&self) -> bool {
        self.m1 == self.m2
    }
}
