use super::field::RealField;
use crate::error::{Error, Result};

/// Three consecutive snapshots of a real field at `t - dt`, `t`, `t + dt`.
#[derive(Clone, Debug)]
pub struct TimeSlabs {
    prev: RealField,
    cur: RealField,
    next: RealField,
    dt: f64,
}

impl TimeSlabs {
    pub fn new(prev: RealField, cur: RealField, next: RealField, dt: f64) -> Result<Self> {
        cur.ensure_same_grid(prev.grid())?;
        cur.ensure_same_grid(next.grid())?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("slab spacing dt = {dt} must be positive")));
        }
        Ok(Self { prev, cur, next, dt })
    }

    /// Builds slabs from a sequence that must hold exactly three snapshots.
    pub fn from_sequence(mut fields: Vec<RealField>, dt: f64) -> Result<Self> {
        if fields.len() != 3 {
            return Err(Error::MissingSlabs(format!("{} snapshots supplied, 3 required", fields.len())));
        }
        let next = fields.pop().unwrap();
        let cur = fields.pop().unwrap();
        let prev = fields.pop().unwrap();
        Self::new(prev, cur, next, dt)
    }

    pub fn prev(&self) -> &RealField {
        &self.prev
    }

    pub fn cur(&self) -> &RealField {
        &self.cur
    }

    pub fn next(&self) -> &RealField {
        &self.next
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// `(f(t+dt) - 2 f(t) + f(t-dt)) / dt^2`.
pub fn second_time_derivative(slabs: &TimeSlabs) -> Result<RealField> {
    let inv = 1.0 / (slabs.dt * slabs.dt);
    let v = slabs
        .prev
        .values()
        .iter()
        .zip(slabs.cur.values())
        .zip(slabs.next.values())
        .map(|((&m, &c), &p)| (p - 2.0 * c + m) * inv)
        .collect();
    RealField::new(*slabs.cur.grid(), v)
}

/// `(f(t+dt) - f(t-dt)) / (2 dt)`.
pub fn first_time_derivative(slabs: &TimeSlabs) -> Result<RealField> {
    let inv = 0.5 / slabs.dt;
    let v = slabs
        .prev
        .values()
        .iter()
        .zip(slabs.next.values())
        .map(|(&m, &p)| (p - m) * inv)
        .collect();
    RealField::new(*slabs.cur.grid(), v)
}
