//! Partial derivatives of the wavefunction, from which every hydrodynamic
//! field is assembled pointwise.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{diff, spectral_partials, ComplexField, Scheme};

/// Multi-index partials `d^a/dx1^a d^b/dx2^b psi` of a wavefunction.
#[derive(Clone, Debug)]
pub(crate) struct Jets {
    orders: Vec<[u32; 2]>,
    fields: Vec<ComplexField>,
}

fn along(field: &ComplexField, axis: usize, mut order: u32, scheme: Scheme) -> Result<ComplexField> {
    let mut out = field.clone();
    while order > 0 {
        let step = order.min(2);
        out = diff(&out, axis, step, scheme)?;
        order -= step;
    }
    Ok(out)
}

impl Jets {
    pub(crate) fn new(psi: &ComplexField, orders: &[[u32; 2]], scheme: Scheme) -> Result<Self> {
        let fields = match scheme {
            Scheme::Spectral => spectral_partials(psi, orders)?,
            _ => orders
                .iter()
                .map(|o| {
                    let a = along(psi, 0, o[0], scheme)?;
                    if o[1] > 0 {
                        along(&a, 1, o[1], scheme)
                    } else {
                        Ok(a)
                    }
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self {
            orders: orders.to_vec(),
            fields,
        })
    }

    pub(crate) fn get(&self, order: [u32; 2]) -> Result<&[Complex64]> {
        self.orders
            .iter()
            .position(|o| *o == order)
            .map(|i| self.fields[i].values())
            .ok_or_else(|| Error::InvalidParameter(format!("derivative {order:?} was not computed")))
    }
}

/// Orders needed for one-particle extraction.
pub(crate) const ORDERS_1P: [[u32; 2]; 3] = [[1, 0], [2, 0], [3, 0]];

/// Orders needed for two-particle extraction.
pub(crate) const ORDERS_2P: [[u32; 2]; 9] = [
    [1, 0],
    [0, 1],
    [2, 0],
    [0, 2],
    [1, 1],
    [3, 0],
    [0, 3],
    [2, 1],
    [1, 2],
];
