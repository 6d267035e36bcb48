//! Grids, field containers and the spatial/temporal difference operators
//! shared by every other module.

mod diff;
mod field;
mod grid;
mod norms;
mod slabs;
pub(crate) mod spectral;

pub use diff::{diff, diff_mixed, fornberg_weights, Scheme};
pub use field::{ComplexField, Field, RealField, Sample};
pub use grid::{Boundary, Grid, Grid1D, Grid2D};
pub use norms::{masked_norm, norm, NormKind, NormTriple};
pub use slabs::{first_time_derivative, second_time_derivative, TimeSlabs};
pub use spectral::spectral_partials;
