//! Christoffel symbols, geodesics, T-tensors and C^p norms for metric variants.

mod christoffel;
mod cp_norm;
mod derivative;
mod geodesic;
mod t_tensor;

pub use christoffel::{christoffel, Christoffel, ChristoffelField};
pub use cp_norm::{cp_norm, difference_field, variant_field, TensorField};
pub use derivative::{metric_derivatives, richardson_derivative};
pub use geodesic::{geodesic_integrate, GeodesicState, Trajectory};
pub use t_tensor::{t_tensor, TTensorSample};
