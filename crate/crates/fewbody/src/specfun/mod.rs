//! Special functions and resolvent kernels.
//!
//! The small-argument Hankel series, its coefficient tables and the digamma
//! values are implemented exactly as series; modified Bessel functions of
//! integer and half-integer order cover the radial Green functions at
//! arbitrary arguments.

mod bessel;
mod kernels;
mod series;

pub use bessel::{bessel_i_scaled, bessel_j, bessel_k_scaled, sphere_average_plane_wave};
pub use kernels::{
    expansion_kernels, free_resolvent_kernel, RadialGreen, ResolventExpansionKernels,
};
pub use series::{
    digamma, digamma_with, hankel1_1, hankel1_1_with, xk1_series, Psi1Convention,
    SeriesCoefficients, EULER_GAMMA, SERIES_ORDER, SERIES_RADIUS,
};
