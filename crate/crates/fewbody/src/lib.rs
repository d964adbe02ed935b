//! Two- and three-body spectral laboratory.
//!
//! Radial Birman-Schwinger spectra and virtual levels of pair potentials,
//! zero-energy resonance profiles, the small-|z| expansion of the two-body
//! resolvent in four dimensions, and the Faddeev operator `A(z)` whose
//! eigenvalues above one count three-body bound states below `z`.
//!
//! Module map:
//! - [`core`]: potentials, channels, radial quadrature, reports, run configuration.
//! - [`specfun`]: Bessel/Hankel series, digamma, resolvent kernels.
//! - [`twobody`]: Birman-Schwinger operators, critical couplings, profiles, tau, gap.
//! - [`jacobi`]: Jacobi momenta, reduced masses, kinetic form in mixed coordinates.
//! - [`faddeev`]: `K`, `W^{1/2}`, `A(z)`, regularized `M` blocks, counting.
//! - [`oracle`]: correlated-Gaussian Rayleigh-Ritz, radial shooting, finite differences.

pub mod core;
pub mod error;
pub mod faddeev;
pub mod jacobi;
pub mod linalg;
pub mod oracle;
pub mod specfun;
pub mod twobody;

pub use crate::error::{Error, Result};
