//! Problem definitions shared by all modules: potentials, channels, radial
//! quadrature, operator and report records, and the run configuration schema.

pub mod channel;
pub mod config;
pub mod potential;
pub mod quadrature;
pub mod report;

pub use channel::{Sector, TwoBodyChannel};
pub use config::RunConfig;
pub use potential::{PotentialFamily, PotentialSpec};
pub use quadrature::{build_radial_quadrature, sphere_surface, RadialQuadrature};
pub use report::{KernelOperator, KernelTag, SpectralReport};
