//! Independent cross-checks: a correlated-Gaussian Rayleigh–Ritz count of
//! three-body bound states, Faddeev-component residuals of its Ritz pairs,
//! and two-body radial shooting with a finite-difference reference.

mod ecg;
mod fd;
mod shooting;

pub use ecg::{
    faddeev_component_residual, variational_count, variational_spectrum, ComponentResidual,
    VariationalBasis, VariationalCount, VariationalSpectrum, MIN_ABS_Z, PRUNE_RATIO,
};
pub use fd::fd_ground_state;
pub use shooting::{shooting_critical_coupling, shooting_ground_state, GroundState};
