//! Three-body Faddeev/Birman-Schwinger operator `A(z) = W^{1/2} K W^{1/2}`
//! on the zero-angular-momentum s-wave subspace, its `ζ`-regularized form
//! `M = Γ⁻¹ K Γ⁻¹` in dimension 4, and counting of eigenvalues above one.
//!
//! Every pair interacts only in its s-wave and the spectator moves in an
//! s-wave, so `n(1, A(z))` is a lower bound for the full count.

mod blocks;
mod count;
mod system;

pub use blocks::{
    assemble_a, assemble_a_full, assemble_k_block, assemble_m_block, assemble_w_half,
    effective_energies, w_half_blocks, FaddeevOperator, WRoute,
};
pub use count::{
    count_above_one, counting_curve, CountResult, CountSample, CountingCurve, FitMode,
    BOUNDARY_TOL, COUNT_MARGIN,
};
pub use system::{critical_strength, FaddeevGrid, FaddeevSystem, Symmetry, MIN_ANGULAR_ORDER};
