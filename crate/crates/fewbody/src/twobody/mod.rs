//! Two-body virtual levels: Birman-Schwinger spectra, critical couplings,
//! zero-energy profiles and their tails, the small-|z| expansion of
//! `w(z) = (I - BS(z))⁻¹` in `R^4`, and the spectral gap on the complement of
//! the zero-energy solution.
//!
//! Partial-wave reduction uses the closed-form radial Green function; the
//! Nyström rule integrates its kink at `r = r'` by product integration.

mod bs;
mod gap;
pub mod nystrom;
mod profile;
mod wexp;

pub use bs::{
    assemble_bs, critical_channel, default_quadrature, find_critical_coupling,
    w_leading_eigenvalue, BirmanSchwingerOperator,
};
pub use gap::{gap_on_complement, unconstrained_minimum, GapResult, DEFAULT_ELEMENTS};
pub use profile::{
    classify_virtual_level, resonance_profile, tail_coefficient, ResonanceProfile,
    TailCoefficient, VirtualLevel, VirtualLevelKind, CRITICALITY_TOL, TAIL_WINDOW,
};
pub use wexp::{
    bs_gap_samples, extract_tau, fit_w_expansion, geometric_schedule, mu_alpha_for,
    singularity_fit, zeta, SingularityFit, WExpansion,
};
#[allow(unused_imports)]
pub(crate) use wexp::zeta_raw;
