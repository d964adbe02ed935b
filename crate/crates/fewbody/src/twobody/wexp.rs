use serde::Serialize;

use crate::core::quadrature::RadialQuadrature;
use crate::core::TwoBodyChannel;
use crate::error::{ensure, Result};
use crate::linalg::{fit_line, LineFit};
use crate::specfun::{expansion_kernels, Psi1Convention};

use super::bs::{assemble_bs, w_leading_eigenvalue};
use super::nystrom::{product_integration_matrix, FnKernel};
use super::profile::resonance_profile;

/// Constants of `w(z) = (z(ln|z| - τ))⁻¹ ⟨·,φ⟩φ + O(1)` for a resonant channel in `R^4`.
#[derive(Debug, Clone, Serialize)]
pub struct WExpansion {
    pub tau: f64,
    /// Cutoff `μ_α ∈ (-1, 0)` of the ζ regularizer; `ln|t| < τ` on `[μ_α, 0)`.
    pub mu_alpha: f64,
    pub convention: Psi1Convention,
    /// `⟨G₂φ, φ⟩`, which must equal -1 after normalization.
    pub g2_check: f64,
    /// `‖φ‖²` of the normalized eigenvector.
    pub phi_norm2: f64,
    /// `(z, μ_w(z))` samples, filled by [`fit_w_expansion`].
    pub samples: Vec<(f64, f64)>,
    pub tau_fit: Option<f64>,
    pub fit_residual: Option<f64>,
}

/// `μ_α = -½ min(1, e^τ)`.
pub fn mu_alpha_for(tau: f64) -> f64 {
    -0.5 * tau.exp().min(1.0)
}

/// `τ = ⟨G₁φ, φ⟩` with `⟨|v|^{1/2}, φ⟩ = 2π/m`.
pub fn extract_tau(
    ch: &TwoBodyChannel,
    quad: &RadialQuadrature,
    convention: Psi1Convention,
) -> Result<WExpansion> {
    ensure(ch.d == 4 && ch.l == 0, || {
        format!("tau is defined for d = 4 s-wave channels, got d = {}, l = {}", ch.d, ch.l)
    })?;
    let kern = expansion_kernels(ch, convention)?;
    let p = resonance_profile(ch, quad)?;
    let n = quad.len();
    let sv: Vec<f64> = quad.nodes.iter().map(|&r| ch.potential.sqrt_abs(r)).collect();
    let src: Vec<f64> = (0..n).map(|j| quad.nodes[j].powi(3) * sv[j] * p.phi[j]).collect();
    let k1 = FnKernel(|r, rp| kern.swave_g1(r, rp));
    let t1 = product_integration_matrix(quad, &k1);
    let mut tau = 0.0;
    let mut g2 = 0.0;
    let plain: f64 = (0..n).map(|j| quad.h[j] * src[j]).sum();
    for i in 0..n {
        let row: f64 = (0..n).map(|j| t1[(i, j)] * src[j]).sum();
        let outer = quad.weights[i] * p.phi[i] * sv[i];
        tau += outer * row;
        g2 += outer * kern.swave_g2() * plain;
    }
    let phi_norm2 = (0..n).map(|i| quad.weights[i] * p.phi[i] * p.phi[i]).sum();
    Ok(WExpansion {
        tau,
        mu_alpha: mu_alpha_for(tau),
        convention,
        g2_check: g2,
        phi_norm2,
        samples: Vec::new(),
        tau_fit: None,
        fit_residual: None,
    })
}

/// Fits `1/(μ_w(z)|z|) = a ln(1/|z|) + b` over the sample energies; `τ_fit = b/a`.
///
/// The residual is the largest relative deviation from the fitted line.
pub fn fit_w_expansion(
    ch: &TwoBodyChannel,
    quad: &RadialQuadrature,
    zs: &[f64],
    mut w: WExpansion,
) -> Result<WExpansion> {
    ensure(zs.len() >= 3, || "need at least three sample energies".into())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &z in zs {
        let mu_w = w_leading_eigenvalue(ch, quad, z)?;
        w.samples.push((z, mu_w));
        xs.push((1.0 / z.abs()).ln());
        ys.push(1.0 / (mu_w * z.abs()));
    }
    let fit = fit_line(&xs, &ys);
    w.tau_fit = Some(fit.intercept / fit.slope);
    w.fit_residual = Some(fit.max_rel);
    Ok(w)
}

/// The regularizer: `√(t(ln|t| - τ))` on `(μ_α, 0)`, 1 for `t ≤ 1.5 μ_α`
/// (which covers `t ≤ -1`), joined by a `C^∞` blend.
pub fn zeta(t: f64, w: &WExpansion) -> Result<f64> {
    ensure(t < 0.0, || format!("zeta needs t < 0, got {t}"))?;
    Ok(zeta_raw(t, w.tau, w.mu_alpha))
}

pub(crate) fn zeta_raw(t: f64, tau: f64, mu: f64) -> f64 {
    let exact = |t: f64| (t * (t.abs().ln() - tau)).sqrt();
    let t0 = 1.5 * mu;
    if t <= t0 {
        1.0
    } else if t >= mu {
        exact(t)
    } else {
        let s = (t - t0) / (mu - t0);
        let h = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
        let step = h(s) / (h(s) + h(1.0 - s));
        (1.0 - step) + step * exact(t)
    }
}

/// Power-law fit of `1 - μ_max(BS(z))` against `|z|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularityFit {
    pub exponent: f64,
    /// Slope `a` and intercept `b` of `(1-μ)/|z| = a ln(1/|z|) + b` (d = 4 law).
    pub log_slope: f64,
    pub log_intercept: f64,
    /// Largest relative residual of the relevant law.
    pub residual: f64,
}

pub fn bs_gap_samples(ch: &TwoBodyChannel, quad: &RadialQuadrature, zs: &[f64]) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    zs.par_iter()
        .map(|&z| Ok((z, 1.0 - assemble_bs(ch, z, quad)?.top_eigenvalue())))
        .collect()
}

/// d = 4: `1 - μ = |z|(a ln(1/|z|) + b)`, exponent from the log-corrected
/// quantity; otherwise a plain log-log slope.
pub fn singularity_fit(ch: &TwoBodyChannel, quad: &RadialQuadrature, zs: &[f64]) -> Result<SingularityFit> {
    ensure(zs.len() >= 3 && zs.iter().all(|&z| z < 0.0), || {
        "need at least three negative energies".into()
    })?;
    let s = bs_gap_samples(ch, quad, zs)?;
    let lz: Vec<f64> = s.iter().map(|(z, _)| z.abs().ln()).collect();
    if ch.d == 4 && ch.l == 0 {
        let x: Vec<f64> = lz.iter().map(|l| -l).collect();
        let y: Vec<f64> = s.iter().map(|(z, g)| g / z.abs()).collect();
        let lin = fit_line(&x, &y);
        let c = lin.intercept / lin.slope;
        let ly: Vec<f64> = s
            .iter()
            .zip(&x)
            .map(|((_, g), xl)| (g / (xl + c)).ln())
            .collect();
        let pw = fit_line(&lz, &ly);
        Ok(SingularityFit {
            exponent: pw.slope,
            log_slope: lin.slope,
            log_intercept: lin.intercept,
            residual: lin.max_rel,
        })
    } else {
        let ly: Vec<f64> = s.iter().map(|(_, g)| g.ln()).collect();
        let LineFit { slope, max_rel, .. } = fit_line(&lz, &ly);
        Ok(SingularityFit {
            exponent: slope,
            log_slope: 0.0,
            log_intercept: 0.0,
            residual: max_rel,
        })
    }
}

/// Geometric schedule of `n` energies from `-hi` to `-lo` (`hi > lo > 0`).
pub fn geometric_schedule(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -hi * (lo / hi).powf(k as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PotentialSpec;
    use crate::twobody::{critical_channel, default_quadrature};

    fn critical4() -> (TwoBodyChannel, RadialQuadrature) {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        let q = default_quadrature(&ch).unwrap();
        (critical_channel(&ch, &q).unwrap(), q)
    }

    #[test]
    fn g2_normalization_and_tau_refinement() {
        let (ch, q) = critical4();
        let w = extract_tau(&ch, &q, Psi1Convention::Exact).unwrap();
        assert!((w.g2_check + 1.0).abs() < 1e-10, "{}", w.g2_check);
        let qr = q.refined();
        let chr = critical_channel(&ch, &qr).unwrap();
        let wr = extract_tau(&chr, &qr, Psi1Convention::Exact).unwrap();
        assert!((w.tau - wr.tau).abs() < 1e-4 * w.tau.abs());
        assert!(w.mu_alpha > -1.0 && w.mu_alpha < 0.0);
    }

    #[test]
    fn zeta_shape() {
        let w = WExpansion {
            tau: -0.3,
            mu_alpha: mu_alpha_for(-0.3),
            convention: Psi1Convention::Exact,
            g2_check: -1.0,
            phi_norm2: 1.0,
            samples: vec![],
            tau_fit: None,
            fit_residual: None,
        };
        assert_eq!(zeta(-1.0, &w).unwrap(), 1.0);
        assert_eq!(zeta(-7.0, &w).unwrap(), 1.0);
        assert!(zeta(-1e-12, &w).unwrap() < 1e-5);
        assert!(zeta(0.0, &w).is_err());
        for k in 1..=100 {
            let t = -2.0 * k as f64 / 100.0;
            assert!(zeta(t, &w).unwrap() > 0.0);
        }
        // ln|t| - τ < 0 on [μ_α, 0)
        assert!(w.mu_alpha.abs().ln() < w.tau);
    }
}
