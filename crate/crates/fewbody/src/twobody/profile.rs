use serde::Serialize;

use crate::core::quadrature::RadialQuadrature;
use crate::core::{Sector, TwoBodyChannel};
use crate::error::{ensure, Error, Result};
use crate::linalg::fit_line;
use crate::specfun::RadialGreen;

use super::bs::assemble_bs;
use super::nystrom::kernel_row;

/// Admissible distance of `μ_max(BS(0))` from 1 for a critical channel.
pub const CRITICALITY_TOL: f64 = 1e-6;
/// Tail fit window in units of the potential range.
pub const TAIL_WINDOW: (f64, f64) = (20.0, 100.0);
/// Outer end of the logarithmic tail grid in units of the range.
pub const TAIL_MAX: f64 = 200.0;
const TAIL_POINTS: usize = 600;

/// Zero-energy solution `f` of `(-Δ/2m + v) f = 0` in one partial wave.
///
/// `f = G_0 |v|^{1/2} φ` with `φ` the top eigenvector of `BS(0)`. In `R^4`,
/// s-wave, `φ` is scaled so that `⟨|v|^{1/2}, φ⟩ = 2π/m`; otherwise the radial
/// `φ` has unit `L²(R^d)` norm. The sign makes `⟨|v|^{1/2}, φ⟩ > 0` (s-wave) or
/// the largest `|φ|` positive.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceProfile {
    pub d: usize,
    pub l: usize,
    pub mass: f64,
    pub range: f64,
    pub mu_max: f64,
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
    pub phi: Vec<f64>,
    /// `⟨v, f⟩` over `R^d`; zero by parity outside the s-wave.
    pub v_f: f64,
    /// `⟨|v|^{1/2}, φ⟩` radial integral over `R^d`.
    pub sqrt_v_phi: f64,
    pub tail_radii: Vec<f64>,
    pub tail_f: Vec<f64>,
    /// Fitted constant of `r^{ℓ+d-2} f` over the tail window.
    pub c_tail: f64,
    /// Fitted decay exponent of `f` over the tail window.
    pub p_tail: f64,
    pub square_integrable: bool,
    /// `‖f - c_tail r^{-(ℓ+d-2)}‖` over `σ ≤ r ≤ r_tail`.
    pub remainder_norm: f64,
    /// `(R, ∫_{B_R} |f|²)` at `R = 50σ·2^k` up to the tail grid end.
    pub l2_shells: Vec<(f64, f64)>,
    #[serde(skip)]
    grid: RadialQuadrature,
    #[serde(skip)]
    source: Vec<f64>,
    #[serde(skip)]
    green: Option<RadialGreen>,
}

impl ResonanceProfile {
    /// `f(r)` at any radius via the integral representation.
    pub fn eval(&self, r: f64) -> f64 {
        let g = self.green.expect("profile built by resonance_profile");
        kernel_row(&self.grid, &g, r)
            .iter()
            .zip(&self.source)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn grid(&self) -> &RadialQuadrature {
        &self.grid
    }

    /// `Σ_k (I(R_{k+1}) - I(R_k))` style shell increments beyond `r0`.
    pub fn l2_increments_beyond(&self, r0: f64) -> Vec<f64> {
        self.l2_shells
            .windows(2)
            .filter(|w| w[0].0 >= r0 * (1.0 - 1e-12))
            .map(|w| w[1].1 - w[0].1)
            .collect()
    }
}

pub fn resonance_profile(ch: &TwoBodyChannel, quad: &RadialQuadrature) -> Result<ResonanceProfile> {
    let bs = assemble_bs(ch, 0.0, quad)?;
    let (mu, mut phi) = bs.top_eigenfunction();
    if (mu - 1.0).abs() > CRITICALITY_TOL {
        return Err(Error::NotCritical {
            mu_max: mu,
            tol: CRITICALITY_TOL,
        });
    }
    let d = ch.d;
    let w = &quad.weights;
    let sv = &bs.sqrt_v;
    let mut sqrt_v_phi: f64 = (0..phi.len()).map(|i| w[i] * sv[i] * phi[i]).sum();
    let scale = if d == 4 && ch.l == 0 {
        ensure(sqrt_v_phi.abs() > 1e-10, || {
            "<|v|^1/2, phi> vanishes: s-wave normalization impossible".into()
        })?;
        2.0 * std::f64::consts::PI / ch.mass / sqrt_v_phi
    } else if ch.l == 0 {
        sqrt_v_phi.signum()
    } else {
        let k = (0..phi.len())
            .max_by(|&a, &b| phi[a].abs().total_cmp(&phi[b].abs()))
            .unwrap();
        phi[k].signum()
    };
    phi.iter_mut().for_each(|p| *p *= scale);
    sqrt_v_phi *= scale;

    let dm1 = d as i32 - 1;
    let source: Vec<f64> = (0..phi.len())
        .map(|j| quad.nodes[j].powi(dm1) * sv[j] * phi[j])
        .collect();
    let t = &bs.green_weights;
    let f: Vec<f64> = (0..phi.len())
        .map(|i| (0..phi.len()).map(|j| t[(i, j)] * source[j]).sum())
        .collect();
    let v_f = if ch.l == 0 {
        (0..f.len())
            .map(|i| w[i] * ch.potential.value(quad.nodes[i]) * f[i])
            .sum()
    } else {
        0.0
    };

    let green = RadialGreen::for_channel(ch, 0.0);
    let sigma = ch.potential.range;
    let r0 = quad.r_max().max(sigma);
    let r1 = TAIL_MAX * sigma;
    let tail_radii: Vec<f64> = (0..TAIL_POINTS)
        .map(|k| r0 * (r1 / r0).powf(k as f64 / (TAIL_POINTS - 1) as f64))
        .collect();
    let mut profile = ResonanceProfile {
        d,
        l: ch.l,
        mass: ch.mass,
        range: sigma,
        mu_max: mu,
        radii: quad.nodes.clone(),
        f,
        phi,
        v_f,
        sqrt_v_phi,
        tail_radii: tail_radii.clone(),
        tail_f: Vec::new(),
        c_tail: 0.0,
        p_tail: 0.0,
        square_integrable: false,
        remainder_norm: 0.0,
        l2_shells: Vec::new(),
        grid: quad.clone(),
        source,
        green: Some(green),
    };
    profile.tail_f = tail_radii.iter().map(|&r| profile.eval(r)).collect();

    let p0 = (ch.l + d - 2) as i32;
    let (lo, hi) = (TAIL_WINDOW.0 * sigma, TAIL_WINDOW.1 * sigma);
    let (mut lx, mut ly, mut scaled) = (Vec::new(), Vec::new(), Vec::new());
    for (&r, &fv) in profile.tail_radii.iter().zip(&profile.tail_f) {
        if r >= lo && r <= hi {
            lx.push(r.ln());
            ly.push(fv.abs().ln());
            scaled.push(fv * r.powi(p0));
        }
    }
    ensure(lx.len() >= 4, || "tail window holds too few radii".into())?;
    profile.p_tail = -fit_line(&lx, &ly).slope;
    profile.c_tail = scaled.iter().sum::<f64>() / scaled.len() as f64;
    profile.square_integrable = 2.0 * profile.p_tail - d as f64 > 0.25;
    profile.remainder_norm = remainder_norm(&profile, p0);
    profile.l2_shells = l2_shells(&profile);
    Ok(profile)
}

/// Trapezoid rule in `ln r` on the tail grid for `∫ g(r) r^d d(ln r)`.
fn tail_integral(p: &ResonanceProfile, upto: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let wd = p.grid.surface;
    let mut acc = 0.0;
    for k in 1..p.tail_radii.len() {
        let (ra, rb) = (p.tail_radii[k - 1], p.tail_radii[k]);
        if rb > upto * (1.0 + 1e-12) {
            break;
        }
        let fa = g(ra, p.tail_f[k - 1]) * ra.powi(p.d as i32);
        let fb = g(rb, p.tail_f[k]) * rb.powi(p.d as i32);
        acc += 0.5 * (fa + fb) * (rb / ra).ln();
    }
    wd * acc
}

fn remainder_norm(p: &ResonanceProfile, p0: i32) -> f64 {
    let c = p.c_tail;
    let inner: f64 = p
        .radii
        .iter()
        .zip(&p.f)
        .zip(&p.grid.weights)
        .filter(|((r, _), _)| **r >= p.range)
        .map(|((r, f), w)| {
            let e = f - c * r.powi(-p0);
            w * e * e
        })
        .sum();
    let outer = tail_integral(p, f64::INFINITY, |r, f| {
        let e = f - c * r.powi(-p0);
        e * e
    });
    (inner + outer).sqrt()
}

fn l2_shells(p: &ResonanceProfile) -> Vec<(f64, f64)> {
    let core: f64 = p.f.iter().zip(&p.grid.weights).map(|(f, w)| w * f * f).sum();
    let end = *p.tail_radii.last().unwrap();
    let mut out = Vec::new();
    let mut r = 50.0 * p.range;
    while r <= end * (1.0 + 1e-12) {
        out.push((r, core + tail_integral(p, r, |_, f| f * f)));
        r *= 2.0;
    }
    out
}

/// Fitted tail constant of `r² f` and the prediction `-(m/2π²)⟨v,f⟩`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailCoefficient {
    pub fitted: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn tail_coefficient(profile: &ResonanceProfile, m: f64) -> Result<TailCoefficient> {
    ensure(profile.d == 4 && profile.l == 0, || {
        "tail coefficient law holds for four-dimensional s-wave profiles".into()
    })?;
    let reach = profile.tail_radii.last().copied().unwrap_or(0.0);
    ensure(reach >= TAIL_WINDOW.0 * profile.range, || {
        format!("tail grid ends at {reach}, below 20 ranges")
    })?;
    let predicted = -m / (2.0 * std::f64::consts::PI.powi(2)) * profile.v_f;
    Ok(TailCoefficient {
        fitted: profile.c_tail,
        predicted,
        relative_error: (profile.c_tail - predicted).abs() / predicted.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VirtualLevelKind {
    Resonance,
    ZeroEigenvalue,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VirtualLevel {
    pub kind: VirtualLevelKind,
    pub p_tail: f64,
    pub d: usize,
    pub l: usize,
}

/// Resonance iff the zero-energy solution fails to be square-integrable,
/// decided from the fitted tail exponent.
pub fn classify_virtual_level(ch: &TwoBodyChannel, quad: &RadialQuadrature) -> Result<VirtualLevel> {
    ensure(ch.sector == Sector::Generic || ch.l % 2 == 1, || {
        "antisymmetric sector requires odd angular momentum".into()
    })?;
    let p = resonance_profile(ch, quad)?;
    Ok(VirtualLevel {
        kind: if p.square_integrable {
            VirtualLevelKind::ZeroEigenvalue
        } else {
            VirtualLevelKind::Resonance
        },
        p_tail: p.p_tail,
        d: ch.d,
        l: ch.l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PotentialSpec;
    use crate::twobody::{critical_channel, default_quadrature};

    fn critical(d: usize, l: usize) -> (TwoBodyChannel, RadialQuadrature) {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::new(1.0, v, d, l, Default::default()).unwrap();
        let q = default_quadrature(&ch).unwrap();
        (critical_channel(&ch, &q).unwrap(), q)
    }

    #[test]
    fn profile_matches_eigenvector_on_the_support() {
        let (ch, q) = critical(4, 0);
        let p = resonance_profile(&ch, &q).unwrap();
        for i in 0..p.f.len() {
            let sv = ch.potential.sqrt_abs(p.radii[i]);
            if sv > 1e-3 {
                let e = (sv * p.f[i] - p.phi[i]).abs() / p.phi[i].abs();
                assert!(e < 1e-10, "r = {}: {e}", p.radii[i]);
            }
        }
        assert!(p.f.iter().all(|&x| x > 0.0));
        assert!((p.sqrt_v_phi - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn non_critical_channel_is_rejected() {
        let v = PotentialSpec::gaussian(2.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        let q = default_quadrature(&ch).unwrap();
        assert!(matches!(
            resonance_profile(&ch, &q),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn tail_constant_positive_and_stable_under_longer_grid() {
        let (ch, q) = critical(4, 0);
        let p = resonance_profile(&ch, &q).unwrap();
        let t = tail_coefficient(&p, ch.mass).unwrap();
        assert!(t.fitted > 0.0 && t.relative_error < 0.02);
        let q2 = RadialQuadrature::uniform_with_breakpoints(4, 2.0 * q.r_max(), 8, 16, &[]).unwrap();
        let ch2 = critical_channel(&ch, &q2).unwrap();
        let p2 = resonance_profile(&ch2, &q2).unwrap();
        assert!((p2.c_tail - p.c_tail).abs() < 5e-3 * p.c_tail);
    }

    #[test]
    fn antisymmetric_profile_has_zero_overlap_with_v() {
        let (ch, q) = critical(4, 1);
        let p = resonance_profile(&ch, &q).unwrap();
        assert_eq!(p.v_f, 0.0);
        assert!((p.p_tail - 3.0).abs() < 0.05);
    }
}
