use std::f64::consts::PI;

use super::bessel::{bessel_i_scaled, bessel_k_scaled};
use super::series::{xk1_series, Psi1Convention, SeriesCoefficients, SERIES_ORDER, SERIES_RADIUS};
use crate::core::channel::TwoBodyChannel;
use crate::core::potential::PotentialSpec;
use crate::error::{ensure, Result};

/// Kernel of `(-Δ/(2m) - z)^{-1}` at separation `s` in dimension 3 or 4.
///
/// For `d = 4`, `z < 0` this is `m κ K_1(κ s) / (2π² s)`, `κ = sqrt(2m|z|)`,
/// i.e. the Hankel form `m i sqrt(2mz) H_1^{(1)}(sqrt(2mz) s) / (4π s)` on the
/// imaginary axis. Inside `κ s ≤ 5` the Hankel series is summed; beyond it the
/// modified Bessel function is used.
pub fn free_resolvent_kernel(d: usize, m: f64, z: f64, s: f64) -> Result<f64> {
    ensure(s > 0.0, || "free_resolvent_kernel: s = 0 is the singular diagonal".into())?;
    ensure(z <= 0.0, || format!("free_resolvent_kernel: z must be <= 0, got {z}"))?;
    ensure(m > 0.0, || format!("free_resolvent_kernel: mass must be > 0, got {m}"))?;
    let kappa = (2.0 * m * (-z)).sqrt();
    match d {
        3 => Ok(m / (2.0 * PI) * (-kappa * s).exp() / s),
        4 => {
            let base = m / (2.0 * PI * PI * s * s);
            if z == 0.0 {
                return Ok(base);
            }
            let x = kappa * s;
            let xk1 = if x <= SERIES_RADIUS {
                thread_local! {
                    static COEFFS: SeriesCoefficients =
                        SeriesCoefficients::new(SERIES_ORDER, 1.0, Psi1Convention::Exact);
                }
                COEFFS.with(|c| xk1_series(x, c))
            } else {
                x * bessel_k_scaled(2, x) * (-x).exp()
            };
            Ok(base * xk1)
        }
        _ => Err(crate::Error::validation(format!(
            "free_resolvent_kernel: dimension must be 3 or 4, got {d}"
        ))),
    }
}

/// Partial-wave projection `g_ℓ(r, r')` of the free resolvent in `R^d`, taken
/// with respect to the measure `r'^{d-1} dr'`:
/// `g_ℓ = 2m (r r')^{-(d-2)/2} I_ν(κ r_<) K_ν(κ r_>)`, `ν = ℓ + (d-2)/2`, and at
/// `κ = 0`, `g_ℓ = (2m / 2ν) r_<^ℓ r_>^{-(ℓ+d-2)}`.
///
/// For `ℓ = 0` this is `w_d` times the sphere average of the full kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGreen {
    pub d: usize,
    pub l: usize,
    pub mass: f64,
    pub kappa: f64,
    two_nu: u32,
}

impl RadialGreen {
    pub fn new(d: usize, l: usize, mass: f64, energy: f64) -> Self {
        assert!(energy <= 0.0 && d >= 3 && mass > 0.0);
        Self {
            d,
            l,
            mass,
            kappa: (2.0 * mass * (-energy)).sqrt(),
            two_nu: (2 * l + d - 2) as u32,
        }
    }

    pub fn for_channel(ch: &TwoBodyChannel, energy: f64) -> Self {
        Self::new(ch.d, ch.l, ch.mass, energy)
    }

    /// Regular factor: `g(r,r') = inner(r_<) outer(r_>) exp(-κ (r_> - r_<))`.
    #[inline]
    pub fn inner(&self, r: f64) -> f64 {
        let h = (self.d as f64 - 2.0) / 2.0;
        if self.kappa == 0.0 {
            2.0 * self.mass / self.two_nu as f64 * r.powi(self.l as i32)
        } else {
            2.0 * self.mass * r.powf(-h) * bessel_i_scaled(self.two_nu, self.kappa * r)
        }
    }

    /// Irregular factor, see [`RadialGreen::inner`].
    #[inline]
    pub fn outer(&self, r: f64) -> f64 {
        let h = (self.d as f64 - 2.0) / 2.0;
        if self.kappa == 0.0 {
            r.powi(-((self.l + self.d - 2) as i32))
        } else {
            r.powf(-h) * bessel_k_scaled(self.two_nu, self.kappa * r)
        }
    }

    #[inline]
    pub fn eval(&self, r: f64, rp: f64) -> f64 {
        let (a, b) = if r <= rp { (r, rp) } else { (rp, r) };
        let damp = if self.kappa == 0.0 { 1.0 } else { (-self.kappa * (b - a)).exp() };
        self.inner(a) * self.outer(b) * damp
    }
}

/// The kernels `G_α`, `G_1`, `G_2` of the small-|z| expansion
/// `|v|^{1/2} r_0(z) |v|^{1/2} = G_α + z G_1 + z ln|z| G_2 + o(|z|)` in `R^4`.
#[derive(Debug, Clone)]
pub struct ResolventExpansionKernels {
    pub mass: f64,
    pub potential: PotentialSpec,
    pub convention: Psi1Convention,
    /// `ψ(1) + ψ(2) - ln(2m)`.
    pub c1: f64,
}

/// Expansion kernels of a four-dimensional channel.
pub fn expansion_kernels(
    ch: &TwoBodyChannel,
    convention: Psi1Convention,
) -> Result<ResolventExpansionKernels> {
    ensure(ch.d == 4, || {
        format!("expansion kernels exist only in dimension 4, got {}", ch.d)
    })?;
    let c = SeriesCoefficients::new(1, ch.mass, convention);
    Ok(ResolventExpansionKernels {
        mass: ch.mass,
        potential: ch.potential,
        convention,
        c1: c.psi[1] + c.psi[2] - (2.0 * ch.mass).ln(),
    })
}

impl ResolventExpansionKernels {
    fn vv(&self, rx: f64, ry: f64) -> f64 {
        self.potential.sqrt_abs(rx) * self.potential.sqrt_abs(ry)
    }

    /// `G_α(x,y) = (m/2π²) |v(x)|^{1/2}|v(y)|^{1/2} / |x-y|²`.
    pub fn g_alpha(&self, rx: f64, ry: f64, s: f64) -> f64 {
        self.mass / (2.0 * PI * PI) * self.vv(rx, ry) / (s * s)
    }

    /// `G_1(x,y) = (m²/4π²) |v|^{1/2}|v|^{1/2} (ψ(1)+ψ(2) - ln 2m - 2 ln(|x-y|/2))`.
    pub fn g1(&self, rx: f64, ry: f64, s: f64) -> f64 {
        let m = self.mass;
        m * m / (4.0 * PI * PI) * self.vv(rx, ry) * (self.c1 - 2.0 * (0.5 * s).ln())
    }

    /// `G_2(x,y) = -(m²/4π²) |v(x)|^{1/2}|v(y)|^{1/2}`.
    pub fn g2(&self, rx: f64, ry: f64) -> f64 {
        -self.mass * self.mass / (4.0 * PI * PI) * self.vv(rx, ry)
    }

    /// s-wave radial part of `G_α` without the potential factors (measure `r'^3 dr'`):
    /// `m / r_>²`.
    pub fn swave_alpha(&self, r: f64, rp: f64) -> f64 {
        let b = r.max(rp);
        self.mass / (b * b)
    }

    /// s-wave radial part of `G_1` without potential factors (measure `r'^3 dr'`),
    /// using the sphere average `ln r_> + (r_</r_>)²/4` of `ln|x-y|`.
    pub fn swave_g1(&self, r: f64, rp: f64) -> f64 {
        let (a, b) = if r <= rp { (r, rp) } else { (rp, r) };
        let t = a / b;
        let m = self.mass;
        0.5 * m * m * (self.c1 + 2.0 * 2f64.ln() - 2.0 * b.ln() - 0.5 * t * t)
    }

    /// s-wave radial part of `G_2` without potential factors: `-m²/2`.
    pub fn swave_g2(&self) -> f64 {
        -0.5 * self.mass * self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::quadrature::{gauss_gegenbauer, sphere_surface};

    #[test]
    fn d4_zero_energy_value() {
        let v = free_resolvent_kernel(4, 1.0, 0.0, 2.0).unwrap();
        assert!((v - 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
        assert!((v - 0.01266515).abs() < 1e-8);
    }

    #[test]
    fn d3_zero_energy_value() {
        let v = free_resolvent_kernel(3, 1.0, 0.0, 1.0).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn d4_continuity_at_small_z() {
        let a = free_resolvent_kernel(4, 1.0, -1e-4, 1.0).unwrap();
        let b = free_resolvent_kernel(4, 1.0, 0.0, 1.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-3);
        let a = free_resolvent_kernel(4, 1.0, -1e-8, 1.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(free_resolvent_kernel(4, 1.0, 0.0, 0.0).is_err());
        assert!(free_resolvent_kernel(5, 1.0, 0.0, 1.0).is_err());
        assert!(free_resolvent_kernel(4, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn series_and_bessel_branches_meet() {
        let m = 1.0;
        for &x in &[4.999, 5.0, 5.001] {
            let z = -(x * x) / (2.0 * m);
            let a = free_resolvent_kernel(4, m, z, 1.0).unwrap();
            let b = m / (2.0 * PI * PI) * x * bessel_k_scaled(2, x) * (-x).exp();
            assert!(((a - b) / b).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn d4_positive_and_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let s = 0.05 * k as f64;
            let g = free_resolvent_kernel(4, 1.3, -0.7, s).unwrap();
            assert!(g > 0.0 && g < prev);
            prev = g;
        }
    }

    /// `w_d` times the sphere average of the full kernel equals the radial `g_0`.
    #[test]
    fn radial_green_matches_angular_projection() {
        let m = 1.0;
        for d in [3usize, 4] {
            let (c, w) = gauss_gegenbauer(64, d as u32 - 2);
            let norm: f64 = w.iter().sum();
            for &z in &[0.0, -0.3, -2.0] {
                let g = RadialGreen::new(d, 0, m, z);
                for &(r, rp) in &[(0.5, 1.7), (2.0, 2.6), (0.1, 3.0)] {
                    let avg: f64 = c
                        .iter()
                        .zip(&w)
                        .map(|(ci, wi)| {
                            let s = (r * r + rp * rp - 2.0 * r * rp * ci).sqrt();
                            wi * free_resolvent_kernel(d, m, z, s).unwrap()
                        })
                        .sum::<f64>()
                        / norm;
                    let proj = sphere_surface(d) * avg;
                    let direct = g.eval(r, rp);
                    assert!(((proj - direct) / direct).abs() < 1e-6, "d={d} z={z} r={r} {proj} {direct}");
                }
            }
        }
    }

    #[test]
    fn swave_expansion_kernels_match_angular_projection() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        let k = expansion_kernels(&ch, Psi1Convention::Exact).unwrap();
        let (c, w) = gauss_gegenbauer(400, 2);
        let norm: f64 = w.iter().sum();
        let w4 = sphere_surface(4);
        for &(r, rp) in &[(0.5, 1.7), (2.0, 1.1)] {
            let avg = |f: &dyn Fn(f64) -> f64| {
                c.iter()
                    .zip(&w)
                    .map(|(ci, wi)| wi * f((r * r + rp * rp - 2.0 * r * rp * ci).sqrt()))
                    .sum::<f64>()
                    / norm
            };
            let vv = v.sqrt_abs(r) * v.sqrt_abs(rp);
            let a = w4 * avg(&|s| k.g_alpha(r, rp, s)) / vv;
            assert!((a - k.swave_alpha(r, rp)).abs() < 1e-10);
            let g1 = w4 * avg(&|s| k.g1(r, rp, s)) / vv;
            assert!((g1 - k.swave_g1(r, rp)).abs() < 1e-8, "{g1} {}", k.swave_g1(r, rp));
            let g2 = w4 * k.g2(r, rp) / vv;
            assert!((g2 - k.swave_g2()).abs() < 1e-14);
        }
    }

    #[test]
    fn expansion_kernels_symmetric_and_signed() {
        let v = PotentialSpec::gaussian(2.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        let k = expansion_kernels(&ch, Psi1Convention::Exact).unwrap();
        for i in 0..50 {
            let (rx, ry, s) = (0.1 + 0.07 * i as f64, 1.3 - 0.02 * i as f64, 0.05 + 0.1 * i as f64);
            assert_eq!(k.g1(rx, ry, s), k.g1(ry, rx, s));
            assert_eq!(k.g_alpha(rx, ry, s), k.g_alpha(ry, rx, s));
            assert!(k.g2(rx, ry) <= 0.0);
        }
        let ch3 = TwoBodyChannel::s_wave(1.0, v, 3).unwrap();
        assert!(expansion_kernels(&ch3, Psi1Convention::Exact).is_err());
    }

    /// The Hankel/modified-Bessel kernel minus `G_α + z G_1 + z ln|z| G_2` is `o(z)`.
    #[test]
    fn pointwise_expansion_remainder() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.3, v, 4).unwrap();
        let k = expansion_kernels(&ch, Psi1Convention::Exact).unwrap();
        let s = 0.8;
        let mut prev = f64::INFINITY;
        for &z in &[-1e-2, -1e-3, -1e-4, -1e-5] {
            let full = free_resolvent_kernel(4, ch.mass, z, s).unwrap() * k.vv(0.3, 0.9);
            let approx = k.g_alpha(0.3, 0.9, s) + z * k.g1(0.3, 0.9, s) + z * z.abs().ln() * k.g2(0.3, 0.9);
            let rel = (full - approx).abs() / z.abs();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 1e-4);
    }
}
