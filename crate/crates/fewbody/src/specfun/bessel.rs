//! Modified Bessel functions of integer and half-integer order, exponentially
//! scaled, plus `J_n` and the plane-wave sphere average.
//!
//! Orders are passed as `two_nu = 2ν`.

use std::f64::consts::PI;

use super::series::EULER_GAMMA;
use crate::core::quadrature::gamma_half;

const SERIES_MAX_I: f64 = 30.0;
const SERIES_MAX_K: f64 = 2.0;
const TRAPEZOID_MAX_K: f64 = 25.0;
const TRAPEZOID_STEP: f64 = 0.1;

/// `e^{-x} I_ν(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(two_nu: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_i_scaled: x must be >= 0");
    let nu = two_nu as f64 / 2.0;
    if x == 0.0 {
        return if two_nu == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX_I {
        // (x/2)^ν Σ (x²/4)^k / (k! Γ(ν+k+1)), positive terms
        let q = 0.25 * x * x;
        let mut term = (0.5 * x).powf(nu) / gamma_half(two_nu + 2);
        let mut sum = term;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + nu));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Hankel asymptotic series, alternating; x > 30 keeps the minimal term below e^{-60}
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// `e^{x} K_ν(x)` for `x > 0`.
pub fn bessel_k_scaled(two_nu: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k_scaled: x must be > 0");
    if two_nu % 2 == 1 {
        // K_{1/2} = sqrt(π/2x) e^{-x}; upward recurrence K_{ν+1} = K_{ν-1} + (2ν/x) K_ν
        let k_half = (PI / (2.0 * x)).sqrt();
        let (mut km, mut k) = (k_half, k_half); // K_{-1/2} = K_{1/2}
        let mut nu = 0.5;
        while ((2.0 * nu) as u32) < two_nu {
            let kp = km + 2.0 * nu / x * k;
            km = k;
            k = kp;
            nu += 1.0;
        }
        return k;
    }
    let n = two_nu / 2;
    let (k0, k1) = k01_scaled(x);
    if n == 0 {
        return k0;
    }
    let (mut km, mut k) = (k0, k1);
    for j in 1..n {
        let kp = km + 2.0 * j as f64 / x * k;
        km = k;
        k = kp;
    }
    k
}

/// `(e^x K_0(x), e^x K_1(x))`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX_K {
        let q = 0.25 * x * x;
        let l = (0.5 * x).ln();
        // K_0 = -(ln(x/2)+γ) I_0 + Σ q^k/(k!)² H_k
        // K_1 = 1/x + ln(x/2) I_1 - (x/4) Σ (ψ(k+1)+ψ(k+2)) q^k/(k!(k+1)!)
        let (mut i0, mut i1) = (0.0, 0.0);
        let (mut s0, mut s1) = (0.0, 0.0);
        let mut t0 = 1.0; // q^k/(k!)²
        let mut t1 = 1.0; // q^k/(k!(k+1)!)
        let mut h = 0.0; // H_k
        let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
        for k in 0..40 {
            let kf = k as f64;
            if k > 0 {
                t0 *= q / (kf * kf);
                t1 *= q / (kf * (kf + 1.0));
                h += 1.0 / kf;
                psi_k1 += 1.0 / kf;
            }
            i0 += t0;
            i1 += t1;
            s0 += t0 * h;
            s1 += t1 * (2.0 * psi_k1 + 1.0 / (kf + 1.0));
            if t0 < 1e-18 && k > 2 {
                break;
            }
        }
        let i1 = 0.5 * x * i1;
        let k0 = -(l + EULER_GAMMA) * i0 + s0;
        let k1 = 1.0 / x + l * i1 - 0.25 * x * s1;
        let e = x.exp();
        (k0 * e, k1 * e)
    } else if x <= TRAPEZOID_MAX_K {
        // e^x K_ν(x) = ∫_0^∞ exp(-x(cosh t - 1)) cosh(ν t) dt, double-exponential decay
        let (mut s0, mut s1) = (0.5, 0.5);
        let mut j = 1;
        loop {
            let t = j as f64 * TRAPEZOID_STEP;
            let e = (-x * (t.cosh() - 1.0)).exp();
            s0 += e;
            s1 += e * t.cosh();
            if e * t.cosh() < 1e-18 {
                break;
            }
            j += 1;
        }
        (s0 * TRAPEZOID_STEP, s1 * TRAPEZOID_STEP)
    } else {
        (k_asymptotic(0.0, x), k_asymptotic(1.0, x))
    }
}

fn k_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * (PI / (2.0 * x)).sqrt()
}

/// Bessel function `J_n(x)` of integer order `n ≥ 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    if ax <= 8.0 {
        let q = -0.25 * ax * ax;
        let mut term = (0.5 * ax).powi(n as i32) / gamma_half(2 * n + 2);
        let mut sum = term;
        for k in 1..80 {
            let kf = k as f64;
            term *= q / (kf * (kf + n as f64));
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sign * sum
    } else {
        // J_n(x) = (1/2π) ∫_0^{2π} cos(nθ - x sin θ) dθ; trapezoid is spectrally exact
        let m = (ax as usize + n as usize + 40).next_multiple_of(2);
        let h = 2.0 * PI / m as f64;
        let s: f64 = (0..m)
            .map(|k| {
                let th = k as f64 * h;
                (n as f64 * th - ax * th.sin()).cos()
            })
            .sum();
        sign * s / m as f64
    }
}

/// Average of `exp(i k·x)` over the unit sphere in `R^d` at `t = |k||x|`:
/// `Γ(d/2) (2/t)^{(d-2)/2} J_{(d-2)/2}(t)`.
pub fn sphere_average_plane_wave(d: usize, t: f64) -> f64 {
    let t = t.abs();
    match d {
        3 => {
            if t < 1e-4 {
                1.0 - t * t / 6.0
            } else {
                t.sin() / t
            }
        }
        4 => {
            if t < 1e-4 {
                1.0 - t * t / 8.0
            } else {
                2.0 * bessel_j(1, t) / t
            }
        }
        5 => {
            if t < 1e-2 {
                let t2 = t * t;
                1.0 - t2 / 10.0 + t2 * t2 / 280.0
            } else {
                3.0 * (t.sin() - t * t.cos()) / (t * t * t)
            }
        }
        _ => panic!("sphere_average_plane_wave: dimension {d} not supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `I_ν(x) = (1/π) ∫_0^π e^{x cos θ} cos(νθ) dθ` for integer ν, by midpoint rule
    /// (spectrally exact for periodic analytic integrands).
    fn i_integral(n: u32, x: f64) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        (0..m)
            .map(|k| {
                let th = (k as f64 + 0.5) * h;
                (x * (th.cos() - 1.0)).exp() * (n as f64 * th).cos()
            })
            .sum::<f64>()
            * h
            / PI
    }

    /// `e^x K_ν(x)` by a fine trapezoid on the cosh representation.
    fn k_integral(nu: f64, x: f64) -> f64 {
        let h = 1e-3;
        let mut s = 0.5;
        for j in 1..40000 {
            let t = j as f64 * h;
            let e = (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
            s += e;
            if e < 1e-300 {
                break;
            }
        }
        s * h
    }

    #[test]
    fn modified_i_against_integral() {
        for n in 0..3u32 {
            for &x in &[1e-3, 0.5, 2.0, 7.5, 29.0, 31.0, 80.0] {
                let a = bessel_i_scaled(2 * n, x);
                let b = i_integral(n, x);
                assert!((a - b).abs() < 1e-12 * b.abs() + 1e-15, "n={n} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn modified_k_against_integral() {
        for two_nu in 0..6u32 {
            for &x in &[1e-3, 0.3, 1.9, 2.1, 10.0, 24.0, 26.0, 100.0] {
                let a = bessel_k_scaled(two_nu, x);
                let b = k_integral(two_nu as f64 / 2.0, x);
                assert!((a - b).abs() < 1e-11 * b, "2nu={two_nu} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn half_integer_i_closed_form() {
        for &x in &[0.01, 1.0, 5.0, 40.0] {
            let i12 = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 - (-2.0 * x).exp());
            assert!((bessel_i_scaled(1, x) - i12).abs() < 1e-14 * i12);
        }
    }

    #[test]
    fn wronskian() {
        // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x
        for two_nu in [0u32, 1, 2, 3, 4] {
            for &x in &[0.01, 0.7, 3.0, 12.0, 45.0] {
                let w = bessel_i_scaled(two_nu, x) * bessel_k_scaled(two_nu + 2, x)
                    + bessel_i_scaled(two_nu + 2, x) * bessel_k_scaled(two_nu, x);
                assert!((w * x - 1.0).abs() < 1e-12, "2nu={two_nu} x={x} {}", w * x);
            }
        }
    }

    #[test]
    fn j_against_integral() {
        for n in 0..3u32 {
            for &x in &[0.0, 0.5, 3.0, 7.9, 8.1, 20.0, 61.0] {
                let m = 2000;
                let h = PI / m as f64;
                let b: f64 = (0..m)
                    .map(|k| {
                        let th = (k as f64 + 0.5) * h;
                        (n as f64 * th - x * th.sin()).cos()
                    })
                    .sum::<f64>()
                    * h
                    / PI;
                assert!((bessel_j(n, x) - b).abs() < 1e-13, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn sphere_average_limits() {
        for d in 3..=5 {
            assert!((sphere_average_plane_wave(d, 0.0) - 1.0).abs() < 1e-15);
            for &t in &[1e-5, 0.009, 0.011, 1.0, 10.0] {
                let v = sphere_average_plane_wave(d, t);
                assert!(v.abs() <= 1.0 + 1e-15);
            }
        }
        // d = 4 from Gegenbauer quadrature of cos(t c)
        let (c, w) = crate::core::quadrature::gauss_gegenbauer(40, 2);
        for &t in &[0.3, 2.0, 9.0] {
            let avg: f64 = c.iter().zip(&w).map(|(ci, wi)| wi * (t * ci).cos()).sum::<f64>() / (PI / 2.0);
            assert!((avg - sphere_average_plane_wave(4, t)).abs() < 1e-13);
        }
    }
}
