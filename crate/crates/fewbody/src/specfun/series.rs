use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Truncation order `J` of the Hankel series.
pub const SERIES_ORDER: usize = 30;

/// Largest `|ζ|` at which the truncated series is validated.
pub const SERIES_RADIUS: f64 = 5.0;

/// Value used for `ψ(1)`.
///
/// `Exact` is the digamma limit `-γ`. `MinusOne` reproduces a printed value
/// `ψ(1) = -1` so that its effect on τ can be measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Psi1Convention {
    #[default]
    Exact,
    MinusOne,
}

/// `ψ(k) = H_{k-1} - γ` for integer `k ≥ 1`.
pub fn digamma(k: usize) -> Result<f64> {
    digamma_with(k, Psi1Convention::Exact)
}

pub fn digamma_with(k: usize, conv: Psi1Convention) -> Result<f64> {
    ensure(k >= 1, || "digamma is defined here for k >= 1 only (k = 0 is a pole)".into())?;
    if k == 1 {
        return Ok(match conv {
            Psi1Convention::Exact => -EULER_GAMMA,
            Psi1Convention::MinusOne => -1.0,
        });
    }
    Ok((1..k).map(|j| 1.0 / j as f64).sum::<f64>() - EULER_GAMMA)
}

/// Coefficient tables of the small-argument expansions.
///
/// `a_k = (-1)^k / (4^k k! (k+1)!)`, `b_k = (ψ(k+1)+ψ(k+2)) a_k`,
/// `α_j = (-1)^j m² / (4^{j+1} π² j! (j+1)!)`, `β_j = ψ(j+1)+ψ(j+2) - ln(2m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub order: usize,
    pub mass: f64,
    pub convention: Psi1Convention,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `psi[k] = ψ(k)` for `1 ≤ k ≤ order + 2`; `psi[0]` unused.
    pub psi: Vec<f64>,
}

impl SeriesCoefficients {
    pub fn new(order: usize, mass: f64, convention: Psi1Convention) -> Self {
        let psi: Vec<f64> = (0..=order + 2)
            .map(|k| if k == 0 { f64::NAN } else { digamma_with(k, convention).unwrap() })
            .collect();
        let mut a = Vec::with_capacity(order + 1);
        let mut alpha = Vec::with_capacity(order + 1);
        // 1 / (4^k k! (k+1)!) built by recurrence
        let mut mag = 1.0;
        for k in 0..=order {
            if k > 0 {
                mag /= 4.0 * k as f64 * (k + 1) as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            a.push(sign * mag);
            alpha.push(sign * mass * mass * mag / (4.0 * PI * PI));
        }
        let b = (0..=order).map(|k| (psi[k + 1] + psi[k + 2]) * a[k]).collect();
        let beta = (0..=order)
            .map(|j| psi[j + 1] + psi[j + 2] - (2.0 * mass).ln())
            .collect();
        Self {
            order,
            mass,
            convention,
            a,
            b,
            alpha,
            beta,
            psi,
        }
    }

    /// Partial sums `Σ_{j=1}^{n} |α_j β_j|` for `n = 1..=order`.
    pub fn alpha_beta_partial_sums(&self) -> Vec<f64> {
        let mut s = 0.0;
        (1..=self.order)
            .map(|j| {
                s += (self.alpha[j] * self.beta[j]).abs();
                s
            })
            .collect()
    }
}

/// `H_1^{(1)}(ζ)` from the small-argument series with the exact `ψ(1)`.
pub fn hankel1_1(zeta: Complex64) -> Result<Complex64> {
    hankel1_1_with(zeta, &SeriesCoefficients::new(SERIES_ORDER, 1.0, Psi1Convention::Exact))
}

/// `H_1^{(1)}(ζ) = -2i/(πζ) + (ζ/2 + iζ/π ln(ζ/2)) Σ a_k ζ^{2k} - iζ/(2π) Σ b_k ζ^{2k}`.
pub fn hankel1_1_with(zeta: Complex64, c: &SeriesCoefficients) -> Result<Complex64> {
    ensure(zeta.norm() > 0.0, || "hankel1_1: zeta = 0 is a pole".into())?;
    ensure(zeta.norm() <= SERIES_RADIUS, || {
        format!(
            "hankel1_1: |zeta| = {} exceeds the validated series radius {SERIES_RADIUS}",
            zeta.norm()
        )
    })?;
    let i = Complex64::i();
    let z2 = zeta * zeta;
    let (mut sa, mut sb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut pw = Complex64::new(1.0, 0.0);
    for k in 0..=c.order {
        sa += c.a[k] * pw;
        sb += c.b[k] * pw;
        pw *= z2;
    }
    let log_half = (zeta / 2.0).ln();
    Ok(-2.0 * i / (PI * zeta) + (zeta / 2.0 + zeta * i / PI * log_half) * sa
        - zeta * i / (2.0 * PI) * sb)
}

/// `x K_1(x)` for real `x > 0` from the same series on the imaginary axis.
///
/// With `ζ = i x` the Hankel series gives `H_1^{(1)}(ix) = -(2/π) K_1(x)` and
/// `x K_1(x) = 1 + (x²/2) ln(x/2) Σ ã_k - (x²/4) Σ (ψ(k+1)+ψ(k+2)) ã_k`,
/// `ã_k = |a_k| x^{2k}`. All arithmetic is real.
pub fn xk1_series(x: f64, c: &SeriesCoefficients) -> f64 {
    let x2 = x * x;
    let (mut sa, mut sb) = (0.0, 0.0);
    let mut pw = 1.0;
    for k in 0..=c.order {
        // a_k (ζ²)^k with ζ² = -x² equals |a_k| x^{2k}
        let ak = c.a[k].abs();
        sa += ak * pw;
        sb += (c.psi[k + 1] + c.psi[k + 2]) * ak * pw;
        pw *= x2;
    }
    1.0 + 0.5 * x2 * (0.5 * x).ln() * sa - 0.25 * x2 * sb
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_values() {
        assert!((digamma(2).unwrap() - 0.4227843).abs() < 1e-7);
        assert!((digamma(3).unwrap() - 0.9227843).abs() < 1e-7);
        assert!((digamma(1).unwrap() + 0.5772157).abs() < 1e-7);
        assert!(digamma(0).is_err());
        assert_eq!(digamma_with(1, Psi1Convention::MinusOne).unwrap(), -1.0);
        assert_eq!(
            digamma_with(4, Psi1Convention::MinusOne).unwrap(),
            digamma(4).unwrap()
        );
    }

    #[test]
    fn coefficient_tables() {
        let c = SeriesCoefficients::new(SERIES_ORDER, 1.0, Psi1Convention::Exact);
        let mut fact = [1.0f64; 40];
        for k in 1..40 {
            fact[k] = fact[k - 1] * k as f64;
        }
        for k in 0..=SERIES_ORDER {
            let exact = (-1f64).powi(k as i32) / (4f64.powi(k as i32) * fact[k] * fact[k + 1]);
            assert!((c.a[k] - exact).abs() <= 1e-15 * exact.abs());
            assert_eq!(c.b[k], (c.psi[k + 1] + c.psi[k + 2]) * c.a[k]);
        }
        let s = c.alpha_beta_partial_sums();
        let n = s.len();
        assert!((s[n - 1] - s[n - 2]).abs() < 1e-14);
    }

    #[test]
    fn hankel_leading_term() {
        for &x in &[1e-3, 1e-5, 1e-7] {
            let h = hankel1_1(Complex64::new(x, 0.0)).unwrap() * x;
            assert!((h.im + 2.0 / PI).abs() < 1e-5, "{h}");
            assert!(h.re.abs() < 1e-5);
        }
        assert!(hankel1_1(Complex64::new(0.0, 0.0)).is_err());
        assert!(hankel1_1(Complex64::new(6.0, 0.0)).is_err());
    }

    #[test]
    fn real_part_is_j1() {
        use crate::specfun::bessel_j;
        assert_eq!(bessel_j(1, 0.0), 0.0);
        for &x in &[0.01, 0.3, 1.1, 2.7, 4.9] {
            let h = hankel1_1(Complex64::new(x, 0.0)).unwrap();
            assert!((h.re - bessel_j(1, x)).abs() < 1e-13, "x={x}");
        }
    }

    /// `J_1(1)` and `Y_1(1)` from their integral representations:
    /// `J_1(x) = (1/π)∫_0^π cos(θ - x sin θ) dθ`,
    /// `Y_1(x) = (1/π)∫_0^π sin(x sin θ - θ) dθ - (1/π)∫_0^∞ (e^t - e^{-t}) e^{-x sinh t} dt`.
    #[test]
    fn unit_argument_against_integral_oracle() {
        let x = 1.0;
        let (gx, gw) = crate::core::quadrature::gauss_legendre(20);
        let composite = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize| {
            let h = (b - a) / panels as f64;
            let mut s = 0.0;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                for (xi, wi) in gx.iter().zip(&gw) {
                    s += 0.5 * h * wi * f(lo + 0.5 * h * (xi + 1.0));
                }
            }
            s
        };
        let j1 = composite(&|th: f64| (th - x * th.sin()).cos(), 0.0, PI, 16) / PI;
        let y1a = composite(&|th: f64| (x * th.sin() - th).sin(), 0.0, PI, 16) / PI;
        let y1b = composite(&|t: f64| (t.exp() - (-t).exp()) * (-x * t.sinh()).exp(), 0.0, 8.0, 64) / PI;
        let oracle = Complex64::new(j1, y1a - y1b);
        let h1 = hankel1_1(Complex64::new(x, 0.0)).unwrap();
        assert!((h1 - oracle).norm() / oracle.norm() < 1e-10, "{h1} {oracle}");
    }

    #[test]
    fn truncation_at_thirty_is_converged() {
        let c30 = SeriesCoefficients::new(30, 1.0, Psi1Convention::Exact);
        let c40 = SeriesCoefficients::new(40, 1.0, Psi1Convention::Exact);
        for &(re, im) in &[(5.0, 0.0), (0.0, 5.0), (3.0, 4.0), (1.0, 0.5)] {
            let z = Complex64::new(re, im);
            let a = hankel1_1_with(z, &c30).unwrap();
            let b = hankel1_1_with(z, &c40).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }
}
