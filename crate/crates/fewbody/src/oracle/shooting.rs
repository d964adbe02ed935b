//! Outward RK4 integration of the radial equation
//! `f'' + (d-1)/r f' - ℓ(ℓ+d-2)/r² f = 2m (v - E) f`,
//! matched at `R` to the decaying free solution.

use serde::Serialize;

use crate::core::TwoBodyChannel;
use crate::error::{ensure, Error, Result};
use crate::specfun::bessel_k_scaled;

const R0: f64 = 1e-4;
/// Steps per unit length of the potential range.
const STEPS_PER_RANGE: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroundState {
    Bound { energy: f64 },
    /// No node up to `R` and no extra node from the decaying continuation at `E = 0`.
    Absent,
}

impl GroundState {
    pub fn energy(&self) -> Option<f64> {
        match self {
            GroundState::Bound { energy } => Some(*energy),
            GroundState::Absent => None,
        }
    }
}

struct Shooter<'a> {
    ch: &'a TwoBodyChannel,
    r_max: f64,
    steps: usize,
}

impl<'a> Shooter<'a> {
    fn new(ch: &'a TwoBodyChannel, r_max: f64) -> Result<Self> {
        let tail = ch.potential.value(r_max).abs();
        ensure(tail <= 1e-12 * ch.potential.strength.max(1e-300), || {
            format!("r_max = {r_max} too small for decay matching: |v(r_max)| = {tail}")
        })?;
        let steps = ((r_max / ch.potential.range) * STEPS_PER_RANGE).ceil() as usize;
        Ok(Self { ch, r_max, steps: steps.max(2000) })
    }

    /// `(nodes in (0,R), f(R), f'(R))`, rescaled to avoid overflow.
    fn integrate(&self, e: f64) -> (usize, f64, f64) {
        let ch = self.ch;
        let d = ch.d as f64;
        let l = ch.l as f64;
        let cl = l * (l + d - 2.0);
        let two_m = 2.0 * ch.mass;
        let rhs = |r: f64, f: f64, g: f64| -> f64 {
            -(d - 1.0) / r * g + cl / (r * r) * f + two_m * (ch.potential.value(r) - e) * f
        };
        let c = two_m * (ch.potential.value(0.0) - e) / (2.0 * (2.0 * l + d));
        let mut r = R0;
        let mut f = R0.powi(ch.l as i32) * (1.0 + c * R0 * R0);
        let mut g = if ch.l == 0 {
            2.0 * c * R0
        } else {
            l * R0.powi(ch.l as i32 - 1) + (l + 2.0) * c * R0.powi(ch.l as i32 + 1)
        };
        let h = (self.r_max - R0) / self.steps as f64;
        let mut nodes = 0;
        for _ in 0..self.steps {
            let k1f = g;
            let k1g = rhs(r, f, g);
            let k2f = g + 0.5 * h * k1g;
            let k2g = rhs(r + 0.5 * h, f + 0.5 * h * k1f, g + 0.5 * h * k1g);
            let k3f = g + 0.5 * h * k2g;
            let k3g = rhs(r + 0.5 * h, f + 0.5 * h * k2f, g + 0.5 * h * k2g);
            let k4f = g + h * k3g;
            let k4g = rhs(r + h, f + h * k3f, g + h * k3g);
            let fnew = f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            if fnew * f < 0.0 {
                nodes += 1;
            }
            f = fnew;
            r += h;
            let s = f.abs().max(g.abs());
            if s > 1e100 {
                f /= s;
                g /= s;
            }
        }
        (nodes, f, g)
    }

    /// Log-derivative at `R` of the decaying free solution at energy `E ≤ 0`.
    fn decaying_log_derivative(&self, e: f64) -> f64 {
        let ch = self.ch;
        let d = ch.d as f64;
        let r = self.r_max;
        if e == 0.0 {
            return -((ch.l + ch.d - 2) as f64) / r;
        }
        let kappa = (2.0 * ch.mass * (-e)).sqrt();
        let two_nu = (2 * ch.l + ch.d - 2) as i64;
        let nu = two_nu as f64 / 2.0;
        let lower = (two_nu - 2).unsigned_abs() as u32;
        let ratio = bessel_k_scaled(lower, kappa * r) / bessel_k_scaled(two_nu as u32, kappa * r);
        -(d - 2.0) / (2.0 * r) - nu / r - kappa * ratio
    }

    /// Number of eigenvalues strictly below `e`.
    fn count_below(&self, e: f64) -> usize {
        let (nodes, f, g) = self.integrate(e);
        let l = self.decaying_log_derivative(e);
        nodes + usize::from(f * (g - l * f) < 0.0)
    }
}

/// Lowest eigenvalue by bisection on the node count, or an absence certificate.
pub fn shooting_ground_state(ch: &TwoBodyChannel, coupling: f64, r_max: f64) -> Result<GroundState> {
    ensure(coupling >= 0.0, || format!("coupling must be >= 0, got {coupling}"))?;
    let ch = ch.with_strength(coupling)?;
    if coupling == 0.0 {
        return Ok(GroundState::Absent);
    }
    let s = Shooter::new(&ch, r_max)?;
    if s.count_below(0.0) == 0 {
        return Ok(GroundState::Absent);
    }
    let (mut lo, mut hi) = (-coupling, 0.0);
    if s.count_below(lo) > 0 {
        return Err(Error::numerical("node count positive below the well bottom"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s.count_below(mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.abs() {
            break;
        }
    }
    Ok(GroundState::Bound { energy: 0.5 * (lo + hi) })
}

/// Coupling where a zero-energy bound state first appears, by bisection on
/// the zero-energy node count (including the decaying continuation).
pub fn shooting_critical_coupling(ch: &TwoBodyChannel, r_max: f64) -> Result<f64> {
    let unit = ch.with_strength(1.0)?;
    let binds = |lam: f64| -> Result<bool> {
        let c = unit.with_strength(lam)?;
        Ok(Shooter::new(&c, r_max)?.count_below(0.0) > 0)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !binds(hi)? {
        lo = hi;
        hi *= 2.0;
        ensure(hi < 1e8, || "no binding found below coupling 1e8".into())?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PotentialSpec;

    #[test]
    fn square_well_threshold_in_three_dimensions() {
        // d = 3 s-wave square well binds when sqrt(2mλ) a = π/2.
        let v = PotentialSpec::square(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 3).unwrap();
        let lam = shooting_critical_coupling(&ch, 1.0 + 1e-9).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 8.0;
        assert!((lam - exact).abs() < 1e-3 * exact, "{lam}");
    }

    #[test]
    fn rejects_short_matching_radius() {
        let v = PotentialSpec::gaussian(5.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        assert!(shooting_ground_state(&ch, 5.0, 2.0).unwrap_err().is_validation());
    }
}
