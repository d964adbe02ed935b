use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Analytic radial well shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialFamily {
    /// `-λ exp(-r²/σ²)`
    GaussianWell,
    /// `-λ exp(-r/σ)`
    ExponentialWell,
    /// `-λ` for `r < σ`, zero outside.
    FiniteSphericalWell,
}

/// Default decay exponent used when none is given; strictly above 4.
pub const DEFAULT_DECAY_EXPONENT: f64 = 6.0;

/// A radial attractive pair potential with its decay certificate
/// `|v(r)| ≤ C (1+r)^{-b}` for all `r ≥ 0` (hence `|v(r)| ≤ C r^{-b}` for `r ≥ γ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    /// Depth `λ ≥ 0` (energy).
    pub strength: f64,
    /// Range `σ > 0` (length).
    pub range: f64,
    /// Decay exponent `b`.
    pub decay_exponent: f64,
    /// Radius `γ` beyond which the power bound is asserted.
    pub decay_radius: f64,
    /// Constant `C` (energy·length^b).
    pub decay_constant: f64,
}

impl PotentialSpec {
    /// Builds a well with decay exponent [`DEFAULT_DECAY_EXPONENT`], `γ = σ` and
    /// the smallest constant `C` valid for that exponent.
    pub fn new(family: PotentialFamily, strength: f64, range: f64) -> Result<Self> {
        Self::with_decay(family, strength, range, DEFAULT_DECAY_EXPONENT)
    }

    pub fn gaussian(strength: f64, range: f64) -> Result<Self> {
        Self::new(PotentialFamily::GaussianWell, strength, range)
    }

    pub fn exponential(strength: f64, range: f64) -> Result<Self> {
        Self::new(PotentialFamily::ExponentialWell, strength, range)
    }

    pub fn square(strength: f64, range: f64) -> Result<Self> {
        Self::new(PotentialFamily::FiniteSphericalWell, strength, range)
    }

    pub fn with_decay(family: PotentialFamily, strength: f64, range: f64, b: f64) -> Result<Self> {
        ensure(strength.is_finite() && strength >= 0.0, || {
            format!("strength must be finite and >= 0 (attractive depth), got {strength}")
        })?;
        ensure(range.is_finite() && range > 0.0, || {
            format!("range must be finite and > 0, got {range}")
        })?;
        ensure(b.is_finite() && b > 0.0, || {
            format!("decay exponent must be positive, got {b}")
        })?;
        let c = strength * sup_decay_profile(family, range, b) * (1.0 + 1e-12);
        Ok(Self {
            family,
            strength,
            range,
            decay_exponent: b,
            decay_radius: range,
            decay_constant: c,
        })
    }

    /// Same shape and range at a different depth; decay constant rescaled.
    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Self::with_decay(self.family, strength, self.range, self.decay_exponent)
    }

    /// Same shape with lengths multiplied by `s` and energies divided by `s²`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        Self::with_decay(
            self.family,
            self.strength / (s * s),
            self.range * s,
            self.decay_exponent,
        )
    }

    /// `v(r)` at a single radius.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        ensure(r >= 0.0 && r.is_finite(), || {
            format!("radius must be finite and >= 0, got {r}")
        })?;
        Ok(self.value(r))
    }

    /// Unchecked evaluation for internal hot loops (`r ≥ 0` assumed).
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        -self.strength * shape(self.family, r / self.range)
    }

    /// `|v(r)|^{1/2}`.
    #[inline]
    pub fn sqrt_abs(&self, r: f64) -> f64 {
        (self.strength * shape(self.family, r / self.range)).sqrt()
    }

    /// Radius at which `|v|` has fallen below `tol · λ`.
    pub fn support_radius(&self, tol: f64) -> f64 {
        let t = tol.clamp(1e-300, 1.0);
        match self.family {
            PotentialFamily::GaussianWell => self.range * (-t.ln()).sqrt(),
            PotentialFamily::ExponentialWell => self.range * (-t.ln()),
            PotentialFamily::FiniteSphericalWell => self.range,
        }
    }

    /// Radii where the potential is not smooth (quadrature breakpoints).
    pub fn kinks(&self) -> Vec<f64> {
        match self.family {
            PotentialFamily::FiniteSphericalWell => vec![self.range],
            _ => Vec::new(),
        }
    }

    /// The bound `|v(r)| ≤ C(1+r)^{-b}` at one radius.
    pub fn decay_bound(&self, r: f64) -> f64 {
        self.decay_constant * (1.0 + r).powf(-self.decay_exponent)
    }

    /// Checks the decay hypotheses required in dimension `d` on a sample grid:
    /// `b > 4` for `d = 4`, `b > 2` for `d ≥ 5`, and the bound at every sample.
    pub fn verify_decay(&self, d: usize) -> Result<()> {
        let b_min = match d {
            3 => 2.0,
            4 => 4.0,
            _ => 2.0,
        };
        ensure(self.decay_exponent > b_min, || {
            format!(
                "decay exponent b = {} must exceed {b_min} in dimension {d}",
                self.decay_exponent
            )
        })?;
        for k in 0..=2000 {
            let r = 100.0 * self.range * k as f64 / 2000.0;
            let v = self.value(r);
            if v > 0.0 || v.abs() > self.decay_bound(r) {
                return Err(Error::validation(format!(
                    "decay bound violated at r = {r}: |v| = {}, bound = {}",
                    v.abs(),
                    self.decay_bound(r)
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn shape(family: PotentialFamily, s: f64) -> f64 {
    match family {
        PotentialFamily::GaussianWell => (-s * s).exp(),
        PotentialFamily::ExponentialWell => (-s).exp(),
        PotentialFamily::FiniteSphericalWell => {
            if s < 1.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `sup_r shape(r/σ) (1+r)^b`, attained at the stationary point of the log.
fn sup_decay_profile(family: PotentialFamily, sigma: f64, b: f64) -> f64 {
    let r_star = match family {
        PotentialFamily::GaussianWell => 0.5 * (-1.0 + (1.0 + 2.0 * b * sigma * sigma).sqrt()),
        PotentialFamily::ExponentialWell => (b * sigma - 1.0).max(0.0),
        PotentialFamily::FiniteSphericalWell => sigma,
    };
    let s = match family {
        // left limit of the step at r = σ
        PotentialFamily::FiniteSphericalWell => 1.0,
        f => shape(f, r_star / sigma),
    };
    s * (1.0 + r_star).powf(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_depth_at_origin() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        assert_eq!(v.evaluate(0.0).unwrap(), -1.0);
    }

    #[test]
    fn gaussian_value_at_unit_radius() {
        let v = PotentialSpec::gaussian(2.0, 1.0).unwrap();
        let expected = -2.0 * (-1.0f64).exp();
        assert!((v.evaluate(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected + 0.7357589).abs() < 1e-7);
    }

    #[test]
    fn negative_radius_rejected() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        assert!(matches!(v.evaluate(-0.1), Err(Error::Validation(_))));
    }

    #[test]
    fn repulsive_strength_rejected() {
        assert!(PotentialSpec::gaussian(-1.0, 1.0).is_err());
    }

    #[test]
    fn decay_bound_holds_for_all_families() {
        for fam in [
            PotentialFamily::GaussianWell,
            PotentialFamily::ExponentialWell,
            PotentialFamily::FiniteSphericalWell,
        ] {
            let v = PotentialSpec::new(fam, 3.0, 1.3).unwrap();
            v.verify_decay(4).unwrap();
            v.verify_decay(5).unwrap();
            let r = 10.0 * v.range;
            assert!(v.value(r).abs() <= v.decay_bound(r));
        }
    }

    #[test]
    fn weak_decay_exponent_rejected_in_d4() {
        let v = PotentialSpec::with_decay(PotentialFamily::GaussianWell, 1.0, 1.0, 3.0).unwrap();
        assert!(v.verify_decay(4).is_err());
        v.verify_decay(5).unwrap();
    }

    #[test]
    fn square_well_step() {
        let v = PotentialSpec::square(2.0, 1.0).unwrap();
        assert_eq!(v.value(0.999), -2.0);
        assert_eq!(v.value(1.0), 0.0);
        assert_eq!(v.kinks(), vec![1.0]);
    }
}
