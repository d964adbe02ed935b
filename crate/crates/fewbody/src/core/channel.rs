use serde::{Deserialize, Serialize};

use crate::core::potential::PotentialSpec;
use crate::error::{ensure, Result};

/// Permutation sector of a pair of identical particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    #[default]
    Generic,
    /// Odd under exchange: only odd partial waves.
    Antisymmetric,
}

/// One pair subsystem `h = -Δ/(2m) + v` restricted to a partial wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyChannel {
    /// Reduced mass `m > 0`.
    pub mass: f64,
    pub potential: PotentialSpec,
    pub d: usize,
    /// Partial wave `ℓ`.
    pub l: usize,
    pub sector: Sector,
}

impl TwoBodyChannel {
    pub fn new(mass: f64, potential: PotentialSpec, d: usize, l: usize, sector: Sector) -> Result<Self> {
        ensure(mass.is_finite() && mass > 0.0, || {
            format!("reduced mass must be > 0, got {mass}")
        })?;
        ensure(d >= 3, || format!("dimension must be >= 3, got {d}"))?;
        ensure(sector == Sector::Generic || l % 2 == 1, || {
            format!("antisymmetric sector requires odd l, got l = {l}")
        })?;
        Ok(Self {
            mass,
            potential,
            d,
            l,
            sector,
        })
    }

    /// Generic s-wave channel.
    pub fn s_wave(mass: f64, potential: PotentialSpec, d: usize) -> Result<Self> {
        Self::new(mass, potential, d, 0, Sector::Generic)
    }

    /// Lowest antisymmetric partial wave (`ℓ = 1`).
    pub fn antisymmetric(mass: f64, potential: PotentialSpec, d: usize) -> Result<Self> {
        Self::new(mass, potential, d, 1, Sector::Antisymmetric)
    }

    /// Same channel at a different well depth.
    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Ok(Self {
            potential: self.potential.with_strength(strength)?,
            ..*self
        })
    }

    /// Bessel order `ν = ℓ + (d-2)/2` of the radial free resolvent, as `2ν`.
    pub fn two_nu(&self) -> u32 {
        (2 * self.l + self.d - 2) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        assert!(TwoBodyChannel::new(0.0, v, 4, 0, Sector::Generic).is_err());
        assert!(TwoBodyChannel::new(1.0, v, 2, 0, Sector::Generic).is_err());
        assert!(TwoBodyChannel::new(1.0, v, 4, 2, Sector::Antisymmetric).is_err());
        let c = TwoBodyChannel::antisymmetric(1.0, v, 4).unwrap();
        assert_eq!(c.l, 1);
        assert_eq!(c.two_nu(), 4);
    }
}
