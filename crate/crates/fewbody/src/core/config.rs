//! TOML run configuration. Unknown keys are rejected at every level.
//!
//! ```toml
//! experiment = "efimov-d4"
//! seed = 1
//! dimension = 4
//! coupling_factor = 1.0        # depth = factor · λ*; omit to use `strength`
//!
//! [potential]
//! family = "gaussian-well"     # | "exponential-well" | "finite-spherical-well"
//! strength = 1.0
//! range = 1.0
//!
//! [channel]                    # two-body runs
//! mass = 1.0
//! l = 0
//! sector = "generic"           # | "antisymmetric"
//!
//! [system]                     # three-body runs
//! masses = [2.0, 2.0, 2.0]
//! symmetry = "identical-bosons" # | "distinct"
//!
//! [schedule]                   # z = -hi ... -lo, geometric
//! hi = 1e-2
//! lo = 1e-8
//! points = 7
//!
//! [grid]                       # three-body grids, see FaddeevGrid
//! [basis]                      # variational oracle, see VariationalBasis
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::core::{PotentialFamily, PotentialSpec, Sector, TwoBodyChannel};
use crate::error::{ensure, Error, Result};
use crate::faddeev::{FaddeevGrid, FaddeevSystem, Symmetry};
use crate::oracle::VariationalBasis;
use crate::twobody::{default_quadrature, find_critical_coupling, geometric_schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: PotentialFamily,
    #[serde(default = "one")]
    pub strength: f64,
    #[serde(default = "one")]
    pub range: f64,
    pub decay_exponent: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            family: PotentialFamily::GaussianWell,
            strength: 1.0,
            range: 1.0,
            decay_exponent: None,
        }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        match self.decay_exponent {
            Some(b) => PotentialSpec::with_decay(self.family, self.strength, self.range, b),
            None => PotentialSpec::new(self.family, self.strength, self.range),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub mass: f64,
    pub l: usize,
    pub sector: Sector,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            l: 0,
            sector: Sector::Generic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub masses: [f64; 3],
    pub symmetry: Symmetry,
    /// Per-pair potentials (12, 23, 31) for distinct particles; defaults to `[potential]` for all.
    pub potentials: Option<[PotentialConfig; 3]>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            masses: [2.0; 3],
            symmetry: Symmetry::IdenticalBosons,
            potentials: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    /// Explicit energies; overrides the geometric range when present.
    pub values: Option<Vec<f64>>,
    pub hi: f64,
    pub lo: f64,
    pub points: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            values: None,
            hi: 1e-2,
            lo: 1e-8,
            points: 7,
        }
    }
}

impl ScheduleConfig {
    /// Negative energies ordered from far to near threshold.
    pub fn energies(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            ensure(!v.is_empty(), || "schedule.values must not be empty".into())?;
            ensure(v.iter().all(|z| z.is_finite() && *z <= 0.0), || {
                "schedule.values must be finite and <= 0".into()
            })?;
            return Ok(v.clone());
        }
        ensure(self.hi > self.lo && self.lo > 0.0, || {
            format!("schedule needs hi > lo > 0, got hi = {}, lo = {}", self.hi, self.lo)
        })?;
        ensure(self.points >= 2, || format!("schedule.points must be >= 2, got {}", self.points))?;
        Ok(geometric_schedule(self.hi, self.lo, self.points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    /// Seed for the variational basis; overrides `basis.seed`.
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub dimension: Option<usize>,
    /// Depth as a multiple of the critical coupling `λ*`.
    pub coupling_factor: Option<f64>,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub grid: FaddeevGrid,
    #[serde(default)]
    pub basis: VariationalBasis,
}

impl RunConfig {
    /// Parses and validates; schema violations are validation errors.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::validation(format!("config schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.experiment.trim().is_empty(), || "experiment name must not be empty".into())?;
        if let Some(d) = self.dimension {
            ensure(d >= 3, || format!("dimension must be >= 3, got {d}"))?;
        }
        if let Some(f) = self.coupling_factor {
            ensure(f.is_finite() && f >= 0.0, || format!("coupling_factor must be >= 0, got {f}"))?;
        }
        self.potential.build()?;
        if let Some(ps) = &self.system.potentials {
            for p in ps {
                p.build()?;
            }
        }
        self.schedule.energies()?;
        Ok(())
    }

    pub fn dimension_or(&self, default: usize) -> usize {
        self.dimension.unwrap_or(default)
    }

    /// Two-body channel in dimension `d`, scaled to `coupling_factor · λ*` when set.
    pub fn two_body_channel(&self, d: usize) -> Result<TwoBodyChannel> {
        let c = &self.channel;
        let ch = TwoBodyChannel::new(c.mass, self.potential.build()?, d, c.l, c.sector)?;
        match self.coupling_factor {
            Some(f) => {
                let unit = ch.with_strength(1.0)?;
                let lam = find_critical_coupling(&unit, &default_quadrature(&unit)?)?;
                ch.with_strength(f * lam)
            }
            None => Ok(ch),
        }
    }

    /// Three-body system in dimension `d`.
    pub fn faddeev_system(&self, d: usize) -> Result<FaddeevSystem> {
        let s = &self.system;
        match (s.symmetry, self.coupling_factor) {
            (Symmetry::IdenticalBosons, Some(f)) => {
                ensure(s.masses.iter().all(|&m| m == s.masses[0]), || {
                    "identical bosons need equal masses".into()
                })?;
                FaddeevSystem::identical_bosons(s.masses[0], self.potential.build()?, d, f, self.grid.clone())
            }
            (_, Some(_)) => Err(Error::validation(
                "coupling_factor applies to identical bosons only; give explicit strengths",
            )),
            (sym, None) => {
                let pots = match &s.potentials {
                    Some(ps) => [ps[0].build()?, ps[1].build()?, ps[2].build()?],
                    None => [self.potential.build()?; 3],
                };
                FaddeevSystem::new(s.masses, pots, d, sym, self.grid.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse("experiment = \"x\"").unwrap();
        assert_eq!(c.potential.family, PotentialFamily::GaussianWell);
        assert_eq!(c.schedule.energies().unwrap().len(), 7);
        assert_eq!(c.system.masses, [2.0; 3]);
    }

    #[test]
    fn empty_and_unknown_keys_are_schema_errors() {
        assert!(RunConfig::parse("").unwrap_err().is_validation());
        let e = RunConfig::parse("experiment = \"x\"\n[grid]\nbogus = 1").unwrap_err();
        assert!(e.is_validation() && e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn invalid_values_name_the_violated_condition() {
        let e = RunConfig::parse("experiment = \"x\"\n[potential]\nfamily = \"gaussian-well\"\nrange = -1").unwrap_err();
        assert!(e.to_string().contains("range"), "{e}");
        let e = RunConfig::parse("experiment = \"x\"\n[schedule]\nhi = 1e-8\nlo = 1e-2").unwrap_err();
        assert!(e.to_string().contains("hi > lo"), "{e}");
    }

    #[test]
    fn coupling_factor_scales_the_channel() {
        let c = RunConfig::parse("experiment = \"x\"\ncoupling_factor = 1.0\n[channel]\nmass = 1.0").unwrap();
        let ch = c.two_body_channel(4).unwrap();
        assert!((ch.potential.strength - 3.3596155).abs() < 1e-6);
    }
}
