use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::linalg::{count_above, fit_line, LanczosOptions};

use super::blocks::{assemble_a, FaddeevOperator, WRoute};
use super::system::FaddeevSystem;

/// Eigenvalues are resolved until the next one is below `1 - COUNT_MARGIN`.
pub const COUNT_MARGIN: f64 = 1e-6;
/// Eigenvalues within this distance of 1 make the count ambiguous.
pub const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct CountResult {
    pub count: usize,
    /// Leading eigenvalues found by the deflated iteration, descending.
    pub eigenvalues: Vec<f64>,
    /// `1 - λ_{count+1}`: distance of the first uncounted eigenvalue below 1.
    pub gap_to_one: f64,
}

/// `n(1, A)`: eigenvalues of `A` strictly above 1.
pub fn count_above_one(op: &FaddeevOperator) -> Result<CountResult> {
    if op.matrix.iter().all(|&x| x == 0.0) {
        return Ok(CountResult {
            count: 0,
            eigenvalues: vec![0.0],
            gap_to_one: 1.0,
        });
    }
    let opts = LanczosOptions::default();
    let c = count_above(&op.matrix, 1.0, COUNT_MARGIN, BOUNDARY_TOL, &opts)?;
    if let Some(&e) = c.ambiguous.first() {
        let upper = c.eigenvalues.iter().filter(|&&x| x >= 1.0 - BOUNDARY_TOL).count();
        let lower = c.eigenvalues.iter().filter(|&&x| x > 1.0 + BOUNDARY_TOL).count();
        return Err(Error::BoundaryAmbiguous {
            eigenvalue: e,
            tol: BOUNDARY_TOL,
            lower,
            upper,
        });
    }
    let next = c.eigenvalues.get(c.count).copied().unwrap_or(f64::NEG_INFINITY);
    Ok(CountResult {
        count: c.count,
        gap_to_one: 1.0 - next,
        eigenvalues: c.eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Growth like `U₀ ln(1/|z|)` (d = 3).
    LogSlope,
    /// Bounded count (d ≥ 4).
    Plateau,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountSample {
    pub z: f64,
    pub count: usize,
    pub top_eigenvalue: f64,
    pub gap_to_one: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingCurve {
    pub samples: Vec<CountSample>,
    pub mode: FitMode,
    /// Least-squares slope of the count in counts per decade of `1/|z|`.
    pub slope: f64,
    /// Mean count (plateau level).
    pub level: f64,
    /// RMS deviation from the fitted line divided by the mean count.
    pub residual: f64,
}

impl CountingCurve {
    pub fn counts(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.count).collect()
    }

    pub fn is_non_decreasing_towards_zero(&self) -> bool {
        let mut s: Vec<&CountSample> = self.samples.iter().collect();
        s.sort_by(|a, b| b.z.abs().total_cmp(&a.z.abs()));
        s.windows(2).all(|w| w[1].count >= w[0].count)
    }
}

/// Counts at every `z` of the schedule and the fit that matches the dimension.
pub fn counting_curve(sys: &FaddeevSystem, zs: &[f64], route: WRoute) -> Result<CountingCurve> {
    ensure(zs.len() >= 4, || format!("counting curve needs >= 4 energies, got {}", zs.len()))?;
    ensure(zs.iter().all(|&z| z < 0.0), || "schedule energies must be negative".into())?;
    let samples: Vec<CountSample> = zs
        .par_iter()
        .map(|&z| {
            let op = assemble_a(sys, z, route)?;
            let c = count_above_one(&op)?;
            Ok(CountSample {
                z,
                count: c.count,
                top_eigenvalue: c.eigenvalues[0],
                gap_to_one: c.gap_to_one,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = samples.iter().map(|s| (1.0 / s.z.abs()).log10()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.count as f64).collect();
    let fit = fit_line(&x, &y);
    let level = y.iter().sum::<f64>() / y.len() as f64;
    Ok(CountingCurve {
        samples,
        mode: if sys.d == 3 { FitMode::LogSlope } else { FitMode::Plateau },
        slope: fit.slope,
        level,
        residual: if level > 0.0 { fit.rms / level } else { 0.0 },
    })
}
