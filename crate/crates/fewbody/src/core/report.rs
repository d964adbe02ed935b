use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::core::quadrature::RadialQuadrature;

/// Which integral kernel a discretized operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTag {
    BirmanSchwinger,
    ExpansionG1,
    ExpansionG2,
    FaddeevK,
    FaddeevWHalf,
    FaddeevA,
    FaddeevM,
}

/// A discretized integral operator in symmetric weighted form: entries are
/// `sqrt(ω_i) k(r_i, r_j) sqrt(ω_j)` so that eigenvalues of the matrix
/// approximate those of the operator.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub tag: KernelTag,
    pub grid: RadialQuadrature,
    pub matrix: DMatrix<f64>,
}

impl KernelOperator {
    /// All eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.matrix)
    }

    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `‖M - Mᵀ‖_F / ‖M‖_F`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.matrix.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.matrix - self.matrix.transpose()).norm() / n
        }
    }
}

/// Eigenvalues of a symmetric matrix sorted descending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Extremal spectrum of an operator with an optional threshold count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub tag: String,
    /// Largest eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub threshold: Option<f64>,
    pub count_above: Option<usize>,
    /// Change of the top eigenvalue under grid refinement.
    pub refinement_delta: Option<f64>,
}

impl SpectralReport {
    pub fn new(tag: impl Into<String>, mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self {
            tag: tag.into(),
            eigenvalues,
            threshold: None,
            count_above: None,
            refinement_delta: None,
        }
    }

    pub fn with_count(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self.count_above = Some(self.eigenvalues.iter().filter(|&&e| e > threshold).count());
        self
    }

    /// Records `|top(refined) - top(self)|`.
    pub fn with_refinement(mut self, refined: &SpectralReport) -> Self {
        if let (Some(a), Some(b)) = (self.eigenvalues.first(), refined.eigenvalues.first()) {
            self.refinement_delta = Some((a - b).abs());
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_sorts_and_counts() {
        let r = SpectralReport::new("t", vec![0.5, 1.5, 1.2]).with_count(1.0);
        assert_eq!(r.eigenvalues, vec![1.5, 1.2, 0.5]);
        assert_eq!(r.count_above, Some(2));
        let s = SpectralReport::new("t", vec![1.49]);
        let r = r.with_refinement(&s);
        assert!((r.refinement_delta.unwrap() - 0.01).abs() < 1e-12);
    }
}
