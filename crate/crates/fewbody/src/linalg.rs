//! Dense symmetric eigen-helpers and a Lanczos extremal solver with explicit
//! deflation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A real symmetric linear operator.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        // Symmetric: (Ax)_i = column_i · x, contiguous in column-major storage.
        let n = self.nrows();
        if n < 512 {
            return self * x;
        }
        let xs = x.as_slice();
        let data = self.as_slice();
        let out: Vec<f64> = (0..self.ncols())
            .into_par_iter()
            .map(|j| {
                data[j * n..(j + 1) * n]
                    .iter()
                    .zip(xs)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        DVector::from_vec(out)
    }
}

/// `MᵀM` without forming it.
pub struct Gram<'a>(pub &'a DMatrix<f64>);

impl SymmetricOperator for Gram<'_> {
    fn dim(&self) -> usize {
        self.0.ncols()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.tr_mul(&(self.0 * x))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov dimension before an explicit restart.
    pub max_basis: usize,
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_basis: 80,
            tol: 1e-11,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

/// A converged Ritz pair.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Largest eigenpair of `op` restricted to the orthogonal complement of `locked`.
pub fn top_eigenpair(
    op: &dyn SymmetricOperator,
    locked: &[DVector<f64>],
    opts: &LanczosOptions,
) -> Result<RitzPair> {
    let n = op.dim();
    if locked.len() >= n {
        return Err(Error::numerical("deflation exhausted the space"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (locked.len() as u64).wrapping_mul(0x9e37));
    let mut start = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    let m_max = opts.max_basis.min(n - locked.len());
    let mut best: Option<RitzPair> = None;
    for _ in 0..opts.max_restarts {
        orthogonalize(&mut start, locked);
        let nrm = start.norm();
        if nrm == 0.0 {
            return Err(Error::numerical("Lanczos start vector vanished after deflation"));
        }
        start /= nrm;
        let mut q: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut last_beta = 0.0;
        for j in 0..m_max {
            let mut w = op.apply(&q[j]);
            orthogonalize(&mut w, locked);
            let a = q[j].dot(&w);
            alpha.push(a);
            orthogonalize(&mut w, &q);
            orthogonalize(&mut w, locked);
            let b = w.norm();
            last_beta = b;
            if j + 1 == m_max || b < 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            q.push(w / b);
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let s = eig.eigenvectors.column(imax);
        let mut x = DVector::<f64>::zeros(n);
        for (i, qi) in q.iter().enumerate().take(m) {
            x.axpy(s[i], qi, 1.0);
        }
        let xn = x.norm();
        x /= xn;
        let resid = (last_beta * s[m - 1]).abs();
        let pair = RitzPair {
            value: theta,
            vector: x.clone(),
            residual: resid,
        };
        if resid <= opts.tol * theta.abs().max(1.0) || m == n - locked.len() {
            return Ok(pair);
        }
        best = Some(pair);
        start = x;
    }
    let b = best.unwrap();
    Err(Error::NoConvergence(format!(
        "Lanczos top eigenpair: residual {} after {} restarts (theta = {})",
        b.residual, opts.max_restarts, b.value
    )))
}

/// Outcome of counting eigenvalues above a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCount {
    pub count: usize,
    /// Every converged eigenvalue found, descending; the last is the first one
    /// below `threshold - margin` (when the space was not exhausted).
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues within `ambiguity` of the threshold.
    pub ambiguous: Vec<f64>,
}

/// Counts eigenvalues `> threshold` by locking extremal pairs one at a time
/// until the next one falls below `threshold - margin`.
pub fn count_above(
    op: &dyn SymmetricOperator,
    threshold: f64,
    margin: f64,
    ambiguity: f64,
    opts: &LanczosOptions,
) -> Result<ThresholdCount> {
    let mut locked: Vec<DVector<f64>> = Vec::new();
    let mut values = Vec::new();
    let mut ambiguous = Vec::new();
    let mut count = 0;
    while locked.len() < op.dim() {
        let pair = top_eigenpair(op, &locked, opts)?;
        values.push(pair.value);
        if (pair.value - threshold).abs() <= ambiguity {
            ambiguous.push(pair.value);
        }
        if pair.value > threshold {
            count += 1;
        }
        if pair.value < threshold - margin {
            break;
        }
        locked.push(pair.vector);
    }
    Ok(ThresholdCount {
        count,
        eigenvalues: values,
        ambiguous,
    })
}

/// Top singular value of a rectangular matrix via Lanczos on `MᵀM`.
pub fn top_singular_value(m: &DMatrix<f64>, opts: &LanczosOptions) -> Result<f64> {
    if m.ncols() == 0 || m.norm() == 0.0 {
        return Ok(0.0);
    }
    let p = top_eigenpair(&Gram(m), &[], opts)?;
    Ok(p.value.max(0.0).sqrt())
}

/// `f(S)` for symmetric `S` through its eigendecomposition.
pub fn symmetric_function(s: &DMatrix<f64>, mut f: impl FnMut(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(s.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lam);
        scaled.column_mut(j).scale_mut(fl);
    }
    scaled * v.transpose()
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::report::sorted_eigenvalues;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        a = &a + a.transpose();
        a
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..5 {
            let a = random_symmetric(150, seed);
            let ev = sorted_eigenvalues(&a);
            let th = 0.5 * (ev[3] + ev[4]);
            let c = count_above(&a, th, 1e-6, 1e-8, &LanczosOptions::default()).unwrap();
            assert_eq!(c.count, 4);
            for k in 0..4 {
                assert!((c.eigenvalues[k] - ev[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_operator_counts_nothing() {
        let a = DMatrix::<f64>::zeros(20, 20);
        let c = count_above(&a, 1.0, 1e-6, 1e-8, &LanczosOptions::default()).unwrap();
        assert_eq!(c.count, 0);
    }

    #[test]
    fn degenerate_eigenvalues_are_all_counted() {
        let mut a = DMatrix::<f64>::zeros(30, 30);
        for i in 0..30 {
            a[(i, i)] = if i < 3 { 2.0 } else { 0.1 * i as f64 / 30.0 };
        }
        let c = count_above(&a, 1.0, 1e-6, 1e-8, &LanczosOptions::default()).unwrap();
        assert_eq!(c.count, 3);
    }

    #[test]
    fn ambiguity_is_flagged() {
        let mut a = DMatrix::<f64>::zeros(10, 10);
        a[(0, 0)] = 1.0 + 1e-10;
        a[(1, 1)] = 0.5;
        let c = count_above(&a, 1.0, 1e-6, 1e-8, &LanczosOptions::default()).unwrap();
        assert_eq!(c.ambiguous.len(), 1);
    }

    #[test]
    fn singular_value_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(40, 25, |_, _| rng.random::<f64>() - 0.5);
        let s = m.clone().svd(false, false).singular_values.max();
        let t = top_singular_value(&m, &LanczosOptions::default()).unwrap();
        assert!((s - t).abs() < 1e-9 * s);
    }

    #[test]
    fn inverse_square_root() {
        let a = random_symmetric(12, 9) * 0.05 + DMatrix::identity(12, 12);
        let r = symmetric_function(&a, |x| 1.0 / x.sqrt());
        let back = &r * &a * &r;
        assert!((back - DMatrix::<f64>::identity(12, 12)).norm() < 1e-12);
    }
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of `y - fit`.
    pub rms: f64,
    /// Largest `|y - fit| / |y|`.
    pub max_rel: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    let mut max_rel = 0.0f64;
    for (a, b) in x.iter().zip(y) {
        let r = b - (slope * a + intercept);
        ss += r * r;
        if *b != 0.0 {
            max_rel = max_rel.max((r / b).abs());
        }
    }
    LineFit {
        slope,
        intercept,
        rms: (ss / n).sqrt(),
        max_rel,
    }
}
