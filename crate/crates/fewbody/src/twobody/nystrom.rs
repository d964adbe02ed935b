//! Nyström discretization of radial integral operators with a kink on the
//! diagonal, by product integration inside the panel that contains each row.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::core::quadrature::{gauss_legendre, lagrange_basis, RadialQuadrature};
use crate::specfun::RadialGreen;

/// Gauss order on each side of the kink.
const SUB_ORDER: usize = 32;

/// A radial kernel `k(r, r')`, smooth except across `r = r'`.
pub trait RadialKernel: Sync {
    fn eval(&self, r: f64, rp: f64) -> f64;
}

impl RadialKernel for RadialGreen {
    fn eval(&self, r: f64, rp: f64) -> f64 {
        RadialGreen::eval(self, r, rp)
    }
}

/// Adapter for closures.
pub struct FnKernel<F: Fn(f64, f64) -> f64 + Sync>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> RadialKernel for FnKernel<F> {
    fn eval(&self, r: f64, rp: f64) -> f64 {
        (self.0)(r, rp)
    }
}

/// Weights `t_j` with `Σ_j t_j F(r_j) ≈ ∫_0^{r_max} k(r, r') F(r') dr'` for smooth `F`.
///
/// In the panel containing `r` the rule integrates `k(r,·) L_j` exactly up to
/// the sub-rule accuracy on both sides of `r`; elsewhere it is the plain rule.
pub fn kernel_row(grid: &RadialQuadrature, k: &dyn RadialKernel, r: f64) -> Vec<f64> {
    let (xs, ws) = gauss_legendre(SUB_ORDER);
    let mut row: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.h)
        .map(|(&rj, &hj)| k.eval(r, rj) * hj)
        .collect();
    if let Some(pi) = grid.panel_of(r) {
        let p = grid.panels[pi];
        let nodes = &grid.nodes[p.range()];
        let mut vals = vec![0.0; p.len];
        let mut basis = vec![0.0; p.len];
        for (lo, hi) in [(p.a, r), (r, p.b)] {
            if hi <= lo {
                continue;
            }
            for (x, w) in xs.iter().zip(&ws) {
                let t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo);
                let wt = 0.5 * (hi - lo) * w * k.eval(r, t);
                lagrange_basis(nodes, t, &mut basis);
                for j in 0..p.len {
                    vals[j] += wt * basis[j];
                }
            }
        }
        row[p.range()].copy_from_slice(&vals);
    }
    row
}

/// Product-integration matrix `T_ij` (row `i` from [`kernel_row`] at `r_i`).
pub fn product_integration_matrix(grid: &RadialQuadrature, k: &dyn RadialKernel) -> DMatrix<f64> {
    let n = grid.len();
    let rows: Vec<Vec<f64>> = grid
        .nodes
        .par_iter()
        .map(|&r| kernel_row(grid, k, r))
        .collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Symmetric weighted form of `φ ↦ s(r) ∫ k(r,r') s(r') φ(r') r'^{d-1} dr'`:
/// `M_ij = sqrt(ω_i/ω_j) s_i T_ij r_j^{d-1} s_j`, `ω_i = h_i r_i^{d-1}`, then `(M+Mᵀ)/2`.
pub fn symmetric_form(grid: &RadialQuadrature, t: &DMatrix<f64>, s: &[f64]) -> DMatrix<f64> {
    let n = grid.len();
    let dm1 = grid.d as i32 - 1;
    let radial: Vec<f64> = grid.nodes.iter().map(|r| r.powi(dm1)).collect();
    let omega: Vec<f64> = radial.iter().zip(&grid.h).map(|(a, b)| a * b).collect();
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        (omega[i] / omega[j]).sqrt() * s[i] * t[(i, j)] * radial[j] * s[j]
    });
    crate::linalg::symmetrize(&mut m);
    m
}

/// `sqrt(ω_i)`, the map from function values to symmetric-form coordinates.
pub fn sqrt_omega(grid: &RadialQuadrature) -> Vec<f64> {
    let dm1 = grid.d as i32 - 1;
    grid.nodes
        .iter()
        .zip(&grid.h)
        .map(|(r, h)| (h * r.powi(dm1)).sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::quadrature::build_radial_quadrature;

    /// ∫_0^R min(r,r') e^{-r'} dr' has the closed form r - r e^{-R} + ... ; the
    /// kinked kernel must be integrated to near machine precision.
    #[test]
    fn kinked_kernel_row_is_accurate() {
        let g = build_radial_quadrature(3, 4.0, 32).unwrap();
        let k = FnKernel(|r: f64, rp: f64| r.min(rp));
        for &r in &[0.37, 1.0, 2.51] {
            let row = kernel_row(&g, &k, r);
            let approx: f64 = row.iter().zip(&g.nodes).map(|(t, x)| t * (-x).exp()).sum();
            // ∫_0^r r' e^{-r'} + r ∫_r^R e^{-r'}
            let exact = 1.0 - (1.0 + r) * (-r).exp() + r * ((-r).exp() - (-4.0f64).exp());
            assert!((approx - exact).abs() < 1e-13, "r={r}: {approx} vs {exact}");
        }
    }
}
