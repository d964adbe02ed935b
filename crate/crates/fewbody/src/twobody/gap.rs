//! Rayleigh quotient `⟨(-Δ + 2m v) g, g⟩ / ‖∇g‖²` on P2 finite elements.
//!
//! Radial trial functions on `[0, R]` are continued outside by the decaying
//! harmonic `g(R)(R/r)^{ℓ+d-2}`, which contributes `(ℓ+d-2) w_d R^{d-2} g(R)²`
//! to `‖∇g‖²`. The potential is assumed negligible beyond `R`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::core::quadrature::{gauss_legendre, sphere_surface};
use crate::core::TwoBodyChannel;
use crate::error::{ensure, Error, Result};

use super::profile::ResonanceProfile;

/// Angular momenta scanned for the gap; higher sectors only raise the quotient.
pub const GAP_SECTORS: usize = 4;
pub const DEFAULT_ELEMENTS: usize = 120;

#[derive(Debug, Clone, Serialize)]
pub struct GapResult {
    /// Minimum over all scanned sectors, with `⟨∇g, ∇f⟩ = 0` in the channel's sector.
    pub mu_gap: f64,
    /// Minimum in the channel's sector without the constraint.
    pub unconstrained_min: f64,
    /// `(ℓ, minimum)` per sector.
    pub sectors: Vec<(usize, f64)>,
    pub elements: usize,
}

struct FeSpace {
    d: usize,
    /// Node radii: element ends and midpoints.
    nodes: Vec<f64>,
    r_max: f64,
}

impl FeSpace {
    fn new(d: usize, r_max: f64, elements: usize) -> Self {
        let n = 2 * elements + 1;
        let nodes = (0..n).map(|k| r_max * k as f64 / (n - 1) as f64).collect();
        Self { d, nodes, r_max }
    }

    fn dofs(&self) -> usize {
        self.nodes.len()
    }

    /// Stiffness (with centrifugal and exterior terms) and `2m|v|` mass matrices.
    fn matrices(&self, l: usize, two_m_v: impl Fn(f64) -> f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dofs();
        let wd = sphere_surface(self.d);
        let dm1 = self.d as i32 - 1;
        let cl = (l * (l + self.d - 2)) as f64;
        let (xs, ws) = gauss_legendre(8);
        let mut k = DMatrix::zeros(n, n);
        let mut v = DMatrix::zeros(n, n);
        for e in 0..(n - 1) / 2 {
            let (a, b) = (self.nodes[2 * e], self.nodes[2 * e + 2]);
            let jac = 0.5 * (b - a);
            for (x, w) in xs.iter().zip(&ws) {
                let r = a + jac * (x + 1.0);
                let sh = [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)];
                let ds = [(x - 0.5) / jac, -2.0 * x / jac, (x + 0.5) / jac];
                let meas = wd * w * jac * r.powi(dm1);
                let pot = two_m_v(r);
                for i in 0..3 {
                    for j in 0..3 {
                        let (gi, gj) = (2 * e + i, 2 * e + j);
                        k[(gi, gj)] += meas * (ds[i] * ds[j] + cl * sh[i] * sh[j] / (r * r));
                        v[(gi, gj)] += meas * pot * sh[i] * sh[j];
                    }
                }
            }
        }
        let p = (l + self.d - 2) as f64;
        k[(n - 1, n - 1)] += p * wd * self.r_max.powi(self.d as i32 - 2);
        (k, v)
    }
}

/// Smallest `μ` of `(K - V) c = μ K c`, i.e. `1 - ν_max(K⁻¹V)`.
fn min_quotient(k: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let chol = k
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("finite-element stiffness is not positive definite"))?;
    let l = chol.l();
    let li = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    let mut c = &li * v * li.transpose();
    crate::linalg::symmetrize(&mut c);
    let nu = SymmetricEigen::new(c).eigenvalues.max();
    Ok(1.0 - nu)
}

/// Orthonormal basis of the complement of `c` (Householder reflection).
fn complement_basis(c: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = c.len();
    let norm = c.norm();
    ensure(norm > 1e-300 && c.amax() > 1e-12 * norm, || {
        "constraint vector vanishes: projection is rank-deficient".into()
    })?;
    let mut u = c.clone();
    u[0] += if c[0] >= 0.0 { norm } else { -norm };
    let uu = u.dot(&u);
    let h = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / uu);
    Ok(h.columns(1, n - 1).into_owned())
}

fn two_m_v(ch: &TwoBodyChannel) -> impl Fn(f64) -> f64 + '_ {
    move |r| 2.0 * ch.mass * ch.potential.value(r)
}

/// Unconstrained minimum of the quotient in the channel's own sector.
pub fn unconstrained_minimum(ch: &TwoBodyChannel, r_max: f64, elements: usize) -> Result<f64> {
    let fe = FeSpace::new(ch.d, r_max, elements);
    let (k, v) = fe.matrices(ch.l, |r| -two_m_v(ch)(r));
    min_quotient(&k, &v)
}

/// Gap of `-Δ + 2m v` on the `Ḣ¹`-orthogonal complement of the zero-energy solution.
pub fn gap_on_complement(
    ch: &TwoBodyChannel,
    profile: &ResonanceProfile,
    elements: usize,
) -> Result<GapResult> {
    ensure(profile.d == ch.d && profile.l == ch.l, || {
        "profile does not belong to this channel".into()
    })?;
    ensure(elements >= 8, || "need at least 8 finite elements".into())?;
    let r_max = profile.grid().r_max();
    let fe = FeSpace::new(ch.d, r_max, elements);
    let mut sectors = Vec::new();
    let mut unconstrained = f64::NAN;
    let mut gap = f64::INFINITY;
    for l in 0..GAP_SECTORS.max(ch.l + 1) {
        let (k, v) = fe.matrices(l, |r| -two_m_v(ch)(r));
        let mu = if l == ch.l {
            unconstrained = min_quotient(&k, &v)?;
            let f = DVector::from_iterator(fe.dofs(), fe.nodes.iter().map(|&r| profile.eval(r)));
            let q = complement_basis(&(&k * f))?;
            min_quotient(&(q.transpose() * &k * &q), &(q.transpose() * &v * &q))?
        } else {
            min_quotient(&k, &v)?
        };
        gap = gap.min(mu);
        sectors.push((l, mu));
    }
    Ok(GapResult {
        mu_gap: gap,
        unconstrained_min: unconstrained,
        sectors,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PotentialSpec;
    use crate::twobody::{critical_channel, default_quadrature, resonance_profile};

    #[test]
    fn gap_positive_and_unconstrained_zero_at_criticality() {
        let v = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let ch = TwoBodyChannel::s_wave(1.0, v, 4).unwrap();
        let q = default_quadrature(&ch).unwrap();
        let crit = critical_channel(&ch, &q).unwrap();
        let p = resonance_profile(&crit, &q).unwrap();
        let g = gap_on_complement(&crit, &p, DEFAULT_ELEMENTS).unwrap();
        assert!(g.unconstrained_min.abs() < 1e-4, "{}", g.unconstrained_min);
        assert!(g.mu_gap > 0.0);
        let g2 = gap_on_complement(&crit, &p, 2 * DEFAULT_ELEMENTS).unwrap();
        assert!((g2.mu_gap - g.mu_gap).abs() < 0.1 * g.mu_gap);
        let sub = crit.with_strength(0.9 * crit.potential.strength).unwrap();
        assert!(unconstrained_minimum(&sub, q.r_max(), DEFAULT_ELEMENTS).unwrap() > 0.0);
    }
}
