use nalgebra::{DMatrix, SymmetricEigen};

use crate::core::quadrature::RadialQuadrature;
use crate::core::{KernelOperator, KernelTag, PotentialFamily, TwoBodyChannel};
use crate::error::{ensure, Error, Result};
use crate::specfun::RadialGreen;

use super::nystrom::{product_integration_matrix, sqrt_omega, symmetric_form};

/// `|v|^{1/2} r_0(z) |v|^{1/2}` restricted to the channel's partial wave.
///
/// The matrix acts on `sqrt(ω_i) φ(r_i)`; use [`BirmanSchwingerOperator::to_values`]
/// to get function values back.
#[derive(Debug, Clone)]
pub struct BirmanSchwingerOperator {
    pub op: KernelOperator,
    pub channel: TwoBodyChannel,
    pub z: f64,
    /// Product-integration matrix of the bare radial Green function.
    pub green_weights: DMatrix<f64>,
    /// `|v(r_i)|^{1/2}`.
    pub sqrt_v: Vec<f64>,
}

/// Nodes suited to the channel's potential: the rule covers the numerical
/// support (`|v| < 10⁻¹⁶ λ` beyond it) and puts a panel edge on any kink.
pub fn default_quadrature(ch: &TwoBodyChannel) -> Result<RadialQuadrature> {
    let pot = &ch.potential;
    let (r_max, panels) = match pot.family {
        PotentialFamily::GaussianWell => (pot.support_radius(1e-16), 4),
        PotentialFamily::ExponentialWell => (pot.support_radius(1e-16), 12),
        PotentialFamily::FiniteSphericalWell => (pot.range, 2),
    };
    RadialQuadrature::uniform_with_breakpoints(ch.d, r_max, panels, 16, &pot.kinks())
}

pub fn assemble_bs(
    ch: &TwoBodyChannel,
    z: f64,
    quad: &RadialQuadrature,
) -> Result<BirmanSchwingerOperator> {
    ensure(z <= 0.0, || format!("z must be <= 0, got {z}"))?;
    ensure(quad.d == ch.d, || {
        format!("quadrature dimension {} does not match channel dimension {}", quad.d, ch.d)
    })?;
    let green = RadialGreen::for_channel(ch, z);
    let t = product_integration_matrix(quad, &green);
    let sqrt_v: Vec<f64> = quad.nodes.iter().map(|&r| ch.potential.sqrt_abs(r)).collect();
    let matrix = symmetric_form(quad, &t, &sqrt_v);
    Ok(BirmanSchwingerOperator {
        op: KernelOperator {
            tag: KernelTag::BirmanSchwinger,
            grid: quad.clone(),
            matrix,
        },
        channel: *ch,
        z,
        green_weights: t,
        sqrt_v,
    })
}

impl BirmanSchwingerOperator {
    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.op.eigenvalues()
    }

    pub fn top_eigenvalue(&self) -> f64 {
        self.op.top_eigenvalue()
    }

    /// Top eigenvalue and its eigenvector as function values `φ(r_i)`
    /// (unit norm in `L²(R^d)` for the radial part, sign arbitrary).
    pub fn top_eigenfunction(&self) -> (f64, Vec<f64>) {
        let eig = SymmetricEigen::new(self.op.matrix.clone());
        let k = eig.eigenvalues.imax();
        let y: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let mut phi = self.to_values(&y);
        // The symmetrized matrix is accurate in action, not entrywise; Nyström
        // interpolation restores the eigenfunction at small-weight nodes.
        let mu = eig.eigenvalues[k];
        if mu > 0.0 {
            for _ in 0..60 {
                let next: Vec<f64> = self.apply_values(&phi).iter().map(|x| x / mu).collect();
                let scale = phi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let delta = next.iter().zip(&phi).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                phi = next;
                if delta <= 1e-14 * scale {
                    break;
                }
            }
        }
        let norm2: f64 = phi
            .iter()
            .zip(&self.op.grid.weights)
            .map(|(p, w)| w * p * p)
            .sum();
        let s = norm2.sqrt();
        phi.iter_mut().for_each(|p| *p /= s);
        (eig.eigenvalues[k], phi)
    }

    /// `φ ↦ |v|^{1/2} ∫ g(·,r') |v|^{1/2} φ r'^{d-1} dr'` on function values.
    pub fn apply_values(&self, phi: &[f64]) -> Vec<f64> {
        let dm1 = self.channel.d as i32 - 1;
        let g = &self.op.grid;
        let src: Vec<f64> = (0..phi.len())
            .map(|j| g.nodes[j].powi(dm1) * self.sqrt_v[j] * phi[j])
            .collect();
        (0..phi.len())
            .map(|i| {
                let row: f64 = (0..phi.len()).map(|j| self.green_weights[(i, j)] * src[j]).sum();
                self.sqrt_v[i] * row
            })
            .collect()
    }

    /// Symmetric-form coordinates to function values.
    pub fn to_values(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(sqrt_omega(&self.op.grid))
            .map(|(a, s)| a / s)
            .collect()
    }

    /// Two leading eigenvalues (for the simplicity gap `μ₁ - μ₂`).
    pub fn leading_pair(&self) -> (f64, f64) {
        let e = self.eigenvalues();
        (e[0], e.get(1).copied().unwrap_or(f64::NEG_INFINITY))
    }
}

/// Coupling at which the top eigenvalue of `BS(0)` reaches 1.
///
/// Uses linearity in the coupling: `λ* = λ / μ_max(BS(0) at λ)`.
pub fn find_critical_coupling(ch: &TwoBodyChannel, quad: &RadialQuadrature) -> Result<f64> {
    if ch.potential.strength == 0.0 {
        return Err(Error::NoCriticalCoupling(
            "zero potential never binds: supply a positive well depth".into(),
        ));
    }
    let mu = assemble_bs(ch, 0.0, quad)?.top_eigenvalue();
    if mu <= 0.0 {
        return Err(Error::NoCriticalCoupling(format!(
            "Birman-Schwinger spectrum at z = 0 is non-positive (mu_max = {mu})"
        )));
    }
    Ok(ch.potential.strength / mu)
}

/// The channel rescaled to its critical coupling on the given grid.
pub fn critical_channel(ch: &TwoBodyChannel, quad: &RadialQuadrature) -> Result<TwoBodyChannel> {
    ch.with_strength(find_critical_coupling(ch, quad)?)
}

/// `1 / (1 - μ_max(BS(z)))`, the top eigenvalue of `w(z) = (I - BS(z))⁻¹`.
pub fn w_leading_eigenvalue(ch: &TwoBodyChannel, quad: &RadialQuadrature, z: f64) -> Result<f64> {
    ensure(z < 0.0, || format!("w(z) needs z < 0, got {z}"))?;
    let mu = assemble_bs(ch, z, quad)?.top_eigenvalue();
    let gap = 1.0 - mu;
    // Eigenvalues of BS carry absolute errors of a few ulps of its norm.
    let floor = 1e3 * f64::EPSILON * mu.abs().max(1.0);
    if gap <= floor {
        return Err(Error::Singular {
            z,
            gap,
            condition: mu.abs().max(1.0) / gap.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(1.0 / gap)
}
