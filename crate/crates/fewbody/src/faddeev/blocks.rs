use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::core::{KernelOperator, KernelTag};
use crate::error::{ensure, Error, Result};
use crate::linalg::symmetric_function;
use crate::twobody::{assemble_bs, zeta_raw};

use super::system::{FaddeevSystem, Symmetry};

/// How `W_α^{1/2}` enters `A(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WRoute {
    /// `A = W^{1/2} K W^{1/2}` with `W^{1/2} = (I - BS(E))^{-1/2}` per momentum node.
    #[default]
    Direct,
    /// `A = Ũ M Ũ`, `Ũ = ζ(E) W^{1/2}`, `M = Γ⁻¹ K Γ⁻¹`; needs `τ` of resonant channels.
    ZetaSplit,
}

fn check_pair(sys: &FaddeevSystem, a: usize, b: usize, z: f64) -> Result<()> {
    ensure(a < 3 && b < 3 && a != b, || format!("blocks need alpha != beta, got ({a}, {b})"))?;
    ensure(z <= 0.0, || format!("z must be <= 0, got {z}"))?;
    let _ = sys;
    Ok(())
}

/// Weight-scaled discretization of `|V_α|^{1/2} R_0(z) |V_β|^{1/2}` on the
/// zero-angular-momentum s-wave subspace; rows `(i, a) ↦ i·n_x + a`.
pub fn assemble_k_block(sys: &FaddeevSystem, a: usize, b: usize, z: f64) -> Result<KernelOperator> {
    check_pair(sys, a, b, z)?;
    let (lo, hi) = (a.min(b), a.max(b));
    let (cache, _) = sys.cache(lo, hi);
    let (np, nx, nc) = (sys.np(), sys.nx(), sys.cos_nodes.len());
    let dm1 = sys.d as i32 - 1;
    let sv = |ch: usize| -> Vec<f64> {
        sys.x.nodes.iter().map(|&r| sys.channels[ch].potential.sqrt_abs(r)).collect()
    };
    let (sva, svb) = (sv(lo), sv(hi));
    let omega: Vec<f64> = sys.x.nodes.iter().zip(&sys.x.h).map(|(r, h)| h * r.powi(dm1)).collect();
    let nu: Vec<f64> = sys.p.iter().zip(&sys.p_weights).map(|(p, q)| q * p.powi(dm1)).collect();
    let wa: Vec<f64> = (0..np * nx)
        .map(|k| (nu[k / nx] * omega[k % nx]).sqrt() * sva[k % nx])
        .collect();
    let wb: Vec<f64> = (0..np * nx)
        .map(|k| (nu[k / nx] * omega[k % nx]).sqrt() * svb[k % nx])
        .collect();
    let n = np * nx;
    let rows: Vec<Vec<f64>> = (0..np)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![0.0; nx * n];
            let mut scaled = vec![0.0; nx];
            for j in 0..np {
                let base = (i * np + j) * nc;
                for c in 0..nc {
                    let f = cache.pref * sys.cos_weights[c] / (cache.h0[base + c] - z);
                    let la = &cache.la[(base + c) * nx..(base + c + 1) * nx];
                    let lb = &cache.lb[(base + c) * nx..(base + c + 1) * nx];
                    for (s, l) in scaled.iter_mut().zip(la) {
                        *s = f * l;
                    }
                    for (ra, &sa) in scaled.iter().enumerate() {
                        let row = &mut out[ra * n + j * nx..ra * n + (j + 1) * nx];
                        for (o, &l) in row.iter_mut().zip(lb) {
                            *o += sa * l;
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, block) in rows.iter().enumerate() {
        for ra in 0..nx {
            let r = i * nx + ra;
            for c in 0..n {
                m[(r, c)] = wa[r] * block[ra * n + c] * wb[c];
            }
        }
    }
    if a > b {
        m = m.transpose();
    }
    Ok(KernelOperator {
        tag: KernelTag::FaddeevK,
        grid: sys.x.clone(),
        matrix: m,
    })
}

/// Effective two-body energy `z - p_i²/2n_α` at each momentum node.
pub fn effective_energies(sys: &FaddeevSystem, a: usize, z: f64) -> Vec<f64> {
    let n = sys.frame.n[a];
    sys.p.iter().map(|p| z - p * p / (2.0 * n)).collect()
}

fn zeta_factors(sys: &FaddeevSystem, a: usize, z: f64) -> Result<Vec<f64>> {
    let e = effective_energies(sys, a, z);
    match &sys.tau[a] {
        Some(w) => Ok(e.iter().map(|&t| zeta_raw(t, w.tau, w.mu_alpha)).collect()),
        None => {
            if sys.channels[a].potential.strength == 0.0 || !sys.is_critical(a)? {
                Ok(vec![1.0; e.len()])
            } else {
                Err(Error::validation(format!(
                    "channel {a} is critical but has no tau constant: run extract_tau \
                     (FaddeevSystem::with_tau_constants) before using the zeta split"
                )))
            }
        }
    }
}

/// Block-diagonal `W_α^{1/2}(z)` (Direct) or `ζ_α W_α^{1/2}` (ZetaSplit), one
/// `n_x × n_x` block per momentum node.
pub fn w_half_blocks(sys: &FaddeevSystem, a: usize, z: f64, route: WRoute) -> Result<Vec<DMatrix<f64>>> {
    ensure(a < 3, || "channel index out of range".into())?;
    ensure(z <= 0.0, || format!("z must be <= 0, got {z}"))?;
    if route == WRoute::Direct {
        ensure(z < 0.0, || {
            "z = 0 is reachable only through the zeta split (M-form)".into()
        })?;
    }
    if route == WRoute::ZetaSplit && z == 0.0 {
        ensure(sys.d == 4, || "z = 0 is admitted only in dimension 4".into())?;
    }
    let zeta = match route {
        WRoute::Direct => vec![1.0; sys.np()],
        WRoute::ZetaSplit => zeta_factors(sys, a, z)?,
    };
    let ch = sys.channels[a];
    effective_energies(sys, a, z)
        .par_iter()
        .zip(zeta.par_iter())
        .map(|(&e, &zf)| {
            let bs = assemble_bs(&ch, e, &sys.x)?;
            let n = sys.nx();
            let gap_mat = DMatrix::identity(n, n) - &bs.op.matrix;
            let mut bad = None;
            let m = symmetric_function(&gap_mat, |g| {
                if g <= 0.0 {
                    bad = Some(g);
                    0.0
                } else {
                    zf / g.sqrt()
                }
            });
            if let Some(g) = bad {
                return Err(Error::Singular {
                    z: e,
                    gap: g,
                    condition: f64::INFINITY,
                });
            }
            Ok(m)
        })
        .collect()
}

/// `W_α^{1/2}(z)` as one block-diagonal operator.
pub fn assemble_w_half(sys: &FaddeevSystem, a: usize, z: f64, route: WRoute) -> Result<KernelOperator> {
    let blocks = w_half_blocks(sys, a, z, route)?;
    let nx = sys.nx();
    let n = sys.block_dim();
    let mut m = DMatrix::zeros(n, n);
    for (i, b) in blocks.iter().enumerate() {
        m.view_mut((i * nx, i * nx), (nx, nx)).copy_from(b);
    }
    Ok(KernelOperator {
        tag: KernelTag::FaddeevWHalf,
        grid: sys.x.clone(),
        matrix: m,
    })
}

/// `M_{αβ}(z) = Γ_α⁻¹ K_{αβ}(z) Γ_β⁻¹`, `Γ_α` multiplication by `ζ_α(z - p²/2n_α)`.
pub fn assemble_m_block(sys: &FaddeevSystem, a: usize, b: usize, z: f64) -> Result<KernelOperator> {
    ensure(sys.d == 4, || format!("M blocks are defined in dimension 4, got {}", sys.d))?;
    check_pair(sys, a, b, z)?;
    let za = zeta_factors(sys, a, z)?;
    let zb = zeta_factors(sys, b, z)?;
    let mut k = assemble_k_block(sys, a, b, z)?;
    let nx = sys.nx();
    let n = k.matrix.nrows();
    for c in 0..n {
        for r in 0..n {
            k.matrix[(r, c)] /= za[r / nx] * zb[c / nx];
        }
    }
    k.tag = KernelTag::FaddeevM;
    Ok(k)
}

/// `A(z)` on the grid, either the reduced boson block or the full 3×3 operator.
#[derive(Debug, Clone)]
pub struct FaddeevOperator {
    pub z: f64,
    pub matrix: DMatrix<f64>,
    /// True when `matrix` is the reduced single block `2 W^{1/2} K_{12,23} W^{1/2}`.
    pub reduced: bool,
    pub route: WRoute,
    pub nx: usize,
    pub np: usize,
    pub angular_order: usize,
}

impl FaddeevOperator {
    /// `‖A - Aᵀ‖_F / ‖A‖_F`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.matrix.norm();
        if n == 0.0 {
            0.0
        } else {
            (&self.matrix - self.matrix.transpose()).norm() / n
        }
    }
}

fn sandwich(left: &[DMatrix<f64>], k: &DMatrix<f64>, right: &[DMatrix<f64>], nx: usize) -> DMatrix<f64> {
    let np = left.len();
    let n = np * nx;
    let blocks: Vec<(usize, DMatrix<f64>)> = (0..np * np)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / np, ij % np);
            let kij = k.view((i * nx, j * nx), (nx, nx));
            (ij, &left[i] * kij * &right[j])
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (ij, b) in blocks {
        let (i, j) = (ij / np, ij % np);
        out.view_mut((i * nx, j * nx), (nx, nx)).copy_from(&b);
    }
    out
}

fn middle_block(sys: &FaddeevSystem, a: usize, b: usize, z: f64, route: WRoute) -> Result<DMatrix<f64>> {
    Ok(match route {
        WRoute::Direct => assemble_k_block(sys, a, b, z)?.matrix,
        WRoute::ZetaSplit => assemble_m_block(sys, a, b, z)?.matrix,
    })
}

/// `A(z) = W^{1/2} K W^{1/2}`; reduced to `2 W^{1/2} K_{12,23} W^{1/2}` for
/// identical bosons (the permutation-symmetric sector).
pub fn assemble_a(sys: &FaddeevSystem, z: f64, route: WRoute) -> Result<FaddeevOperator> {
    match sys.symmetry {
        Symmetry::IdenticalBosons => {
            let u = w_half_blocks(sys, 0, z, route)?;
            let mid = middle_block(sys, 0, 1, z, route)?;
            let mut m = sandwich(&u, &mid, &u, sys.nx()) * 2.0;
            crate::linalg::symmetrize(&mut m);
            Ok(FaddeevOperator {
                z,
                matrix: m,
                reduced: true,
                route,
                nx: sys.nx(),
                np: sys.np(),
                angular_order: sys.grid.angular_order,
            })
        }
        Symmetry::Distinct => assemble_a_full(sys, z, route),
    }
}

/// The full 3×3 block operator with zero diagonal blocks.
pub fn assemble_a_full(sys: &FaddeevSystem, z: f64, route: WRoute) -> Result<FaddeevOperator> {
    let n = sys.block_dim();
    let nx = sys.nx();
    let u: Vec<Vec<DMatrix<f64>>> = (0..3)
        .map(|a| w_half_blocks(sys, a, z, route))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(3 * n, 3 * n);
    for a in 0..3 {
        for b in (a + 1)..3 {
            let mid = middle_block(sys, a, b, z, route)?;
            let blk = sandwich(&u[a], &mid, &u[b], nx);
            m.view_mut((a * n, b * n), (n, n)).copy_from(&blk);
            m.view_mut((b * n, a * n), (n, n)).copy_from(&blk.transpose());
        }
    }
    Ok(FaddeevOperator {
        z,
        matrix: m,
        reduced: false,
        route,
        nx,
        np: sys.np(),
        angular_order: sys.grid.angular_order,
    })
}
