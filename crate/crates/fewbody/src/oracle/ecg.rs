//! Rayleigh–Ritz on correlated Gaussians `exp(-½ ξᵀAξ)` in the pair-(12)
//! Jacobi coordinates `ξ = (x, y)`, each a vector in `R^d`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, RowVector2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::PotentialFamily;
use crate::error::{ensure, Error, Result};
use crate::faddeev::{FaddeevSystem, Symmetry};
use crate::jacobi::Pair;

/// Overlap eigenvalues below `PRUNE_RATIO · e_max` are dropped.
pub const PRUNE_RATIO: f64 = 1e-10;
/// Smallest `|z|` the oracle accepts.
pub const MIN_ABS_Z: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationalBasis {
    pub size: usize,
    pub seed: u64,
    /// Width range in units of the potential range; widths are log-uniform.
    pub width_min: f64,
    pub width_max: f64,
    /// Sum over all six particle permutations. `None` follows the system.
    pub symmetric: Option<bool>,
}

impl Default for VariationalBasis {
    fn default() -> Self {
        Self {
            size: 300,
            seed: 1,
            width_min: 0.1,
            width_max: 30.0,
            symmetric: None,
        }
    }
}

impl VariationalBasis {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(self.size >= 1, || "basis size must be >= 1".into())?;
        ensure(self.width_min > 0.0 && self.width_max > self.width_min, || {
            format!(
                "width range must satisfy 0 < width_min < width_max, got [{}, {}]",
                self.width_min, self.width_max
            )
        })
    }
}

/// One Gaussian, by its matrix in (12) coordinates.
#[derive(Debug, Clone, Copy)]
struct Element {
    a: Matrix2<f64>,
}

/// Hamiltonian data in (12) coordinates.
struct Model {
    d: f64,
    lambda_kin: Matrix2<f64>,
    /// `(w_α, λ_α, σ_α)`: relative coordinate of pair α is `w_αᵀ ξ`.
    pairs: Vec<(Vector2<f64>, f64, f64)>,
    /// Ket transforms summed over (identity only, or all permutations).
    perms: Vec<Matrix2<f64>>,
    /// Jacobi transforms from frame (12) to the frame of each pair.
    frames: [Matrix2<f64>; 3],
    symmetric: bool,
    sigma: f64,
}

fn jacobi_rows(masses: [f64; 3], pair: Pair) -> [[f64; 3]; 2] {
    let (i, j, k) = pair.particles();
    let mij = masses[i] + masses[j];
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    x[i] = 1.0;
    x[j] = -1.0;
    y[k] = 1.0;
    y[i] = -masses[i] / mij;
    y[j] = -masses[j] / mij;
    [x, y]
}

impl Model {
    fn new(sys: &FaddeevSystem, symmetric: bool) -> Result<Self> {
        let masses = sys.frame.masses;
        let total: f64 = masses.iter().sum();
        let rows = jacobi_rows(masses, Pair::P12);
        let full = Matrix3::from_rows(&[
            nalgebra::RowVector3::from(rows[0]),
            nalgebra::RowVector3::from(rows[1]),
            nalgebra::RowVector3::new(masses[0] / total, masses[1] / total, masses[2] / total),
        ]);
        let inv = full
            .try_inverse()
            .ok_or_else(|| Error::numerical("Jacobi transformation is singular"))?;
        // Positions relative to the centre of mass as a function of (x, y).
        let jinv = inv.fixed_columns::<2>(0).into_owned();
        let to_frame = |r: [[f64; 3]; 2]| -> Matrix2<f64> {
            let j = nalgebra::Matrix2x3::from_rows(&[
                nalgebra::RowVector3::from(r[0]),
                nalgebra::RowVector3::from(r[1]),
            ]);
            j * jinv
        };
        let frames = [
            to_frame(jacobi_rows(masses, Pair::P12)),
            to_frame(jacobi_rows(masses, Pair::P23)),
            to_frame(jacobi_rows(masses, Pair::P31)),
        ];
        let perms = if symmetric {
            ensure(sys.symmetry == Symmetry::IdenticalBosons, || {
                "permutation-symmetric basis needs identical bosons".into()
            })?;
            let mut out = Vec::new();
            for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let permuted = [
                    [rows[0][p[0]], rows[0][p[1]], rows[0][p[2]]],
                    [rows[1][p[0]], rows[1][p[1]], rows[1][p[2]]],
                ];
                out.push(to_frame(permuted));
            }
            out
        } else {
            vec![Matrix2::identity()]
        };
        let mut pairs = Vec::new();
        for a in Pair::ALL {
            let pot = sys.channels[a.index()].potential;
            if pot.strength == 0.0 {
                continue;
            }
            ensure(pot.family == PotentialFamily::GaussianWell, || {
                "variational oracle supports Gaussian wells only".into()
            })?;
            let (i, j, _) = a.particles();
            let mut e = [0.0; 3];
            e[i] = 1.0;
            e[j] = -1.0;
            let w = RowVector2::new(
                (0..3).map(|k| e[k] * jinv[(k, 0)]).sum(),
                (0..3).map(|k| e[k] * jinv[(k, 1)]).sum(),
            );
            pairs.push((w.transpose(), pot.strength, pot.range));
        }
        let sigma = sys
            .channels
            .iter()
            .filter(|c| c.potential.strength > 0.0)
            .map(|c| c.potential.range)
            .fold(0.0, f64::max);
        let sigma = if sigma > 0.0 { sigma } else { sys.channels[0].potential.range };
        Ok(Self {
            d: sys.d as f64,
            lambda_kin: Matrix2::new(1.0 / sys.frame.m[0], 0.0, 0.0, 1.0 / sys.frame.n[0]),
            pairs,
            perms,
            frames,
            symmetric,
            sigma,
        })
    }

    fn elements(&self, basis: &VariationalBasis, seed: u64) -> Vec<Element> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (basis.width_min.ln(), basis.width_max.ln());
        (0..basis.size)
            .map(|k| {
                let b1 = self.sigma * rng.random_range(lo..hi).exp();
                let b2 = self.sigma * rng.random_range(lo..hi).exp();
                let a = Matrix2::new(1.0 / (b1 * b1), 0.0, 0.0, 1.0 / (b2 * b2));
                // Without symmetrization, cycle through the three Jacobi frames.
                let t = if self.symmetric { Matrix2::identity() } else { self.frames[k % 3] };
                Element { a: t.transpose() * a * t }
            })
            .collect()
    }

    /// `(S, T, [V_α])` for one bra/ket matrix pair.
    fn pair_elements(&self, a: &Matrix2<f64>, b: &Matrix2<f64>) -> (f64, f64, Vec<f64>) {
        let c = a + b;
        let det = c.determinant();
        let ci = c.try_inverse().expect("sum of positive-definite matrices");
        let s = ((2.0 * std::f64::consts::PI).powi(2) / det).powf(0.5 * self.d);
        let t = 0.5 * self.d * (a * self.lambda_kin * b * ci).trace() * s;
        let v = self
            .pairs
            .iter()
            .map(|(w, lam, sig)| -lam * s * (1.0 + 2.0 * (w.transpose() * ci * w)[0] / (sig * sig)).powf(-0.5 * self.d))
            .collect();
        (s, t, v)
    }

    /// Individual permuted Gaussians spanning the symmetrized elements, and
    /// the coefficients that reproduce `Σ_k c_k φ_k` on them (normalized).
    fn expand(&self, el: &[Element], c: &[f64]) -> (Vec<Element>, Vec<f64>) {
        if !self.symmetric {
            return (el.to_vec(), c.to_vec());
        }
        let mut out = Vec::new();
        let mut coeff = Vec::new();
        for (k, e) in el.iter().enumerate() {
            let own = self.pair_elements(&e.a, &e.a).0;
            let sym: f64 = self
                .perms
                .iter()
                .map(|p| self.pair_elements(&e.a, &(p.transpose() * e.a * p)).0)
                .sum();
            let w = c[k] * (own / (self.perms.len() as f64 * sym)).sqrt();
            let mut copies: Vec<(Matrix2<f64>, f64)> = Vec::new();
            for p in &self.perms {
                let b = p.transpose() * e.a * p;
                match copies.iter_mut().find(|(m, _)| (m - b).abs().max() <= 1e-12 * b.abs().max()) {
                    Some(slot) => slot.1 += 1.0,
                    None => copies.push((b, 1.0)),
                }
            }
            for (b, mult) in copies {
                out.push(Element { a: b });
                coeff.push(w * mult);
            }
        }
        (out, coeff)
    }

    fn matrices(&self, el: &[Element]) -> Matrices {
        let n = el.len();
        let np = self.pairs.len();
        let rows: Vec<Vec<(f64, f64, Vec<f64>)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i..n)
                    .map(|j| {
                        let mut acc = (0.0, 0.0, vec![0.0; np]);
                        for p in &self.perms {
                            let bj = p.transpose() * el[j].a * p;
                            let (s, t, v) = self.pair_elements(&el[i].a, &bj);
                            acc.0 += s;
                            acc.1 += t;
                            acc.2.iter_mut().zip(&v).for_each(|(x, y)| *x += y);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut s = DMatrix::zeros(n, n);
        let mut t = DMatrix::zeros(n, n);
        let mut v = vec![DMatrix::zeros(n, n); np];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, (sv, tv, vv)) in row.into_iter().enumerate() {
                let j = i + off;
                s[(i, j)] = sv;
                s[(j, i)] = sv;
                t[(i, j)] = tv;
                t[(j, i)] = tv;
                for (m, x) in v.iter_mut().zip(vv) {
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
        }
        let dn: Vec<f64> = (0..n).map(|i| s[(i, i)].sqrt()).collect();
        let scale = |m: &mut DMatrix<f64>| {
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] /= dn[i] * dn[j];
                }
            }
        };
        scale(&mut s);
        scale(&mut t);
        v.iter_mut().for_each(scale);
        if self.symmetric && np > 1 {
            // Between symmetrized states only the permutation-invariant sum is
            // meaningful; each (equal) pair carries an equal share of it.
            let total = v.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m) / np as f64;
            v.iter_mut().for_each(|m| *m = total.clone());
        }
        Matrices { s, t, v }
    }
}

struct Matrices {
    s: DMatrix<f64>,
    t: DMatrix<f64>,
    v: Vec<DMatrix<f64>>,
}

/// Canonical orthogonalization: columns span the retained overlap eigenspace.
struct Orthonormal {
    x: DMatrix<f64>,
    condition: f64,
    kept: usize,
}

fn orthonormalize(s: &DMatrix<f64>, ratio: f64) -> Orthonormal {
    let eig = SymmetricEigen::new(s.clone());
    let emax = eig.eigenvalues.max();
    let emin = eig.eigenvalues.min();
    let keep: Vec<usize> = (0..s.nrows()).filter(|&k| eig.eigenvalues[k] > ratio * emax).collect();
    let mut x = DMatrix::zeros(s.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let f = 1.0 / eig.eigenvalues[k].sqrt();
        x.set_column(c, &(eig.eigenvectors.column(k) * f));
    }
    Orthonormal {
        x,
        condition: if emin > 0.0 { emax / emin } else { f64::INFINITY },
        kept: keep.len(),
    }
}

fn project(x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = x.transpose() * m * x;
    (&p + p.transpose()) * 0.5
}

/// Ritz spectrum of `H = H₀ + Σ V_α` on a Gaussian basis.
#[derive(Debug, Clone)]
pub struct VariationalSpectrum {
    pub basis: VariationalBasis,
    pub symmetric: bool,
    /// Ascending Ritz values.
    pub ritz_values: Vec<f64>,
    /// Ritz vectors (columns) in orthonormal coordinates.
    pub ritz_vectors: DMatrix<f64>,
    /// Overlap condition number before pruning.
    pub condition_number: f64,
    /// Retained dimension after pruning.
    pub kept: usize,
    pub pruned: bool,
    /// Map from orthonormal coordinates to (normalized) basis coefficients.
    x: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalCount {
    pub z: f64,
    pub count: usize,
    pub basis_size: usize,
    pub kept: usize,
    pub condition_number: f64,
    pub pruned: bool,
    /// Ritz values below zero, ascending.
    pub bound_ritz_values: Vec<f64>,
}

fn symmetric_mode(sys: &FaddeevSystem, basis: &VariationalBasis) -> bool {
    basis.symmetric.unwrap_or(sys.symmetry == Symmetry::IdenticalBosons)
}

fn validate_system(sys: &FaddeevSystem) -> Result<()> {
    ensure(sys.d == 3 || sys.d == 4, || format!("variational oracle needs d in {{3, 4}}, got {}", sys.d))
}

pub fn variational_spectrum(sys: &FaddeevSystem, basis: &VariationalBasis) -> Result<VariationalSpectrum> {
    validate_system(sys)?;
    basis.validate()?;
    let symmetric = symmetric_mode(sys, basis);
    let model = Model::new(sys, symmetric)?;
    let el = model.elements(basis, basis.seed);
    spectrum_from(&model, &el, basis.clone())
}

fn spectrum_from(model: &Model, el: &[Element], basis: VariationalBasis) -> Result<VariationalSpectrum> {
    let m = model.matrices(el);
    let on = orthonormalize(&m.s, PRUNE_RATIO);
    ensure(on.kept > 0, || "overlap matrix has no retained directions".into())?;
    let mut h = project(&on.x, &m.t);
    for v in &m.v {
        h += project(&on.x, v);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..on.kept).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let ritz_values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(on.kept, on.kept);
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    Ok(VariationalSpectrum {
        symmetric: model.symmetric,
        ritz_values,
        ritz_vectors: vecs,
        condition_number: on.condition,
        kept: on.kept,
        pruned: on.kept < el.len(),
        x: on.x,
        basis,
    })
}

impl VariationalSpectrum {
    pub fn count_below(&self, z: f64) -> usize {
        self.ritz_values.iter().filter(|&&e| e < z).count()
    }
}

/// Ritz values of `H` below `z`: a lower bound on the number of eigenvalues below `z`.
pub fn variational_count(sys: &FaddeevSystem, z: f64, basis: &VariationalBasis) -> Result<VariationalCount> {
    ensure(z < 0.0 && z.abs() >= MIN_ABS_Z, || {
        format!("variational oracle needs z < 0 with |z| >= {MIN_ABS_Z}, got {z}")
    })?;
    let sp = variational_spectrum(sys, basis)?;
    Ok(VariationalCount {
        z,
        count: sp.count_below(z),
        basis_size: basis.size,
        kept: sp.kept,
        condition_number: sp.condition_number,
        pruned: sp.pruned,
        bound_ritz_values: sp.ritz_values.iter().copied().filter(|&e| e < 0.0).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentResidual {
    pub energy: f64,
    /// `‖u - Σ u_α‖ / ‖u‖`.
    pub sum_residual: f64,
    /// `max_α ‖u_α + R_α V_α (u_β + u_γ)‖ / ‖u‖`.
    pub coupled_residual: f64,
    /// Norms of the components relative to `‖u‖`, indexed by pair.
    pub component_norms: [f64; 3],
    /// Dimension of the space the resolvents act in.
    pub dimension: usize,
}

impl ComponentResidual {
    pub fn max(&self) -> f64 {
        self.sum_residual.max(self.coupled_residual)
    }
}

/// Eigenvalue shift allowed between the Ritz space and the enriched space.
const CONVERGENCE_TOL: f64 = 1e-3;
/// The permuted copies are nearly dependent; the embedded Ritz vector must
/// not lose weight to pruning.
const EXPANDED_PRUNE_RATIO: f64 = 1e-14;

/// Faddeev components of the Ritz pair `index` of `spectrum`.
///
/// Without `reference` the resolvents act in the Ritz space itself. With a
/// reference basis they act in the union of both bases, so the residual
/// measures how far `u` is from an eigenfunction of the larger space.
pub fn faddeev_component_residual(
    sys: &FaddeevSystem,
    spectrum: &VariationalSpectrum,
    index: usize,
    reference: Option<&VariationalBasis>,
) -> Result<ComponentResidual> {
    ensure(index < spectrum.ritz_values.len(), || {
        format!("eigenpair index {index} out of range ({} Ritz values)", spectrum.ritz_values.len())
    })?;
    let e = spectrum.ritz_values[index];
    ensure(e < 0.0, || format!("eigenpair {index} has Ritz value {e} >= 0: not a bound state"))?;
    let y = spectrum.ritz_vectors.column(index).into_owned();
    let c_basis = &spectrum.x * &y;
    let sym = Model::new(sys, spectrum.symmetric)?;
    let plain = Model::new(sys, false)?;
    let npairs = plain.pairs.len();
    let pair_slots: Vec<usize> = Pair::ALL
        .iter()
        .filter(|a| sys.channels[a.index()].potential.strength != 0.0)
        .map(|a| a.index())
        .collect();

    // Components are not permutation symmetric, so they live in the span of
    // the individual permuted Gaussians rather than the symmetrized ones.
    let (mut el, coeff) = sym.expand(&sym.elements(&spectrum.basis, spectrum.basis.seed), c_basis.as_slice());
    let mut c: Vec<f64> = coeff;
    if let Some(rb) = reference {
        rb.validate()?;
        let (extra, _) = sym.expand(&sym.elements(rb, rb.seed), &vec![0.0; rb.size]);
        c.extend(std::iter::repeat_n(0.0, extra.len()));
        el.extend(extra);
    }
    let m = plain.matrices(&el);
    let on = orthonormalize(&m.s, EXPANDED_PRUNE_RATIO);
    let c = DVector::from_vec(c);
    let embedded = on.x.transpose() * (&m.s * &c);
    let t = project(&on.x, &m.t);
    let v: Vec<DMatrix<f64>> = m.v.iter().map(|x| project(&on.x, x)).collect();
    let mut h = t.clone();
    v.iter().for_each(|x| h += x);
    let eig = SymmetricEigen::new(h);
    let unit = &embedded / embedded.norm();
    let (best, overlap) = (0..eig.eigenvalues.len())
        .map(|j| (j, eig.eigenvectors.column(j).dot(&unit).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::numerical("empty component space"))?;
    let shifted = eig.eigenvalues[best];
    ensure((shifted - e).abs() <= CONVERGENCE_TOL * e.abs() && overlap * overlap >= 1.0 - CONVERGENCE_TOL, || {
        format!(
            "Ritz value {e} maps to {shifted} (overlap {overlap:.6}) in the component space: eigenpair not converged"
        )
    })?;
    // Without a reference the pair is taken as converged in the permutation-
    // closed space; with one, the embedded vector itself is tested.
    let (u, e) = match reference {
        None => (eig.eigenvectors.column(best).into_owned(), shifted),
        Some(_) => (embedded, e),
    };
    let n = t.nrows();
    let unorm = u.norm();
    let r0 = (&t - DMatrix::identity(n, n) * e)
        .cholesky()
        .ok_or_else(|| Error::numerical("H0 - E is not positive definite"))?;
    let comps: Vec<DVector<f64>> = v.iter().map(|va| -r0.solve(&(va * &u))).collect();
    let mut sum = DVector::zeros(n);
    comps.iter().for_each(|c| sum += c);
    let sum_residual = (&u - &sum).norm() / unorm;
    // With a single interacting pair, E is an eigenvalue of H0 + V_a itself
    // and the coupled relation is void.
    let mut coupled = 0.0f64;
    for a in (0..npairs).filter(|_| npairs > 1) {
        let others: DVector<f64> = (0..npairs).filter(|&b| b != a).fold(DVector::zeros(n), |acc, b| acc + &comps[b]);
        let lhs = &t + &v[a] - DMatrix::identity(n, n) * e;
        let rhs = -(&v[a] * others);
        let sol = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::numerical("H0 + V_a - E is singular"))?;
        coupled = coupled.max((&comps[a] - sol).norm() / unorm);
    }
    let mut component_norms = [0.0; 3];
    for (k, &slot) in pair_slots.iter().enumerate() {
        component_norms[slot] = comps[k].norm() / unorm;
    }
    Ok(ComponentResidual {
        energy: e,
        sum_residual,
        coupled_residual: coupled,
        component_norms,
        dimension: n,
    })
}
