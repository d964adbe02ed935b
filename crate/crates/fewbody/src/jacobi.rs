//! Jacobi momenta of three particles, reduced masses, the cross coefficients
//! `k_α = d_{αβ} p_α + e_{αβ} p_β`, and the kinetic form in every coordinate pair.
//!
//! Cross coefficients and the quadratic-form constants are obtained by solving
//! the linear relations between momenta, not transcribed.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Pair channel label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    P12,
    P23,
    P31,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P23, Pair::P31];

    pub fn index(self) -> usize {
        match self {
            Pair::P12 => 0,
            Pair::P23 => 1,
            Pair::P31 => 2,
        }
    }

    pub fn from_index(i: usize) -> Pair {
        Pair::ALL[i % 3]
    }

    /// Particle indices `(i, j, spectator)` with zero-based labels.
    pub fn particles(self) -> (usize, usize, usize) {
        match self {
            Pair::P12 => (0, 1, 2),
            Pair::P23 => (1, 2, 0),
            Pair::P31 => (2, 0, 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::P12 => "12",
            Pair::P23 => "23",
            Pair::P31 => "31",
        }
    }
}

/// Mass data and derived coefficients for one choice of particle masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiFrame {
    pub masses: [f64; 3],
    /// Pair reduced masses `m_α`, indexed by [`Pair::index`].
    pub m: [f64; 3],
    /// Spectator reduced masses `n_α`.
    pub n: [f64; 3],
    /// `d[α][β]`, `e[α][β]` for `α ≠ β` (diagonal entries unused, zero).
    pub d: [[f64; 3]; 3],
    pub e: [[f64; 3]; 3],
    /// Kinetic form `H⁰_{αβ} = a p_α² + b ⟨p_α,p_β⟩ + c p_β²`, stored as `[a, b, c]`.
    pub quad: [[[f64; 3]; 3]; 3],
}

/// The six Jacobi momenta of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMomenta {
    /// `k[α]`: relative momentum of pair α.
    pub k: [Vec<f64>; 3],
    /// `p[α]`: momentum conjugate to the spectator coordinate of pair α.
    pub p: [Vec<f64>; 3],
}

impl JacobiFrame {
    pub fn new(masses: [f64; 3]) -> Result<Self> {
        ensure(masses.iter().all(|m| m.is_finite() && *m > 0.0), || {
            format!("particle masses must be positive, got {masses:?}")
        })?;
        let total: f64 = masses.iter().sum();
        let mut m = [0.0; 3];
        let mut n = [0.0; 3];
        for a in Pair::ALL {
            let (i, j, s) = a.particles();
            m[a.index()] = masses[i] * masses[j] / (masses[i] + masses[j]);
            n[a.index()] = masses[s] * (masses[i] + masses[j]) / total;
        }
        let mut frame = Self {
            masses,
            m,
            n,
            d: [[0.0; 3]; 3],
            e: [[0.0; 3]; 3],
            quad: [[[0.0; 3]; 3]; 3],
        };
        // Two independent scalar configurations with k1 + k2 + k3 = 0 span the sector.
        let cfg_a = frame.scalar_momenta([1.0, 0.0, -1.0]);
        let cfg_b = frame.scalar_momenta([0.0, 1.0, -1.0]);
        for a in Pair::ALL {
            for b in Pair::ALL {
                if a == b {
                    continue;
                }
                let (ia, ib) = (a.index(), b.index());
                // [p_α p_β] [d e]ᵀ = k_α in both configurations
                let (a11, a12, r1) = (cfg_a.1[ia], cfg_a.1[ib], cfg_a.0[ia]);
                let (a21, a22, r2) = (cfg_b.1[ia], cfg_b.1[ib], cfg_b.0[ia]);
                let det = a11 * a22 - a12 * a21;
                if det.abs() < 1e-14 {
                    return Err(Error::numerical("degenerate Jacobi linear system"));
                }
                let d = (r1 * a22 - a12 * r2) / det;
                let e = (a11 * r2 - a21 * r1) / det;
                frame.d[ia][ib] = d;
                frame.e[ia][ib] = e;
                // H⁰ = k_α²/2m_α + p_α²/2n_α with k_α = d p_α + e p_β
                frame.quad[ia][ib] = [
                    d * d / (2.0 * m[ia]) + 1.0 / (2.0 * n[ia]),
                    d * e / m[ia],
                    e * e / (2.0 * m[ia]),
                ];
            }
        }
        Ok(frame)
    }

    pub fn equal(mass: f64) -> Result<Self> {
        Self::new([mass; 3])
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `(k_α, p_α)` for scalar single-component momenta.
    fn scalar_momenta(&self, k: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let mm = self.masses;
        let total = self.total_mass();
        let mut ka = [0.0; 3];
        let mut pa = [0.0; 3];
        for a in Pair::ALL {
            let (i, j, s) = a.particles();
            ka[a.index()] = (mm[j] * k[i] - mm[i] * k[j]) / (mm[i] + mm[j]);
            pa[a.index()] = (mm[s] * (k[i] + k[j]) - (mm[i] + mm[j]) * k[s]) / total;
        }
        (ka, pa)
    }

    /// Kinetic cross-term mass `l_γ = 1/b` of the pair `(α, β)`.
    pub fn cross_mass(&self, a: Pair, b: Pair) -> f64 {
        1.0 / self.quad[a.index()][b.index()][1]
    }

    /// Constants `(l_α, l_β)` with `H⁰_{αβ} ≥ p_α²/2l_α + p_β²/2l_β`, from the
    /// balanced split `|b||p_α||p_β| ≤ (|b|/2)(t p_α² + p_β²/t)`, `t = sqrt(a/c)`.
    pub fn separated_constants(&self, a: Pair, b: Pair) -> (f64, f64) {
        let [qa, qb, qc] = self.quad[a.index()][b.index()];
        let t = (qa / qc).sqrt();
        let ca = qa - 0.5 * qb.abs() * t;
        let cc = qc - 0.5 * qb.abs() / t;
        (1.0 / (2.0 * ca), 1.0 / (2.0 * cc))
    }

    /// Constant `c` in `H⁰_{αβ} ≥ c |p_α| |p_β|` (exponents κ = κ' = 1/2).
    pub fn product_bound_constant(&self, a: Pair, b: Pair) -> f64 {
        let (la, lb) = self.separated_constants(a, b);
        2.0 * (1.0 / (4.0 * la * lb)).sqrt()
    }
}

fn check_dims(vs: &[&[f64]]) -> Result<usize> {
    let dim = vs[0].len();
    ensure(dim > 0 && vs.iter().all(|v| v.len() == dim), || {
        "momentum vectors must share one nonzero dimension".into()
    })?;
    Ok(dim)
}

/// All six Jacobi momenta from particle momenta with zero total.
pub fn conjugate_momenta(
    k1: &[f64],
    k2: &[f64],
    k3: &[f64],
    frame: &JacobiFrame,
) -> Result<JacobiMomenta> {
    let dim = check_dims(&[k1, k2, k3])?;
    let scale = k1
        .iter()
        .chain(k2)
        .chain(k3)
        .fold(1.0f64, |s, x| s.max(x.abs()));
    for c in 0..dim {
        let tot = k1[c] + k2[c] + k3[c];
        ensure(tot.abs() <= 1e-10 * scale, || {
            format!("total momentum must vanish (component {c} sums to {tot})")
        })?;
    }
    let mut k: [Vec<f64>; 3] = Default::default();
    let mut p: [Vec<f64>; 3] = Default::default();
    for a in 0..3 {
        k[a] = vec![0.0; dim];
        p[a] = vec![0.0; dim];
    }
    for c in 0..dim {
        let (ka, pa) = frame.scalar_momenta([k1[c], k2[c], k3[c]]);
        for a in 0..3 {
            k[a][c] = ka[a];
            p[a][c] = pa[a];
        }
    }
    Ok(JacobiMomenta { k, p })
}

/// `H⁰_{αβ}(p_α, p_β) = p_α²/2m_β + ⟨p_α,p_β⟩/l_γ + p_β²/2m_α`.
pub fn kinetic_form(p_a: &[f64], p_b: &[f64], frame: &JacobiFrame, a: Pair, b: Pair) -> Result<f64> {
    check_dims(&[p_a, p_b])?;
    ensure(a != b, || "kinetic_form needs two distinct pairs".into())?;
    let [qa, qb, qc] = frame.quad[a.index()][b.index()];
    let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in p_a.iter().zip(p_b) {
        aa += x * x;
        ab += x * y;
        bb += y * y;
    }
    Ok(qa * aa + qb * ab + qc * bb)
}

/// `H⁰ = k_α²/2m_α + p_α²/2n_α` from one `(k, p)` pair.
pub fn kinetic_from_kp(k: &[f64], p: &[f64], frame: &JacobiFrame, a: Pair) -> f64 {
    let i = a.index();
    let k2: f64 = k.iter().map(|x| x * x).sum();
    let p2: f64 = p.iter().map(|x| x * x).sum();
    k2 / (2.0 * frame.m[i]) + p2 / (2.0 * frame.n[i])
}

/// `k_α` rebuilt from `(p_α, p_β)` with the derived coefficients.
pub fn reconstruct_k(p_a: &[f64], p_b: &[f64], frame: &JacobiFrame, a: Pair, b: Pair) -> Vec<f64> {
    let (d, e) = (frame.d[a.index()][b.index()], frame.e[a.index()][b.index()]);
    p_a.iter().zip(p_b).map(|(x, y)| d * x + e * y).collect()
}

/// Worst relative disagreements found by [`identity_check`].
#[derive(Debug, Clone, Serialize)]
pub struct JacobiCheck {
    pub samples: usize,
    pub dimension: usize,
    /// `H⁰` from each `(k_α, p_α)` against the particle-momentum value.
    pub kinetic_kp: f64,
    /// `H⁰` from each `(p_α, p_β)` against the particle-momentum value.
    pub kinetic_pp: f64,
    /// `k_α` rebuilt from `(p_α, p_β)`, relative to the momentum scale.
    pub reconstruction: f64,
}

impl JacobiCheck {
    pub fn max(&self) -> f64 {
        self.kinetic_kp.max(self.kinetic_pp).max(self.reconstruction)
    }
}

/// Evaluates `H⁰` three ways on random momentum triples with zero total and
/// reports the worst relative deviation of each route.
pub fn identity_check(frame: &JacobiFrame, samples: usize, dimension: usize, seed: u64) -> Result<JacobiCheck> {
    use rand::{Rng, SeedableRng};
    ensure(samples >= 1 && dimension >= 1, || "need at least one sample and one dimension".into())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = JacobiCheck {
        samples,
        dimension,
        kinetic_kp: 0.0,
        kinetic_pp: 0.0,
        reconstruction: 0.0,
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..samples {
        let k1: Vec<f64> = (0..dimension).map(|_| rng.random_range(-10.0..10.0)).collect();
        let k2: Vec<f64> = (0..dimension).map(|_| rng.random_range(-10.0..10.0)).collect();
        let k3: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| -a - b).collect();
        let direct: f64 = [&k1, &k2, &k3]
            .iter()
            .zip(frame.masses)
            .map(|(k, m)| k.iter().map(|x| x * x).sum::<f64>() / (2.0 * m))
            .sum();
        let scale = k1.iter().chain(&k2).chain(&k3).fold(0.0f64, |s, x| s.max(x.abs()));
        let j = conjugate_momenta(&k1, &k2, &k3, frame)?;
        for a in Pair::ALL {
            let ia = a.index();
            out.kinetic_kp = out.kinetic_kp.max(rel(kinetic_from_kp(&j.k[ia], &j.p[ia], frame, a), direct));
            for b in Pair::ALL.into_iter().filter(|&b| b != a) {
                let ib = b.index();
                out.kinetic_pp = out.kinetic_pp.max(rel(kinetic_form(&j.p[ia], &j.p[ib], frame, a, b)?, direct));
                let k = reconstruct_k(&j.p[ia], &j.p[ib], frame, a, b);
                let err = k.iter().zip(&j.k[ia]).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
                out.reconstruction = out.reconstruction.max(err / scale);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn equal_mass_example() {
        let f = JacobiFrame::equal(1.0).unwrap();
        let j = conjugate_momenta(&[1.0, 0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0, 0.0], &[0.0; 4], &f).unwrap();
        assert_eq!(j.k[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert!(j.p[0].iter().all(|&x| x == 0.0));
        // k12 = (1/2) p12 + p31
        assert!((f.d[0][2] - 0.5).abs() < 1e-15);
        assert!((f.e[0][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_momenta() {
        let f = JacobiFrame::new([1.0, 2.0, 3.0]).unwrap();
        let j = conjugate_momenta(&[0.0; 3], &[0.0; 3], &[0.0; 3], &f).unwrap();
        assert!(j.k.iter().chain(j.p.iter()).all(|v| v.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn swap_equal_masses() {
        let f = JacobiFrame::new([1.5, 1.5, 0.7]).unwrap();
        let a = conjugate_momenta(&[0.3, -1.0], &[0.9, 0.4], &[-1.2, 0.6], &f).unwrap();
        let b = conjugate_momenta(&[0.9, 0.4], &[0.3, -1.0], &[-1.2, 0.6], &f).unwrap();
        for c in 0..2 {
            assert!((a.k[0][c] + b.k[0][c]).abs() < 1e-15);
            assert!((a.p[0][c] - b.p[0][c]).abs() < 1e-15);
        }
    }

    #[test]
    fn nonzero_total_rejected() {
        let f = JacobiFrame::equal(1.0).unwrap();
        assert!(conjugate_momenta(&[1.0], &[0.0], &[0.0], &f).is_err());
        assert!(JacobiFrame::new([1.0, -1.0, 1.0]).is_err());
        assert!(kinetic_form(&[1.0, 0.0], &[1.0], &f, Pair::P12, Pair::P23).is_err());
    }

    #[test]
    fn reduced_masses() {
        let f = JacobiFrame::new([1.0, 2.0, 3.0]).unwrap();
        assert!((f.m[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.n[0] - 3.0 * 3.0 / 6.0).abs() < 1e-15);
        assert!((f.m[1] - 6.0 / 5.0).abs() < 1e-15);
        assert!((f.n[1] - 5.0 / 6.0).abs() < 1e-15);
        assert!((f.n[2] - 2.0 * 4.0 / 6.0).abs() < 1e-15);
    }

    /// Appendix-style closed forms, with the denominators that the linear solve
    /// actually produces: `k23 = p12 + m3/(m2+m3) p23`,
    /// `k31 = -p12 - m3/(m3+m1) p31 = p23 + m1/(m3+m1) p31`.
    #[test]
    fn closed_forms_and_denominator_typos() {
        let [m1, m2, m3] = [1.0, 2.0, 3.0];
        let f = JacobiFrame::new([m1, m2, m3]).unwrap();
        let (p12, p23, p31) = (0, 1, 2);
        assert!(rel(f.d[p12][p23], -m1 / (m1 + m2)) < 1e-14 && f.e[p12][p23] == -1.0);
        assert!(rel(f.d[p12][p31], m2 / (m1 + m2)) < 1e-14 && rel(f.e[p12][p31], 1.0) < 1e-14);
        assert!(rel(f.d[p23][p31], -m2 / (m2 + m3)) < 1e-14);
        assert!(rel(f.d[p23][p12], m3 / (m2 + m3)) < 1e-14);
        assert!(rel(f.d[p31][p12], -m3 / (m3 + m1)) < 1e-14);
        assert!(rel(f.d[p31][p23], m1 / (m3 + m1)) < 1e-14);
        // the printed m1+m2 denominators disagree for unequal masses
        assert!(rel(f.d[p23][p12], m3 / (m1 + m2)) > 0.1);
        assert!(rel(f.d[p31][p12], -m3 / (m1 + m2)) > 0.1);
        assert!(rel(f.d[p31][p23], m1 / (m1 + m2)) > 0.1);
        // printed "m2+m2+m3" spectator denominators disagree as well
        assert!(rel(f.n[1], m1 * (m2 + m3) / (m2 + m2 + m3)) > 0.1);
        assert!(rel(f.n[2], m2 * (m3 + m1) / (m2 + m2 + m3)) > 0.1);
    }

    #[test]
    fn kinetic_form_structure() {
        let f = JacobiFrame::new([1.0, 2.0, 3.0]).unwrap();
        for a in Pair::ALL {
            for b in Pair::ALL {
                if a == b {
                    continue;
                }
                let [qa, _, qc] = f.quad[a.index()][b.index()];
                assert!(rel(qa, 1.0 / (2.0 * f.m[b.index()])) < 1e-14);
                assert!(rel(qc, 1.0 / (2.0 * f.m[a.index()])) < 1e-14);
                let l = f.cross_mass(a, b);
                assert!(f.masses.iter().any(|&m| rel(m, l) < 1e-14), "l = {l}");
                let v = kinetic_form(&[1.3, -0.2], &[0.0, 0.0], &f, a, b).unwrap();
                assert!(rel(v, 1.73 / (2.0 * f.m[b.index()])) < 1e-14);
            }
        }
        // shared particle 2 for the pair (12, 23)
        assert!(rel(f.cross_mass(Pair::P12, Pair::P23), 2.0) < 1e-14);
    }

    fn triple(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-10.0f64..10.0, dim),
            proptest::collection::vec(-10.0f64..10.0, dim),
        )
    }

    proptest! {
        #[test]
        fn identities_hold_for_random_triples(
            masses in proptest::array::uniform3(0.1f64..10.0),
            (k1, k2) in triple(4),
        ) {
            let f = JacobiFrame::new(masses).unwrap();
            let k3: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| -a - b).collect();
            let j = conjugate_momenta(&k1, &k2, &k3, &f).unwrap();
            let h_ref = kinetic_from_kp(&j.k[0], &j.p[0], &f, Pair::P12);
            for a in Pair::ALL {
                let h = kinetic_from_kp(&j.k[a.index()], &j.p[a.index()], &f, a);
                prop_assert!(rel(h, h_ref) < 1e-12);
                for b in Pair::ALL {
                    if a == b { continue; }
                    let hab = kinetic_form(&j.p[a.index()], &j.p[b.index()], &f, a, b).unwrap();
                    prop_assert!(rel(hab, h_ref) < 1e-12);
                    let k = reconstruct_k(&j.p[a.index()], &j.p[b.index()], &f, a, b);
                    for c in 0..4 {
                        prop_assert!((k[c] - j.k[a.index()][c]).abs() < 1e-12 * (1.0 + k[c].abs()));
                    }
                }
            }
        }

        #[test]
        fn lower_bounds_hold(
            masses in proptest::array::uniform3(0.1f64..10.0),
            (pa, pb) in triple(3),
        ) {
            let f = JacobiFrame::new(masses).unwrap();
            let na = pa.iter().map(|x| x * x).sum::<f64>();
            let nb = pb.iter().map(|x| x * x).sum::<f64>();
            for a in Pair::ALL {
                for b in Pair::ALL {
                    if a == b { continue; }
                    let h = kinetic_form(&pa, &pb, &f, a, b).unwrap();
                    let (la, lb) = f.separated_constants(a, b);
                    prop_assert!(la > 0.0 && lb > 0.0);
                    let sep = na / (2.0 * la) + nb / (2.0 * lb);
                    prop_assert!(h >= sep * (1.0 - 1e-12));
                    let c = f.product_bound_constant(a, b);
                    prop_assert!(h >= c * (na * nb).sqrt() * (1.0 - 1e-12));
                    if na + nb > 0.0 { prop_assert!(h > 0.0); }
                }
            }
        }

        #[test]
        fn permutation_equivariance(masses in proptest::array::uniform3(0.1f64..10.0)) {
            let f = JacobiFrame::new(masses).unwrap();
            let g = JacobiFrame::new([masses[1], masses[2], masses[0]]).unwrap();
            // relabel 1->3, 2->1, 3->2: pair 12 of g is pair 23 of f, etc.
            for a in 0..3 {
                prop_assert!(rel(g.m[a], f.m[(a + 1) % 3]) < 1e-14);
                prop_assert!(rel(g.n[a], f.n[(a + 1) % 3]) < 1e-14);
            }
        }
    }
}
