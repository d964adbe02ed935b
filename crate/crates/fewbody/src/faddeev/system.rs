use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::quadrature::{gauss_gegenbauer, gauss_legendre, log_momentum_grid, sphere_surface};
use crate::core::{PotentialSpec, RadialQuadrature, TwoBodyChannel};
use crate::error::{ensure, Result};
use crate::jacobi::{JacobiFrame, Pair};
use crate::specfun::{sphere_average_plane_wave, Psi1Convention};
use crate::twobody::{assemble_bs, extract_tau, find_critical_coupling, WExpansion, CRITICALITY_TOL};

/// Smallest accepted angular quadrature order.
pub const MIN_ANGULAR_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    /// Equal masses and potentials; the operator reduces to one block.
    #[default]
    IdenticalBosons,
    Distinct,
}

/// Discretization of the mixed coordinates `(|x_α|, |p_α|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FaddeevGrid {
    pub x_panels: usize,
    pub x_order: usize,
    /// Outer radius of the `x` rule; `None` uses the numerical support of the potentials.
    pub x_max: Option<f64>,
    pub p_points: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Gauss order in the cosine between `p_α` and `p_β`.
    pub angular_order: usize,
}

impl Default for FaddeevGrid {
    fn default() -> Self {
        Self {
            x_panels: 2,
            x_order: 12,
            x_max: None,
            p_points: 48,
            p_min: 1e-6,
            p_max: 12.0,
            angular_order: 24,
        }
    }
}

impl FaddeevGrid {
    /// Both radial rules doubled; the angular rule is kept.
    pub fn refined(&self) -> Self {
        Self {
            x_order: 2 * self.x_order,
            p_points: 2 * self.p_points,
            ..*self
        }
    }
}

/// Plane-wave averages and kinetic denominators of one ordered pair, cached
/// per system: `la[(i,j,c,a)] = Λ(|k_α| r_a)`, `lb[(i,j,c,b)] = Λ(|k_β| r_b)`,
/// `h0[(i,j,c)] = H⁰_{αβ}(p_i, p_j, c)`.
#[derive(Debug, Clone)]
pub(crate) struct PairCache {
    pub la: Vec<f64>,
    pub lb: Vec<f64>,
    pub h0: Vec<f64>,
    pub pref: f64,
}

/// Three pair channels in a common Jacobi frame, discretized on shared grids.
#[derive(Debug, Clone)]
pub struct FaddeevSystem {
    pub d: usize,
    pub frame: JacobiFrame,
    /// Channel of pair α (reduced mass `m_α`).
    pub channels: [TwoBodyChannel; 3],
    pub symmetry: Symmetry,
    pub grid: FaddeevGrid,
    pub x: RadialQuadrature,
    pub p: Vec<f64>,
    /// `dp` weights of the momentum rule.
    pub p_weights: Vec<f64>,
    pub cos_nodes: Vec<f64>,
    pub cos_weights: Vec<f64>,
    /// Expansion constants of resonant channels (d = 4), see [`FaddeevSystem::with_tau_constants`].
    pub tau: [Option<WExpansion>; 3],
    /// Couplings are this multiple of `λ*` on the current `x` grid (set by
    /// [`FaddeevSystem::identical_bosons`]); refinement re-derives `λ*`.
    pub critical_factor: Option<f64>,
    pub(crate) caches: Vec<Option<PairCache>>,
}

fn x_rule(d: usize, pots: &[PotentialSpec; 3], g: &FaddeevGrid) -> Result<RadialQuadrature> {
    let r_max = g.x_max.unwrap_or_else(|| {
        pots.iter()
            .filter(|p| p.strength > 0.0)
            .map(|p| match p.family {
                crate::core::PotentialFamily::FiniteSphericalWell => p.range,
                _ => p.support_radius(1e-16),
            })
            .fold(0.0, f64::max)
            .max(pots[0].range)
    });
    let mut kinks: Vec<f64> = pots.iter().flat_map(|p| p.kinks()).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    RadialQuadrature::uniform_with_breakpoints(d, r_max, g.x_panels, g.x_order, &kinks)
}

impl FaddeevSystem {
    pub fn new(
        masses: [f64; 3],
        potentials: [PotentialSpec; 3],
        d: usize,
        symmetry: Symmetry,
        grid: FaddeevGrid,
    ) -> Result<Self> {
        ensure(d == 3 || d == 4, || format!("three-body runs support d = 3 or 4, got {d}"))?;
        ensure(grid.angular_order >= MIN_ANGULAR_ORDER, || {
            format!("angular order must be >= {MIN_ANGULAR_ORDER}, got {}", grid.angular_order)
        })?;
        ensure(grid.p_points >= 4 && grid.p_min > 0.0 && grid.p_max > grid.p_min, || {
            "momentum grid needs p_points >= 4 and 0 < p_min < p_max".into()
        })?;
        ensure(grid.x_panels >= 1 && grid.x_order >= 2, || "x grid too small".into())?;
        let frame = JacobiFrame::new(masses)?;
        if symmetry == Symmetry::IdenticalBosons {
            ensure(
                masses.iter().all(|&m| m == masses[0]) && potentials.iter().all(|p| *p == potentials[0]),
                || "identical-boson mode needs equal masses and potentials".into(),
            )?;
        }
        let mut channels = Vec::new();
        for a in Pair::ALL {
            channels.push(TwoBodyChannel::s_wave(frame.m[a.index()], potentials[a.index()], d)?);
        }
        let x = x_rule(d, &potentials, &grid)?;
        let (p, p_weights) = log_momentum_grid(grid.p_min, grid.p_max, grid.p_points);
        let (cos_nodes, cos_weights) = if d == 3 {
            gauss_legendre(grid.angular_order)
        } else {
            gauss_gegenbauer(grid.angular_order, (d - 2) as u32)
        };
        let mut sys = Self {
            d,
            frame,
            channels: [channels[0], channels[1], channels[2]],
            symmetry,
            grid,
            x,
            p,
            p_weights,
            cos_nodes,
            cos_weights,
            tau: [None, None, None],
            critical_factor: None,
            caches: vec![None; 9],
        };
        let pairs: Vec<(usize, usize)> = match symmetry {
            Symmetry::IdenticalBosons => vec![(0, 1)],
            Symmetry::Distinct => vec![(0, 1), (0, 2), (1, 2)],
        };
        for (a, b) in pairs {
            let c = sys.build_cache(a, b);
            sys.caches[3 * a + b] = Some(c);
        }
        Ok(sys)
    }

    /// Three identical bosons of mass `mass`; the pair coupling is
    /// `factor · λ*` with `λ*` computed on this system's own `x` grid.
    pub fn identical_bosons(
        mass: f64,
        shape: PotentialSpec,
        d: usize,
        factor: f64,
        grid: FaddeevGrid,
    ) -> Result<Self> {
        let lam = critical_strength(mass, shape, d, &grid)?;
        let v = shape.with_strength(factor * lam)?;
        let mut s = Self::new([mass; 3], [v; 3], d, Symmetry::IdenticalBosons, grid)?;
        s.critical_factor = Some(factor);
        Ok(s)
    }

    /// Same system on the refined grid. Couplings tied to `λ*` follow the
    /// refined grid's own `λ*`; explicit couplings are kept.
    pub fn refined(&self) -> Result<Self> {
        self.regridded(self.grid.refined())
    }

    pub fn regridded(&self, grid: FaddeevGrid) -> Result<Self> {
        if let Some(f) = self.critical_factor {
            let shape = self.channels[0].potential;
            let mut s = Self::identical_bosons(self.frame.masses[0], shape, self.d, f, grid)?;
            if let Some(w) = self.tau.iter().flatten().next() {
                s = s.with_tau_constants(w.convention)?;
            }
            return Ok(s);
        }
        let pots = [
            self.channels[0].potential,
            self.channels[1].potential,
            self.channels[2].potential,
        ];
        let mut s = Self::new(self.frame.masses, pots, self.d, self.symmetry, grid)?;
        if self.tau.iter().any(Option::is_some) {
            let conv = self.tau.iter().flatten().next().unwrap().convention;
            s = s.with_tau_constants(conv)?;
        }
        Ok(s)
    }

    /// Attaches `τ_α` for every channel that is critical on the `x` grid (d = 4).
    pub fn with_tau_constants(mut self, convention: Psi1Convention) -> Result<Self> {
        if self.d != 4 {
            return Ok(self);
        }
        for a in 0..3 {
            if self.is_critical(a)? {
                // Rescale exactly onto the grid's critical coupling first.
                let ch = crate::twobody::critical_channel(&self.channels[a], &self.x)?;
                self.tau[a] = Some(extract_tau(&ch, &self.x, convention)?);
            }
        }
        Ok(self)
    }

    pub fn is_critical(&self, a: usize) -> Result<bool> {
        let ch = &self.channels[a];
        if ch.potential.strength == 0.0 {
            return Ok(false);
        }
        let mu = assemble_bs(ch, 0.0, &self.x)?.top_eigenvalue();
        Ok((mu - 1.0).abs() <= CRITICALITY_TOL)
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn np(&self) -> usize {
        self.p.len()
    }

    /// Size of one channel block.
    pub fn block_dim(&self) -> usize {
        self.nx() * self.np()
    }

    pub(crate) fn cache(&self, a: usize, b: usize) -> (&PairCache, bool) {
        let (lo, hi, transposed) = if a < b { (a, b, false) } else { (b, a, true) };
        let key = match self.symmetry {
            Symmetry::IdenticalBosons => 1,
            Symmetry::Distinct => 3 * lo + hi,
        };
        (self.caches[key].as_ref().expect("pair cache built"), transposed)
    }

    fn build_cache(&self, a: usize, b: usize) -> PairCache {
        let (np, nx, nc) = (self.np(), self.nx(), self.cos_nodes.len());
        let d = self.d;
        let (dab, eab) = (self.frame.d[a][b], self.frame.e[a][b]);
        let (dba, eba) = (self.frame.d[b][a], self.frame.e[b][a]);
        let [qa, qb, qc] = self.frame.quad[a][b];
        let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut la = Vec::with_capacity(np * nc * nx);
                let mut lb = Vec::with_capacity(np * nc * nx);
                let mut h0 = Vec::with_capacity(np * nc);
                let p = self.p[i];
                for j in 0..np {
                    let pp = self.p[j];
                    for &c in &self.cos_nodes {
                        let ka2 = dab * dab * p * p + 2.0 * dab * eab * p * pp * c + eab * eab * pp * pp;
                        let kb2 = dba * dba * pp * pp + 2.0 * dba * eba * p * pp * c + eba * eba * p * p;
                        let (ka, kb) = (ka2.max(0.0).sqrt(), kb2.max(0.0).sqrt());
                        h0.push(qa * p * p + qb * p * pp * c + qc * pp * pp);
                        for &r in &self.x.nodes {
                            la.push(sphere_average_plane_wave(d, ka * r));
                            lb.push(sphere_average_plane_wave(d, kb * r));
                        }
                    }
                }
                (la, lb, h0)
            })
            .collect();
        let mut cache = PairCache {
            la: Vec::with_capacity(np * np * nc * nx),
            lb: Vec::with_capacity(np * np * nc * nx),
            h0: Vec::with_capacity(np * np * nc),
            pref: (2.0 * std::f64::consts::PI).powi(-(d as i32))
                * eab.abs().powi(d as i32)
                * sphere_surface(d)
                * sphere_surface(d - 1),
        };
        for (la, lb, h0) in rows {
            cache.la.extend(la);
            cache.lb.extend(lb);
            cache.h0.extend(h0);
        }
        cache
    }
}

/// `λ*` of the pair channel (reduced mass `mass/2`) on the `x` grid of `grid`.
pub fn critical_strength(mass: f64, shape: PotentialSpec, d: usize, grid: &FaddeevGrid) -> Result<f64> {
    let unit = shape.with_strength(1.0)?;
    let x = x_rule(d, &[unit; 3], grid)?;
    let ch = TwoBodyChannel::s_wave(0.5 * mass, unit, d)?;
    find_critical_coupling(&ch, &x)
}
