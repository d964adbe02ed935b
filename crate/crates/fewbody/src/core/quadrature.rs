use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{ensure, Result};

/// Nodes per panel used by [`build_radial_quadrature`].
pub const PANEL_ORDER: usize = 16;

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (t * p1 - p0) / (t * t - 1.0))
}

/// Gauss rule for the weight `(1-x²)^{λ-1/2}` on `[-1,1]` (Gegenbauer), via the
/// Golub-Welsch eigenproblem. `two_lambda` is `2λ` so half-integers are exact.
pub fn gauss_gegenbauer(n: usize, two_lambda: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && two_lambda >= 1);
    let lam = two_lambda as f64 / 2.0;
    if two_lambda == 2 {
        // Chebyshev of the second kind: closed form.
        let mut x = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for k in (1..=n).rev() {
            let th = k as f64 * PI / (n as f64 + 1.0);
            x.push(th.cos());
            w.push(PI / (n as f64 + 1.0) * th.sin().powi(2));
        }
        return (x, w);
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = (kf * (kf + 2.0 * lam - 1.0) / (4.0 * (kf + lam) * (kf + lam - 1.0))).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let mu0 = PI.sqrt() * gamma_half(two_lambda + 1) / gamma_half(two_lambda + 2);
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver asymmetry
    let mut x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut w: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..n / 2 {
        let xm = 0.5 * (x[n - 1 - i] - x[i]);
        let wm = 0.5 * (w[n - 1 - i] + w[i]);
        x[i] = -xm;
        x[n - 1 - i] = xm;
        w[i] = wm;
        w[n - 1 - i] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half(two_x: u32) -> f64 {
    assert!(two_x >= 1);
    if two_x % 2 == 0 {
        (1..two_x / 2).fold(1.0, |acc, j| acc * j as f64)
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while ((2.0 * x) as u32) < two_x {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Surface area of the unit sphere in `R^d`: `w_d = 2π^{d/2}/Γ(d/2)`.
pub fn sphere_surface(d: usize) -> f64 {
    assert!(d >= 1);
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

/// One Gauss-Legendre panel `[a, b]` holding nodes `start..start+len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub start: usize,
    pub len: usize,
}

impl Panel {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Composite Gauss-Legendre rule on `(0, r_max]` for radial functions in `R^d`.
///
/// `h` are the plain length weights; `weights` fold in the surface factor
/// `w_d r^{d-1}` so that `Σ weights_i f(r_i) ≈ ∫_{|x|<r_max} f(|x|) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialQuadrature {
    pub d: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub h: Vec<f64>,
    pub surface: f64,
    pub panels: Vec<Panel>,
}

/// `n ≥ 16` nodes on `(0, r_max]`, split into panels of about [`PANEL_ORDER`] nodes.
pub fn build_radial_quadrature(d: usize, r_max: f64, n: usize) -> Result<RadialQuadrature> {
    ensure(n >= PANEL_ORDER, || {
        format!("radial quadrature needs n >= {PANEL_ORDER} nodes, got {n}")
    })?;
    let np = n / PANEL_ORDER;
    let edges: Vec<f64> = (0..=np).map(|k| r_max * k as f64 / np as f64).collect();
    let orders: Vec<usize> = (0..np)
        .map(|k| n / np + usize::from(k < n % np))
        .collect();
    RadialQuadrature::from_panels(d, &edges, &orders)
}

impl RadialQuadrature {
    /// Panels between consecutive `edges`, each of the given Gauss order.
    pub fn from_panels(d: usize, edges: &[f64], orders: &[usize]) -> Result<Self> {
        ensure(d >= 3, || format!("dimension must be >= 3, got {d}"))?;
        ensure(edges.len() >= 2 && orders.len() == edges.len() - 1, || {
            "panel edges and orders are inconsistent".to_string()
        })?;
        ensure(edges[0] == 0.0, || "first panel must start at r = 0".into())?;
        ensure(edges.windows(2).all(|e| e[1] > e[0]), || {
            "panel edges must be strictly increasing".into()
        })?;
        ensure(orders.iter().all(|&q| q >= 2), || "panel order must be >= 2".into())?;
        let surface = sphere_surface(d);
        let mut nodes = Vec::new();
        let mut h = Vec::new();
        let mut panels = Vec::new();
        for (k, &q) in orders.iter().enumerate() {
            let (a, b) = (edges[k], edges[k + 1]);
            let (x, w) = gauss_legendre(q);
            panels.push(Panel {
                a,
                b,
                start: nodes.len(),
                len: q,
            });
            for i in 0..q {
                nodes.push(0.5 * (b - a) * x[i] + 0.5 * (a + b));
                h.push(0.5 * (b - a) * w[i]);
            }
        }
        let weights = nodes
            .iter()
            .zip(&h)
            .map(|(&r, &hw)| surface * r.powi(d as i32 - 1) * hw)
            .collect();
        Ok(Self {
            d,
            nodes,
            weights,
            h,
            surface,
            panels,
        })
    }

    /// Uniform panels on `[0, r_max]` with extra breakpoints (e.g. a well edge).
    pub fn uniform_with_breakpoints(
        d: usize,
        r_max: f64,
        num_panels: usize,
        order: usize,
        breakpoints: &[f64],
    ) -> Result<Self> {
        ensure(num_panels >= 1, || "need at least one panel".into())?;
        let mut edges: Vec<f64> = (0..=num_panels)
            .map(|k| r_max * k as f64 / num_panels as f64)
            .collect();
        for &bp in breakpoints {
            if bp > 0.0 && bp < r_max && edges.iter().all(|e| (e - bp).abs() > 1e-9 * r_max) {
                edges.push(bp);
            }
        }
        edges.sort_by(f64::total_cmp);
        let orders = vec![order; edges.len() - 1];
        Self::from_panels(d, &edges, &orders)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.panels.last().map(|p| p.b).unwrap_or(0.0)
    }

    /// Same panel layout with every panel order doubled.
    pub fn refined(&self) -> Self {
        let mut edges: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        edges.push(self.r_max());
        let orders: Vec<usize> = self.panels.iter().map(|p| 2 * p.len).collect();
        Self::from_panels(self.d, &edges, &orders).expect("refinement of a valid rule")
    }

    /// `∫ f(|x|) dx` over the ball of radius `r_max`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }

    /// Index of the panel containing `r` (closed on the right).
    pub fn panel_of(&self, r: f64) -> Option<usize> {
        self.panels.iter().position(|p| r >= p.a && r <= p.b)
    }
}

/// Gauss-Legendre rule in `ln p` on `[p_min, p_max]`; returns nodes and `dp` weights.
pub fn log_momentum_grid(p_min: f64, p_max: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (a, b) = (p_min.ln(), p_max.ln());
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let t = 0.5 * (b - a) * x[i] + 0.5 * (a + b);
        let pi = t.exp();
        p.push(pi);
        q.push(0.5 * (b - a) * w[i] * pi);
    }
    (p, q)
}

/// Lagrange basis values `L_j(t)` of the panel nodes `xs` at point `t`.
pub fn lagrange_basis(xs: &[f64], t: f64, out: &mut [f64]) {
    let q = xs.len();
    for j in 0..q {
        let mut l = 1.0;
        for i in 0..q {
            if i != j {
                l *= (t - xs[i]) / (xs[j] - xs[i]);
            }
        }
        out[j] = l;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33, 64] {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k} s={s}");
            }
        }
    }

    #[test]
    fn gegenbauer_moments() {
        // ∫ x² (1-x²)^{λ-1/2} dx for λ = 1/2, 1, 3/2: 2/3, π/8, 4/15
        for (two_l, exact) in [(1, 2.0 / 3.0), (2, PI / 8.0), (3, 4.0 / 15.0)] {
            let (x, w) = gauss_gegenbauer(12, two_l);
            let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
            assert!((s - exact).abs() < 1e-13, "2λ={two_l}: {s}");
        }
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(8), 6.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sphere_surface_recursion() {
        assert!((sphere_surface(4) - 2.0 * PI * PI).abs() < 1e-14);
        for d in [5usize, 6] {
            let rec = 2.0 * PI * sphere_surface(d - 2) / (d as f64 - 2.0);
            assert!((sphere_surface(d) - rec).abs() < 1e-12 * rec);
        }
    }

    #[test]
    fn ball_volumes() {
        let q4 = build_radial_quadrature(4, 1.0, 16).unwrap();
        let v4 = q4.integrate(|_| 1.0);
        assert!((v4 - PI * PI / 2.0).abs() < 1e-8 * v4);
        assert!((v4 - 4.934802).abs() < 1e-6);
        let q3 = build_radial_quadrature(3, 1.0, 16).unwrap();
        assert!((q3.integrate(|_| 1.0) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(build_radial_quadrature(4, 1.0, 15).is_err());
    }

    #[test]
    fn uneven_node_counts_allowed() {
        let q = build_radial_quadrature(3, 2.0, 37).unwrap();
        assert_eq!(q.len(), 37);
        assert!(q.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn log_grid_integrates_power() {
        let (p, q) = log_momentum_grid(1e-3, 10.0, 40);
        let s: f64 = p.iter().zip(&q).map(|(pi, qi)| qi * pi * pi).sum();
        let exact = (1000.0 - 1e-9) / 3.0;
        assert!((s - exact).abs() < 1e-10 * exact);
    }
}
