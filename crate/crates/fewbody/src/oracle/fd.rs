//! Dense three-point finite differences for `u = r^{(d-1)/2} f` on `(0, R)`
//! with Dirichlet ends, Richardson-extrapolated in `h²`.

use crate::core::TwoBodyChannel;
use crate::error::{ensure, Result};

/// Eigenvalues of the symmetric tridiagonal matrix below `x` (Sturm count).
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        q = if i == 0 { a - x } else { a - x - off * off / q };
        if q == 0.0 {
            q = f64::EPSILON * (a.abs() + x.abs()).max(1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_eigenvalue(ch: &TwoBodyChannel, r_max: f64, n: usize) -> f64 {
    let h = r_max / (n + 1) as f64;
    let d = ch.d as f64;
    let l = ch.l as f64;
    let cent = (l + (d - 3.0) / 2.0) * (l + (d - 1.0) / 2.0);
    let kin = 1.0 / (2.0 * ch.mass * h * h);
    let diag: Vec<f64> = (1..=n)
        .map(|i| {
            let r = i as f64 * h;
            2.0 * kin + ch.potential.value(r) + cent / (2.0 * ch.mass * r * r)
        })
        .collect();
    let off = -kin;
    // Gershgorin interval.
    let mut lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * kin;
    let mut hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * kin;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest eigenvalue from grids of `n`, `2n+1` and `4n+3` interior points,
/// extrapolated twice assuming an `h², h⁴` error series.
pub fn fd_ground_state(ch: &TwoBodyChannel, r_max: f64, n: usize) -> Result<f64> {
    ensure(n >= 16, || format!("finite-difference grid needs >= 16 points, got {n}"))?;
    ensure(r_max > 0.0, || format!("r_max must be > 0, got {r_max}"))?;
    let e1 = lowest_eigenvalue(ch, r_max, n);
    let e2 = lowest_eigenvalue(ch, r_max, 2 * n + 1);
    let e3 = lowest_eigenvalue(ch, r_max, 4 * n + 3);
    let r12 = (4.0 * e2 - e1) / 3.0;
    let r23 = (4.0 * e3 - e2) / 3.0;
    Ok((16.0 * r23 - r12) / 15.0)
}
