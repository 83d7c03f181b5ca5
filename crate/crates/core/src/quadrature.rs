//! Composite Simpson quadrature on possibly nonuniform grids.

use crate::error::{Error, Result};

/// Integral of the quadratic through `(x0, f0), (x1, f1), (x2, f2)` over `[lo, hi]`.
fn quadratic_panel(x: [f64; 3], f: [f64; 3], lo: f64, hi: f64) -> f64 {
    // Lagrange form centred on x1 to keep the moments well scaled.
    let t = [x[0] - x[1], 0.0, x[2] - x[1]];
    let (a, b) = (lo - x[1], hi - x[1]);
    let m1 = (b * b - a * a) / 2.0;
    let m2 = (b * b * b - a * a * a) / 3.0;
    let m0 = b - a;
    let mut total = 0.0;
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        // L_i(t) = (t − t_j)(t − t_k) / ((t_i − t_j)(t_i − t_k))
        let denom = (t[i] - t[j]) * (t[i] - t[k]);
        let integral = m2 - (t[j] + t[k]) * m1 + t[j] * t[k] * m0;
        total += f[i] * integral / denom;
    }
    total
}

/// `∫ f du` over the whole grid.
///
/// Pairs of intervals are integrated with the exact quadratic through their
/// three nodes; an odd trailing interval uses the quadratic through the last
/// three nodes.
pub fn simpson(u: &[f64], f: &[f64]) -> Result<f64> {
    if u.len() != f.len() {
        return Err(Error::GridMismatch);
    }
    let n = u.len();
    if n < 3 {
        return Err(Error::GridTooSmall { needed: 3, got: n });
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += quadratic_panel(
            [u[i], u[i + 1], u[i + 2]],
            [f[i], f[i + 1], f[i + 2]],
            u[i],
            u[i + 2],
        );
        i += 2;
    }
    if i + 1 < n {
        total += quadratic_panel(
            [u[n - 3], u[n - 2], u[n - 1]],
            [f[n - 3], f[n - 2], f[n - 1]],
            u[n - 2],
            u[n - 1],
        );
    }
    Ok(total)
}
