//! Integration by parts on `[0, 1]` against periodic test functions:
//! `−⟨f, g′⟩ = ∫₀¹ f′ ḡ − (f(1) − f(0)) ḡ(0)` when `g(0) = g(1)`.

use num_complex::Complex64;

use crate::error::{QuasiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPairing {
    /// `−⟨f, Sg⟩ = −∫ f ḡ′`.
    pub lhs: Complex64,
    /// `∫ f′ ḡ − (f(1) − f(0)) ḡ(0)`.
    pub rhs: Complex64,
    pub residual: f64,
}

/// Second-order differences: central inside, one-sided three-point at the ends.
fn derivative(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len() - 1;
    (0..=n)
        .map(|j| {
            if j == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
            } else if j == n {
                (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h)
            } else {
                (u[j + 1] - u[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn trapezoid(v: &[Complex64], h: f64) -> Complex64 {
    let n = v.len() - 1;
    let inner: Complex64 = v[1..n].iter().sum();
    (inner + (v[0] + v[n]) * 0.5) * h
}

/// Both sides of the pairing from samples at `x_j = j/N`, `j = 0..=N`.
pub fn boundary_pairing_check(n: usize, f: &[Complex64], g: &[Complex64]) -> Result<BoundaryPairing> {
    if n < 2 {
        return Err(QuasiError::Precondition(format!("N = {n} < 2")));
    }
    for (name, v) in [("f", f), ("g", g)] {
        if v.len() != n + 1 {
            return Err(QuasiError::Precondition(format!(
                "{name} has {} samples, expected N + 1 = {}",
                v.len(),
                n + 1
            )));
        }
    }
    let gscale = g.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if (g[0] - g[n]).norm() > 1e-12 * gscale {
        return Err(QuasiError::Precondition(format!(
            "g(0) = {} differs from g(1) = {}",
            g[0], g[n]
        )));
    }
    let h = 1.0 / n as f64;
    let df = derivative(f, h);
    // g is periodic, so its differences wrap around.
    let dg: Vec<Complex64> = (0..=n)
        .map(|j| {
            let next = if j == n { g[1] } else { g[j + 1] };
            let prev = if j == 0 { g[n - 1] } else { g[j - 1] };
            (next - prev) / (2.0 * h)
        })
        .collect();
    let left: Vec<Complex64> = f.iter().zip(&dg).map(|(a, b)| a * b.conj()).collect();
    let right: Vec<Complex64> = df.iter().zip(g).map(|(a, b)| a * b.conj()).collect();
    let lhs = -trapezoid(&left, h);
    let rhs = trapezoid(&right, h) - (f[n] - f[0]) * g[0].conj();
    Ok(BoundaryPairing {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// Samples of `u` at `x_j = j/N`, `j = 0..=N`.
pub fn closed_grid(n: usize, u: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    (0..=n).map(|j| u(j as f64 / n as f64)).collect()
}
