//! Polynomial extrapolation to zero and composite Simpson quadrature.

use num_complex::Complex64;

use crate::linalg::{CVector, KahanSum};

/// Value at `h = 0` of the interpolating polynomial through `(nodes[i], values[i])`.
pub fn neville_at_zero(nodes: &[f64], values: &[Complex64]) -> Complex64 {
    assert_eq!(nodes.len(), values.len());
    let mut p: Vec<Complex64> = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (hi, hj) = (nodes[i], nodes[i + m]);
            p[i] = (p[i + 1] * hi - p[i] * hj) / (hi - hj);
        }
    }
    p[0]
}

/// Composite Simpson rule for a vector-valued integrand on `[a, b]` with at
/// most `step` spacing (the panel count is rounded up to an even number).
pub fn simpson<F>(a: f64, b: f64, step: f64, dim: usize, mut f: F) -> CVector
where
    F: FnMut(f64) -> CVector,
{
    if b == a {
        return CVector::zeros(dim);
    }
    let mut n = ((b - a).abs() / step).ceil() as usize;
    n = n.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let mut acc = KahanSum::new(dim);
    for k in 0..=n {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(&(f(a + k as f64 * h) * Complex64::new(w * h / 3.0, 0.0)));
    }
    acc.into_value()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_quadratic_limit() {
        let f = |h: f64| Complex64::new(3.0 + 2.0 * h - 5.0 * h * h, h);
        let nodes = [0.5, 0.25, 0.125];
        let vals: Vec<Complex64> = nodes.iter().map(|h| f(*h)).collect();
        let v = neville_at_zero(&nodes, &vals);
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(0.0, 2.0, 0.5, 1, |t| {
            CVector::from_element(1, Complex64::new(t * t * t - t, 0.0))
        });
        assert!((v[0].re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [64.0, 128.0, 256.0];
        let y: Vec<f64> = x.iter().map(|n: &f64| 3.0 * n.powf(-2.0)).collect();
        assert!((log_log_slope(&x, &y) + 2.0).abs() < 1e-12);
    }
}
