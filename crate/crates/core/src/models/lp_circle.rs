//! Grid functions on the periodic unit interval with the quadrature `L^p`
//! norm, pointwise products, and the translation group.
//!
//! Nodes are `x_j = j/N`. Fourier modes `k` with `|k| < N/2` carry the
//! derivative `2πik`; the Nyquist mode is frozen (derivative 0, translation
//! multiplier 1) so that translation stays a real, periodic group.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{sampled_ratio, InducedNorm, QuasiAlgebra};
use crate::element::Element;
use crate::error::{QuasiError, Result};
use crate::forms::{FormFamily, SesquilinearForm};
use crate::groups::{AutoGroup, Provenance};
use crate::linalg::{c, op_norm, CMatrix, CVector};
use crate::operator::Operator;
use crate::sampling;

#[derive(Debug, Clone)]
pub struct LpCircleModel {
    n: usize,
    p: f64,
    derivative: CMatrix,
}

fn circulant(n: usize, entry: impl Fn(usize) -> Complex64) -> CMatrix {
    let col: Vec<Complex64> = (0..n).map(entry).collect();
    CMatrix::from_fn(n, n, |j, l| col[(j + n - l) % n])
}

impl LpCircleModel {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(QuasiError::Unsupported(format!(
                "p = {p}: no separating family of invariant forms for p < 2"
            )));
        }
        if n < 8 {
            return Err(QuasiError::Precondition(format!("grid size {n} < 8")));
        }
        let derivative = circulant(n, |m| Self::symbol_sum(n, m, |k| c(0.0, 2.0 * PI * k as f64), c(0.0, 0.0)));
        Ok(Self { n, p, derivative })
    }

    /// `(1/N) Σ_k s(k) e^{2πikm/N}` over `|k| < N/2`, plus the Nyquist term.
    fn symbol_sum(n: usize, m: usize, s: impl Fn(i64) -> Complex64, nyquist: Complex64) -> Complex64 {
        let half = (n / 2) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1 - half)..half {
            let phase = 2.0 * PI * ((k * m as i64).rem_euclid(n as i64)) as f64 / n as f64;
            acc += s(k) * Complex64::from_polar(1.0, phase);
        }
        if n.is_multiple_of(2) {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += nyquist * sign;
        } else {
            // Odd N: the range above misses k = ±(N−1)/2 only when N/2
            // rounds down, so add them back.
            for k in [-half, half] {
                let phase = 2.0 * PI * ((k * m as i64).rem_euclid(n as i64)) as f64 / n as f64;
                acc += s(k) * Complex64::from_polar(1.0, phase);
            }
        }
        acc / n as f64
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 / self.n as f64).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Element {
        Element::from_slice(&self.nodes().iter().map(|x| f(*x)).collect::<Vec<_>>())
    }

    /// Spectral derivative, the generator of translation.
    pub fn derivative_matrix(&self) -> &CMatrix {
        &self.derivative
    }

    /// `f ↦ f(· + t)` by spectral interpolation.
    pub fn translation_matrix(&self, t: f64) -> CMatrix {
        let n = self.n;
        circulant(n, |m| {
            Self::symbol_sum(n, m, |k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t), c(1.0, 0.0))
        })
    }

    /// Fourier mode `e^{2πikx}` on the grid.
    pub fn mode(&self, k: i64) -> Element {
        self.sample(|x| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x))
    }

    pub fn sup_norm(&self, f: &Element) -> f64 {
        f.max_abs()
    }

    /// Largest `‖u‖_∞ / (‖u‖_p + ‖u′‖_p)` over the given samples.
    pub fn sobolev_constant(&self, samples: &[Element]) -> f64 {
        samples
            .iter()
            .map(|u| {
                let du = Element::new(&self.derivative * u.coeffs());
                let denom = self.norm(u) + self.norm(&du);
                if denom > 0.0 {
                    self.sup_norm(u) / denom
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }

    /// Random trigonometric polynomials of degree ≤ `degree`, plus the modes
    /// `0..=degree`.
    pub fn smooth_samples(&self, seed: u64, count: usize, degree: i64) -> Vec<Element> {
        let mut rng = sampling::rng(seed);
        let mut out: Vec<Element> = (0..=degree).map(|k| self.mode(k)).collect();
        for _ in 0..count {
            let coeffs: Vec<Complex64> = (0..=2 * degree).map(|_| sampling::complex_uniform(&mut rng)).collect();
            let mut acc = Element::zeros(self.n);
            for (i, a) in coeffs.iter().enumerate() {
                acc = &acc + &self.mode(i as i64 - degree).scale(*a);
            }
            out.push(acc);
        }
        out
    }
}

impl QuasiAlgebra for LpCircleModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        format!("L^{} circle (N = {})", self.p, self.n)
    }

    fn norm(&self, a: &Element) -> f64 {
        let h = self.step();
        let s: f64 = a.coeffs().iter().map(|z| z.norm().powf(self.p)).sum();
        (h * s).powf(1.0 / self.p)
    }

    fn involution(&self, a: &Element) -> Element {
        Element::new(a.coeffs().map(|z| z.conj()))
    }

    fn product(&self, a: &Element, b: &Element) -> Element {
        Element::new(a.coeffs().component_mul(b.coeffs()))
    }

    fn unit(&self) -> Option<Element> {
        Some(Element::new(CVector::from_element(self.n, c(1.0, 0.0))))
    }

    /// Fourier modes `|k| < N/2` and the Nyquist mode.
    fn subalgebra_basis(&self) -> Vec<Element> {
        let half = (self.n / 2) as i64;
        let lo = if self.n.is_multiple_of(2) { 1 - half } else { -half };
        (lo..=half).map(|k| self.mode(k)).collect()
    }

    fn multiplier_norms(&self, a: &Element) -> (f64, f64) {
        let m = a.max_abs();
        (m, m)
    }

    fn norm_equivalence(&self) -> (f64, f64) {
        let n = self.n as f64;
        (n.powf(-0.5), n.powf(-1.0 / self.p))
    }

    /// Exact for `p = 2`; otherwise Riesz–Thorin between the 2- and ∞-norms.
    fn induced_norm(&self, op: &CMatrix) -> InducedNorm {
        let two = op_norm(op);
        if self.p == 2.0 {
            return InducedNorm::exact(two);
        }
        let inf = (0..op.nrows())
            .map(|i| op.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let theta = 2.0 / self.p;
        let (lo, hi) = self.norm_equivalence();
        let upper = (two.powf(theta) * inf.powf(1.0 - theta)).min(hi / lo * two);
        let lower = sampled_ratio(self, &|a| Element::new(op * a.coeffs()), 0x1b1b);
        InducedNorm {
            lower: lower.min(upper),
            upper,
        }
    }

    fn left_multiplication(&self, a: &Element) -> CMatrix {
        CMatrix::from_diagonal(a.coeffs())
    }

    fn right_multiplication(&self, a: &Element) -> CMatrix {
        CMatrix::from_diagonal(a.coeffs())
    }

    fn spectrum(&self, a: &Element) -> Vec<Complex64> {
        a.coeffs().iter().copied().collect()
    }
}

/// Weights `w ≥ 0` normalized in the quadrature `L^{p/(p−2)}` norm (sup norm
/// for `p = 2`), starting with `w ≡ 1`.
pub fn lp_weight_forms(model: &LpCircleModel, count: usize, seed: u64) -> Vec<SesquilinearForm> {
    let n = model.grid_size();
    let h = model.step();
    let p = model.p();
    let mut rng = sampling::rng(seed);
    let mut forms = vec![SesquilinearForm::weight(h, vec![1.0; n])];
    for _ in 1..count {
        let w: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
        let scale = if p == 2.0 {
            w.iter().cloned().fold(0.0, f64::max)
        } else {
            let q = p / (p - 2.0);
            (h * w.iter().map(|v| v.powf(q)).sum::<f64>()).powf(1.0 / q)
        };
        forms.push(SesquilinearForm::weight(h, w.iter().map(|v| v / scale).collect()));
    }
    forms
}

pub fn build_lp_circle_model(
    n: usize,
    p: f64,
    weights_count: usize,
    seed: u64,
) -> Result<(Arc<LpCircleModel>, FormFamily, AutoGroup)> {
    let model = Arc::new(LpCircleModel::new(n, p)?);
    let forms = lp_weight_forms(&model, weights_count.max(1), seed);
    let family = FormFamily::new(model.as_ref(), forms, seed);
    let group = translation_group(model.clone());
    Ok((model, family, group))
}

/// Translation `β_t f = f(· + t)`. For `p = 2` it is unitary; for `p > 2`
/// the bound is certified on a grid of times over one period.
pub fn translation_group(model: Arc<LpCircleModel>) -> AutoGroup {
    let bound = if model.p() == 2.0 {
        1.0
    } else {
        (0..16)
            .map(|k| model.induced_norm(&model.translation_matrix(k as f64 / 16.0)).upper)
            .fold(1.0, f64::max)
    };
    let m = model.clone();
    AutoGroup::new(model.dim(), Provenance::Translation, bound, move |t| {
        Ok(Operator::Dense(m.translation_matrix(t)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine_is_exact() {
        let m = LpCircleModel::new(32, 2.0).unwrap();
        let f = m.sample(|x| c((2.0 * PI * x).sin(), 0.0));
        let df = Element::new(m.derivative_matrix() * f.coeffs());
        let exact = m.sample(|x| c(2.0 * PI * (2.0 * PI * x).cos(), 0.0));
        assert!((&df - &exact).max_abs() < 1e-11);
    }

    #[test]
    fn quarter_shift_of_sine() {
        let m = LpCircleModel::new(64, 4.0).unwrap();
        let f = m.sample(|x| c((2.0 * PI * x).sin(), 0.0));
        let ft = Element::new(m.translation_matrix(0.25) * f.coeffs());
        let exact = m.sample(|x| c((2.0 * PI * (x + 0.25)).sin(), 0.0));
        assert!((&ft - &exact).max_abs() < 1e-12);
    }

    #[test]
    fn full_period_is_identity() {
        let m = LpCircleModel::new(16, 2.0).unwrap();
        let t = m.translation_matrix(1.0);
        assert!((t - CMatrix::identity(16, 16)).norm() < 1e-12);
    }

    #[test]
    fn p_below_two_is_unsupported() {
        assert!(matches!(LpCircleModel::new(16, 1.5), Err(QuasiError::Unsupported(_))));
    }

    #[test]
    fn sobolev_constant_at_most_one_for_p2() {
        let m = LpCircleModel::new(64, 2.0).unwrap();
        let c = m.sobolev_constant(&m.smooth_samples(3, 20, 5));
        assert!((1.0 - 1e-12..=1.0 + 1e-12).contains(&c), "{c}");
    }
}
