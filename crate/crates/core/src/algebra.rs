//! The model abstraction: an ambient normed space with involution and module
//! products over a dense *-subalgebra.

use num_complex::Complex64;

use crate::element::Element;
use crate::error::{check_dim, QuasiError, Result};
use crate::linalg::{dense_from_fn, eigenvalues, op_norm, CMatrix};
use crate::operator::Operator;
use crate::sampling;

/// Two-sided estimate of an induced operator norm `sup ‖T a‖ / ‖a‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedNorm {
    pub lower: f64,
    pub upper: f64,
}

impl InducedNorm {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// A concrete Banach quasi *-algebra.
///
/// Every model here has `A₀ = A` as vector spaces, so `product` is defined on
/// all pairs; the distinction between the two norms is what matters.
pub trait QuasiAlgebra: Send + Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> String;

    /// The Banach norm ‖·‖ of the ambient space.
    fn norm(&self, a: &Element) -> f64;

    fn involution(&self, a: &Element) -> Element;

    /// Module product; at least one factor must lie in A₀.
    fn product(&self, a: &Element, b: &Element) -> Element;

    fn unit(&self) -> Option<Element>;

    fn subalgebra_basis(&self) -> Vec<Element> {
        (0..self.dim()).map(|k| Element::basis(self.dim(), k)).collect()
    }

    fn in_subalgebra(&self, x: &Element) -> bool {
        x.len() == self.dim()
    }

    /// Exact induced norms `(‖L_a‖, ‖R_a‖)` on `(A, ‖·‖)`.
    fn multiplier_norms(&self, a: &Element) -> (f64, f64);

    /// C*-norm of the represented element, where the model has one.
    fn cstar_norm(&self, _a: &Element) -> Option<f64> {
        None
    }

    /// Constants with `lo·|a|₂ ≤ ‖a‖ ≤ hi·|a|₂` on coefficient vectors.
    fn norm_equivalence(&self) -> (f64, f64);

    /// Induced norm of a coefficient-space matrix on `(A, ‖·‖)`.
    fn induced_norm(&self, op: &CMatrix) -> InducedNorm {
        let (lo, hi) = self.norm_equivalence();
        let upper = hi / lo * op_norm(op);
        let lower = sampled_ratio(self, &|a| Element::new(op * a.coeffs()), 0x5eed);
        InducedNorm {
            lower: lower.min(upper),
            upper,
        }
    }

    fn operator_norm(&self, op: &Operator) -> InducedNorm {
        match op {
            Operator::Identity(_) => InducedNorm::exact(1.0),
            _ => self.induced_norm(&op.dense()),
        }
    }

    /// Induced norm of `a − b`.
    fn operator_distance(&self, a: &Operator, b: &Operator) -> InducedNorm {
        if a.is_identity() && b.is_identity() {
            return InducedNorm::exact(0.0);
        }
        self.induced_norm(&(a.dense() - b.dense()))
    }

    /// Coefficient matrix of `L_a: x ↦ a x`.
    fn left_multiplication(&self, a: &Element) -> CMatrix {
        let n = self.dim();
        dense_from_fn(n, n, |e| {
            self.product(a, &Element::new(e.clone())).into_coeffs()
        })
    }

    /// Coefficient matrix of `R_a: x ↦ x a`.
    fn right_multiplication(&self, a: &Element) -> CMatrix {
        let n = self.dim();
        dense_from_fn(n, n, |e| {
            self.product(&Element::new(e.clone()), a).into_coeffs()
        })
    }

    /// `a ↦ u a v`.
    fn conjugation_operator(&self, u: &Element, v: &Element) -> Operator {
        Operator::Dense(self.left_multiplication(u) * self.right_multiplication(v))
    }

    /// Spectrum of `a` in the (finite-dimensional) algebra of bounded elements.
    fn spectrum(&self, a: &Element) -> Vec<Complex64> {
        eigenvalues(&self.left_multiplication(a))
    }

    /// Seeded random elements in a fixed order.
    fn sample_elements(&self, seed: u64, count: usize) -> Vec<Element> {
        sampling::random_elements(seed, self.dim(), count)
    }

    /// Matrix size when elements are `d × d` matrices.
    fn matrix_size(&self) -> Option<usize> {
        None
    }
}

/// Largest `‖T a‖/‖a‖` over the basis and a few seeded samples.
pub(crate) fn sampled_ratio<M, F>(model: &M, apply: &F, seed: u64) -> f64
where
    M: QuasiAlgebra + ?Sized,
    F: Fn(&Element) -> Element,
{
    let mut best: f64 = 0.0;
    let mut consider = |a: &Element| {
        let n = model.norm(a);
        if n > 0.0 {
            best = best.max(model.norm(&apply(a)) / n);
        }
    };
    if model.dim() <= 256 {
        for k in 0..model.dim() {
            consider(&Element::basis(model.dim(), k));
        }
    }
    for a in model.sample_elements(seed, 16) {
        consider(&a);
    }
    best
}

/// `‖a*‖ − ‖a‖`, the involution isometry defect.
pub fn involution_defect(model: &dyn QuasiAlgebra, a: &Element) -> f64 {
    (model.norm(&model.involution(a)) - model.norm(a)).abs()
}

/// `‖(ax)* − x*a*‖`.
pub fn star_product_defect(model: &dyn QuasiAlgebra, a: &Element, x: &Element) -> f64 {
    let lhs = model.involution(&model.product(a, x));
    let rhs = model.product(&model.involution(x), &model.involution(a));
    model.norm(&(&lhs - &rhs))
}

/// `(‖x‖, ‖x‖₀)` with `‖x‖₀ = max(‖L_x‖, ‖R_x‖)`.
pub fn norm_pair(model: &dyn QuasiAlgebra, x: &Element) -> Result<(f64, f64)> {
    check_dim(model.dim(), x.len())?;
    if !model.in_subalgebra(x) {
        return Err(QuasiError::Domain(format!(
            "element is not in the dense subalgebra of {}",
            model.label()
        )));
    }
    let (l, r) = model.multiplier_norms(x);
    Ok((model.norm(x), l.max(r)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundedness {
    pub is_bounded: bool,
    /// `max(‖L_a‖, ‖R_a‖)`, infinite when unbounded.
    pub norm_b: f64,
    pub left: f64,
    pub right: f64,
}

pub fn boundedness(model: &dyn QuasiAlgebra, a: &Element) -> Result<Boundedness> {
    check_dim(model.dim(), a.len())?;
    let (left, right) = model.multiplier_norms(a);
    let norm_b = left.max(right);
    Ok(Boundedness {
        is_bounded: norm_b.is_finite(),
        norm_b,
        left,
        right,
    })
}

/// `norm_b` of an element tracked through a family of truncations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessGrowth {
    pub norms: Vec<f64>,
    /// Strictly increasing at every level with at least a doubling overall.
    pub effectively_unbounded: bool,
}

pub fn boundedness_growth(levels: &[(&dyn QuasiAlgebra, Element)]) -> Result<BoundednessGrowth> {
    let mut norms = Vec::with_capacity(levels.len());
    for (model, a) in levels {
        norms.push(boundedness(*model, a)?.norm_b);
    }
    let increasing = norms.windows(2).all(|w| w[1] > w[0]);
    let effectively_unbounded = norms.len() >= 2
        && increasing
        && (norms.iter().any(|v| v.is_infinite()) || norms[norms.len() - 1] >= 2.0 * norms[0]);
    Ok(BoundednessGrowth {
        norms,
        effectively_unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, real_diag};
    use crate::models::weighted::WeightedMatrixModel;
    use proptest::prelude::*;

    fn qubit() -> WeightedMatrixModel {
        WeightedMatrixModel::new(2, &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn unit_and_zero() {
        let m = qubit();
        let (n, n0) = norm_pair(&m, &m.unit().unwrap()).unwrap();
        assert!((n0 - 1.0).abs() < 1e-15);
        // ‖𝟙‖ = ‖W²‖ = 1 since the smallest exponent is 0.
        assert!((n - 1.0).abs() < 1e-15);
        assert_eq!(norm_pair(&m, &Element::zeros(4)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn sigma_x_multiplier_norm_is_e() {
        let m = qubit();
        let x = Element::from_matrix(&pauli_x());
        let (n, n0) = norm_pair(&m, &x).unwrap();
        assert!((n - (-1f64).exp()).abs() < 1e-15);
        assert!((n0 - 1f64.exp()).abs() < 1e-13);
        // Brute-force lower bound over the extreme points a = W⁻¹ E_ij W⁻¹.
        let winv = real_diag(&[1.0, 1f64.exp()]);
        let mut best: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(i, j)] = crate::linalg::ONE;
                let a = Element::from_matrix(&(&winv * e * &winv));
                best = best.max(m.norm(&m.product(&x, &a)) / m.norm(&a));
                best = best.max(m.norm(&m.product(&a, &x)) / m.norm(&a));
            }
        }
        assert!((best - n0).abs() < 1e-12, "{best} vs {n0}");
    }

    #[test]
    fn bounded_elements() {
        let m = qubit();
        let u = boundedness(&m, &m.unit().unwrap()).unwrap();
        assert!(u.is_bounded && (u.norm_b - 1.0).abs() < 1e-15);
        let z = boundedness(&m, &Element::from_matrix(&pauli_z())).unwrap();
        assert!(z.is_bounded && (z.norm_b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_growth_is_flagged() {
        let models: Vec<WeightedMatrixModel> = [2usize, 4, 8, 16]
            .iter()
            .map(|&d| WeightedMatrixModel::new(d, &(0..d).map(|k| k as f64).collect::<Vec<_>>()).unwrap())
            .collect();
        let levels: Vec<(&dyn QuasiAlgebra, Element)> = models
            .iter()
            .map(|m| {
                let d = m.d();
                let h = real_diag(&(1..=d).map(|k| k as f64).collect::<Vec<_>>());
                (m as &dyn QuasiAlgebra, Element::from_matrix(&h))
            })
            .collect();
        let g = boundedness_growth(&levels).unwrap();
        assert_eq!(g.norms, vec![2.0, 4.0, 8.0, 16.0]);
        assert!(g.effectively_unbounded);

        let flat: Vec<(&dyn QuasiAlgebra, Element)> = models
            .iter()
            .map(|m| (m as &dyn QuasiAlgebra, m.unit().unwrap()))
            .collect();
        assert!(!boundedness_growth(&flat).unwrap().effectively_unbounded);
    }

    fn weighted(seed: u64) -> WeightedMatrixModel {
        let mut rng = crate::sampling::rng(seed);
        let exps: Vec<f64> = (0..3).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.5)).collect();
        WeightedMatrixModel::new(3, &exps).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn star_reverses_products(seed in any::<u64>()) {
            let m = weighted(seed);
            let s = m.sample_elements(seed ^ 1, 2);
            let scale = m.norm(&s[0]).max(1.0) * m.norm(&s[1]).max(1.0) * 1e3;
            prop_assert!(star_product_defect(&m, &s[0], &s[1]) <= 1e-13 * scale);
        }

        #[test]
        fn involution_is_isometric(seed in any::<u64>()) {
            let m = weighted(seed);
            let a = m.sample_elements(seed, 1).remove(0);
            prop_assert!(involution_defect(&m, &a) <= 1e-12 * m.norm(&a).max(1.0));
        }

        #[test]
        fn norm_dominated_by_multiplier_norm(seed in any::<u64>()) {
            let m = weighted(seed);
            let a = m.sample_elements(seed, 1).remove(0);
            let (n, n0) = norm_pair(&m, &a).unwrap();
            prop_assert!(n <= n0 * (1.0 + 1e-12));
        }

        #[test]
        fn module_bound(seed in any::<u64>()) {
            let m = weighted(seed);
            let s = m.sample_elements(seed, 2);
            let (l, r) = m.multiplier_norms(&s[0]);
            let nb = m.norm(&s[1]);
            prop_assert!(m.norm(&m.product(&s[0], &s[1])) <= l * nb * (1.0 + 1e-12));
            prop_assert!(m.norm(&m.product(&s[1], &s[0])) <= r * nb * (1.0 + 1e-12));
        }
    }
}
