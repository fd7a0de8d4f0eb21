//! Weak multiplication `a □ b`, defined through the form family by
//! `φ(b x, a* y) = φ(c x, y)`, and the spectral notions built on it.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{boundedness, QuasiAlgebra};
use crate::element::Element;
use crate::error::{check_dim, QuasiError, Result};
use crate::extrapolate::neville_at_zero;
use crate::forms::{constraint_matrix, ConstraintRow, FormFamily};
use crate::linalg::{inverse, solve, CVector, LeastSquares};

pub const DEFAULT_WEAK_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum WeakOutcome {
    Defined { product: Element, residual: f64 },
    Undefined { residual: f64 },
}

impl WeakOutcome {
    pub fn product(&self) -> Option<&Element> {
        match self {
            WeakOutcome::Defined { product, .. } => Some(product),
            WeakOutcome::Undefined { .. } => None,
        }
    }

    pub fn into_product(self) -> Option<Element> {
        match self {
            WeakOutcome::Defined { product, .. } => Some(product),
            WeakOutcome::Undefined { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            WeakOutcome::Defined { residual, .. } | WeakOutcome::Undefined { residual } => *residual,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, WeakOutcome::Defined { .. })
    }
}

pub trait WeakProduct: Send + Sync {
    fn model(&self) -> &dyn QuasiAlgebra;

    fn weak_mult(&self, a: &Element, b: &Element) -> Result<WeakOutcome>;

    /// `a □ b`, failing with a domain error when undefined.
    fn defined(&self, a: &Element, b: &Element) -> Result<Element> {
        match self.weak_mult(a, b)? {
            WeakOutcome::Defined { product, .. } => Ok(product),
            WeakOutcome::Undefined { residual } => Err(QuasiError::Domain(format!(
                "weak product undefined (residual {residual:.3e})"
            ))),
        }
    }
}

/// Weak product solved from the stacked form constraints.
pub struct FormProduct {
    model: Arc<dyn QuasiAlgebra>,
    family: FormFamily,
    ls: LeastSquares,
    rows: Vec<ConstraintRow>,
    tol: f64,
}

impl FormProduct {
    /// Fails when the constraint system is rank deficient: a separating
    /// family must determine `c` uniquely.
    pub fn new(model: Arc<dyn QuasiAlgebra>, family: FormFamily, tol: f64) -> Result<Self> {
        for phi in &family.forms {
            check_dim(model.dim(), phi.dim())?;
        }
        let (mat, rows) = constraint_matrix(model.as_ref(), &family);
        let ls = LeastSquares::new(mat, RANK_TOL);
        if !ls.is_full_rank() {
            return Err(QuasiError::Inconsistent(format!(
                "form constraints have rank {} < {}; weak products are not unique",
                ls.rank(),
                ls.cols()
            )));
        }
        Ok(Self {
            model,
            family,
            ls,
            rows,
            tol,
        })
    }

    pub fn family(&self) -> &FormFamily {
        &self.family
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    /// Right-hand side `φ(p x, q y)` over all rows, for fixed left and right
    /// multipliers of the probes.
    pub fn functional<P, Q>(&self, left: P, right: Q) -> CVector
    where
        P: Fn(&Element) -> Element,
        Q: Fn(&Element) -> Element,
    {
        let mut out = CVector::zeros(self.rows.len());
        let mut r = 0;
        for phi in &self.family.forms {
            let fx: Vec<CVector> = self.family.probes.iter().map(|x| phi.factor(&left(x))).collect();
            let fy: Vec<CVector> = self.family.probes.iter().map(|y| phi.factor(&right(y))).collect();
            for vx in &fx {
                for vy in &fy {
                    out[r] = vy.dotc(vx);
                    r += 1;
                }
            }
        }
        out
    }

    /// Least-squares `c` with `φ(c x, y) ≈ rhs`, and the residual relative to
    /// `max(‖rhs‖, σ_max)`, so that right-hand sides that cancel to rounding
    /// level are not reported as inconsistent.
    pub fn solve_functional(&self, rhs: &CVector) -> (Element, f64) {
        let c = self.ls.solve(rhs);
        let scale = rhs.norm().max(self.ls.largest_singular_value());
        let residual = if scale == 0.0 {
            0.0
        } else {
            (self.apply_rows(&c) - rhs).norm() / scale
        };
        (Element::new(c), residual)
    }

    fn apply_rows(&self, c: &CVector) -> CVector {
        let e = Element::new(c.clone());
        self.functional(|x| self.model.product(&e, x), |y| y.clone())
    }
}

impl WeakProduct for FormProduct {
    fn model(&self) -> &dyn QuasiAlgebra {
        self.model.as_ref()
    }

    fn weak_mult(&self, a: &Element, b: &Element) -> Result<WeakOutcome> {
        check_dim(self.model.dim(), a.len())?;
        check_dim(self.model.dim(), b.len())?;
        let a_star = self.model.involution(a);
        let rhs = self.functional(|x| self.model.product(b, x), |y| self.model.product(&a_star, y));
        let (c, residual) = self.solve_functional(&rhs);
        if residual <= self.tol {
            Ok(WeakOutcome::Defined { product: c, residual })
        } else {
            Ok(WeakOutcome::Undefined { residual })
        }
    }
}

/// Direct module product. Valid in every model here since `A₀` spans the
/// ambient space; used where the stacked form system is too large.
pub struct ModuleProduct {
    model: Arc<dyn QuasiAlgebra>,
}

impl ModuleProduct {
    pub fn new(model: Arc<dyn QuasiAlgebra>) -> Self {
        Self { model }
    }
}

impl WeakProduct for ModuleProduct {
    fn model(&self) -> &dyn QuasiAlgebra {
        self.model.as_ref()
    }

    fn weak_mult(&self, a: &Element, b: &Element) -> Result<WeakOutcome> {
        check_dim(self.model.dim(), a.len())?;
        check_dim(self.model.dim(), b.len())?;
        Ok(WeakOutcome::Defined {
            product: self.model.product(a, b),
            residual: 0.0,
        })
    }
}

/// One-shot weak product; builds the constraint system each call.
pub fn weak_mult(
    model: Arc<dyn QuasiAlgebra>,
    a: &Element,
    b: &Element,
    family: &FormFamily,
    tol: f64,
) -> Result<WeakOutcome> {
    FormProduct::new(model, family.clone(), tol)?.weak_mult(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximateProduct {
    pub outcome: WeakOutcome,
    /// Weak-seminorm distances between successive `a·y_n`.
    pub increments: Vec<f64>,
    /// Distance to the direct weak product `a □ b` (in ‖·‖).
    pub agreement: f64,
}

/// `a □ b` as the weak limit of `a·y_n` for `y_n → b` in norm, `n = 1, 2, …`.
pub fn weak_mult_by_approximation(
    product: &FormProduct,
    a: &Element,
    b: &Element,
    approx: &[Element],
) -> Result<ApproximateProduct> {
    let model = product.model();
    if approx.is_empty() {
        return Err(QuasiError::Precondition("approximating sequence is empty".into()));
    }
    for y in approx {
        check_dim(model.dim(), y.len())?;
    }
    let tol = product.tol();
    let dist: Vec<f64> = approx.iter().map(|y| model.norm(&(y - b))).collect();
    let limit = extrapolated_scalar(&dist);
    let scale = 1.0 + model.norm(b);
    if limit.abs() > tol.sqrt() * scale || dist[dist.len() - 1] > dist[0].max(tol * scale) {
        return Err(QuasiError::Precondition(format!(
            "sequence does not converge to b in norm (extrapolated distance {limit:.3e})"
        )));
    }

    // Weak functionals of a·y_n, then extrapolation in 1/n entry by entry.
    let values: Vec<CVector> = approx
        .iter()
        .map(|y| {
            let ay = model.product(a, y);
            product.functional(|x| model.product(&ay, x), |v| v.clone())
        })
        .collect();
    let increments: Vec<f64> = values
        .windows(2)
        .map(|w| (&w[1] - &w[0]).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    let rhs = extrapolated_vector(&values);
    let (c, residual) = product.solve_functional(&rhs);
    let direct = product.weak_mult(a, b)?;
    let agreement = match direct.product() {
        Some(p) => model.norm(&(p - &c)),
        None => f64::INFINITY,
    };
    let cauchy = increments.last().is_none_or(|last| *last <= increments[0].max(tol));
    let outcome = if residual <= tol && cauchy {
        WeakOutcome::Defined { product: c, residual }
    } else {
        WeakOutcome::Undefined { residual }
    };
    Ok(ApproximateProduct {
        outcome,
        increments,
        agreement,
    })
}

fn tail_nodes(len: usize) -> Vec<f64> {
    let start = len.saturating_sub(3);
    (start..len).map(|i| 1.0 / (i + 1) as f64).collect()
}

fn extrapolated_scalar(values: &[f64]) -> f64 {
    let nodes = tail_nodes(values.len());
    let tail: Vec<Complex64> = values[values.len() - nodes.len()..]
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .collect();
    neville_at_zero(&nodes, &tail).re
}

fn extrapolated_vector(values: &[CVector]) -> CVector {
    let nodes = tail_nodes(values.len());
    let tail = &values[values.len() - nodes.len()..];
    let n = tail[0].len();
    CVector::from_iterator(
        n,
        (0..n).map(|i| {
            let col: Vec<Complex64> = tail.iter().map(|v| v[i]).collect();
            neville_at_zero(&nodes, &col)
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventResult {
    pub in_resolvent: bool,
    pub inverse: Option<Element>,
    /// Largest residual of `(λ𝟙 − a) □ c = 𝟙 = c □ (λ𝟙 − a)`.
    pub residual: f64,
}

/// Whether `λ𝟙 − a` is invertible in `A_b`, with the inverse when it is.
pub fn element_resolvent(
    product: &dyn WeakProduct,
    a: &Element,
    lambda: Complex64,
    tol: f64,
) -> Result<ResolventResult> {
    let model = product.model();
    check_dim(model.dim(), a.len())?;
    let unit = model
        .unit()
        .ok_or_else(|| QuasiError::Precondition("model has no unit".into()))?;
    let m = &unit.scale(lambda) - a;
    let candidate = match model.matrix_size() {
        Some(d) => inverse(&m.to_matrix(d), tol).map(|inv| Element::from_matrix(&inv)),
        None => solve(&model.left_multiplication(&m), unit.coeffs(), tol).map(Element::new),
    };
    let c = match candidate {
        Ok(c) => c,
        Err(QuasiError::Singular { .. }) => {
            return Ok(ResolventResult {
                in_resolvent: false,
                inverse: None,
                residual: f64::INFINITY,
            })
        }
        Err(e) => return Err(e),
    };
    let scale = model.norm(&unit).max(f64::MIN_POSITIVE);
    let mut residual: f64 = 0.0;
    for (l, r) in [(&m, &c), (&c, &m)] {
        residual = residual.max(match product.weak_mult(l, r)? {
            WeakOutcome::Defined { product, .. } => model.norm(&(&product - &unit)) / scale,
            WeakOutcome::Undefined { .. } => f64::INFINITY,
        });
    }
    let bounded = boundedness(model, &c)?.is_bounded;
    let ok = bounded && residual <= tol.max(1e-8);
    Ok(ResolventResult {
        in_resolvent: ok,
        inverse: if ok { Some(c) } else { None },
        residual,
    })
}

/// Spectral radius in `A_b`.
pub fn spectral_radius(model: &dyn QuasiAlgebra, a: &Element) -> f64 {
    model.spectrum(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::SesquilinearForm;
    use crate::linalg::{c, pauli_z, real_diag};
    use crate::models::lp_circle::build_lp_circle_model;
    use crate::models::weighted::build_weighted_matrix_model;
    use proptest::prelude::*;

    fn qubit_product() -> FormProduct {
        let (m, fam) = build_weighted_matrix_model(2, &[0.0, 1.0], 6, 5).unwrap();
        FormProduct::new(m, fam, DEFAULT_WEAK_TOL).unwrap()
    }

    #[test]
    fn basis_products_match_matrix_products() {
        let p = qubit_product();
        let m = p.model();
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (Element::basis(4, i), Element::basis(4, j));
                let out = p.weak_mult(&a, &b).unwrap();
                let exact = Element::from_matrix(&(a.to_matrix(2) * b.to_matrix(2)));
                assert!(m.norm(&(out.product().unwrap() - &exact)) <= 1e-10, "{i} {j}");
            }
        }
    }

    #[test]
    fn unit_is_neutral() {
        let p = qubit_product();
        let m = p.model();
        let u = m.unit().unwrap();
        for a in m.sample_elements(3, 4) {
            let r = p.defined(&a, &u).unwrap();
            assert!(m.norm(&(&r - &a)) <= 1e-10 * m.norm(&a).max(1.0));
        }
    }

    #[test]
    fn lp_weak_product_is_pointwise() {
        let (m, fam, _) = build_lp_circle_model(16, 2.0, 4, 2).unwrap();
        let p = FormProduct::new(m.clone(), fam, DEFAULT_WEAK_TOL).unwrap();
        let s = m.sample_elements(8, 2);
        let pointwise = Element::new(s[0].coeffs().component_mul(s[1].coeffs()));
        let out = p.defined(&s[0], &s[1]).unwrap();
        assert!(m.norm(&(&out - &pointwise)) <= 1e-10 * m.norm(&pointwise).max(1.0));
    }

    #[test]
    fn approximation_agrees_with_direct_product() {
        let p = qubit_product();
        let m = p.model();
        let s = m.sample_elements(11, 2);
        let (a, b) = (&s[0], &s[1]);
        let u = m.unit().unwrap();
        let seq: Vec<Element> = (1..=12).map(|n| b + &u.scale_real(1.0 / n as f64)).collect();
        let r = weak_mult_by_approximation(&p, a, b, &seq).unwrap();
        assert!(r.outcome.is_defined());
        assert!(r.agreement <= 1e-8, "{}", r.agreement);

        let constant = vec![b.clone(); 4];
        let r = weak_mult_by_approximation(&p, a, b, &constant).unwrap();
        assert!(r.agreement <= 1e-10);
    }

    #[test]
    fn divergent_sequence_is_rejected() {
        let p = qubit_product();
        let m = p.model();
        let s = m.sample_elements(11, 2);
        let u = m.unit().unwrap();
        let seq: Vec<Element> = (1..=6).map(|n| &s[1] + &u.scale_real(n as f64)).collect();
        assert!(matches!(
            weak_mult_by_approximation(&p, &s[0], &s[1], &seq),
            Err(QuasiError::Precondition(_))
        ));
    }

    #[test]
    fn resolvent_examples() {
        let p = qubit_product();
        let m = p.model();
        let zero = Element::zeros(4);
        let r = element_resolvent(&p, &zero, c(1.0, 0.0), 1e-12).unwrap();
        assert!(r.in_resolvent);
        assert!(m.norm(&(r.inverse.unwrap() - m.unit().unwrap())) <= 1e-14);

        let z = Element::from_matrix(&pauli_z());
        let r = element_resolvent(&p, &z, c(2.0, 0.0), 1e-12).unwrap();
        let expect = Element::from_matrix(&real_diag(&[1.0, 1.0 / 3.0]));
        assert!(m.norm(&(r.inverse.unwrap() - expect)) <= 1e-12);

        let r = element_resolvent(&p, &z, c(1.0, 0.0), 1e-12).unwrap();
        assert!(!r.in_resolvent && r.inverse.is_none());
        assert!((spectral_radius(m, &z) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_family_is_inconsistent() {
        let (m, fam) = build_weighted_matrix_model(2, &[0.0, 1.0], 3, 1).unwrap();
        let zero = FormFamily::with_probes(vec![SesquilinearForm::zero(4)], fam.probes.clone());
        assert!(matches!(
            FormProduct::new(m, zero, DEFAULT_WEAK_TOL),
            Err(QuasiError::Inconsistent(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn weak_product_extends_the_module_product(seed in any::<u64>()) {
            let (m, fam) = build_weighted_matrix_model(3, &[0.0, 0.5, 1.2], 6, seed).unwrap();
            let p = FormProduct::new(m.clone(), fam, DEFAULT_WEAK_TOL).unwrap();
            let s = m.sample_elements(seed, 2);
            let direct = m.product(&s[0], &s[1]);
            let out = p.defined(&s[0], &s[1]).unwrap();
            prop_assert!(m.norm(&(&out - &direct)) <= 1e-9 * m.norm(&direct).max(1.0));
        }
    }
}
