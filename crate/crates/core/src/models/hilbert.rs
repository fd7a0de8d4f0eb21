//! Matrices with the trace inner product `⟨a, b⟩ = tr(b* a)`; the norm is
//! Frobenius, which is the coefficient 2-norm.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{InducedNorm, QuasiAlgebra};
use crate::element::Element;
use crate::error::{QuasiError, Result};
use crate::forms::{seeded_unit_vectors, FormFamily, SesquilinearForm};
use crate::linalg::{eigenvalues, identity, kron, op_norm, CMatrix, CVector, ONE};
use crate::operator::Operator;

#[derive(Debug, Clone)]
pub struct TraceModel {
    d: usize,
}

impl TraceModel {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(QuasiError::Precondition("matrix size must be positive".into()));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `⟨a, b⟩ = tr(b* a)`.
    pub fn inner(&self, a: &Element, b: &Element) -> Complex64 {
        b.coeffs().dotc(a.coeffs())
    }
}

impl QuasiAlgebra for TraceModel {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn label(&self) -> String {
        format!("trace model (d = {})", self.d)
    }

    fn norm(&self, a: &Element) -> f64 {
        a.coeff_norm()
    }

    fn involution(&self, a: &Element) -> Element {
        Element::from_matrix(&a.to_matrix(self.d).adjoint())
    }

    fn product(&self, a: &Element, b: &Element) -> Element {
        Element::from_matrix(&(a.to_matrix(self.d) * b.to_matrix(self.d)))
    }

    fn unit(&self) -> Option<Element> {
        Some(Element::from_matrix(&identity(self.d)))
    }

    fn multiplier_norms(&self, a: &Element) -> (f64, f64) {
        let n = op_norm(&a.to_matrix(self.d));
        (n, n)
    }

    fn cstar_norm(&self, a: &Element) -> Option<f64> {
        Some(op_norm(&a.to_matrix(self.d)))
    }

    fn norm_equivalence(&self) -> (f64, f64) {
        (1.0, 1.0)
    }

    fn induced_norm(&self, op: &CMatrix) -> InducedNorm {
        InducedNorm::exact(op_norm(op))
    }

    fn operator_norm(&self, op: &Operator) -> InducedNorm {
        match op {
            Operator::Identity(_) => InducedNorm::exact(1.0),
            Operator::Conjugation { left, right } => InducedNorm::exact(op_norm(left) * op_norm(right)),
            Operator::Dense(m) => self.induced_norm(m),
        }
    }

    fn left_multiplication(&self, a: &Element) -> CMatrix {
        kron(&identity(self.d), &a.to_matrix(self.d))
    }

    fn right_multiplication(&self, a: &Element) -> CMatrix {
        kron(&a.to_matrix(self.d).transpose(), &identity(self.d))
    }

    fn conjugation_operator(&self, u: &Element, v: &Element) -> Operator {
        Operator::Conjugation {
            left: u.to_matrix(self.d),
            right: v.to_matrix(self.d),
        }
    }

    fn spectrum(&self, a: &Element) -> Vec<Complex64> {
        eigenvalues(&a.to_matrix(self.d))
    }

    fn matrix_size(&self) -> Option<usize> {
        Some(self.d)
    }
}

/// Trace model with unit-vector states `⟨aξ, bξ⟩`, `|ξ| ≤ 1`.
pub fn build_trace_model(d: usize, family_size: usize, seed: u64) -> Result<(Arc<TraceModel>, FormFamily)> {
    let model = Arc::new(TraceModel::new(d)?);
    let mut xis: Vec<CVector> = (0..d.min(family_size))
        .map(|k| {
            let mut v = CVector::zeros(d);
            v[k] = ONE;
            v
        })
        .collect();
    if family_size > d {
        xis.extend(seeded_unit_vectors(seed, d, family_size - d, 1.0));
    }
    let forms = xis.into_iter().map(|xi| SesquilinearForm::vector(d, xi)).collect();
    let family = FormFamily::new(model.as_ref(), forms, seed);
    Ok((model, family))
}
