//! Matrix algebra with the weighted norm `‖a‖ = ‖W a W‖_op`, `W = e^{−M}`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{InducedNorm, QuasiAlgebra};
use crate::element::Element;
use crate::error::{QuasiError, Result};
use crate::forms::{seeded_unit_vectors, FormFamily, SesquilinearForm};
use crate::linalg::{c, eigenvalues, identity, kron, matmul, op_norm, CMatrix, CVector};
use crate::operator::Operator;
use crate::sampling;

#[derive(Debug, Clone)]
pub struct WeightedMatrixModel {
    d: usize,
    exponents: Vec<f64>,
    w: Vec<f64>,
}

/// `diag(left) · a · diag(right)`.
pub(crate) fn scale_rows_cols(a: &CMatrix, left: &[f64], right: &[f64]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (left[i] * right[j]))
}

/// Nearest conjugation `a ↦ L a R` to a coefficient-space operator, from the
/// leading singular pair of its realignment, with the remainder.
///
/// `op = Rᵀ ⊗ L` exactly when the realigned matrix `Z[(i,k),(j,l)] =
/// op[i + jd, k + ld]` is the rank-one `vec(L) vec(Rᵀ)ᵀ`.
pub(crate) fn kron_split(op: &CMatrix, d: usize) -> Option<(CMatrix, CMatrix, CMatrix)> {
    if d * d > 256 || op.nrows() != d * d || op.ncols() != d * d {
        return None;
    }
    let z = CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, k) = (row % d, row / d);
        let (j, l) = (col % d, col / d);
        op[(i + j * d, k + l * d)]
    });
    let svd = z.svd(true, true);
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if *v > best.1 { (i, *v) } else { best });
    if sigma == 0.0 {
        return None;
    }
    let u = svd.u.as_ref()?.column(idx).into_owned() * c(sigma, 0.0);
    let v = svd.v_t.as_ref()?.row(idx).into_owned();
    let l = CMatrix::from_fn(d, d, |i, k| u[i + k * d]);
    // Row `idx` of Vᴴ is vᴴ, and vec(Rᵀ) = conj(v) = (vᴴ)ᵀ.
    let rt = CMatrix::from_fn(d, d, |j, l| v[j + l * d]);
    let r = rt.transpose();
    let rest = op - kron(&rt, &l);
    Some((l, r, rest))
}

impl WeightedMatrixModel {
    pub fn new(d: usize, exponents: &[f64]) -> Result<Self> {
        if d == 0 {
            return Err(QuasiError::Precondition("matrix size must be positive".into()));
        }
        if exponents.len() != d {
            return Err(QuasiError::Dimension {
                expected: d,
                got: exponents.len(),
            });
        }
        if exponents.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(QuasiError::Precondition("weight exponents must be finite and ≥ 0".into()));
        }
        Ok(Self {
            d,
            exponents: exponents.to_vec(),
            w: exponents.iter().map(|m| (-m).exp()).collect(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    fn inv_weights(&self) -> Vec<f64> {
        self.w.iter().map(|v| 1.0 / v).collect()
    }

    /// `W a W`.
    pub fn weighted(&self, a: &CMatrix) -> CMatrix {
        scale_rows_cols(a, &self.w, &self.w)
    }

    /// `W a W⁻¹`, the matrix whose op-norm is `‖L_a‖`.
    pub fn left_conjugate(&self, a: &CMatrix) -> CMatrix {
        scale_rows_cols(a, &self.w, &self.inv_weights())
    }

    /// `W⁻¹ a W`, the matrix whose op-norm is `‖R_a‖`.
    pub fn right_conjugate(&self, a: &CMatrix) -> CMatrix {
        scale_rows_cols(a, &self.inv_weights(), &self.w)
    }

    pub fn matrix_norm(&self, a: &CMatrix) -> f64 {
        op_norm(&self.weighted(a))
    }

    /// Elements `W⁻¹ C W⁻¹` with `‖C‖_op = 1`: rank-one and unitary `C`
    /// are extreme points of the unit ball.
    fn extreme_points(&self, seed: u64) -> Vec<Element> {
        let d = self.d;
        let winv = self.inv_weights();
        let mut rng = sampling::rng(seed);
        let mut out = Vec::new();
        if d <= 8 {
            for i in 0..d {
                for j in 0..d {
                    let mut m = CMatrix::zeros(d, d);
                    m[(i, j)] = c(1.0, 0.0);
                    out.push(m);
                }
            }
        }
        let count = if d <= 16 { 12 } else { 3 };
        for _ in 0..count {
            let u = sampling::random_unit_vector(&mut rng, d);
            let v = sampling::random_unit_vector(&mut rng, d);
            out.push(&u * v.adjoint());
        }
        for _ in 0..(count / 3) {
            out.push(sampling::random_unitary(&mut rng, d));
        }
        out.into_iter()
            .map(|m| Element::from_matrix(&scale_rows_cols(&m, &winv, &winv)))
            .collect()
    }

    fn sampled_lower(&self, apply: &dyn Fn(&Element) -> Element) -> f64 {
        let mut best: f64 = 0.0;
        for a in self.extreme_points(0xe7e7) {
            let n = self.norm(&a);
            if n > 0.0 {
                best = best.max(self.norm(&apply(&a)) / n);
            }
        }
        best
    }
}

impl QuasiAlgebra for WeightedMatrixModel {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn label(&self) -> String {
        format!("weighted matrix model (d = {}, M = {:?})", self.d, self.exponents)
    }

    fn norm(&self, a: &Element) -> f64 {
        self.matrix_norm(&a.to_matrix(self.d))
    }

    fn involution(&self, a: &Element) -> Element {
        Element::from_matrix(&a.to_matrix(self.d).adjoint())
    }

    fn product(&self, a: &Element, b: &Element) -> Element {
        Element::from_matrix(&matmul(&a.to_matrix(self.d), &b.to_matrix(self.d)))
    }

    fn unit(&self) -> Option<Element> {
        Some(Element::from_matrix(&identity(self.d)))
    }

    fn multiplier_norms(&self, a: &Element) -> (f64, f64) {
        let m = a.to_matrix(self.d);
        (op_norm(&self.left_conjugate(&m)), op_norm(&self.right_conjugate(&m)))
    }

    fn cstar_norm(&self, a: &Element) -> Option<f64> {
        Some(op_norm(&a.to_matrix(self.d)))
    }

    fn norm_equivalence(&self) -> (f64, f64) {
        let wmin = self.w.iter().cloned().fold(f64::INFINITY, f64::min);
        let wmax = self.w.iter().cloned().fold(0.0, f64::max);
        (wmin * wmin / (self.d as f64).sqrt(), wmax * wmax)
    }

    /// Upper bound `√d ‖S T S⁻¹‖₂` with `S = W ⊗ W`, from
    /// `‖·‖_op ≤ ‖·‖_F ≤ √d ‖·‖_op` on the weighted matrix.
    fn induced_norm(&self, op: &CMatrix) -> InducedNorm {
        let d = self.d;
        let s: Vec<f64> = (0..d * d).map(|k| self.w[k % d] * self.w[k / d]).collect();
        let sinv: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
        let conj = scale_rows_cols(op, &s, &sinv);
        let mut upper = (d as f64).sqrt() * op_norm(&conj);
        if let Some((l, r, rest)) = kron_split(op, d) {
            let exact = op_norm(&self.left_conjugate(&l)) * op_norm(&self.right_conjugate(&r));
            let tail = (d as f64).sqrt() * op_norm(&scale_rows_cols(&rest, &s, &sinv));
            upper = upper.min(exact + tail);
        }
        let lower = self.sampled_lower(&|a| Element::new(op * a.coeffs()));
        InducedNorm {
            lower: lower.min(upper),
            upper,
        }
    }

    /// Conjugations are exact: `sup ‖(WLW⁻¹) C (W⁻¹RW)‖` over `‖C‖ ≤ 1` is
    /// attained at a rank-one `C`.
    fn operator_norm(&self, op: &Operator) -> InducedNorm {
        match op {
            Operator::Identity(_) => InducedNorm::exact(1.0),
            Operator::Conjugation { left, right } => InducedNorm::exact(
                op_norm(&self.left_conjugate(left)) * op_norm(&self.right_conjugate(right)),
            ),
            Operator::Dense(m) => self.induced_norm(m),
        }
    }

    fn operator_distance(&self, a: &Operator, b: &Operator) -> InducedNorm {
        let as_conj = |o: &Operator| -> Option<(CMatrix, CMatrix)> {
            match o {
                Operator::Identity(_) => Some((identity(self.d), identity(self.d))),
                Operator::Conjugation { left, right } => Some((left.clone(), right.clone())),
                Operator::Dense(_) => None,
            }
        };
        match (as_conj(a), as_conj(b)) {
            (Some((l1, r1)), Some((l2, r2))) => {
                // L1 a R1 − L2 a R2 = (L1 − L2) a R1 + L2 a (R1 − R2).
                let upper = op_norm(&self.left_conjugate(&(&l1 - &l2))) * op_norm(&self.right_conjugate(&r1))
                    + op_norm(&self.left_conjugate(&l2)) * op_norm(&self.right_conjugate(&(&r1 - &r2)));
                let apply = |x: &Element| -> Element { &a.apply(x) - &b.apply(x) };
                let lower = self.sampled_lower(&apply);
                if self.d * self.d <= 64 {
                    let dense = self.induced_norm(&(a.dense() - b.dense()));
                    InducedNorm {
                        lower: lower.max(dense.lower).min(upper.min(dense.upper)),
                        upper: upper.min(dense.upper),
                    }
                } else {
                    InducedNorm {
                        lower: lower.min(upper),
                        upper,
                    }
                }
            }
            _ => self.induced_norm(&(a.dense() - b.dense())),
        }
    }

    /// `vec(a X) = (I ⊗ a) vec(X)`.
    fn left_multiplication(&self, a: &Element) -> CMatrix {
        kron(&identity(self.d), &a.to_matrix(self.d))
    }

    /// `vec(X a) = (aᵀ ⊗ I) vec(X)`.
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

/// Vector-state family `φ_ξ(a, b) = ⟨aξ, bξ⟩` with `ξ = W η`,
/// `|η| = e^{−max M}`: basis directions first, then seeded random ones.
pub fn weighted_vector_forms(model: &WeightedMatrixModel, family_size: usize, seed: u64) -> Vec<SesquilinearForm> {
    let d = model.d();
    let mmax = model.exponents().iter().cloned().fold(0.0, f64::max);
    let s = (-mmax).exp();
    let mut etas: Vec<CVector> = (0..d.min(family_size))
        .map(|k| {
            let mut v = CVector::zeros(d);
            v[k] = c(s, 0.0);
            v
        })
        .collect();
    if family_size > d {
        etas.extend(seeded_unit_vectors(seed, d, family_size - d, s));
    }
    etas.into_iter()
        .map(|eta| {
            let xi = CVector::from_iterator(d, (0..d).map(|i| eta[i] * model.weights()[i]));
            SesquilinearForm::vector(d, xi)
        })
        .collect()
}

pub fn build_weighted_matrix_model(
    d: usize,
    exponents: &[f64],
    family_size: usize,
    seed: u64,
) -> Result<(Arc<WeightedMatrixModel>, FormFamily)> {
    let model = Arc::new(WeightedMatrixModel::new(d, exponents)?);
    let forms = weighted_vector_forms(&model, family_size, seed);
    let family = FormFamily::new(model.as_ref(), forms, seed);
    Ok((model, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::norm_pair;
    use crate::forms::form_family_validate;
    use crate::linalg::{pauli_x, pauli_z};

    #[test]
    fn two_by_two_weighted_norms() {
        let (m, _) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, 1).unwrap();
        let x = Element::from_matrix(&pauli_x());
        assert!((m.norm(&x) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m.cstar_norm(&x).unwrap() - 1.0).abs() < 1e-15);
        // ‖W σx W⁻¹‖ = e.
        let (_, n0) = norm_pair(m.as_ref(), &x).unwrap();
        assert!((n0 - 1f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn zero_weight_is_cstar_case() {
        let (m, _) = build_weighted_matrix_model(3, &[0.0; 3], 3, 1).unwrap();
        for a in m.sample_elements(4, 5) {
            assert!((m.norm(&a) - m.cstar_norm(&a).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn induced_norm_bounds_bracket_conjugation() {
        let (m, _) = build_weighted_matrix_model(2, &[0.0, 1.0], 4, 1).unwrap();
        let op = m.conjugation_operator(&Element::from_matrix(&pauli_x()), &Element::from_matrix(&pauli_z()));
        let exact = m.operator_norm(&op);
        let dense = m.induced_norm(&op.dense());
        assert!(dense.lower <= exact.upper * (1.0 + 1e-12));
        assert!(dense.upper >= exact.upper * (1.0 - 1e-12));
    }

    #[test]
    fn kron_split_recovers_conjugation() {
        let mut rng = sampling::rng(3);
        let l = sampling::random_matrix(&mut rng, 3);
        let r = sampling::random_matrix(&mut rng, 3);
        let op = Operator::Conjugation { left: l.clone(), right: r.clone() }.dense();
        let (l2, r2, rest) = kron_split(&op, 3).unwrap();
        assert!(rest.norm() < 1e-12 * op.norm());
        assert!((kron(&r2.transpose(), &l2) - op).norm() < 1e-12 * kron(&r.transpose(), &l).norm());
    }

    #[test]
    fn dense_conjugation_norm_is_tight() {
        let (m, _) = build_weighted_matrix_model(3, &[0.0, 1.0, 2.0], 3, 1).unwrap();
        let mut rng = sampling::rng(5);
        let u = sampling::random_unitary(&mut rng, 3);
        let op = Operator::Conjugation { left: u.clone(), right: u.adjoint() };
        let exact = m.operator_norm(&op).upper;
        let dense = m.induced_norm(&op.dense());
        assert!((dense.upper - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn family_of_twenty_separates() {
        let (m, fam) = build_weighted_matrix_model(4, &[0.0, 1.0, 1.0, 2.0], 20, 7).unwrap();
        let rep = form_family_validate(m.as_ref(), &fam, 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.separation_margin > 0.0);
    }
}
