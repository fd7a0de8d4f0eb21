use crate::element::Element;
use crate::linalg::{identity, kron, matmul, CMatrix};

/// A linear operator on the ambient coefficient space.
#[derive(Debug, Clone)]
pub enum Operator {
    Identity(usize),
    /// Matrix acting on coefficient vectors.
    Dense(CMatrix),
    /// `a ↦ left · a · right` on `d × d` matrix elements.
    Conjugation { left: CMatrix, right: CMatrix },
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Identity(n) => *n,
            Operator::Dense(m) => m.ncols(),
            Operator::Conjugation { left, .. } => left.nrows() * left.nrows(),
        }
    }

    pub fn apply(&self, a: &Element) -> Element {
        match self {
            Operator::Identity(_) => a.clone(),
            Operator::Dense(m) => Element::new(m * a.coeffs()),
            Operator::Conjugation { left, right } => {
                let d = left.nrows();
                Element::from_matrix(&matmul(&matmul(left, &a.to_matrix(d)), right))
            }
        }
    }

    /// Coefficient-space matrix. Conjugations use `vec(LAR) = (Rᵀ ⊗ L) vec(A)`.
    pub fn dense(&self) -> CMatrix {
        match self {
            Operator::Identity(n) => identity(*n),
            Operator::Dense(m) => m.clone(),
            Operator::Conjugation { left, right } => kron(&right.transpose(), left),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Operator) -> Operator {
        match (self, other) {
            (Operator::Identity(_), o) => o.clone(),
            (s, Operator::Identity(_)) => s.clone(),
            (
                Operator::Conjugation { left: l1, right: r1 },
                Operator::Conjugation { left: l2, right: r2 },
            ) => Operator::Conjugation {
                left: matmul(l1, l2),
                right: matmul(r2, r1),
            },
            (s, o) => Operator::Dense(s.dense() * o.dense()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Operator::Identity(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, pauli_x, pauli_z};

    #[test]
    fn conjugation_dense_agrees_with_apply() {
        let l = pauli_x() + pauli_z().scale(0.3);
        let r = pauli_z() * c(0.0, 1.0);
        let op = Operator::Conjugation {
            left: l.clone(),
            right: r.clone(),
        };
        let a = Element::from_slice(&[c(1.0, 2.0), c(-0.5, 0.0), c(0.25, 1.0), c(3.0, -1.0)]);
        let via_dense = Element::new(op.dense() * a.coeffs());
        assert!((&via_dense - &op.apply(&a)).coeff_norm() < 1e-14);
        let twice = op.compose(&op);
        assert!((&twice.apply(&a) - &op.apply(&op.apply(&a))).coeff_norm() < 1e-13);
    }
}
