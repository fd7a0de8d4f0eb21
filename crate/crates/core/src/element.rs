use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector};

/// An element of the ambient space, stored as its coefficient vector.
///
/// Matrix models flatten column-major, so coefficient `i + j·d` is entry `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Element(CVector);

impl Element {
    pub fn new(coeffs: CVector) -> Self {
        Self(coeffs)
    }

    pub fn from_slice(coeffs: &[Complex64]) -> Self {
        Self(CVector::from_column_slice(coeffs))
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self(CVector::from_iterator(
            coeffs.len(),
            coeffs.iter().map(|x| Complex64::new(*x, 0.0)),
        ))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CVector::zeros(n))
    }

    /// `k`-th canonical coefficient vector.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CVector::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(CVector::from_column_slice(m.as_slice()))
    }

    /// Reshapes a `d²`-coefficient element into a `d × d` matrix.
    pub fn to_matrix(&self, d: usize) -> CMatrix {
        debug_assert_eq!(self.0.len(), d * d);
        CMatrix::from_column_slice(d, d, self.0.as_slice())
    }

    pub fn coeffs(&self) -> &CVector {
        &self.0
    }

    pub fn into_coeffs(self) -> CVector {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    /// Euclidean norm of the coefficient vector (not the model norm).
    pub fn coeff_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl From<CVector> for Element {
    fn from(v: CVector) -> Self {
        Self(v)
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element(&self.0 + &rhs.0)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        Element(&self.0 - &rhs.0)
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        Element(self.0 + rhs.0)
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        Element(self.0 - rhs.0)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element(-&self.0)
    }
}

impl Mul<Complex64> for &Element {
    type Output = Element;
    fn mul(self, rhs: Complex64) -> Element {
        Element(&self.0 * rhs)
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        Element(&self.0 * Complex64::new(rhs, 0.0))
    }
}
