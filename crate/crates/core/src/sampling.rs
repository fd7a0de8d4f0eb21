//! Seeded sample generation. All randomness in the crate goes through here.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::Element;
use crate::linalg::{CMatrix, CVector};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_uniform(rng: &mut SampleRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut SampleRng, n: usize) -> CVector {
    CVector::from_iterator(n, (0..n).map(|_| complex_uniform(rng)))
}

pub fn random_unit_vector(rng: &mut SampleRng, n: usize) -> CVector {
    loop {
        let v = random_vector(rng, n);
        let nrm = v.norm();
        if nrm > 1e-3 {
            return v / Complex64::new(nrm, 0.0);
        }
    }
}

pub fn random_element(rng: &mut SampleRng, n: usize) -> Element {
    Element::new(random_vector(rng, n))
}

pub fn random_elements(seed: u64, n: usize, count: usize) -> Vec<Element> {
    let mut r = rng(seed);
    (0..count).map(|_| random_element(&mut r, n)).collect()
}

pub fn random_matrix(rng: &mut SampleRng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| complex_uniform(rng))
}

pub fn random_hermitian(rng: &mut SampleRng, d: usize) -> CMatrix {
    let m = random_matrix(rng, d);
    (&m + m.adjoint()).scale(0.5)
}

/// Haar-ish unitary from the QR factor of a random matrix.
pub fn random_unitary(rng: &mut SampleRng, d: usize) -> CMatrix {
    random_matrix(rng, d).qr().q()
}
