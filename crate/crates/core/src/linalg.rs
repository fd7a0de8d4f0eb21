//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `nalgebra` matrices of `Complex64`. Matrix-valued
//! elements are flattened column-major, matching `DMatrix::as_slice`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QuasiError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Below this many entries the structure scans cost more than they save.
const BLOCK_SCAN_MIN: usize = 1024;

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if is_diagonal(m) {
        return (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    }
    if m.len() >= BLOCK_SCAN_MIN {
        if let Some(blocks) = rectangular_blocks(m) {
            return blocks
                .iter()
                .map(|(rows, cols)| {
                    let sub = CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
                    sub.svd(false, false).singular_values.max()
                })
                .fold(0.0, f64::max);
        }
    }
    m.clone().svd(false, false).singular_values.max()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Groups of `0..n` from a union-find forest, in order of first index.
fn groups(parent: &mut [usize]) -> Vec<Vec<usize>> {
    let n = parent.len();
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(parent, i);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Vec::new());
        }
        out[slot[r]].push(i);
    }
    out
}

/// Connected components of the bipartite row/column graph of the nonzero
/// pattern, as (rows, columns) pairs. `None` when there is only one. The
/// matrix is, up to permutations, block diagonal with these blocks (blocks
/// may have zero rows or columns).
fn rectangular_blocks(m: &CMatrix) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
    let (r, c) = m.shape();
    let mut parent: Vec<usize> = (0..r + c).collect();
    for j in 0..c {
        for i in 0..r {
            if m[(i, j)] != ZERO {
                union(&mut parent, i, r + j);
            }
        }
    }
    let comps = groups(&mut parent);
    if comps.len() <= 1 {
        return None;
    }
    Some(
        comps
            .into_iter()
            .map(|g| {
                let rows = g.iter().copied().filter(|k| *k < r).collect();
                let cols = g.iter().filter(|k| **k >= r).map(|k| k - r).collect();
                (rows, cols)
            })
            .filter(|(rows, cols): &(Vec<usize>, Vec<usize>)| !rows.is_empty() && !cols.is_empty())
            .collect(),
    )
}

/// Index sets on which a square matrix is block diagonal after a symmetric
/// permutation. `None` when there is only one.
fn square_blocks(m: &CMatrix) -> Option<Vec<Vec<usize>>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..n {
            if m[(i, j)] != ZERO {
                union(&mut parent, i, j);
            }
        }
    }
    let comps = groups(&mut parent);
    if comps.len() <= 1 {
        None
    } else {
        Some(comps)
    }
}

/// `a · b`. Diagonal factors are applied as scalings; large products are
/// assembled from real products, which use the blocked real kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    if a.is_square() && a.nrows() > 1 && is_diagonal(a) {
        return CMatrix::from_fn(b.nrows(), b.ncols(), |i, j| a[(i, i)] * b[(i, j)]);
    }
    if b.is_square() && b.nrows() > 1 && is_diagonal(b) {
        return CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * b[(j, j)]);
    }
    if a.nrows().min(a.ncols()).min(b.ncols()) < 32 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

fn is_diagonal(m: &CMatrix) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != ZERO {
                return false;
            }
        }
    }
    true
}

/// Smallest and largest singular values.
pub fn singular_extremes(m: &CMatrix) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let s = m.clone().svd(false, false).singular_values;
    (s.min(), s.max())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            c(entries[i], 0.0)
        } else {
            ZERO
        }
    })
}

/// Hermitian part check: `‖m − m^H‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// Solves `m x = rhs`; fails when the LU pivots say the matrix is singular
/// relative to `rel_tol`.
pub fn solve(m: &CMatrix, rhs: &CVector, rel_tol: f64) -> Result<CVector> {
    let (smin, smax) = singular_extremes(m);
    if smax == 0.0 || smin <= rel_tol * smax {
        return Err(QuasiError::Singular {
            smallest: smin,
            largest: smax,
        });
    }
    m.clone().lu().solve(rhs).ok_or(QuasiError::Singular {
        smallest: smin,
        largest: smax,
    })
}

/// Inverse with the same singularity test as [`solve`].
pub fn inverse(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let (smin, smax) = singular_extremes(m);
    if smax == 0.0 || smin <= rel_tol * smax {
        return Err(QuasiError::Singular {
            smallest: smin,
            largest: smax,
        });
    }
    m.clone().lu().try_inverse().ok_or(QuasiError::Singular {
        smallest: smin,
        largest: smax,
    })
}

/// `m^n` by binary powering.
pub fn matrix_power(m: &CMatrix, mut n: u64) -> CMatrix {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = matmul(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = matmul(&base, &base);
        }
    }
    result
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    if m.is_square() && m.len() >= BLOCK_SCAN_MIN {
        if let Some(blocks) = square_blocks(m) {
            return blocks
                .iter()
                .flat_map(|idx| {
                    let sub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
                    schur_diagonal(sub)
                })
                .collect();
        }
    }
    schur_diagonal(m.clone())
}

fn schur_diagonal(m: CMatrix) -> Vec<Complex64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = m.schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Least-squares solver with an explicit numerical-rank decision.
///
/// Singular values below `rank_tol · σ_max` are treated as zero.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    svd: nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    rank: usize,
    cols: usize,
    cutoff: f64,
    largest: f64,
}

impl LeastSquares {
    pub fn new(a: CMatrix, rank_tol: f64) -> Self {
        let cols = a.ncols();
        let svd = a.svd(true, true);
        let largest = svd.singular_values.max();
        let cutoff = rank_tol * largest;
        let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
        Self {
            svd,
            rank,
            cols,
            cutoff,
            largest,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.cols
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.largest
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.svd.singular_values
    }

    pub fn solve(&self, rhs: &CVector) -> CVector {
        // Cutoff slightly above zero so that an all-zero system returns zero.
        let eps = if self.cutoff > 0.0 {
            self.cutoff
        } else {
            f64::MIN_POSITIVE
        };
        self.svd
            .solve(rhs, eps)
            .expect("SVD computed with both singular-vector sets")
    }

    /// Basis of the numerical null space (right singular vectors beyond the rank).
    pub fn null_space(&self) -> Vec<CVector> {
        let v_t = self.svd.v_t.as_ref().expect("v_t requested");
        let k = self.svd.singular_values.len();
        let mut out = Vec::new();
        // Thin SVD: columns beyond min(m, n) are not returned, so a wide
        // matrix gets its missing directions by orthogonal completion.
        for (i, s) in self.svd.singular_values.iter().enumerate() {
            if *s <= self.cutoff {
                out.push(v_t.row(i).adjoint());
            }
        }
        if k < self.cols {
            let mut basis: Vec<CVector> = (0..k).map(|i| v_t.row(i).adjoint()).collect();
            for e in 0..self.cols {
                let mut v = CVector::zeros(self.cols);
                v[e] = ONE;
                for b in &basis {
                    let proj = b.dotc(&v);
                    v -= b * proj;
                }
                let n = v.norm();
                if n > 1e-8 {
                    let v = v / c(n, 0.0);
                    basis.push(v.clone());
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Dense matrix of a linear map given by its action on the canonical basis.
pub fn dense_from_fn<F>(n_in: usize, n_out: usize, mut f: F) -> CMatrix
where
    F: FnMut(&CVector) -> CVector,
{
    let mut m = CMatrix::zeros(n_out, n_in);
    let mut e = CVector::zeros(n_in);
    for k in 0..n_in {
        e[k] = ONE;
        let col = f(&e);
        m.set_column(k, &col);
        e[k] = ZERO;
    }
    m
}

/// Compensated (Kahan) accumulation of complex vectors in a fixed order.
#[derive(Debug, Clone)]
pub struct KahanSum {
    sum: CVector,
    comp: CVector,
}

impl KahanSum {
    pub fn new(n: usize) -> Self {
        Self {
            sum: CVector::zeros(n),
            comp: CVector::zeros(n),
        }
    }

    pub fn add(&mut self, term: &CVector) {
        for i in 0..self.sum.len() {
            let y = term[i] - self.comp[i];
            let t = self.sum[i] + y;
            self.comp[i] = (t - self.sum[i]) - y;
            self.sum[i] = t;
        }
    }

    pub fn value(&self) -> &CVector {
        &self.sum
    }

    pub fn into_value(self) -> CVector {
        self.sum
    }
}
