//! Dense complex helpers shared by the state, kernel and tomography modules.
//!
//! Qubit 0 is the leftmost tensor factor, so in a basis index `i` of an
//! `n`-qubit register the bit of qubit `q` is `(i >> (n - 1 - q)) & 1`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

#[inline]
pub(crate) fn qubit_bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

pub(crate) fn to_dynamic(m: &Matrix2<Complex64>) -> CMatrix {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

/// Kronecker product of 2×2 factors in qubit order.
pub(crate) fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Matrix2<Complex64>>) -> CMatrix {
    factors
        .into_iter()
        .fold(DMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(&to_dynamic(f)))
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0_f64;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `Tr(a·b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for r in 0..d {
        for c in 0..d {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Ascending eigenvalues and matching eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Rebuild `V diag(f(λ)) V†` from a Hermitian eigendecomposition.
pub(crate) fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        if w == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()).scale(w);
    }
    out
}

/// Left-multiply `m` by `u` acting on `qubit` of an `n`-qubit register.
pub(crate) fn apply_left(m: &mut CMatrix, u: &Matrix2<Complex64>, qubit: usize, n: usize) {
    let stride = 1usize << (n - 1 - qubit);
    let d = m.nrows();
    for col in 0..m.ncols() {
        for r0 in 0..d {
            if r0 & stride != 0 {
                continue;
            }
            let r1 = r0 | stride;
            let a = m[(r0, col)];
            let b = m[(r1, col)];
            m[(r0, col)] = u[(0, 0)] * a + u[(0, 1)] * b;
            m[(r1, col)] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
}

/// Right-multiply `m` by `u` acting on `qubit` of an `n`-qubit register.
pub(crate) fn apply_right(m: &mut CMatrix, u: &Matrix2<Complex64>, qubit: usize, n: usize) {
    let stride = 1usize << (n - 1 - qubit);
    let d = m.ncols();
    for row in 0..m.nrows() {
        for c0 in 0..d {
            if c0 & stride != 0 {
                continue;
            }
            let c1 = c0 | stride;
            let a = m[(row, c0)];
            let b = m[(row, c1)];
            m[(row, c0)] = a * u[(0, 0)] + b * u[(1, 0)];
            m[(row, c1)] = a * u[(0, 1)] + b * u[(1, 1)];
        }
    }
}

/// `Tr(P m)` for the Pauli string `P = σ_{labels[0]} ⊗ σ_{labels[1]} ⊗ …`
/// with labels 0=I, 1=X, 2=Y, 3=Z.
pub(crate) fn pauli_string_trace(m: &CMatrix, labels: &[u8]) -> Complex64 {
    let n = labels.len();
    let d = 1usize << n;
    let mut flip = 0usize;
    for (q, &l) in labels.iter().enumerate() {
        if l == 1 || l == 2 {
            flip |= 1 << (n - 1 - q);
        }
    }
    let mut acc = ZERO;
    for row in 0..d {
        // P[row, col] with col = row ^ flip
        let col = row ^ flip;
        let mut coeff = ONE;
        for (q, &l) in labels.iter().enumerate() {
            let bit = qubit_bit(row, q, n);
            coeff *= match (l, bit) {
                (0, _) | (1, _) => ONE,
                (2, 0) => -I,
                (2, _) => I,
                (3, 0) => ONE,
                _ => -ONE,
            };
        }
        acc += coeff * m[(col, row)];
    }
    acc
}

/// Pauli-string labels of basis element `alpha` (base-4 digits, qubit 0 most significant).
pub(crate) fn pauli_labels(alpha: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((alpha >> (2 * (n - 1 - q))) & 3) as u8).collect()
}

pub(crate) fn pauli_string_matrix(labels: &[u8]) -> CMatrix {
    let factors: Vec<Matrix2<Complex64>> = labels
        .iter()
        .map(|&l| match l {
            0 => Matrix2::identity(),
            1 => pauli_x(),
            2 => pauli_y(),
            _ => pauli_z(),
        })
        .collect();
    kron_all(factors.iter())
}
