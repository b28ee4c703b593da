//! Construction and validation of N-qubit pure and mixed states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Largest supported register; the dense `2^n × 2^n` storage must stay tractable.
pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to this floor count as round-off and are clipped on demand.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct QubitCount(usize);

impl QubitCount {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n}"
            )));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn dim(self) -> usize {
        1 << self.0
    }
}

impl fmt::Display for QubitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<usize> for QubitCount {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

/// Register size implied by a vector or matrix dimension.
fn qubits_for_dim(dim: usize) -> Result<QubitCount> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!("dimension {dim} is not a power of two ≥ 2")));
    }
    QubitCount::new(dim.trailing_zeros() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: QubitCount,
    amplitudes: CVector,
}

impl PureState {
    /// Validates the normalization to 1e-12.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { n, amplitudes })
    }

    /// Normalizes the input first; fails on a zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let n = QubitCount::new(n)?;
        if index >= n.dim() {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut v = CVector::zeros(n.dim());
        v[index] = ONE;
        Ok(Self { n, amplitudes: v })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: QubitCount,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace to 1e-12 and the spectrum against
    /// [`EIGENVALUE_FLOOR`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self::hermitian_unit_trace(matrix)?;
        let min = rho.min_eigenvalue();
        if min < EIGENVALUE_FLOOR {
            return Err(Error::invalid(format!(
                "density matrix has eigenvalue {min:e} below the floor {EIGENVALUE_FLOOR:e}"
            )));
        }
        Ok(rho)
    }

    /// Like [`DensityMatrix::new`] but without the positivity check. Used for
    /// linear-inversion estimates, which may carry small negative eigenvalues.
    pub fn hermitian_unit_trace(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        let n = qubits_for_dim(matrix.nrows())?;
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::invalid(format!("matrix is not Hermitian (deviation {dev:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::invalid(format!("trace is {tr}, expected 1")));
        }
        Ok(Self { n, matrix })
    }

    /// For matrices that are valid by construction (unitary images, sums of
    /// valid states).
    pub(crate) fn from_trusted(n: QubitCount, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), n.dim());
        Self { n, matrix }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let n = QubitCount::new(n)?;
        let d = n.dim();
        Ok(Self {
            n,
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Clip eigenvalues in `(EIGENVALUE_FLOOR, 0)` to zero and renormalize.
    pub fn clip_roundoff(&self) -> Result<Self> {
        let min = self.min_eigenvalue();
        if min < EIGENVALUE_FLOOR {
            return Err(Error::invalid(format!("eigenvalue {min:e} is not round-off")));
        }
        if min >= 0.0 {
            return Ok(self.clone());
        }
        let clipped = linalg::spectral_map(&self.matrix, |l| l.max(0.0));
        let tr = clipped.trace().re;
        Self::new(linalg::hermitize(&clipped.unscale(tr)))
    }
}

/// Bloch vector of a single qubit or a kernel axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if v.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("Bloch vector norm {} exceeds 1", v.norm())));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Bloch vector of a one-qubit density matrix.
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        if rho.n().get() != 1 {
            return Err(Error::invalid("Bloch vector needs a single-qubit state"));
        }
        let m = rho.matrix();
        Ok(Self {
            x: 2.0 * m[(1, 0)].re,
            y: 2.0 * m[(1, 0)].im,
            z: (m[(0, 0)] - m[(1, 1)]).re,
        })
    }
}

/// Interpolation weight between GHZ and its dephased mixture.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct GhzFamilyParam(f64);

impl GhzFamilyParam {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(Self(gamma))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bell {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

pub fn bell(which: Bell) -> PureState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let amps = match which {
        Bell::PhiPlus => [h, ZERO, ZERO, h],
        Bell::PhiMinus => [h, ZERO, ZERO, -h],
        Bell::PsiPlus => [ZERO, h, h, ZERO],
        Bell::PsiMinus => [ZERO, h, -h, ZERO],
    };
    PureState {
        n: QubitCount(2),
        amplitudes: CVector::from_row_slice(&amps),
    }
}

fn at_least_two(n: usize, what: &str) -> Result<QubitCount> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "field `n`: {what} needs at least 2 qubits, got {n}"
        )));
    }
    QubitCount::new(n).map_err(|e| Error::invalid(format!("field `n`: {e}")))
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> Result<PureState> {
    let n = at_least_two(n, "GHZ state")?;
    let mut v = CVector::zeros(n.dim());
    v[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[n.dim() - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState { n, amplitudes: v })
}

/// Equal superposition of the weight-one bitstrings.
pub fn w_state(n: usize) -> Result<PureState> {
    let n = at_least_two(n, "W state")?;
    let a = Complex64::new(1.0 / (n.get() as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(n.dim());
    for q in 0..n.get() {
        v[1 << q] = a;
    }
    Ok(PureState { n, amplitudes: v })
}

/// Product of `(|0⟩ + e^{2πik/n}|1⟩)/√2` for k = 1..n, factor k at position k−1.
pub fn clock_state(n: usize) -> Result<PureState> {
    let count = QubitCount::new(n).map_err(|e| Error::invalid(format!("field `n`: {e}")))?;
    let angles: Vec<(f64, f64)> = (1..=n).map(|k| (PI / 2.0, 2.0 * PI * k as f64 / n as f64)).collect();
    let psi = product_state(&angles)?;
    debug_assert_eq!(psi.n, count);
    Ok(psi)
}

/// `γ|GHZ⟩⟨GHZ| + (1−γ)(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)/2`, assembled entrywise.
pub fn ghz_family(n: usize, gamma: GhzFamilyParam) -> Result<DensityMatrix> {
    let n = at_least_two(n, "GHZ family")?;
    let d = n.dim();
    let mut m = CMatrix::zeros(d, d);
    m[(0, 0)] = Complex64::new(0.5, 0.0);
    m[(d - 1, d - 1)] = Complex64::new(0.5, 0.0);
    m[(0, d - 1)] = Complex64::new(gamma.get() / 2.0, 0.0);
    m[(d - 1, 0)] = Complex64::new(gamma.get() / 2.0, 0.0);
    Ok(DensityMatrix { n, matrix: m })
}

/// Tensor product of `cos(Θ/2)|0⟩ + e^{iφ} sin(Θ/2)|1⟩` over the given Bloch angles.
pub fn product_state(bloch_angles: &[(f64, f64)]) -> Result<PureState> {
    let n = QubitCount::new(bloch_angles.len())?;
    let mut v = CVector::from_element(1, ONE);
    for &(polar, azimuth) in bloch_angles {
        if !polar.is_finite() || !azimuth.is_finite() {
            return Err(Error::invalid("Bloch angles must be finite"));
        }
        let factor = CVector::from_row_slice(&[
            Complex64::new((polar / 2.0).cos(), 0.0),
            Complex64::from_polar((polar / 2.0).sin(), azimuth),
        ]);
        v = v.kronecker(&factor);
    }
    Ok(PureState { n, amplitudes: v })
}

/// Normalized `|a⟩ + |b⟩`.
pub fn superpose(a: &PureState, b: &PureState) -> Result<PureState> {
    if a.n != b.n {
        return Err(Error::invalid(format!(
            "cannot superpose states on {} and {} qubits",
            a.n, b.n
        )));
    }
    let sum = &a.amplitudes + &b.amplitudes;
    let norm = sum.norm();
    if norm < 1e-12 {
        return Err(Error::DegenerateSuperposition);
    }
    Ok(PureState {
        n: a.n,
        amplitudes: sum.unscale(norm),
    })
}

/// Convex combination `Σ wᵢ ρᵢ`.
pub fn mixture(terms: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::invalid("mixture needs at least one term"));
    };
    let n = first.n;
    let mut total = 0.0;
    let mut m = CMatrix::zeros(n.dim(), n.dim());
    for (i, (w, rho)) in terms.iter().enumerate() {
        if !(*w >= 0.0) {
            return Err(Error::invalid(format!("mixture weight {i} is negative ({w})")));
        }
        if rho.n != n {
            return Err(Error::invalid(format!(
                "mixture term {i} has {} qubits, expected {n}",
                rho.n
            )));
        }
        total += w;
        m += rho.matrix.scale(*w);
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("mixture weights sum to {total}, expected 1")));
    }
    Ok(DensityMatrix { n, matrix: m })
}

/// `|ψ⟩⟨ψ|`.
pub fn density(psi: &PureState) -> DensityMatrix {
    DensityMatrix {
        n: psi.n,
        matrix: &psi.amplitudes * psi.amplitudes.adjoint(),
    }
}

/// Partial trace onto the qubits in `keep`, in ascending index order.
pub fn reduced_density(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n.get();
    if keep.is_empty() {
        return Err(Error::invalid("reduced_density: keep set is empty"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::invalid(format!("qubit index {bad} out of range for {n} qubits")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let compose = |sub: usize, env: usize| -> usize {
        let mut idx = 0usize;
        for (j, &q) in kept.iter().enumerate() {
            idx |= ((sub >> (k - 1 - j)) & 1) << (n - 1 - q);
        }
        for (j, &q) in traced.iter().enumerate() {
            idx |= ((env >> (traced.len() - 1 - j)) & 1) << (n - 1 - q);
        }
        idx
    };
    let dk = 1usize << k;
    let de = 1usize << traced.len();
    let m = DMatrix::from_fn(dk, dk, |r, c| {
        (0..de).fold(ZERO, |acc, e| acc + rho.matrix[(compose(r, e), compose(c, e))])
    });
    Ok(DensityMatrix {
        n: QubitCount(k),
        matrix: m,
    })
}

/// Haar-random pure state from normalized complex Gaussians.
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let n = QubitCount::new(n)?;
    let v = CVector::from_fn(n.dim(), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(v)
}

/// Random mixed state `G G† / Tr(G G†)` with a `dim × rank` Ginibre factor.
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let n = QubitCount::new(n)?;
    if rank == 0 {
        return Err(Error::invalid("rank must be positive"));
    }
    let g = CMatrix::from_fn(n.dim(), rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix {
        n,
        matrix: linalg::hermitize(&m.unscale(tr)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_amplitudes(psi: &PureState, expected: &[Complex64]) {
        assert_eq!(psi.amplitudes().len(), expected.len());
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-14, "{a} vs {e}");
        }
    }

    #[test]
    fn bell_sign_conventions() {
        let h = FRAC_1_SQRT_2;
        assert_amplitudes(&bell(Bell::PhiMinus), &[c(h), c(0.0), c(0.0), c(-h)]);
        assert_amplitudes(&bell(Bell::PsiPlus), &[c(0.0), c(h), c(h), c(0.0)]);
        for b in [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus] {
            assert_abs_diff_eq!(bell(b).norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn ghz_constructor() {
        let g5 = ghz(5).unwrap();
        for (i, a) in g5.amplitudes().iter().enumerate() {
            let e = if i == 0 || i == 31 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((a - c(e)).norm() < 1e-15);
        }
        assert_eq!(ghz(2).unwrap(), bell(Bell::PhiPlus));
        assert_abs_diff_eq!(ghz(3).unwrap().inner(&ghz(3).unwrap()).re, 1.0, epsilon = 1e-15);
        assert!(matches!(ghz(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn w_state_constructor() {
        assert!((w_state(2).unwrap().amplitudes() - bell(Bell::PsiPlus).amplitudes()).norm() < 1e-15);
        let w3 = w_state(3).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for (i, amp) in w3.amplitudes().iter().enumerate() {
            let e = if [1, 2, 4].contains(&i) { a } else { 0.0 };
            assert!((amp - c(e)).norm() < 1e-15);
        }
        let w5 = w_state(5).unwrap();
        let nonzero: Vec<_> = w5.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 5);
        assert!(nonzero.iter().all(|z| (*z - c(1.0 / 5f64.sqrt())).norm() < 1e-15));
        assert!(w_state(1).is_err());
    }

    #[test]
    fn clock_state_expansion() {
        let h = FRAC_1_SQRT_2;
        assert_amplitudes(&clock_state(1).unwrap(), &[c(h), c(h)]);
        // (|0⟩ − |1⟩)/√2 ⊗ (|0⟩ + |1⟩)/√2
        assert_amplitudes(&clock_state(2).unwrap(), &[c(0.5), c(0.5), c(-0.5), c(-0.5)]);
        let c5 = clock_state(5).unwrap();
        assert!(c5
            .amplitudes()
            .iter()
            .all(|z| (z.norm() - 2f64.powf(-2.5)).abs() < 1e-15));
    }

    #[test]
    fn ghz_family_structure() {
        for n in 2..=8 {
            for g in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let rho = ghz_family(n, GhzFamilyParam::new(g).unwrap()).unwrap();
                let d = 1 << n;
                let nonzero = rho.matrix().iter().filter(|z| z.norm() > 0.0).count();
                assert_eq!(nonzero, if g == 0.0 { 2 } else { 4 });
                assert_eq!(rho.matrix()[(0, 0)], c(0.5));
                assert_eq!(rho.matrix()[(d - 1, d - 1)], c(0.5));
                assert_eq!(rho.matrix()[(0, d - 1)], c(g / 2.0));
            }
        }
        let pure = ghz_family(3, GhzFamilyParam::new(1.0).unwrap()).unwrap();
        let expected = density(&ghz(3).unwrap());
        assert!(linalg::frobenius_norm(&(pure.matrix() - expected.matrix())) < 1e-15);
        assert_abs_diff_eq!(pure.purity(), 1.0, epsilon = 1e-14);
        let half = ghz_family(2, GhzFamilyParam::new(0.5).unwrap()).unwrap();
        assert_eq!(half.matrix()[(0, 3)], c(0.25));
        assert_eq!(half.matrix()[(3, 0)], c(0.25));
        assert!(GhzFamilyParam::new(1.5).is_err());
        assert!(GhzFamilyParam::new(-0.1).is_err());
    }

    #[test]
    fn product_state_examples() {
        let zero5 = product_state(&[(0.0, 0.0); 5]).unwrap();
        assert!((zero5.amplitudes()[0] - ONE).norm() < 1e-15);
        let mut angles = [(0.0, 0.0); 5];
        angles[0] = (PI, 0.0);
        let one0000 = product_state(&angles).unwrap();
        assert!((one0000.amplitudes()[0b10000] - ONE).norm() < 1e-15);
        let plus = product_state(&[(PI / 2.0, 0.0); 5]).unwrap();
        assert!(plus
            .amplitudes()
            .iter()
            .all(|z| (z - c(2f64.powf(-2.5))).norm() < 1e-15));
    }

    #[test]
    fn superpose_examples() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amplitudes(&superpose(&zero, &one).unwrap(), &[c(h), c(h)]);
        assert_eq!(superpose(&zero, &zero).unwrap(), zero);
        let g = superpose(&PureState::basis(4, 0).unwrap(), &PureState::basis(4, 15).unwrap()).unwrap();
        assert!((g.amplitudes() - ghz(4).unwrap().amplitudes()).norm() < 1e-15);
        let minus_zero = PureState::new(CVector::from_row_slice(&[-ONE, ZERO])).unwrap();
        assert!(matches!(
            superpose(&zero, &minus_zero),
            Err(Error::DegenerateSuperposition)
        ));
    }

    #[test]
    fn mixture_examples() {
        let rho = density(&ghz(3).unwrap());
        let single = mixture(&[(1.0, rho.clone())]).unwrap();
        assert_eq!(single, rho);

        let zeros = density(&product_state(&[(0.0, 0.0); 5]).unwrap());
        let plus = density(&product_state(&[(PI / 2.0, 0.0); 5]).unwrap());
        let mixed = mixture(&[(0.5, zeros), (0.5, plus)]).unwrap();
        assert_abs_diff_eq!(mixed.matrix().trace().re, 1.0, epsilon = 1e-14);
        assert!(DensityMatrix::new(mixed.matrix().clone()).is_ok());
        assert!(mixed.purity() < 1.0);

        assert!(mixture(&[(0.4, rho.clone()), (0.4, rho.clone())]).is_err());
        assert!(mixture(&[(-0.5, rho.clone()), (1.5, rho)]).is_err());
    }

    #[test]
    fn density_examples() {
        let zero = density(&PureState::basis(1, 0).unwrap());
        assert_eq!(zero.matrix()[(0, 0)], ONE);
        assert_eq!(zero.matrix()[(1, 1)], ZERO);
        let g = density(&ghz(2).unwrap());
        for (r, cc) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((g.matrix()[(r, cc)] - c(0.5)).norm() < 1e-15);
        }
        assert_abs_diff_eq!(g.purity(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reduced_density_examples() {
        let rho = density(&PureState::basis(2, 0b01).unwrap());
        let a = reduced_density(&rho, &[0]).unwrap();
        assert_eq!(a.matrix()[(0, 0)], ONE);
        assert_eq!(a.matrix()[(1, 1)], ZERO);
        let b = reduced_density(&rho, &[1]).unwrap();
        assert_eq!(b.matrix()[(1, 1)], ONE);

        let psi = density(&bell(Bell::PsiPlus));
        let half = reduced_density(&psi, &[0]).unwrap();
        assert!(linalg::frobenius_norm(&(half.matrix() - DensityMatrix::maximally_mixed(1).unwrap().matrix())) < 1e-15);
        assert!(reduced_density(&psi, &[]).is_err());
        assert!(reduced_density(&psi, &[2]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = random_density(3, 4, &mut rng).unwrap();
        let r02 = reduced_density(&r, &[2, 0]).unwrap();
        assert_abs_diff_eq!(r02.matrix().trace().re, 1.0, epsilon = 1e-13);
        assert!(DensityMatrix::new(r02.into_matrix()).is_ok());
    }

    #[test]
    fn reduced_product_factors() {
        let angles = [(0.3, 1.1), (2.0, -0.4), (1.2, 2.5)];
        let rho = density(&product_state(&angles).unwrap());
        for (i, a) in angles.iter().enumerate() {
            let single = density(&product_state(&[*a]).unwrap());
            let red = reduced_density(&rho, &[i]).unwrap();
            assert!(linalg::frobenius_norm(&(red.matrix() - single.matrix())) < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let mut non_herm = CMatrix::identity(2, 2).scale(0.5);
        non_herm[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(non_herm).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_row_slice(&[c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(neg.clone()).is_err());
        assert!(DensityMatrix::hermitian_unit_trace(neg).is_ok());
        let tiny = CMatrix::from_diagonal(&CVector::from_row_slice(&[c(1.0 + 1e-11), c(-1e-11)]));
        let rho = DensityMatrix::new(tiny).unwrap();
        let clipped = rho.clip_roundoff().unwrap();
        assert!(clipped.min_eigenvalue() >= 0.0);
        assert!(QubitCount::new(0).is_err());
        assert!(QubitCount::new(MAX_QUBITS + 1).is_err());
        assert!(BlochVector::new(1.0, 0.1, 0.0).is_err());
    }
}
