//! SU(2) Euler rotations, the two extended parity operators and the
//! displaced kernels `Δ(Ω) = U(Ω) Π U†(Ω)`.
//!
//! Each qubit is rotated by `U = e^{iσ_z φ} e^{-iσ_y θ} e^{iσ_z Φ}`. With this
//! ordering the single-qubit kernel is `½(I + √3 n̂·σ)` with axis
//! `n̂ = (sin2θ cos2φ, −sin2θ sin2φ, cos2θ)`: the axis moves on doubled
//! angles, so θ ∈ [0, π/2] and φ ∈ [0, π) cover the Bloch sphere once.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::states::{BlochVector, QubitCount};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct EulerAngles {
    pub theta: f64,
    pub phi: f64,
    /// Third Euler angle. It never affects a kernel, only the rotation itself.
    pub big_phi: f64,
}

impl EulerAngles {
    pub const fn new(theta: f64, phi: f64, big_phi: f64) -> Self {
        Self { theta, phi, big_phi }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.phi.is_finite() && self.big_phi.is_finite()
    }
}

impl From<[f64; 3]> for EulerAngles {
    fn from([theta, phi, big_phi]: [f64; 3]) -> Self {
        Self { theta, phi, big_phi }
    }
}

impl From<EulerAngles> for [f64; 3] {
    fn from(a: EulerAngles) -> Self {
        [a.theta, a.phi, a.big_phi]
    }
}

/// One Euler triple per qubit, in qubit order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub angles: Vec<EulerAngles>,
}

impl PhasePoint {
    pub fn new(angles: Vec<EulerAngles>) -> Self {
        Self { angles }
    }

    pub fn origin(n: usize) -> Self {
        Self::uniform(n, EulerAngles::default())
    }

    /// The same angles on every qubit.
    pub fn uniform(n: usize, a: EulerAngles) -> Self {
        Self { angles: vec![a; n] }
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub(crate) fn check(&self, n: QubitCount) -> Result<()> {
        if self.angles.len() != n.get() {
            return Err(Error::invalid(format!(
                "phase point has {} angle triples for a {}-qubit state",
                self.angles.len(),
                n
            )));
        }
        if let Some(i) = self.angles.iter().position(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("angles of qubit {i} are not finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParityKind {
    /// Full-group parity: one enhanced entry on |0…0⟩, all others equal.
    #[serde(rename = "su2n")]
    Su2N,
    /// Tensor product of single-qubit parities `½(I + √3σ_z)`.
    #[serde(rename = "tensor")]
    TensorSu2,
}

impl ParityKind {
    pub fn name(self) -> &'static str {
        match self {
            ParityKind::Su2N => "su2n",
            ParityKind::TensorSu2 => "tensor",
        }
    }
}

impl std::str::FromStr for ParityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "su2n" => Ok(ParityKind::Su2N),
            "tensor" => Ok(ParityKind::TensorSu2),
            other => Err(Error::invalid(format!(
                "unknown parity kind `{other}` (expected su2n or tensor)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    n: QubitCount,
    matrix: CMatrix,
}

impl KernelOperator {
    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// `e^{iσ_z φ} e^{-iσ_y θ} e^{iσ_z Φ}` multiplied out.
pub fn su2_rotation(a: &EulerAngles) -> Matrix2<Complex64> {
    let z_phi = Matrix2::new(
        Complex64::from_polar(1.0, a.phi),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, -a.phi),
    );
    let (s, c) = a.theta.sin_cos();
    let y_theta = Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    );
    let z_big = Matrix2::new(
        Complex64::from_polar(1.0, a.big_phi),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, -a.big_phi),
    );
    z_phi * y_theta * z_big
}

/// Kronecker product of the per-qubit rotations.
pub fn composite_rotation(p: &PhasePoint) -> CMatrix {
    let factors: Vec<_> = p.angles.iter().map(su2_rotation).collect();
    linalg::kron_all(factors.iter())
}

/// Diagonal of the extended parity in the computational basis.
pub fn parity_diagonal(kind: ParityKind, n: QubitCount) -> Vec<f64> {
    let d = n.dim();
    match kind {
        ParityKind::Su2N => {
            let df = d as f64;
            let root = (df + 1.0).sqrt();
            let mut diag = vec![(1.0 - root) / df; d];
            diag[0] = (1.0 + (df - 1.0) * root) / df;
            diag
        }
        ParityKind::TensorSu2 => {
            let plus = (1.0 + SQRT_3) / 2.0;
            let minus = (1.0 - SQRT_3) / 2.0;
            (0..d)
                .map(|i| {
                    let ones = i.count_ones() as i32;
                    plus.powi(n.get() as i32 - ones) * minus.powi(ones)
                })
                .collect()
        }
    }
}

pub fn extended_parity(kind: ParityKind, n: QubitCount) -> KernelOperator {
    let diag: Vec<Complex64> = parity_diagonal(kind, n)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    KernelOperator {
        n,
        matrix: CMatrix::from_diagonal(&CVector::from_vec(diag)),
    }
}

/// Single-qubit kernel `½(I + √3 n̂·σ)`.
fn qubit_kernel(a: &EulerAngles) -> Matrix2<Complex64> {
    let u = su2_rotation(a);
    let pi1 = Matrix2::new(
        Complex64::new((1.0 + SQRT_3) / 2.0, 0.0),
        ZERO,
        ZERO,
        Complex64::new((1.0 - SQRT_3) / 2.0, 0.0),
    );
    let k = u * pi1 * u.adjoint();
    // exact Hermitian symmetry
    (k + k.adjoint()).scale(0.5)
}

/// `Δ(Ω) = 𝕌 Π 𝕌†`.
///
/// Both parities are evaluated through their structure rather than by
/// dense conjugation: the tensor kernel factorizes over qubits, and the
/// full-group kernel is `r·I + √(2^n+1)·|ψ⟩⟨ψ|` with `|ψ⟩ = 𝕌|0…0⟩`.
pub fn kernel_at(p: &PhasePoint, kind: ParityKind) -> Result<KernelOperator> {
    let n = QubitCount::new(p.n())?;
    p.check(n)?;
    let matrix = match kind {
        ParityKind::TensorSu2 => {
            let factors: Vec<_> = p.angles.iter().map(qubit_kernel).collect();
            linalg::kron_all(factors.iter())
        }
        ParityKind::Su2N => {
            let d = n.dim() as f64;
            let root = (d + 1.0).sqrt();
            let rest = (1.0 - root) / d;
            let mut psi = CVector::from_element(1, ONE);
            for a in &p.angles {
                let u = su2_rotation(a);
                psi = psi.kronecker(&CVector::from_row_slice(&[u[(0, 0)], u[(1, 0)]]));
            }
            let mut m = (&psi * psi.adjoint()).scale(root);
            for i in 0..n.dim() {
                m[(i, i)] = Complex64::new(m[(i, i)].re + rest, 0.0);
            }
            m
        }
    };
    Ok(KernelOperator { n, matrix })
}

/// Unit axis `n̂` of the single-qubit kernel at these angles.
pub fn kernel_axis(a: &EulerAngles) -> BlochVector {
    let (s2t, c2t) = (2.0 * a.theta).sin_cos();
    let (s2p, c2p) = (2.0 * a.phi).sin_cos();
    BlochVector {
        x: s2t * c2p,
        y: -s2t * s2p,
        z: c2t,
    }
}

/// Angles in the fundamental domain θ ∈ [0, π/2], φ ∈ [0, π) whose kernel
/// axis points along `axis` (normalized first). Φ is set to zero.
pub fn angles_for_axis(axis: &BlochVector) -> Result<EulerAngles> {
    let norm = axis.norm();
    if !(norm > 0.0) {
        return Err(Error::invalid("kernel axis must be nonzero"));
    }
    let z = (axis.z / norm).clamp(-1.0, 1.0);
    let theta = 0.5 * z.acos();
    let azimuth = axis.y.atan2(axis.x);
    let phi = (-azimuth / 2.0).rem_euclid(std::f64::consts::PI);
    Ok(EulerAngles::new(theta, phi, 0.0))
}
