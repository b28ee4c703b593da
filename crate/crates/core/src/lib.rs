//! Spin Wigner functions of N-qubit registers.
//!
//! The Wigner function of a state `ρ` at the phase point `Ω` (one Euler
//! triple per qubit) is `W(Ω) = Tr(ρ Δ(Ω))` with the displaced kernel
//! `Δ(Ω) = 𝕌(Ω) Π 𝕌†(Ω)`. Two extended parities `Π` are provided, see
//! [`ParityKind`]. Besides pointwise evaluation the crate simulates the
//! rotate-and-read-populations measurement protocol, reconstructs density
//! matrices from Wigner data and certifies GHZ-type entanglement from the
//! equatorial interference fringe.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correspondence;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod states;
pub mod tomography;
pub mod wigner;
pub mod witness;

pub use error::{Error, Result};
pub use kernels::{EulerAngles, KernelOperator, ParityKind, PhasePoint};
pub use quadrature::Quadrature;
pub use states::{BlochVector, DensityMatrix, GhzFamilyParam, PureState, QubitCount};
