//! Pointwise Wigner functions, slices and scans, closed-form oracles for the
//! GHZ family and the clock state, and phase-space quadrature.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, EulerAngles, ParityKind, PhasePoint};
use crate::linalg::{self, CMatrix};
use crate::quadrature::Quadrature;
use crate::states::{self, DensityMatrix, QubitCount};
use crate::tomography;

const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerSample {
    pub point: PhasePoint,
    pub value: f64,
}

/// Two-axis grid of Wigner values, row-major with the first axis outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub axis_names: Vec<String>,
    pub axis_values: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl SliceGrid {
    pub fn new(axis_names: [&str; 2], axis_values: [Vec<f64>; 2], values: Vec<f64>) -> Result<Self> {
        let [a, b] = axis_values;
        if a.len() * b.len() != values.len() {
            return Err(Error::invalid(format!(
                "grid of {}×{} axes cannot hold {} values",
                a.len(),
                b.len(),
                values.len()
            )));
        }
        Ok(Self {
            axis_names: axis_names.iter().map(|s| s.to_string()).collect(),
            axis_values: vec![a, b],
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis_values[0].len(), self.axis_values[1].len())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis_values[1].len() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_dims(rho: &DensityMatrix, p: &PhasePoint) -> Result<()> {
    if p.n() != rho.n().get() {
        return Err(Error::invalid(format!(
            "phase point has {} qubits but the state has {}",
            p.n(),
            rho.n()
        )));
    }
    Ok(())
}

fn real_part(z: num_complex::Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::NumericFailure(format!(
            "Wigner value has imaginary residue {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `W(Ω) = Tr(ρ Δ(Ω))`.
pub fn wigner_at(rho: &DensityMatrix, p: &PhasePoint, kind: ParityKind) -> Result<f64> {
    check_dims(rho, p)?;
    let kernel = kernels::kernel_at(p, kind)?;
    real_part(linalg::trace_of_product(rho.matrix(), kernel.matrix()))
}

/// `W(Ω) = Σ_n ρ̃_nn Π_nn` with the rotated state `ρ̃ = 𝕌†ρ𝕌`.
pub fn wigner_via_populations(rho: &DensityMatrix, p: &PhasePoint, kind: ParityKind) -> Result<f64> {
    check_dims(rho, p)?;
    let rotated = tomography::rotate_state(rho, p)?;
    let parity = kernels::parity_diagonal(kind, rho.n());
    let m = rotated.matrix();
    let sum = parity
        .iter()
        .enumerate()
        .map(|(i, pi)| m[(i, i)] * *pi)
        .fold(num_complex::Complex64::new(0.0, 0.0), |a, b| a + b);
    real_part(sum)
}

fn require_nonempty(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("slice axis `{name}` is empty")));
    }
    Ok(())
}

/// Grid over (θ, φ) with every qubit at the same angles and Φ = 0.
pub fn equal_angle_slice(rho: &DensityMatrix, kind: ParityKind, thetas: &[f64], phis: &[f64]) -> Result<SliceGrid> {
    require_nonempty("theta", thetas)?;
    require_nonempty("phi", phis)?;
    let n = rho.n().get();
    let mut values = Vec::with_capacity(thetas.len() * phis.len());
    for &t in thetas {
        for &f in phis {
            let p = PhasePoint::uniform(n, EulerAngles::new(t, f, 0.0));
            values.push(wigner_at(rho, &p, kind)?);
        }
    }
    SliceGrid::new(["theta", "phi"], [thetas.to_vec(), phis.to_vec()], values)
}

/// Two-qubit grid over (θ₁, θ₂) with all φ and Φ zero.
pub fn theta_theta_slice(rho: &DensityMatrix, kind: ParityKind, thetas1: &[f64], thetas2: &[f64]) -> Result<SliceGrid> {
    if rho.n().get() != 2 {
        return Err(Error::invalid(format!(
            "theta-theta slice needs a two-qubit state, got {} qubits",
            rho.n()
        )));
    }
    require_nonempty("theta1", thetas1)?;
    require_nonempty("theta2", thetas2)?;
    let mut values = Vec::with_capacity(thetas1.len() * thetas2.len());
    for &t1 in thetas1 {
        for &t2 in thetas2 {
            let p = PhasePoint::new(vec![EulerAngles::new(t1, 0.0, 0.0), EulerAngles::new(t2, 0.0, 0.0)]);
            values.push(wigner_at(rho, &p, kind)?);
        }
    }
    SliceGrid::new(["theta1", "theta2"], [thetas1.to_vec(), thetas2.to_vec()], values)
}

/// Equatorial point θᵢ = π/4, φᵢ = φ on every qubit.
pub fn equator_point(n: usize, phi: f64) -> PhasePoint {
    PhasePoint::uniform(n, EulerAngles::new(FRAC_PI_4, phi, 0.0))
}

/// `count` equally spaced φ values on [0, π).
pub fn equator_phis(count: usize) -> Vec<f64> {
    (0..count).map(|k| PI * k as f64 / count as f64).collect()
}

/// `res` values of θ spanning [0, π/2] inclusive; `[0]` when `res == 1`.
pub fn raster_thetas(res: usize) -> Vec<f64> {
    match res {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..res)
            .map(|i| FRAC_PI_4 * 2.0 * i as f64 / (res - 1) as f64)
            .collect(),
    }
}

/// `res` values of φ on [0, π); the period of the doubled-angle axis.
pub fn raster_phis(res: usize) -> Vec<f64> {
    equator_phis(res)
}

/// Equal-angle raster points, θ outermost.
pub fn raster_points(n: usize, res: usize) -> Vec<PhasePoint> {
    let phis = raster_phis(res);
    raster_thetas(res)
        .into_iter()
        .flat_map(|t| {
            phis.iter()
                .map(move |&f| PhasePoint::uniform(n, EulerAngles::new(t, f, 0.0)))
        })
        .collect()
}

pub fn equator_scan(rho: &DensityMatrix, kind: ParityKind, phi_values: &[f64]) -> Result<Vec<WignerSample>> {
    let n = rho.n().get();
    if n < 2 {
        return Err(Error::invalid("equator scan needs at least two qubits"));
    }
    phi_values
        .iter()
        .map(|&phi| {
            let point = equator_point(n, phi);
            let value = wigner_at(rho, &point, kind)?;
            Ok(WignerSample { point, value })
        })
        .collect()
}

/// Closed-form tensor-kernel Wigner function of `γ·GHZ + (1−γ)·mixture`.
pub fn analytic_ghz_wigner(n: usize, gamma: f64, p: &PhasePoint) -> Result<f64> {
    if p.n() != n || n == 0 {
        return Err(Error::invalid(format!(
            "phase point has {} qubits, expected {n}",
            p.n()
        )));
    }
    let s3 = 3f64.sqrt();
    let norm = 2f64.powi(n as i32 + 1);
    let mut up = 1.0;
    let mut down = 1.0;
    let mut fringe = 1.0;
    let mut phase = 0.0;
    for a in &p.angles {
        let c = (2.0 * a.theta).cos();
        up *= 1.0 + s3 * c;
        down *= 1.0 - s3 * c;
        fringe *= s3 * (2.0 * a.theta).sin();
        phase += a.phi;
    }
    Ok(up / norm + down / norm + gamma / 2f64.powi(n as i32) * fringe * (2.0 * phase).cos())
}

/// Closed-form tensor-kernel Wigner function of the clock state.
pub fn analytic_clock_wigner(n: usize, p: &PhasePoint) -> Result<f64> {
    if p.n() != n || n == 0 {
        return Err(Error::invalid(format!(
            "phase point has {} qubits, expected {n}",
            p.n()
        )));
    }
    let s3 = 3f64.sqrt();
    let product: f64 = p
        .angles
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let k = (i + 1) as f64;
            1.0 + s3 * (2.0 * a.theta).sin() * (2.0 * a.phi + 2.0 * PI * k / n as f64).cos()
        })
        .product();
    Ok(product / 2f64.powi(n as i32))
}

/// Quadrature of `Δ(Ω)` over the product measure.
pub fn integrate_kernel(kind: ParityKind, n: usize, q: &Quadrature) -> Result<CMatrix> {
    let count = QubitCount::new(n)?;
    let mut acc = CMatrix::zeros(count.dim(), count.dim());
    let mut err = None;
    q.for_each_point(n, |p, w| match kernels::kernel_at(p, kind) {
        Ok(k) => acc += k.matrix().scale(w),
        Err(e) => err = Some(e),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn tensor_only(kind: ParityKind, operation: &'static str) -> Result<()> {
    match kind {
        ParityKind::TensorSu2 => Ok(()),
        ParityKind::Su2N => Err(Error::UnsupportedForKind {
            operation,
            kind: kind.name(),
        }),
    }
}

fn integrate(n: usize, q: &Quadrature, mut f: impl FnMut(&PhasePoint) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    let mut err = None;
    q.for_each_point(n, |p, w| {
        if err.is_some() {
            return;
        }
        match f(p) {
            Ok(v) => total += w * v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `∫ W dΩ`, which equals `Tr ρ` for the tensor kernel.
pub fn integrate_wigner(rho: &DensityMatrix, kind: ParityKind, q: &Quadrature) -> Result<f64> {
    tensor_only(kind, "integrate_wigner")?;
    integrate(rho.n().get(), q, |p| wigner_at(rho, p, kind))
}

/// `∫ W₁ W₂ dΩ`, which equals `Tr(ρ₁ρ₂)` for the tensor kernel.
pub fn overlap_integral(rho1: &DensityMatrix, rho2: &DensityMatrix, kind: ParityKind, q: &Quadrature) -> Result<f64> {
    tensor_only(kind, "overlap_integral")?;
    if rho1.n() != rho2.n() {
        return Err(Error::invalid("overlap needs states on the same number of qubits"));
    }
    integrate(rho1.n().get(), q, |p| {
        Ok(wigner_at(rho1, p, kind)? * wigner_at(rho2, p, kind)?)
    })
}

/// Wigner function of one qubit obtained by integrating out all others.
#[derive(Debug, Clone)]
pub struct MarginalWigner<'a> {
    rho: &'a DensityMatrix,
    keep: usize,
    q: Quadrature,
}

impl MarginalWigner<'_> {
    pub fn keep(&self) -> usize {
        self.keep
    }

    pub fn value(&self, a: &EulerAngles) -> Result<f64> {
        let n = self.rho.n().get();
        let mut full = PhasePoint::origin(n);
        integrate(n - 1, &self.q, |rest| {
            let mut others = rest.angles.iter();
            for (qubit, slot) in full.angles.iter_mut().enumerate() {
                *slot = if qubit == self.keep {
                    *a
                } else {
                    *others.next().expect("n - 1 remaining angles")
                };
            }
            wigner_at(self.rho, &full, ParityKind::TensorSu2)
        })
    }
}

pub fn marginal_slice<'a>(
    rho: &'a DensityMatrix,
    kind: ParityKind,
    keep: usize,
    q: &Quadrature,
) -> Result<MarginalWigner<'a>> {
    tensor_only(kind, "marginal_slice")?;
    let n = rho.n().get();
    if n < 2 {
        return Err(Error::invalid("marginal needs at least two qubits"));
    }
    if keep >= n {
        return Err(Error::invalid(format!("qubit {keep} out of range for {n} qubits")));
    }
    Ok(MarginalWigner {
        rho,
        keep,
        q: q.clone(),
    })
}

/// Convenience: the single-qubit Wigner function of the reduced state.
pub fn reduced_wigner(rho: &DensityMatrix, keep: usize, a: &EulerAngles) -> Result<f64> {
    let reduced = states::reduced_density(rho, &[keep])?;
    wigner_at(&reduced, &PhasePoint::new(vec![*a]), ParityKind::TensorSu2)
}
