//! Simulated rotate-and-read measurement protocol, Wigner estimation from
//! counts, and density-matrix reconstruction.
//!
//! A setting rotates the state to `ρ̃ = 𝕌†ρ𝕌` and reads computational-basis
//! populations; with a diagonal parity `W = Σ_n ρ̃_nn Π_nn`, so the counts of a
//! single setting already estimate one Wigner value.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, angles_for_axis, ParityKind, PhasePoint};
use crate::linalg::{self, pauli_x, pauli_y, pauli_z, CMatrix};
use crate::quadrature::Quadrature;
use crate::states::{BlochVector, DensityMatrix, QubitCount, EIGENVALUE_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub point: PhasePoint,
    pub shots: u64,
}

impl MeasurementSetting {
    pub fn new(point: PhasePoint, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("a measurement setting needs at least one shot"));
        }
        Ok(Self { point, shots })
    }
}

/// Per-qubit readout bit-flip and pre-rotation depolarizing probabilities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub readout_flip: Vec<f64>,
    pub depolarizing: Vec<f64>,
}

impl NoiseModel {
    pub fn noiseless(n: usize) -> Self {
        Self::uniform(n, 0.0, 0.0).expect("zero probabilities are valid")
    }

    pub fn uniform(n: usize, readout_flip: f64, depolarizing: f64) -> Result<Self> {
        let model = Self {
            readout_flip: vec![readout_flip; n],
            depolarizing: vec![depolarizing; n],
        };
        model.validate(n)?;
        Ok(model)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.readout_flip.len() != n || self.depolarizing.len() != n {
            return Err(Error::invalid(format!(
                "noise model has {}/{} entries for {n} qubits",
                self.readout_flip.len(),
                self.depolarizing.len()
            )));
        }
        for (name, values) in [
            ("readout_flip", &self.readout_flip),
            ("depolarizing", &self.depolarizing),
        ] {
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::invalid(format!("{name} probability {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One setting plus the observed bitstring counts (qubit 0 leftmost).
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub counts: BTreeMap<String, u64>,
}

impl CountRecord {
    pub fn n(&self) -> usize {
        self.setting.point.n()
    }

    /// Checks bitstring shape and that the counts add up to the shots.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        QubitCount::new(n)?;
        if self.setting.shots == 0 {
            return Err(Error::invalid("record has zero shots"));
        }
        let mut total = 0u64;
        for (bits, &c) in &self.counts {
            if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::invalid(format!("bitstring `{bits}` is not {n} binary digits")));
            }
            total += c;
        }
        if total != self.setting.shots {
            return Err(Error::invalid(format!(
                "counts sum to {total} but the record has {} shots",
                self.setting.shots
            )));
        }
        Ok(())
    }

    /// Observed frequencies indexed by basis state.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n();
        let shots = self.setting.shots as f64;
        let mut f = vec![0.0; 1 << n];
        for (bits, &c) in &self.counts {
            let idx = usize::from_str_radix(bits, 2).expect("validated bitstring");
            f[idx] = c as f64 / shots;
        }
        Ok(f)
    }
}

pub fn bitstring(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

fn rotated_matrix(rho: &DensityMatrix, p: &PhasePoint) -> Result<CMatrix> {
    let n = rho.n().get();
    if p.n() != n {
        return Err(Error::invalid(format!(
            "phase point has {} qubits but the state has {n}",
            p.n()
        )));
    }
    let mut m = rho.matrix().clone();
    for (q, a) in p.angles.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::invalid(format!("angles of qubit {q} are not finite")));
        }
        let u = kernels::su2_rotation(a);
        linalg::apply_left(&mut m, &u.adjoint(), q, n);
        linalg::apply_right(&mut m, &u, q, n);
    }
    Ok(m)
}

/// `ρ̃ = 𝕌†ρ𝕌`.
pub fn rotate_state(rho: &DensityMatrix, p: &PhasePoint) -> Result<DensityMatrix> {
    let m = rotated_matrix(rho, p)?;
    Ok(DensityMatrix::from_trusted(rho.n(), linalg::hermitize(&m)))
}

/// Single-qubit depolarizing channel `ρ → (1−p)ρ + p·Tr_q(ρ)⊗I/2` on `qubit`.
pub fn depolarize(rho: &DensityMatrix, qubit: usize, p: f64) -> Result<DensityMatrix> {
    let n = rho.n().get();
    if qubit >= n {
        return Err(Error::invalid(format!("qubit {qubit} out of range for {n} qubits")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("depolarizing probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(rho.clone());
    }
    let mut out = rho.matrix().scale(1.0 - 0.75 * p);
    for sigma in [pauli_x(), pauli_y(), pauli_z()] {
        let mut term = rho.matrix().clone();
        linalg::apply_left(&mut term, &sigma, qubit, n);
        linalg::apply_right(&mut term, &sigma, qubit, n);
        out += term.scale(0.25 * p);
    }
    Ok(DensityMatrix::from_trusted(rho.n(), linalg::hermitize(&out)))
}

/// Distribution of reported bitstrings for one setting: depolarize, rotate,
/// read populations, then pass each bit through its readout flip.
pub fn outcome_probabilities(rho: &DensityMatrix, p: &PhasePoint, noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = rho.n().get();
    noise.validate(n)?;
    let mut state = rho.clone();
    for (q, &dp) in noise.depolarizing.iter().enumerate() {
        state = depolarize(&state, q, dp)?;
    }
    let rotated = rotated_matrix(&state, p)?;
    let mut probs = Vec::with_capacity(rotated.nrows());
    for i in 0..rotated.nrows() {
        let v = rotated[(i, i)].re;
        if v < EIGENVALUE_FLOOR {
            return Err(Error::NumericFailure(format!(
                "rotated population {i} is negative ({v:e})"
            )));
        }
        probs.push(v.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NumericFailure("rotated populations sum to zero".into()));
    }
    probs.iter_mut().for_each(|v| *v /= total);
    for (q, &eps) in noise.readout_flip.iter().enumerate() {
        if eps == 0.0 {
            continue;
        }
        let mask = 1usize << (n - 1 - q);
        let before = probs.clone();
        for (i, v) in probs.iter_mut().enumerate() {
            *v = (1.0 - eps) * before[i] + eps * before[i ^ mask];
        }
    }
    Ok(probs)
}

/// Multinomial draw of `shots` outcomes via sequential conditional binomials.
pub fn draw_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let cond = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, cond)
            .map_err(|e| Error::NumericFailure(format!("binomial draw: {e}")))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}

fn counts_to_record(setting: MeasurementSetting, counts: &[u64]) -> CountRecord {
    let n = setting.point.n();
    let map = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (bitstring(i, n), c))
        .collect();
    CountRecord { setting, counts: map }
}

/// Simulated counts for one setting; deterministic in `seed` (ChaCha8).
pub fn sample_counts(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    noise: &NoiseModel,
    seed: u64,
) -> Result<CountRecord> {
    if setting.shots == 0 {
        return Err(Error::invalid("a measurement setting needs at least one shot"));
    }
    let probs = outcome_probabilities(rho, &setting.point, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = draw_counts(&probs, setting.shots, &mut rng)?;
    Ok(counts_to_record(setting.clone(), &counts))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th setting in a batch: `splitmix64(seed ^ splitmix64(index))`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Simulates every setting with its own derived seed. Settings run in
/// parallel; the output does not depend on scheduling.
pub fn simulate_batch(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| sample_counts(rho, s, noise, derive_seed(seed, i as u64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerEstimate {
    pub value: f64,
    pub std_error: f64,
}

pub(crate) fn weighted_estimate(freqs: &[f64], weights: &[f64], shots: u64) -> WignerEstimate {
    let mean: f64 = freqs.iter().zip(weights).map(|(f, w)| f * w).sum();
    let second: f64 = freqs.iter().zip(weights).map(|(f, w)| f * w * w).sum();
    let var = (second - mean * mean).max(0.0) / shots as f64;
    WignerEstimate {
        value: mean,
        std_error: var.sqrt(),
    }
}

/// Plug-in estimate `Σ_n (counts_n/shots) Π_nn` with its multinomial standard error.
pub fn estimate_wigner(rec: &CountRecord, kind: ParityKind) -> Result<WignerEstimate> {
    if rec.setting.shots == 0 {
        return Err(Error::invalid("cannot estimate from zero shots"));
    }
    let freqs = rec.frequencies()?;
    let n = QubitCount::new(rec.n())?;
    Ok(weighted_estimate(
        &freqs,
        &kernels::parity_diagonal(kind, n),
        rec.setting.shots,
    ))
}

/// As [`estimate_wigner`] after undoing independent per-qubit readout flips
/// by inverting each 2×2 confusion matrix.
pub fn estimate_wigner_corrected(rec: &CountRecord, kind: ParityKind, readout_flip: &[f64]) -> Result<WignerEstimate> {
    if rec.setting.shots == 0 {
        return Err(Error::invalid("cannot estimate from zero shots"));
    }
    let n = rec.n();
    if readout_flip.len() != n {
        return Err(Error::invalid(format!(
            "{} readout probabilities for {n} qubits",
            readout_flip.len()
        )));
    }
    let freqs = rec.frequencies()?;
    // The estimator stays linear in the frequencies; fold the (symmetric)
    // inverse confusion matrices into the parity weights.
    let mut weights = kernels::parity_diagonal(kind, QubitCount::new(n)?);
    for (q, &eps) in readout_flip.iter().enumerate() {
        let det = 1.0 - 2.0 * eps;
        if det.abs() < 1e-12 {
            return Err(Error::invalid(format!(
                "readout flip {eps} on qubit {q} is not invertible"
            )));
        }
        let mask = 1usize << (n - 1 - q);
        let before = weights.clone();
        for (i, w) in weights.iter_mut().enumerate() {
            *w = ((1.0 - eps) * before[i] - eps * before[i ^ mask]) / det;
        }
    }
    Ok(weighted_estimate(&freqs, &weights, rec.setting.shots))
}

/// Rows map the coefficients of ρ in the orthonormal Pauli basis
/// `σ_{α₁}⊗…⊗σ_{αₙ}/√(2^n)` to the Wigner values at `points`.
pub fn design_matrix(points: &[PhasePoint], kind: ParityKind) -> Result<DMatrix<f64>> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("design matrix needs at least one point"));
    };
    let n = QubitCount::new(first.n())?;
    let cols = 1usize << (2 * n.get());
    let scale = 1.0 / (n.dim() as f64).sqrt();
    let labels: Vec<Vec<u8>> = (0..cols).map(|a| linalg::pauli_labels(a, n.get())).collect();
    let mut a = DMatrix::zeros(points.len(), cols);
    for (row, p) in points.iter().enumerate() {
        if p.n() != n.get() {
            return Err(Error::invalid(format!(
                "point {row} has {} qubits, expected {n}",
                p.n()
            )));
        }
        let k = kernels::kernel_at(p, kind)?;
        for (col, l) in labels.iter().enumerate() {
            a[(row, col)] = linalg::pauli_string_trace(k.matrix(), l).re * scale;
        }
    }
    Ok(a)
}

/// Four phase points per qubit whose kernel axes form a regular tetrahedron;
/// the `4^n` product points (qubit 0 slowest) are informationally complete.
pub fn tetrahedral_grid(n: usize) -> Result<Vec<PhasePoint>> {
    QubitCount::new(n)?;
    let s2 = 2f64.sqrt();
    let axes = [
        BlochVector { x: 0.0, y: 0.0, z: 1.0 },
        BlochVector {
            x: 2.0 * s2 / 3.0,
            y: 0.0,
            z: -1.0 / 3.0,
        },
        BlochVector {
            x: -s2 / 3.0,
            y: (2.0f64 / 3.0).sqrt(),
            z: -1.0 / 3.0,
        },
        BlochVector {
            x: -s2 / 3.0,
            y: -(2.0f64 / 3.0).sqrt(),
            z: -1.0 / 3.0,
        },
    ];
    let per_qubit = axes.iter().map(angles_for_axis).collect::<Result<Vec<_>>>()?;
    let total = 1usize << (2 * n);
    Ok((0..total)
        .map(|idx| PhasePoint::new((0..n).map(|q| per_qubit[(idx >> (2 * (n - 1 - q))) & 3]).collect()))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Hermitian and unit trace; positive semidefinite when `projected`.
    pub rho_hat: DensityMatrix,
    pub residual_norm: f64,
    pub condition_number: f64,
    pub rank: usize,
    pub projected: bool,
}

/// Least-squares inversion of Wigner values, with optional projection onto
/// the positive cone by eigenvalue clipping.
pub fn reconstruct_density(
    data: &[(PhasePoint, f64)],
    kind: ParityKind,
    project: bool,
) -> Result<ReconstructionResult> {
    let points: Vec<PhasePoint> = data.iter().map(|(p, _)| p.clone()).collect();
    let a = design_matrix(&points, kind)?;
    let n = QubitCount::new(points[0].n())?;
    let required = a.ncols();

    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = smax * f64::EPSILON * (a.nrows().max(a.ncols()) as f64);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < required {
        return Err(Error::NotInformationallyComplete { rank, required });
    }
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);

    let y = DVector::from_iterator(data.len(), data.iter().map(|(_, v)| *v));
    let qr = a.clone().qr();
    let qty = qr.q().transpose() * &y;
    let coeffs = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::NumericFailure("singular triangular factor".into()))?;
    let residual_norm = (&a * &coeffs - &y).norm();

    let d = n.dim();
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = CMatrix::zeros(d, d);
    for (alpha, c) in coeffs.iter().enumerate() {
        let basis = linalg::pauli_string_matrix(&linalg::pauli_labels(alpha, n.get()));
        m += basis.scale(c * scale);
    }
    let mut m = linalg::hermitize(&m);
    let tr = m.trace().re;
    if tr.abs() < 1e-12 {
        return Err(Error::NumericFailure("reconstructed operator has zero trace".into()));
    }
    m = m.unscale(tr);
    if project {
        let clipped = linalg::spectral_map(&m, |l| l.max(0.0));
        let tr = clipped.trace().re;
        if !(tr > 0.0) {
            return Err(Error::NumericFailure("projection removed the whole spectrum".into()));
        }
        m = linalg::hermitize(&clipped.unscale(tr));
    }
    Ok(ReconstructionResult {
        rho_hat: DensityMatrix::hermitian_unit_trace(m)?,
        residual_norm,
        condition_number: smax / smin,
        rank,
        projected: project,
    })
}

/// Readout handling when turning counts into Wigner estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ReadoutCorrection {
    #[default]
    None,
    /// Per-qubit flip probabilities to invert.
    Invert(Vec<f64>),
}

/// Estimate the Wigner value of every record and invert.
pub fn reconstruct_from_counts(
    records: &[CountRecord],
    kind: ParityKind,
    project: bool,
    correction: &ReadoutCorrection,
) -> Result<ReconstructionResult> {
    let data = records
        .iter()
        .map(|r| {
            let est = match correction {
                ReadoutCorrection::None => estimate_wigner(r, kind)?,
                ReadoutCorrection::Invert(eps) => estimate_wigner_corrected(r, kind, eps)?,
            };
            Ok((r.setting.point.clone(), est.value))
        })
        .collect::<Result<Vec<_>>>()?;
    if data.is_empty() {
        return Err(Error::invalid("no count records"));
    }
    reconstruct_density(&data, kind, project)
}

/// `ρ = ∫ W(Ω) Δ(Ω) dΩ` by quadrature; valid for the tensor kernel only.
pub fn weyl_inverse_tensor(
    mut sampler: impl FnMut(&PhasePoint) -> Result<f64>,
    n: usize,
    kind: ParityKind,
    q: &Quadrature,
) -> Result<CMatrix> {
    if kind != ParityKind::TensorSu2 {
        return Err(Error::UnsupportedForKind {
            operation: "weyl_inverse_tensor",
            kind: kind.name(),
        });
    }
    let count = QubitCount::new(n)?;
    let mut acc = CMatrix::zeros(count.dim(), count.dim());
    let mut err = None;
    q.for_each_point(n, |p, w| {
        if err.is_some() {
            return;
        }
        match sampler(p).and_then(|v| Ok((v, kernels::kernel_at(p, kind)?))) {
            Ok((v, k)) => acc += k.matrix().scale(w * v),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn require_psd(rho: &DensityMatrix, name: &str) -> Result<()> {
    let min = rho.min_eigenvalue();
    if min < EIGENVALUE_FLOOR {
        return Err(Error::invalid(format!(
            "{name} is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.n() != sigma.n() {
        return Err(Error::invalid("fidelity needs states on the same number of qubits"));
    }
    require_psd(rho, "rho")?;
    require_psd(sigma, "sigma")?;
    let root = linalg::spectral_map(rho.matrix(), |l| l.max(0.0).sqrt());
    let inner = &root * sigma.matrix() * &root;
    let (vals, _) = linalg::hermitian_eigen(&inner);
    // Round-off eigenvalues would contribute O(√ε) through the square root.
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = top * f64::EPSILON * vals.len() as f64 * 16.0;
    let tr: f64 = vals.iter().filter(|&&l| l > cutoff).map(|l| l.sqrt()).sum();
    Ok((tr * tr).min(1.0))
}

pub fn frobenius_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.n() != sigma.n() {
        return Err(Error::invalid("distance needs states on the same number of qubits"));
    }
    Ok(linalg::frobenius_norm(&(rho.matrix() - sigma.matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::EulerAngles;
    use crate::states::{bell, density, ghz, ghz_family, random_density, Bell, GhzFamilyParam, PureState};
    use crate::wigner::wigner_at;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn zero_state() -> DensityMatrix {
        density(&PureState::basis(1, 0).unwrap())
    }

    #[test]
    fn rotate_state_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(3, 3, &mut rng).unwrap();
        let same = rotate_state(&rho, &PhasePoint::origin(3)).unwrap();
        assert!(linalg::frobenius_norm(&(same.matrix() - rho.matrix())) < 1e-15);

        let flipped = rotate_state(
            &zero_state(),
            &PhasePoint::new(vec![EulerAngles::new(FRAC_PI_2, 0.0, 0.0)]),
        )
        .unwrap();
        assert!((flipped.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);

        let p = PhasePoint::new(vec![
            EulerAngles::new(0.3, 1.2, -0.7),
            EulerAngles::new(2.2, -0.4, 0.1),
            EulerAngles::new(-1.0, 0.5, 3.0),
        ]);
        let rotated = rotate_state(&rho, &p).unwrap();
        let u = kernels::composite_rotation(&p);
        let dense = u.adjoint() * rho.matrix() * &u;
        assert!(linalg::frobenius_norm(&(rotated.matrix() - &dense)) < 1e-13);
        assert!((rotated.matrix().trace().re - 1.0).abs() < 1e-13);
        assert!(linalg::hermitian_deviation(rotated.matrix()) < 1e-15);
        for (a, b) in rotated.eigenvalues().iter().zip(rho.eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(rotate_state(&rho, &PhasePoint::origin(2)).is_err());
    }

    #[test]
    fn noiseless_basis_state_counts() {
        let setting = MeasurementSetting::new(PhasePoint::origin(1), 1000).unwrap();
        let rec = sample_counts(&zero_state(), &setting, &NoiseModel::noiseless(1), 9).unwrap();
        assert_eq!(rec.counts.len(), 1);
        assert_eq!(rec.counts["0"], 1000);
    }

    #[test]
    fn readout_flip_rate() {
        let noise = NoiseModel::uniform(1, 0.046, 0.0).unwrap();
        let setting = MeasurementSetting::new(PhasePoint::origin(1), 1_000_000).unwrap();
        let rec = sample_counts(&zero_state(), &setting, &noise, 2024).unwrap();
        let frac = rec.counts["1"] as f64 / 1e6;
        assert!((frac - 0.046).abs() < 0.005, "{frac}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = density(&ghz(3).unwrap());
        let setting = MeasurementSetting::new(PhasePoint::uniform(3, EulerAngles::new(0.4, 0.2, 0.0)), 4096).unwrap();
        let noise = NoiseModel::uniform(3, 0.02, 0.01).unwrap();
        let a = sample_counts(&rho, &setting, &noise, 77).unwrap();
        let b = sample_counts(&rho, &setting, &noise, 77).unwrap();
        let c = sample_counts(&rho, &setting, &noise, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.validate().is_ok());

        let settings = vec![setting.clone(); 8];
        let batch1 = simulate_batch(&rho, &settings, &noise, 5).unwrap();
        let batch2 = simulate_batch(&rho, &settings, &noise, 5).unwrap();
        assert_eq!(batch1, batch2);
        assert_eq!(
            batch1[3],
            sample_counts(&rho, &setting, &noise, derive_seed(5, 3)).unwrap()
        );
    }

    #[test]
    fn depolarizing_shrinks_bloch_vector() {
        let rho = depolarize(&zero_state(), 0, 0.2).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.9).abs() < 1e-15);
        let full = depolarize(&zero_state(), 0, 1.0).unwrap();
        assert!((full.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(depolarize(&zero_state(), 1, 0.1).is_err());
    }

    #[test]
    fn estimate_examples() {
        let mut counts = BTreeMap::new();
        counts.insert("0".to_string(), 500);
        let rec = CountRecord {
            setting: MeasurementSetting::new(PhasePoint::origin(1), 500).unwrap(),
            counts,
        };
        let est = estimate_wigner(&rec, ParityKind::TensorSu2).unwrap();
        assert!((est.value - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-15);
        assert_eq!(est.std_error, 0.0);

        let mut zero_shots = rec.clone();
        zero_shots.setting.shots = 0;
        assert!(estimate_wigner(&zero_shots, ParityKind::TensorSu2).is_err());
    }

    #[test]
    fn estimate_converges_with_shots() {
        let rho = density(&bell(Bell::PsiPlus));
        let p = PhasePoint::new(vec![EulerAngles::new(0.3, 0.9, 0.0), EulerAngles::new(1.1, 0.2, 0.0)]);
        for kind in [ParityKind::Su2N, ParityKind::TensorSu2] {
            let exact = wigner_at(&rho, &p, kind).unwrap();
            let rec = sample_counts(
                &rho,
                &MeasurementSetting::new(p.clone(), 1_000_000).unwrap(),
                &NoiseModel::noiseless(2),
                3,
            )
            .unwrap();
            let est = estimate_wigner(&rec, kind).unwrap();
            assert!(
                (est.value - exact).abs() < 3.0 * est.std_error,
                "{kind:?}: {} vs {exact}",
                est.value
            );
        }
    }

    #[test]
    fn std_error_scales_inverse_sqrt() {
        let rho = density(&ghz(2).unwrap());
        let p = PhasePoint::uniform(2, EulerAngles::new(FRAC_PI_4, 0.3, 0.0));
        let noise = NoiseModel::noiseless(2);
        let small = estimate_wigner(
            &sample_counts(&rho, &MeasurementSetting::new(p.clone(), 1_000).unwrap(), &noise, 1).unwrap(),
            ParityKind::TensorSu2,
        )
        .unwrap();
        let large = estimate_wigner(
            &sample_counts(&rho, &MeasurementSetting::new(p, 100_000).unwrap(), &noise, 1).unwrap(),
            ParityKind::TensorSu2,
        )
        .unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio / 10.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn readout_correction_removes_bias() {
        let rho = zero_state();
        let noise = NoiseModel::uniform(1, 0.1, 0.0).unwrap();
        let rec = sample_counts(
            &rho,
            &MeasurementSetting::new(PhasePoint::origin(1), 1_000_000).unwrap(),
            &noise,
            11,
        )
        .unwrap();
        let raw = estimate_wigner(&rec, ParityKind::TensorSu2).unwrap();
        let fixed = estimate_wigner_corrected(&rec, ParityKind::TensorSu2, &[0.1]).unwrap();
        let exact = (1.0 + 3f64.sqrt()) / 2.0;
        assert!((raw.value - exact).abs() > 0.1);
        assert!((fixed.value - exact).abs() < 4.0 * fixed.std_error);
        assert!(estimate_wigner_corrected(&rec, ParityKind::TensorSu2, &[0.5]).is_err());
    }

    #[test]
    fn design_matrix_rank_and_consistency() {
        for n in 1..=3 {
            let grid = tetrahedral_grid(n).unwrap();
            assert_eq!(grid.len(), 1 << (2 * n));
            for kind in [ParityKind::Su2N, ParityKind::TensorSu2] {
                let a = design_matrix(&grid, kind).unwrap();
                let sv = a.svd(false, false).singular_values;
                let rank = sv.iter().filter(|&&s| s > 1e-9).count();
                assert_eq!(rank, 1 << (2 * n), "n={n} {kind:?}");
            }
        }
        // The identity column reproduces W of the maximally mixed state.
        let p = PhasePoint::new(vec![EulerAngles::new(0.2, 0.1, 0.0), EulerAngles::new(0.9, 1.4, 0.0)]);
        for kind in [ParityKind::Su2N, ParityKind::TensorSu2] {
            let a = design_matrix(std::slice::from_ref(&p), kind).unwrap();
            let mixed = DensityMatrix::maximally_mixed(2).unwrap();
            // ρ = I/4 has coefficient 1/2 on the normalized identity.
            assert!((a[(0, 0)] * 0.5 - wigner_at(&mixed, &p, kind).unwrap()).abs() < 1e-14);
            let dup = design_matrix(&[p.clone(), p.clone()], kind).unwrap();
            let rank = dup
                .svd(false, false)
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-9)
                .count();
            assert_eq!(rank, 1);
        }
    }

    fn exact_data(rho: &DensityMatrix, points: &[PhasePoint], kind: ParityKind) -> Vec<(PhasePoint, f64)> {
        points
            .iter()
            .map(|p| (p.clone(), wigner_at(rho, p, kind).unwrap()))
            .collect()
    }

    #[test]
    fn noiseless_round_trip() {
        let phi_minus = density(&bell(Bell::PhiMinus));
        let grid = tetrahedral_grid(2).unwrap();
        for kind in [ParityKind::Su2N, ParityKind::TensorSu2] {
            let res = reconstruct_density(&exact_data(&phi_minus, &grid, kind), kind, false).unwrap();
            assert!(frobenius_distance(&res.rho_hat, &phi_minus).unwrap() < 1e-9);
            assert_eq!(res.rank, 16);
            assert!(res.condition_number.is_finite());
            assert!(!res.projected);
        }
        let fam = ghz_family(3, GhzFamilyParam::new(0.5).unwrap()).unwrap();
        let grid3 = tetrahedral_grid(3).unwrap();
        let res = reconstruct_density(
            &exact_data(&fam, &grid3, ParityKind::TensorSu2),
            ParityKind::TensorSu2,
            false,
        )
        .unwrap();
        assert!((res.rho_hat.matrix()[(0, 7)].re - 0.25).abs() < 1e-9);
        assert!((res.rho_hat.matrix()[(7, 0)].re - 0.25).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_points_rejected() {
        let rho = density(&bell(Bell::PsiPlus));
        let grid = tetrahedral_grid(2).unwrap();
        let partial = &grid[..10];
        let err = reconstruct_density(
            &exact_data(&rho, partial, ParityKind::TensorSu2),
            ParityKind::TensorSu2,
            false,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NotInformationallyComplete { rank: 10, required: 16 }
        ));
    }

    #[test]
    fn projection_yields_psd() {
        let rho = density(&bell(Bell::PsiPlus));
        let grid = tetrahedral_grid(2).unwrap();
        let mut data = exact_data(&rho, &grid, ParityKind::TensorSu2);
        for (i, (_, v)) in data.iter_mut().enumerate() {
            *v += if i % 2 == 0 { 0.05 } else { -0.05 };
        }
        let raw = reconstruct_density(&data, ParityKind::TensorSu2, false).unwrap();
        assert!(raw.rho_hat.min_eigenvalue() < 0.0);
        let proj = reconstruct_density(&data, ParityKind::TensorSu2, true).unwrap();
        assert!(proj.projected);
        assert!(proj.rho_hat.min_eigenvalue() > -1e-12);
        assert!(fidelity(&proj.rho_hat, &rho).unwrap() > 0.8);
    }

    #[test]
    fn weyl_inverse_examples() {
        let q1 = Quadrature::default_for(1);
        let zero = zero_state();
        let back = weyl_inverse_tensor(
            |p| wigner_at(&zero, p, ParityKind::TensorSu2),
            1,
            ParityKind::TensorSu2,
            &q1,
        )
        .unwrap();
        assert!(linalg::frobenius_norm(&(back - zero.matrix())) < 1e-10);

        let q2 = Quadrature::default_for(2);
        let psi = density(&bell(Bell::PsiPlus));
        let back = weyl_inverse_tensor(
            |p| wigner_at(&psi, p, ParityKind::TensorSu2),
            2,
            ParityKind::TensorSu2,
            &q2,
        )
        .unwrap();
        assert!(linalg::frobenius_norm(&(back - psi.matrix())) < 1e-8);

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let back = weyl_inverse_tensor(|_| Ok(0.25), 2, ParityKind::TensorSu2, &q2).unwrap();
        assert!(linalg::frobenius_norm(&(back - mixed.matrix())) < 1e-12);

        assert!(weyl_inverse_tensor(|_| Ok(0.0), 1, ParityKind::Su2N, &q1).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = zero_state();
        let one = density(&PureState::basis(1, 1).unwrap());
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        let g = density(&ghz(3).unwrap());
        for gamma in [0.0, 0.3, 0.8, 1.0] {
            let fam = ghz_family(3, GhzFamilyParam::new(gamma).unwrap()).unwrap();
            assert!((fidelity(&g, &fam).unwrap() - (1.0 + gamma) / 2.0).abs() < 1e-10);
        }
        let neg = DensityMatrix::hermitian_unit_trace(CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            num_complex::Complex64::new(1.2, 0.0),
            num_complex::Complex64::new(-0.2, 0.0),
        ])))
        .unwrap();
        assert!(matches!(fidelity(&neg, &zero), Err(Error::InvalidArgument(_))));
        assert!((frobenius_distance(&zero, &one).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
