//! JSON and CSV formats: state specifications, count-record batches, scan
//! documents, verdicts, reconstruction results and slice grids.
//!
//! Parsers report malformed JSON with a line and column, unknown tags by
//! name, and schema violations with a JSON pointer.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernels::{EulerAngles, PhasePoint};
use crate::linalg::CMatrix;
use crate::states::{self, Bell, DensityMatrix, GhzFamilyParam, PureState};
use crate::tomography::{CountRecord, MeasurementSetting, ReconstructionResult};
use crate::wigner::SliceGrid;
use crate::witness::{AngleConvention, EquatorScanResult, WitnessVerdict};

pub const STATE_KINDS: [&str; 8] = [
    "ghz",
    "bell",
    "w",
    "clock",
    "product",
    "ghz_family",
    "mixture",
    "superpose",
];

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_value(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

/// Escape a key for use inside a JSON pointer.
fn pointer_token(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable domain value");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- states

/// Tagged state description, e.g. `{"kind":"ghz","n":5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Ghz {
        n: usize,
    },
    Bell {
        which: Bell,
    },
    W {
        n: usize,
    },
    Clock {
        n: usize,
    },
    /// Bloch angles `[Θ, φ]` per qubit.
    Product {
        angles: Vec<[f64; 2]>,
    },
    GhzFamily {
        n: usize,
        gamma: f64,
    },
    Mixture {
        terms: Vec<MixtureTerm>,
    },
    Superpose {
        a: Box<StateSpec>,
        b: Box<StateSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTerm {
    pub weight: f64,
    pub state: StateSpec,
}

impl StateSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Ghz { .. } => "ghz",
            StateSpec::Bell { .. } => "bell",
            StateSpec::W { .. } => "w",
            StateSpec::Clock { .. } => "clock",
            StateSpec::Product { .. } => "product",
            StateSpec::GhzFamily { .. } => "ghz_family",
            StateSpec::Mixture { .. } => "mixture",
            StateSpec::Superpose { .. } => "superpose",
        }
    }

    /// The pure state, or `None` for the mixed kinds.
    pub fn build_pure(&self) -> Result<Option<PureState>> {
        Ok(Some(match self {
            StateSpec::Ghz { n } => states::ghz(*n)?,
            StateSpec::Bell { which } => states::bell(*which),
            StateSpec::W { n } => states::w_state(*n)?,
            StateSpec::Clock { n } => states::clock_state(*n)?,
            StateSpec::Product { angles } => {
                let pairs: Vec<(f64, f64)> = angles.iter().map(|[t, p]| (*t, *p)).collect();
                states::product_state(&pairs).map_err(|e| Error::invalid(format!("field `angles`: {e}")))?
            }
            StateSpec::Superpose { a, b } => {
                let a = a
                    .build_pure()
                    .map_err(|e| nest("a", e))?
                    .ok_or_else(|| Error::invalid("field `a`: superpose needs a pure state"))?;
                let b = b
                    .build_pure()
                    .map_err(|e| nest("b", e))?
                    .ok_or_else(|| Error::invalid("field `b`: superpose needs a pure state"))?;
                states::superpose(&a, &b)?
            }
            StateSpec::GhzFamily { .. } | StateSpec::Mixture { .. } => return Ok(None),
        }))
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::GhzFamily { n, gamma } => {
                let gamma = GhzFamilyParam::new(*gamma).map_err(|e| Error::invalid(format!("field `gamma`: {e}")))?;
                states::ghz_family(*n, gamma)
            }
            StateSpec::Mixture { terms } => {
                let built = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        Ok((
                            t.weight,
                            t.state.build().map_err(|e| nest(&format!("terms[{i}].state"), e))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                states::mixture(&built).map_err(|e| Error::invalid(format!("field `terms`: {e}")))
            }
            _ => Ok(states::density(
                &self.build_pure()?.expect("pure kinds build a pure state"),
            )),
        }
    }
}

fn nest(field: &str, e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::invalid(format!("in `{field}`: {m}")),
        other => other,
    }
}

fn check_state_tags(v: &Value, pointer: &str) -> Result<()> {
    let Some(obj) = v.as_object() else {
        return Err(Error::schema(pointer, "state spec must be an object"));
    };
    let kind = match obj.get("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(Error::schema(format!("{pointer}/kind"), "must be a string")),
        None => return Err(Error::schema(format!("{pointer}/kind"), "missing state kind")),
    };
    if !STATE_KINDS.contains(&kind.as_str()) {
        return Err(Error::UnknownTag(format!(
            "state kind `{kind}` (expected one of {})",
            STATE_KINDS.join(", ")
        )));
    }
    if kind == "mixture" {
        if let Some(Value::Array(terms)) = obj.get("terms") {
            for (i, t) in terms.iter().enumerate() {
                if let Some(s) = t.get("state") {
                    check_state_tags(s, &format!("{pointer}/terms/{i}/state"))?;
                }
            }
        }
    }
    if kind == "superpose" {
        for field in ["a", "b"] {
            if let Some(s) = obj.get(field) {
                check_state_tags(s, &format!("{pointer}/{field}"))?;
            }
        }
    }
    Ok(())
}

/// Parse a state spec without constructing it.
pub fn parse_state_spec_document(text: &str) -> Result<StateSpec> {
    let v = parse_value(text)?;
    check_state_tags(&v, "")?;
    serde_json::from_value(v).map_err(|e| Error::invalid(e.to_string()))
}

/// Parse and construct the described state.
pub fn parse_state_spec(text: &str) -> Result<DensityMatrix> {
    parse_state_spec_document(text)?.build()
}

pub fn state_spec_to_json(spec: &StateSpec) -> String {
    serde_json::to_string(spec).expect("serializable state spec")
}

/// Accepts inline JSON or a path to a JSON file.
pub fn load_state_spec(arg: &str) -> Result<StateSpec> {
    if arg.trim_start().starts_with('{') {
        parse_state_spec_document(arg)
    } else {
        parse_state_spec_document(&read_text(Path::new(arg))?)
    }
}

/// Density matrix as rows of `[re, im]` pairs.
pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>], pointer: &str) -> Result<CMatrix> {
    let d = rows.len();
    if d == 0 || !d.is_power_of_two() || d == 1 {
        return Err(Error::schema(
            pointer,
            format!("expected a 2^n × 2^n matrix, got {d} rows"),
        ));
    }
    if let Some(r) = rows.iter().position(|row| row.len() != d) {
        return Err(Error::schema(
            format!("{pointer}/{r}"),
            format!("row must have {d} entries"),
        ));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

// ---------------------------------------------------------------- points

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    angles: Vec<EulerAngles>,
}

fn check_angles(angles: &[EulerAngles], pointer: &str) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::schema(pointer, "at least one qubit required"));
    }
    if let Some(i) = angles.iter().position(|a| !a.is_finite()) {
        return Err(Error::schema(format!("{pointer}/{i}"), "angles must be finite"));
    }
    Ok(())
}

/// A JSON array of `{"angles": [[θ, φ, Φ], ...]}` objects.
pub fn parse_points(text: &str) -> Result<Vec<PhasePoint>> {
    let v = parse_value(text)?;
    let Value::Array(items) = v else {
        return Err(Error::schema("", "expected an array of phase points"));
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let doc: PointDoc = serde_json::from_value(item).map_err(|e| Error::schema(format!("/{i}"), e.to_string()))?;
        check_angles(&doc.angles, &format!("/{i}/angles"))?;
        if let Some(first) = out.first().map(PhasePoint::n) {
            if doc.angles.len() != first {
                return Err(Error::schema(
                    format!("/{i}/angles"),
                    format!("expected {first} qubits"),
                ));
            }
        }
        out.push(PhasePoint::new(doc.angles));
    }
    Ok(out)
}

pub fn points_to_json(points: &[PhasePoint]) -> String {
    to_pretty(&points)
}

// ---------------------------------------------------------------- count records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordDoc {
    angles: Vec<EulerAngles>,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

pub fn count_records_to_json(records: &[CountRecord]) -> String {
    let docs: Vec<RecordDoc> = records
        .iter()
        .map(|r| RecordDoc {
            angles: r.setting.point.angles.clone(),
            shots: r.setting.shots,
            counts: r.counts.clone(),
        })
        .collect();
    to_pretty(&docs)
}

pub fn parse_count_records(text: &str) -> Result<Vec<CountRecord>> {
    let v = parse_value(text)?;
    let Value::Array(items) = v else {
        return Err(Error::schema("", "expected an array of count records"));
    };
    let mut out: Vec<CountRecord> = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let doc: RecordDoc = serde_json::from_value(item).map_err(|e| Error::schema(format!("/{i}"), e.to_string()))?;
        check_angles(&doc.angles, &format!("/{i}/angles"))?;
        let n = doc.angles.len();
        if let Some(first) = out.first() {
            if first.n() != n {
                return Err(Error::schema(
                    format!("/{i}/angles"),
                    format!("expected {} qubits", first.n()),
                ));
            }
        }
        if doc.shots == 0 {
            return Err(Error::schema(format!("/{i}/shots"), "must be at least 1"));
        }
        let mut total: u64 = 0;
        for (bits, &c) in &doc.counts {
            if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::schema(
                    format!("/{i}/counts/{}", pointer_token(bits)),
                    format!("bitstring must be {n} binary digits"),
                ));
            }
            total = total
                .checked_add(c)
                .ok_or_else(|| Error::schema(format!("/{i}/counts"), "counts overflow"))?;
        }
        if total != doc.shots {
            return Err(Error::schema(
                format!("/{i}/counts"),
                format!("counts sum to {total}, shots is {}", doc.shots),
            ));
        }
        out.push(CountRecord {
            setting: MeasurementSetting::new(PhasePoint::new(doc.angles), doc.shots)?,
            counts: doc.counts,
        });
    }
    Ok(out)
}

pub fn read_count_records(path: &Path) -> Result<Vec<CountRecord>> {
    parse_count_records(&read_text(path)?)
}

pub fn write_count_records(records: &[CountRecord], path: &Path) -> Result<()> {
    write_text(path, &count_records_to_json(records))
}

// ---------------------------------------------------------------- scans

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSample {
    /// φ in the document's convention (φ̃ = 2φ for hardware).
    pub phi: f64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDocument {
    pub angle_convention: AngleConvention,
    pub samples: Vec<ScanSample>,
}

impl ScanDocument {
    pub fn from_scan(scan: &EquatorScanResult, convention: AngleConvention) -> Self {
        Self {
            angle_convention: convention,
            samples: (0..scan.len())
                .map(|k| ScanSample {
                    phi: convention.from_module_phi(scan.phi_values[k]),
                    estimate: scan.estimates[k],
                    std_error: scan.std_errors[k],
                })
                .collect(),
        }
    }

    /// The scan in the module convention.
    pub fn to_scan(&self) -> Result<EquatorScanResult> {
        EquatorScanResult::new(
            self.samples
                .iter()
                .map(|s| self.angle_convention.to_module_phi(s.phi))
                .collect(),
            self.samples.iter().map(|s| s.estimate).collect(),
            self.samples.iter().map(|s| s.std_error).collect(),
        )
    }
}

pub fn parse_scan_document(text: &str) -> Result<ScanDocument> {
    let mut v = parse_value(text)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("metadata");
    }
    let Some(obj) = v.as_object() else {
        return Err(Error::schema("", "expected a scan object"));
    };
    match obj.get("angle_convention") {
        None => {
            return Err(Error::schema(
                "/angle_convention",
                "convention tag is required (paper|hardware)",
            ))
        }
        Some(Value::String(s)) => {
            s.parse::<AngleConvention>()?;
        }
        Some(_) => return Err(Error::schema("/angle_convention", "must be \"paper\" or \"hardware\"")),
    }
    let doc: ScanDocument = serde_json::from_value(v).map_err(|e| Error::schema("", e.to_string()))?;
    for (i, s) in doc.samples.iter().enumerate() {
        if !(s.phi.is_finite() && s.estimate.is_finite()) {
            return Err(Error::schema(
                format!("/samples/{i}"),
                "phi and estimate must be finite",
            ));
        }
        if !(s.std_error >= 0.0 && s.std_error.is_finite()) {
            return Err(Error::schema(
                format!("/samples/{i}/std_error"),
                "must be finite and non-negative",
            ));
        }
    }
    Ok(doc)
}

pub fn scan_document_to_json(doc: &ScanDocument) -> String {
    to_pretty(doc)
}

// ---------------------------------------------------------------- verdicts and reconstructions

pub fn verdict_to_value(v: &WitnessVerdict) -> Value {
    serde_json::to_value(v).expect("serializable verdict")
}

pub fn parse_verdict(text: &str) -> Result<WitnessVerdict> {
    let mut v = parse_value(text)?;
    // Tools may attach provenance; it is not part of the verdict.
    if let Some(obj) = v.as_object_mut() {
        obj.remove("metadata");
    }
    serde_json::from_value(v).map_err(|e| Error::schema("", e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionDoc {
    pub rho_hat: Vec<Vec<[f64; 2]>>,
    pub residual_norm: f64,
    pub condition_number: f64,
    pub rank: usize,
    pub projected: bool,
    /// Against a reference state; absent when the estimate is not positive semidefinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius_distance: Option<f64>,
}

impl ReconstructionDoc {
    pub fn from_result(r: &ReconstructionResult, fidelity: Option<f64>, frobenius_distance: Option<f64>) -> Self {
        Self {
            rho_hat: matrix_to_rows(r.rho_hat.matrix()),
            residual_norm: r.residual_norm,
            condition_number: r.condition_number,
            rank: r.rank,
            projected: r.projected,
            fidelity,
            frobenius_distance,
        }
    }

    pub fn to_result(&self) -> Result<ReconstructionResult> {
        let m = rows_to_matrix(&self.rho_hat, "/rho_hat")?;
        let rho_hat = if self.projected {
            DensityMatrix::new(m)?
        } else {
            DensityMatrix::hermitian_unit_trace(m)?
        };
        Ok(ReconstructionResult {
            rho_hat,
            residual_norm: self.residual_norm,
            condition_number: self.condition_number,
            rank: self.rank,
            projected: self.projected,
        })
    }
}

pub fn parse_reconstruction(text: &str) -> Result<ReconstructionDoc> {
    let mut v = parse_value(text)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("metadata");
    }
    serde_json::from_value(v).map_err(|e| Error::schema("", e.to_string()))
}

// ---------------------------------------------------------------- grids

const GRID_HEADER: [&str; 3] = ["axis1", "axis2", "value"];

/// CSV with header `axis1,axis2,value`, row-major, 17 significant digits.
/// Leading `#` lines carry the axis names and any caller metadata.
pub fn grid_to_csv(grid: &SliceGrid, metadata: &[String]) -> Result<String> {
    let mut out = Vec::new();
    for line in metadata {
        for l in line.lines() {
            out.extend_from_slice(format!("# {l}\n").as_bytes());
        }
    }
    out.extend_from_slice(format!("# axes: {}\n", grid.axis_names.join(",")).as_bytes());
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(GRID_HEADER)?;
        let (m1, m2) = grid.shape();
        for i in 0..m1 {
            for j in 0..m2 {
                w.write_record([
                    format!("{:.16e}", grid.axis_values[0][i]),
                    format!("{:.16e}", grid.axis_values[1][j]),
                    format!("{:.16e}", grid.get(i, j)),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv buffer>", e))?;
    }
    Ok(String::from_utf8(out).expect("CSV output is UTF-8"))
}

pub fn export_grid_csv(grid: &SliceGrid, path: &Path, metadata: &[String]) -> Result<()> {
    write_text(path, &grid_to_csv(grid, metadata)?)
}

pub fn parse_grid_csv(text: &str) -> Result<SliceGrid> {
    let mut names = vec!["axis1".to_string(), "axis2".to_string()];
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(rest) = line.trim_start_matches('#').trim().strip_prefix("axes:") {
            let parts: Vec<String> = rest.trim().split(',').map(str::to_string).collect();
            if parts.len() == 2 {
                names = parts;
            }
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(GRID_HEADER) {
        return Err(Error::schema("/header", "expected `axis1,axis2,value`"));
    }
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::schema(format!("/rows/{k}"), "expected three fields"));
        }
        let mut row = [0.0; 3];
        for (c, field) in rec.iter().enumerate() {
            row[c] = field.trim().parse().map_err(|_| {
                Error::schema(
                    format!("/rows/{k}/{}", GRID_HEADER[c]),
                    format!("`{field}` is not a number"),
                )
            })?;
        }
        rows.push(row);
    }
    let [n1, n2] = [names[0].as_str(), names[1].as_str()];
    if rows.is_empty() {
        return SliceGrid::new([n1, n2], [Vec::new(), Vec::new()], Vec::new());
    }
    let m2 = rows
        .iter()
        .take_while(|r| r[0].to_bits() == rows[0][0].to_bits())
        .count();
    if !rows.len().is_multiple_of(m2) {
        return Err(Error::schema("/rows", "rows do not form a rectangular grid"));
    }
    let m1 = rows.len() / m2;
    let axis1: Vec<f64> = (0..m1).map(|i| rows[i * m2][0]).collect();
    let axis2: Vec<f64> = (0..m2).map(|j| rows[j][1]).collect();
    for (k, row) in rows.iter().enumerate() {
        if row[0].to_bits() != axis1[k / m2].to_bits() || row[1].to_bits() != axis2[k % m2].to_bits() {
            return Err(Error::schema(
                format!("/rows/{k}"),
                "rows are not in row-major grid order",
            ));
        }
    }
    SliceGrid::new([n1, n2], [axis1, axis2], rows.iter().map(|r| r[2]).collect())
}

pub fn read_grid_csv(path: &Path) -> Result<SliceGrid> {
    parse_grid_csv(&read_text(path)?)
}
