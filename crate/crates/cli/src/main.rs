//! `spin-wigner` command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 data or schema error, 4 numeric or
//! model error.

use std::io::Write;
use std::path::{Path, PathBuf};

use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use spin_wigner::correspondence::{self, CheckConfig};
use spin_wigner::io::{self, ReconstructionDoc, ScanDocument, StateSpec};
use spin_wigner::states::EIGENVALUE_FLOOR;
use spin_wigner::tomography::{self, MeasurementSetting, NoiseModel, ReadoutCorrection};
use spin_wigner::wigner;
use spin_wigner::witness::{self, AngleConvention, EquatorScanResult};
use spin_wigner::{DensityMatrix, Error, ParityKind, PhasePoint, Quadrature};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "spin-wigner", version, about = "Spin Wigner functions of N-qubit states", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct a state and print its density matrix.
    State(StateArgs),
    /// Write a two-axis Wigner slice as CSV.
    Slice(SliceArgs),
    /// Evaluate or simulate an equatorial scan.
    Scan(ScanArgs),
    /// Simulate the rotate-and-measure protocol and write count records.
    Simulate(SimulateArgs),
    /// Reconstruct a density matrix from count records.
    Reconstruct(ReconstructArgs),
    /// Certify GHZ-type entanglement from an equatorial scan.
    Certify(CertifyArgs),
    /// Run the Stratonovich-Weyl correspondence checks.
    Swcheck(SwcheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Su2n,
    Tensor,
}

impl From<KindArg> for ParityKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Su2n => ParityKind::Su2N,
            KindArg::Tensor => ParityKind::TensorSu2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SliceArg {
    EqualAngle,
    ThetaTheta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Paper,
    Hardware,
}

impl From<ConventionArg> for AngleConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => AngleConvention::Paper,
            ConventionArg::Hardware => AngleConvention::Hardware,
        }
    }
}

#[derive(Debug, Args)]
struct StateArgs {
    /// State spec: inline JSON such as '{"kind":"ghz","n":5}' or a path to a JSON file.
    #[arg(long)]
    state: String,
    /// Output JSON path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SliceArgs {
    /// State spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    state: String,
    /// Extended-parity kernel.
    #[arg(long, value_enum, default_value = "tensor")]
    kind: KindArg,
    /// Slice type: equal-angle (θ in [0, π/2] × φ in [0, π), radians) or theta-theta (θ₁ × θ₂, two qubits).
    #[arg(long, value_enum, default_value = "equal-angle")]
    slice: SliceArg,
    /// Grid resolution per axis (count of samples).
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=4096))]
    res: u64,
    /// Output CSV path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Per-qubit readout bit-flip probability (probability in [0, 1]).
    #[arg(long, default_value_t = 0.0)]
    readout_error: f64,
    /// Per-qubit depolarizing probability applied before rotation (probability in [0, 1]).
    #[arg(long, default_value_t = 0.0)]
    depolarizing: f64,
    /// RNG seed (unsigned 64-bit integer).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// State spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    state: String,
    /// Extended-parity kernel.
    #[arg(long, value_enum, default_value = "tensor")]
    kind: KindArg,
    /// Number of equally spaced φ samples on [0, π) (count).
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    /// Shots per point (counts); omit for exact values.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shots: Option<u64>,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Convention for φ in the output (paper: φ; hardware: φ̃ = 2φ, radians).
    #[arg(long, value_enum, default_value = "paper")]
    angle_convention: ConventionArg,
    /// Output JSON path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// State spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    state: String,
    /// Point set: equator:<count>, tetrahedral-grid, raster:<res>, or a JSON file of phase points (radians).
    #[arg(long)]
    points: String,
    /// Shots per setting (counts, at least 1).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Output records path; provenance goes to <out>.meta.json [default: stdout, no provenance file].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    /// Count-record batch (JSON array).
    #[arg(long)]
    records: PathBuf,
    /// Extended-parity kernel used to turn counts into Wigner values.
    #[arg(long, value_enum, default_value = "tensor")]
    kind: KindArg,
    /// Project onto positive semidefinite matrices (eigenvalue clipping).
    #[arg(long)]
    project: bool,
    /// Invert a per-qubit readout bit-flip probability before fitting (probability in [0, 0.5)).
    #[arg(long)]
    readout_correction: Option<f64>,
    /// True state spec; adds a fidelity report.
    #[arg(long)]
    truth: Option<String>,
    /// Output JSON path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Scan document (JSON with angle_convention and samples).
    #[arg(long, conflicts_with = "simulate_from", required_unless_present = "simulate_from")]
    scan: Option<PathBuf>,
    /// Simulate an equator scan of this state spec instead of reading one.
    #[arg(long)]
    simulate_from: Option<String>,
    /// Number of qubits (count); required with --scan.
    #[arg(long)]
    n: Option<usize>,
    /// Certification threshold (standard deviations).
    #[arg(long, default_value_t = witness::DEFAULT_THRESHOLD_SIGMA)]
    threshold: f64,
    /// Convention of the scan's φ values (paper: φ; hardware: φ̃ = 2φ, radians); must match the document tag.
    #[arg(long, value_enum)]
    angle_convention: Option<ConventionArg>,
    /// Extended-parity kernel for --simulate-from.
    #[arg(long, value_enum, default_value = "tensor")]
    kind: KindArg,
    /// φ samples for --simulate-from (count).
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    /// Shots per point for --simulate-from (counts).
    #[arg(long, default_value_t = 8192, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Output JSON path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SwcheckArgs {
    /// Extended-parity kernel.
    #[arg(long, value_enum, default_value = "tensor")]
    kind: KindArg,
    /// Number of qubits (count, quadrature checks need n ≤ 3).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Quadrature nodes per qubit as <theta>x<phi> (counts) [default: 16x(4n+2)].
    #[arg(long)]
    quadrature: Option<String>,
    /// RNG seed for random states and points (unsigned 64-bit integer).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the JSON report here; the table goes to stdout [default: JSON to stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Misuse detected after clap parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn metadata(seed: Option<u64>) -> Value {
    json!({
        "tool": "spin-wigner",
        "version": env!("CARGO_PKG_VERSION"),
        "command_line": std::env::args().collect::<Vec<_>>(),
        "seed": seed,
    })
}

fn with_metadata<T: Serialize>(body: &T, seed: Option<u64>) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(body)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("metadata".into(), metadata(seed));
            Ok(v)
        }
        None => Err(anyhow!("output is not a JSON object")),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn write_stdout(text: &str) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => io::write_text(path, text)?,
        None => write_stdout(text)?,
    }
    Ok(())
}

fn emit_json(v: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    emit(&text, out)
}

fn load_state(arg: &str) -> anyhow::Result<(StateSpec, DensityMatrix)> {
    let spec = io::load_state_spec(arg)?;
    let rho = spec.build()?;
    Ok((spec, rho))
}

fn noise_model(n: usize, args: &NoiseArgs) -> anyhow::Result<NoiseModel> {
    NoiseModel::uniform(n, args.readout_error, args.depolarizing).map_err(|e| usage(e.to_string()))
}

fn parse_points(spec: &str, n: usize) -> anyhow::Result<Vec<PhasePoint>> {
    let count = |s: &str, what: &str| -> anyhow::Result<usize> {
        match s.parse::<usize>() {
            Ok(c) if c > 0 => Ok(c),
            _ => Err(usage(format!(
                "--points {what}:<count> needs a positive integer, got `{s}`"
            ))),
        }
    };
    if let Some(c) = spec.strip_prefix("equator:") {
        let phis = wigner::equator_phis(count(c, "equator")?);
        Ok(phis.iter().map(|&p| wigner::equator_point(n, p)).collect())
    } else if let Some(r) = spec.strip_prefix("raster:") {
        Ok(wigner::raster_points(n, count(r, "raster")?))
    } else if spec == "tetrahedral-grid" {
        Ok(tomography::tetrahedral_grid(n)?)
    } else {
        let points = io::parse_points(&io::read_text(Path::new(spec))?)?;
        if let Some(p) = points.iter().find(|p| p.n() != n) {
            return Err(Error::Schema {
                pointer: "/0/angles".into(),
                message: format!("points have {} qubits, state has {n}", p.n()),
            }
            .into());
        }
        Ok(points)
    }
}

fn cmd_state(args: &StateArgs) -> anyhow::Result<()> {
    let (spec, rho) = load_state(&args.state)?;
    let body = json!({
        "spec": spec,
        "n": rho.n().get(),
        "purity": rho.purity(),
        "eigenvalues": rho.eigenvalues(),
        "rho": io::matrix_to_rows(rho.matrix()),
    });
    emit_json(&with_metadata(&body, None)?, args.out.as_deref())
}

fn cmd_slice(args: &SliceArgs) -> anyhow::Result<()> {
    let (spec, rho) = load_state(&args.state)?;
    let kind: ParityKind = args.kind.into();
    let res = args.res as usize;
    let grid = match args.slice {
        SliceArg::EqualAngle => {
            wigner::equal_angle_slice(&rho, kind, &wigner::raster_thetas(res), &wigner::raster_phis(res))?
        }
        SliceArg::ThetaTheta => {
            let thetas = wigner::raster_thetas(res);
            wigner::theta_theta_slice(&rho, kind, &thetas, &thetas)?
        }
    };
    let meta = vec![
        format!("spin-wigner {}", env!("CARGO_PKG_VERSION")),
        format!("command line: {}", std::env::args().collect::<Vec<_>>().join(" ")),
        format!("state: {}", io::state_spec_to_json(&spec)),
        format!("kind: {}", kind.name()),
    ];
    emit(&io::grid_to_csv(&grid, &meta)?, args.out.as_deref())
}

fn simulated_scan(
    rho: &DensityMatrix,
    kind: ParityKind,
    points: usize,
    shots: Option<u64>,
    noise: &NoiseArgs,
) -> anyhow::Result<EquatorScanResult> {
    let phis = wigner::equator_phis(points);
    let n = rho.n().get();
    Ok(match shots {
        None => EquatorScanResult::from_samples(&wigner::equator_scan(rho, kind, &phis)?),
        Some(shots) => witness::simulate_equator_scan(rho, kind, &phis, shots, &noise_model(n, noise)?, noise.seed)?,
    })
}

fn cmd_scan(args: &ScanArgs) -> anyhow::Result<()> {
    let (_, rho) = load_state(&args.state)?;
    let scan = simulated_scan(&rho, args.kind.into(), args.points as usize, args.shots, &args.noise)?;
    let doc = ScanDocument::from_scan(&scan, args.angle_convention.into());
    let seed = args.shots.map(|_| args.noise.seed);
    emit_json(&with_metadata(&doc, seed)?, args.out.as_deref())
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let (_, rho) = load_state(&args.state)?;
    let n = rho.n().get();
    let noise = noise_model(n, &args.noise)?;
    let settings = parse_points(&args.points, n)?
        .into_iter()
        .map(|p| MeasurementSetting::new(p, args.shots))
        .collect::<Result<Vec<_>, _>>()?;
    let records = tomography::simulate_batch(&rho, &settings, &noise, args.noise.seed)?;
    let text = io::count_records_to_json(&records);
    emit(&text, args.out.as_deref())?;
    if let Some(out) = &args.out {
        let mut sidecar = out.clone().into_os_string();
        sidecar.push(".meta.json");
        let meta = json!({
            "metadata": metadata(Some(args.noise.seed)),
            "records": records.len(),
            "shots": args.shots,
            "points": args.points,
            "readout_error": args.noise.readout_error,
            "depolarizing": args.noise.depolarizing,
        });
        emit_json(&meta, Some(Path::new(&sidecar)))?;
    }
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs) -> anyhow::Result<()> {
    let records = io::read_count_records(&args.records)?;
    if records.is_empty() {
        return Err(Error::Schema {
            pointer: String::new(),
            message: "record batch is empty".into(),
        }
        .into());
    }
    let correction = match args.readout_correction {
        None => ReadoutCorrection::None,
        Some(eps) if (0.0..0.5).contains(&eps) => ReadoutCorrection::Invert(vec![eps; records[0].n()]),
        Some(eps) => return Err(usage(format!("--readout-correction must lie in [0, 0.5), got {eps}"))),
    };
    let result = tomography::reconstruct_from_counts(&records, args.kind.into(), args.project, &correction)?;
    let (fidelity, distance) = match &args.truth {
        Some(t) => {
            let (_, truth) = load_state(t)?;
            let distance = tomography::frobenius_distance(&result.rho_hat, &truth)?;
            if result.rho_hat.min_eigenvalue() < EIGENVALUE_FLOOR {
                eprintln!("note: estimate has negative eigenvalues, fidelity omitted (use --project)");
                (None, Some(distance))
            } else {
                (Some(tomography::fidelity(&result.rho_hat, &truth)?), Some(distance))
            }
        }
        None => (None, None),
    };
    let doc = ReconstructionDoc::from_result(&result, fidelity, distance);
    emit_json(&with_metadata(&doc, None)?, args.out.as_deref())
}

fn cmd_certify(args: &CertifyArgs) -> anyhow::Result<()> {
    let (scan, n, convention, seed) = match (&args.scan, &args.simulate_from) {
        (Some(path), _) => {
            let doc = io::parse_scan_document(&io::read_text(path)?)?;
            if let Some(flag) = args.angle_convention {
                let flag: AngleConvention = flag.into();
                if flag != doc.angle_convention {
                    return Err(Error::Schema {
                        pointer: "/angle_convention".into(),
                        message: format!(
                            "document is tagged `{}` but --angle-convention is `{}`",
                            doc.angle_convention.name(),
                            flag.name()
                        ),
                    }
                    .into());
                }
            }
            let n = args.n.ok_or_else(|| usage("--n is required with --scan"))?;
            (doc.to_scan()?, n, doc.angle_convention, None)
        }
        (None, Some(spec)) => {
            let (_, rho) = load_state(spec)?;
            let n = rho.n().get();
            if let Some(given) = args.n {
                if given != n {
                    return Err(usage(format!("--n {given} does not match the {n}-qubit state")));
                }
            }
            let scan = simulated_scan(
                &rho,
                args.kind.into(),
                args.points as usize,
                Some(args.shots),
                &args.noise,
            )?;
            let convention = args.angle_convention.map_or(AngleConvention::Paper, Into::into);
            (scan, n, convention, Some(args.noise.seed))
        }
        (None, None) => return Err(usage("one of --scan or --simulate-from is required")),
    };
    let mut verdict = witness::certify_ghz_entanglement(&scan, n, args.threshold)?;
    verdict.angle_convention = convention;
    let mut v = with_metadata(&verdict, seed)?;
    v["scope"] = json!(witness::WitnessVerdict::SCOPE);
    emit_json(&v, args.out.as_deref())
}

fn cmd_swcheck(args: &SwcheckArgs) -> anyhow::Result<()> {
    let mut config = CheckConfig::default_for(args.n);
    if let Some(q) = &args.quadrature {
        config.quadrature = Quadrature::parse(q).map_err(|e| usage(e.to_string()))?;
    }
    config.seed = args.seed;
    let report = correspondence::run_checks(args.kind.into(), args.n, &config)?;
    let v = with_metadata(&report, Some(args.seed))?;
    match &args.out {
        Some(path) => {
            write_stdout(&report.table())?;
            emit_json(&v, Some(path))?;
        }
        None => emit_json(&v, None)?,
    }
    if report.all_passed {
        Ok(())
    } else {
        Err(Error::NumericFailure("correspondence checks failed".into()).into())
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::State(a) => cmd_state(a),
        Command::Slice(a) => cmd_slice(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reconstruct(a) => cmd_reconstruct(a).context("reconstruct"),
        Command::Certify(a) => cmd_certify(a).context("certify"),
        Command::Swcheck(a) => cmd_swcheck(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_data_error() => EXIT_DATA,
        Some(_) => EXIT_NUMERIC,
        None if err.downcast_ref::<serde_json::Error>().is_some() => EXIT_DATA,
        None => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
