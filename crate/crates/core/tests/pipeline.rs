use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spin_wigner::io::{self, ReconstructionDoc, ScanDocument, StateSpec};
use spin_wigner::tomography::{self, MeasurementSetting, NoiseModel, ReadoutCorrection};
use spin_wigner::witness::{self, AngleConvention};
use spin_wigner::{correspondence, states, wigner, Error, ParityKind, PhasePoint};

#[test]
fn state_records_reconstruction_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = io::parse_state_spec_document(r#"{"kind": "ghz", "n": 3}"#).unwrap();
    let rho = spec.build().unwrap();
    let settings: Vec<MeasurementSetting> = tomography::tetrahedral_grid(3)
        .unwrap()
        .into_iter()
        .map(|p| MeasurementSetting::new(p, 200_000).unwrap())
        .collect();
    let records = tomography::simulate_batch(&rho, &settings, &NoiseModel::noiseless(3), 5).unwrap();

    let path = dir.path().join("records.json");
    io::write_count_records(&records, &path).unwrap();
    let back = io::read_count_records(&path).unwrap();
    assert_eq!(back, records);

    for kind in [ParityKind::TensorSu2, ParityKind::Su2N] {
        let r = tomography::reconstruct_from_counts(&back, kind, true, &ReadoutCorrection::None).unwrap();
        let f = tomography::fidelity(&r.rho_hat, &rho).unwrap();
        assert!(f > 0.97, "{} fidelity {f}", kind.name());
        let doc = ReconstructionDoc::from_result(&r, Some(f), None);
        let text = serde_json::to_string(&doc).unwrap();
        let parsed = io::parse_reconstruction(&text).unwrap().to_result().unwrap();
        assert!(tomography::frobenius_distance(&parsed.rho_hat, &r.rho_hat).unwrap() < 1e-12);
    }
}

#[test]
fn readout_correction_removes_bias() {
    let rho = states::density(&states::bell(states::Bell::PhiPlus));
    let noise = NoiseModel::uniform(2, 0.05, 0.0).unwrap();
    let settings: Vec<MeasurementSetting> = tomography::tetrahedral_grid(2)
        .unwrap()
        .into_iter()
        .map(|p| MeasurementSetting::new(p, 200_000).unwrap())
        .collect();
    let records = tomography::simulate_batch(&rho, &settings, &noise, 8).unwrap();
    let raw =
        tomography::reconstruct_from_counts(&records, ParityKind::TensorSu2, true, &ReadoutCorrection::None).unwrap();
    let fixed = tomography::reconstruct_from_counts(
        &records,
        ParityKind::TensorSu2,
        true,
        &ReadoutCorrection::Invert(vec![0.05, 0.05]),
    )
    .unwrap();
    let f_raw = tomography::fidelity(&raw.rho_hat, &rho).unwrap();
    let f_fixed = tomography::fidelity(&fixed.rho_hat, &rho).unwrap();
    assert!(f_fixed > f_raw && f_fixed > 0.99, "raw {f_raw}, corrected {f_fixed}");
}

#[test]
fn scan_document_round_trip_in_both_conventions() {
    let rho = states::density(&states::ghz(3).unwrap());
    let scan = witness::simulate_equator_scan(
        &rho,
        ParityKind::TensorSu2,
        &wigner::equator_phis(20),
        4096,
        &NoiseModel::noiseless(3),
        1,
    )
    .unwrap();
    for convention in [AngleConvention::Paper, AngleConvention::Hardware] {
        let doc = ScanDocument::from_scan(&scan, convention);
        let parsed = io::parse_scan_document(&io::scan_document_to_json(&doc)).unwrap();
        assert_eq!(parsed.angle_convention, convention);
        let back = parsed.to_scan().unwrap();
        for (a, b) in back.phi_values.iter().zip(&scan.phi_values) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(back.estimates, scan.estimates);
    }
}

#[test]
fn csv_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rho = states::density(&states::w_state(3).unwrap());
    let grid = wigner::equal_angle_slice(
        &rho,
        ParityKind::Su2N,
        &wigner::raster_thetas(9),
        &wigner::raster_phis(7),
    )
    .unwrap();
    let path = dir.path().join("slice.csv");
    io::export_grid_csv(&grid, &path, &["state: w3".to_string()]).unwrap();
    assert_eq!(io::read_grid_csv(&path).unwrap(), grid);
}

#[test]
fn separable_state_with_negativity() {
    let spec = io::parse_state_spec_document(
        r#"{"kind": "product", "angles": [[3.141592653589793, 0], [0, 0], [0, 0], [0, 0], [0, 0]]}"#,
    )
    .unwrap();
    assert!(matches!(spec, StateSpec::Product { .. }));
    let rho = spec.build().unwrap();
    assert!(rho.matrix()[(16, 16)].re > 1.0 - 1e-12);
    let grid = wigner::equal_angle_slice(
        &rho,
        ParityKind::TensorSu2,
        &wigner::raster_thetas(64),
        &wigner::raster_phis(64),
    )
    .unwrap();
    assert!(grid.min() < -0.05, "minimum {}", grid.min());
}

#[test]
fn populations_route_matches_trace_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=4 {
        let rho = states::random_density(n, 2, &mut rng).unwrap();
        for _ in 0..50 {
            let p = correspondence::random_point(n, &mut rng);
            for kind in [ParityKind::TensorSu2, ParityKind::Su2N] {
                let a = wigner::wigner_at(&rho, &p, kind).unwrap();
                let b = wigner::wigner_via_populations(&rho, &p, kind).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} {}: {a} vs {b}", kind.name());
            }
        }
    }
}

#[test]
fn malformed_documents_are_schema_errors() {
    let bad = r#"[{"angles": [[0,0,0]], "shots": 10, "counts": {"0": 4, "1": 5}}]"#;
    assert!(matches!(io::parse_count_records(bad), Err(Error::Schema { .. })));
    assert!(matches!(
        io::parse_state_spec_document(r#"{"kind": "cat", "n": 2}"#),
        Err(Error::UnknownTag(_))
    ));
    let origin = PhasePoint::origin(2);
    assert!(tomography::reconstruct_density(&[(origin, 1.0)], ParityKind::TensorSu2, false).is_err());
}
