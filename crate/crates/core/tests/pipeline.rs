use std::fs;

use spectral_gate::bounds::{verify_gamma_bounds, verify_potential_bounds};
use spectral_gate::continuum::{integrate_uv, ContinuumPotential};
use spectral_gate::eigenfunctions::{edge_pair, oscillation_count};
use spectral_gate::generators::{gen_alternating, gen_extremal};
use spectral_gate::oracle::eig_count_above;
use spectral_gate::potential::read_coeffs_path;
use spectral_gate::prufer::{decompose, dual_path_error, Strategy};
use spectral_gate::suite::{verify_all, SuiteConfig};
use spectral_gate::verblunsky::gamma_from_jacobi;
use spectral_gate::{JacobiCoeffs, Potential, Tolerances};

#[test]
fn csv_and_json_round_trip_through_certification() {
    let dir = tempfile::tempdir().unwrap();
    let v = gen_alternating(0.8, 500).unwrap();
    let csv = dir.path().join("v.csv");
    let mut buf = Vec::new();
    v.write_csv(&mut buf).unwrap();
    fs::write(&csv, &buf).unwrap();
    let json = dir.path().join("v.json");
    fs::write(&json, v.to_json()).unwrap();

    let tol = Tolerances::default();
    let direct = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&v), 500, &tol).unwrap();
    for path in [&csv, &json] {
        let j = read_coeffs_path(path).unwrap();
        let r = gamma_from_jacobi(&j, 500, &tol).unwrap();
        assert_eq!(r.gamma.as_slice(), direct.gamma.as_slice());
    }
}

#[test]
fn certified_potential_passes_every_stage() {
    let n = 20_000;
    let tol = Tolerances::default();
    let v = gen_extremal(12).unwrap().padded(n);
    let j = JacobiCoeffs::schrodinger(&v);
    let cert = gamma_from_jacobi(&j, n, &tol).unwrap();
    assert!(cert.is_certified());
    let reports = verify_gamma_bounds(&cert.gamma, n, &tol)
        .unwrap()
        .into_iter()
        .chain(verify_potential_bounds(&v, &cert.gamma, n, &tol).unwrap());
    for b in reports {
        assert!(b.pass && b.margin >= 0.0, "{} margin {}", b.name, b.margin);
    }
    let (u, w) = edge_pair(&v, 2000).unwrap();
    assert_eq!(oscillation_count(&u, &tol), 0);
    assert!((1..=2001).all(|m| w.value(m) > 0.0));
    assert_eq!(eig_count_above(&j, 2000, 2.0).unwrap(), 0);
    assert!(dual_path_error(&v, 1.0, (0.0, 1.0), n).unwrap() < 1e-8);
    let d = decompose(&v, Strategy::Gamma, &tol).unwrap();
    assert!(d.identity_defect(&v) < 1e-12);
}

#[test]
fn violated_potential_has_oracle_eigenvalue() {
    let tol = Tolerances::default();
    let v = Potential::new(vec![2.5]).unwrap().padded(300);
    let j = JacobiCoeffs::schrodinger(&v);
    assert!(gamma_from_jacobi(&j, 300, &tol).unwrap().is_violated());
    assert_eq!(eig_count_above(&j, 300, 2.0).unwrap(), 1);
}

#[test]
fn config_file_with_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.csv"), "n,v\n1,0.4\n2,-0.2\n3,0.1\n").unwrap();
    let xs: Vec<String> = (0..=400).map(|i| format!("{},{}", i as f64 * 0.01, 0.1 * (i as f64 * 0.01).sin())).collect();
    fs::write(dir.path().join("c.csv"), format!("x,V\n{}\n", xs.join("\n"))).unwrap();
    let cfg = SuiteConfig::from_json(
        r#"{
            "horizon": 3000, "oracle_sites": 200, "prufer_sites": 500, "traces": false,
            "entries": [{"name": "file", "generator": "file", "path": "v.csv"},
                        {"name": "rnd", "generator": "random_certified", "count": 3, "max_len": 40}],
            "continuum": [{"name": "tab", "potential": "file", "path": "c.csv", "x_max": 4.0, "h": 1e-3}]
        }"#,
    )
    .unwrap();
    let r = verify_all(&cfg, dir.path()).unwrap();
    assert!(r.pass, "{:?}", r.failures);
    let names: Vec<&str> = r.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["file", "rnd_000", "rnd_001", "rnd_002"]);
    assert!(r.entries.iter().all(|e| e.bounds.iter().all(|b| b.lhs_trace.is_empty())));
    assert_eq!(r.continuum.len(), 1);

    let missing = SuiteConfig::from_json(r#"{"entries": [{"name": "x", "generator": "file", "path": "nope.csv"}]}"#)
        .unwrap();
    assert!(verify_all(&missing, dir.path()).is_err());
}

#[test]
fn tabulated_continuum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sine.csv");
    let xs: Vec<f64> = (0..=50_000).map(|i| i as f64 * 1e-4).collect();
    let body: Vec<String> = xs.iter().map(|x| format!("{x},{}", 0.2 * (3.0 * x).sin() / (1.0 + x))).collect();
    fs::write(&path, format!("x,V\n{}\n", body.join("\n"))).unwrap();
    let tab = ContinuumPotential::read_csv(&path).unwrap();
    let expr = ContinuumPotential::parse_expr("0.2*sin(3*x)/(1+x)").unwrap();
    let a = integrate_uv(&tab, 5.0, 1e-3).unwrap();
    let b = integrate_uv(&expr, 5.0, 1e-3).unwrap();
    let dev = a
        .gamma_e
        .iter()
        .zip(&b.gamma_e)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    assert!(dev < 1e-6, "{dev:e}");
}
