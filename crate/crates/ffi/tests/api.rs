use std::ffi::CString;
use std::ptr;

use excitonscope_ffi::*;

const DIMER: &str = r#"{
  "name": "dimer",
  "site_energies": [15000.0, 15000.0],
  "couplings": [[0.0, 150.0], [150.0, 0.0]],
  "onsite_anharmonicity": [-600.0, -600.0],
  "pair_anharmonicity": [[0.0, -25.0], [-25.0, 0.0]],
  "site_dipoles": [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0]]
}"#;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { es_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn dimer() -> *mut EsModel {
    let json = CString::new(DIMER).unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { es_model_from_json(json.as_ptr(), ptr::null(), &mut m) };
    assert_eq!(s, EsStatus::Ok, "{}", last_error());
    m
}

#[test]
fn dimer_counts_and_energies() {
    let m = dimer();
    unsafe {
        assert_eq!(es_model_n_one(m), 2);
        assert_eq!(es_model_n_two(m), 3);
        let mut e = [0.0; 2];
        assert_eq!(es_model_energies(m, 1, e.as_mut_ptr(), 2), EsStatus::Ok);
        assert!((e[0] - 14850.0).abs() < 1e-9 && (e[1] - 15150.0).abs() < 1e-9);
        assert_eq!(es_model_energies(m, 1, e.as_mut_ptr(), 1), EsStatus::BufferTooSmall);
        assert!(last_error().contains("2 needed"));
        es_model_free(m);
    }
}

#[test]
fn population_is_conserved_through_the_api() {
    let m = dimer();
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(es_population_single(m, 2, &mut rho), EsStatus::Ok);
        let mut later = ptr::null_mut();
        assert_eq!(es_propagate(m, rho, 250.0, &mut later), EsStatus::Ok);
        let mut v = [0.0; 3];
        assert_eq!(es_population_values(later, v.as_mut_ptr(), 3), EsStatus::Ok);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(v[2] < 1.0);
        es_population_free(later);
        es_population_free(rho);
        es_model_free(m);
    }
}

#[test]
fn snapshot_grid_through_the_api() {
    let m = dimer();
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(es_population_single(m, 2, &mut rho), EsStatus::Ok);
        let fe: Vec<f64> = (0..9).map(|i| 14800.0 + 100.0 * i as f64).collect();
        let eg: Vec<f64> = (0..5).map(|i| 14800.0 + 100.0 * i as f64).collect();
        let det = EsDetectors {
            fe_sigma_t: 4.8681,
            fe_sigma_omega: 10.0,
            eg_sigma_t: 4.8681,
            eg_sigma_omega: 10.0,
        };
        let mut out = vec![0.0; 45];
        let s = es_coincidence_snapshot(m, rho, det, fe.as_ptr(), 9, eg.as_ptr(), 5, 0.0, 100.0, out.as_mut_ptr(), 45);
        assert_eq!(s, EsStatus::Ok, "{}", last_error());
        let max = out.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        es_population_free(rho);
        es_model_free(m);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(es_model_new_bundled(ptr::null_mut()), EsStatus::NullPointer);
        let bad = CString::new("{\"name\": 1}").unwrap();
        assert_eq!(es_model_from_json(bad.as_ptr(), ptr::null(), &mut m), EsStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(es_last_error_length() > 0);
        let m = dimer();
        assert_eq!(es_last_error_length(), 0);
        let mut rho = ptr::null_mut();
        assert_eq!(es_population_single(m, 3, &mut rho), EsStatus::InvalidArgument);
        assert!(last_error().contains("state 3"));
        assert_eq!(es_model_n_two(ptr::null()), 0);
        es_model_free(m);
        es_model_free(ptr::null_mut());
    }
}

#[test]
fn run_config_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dimer.json"), DIMER).unwrap();
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("out");
    let text = format!(
        r#"{{"scenario": "model-info", "aggregate": "dimer.json", "output_dir": {:?}}}"#,
        out.to_str().unwrap()
    );
    std::fs::write(&cfg, text).unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { es_run_config(path.as_ptr(), 0) }, EsStatus::Ok, "{}", last_error());
    assert!(out.join("manifest.json").is_file());
    let missing = CString::new(dir.path().join("nope.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { es_run_config(missing.as_ptr(), 0) }, EsStatus::Io);
}
