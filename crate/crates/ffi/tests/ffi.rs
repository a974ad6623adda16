use pilotwave_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { pw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { pw_string_free(p) };
    s
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn wave_function_round_trip() {
    let init = CString::new("gaussian(center=0, width=1, k=0)").unwrap();
    let mut psi = ptr::null_mut();
    assert_eq!(unsafe { pw_wavefunction_new(-20.0, 20.0, 512, init.as_ptr(), &mut psi) }, PwStatus::Ok);
    assert_eq!(unsafe { pw_wavefunction_len(psi) }, 512);

    let free = CString::new("free").unwrap();
    let mut later = ptr::null_mut();
    assert_eq!(unsafe { pw_wavefunction_evolve(psi, free.as_ptr(), 1e-3, 1000, &mut later) }, PwStatus::Ok);
    let (mut norm, mut width) = (0.0, 0.0);
    assert_eq!(unsafe { pw_wavefunction_moments(later, &mut norm, &mut width) }, PwStatus::Ok);
    assert!((norm - 1.0).abs() < 1e-9);
    assert!((width - 1.25f64.sqrt()).abs() < 1e-3);

    let mut rho = vec![0.0; 512];
    assert_eq!(unsafe { pw_wavefunction_density(later, rho.as_mut_ptr(), rho.len()) }, PwStatus::Ok);
    assert!(rho.iter().all(|r| *r >= 0.0));
    assert_eq!(unsafe { pw_wavefunction_density(later, rho.as_mut_ptr(), 10) }, PwStatus::InvalidArgument);
    assert!(last_error().contains("512"));

    unsafe {
        pw_wavefunction_free(psi);
        pw_wavefunction_free(later);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let bad = CString::new("lorentzian(width=1)").unwrap();
    let mut psi = ptr::null_mut();
    assert_eq!(unsafe { pw_wavefunction_new(-20.0, 20.0, 512, bad.as_ptr(), &mut psi) }, PwStatus::InvalidArgument);
    assert!(last_error().contains("lorentzian"));
    assert!(psi.is_null());

    assert_eq!(unsafe { pw_wavefunction_new(-20.0, 20.0, 512, ptr::null(), &mut psi) }, PwStatus::NullPointer);
    assert_eq!(unsafe { pw_state_singlet(ptr::null_mut()) }, PwStatus::NullPointer);

    let mut state = ptr::null_mut();
    assert_eq!(unsafe { pw_state_standard(3, &mut state) }, PwStatus::Ok);
    let mut r = PwChshResult::default();
    assert_eq!(unsafe { pw_chsh(ptr::null(), 10, 0, &mut r) }, PwStatus::NullPointer);
    unsafe { pw_state_free(state) };

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pw_schroedinger_demo(2, 0, 10, &mut json) }, PwStatus::InvalidArgument);
    assert!(json.is_null());

    // a successful call clears the message
    assert_eq!(pw_local_bound(), 2);
    let mut count = 99;
    assert_eq!(unsafe { pw_mermin_satisfying(&mut count) }, PwStatus::Ok);
    assert_eq!(count, 0);
    assert_eq!(unsafe { pw_last_error_message(ptr::null_mut(), 0) }, 0);
}

#[test]
fn singlet_correspondence_and_epr() {
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { pw_state_singlet(&mut st) }, PwStatus::Ok);
    assert_eq!(unsafe { pw_state_dim(st) }, 2);
    let z = [1.0, 0.0, 0.0, -1.0];
    let mut out = [0.0; 4];
    assert_eq!(unsafe { pw_correspond(st, z.as_ptr(), ptr::null(), 2, out.as_mut_ptr(), ptr::null_mut()) }, PwStatus::Ok);
    assert_eq!(out, [-1.0, 0.0, 0.0, 1.0]);

    let mut a = vec![0.0; 1000];
    let mut b = vec![0.0; 1000];
    let mut agree = 0.0;
    let status = unsafe {
        pw_epr_sample(st, z.as_ptr(), ptr::null(), 2, 1000, 5, 2, a.as_mut_ptr(), b.as_mut_ptr(), &mut agree)
    };
    assert_eq!(status, PwStatus::Ok);
    assert_eq!(agree, 1.0);
    assert_eq!(a, b);
    let not_hermitian = [0.0, 1.0, 0.0, 0.0];
    let status = unsafe {
        pw_epr_sample(st, not_hermitian.as_ptr(), ptr::null(), 2, 10, 0, 2, ptr::null_mut(), ptr::null_mut(), &mut agree)
    };
    assert_eq!(status, PwStatus::InvalidArgument);
    unsafe { pw_state_free(st) };

    let mut random = ptr::null_mut();
    assert_eq!(unsafe { pw_state_random(4, 1, &mut random) }, PwStatus::Ok);
    let d = [3.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 2.0];
    let status = unsafe {
        pw_epr_sample(random, d.as_ptr(), ptr::null(), 4, 2000, 3, 1, ptr::null_mut(), ptr::null_mut(), &mut agree)
    };
    assert_eq!(status, PwStatus::Ok);
    assert_eq!(agree, 1.0);
    unsafe { pw_state_free(random) };
}

#[test]
fn chsh_on_the_singlet() {
    let q = std::f64::consts::FRAC_PI_4;
    let angles = [0.0, q, 2.0 * q, 3.0 * q];
    let mut r = PwChshResult::default();
    assert_eq!(unsafe { pw_chsh(angles.as_ptr(), 100_000, 1, &mut r) }, PwStatus::Ok);
    assert!((r.s_exact + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((r.s_sampled - r.s_exact).abs() <= 3.0 * r.sigma);
}

#[test]
fn value_map_searches() {
    let mut hg = ptr::null_mut();
    assert_eq!(unsafe { pw_hypergraph_peres33(&mut hg) }, PwStatus::Ok);
    assert_eq!(unsafe { pw_hypergraph_rays(hg) }, 33);
    let mut sat = true;
    let mut stats = PwSearchStats::default();
    assert_eq!(unsafe { pw_ks_search(hg, &mut sat, ptr::null_mut(), &mut stats) }, PwStatus::Ok);
    assert!(!sat && stats.complete);
    unsafe { pw_hypergraph_free(hg) };

    let axes = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let mut frame = ptr::null_mut();
    assert_eq!(unsafe { pw_hypergraph_from_rays(axes.as_ptr(), 3, &mut frame) }, PwStatus::Ok);
    let mut witness = [9u8; 3];
    assert_eq!(unsafe { pw_ks_search(frame, &mut sat, witness.as_mut_ptr(), ptr::null_mut()) }, PwStatus::Ok);
    assert!(sat);
    assert_eq!(witness.iter().map(|&v| u32::from(v)).sum::<u32>(), 2);
    unsafe { pw_hypergraph_free(frame) };

    let text = CString::new("1 0 0\n0 1 0\n# comment\n0 0 1\n").unwrap();
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { pw_hypergraph_parse(text.as_ptr(), &mut parsed) }, PwStatus::Ok);
    assert_eq!(unsafe { pw_hypergraph_rays(parsed) }, 3);
    unsafe { pw_hypergraph_free(parsed) };
    let broken = CString::new("1 0\n").unwrap();
    assert_eq!(unsafe { pw_hypergraph_parse(broken.as_ptr(), &mut parsed) }, PwStatus::InvalidArgument);
    assert!(last_error().contains("line 1"));
}

#[test]
fn schroedinger_demo_report() {
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pw_schroedinger_demo(4, 0, 100, &mut json) }, PwStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["conclusion"], "locality refuted under stated premises");
    assert_eq!(report["value_maps_satisfying"], 0);
}

#[test]
fn experiments_with_json_overrides() {
    let name = CString::new("double-slit").unwrap();
    let cfg = CString::new(r#"{"members": 300, "slits": "upper", "keep_trajectories": 0}"#).unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pw_run_experiment(name.as_ptr(), cfg.as_ptr(), &mut json) }, PwStatus::Ok);
    let s: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(s["summary"]["maxima"], 1.0);
    assert_eq!(s["members"], 300);

    let bad = CString::new(r#"{"memberz": 3}"#).unwrap();
    assert_eq!(unsafe { pw_run_experiment(name.as_ptr(), bad.as_ptr(), &mut json) }, PwStatus::InvalidArgument);
    assert!(last_error().contains("memberz"));

    let sg = CString::new("stern-gerlach").unwrap();
    let weak = CString::new(r#"{"coupling": 0.5, "starts": {"mode": "explicit", "z0": [0.5]}}"#).unwrap();
    assert_eq!(unsafe { pw_run_experiment(sg.as_ptr(), weak.as_ptr(), &mut json) }, PwStatus::Numerical);

    let unknown = CString::new("pendulum").unwrap();
    assert_eq!(unsafe { pw_run_experiment(unknown.as_ptr(), ptr::null(), &mut json) }, PwStatus::InvalidArgument);
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/pilotwave.h");
    for name in [
        "PW_STATUS_OK",
        "PW_STATUS_NUMERICAL",
        "typedef struct PwWaveFunction PwWaveFunction",
        "typedef struct PwEntangledState PwEntangledState",
        "pw_last_error_message",
        "pw_ks_search",
        "pw_run_experiment",
        "pw_string_free",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
