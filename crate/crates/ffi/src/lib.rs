//! C ABI over `pilotwave`.
//!
//! Every fallible call returns a [`PwStatus`]; on failure the message is kept per
//! thread and read with [`pw_last_error_message`]. Handles are opaque and owned by
//! the caller, who releases them with the matching `*_free` function. Strings
//! returned through `char **` are released with [`pw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pilotwave::experiments::{
    run_box_experiment, run_double_slit, run_stern_gerlach, BoxExperimentConfig, DoubleSlitConfig, ExperimentOutcome,
    SternGerlachConfig,
};
use pilotwave::hilbert::{
    c, ks_search, mermin_square_check, parse_ray_file, peres33, random_unitary, CMatrix, ContextHypergraph,
    HermitianOperator, KsOutcome,
};
use pilotwave::nonlocality::{
    agreement, chsh_quantum, correspond, enumerate_local_strategies, sample_epr, schroedinger_theorem_demo,
    MaxEntangledState, Side,
};
use pilotwave::numerics::{evolve, Grid, Initializer, WaveFunction};
use pilotwave::rng::{rng_for, stream};
use pilotwave::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    /// The call completed but a checked property failed.
    CheckFailed = 1,
    InvalidArgument = 2,
    /// Numerical failure (non-finite values, instability, failed ensemble).
    Numerical = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Opaque wave function on a 1D grid.
pub struct PwWaveFunction(WaveFunction);

/// Opaque maximally entangled two-system state.
pub struct PwEntangledState(MaxEntangledState);

/// Opaque ray set with its orthogonality contexts.
pub struct PwHypergraph(ContextHypergraph);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PwChshResult {
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`.
    pub correlations: [f64; 4],
    pub s_exact: f64,
    pub s_sampled: f64,
    pub sigma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PwSearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub max_depth: usize,
    pub complete: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: PwStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match pilotwave::cli::exit_code(&e) {
            1 => PwStatus::CheckFailed,
            3 => PwStatus::Numerical,
            _ => PwStatus::InvalidArgument,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        invalid(format!("json: {e}"))
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        status: PwStatus::InvalidArgument,
        message: message.into(),
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: PwStatus::NullPointer,
        message: format!("null pointer: {what}"),
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<PwStatus, Failure>) -> PwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(fail)) => {
            set_error(fail.message);
            fail.status
        }
        Err(_) => {
            set_error("internal panic".into());
            PwStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn handle_out<T>(out: *mut *mut T, value: T) -> Result<PwStatus, Failure> {
    write(out, Box::into_raw(Box::new(value)), "out")?;
    Ok(PwStatus::Ok)
}

fn string_out(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| invalid("string contains NUL"))?;
    unsafe { write(out, c.into_raw(), "out") }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length, 0 if none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a wave function on `[lo, hi)` with `points` nodes from an initializer
/// such as `gaussian(center=0, width=1, k=0)`.
///
/// # Safety
/// `initializer` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_new(
    lo: f64,
    hi: f64,
    points: usize,
    initializer: *const c_char,
    out: *mut *mut PwWaveFunction,
) -> PwStatus {
    guard(|| {
        let init = Initializer::parse(text(initializer, "initializer")?)?;
        let psi = WaveFunction::new(Grid::new_1d(lo, hi, points)?, &init)?;
        handle_out(out, PwWaveFunction(psi))
    })
}

/// Evolves `psi` for `steps` steps of `dt` under a potential such as `free` or
/// `harmonic(omega=1)`; the result is a new handle.
///
/// # Safety
/// `psi` must be a live handle, `potential` a NUL-terminated string, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_evolve(
    psi: *const PwWaveFunction,
    potential: *const c_char,
    dt: f64,
    steps: usize,
    out: *mut *mut PwWaveFunction,
) -> PwStatus {
    guard(|| {
        let psi = reference(psi, "psi")?;
        let v = pilotwave::cli::parse_potential(text(potential, "potential")?)?;
        handle_out(out, PwWaveFunction(evolve(&psi.0, &v, dt, steps)?))
    })
}

/// Number of grid nodes.
///
/// # Safety
/// `psi` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_len(psi: *const PwWaveFunction) -> usize {
    psi.as_ref().map_or(0, |p| p.0.grid().len())
}

/// Writes the L2 norm and the position spread.
///
/// # Safety
/// `psi` must be a live handle; `norm` and `std_position` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_moments(
    psi: *const PwWaveFunction,
    norm: *mut f64,
    std_position: *mut f64,
) -> PwStatus {
    guard(|| {
        let psi = &reference(psi, "psi")?.0;
        write(norm, psi.norm(), "norm")?;
        write(std_position, psi.std_position(0), "std_position")?;
        Ok(PwStatus::Ok)
    })
}

/// Copies `|psi|^2` at the grid nodes into `buf`, which must hold exactly `len` = node count values.
///
/// # Safety
/// `psi` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_density(psi: *const PwWaveFunction, buf: *mut f64, len: usize) -> PwStatus {
    guard(|| {
        let rho = reference(psi, "psi")?.0.density();
        if len != rho.len() {
            return Err(invalid(format!("buffer holds {len} values, grid has {}", rho.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::ptr::copy_nonoverlapping(rho.as_ptr(), buf, len);
        Ok(PwStatus::Ok)
    })
}

/// # Safety
/// `psi` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_wavefunction_free(psi: *mut PwWaveFunction) {
    if !psi.is_null() {
        drop(Box::from_raw(psi));
    }
}

/// `(|up down> - |down up>) / sqrt 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_state_singlet(out: *mut *mut PwEntangledState) -> PwStatus {
    guard(|| handle_out(out, PwEntangledState(MaxEntangledState::singlet())))
}

/// `sum_n e_n (x) e_n / sqrt n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_state_standard(n: usize, out: *mut *mut PwEntangledState) -> PwStatus {
    guard(|| handle_out(out, PwEntangledState(MaxEntangledState::standard(n)?)))
}

/// Maximally entangled state with two seeded random bases.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_state_random(n: usize, seed: u64, out: *mut *mut PwEntangledState) -> PwStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let mut rng = rng_for(seed, stream::BASES);
        let b1 = random_unitary(n, &mut rng);
        let b2 = random_unitary(n, &mut rng);
        handle_out(out, PwEntangledState(MaxEntangledState::new(b1, b2)?))
    })
}

/// Factor dimension, 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_state_dim(state: *const PwEntangledState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_state_free(state: *mut PwEntangledState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Reads an `n x n` row-major Hermitian matrix; `im` may be null for a real matrix.
unsafe fn operator(re: *const f64, im: *const f64, n: usize) -> Result<HermitianOperator, Failure> {
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, n * n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n * n)) };
    let m = CMatrix::from_fn(n, n, |i, j| c(re[i * n + j], im.map_or(0.0, |v| v[i * n + j])));
    Ok(HermitianOperator::new(m)?)
}

/// Writes the factor-2 correspondent of the factor-1 operator `(re, im)` into
/// `(out_re, out_im)`, all `n x n` row-major; the imaginary pointers may be null.
///
/// # Safety
/// Non-null pointers must be valid for `n * n` values; `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_correspond(
    state: *const PwEntangledState,
    re: *const f64,
    im: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PwStatus {
    guard(|| {
        let state = &reference(state, "state")?.0;
        let pair = correspond(&operator(re, im, n)?, state)?;
        if out_re.is_null() {
            return Err(null("out_re"));
        }
        let m = pair.o_tilde.matrix();
        for i in 0..n {
            for j in 0..n {
                *out_re.add(i * n + j) = m[(i, j)].re;
                if !out_im.is_null() {
                    *out_im.add(i * n + j) = m[(i, j)].im;
                }
            }
        }
        Ok(PwStatus::Ok)
    })
}

/// Samples `trials` EPR measurements of the operator and its correspondent.
/// `first_side` is 1 or 2. Outcome arrays may be null; otherwise they receive
/// `trials` values each. `agreement_out` receives the fraction of equal outcomes.
///
/// # Safety
/// Non-null pointers must be valid for the stated lengths; `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_epr_sample(
    state: *const PwEntangledState,
    re: *const f64,
    im: *const f64,
    n: usize,
    trials: usize,
    seed: u64,
    first_side: u32,
    outcome_1: *mut f64,
    outcome_2: *mut f64,
    agreement_out: *mut f64,
) -> PwStatus {
    guard(|| {
        let state = &reference(state, "state")?.0;
        let first = match first_side {
            1 => Side::One,
            2 => Side::Two,
            other => return Err(invalid(format!("first_side must be 1 or 2, got {other}"))),
        };
        let records = sample_epr(state, &operator(re, im, n)?, trials, seed, first)?;
        for (k, r) in records.iter().enumerate() {
            if !outcome_1.is_null() {
                *outcome_1.add(k) = r.outcome_1;
            }
            if !outcome_2.is_null() {
                *outcome_2.add(k) = r.outcome_2;
            }
        }
        write(agreement_out, agreement(&records), "agreement_out")?;
        Ok(PwStatus::Ok)
    })
}

/// CHSH on the singlet for analyzer angles `[a, b, a', b']`.
///
/// # Safety
/// `angles` must point to 4 values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_chsh(angles: *const f64, trials: usize, seed: u64, out: *mut PwChshResult) -> PwStatus {
    guard(|| {
        if angles.is_null() {
            return Err(null("angles"));
        }
        let a: [f64; 4] = std::slice::from_raw_parts(angles, 4).try_into().expect("four angles");
        let r = chsh_quantum(&MaxEntangledState::singlet(), a, trials, seed)?;
        write(
            out,
            PwChshResult {
                correlations: r.correlations,
                s_exact: r.s_exact,
                s_sampled: r.s_sampled,
                sigma: r.sigma,
            },
            "out",
        )?;
        Ok(PwStatus::Ok)
    })
}

/// Largest `|S|` over the 16 deterministic local strategies.
#[no_mangle]
pub extern "C" fn pw_local_bound() -> i32 {
    enumerate_local_strategies().max_abs_s
}

/// The 33-ray Peres set with triads and orthogonal pairs as contexts.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_hypergraph_peres33(out: *mut *mut PwHypergraph) -> PwStatus {
    guard(|| handle_out(out, PwHypergraph(peres33())))
}

/// Rays given as `n_rays` consecutive `(x, y, z)` triples; contexts are derived
/// from orthogonality.
///
/// # Safety
/// `xyz` must point to `3 * n_rays` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_hypergraph_from_rays(
    xyz: *const f64,
    n_rays: usize,
    out: *mut *mut PwHypergraph,
) -> PwStatus {
    guard(|| {
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let v = std::slice::from_raw_parts(xyz, 3 * n_rays);
        let rays = v.chunks_exact(3).map(|r| [r[0], r[1], r[2]]).collect();
        handle_out(out, PwHypergraph(ContextHypergraph::from_rays(rays)?))
    })
}

/// Parses the text of a ray file.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_hypergraph_parse(source: *const c_char, out: *mut *mut PwHypergraph) -> PwStatus {
    guard(|| handle_out(out, PwHypergraph(parse_ray_file(text(source, "source")?)?)))
}

/// Number of rays, 0 for a null handle.
///
/// # Safety
/// `hg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_hypergraph_rays(hg: *const PwHypergraph) -> usize {
    hg.as_ref().map_or(0, |h| h.0.rays().len())
}

/// # Safety
/// `hg` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_hypergraph_free(hg: *mut PwHypergraph) {
    if !hg.is_null() {
        drop(Box::from_raw(hg));
    }
}

/// Exhaustive 0/1 value-map search. `witness` may be null; otherwise it must hold
/// one byte per ray and receives the assignment when one exists.
///
/// # Safety
/// `hg` must be a live handle; non-null pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_ks_search(
    hg: *const PwHypergraph,
    satisfiable: *mut bool,
    witness: *mut u8,
    stats: *mut PwSearchStats,
) -> PwStatus {
    guard(|| {
        let report = ks_search(&reference(hg, "hg")?.0);
        let sat = match &report.outcome {
            KsOutcome::Satisfiable { witness: w } => {
                if !witness.is_null() {
                    for (k, v) in w.0.iter().enumerate() {
                        *witness.add(k) = v.unwrap_or(0);
                    }
                }
                true
            }
            KsOutcome::Unsatisfiable => false,
        };
        write(satisfiable, sat, "satisfiable")?;
        if !stats.is_null() {
            stats.write(PwSearchStats {
                nodes: report.stats.nodes,
                backtracks: report.stats.backtracks,
                max_depth: report.stats.max_depth,
                complete: report.stats.complete,
            });
        }
        Ok(PwStatus::Ok)
    })
}

/// Number of the 512 sign assignments to the Mermin square that satisfy all six lines.
///
/// # Safety
/// `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pw_mermin_satisfying(count: *mut usize) -> PwStatus {
    guard(|| {
        write(count, mermin_square_check()?.satisfying_all, "count")?;
        Ok(PwStatus::Ok)
    })
}

/// Runs the composed nonlocality argument and returns its report as JSON.
///
/// # Safety
/// `report_json` must be valid for writes; release the string with [`pw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pw_schroedinger_demo(
    dim: usize,
    seed: u64,
    trials: usize,
    report_json: *mut *mut c_char,
) -> PwStatus {
    guard(|| {
        let r = schroedinger_theorem_demo(dim, seed, trials)?;
        string_out(report_json, serde_json::to_string(&r)?)?;
        Ok(if r.pass() { PwStatus::Ok } else { PwStatus::CheckFailed })
    })
}

/// Overlays the keys of `overrides` (a JSON object) on the default config.
fn merged<T: serde::Serialize + serde::de::DeserializeOwned + Default>(overrides: Option<&str>) -> Result<T, Failure> {
    let mut base = serde_json::to_value(T::default())?;
    if let Some(text) = overrides {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        let patch = patch.as_object().ok_or_else(|| invalid("config must be a JSON object"))?;
        let map = base.as_object_mut().expect("configs serialize to objects");
        for (k, v) in patch {
            if !map.contains_key(k) {
                return Err(invalid(format!("unknown config key `{k}`")));
            }
            map.insert(k.clone(), v.clone());
        }
    }
    Ok(serde_json::from_value(base)?)
}

/// Runs `double-slit`, `stern-gerlach` or `box` with the default config overlaid by
/// `config_json` (may be null) and returns the summary JSON. Returns
/// `PW_STATUS_CHECK_FAILED` (summary still written) when a check fails.
///
/// # Safety
/// `name` must be NUL-terminated, `config_json` null or NUL-terminated, and
/// `summary_json` valid for writes; release the string with [`pw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pw_run_experiment(
    name: *const c_char,
    config_json: *const c_char,
    summary_json: *mut *mut c_char,
) -> PwStatus {
    guard(|| {
        let overrides = if config_json.is_null() {
            None
        } else {
            Some(text(config_json, "config_json")?)
        };
        let outcome: ExperimentOutcome = match text(name, "name")? {
            "double-slit" => run_double_slit(&merged::<DoubleSlitConfig>(overrides)?)?,
            "stern-gerlach" => run_stern_gerlach(&merged::<SternGerlachConfig>(overrides)?)?,
            "box" => run_box_experiment(&merged::<BoxExperimentConfig>(overrides)?)?,
            other => return Err(invalid(format!("unknown experiment `{other}`"))),
        };
        string_out(summary_json, outcome.summary_json()?)?;
        Ok(if outcome.passed() { PwStatus::Ok } else { PwStatus::CheckFailed })
    })
}
