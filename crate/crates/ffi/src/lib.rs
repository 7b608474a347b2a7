//! C ABI for excitonscope.
//!
//! Models and population distributions are opaque handles created and freed
//! through this interface. Every fallible call returns an [`EsStatus`]; on
//! failure the message is kept per thread and read with
//! [`es_last_error_message`]. Panics are caught at the boundary and reported
//! as [`EsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use excitonscope::aggregate::AggregateSpec;
use excitonscope::bath::BathSpec;
use excitonscope::coincidence::{coincidence_snapshot, DetectorPair, SignalGrid};
use excitonscope::excitation::{prepare_closed_form, ExcitationOptions};
use excitonscope::exciton::Manifold;
use excitonscope::filter::FilterSpec;
use excitonscope::model::ExcitonModel;
use excitonscope::output::Format;
use excitonscope::propagate::{propagate_population, PopulationDistribution};
use excitonscope::source::EppSource;
use excitonscope::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Exciton model built from an aggregate and a bath.
pub struct EsModel(ExcitonModel);

/// Population distribution over the two-exciton manifold.
pub struct EsPopulation(PopulationDistribution);

/// Spectral and temporal widths (cm⁻¹) of the two detector gates.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EsDetectors {
    pub fe_sigma_t: f64,
    pub fe_sigma_omega: f64,
    pub eg_sigma_t: f64,
    pub eg_sigma_omega: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EsStatus {
    match e {
        Error::Validation(_) | Error::Config(_) | Error::Json(_) => EsStatus::InvalidArgument,
        Error::Numerical(_) | Error::Convergence(_) => EsStatus::Numerical,
        Error::Io { .. } => EsStatus::Io,
        Error::Stage { source, .. } => status_of(source),
    }
}

fn fail(status: EsStatus, msg: impl Into<String>) -> EsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), EsStatusError>) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EsStatus::Ok
        }
        Ok(Err(EsStatusError(status, msg))) => fail(status, msg),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(EsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

struct EsStatusError(EsStatus, String);

impl From<Error> for EsStatusError {
    fn from(e: Error) -> Self {
        EsStatusError(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> EsStatusError {
    EsStatusError(EsStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> EsStatusError {
    EsStatusError(EsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, EsStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, EsStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], EsStatusError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize) -> Result<(), EsStatusError> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if capacity < values.len() {
        return Err(EsStatusError(
            EsStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), EsStatusError> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the calling thread's last error message, without the
/// terminating NUL; 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn es_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// fit) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn es_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && capacity > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds the model for the bundled 14-site aggregate and bath.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn es_model_new_bundled(out: *mut *mut EsModel) -> EsStatus {
    guard(|| give(out, EsModel(ExcitonModel::bundled()?)))
}

/// Builds a model from aggregate JSON and optional bath JSON (null selects
/// the bundled bath).
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn es_model_from_json(
    aggregate_json: *const c_char,
    bath_json: *const c_char,
    out: *mut *mut EsModel,
) -> EsStatus {
    guard(|| {
        let spec = AggregateSpec::from_json(text(aggregate_json, "aggregate_json")?)?;
        let bath = if bath_json.is_null() {
            BathSpec::bundled()
        } else {
            serde_json::from_str(text(bath_json, "bath_json")?).map_err(Error::from)?
        };
        give(out, EsModel(ExcitonModel::new(&spec, &bath)?))
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn es_model_free(model: *mut EsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of one-exciton states; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_model_n_one(model: *const EsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_one())
}

/// Number of two-exciton states; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_model_n_two(model: *const EsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_two())
}

/// Copies the ascending one- (`manifold` 1) or two-exciton (`manifold` 2)
/// energies, cm⁻¹.
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn es_model_energies(
    model: *const EsModel,
    manifold: u32,
    out: *mut f64,
    capacity: usize,
) -> EsStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        let e = match manifold {
            1 => m.eig.energies(Manifold::One),
            2 => m.eig.energies(Manifold::Two),
            other => return Err(invalid(format!("manifold must be 1 or 2, got {other}"))),
        };
        copy_out(e.as_slice(), out, capacity)
    })
}

/// Two-exciton population prepared by an entangled pair with the pump at
/// omega1 + omega2, evaluated immediately after the pulse with x polarization.
///
/// # Safety
/// `model` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn es_prepare_entangled(
    model: *const EsModel,
    omega1: f64,
    omega2: f64,
    tau0: f64,
    t1: f64,
    t2: f64,
    out: *mut *mut EsPopulation,
) -> EsStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        let mut src = EppSource::mediated(omega1, omega2, tau0, t2);
        src.t1 = t1;
        src.validate()?;
        let prep = prepare_closed_form(m, &src, &ExcitationOptions::default(), "ffi")?;
        give(out, EsPopulation(prep.distribution))
    })
}

/// All population in two-exciton state `state` (numbered from 0).
///
/// # Safety
/// `model` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn es_population_single(
    model: *const EsModel,
    state: usize,
    out: *mut *mut EsPopulation,
) -> EsStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        if state >= m.n_two() {
            return Err(invalid(format!("state {state} outside 0..{}", m.n_two())));
        }
        give(out, EsPopulation(PopulationDistribution::delta(Manifold::Two, m.n_two(), state)))
    })
}

/// Evolves a population by `t_fs` under two-exciton transport.
///
/// # Safety
/// Handles must be live and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn es_propagate(
    model: *const EsModel,
    population: *const EsPopulation,
    t_fs: f64,
    out: *mut *mut EsPopulation,
) -> EsStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        let p = &borrow(population, "population")?.0;
        if !(t_fs >= 0.0 && t_fs.is_finite()) {
            return Err(invalid(format!("time must be finite and >= 0, got {t_fs}")));
        }
        give(out, EsPopulation(propagate_population(p, &m.two, t_fs)?))
    })
}

/// Number of states in a population; 0 for a null handle.
///
/// # Safety
/// `population` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_population_len(population: *const EsPopulation) -> usize {
    population.as_ref().map_or(0, |p| p.0.values.len())
}

/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn es_population_values(
    population: *const EsPopulation,
    out: *mut f64,
    capacity: usize,
) -> EsStatus {
    guard(|| copy_out(&borrow(population, "population")?.0.values, out, capacity))
}

/// # Safety
/// `population` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn es_population_free(population: *mut EsPopulation) {
    if !population.is_null() {
        drop(Box::from_raw(population));
    }
}

/// Max-normalized coincidence signal on the grid `fe_axis` × `eg_axis`,
/// written fe-major: `out[i * n_eg + j]`.
///
/// # Safety
/// Axis pointers must hold the given counts; `out` must hold
/// `capacity >= n_fe * n_eg` doubles.
#[no_mangle]
pub unsafe extern "C" fn es_coincidence_snapshot(
    model: *const EsModel,
    population: *const EsPopulation,
    detectors: EsDetectors,
    fe_axis: *const f64,
    n_fe: usize,
    eg_axis: *const f64,
    n_eg: usize,
    tw1: f64,
    tw2: f64,
    out: *mut f64,
    capacity: usize,
) -> EsStatus {
    guard(|| {
        let m = &borrow(model, "model")?.0;
        let p = &borrow(population, "population")?.0;
        let fe = slice(fe_axis, n_fe, "fe_axis")?;
        let eg = slice(eg_axis, n_eg, "eg_axis")?;
        let pair = DetectorPair {
            fe: FilterSpec::new(detectors.fe_sigma_t, detectors.fe_sigma_omega),
            eg: FilterSpec::new(detectors.eg_sigma_t, detectors.eg_sigma_omega),
        };
        let grid = SignalGrid::new(fe.to_vec(), eg.to_vec(), tw1, tw2)?;
        let signal = coincidence_snapshot(p, m, &pair, &grid)?;
        let flat: Vec<f64> = signal.values.concat();
        copy_out(&flat, out, capacity)
    })
}

/// Loads a run configuration and executes its scenario, writing artifacts
/// as CSV (`json` = 0) or JSON (`json` != 0).
///
/// # Safety
/// `config_path` must be a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn es_run_config(config_path: *const c_char, json: i32) -> EsStatus {
    guard(|| {
        let path = text(config_path, "config_path")?;
        let format = if json != 0 { Format::Json } else { Format::Csv };
        excitonscope::scenario::run_config_file(Path::new(path), format)?;
        Ok(())
    })
}
