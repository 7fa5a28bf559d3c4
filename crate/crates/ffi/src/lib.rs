//! C ABI over the `diffusense` library.
//!
//! Covariance matrices and signal blocks cross the boundary as opaque handles
//! created by the `dfs_covariance_*` and `dfs_block_synthesize` constructors
//! and released with the matching `*_free`. Every fallible call returns a
//! [`DfsStatus`]; on failure a description is available from
//! [`dfs_last_error_message`] on the same thread. Output arrays are caller-allocated and their capacity is passed
//! alongside the pointer.
//!
//! All functions catch panics at the boundary and report them as
//! `DFS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diffusense::config::ScenarioFile;
use diffusense::covariance::{eigenvalues, estimate_covariance, mismatch_xi};
use diffusense::estimators::{comedie, default_grid, dirac, drr_to_beta, profile, thiele_gover};
use diffusense::field_sim::{analytic_covariance, synthesize};
use diffusense::sh_math::{channel_count, sh_vector, Direction};
use diffusense::{CovarianceMatrix, Error, Estimator, ShSignalBlock};

/// Result codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed data: wrong lengths, non-finite or asymmetric matrices.
    InvalidInput = 2,
    /// An argument outside the domain of the operation.
    Domain = 3,
    /// A scenario document violates one of its invariants.
    Config = 4,
    /// A document could not be parsed.
    Format = 5,
    NoConvergence = 6,
    /// The caller's output buffer is shorter than required.
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsEstimator {
    Comedie = 0,
    Dirac = 1,
    ThieleGover = 2,
}

impl From<DfsEstimator> for Estimator {
    fn from(e: DfsEstimator) -> Self {
        match e {
            DfsEstimator::Comedie => Estimator::Comedie,
            DfsEstimator::Dirac => Estimator::Dirac,
            DfsEstimator::ThieleGover => Estimator::ThieleGover,
        }
    }
}

/// Opaque covariance matrix handle.
pub struct DfsCovariance(CovarianceMatrix);

/// Opaque SH signal block handle.
pub struct DfsBlock(ShSignalBlock);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: DfsStatus,
    message: String,
}

impl Failure {
    fn new(status: DfsStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn null(name: &str) -> Self {
        Self::new(DfsStatus::NullPointer, format!("`{name}` is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => DfsStatus::Domain,
            Error::InvalidInput(_) => DfsStatus::InvalidInput,
            Error::Config { .. } | Error::EmptyAxis(_) => DfsStatus::Config,
            Error::Format(_) => DfsStatus::Format,
            Error::NoConvergence { .. } => DfsStatus::NoConvergence,
            Error::GridPoint { .. } => DfsStatus::Domain,
            Error::Io(_) => DfsStatus::Io,
        };
        Self::new(status, e.to_string())
    }
}

fn set_last_error(message: Option<&str>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = message
            .map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs were replaced"));
    });
}

/// Runs `body`, translating errors and panics into status codes.
fn guard<F>(body: F) -> DfsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error(None);
            DfsStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(Some(&f.message));
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(&format!("panic: {msg}")));
            DfsStatus::Panic
        }
    }
}

unsafe fn input_slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure::null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn output_slice<'a>(
    data: *mut f64,
    capacity: usize,
    needed: usize,
) -> Result<&'a mut [f64], Failure> {
    if capacity < needed {
        return Err(Failure::new(
            DfsStatus::BufferTooSmall,
            format!("output buffer holds {capacity} values, {needed} required"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(Failure::null("out"));
    }
    Ok(std::slice::from_raw_parts_mut(data, needed))
}

unsafe fn text<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::new(DfsStatus::Format, format!("`{name}` is not valid UTF-8")))
}

unsafe fn covariance<'a>(handle: *const DfsCovariance) -> Result<&'a CovarianceMatrix, Failure> {
    handle
        .as_ref()
        .map(|h| &h.0)
        .ok_or_else(|| Failure::null("covariance"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn store_scalar(out: *mut f64, value: f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = value;
    Ok(())
}

fn scenario(toml: &str) -> Result<diffusense::ScenarioConfig, Failure> {
    Ok(ScenarioFile::parse(toml)?.to_scenario()?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call returning a
/// [`DfsStatus`] on the same thread.
#[no_mangle]
pub extern "C" fn dfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `(L+1)²`, the number of SH channels up to order `order`.
#[no_mangle]
pub extern "C" fn dfs_channel_count(order: usize) -> usize {
    channel_count(order)
}

/// Writes the `(order+1)²` real N3D harmonics (ACN order) at the direction
/// given in radians.
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dfs_sh_vector(
    order: usize,
    azimuth: f64,
    elevation: f64,
    out: *mut f64,
    capacity: usize,
) -> DfsStatus {
    guard(|| {
        if !(azimuth.is_finite() && elevation.is_finite()) {
            return Err(Failure::new(
                DfsStatus::InvalidInput,
                "direction must be finite",
            ));
        }
        let y = sh_vector(order, &Direction::new(azimuth, elevation));
        output_slice(out, capacity, y.values().len())?.copy_from_slice(y.values());
        Ok(())
    })
}

/// Wraps a row-major `(order+1)² × (order+1)²` symmetric matrix.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_from_matrix(
    order: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut DfsCovariance,
) -> DfsStatus {
    guard(|| {
        let values = input_slice(data, len, "data")?;
        let c = CovarianceMatrix::new(order, values.to_vec())?;
        store(out, DfsCovariance(c))
    })
}

/// Sample covariance `B·Bᵀ/T` of channel-major SH signals with `samples`
/// samples per channel.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_from_signals(
    order: usize,
    samples: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut DfsCovariance,
) -> DfsStatus {
    guard(|| {
        let values = input_slice(data, len, "data")?;
        let block = ShSignalBlock::new(order, samples, values.to_vec())?;
        store(out, DfsCovariance(estimate_covariance(&block)))
    })
}

/// Model covariance of the scenario described by a TOML document (the same
/// schema the command-line tool reads).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_analytic_from_config(
    toml: *const c_char,
    out: *mut *mut DfsCovariance,
) -> DfsStatus {
    guard(|| {
        let cfg = scenario(text(toml, "toml")?)?;
        store(out, DfsCovariance(analytic_covariance(&cfg)?))
    })
}

/// Sample covariance of a signal block.
///
/// # Safety
/// `block` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_from_block(
    block: *const DfsBlock,
    out: *mut *mut DfsCovariance,
) -> DfsStatus {
    guard(|| {
        let block = block.as_ref().ok_or_else(|| Failure::null("block"))?;
        store(out, DfsCovariance(estimate_covariance(&block.0)))
    })
}

/// Releases a covariance handle. NULL is ignored.
///
/// # Safety
/// `handle` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_free(handle: *mut DfsCovariance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// SH order of a covariance handle, or `SIZE_MAX` for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_order(handle: *const DfsCovariance) -> usize {
    handle.as_ref().map_or(usize::MAX, |h| h.0.order())
}

/// Copies the row-major matrix into `out`.
///
/// # Safety
/// `handle` must be a live handle; `out` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn dfs_covariance_data(
    handle: *const DfsCovariance,
    out: *mut f64,
    capacity: usize,
) -> DfsStatus {
    guard(|| {
        let c = covariance(handle)?;
        output_slice(out, capacity, c.as_slice().len())?.copy_from_slice(c.as_slice());
        Ok(())
    })
}

/// Eigenvalues in decreasing order, `(L+1)²` of them.
///
/// # Safety
/// `handle` must be a live handle; `out` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn dfs_eigenvalues(
    handle: *const DfsCovariance,
    out: *mut f64,
    capacity: usize,
) -> DfsStatus {
    guard(|| {
        let spectrum = eigenvalues(covariance(handle)?)?;
        output_slice(out, capacity, spectrum.values().len())?.copy_from_slice(spectrum.values());
        Ok(())
    })
}

/// COMEDIE diffuseness in `[0, 1]`.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_comedie(handle: *const DfsCovariance, out: *mut f64) -> DfsStatus {
    guard(|| {
        let d = comedie(&eigenvalues(covariance(handle)?)?)?;
        store_scalar(out, d)
    })
}

/// DirAC diffuseness from the order-0/1 block.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_dirac(handle: *const DfsCovariance, out: *mut f64) -> DfsStatus {
    guard(|| store_scalar(out, dirac(covariance(handle)?)?))
}

/// Thiele-Gover diffuseness on the default beam grid for the covariance order.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_thiele_gover(
    handle: *const DfsCovariance,
    out: *mut f64,
) -> DfsStatus {
    guard(|| {
        let c = covariance(handle)?;
        let grid = default_grid(c.order())?;
        store_scalar(out, thiele_gover(c, &grid)?)
    })
}

/// Diffuse-field mismatch of the covariance.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_mismatch_xi(handle: *const DfsCovariance, out: *mut f64) -> DfsStatus {
    guard(|| store_scalar(out, mismatch_xi(covariance(handle)?)?))
}

/// Order-1 through order-L diffuseness profile, `L` values.
///
/// # Safety
/// `handle` must be a live handle; `out` must point to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn dfs_profile(
    handle: *const DfsCovariance,
    estimator: DfsEstimator,
    out: *mut f64,
    capacity: usize,
) -> DfsStatus {
    guard(|| {
        let p = profile(covariance(handle)?, estimator.into())?;
        output_slice(out, capacity, p.values.len())?.copy_from_slice(&p.values);
        Ok(())
    })
}

/// Relative diffuse level `β` for a direct-to-reverberant ratio in dB.
#[no_mangle]
pub extern "C" fn dfs_drr_to_beta(drr_db: f64) -> f64 {
    drr_to_beta(drr_db)
}

/// Synthesizes the SH signal block of a TOML scenario.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_block_synthesize(
    toml: *const c_char,
    out: *mut *mut DfsBlock,
) -> DfsStatus {
    guard(|| {
        let cfg = scenario(text(toml, "toml")?)?;
        store(out, DfsBlock(synthesize(&cfg)?))
    })
}

/// Releases a block handle. NULL is ignored.
///
/// # Safety
/// `handle` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dfs_block_free(handle: *mut DfsBlock) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Channel and sample counts of a block.
///
/// # Safety
/// `handle` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_block_shape(
    handle: *const DfsBlock,
    channels: *mut usize,
    samples: *mut usize,
) -> DfsStatus {
    guard(|| {
        let block = handle.as_ref().ok_or_else(|| Failure::null("block"))?;
        if channels.is_null() || samples.is_null() {
            return Err(Failure::null("channels/samples"));
        }
        *channels = block.0.channels();
        *samples = block.0.samples();
        Ok(())
    })
}

/// Borrowed view of the channel-major samples. The pointer stays valid until
/// the block is freed.
///
/// # Safety
/// `handle` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dfs_block_data(
    handle: *const DfsBlock,
    data: *mut *const f64,
    len: *mut usize,
) -> DfsStatus {
    guard(|| {
        let block = handle.as_ref().ok_or_else(|| Failure::null("block"))?;
        if data.is_null() || len.is_null() {
            return Err(Failure::null("data/len"));
        }
        *data = block.0.as_slice().as_ptr();
        *len = block.0.as_slice().len();
        Ok(())
    })
}
