//! C ABI for `signlab`.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`SignlabStatus`]; on
//! failure a message is available from [`signlab_last_error`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use signlab::analytic::{self, AnalyticValue};
use signlab::census::{run_census, CensusOptions, CensusReport};
use signlab::sampler::{Mode, SignOracle};
use signlab::sieve::Sieve;
use signlab::transforms::{self, TruncationSpec};
use signlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignlabStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Resource = 3,
    Config = 4,
    Contract = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignlabMode {
    Random = 0,
    AllPlus = 1,
    AllMinus = 2,
}

/// A value with an absolute error bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignlabValue {
    pub value: f64,
    pub tail_bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignlabCheckpoint {
    pub x: u64,
    pub s_x: f64,
    pub crossings_so_far: u64,
    pub min: f64,
    pub max: f64,
    pub rounding_bound: f64,
}

pub struct SignlabSieve(Sieve);

pub struct SignlabOracle(SignOracle);

pub struct SignlabCensus(CensusReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SignlabStatus {
    match e {
        Error::Domain(_) => SignlabStatus::Domain,
        Error::Resource(_) => SignlabStatus::Resource,
        Error::Config(_) => SignlabStatus::Config,
        Error::Contract(_) => SignlabStatus::Contract,
    }
}

fn guard<F: FnOnce() -> Result<(), SignlabStatus>>(f: F) -> SignlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SignlabStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SignlabStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SignlabStatus>;
}

impl<T> OrStatus<T> for signlab::Result<T> {
    fn or_status(self) -> Result<T, SignlabStatus> {
        self.map_err(|e| {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        })
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SignlabStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{what} is null"));
        SignlabStatus::NullPointer
    })
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SignlabStatus> {
    if out.is_null() {
        set_error("output pointer is null".into());
        return Err(SignlabStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

fn value(v: AnalyticValue) -> SignlabValue {
    SignlabValue {
        value: v.value,
        tail_bound: v.tail_bound,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn signlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn signlab_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn signlab_sieve_new(capacity: u64, out: *mut *mut SignlabSieve) -> SignlabStatus {
    guard(|| {
        let s = Sieve::new(capacity).or_status()?;
        write(out, Box::into_raw(Box::new(SignlabSieve(s))))
    })
}

/// # Safety
/// `sieve` must be null or a handle from [`signlab_sieve_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn signlab_sieve_free(sieve: *mut SignlabSieve) {
    if !sieve.is_null() {
        drop(Box::from_raw(sieve));
    }
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn signlab_oracle_new(
    seed: u64,
    mode: SignlabMode,
    out: *mut *mut SignlabOracle,
) -> SignlabStatus {
    guard(|| {
        let mode = match mode {
            SignlabMode::Random => Mode::Random,
            SignlabMode::AllPlus => Mode::AllPlus,
            SignlabMode::AllMinus => Mode::AllMinus,
        };
        write(out, Box::into_raw(Box::new(SignlabOracle(SignOracle::new(seed, mode)))))
    })
}

/// # Safety
/// `oracle` must be null or a handle from [`signlab_oracle_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn signlab_oracle_free(oracle: *mut SignlabOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// `f(p)` as +1 or -1; fails with `Contract` if `p` is not prime.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_prime_sign(oracle: *const SignlabOracle, p: u64, out: *mut i8) -> SignlabStatus {
    guard(|| {
        let o = deref(oracle, "oracle")?;
        write(out, o.0.prime_sign(p).or_status()?.as_i8())
    })
}

/// `f(n)` as +1 or -1 for `1 <= n <= capacity`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_value(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    n: u64,
    out: *mut i8,
) -> SignlabStatus {
    guard(|| {
        let (o, s) = (deref(oracle, "oracle")?, deref(sieve, "sieve")?);
        write(out, o.0.value(&s.0, n).or_status()?.as_i8())
    })
}

/// Sign-change census of `S_x = sum f(n)/sqrt(n)` up to `x_limit` with
/// power-of-ten checkpoints.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_run(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    x_limit: u64,
    workers: usize,
    out: *mut *mut SignlabCensus,
) -> SignlabStatus {
    guard(|| {
        let (o, s) = (deref(oracle, "oracle")?, deref(sieve, "sieve")?);
        let opts = CensusOptions {
            workers,
            ..Default::default()
        };
        let r = run_census(o.0, &s.0, x_limit, &opts).or_status()?;
        write(out, Box::into_raw(Box::new(SignlabCensus(r))))
    })
}

/// # Safety
/// `census` must be null or a handle from [`signlab_census_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_free(census: *mut SignlabCensus) {
    if !census.is_null() {
        drop(Box::from_raw(census));
    }
}

/// Number of crossings, or 0 for a null handle.
///
/// # Safety
/// `census` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_crossing_count(census: *const SignlabCensus) -> usize {
    census.as_ref().map_or(0, |c| c.0.crossings.len())
}

/// Copies up to `cap` crossing positions into `buf`; returns the total count.
///
/// # Safety
/// `census` must be null or live; `buf` must hold `cap` values when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_crossings(census: *const SignlabCensus, buf: *mut u64, cap: usize) -> usize {
    let Some(c) = census.as_ref() else { return 0 };
    let n = c.0.crossings.len();
    if !buf.is_null() {
        ptr::copy_nonoverlapping(c.0.crossings.as_ptr(), buf, n.min(cap));
    }
    n
}

/// Final sum and its rounding bound.
///
/// # Safety
/// `census` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_final(census: *const SignlabCensus, out: *mut SignlabValue) -> SignlabStatus {
    guard(|| {
        let c = deref(census, "census")?;
        write(
            out,
            SignlabValue {
                value: c.0.final_sum,
                tail_bound: c.0.rounding_bound,
            },
        )
    })
}

/// # Safety
/// `census` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_checkpoint_count(census: *const SignlabCensus) -> usize {
    census.as_ref().map_or(0, |c| c.0.checkpoints.len())
}

/// # Safety
/// `census` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_census_checkpoint(
    census: *const SignlabCensus,
    index: usize,
    out: *mut SignlabCheckpoint,
) -> SignlabStatus {
    guard(|| {
        let c = deref(census, "census")?;
        let Some(row) = c.0.checkpoints.get(index) else {
            set_error(format!("checkpoint index {index} out of range"));
            return Err(SignlabStatus::Domain);
        };
        write(
            out,
            SignlabCheckpoint {
                x: row.x,
                s_x: row.s_x,
                crossings_so_far: row.crossings_so_far,
                min: row.min,
                max: row.max,
                rounding_bound: row.rounding_bound,
            },
        )
    })
}

/// Riemann zeta for real `s > 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_zeta(s: f64, out: *mut SignlabValue) -> SignlabStatus {
    guard(|| write(out, value(analytic::zeta(s).or_status()?)))
}

/// Prime zeta `sum_p p^-s` for real `s > 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_prime_zeta(s: f64, out: *mut SignlabValue) -> SignlabStatus {
    guard(|| write(out, value(analytic::prime_zeta(s).or_status()?)))
}

/// Variance of `R(t)` for `0 < t < 1/2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_r_variance(t: f64, out: *mut SignlabValue) -> SignlabStatus {
    guard(|| write(out, value(analytic::r_variance(t).or_status()?)))
}

/// Covariance of `R(t1)` and `R(t2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_r_covariance(t1: f64, t2: f64, out: *mut SignlabValue) -> SignlabStatus {
    guard(|| write(out, value(analytic::r_covariance(t1, t2).or_status()?)))
}

type TransformFn = fn(&SignOracle, &Sieve, f64, &TruncationSpec) -> signlab::Result<f64>;

unsafe fn transform(
    f: TransformFn,
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    t: f64,
    x_limit: u64,
    prime_limit: u64,
    out: *mut f64,
) -> SignlabStatus {
    guard(|| {
        let (o, s) = (deref(oracle, "oracle")?, deref(sieve, "sieve")?);
        let spec = TruncationSpec::new(x_limit, prime_limit).or_status()?;
        write(out, f(&o.0, &s.0, t, &spec).or_status()?)
    })
}

/// `sum_{n <= x_limit} f(n) n^(-1/2-t)`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_dirichlet_sum(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    t: f64,
    x_limit: u64,
    out: *mut f64,
) -> SignlabStatus {
    transform(transforms::dirichlet_sum, oracle, sieve, t, x_limit, 2, out)
}

/// `int_1^X S_x x^(-1-t) dx` with `X = x_limit`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_laplace_transform(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    t: f64,
    x_limit: u64,
    out: *mut f64,
) -> SignlabStatus {
    transform(transforms::laplace_transform, oracle, sieve, t, x_limit, 2, out)
}

/// `sum_{p <= prime_limit} -log(1 - f(p) p^(-1/2-t))`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_euler_product_log(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    t: f64,
    prime_limit: u64,
    out: *mut f64,
) -> SignlabStatus {
    transform(transforms::euler_product_log, oracle, sieve, t, 1, prime_limit, out)
}

/// `R(t)` truncated at `prime_limit`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signlab_r_statistic(
    oracle: *const SignlabOracle,
    sieve: *const SignlabSieve,
    t: f64,
    prime_limit: u64,
    out: *mut f64,
) -> SignlabStatus {
    transform(transforms::r_statistic, oracle, sieve, t, 1, prime_limit, out)
}
