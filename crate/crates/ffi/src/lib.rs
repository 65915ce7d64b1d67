//! C interface to the `asian-ctmc` pricing engine.
//!
//! A pricer is created from TOML config text, adjusted with `key=value`
//! overrides, and asked for prices. Every function returns a status code;
//! on failure a message is kept per thread and read back with
//! [`asian_last_error_message`]. Panics never cross the boundary.
//!
//! ```c
//! AsianPricer *p = NULL;
//! if (asian_pricer_new(config_text, &p) != ASIAN_OK) {
//!     fprintf(stderr, "%s\n", asian_last_error_message());
//! }
//! asian_pricer_set(p, "strike=110");
//! AsianPriceResult r;
//! asian_pricer_price(p, &r);
//! asian_pricer_free(p);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use asian_ctmc::config::{parse_request, with_overrides};
use asian_ctmc::pricing::{Pricer, PricingRequest};
use asian_ctmc::Error;

pub const ASIAN_OK: c_int = 0;
/// Invalid argument or violated precondition.
pub const ASIAN_ERR_ARGUMENT: c_int = 1;
/// Input outside the domain of the computation.
pub const ASIAN_ERR_DOMAIN: c_int = 2;
/// Singular matrix or failed numerical method.
pub const ASIAN_ERR_NUMERIC: c_int = 3;
/// The model could not be turned into a chain.
pub const ASIAN_ERR_CONSTRUCTION: c_int = 4;
/// Malformed config text or override.
pub const ASIAN_ERR_CONFIG: c_int = 5;
/// A required pointer was null.
pub const ASIAN_ERR_NULL: c_int = 6;
/// A string argument was not valid UTF-8.
pub const ASIAN_ERR_UTF8: c_int = 7;
/// An internal panic was caught.
pub const ASIAN_ERR_PANIC: c_int = 8;

/// Opaque pricer handle.
pub struct AsianPricer {
    request: PricingRequest,
    pricer: Pricer,
}

/// Price with its inversion diagnostics.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AsianPriceResult {
    pub price: f64,
    /// Error proxy of the numerical inversion, in currency units.
    pub error_proxy: f64,
    /// Non-zero when the error proxy exceeded the configured tolerance.
    pub warning: c_int,
    /// Final Euler series length; 0 on the zero-strike path.
    pub series_terms: usize,
    pub n_states: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    // interior NULs would truncate the message on the C side anyway
    let clean = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn code_of(e: &Error) -> c_int {
    match e {
        Error::Argument(_) => ASIAN_ERR_ARGUMENT,
        Error::Domain(_) => ASIAN_ERR_DOMAIN,
        Error::Singular { .. } | Error::Numeric(_) => ASIAN_ERR_NUMERIC,
        Error::Construction(_) => ASIAN_ERR_CONSTRUCTION,
        Error::Config(_) | Error::Io(_) => ASIAN_ERR_CONFIG,
    }
}

struct Failure(c_int, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(code_of(&e), e.to_string())
    }
}

/// Run `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ASIAN_OK
        }
        Ok(Err(Failure(code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            ASIAN_ERR_PANIC
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(ASIAN_ERR_NULL, format!("{what} is null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| Failure(ASIAN_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

unsafe fn pricer_mut<'a>(ptr: *mut AsianPricer) -> Result<&'a mut AsianPricer, Failure> {
    ptr.as_mut().ok_or_else(|| Failure(ASIAN_ERR_NULL, "pricer is null".into()))
}

/// Create a pricer from TOML config text. On success `*out` owns a handle
/// that must be released with [`asian_pricer_free`]; on failure it is set
/// to null.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asian_pricer_new(config: *const c_char, out: *mut *mut AsianPricer) -> c_int {
    guard(|| {
        if out.is_null() {
            return Err(Failure(ASIAN_ERR_NULL, "output pointer is null".into()));
        }
        *out = std::ptr::null_mut();
        let request = parse_request(read_str(config, "config")?)?;
        request.validate()?;
        *out = Box::into_raw(Box::new(AsianPricer { request, pricer: Pricer::new() }));
        Ok(())
    })
}

/// Apply one `key.path=value` override, e.g. `"grid.n_states=100"`. The
/// pricer is unchanged if the result would be invalid.
///
/// # Safety
/// `pricer` must come from [`asian_pricer_new`]; `assignment` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn asian_pricer_set(pricer: *mut AsianPricer, assignment: *const c_char) -> c_int {
    guard(|| {
        let p = pricer_mut(pricer)?;
        let assignment = read_str(assignment, "assignment")?;
        let next = with_overrides(&p.request, &[assignment.to_string()])?;
        next.validate()?;
        p.request = next;
        Ok(())
    })
}

/// Price the current request. Chains are cached inside the pricer, so
/// repricing after a strike change skips the chain construction.
///
/// # Safety
/// `pricer` must come from [`asian_pricer_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn asian_pricer_price(pricer: *mut AsianPricer, out: *mut AsianPriceResult) -> c_int {
    guard(|| {
        let p = pricer_mut(pricer)?;
        let out = out.as_mut().ok_or_else(|| Failure(ASIAN_ERR_NULL, "result pointer is null".into()))?;
        let res = p.pricer.price(&p.request)?;
        let d = &res.diagnostics;
        *out = AsianPriceResult {
            price: res.price,
            error_proxy: d.error_proxy,
            warning: c_int::from(d.inversion_warning),
            series_terms: d.series_terms,
            n_states: d.n_states,
        };
        Ok(())
    })
}

/// Release a pricer. Null is accepted and ignored.
///
/// # Safety
/// `pricer` must come from [`asian_pricer_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asian_pricer_free(pricer: *mut AsianPricer) {
    if !pricer.is_null() {
        drop(Box::from_raw(pricer));
    }
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn asian_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asian_ctmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
