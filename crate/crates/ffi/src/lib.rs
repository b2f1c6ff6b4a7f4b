//! C ABI for predrisk.
//!
//! Documents are parsed into an opaque `PredriskSpec` handle. Every fallible
//! call returns a `PredriskStatus`; on failure the message is available from
//! `predrisk_last_error_message` on the same thread until the next call.
//! Status values match the exit codes of the `predrisk` command.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use predrisk::admissibility;
use predrisk::inference;
use predrisk::model::{Model, PredictionRule, Search};
use predrisk::modelspec::{self, SpecDocument};
use predrisk::risk::{self, MethodPreference, RiskOptions};
use predrisk::ruleopt;
use predrisk::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredriskStatus {
    Ok = 0,
    /// Null pointer, bad length or non-UTF-8 text.
    InvalidArgument = 1,
    /// Syntax, schema or model-invariant error, or an unsupported request.
    Spec = 2,
    ConditioningUndefined = 3,
    RuleMismatch = 4,
    CapExceeded = 5,
    /// A bug; the message describes the panic.
    Internal = 6,
}

/// Opaque handle to a parsed and validated document.
pub struct PredriskSpec {
    doc: SpecDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: PredriskStatus, message: &str) -> PredriskStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> PredriskStatus {
    let status = match e {
        Error::ConditioningUndefined { .. } => PredriskStatus::ConditioningUndefined,
        Error::RuleMismatch(_) => PredriskStatus::RuleMismatch,
        Error::TooManyRules { .. } => PredriskStatus::CapExceeded,
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => {
            PredriskStatus::InvalidArgument
        }
        _ => PredriskStatus::Spec,
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> PredriskStatus) -> PredriskStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PredriskStatus::Internal, &message)
        }
    }
}

unsafe fn spec_ref<'a>(spec: *const PredriskSpec) -> Option<&'a SpecDocument> {
    spec.as_ref().map(|s| &s.doc)
}

/// Parses a NUL-terminated UTF-8 document into `*out`. Free the handle with
/// `predrisk_spec_free`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn predrisk_spec_parse(
    text: *const c_char,
    out: *mut *mut PredriskSpec,
) -> PredriskStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(PredriskStatus::InvalidArgument, "null pointer");
        }
        let text = match CStr::from_ptr(text).to_str() {
            Ok(t) => t,
            Err(_) => return fail(PredriskStatus::InvalidArgument, "document is not UTF-8"),
        };
        match modelspec::parse_spec(text) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(PredriskSpec { doc }));
                PredriskStatus::Ok
            }
            Err(e) => {
                *out = ptr::null_mut();
                from_error(e)
            }
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `spec` must come from `predrisk_spec_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn predrisk_spec_free(spec: *mut PredriskSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Writes the canonical serialization to `*out`; free it with
/// `predrisk_string_free`.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn predrisk_spec_serialize(
    spec: *const PredriskSpec,
    out: *mut *mut c_char,
) -> PredriskStatus {
    guard(|| {
        let Some(doc) = spec_ref(spec) else {
            return fail(PredriskStatus::InvalidArgument, "null handle");
        };
        if out.is_null() {
            return fail(PredriskStatus::InvalidArgument, "null pointer");
        }
        let text = CString::new(modelspec::serialize_spec(doc)).expect("no NUL in output");
        *out = text.into_raw();
        PredriskStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn predrisk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Bayes point prediction for one observation and its posterior predictive
/// risk. The prediction has `*prediction_len` components, written to
/// `prediction` when `prediction_cap` is large enough; otherwise the call
/// fails with `INVALID_ARGUMENT` and still reports the needed length.
///
/// # Safety
/// `y_obs` must point to `y_obs_len` doubles, `prediction` to
/// `prediction_cap` doubles, and the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn predrisk_predict(
    spec: *const PredriskSpec,
    y_obs: *const f64,
    y_obs_len: usize,
    prediction: *mut f64,
    prediction_cap: usize,
    prediction_len: *mut usize,
    risk_out: *mut f64,
) -> PredriskStatus {
    guard(|| {
        let Some(doc) = spec_ref(spec) else {
            return fail(PredriskStatus::InvalidArgument, "null handle");
        };
        if y_obs.is_null() || prediction_len.is_null() || risk_out.is_null() {
            return fail(PredriskStatus::InvalidArgument, "null pointer");
        }
        let y = std::slice::from_raw_parts(y_obs, y_obs_len);
        let result = inference::posterior_predictive(&doc.model, y).and_then(|predictive| {
            let y_hat = ruleopt::minimize_posterior_predictive_risk(
                &predictive,
                &doc.loss,
                Search::Exhaustive,
            )?;
            let est = risk::posterior_predictive_risk(
                &doc.model,
                y,
                &y_hat,
                &doc.loss,
                &RiskOptions::default(),
            )?;
            Ok((y_hat, est.value))
        });
        match result {
            Ok((y_hat, value)) => {
                *prediction_len = y_hat.len();
                if prediction.is_null() || prediction_cap < y_hat.len() {
                    return fail(
                        PredriskStatus::InvalidArgument,
                        &format!("prediction buffer needs {} doubles", y_hat.len()),
                    );
                }
                ptr::copy_nonoverlapping(y_hat.as_ptr(), prediction, y_hat.len());
                *risk_out = value;
                PredriskStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Bayes prediction risk of the Bayes rule. `mc_samples` and `seed` are used
/// only when neither an exact nor a closed-form evaluation applies;
/// `*error_out` is the reported error bound (0 for exact values).
///
/// # Safety
/// `spec` must be a live handle and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn predrisk_bayes_risk(
    spec: *const PredriskSpec,
    mc_samples: u64,
    seed: u64,
    value_out: *mut f64,
    error_out: *mut f64,
) -> PredriskStatus {
    guard(|| {
        let Some(doc) = spec_ref(spec) else {
            return fail(PredriskStatus::InvalidArgument, "null handle");
        };
        if value_out.is_null() || error_out.is_null() {
            return fail(PredriskStatus::InvalidArgument, "null pointer");
        }
        let opts = RiskOptions {
            mc_samples,
            seed,
            preference: MethodPreference::Auto,
        };
        let rule = match &doc.model {
            Model::Finite(m) => {
                ruleopt::canonical_bayes_table(m, &doc.loss).map(PredictionRule::Table)
            }
            model => ruleopt::bayes_prediction_rule(model, &doc.loss),
        };
        match rule.and_then(|r| risk::bayes_prediction_risk(&doc.model, &r, &doc.loss, &opts)) {
            Ok(est) => {
                *value_out = est.value;
                *error_out = est.error;
                PredriskStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Checks every rule of a finite model against the Bayes rule and sets
/// `*admissible` to whether none dominates it at tolerance `tol`.
///
/// # Safety
/// `spec` must be a live handle and `admissible` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn predrisk_certify_bayes_admissible(
    spec: *const PredriskSpec,
    tol: f64,
    cap: u64,
    admissible: *mut bool,
) -> PredriskStatus {
    guard(|| {
        let Some(doc) = spec_ref(spec) else {
            return fail(PredriskStatus::InvalidArgument, "null handle");
        };
        if admissible.is_null() {
            return fail(PredriskStatus::InvalidArgument, "null pointer");
        }
        let Some(model) = doc.model.as_finite() else {
            return fail(PredriskStatus::Spec, "admissibility needs a finite model");
        };
        let result = ruleopt::canonical_bayes_table(model, &doc.loss).and_then(|table| {
            admissibility::find_dominating_rule(
                model,
                &PredictionRule::Table(table),
                &doc.loss,
                tol,
                cap,
            )
        });
        match result {
            Ok(found) => {
                *admissible = found.is_none();
                PredriskStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn predrisk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
