//! C interface to the sentiment scorer and price forecaster.
//!
//! Objects cross the boundary as opaque handles that must be released with
//! their matching `_free` function. Every fallible call returns a
//! [`SenticastStatus`]; on anything but `Ok` a description of the problem
//! is available from [`senticast_last_error`] until the next failure on
//! the same thread. Pointers returned by the library stay valid until the
//! handle they belong to is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chrono::NaiveDate;
use ndarray::{s, Array2};

use senticast::dataset::{apply_scaler, fit_scaler, window, FeatureMatrix, ScalerParams};
use senticast::lexicon::{bundled, LexiconSet};
use senticast::lstm::{init_model, predict_horizon, train, LstmModel, TrainConfig};
use senticast::sentiment::{score_text, Library};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenticastStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was out of range or inconsistent.
    InvalidInput = 3,
    /// Training diverged or could not run on the given data.
    TrainingFailed = 4,
    /// An unexpected internal failure; please report it.
    InternalError = 5,
}

/// Which scoring dictionary to apply.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenticastLibrary {
    /// Valence-sum scoring with bounded normalization.
    Vader = 0,
    /// General positive/negative word counting.
    Hiv4 = 1,
    /// Finance-specific positive/negative word counting.
    Lm = 2,
}

impl From<SenticastLibrary> for Library {
    fn from(library: SenticastLibrary) -> Library {
        match library {
            SenticastLibrary::Vader => Library::Vader,
            SenticastLibrary::Hiv4 => Library::Hiv4,
            SenticastLibrary::Lm => Library::Lm,
        }
    }
}

/// Opaque bundle of the three scoring dictionaries.
pub struct SenticastLexicons {
    inner: LexiconSet,
}

/// Opaque trained forecaster: the network, its feature scaler and the
/// trailing input window it forecasts from.
pub struct SenticastForecaster {
    model: LstmModel,
    scaler: ScalerParams,
    last_window: Array2<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: SenticastStatus, message: impl Into<String>) -> SenticastStatus {
    let message = message.into().replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).expect("nul bytes replaced");
    });
    status
}

/// Run a handler, converting a panic into an error status instead of
/// letting it unwind across the C boundary.
fn guarded(body: impl FnOnce() -> SenticastStatus) -> SenticastStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SenticastStatus::InternalError, "internal panic"),
    }
}

/// The library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn senticast_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Description of the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn senticast_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a handle to the built-in scoring dictionaries. Free it with
/// [`senticast_lexicons_free`]. Never returns null.
#[no_mangle]
pub extern "C" fn senticast_bundled_lexicons() -> *mut SenticastLexicons {
    match catch_unwind(|| Box::new(SenticastLexicons { inner: bundled::lexicon_set() })) {
        Ok(lexicons) => Box::into_raw(lexicons),
        Err(_) => {
            fail(SenticastStatus::InternalError, "internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Release a lexicon handle. Passing null is a no-op.
///
/// # Safety
/// `lexicons` must be a pointer previously returned by
/// [`senticast_bundled_lexicons`] that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn senticast_lexicons_free(lexicons: *mut SenticastLexicons) {
    if !lexicons.is_null() {
        drop(Box::from_raw(lexicons));
    }
}

/// Score a nul-terminated UTF-8 text with one dictionary, writing a value
/// in [-1, 1] to `out_score`.
///
/// # Safety
/// `lexicons` must be a live handle from [`senticast_bundled_lexicons`];
/// `text` must point to a nul-terminated string; `out_score` must point to
/// writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn senticast_score_text(
    lexicons: *const SenticastLexicons,
    text: *const c_char,
    library: SenticastLibrary,
    out_score: *mut f64,
) -> SenticastStatus {
    guarded(|| {
        if lexicons.is_null() || text.is_null() || out_score.is_null() {
            return fail(SenticastStatus::NullPointer, "null argument to senticast_score_text");
        }
        let text = match CStr::from_ptr(text).to_str() {
            Ok(text) => text,
            Err(e) => return fail(SenticastStatus::InvalidUtf8, format!("text: {e}")),
        };
        *out_score = score_text(text, library.into(), &(*lexicons).inner);
        SenticastStatus::Ok
    })
}

/// Train a forecaster on a row-major `rows x feature_count` matrix whose
/// first column is the series to forecast (the close); remaining columns
/// are auxiliary features. Columns are min-max scaled over the supplied
/// rows, the series is cut into `lookback`-long windows targeting the next
/// row, and a three-layer recurrent network is fitted for `epochs` passes.
/// On success `*out_forecaster` receives a handle to free with
/// [`senticast_forecaster_free`].
///
/// # Safety
/// `values` must point to `rows * feature_count` doubles;
/// `out_forecaster` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn senticast_forecaster_train(
    values: *const f64,
    rows: usize,
    feature_count: usize,
    lookback: usize,
    epochs: usize,
    batch_size: usize,
    learning_rate: f64,
    seed: u64,
    out_forecaster: *mut *mut SenticastForecaster,
) -> SenticastStatus {
    guarded(|| {
        if values.is_null() || out_forecaster.is_null() {
            return fail(
                SenticastStatus::NullPointer,
                "null argument to senticast_forecaster_train",
            );
        }
        let invalid = |message: &str| fail(SenticastStatus::InvalidInput, message);
        if feature_count == 0 {
            return invalid("feature_count must be at least 1");
        }
        if lookback == 0 {
            return invalid("lookback must be at least 1");
        }
        if rows <= lookback {
            return invalid("need more rows than the lookback to form a training sample");
        }
        if epochs == 0 || batch_size == 0 {
            return invalid("epochs and batch_size must be at least 1");
        }
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return invalid("learning_rate must be positive and finite");
        }
        let len = match rows.checked_mul(feature_count) {
            Some(len) => len,
            None => return invalid("rows * feature_count overflows"),
        };
        let data = std::slice::from_raw_parts(values, len);
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("values must all be finite");
        }

        let columns: Vec<String> = (0..feature_count)
            .map(|c| if c == 0 { "close".to_string() } else { format!("x{c}") })
            .collect();
        let base = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
        let matrix = FeatureMatrix {
            ticker: "ffi".to_string(),
            dates: (0..rows as i64).map(|i| base + chrono::Duration::days(i)).collect(),
            columns,
            values: Array2::from_shape_vec((rows, feature_count), data.to_vec())
                .expect("shape matches length"),
        };

        let scaler = fit_scaler(&matrix, rows);
        let scaled = match apply_scaler(&matrix, &scaler) {
            Ok(scaled) => scaled,
            Err(e) => return fail(SenticastStatus::InternalError, e.to_string()),
        };
        let dataset = match window(&scaled, lookback, 0) {
            Ok(dataset) => dataset,
            Err(e) => return invalid(&e.to_string()),
        };

        let mut model = init_model(feature_count, seed);
        let config = TrainConfig { epochs, batch_size, learning_rate, seed };
        if let Err(e) = train(&mut model, dataset.inputs.view(), dataset.targets.view(), &config) {
            return fail(SenticastStatus::TrainingFailed, e.to_string());
        }

        let last_window = scaled.values.slice(s![rows - lookback.., ..]).to_owned();
        let handle = Box::new(SenticastForecaster { model, scaler, last_window });
        *out_forecaster = Box::into_raw(handle);
        SenticastStatus::Ok
    })
}

/// Forecast the next `horizon` values of the close series, in the units
/// the training data used.
///
/// # Safety
/// `forecaster` must be a live handle from
/// [`senticast_forecaster_train`]; `out_values` must point to writable
/// memory for `horizon` doubles.
#[no_mangle]
pub unsafe extern "C" fn senticast_forecaster_predict(
    forecaster: *const SenticastForecaster,
    horizon: usize,
    out_values: *mut f64,
) -> SenticastStatus {
    guarded(|| {
        if forecaster.is_null() || out_values.is_null() {
            return fail(
                SenticastStatus::NullPointer,
                "null argument to senticast_forecaster_predict",
            );
        }
        if horizon == 0 {
            return fail(SenticastStatus::InvalidInput, "horizon must be at least 1");
        }
        let f = &*forecaster;
        match predict_horizon(&f.model, f.last_window.view(), &f.scaler, horizon) {
            Ok(forecast) => {
                std::slice::from_raw_parts_mut(out_values, horizon).copy_from_slice(&forecast);
                SenticastStatus::Ok
            }
            Err(e) => fail(SenticastStatus::InternalError, e.to_string()),
        }
    })
}

/// Release a forecaster handle. Passing null is a no-op.
///
/// # Safety
/// `forecaster` must be a pointer previously returned by
/// [`senticast_forecaster_train`] that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn senticast_forecaster_free(forecaster: *mut SenticastForecaster) {
    if !forecaster.is_null() {
        drop(Box::from_raw(forecaster));
    }
}
