//! C interface to `fingergeo`.
//!
//! Every fallible function returns an [`FgStatus`]; on failure the message
//! is available from [`fg_last_error_message`] on the same thread. Objects
//! are opaque handles created by the `*_read`, `*_load` and `*_train`
//! functions and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use fingergeo::classify::{forest_predict, forest_train, ForestConfig, ForestModel};
use fingergeo::eval::{roc_and_eer, verification_score, MeanDivision, ScoreSets};
use fingergeo::features::{extract_features, FeatureMatrix, FEATURE_COUNT};
use fingergeo::imaging::{GrayImage, HandSide, SegmentationConfig};
use fingergeo::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Segmentation = 5,
    Data = 6,
    Panic = 99,
}

/// Number of values in one feature row.
pub const FG_FEATURE_COUNT: usize = 52;

const _: () = assert!(FG_FEATURE_COUNT == FEATURE_COUNT);

/// Feature matrix read from CSV.
pub struct FgMatrix(FeatureMatrix);

/// Trained random forest.
pub struct FgForest(ForestModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FgStatus {
    match e {
        Error::Io(_) | Error::Layout { .. } => FgStatus::Io,
        Error::Csv(_) | Error::Json(_) | Error::Image(_) | Error::BadLayout(_) => FgStatus::Parse,
        Error::InvalidConfig(_) | Error::ParamsOutOfRange(_) | Error::LengthMismatch { .. } => {
            FgStatus::InvalidArgument
        }
        e if e.is_segmentation_failure() => FgStatus::Segmentation,
        _ => FgStatus::Data,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FgStatus, String)>) -> FgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FgStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            FgStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (FgStatus, String)>;
}

impl<T> OrStatus<T> for fingergeo::Result<T> {
    fn or_status(self) -> Result<T, (FgStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (FgStatus, String) {
    (FgStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (FgStatus, String) {
    (FgStatus::InvalidArgument, msg.into())
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (FgStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn to_path(p: *const c_char) -> Result<PathBuf, (FgStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not UTF-8"))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Segments an 8-bit grayscale image (row-major, `width * height` bytes)
/// and writes the 52 features of index, middle, ring and little finger to
/// `out`. `left_hand` mirrors the finger labels.
///
/// # Safety
/// `pixels` must point to `width * height` bytes and `out` to
/// `FG_FEATURE_COUNT` doubles.
#[no_mangle]
pub unsafe extern "C" fn fg_extract_features(
    pixels: *const u8,
    width: usize,
    height: usize,
    left_hand: bool,
    out: *mut f64,
) -> FgStatus {
    guard(|| {
        let n = width
            .checked_mul(height)
            .ok_or_else(|| invalid("image too large"))?;
        let px = slice(pixels, n, "pixels")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let img = GrayImage::from_raw(width, height, px.to_vec())
            .ok_or_else(|| invalid("empty image"))?;
        let cfg = SegmentationConfig {
            hand: if left_hand {
                HandSide::Left
            } else {
                HandSide::Right
            },
            ..SegmentationConfig::default()
        };
        let row = extract_features(&img, &cfg).or_status()?;
        std::slice::from_raw_parts_mut(out, FEATURE_COUNT).copy_from_slice(&row);
        Ok(())
    })
}

/// Reads a feature matrix CSV (`subject_id,sample_id,<columns…>`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fg_matrix_read(path: *const c_char, out: *mut *mut FgMatrix) -> FgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = FeatureMatrix::read_csv_file(&to_path(path)?).or_status()?;
        *out = Box::into_raw(Box::new(FgMatrix(m)));
        Ok(())
    })
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fg_matrix_rows(m: *const FgMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Number of feature columns, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fg_matrix_cols(m: *const FgMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies row `row` into `out`, which holds `fg_matrix_cols(m)` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` large enough.
#[no_mangle]
pub unsafe extern "C" fn fg_matrix_row(m: *const FgMatrix, row: usize, out: *mut f64) -> FgStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r =
            m.0.values
                .get(row)
                .ok_or_else(|| invalid(format!("row {row} out of range")))?;
        std::slice::from_raw_parts_mut(out, r.len()).copy_from_slice(r);
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fg_matrix_free(m: *mut FgMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Trains a forest on `rows × cols` row-major values with class ids in
/// `labels`. `max_features` 0 means floor(sqrt(cols)).
///
/// # Safety
/// `x` must hold `rows * cols` doubles, `labels` `rows` entries and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn fg_forest_train(
    x: *const f64,
    rows: usize,
    cols: usize,
    labels: *const usize,
    n_trees: usize,
    max_features: usize,
    seed: u64,
    out: *mut *mut FgForest,
) -> FgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if cols == 0 {
            return Err(invalid("cols must be positive"));
        }
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("matrix too large"))?;
        let values = slice(x, n, "x")?;
        let y = slice(labels, rows, "labels")?;
        let xs: Vec<Vec<f64>> = values.chunks(cols).map(<[f64]>::to_vec).collect();
        let cfg = ForestConfig {
            n_trees,
            max_features: (max_features > 0).then_some(max_features),
            seed,
            ..ForestConfig::default()
        };
        let model = forest_train(&xs, y, &cfg).or_status()?;
        *out = Box::into_raw(Box::new(FgForest(model)));
        Ok(())
    })
}

/// Predicted class of one row of `cols` values. `score`, if not NULL,
/// receives the winning class's share of tree votes.
///
/// # Safety
/// `f` must be a live handle, `row` must hold `cols` doubles and `label`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn fg_forest_predict(
    f: *const FgForest,
    row: *const f64,
    cols: usize,
    label: *mut usize,
    score: *mut f64,
) -> FgStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("forest"))?;
        if label.is_null() {
            return Err(null("label"));
        }
        let r = slice(row, cols, "row")?;
        let (l, dist) = forest_predict(&f.0, r).or_status()?;
        *label = l;
        if let Some(s) = score.as_mut() {
            *s = dist.get(l).copied().unwrap_or(0.0);
        }
        Ok(())
    })
}

/// Writes the model as JSON to `path`.
///
/// # Safety
/// `f` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fg_forest_save(f: *const FgForest, path: *const c_char) -> FgStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("forest"))?;
        let json = f.0.to_json().or_status()?;
        std::fs::write(to_path(path)?, json).map_err(|e| (FgStatus::Io, e.to_string()))
    })
}

/// Loads a model written by [`fg_forest_save`] or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fg_forest_load(path: *const c_char, out: *mut *mut FgForest) -> FgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text =
            std::fs::read_to_string(to_path(path)?).map_err(|e| (FgStatus::Io, e.to_string()))?;
        let model = ForestModel::from_json(&text).or_status()?;
        *out = Box::into_raw(Box::new(FgForest(model)));
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fg_forest_free(f: *mut FgForest) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Matching score between an enrolled template and a probe over `n`
/// features; smaller is a better match. `per_term` selects division by each
/// feature's mean instead of by the average mean.
///
/// # Safety
/// All four arrays must hold `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fg_verification_score(
    enrolled: *const f64,
    probe: *const f64,
    weights: *const f64,
    means: *const f64,
    n: usize,
    per_term: bool,
    out: *mut f64,
) -> FgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let division = if per_term {
            MeanDivision::PerTerm
        } else {
            MeanDivision::Outside
        };
        *out = verification_score(
            slice(enrolled, n, "enrolled")?,
            slice(probe, n, "probe")?,
            slice(weights, n, "weights")?,
            slice(means, n, "means")?,
            division,
        )
        .or_status()?;
        Ok(())
    })
}

/// Equal error rate of genuine and imposter score sets over `n_thresholds`
/// evenly spaced thresholds plus the observed scores. `threshold`, if not
/// NULL, receives the interpolated threshold at the EER.
///
/// # Safety
/// `genuine` must hold `n_genuine` and `imposter` `n_imposter` doubles;
/// `eer` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fg_eer(
    genuine: *const f64,
    n_genuine: usize,
    imposter: *const f64,
    n_imposter: usize,
    n_thresholds: usize,
    eer: *mut f64,
    threshold: *mut f64,
) -> FgStatus {
    guard(|| {
        if eer.is_null() {
            return Err(null("eer"));
        }
        let scores = ScoreSets {
            genuine: slice(genuine, n_genuine, "genuine")?.to_vec(),
            imposter: slice(imposter, n_imposter, "imposter")?.to_vec(),
            ..ScoreSets::default()
        };
        let roc = roc_and_eer(&scores, n_thresholds).or_status()?;
        *eer = roc.eer;
        if let Some(t) = threshold.as_mut() {
            *t = roc.eer_threshold;
        }
        Ok(())
    })
}
