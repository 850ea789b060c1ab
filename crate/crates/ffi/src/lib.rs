//! C ABI over the review pipeline.
//!
//! Every function returns a [`CrStatus`]. On failure a message is kept per
//! thread and can be read with [`cr_last_error`]. Handles are opaque and
//! must be released with their matching `_free` function. Strings returned
//! by the library are released with [`cr_string_free`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use crowdreview::defect::{estimate, DefectScore, DefectThresholds, ScoreRecord};
use crowdreview::ingest::{FragKey, PostType};
use crowdreview::pipeline::load_vectors;
use crowdreview::preproc::preprocess;
use crowdreview::pv::{load_model, PvModel};
use crowdreview::review::{conservative_vote, majority_vote, review_source, ReviewOptions};
use crowdreview::sentiment::{analyze, decide, SentimentLexicon};
use crowdreview::store::{load_scores, VectorStore};
use crowdreview::{Error, Language};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    MissingArtifact = 4,
    Format = 5,
    InvalidArgument = 6,
    UnsupportedLanguage = 7,
    EmptyStore = 8,
    NoMatches = 9,
    InvalidScore = 10,
    BufferSize = 11,
    Panic = 12,
    Internal = 13,
}

/// A loaded paragraph-vector model.
pub struct CrModel {
    model: PvModel,
}

/// A loaded vector store for one language with its defect scores.
pub struct CrStore {
    language: Language,
    vectors: VectorStore,
    scores: HashMap<FragKey, ScoreRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: CrStatus, message: impl Into<String>) -> CrStatus {
    set_error(message.into());
    status
}

fn status_of(error: &Error) -> CrStatus {
    match error {
        Error::Io { .. } | Error::Stream(_) => CrStatus::Io,
        Error::MissingArtifact(_) => CrStatus::MissingArtifact,
        Error::Format { .. } | Error::Json(_) => CrStatus::Format,
        Error::UnsupportedLanguage(_) => CrStatus::UnsupportedLanguage,
        Error::EmptyPartition(_) | Error::MissingReference(_) | Error::EmptyCorpus(_) => {
            CrStatus::EmptyStore
        }
        Error::NoMatches => CrStatus::NoMatches,
        Error::InvalidScore(_) | Error::Unscored(..) => CrStatus::InvalidScore,
        Error::DimensionMismatch { .. } => CrStatus::BufferSize,
        _ => CrStatus::InvalidArgument,
    }
}

impl From<Error> for CrStatus {
    fn from(error: Error) -> CrStatus {
        fail(status_of(&error), error.to_string())
    }
}

/// Run `body`, turning panics and errors into a status.
fn guard(body: impl FnOnce() -> Result<(), CrStatus>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            CrStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CrStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, CrStatus> {
    if ptr.is_null() {
        return Err(fail(CrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(CrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, CrStatus> {
    ptr.as_mut()
        .ok_or_else(|| fail(CrStatus::NullArgument, format!("{what} is null")))
}

fn language_of(tag: &str) -> Result<Language, CrStatus> {
    tag.parse::<Language>().map_err(CrStatus::from)
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a model file into `*out_model`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_model_load(
    path: *const c_char,
    out_model: *mut *mut CrModel,
) -> CrStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let model = load_model(Path::new(path))?;
        *slot = Box::into_raw(Box::new(CrModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`cr_model_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn cr_model_free(model: *mut CrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Vector length of the model, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_model_dim(model: *const CrModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.vector_size())
}

/// Embed `code` into `out_vector[0..len]`; `len` must equal the model's
/// dimension. `out_low_confidence` may be null.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn cr_model_infer(
    model: *const CrModel,
    code: *const c_char,
    out_vector: *mut f32,
    len: usize,
    out_low_confidence: *mut bool,
) -> CrStatus {
    guard(|| {
        let model = &model
            .as_ref()
            .ok_or_else(|| fail(CrStatus::NullArgument, "model is null"))?
            .model;
        let code = text(code, "code")?;
        if out_vector.is_null() {
            return Err(fail(CrStatus::NullArgument, "out_vector is null"));
        }
        if len != model.vector_size() {
            return Err(fail(
                CrStatus::BufferSize,
                format!(
                    "buffer holds {len} floats, model dimension is {}",
                    model.vector_size()
                ),
            ));
        }
        let inference = model.infer(&preprocess(code, model.language));
        std::slice::from_raw_parts_mut(out_vector, len)
            .copy_from_slice(inference.vector.as_slice());
        if let Some(flag) = out_low_confidence.as_mut() {
            *flag = inference.low_confidence;
        }
        Ok(())
    })
}

/// Open the vector store for `language` under `store_root`, with scores.
///
/// # Safety
/// Strings must be NUL-terminated; `out_store` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_store_open(
    store_root: *const c_char,
    language: *const c_char,
    out_store: *mut *mut CrStore,
) -> CrStatus {
    guard(|| {
        let root = Path::new(text(store_root, "store_root")?);
        let language = language_of(text(language, "language")?)?;
        let slot = out(out_store, "out_store")?;
        *slot = ptr::null_mut();
        let vectors = load_vectors(root, language)?;
        let scores = load_scores(root)?;
        *slot = Box::into_raw(Box::new(CrStore {
            language,
            vectors,
            scores,
        }));
        Ok(())
    })
}

/// # Safety
/// `store` must be null or a handle from [`cr_store_open`], freed once.
#[no_mangle]
pub unsafe extern "C" fn cr_store_free(store: *mut CrStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of indexed vectors, 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_store_len(store: *const CrStore) -> usize {
    store.as_ref().map_or(0, |s| s.vectors.len())
}

/// Review `source` and write the verdict (-1, 1 or 300). When `out_json`
/// is not null it receives the JSON report, to be freed with
/// [`cr_string_free`].
///
/// # Safety
/// Handles must be live; strings NUL-terminated; out pointers writable or
/// null where allowed.
#[no_mangle]
pub unsafe extern "C" fn cr_review_source(
    model: *const CrModel,
    store: *const CrStore,
    file_name: *const c_char,
    source: *const c_char,
    k: usize,
    conservative: bool,
    out_verdict: *mut i32,
    out_json: *mut *mut c_char,
) -> CrStatus {
    guard(|| {
        let model = &model
            .as_ref()
            .ok_or_else(|| fail(CrStatus::NullArgument, "model is null"))?
            .model;
        let store = store
            .as_ref()
            .ok_or_else(|| fail(CrStatus::NullArgument, "store is null"))?;
        let name = text(file_name, "file_name")?;
        let source = text(source, "source")?;
        let verdict = out(out_verdict, "out_verdict")?;
        let options = ReviewOptions {
            k,
            conservative,
            ..ReviewOptions::default()
        };
        let report = review_source(
            name,
            source,
            store.language,
            model,
            &store.vectors,
            &store.scores,
            &options,
        )?;
        *verdict = report.verdict.value();
        if let Some(slot) = out_json.as_mut() {
            let json = CString::new(report.to_json()?)
                .map_err(|e| fail(CrStatus::Internal, e.to_string()))?;
            *slot = json.into_raw();
        }
        Ok(())
    })
}

/// Defect score of a post: `post_type` is 1 (question) or 2 (answer),
/// `narrative` the text preceding the code.
///
/// # Safety
/// `narrative` must be NUL-terminated; `out_score` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_estimate(
    post_type: u32,
    score: f64,
    narrative: *const c_char,
    out_score: *mut i32,
) -> CrStatus {
    guard(|| {
        let post_type = PostType::from_type_id(post_type).ok_or_else(|| {
            fail(
                CrStatus::InvalidArgument,
                format!("post type {post_type} is not 1 or 2"),
            )
        })?;
        let narrative = text(narrative, "narrative")?;
        let result = out(out_score, "out_score")?;
        if !score.is_finite() {
            return Err(fail(CrStatus::InvalidArgument, "score is not finite"));
        }
        let sentiment = decide(&analyze(narrative, &SentimentLexicon::embedded()));
        *result = estimate(post_type, score, sentiment, &DefectThresholds::default()).value();
        Ok(())
    })
}

/// Mode of `votes[0..len]` with ties toward -1, then 300. With
/// `conservative`, any -1 wins.
///
/// # Safety
/// `votes` must hold `len` values; `out_verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn cr_majority_vote(
    votes: *const i32,
    len: usize,
    conservative: bool,
    out_verdict: *mut i32,
) -> CrStatus {
    guard(|| {
        let result = out(out_verdict, "out_verdict")?;
        if len == 0 {
            return Err(Error::NoMatches.into());
        }
        if votes.is_null() {
            return Err(fail(CrStatus::NullArgument, "votes is null"));
        }
        let scores = std::slice::from_raw_parts(votes, len)
            .iter()
            .map(|&v| DefectScore::try_from(v))
            .collect::<Result<Vec<_>, _>>()?;
        let verdict = if conservative {
            conservative_vote(&scores)?
        } else {
            majority_vote(&scores)?
        };
        *result = verdict.value();
        Ok(())
    })
}
