//! C ABI for trivia-miner.
//!
//! A session is opened once and queried many times. Every entry point
//! returns a [`TmStatus`]; on failure a description is available from
//! [`tm_last_error_message`] on the same thread. Strings handed out by the
//! library are NUL-terminated UTF-8 and must be released with
//! [`tm_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use trivia_miner::report::{self, OutputFormat};
use trivia_miner::{EmbeddingFormat, Error, Session, SessionConfig};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    /// Unreadable or malformed input file.
    Io = 2,
    /// Unknown article or category, or no answer for it.
    Lookup = 3,
    /// Invalid configuration value.
    Config = 4,
    NullArgument = 10,
    InvalidUtf8 = 11,
    /// Internal error; the session should not be used further.
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmEmbeddingFormat {
    Text = 0,
    Binary = 1,
}

/// Tunables for [`tm_session_open`]. Start from [`tm_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TmConfig {
    pub k: usize,
    pub min_df: u64,
    pub sample_cap: usize,
    pub seed: u64,
    pub workers: usize,
    pub embeddings_format: TmEmbeddingFormat,
    /// Non-zero to drop categories scoring below `threshold`.
    pub use_threshold: i32,
    pub threshold: f64,
}

/// Loaded corpus, embeddings and similarity cache.
pub struct TmSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(TmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            3 => TmStatus::Lookup,
            4 => TmStatus::Config,
            _ => TmStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TmStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_default();
            set_last_error(format!("internal error: {detail}"));
            TmStatus::Panic
        }
    }
}

unsafe fn required_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(TmStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TmStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn optional_path(p: *const c_char, name: &str) -> Result<Option<PathBuf>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        required_str(p, name).map(|s| Some(PathBuf::from(s)))
    }
}

unsafe fn session_ref<'a>(s: *const TmSession) -> Result<&'a Session, Failure> {
    s.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Failure(TmStatus::NullArgument, "session is NULL".into()))
}

unsafe fn write_string(out: *mut *mut c_char, text: Vec<u8>) -> Result<(), Failure> {
    let c = CString::new(text)
        .map_err(|_| Failure(TmStatus::InvalidUtf8, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(
            TmStatus::NullArgument,
            "output pointer is NULL".into(),
        ))
    } else {
        Ok(())
    }
}

#[no_mangle]
pub extern "C" fn tm_config_default() -> TmConfig {
    let d = SessionConfig::new("", "");
    TmConfig {
        k: d.k,
        min_df: d.min_df,
        sample_cap: d.sample_cap,
        seed: d.seed,
        workers: d.workers,
        embeddings_format: TmEmbeddingFormat::Binary,
        use_threshold: 0,
        threshold: 0.0,
    }
}

/// Open a session.
///
/// `corpus` and `embeddings` are required. `idf_corpus`, `index`,
/// `stopwords` and `cache` may be NULL. `config` may be NULL for defaults.
/// On success `*out` owns a session to be released with [`tm_session_free`].
///
/// # Safety
/// Non-NULL string arguments must be valid NUL-terminated strings and `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tm_session_open(
    corpus: *const c_char,
    idf_corpus: *const c_char,
    index: *const c_char,
    stopwords: *const c_char,
    cache: *const c_char,
    embeddings: *const c_char,
    config: *const TmConfig,
    out: *mut *mut TmSession,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let cfg = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| tm_config_default());
        let session_config = SessionConfig {
            idf_corpus_path: optional_path(idf_corpus, "idf_corpus")?,
            index_path: optional_path(index, "index")?,
            stopwords_path: optional_path(stopwords, "stopwords")?,
            cache_path: optional_path(cache, "cache")?,
            embeddings_format: match cfg.embeddings_format {
                TmEmbeddingFormat::Text => EmbeddingFormat::Text,
                TmEmbeddingFormat::Binary => EmbeddingFormat::Binary,
            },
            k: cfg.k,
            min_df: cfg.min_df,
            sample_cap: cfg.sample_cap,
            seed: cfg.seed,
            workers: cfg.workers,
            threshold: (cfg.use_threshold != 0).then_some(cfg.threshold),
            ..SessionConfig::new(
                required_str(corpus, "corpus")?,
                required_str(embeddings, "embeddings")?,
            )
        };
        let inner = Session::open(session_config)?;
        *out = Box::into_raw(Box::new(TmSession { inner }));
        Ok(())
    })
}

/// Release a session. NULL is ignored.
///
/// # Safety
/// `session` must come from [`tm_session_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_session_free(session: *mut TmSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Similarity of two articles, in [-1, 1].
///
/// # Safety
/// Pointers must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tm_similarity(
    session: *const TmSession,
    first: *const c_char,
    second: *const c_char,
    out: *mut f64,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let s = session_ref(session)?;
        *out = s.similarity(
            required_str(first, "first")?,
            required_str(second, "second")?,
        )?;
        Ok(())
    })
}

/// Ranked categories of an article as JSON Lines, best first.
///
/// # Safety
/// Pointers must be valid; free `*out` with [`tm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tm_top_trivia(
    session: *const TmSession,
    article: *const c_char,
    out: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let s = session_ref(session)?;
        let ranking = s.top_trivia(required_str(article, "article")?)?;
        let mut buf = Vec::new();
        report::write_scores(&mut buf, OutputFormat::Jsonl, &ranking.scores).expect("write to Vec");
        write_string(out, buf)
    })
}

/// Members of a category as JSON Lines, most surprising first.
///
/// # Safety
/// Pointers must be valid; free `*out` with [`tm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tm_outliers(
    session: *const TmSession,
    category: *const c_char,
    out: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let s = session_ref(session)?;
        let members = s.outliers(required_str(category, "category")?)?;
        let mut buf = Vec::new();
        report::write_members(&mut buf, OutputFormat::Jsonl, &members).expect("write to Vec");
        write_string(out, buf)
    })
}

/// The paragraph of an article closest to a category title, as one JSON
/// object with fields `paragraph`, `score` and `text`.
///
/// # Safety
/// Pointers must be valid; free `*out` with [`tm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn tm_explain(
    session: *const TmSession,
    article: *const c_char,
    category: *const c_char,
    out: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let s = session_ref(session)?;
        let article = required_str(article, "article")?;
        let explanation = s.explain(article, required_str(category, "category")?)?;
        let text = &s
            .corpus()
            .article(article)
            .expect("explained article exists")
            .paragraphs[explanation.paragraph];
        let mut buf = Vec::new();
        report::write_explanation(&mut buf, OutputFormat::Jsonl, &explanation, text)
            .expect("write to Vec");
        write_string(out, buf)
    })
}

/// Write the similarity cache to the file given at open time, if any.
///
/// # Safety
/// `session` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tm_session_save_cache(session: *const TmSession) -> TmStatus {
    guard(|| Ok(session_ref(session)?.save_cache()?))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn tm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
