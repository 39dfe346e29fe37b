//! C ABI over the `vardef` toolkit.
//!
//! Corpora and template sets cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`VardefStatus`]; on failure the message is available from
//! [`vardef_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use vardef::augmentor::augment;
use vardef::corpus::{corpus_stats, harvest_pairs, load_corpus, save_corpus, AnnotatedDocument, CharSpan};
use vardef::decoder::{decode_vectors, SpanKind};
use vardef::evaluator::{classify, ClassCounts, MetricReport, OutputClass};
use vardef::similarity::{build_vocabulary, simpson, StopWords};
use vardef::templates::{def_token_histogram, load_templates, TemplateSet, MAX_VAR_SLOTS};
use vardef::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VardefStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Infeasible = 6,
    Usage = 7,
    Internal = 8,
}

impl From<&Error> for VardefStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => VardefStatus::Io,
            Error::Parse { .. } | Error::Template { .. } | Error::TemplateSet(_) => VardefStatus::Parse,
            Error::InfeasibleHistogram(_) | Error::InsufficientPapers { .. } => VardefStatus::Infeasible,
            Error::Config(_) | Error::Usage(_) => VardefStatus::Usage,
            _ => VardefStatus::Validation,
        }
    }
}

/// Opaque corpus handle.
pub struct VardefCorpus(Vec<AnnotatedDocument>);

/// Opaque template-set handle.
pub struct VardefTemplateSet(TemplateSet);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VardefStats {
    pub num_docs: u64,
    pub num_variables: u64,
    pub num_with_definition: u64,
}

/// Decoder output. `start` and `end` are inclusive 1-based token positions
/// and are 0 when `no_definition` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VardefDecoded {
    pub no_definition: bool,
    pub start: u64,
    pub end: u64,
    pub score: f64,
}

/// Half-open character interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VardefSpan {
    pub start: u64,
    pub end: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VardefClass {
    TruePositive = 0,
    Fp1Wide = 1,
    Fp1Narrow = 2,
    Fp1Other = 3,
    Fp2 = 4,
    FalseNegative = 5,
    TrueNegative = 6,
}

impl From<OutputClass> for VardefClass {
    fn from(c: OutputClass) -> Self {
        match c {
            OutputClass::TruePositive => VardefClass::TruePositive,
            OutputClass::Fp1Wide => VardefClass::Fp1Wide,
            OutputClass::Fp1Narrow => VardefClass::Fp1Narrow,
            OutputClass::Fp1Other => VardefClass::Fp1Other,
            OutputClass::Fp2 => VardefClass::Fp2,
            OutputClass::FalseNegative => VardefClass::FalseNegative,
            OutputClass::TrueNegative => VardefClass::TrueNegative,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VardefCounts {
    pub tp: u64,
    pub fp1_wide: u64,
    pub fp1_narrow: u64,
    pub fp1_other: u64,
    pub fp2: u64,
    pub fn_: u64,
    pub tn: u64,
}

/// Each ratio is meaningful only when its `*_defined` flag is set; an
/// undefined ratio (zero denominator) is reported as 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VardefMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy_defined: bool,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(VardefStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(VardefStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(VardefStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VardefStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VardefStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            VardefStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(VardefStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn path_arg(ptr: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    str_arg(ptr, what).map(PathBuf::from)
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vardef_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn vardef_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Loads and validates a JSONL corpus.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn vardef_corpus_load(path: *const c_char, out: *mut *mut VardefCorpus) -> VardefStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let docs = load_corpus(&path)?;
        write_out(out, Box::into_raw(Box::new(VardefCorpus(docs))), "out")
    })
}

/// # Safety
/// `corpus` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vardef_corpus_save(corpus: *const VardefCorpus, path: *const c_char) -> VardefStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        let path = path_arg(path, "path")?;
        save_corpus(&path, &corpus.0)?;
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_corpus_stats(corpus: *const VardefCorpus, out: *mut VardefStats) -> VardefStatus {
    guard(|| {
        let stats = corpus_stats(&handle(corpus, "corpus")?.0);
        let value = VardefStats {
            num_docs: stats.num_docs() as u64,
            num_variables: stats.num_variables() as u64,
            num_with_definition: stats.num_with_definition() as u64,
        };
        write_out(out, value, "out")
    })
}

/// Stats restricted to one process tag; all zero when the tag is absent.
///
/// # Safety
/// `corpus` must come from this library, `process` must be NUL-terminated
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_corpus_process_stats(
    corpus: *const VardefCorpus,
    process: *const c_char,
    out: *mut VardefStats,
) -> VardefStatus {
    guard(|| {
        let stats = corpus_stats(&handle(corpus, "corpus")?.0);
        let tag = str_arg(process, "process")?;
        let row = stats.per_process.get(tag).copied().unwrap_or_default();
        let value = VardefStats {
            num_docs: row.num_docs as u64,
            num_variables: row.num_variables as u64,
            num_with_definition: row.num_with_definition as u64,
        };
        write_out(out, value, "out")
    })
}

/// # Safety
/// `corpus` must come from this library and not be used afterwards. NULL
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn vardef_corpus_free(corpus: *mut VardefCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_templates_load(
    path: *const c_char,
    out: *mut *mut VardefTemplateSet,
) -> VardefStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let set = load_templates(&path)?;
        write_out(out, Box::into_raw(Box::new(VardefTemplateSet(set))), "out")
    })
}

/// Number of templates, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn vardef_templates_len(set: *const VardefTemplateSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Writes the definition-slot histogram (buckets 0..=6) into `out`, which
/// must hold 7 values.
///
/// # Safety
/// `set` must come from this library and `out` must point to 7 writable u64.
#[no_mangle]
pub unsafe extern "C" fn vardef_templates_histogram(set: *const VardefTemplateSet, out: *mut u64) -> VardefStatus {
    guard(|| {
        let hist = def_token_histogram(&handle(set, "set")?.0);
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, MAX_VAR_SLOTS + 1);
        for (d, h) in dst.iter_mut().zip(hist) {
            *d = h as u64;
        }
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn vardef_templates_free(set: *mut VardefTemplateSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Generates a template corpus from the definition pairs of `source`.
///
/// # Safety
/// Handles must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_augment(
    source: *const VardefCorpus,
    templates: *const VardefTemplateSet,
    seed: u64,
    out: *mut *mut VardefCorpus,
) -> VardefStatus {
    guard(|| {
        let pairs = harvest_pairs(&handle(source, "source")?.0);
        let set = handle(templates, "templates")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let docs = augment(&pairs, &set.0, seed)?;
        write_out(out, Box::into_raw(Box::new(VardefCorpus(docs))), "out")
    })
}

/// Best span for one pair of score vectors of length `len`.
///
/// # Safety
/// `s_start` and `s_end` must each point to `len` readable doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_decode(
    s_start: *const f64,
    s_end: *const f64,
    len: usize,
    out: *mut VardefDecoded,
) -> VardefStatus {
    guard(|| {
        if s_start.is_null() || s_end.is_null() {
            return Err(null("score vector"));
        }
        let (a, b) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(s_start, len), std::slice::from_raw_parts(s_end, len))
        };
        let d = decode_vectors(a, b)?;
        let value = match d.kind {
            SpanKind::NoDefinition => VardefDecoded {
                no_definition: true,
                start: 0,
                end: 0,
                score: d.score,
            },
            SpanKind::Span { start, end } => VardefDecoded {
                no_definition: false,
                start: start as u64,
                end: end as u64,
                score: d.score,
            },
        };
        write_out(out, value, "out")
    })
}

/// Classifies a prediction against gold. NULL `gold` or `predicted` means
/// absent.
///
/// # Safety
/// Non-NULL span pointers must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_classify(
    gold: *const VardefSpan,
    predicted: *const VardefSpan,
    out: *mut VardefClass,
) -> VardefStatus {
    guard(|| {
        let span = |s: &VardefSpan| CharSpan::new(s.start as usize, s.end as usize);
        let class = classify(gold.as_ref().map(span), predicted.as_ref().map(span))?;
        write_out(out, VardefClass::from(class), "out")
    })
}

/// # Safety
/// `counts` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_metrics(counts: *const VardefCounts, out: *mut VardefMetrics) -> VardefStatus {
    guard(|| {
        let c = handle(counts, "counts")?;
        let r = MetricReport::from_counts(ClassCounts {
            tp: c.tp,
            fp1_wide: c.fp1_wide,
            fp1_narrow: c.fp1_narrow,
            fp1_other: c.fp1_other,
            fp2: c.fp2,
            fn_: c.fn_,
            tn: c.tn,
        });
        let value = VardefMetrics {
            accuracy: r.accuracy.unwrap_or(0.0),
            precision: r.precision.unwrap_or(0.0),
            recall: r.recall.unwrap_or(0.0),
            f1: r.f1.unwrap_or(0.0),
            accuracy_defined: r.accuracy.is_some(),
            precision_defined: r.precision.is_some(),
            recall_defined: r.recall.is_some(),
            f1_defined: r.f1.is_some(),
        };
        write_out(out, value, "out")
    })
}

/// Simpson coefficient between the definition vocabularies of two corpora
/// with the default stop words. `*defined` is false when either vocabulary
/// is empty.
///
/// # Safety
/// Handles must come from this library; `out` and `defined` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vardef_simpson(
    a: *const VardefCorpus,
    b: *const VardefCorpus,
    out: *mut f64,
    defined: *mut bool,
) -> VardefStatus {
    guard(|| {
        let sw = StopWords::default();
        let va = build_vocabulary(&handle(a, "a")?.0, &sw);
        let vb = build_vocabulary(&handle(b, "b")?.0, &sw);
        let s = simpson(&va, &vb);
        write_out(defined, s.is_some(), "defined")?;
        write_out(out, s.unwrap_or(0.0), "out")
    })
}
