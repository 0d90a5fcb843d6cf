//! C bindings for the learner, batch network construction, random walks and
//! the graph metrics.
//!
//! Every fallible function returns an `SwStatus`; on failure a message is
//! available from `sw_last_error` on the same thread. Strings returned through
//! out-parameters are owned by the caller and released with `sw_string_free`.
//! Handles are released with their `*_free` function; passing NULL is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semwalk::corpus::{parse_corpus, parse_norms};
use semwalk::graphstats::{average_path_length, clustering_coefficient};
use semwalk::learner::LearnerState;
use semwalk::netbuild::build_batch_network;
use semwalk::walker::{run_ensemble, WalkRecord};
use semwalk::{Error, SemanticNetwork, DEFAULT_CUE};

/// Result codes. Values other than `Ok`, `NullPointer`, `InvalidUtf8` and
/// `Panic` correspond one to one with the library's error kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotFound = 4,
    MissingWords = 5,
    InvalidArgument = 6,
    Undefined = 7,
    NoNeighbors = 8,
    NoConvergence = 9,
    Io = 10,
    Json = 11,
    Csv = 12,
    Config = 13,
    Panic = 14,
}

/// Incremental word learner.
pub struct SwLearner(LearnerState);

/// Semantic network.
pub struct SwNetwork(SemanticNetwork);

/// Ensemble of walk records.
pub struct SwWalks(Vec<WalkRecord>);

struct Failure(SwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => SwStatus::Parse,
            Error::NotFound { .. } => SwStatus::NotFound,
            Error::MissingWords(_) => SwStatus::MissingWords,
            Error::InvalidArgument(_) => SwStatus::InvalidArgument,
            Error::Undefined(_) => SwStatus::Undefined,
            Error::NoNeighbors(_) => SwStatus::NoNeighbors,
            Error::NoConvergence { .. } => SwStatus::NoConvergence,
            Error::Io(_) => SwStatus::Io,
            Error::Json(_) => SwStatus::Json,
            Error::Csv(_) => SwStatus::Csv,
            Error::Config(_) => SwStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("panic inside semwalk");
            SwStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SwStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SwStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SwStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SwStatus::NullPointer, format!("{what} is NULL")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| {
        Failure(
            SwStatus::InvalidArgument,
            "string contains a nul byte".into(),
        )
    })?;
    put(out, c.into_raw(), "out")
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New learner with empty meanings.
#[no_mangle]
pub extern "C" fn sw_learner_new() -> *mut SwLearner {
    Box::into_raw(Box::new(SwLearner(LearnerState::new())))
}

/// # Safety
/// `learner` must come from `sw_learner_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sw_learner_free(learner: *mut SwLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

/// Parses `corpus` (`U:`/`S:` records) and processes every pair in order.
///
/// # Safety
/// Pointers must be valid; `corpus` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sw_learner_process(
    learner: *mut SwLearner,
    corpus: *const c_char,
) -> SwStatus {
    guard(|| {
        let l = learner
            .as_mut()
            .ok_or_else(|| Failure(SwStatus::NullPointer, "learner is NULL".into()))?;
        let pairs = parse_corpus(text(corpus, "corpus")?.as_bytes())?;
        l.0.process_corpus(&pairs);
        Ok(())
    })
}

/// Number of pairs processed so far.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_learner_time(learner: *const SwLearner, out: *mut u64) -> SwStatus {
    guard(|| put(out, handle(learner, "learner")?.0.t(), "out"))
}

/// `P(feature | word)` for a stored cell; `NotFound` otherwise.
///
/// # Safety
/// Pointers must be valid; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sw_learner_prob(
    learner: *const SwLearner,
    word: *const c_char,
    feature: *const c_char,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        let (w, f) = (text(word, "word")?, text(feature, "feature")?);
        let p = handle(learner, "learner")?
            .0
            .prob(w, f)
            .ok_or_else(|| Error::not_found("meaning cell", format!("{w}/{f}")))?;
        put(out, p, "out")
    })
}

/// Learned meanings as JSON (`{t, meanings: {word: {feature: prob}}}`).
///
/// # Safety
/// Pointers must be valid. Free the result with `sw_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sw_learner_meanings_json(
    learner: *const SwLearner,
    out: *mut *mut c_char,
) -> SwStatus {
    guard(|| {
        let m = handle(learner, "learner")?.0.snapshot(None);
        put_string(out, serde_json::to_string(&m)?)
    })
}

/// Batch network over the words in `norms` (`word,category` lines) plus the
/// cue "animal", thresholded at `rho` and at `rho_animal` for cue edges.
///
/// # Safety
/// Pointers must be valid; `norms` must be NUL-terminated. Free the result
/// with `sw_network_free`.
#[no_mangle]
pub unsafe extern "C" fn sw_network_build(
    learner: *const SwLearner,
    norms: *const c_char,
    rho: f64,
    rho_animal: f64,
    out: *mut *mut SwNetwork,
) -> SwStatus {
    guard(|| {
        let l = handle(learner, "learner")?;
        let norms = parse_norms(text(norms, "norms")?.as_bytes())?;
        let net = build_batch_network(
            &l.0.snapshot(Some("batch")),
            norms.words(),
            DEFAULT_CUE,
            rho,
            rho_animal,
        )?;
        put(out, Box::into_raw(Box::new(SwNetwork(net))), "out")
    })
}

/// Reads a network from its JSON form.
///
/// # Safety
/// Pointers must be valid; `json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sw_network_from_json(
    json: *const c_char,
    out: *mut *mut SwNetwork,
) -> SwStatus {
    guard(|| {
        let net = SemanticNetwork::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(SwNetwork(net))), "out")
    })
}

/// # Safety
/// Pointers must be valid. Free the result with `sw_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sw_network_to_json(
    net: *const SwNetwork,
    out: *mut *mut c_char,
) -> SwStatus {
    guard(|| put_string(out, handle(net, "network")?.0.to_json()?))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_network_size(
    net: *const SwNetwork,
    nodes: *mut usize,
    edges: *mut usize,
) -> SwStatus {
    guard(|| {
        let n = &handle(net, "network")?.0;
        put(nodes, n.node_count(), "nodes")?;
        put(edges, n.edge_count(), "edges")
    })
}

/// Clustering coefficient and average path length (largest component).
/// Returns `Undefined` for a network without edges.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_network_metrics(
    net: *const SwNetwork,
    clustering: *mut f64,
    path_length: *mut f64,
) -> SwStatus {
    guard(|| {
        let g = handle(net, "network")?.0.graph();
        let l = average_path_length(&g)?;
        put(clustering, clustering_coefficient(&g), "clustering")?;
        put(path_length, l, "path_length")
    })
}

/// # Safety
/// `net` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sw_network_free(net: *mut SwNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Runs `n_walks` walks of `steps` steps from `start`. Walk `i` is seeded
/// from `seed` and `i`, so results do not depend on the thread count.
///
/// # Safety
/// Pointers must be valid; `start` must be NUL-terminated. Free the result
/// with `sw_walks_free`.
#[no_mangle]
pub unsafe extern "C" fn sw_walks_run(
    net: *const SwNetwork,
    start: *const c_char,
    steps: usize,
    n_walks: usize,
    seed: u64,
    out: *mut *mut SwWalks,
) -> SwStatus {
    guard(|| {
        let walks = run_ensemble(
            &handle(net, "network")?.0,
            text(start, "start")?,
            steps,
            n_walks,
            seed,
        )?;
        put(out, Box::into_raw(Box::new(SwWalks(walks))), "out")
    })
}

/// Number of walks in the ensemble, 0 for NULL.
///
/// # Safety
/// `walks` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn sw_walks_count(walks: *const SwWalks) -> usize {
    walks.as_ref().map_or(0, |w| w.0.len())
}

/// Number of distinct words retrieved by walk `index`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_walks_retrievals(
    walks: *const SwWalks,
    index: usize,
    out: *mut usize,
) -> SwStatus {
    guard(|| {
        let w = handle(walks, "walks")?
            .0
            .get(index)
            .ok_or_else(|| Error::invalid(format!("walk index {index} out of range")))?;
        put(out, w.unique_words(), "out")
    })
}

/// Walk records as a JSON array of `{seed, steps, retrievals}`.
///
/// # Safety
/// Pointers must be valid. Free the result with `sw_string_free`.
#[no_mangle]
pub unsafe extern "C" fn sw_walks_to_json(
    walks: *const SwWalks,
    out: *mut *mut c_char,
) -> SwStatus {
    guard(|| put_string(out, serde_json::to_string(&handle(walks, "walks")?.0)?))
}

/// # Safety
/// `walks` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sw_walks_free(walks: *mut SwWalks) {
    if !walks.is_null() {
        drop(Box::from_raw(walks));
    }
}
