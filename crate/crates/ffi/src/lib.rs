//! C ABI over the `sumofdm` simulator.
//!
//! Objects are opaque heap handles created by a `*_new` function and
//! released by the matching `*_free`. Every fallible call returns a
//! [`SumStatus`]; on failure the message is kept per thread and can be read
//! with [`sum_last_error`]. Complex samples cross the boundary as
//! [`SumComplex`] arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sumofdm::detect::{Combiner, LlrDetector, LlrWorkspace, MlDetector};
use sumofdm::harness::{run_ber, run_bound, run_sync_demo, ExperimentSpec, TraceMode};
use sumofdm::modes::partition_qam;
use sumofdm::trace::TraceHeader;
use sumofdm::txrx::SubblockCodec;
use sumofdm::{Complex64, Error, SystemConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    Codec = 4,
    IllegalCombination = 5,
    Size = 6,
    SyncFailure = 7,
    Parse = 8,
    Io = 9,
    /// A string argument was not valid UTF-8.
    Utf8 = 10,
    /// A Rust panic was caught at the boundary.
    Panic = 11,
}

/// Detector selection for [`sum_detector_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumDetectorKind {
    /// Exhaustive search over the subblock codebook.
    Ml = 0,
    /// Reduced-complexity detector with max-log combining.
    LlrMaxLog = 1,
    /// Reduced-complexity detector with exact log-sum combining.
    LlrJacobian = 2,
}

/// Experiment selection for [`sum_experiment_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRunKind {
    Ber = 0,
    Bound = 1,
    SyncDemo = 2,
}

/// One complex sample, laid out as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SumComplex {
    pub re: f64,
    pub im: f64,
}

impl From<SumComplex> for Complex64 {
    fn from(c: SumComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for SumComplex {
    fn from(c: Complex64) -> Self {
        SumComplex { re: c.re, im: c.im }
    }
}

/// Subblock encoder for one `(modes, n, q)` configuration.
pub struct SumCodec {
    codec: SubblockCodec,
}

enum Inner {
    Ml(MlDetector),
    Llr(LlrDetector, LlrWorkspace),
}

/// Subblock detector bound to a codec.
pub struct SumDetector {
    inner: Inner,
    p: usize,
}

/// Experiment description, built from `key=value` text.
pub struct SumExperiment {
    spec: ExperimentSpec,
}

/// Owned NUL-terminated text returned by the library.
pub struct SumText {
    text: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SumStatus {
    match e {
        Error::Config(_) => SumStatus::Config,
        Error::Domain(_) => SumStatus::Domain,
        Error::Codec(_) => SumStatus::Codec,
        Error::IllegalCombination { .. } => SumStatus::IllegalCombination,
        Error::Size(_) => SumStatus::Size,
        Error::SyncFailure { .. } => SumStatus::SyncFailure,
        Error::Parse(_) => SumStatus::Parse,
        Error::Io(_) => SumStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Utf8,
    Sim(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Sim(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SumStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SumStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SumStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            SumStatus::Utf8
        }
        Ok(Err(Fail::Sim(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SumStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

fn check_len(got: usize, want: usize, what: &str) -> Result<(), Fail> {
    if got != want {
        return Err(Error::Codec(format!("{what} has length {got}, expected {want}")).into());
    }
    Ok(())
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn sum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sum_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a codec for `modes` constellation modes of size `q` on subblocks
/// of `n` subcarriers, with the built-in mode partition.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sum_codec_new(modes: usize, n: usize, q: usize, out: *mut *mut SumCodec) -> SumStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = SystemConfig::sum(modes, n, q);
        let codec = SubblockCodec::new(&cfg, &partition_qam(modes, q)?)?;
        *out = Box::into_raw(Box::new(SumCodec { codec }));
        Ok(())
    })
}

/// # Safety
/// `codec` must come from [`sum_codec_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sum_codec_free(codec: *mut SumCodec) {
    if !codec.is_null() {
        drop(Box::from_raw(codec));
    }
}

/// Bits per subblock: total `p`, index bits `p1`, data bits `p2`.
///
/// # Safety
/// `codec` must be a live handle; the outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn sum_codec_bits(
    codec: *const SumCodec,
    p: *mut usize,
    p1: *mut usize,
    p2: *mut usize,
) -> SumStatus {
    guard(|| {
        let b = nonnull(codec, "codec")?.codec.budget();
        for (dst, v) in [(p, b.p), (p1, b.p1), (p2, b.p2)] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Subblock length `n`.
///
/// # Safety
/// `codec` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sum_codec_subcarriers(codec: *const SumCodec) -> usize {
    codec.as_ref().map_or(0, |c| c.codec.n())
}

/// Maps `bits_len == p` bits (each 0 or 1) to `out_len == n` subcarrier values.
///
/// # Safety
/// `bits` and `out` must point to arrays of the given lengths.
#[no_mangle]
pub unsafe extern "C" fn sum_codec_encode(
    codec: *const SumCodec,
    bits: *const u8,
    bits_len: usize,
    out: *mut SumComplex,
    out_len: usize,
) -> SumStatus {
    guard(|| {
        let c = &nonnull(codec, "codec")?.codec;
        let bits = input(bits, bits_len, "bits")?;
        let out = output(out, out_len, "out")?;
        check_len(out.len(), c.n(), "output")?;
        let sb = c.encode_subblock(bits)?;
        for (o, s) in out.iter_mut().zip(sb.symbols) {
            *o = s.into();
        }
        Ok(())
    })
}

/// Creates a detector for `codec`. The codec may be freed afterwards.
///
/// # Safety
/// `codec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sum_detector_new(
    codec: *const SumCodec,
    kind: SumDetectorKind,
    out: *mut *mut SumDetector,
) -> SumStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = ptr::null_mut();
        let c = &nonnull(codec, "codec")?.codec;
        let inner = match kind {
            SumDetectorKind::Ml => Inner::Ml(MlDetector::new(c)?),
            SumDetectorKind::LlrMaxLog => Inner::Llr(LlrDetector::new(c, Combiner::MaxLog)?, LlrWorkspace::default()),
            SumDetectorKind::LlrJacobian => {
                Inner::Llr(LlrDetector::new(c, Combiner::Jacobian)?, LlrWorkspace::default())
            }
        };
        *out = Box::into_raw(Box::new(SumDetector { inner, p: c.budget().p }));
        Ok(())
    })
}

/// # Safety
/// `det` must come from [`sum_detector_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sum_detector_free(det: *mut SumDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Detects one subblock from observations `y` and channel gains `c`
/// (`len == n` each) at noise variance `n0`, writing `p` bits. `cm_count`
/// receives the complex multiplications spent and may be null.
///
/// A detector handle is not safe for concurrent use; create one per thread.
///
/// # Safety
/// All pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sum_detector_detect(
    det: *mut SumDetector,
    y: *const SumComplex,
    c: *const SumComplex,
    len: usize,
    n0: f64,
    bits_out: *mut u8,
    bits_len: usize,
    cm_count: *mut u64,
) -> SumStatus {
    guard(|| {
        let det = nonnull_mut(det, "det")?;
        let y: Vec<Complex64> = input(y, len, "y")?.iter().map(|&v| v.into()).collect();
        let c: Vec<Complex64> = input(c, len, "c")?.iter().map(|&v| v.into()).collect();
        let bits_out = output(bits_out, bits_len, "bits_out")?;
        check_len(bits_out.len(), det.p, "bit buffer")?;
        let r = match &mut det.inner {
            Inner::Ml(d) => {
                check_len(len, d.codec().n(), "observation")?;
                d.detect(&y, &c)?
            }
            Inner::Llr(d, ws) => {
                check_len(len, d.codec().n(), "observation")?;
                d.detect(&y, &c, n0, ws)?
            }
        };
        bits_out.copy_from_slice(&r.bits);
        if let Some(cm) = cm_count.as_mut() {
            *cm = r.cm_count;
        }
        Ok(())
    })
}

/// Creates an experiment from `key=value` lines (`#` starts a comment).
/// An empty string gives the defaults.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sum_experiment_new(config: *const c_char, out: *mut *mut SumExperiment) -> SumStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = ptr::null_mut();
        let spec = ExperimentSpec::parse(string(config, "config")?)?;
        *out = Box::into_raw(Box::new(SumExperiment { spec }));
        Ok(())
    })
}

/// # Safety
/// `exp` must come from [`sum_experiment_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sum_experiment_free(exp: *mut SumExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Overrides one key, as in the configuration text.
///
/// # Safety
/// `exp` must be live; `key` and `value` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sum_experiment_set(
    exp: *mut SumExperiment,
    key: *const c_char,
    value: *const c_char,
) -> SumStatus {
    guard(|| {
        let exp = nonnull_mut(exp, "exp")?;
        let mut kv = TraceHeader::new();
        kv.insert(string(key, "key")?.trim().into(), string(value, "value")?.trim().into());
        let mut spec = exp.spec.clone();
        spec.apply(&kv)?;
        exp.spec = spec;
        Ok(())
    })
}

/// Worker threads for subsequent runs; 0 uses every core. Results do not
/// depend on this value.
///
/// # Safety
/// `exp` must be live.
#[no_mangle]
pub unsafe extern "C" fn sum_experiment_set_workers(exp: *mut SumExperiment, workers: usize) -> SumStatus {
    guard(|| {
        nonnull_mut(exp, "exp")?.spec.workers = workers;
        Ok(())
    })
}

/// Runs the experiment and returns its CSV output as a text handle.
///
/// # Safety
/// `exp` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sum_experiment_run(
    exp: *const SumExperiment,
    kind: SumRunKind,
    out: *mut *mut SumText,
) -> SumStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = ptr::null_mut();
        let spec = &nonnull(exp, "exp")?.spec;
        let csv = match kind {
            SumRunKind::Ber => run_ber(spec)?.to_csv(),
            SumRunKind::Bound => run_bound(spec)?.to_csv(),
            SumRunKind::SyncDemo => run_sync_demo(spec, &TraceMode::Simulate)?.to_csv(),
        };
        let text = CString::new(csv).map_err(|_| Error::Codec("output contains NUL".into()))?;
        *out = Box::into_raw(Box::new(SumText { text }));
        Ok(())
    })
}

/// NUL-terminated contents, valid while the handle lives.
///
/// # Safety
/// `text` must be a live handle or null (returns null).
#[no_mangle]
pub unsafe extern "C" fn sum_text_data(text: *const SumText) -> *const c_char {
    text.as_ref().map_or(ptr::null(), |t| t.text.as_ptr())
}

/// Length in bytes, excluding the terminator.
///
/// # Safety
/// `text` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sum_text_len(text: *const SumText) -> usize {
    text.as_ref().map_or(0, |t| t.text.as_bytes().len())
}

/// # Safety
/// `text` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sum_text_free(text: *mut SumText) {
    if !text.is_null() {
        drop(Box::from_raw(text));
    }
}
