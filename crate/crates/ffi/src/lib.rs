//! C ABI over `deformsynth`.
//!
//! Objects cross the boundary as opaque handles created by `ds_*_new` /
//! `ds_*_load` style calls and released with the matching `ds_*_free`.
//! Every fallible call returns a [`DsStatus`]; on failure a message for
//! the calling thread is available from [`ds_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use deformsynth::analytics::{confusion, metrics, ConfusionMatrix};
use deformsynth::composite::{close, dilate, erode, open, refine_mask, BinaryMask};
use deformsynth::config::Config;
use deformsynth::dataset::{generate_dataset, BackgroundMode, DatasetManifest};
use deformsynth::mesh::{generate_can, save_obj, Mesh};
use deformsynth::{Error, Label};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Parse = 5,
    Data = 6,
    Image = 7,
    Geometry = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsBackground {
    Black = 0,
    Pool = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsMorphOp {
    Erode = 0,
    Dilate = 1,
    Open = 2,
    Close = 3,
    /// The dataset clean-up chain configured in a `DsConfig`.
    Refine = 4,
}

/// Labels are passed as `int32_t`: 1 = deformed (positive), 0 = intact.
pub const DS_LABEL_NON_DEFORMED: i32 = 0;
pub const DS_LABEL_DEFORMED: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DsConfusion {
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub true_negative: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DsMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    /// Set when a denominator was zero and some metric was reported as 0.
    pub degenerate: bool,
}

pub struct DsConfig(Config);

pub struct DsMesh(Mesh);

pub struct DsManifest {
    inner: DatasetManifest,
    image_paths: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (DsStatus, String);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DsStatus {
    match e {
        Error::Parameter { .. } | Error::Shape(_) | Error::UnknownGroup(_) => DsStatus::InvalidArgument,
        Error::Config(_) => DsStatus::Config,
        Error::Io { .. } => DsStatus::Io,
        Error::Parse { .. } => DsStatus::Parse,
        Error::Data(_) => DsStatus::Data,
        Error::Image { .. } => DsStatus::Image,
        Error::Geometry(_) => DsStatus::Geometry,
    }
}

fn lib(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> Failure {
    (DsStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    (DsStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            DsStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{what}` is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn label_of(v: i32) -> Result<Label, Failure> {
    match v {
        DS_LABEL_DEFORMED => Ok(Label::Deformed),
        DS_LABEL_NON_DEFORMED => Ok(Label::NonDeformed),
        other => Err(invalid(format!("label must be 0 or 1, got {other}"))),
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next `ds_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- config ----

#[no_mangle]
pub extern "C" fn ds_config_default() -> *mut DsConfig {
    boxed(DsConfig(Config::default()))
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_config_load(path: *const c_char, out: *mut *mut DsConfig) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = Config::load(&path_arg(path, "path")?).map_err(lib)?;
        *out = boxed(DsConfig(cfg));
        Ok(())
    })
}

/// Parses TOML text with the same rules as config files.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_config_from_toml(text: *const c_char, out: *mut *mut DsConfig) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|_| invalid("`text` is not UTF-8"))?;
        *out = boxed(DsConfig(Config::from_toml_str(s).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from a `ds_config_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn ds_config_free(cfg: *mut DsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_seed(cfg: *const DsConfig) -> u64 {
    cfg.as_ref().map_or(0, |c| c.0.seed)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_set_seed(cfg: *mut DsConfig, seed: u64) -> DsStatus {
    guard(|| {
        out_arg(cfg, "cfg")?.0.seed = seed;
        Ok(())
    })
}

/// Writes the 64-hex-digit config digest plus NUL into `buf`.
///
/// # Safety
/// `cfg` must be a live handle and `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn ds_config_hash(cfg: *const DsConfig, buf: *mut c_char, cap: usize) -> DsStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let hash = cfg.0.hash();
        if cap < hash.len() + 1 {
            return Err(invalid(format!("buffer of {cap} bytes cannot hold {} + NUL", hash.len())));
        }
        ptr::copy_nonoverlapping(hash.as_ptr().cast::<c_char>(), buf, hash.len());
        *buf.add(hash.len()) = 0;
        Ok(())
    })
}

// ---- mesh ----

/// Builds the parametric can described by `cfg`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_generate_can(cfg: *const DsConfig, out: *mut *mut DsMesh) -> DsStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let out = out_arg(out, "out")?;
        *out = boxed(DsMesh(generate_can(&cfg.0.can).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_vertex_count(mesh: *const DsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertex_count())
}

/// # Safety
/// `mesh` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_face_count(mesh: *const DsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.faces.len())
}

/// Copies `3 · vertex_count` coordinates (x, y, z per vertex) into `out`.
///
/// # Safety
/// `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_positions(mesh: *const DsMesh, out: *mut f64, cap: usize) -> DsStatus {
    guard(|| {
        let mesh = ref_arg(mesh, "mesh")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let need = 3 * mesh.0.vertex_count();
        if cap < need {
            return Err(invalid(format!("need {need} doubles, buffer holds {cap}")));
        }
        let dst = std::slice::from_raw_parts_mut(out, need);
        for (chunk, v) in dst.chunks_exact_mut(3).zip(&mesh.0.vertices) {
            chunk.copy_from_slice(&[v.x, v.y, v.z]);
        }
        Ok(())
    })
}

/// Writes OBJ plus its `.groups` sidecar.
///
/// # Safety
/// `mesh` must be live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_save_obj(mesh: *const DsMesh, path: *const c_char) -> DsStatus {
    guard(|| {
        let mesh = ref_arg(mesh, "mesh")?;
        save_obj(&mesh.0, &path_arg(path, "path")?).map_err(lib)
    })
}

/// # Safety
/// `mesh` must come from `ds_mesh_generate_can` or be null.
#[no_mangle]
pub unsafe extern "C" fn ds_mesh_free(mesh: *mut DsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

// ---- datasets ----

fn wrap_manifest(inner: DatasetManifest) -> DsManifest {
    let image_paths = inner
        .entries
        .iter()
        .map(|e| CString::new(inner.image_path(e).to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    DsManifest { inner, image_paths }
}

/// Renders `n` samples into `out_dir` (see the `generate` command).
/// `jobs` = 0 uses every core.
///
/// # Safety
/// `cfg` must be live, `out_dir` NUL-terminated; `out` may be null when
/// the manifest is not needed.
#[no_mangle]
pub unsafe extern "C" fn ds_generate(
    cfg: *const DsConfig,
    n: u64,
    background: DsBackground,
    out_dir: *const c_char,
    jobs: u32,
    out: *mut *mut DsManifest,
) -> DsStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let dir = path_arg(out_dir, "out_dir")?;
        let mode = match background {
            DsBackground::Black => BackgroundMode::Black,
            DsBackground::Pool => BackgroundMode::Pool,
        };
        let summary = generate_dataset(&cfg.0, n, mode, &dir, jobs as usize).map_err(lib)?;
        if let Some(out) = out.as_mut() {
            *out = boxed(wrap_manifest(summary.manifest));
        }
        Ok(())
    })
}

/// # Safety
/// `path` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_load(path: *const c_char, out: *mut *mut DsManifest) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = DatasetManifest::load(&path_arg(path, "path")?).map_err(lib)?;
        *out = boxed(wrap_manifest(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_len(m: *const DsManifest) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// Label of entry `i` as `DS_LABEL_*`.
///
/// # Safety
/// `m` must be live; `label` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_label(m: *const DsManifest, i: usize, label: *mut i32) -> DsStatus {
    guard(|| {
        let m = ref_arg(m, "manifest")?;
        let label = out_arg(label, "label")?;
        let e = m.inner.entries.get(i).ok_or_else(|| invalid(format!("index {i} out of range ({})", m.inner.len())))?;
        *label = if e.label.is_positive() { DS_LABEL_DEFORMED } else { DS_LABEL_NON_DEFORMED };
        Ok(())
    })
}

/// Image path of entry `i`, or null when out of range. Owned by the
/// manifest handle.
///
/// # Safety
/// `m` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_image_path(m: *const DsManifest, i: usize) -> *const c_char {
    m.as_ref()
        .and_then(|m| m.image_paths.get(i))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Re-hashes every listed file; `mismatches` receives the number of
/// missing or modified files.
///
/// # Safety
/// `m` must be live; `mismatches` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_verify(m: *const DsManifest, mismatches: *mut usize) -> DsStatus {
    guard(|| {
        let m = ref_arg(m, "manifest")?;
        *out_arg(mismatches, "mismatches")? = m.inner.verify().len();
        Ok(())
    })
}

/// # Safety
/// `m` must come from a `ds_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn ds_manifest_free(m: *mut DsManifest) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

// ---- analytics ----

/// Tallies `n` label/prediction pairs (`DS_LABEL_*` values).
///
/// # Safety
/// `labels` and `predictions` must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn ds_confusion(labels: *const i32, predictions: *const i32, n: usize, out: *mut DsConfusion) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n > 0 && (labels.is_null() || predictions.is_null()) {
            return Err(null("labels/predictions"));
        }
        let conv = |p: *const i32| -> Result<Vec<Label>, Failure> {
            if n == 0 {
                return Ok(Vec::new());
            }
            std::slice::from_raw_parts(p, n).iter().map(|&v| label_of(v)).collect()
        };
        let cm = confusion(&conv(labels)?, &conv(predictions)?).map_err(lib)?;
        *out = DsConfusion {
            true_positive: cm.tp,
            false_positive: cm.fp,
            false_negative: cm.fn_,
            true_negative: cm.tn,
        };
        Ok(())
    })
}

/// Accuracy, F1, recall and precision with deformed as positive class.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_metrics(cm: DsConfusion, out: *mut DsMetrics) -> DsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = metrics(&ConfusionMatrix {
            tp: cm.true_positive,
            fp: cm.false_positive,
            fn_: cm.false_negative,
            tn: cm.true_negative,
        })
        .map_err(lib)?;
        *out = DsMetrics {
            accuracy: r.accuracy,
            f1: r.f1,
            recall: r.recall,
            precision: r.precision,
            degenerate: !r.undefined.is_empty(),
        };
        Ok(())
    })
}

/// Square-element morphology on a row-major `width × height` mask
/// (nonzero = set). Writes 0/1 bytes into `out`, which may alias `mask`.
/// `cfg` is only read for `DS_MORPH_OP_REFINE` and may otherwise be null.
///
/// # Safety
/// `mask` and `out` must each hold `width · height` bytes.
#[no_mangle]
pub unsafe extern "C" fn ds_morphology(
    mask: *const u8,
    width: u32,
    height: u32,
    op: DsMorphOp,
    radius: u32,
    cfg: *const DsConfig,
    out: *mut u8,
) -> DsStatus {
    guard(|| {
        if mask.is_null() || out.is_null() {
            return Err(null("mask/out"));
        }
        let len = width as usize * height as usize;
        let src = std::slice::from_raw_parts(mask, len);
        let m = BinaryMask::from_fn(width, height, |x, y| src[(y * width + x) as usize] != 0);
        let r = match op {
            DsMorphOp::Erode => erode(&m, radius),
            DsMorphOp::Dilate => dilate(&m, radius),
            DsMorphOp::Open => open(&m, radius),
            DsMorphOp::Close => close(&m, radius),
            DsMorphOp::Refine => refine_mask(&m, &ref_arg(cfg, "cfg")?.0.composite),
        };
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, &b) in dst.iter_mut().zip(r.bits()) {
            *d = b as u8;
        }
        Ok(())
    })
}
