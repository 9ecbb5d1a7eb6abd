//! C ABI over the `acan` crate.
//!
//! Datasets and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`AcanStatus`]; on failure the
//! message is available from [`acan_last_error_message`] on the same thread
//! until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use acan::data::{generate_synthetic, load_csv, save_csv, Dataset, SynthConfig};
use acan::eval::{evaluate, EvalOptions};
use acan::numeric::{Matrix, ModelFile, Network};
use acan::objectives::Scheme;
use acan::trainer::{train, TrainConfig};
use acan::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Dimension = 4,
    Parse = 5,
    Io = 6,
    InvalidDataset = 7,
    NonFinite = 8,
    EmptySet = 9,
    Divergence = 10,
    StaleCache = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcanScheme {
    Grl = 0,
    Oce = 1,
    Ace = 2,
    None = 3,
}

impl From<AcanScheme> for Scheme {
    fn from(s: AcanScheme) -> Self {
        match s {
            AcanScheme::Grl => Scheme::Grl,
            AcanScheme::Oce => Scheme::Oce,
            AcanScheme::Ace => Scheme::Ace,
            AcanScheme::None => Scheme::None,
        }
    }
}

/// Synthetic dataset parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcanSynthOptions {
    pub cameras: usize,
    pub identities_per_camera: usize,
    pub samples_per_identity: usize,
    pub input_dim: usize,
    pub identity_spread: f64,
    pub camera_shift_scale: f64,
    pub cross_camera_overlap: usize,
    pub seed: u64,
}

impl From<&AcanSynthOptions> for SynthConfig {
    fn from(o: &AcanSynthOptions) -> Self {
        SynthConfig {
            cameras: o.cameras,
            identities_per_camera: o.identities_per_camera,
            samples_per_identity: o.samples_per_identity,
            input_dim: o.input_dim,
            identity_spread: o.identity_spread,
            camera_shift_scale: o.camera_shift_scale,
            cross_camera_overlap: o.cross_camera_overlap,
            seed: o.seed,
        }
    }
}

/// The training hyperparameters exposed over the C ABI. Everything else
/// keeps its library default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcanTrainOptions {
    pub scheme: AcanScheme,
    pub lambda: f64,
    pub margin: f64,
    pub persons: usize,
    pub images_per_person: usize,
    /// Camera-balanced batch size before division by the camera count.
    pub adversarial_batch_base: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// `num_lr_decay_epochs` epochs at which the rate is multiplied by the
    /// decay factor; may be null when the count is 0.
    pub lr_decay_epochs: *const usize,
    pub num_lr_decay_epochs: usize,
    pub lr_decay_factor: f64,
    pub seed: u64,
}

/// Headline numbers of one evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcanEvalSummary {
    pub map: f64,
    pub rank1: f64,
    pub rank5: f64,
    pub rank10: f64,
    pub d_inter_camera: f64,
    pub off_diagonal_uniformity: f64,
    pub num_queries: usize,
}

/// Opaque dataset handle.
pub struct AcanDataset(Dataset);

/// Opaque trained-model handle.
pub struct AcanModel {
    net: Network,
    seed: u64,
    scheme: Scheme,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AcanStatus {
    match e {
        Error::Dimension { .. } => AcanStatus::Dimension,
        Error::InvalidArgument(_) => AcanStatus::InvalidArgument,
        Error::InvalidConfig(_) => AcanStatus::InvalidConfig,
        Error::StaleCache(_) => AcanStatus::StaleCache,
        Error::Parse { .. } => AcanStatus::Parse,
        Error::InvalidDataset(_) => AcanStatus::InvalidDataset,
        Error::NonFinite(_) => AcanStatus::NonFinite,
        Error::EmptySet(_) => AcanStatus::EmptySet,
        Error::Divergence { .. } => AcanStatus::Divergence,
        Error::Io { .. } => AcanStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AcanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AcanStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            AcanStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            AcanStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failing call on this thread, or null if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn acan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default synthetic dataset parameters.
#[no_mangle]
pub extern "C" fn acan_synth_options_default() -> AcanSynthOptions {
    let d = SynthConfig::default();
    AcanSynthOptions {
        cameras: d.cameras,
        identities_per_camera: d.identities_per_camera,
        samples_per_identity: d.samples_per_identity,
        input_dim: d.input_dim,
        identity_spread: d.identity_spread,
        camera_shift_scale: d.camera_shift_scale,
        cross_camera_overlap: d.cross_camera_overlap,
        seed: d.seed,
    }
}

static DEFAULT_DECAY_EPOCHS: [usize; 2] = [100, 200];

/// Default training options for `scheme`. The decay schedule points at
/// static storage.
#[no_mangle]
pub extern "C" fn acan_train_options_default(scheme: AcanScheme) -> AcanTrainOptions {
    let d = TrainConfig::default();
    debug_assert_eq!(d.lr_decay_epochs, DEFAULT_DECAY_EPOCHS);
    AcanTrainOptions {
        scheme,
        lambda: d.lambda,
        margin: d.margin,
        persons: d.persons,
        images_per_person: d.images_per_person,
        adversarial_batch_base: d.adversarial_batch_base,
        epochs: d.epochs,
        learning_rate: d.learning_rate,
        lr_decay_epochs: DEFAULT_DECAY_EPOCHS.as_ptr(),
        num_lr_decay_epochs: DEFAULT_DECAY_EPOCHS.len(),
        lr_decay_factor: d.lr_decay_factor,
        seed: d.seed,
    }
}

/// # Safety
/// `options` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_synthesize(
    options: *const AcanSynthOptions,
    out: *mut *mut AcanDataset,
) -> AcanStatus {
    guard(|| {
        let o = deref(options, "options")?;
        let out = out_ptr(out, "out")?;
        let ds = generate_synthetic(&SynthConfig::from(o))?;
        *out = Box::into_raw(Box::new(AcanDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_load_csv(path: *const c_char, out: *mut *mut AcanDataset) -> AcanStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(AcanDataset(load_csv(&path)?)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a live dataset handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_save_csv(ds: *const AcanDataset, path: *const c_char) -> AcanStatus {
    guard(|| {
        let ds = deref(ds, "dataset")?;
        save_csv(&ds.0, &path_arg(path)?)?;
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_len(ds: *const AcanDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_num_cameras(ds: *const AcanDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.num_cameras())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_input_dim(ds: *const AcanDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.input_dim())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn acan_dataset_free(ds: *mut AcanDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Trains a model on the train split of `ds`.
///
/// # Safety
/// `ds` and `options` must be null or valid, `options.lr_decay_epochs` must
/// point to `num_lr_decay_epochs` values, and `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn acan_train(
    ds: *const AcanDataset,
    options: *const AcanTrainOptions,
    out: *mut *mut AcanModel,
) -> AcanStatus {
    guard(|| {
        let ds = deref(ds, "dataset")?;
        let o = deref(options, "options")?;
        let out = out_ptr(out, "out")?;
        let decay = match (o.lr_decay_epochs.is_null(), o.num_lr_decay_epochs) {
            (_, 0) => Vec::new(),
            (true, _) => return Err(Failure::Null("lr_decay_epochs")),
            (false, n) => std::slice::from_raw_parts(o.lr_decay_epochs, n).to_vec(),
        };
        let cfg = TrainConfig {
            scheme: o.scheme.into(),
            lambda: o.lambda,
            margin: o.margin,
            persons: o.persons,
            images_per_person: o.images_per_person,
            adversarial_batch_base: o.adversarial_batch_base,
            epochs: o.epochs,
            learning_rate: o.learning_rate,
            lr_decay_epochs: decay,
            lr_decay_factor: o.lr_decay_factor,
            seed: o.seed,
            ..TrainConfig::default()
        };
        let (net, _) = train(&ds.0, &cfg)?;
        *out = Box::into_raw(Box::new(AcanModel {
            net,
            seed: cfg.seed,
            scheme: cfg.scheme,
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live model handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn acan_model_save(model: *const AcanModel, path: *const c_char) -> AcanStatus {
    guard(|| {
        let m = deref(model, "model")?;
        ModelFile::new(&m.net, m.seed, m.scheme).save(&path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn acan_model_load(path: *const c_char, out: *mut *mut AcanModel) -> AcanStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out = out_ptr(out, "out")?;
        let file = ModelFile::load(&path)?;
        let net = file.to_network()?;
        *out = Box::into_raw(Box::new(AcanModel {
            net,
            seed: file.seed,
            scheme: file.scheme,
        }));
        Ok(())
    })
}

/// Embedding width, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn acan_model_embedding_dim(model: *const AcanModel) -> usize {
    model.as_ref().map_or(0, |m| m.net.embedding_dim())
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn acan_model_input_dim(model: *const AcanModel) -> usize {
    model.as_ref().map_or(0, |m| m.net.input_dim())
}

/// Embeds `rows` row-major feature vectors of width `cols` into `out`, which
/// must hold `out_len >= rows * embedding_dim` values.
///
/// # Safety
/// `features` must point to `rows * cols` readable doubles and `out` to
/// `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn acan_model_embed(
    model: *const AcanModel,
    features: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
    out_len: usize,
) -> AcanStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if features.is_null() {
            return Err(Failure::Null("features"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let need = rows * m.net.embedding_dim();
        if out_len < need {
            return Err(Error::InvalidArgument(format!("output buffer holds {out_len} values, need {need}")).into());
        }
        let x = Matrix::from_vec(rows, cols, std::slice::from_raw_parts(features, rows * cols).to_vec())?;
        let e = m.net.embed(&x)?;
        std::slice::from_raw_parts_mut(out, need).copy_from_slice(e.as_slice());
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn acan_model_free(model: *mut AcanModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluates `model` on `ds` under the cross-camera protocol.
///
/// # Safety
/// `model` and `ds` must be null or live handles; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn acan_evaluate(
    model: *const AcanModel,
    ds: *const AcanDataset,
    out: *mut AcanEvalSummary,
) -> AcanStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let ds = deref(ds, "dataset")?;
        let out = out_ptr(out, "out")?;
        let r = evaluate(&m.net, &ds.0, &EvalOptions::default())?;
        let rank = |k| r.rank(k).unwrap_or(f64::NAN);
        *out = AcanEvalSummary {
            map: r.map,
            rank1: rank(1),
            rank5: rank(5),
            rank10: rank(10),
            d_inter_camera: r.d_inter_camera,
            off_diagonal_uniformity: r.off_diagonal_uniformity,
            num_queries: r.num_queries,
        };
        Ok(())
    })
}
