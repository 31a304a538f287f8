//! C ABI over haloscope.
//!
//! Objects cross the boundary as opaque handles created by `hs_*_load` /
//! `hs_select` and released with the matching `hs_*_free`. Every fallible
//! call returns an [`HsStatus`]; on failure a message for the calling thread
//! is available from [`hs_last_error_message`].
//!
//! Variable-length outputs use a two-call convention: the total length is
//! always written to `out_len`, at most `cap` items are copied into `buf`,
//! and `buf` may be null when `cap` is 0.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use haloscope::halo::{extract_subtree, read_catalog_file, validate_forest, MergerForest};
use haloscope::layout::{mds_project, time_colormap};
use haloscope::selection::{
    wysiwyg_select, CameraPose, DepositionMode, LassoRegion, SelectionParams, SelectionResult, SplitRule,
    ThresholdMode, Viewport,
};
use haloscope::{Error, ErrorKind, ParticleSnapshot, Vec3};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Panic = 3,
    InvalidLasso = 10,
    InvalidCamera = 11,
    InvalidParams = 12,
    DimensionMismatch = 13,
    EmptySelection = 14,
    OutOfDomain = 15,
    DuplicateId = 20,
    BrokenLink = 21,
    BadLink = 22,
    FofViolation = 23,
    Cycle = 24,
    NoSuchHalo = 25,
    NoSuchCluster = 26,
    EmptyTrace = 27,
    InvalidPoint = 30,
    InvalidSpec = 31,
    IncompleteDataset = 32,
    Format = 40,
    Io = 41,
    Other = 99,
}

impl From<ErrorKind> for HsStatus {
    fn from(k: ErrorKind) -> Self {
        match k {
            ErrorKind::InvalidLasso => HsStatus::InvalidLasso,
            ErrorKind::InvalidCamera => HsStatus::InvalidCamera,
            ErrorKind::InvalidParams => HsStatus::InvalidParams,
            ErrorKind::DimensionMismatch => HsStatus::DimensionMismatch,
            ErrorKind::EmptySelection => HsStatus::EmptySelection,
            ErrorKind::OutOfDomain => HsStatus::OutOfDomain,
            ErrorKind::DuplicateId => HsStatus::DuplicateId,
            ErrorKind::BrokenLink => HsStatus::BrokenLink,
            ErrorKind::BadLink => HsStatus::BadLink,
            ErrorKind::FofViolation => HsStatus::FofViolation,
            ErrorKind::Cycle => HsStatus::Cycle,
            ErrorKind::NoSuchHalo => HsStatus::NoSuchHalo,
            ErrorKind::NoSuchCluster => HsStatus::NoSuchCluster,
            ErrorKind::EmptyTrace => HsStatus::EmptyTrace,
            ErrorKind::InvalidPoint => HsStatus::InvalidPoint,
            ErrorKind::InvalidSpec => HsStatus::InvalidSpec,
            ErrorKind::IncompleteDataset => HsStatus::IncompleteDataset,
            ErrorKind::Format => HsStatus::Format,
            ErrorKind::Io => HsStatus::Io,
            _ => HsStatus::Other,
        }
    }
}

/// A validated merger forest.
pub struct HsForest(MergerForest);

/// One particle snapshot.
pub struct HsSnapshot(ParticleSnapshot);

/// The outcome of a lasso selection, including the grid for re-thresholding.
pub struct HsSelection(SelectionResult);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsCamera {
    pub eye: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    /// Degrees.
    pub vertical_fov: f64,
    pub near: f64,
    pub far: f64,
    pub width: u32,
    pub height: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsLassoKind {
    Circle = 0,
    Polygon = 1,
}

/// A circle uses `center` and `radius`; a polygon reads `vertex_count`
/// (x, y) pairs from `vertices`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsLasso {
    pub kind: HsLassoKind,
    pub center: [f64; 2],
    pub radius: f64,
    pub vertices: *const f64,
    pub vertex_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsParams {
    pub grid_n: u32,
    /// When false the threshold is the mean node density and `rho0` is ignored.
    pub explicit_threshold: bool,
    pub rho0: f64,
    /// Standard cloud-in-cell weights instead of the summed ones.
    pub cic_deposition: bool,
    /// Plain 6-connected splitting, ignoring edge tags.
    pub untagged_split: bool,
    pub area_width: u32,
    pub area_height: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, turning errors and panics into a status plus a thread-local
/// message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            e.kind().into()
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            HsStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            HsStatus::InvalidArgument
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            HsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail::Arg("path is not UTF-8".into()))
}

unsafe fn copy_out<T: Copy>(items: &[T], buf: *mut T, cap: usize, out_len: *mut usize) -> Result<(), Fail> {
    *out(out_len, "out_len")? = items.len();
    let n = items.len().min(cap);
    if n > 0 {
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        ptr::copy_nonoverlapping(items.as_ptr(), buf, n);
    }
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a halo catalog.
#[no_mangle]
pub unsafe extern "C" fn hs_forest_load(path: *const c_char, out_forest: *mut *mut HsForest) -> HsStatus {
    guard(|| {
        let slot = out(out_forest, "out_forest")?;
        *slot = ptr::null_mut();
        let forest = MergerForest::load(read_catalog_file(&path_arg(path)?)?)?;
        *slot = boxed(HsForest(forest));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hs_forest_free(forest: *mut HsForest) {
    if !forest.is_null() {
        drop(Box::from_raw(forest));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hs_forest_len(forest: *const HsForest) -> usize {
    forest.as_ref().map_or(0, |f| f.0.len())
}

/// Halo ids of the subtree rooted at `root`, root first, breadth first.
#[no_mangle]
pub unsafe extern "C" fn hs_forest_subtree(
    forest: *const HsForest,
    root: u64,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> HsStatus {
    guard(|| {
        let f = borrow(forest, "forest")?;
        let ids: Vec<u64> = extract_subtree(&f.0, root)?.nodes.iter().map(|h| h.halo_id).collect();
        copy_out(&ids, buf, cap, out_len)
    })
}

/// Number of invariant violations in a catalog, without failing on the
/// first one. Parse errors still fail.
#[no_mangle]
pub unsafe extern "C" fn hs_catalog_violation_count(path: *const c_char, out_count: *mut usize) -> HsStatus {
    guard(|| {
        let slot = out(out_count, "out_count")?;
        let forest = MergerForest::from_records(read_catalog_file(&path_arg(path)?)?);
        *slot = validate_forest(&forest).len();
        Ok(())
    })
}

/// Reads an HSNP snapshot file.
#[no_mangle]
pub unsafe extern "C" fn hs_snapshot_load(path: *const c_char, out_snapshot: *mut *mut HsSnapshot) -> HsStatus {
    guard(|| {
        let slot = out(out_snapshot, "out_snapshot")?;
        *slot = ptr::null_mut();
        let snap = ParticleSnapshot::read_file(path_arg(path)?)?;
        *slot = boxed(HsSnapshot(snap));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hs_snapshot_free(snapshot: *mut HsSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hs_snapshot_len(snapshot: *const HsSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn hs_snapshot_timestep(snapshot: *const HsSnapshot) -> u32 {
    snapshot.as_ref().map_or(0, |s| s.0.timestep)
}

/// Fills `out_params` with the library defaults.
#[no_mangle]
pub unsafe extern "C" fn hs_params_default(out_params: *mut HsParams) -> HsStatus {
    guard(|| {
        let d = SelectionParams::default();
        *out(out_params, "out_params")? = HsParams {
            grid_n: d.grid_n,
            explicit_threshold: false,
            rho0: 0.0,
            cic_deposition: false,
            untagged_split: false,
            area_width: d.area_resolution[0],
            area_height: d.area_resolution[1],
        };
        Ok(())
    })
}

fn camera_of(c: &HsCamera) -> CameraPose {
    CameraPose {
        eye: c.eye,
        look_at: c.look_at,
        up: c.up,
        vertical_fov: c.vertical_fov,
        near: c.near,
        far: c.far,
        viewport: Viewport::new(c.width, c.height),
    }
}

unsafe fn lasso_of(l: &HsLasso) -> Result<LassoRegion, Fail> {
    Ok(match l.kind {
        HsLassoKind::Circle => LassoRegion::Circle {
            center: l.center,
            radius: l.radius,
        },
        HsLassoKind::Polygon => {
            if l.vertex_count > 0 && l.vertices.is_null() {
                return Err(Fail::Null("lasso vertices"));
            }
            let flat = if l.vertex_count == 0 {
                &[][..]
            } else {
                std::slice::from_raw_parts(l.vertices, 2 * l.vertex_count)
            };
            LassoRegion::Polygon {
                vertices: flat.chunks_exact(2).map(|v| [v[0], v[1]]).collect(),
            }
        }
    })
}

fn params_of(p: &HsParams) -> SelectionParams {
    SelectionParams {
        grid_n: p.grid_n,
        threshold_mode: if p.explicit_threshold {
            ThresholdMode::Explicit(p.rho0)
        } else {
            ThresholdMode::MeanNodeDensity
        },
        deposition_mode: if p.cic_deposition {
            DepositionMode::MultiplicativeCic
        } else {
            DepositionMode::AdditivePaper
        },
        area_resolution: [p.area_width, p.area_height],
        split_rule: if p.untagged_split { SplitRule::Untagged } else { SplitRule::Tagged },
    }
}

/// Runs a lasso selection. `params` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn hs_select(
    snapshot: *const HsSnapshot,
    camera: *const HsCamera,
    lasso: *const HsLasso,
    params: *const HsParams,
    out_selection: *mut *mut HsSelection,
) -> HsStatus {
    guard(|| {
        let slot = out(out_selection, "out_selection")?;
        *slot = ptr::null_mut();
        let snap = borrow(snapshot, "snapshot")?;
        let camera = camera_of(borrow(camera, "camera")?);
        let lasso = lasso_of(borrow(lasso, "lasso")?)?;
        let params = params.as_ref().map_or_else(SelectionParams::default, params_of);
        let r = wysiwyg_select(&snap.0, &camera, &lasso, &params)?;
        *slot = boxed(HsSelection(r));
        Ok(())
    })
}

/// A new selection re-thresholded at `rho0` on the cached grid of `selection`.
#[no_mangle]
pub unsafe extern "C" fn hs_selection_rethreshold(
    selection: *const HsSelection,
    rho0: f64,
    camera: *const HsCamera,
    out_selection: *mut *mut HsSelection,
) -> HsStatus {
    guard(|| {
        let slot = out(out_selection, "out_selection")?;
        *slot = ptr::null_mut();
        let sel = borrow(selection, "selection")?;
        let r = sel.0.rethreshold(rho0, &camera_of(borrow(camera, "camera")?))?;
        *slot = boxed(HsSelection(r));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hs_selection_free(selection: *mut HsSelection) {
    if !selection.is_null() {
        drop(Box::from_raw(selection));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hs_selection_cluster_count(selection: *const HsSelection) -> usize {
    selection.as_ref().map_or(0, |s| s.0.clusters.len())
}

/// Primary cluster id, or 0 when there are no clusters.
#[no_mangle]
pub unsafe extern "C" fn hs_selection_primary(selection: *const HsSelection) -> u32 {
    selection.as_ref().and_then(|s| s.0.primary_cluster_id).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn hs_selection_threshold(selection: *const HsSelection) -> f64 {
    selection.as_ref().map_or(f64::NAN, |s| s.0.threshold())
}

/// Projected pixel count per cluster, in cluster id order.
#[no_mangle]
pub unsafe extern "C" fn hs_selection_pixel_counts(
    selection: *const HsSelection,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> HsStatus {
    guard(|| copy_out(&borrow(selection, "selection")?.0.projected_pixel_counts, buf, cap, out_len))
}

/// Snapshot indices of the particles in cluster `cluster_id`, ascending.
#[no_mangle]
pub unsafe extern "C" fn hs_selection_members(
    selection: *const HsSelection,
    cluster_id: u32,
    buf: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> HsStatus {
    guard(|| {
        let sel = borrow(selection, "selection")?;
        let members: Vec<u64> = sel.0.cluster(cluster_id)?.members.iter().map(|&i| i as u64).collect();
        copy_out(&members, buf, cap, out_len)
    })
}

/// Classical MDS of `n` points (`3n` doubles) into `out_xy` (`2n` doubles).
#[no_mangle]
pub unsafe extern "C" fn hs_mds_project(points: *const f64, n: usize, out_xy: *mut f64) -> HsStatus {
    guard(|| {
        if n == 0 {
            return Ok(());
        }
        if points.is_null() {
            return Err(Fail::Null("points"));
        }
        if out_xy.is_null() {
            return Err(Fail::Null("out_xy"));
        }
        let flat = std::slice::from_raw_parts(points, 3 * n);
        let pts: Vec<Vec3> = flat.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])).collect();
        let plane = mds_project(&pts)?;
        let dst = std::slice::from_raw_parts_mut(out_xy, 2 * n);
        for (d, p) in dst.chunks_exact_mut(2).zip(&plane) {
            d[0] = p.x;
            d[1] = p.y;
        }
        Ok(())
    })
}

/// RGB of the time colormap at `t` in [0, 1] (clamped).
#[no_mangle]
pub unsafe extern "C" fn hs_time_colormap(t: f64, out_rgb: *mut u8) -> HsStatus {
    guard(|| {
        if out_rgb.is_null() {
            return Err(Fail::Null("out_rgb"));
        }
        if t.is_nan() {
            return Err(Fail::Arg("t is NaN".into()));
        }
        let c = time_colormap(t);
        ptr::copy_nonoverlapping(c.as_ptr(), out_rgb, 3);
        Ok(())
    })
}
