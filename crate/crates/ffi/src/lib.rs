//! C interface to `dropout-cluster`.
//!
//! Every function returns a [`DcStatus`]. On failure the message is kept per
//! thread and can be read with [`dc_last_error_message`]. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use dropout_cluster::cluster::{
    self, kmeanspp_init, rank_weights, DEFAULT_INNER_ITERS, DEFAULT_MAX_ITERS,
    DEFAULT_WEISZFELD_TOL, STOCHASTIC_MAX_ITERS,
};
use dropout_cluster::experiment::{load_dataset, ExperimentConfig};
use dropout_cluster::metrics::{detection_probability, dropout_rmsd};
use dropout_cluster::{CenterSet, Coord, DropoutParams, Error, RunResult, ShipGrouping};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    InvalidArgument = 2,
    /// The input data cannot be used (malformed, empty, too few points).
    Data = 3,
    Io = 4,
    /// The library panicked; the call had no effect.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcAlgorithm {
    ClassicKmeans = 0,
    DropoutKmeans = 1,
    StochasticDropoutKmeans = 2,
    ClassicKmedian = 3,
    DropoutKmedian = 4,
}

/// Settings for [`dc_run`]. Obtain defaults from [`dc_run_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcRunParams {
    pub p: f64,
    /// Detection radius in km, used by the stochastic baseline.
    pub radius_km: f64,
    pub max_iters: usize,
    pub stochastic_max_iters: usize,
    pub inner_iters: usize,
    pub weiszfeld_tol: f64,
    pub seed: u64,
}

/// Planar points in km with their ship grouping.
pub struct DcDataset {
    points: Vec<Coord>,
    ships: ShipGrouping,
}

pub struct DcCenters(CenterSet);

pub struct DcRunResult(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Fail(DcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Read { .. } | Error::Write { .. } => DcStatus::Io,
            ref e if e.is_data_error() => DcStatus::Data,
            _ => DcStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DcStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(DcStatus::InvalidArgument, msg.into())
}

fn guard<F>(f: F) -> DcStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DcStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn get<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn coords(xs: *const f64, ys: *const f64, n: usize) -> Result<Vec<Coord>, Fail> {
    let xs = slice(xs, n, "xs")?;
    let ys = slice(ys, n, "ys")?;
    Ok(xs.iter().zip(ys).map(|(&x, &y)| Coord::new(x, y)).collect())
}

unsafe fn free<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Message of the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |m| m.as_ptr()))
}

/// Builds a dataset from `n` points. `ship_ids` may be null, in which case
/// every point is its own ship.
///
/// # Safety
/// `xs`, `ys` and a non-null `ship_ids` must point to `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn dc_dataset_from_arrays(
    xs: *const f64,
    ys: *const f64,
    ship_ids: *const u64,
    n: usize,
    out: *mut *mut DcDataset,
) -> DcStatus {
    guard(|| {
        let points = coords(xs, ys, n)?;
        if points.is_empty() {
            return Err(Error::EmptyPoints.into());
        }
        if let Some(c) = points.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("non-finite point ({}, {})", c.x, c.y)));
        }
        let ids: Vec<String> = if ship_ids.is_null() {
            (0..n).map(|i| i.to_string()).collect()
        } else {
            slice(ship_ids, n, "ship_ids")?.iter().map(u64::to_string).collect()
        };
        let ships = ShipGrouping::from_ids(&ids);
        put(out, DcDataset { points, ships }, "out")
    })
}

/// Reads a planar point cache (`ship_id,x_km,y_km`) or an AIS table with the
/// default column names, projected about the centroid of its points.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dc_dataset_from_csv(
    path: *const c_char,
    out: *mut *mut DcDataset,
) -> DcStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let cfg = ExperimentConfig {
            input: Some(PathBuf::from(path)),
            ..ExperimentConfig::default()
        };
        let data = load_dataset(&cfg)?;
        if data.points.is_empty() {
            return Err(Error::EmptyPoints.into());
        }
        let ds = DcDataset {
            points: data.coords(),
            ships: data.ships(),
        };
        put(out, ds, "out")
    })
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_dataset_len(dataset: *const DcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.points.len())
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_dataset_num_ships(dataset: *const DcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.ships.len())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_dataset_free(dataset: *mut DcDataset) {
    free(dataset)
}

/// # Safety
/// `xs` and `ys` must point to `k` readable values.
#[no_mangle]
pub unsafe extern "C" fn dc_centers_new(
    xs: *const f64,
    ys: *const f64,
    k: usize,
    out: *mut *mut DcCenters,
) -> DcStatus {
    guard(|| {
        let set = CenterSet::new(coords(xs, ys, k)?)?;
        put(out, DcCenters(set), "out")
    })
}

/// # Safety
/// `centers` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_centers_len(centers: *const DcCenters) -> usize {
    centers.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `centers` must be a live handle; `x` and `y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_centers_get(
    centers: *const DcCenters,
    index: usize,
    x: *mut f64,
    y: *mut f64,
) -> DcStatus {
    guard(|| {
        let c = get(centers, "centers")?;
        if x.is_null() || y.is_null() {
            return Err(null("x/y"));
        }
        let p = c
            .0
            .as_slice()
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range for {} centers", c.0.len())))?;
        *x = p.x;
        *y = p.y;
        Ok(())
    })
}

/// # Safety
/// `centers` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_centers_free(centers: *mut DcCenters) {
    free(centers)
}

/// k-means++ initial centers drawn from the dataset points.
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_kmeanspp(
    dataset: *const DcDataset,
    k: usize,
    seed: u64,
    out: *mut *mut DcCenters,
) -> DcStatus {
    guard(|| {
        let d = get(dataset, "dataset")?;
        let set = kmeanspp_init(&d.points, k, seed)?;
        put(out, DcCenters(set), "out")
    })
}

#[no_mangle]
pub extern "C" fn dc_run_params_default() -> DcRunParams {
    DcRunParams {
        p: 0.3,
        radius_km: 10.0,
        max_iters: DEFAULT_MAX_ITERS,
        stochastic_max_iters: STOCHASTIC_MAX_ITERS,
        inner_iters: DEFAULT_INNER_ITERS,
        weiszfeld_tol: DEFAULT_WEISZFELD_TOL,
        seed: 0,
    }
}

/// Runs one algorithm from `init`.
///
/// # Safety
/// `dataset`, `init` and `params` must be live handles or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dc_run(
    dataset: *const DcDataset,
    algorithm: DcAlgorithm,
    init: *const DcCenters,
    params: *const DcRunParams,
    out: *mut *mut DcRunResult,
) -> DcStatus {
    guard(|| {
        let d = get(dataset, "dataset")?;
        let init = &get(init, "init")?.0;
        let prm = get(params, "params")?;
        let pts = &d.points;
        let res = match algorithm {
            DcAlgorithm::ClassicKmeans => cluster::run_classic_kmeans(pts, init, prm.max_iters),
            DcAlgorithm::DropoutKmeans => {
                cluster::run_dropout_kmeans(pts, init, prm.p, prm.max_iters)
            }
            DcAlgorithm::StochasticDropoutKmeans => cluster::run_stochastic_dropout_kmeans(
                pts,
                init,
                prm.p,
                prm.radius_km,
                prm.stochastic_max_iters,
                prm.seed,
            ),
            DcAlgorithm::ClassicKmedian => cluster::run_classic_kmedian(
                pts,
                init,
                prm.max_iters,
                prm.inner_iters,
                prm.weiszfeld_tol,
            ),
            DcAlgorithm::DropoutKmedian => cluster::run_dropout_kmedian(
                pts,
                init,
                prm.p,
                prm.max_iters,
                prm.inner_iters,
                prm.weiszfeld_tol,
            ),
        }?;
        put(out, DcRunResult(res), "out")
    })
}

/// Copies the final centers of a run into a new handle.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_run_result_centers(
    result: *const DcRunResult,
    out: *mut *mut DcCenters,
) -> DcStatus {
    guard(|| {
        let r = get(result, "result")?;
        put(out, DcCenters(r.0.centers.clone()), "out")
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_run_result_iterations(result: *const DcRunResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_run_result_converged(result: *const DcRunResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// Final objective value of the run.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_run_result_objective(result: *const DcRunResult) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.0.objective_trace.last().copied())
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_run_result_free(result: *mut DcRunResult) {
    free(result)
}

/// Writes the `k` rank weights `p^j (1 - p)` into `out`.
///
/// # Safety
/// `out` must have room for `k` values.
#[no_mangle]
pub unsafe extern "C" fn dc_survival_weights(k: usize, p: f64, out: *mut f64) -> DcStatus {
    guard(|| {
        DropoutParams::new(p, k, 1.0)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = rank_weights(k, p);
        std::slice::from_raw_parts_mut(out, k).copy_from_slice(&w);
        Ok(())
    })
}

/// Probability that a ship of the dataset is detected by a surviving center
/// within `radius_km`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_detection_probability(
    dataset: *const DcDataset,
    centers: *const DcCenters,
    p: f64,
    radius_km: f64,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let d = get(dataset, "dataset")?;
        let c = &get(centers, "centers")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let prm = DropoutParams::new(p, c.len(), radius_km)?;
        *out = detection_probability(&d.ships, &d.points, c, &prm)?;
        Ok(())
    })
}

/// Root-mean-square distance to the nearest surviving center.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_dropout_rmsd(
    dataset: *const DcDataset,
    centers: *const DcCenters,
    p: f64,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let d = get(dataset, "dataset")?;
        let c = &get(centers, "centers")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = dropout_rmsd(&d.points, c, p)?;
        Ok(())
    })
}
