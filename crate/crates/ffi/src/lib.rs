//! C ABI over the edgeflow estimator.
//!
//! Every fallible call returns an [`EdgeflowStatus`]; on failure the message is
//! available from [`edgeflow_last_error_message`] on the same thread. Panics
//! never cross the boundary, they surface as `EDGEFLOW_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgeflow::histograms::{edge_histogram, sobel_gradient};
use edgeflow::{
    Axis, CameraIntrinsics, Error, EstimatorConfig, ImageFrame, MatchParams, RateMeasurement,
    VelocityEstimator,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Textureless = 4,
    Internal = 5,
}

pub const EDGEFLOW_AXIS_HORIZONTAL: u32 = 0;
pub const EDGEFLOW_AXIS_VERTICAL: u32 = 1;

/// Estimator settings. Angles in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EdgeflowConfig {
    pub fov_horizontal_deg: f64,
    pub fov_vertical_deg: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub stereo_baseline: f64,
    pub window_size: u32,
    pub max_search: u32,
    pub max_horizon: u32,
    pub max_disparity: u32,
    pub height_window: u32,
    pub frame_rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EdgeflowRates {
    /// rad/s
    pub roll_rate: f64,
    /// rad/s
    pub pitch_rate: f64,
}

/// Result of one frame. Velocities and height are NaN until a stereo height
/// is available.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeflowVelocity {
    pub v_x: f64,
    pub v_y: f64,
    pub height: f64,
    pub flow_x: f64,
    pub flow_y: f64,
    pub divergence_x: f64,
    pub divergence_y: f64,
    pub horizon_x: u32,
    pub horizon_y: u32,
    pub timestamp: f64,
    /// Bit set: 1 warmup, 2 textureless x, 4 textureless y, 8 no height.
    pub quality: u8,
}

/// Opaque estimator handle.
pub struct EdgeflowEstimator {
    inner: VelocityEstimator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_for(err: &Error) -> EdgeflowStatus {
    match err {
        Error::FrameSize { .. }
        | Error::PixelCount { .. }
        | Error::DimensionTooSmall { .. }
        | Error::LengthMismatch(..) => EdgeflowStatus::DimensionMismatch,
        Error::Textureless => EdgeflowStatus::Textureless,
        Error::InvalidParams(_) | Error::InvalidIntrinsics(_) | Error::Config(_) => {
            EdgeflowStatus::InvalidArgument
        }
        _ => EdgeflowStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), EdgeflowStatus>) -> EdgeflowStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EdgeflowStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            EdgeflowStatus::Internal
        }
    }
}

fn fail(err: Error) -> EdgeflowStatus {
    set_error(err.to_string());
    status_for(&err)
}

fn null(what: &str) -> EdgeflowStatus {
    set_error(format!("{what} is null"));
    EdgeflowStatus::NullPointer
}

impl From<&EdgeflowConfig> for EstimatorConfig {
    fn from(c: &EdgeflowConfig) -> Self {
        EstimatorConfig {
            intrinsics: CameraIntrinsics {
                fov_horizontal: c.fov_horizontal_deg.to_radians(),
                fov_vertical: c.fov_vertical_deg.to_radians(),
                image_width: c.image_width as usize,
                image_height: c.image_height as usize,
                stereo_baseline: c.stereo_baseline,
            },
            match_params: MatchParams {
                window_size: c.window_size as usize,
                max_search: c.max_search as usize,
            },
            max_horizon: c.max_horizon as usize,
            max_disparity: c.max_disparity as usize,
            height_window: c.height_window as usize,
            frame_rate: c.frame_rate,
        }
    }
}

/// Defaults: 128x96 pixels, 57.4 x 44.5 degree field of view, 6 cm baseline.
#[no_mangle]
pub extern "C" fn edgeflow_config_default() -> EdgeflowConfig {
    let d = EstimatorConfig::default();
    EdgeflowConfig {
        fov_horizontal_deg: 57.4,
        fov_vertical_deg: 44.5,
        image_width: d.intrinsics.image_width as u32,
        image_height: d.intrinsics.image_height as u32,
        stereo_baseline: d.intrinsics.stereo_baseline,
        window_size: d.match_params.window_size as u32,
        max_search: d.match_params.max_search as u32,
        max_horizon: d.max_horizon as u32,
        max_disparity: d.max_disparity as u32,
        height_window: d.height_window as u32,
        frame_rate: d.frame_rate,
    }
}

/// Creates an estimator. On success `*out` owns a handle that must be
/// released with `edgeflow_estimator_free`.
///
/// # Safety
/// `config` must point to a valid `EdgeflowConfig` and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn edgeflow_estimator_new(
    config: *const EdgeflowConfig,
    out: *mut *mut EdgeflowEstimator,
) -> EdgeflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        let inner = VelocityEstimator::new(cfg.into()).map_err(fail)?;
        *out = Box::into_raw(Box::new(EdgeflowEstimator { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from `edgeflow_estimator_new` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn edgeflow_estimator_free(handle: *mut EdgeflowEstimator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn frame(
    pixels: *const u8,
    width: u32,
    height: u32,
    timestamp: f64,
) -> Result<ImageFrame, EdgeflowStatus> {
    let (w, h) = (width as usize, height as usize);
    let len = w
        .checked_mul(h)
        .ok_or_else(|| fail(Error::InvalidParams("width * height overflows".into())))?;
    let data = std::slice::from_raw_parts(pixels, len).to_vec();
    ImageFrame::new(w, h, data, timestamp).map_err(fail)
}

/// Processes one frame. `right` and `rates` may be null: without `right` no
/// height is measured, without `rates` no de-rotation is applied.
///
/// # Safety
/// `left` (and `right` when not null) must point to `width * height` bytes,
/// row-major. `rates` must be null or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edgeflow_estimator_push(
    handle: *mut EdgeflowEstimator,
    left: *const u8,
    right: *const u8,
    width: u32,
    height: u32,
    timestamp: f64,
    rates: *const EdgeflowRates,
    out: *mut EdgeflowVelocity,
) -> EdgeflowStatus {
    guard(|| {
        let est = handle.as_mut().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if left.is_null() {
            return Err(null("left"));
        }
        let l = frame(left, width, height, timestamp)?;
        let r = if right.is_null() {
            None
        } else {
            Some(frame(right, width, height, timestamp)?)
        };
        let rates = rates
            .as_ref()
            .map(|r| RateMeasurement::new(r.roll_rate, r.pitch_rate, timestamp));
        let res = est
            .inner
            .process(&l, r.as_ref(), rates.as_ref())
            .map_err(fail)?;
        *out = EdgeflowVelocity {
            v_x: res.velocity.v_x,
            v_y: res.velocity.v_y,
            height: res.velocity.height,
            flow_x: res.flow.flow_x,
            flow_y: res.flow.flow_y,
            divergence_x: res.flow.divergence_x,
            divergence_y: res.flow.divergence_y,
            horizon_x: res.flow.horizon_x as u32,
            horizon_y: res.flow.horizon_y as u32,
            timestamp: res.velocity.timestamp,
            quality: res.velocity.quality.bits(),
        };
        Ok(())
    })
}

/// Edge histogram of one 8-bit frame: `width` column sums for
/// `EDGEFLOW_AXIS_HORIZONTAL`, `height` row sums for `EDGEFLOW_AXIS_VERTICAL`.
///
/// # Safety
/// `pixels` must point to `width * height` bytes and `out_bins` to `out_len`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn edgeflow_edge_histogram(
    pixels: *const u8,
    width: u32,
    height: u32,
    axis: u32,
    out_bins: *mut u64,
    out_len: usize,
) -> EdgeflowStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        if out_bins.is_null() {
            return Err(null("out_bins"));
        }
        let axis = match axis {
            EDGEFLOW_AXIS_HORIZONTAL => Axis::Horizontal,
            EDGEFLOW_AXIS_VERTICAL => Axis::Vertical,
            other => {
                set_error(format!("axis must be 0 or 1, got {other}"));
                return Err(EdgeflowStatus::InvalidArgument);
            }
        };
        let f = frame(pixels, width, height, 0.0)?;
        let hist = sobel_gradient(&f, axis)
            .and_then(|g| edge_histogram(&g, axis))
            .map_err(fail)?;
        if out_len < hist.bins.len() {
            set_error(format!(
                "out_len {out_len} is smaller than {} bins",
                hist.bins.len()
            ));
            return Err(EdgeflowStatus::DimensionMismatch);
        }
        std::slice::from_raw_parts_mut(out_bins, hist.bins.len()).copy_from_slice(&hist.bins);
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn edgeflow_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code. Takes a plain integer so values
/// outside the enum are safe to pass.
#[no_mangle]
pub extern "C" fn edgeflow_status_string(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"dimension mismatch",
        4 => c"textureless input",
        5 => c"internal error",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn edgeflow_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    V.as_ptr()
}
