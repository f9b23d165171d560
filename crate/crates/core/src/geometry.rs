//! Pixel-to-metric conversions: stereo height and flow-to-velocity.

use std::fmt;

use crate::error::{Error, Result};
use crate::flow::FlowEstimate;
use crate::histograms::Axis;

/// Pinhole stereo rig. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fov_horizontal: f64,
    pub fov_vertical: f64,
    pub image_width: usize,
    pub image_height: usize,
    /// Metres between the two optical centres, along camera x.
    pub stereo_baseline: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            fov_horizontal: 57.4f64.to_radians(),
            fov_vertical: 44.5f64.to_radians(),
            image_width: 128,
            image_height: 96,
            stereo_baseline: 0.06,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidIntrinsics(what.to_string()));
        for (name, fov) in [
            ("fov_horizontal", self.fov_horizontal),
            ("fov_vertical", self.fov_vertical),
        ] {
            if !(fov > 0.0 && fov < std::f64::consts::PI) {
                return bad(&format!("{name} must lie in (0, pi) radians, got {fov}"));
            }
        }
        if self.image_width == 0 || self.image_height == 0 {
            return bad("image dimensions must be positive");
        }
        if !(self.stereo_baseline > 0.0 && self.stereo_baseline.is_finite()) {
            return bad("stereo_baseline must be positive");
        }
        Ok(())
    }

    /// Focal length in pixels along x.
    pub fn focal_x(&self) -> f64 {
        (self.image_width as f64 / 2.0) / (self.fov_horizontal / 2.0).tan()
    }

    /// Focal length in pixels along y.
    pub fn focal_y(&self) -> f64 {
        (self.image_height as f64 / 2.0) / (self.fov_vertical / 2.0).tan()
    }

    pub fn focal(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.focal_x(),
            Axis::Vertical => self.focal_y(),
        }
    }

    /// (field of view, pixel count) pair used to turn flow into an angle.
    pub fn fov_and_extent(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::Horizontal => (self.fov_horizontal, self.image_width as f64),
            Axis::Vertical => (self.fov_vertical, self.image_height as f64),
        }
    }
}

/// Set of conditions attached to an estimate. Empty means ok.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Quality(u8);

impl Quality {
    pub const OK: Quality = Quality(0);
    pub const WARMUP: Quality = Quality(1);
    pub const TEXTURELESS_X: Quality = Quality(1 << 1);
    pub const TEXTURELESS_Y: Quality = Quality(1 << 2);
    pub const NO_HEIGHT: Quality = Quality(1 << 3);

    const NAMES: [(Quality, &'static str); 4] = [
        (Quality::WARMUP, "warmup"),
        (Quality::TEXTURELESS_X, "textureless_x"),
        (Quality::TEXTURELESS_Y, "textureless_y"),
        (Quality::NO_HEIGHT, "no_height"),
    ];

    pub fn is_ok(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: Quality) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: Quality) {
        self.0 |= other.0;
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Quality {
        Quality(bits & 0b1111)
    }

    pub fn textureless(axis: Axis) -> Quality {
        match axis {
            Axis::Horizontal => Quality::TEXTURELESS_X,
            Axis::Vertical => Quality::TEXTURELESS_Y,
        }
    }
}

impl std::ops::BitOr for Quality {
    type Output = Quality;
    fn bitor(self, rhs: Quality) -> Quality {
        Quality(self.0 | rhs.0)
    }
}

impl fmt::Display for Quality {
    /// `ok`, or the set flags joined with `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let mut first = true;
        for (flag, name) in Self::NAMES {
            if self.contains(flag) {
                if !first {
                    f.write_str("|")?;
                }
                f.write_str(name)?;
                first = false;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityEstimate {
    /// m/s along camera x.
    pub v_x: f64,
    /// m/s along camera y.
    pub v_y: f64,
    /// Metres; NaN when `quality` carries `NO_HEIGHT`.
    pub height: f64,
    pub dt: f64,
    pub timestamp: f64,
    pub quality: Quality,
}

/// Triangulated distance to the ground plane from a horizontal disparity.
pub fn height_from_disparity(disparity: i64, intrinsics: &CameraIntrinsics) -> Result<f64> {
    if disparity < 1 {
        return Err(Error::NoHeight(disparity));
    }
    Ok(intrinsics.stereo_baseline * intrinsics.focal_x() / disparity as f64)
}

/// Metric speed along one axis for a per-frame flow in pixels.
pub fn axis_velocity(
    flow: f64,
    height: f64,
    dt: f64,
    intrinsics: &CameraIntrinsics,
    axis: Axis,
) -> f64 {
    let (fov, extent) = intrinsics.fov_and_extent(axis);
    height * (flow * fov / extent).tan() / dt
}

pub fn velocity_from_flow(
    flow: &FlowEstimate,
    height: f64,
    dt: f64,
    intrinsics: &CameraIntrinsics,
) -> VelocityEstimate {
    VelocityEstimate {
        v_x: axis_velocity(flow.flow_x, height, dt, intrinsics, Axis::Horizontal),
        v_y: axis_velocity(flow.flow_y, height, dt, intrinsics, Axis::Vertical),
        height,
        dt,
        timestamp: flow.timestamp,
        quality: flow.quality,
    }
}

/// Median of the most recent disparities; the height filter.
#[derive(Debug, Clone)]
pub struct DisparityMedian {
    window: usize,
    recent: std::collections::VecDeque<i64>,
}

impl DisparityMedian {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            recent: Default::default(),
        }
    }

    pub fn push(&mut self, disparity: i64) {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(disparity);
    }

    pub fn len(&self) -> usize {
        self.recent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recent.is_empty()
    }

    /// Middle element, or the mean of the two middle elements for even counts.
    pub fn median(&self) -> Option<f64> {
        if self.recent.is_empty() {
            return None;
        }
        let mut v: Vec<i64> = self.recent.iter().copied().collect();
        v.sort_unstable();
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 {
            v[m] as f64
        } else {
            (v[m - 1] + v[m]) as f64 / 2.0
        })
    }

    /// Height for the median disparity.
    pub fn height(&self, intrinsics: &CameraIntrinsics) -> Option<f64> {
        self.median()
            .map(|d| intrinsics.stereo_baseline * intrinsics.focal_x() / d)
    }
}
