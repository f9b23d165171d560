//! Full per-frame pipeline: histograms, flow, stereo height and velocity.

use crate::error::{Error, Result};
use crate::flow::{FlowEstimate, FlowTracker, RateMeasurement};
use crate::geometry::{
    velocity_from_flow, CameraIntrinsics, DisparityMedian, Quality, VelocityEstimate,
};
use crate::histograms::{frame_histograms, horizontal_histogram};
use crate::image::ImageFrame;
use crate::matching::{match_global, MatchParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub intrinsics: CameraIntrinsics,
    pub match_params: MatchParams,
    /// Ring capacity N, the largest time horizon.
    pub max_horizon: usize,
    pub max_disparity: usize,
    /// Number of disparities in the height median.
    pub height_window: usize,
    /// Nominal rate, used for the first frame's dt.
    pub frame_rate: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics::default(),
            match_params: MatchParams::default(),
            max_horizon: 10,
            max_disparity: 40,
            height_window: 5,
            frame_rate: 25.0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        self.match_params.validate(self.intrinsics.image_width)?;
        self.match_params.validate(self.intrinsics.image_height)?;
        if self.max_horizon < 1 {
            return Err(Error::InvalidParams("max_horizon must be >= 1".into()));
        }
        if self.max_disparity < 1 || self.max_disparity >= self.intrinsics.image_width {
            return Err(Error::InvalidParams(format!(
                "max_disparity must lie in [1, {})",
                self.intrinsics.image_width
            )));
        }
        if self.height_window < 1 {
            return Err(Error::InvalidParams("height_window must be >= 1".into()));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(Error::InvalidParams("frame_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Everything the pipeline produced for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutput {
    pub flow: FlowEstimate,
    pub velocity: VelocityEstimate,
    /// Raw stereo disparity of this frame, if it matched.
    pub disparity: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct VelocityEstimator {
    config: EstimatorConfig,
    tracker: FlowTracker,
    disparities: DisparityMedian,
    last_timestamp: Option<f64>,
}

impl VelocityEstimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            tracker: FlowTracker::new(config.match_params, config.max_horizon, config.intrinsics)?,
            disparities: DisparityMedian::new(config.height_window),
            last_timestamp: None,
            config,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn tracker(&self) -> &FlowTracker {
        &self.tracker
    }

    pub fn push_stereo(
        &mut self,
        left: &ImageFrame,
        right: &ImageFrame,
        rates: Option<&RateMeasurement>,
    ) -> Result<VelocityEstimate> {
        Ok(self.process(left, Some(right), rates)?.velocity)
    }

    /// Flow from `left`; height from the left/right pair when `right` is given.
    pub fn process(
        &mut self,
        left: &ImageFrame,
        right: Option<&ImageFrame>,
        rates: Option<&RateMeasurement>,
    ) -> Result<FrameOutput> {
        self.check_size(left)?;
        if let Some(r) = right {
            self.check_size(r)?;
        }
        let (hx, hy) = frame_histograms(left)?;

        let mut disparity = None;
        if let Some(right) = right {
            let rx = horizontal_histogram(right)?;
            match match_global(&hx, &rx, self.config.max_disparity) {
                Ok(d) if d >= 1 => {
                    self.disparities.push(d);
                    disparity = Some(d);
                }
                Ok(_) | Err(Error::Textureless) => {}
                Err(e) => return Err(e),
            }
        }

        let flow = self.tracker.step(hx, hy, rates)?;
        let timestamp = left.timestamp;
        let dt = match self.last_timestamp {
            Some(prev) => timestamp - prev,
            None => 1.0 / self.config.frame_rate,
        };
        self.last_timestamp = Some(timestamp);

        let velocity = match self.disparities.height(&self.config.intrinsics) {
            Some(height) => velocity_from_flow(&flow, height, dt, &self.config.intrinsics),
            None => VelocityEstimate {
                v_x: f64::NAN,
                v_y: f64::NAN,
                height: f64::NAN,
                dt,
                timestamp,
                quality: flow.quality | Quality::NO_HEIGHT,
            },
        };
        Ok(FrameOutput {
            flow,
            velocity,
            disparity,
        })
    }

    fn check_size(&self, frame: &ImageFrame) -> Result<()> {
        let k = &self.config.intrinsics;
        if frame.width() != k.image_width || frame.height() != k.image_height {
            return Err(Error::FrameSize {
                width: k.image_width,
                height: k.image_height,
                actual_width: frame.width(),
                actual_height: frame.height(),
            });
        }
        Ok(())
    }
}
