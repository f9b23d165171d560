//! Adaptive time-horizon flow tracking.
//!
//! The tracker keeps the last `N` histogram pairs. Each new frame is compared
//! against the pair `n` frames back, where `n = min(round(1/|p|), N)` and `p`
//! is the previous per-frame flow of the same axis. Slow motion therefore
//! accumulates over several frames into a whole-pixel displacement, and the
//! result is divided by `n` to get sub-pixel flow per frame.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Quality};
use crate::histograms::{Axis, EdgeHistogram};
use crate::matching::{fit_linear, match_local, MatchParams};

/// Gyro rates. Pitch turns the optical axis towards +x (horizontal image
/// shift), roll towards +y (vertical image shift).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateMeasurement {
    /// rad/s
    pub roll_rate: f64,
    /// rad/s
    pub pitch_rate: f64,
    pub timestamp: f64,
}

impl RateMeasurement {
    pub fn new(roll_rate: f64, pitch_rate: f64, timestamp: f64) -> Self {
        Self {
            roll_rate,
            pitch_rate,
            timestamp,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.roll_rate.is_finite() && self.pitch_rate.is_finite()
    }

    pub fn for_axis(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.pitch_rate,
            Axis::Vertical => self.roll_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEstimate {
    /// Pixels per frame along x.
    pub flow_x: f64,
    /// Pixels per frame along y.
    pub flow_y: f64,
    pub divergence_x: f64,
    pub divergence_y: f64,
    pub horizon_x: usize,
    pub horizon_y: usize,
    pub timestamp: f64,
    pub quality: Quality,
}

impl FlowEstimate {
    pub fn zero(timestamp: f64) -> Self {
        Self {
            flow_x: 0.0,
            flow_y: 0.0,
            divergence_x: 0.0,
            divergence_y: 0.0,
            horizon_x: 1,
            horizon_y: 1,
            timestamp,
            quality: Quality::OK,
        }
    }

    pub fn flow(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.flow_x,
            Axis::Vertical => self.flow_y,
        }
    }
}

/// Horizon `min(1/|prev_flow|, N)` rounded to the nearest count, with zero
/// flow mapping to `N` and the result kept in `[1, min(N, buffer_size)]`.
///
/// Nearest rather than floor: the fixed point `1/n` is then the one closest
/// to the true flow, and a measurement a hair above `1/k` does not drop the
/// horizon to `k - 1`.
pub fn select_horizon(prev_flow: f64, buffer_size: usize, max_horizon: usize) -> usize {
    let cap = max_horizon.min(buffer_size).max(1);
    let magnitude = prev_flow.abs();
    if magnitude == 0.0 {
        return cap;
    }
    if !magnitude.is_finite() {
        return 1;
    }
    let inverse = (1.0 / magnitude).round();
    if inverse >= cap as f64 {
        cap
    } else {
        (inverse as usize).max(1)
    }
}

/// Pixel shift a rotation of `angle` radians induces along `axis`.
pub fn rotation_shift(angle: f64, intrinsics: &CameraIntrinsics, axis: Axis) -> i64 {
    (angle * intrinsics.focal(axis)).round() as i64
}

/// Small-angle image shift for a constant rate held over `dt_span` seconds.
pub fn predict_rotation_shift(
    rate: &RateMeasurement,
    dt_span: f64,
    intrinsics: &CameraIntrinsics,
    axis: Axis,
) -> i64 {
    rotation_shift(rate.for_axis(axis) * dt_span, intrinsics, axis)
}

#[derive(Debug, Clone)]
struct RingEntry {
    horizontal: EdgeHistogram,
    vertical: EdgeHistogram,
    timestamp: f64,
    /// Integrated (roll, pitch) since the tracker started.
    attitude: (f64, f64),
}

impl RingEntry {
    fn histogram(&self, axis: Axis) -> &EdgeHistogram {
        match axis {
            Axis::Horizontal => &self.horizontal,
            Axis::Vertical => &self.vertical,
        }
    }

    fn angle(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.attitude.1,
            Axis::Vertical => self.attitude.0,
        }
    }
}

/// Bounded store of past histogram pairs, newest last.
#[derive(Debug, Clone)]
pub struct HistogramRing {
    capacity: usize,
    entries: VecDeque<RingEntry>,
}

impl HistogramRing {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.timestamp)
    }

    fn newest(&self) -> Option<&RingEntry> {
        self.entries.back()
    }

    /// Entry `n` frames before the frame about to be pushed (1 = newest).
    fn back(&self, n: usize) -> &RingEntry {
        &self.entries[self.entries.len() - n]
    }

    fn push(&mut self, entry: RingEntry) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Stateful single-writer flow pipeline.
#[derive(Debug, Clone)]
pub struct FlowTracker {
    ring: HistogramRing,
    params: MatchParams,
    intrinsics: CameraIntrinsics,
    previous: Option<FlowEstimate>,
}

impl FlowTracker {
    pub fn new(
        params: MatchParams,
        max_horizon: usize,
        intrinsics: CameraIntrinsics,
    ) -> Result<Self> {
        if max_horizon < 1 {
            return Err(Error::InvalidParams("max_horizon must be >= 1".into()));
        }
        MatchParams::new(params.window_size, params.max_search)?;
        intrinsics.validate()?;
        Ok(Self {
            ring: HistogramRing::new(max_horizon),
            params,
            intrinsics,
            previous: None,
        })
    }

    pub fn ring(&self) -> &HistogramRing {
        &self.ring
    }

    pub fn previous(&self) -> Option<&FlowEstimate> {
        self.previous.as_ref()
    }

    pub fn reset(&mut self) {
        self.ring.clear();
        self.previous = None;
    }

    /// Feeds one frame's histograms and returns the per-frame flow.
    ///
    /// `rates` is the gyro reading covering the interval since the previous
    /// frame. The first call only stores and returns a zero warm-up estimate.
    pub fn step(
        &mut self,
        horizontal: EdgeHistogram,
        vertical: EdgeHistogram,
        rates: Option<&RateMeasurement>,
    ) -> Result<FlowEstimate> {
        if horizontal.axis != Axis::Horizontal {
            return Err(Error::AxisMismatch(Axis::Horizontal, horizontal.axis));
        }
        if vertical.axis != Axis::Vertical {
            return Err(Error::AxisMismatch(Axis::Vertical, vertical.axis));
        }
        let timestamp = horizontal.timestamp;
        if let Some(rate) = rates {
            if !rate.is_finite() {
                return Err(Error::InvalidParams("non-finite gyro rate".into()));
            }
        }

        let Some(newest) = self.ring.newest() else {
            let mut est = FlowEstimate::zero(timestamp);
            est.quality = Quality::WARMUP;
            self.ring.push(RingEntry {
                horizontal,
                vertical,
                timestamp,
                attitude: (0.0, 0.0),
            });
            self.previous = Some(est);
            return Ok(est);
        };

        if !(timestamp > newest.timestamp) {
            return Err(Error::InvalidParams(format!(
                "frame timestamp {timestamp} does not follow {}",
                newest.timestamp
            )));
        }
        if newest.horizontal.len() != horizontal.len() {
            return Err(Error::LengthMismatch(
                newest.horizontal.len(),
                horizontal.len(),
            ));
        }
        if newest.vertical.len() != vertical.len() {
            return Err(Error::LengthMismatch(newest.vertical.len(), vertical.len()));
        }

        let dt = timestamp - newest.timestamp;
        let attitude = match rates {
            Some(r) => (
                newest.attitude.0 + r.roll_rate * dt,
                newest.attitude.1 + r.pitch_rate * dt,
            ),
            None => newest.attitude,
        };
        let entry = RingEntry {
            horizontal,
            vertical,
            timestamp,
            attitude,
        };

        // Warm-up estimates come from truncated horizons and are too coarse to
        // steer the horizon; until one full-horizon measurement exists, compare
        // against the oldest stored entry.
        let filling = self.ring.len() < self.ring.capacity();
        let previous = match self.previous {
            Some(p) if !p.quality.contains(Quality::WARMUP) => p,
            _ => FlowEstimate::zero(timestamp),
        };
        let mut est = FlowEstimate::zero(timestamp);
        if filling {
            est.quality = Quality::WARMUP;
        }
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let n = select_horizon(previous.flow(axis), self.ring.len(), self.ring.capacity());
            let reference = self.ring.back(n);
            let shift = rotation_shift(
                entry.angle(axis) - reference.angle(axis),
                &self.intrinsics,
                axis,
            );
            let (flow, divergence) =
                match self.axis_flow(reference.histogram(axis), entry.histogram(axis), shift) {
                    Some((translation, slope)) => {
                        ((translation - shift as f64) / n as f64, slope / n as f64)
                    }
                    None => {
                        est.quality.insert(Quality::textureless(axis));
                        (0.0, 0.0)
                    }
                };
            match axis {
                Axis::Horizontal => {
                    est.flow_x = flow;
                    est.divergence_x = divergence;
                    est.horizon_x = n;
                }
                Axis::Vertical => {
                    est.flow_y = flow;
                    est.divergence_y = divergence;
                    est.horizon_y = n;
                }
            }
        }

        self.ring.push(entry);
        self.previous = Some(est);
        Ok(est)
    }

    /// Translation and slope for one axis, or `None` when the pair cannot be
    /// matched (no edge energy, or no usable positions).
    fn axis_flow(
        &self,
        reference: &EdgeHistogram,
        current: &EdgeHistogram,
        shift: i64,
    ) -> Option<(f64, f64)> {
        if reference.is_flat() || current.is_flat() {
            return None;
        }
        let profile = match_local(reference, current, &self.params, shift).ok()?;
        let fit = fit_linear(&profile).ok()?;
        Some((fit.translation, fit.divergence))
    }
}
