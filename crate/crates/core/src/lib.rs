//! Edge-histogram optical flow for small downward-looking stereo cameras.
//!
//! Every frame is compressed into two 1-D edge histograms (column and row sums
//! of absolute Sobel responses). Histograms are matched against a past frame
//! chosen by an adaptive time horizon, which turns slow sub-pixel motion into a
//! measurable integer displacement. Stereo histograms give height, and height
//! plus flow gives metric velocity.
//!
//! ```no_run
//! use edgeflow::{CameraIntrinsics, EstimatorConfig, VelocityEstimator};
//! # fn frames() -> Vec<(edgeflow::ImageFrame, edgeflow::ImageFrame)> { vec![] }
//! let mut estimator = VelocityEstimator::new(EstimatorConfig::default())?;
//! for (left, right) in frames() {
//!     let v = estimator.push_stereo(&left, &right, None)?;
//!     println!("{:.3} {:.3} m/s at {:.2} m", v.v_x, v.v_y, v.height);
//! }
//! # Ok::<(), edgeflow::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod flow;
pub mod geometry;
pub mod histograms;
pub mod image;
pub mod matching;
pub mod simulator;

pub use error::{Error, Result};
pub use estimator::{EstimatorConfig, VelocityEstimator};
pub use flow::{FlowEstimate, FlowTracker, HistogramRing, RateMeasurement};
pub use geometry::{CameraIntrinsics, Quality, VelocityEstimate};
pub use histograms::{Axis, EdgeHistogram, GradientImage};
pub use image::ImageFrame;
pub use matching::{DisplacementProfile, LinearFlowFit, MatchParams};
