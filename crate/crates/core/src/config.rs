//! Plain-text `key = value` configuration shared by the CLI and simulator.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::geometry::CameraIntrinsics;
use crate::matching::MatchParams;
use crate::simulator::ControllerParams;

pub const SEED_ENV: &str = "EDGEFLOW_SEED";

/// Flat settings as they appear in the file. Angles are degrees here and
/// radians everywhere else, so the file round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub fov_horizontal_deg: f64,
    pub fov_vertical_deg: f64,
    pub image_width: usize,
    pub image_height: usize,
    pub stereo_baseline: f64,
    pub window_size: usize,
    pub max_search: usize,
    pub horizon_max: usize,
    pub max_disparity: usize,
    pub height_window: usize,
    pub frame_rate: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Feed gyro rates to the de-rotation step.
    pub use_rates: bool,
    pub kp: f64,
    pub ki: f64,
    pub max_tilt_deg: f64,
    pub attitude_tau: f64,
    pub drag: f64,
}

impl Default for Config {
    fn default() -> Self {
        let c = ControllerParams::default();
        Self {
            fov_horizontal_deg: 57.4,
            fov_vertical_deg: 44.5,
            image_width: 128,
            image_height: 96,
            stereo_baseline: 0.06,
            window_size: 18,
            max_search: 10,
            horizon_max: 10,
            max_disparity: 40,
            height_window: 5,
            frame_rate: 25.0,
            noise_sigma: 0.0,
            seed: 0,
            use_rates: true,
            kp: c.kp,
            ki: c.ki,
            max_tilt_deg: 15.0,
            attitude_tau: c.attitude_tau,
            drag: c.drag,
        }
    }
}

impl Config {
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics {
            fov_horizontal: self.fov_horizontal_deg.to_radians(),
            fov_vertical: self.fov_vertical_deg.to_radians(),
            image_width: self.image_width,
            image_height: self.image_height,
            stereo_baseline: self.stereo_baseline,
        }
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            intrinsics: self.intrinsics(),
            match_params: MatchParams {
                window_size: self.window_size,
                max_search: self.max_search,
            },
            max_horizon: self.horizon_max,
            max_disparity: self.max_disparity,
            height_window: self.height_window,
            frame_rate: self.frame_rate,
        }
    }

    pub fn controller(&self) -> ControllerParams {
        ControllerParams {
            kp: self.kp,
            ki: self.ki,
            max_tilt: self.max_tilt_deg.to_radians(),
            attitude_tau: self.attitude_tau,
            drag: self.drag,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        MatchParams::new(self.window_size, self.max_search).map_err(wrap)?;
        self.estimator().validate().map_err(wrap)?;
        self.controller().validate().map_err(wrap)?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Replaces the seed with `EDGEFLOW_SEED` when that is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("{key}: cannot parse {value:?}"))
        }
        match key {
            "fov_horizontal_deg" => self.fov_horizontal_deg = num(key, value)?,
            "fov_vertical_deg" => self.fov_vertical_deg = num(key, value)?,
            "image_width" => self.image_width = num(key, value)?,
            "image_height" => self.image_height = num(key, value)?,
            "stereo_baseline" => self.stereo_baseline = num(key, value)?,
            "window_size" => self.window_size = num(key, value)?,
            "max_search" => self.max_search = num(key, value)?,
            "horizon_max" => self.horizon_max = num(key, value)?,
            "max_disparity" => self.max_disparity = num(key, value)?,
            "height_window" => self.height_window = num(key, value)?,
            "frame_rate" => self.frame_rate = num(key, value)?,
            "noise_sigma" => self.noise_sigma = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "use_rates" => self.use_rates = num(key, value)?,
            "kp" => self.kp = num(key, value)?,
            "ki" => self.ki = num(key, value)?,
            "max_tilt_deg" => self.max_tilt_deg = num(key, value)?,
            "attitude_tau" => self.attitude_tau = num(key, value)?,
            "drag" => self.drag = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("fov_horizontal_deg", &self.fov_horizontal_deg);
        kv("fov_vertical_deg", &self.fov_vertical_deg);
        kv("image_width", &self.image_width);
        kv("image_height", &self.image_height);
        kv("stereo_baseline", &self.stereo_baseline);
        kv("window_size", &self.window_size);
        kv("max_search", &self.max_search);
        kv("horizon_max", &self.horizon_max);
        kv("max_disparity", &self.max_disparity);
        kv("height_window", &self.height_window);
        kv("frame_rate", &self.frame_rate);
        kv("noise_sigma", &self.noise_sigma);
        kv("seed", &self.seed);
        kv("use_rates", &self.use_rates);
        kv("kp", &self.kp);
        kv("ki", &self.ki);
        kv("max_tilt_deg", &self.max_tilt_deg);
        kv("attitude_tau", &self.attitude_tau);
        kv("drag", &self.drag);
        s
    }
}
