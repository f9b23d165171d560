use std::path::Path;
use std::str::FromStr;

use super::log::LogRow;
use super::run::{run_closed_loop, run_open_loop, ClosedLoopSetup, ReferenceSchedule};
use super::scene::Scene;
use super::trajectory::{Motion, Trajectory};
use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioMode {
    OpenLoop(Trajectory),
    ClosedLoop(ReferenceSchedule),
}

/// A simulation run described in a `key = value` file. Closed-loop runs
/// take their velocity reference from a `[reference]` section of
/// `t vx vy` rows.
///
/// ```text
/// mode = closed_loop
/// duration = 15
/// height = 1.0
/// [reference]
/// 0 0 0
/// 2 0.3 0
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: ScenarioMode,
    pub duration: f64,
    pub height: f64,
    pub origin: (f64, f64),
    pub texture_contrast: f64,
    pub scene_extent: f64,
}

#[derive(Default)]
struct Raw {
    mode: Option<String>,
    motion: Option<String>,
    values: Vec<(String, f64)>,
}

impl Raw {
    fn get(&self, key: &str, default: f64) -> f64 {
        self.values
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map_or(default, |(_, v)| *v)
    }
}

const NUMERIC_KEYS: [&str; 15] = [
    "duration",
    "height",
    "start_x",
    "start_y",
    "texture_contrast",
    "scene_extent",
    "vx",
    "vy",
    "amplitude_x",
    "amplitude_y",
    "period",
    "roll_rate",
    "pitch_rate",
    "start_roll",
    "start_pitch",
];

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Scenario(format!("line {line}: {msg}"));
        let mut raw = Raw::default();
        let mut reference = Vec::new();
        let mut in_reference = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line != "[reference]" {
                    return Err(err(n, format!("unknown section {line}")));
                }
                in_reference = true;
                continue;
            }
            if in_reference {
                let cols: Vec<&str> = line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .collect();
                let parsed: std::result::Result<Vec<f64>, _> =
                    cols.iter().map(|c| f64::from_str(c)).collect();
                match parsed {
                    Ok(v) if v.len() == 3 => reference.push((v[0], v[1], v[2])),
                    _ => return Err(err(n, format!("expected `t vx vy`, got {line:?}"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(n, "expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => raw.mode = Some(value.to_string()),
                "motion" => raw.motion = Some(value.to_string()),
                k if NUMERIC_KEYS.contains(&k) => {
                    let v = value
                        .parse()
                        .map_err(|_| err(n, format!("{k}: cannot parse {value:?}")))?;
                    raw.values.push((k.to_string(), v));
                }
                k => return Err(err(n, format!("unknown key {k:?}"))),
            }
        }

        let height = raw.get("height", 1.0);
        let duration = raw.get("duration", 10.0);
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::Scenario(format!(
                "height must be positive, got {height}"
            )));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Scenario(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let origin = (raw.get("start_x", 0.0), raw.get("start_y", 0.0));
        let mode = match raw.mode.as_deref().unwrap_or("open_loop") {
            "open_loop" => {
                let motion = match raw.motion.as_deref().unwrap_or("stationary") {
                    "stationary" => Motion::Stationary,
                    "constant" => Motion::Constant {
                        vx: raw.get("vx", 0.0),
                        vy: raw.get("vy", 0.0),
                    },
                    "sinusoid" => Motion::Sinusoid {
                        amplitude_x: raw.get("amplitude_x", 0.0),
                        amplitude_y: raw.get("amplitude_y", 0.0),
                        period: raw.get("period", 8.0),
                    },
                    "rotation" => Motion::Rotation {
                        roll_rate: raw.get("roll_rate", 0.0),
                        pitch_rate: raw.get("pitch_rate", 0.0),
                    },
                    other => return Err(Error::Scenario(format!("unknown motion {other:?}"))),
                };
                if !reference.is_empty() {
                    return Err(Error::Scenario(
                        "[reference] only applies to closed_loop".into(),
                    ));
                }
                ScenarioMode::OpenLoop(Trajectory {
                    motion,
                    height,
                    origin,
                    start_roll: raw.get("start_roll", 0.0),
                    start_pitch: raw.get("start_pitch", 0.0),
                })
            }
            "closed_loop" => {
                if raw.motion.is_some() {
                    return Err(Error::Scenario("motion only applies to open_loop".into()));
                }
                ScenarioMode::ClosedLoop(ReferenceSchedule::new(reference)?)
            }
            other => return Err(Error::Scenario(format!("unknown mode {other:?}"))),
        };
        let texture_contrast = raw.get("texture_contrast", 1.0);
        if !(texture_contrast >= 0.0 && texture_contrast.is_finite()) {
            return Err(Error::Scenario("texture_contrast must be >= 0".into()));
        }
        Ok(Self {
            mode,
            duration,
            height,
            origin,
            texture_contrast,
            scene_extent: raw.get("scene_extent", 100.0),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Scenario(m) => Error::Scenario(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn scene(&self, config: &Config) -> Scene {
        Scene::with_contrast(config.seed, self.texture_contrast)
    }

    pub fn run(&self, config: &Config) -> Result<Vec<LogRow>> {
        let scene = self.scene(config);
        match &self.mode {
            ScenarioMode::OpenLoop(tr) => {
                let frames = (self.duration * config.frame_rate).round() as usize;
                run_open_loop(&tr.samples(config.frame_rate, frames)?, &scene, config)
            }
            ScenarioMode::ClosedLoop(reference) => {
                let setup = ClosedLoopSetup {
                    height: self.height,
                    duration: self.duration,
                    origin: self.origin,
                    scene_extent: self.scene_extent,
                };
                run_closed_loop(reference, &scene, config, &setup)
            }
        }
    }
}
