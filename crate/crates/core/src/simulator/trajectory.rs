use std::f64::consts::TAU;

use super::render::CameraPose;
use crate::error::{Error, Result};
use crate::flow::RateMeasurement;

/// Prescribed rig motion for open-loop runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Stationary,
    Constant {
        vx: f64,
        vy: f64,
    },
    /// v(t) = amplitude * sin(2 pi t / period), starting at rest position.
    Sinusoid {
        amplitude_x: f64,
        amplitude_y: f64,
        period: f64,
    },
    /// Constant angular rates about a fixed optical centre.
    Rotation {
        roll_rate: f64,
        pitch_rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub motion: Motion,
    pub height: f64,
    pub origin: (f64, f64),
    pub start_roll: f64,
    pub start_pitch: f64,
}

/// Pose at one frame with its analytic velocity and the gyro reading an ideal
/// sensor would report (mean rate since the previous frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub pose: CameraPose,
    pub velocity: (f64, f64),
    pub rates: RateMeasurement,
}

impl Trajectory {
    pub fn new(motion: Motion, height: f64) -> Self {
        Self {
            motion,
            height,
            origin: (0.0, 0.0),
            start_roll: 0.0,
            start_pitch: 0.0,
        }
    }

    pub fn pose(&self, t: f64) -> CameraPose {
        let (x0, y0) = self.origin;
        let (mut x, mut y) = (x0, y0);
        let (mut roll, mut pitch) = (self.start_roll, self.start_pitch);
        match self.motion {
            Motion::Stationary => {}
            Motion::Constant { vx, vy } => {
                x += vx * t;
                y += vy * t;
            }
            Motion::Sinusoid {
                amplitude_x,
                amplitude_y,
                period,
            } => {
                let k = period / TAU * (1.0 - (TAU * t / period).cos());
                x += amplitude_x * k;
                y += amplitude_y * k;
            }
            Motion::Rotation {
                roll_rate,
                pitch_rate,
            } => {
                roll += roll_rate * t;
                pitch += pitch_rate * t;
            }
        }
        CameraPose {
            x,
            y,
            z: self.height,
            roll,
            pitch,
            timestamp: t,
        }
    }

    pub fn velocity(&self, t: f64) -> (f64, f64) {
        match self.motion {
            Motion::Stationary | Motion::Rotation { .. } => (0.0, 0.0),
            Motion::Constant { vx, vy } => (vx, vy),
            Motion::Sinusoid {
                amplitude_x,
                amplitude_y,
                period,
            } => {
                let s = (TAU * t / period).sin();
                (amplitude_x * s, amplitude_y * s)
            }
        }
    }

    fn rates_at(&self) -> (f64, f64) {
        match self.motion {
            Motion::Rotation {
                roll_rate,
                pitch_rate,
            } => (roll_rate, pitch_rate),
            _ => (0.0, 0.0),
        }
    }

    /// `frames` samples at `t = k / frame_rate`.
    pub fn samples(&self, frame_rate: f64, frames: usize) -> Result<Vec<TrajectorySample>> {
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(Error::Scenario("frame_rate must be positive".into()));
        }
        if let Motion::Sinusoid { period, .. } = self.motion {
            if !(period > 0.0) {
                return Err(Error::Scenario("sinusoid period must be positive".into()));
            }
        }
        let mut out: Vec<TrajectorySample> = Vec::with_capacity(frames);
        for k in 0..frames {
            let t = k as f64 / frame_rate;
            let pose = self.pose(t);
            pose.validate()?;
            let (roll_rate, pitch_rate) = match out.last() {
                Some(prev) => (
                    (pose.roll - prev.pose.roll) * frame_rate,
                    (pose.pitch - prev.pose.pitch) * frame_rate,
                ),
                None => self.rates_at(),
            };
            out.push(TrajectorySample {
                pose,
                velocity: self.velocity(t),
                rates: RateMeasurement::new(roll_rate, pitch_rate, t),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_position_integrates_velocity() {
        let tr = Trajectory::new(
            Motion::Sinusoid {
                amplitude_x: 0.3,
                amplitude_y: -0.1,
                period: 8.0,
            },
            1.0,
        );
        let h = 1e-5;
        for i in 0..40 {
            let t = i as f64 * 0.37;
            let dx = (tr.pose(t + h).x - tr.pose(t - h).x) / (2.0 * h);
            let dy = (tr.pose(t + h).y - tr.pose(t - h).y) / (2.0 * h);
            let (vx, vy) = tr.velocity(t);
            assert!((dx - vx).abs() < 1e-8 && (dy - vy).abs() < 1e-8);
        }
        assert_eq!(tr.pose(0.0).x, 0.0);
    }

    #[test]
    fn rotation_rates() {
        let mut tr = Trajectory::new(
            Motion::Rotation {
                roll_rate: 0.0,
                pitch_rate: 0.5,
            },
            1.0,
        );
        tr.start_pitch = -0.3;
        let s = tr.samples(25.0, 30).unwrap();
        for x in &s {
            assert!((x.rates.pitch_rate - 0.5).abs() < 1e-9);
            assert_eq!(x.velocity, (0.0, 0.0));
        }
        assert!((s[29].pose.pitch - (-0.3 + 0.5 * 29.0 / 25.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_pose_surfaces() {
        let tr = Trajectory::new(
            Motion::Rotation {
                roll_rate: 3.0,
                pitch_rate: 0.0,
            },
            1.0,
        );
        assert!(tr.samples(25.0, 100).is_err());
        assert!(Trajectory::new(Motion::Stationary, -1.0)
            .samples(25.0, 1)
            .is_err());
    }
}
