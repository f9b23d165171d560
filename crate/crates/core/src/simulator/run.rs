use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::log::{LogRow, Truth};
use super::render::{CameraPose, SensorNoise};
use super::scene::Scene;
use super::trajectory::TrajectorySample;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::estimator::VelocityEstimator;
use crate::flow::RateMeasurement;
use crate::image::ImageFrame;

pub const GRAVITY: f64 = 9.81;

/// Outer velocity loop and the point-mass vehicle it flies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Commanded acceleration per unit velocity error, 1/s.
    pub kp: f64,
    /// Integral gain, 1/s^2.
    pub ki: f64,
    /// Tilt set-point limit, radians.
    pub max_tilt: f64,
    /// First-order attitude response time constant, seconds.
    pub attitude_tau: f64,
    /// Linear drag coefficient, 1/s.
    pub drag: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            kp: 2.0,
            ki: 0.5,
            max_tilt: 15f64.to_radians(),
            attitude_tau: 0.1,
            drag: 0.5,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.kp > 0.0 && self.kp.is_finite()) {
            return bad(format!("kp must be positive, got {}", self.kp));
        }
        if !(self.ki >= 0.0 && self.ki.is_finite()) {
            return bad(format!("ki must be >= 0, got {}", self.ki));
        }
        if !(self.max_tilt > 0.0 && self.max_tilt < std::f64::consts::FRAC_PI_2) {
            return bad(format!(
                "max_tilt must lie in (0, pi/2), got {}",
                self.max_tilt
            ));
        }
        if !(self.attitude_tau > 0.0 && self.attitude_tau.is_finite()) {
            return bad(format!(
                "attitude_tau must be positive, got {}",
                self.attitude_tau
            ));
        }
        if !(self.drag >= 0.0 && self.drag.is_finite()) {
            return bad(format!("drag must be >= 0, got {}", self.drag));
        }
        Ok(())
    }
}

/// Piecewise-constant velocity reference, `(t, vx, vy)` breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSchedule {
    points: Vec<(f64, f64, f64)>,
}

impl ReferenceSchedule {
    pub fn new(points: Vec<(f64, f64, f64)>) -> Result<Self> {
        if points
            .iter()
            .any(|p| !(p.0.is_finite() && p.1.is_finite() && p.2.is_finite()))
        {
            return Err(Error::Scenario("reference values must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Scenario("reference times must increase".into()));
        }
        Ok(Self { points })
    }

    pub fn constant(vx: f64, vy: f64) -> Self {
        Self {
            points: vec![(0.0, vx, vy)],
        }
    }

    pub fn points(&self) -> &[(f64, f64, f64)] {
        &self.points
    }

    /// Zero before the first breakpoint.
    pub fn at(&self, t: f64) -> (f64, f64) {
        self.points
            .iter()
            .rev()
            .find(|p| p.0 <= t)
            .map_or((0.0, 0.0), |p| (p.1, p.2))
    }
}

/// Initial condition and bounds of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopSetup {
    pub height: f64,
    pub duration: f64,
    pub origin: (f64, f64),
    /// Abort once |x| or |y| leaves this many metres around the origin.
    pub scene_extent: f64,
}

impl Default for ClosedLoopSetup {
    fn default() -> Self {
        Self {
            height: 1.0,
            duration: 15.0,
            origin: (0.0, 0.0),
            scene_extent: 100.0,
        }
    }
}

fn frame_count(duration: f64, frame_rate: f64) -> usize {
    (duration * frame_rate).round().max(0.0) as usize
}

/// Renders every sample (with the configured sensor noise) in order.
fn render_sequence<'a>(
    samples: &'a [TrajectorySample],
    scene: &Scene,
    config: &Config,
) -> Result<impl Iterator<Item = Result<(ImageFrame, ImageFrame)>> + 'a> {
    let mut noise = SensorNoise::new(config.noise_sigma, config.seed)?;
    let k = config.intrinsics();
    let scene = scene.clone();
    Ok(samples
        .iter()
        .map(move |s| noise.render_stereo(&scene, &s.pose, &k)))
}

/// Feeds rendered frames for each sample through the full pipeline.
pub fn run_open_loop(
    samples: &[TrajectorySample],
    scene: &Scene,
    config: &Config,
) -> Result<Vec<LogRow>> {
    config.validate()?;
    let mut est = VelocityEstimator::new(config.estimator())?;
    let mut rows = Vec::with_capacity(samples.len());
    for (s, frames) in samples.iter().zip(render_sequence(samples, scene, config)?) {
        let (left, right) = frames?;
        let rates = config.use_rates.then_some(&s.rates);
        let out = est.process(&left, Some(&right), rates)?;
        let truth = Truth {
            v_ref: (f64::NAN, f64::NAN),
            velocity: s.velocity,
            height: s.pose.z,
        };
        rows.push(LogRow::new(s.pose.timestamp, truth, &out));
    }
    Ok(rows)
}

/// Writes the frames `run_open_loop` would see, plus `rates.csv` and
/// `truth.csv`, in the layout `replay` reads.
pub fn export_sequence(
    samples: &[TrajectorySample],
    scene: &Scene,
    config: &Config,
    dir: &Path,
) -> Result<()> {
    config.validate()?;
    fs::create_dir_all(dir)?;
    let mut rates = String::from("frame,roll_rate,pitch_rate\n");
    let mut truth = String::from("frame,vx_true,vy_true,h_true\n");
    for (k, (s, frames)) in samples
        .iter()
        .zip(render_sequence(samples, scene, config)?)
        .enumerate()
    {
        let (left, right) = frames?;
        left.write_pgm(dir.join(format!("left_{k:06}.pgm")))?;
        right.write_pgm(dir.join(format!("right_{k:06}.pgm")))?;
        // Display for f64 is the shortest exact representation
        rates.push_str(&format!(
            "{k},{},{}\n",
            s.rates.roll_rate, s.rates.pitch_rate
        ));
        truth.push_str(&format!(
            "{k},{},{},{}\n",
            s.velocity.0, s.velocity.1, s.pose.z
        ));
    }
    fs::File::create(dir.join("rates.csv"))?.write_all(rates.as_bytes())?;
    fs::File::create(dir.join("truth.csv"))?.write_all(truth.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
struct AxisState {
    position: f64,
    velocity: f64,
    /// Thrust tilt producing positive acceleration on this axis.
    tilt: f64,
    integral: f64,
}

impl AxisState {
    fn command(&mut self, error: f64, dt: f64, c: &ControllerParams) -> f64 {
        let integral = self.integral + error * dt;
        let accel = c.kp * error + c.ki * integral;
        let tilt = (accel / GRAVITY).atan();
        if tilt.abs() > c.max_tilt {
            // hold the integrator while saturated
            return tilt.signum() * c.max_tilt;
        }
        self.integral = integral;
        tilt
    }

    fn advance(&mut self, setpoint: f64, dt: f64, c: &ControllerParams) {
        let alpha = 1.0 - (-dt / c.attitude_tau).exp();
        self.tilt += (setpoint - self.tilt) * alpha;
        let accel = GRAVITY * self.tilt.tan() - c.drag * self.velocity;
        self.velocity += accel * dt;
        self.position += self.velocity * dt;
    }
}

const SUBSTEPS: usize = 10;

/// Vision-in-the-loop velocity control: each tick renders the current pose,
/// estimates velocity, and turns the error into a tilt set-point.
pub fn run_closed_loop(
    reference: &ReferenceSchedule,
    scene: &Scene,
    config: &Config,
    setup: &ClosedLoopSetup,
) -> Result<Vec<LogRow>> {
    config.validate()?;
    let ctl = config.controller();
    let k = config.intrinsics();
    let dt = 1.0 / config.frame_rate;
    let mut est = VelocityEstimator::new(config.estimator())?;
    let mut noise = SensorNoise::new(config.noise_sigma, config.seed)?;
    let mut ax = AxisState {
        position: setup.origin.0,
        ..AxisState::default()
    };
    let mut ay = AxisState {
        position: setup.origin.1,
        ..AxisState::default()
    };
    let mut last_attitude: Option<(f64, f64)> = None;
    let mut held = (0.0, 0.0);
    let frames = frame_count(setup.duration, config.frame_rate);
    let mut rows = Vec::with_capacity(frames);

    for tick in 0..frames {
        let t = tick as f64 / config.frame_rate;
        // a forward thrust tilt turns the downward optical axis backwards
        let (roll, pitch) = (-ay.tilt, -ax.tilt);
        let pose = CameraPose {
            x: ax.position,
            y: ay.position,
            z: setup.height,
            roll,
            pitch,
            timestamp: t,
        };
        let (left, right) = noise.render_stereo(scene, &pose, &k)?;
        let rates = match last_attitude {
            Some((r0, p0)) => RateMeasurement::new((roll - r0) / dt, (pitch - p0) / dt, t),
            None => RateMeasurement::new(0.0, 0.0, t),
        };
        last_attitude = Some((roll, pitch));
        let out = est.process(&left, Some(&right), config.use_rates.then_some(&rates))?;

        let v = out.velocity;
        if v.v_x.is_finite() && v.v_y.is_finite() {
            held = (v.v_x, v.v_y);
        }
        let v_ref = reference.at(t);
        let sp_x = ax.command(v_ref.0 - held.0, dt, &ctl);
        let sp_y = ay.command(v_ref.1 - held.1, dt, &ctl);
        let truth = Truth {
            v_ref,
            velocity: (ax.velocity, ay.velocity),
            height: setup.height,
        };
        rows.push(LogRow::new(t, truth, &out));

        let h = dt / SUBSTEPS as f64;
        for _ in 0..SUBSTEPS {
            ax.advance(sp_x, h, &ctl);
            ay.advance(sp_y, h, &ctl);
        }
        let (dx, dy) = (ax.position - setup.origin.0, ay.position - setup.origin.1);
        if !(dx.abs() <= setup.scene_extent && dy.abs() <= setup.scene_extent) {
            return Err(Error::Diverged {
                t: t + dt,
                x: ax.position,
                y: ay.position,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_piecewise_constant() {
        let r = ReferenceSchedule::new(vec![(0.0, 0.0, 0.0), (2.0, 0.3, 0.0), (5.0, -0.1, 0.2)])
            .unwrap();
        assert_eq!(r.at(-1.0), (0.0, 0.0));
        assert_eq!(r.at(1.99), (0.0, 0.0));
        assert_eq!(r.at(2.0), (0.3, 0.0));
        assert_eq!(r.at(100.0), (-0.1, 0.2));
        assert!(ReferenceSchedule::new(vec![(1.0, 0.0, 0.0), (1.0, 0.0, 0.0)]).is_err());
        assert!(ReferenceSchedule::new(vec![(0.0, f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn controller_invariants() {
        assert!(ControllerParams::default().validate().is_ok());
        let c = ControllerParams {
            kp: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ControllerParams {
            ki: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn plant_reaches_drag_limited_speed() {
        // with perfect measurement the loop settles on the reference
        let c = ControllerParams::default();
        let mut a = AxisState::default();
        let dt = 0.04;
        for _ in 0..500 {
            let sp = a.command(0.3 - a.velocity, dt, &c);
            for _ in 0..SUBSTEPS {
                a.advance(sp, dt / SUBSTEPS as f64, &c);
            }
        }
        assert!((a.velocity - 0.3).abs() < 1e-3, "{}", a.velocity);
        // steady tilt balances drag
        assert!((GRAVITY * a.tilt.tan() - c.drag * 0.3).abs() < 1e-2);
    }
}
