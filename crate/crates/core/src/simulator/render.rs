use std::f64::consts::FRAC_PI_2;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scene::Scene;
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::image::ImageFrame;

/// Camera (or rig centre) above the ground plane. Positive pitch tilts the
/// optical axis towards +x, positive roll towards +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub x: f64,
    pub y: f64,
    /// Height above the plane, metres.
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub timestamp: f64,
}

impl CameraPose {
    pub fn level(x: f64, y: f64, z: f64, timestamp: f64) -> Self {
        Self {
            x,
            y,
            z,
            roll: 0.0,
            pitch: 0.0,
            timestamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::InvalidPose(format!(
                "height must be positive, got {}",
                self.z
            )));
        }
        if !(self.roll.abs() < FRAC_PI_2 && self.pitch.abs() < FRAC_PI_2) {
            return Err(Error::InvalidPose(format!(
                "roll {} and pitch {} must stay within +-pi/2",
                self.roll, self.pitch
            )));
        }
        if !(self.x.is_finite() && self.y.is_finite() && self.timestamp.is_finite()) {
            return Err(Error::InvalidPose(
                "non-finite position or timestamp".into(),
            ));
        }
        Ok(())
    }

    /// Camera-frame vector expressed in world axes (z pointing down).
    fn to_world(self, v: [f64; 3]) -> [f64; 3] {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let y = v[1] * cr + v[2] * sr;
        let z = -v[1] * sr + v[2] * cr;
        [v[0] * cp + z * sp, y, -v[0] * sp + z * cp]
    }

    /// The same attitude with the optical centre moved by `dx` along camera x.
    fn offset_along_x(&self, dx: f64) -> Self {
        let d = self.to_world([dx, 0.0, 0.0]);
        Self {
            x: self.x + d[0],
            y: self.y + d[1],
            // world z points down, pose z is height
            z: self.z - d[2],
            ..*self
        }
    }
}

/// Value returned for rays that never reach the ground.
const SKY: f64 = 128.0;
const SUBSAMPLES: [f64; 2] = [-0.25, 0.25];

fn render_raw(scene: &Scene, pose: &CameraPose, intrinsics: &CameraIntrinsics) -> Result<Vec<f64>> {
    pose.validate()?;
    intrinsics.validate()?;
    let (w, h) = (intrinsics.image_width, intrinsics.image_height);
    let (fx, fy) = (intrinsics.focal_x(), intrinsics.focal_y());
    let (cu, cv) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for dv in SUBSAMPLES {
                for du in SUBSAMPLES {
                    let ray = pose.to_world([
                        (col as f64 + du - cu) / fx,
                        (row as f64 + dv - cv) / fy,
                        1.0,
                    ]);
                    acc += if ray[2] > 1e-9 {
                        let t = pose.z / ray[2];
                        scene.sample(pose.x + t * ray[0], pose.y + t * ray[1])
                    } else {
                        SKY
                    };
                }
            }
            out.push(acc / 4.0);
        }
    }
    Ok(out)
}

fn quantize(raw: &[f64], intrinsics: &CameraIntrinsics, timestamp: f64) -> Result<ImageFrame> {
    let pixels = raw
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    ImageFrame::new(
        intrinsics.image_width,
        intrinsics.image_height,
        pixels,
        timestamp,
    )
}

/// Pinhole view of the textured plane, 2x2 supersampled, 8-bit.
pub fn render(
    scene: &Scene,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Result<ImageFrame> {
    quantize(
        &render_raw(scene, pose, intrinsics)?,
        intrinsics,
        pose.timestamp,
    )
}

/// Left and right views with optical centres `stereo_baseline` apart along
/// camera x, centred on `pose`.
pub fn render_stereo(
    scene: &Scene,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Result<(ImageFrame, ImageFrame)> {
    let half = intrinsics.stereo_baseline / 2.0;
    Ok((
        render(scene, &pose.offset_along_x(-half), intrinsics)?,
        render(scene, &pose.offset_along_x(half), intrinsics)?,
    ))
}

/// Additive Gaussian sensor noise applied before quantization. A sigma of 0
/// draws nothing, so noiseless runs do not depend on the generator.
#[derive(Debug, Clone)]
pub struct SensorNoise {
    sigma: f64,
    rng: ChaCha8Rng,
}

impl SensorNoise {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise_sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self {
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973_6500_0000),
        })
    }

    pub fn render_stereo(
        &mut self,
        scene: &Scene,
        pose: &CameraPose,
        intrinsics: &CameraIntrinsics,
    ) -> Result<(ImageFrame, ImageFrame)> {
        let half = intrinsics.stereo_baseline / 2.0;
        let left = self.render(scene, &pose.offset_along_x(-half), intrinsics)?;
        let right = self.render(scene, &pose.offset_along_x(half), intrinsics)?;
        Ok((left, right))
    }

    pub fn render(
        &mut self,
        scene: &Scene,
        pose: &CameraPose,
        intrinsics: &CameraIntrinsics,
    ) -> Result<ImageFrame> {
        let mut raw = render_raw(scene, pose, intrinsics)?;
        if self.sigma > 0.0 {
            let normal = Normal::new(0.0, self.sigma).expect("sigma checked in new");
            for v in raw.iter_mut() {
                *v += normal.sample(&mut self.rng);
            }
        }
        quantize(&raw, intrinsics, pose.timestamp)
    }
}
