//! Synthetic scenes with known ground truth.
//!
//! A frame is the silhouette of the mesh at the trajectory pose, filled with
//! Gaussian foreground noise over Gaussian background noise, rounded and
//! clamped to 8 bits.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::appearance::Image;
use crate::error::{Error, Result};
use crate::geometry::{render_silhouette, PoseParams, SilhouetteMask, TriangleMesh};
use crate::rng::{SeedStreams, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub mesh: TriangleMesh,
    pub trajectory: Vec<PoseParams>,
    pub width: usize,
    pub height: usize,
    pub background_mean: f64,
    pub background_std: f64,
    pub foreground_mean: f64,
    pub foreground_std: f64,
    pub noise_seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trajectory.is_empty() {
            return bad("trajectory is empty".into());
        }
        if self.width == 0 || self.height == 0 {
            return bad(format!("image size {}x{} is empty", self.width, self.height));
        }
        for (name, mean) in [
            ("background_mean", self.background_mean),
            ("foreground_mean", self.foreground_mean),
        ] {
            if !(0.0..=255.0).contains(&mean) {
                return bad(format!("{name} must be in [0, 255], got {mean}"));
            }
        }
        for (name, std) in [
            ("background_std", self.background_std),
            ("foreground_std", self.foreground_std),
        ] {
            if !(std >= 0.0 && std.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {std}"));
            }
        }
        if self.foreground_mean == self.background_mean {
            return bad("foreground_mean equals background_mean; the object would be invisible".into());
        }
        for (k, pose) in self.trajectory.iter().enumerate() {
            pose.validate()
                .map_err(|e| Error::Config(format!("trajectory pose {k}: {e}")))?;
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.trajectory.len()
    }

    /// Exact silhouette of frame `frame_index`.
    pub fn truth_mask(&self, frame_index: usize) -> Result<SilhouetteMask> {
        let pose = self.trajectory.get(frame_index).ok_or(Error::IndexOutOfRange {
            index: frame_index,
            len: self.trajectory.len(),
        })?;
        Ok(render_silhouette(&self.mesh, pose, self.width, self.height))
    }
}

fn noisy_pixel(rng: &mut impl Rng, mean: f64, std: f64) -> u8 {
    let z: f64 = rng.sample(StandardNormal);
    (mean + std * z).round().clamp(0.0, 255.0) as u8
}

/// Observed frame `frame_index`, deterministic in `(noise_seed, frame_index)`.
pub fn render_frame(spec: &SceneSpec, frame_index: usize) -> Result<Image> {
    let mask = spec.truth_mask(frame_index)?;
    let mut rng = SeedStreams::new(spec.noise_seed).rng(Stream::FrameNoise, frame_index as u64, 0);
    let pixels = mask
        .bits()
        .iter()
        .map(|&fg| {
            if fg {
                noisy_pixel(&mut rng, spec.foreground_mean, spec.foreground_std)
            } else {
                noisy_pixel(&mut rng, spec.background_mean, spec.background_std)
            }
        })
        .collect();
    Image::new(spec.width, spec.height, pixels)
}

/// `count` object-free frames for learning the background distribution.
pub fn render_background_frames(spec: &SceneSpec, count: usize) -> Vec<Image> {
    let streams = SeedStreams::new(spec.noise_seed);
    (0..count)
        .map(|k| {
            let mut rng = streams.rng(Stream::BackgroundNoise, k as u64, 0);
            let pixels = (0..spec.width * spec.height)
                .map(|_| noisy_pixel(&mut rng, spec.background_mean, spec.background_std))
                .collect();
            Image::new(spec.width, spec.height, pixels).expect("sized by construction")
        })
        .collect()
}
