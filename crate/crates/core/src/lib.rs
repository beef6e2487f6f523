//! Texture-free pose estimation of a known triangle mesh from single-channel
//! imagery.
//!
//! A particle population of pose hypotheses is scored by rendering each
//! hypothesis' silhouette and comparing the pixels it covers against a learned
//! background intensity distribution and a (by default uniform) foreground
//! distribution. The population is resampled every frame and jittered by a
//! random-walk motion model.
//!
//! Module map:
//! - [`geometry`]: mesh loading, articulation, affine projection, silhouette rasterization
//! - [`appearance`]: intensity histograms and the per-frame log-ratio cache
//! - [`filter`]: particle initialization, motion, likelihood, resampling, summaries
//! - [`synth`]: synthetic ground-truth scenes
//! - [`io`]: on-disk formats (PGM, histograms, configs, tracks)
//! - [`cli`]: the command implementations behind the `posefit` binary

pub mod appearance;
pub mod cli;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod io;
pub mod rng;
pub mod synth;

pub use appearance::{
    build_cache, learn_background, total_histogram, uniform_foreground, AppearanceModel, Image,
    IntensityHistogram, LogRatioCache,
};
pub use error::{Error, Result};
pub use filter::{
    expected_state, filter_update, init_particles, log_likelihood, map_particle, motion_step,
    normalize_weights, resample, FilterConfig, JitterStd, Particle, ParticleSet, PriorBounds,
};
pub use geometry::{apply_pose, load_mesh, rasterize_silhouette, PoseParams, SilhouetteMask, TriangleMesh};
pub use rng::{SeedStreams, Stream};
