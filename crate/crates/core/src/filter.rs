//! Particle population and the update cycle: resample, jitter, evaluate,
//! normalize.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::appearance::{build_cache, AppearanceModel, Image, LogRatioCache};
use crate::error::{Error, Result};
use crate::geometry::{
    apply_pose, rasterize_silhouette, BBox2, PoseParams, SilhouetteMask, TriangleMesh,
};
use crate::rng::{SeedStreams, Stream};

/// Standard deviations of the random-walk motion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterStd {
    /// Radians, applied to yaw, pitch and roll.
    pub angle: f64,
    /// Pixels, applied to tx and ty.
    pub translation: f64,
    /// Log-space std of the multiplicative scale jitter.
    pub log_scale: f64,
    /// Radians.
    pub articulation: f64,
}

impl Default for JitterStd {
    fn default() -> Self {
        Self {
            angle: 0.05,
            translation: 2.0,
            log_scale: 0.05,
            articulation: 0.05,
        }
    }
}

impl JitterStd {
    pub fn zero() -> Self {
        Self {
            angle: 0.0,
            translation: 0.0,
            log_scale: 0.0,
            articulation: 0.0,
        }
    }
}

/// Prior support, relative to the image: the projected bounding-box diagonal
/// must lie within `[min_diagonal, max_diagonal] * min(w, h)` and at least
/// `min_visible` of the box area must fall inside the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorBounds {
    pub min_diagonal: f64,
    pub max_diagonal: f64,
    pub min_visible: f64,
}

impl Default for PriorBounds {
    fn default() -> Self {
        Self {
            min_diagonal: 0.1,
            max_diagonal: 1.0,
            min_visible: 0.5,
        }
    }
}

impl PriorBounds {
    /// Allowed projected diagonal in pixels for a `width x height` image.
    pub fn diagonal_range(&self, width: usize, height: usize) -> (f64, f64) {
        let m = width.min(height) as f64;
        (self.min_diagonal * m, self.max_diagonal * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub particle_count: usize,
    pub jitter: JitterStd,
    pub bounds: PriorBounds,
    pub rng_seed: u64,
}

impl FilterConfig {
    pub fn new(particle_count: usize, rng_seed: u64) -> Self {
        Self {
            particle_count,
            jitter: JitterStd::default(),
            bounds: PriorBounds::default(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::Config("particle_count must be at least 1".into()));
        }
        let j = self.jitter;
        for (name, v) in [
            ("jitter_angle", j.angle),
            ("jitter_translation", j.translation),
            ("jitter_log_scale", j.log_scale),
            ("jitter_articulation", j.articulation),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let b = self.bounds;
        if !(0.0 < b.min_diagonal && b.min_diagonal <= b.max_diagonal && b.max_diagonal.is_finite()) {
            return Err(Error::Config("diagonal bounds must satisfy 0 < min <= max".into()));
        }
        if !(0.0..=1.0).contains(&b.min_visible) {
            return Err(Error::Config("min_visible must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn streams(&self) -> SeedStreams {
        SeedStreams::new(self.rng_seed)
    }
}

/// One hypothesis and its probability. `log_likelihood` holds the most recent
/// evaluation of `state`, or `None` when the state has moved since.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub state: PoseParams,
    pub weight: f64,
    pub log_likelihood: Option<f64>,
}

/// The sampled posterior at iteration `iteration`, tied to the image size
/// its bounds were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    iteration: u64,
    image_width: usize,
    image_height: usize,
}

impl ParticleSet {
    pub fn new(
        particles: Vec<Particle>,
        iteration: u64,
        image_width: usize,
        image_height: usize,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Empty("particle set is empty".into()));
        }
        if let Some(i) = particles
            .iter()
            .position(|p| !(p.weight >= 0.0 && p.weight.is_finite()))
        {
            return Err(Error::Internal(format!(
                "particle {i} has invalid weight {}",
                particles[i].weight
            )));
        }
        Ok(Self {
            particles,
            iteration,
            image_width,
            image_height,
        })
    }

    /// Uniform weights over the given states.
    pub fn from_states(
        states: impl IntoIterator<Item = PoseParams>,
        image_width: usize,
        image_height: usize,
    ) -> Result<Self> {
        let mut particles: Vec<Particle> = states
            .into_iter()
            .map(|state| Particle {
                state,
                weight: 0.0,
                log_likelihood: None,
            })
            .collect();
        let w = 1.0 / particles.len() as f64;
        particles.iter_mut().for_each(|p| p.weight = w);
        Self::new(particles, 0, image_width, image_height)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.image_width, self.image_height)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn states(&self) -> Vec<PoseParams> {
        self.particles.iter().map(|p| p.state).collect()
    }

    fn with_particles(&self, particles: Vec<Particle>) -> Self {
        Self {
            particles,
            iteration: self.iteration,
            image_width: self.image_width,
            image_height: self.image_height,
        }
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut wrapped = angle - two_pi * ((angle + PI) / two_pi).floor();
    if wrapped >= PI {
        wrapped -= two_pi;
    }
    if wrapped < -PI {
        wrapped = -PI;
    }
    wrapped
}

fn unit_bbox(mesh: &TriangleMesh, state: &PoseParams) -> Option<BBox2> {
    // Bounding box at scale 1 with no translation.
    let probe = PoseParams {
        tx: 0.0,
        ty: 0.0,
        scale: 1.0,
        ..*state
    };
    BBox2::of_triangles(&apply_pose(mesh, &probe))
}

/// Draws `config.particle_count` states from the bounded uniform prior.
///
/// Angles (and articulation, when the mesh has a joint) are uniform on
/// `[-pi, pi)`. The scale is chosen so the projected bounding-box diagonal is
/// uniform on the allowed diagonal range, and the translation is drawn
/// uniformly among placements where the box touches the image, rejecting
/// those with less than `min_visible` of its area inside.
pub fn init_particles(
    config: &FilterConfig,
    image_width: usize,
    image_height: usize,
    mesh: &TriangleMesh,
) -> Result<ParticleSet> {
    config.validate()?;
    let streams = config.streams();
    let (min_diag, max_diag) = config.bounds.diagonal_range(image_width, image_height);
    let (w, h) = (image_width as f64, image_height as f64);
    let articulated = mesh.joint().is_some();

    let states = (0..config.particle_count).map(|i| {
        let mut rng = streams.rng(Stream::Init, 0, i as u64);
        let mut state = PoseParams {
            yaw: rng.random_range(-PI..PI),
            pitch: rng.random_range(-PI..PI),
            roll: rng.random_range(-PI..PI),
            articulation: if articulated { rng.random_range(-PI..PI) } else { 0.0 },
            ..PoseParams::identity()
        };
        let Some(bbox) = unit_bbox(mesh, &state) else {
            state.tx = rng.random_range(0.0..w);
            state.ty = rng.random_range(0.0..h);
            return state;
        };
        let unit_diag = bbox.diagonal();
        if unit_diag > 0.0 {
            let diag = if max_diag > min_diag {
                rng.random_range(min_diag..=max_diag)
            } else {
                min_diag
            };
            state.scale = diag / unit_diag;
        }
        let s = state.scale;
        let (bw, bh) = (s * bbox.width(), s * bbox.height());
        loop {
            // Box spans [left, left + bw]; any placement touching the image.
            let left = rng.random_range(-bw..=w);
            let top = rng.random_range(-bh..=h);
            let placed = BBox2 {
                min: [left, top],
                max: [left + bw, top + bh],
            };
            if placed.visible_fraction(w, h) >= config.bounds.min_visible {
                state.tx = left - s * bbox.min[0];
                state.ty = top - s * bbox.min[1];
                return state;
            }
        }
    });
    ParticleSet::from_states(states.collect::<Vec<_>>(), image_width, image_height)
}

/// Random-walk motion model. Each particle draws from its own stream keyed by
/// `(seed, iteration, index)`.
///
/// After jittering, the scale is clamped so the projected diagonal of the new
/// state stays within the prior's diagonal range.
pub fn motion_step(
    set: &ParticleSet,
    config: &FilterConfig,
    mesh: &TriangleMesh,
    streams: &SeedStreams,
) -> ParticleSet {
    let j = config.jitter;
    let (min_diag, max_diag) = config.bounds.diagonal_range(set.image_width, set.image_height);
    let articulated = mesh.joint().is_some();
    let iteration = set.iteration;

    let particles = set
        .particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = streams.rng(Stream::Motion, iteration, i as u64);
            let mut normal = || -> f64 { rng.sample(StandardNormal) };
            let s = p.state;
            let mut next = PoseParams {
                yaw: wrap_angle(s.yaw + j.angle * normal()),
                pitch: wrap_angle(s.pitch + j.angle * normal()),
                roll: wrap_angle(s.roll + j.angle * normal()),
                tx: s.tx + j.translation * normal(),
                ty: s.ty + j.translation * normal(),
                scale: s.scale * (j.log_scale * normal()).exp(),
                articulation: s.articulation,
            };
            let art_noise = j.articulation * normal();
            if articulated {
                next.articulation = wrap_angle(s.articulation + art_noise);
            }
            if let Some(bbox) = unit_bbox(mesh, &next) {
                let d = bbox.diagonal();
                if d > 0.0 {
                    next.scale = next.scale.clamp(min_diag / d, max_diag / d);
                }
            }
            let unchanged = next == s;
            Particle {
                state: next,
                weight: p.weight,
                log_likelihood: if unchanged { p.log_likelihood } else { None },
            }
        })
        .collect();
    set.with_particles(particles)
}

/// `log p(D | theta)` for the silhouette `mask`: the all-background term plus
/// the cached log ratio summed over foreground pixels.
pub fn log_likelihood(mask: &SilhouetteMask, cache: &LogRatioCache) -> Result<f64> {
    let dims = (mask.width(), mask.height());
    if dims != cache.dims() {
        return Err(Error::DimensionMismatch {
            expected: cache.dims(),
            actual: dims,
        });
    }
    let foreground: f64 = mask
        .bits()
        .iter()
        .zip(cache.ratio_image())
        .filter(|(&fg, _)| fg)
        .map(|(_, &r)| r)
        .sum();
    Ok(cache.log_bg_minus_total_sum() + foreground)
}

/// Renders and scores one state against a frame cache.
pub fn evaluate_state(state: &PoseParams, mesh: &TriangleMesh, cache: &LogRatioCache) -> f64 {
    let mask = rasterize_silhouette(&apply_pose(mesh, state), cache.width(), cache.height());
    // Dimensions match by construction.
    log_likelihood(&mask, cache).expect("mask rendered at cache dimensions")
}

/// Scores every state in parallel on the current rayon pool. Output order
/// follows input order, so results do not depend on the worker count.
pub fn evaluate_states(states: &[PoseParams], mesh: &TriangleMesh, cache: &LogRatioCache) -> Vec<f64> {
    states
        .par_iter()
        .map(|s| evaluate_state(s, mesh, cache))
        .collect()
}

/// Softmax of the log-likelihoods, stabilized by subtracting the maximum.
pub fn normalize_weights(set: &ParticleSet, log_liks: &[f64]) -> Result<ParticleSet> {
    if log_liks.len() != set.len() {
        return Err(Error::Internal(format!(
            "{} log-likelihoods for {} particles",
            log_liks.len(),
            set.len()
        )));
    }
    if log_liks.iter().any(|v| v.is_nan()) {
        return Err(Error::Internal("NaN log-likelihood".into()));
    }
    let max = log_liks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Internal(format!("degenerate log-likelihoods (max {max})")));
    }
    let exps: Vec<f64> = log_liks.iter().map(|&ll| (ll - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let particles = set
        .particles
        .iter()
        .zip(exps.iter().zip(log_liks))
        .map(|(p, (&e, &ll))| Particle {
            state: p.state,
            weight: e / sum,
            log_likelihood: Some(ll),
        })
        .collect();
    Ok(set.with_particles(particles))
}

/// Cumulative probabilities `c^1..c^N` (with `c^0 = 0` implied).
pub fn cumulative_weights(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|&w| {
            acc += w / total;
            acc
        })
        .collect()
}

/// Smallest 0-based index `j` with `cumulative[j] >= r`. Rounding can leave
/// the last entry just below 1; such draws go to the last particle with
/// nonzero probability.
pub fn select_index(cumulative: &[f64], r: f64) -> usize {
    let j = cumulative.partition_point(|&c| c < r);
    if j < cumulative.len() {
        return j;
    }
    let mut last = cumulative.len() - 1;
    while last > 0 && cumulative[last] == cumulative[last - 1] {
        last -= 1;
    }
    last
}

/// Multinomial resampling by inverting the cumulative distribution. The new
/// population has uniform weights.
pub fn resample(set: &ParticleSet, streams: &SeedStreams) -> ParticleSet {
    let mut rng = streams.rng(Stream::Resample, set.iteration, 0);
    // r in (0, 1] so zero-weight particles are never chosen.
    resample_with(set, || 1.0 - rng.random::<f64>())
}

/// Resampling with caller-supplied uniform draws on `[0, 1]`.
pub fn resample_with(set: &ParticleSet, mut draw: impl FnMut() -> f64) -> ParticleSet {
    let cumulative = cumulative_weights(&set.weights());
    let n = set.len();
    let w = 1.0 / n as f64;
    let particles = (0..n)
        .map(|_| {
            let chosen = set.particles[select_index(&cumulative, draw())];
            Particle { weight: w, ..chosen }
        })
        .collect();
    set.with_particles(particles)
}

/// Weighted arithmetic mean of every field, angles included.
pub fn expected_state(set: &ParticleSet) -> Result<PoseParams> {
    let total: f64 = set.particles.iter().map(|p| p.weight).sum();
    if !(total > 0.0) {
        return Err(Error::Internal("particle weights sum to zero".into()));
    }
    let mut acc = [0.0; PoseParams::FIELD_COUNT];
    for p in &set.particles {
        for (a, v) in acc.iter_mut().zip(p.state.to_array()) {
            *a += p.weight * v;
        }
    }
    Ok(PoseParams::from_array(acc.map(|a| a / total)))
}

/// Highest-weight particle; the lowest index wins ties.
pub fn map_particle(set: &ParticleSet) -> (usize, &Particle) {
    let mut best = 0;
    for (i, p) in set.particles.iter().enumerate().skip(1) {
        if p.weight > set.particles[best].weight {
            best = i;
        }
    }
    (best, &set.particles[best])
}

/// One full step: resample on the previous weights, jitter, score every
/// particle against `observed`, and normalize.
///
/// `model.total` must be the histogram of `observed`. Evaluation runs on the
/// current rayon pool; install a pool to control the worker count.
pub fn filter_update(
    set: &ParticleSet,
    observed: &Image,
    mesh: &TriangleMesh,
    model: &AppearanceModel,
    config: &FilterConfig,
    streams: &SeedStreams,
) -> Result<ParticleSet> {
    if observed.dims() != set.image_dims() {
        return Err(Error::DimensionMismatch {
            expected: set.image_dims(),
            actual: observed.dims(),
        });
    }
    let resampled = resample(set, streams);
    let moved = motion_step(&resampled, config, mesh, streams);
    let cache = build_cache(model, observed);
    let log_liks = evaluate_states(&moved.states(), mesh, &cache);
    let mut next = normalize_weights(&moved, &log_liks)?;
    next.iteration += 1;
    Ok(next)
}
