//! Command implementations behind the `posefit` binary.
//!
//! Exit codes: 0 success, 1 processing failure, 2 usage or configuration
//! error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::appearance::{
    build_cache, learn_background, uniform_foreground, AppearanceModel, Image, IntensityHistogram,
};
use crate::error::{Error, Result};
use crate::filter::{
    evaluate_states, expected_state, filter_update, init_particles, map_particle,
};
use crate::geometry::{load_mesh, render_silhouette, SilhouetteMask};
use crate::io::{
    list_frames, read_config, read_frames, read_histogram, read_pnm, read_scene, write_histogram,
    write_pgm, write_track, write_truth, BackgroundSource, ForegroundSource, RunConfig, TrackRow,
};
use crate::synth::{render_background_frames, render_frame};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_FAILURE
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn thread_pool(threads: usize) -> Result<ThreadPool> {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start {threads} workers: {e}")))
}

fn frame_error(frame: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Frame {
        frame,
        source: Box::new(e),
    }
}

/// Learns the background histogram from every PGM in `frames_dir` and writes
/// it to `out`.
pub fn learn_background_cmd(frames_dir: &Path, out: &Path) -> Result<IntensityHistogram> {
    let frames = read_frames(frames_dir)?;
    let hist = learn_background(&frames)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_histogram(&hist, out)?;
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOutput {
    pub frames: Vec<PathBuf>,
    pub background_frames: Vec<PathBuf>,
    pub masks: Vec<PathBuf>,
    pub truth: PathBuf,
}

fn mask_image(mask: &SilhouetteMask) -> Image {
    let pixels = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    Image::new(mask.width(), mask.height(), pixels).expect("mask dimensions")
}

/// Renders a scene file into `out_dir`:
///
/// - `frames/frame_NNNNNN.pgm`: observed frames
/// - `background/background_NNNNNN.pgm`: object-free frames
/// - `masks/mask_NNNNNN.pgm`: ground-truth silhouettes (0 / 255)
/// - `truth.txt`: ground-truth poses
///
/// `seed` replaces the scene's `noise_seed` when given.
pub fn synth_cmd(scene_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<SynthOutput> {
    let mut scene = read_scene(scene_path)?;
    if let Some(seed) = seed {
        scene.spec.noise_seed = seed;
    }
    let spec = &scene.spec;
    let dirs = ["frames", "background", "masks"].map(|d| out_dir.join(d));
    for dir in &dirs {
        create_dir(dir)?;
    }

    let mut out = SynthOutput {
        frames: Vec::new(),
        background_frames: Vec::new(),
        masks: Vec::new(),
        truth: out_dir.join("truth.txt"),
    };
    for k in 0..spec.frame_count() {
        let frame_path = dirs[0].join(format!("frame_{k:06}.pgm"));
        write_pgm(&render_frame(spec, k)?, &frame_path)?;
        let mask_path = dirs[2].join(format!("mask_{k:06}.pgm"));
        write_pgm(&mask_image(&spec.truth_mask(k)?), &mask_path)?;
        out.frames.push(frame_path);
        out.masks.push(mask_path);
    }
    for (k, image) in render_background_frames(spec, scene.background_frames)
        .iter()
        .enumerate()
    {
        let path = dirs[1].join(format!("background_{k:06}.pgm"));
        write_pgm(image, &path)?;
        out.background_frames.push(path);
    }
    write_truth(&spec.trajectory, &out.truth)?;
    Ok(out)
}

/// Command-line overrides applied on top of a run config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub dump_overlays: bool,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunOverrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(seed) = self.seed {
            cfg.filter.rng_seed = seed;
        }
        if self.dump_overlays {
            cfg.dump_overlays = true;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(threads) = self.threads {
            cfg.threads = threads;
        }
        cfg
    }
}

fn load_appearance(cfg: &RunConfig) -> Result<(IntensityHistogram, IntensityHistogram)> {
    let background = match &cfg.background {
        BackgroundSource::Histogram(p) => read_histogram(p)?,
        BackgroundSource::Frames(dir) => learn_background(&read_frames(dir)?)?,
    };
    let foreground = match &cfg.foreground {
        ForegroundSource::Uniform => uniform_foreground(),
        ForegroundSource::Histogram(p) => read_histogram(p)?,
    };
    Ok((background, foreground))
}

/// Observed frame with the silhouette pixels brightened to `128 + v / 2`.
pub fn overlay(image: &Image, mask: &SilhouetteMask) -> Image {
    let pixels = image
        .pixels()
        .iter()
        .zip(mask.bits())
        .map(|(&v, &fg)| if fg { 128 + v / 2 } else { v })
        .collect();
    Image::new(image.width(), image.height(), pixels).expect("same dimensions")
}

#[derive(Debug, Clone)]
pub struct TrackOutput {
    pub rows: Vec<TrackRow>,
    pub csv: PathBuf,
    pub overlays: Vec<PathBuf>,
}

pub fn track_cmd(config_path: &Path, overrides: &RunOverrides) -> Result<TrackOutput> {
    let cfg = overrides.apply(read_config(config_path)?);
    run_track(&cfg)
}

/// Initializes once from the first frame's size, then runs one filter update
/// per frame. Writes `track.csv` (and `overlays/` when enabled) under the run
/// directory.
pub fn run_track(cfg: &RunConfig) -> Result<TrackOutput> {
    cfg.check_paths()?;
    let mesh = load_mesh(&cfg.mesh)?;
    let frame_paths = list_frames(&cfg.frames)?;
    let (background, foreground) = load_appearance(cfg)?;
    let pool = thread_pool(cfg.threads)?;

    let first = read_pnm(&frame_paths[0]).map_err(frame_error(0))?;
    let (width, height) = first.dims();
    let mut set = init_particles(&cfg.filter, width, height, &mesh)?;
    let streams = cfg.filter.streams();

    let overlay_dir = cfg.out_dir.join("overlays");
    create_dir(&cfg.out_dir)?;
    if cfg.dump_overlays {
        create_dir(&overlay_dir)?;
    }

    let mut rows = Vec::with_capacity(frame_paths.len());
    let mut overlays = Vec::new();
    let mut first = Some(first);
    for (k, path) in frame_paths.iter().enumerate() {
        let image = match first.take() {
            Some(image) => image,
            None => read_pnm(path).map_err(frame_error(k))?,
        };
        let step = || -> Result<_> {
            let model = AppearanceModel::for_frame(&background, &foreground, &image)?;
            pool.install(|| filter_update(&set, &image, &mesh, &model, &cfg.filter, &streams))
        };
        set = step().map_err(frame_error(k))?;

        let (_, map) = map_particle(&set);
        rows.push(TrackRow {
            frame: k,
            expected: expected_state(&set).map_err(frame_error(k))?,
            map: map.state,
            map_log_likelihood: map.log_likelihood.unwrap_or(f64::NAN),
        });
        if cfg.dump_overlays {
            let mask = render_silhouette(&mesh, &map.state, width, height);
            let path = overlay_dir.join(format!("overlay_{k:06}.pgm"));
            write_pgm(&overlay(&image, &mask), &path)?;
            overlays.push(path);
        }
    }

    let csv = cfg.out_dir.join("track.csv");
    write_track(&rows, &csv)?;
    Ok(TrackOutput {
        rows,
        csv,
        overlays,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub threads: usize,
    pub particles_per_second: f64,
    /// Relative to the first worker count in the list.
    pub speedup: f64,
    /// Log-likelihoods bit-identical to those of the first worker count.
    pub identical: bool,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub csv: PathBuf,
}

/// Minimum measured wall time per worker count.
pub const BENCH_MIN_SECONDS: f64 = 1.0;

pub fn bench_cmd(config_path: &Path, threads: &[usize], overrides: &RunOverrides) -> Result<BenchOutput> {
    let cfg = overrides.apply(read_config(config_path)?);
    run_bench(&cfg, threads, BENCH_MIN_SECONDS)
}

/// Scores the initial particle batch against the first frame once per worker
/// count, repeating until `min_seconds` have elapsed. Writes `bench.csv`
/// under the run directory.
pub fn run_bench(cfg: &RunConfig, threads: &[usize], min_seconds: f64) -> Result<BenchOutput> {
    if threads.is_empty() || threads.contains(&0) {
        return Err(Error::Config("thread counts must be a non-empty list of positive integers".into()));
    }
    cfg.check_paths()?;
    let mesh = load_mesh(&cfg.mesh)?;
    let frame_paths = list_frames(&cfg.frames)?;
    let image = read_pnm(&frame_paths[0]).map_err(frame_error(0))?;
    let (background, foreground) = load_appearance(cfg)?;
    let model = AppearanceModel::for_frame(&background, &foreground, &image)?;
    let cache = build_cache(&model, &image);
    let states = init_particles(&cfg.filter, image.width(), image.height(), &mesh)?.states();

    let mut rows: Vec<BenchRow> = Vec::with_capacity(threads.len());
    let mut reference: Option<Vec<f64>> = None;
    for &t in threads {
        let pool = thread_pool(t)?;
        // Warm-up pass doubles as the determinism sample.
        let lls = pool.install(|| evaluate_states(&states, &mesh, &cache));
        let start = Instant::now();
        let mut evaluated = 0usize;
        while evaluated == 0 || start.elapsed().as_secs_f64() < min_seconds {
            let again = pool.install(|| evaluate_states(&states, &mesh, &cache));
            debug_assert_eq!(again.len(), states.len());
            evaluated += states.len();
        }
        let rate = evaluated as f64 / start.elapsed().as_secs_f64();
        let identical = match &reference {
            None => {
                reference = Some(lls);
                true
            }
            Some(r) => r.iter().zip(&lls).all(|(a, b)| a.to_bits() == b.to_bits()),
        };
        let base = rows.first().map_or(rate, |r| r.particles_per_second);
        rows.push(BenchRow {
            threads: t,
            particles_per_second: rate,
            speedup: rate / base,
            identical,
        });
    }

    create_dir(&cfg.out_dir)?;
    let csv = cfg.out_dir.join("bench.csv");
    let mut text = String::from("threads,particles_per_second,speedup,identical\n");
    for r in &rows {
        writeln!(
            text,
            "{},{:.1},{:.3},{}",
            r.threads, r.particles_per_second, r.speedup, r.identical
        )
        .expect("writing to a String");
    }
    fs::write(&csv, text).map_err(|e| Error::io(&csv, e))?;
    Ok(BenchOutput { rows, csv })
}

/// Parses `1,2,4`.
pub fn parse_thread_list(s: &str) -> Result<Vec<usize>> {
    let list: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("invalid thread list `{s}`")))?;
    if list.is_empty() || list.contains(&0) {
        return Err(Error::Config(format!("invalid thread list `{s}`")));
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_lists() {
        assert_eq!(parse_thread_list("1").unwrap(), vec![1]);
        assert_eq!(parse_thread_list("1, 4").unwrap(), vec![1, 4]);
        assert!(parse_thread_list("").is_err());
        assert!(parse_thread_list("0").is_err());
        assert!(parse_thread_list("a,2").is_err());
    }

    #[test]
    fn overlay_brightens_silhouette() {
        let image = Image::new(2, 1, vec![10, 10]).unwrap();
        let mask = SilhouetteMask::from_bits(2, 1, vec![true, false]).unwrap();
        assert_eq!(overlay(&image, &mask).pixels(), &[133, 10]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::NoFrames("d".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Internal("x".into())), EXIT_FAILURE);
        let nested = Error::Frame {
            frame: 3,
            source: Box::new(Error::DimensionMismatch {
                expected: (1, 1),
                actual: (2, 2),
            }),
        };
        assert_eq!(exit_code(&nested), EXIT_FAILURE);
        assert!(nested.to_string().contains("frame 3"));
    }
}
