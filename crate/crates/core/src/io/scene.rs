//! Synthetic scene description and ground-truth files.
//!
//! Scene files use the same `key = value` syntax as run configs:
//!
//! ```text
//! mesh = satellite.mesh
//! width = 128
//! height = 128
//! background_mean = 30
//! background_std = 10
//! foreground_mean = 180
//! foreground_std = 10
//! noise_seed = 7
//! background_frames = 5           # default 5
//! frames = 50                     # repeat a single pose this many times
//! pose = 0.6 -0.4 0.9 64 60 18 0  # yaw pitch roll tx ty scale [articulation]
//! ```
//!
//! `pose` may be repeated, one line per frame, in which case `frames` must be
//! absent or equal to the number of pose lines. Angles are radians.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::keyvalue::{parse_entries, Fields};
use crate::error::{Error, Result};
use crate::geometry::{load_mesh, PoseParams};
use crate::synth::SceneSpec;

pub const DEFAULT_BACKGROUND_FRAMES: usize = 5;

const KEYS: &[&str] = &[
    "mesh",
    "width",
    "height",
    "background_mean",
    "background_std",
    "foreground_mean",
    "foreground_std",
    "noise_seed",
    "background_frames",
    "frames",
    "pose",
];

/// A scene plus how many background-only frames to generate for it.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub spec: SceneSpec,
    pub background_frames: usize,
}

pub fn read_scene(path: impl AsRef<Path>) -> Result<SceneFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text, path)
}

pub fn parse_scene(text: &str, origin: &Path) -> Result<SceneFile> {
    let fields = Fields::new(origin, parse_entries(text, origin)?, KEYS, &["pose"])?;

    let mut trajectory = Vec::new();
    for entry in fields.all("pose") {
        let values: Vec<f64> = entry
            .value
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| fields.invalid(entry, "expected numbers"))?;
        let mut a = [0.0; 7];
        match values.len() {
            6 | 7 => a[..values.len()].copy_from_slice(&values),
            n => return Err(fields.invalid(entry, format!("expected 6 or 7 numbers, found {n}"))),
        }
        trajectory.push(PoseParams::from_array(a));
    }
    if trajectory.is_empty() {
        return Err(Error::Config(format!("{}: no `pose` lines", origin.display())));
    }
    if let Some(frames) = fields.opt::<usize>("frames")? {
        if trajectory.len() == 1 {
            trajectory = vec![trajectory[0]; frames];
        } else if frames != trajectory.len() {
            return Err(Error::Config(format!(
                "`frames = {frames}` but {} pose lines given",
                trajectory.len()
            )));
        }
    }

    let mesh_path = fields.required_path("mesh")?;
    let mesh = load_mesh(&mesh_path)?;
    let spec = SceneSpec {
        mesh,
        trajectory,
        width: fields.required("width")?,
        height: fields.required("height")?,
        background_mean: fields.required("background_mean")?,
        background_std: fields.required("background_std")?,
        foreground_mean: fields.required("foreground_mean")?,
        foreground_std: fields.required("foreground_std")?,
        noise_seed: fields.get_or("noise_seed", 0u64)?,
    };
    spec.validate()?;
    Ok(SceneFile {
        spec,
        background_frames: fields.get_or("background_frames", DEFAULT_BACKGROUND_FRAMES)?,
    })
}

/// One line per frame: `k yaw pitch roll tx ty scale articulation`, values in
/// shortest round-trip form.
pub fn encode_truth(trajectory: &[PoseParams]) -> String {
    let mut out = String::new();
    for (k, pose) in trajectory.iter().enumerate() {
        write!(out, "{k}").expect("writing to a String");
        for v in pose.to_array() {
            write!(out, " {v:?}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn write_truth(trajectory: &[PoseParams], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_truth(trajectory)).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<PoseParams>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, n + 1, "expected numbers"))?;
        if values.len() != 8 {
            return Err(Error::parse(path, n + 1, format!("expected 8 values, found {}", values.len())));
        }
        let mut a = [0.0; 7];
        a.copy_from_slice(&values[1..]);
        out.push(PoseParams::from_array(a));
    }
    Ok(out)
}
