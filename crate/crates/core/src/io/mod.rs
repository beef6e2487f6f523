//! On-disk formats.

mod config;
mod hist;
mod keyvalue;
mod pgm;
mod scene;
mod track;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_config, read_config, BackgroundSource, ForegroundSource, RunConfig, DEFAULT_PARTICLE_COUNT};
pub use hist::{decode_histogram, encode_histogram, read_histogram, write_histogram, HISTOGRAM_HEADER};
pub use pgm::{decode_pgm, decode_pnm, encode_pgm, read_pgm, read_pnm, write_pgm};
pub use scene::{encode_truth, parse_scene, read_scene, read_truth, write_truth, SceneFile, DEFAULT_BACKGROUND_FRAMES};
pub use track::{encode_track, format_significant, read_track, write_track, TrackRow, TRACK_HEADER};

use crate::appearance::Image;
use crate::error::{Error, Result};

/// `*.pgm` files directly inside `dir`, in lexicographic order.
pub fn list_frames(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_pgm = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            frames.push(path);
        }
    }
    frames.sort();
    if frames.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    Ok(frames)
}

/// Reads every frame of [`list_frames`].
pub fn read_frames(dir: impl AsRef<Path>) -> Result<Vec<Image>> {
    list_frames(dir)?
        .iter()
        .enumerate()
        .map(|(k, p)| read_pnm(p).map_err(|e| Error::Frame { frame: k, source: Box::new(e) }))
        .collect()
}
