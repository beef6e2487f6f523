//! Tracking run configuration.
//!
//! ```text
//! mesh = satellite.mesh          # required
//! frames = frames/               # required; *.pgm in lexicographic order
//! background = background.hist   # BGHIST v1 file, or:
//! background_frames = bg/        # directory of empty-sky frames
//! foreground = uniform           # or a BGHIST v1 file
//! particle_count = 2000
//! jitter_angle = 0.05
//! jitter_translation = 2.0
//! jitter_log_scale = 0.05
//! jitter_articulation = 0.05
//! prior_min_diagonal = 0.1
//! prior_max_diagonal = 1.0
//! prior_min_visible = 0.5
//! seed = 0
//! threads = 0                    # 0 = one worker per core
//! out = run                      # run directory
//! dump_overlays = false
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use super::keyvalue::{parse_entries, Fields};
use crate::error::{Error, Result};
use crate::filter::{FilterConfig, JitterStd, PriorBounds};

pub const DEFAULT_PARTICLE_COUNT: usize = 2000;

const KEYS: &[&str] = &[
    "mesh",
    "frames",
    "background",
    "background_frames",
    "foreground",
    "particle_count",
    "jitter_angle",
    "jitter_translation",
    "jitter_log_scale",
    "jitter_articulation",
    "prior_min_diagonal",
    "prior_max_diagonal",
    "prior_min_visible",
    "seed",
    "threads",
    "out",
    "dump_overlays",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackgroundSource {
    Histogram(PathBuf),
    Frames(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForegroundSource {
    Uniform,
    Histogram(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: PathBuf,
    pub frames: PathBuf,
    pub background: BackgroundSource,
    pub foreground: ForegroundSource,
    pub filter: FilterConfig,
    /// Worker count for particle evaluation; 0 means one per core.
    pub threads: usize,
    pub out_dir: PathBuf,
    pub dump_overlays: bool,
}

impl RunConfig {
    /// Checks that every input path exists.
    pub fn check_paths(&self) -> Result<()> {
        let mut inputs = vec![("mesh", &self.mesh, false), ("frames", &self.frames, true)];
        match &self.background {
            BackgroundSource::Histogram(p) => inputs.push(("background", p, false)),
            BackgroundSource::Frames(p) => inputs.push(("background_frames", p, true)),
        }
        if let ForegroundSource::Histogram(p) = &self.foreground {
            inputs.push(("foreground", p, false));
        }
        for (key, path, dir) in inputs {
            let ok = if dir { path.is_dir() } else { path.is_file() };
            if !ok {
                let kind = if dir { "directory" } else { "file" };
                return Err(Error::Config(format!(
                    "`{key}`: {kind} {} not found",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let fields = Fields::new(origin, parse_entries(text, origin)?, KEYS, &[])?;

    let background = match (fields.path("background"), fields.path("background_frames")) {
        (Some(p), None) => BackgroundSource::Histogram(p),
        (None, Some(p)) => BackgroundSource::Frames(p),
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "set only one of `background` and `background_frames`".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(format!(
                "{}: missing required key `background` (or `background_frames`)",
                origin.display()
            )))
        }
    };
    let foreground = match fields.opt::<String>("foreground")? {
        None => ForegroundSource::Uniform,
        Some(v) if v == "uniform" => ForegroundSource::Uniform,
        Some(_) => ForegroundSource::Histogram(fields.path("foreground").expect("present")),
    };

    let defaults = JitterStd::default();
    let prior = PriorBounds::default();
    // Parsed as i64 first so a negative count gets a validation message.
    let count: i64 = fields.get_or("particle_count", DEFAULT_PARTICLE_COUNT as i64)?;
    if count < 1 {
        return Err(Error::Config(format!("particle_count must be at least 1, got {count}")));
    }
    let filter = FilterConfig {
        particle_count: count as usize,
        jitter: JitterStd {
            angle: fields.get_or("jitter_angle", defaults.angle)?,
            translation: fields.get_or("jitter_translation", defaults.translation)?,
            log_scale: fields.get_or("jitter_log_scale", defaults.log_scale)?,
            articulation: fields.get_or("jitter_articulation", defaults.articulation)?,
        },
        bounds: PriorBounds {
            min_diagonal: fields.get_or("prior_min_diagonal", prior.min_diagonal)?,
            max_diagonal: fields.get_or("prior_max_diagonal", prior.max_diagonal)?,
            min_visible: fields.get_or("prior_min_visible", prior.min_visible)?,
        },
        rng_seed: fields.get_or("seed", 0u64)?,
    };
    filter.validate()?;

    Ok(RunConfig {
        mesh: fields.required_path("mesh")?,
        frames: fields.required_path("frames")?,
        background,
        foreground,
        filter,
        threads: fields.get_or("threads", 0usize)?,
        out_dir: fields.path("out").unwrap_or_else(|| super::keyvalue::resolve(origin, "run")),
        dump_overlays: fields.get_or("dump_overlays", false)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("/cfg/run.cfg"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("mesh = m.mesh\nframes = f\nbackground = bg.hist\n").unwrap();
        assert_eq!(c.mesh, PathBuf::from("/cfg/m.mesh"));
        assert_eq!(c.frames, PathBuf::from("/cfg/f"));
        assert_eq!(c.background, BackgroundSource::Histogram("/cfg/bg.hist".into()));
        assert_eq!(c.foreground, ForegroundSource::Uniform);
        assert_eq!(c.filter, FilterConfig::new(DEFAULT_PARTICLE_COUNT, 0));
        assert_eq!(c.threads, 0);
        assert_eq!(c.out_dir, PathBuf::from("/cfg/run"));
        assert!(!c.dump_overlays);
    }

    #[test]
    fn full_fixture_echo() {
        let c = read_config(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/full.cfg")).unwrap();
        let dir = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"));
        assert_eq!(c.mesh, dir.join("unit_cube.mesh"));
        assert_eq!(c.frames, dir.join("frames"));
        assert_eq!(c.background, BackgroundSource::Frames(dir.join("bg")));
        assert_eq!(c.foreground, ForegroundSource::Histogram(PathBuf::from("/tmp/fg.hist")));
        assert_eq!(c.filter.particle_count, 321);
        assert_eq!(
            c.filter.jitter,
            JitterStd {
                angle: 0.01,
                translation: 1.5,
                log_scale: 0.02,
                articulation: 0.03
            }
        );
        assert_eq!(
            c.filter.bounds,
            PriorBounds {
                min_diagonal: 0.2,
                max_diagonal: 0.9,
                min_visible: 0.75
            }
        );
        assert_eq!(c.filter.rng_seed, 123456789);
        assert_eq!(c.threads, 3);
        assert_eq!(c.out_dir, PathBuf::from("/tmp/posefit-run"));
        assert!(c.dump_overlays);
    }

    #[test]
    fn negative_particle_count() {
        let err = parse("mesh = m\nframes = f\nbackground = b\nparticle_count = -5\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("particle_count")), "{err}");
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse("mesh = m\nframes = f\nbackground = b\nparticles = 5\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `particles`"), "{err}");
        assert!(err.to_string().contains(":4:"), "{err}");

        let err = parse("frames = f\nbackground = b\n").unwrap_err();
        assert!(err.to_string().contains("`mesh`"), "{err}");

        let err = parse("mesh = m\nframes = f\n").unwrap_err();
        assert!(err.to_string().contains("background"), "{err}");
    }

    #[test]
    fn invalid_values() {
        assert!(parse("mesh = m\nframes = f\nbackground = b\nseed = x\n").is_err());
        assert!(parse("mesh = m\nframes = f\nbackground = b\njitter_angle = -1\n").is_err());
        assert!(parse("mesh = m\nframes = f\nbackground = b\nbackground_frames = d\n").is_err());
        assert!(parse("mesh = m\nmesh = n\nframes = f\nbackground = b\n").is_err());
        assert!(matches!(
            parse("mesh = m\nframes f\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn missing_paths_detected() {
        let c = parse("mesh = /nonexistent/m\nframes = /\nbackground = b\n").unwrap();
        let err = c.check_paths().unwrap_err();
        assert!(err.to_string().contains("mesh"), "{err}");
    }
}
