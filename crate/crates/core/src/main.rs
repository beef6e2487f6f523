use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use posefit::cli::{self, RunOverrides};
use posefit::Error;

#[derive(Parser)]
#[command(name = "posefit", version, about = "Silhouette-based pose estimation with a particle filter")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the background intensity histogram from empty-sky frames.
    LearnBackground {
        /// Directory of PGM frames without the object.
        frames_dir: PathBuf,
        /// Output histogram file (BGHIST v1).
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a synthetic sequence with ground truth.
    Synth {
        /// Scene description file.
        scene: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scene's noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Track the object through a frame sequence.
    Track {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker count for particle evaluation (0 = one per core).
        #[arg(long)]
        threads: Option<usize>,
        /// Write per-frame overlays of the highest-weight silhouette.
        #[arg(long)]
        dump_overlays: bool,
        /// Run directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure per-particle likelihood throughput at several worker counts.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated worker counts, e.g. `1,2,4`.
        #[arg(long, default_value = "1")]
        threads: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::LearnBackground { frames_dir, out } => {
            cli::learn_background_cmd(&frames_dir, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Synth { scene, out, seed } => {
            let written = cli::synth_cmd(&scene, &out, seed)?;
            println!(
                "wrote {} frames, {} background frames and {}",
                written.frames.len(),
                written.background_frames.len(),
                written.truth.display()
            );
        }
        Command::Track {
            config,
            seed,
            threads,
            dump_overlays,
            out,
        } => {
            let overrides = RunOverrides {
                seed,
                dump_overlays,
                out,
                threads,
            };
            let result = cli::track_cmd(&config, &overrides)?;
            if let Some(last) = result.rows.last() {
                let m = last.map;
                println!(
                    "frame {}: yaw {:.4} pitch {:.4} roll {:.4} tx {:.2} ty {:.2} scale {:.3} artic {:.4} (log-lik {:.2})",
                    last.frame, m.yaw, m.pitch, m.roll, m.tx, m.ty, m.scale, m.articulation, last.map_log_likelihood
                );
            }
            println!("wrote {}", result.csv.display());
        }
        Command::Bench {
            config,
            threads,
            seed,
            out,
        } => {
            let threads = cli::parse_thread_list(&threads)?;
            let overrides = RunOverrides {
                seed,
                out,
                ..Default::default()
            };
            let result = cli::bench_cmd(&config, &threads, &overrides)?;
            println!("{:>8} {:>16} {:>8} {:>10}", "threads", "particles/s", "speedup", "identical");
            for r in &result.rows {
                println!(
                    "{:>8} {:>16.1} {:>8.2} {:>10}",
                    r.threads, r.particles_per_second, r.speedup, r.identical
                );
            }
            println!("wrote {}", result.csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(()) => ExitCode::from(cli::EXIT_OK as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
