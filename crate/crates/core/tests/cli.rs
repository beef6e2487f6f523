use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use posefit::io::{read_histogram, read_track, read_truth, write_pgm};
use posefit::Image;

fn posefit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posefit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn cube() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/unit_cube.mesh")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scene(dir: &Path, frames: usize, fg_mean: u8) -> PathBuf {
    let path = dir.join("scene.txt");
    let text = format!(
        "mesh = {}\nwidth = 48\nheight = 40\nbackground_mean = 30\nbackground_std = 10\n\
         foreground_mean = {fg_mean}\nforeground_std = 10\nnoise_seed = 11\n\
         background_frames = 4\nframes = {frames}\npose = 0.3 0.2 0.1 24 20 12\n",
        cube().display()
    );
    fs::write(&path, text).unwrap();
    path
}

fn write_track_config(dir: &Path, data: &Path, particles: usize) -> PathBuf {
    let path = dir.join("track.cfg");
    let text = format!(
        "mesh = {}\nframes = {}\nbackground_frames = {}\nparticle_count = {particles}\nseed = 3\n",
        cube().display(),
        data.join("frames").display(),
        data.join("background").display()
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn learn_background_from_constant_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("sky");
    fs::create_dir(&frames).unwrap();
    for k in 0..3 {
        write_pgm(&Image::filled(8, 6, 40), frames.join(format!("f{k}.pgm"))).unwrap();
    }
    let out = dir.path().join("bg.hist");
    let run = posefit(&["learn-background", s(&frames), "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let hist = read_histogram(&out).unwrap();
    assert!(hist.probability(40) > 0.999);
}

#[test]
fn learn_background_empty_dir_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("nothing-here");
    fs::create_dir(&empty).unwrap();
    let run = posefit(&["learn-background", s(&empty), "--out", s(&dir.path().join("x.hist"))]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("nothing-here"), "{}", stderr(&run));
}

#[test]
fn learned_background_matches_synthetic_noise() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 1, 180);
    let data = dir.path().join("data");
    assert!(posefit(&["synth", s(&scene), "--out", s(&data)]).status.success());
    let out = dir.path().join("bg.hist");
    let run = posefit(&["learn-background", s(&data.join("background")), "--out", s(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));

    let hist = read_histogram(&out).unwrap();
    let bins = hist.bins();
    let mean: f64 = bins.iter().enumerate().map(|(v, p)| v as f64 * p).sum();
    let var: f64 = bins.iter().enumerate().map(|(v, p)| (v as f64 - mean).powi(2) * p).sum();
    // 4 frames of 48x40 pixels: the sample moments sit well within these bounds.
    assert!((mean - 30.0).abs() < 0.5, "mean {mean}");
    assert!((var.sqrt() - 10.0).abs() < 0.5, "std {}", var.sqrt());
}

#[test]
fn synth_writes_frames_and_truth_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 10, 180);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = posefit(&["synth", s(&scene), "--out", s(out)]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    }
    assert_eq!(fs::read_dir(a.join("frames")).unwrap().count(), 10);
    assert_eq!(read_truth(a.join("truth.txt")).unwrap().len(), 10);
    for sub in ["frames", "background", "masks"] {
        for entry in fs::read_dir(a.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            let twin = b.join(sub).join(path.file_name().unwrap());
            assert_eq!(fs::read(&path).unwrap(), fs::read(twin).unwrap());
        }
    }
    assert_eq!(
        fs::read(a.join("truth.txt")).unwrap(),
        fs::read(b.join("truth.txt")).unwrap()
    );
}

#[test]
fn synth_rejects_equal_means() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 2, 30);
    let run = posefit(&["synth", s(&scene), "--out", s(&dir.path().join("o"))]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn track_writes_one_row_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 100, 180);
    let data = dir.path().join("data");
    assert!(posefit(&["synth", s(&scene), "--out", s(&data)]).status.success());
    let cfg = write_track_config(dir.path(), &data, 50);
    let run_dir = dir.path().join("run");
    let run = posefit(&["track", "--config", s(&cfg), "--out", s(&run_dir)]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let rows = read_track(run_dir.join("track.csv")).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().enumerate().all(|(k, r)| r.frame == k));
}

#[test]
fn track_names_a_frame_of_the_wrong_size() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 3, 180);
    let data = dir.path().join("data");
    assert!(posefit(&["synth", s(&scene), "--out", s(&data)]).status.success());
    write_pgm(
        &Image::filled(10, 10, 30),
        data.join("frames").join("frame_000001.pgm"),
    )
    .unwrap();
    let cfg = write_track_config(dir.path(), &data, 20);
    let run = posefit(&["track", "--config", s(&cfg), "--out", s(&dir.path().join("run"))]);
    assert_ne!(run.status.code(), Some(0));
    assert!(stderr(&run).contains("frame 1"), "{}", stderr(&run));
}

#[test]
fn track_missing_config_is_a_usage_error() {
    let run = posefit(&["track", "--config", "/nonexistent/track.cfg"]);
    assert_ne!(run.status.code(), Some(0));
}

#[test]
fn bench_single_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 1, 180);
    let data = dir.path().join("data");
    assert!(posefit(&["synth", s(&scene), "--out", s(&data)]).status.success());
    let cfg = write_track_config(dir.path(), &data, 100);
    let out = dir.path().join("bench");
    let run = posefit(&["bench", "--config", s(&cfg), "--threads", "1", "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,"));
}
