//! Intensity distributions and the per-frame likelihood cache.
//!
//! All products over pixels are carried out as sums of logs. Every histogram
//! is smoothed with a small additive floor so no intensity ever has zero
//! probability, which keeps every cached log finite.

use crate::error::{Error, Result};

pub const BINS: usize = 256;

/// Additive smoothing mass, as a fraction of the total pixel count, spread
/// evenly over all bins.
pub const HISTOGRAM_FLOOR_EPS: f64 = 1e-6;

const SUM_TOLERANCE: f64 = 1e-9;

/// 8-bit single-channel image, row-major, origin top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Converts interleaved RGB to luminance `round(0.299 R + 0.587 G + 0.114 B)`.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * 3,
                rgb.len()
            )));
        }
        let pixels = rgb
            .chunks_exact(3)
            .map(|p| {
                let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                y.round().min(255.0) as u8
            })
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Probability distribution over the 256 intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityHistogram {
    bins: [f64; BINS],
}

impl IntensityHistogram {
    /// Smoothed, normalized histogram of raw counts:
    /// `(count[v] + eps * N / 256) / (N + eps * N)`.
    pub fn from_counts(counts: &[u64; BINS]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("histogram of zero pixels".into()));
        }
        let n = total as f64;
        let floor = HISTOGRAM_FLOOR_EPS * n / BINS as f64;
        let denom = n + HISTOGRAM_FLOOR_EPS * n;
        let mut bins = [0.0; BINS];
        for (bin, &count) in bins.iter_mut().zip(counts) {
            *bin = (count as f64 + floor) / denom;
        }
        Ok(Self { bins })
    }

    /// Accepts externally supplied probabilities after checking they are
    /// strictly positive and sum to one.
    pub fn from_bins(values: &[f64]) -> Result<Self> {
        if values.len() != BINS {
            return Err(Error::InvalidHistogram(format!(
                "expected {BINS} bins, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidHistogram(format!(
                "bin {i} must be positive and finite, got {}",
                values[i]
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidHistogram(format!("bins sum to {sum}, not 1")));
        }
        let mut bins = [0.0; BINS];
        bins.copy_from_slice(values);
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64; BINS] {
        &self.bins
    }

    pub fn probability(&self, intensity: u8) -> f64 {
        self.bins[intensity as usize]
    }

    pub fn log_table(&self) -> [f64; BINS] {
        self.bins.map(f64::ln)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.bins.iter().map(|&p| p * p.ln()).sum::<f64>()
    }
}

fn count_pixels<'a>(images: impl IntoIterator<Item = &'a Image>) -> [u64; BINS] {
    let mut counts = [0u64; BINS];
    for image in images {
        for &p in image.pixels() {
            counts[p as usize] += 1;
        }
    }
    counts
}

/// Empirical background distribution pooled over frames of empty sky.
pub fn learn_background(frames: &[Image]) -> Result<IntensityHistogram> {
    if frames.is_empty() {
        return Err(Error::Empty("no background frames".into()));
    }
    if let Some(i) = frames.iter().position(Image::is_empty) {
        return Err(Error::Empty(format!("background frame {i} has no pixels")));
    }
    IntensityHistogram::from_counts(&count_pixels(frames))
}

/// Foreground distribution used when nothing is known about the object's
/// appearance.
pub fn uniform_foreground() -> IntensityHistogram {
    IntensityHistogram {
        bins: [1.0 / BINS as f64; BINS],
    }
}

/// Histogram of the whole observed frame, smoothed like the background.
pub fn total_histogram(observed: &Image) -> Result<IntensityHistogram> {
    if observed.is_empty() {
        return Err(Error::Empty("observed image has no pixels".into()));
    }
    IntensityHistogram::from_counts(&count_pixels([observed]))
}

/// The three distributions entering the measurement likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceModel {
    pub background: IntensityHistogram,
    pub foreground: IntensityHistogram,
    pub total: IntensityHistogram,
}

impl AppearanceModel {
    pub fn new(
        background: IntensityHistogram,
        foreground: IntensityHistogram,
        total: IntensityHistogram,
    ) -> Self {
        Self {
            background,
            foreground,
            total,
        }
    }

    /// Model for one frame: `total` is the histogram of `observed`.
    pub fn for_frame(
        background: &IntensityHistogram,
        foreground: &IntensityHistogram,
        observed: &Image,
    ) -> Result<Self> {
        Ok(Self::new(
            background.clone(),
            foreground.clone(),
            total_histogram(observed)?,
        ))
    }
}

/// Everything a particle needs from a frame: the log of the all-background
/// likelihood and, per pixel, the log foreground/background ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioCache {
    width: usize,
    height: usize,
    log_bg_minus_total_sum: f64,
    ratio_image: Vec<f64>,
}

impl LogRatioCache {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// `sum_x [log bg(D(x)) - log total(D(x))]`.
    pub fn log_bg_minus_total_sum(&self) -> f64 {
        self.log_bg_minus_total_sum
    }

    /// Per pixel `log fg(D(x)) - log bg(D(x))`, row-major.
    pub fn ratio_image(&self) -> &[f64] {
        &self.ratio_image
    }
}

pub fn build_cache(model: &AppearanceModel, observed: &Image) -> LogRatioCache {
    let log_bg = model.background.log_table();
    let log_fg = model.foreground.log_table();
    let log_total = model.total.log_table();

    let mut ratio_by_intensity = [0.0; BINS];
    let mut base_by_intensity = [0.0; BINS];
    for v in 0..BINS {
        ratio_by_intensity[v] = log_fg[v] - log_bg[v];
        base_by_intensity[v] = log_bg[v] - log_total[v];
    }

    let mut base = 0.0;
    let ratio_image = observed
        .pixels()
        .iter()
        .map(|&p| {
            base += base_by_intensity[p as usize];
            ratio_by_intensity[p as usize]
        })
        .collect();

    LogRatioCache {
        width: observed.width(),
        height: observed.height(),
        log_bg_minus_total_sum: base,
        ratio_image,
    }
}
