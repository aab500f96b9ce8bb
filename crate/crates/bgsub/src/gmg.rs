//! Per-pixel quantized-color histogram model with a Bayesian decision rule
//! and a median-filter noise-removal stage (GMG).
//!
//! The model runs in two stages. For the first `initialization_frames` frames
//! it only accumulates histogram weight and every output mask is all-black.
//! Afterwards each pixel is scored by the posterior foreground estimate
//! `1 - weight(bin)/total` before its histogram is updated with exponential
//! decay.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask, LABEL_BACKGROUND, LABEL_FOREGROUND};
use crate::subtractor::{band_rows, check_dimensions, BackgroundSubtractor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmgParams {
    /// Frames consumed before any pixel may be labelled foreground.
    pub initialization_frames: u32,
    /// Posterior threshold above which a pixel is labelled foreground, in (0, 1).
    pub decision_threshold: f64,
    /// Number of quantization bins for intensities, 1..=256.
    pub quantization_levels: u16,
    /// Exponential decay rate applied to histogram weights after initialization.
    pub learning_rate: f64,
    /// Maximum histogram entries per pixel; the lightest entry is evicted
    /// when a new bin arrives at capacity.
    pub max_features: usize,
    /// Radius of the square median filter applied to the raw labels;
    /// 0 disables the filter stage.
    pub smoothing_radius: u32,
}

impl Default for GmgParams {
    fn default() -> Self {
        Self {
            initialization_frames: 120,
            decision_threshold: 0.8,
            quantization_levels: 16,
            learning_rate: 0.025,
            max_features: 64,
            smoothing_radius: 7,
        }
    }
}

impl GmgParams {
    pub fn validate(&self) -> Result<()> {
        if self.initialization_frames < 1 {
            return Err(Error::invalid_parameter(
                "initialization_frames",
                "must be at least 1",
            ));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::invalid_parameter(
                "decision_threshold",
                format!("{} is outside (0, 1)", self.decision_threshold),
            ));
        }
        if self.quantization_levels < 1 || self.quantization_levels > 256 {
            return Err(Error::invalid_parameter(
                "quantization_levels",
                format!("{} is outside 1..=256", self.quantization_levels),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(Error::invalid_parameter(
                "learning_rate",
                format!("{} is outside (0, 1)", self.learning_rate),
            ));
        }
        if self.max_features < 1 {
            return Err(Error::invalid_parameter(
                "max_features",
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Quantization bin for an intensity: `floor(x * levels / 256)`, in `[0, levels)`.
pub fn quantize(x: u8, levels: u16) -> u8 {
    debug_assert!((1..=256).contains(&levels));
    ((u32::from(x) * u32::from(levels)) / 256) as u8
}

/// One weighted bin of a per-pixel histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramEntry {
    pub bin: u8,
    pub weight: f64,
}

/// Per-pixel GMG model over a fixed frame size.
#[derive(Debug)]
pub struct Gmg {
    params: GmgParams,
    width: u32,
    height: u32,
    frames_seen: u64,
    histograms: Vec<Vec<HistogramEntry>>,
    workers: usize,
}

#[derive(Clone, Copy)]
struct StepConfig {
    levels: u16,
    decision_threshold: f64,
    learning_rate: f64,
    max_features: usize,
    init_increment: f64,
    accumulating: bool,
}

impl Gmg {
    pub fn new(params: GmgParams, width: u32, height: u32) -> Result<Self> {
        params.validate()?;
        if width == 0 {
            return Err(Error::invalid_parameter("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid_parameter("height", "must be at least 1"));
        }
        let pixels = width as usize * height as usize;
        Ok(Self {
            params,
            width,
            height,
            frames_seen: 0,
            histograms: vec![Vec::new(); pixels],
            workers: 1,
        })
    }

    pub fn params(&self) -> &GmgParams {
        &self.params
    }

    /// Histogram entries of one pixel, in insertion order.
    pub fn histogram_at(&self, x: u32, y: u32) -> &[HistogramEntry] {
        &self.histograms[y as usize * self.width as usize + x as usize]
    }

    /// Total histogram weight of one pixel.
    pub fn total_weight_at(&self, x: u32, y: u32) -> f64 {
        self.histogram_at(x, y).iter().map(|e| e.weight).sum()
    }

    fn process_band(cfg: StepConfig, pixels: &[u8], histograms: &mut [Vec<HistogramEntry>], labels: &mut [u8]) {
        for (i, &value) in pixels.iter().enumerate() {
            let bin = quantize(value, cfg.levels);
            let entries = &mut histograms[i];
            if cfg.accumulating {
                bump_bin(entries, bin, cfg.init_increment, cfg.max_features);
                labels[i] = LABEL_BACKGROUND;
            } else {
                let total: f64 = entries.iter().map(|e| e.weight).sum();
                let posterior = if entries.is_empty() || total <= 0.0 {
                    1.0
                } else {
                    let matched = entries
                        .iter()
                        .find(|e| e.bin == bin)
                        .map_or(0.0, |e| e.weight);
                    1.0 - matched / total
                };
                labels[i] = if posterior > cfg.decision_threshold {
                    LABEL_FOREGROUND
                } else {
                    LABEL_BACKGROUND
                };
                for e in entries.iter_mut() {
                    e.weight *= 1.0 - cfg.learning_rate;
                }
                bump_bin(entries, bin, cfg.learning_rate, cfg.max_features);
            }
        }
    }
}

/// Adds `amount` to `bin`, inserting it if absent and evicting the
/// lightest entry (the earliest-inserted on ties) when at capacity.
fn bump_bin(entries: &mut Vec<HistogramEntry>, bin: u8, amount: f64, max_features: usize) {
    if let Some(e) = entries.iter_mut().find(|e| e.bin == bin) {
        e.weight += amount;
        return;
    }
    if entries.len() >= max_features {
        let lightest = entries
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.weight.total_cmp(&b.weight))
            .map(|(idx, _)| idx)
            .expect("capacity is at least 1");
        entries.remove(lightest);
    }
    entries.push(HistogramEntry {
        bin,
        weight: amount,
    });
}

/// Median filter over the square window of side `2 * radius + 1`, clipped at
/// the image borders. Input labels are treated as binary (255 is foreground,
/// anything else background) and the output contains only {0, 255}.
/// Radius 0 returns the input unchanged.
pub fn median_smooth(mask: &Mask, radius: u32) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let w = mask.width() as usize;
    let h = mask.height() as usize;
    let mut out = vec![0u8; w * h];
    smooth_rows(mask.data(), w, h, radius as usize, 0, &mut out);
    Mask::from_labels(mask.width(), mask.height(), out)
}

/// Fills `out` (starting at `first_row`) with the filtered rows.
fn smooth_rows(data: &[u8], w: usize, h: usize, radius: usize, first_row: usize, out: &mut [u8]) {
    let rows = out.len() / w;
    for (band_y, out_row) in out.chunks_mut(w).enumerate() {
        let y = first_row + band_y;
        debug_assert!(band_y < rows);
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius).min(h - 1);
        for (x, out_px) in out_row.iter_mut().enumerate() {
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius).min(w - 1);
            let mut foreground = 0usize;
            for yy in y0..=y1 {
                let row = &data[yy * w + x0..=yy * w + x1];
                foreground += row.iter().filter(|&&v| v == LABEL_FOREGROUND).count();
            }
            let window = (y1 - y0 + 1) * (x1 - x0 + 1);
            *out_px = if 2 * foreground >= window {
                LABEL_FOREGROUND
            } else {
                LABEL_BACKGROUND
            };
        }
    }
}

impl BackgroundSubtractor for Gmg {
    fn apply(&mut self, frame: &Frame) -> Result<Mask> {
        check_dimensions(frame, self.width, self.height)?;
        let w = self.width as usize;
        let h = self.height as usize;
        let accumulating = self.frames_seen < u64::from(self.params.initialization_frames);
        let cfg = StepConfig {
            levels: self.params.quantization_levels,
            decision_threshold: self.params.decision_threshold,
            learning_rate: self.params.learning_rate,
            max_features: self.params.max_features,
            init_increment: 1.0 / f64::from(self.params.initialization_frames),
            accumulating,
        };
        let mut raw = vec![0u8; w * h];

        if self.workers <= 1 {
            Self::process_band(cfg, frame.data(), &mut self.histograms, &mut raw);
        } else {
            let rows = band_rows(h, self.workers);
            std::thread::scope(|scope| {
                let bands = frame
                    .data()
                    .chunks(rows * w)
                    .zip(self.histograms.chunks_mut(rows * w))
                    .zip(raw.chunks_mut(rows * w));
                for ((pixels, histograms), out) in bands {
                    scope.spawn(move || Self::process_band(cfg, pixels, histograms, out));
                }
            });
        }

        self.frames_seen += 1;

        // The mask is all-black while accumulating; only the decision stage
        // benefits from the filter pass.
        let radius = self.params.smoothing_radius as usize;
        if accumulating || radius == 0 {
            return Ok(Mask::from_labels(self.width, self.height, raw));
        }

        let mut smoothed = vec![0u8; w * h];
        if self.workers <= 1 {
            smooth_rows(&raw, w, h, radius, 0, &mut smoothed);
        } else {
            let rows = band_rows(h, self.workers);
            std::thread::scope(|scope| {
                let raw = &raw;
                for (band, out) in smoothed.chunks_mut(rows * w).enumerate() {
                    scope.spawn(move || smooth_rows(raw, w, h, radius, band * rows, out));
                }
            });
        }
        Ok(Mask::from_labels(self.width, self.height, smoothed))
    }

    fn reset(&mut self) {
        for hist in &mut self.histograms {
            hist.clear();
        }
        self.frames_seen = 0;
    }

    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    fn name(&self) -> &'static str {
        "gmg"
    }

    fn set_workers(&mut self, workers: usize) {
        self.workers = workers.max(1);
    }
}
