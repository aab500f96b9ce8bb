//! Timing methodology: stabilise a model with warm-up frames, then
//! repeatedly time the apply call on a single frame with a monotonic clock.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::subtractor::BackgroundSubtractor;

/// Result of timing repeated apply calls on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub algorithm: String,
    pub repetitions: u32,
    /// Frames the subtractor had consumed before timing started.
    pub warmup_frames: u64,
    pub total_seconds: f64,
    pub mean_seconds_per_op: f64,
    pub fps: f64,
}

/// Feeds `n` frames from `frames` into the subtractor, discarding the masks.
/// With `cycle` the source wraps around; without it the source must hold at
/// least `n` frames.
pub fn warmup(
    subtractor: &mut dyn BackgroundSubtractor,
    frames: &[Frame],
    n: usize,
    cycle: bool,
) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    if frames.is_empty() || (!cycle && frames.len() < n) {
        return Err(Error::SourceExhausted {
            available: frames.len(),
            needed: n,
        });
    }
    for i in 0..n {
        subtractor.apply(&frames[i % frames.len()])?;
    }
    Ok(())
}

/// Wall-clocks `repetitions` apply calls on the same frame. The timed region
/// is exactly the apply loop; model mutation across repetitions is accepted.
/// The report's warm-up count is read off the subtractor.
pub fn time_apply(
    subtractor: &mut dyn BackgroundSubtractor,
    frame: &Frame,
    repetitions: u32,
) -> Result<TimingReport> {
    if repetitions < 1 {
        return Err(Error::invalid_parameter(
            "repetitions",
            "must be at least 1",
        ));
    }
    let warmup_frames = subtractor.frames_seen();
    let started = Instant::now();
    for _ in 0..repetitions {
        subtractor.apply(frame)?;
    }
    let total_seconds = started.elapsed().as_secs_f64();
    let mean_seconds_per_op = total_seconds / f64::from(repetitions);
    Ok(TimingReport {
        algorithm: subtractor.name().to_string(),
        repetitions,
        warmup_frames,
        total_seconds,
        mean_seconds_per_op,
        fps: 1.0 / mean_seconds_per_op,
    })
}

/// Median of the per-run means; the conventional pass/fail statistic for
/// noisy timing comparisons.
pub fn median_mean_seconds(reports: &[TimingReport]) -> f64 {
    let mut means: Vec<f64> = reports.iter().map(|r| r.mean_seconds_per_op).collect();
    means.sort_by(f64::total_cmp);
    means[means.len() / 2]
}
