//! The behavioural contract shared by all background subtractors.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask};

/// A stateful per-pixel background model.
///
/// Implementations are deterministic: two freshly constructed instances with
/// equal parameters produce byte-identical mask sequences for the same input.
/// A single instance accepts one `apply` call at a time; instances may be
/// moved between threads between calls.
pub trait BackgroundSubtractor: Send {
    /// Classifies one frame and updates the model. Errors if the frame
    /// dimensions differ from the model's.
    fn apply(&mut self, frame: &Frame) -> Result<Mask>;

    /// Restores freshly-constructed state, keeping parameters.
    fn reset(&mut self);

    fn width(&self) -> u32;

    fn height(&self) -> u32;

    /// Number of frames consumed since construction or the last reset.
    fn frames_seen(&self) -> u64;

    /// Short algorithm identifier ("gmg", "mog", "mog2").
    fn name(&self) -> &'static str;

    /// Caps the number of worker threads `apply` may use internally.
    /// Results are identical to sequential processing regardless of the
    /// setting; 0 is treated as 1.
    fn set_workers(&mut self, workers: usize);
}

pub(crate) fn check_dimensions(
    frame: &Frame,
    expected_width: u32,
    expected_height: u32,
) -> Result<()> {
    if frame.width() != expected_width || frame.height() != expected_height {
        return Err(Error::DimensionMismatch {
            expected_width,
            expected_height,
            actual_width: frame.width(),
            actual_height: frame.height(),
        });
    }
    Ok(())
}

/// Rows per band when splitting `rows` of work across `workers` threads.
pub(crate) fn band_rows(rows: usize, workers: usize) -> usize {
    let workers = workers.clamp(1, rows.max(1));
    rows.div_ceil(workers)
}
