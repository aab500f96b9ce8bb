//! Per-pixel background subtraction with three classic algorithms (GMG, MOG,
//! MOG2), segmentation metrics against ground-truth masks, a warm-up-based
//! timing harness, a synthetic-scene generator and numbered-image-file I/O.
//!
//! All algorithms consume single-channel 8-bit [`Frame`]s and produce
//! [`Mask`]s labelled background (0), shadow (127, MOG2 only) or foreground
//! (255). Everything is deterministic: equal parameters and input yield
//! byte-identical masks.

pub mod bench;
pub mod error;
pub mod frame;
pub mod gmg;
pub mod io;
pub mod metrics;
pub mod mog;
pub mod mog2;
pub mod subtractor;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{
    masks_equal, to_grayscale, Frame, Mask, LABEL_BACKGROUND, LABEL_FOREGROUND, LABEL_SHADOW,
};
pub use gmg::{Gmg, GmgParams};
pub use metrics::{accuracy, confusion, histogram, precision, ConfusionMatrix, HistogramReport};
pub use mog::{Mog, MogParams};
pub use mog2::{Mog2, Mog2Params};
pub use subtractor::BackgroundSubtractor;
pub use synth::SynthSpec;
