//! Single-channel frames and label masks, the input/output units of every
//! subtractor in this crate.

use crate::error::{Error, Result};

/// Label for pixels that belong to the modelled background.
pub const LABEL_BACKGROUND: u8 = 0;
/// Label for darkened-background pixels (emitted only by MOG2 with shadow
/// detection enabled).
pub const LABEL_SHADOW: u8 = 127;
/// Label for pixels that do not fit the background model.
pub const LABEL_FOREGROUND: u8 = 255;

/// A single-channel 8-bit intensity grid, row-major with top-left origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid_parameter("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid_parameter("height", "must be at least 1"));
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::invalid_parameter(
                "data",
                format!("length {} does not match {width}x{height}", data.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Frame with every pixel set to `value`.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }
}

/// A per-pixel label grid produced by a subtractor or loaded as ground truth.
///
/// Every value is exactly [`LABEL_BACKGROUND`], [`LABEL_SHADOW`] or
/// [`LABEL_FOREGROUND`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Mask {
    /// Builds a mask, rejecting any value outside {0, 127, 255}.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid_parameter("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid_parameter("height", "must be at least 1"));
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::invalid_parameter(
                "data",
                format!("length {} does not match {width}x{height}", data.len()),
            ));
        }
        for (i, &value) in data.iter().enumerate() {
            if !matches!(value, LABEL_BACKGROUND | LABEL_SHADOW | LABEL_FOREGROUND) {
                return Err(Error::InvalidMaskLabel {
                    value,
                    x: (i % width as usize) as u32,
                    y: (i / width as usize) as u32,
                });
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constructor for algorithm output that is correct by construction.
    pub(crate) fn from_labels(width: u32, height: u32, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: u32, height: u32, label: u8) -> Result<Self> {
        Self::new(width, height, vec![label; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Number of pixels labelled foreground (255).
    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == LABEL_FOREGROUND).count()
    }

    /// Number of pixels with a nonzero label (foreground or shadow).
    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != LABEL_BACKGROUND).count()
    }
}

/// True iff both dimensions and every label match.
pub fn masks_equal(a: &Mask, b: &Mask) -> bool {
    a == b
}

/// Luma conversion: round-half-up(0.299 r + 0.587 g + 0.114 b), clamped to
/// [0, 255]. Equal-channel grays map to themselves.
pub fn to_grayscale(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    (y + 0.5).floor().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_black_and_white() {
        assert_eq!(to_grayscale(0, 0, 0), 0);
        assert_eq!(to_grayscale(255, 255, 255), 255);
    }

    #[test]
    fn grayscale_pure_red() {
        // 0.299 * 255 = 76.245, round half up
        assert_eq!(to_grayscale(255, 0, 0), 76);
    }

    #[test]
    fn grayscale_fixes_grays() {
        for v in 0..=255u8 {
            assert_eq!(to_grayscale(v, v, v), v);
        }
    }

    #[test]
    fn grayscale_monotone_per_channel() {
        for v in 0..255u8 {
            assert!(to_grayscale(v + 1, 10, 200) >= to_grayscale(v, 10, 200));
            assert!(to_grayscale(10, v + 1, 200) >= to_grayscale(10, v, 200));
            assert!(to_grayscale(10, 200, v + 1) >= to_grayscale(10, 200, v));
        }
    }

    #[test]
    fn frame_rejects_bad_shape() {
        assert!(Frame::new(0, 4, vec![]).is_err());
        assert!(Frame::new(4, 0, vec![]).is_err());
        assert!(Frame::new(2, 2, vec![0; 3]).is_err());
        assert!(Frame::new(2, 2, vec![0; 4]).is_ok());
    }

    #[test]
    fn mask_rejects_bad_labels() {
        assert!(Mask::new(2, 1, vec![0, 255]).is_ok());
        assert!(Mask::new(2, 1, vec![0, 127]).is_ok());
        let err = Mask::new(2, 2, vec![0, 255, 200, 0]).unwrap_err();
        match err {
            Error::InvalidMaskLabel { value, x, y } => {
                assert_eq!((value, x, y), (200, 0, 1));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn masks_equal_examples() {
        let a = Mask::new(2, 1, vec![0, 255]).unwrap();
        let b = Mask::new(2, 1, vec![0, 255]).unwrap();
        let c = Mask::new(2, 1, vec![255, 255]).unwrap();
        let d = Mask::new(1, 2, vec![0, 255]).unwrap();
        assert!(masks_equal(&a, &b));
        assert!(!masks_equal(&a, &c));
        assert!(!masks_equal(&a, &d));
    }
}
