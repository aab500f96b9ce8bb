//! Reading and writing frames and masks as numbered image files.
//!
//! Supported formats: binary PGM (P5), binary PPM (P6) and 8-bit PNG. RGB
//! input is reduced to intensity with the same luma formula used everywhere
//! else in the crate. Masks are written as 8-bit grayscale and round-trip
//! losslessly.

use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{to_grayscale, Frame, Mask, LABEL_SHADOW};

const PNG_MAGIC: &[u8] = &[0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| {
        if source.kind() == ErrorKind::NotFound {
            Error::MissingFile {
                path: path.to_path_buf(),
            }
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Grayscale pixels plus dimensions, decoded from any supported format.
struct DecodedGray {
    width: u32,
    height: u32,
    data: Vec<u8>,
    /// True when the source file carried a single channel (a mask candidate).
    single_channel: bool,
}

fn decode(path: &Path) -> Result<DecodedGray> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"P5") {
        let (width, height, data) = decode_pnm(path, &bytes, false)?;
        Ok(DecodedGray {
            width,
            height,
            data,
            single_channel: true,
        })
    } else if bytes.starts_with(b"P6") {
        let (width, height, rgb) = decode_pnm(path, &bytes, true)?;
        let data = rgb
            .chunks_exact(3)
            .map(|px| to_grayscale(px[0], px[1], px[2]))
            .collect();
        Ok(DecodedGray {
            width,
            height,
            data,
            single_channel: false,
        })
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(path, &bytes)
    } else {
        Err(Error::CorruptHeader {
            path: path.to_path_buf(),
            format: "image",
            reason: "unrecognized magic bytes (expected PGM, PPM or PNG)".into(),
        })
    }
}

/// Parses a binary PGM/PPM header and payload. Returns raw samples:
/// one byte per pixel for P5, three for P6.
fn decode_pnm(path: &Path, bytes: &[u8], color: bool) -> Result<(u32, u32, Vec<u8>)> {
    let format: &'static str = if color { "ppm" } else { "pgm" };
    let corrupt = |reason: String| Error::CorruptHeader {
        path: path.to_path_buf(),
        format,
        reason,
    };

    // Header tokens are separated by whitespace; '#' starts a comment that
    // runs to the end of the line.
    let mut pos = 2usize;
    let mut fields = [0u64; 3];
    for field in &mut fields {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while !matches!(bytes.get(pos), None | Some(b'\n')) {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(corrupt("truncated header".into())),
            }
        }
        let start = pos;
        while matches!(bytes.get(pos), Some(b) if b.is_ascii_digit()) {
            pos += 1;
        }
        if pos == start {
            return Err(corrupt(format!(
                "expected a number at byte {start}, found {:?}",
                bytes.get(start).map(|&b| b as char)
            )));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are ascii");
        *field = text
            .parse()
            .map_err(|_| corrupt(format!("number {text} out of range")))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(corrupt(format!("degenerate dimensions {width}x{height}")));
    }
    if width > u64::from(u32::MAX) || height > u64::from(u32::MAX) {
        return Err(corrupt(format!("dimensions {width}x{height} too large")));
    }
    if maxval == 0 {
        return Err(corrupt("maxval 0".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth {
            path: path.to_path_buf(),
        });
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(corrupt("missing whitespace after maxval".into())),
    }
    let samples = width as usize * height as usize * if color { 3 } else { 1 };
    let payload = &bytes[pos..];
    if payload.len() < samples {
        return Err(corrupt(format!(
            "payload holds {} bytes, expected {samples}",
            payload.len()
        )));
    }
    Ok((width as u32, height as u32, payload[..samples].to_vec()))
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<DecodedGray> {
    let image = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(
        |err| Error::CorruptHeader {
            path: path.to_path_buf(),
            format: "png",
            reason: err.to_string(),
        },
    )?;
    use image::DynamicImage;
    match image {
        DynamicImage::ImageLuma8(img) => Ok(DecodedGray {
            width: img.width(),
            height: img.height(),
            data: img.into_raw(),
            single_channel: true,
        }),
        DynamicImage::ImageRgb8(img) => {
            let (width, height) = img.dimensions();
            let data = img
                .into_raw()
                .chunks_exact(3)
                .map(|px| to_grayscale(px[0], px[1], px[2]))
                .collect();
            Ok(DecodedGray {
                width,
                height,
                data,
                single_channel: false,
            })
        }
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_)
        | DynamicImage::ImageRgb32F(_)
        | DynamicImage::ImageRgba32F(_) => Err(Error::UnsupportedBitDepth {
            path: path.to_path_buf(),
        }),
        other => Err(Error::UnsupportedPixelFormat {
            path: path.to_path_buf(),
            format: format!("{:?}", other.color()),
        }),
    }
}

/// Loads a frame from an 8-bit grayscale or RGB image file, reducing RGB to
/// intensity.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let decoded = decode(path.as_ref())?;
    Frame::new(decoded.width, decoded.height, decoded.data)
}

fn load_labels(path: &Path, allow_shadow: bool) -> Result<Mask> {
    let decoded = decode(path)?;
    if !decoded.single_channel {
        return Err(Error::UnsupportedPixelFormat {
            path: path.to_path_buf(),
            format: "RGB (masks must be single-channel)".into(),
        });
    }
    for (i, &value) in decoded.data.iter().enumerate() {
        let x = (i % decoded.width as usize) as u32;
        let y = (i / decoded.width as usize) as u32;
        match value {
            0 | 255 => {}
            LABEL_SHADOW if allow_shadow => {}
            LABEL_SHADOW => return Err(Error::InvalidGroundTruthLabel { value, x, y }),
            _ if allow_shadow => return Err(Error::InvalidMaskLabel { value, x, y }),
            _ => return Err(Error::InvalidGroundTruthLabel { value, x, y }),
        }
    }
    Mask::new(decoded.width, decoded.height, decoded.data)
}

/// Loads a prediction mask; labels must be in {0, 127, 255}.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    load_labels(path.as_ref(), true)
}

/// Loads a ground-truth mask; labels must be binary {0, 255}.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Mask> {
    load_labels(path.as_ref(), false)
}

fn write_gray(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => {
            let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
            bytes.extend_from_slice(data);
            std::fs::write(path, bytes).map_err(io_err)
        }
        Some("png") => image::save_buffer(
            path,
            data,
            width,
            height,
            image::ExtendedColorType::L8,
        )
        .map_err(|err| match err {
            image::ImageError::IoError(source) => io_err(source),
            other => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(other.to_string()),
            },
        }),
        other => Err(Error::invalid_parameter(
            "path",
            format!("unsupported extension {other:?} (use .pgm or .png)"),
        )),
    }
}

/// Writes a mask as an 8-bit grayscale image (.pgm or .png by extension).
pub fn write_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    write_gray(path.as_ref(), mask.width(), mask.height(), mask.data())
}

/// Writes a frame as an 8-bit grayscale image (.pgm or .png by extension).
pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    write_gray(path.as_ref(), frame.width(), frame.height(), frame.data())
}

/// A filename pattern with one zero-padded index field, e.g. `frame_%06d.pgm`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilePattern {
    prefix: String,
    digits: usize,
    suffix: String,
}

impl FilePattern {
    pub fn parse(pattern: &str) -> Result<Self> {
        let bad = |reason: &str| {
            Error::invalid_parameter("pattern", format!("{pattern:?}: {reason}"))
        };
        let start = pattern
            .find("%0")
            .ok_or_else(|| bad("missing a %0<N>d index field"))?;
        let rest = &pattern[start + 2..];
        let digits_len = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits_len == 0 || !rest[digits_len..].starts_with('d') {
            return Err(bad("index field must look like %06d"));
        }
        let digits: usize = rest[..digits_len].parse().map_err(|_| bad("bad width"))?;
        let suffix = rest[digits_len + 1..].to_string();
        if suffix.contains("%0") {
            return Err(bad("more than one index field"));
        }
        Ok(Self {
            prefix: pattern[..start].to_string(),
            digits,
            suffix,
        })
    }

    pub fn filename(&self, index: u32) -> String {
        format!(
            "{}{:0digits$}{}",
            self.prefix,
            index,
            self.suffix,
            digits = self.digits
        )
    }

    /// Recovers the index from a filename produced by this pattern.
    pub fn index_of(&self, filename: &str) -> Option<u32> {
        let middle = filename
            .strip_prefix(&self.prefix)?
            .strip_suffix(&self.suffix)?;
        if middle.is_empty() || !middle.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        middle.parse().ok()
    }
}

impl std::fmt::Display for FilePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}%0{}d{}", self.prefix, self.digits, self.suffix)
    }
}

/// A directory of numbered image files, verified to exist on open.
#[derive(Debug, Clone)]
pub struct SequenceRef {
    dir: PathBuf,
    pattern: FilePattern,
    start: u32,
    end: u32,
}

impl SequenceRef {
    /// Opens an explicit index range, checking that every referenced file
    /// exists.
    pub fn open(
        dir: impl Into<PathBuf>,
        pattern: FilePattern,
        start: u32,
        end: u32,
    ) -> Result<Self> {
        if end < start {
            return Err(Error::invalid_parameter(
                "end",
                format!("end {end} precedes start {start}"),
            ));
        }
        let dir = dir.into();
        for index in start..=end {
            let path = dir.join(pattern.filename(index));
            if !path.is_file() {
                return Err(Error::MissingFile { path });
            }
        }
        Ok(Self {
            dir,
            pattern,
            start,
            end,
        })
    }

    /// Opens the longest contiguous run of files beginning at `start`.
    pub fn scan(dir: impl Into<PathBuf>, pattern: FilePattern, start: u32) -> Result<Self> {
        let dir = dir.into();
        let first = dir.join(pattern.filename(start));
        if !first.is_file() {
            return Err(Error::MissingFile { path: first });
        }
        let mut end = start;
        while end < u32::MAX && dir.join(pattern.filename(end + 1)).is_file() {
            end += 1;
        }
        Ok(Self {
            dir,
            pattern,
            start,
            end,
        })
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    /// Last index, inclusive.
    pub fn end(&self) -> u32 {
        self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pattern(&self) -> &FilePattern {
        &self.pattern
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, index: u32) -> PathBuf {
        self.dir.join(self.pattern.filename(index))
    }

    pub fn load_frame(&self, index: u32) -> Result<Frame> {
        load_frame(self.path(index))
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }
}
