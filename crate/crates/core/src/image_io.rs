//! Grayscale images and binary PGM (P5) I/O.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use crate::error::{FicError, Result};

/// Row-major 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(FicError::DimensionMismatch(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(FicError::DimensionMismatch(format!(
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

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Loads a binary PGM (P5, maxval 255) image.
///
/// Color and 16-bit inputs are rejected rather than converted.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => FicError::FileNotFound(path.to_path_buf()),
        _ => FicError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    decode_pgm(&bytes)
}

/// Writes `img` as binary PGM (P5, maxval 255).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| FicError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 {
        return Err(FicError::UnsupportedFormat("file too small".into()));
    }
    match &bytes[..2] {
        b"P5" => {}
        b"P3" | b"P6" => {
            return Err(FicError::UnsupportedFormat(
                "color PPM input; only grayscale is supported".into(),
            ))
        }
        b"P1" | b"P2" | b"P4" | b"P7" => {
            return Err(FicError::UnsupportedFormat(
                "only binary PGM (P5) is supported".into(),
            ))
        }
        _ => return Err(FicError::UnsupportedFormat("not a PGM file".into())),
    }

    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let width = cursor.next_number("width")?;
    let height = cursor.next_number("height")?;
    let maxval = cursor.next_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FicError::CorruptHeader(format!(
            "invalid dimensions {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(FicError::CorruptHeader(format!("invalid maxval {maxval}")));
    }
    if maxval != 255 {
        return Err(FicError::UnsupportedFormat(format!(
            "maxval {maxval}; only 8-bit (maxval 255) is supported"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(FicError::CorruptHeader("missing raster separator".into())),
    }

    let expected = width
        .checked_mul(height)
        .ok_or_else(|| FicError::CorruptHeader("dimensions overflow".into()))?;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(FicError::CorruptPayload {
            expected,
            found: payload.len(),
        });
    }
    Image::new(width, height, payload[..expected].to_vec())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<usize> {
        let start = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start {
            return Err(FicError::CorruptHeader(format!(
                "expected whitespace before {what}"
            )));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(FicError::CorruptHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FicError::CorruptHeader(format!("{what} out of range")))
    }
}
