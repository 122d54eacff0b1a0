//! Compression ratio and RMSE.
//!
//! The compression ratio counts raw pixel bits against transformation bits
//! only; the container header and coverage bitmap are reported separately
//! through [`MetricsReport::on_disk_ratio`].

use std::fmt;

use serde::Serialize;

use crate::codec::{CodecConfig, CompressedImage};
use crate::error::{FicError, Result};
use crate::image_io::Image;
use crate::preprocess::BlockGrid;
use crate::transform::CandidateSet;

/// Bits needed to index `count` distinct values.
pub fn index_bits(count: usize) -> u32 {
    if count <= 1 {
        0
    } else {
        usize::BITS - (count - 1).leading_zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BitBudget {
    pub bits_k: u32,
    pub bits_l: u32,
    pub bits_direction: u32,
    pub bits_angle: u32,
    pub bits_contrast: u32,
    pub bits_brightness: u32,
    pub bits_per_transform: u32,
}

impl BitBudget {
    pub fn new(
        source_grid: &BlockGrid,
        candidates: &CandidateSet,
        contrast_bits: u32,
        brightness_bits: u32,
    ) -> Self {
        let bits_k = index_bits(source_grid.rows);
        let bits_l = index_bits(source_grid.cols);
        let bits_direction = candidates.direction_bits();
        let bits_angle = candidates.angle_bits();
        Self {
            bits_k,
            bits_l,
            bits_direction,
            bits_angle,
            bits_contrast: contrast_bits,
            bits_brightness: brightness_bits,
            bits_per_transform: bits_k
                + bits_l
                + bits_direction
                + bits_angle
                + contrast_bits
                + brightness_bits,
        }
    }
}

/// Per-transformation bit budget for `cfg` on a `width`×`height` image.
pub fn bit_budget(cfg: &CodecConfig, width: usize, height: usize) -> Result<BitBudget> {
    cfg.validate()?;
    let grid = BlockGrid::new(width, height, cfg.source_size, cfg.step)?;
    Ok(BitBudget::new(
        &grid,
        &cfg.candidates,
        cfg.contrast_bits,
        cfg.brightness_bits,
    ))
}

/// `width * height * 8 / (transform_count * bits_per_transform)`.
pub fn ratio_from_counts(
    width: usize,
    height: usize,
    transform_count: usize,
    bits_per_transform: u32,
) -> Result<f64> {
    let compressed = transform_count as f64 * f64::from(bits_per_transform);
    if compressed == 0.0 {
        return Err(FicError::EmptyStream);
    }
    Ok((width * height * 8) as f64 / compressed)
}

/// Raw pixel bits of `original` over the stored transformation bits.
pub fn compression_ratio(original: &Image, c: &CompressedImage) -> Result<f64> {
    ratio_from_counts(
        original.width(),
        original.height(),
        c.transform_count(),
        c.header().bit_budget().bits_per_transform,
    )
}

/// Root mean squared pixel difference.
pub fn rmse(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(FicError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sse: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok((sse / a.pixels().len() as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub name: String,
    /// `None` when no transformation was stored.
    pub compression_ratio: Option<f64>,
    /// Raw pixel bits over the full `.fic` file size.
    pub on_disk_ratio: f64,
    pub rmse: f64,
    pub transform_count: usize,
    pub bits_per_transform: u32,
    pub encode_seconds: f64,
    pub source_size: usize,
    pub dest_size: usize,
    pub step: usize,
    pub mirrored: bool,
    pub angle_count: usize,
    pub contrast_bits: u32,
    pub brightness_bits: u32,
    pub gaussian_sigma: f64,
    pub t1: Option<u8>,
    pub t2: Option<f64>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "name,CR,on_disk_ratio,RMSE,transform_count,bits_per_transform,time_seconds,source_size,dest_size,step,directions,angles,contrast_bits,brightness_bits,sigma,t1,t2";

    pub fn new(
        name: impl Into<String>,
        original: &Image,
        decoded: &Image,
        stream: &CompressedImage,
        file_bytes: usize,
        cfg: &CodecConfig,
        encode_seconds: f64,
    ) -> Result<Self> {
        let h = stream.header();
        Ok(Self {
            name: name.into(),
            compression_ratio: compression_ratio(original, stream).ok(),
            on_disk_ratio: (original.width() * original.height()) as f64 / file_bytes as f64,
            rmse: rmse(original, decoded)?,
            transform_count: stream.transform_count(),
            bits_per_transform: h.bit_budget().bits_per_transform,
            encode_seconds,
            source_size: h.source_size,
            dest_size: h.dest_size,
            step: h.step,
            mirrored: h.candidates.mirrored(),
            angle_count: h.candidates.angle_count(),
            contrast_bits: h.contrast_bits,
            brightness_bits: h.brightness_bits,
            gaussian_sigma: cfg.gaussian_sigma,
            t1: cfg.box_counting.as_ref().map(|b| b.t1),
            t2: cfg.box_counting.as_ref().map(|b| b.t2),
        })
    }

    /// One CSV line matching [`Self::CSV_HEADER`], without a newline.
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.name.clone(),
            opt(self.compression_ratio.map(|v| format!("{v:.2}"))),
            format!("{:.2}", self.on_disk_ratio),
            format!("{:.2}", self.rmse),
            self.transform_count.to_string(),
            self.bits_per_transform.to_string(),
            format!("{:.3}", self.encode_seconds),
            self.source_size.to_string(),
            self.dest_size.to_string(),
            self.step.to_string(),
            if self.mirrored { "both" } else { "identity" }.to_string(),
            self.angle_count.to_string(),
            self.contrast_bits.to_string(),
            self.brightness_bits.to_string(),
            format!("{}", self.gaussian_sigma),
            opt(self.t1.map(|v| v.to_string())),
            opt(self.t2.map(|v| v.to_string())),
        ]
        .join(",")
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        match self.compression_ratio {
            Some(cr) => writeln!(f, "  compression ratio  {cr:.2}")?,
            None => writeln!(f, "  compression ratio  undefined (no transformations)")?,
        }
        writeln!(f, "  on-disk ratio      {:.2}", self.on_disk_ratio)?;
        writeln!(f, "  RMSE               {:.2}", self.rmse)?;
        writeln!(
            f,
            "  transformations    {} x {} bits",
            self.transform_count, self.bits_per_transform
        )?;
        write!(f, "  encode time        {:.3} s", self.encode_seconds)
    }
}
