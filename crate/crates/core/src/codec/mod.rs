//! Encoder, decoder and compressed representation.
//!
//! The encoder tiles the image into destination blocks of `dest_size` and
//! builds a pool of source blocks (`source_size = 2 * dest_size`, placed on a
//! `step` grid), each optionally blurred, then averaged down to destination
//! size and expanded into its candidate variations. Every covered destination
//! block stores the single pool entry and quantized intensity map with the
//! lowest MSE. The decoder applies the stored maps repeatedly to a seed.

mod format;

use rayon::prelude::*;

pub use format::{deserialize, serialize, HEADER_LEN, MAGIC, VERSION};

use crate::boxcount::{select_blocks, BoxCountConfig, DimensionMap};
use crate::error::{FicError, Result};
use crate::image_io::Image;
use crate::metrics::BitBudget;
use crate::preprocess::{gaussian_filter, reduce, Block, BlockGrid};
use crate::transform::{
    apply_variation, score_prepared, variation_source_index, Angle, CandidateSet, Direction,
    PreparedBlock, Quantizer,
};

/// Mid-gray starting image used when no seed is supplied.
pub const DEFAULT_SEED_VALUE: u8 = 128;

#[derive(Clone, Debug, PartialEq)]
pub struct CodecConfig {
    pub source_size: usize,
    pub dest_size: usize,
    pub step: usize,
    pub candidates: CandidateSet,
    pub contrast_bits: u32,
    pub brightness_bits: u32,
    /// Gaussian sigma applied to each source block before reduction; 0 disables.
    pub gaussian_sigma: f64,
    pub box_counting: Option<BoxCountConfig>,
    pub decode_iterations: u32,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            source_size: 32,
            dest_size: 16,
            step: 32,
            candidates: CandidateSet::FULL,
            contrast_bits: 8,
            brightness_bits: 8,
            gaussian_sigma: 0.0,
            box_counting: None,
            decode_iterations: 8,
        }
    }
}

impl CodecConfig {
    /// Baseline geometry with source blocks of `2 * dest_size` on a
    /// non-overlapping grid.
    pub fn with_dest_size(dest_size: usize) -> Self {
        Self {
            source_size: 2 * dest_size,
            dest_size,
            step: 2 * dest_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FicError::InvalidConfig(msg));
        if self.dest_size == 0 || self.source_size != 2 * self.dest_size {
            return bad(format!(
                "source size ({}) must be twice the destination size ({})",
                self.source_size, self.dest_size
            ));
        }
        if self.source_size > u8::MAX as usize {
            return bad(format!("source size {} exceeds 255", self.source_size));
        }
        if self.step == 0 || self.step > u8::MAX as usize {
            return bad(format!("step must be in 1..=255, got {}", self.step));
        }
        Quantizer::contrast(self.contrast_bits)?;
        Quantizer::brightness(self.brightness_bits)?;
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return bad(format!("gaussian sigma must be >= 0, got {}", self.gaussian_sigma));
        }
        if self.decode_iterations == 0 || self.decode_iterations > u8::MAX as u32 {
            return bad(format!(
                "decode iterations must be in 1..=255, got {}",
                self.decode_iterations
            ));
        }
        if let Some(bc) = &self.box_counting {
            BoxCountConfig::new(bc.t1, bc.t2, bc.box_sizes.clone())?;
            bc.validate_for(self.dest_size)?;
        }
        Ok(())
    }

    /// Checks that an image of the given size can be coded with this config.
    pub fn check_geometry(&self, width: usize, height: usize) -> Result<()> {
        if width > u16::MAX as usize || height > u16::MAX as usize {
            return Err(FicError::IncompatibleGeometry(format!(
                "{width}x{height} exceeds the 65535 pixel limit"
            )));
        }
        if !width.is_multiple_of(self.dest_size) || !height.is_multiple_of(self.dest_size) {
            return Err(FicError::IncompatibleGeometry(format!(
                "destination size {} must divide {width}x{height}",
                self.dest_size
            )));
        }
        if self.source_size > width || self.source_size > height {
            return Err(FicError::IncompatibleGeometry(format!(
                "source size {} exceeds {width}x{height}",
                self.source_size
            )));
        }
        Ok(())
    }

    /// Pool entries each destination block is compared against.
    pub fn candidates_per_block(&self, width: usize, height: usize) -> Result<usize> {
        let grid = BlockGrid::new(width, height, self.source_size, self.step)?;
        Ok(grid.len() * self.candidates.len())
    }
}

/// One stored mapping: source block `(k, l)`, variation, and quantized
/// contrast/brightness codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transformation {
    pub k: u32,
    pub l: u32,
    pub direction: Direction,
    pub angle: Angle,
    pub alpha_code: u32,
    pub beta_code: u32,
}

/// Everything the decoder needs besides the transformations themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamHeader {
    pub width: usize,
    pub height: usize,
    pub source_size: usize,
    pub dest_size: usize,
    pub step: usize,
    pub candidates: CandidateSet,
    /// `(t1, t2 in 1/256 units)` when box counting pruned the blocks.
    pub box_counting: Option<(u8, u16)>,
    pub contrast_bits: u32,
    pub brightness_bits: u32,
    pub decode_iterations: u32,
}

impl StreamHeader {
    pub fn new(width: usize, height: usize, cfg: &CodecConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.check_geometry(width, height)?;
        Ok(Self {
            width,
            height,
            source_size: cfg.source_size,
            dest_size: cfg.dest_size,
            step: cfg.step,
            candidates: cfg.candidates,
            box_counting: cfg
                .box_counting
                .as_ref()
                .map(|bc| (bc.t1, (bc.t2 * 256.0).round() as u16)),
            contrast_bits: cfg.contrast_bits,
            brightness_bits: cfg.brightness_bits,
            decode_iterations: cfg.decode_iterations,
        })
    }

    pub fn source_grid(&self) -> BlockGrid {
        BlockGrid::new(self.width, self.height, self.source_size, self.step)
            .expect("header geometry validated")
    }

    pub fn dest_grid(&self) -> BlockGrid {
        BlockGrid::new(self.width, self.height, self.dest_size, self.dest_size)
            .expect("header geometry validated")
    }

    pub fn contrast_quantizer(&self) -> Quantizer {
        Quantizer::contrast(self.contrast_bits).expect("header bits validated")
    }

    pub fn brightness_quantizer(&self) -> Quantizer {
        Quantizer::brightness(self.brightness_bits).expect("header bits validated")
    }

    pub fn bit_budget(&self) -> BitBudget {
        BitBudget::new(
            &self.source_grid(),
            &self.candidates,
            self.contrast_bits,
            self.brightness_bits,
        )
    }

    /// Threshold `t2` as stored (rounded to 1/256).
    pub fn t2(&self) -> Option<f64> {
        self.box_counting.map(|(_, t2)| f64::from(t2) / 256.0)
    }
}

/// Header, per-destination-block coverage and the covered blocks'
/// transformations in raster order.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedImage {
    header: StreamHeader,
    coverage: Vec<bool>,
    transforms: Vec<Transformation>,
}

impl CompressedImage {
    pub fn new(
        header: StreamHeader,
        coverage: Vec<bool>,
        transforms: Vec<Transformation>,
    ) -> Result<Self> {
        let dest = header.dest_grid();
        if coverage.len() != dest.len() {
            return Err(FicError::InvariantViolation(format!(
                "coverage has {} entries for {} destination blocks",
                coverage.len(),
                dest.len()
            )));
        }
        let covered = coverage.iter().filter(|&&c| c).count();
        if covered != transforms.len() {
            return Err(FicError::InvariantViolation(format!(
                "{covered} covered blocks but {} transformations",
                transforms.len()
            )));
        }
        if header.box_counting.is_none() && covered != coverage.len() {
            return Err(FicError::InvariantViolation(
                "partial coverage without box counting".into(),
            ));
        }
        let src = header.source_grid();
        let cq = header.contrast_quantizer();
        let bq = header.brightness_quantizer();
        for t in &transforms {
            if t.k as usize >= src.rows || t.l as usize >= src.cols {
                return Err(FicError::InvariantViolation(format!(
                    "source index ({}, {}) outside {}x{} grid",
                    t.k, t.l, src.rows, src.cols
                )));
            }
            if !header.candidates.directions().contains(&t.direction)
                || !header.candidates.angles().contains(&t.angle)
            {
                return Err(FicError::InvariantViolation(
                    "variation outside the candidate set".into(),
                ));
            }
            if t.alpha_code > cq.max_code() || t.beta_code > bq.max_code() {
                return Err(FicError::InvariantViolation("code exceeds its bit width".into()));
            }
        }
        Ok(Self {
            header,
            coverage,
            transforms,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn coverage(&self) -> &[bool] {
        &self.coverage
    }

    pub fn transforms(&self) -> &[Transformation] {
        &self.transforms
    }

    pub fn transform_count(&self) -> usize {
        self.transforms.len()
    }

    /// Covered destination block indices `(row, col)` paired with their transformation.
    pub fn covered_blocks(&self) -> impl Iterator<Item = ((usize, usize), &Transformation)> + '_ {
        let cols = self.header.dest_grid().cols;
        self.coverage
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i / cols, i % cols))
            .zip(&self.transforms)
    }

    /// Same stream with a different default iteration count.
    pub fn with_decode_iterations(mut self, iterations: u32) -> Result<Self> {
        if iterations == 0 || iterations > u8::MAX as u32 {
            return Err(FicError::InvalidConfig(format!(
                "decode iterations must be in 1..=255, got {iterations}"
            )));
        }
        self.header.decode_iterations = iterations;
        Ok(self)
    }
}

struct PoolEntry {
    k: u32,
    l: u32,
    direction: Direction,
    angle: Angle,
    block: PreparedBlock,
}

/// Blurred (optional), reduced and varied source blocks in tie-break order:
/// `k`, `l`, direction, angle.
fn build_pool(img: &Image, cfg: &CodecConfig, grid: &BlockGrid) -> Result<Vec<PoolEntry>> {
    let reduced = grid
        .indices()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k, l)| {
            let (r, c) = grid.origin(k, l);
            let block = Block::from_image(img, r, c, cfg.source_size);
            reduce(&gaussian_filter(&block, cfg.gaussian_sigma), 2).map(|b| (k, l, b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduced
        .iter()
        .flat_map(|(k, l, block)| {
            cfg.candidates.iter().map(move |(direction, angle)| PoolEntry {
                k: *k as u32,
                l: *l as u32,
                direction,
                angle,
                block: PreparedBlock::from_block(&apply_variation(block, direction, angle)),
            })
        })
        .collect())
}

/// Destination block coverage for `cfg`, with the dimension map when box
/// counting is enabled.
pub fn coverage_for(img: &Image, cfg: &CodecConfig) -> Result<(Vec<bool>, Option<DimensionMap>)> {
    let dest = BlockGrid::for_image(img, cfg.dest_size, cfg.dest_size)?;
    match &cfg.box_counting {
        None => Ok((vec![true; dest.len()], None)),
        Some(bc) => {
            let map = select_blocks(img, &dest, bc)?;
            Ok((map.selected.clone(), Some(map)))
        }
    }
}

/// Compresses `img` by exhaustive search over the source pool.
///
/// Runs on the current rayon pool; output does not depend on its size.
pub fn encode(img: &Image, cfg: &CodecConfig) -> Result<CompressedImage> {
    let header = StreamHeader::new(img.width(), img.height(), cfg)?;
    let src_grid = header.source_grid();
    let dest_grid = header.dest_grid();
    let cq = header.contrast_quantizer();
    let bq = header.brightness_quantizer();

    let pool = build_pool(img, cfg, &src_grid)?;
    let (coverage, _) = coverage_for(img, cfg)?;

    let covered: Vec<usize> = (0..dest_grid.len()).filter(|&i| coverage[i]).collect();
    let transforms = covered
        .into_par_iter()
        .map(|i| {
            let (row, col) = dest_grid.origin(i / dest_grid.cols, i % dest_grid.cols);
            let dest = PreparedBlock::from_block(&Block::from_image(img, row, col, cfg.dest_size));
            let mut best: Option<(f64, Transformation)> = None;
            for entry in &pool {
                let (alpha_code, beta_code, mse) = score_prepared(&entry.block, &dest, &cq, &bq);
                if best.as_ref().is_none_or(|(m, _)| mse < *m) {
                    best = Some((
                        mse,
                        Transformation {
                            k: entry.k,
                            l: entry.l,
                            direction: entry.direction,
                            angle: entry.angle,
                            alpha_code,
                            beta_code,
                        },
                    ));
                }
            }
            best.expect("source pool is never empty").1
        })
        .collect();

    CompressedImage::new(header, coverage, transforms)
}

/// Iterates the stored maps starting from a seed image.
pub struct Decoder<'a> {
    stream: &'a CompressedImage,
    plane: Vec<f64>,
    iterations: u32,
}

impl<'a> Decoder<'a> {
    /// `seed` defaults to uniform mid-gray.
    pub fn new(stream: &'a CompressedImage, seed: Option<&Image>) -> Result<Self> {
        let h = stream.header();
        let plane = match seed {
            Some(img) => {
                if img.width() != h.width || img.height() != h.height {
                    return Err(FicError::DimensionMismatch(format!(
                        "seed is {}x{}, stream is {}x{}",
                        img.width(),
                        img.height(),
                        h.width,
                        h.height
                    )));
                }
                img.pixels().iter().map(|&v| f64::from(v)).collect()
            }
            None => vec![f64::from(DEFAULT_SEED_VALUE); h.width * h.height],
        };
        Ok(Self {
            stream,
            plane,
            iterations: 0,
        })
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    /// One pass: every covered block is rebuilt from the previous iterate.
    pub fn step(&mut self) {
        let h = self.stream.header();
        let src = h.source_grid();
        let dest = h.dest_grid();
        let cq = h.contrast_quantizer();
        let bq = h.brightness_quantizer();
        let n = h.dest_size;
        let width = h.width;
        let prev = &self.plane;

        let blocks: Vec<((usize, usize), Vec<f64>)> = self
            .stream
            .covered_blocks()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|((bi, bj), t)| {
                let (sr, sc) = src.origin(t.k as usize, t.l as usize);
                let source = Block::from_plane(prev, width, sr, sc, h.source_size, |v| v);
                let reduced = reduce(&source, 2).expect("source size is even");
                let alpha = cq.dequantize(t.alpha_code);
                let beta = bq.dequantize(t.beta_code);
                let mut out = Vec::with_capacity(n * n);
                for r in 0..n {
                    for c in 0..n {
                        let (i, j) = variation_source_index(t.direction, t.angle, n, r, c);
                        out.push((alpha * reduced.get(i, j) + beta).clamp(0.0, 255.0));
                    }
                }
                (dest.origin(bi, bj), out)
            })
            .collect();

        let mut next = self.plane.clone();
        for ((r0, c0), values) in blocks {
            for (r, row) in values.chunks_exact(n).enumerate() {
                next[(r0 + r) * width + c0..][..n].copy_from_slice(row);
            }
        }
        self.plane = next;
        self.iterations += 1;
    }

    /// Current iterate rounded to 8 bits.
    pub fn image(&self) -> Image {
        let h = self.stream.header();
        let pixels = self.plane.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
        Image::new(h.width, h.height, pixels).expect("plane matches header")
    }

    pub fn run(mut self, iterations: u32) -> Image {
        for _ in 0..iterations {
            self.step();
        }
        self.image()
    }
}

/// Decodes with the stream's configured iteration count.
pub fn decode(stream: &CompressedImage, seed: Option<&Image>) -> Result<Image> {
    let iterations = stream.header().decode_iterations;
    Ok(Decoder::new(stream, seed)?.run(iterations))
}
