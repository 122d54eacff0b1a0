//! Geometric variations of source blocks, contrast/brightness fitting and
//! the uniform scalar quantizers used for the stored parameters.

use std::fmt;

use crate::error::{FicError, Result};
use crate::preprocess::Block;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Identity,
    /// Horizontal mirror (columns reversed), applied before rotation.
    Mirrored,
}

/// Counterclockwise rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Angle {
    Deg0,
    Deg90,
    Deg180,
    Deg270,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg90, Angle::Deg180, Angle::Deg270];

    pub fn degrees(self) -> u16 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg90 => 90,
            Angle::Deg180 => 180,
            Angle::Deg270 => 270,
        }
    }

    pub fn from_degrees(deg: u16) -> Option<Self> {
        match deg {
            0 => Some(Angle::Deg0),
            90 => Some(Angle::Deg90),
            180 => Some(Angle::Deg180),
            270 => Some(Angle::Deg270),
            _ => None,
        }
    }

    /// Quarter turns, which is also the angle's code in the bitstream.
    pub fn quarter_turns(self) -> u32 {
        self.degrees() as u32 / 90
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// The spatial variations the encoder tries for every source block.
///
/// Only the sets that can be described by the stream header are
/// representable: directions are `{identity}` or `{identity, mirrored}`,
/// and angles are the first 1, 2 or 4 of `0, 90, 180, 270`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    mirrored: bool,
    angle_count: usize,
}

impl CandidateSet {
    /// All eight dihedral variations.
    pub const FULL: CandidateSet = CandidateSet {
        mirrored: true,
        angle_count: 4,
    };

    /// No mirror, rotations of 0 and 90 degrees only.
    pub const REDUCED: CandidateSet = CandidateSet {
        mirrored: false,
        angle_count: 2,
    };

    pub fn new(mirrored: bool, angle_count: usize) -> Result<Self> {
        if !matches!(angle_count, 1 | 2 | 4) {
            return Err(FicError::InvalidConfig(format!(
                "angle count must be 1, 2 or 4, got {angle_count}"
            )));
        }
        Ok(Self {
            mirrored,
            angle_count,
        })
    }

    /// Builds a set from explicit lists; angles must be a prefix of
    /// `0, 90, 180, 270` (in any order) so the header can describe them.
    pub fn from_lists(directions: &[Direction], angles: &[Angle]) -> Result<Self> {
        if !directions.contains(&Direction::Identity) {
            return Err(FicError::InvalidConfig(
                "identity direction must be included".into(),
            ));
        }
        let mut sorted = angles.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != angles.len() {
            return Err(FicError::InvalidConfig("duplicate angles".into()));
        }
        if sorted[..] != Angle::ALL[..sorted.len()] {
            return Err(FicError::InvalidConfig(format!(
                "angle set {:?} unsupported; use 0 | 0,90 | 0,90,180,270",
                angles.iter().map(|a| a.degrees()).collect::<Vec<_>>()
            )));
        }
        Self::new(directions.contains(&Direction::Mirrored), sorted.len())
    }

    pub fn mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn angle_count(&self) -> usize {
        self.angle_count
    }

    pub fn directions(&self) -> &'static [Direction] {
        if self.mirrored {
            &[Direction::Identity, Direction::Mirrored]
        } else {
            &[Direction::Identity]
        }
    }

    pub fn angles(&self) -> &'static [Angle] {
        &Angle::ALL[..self.angle_count]
    }

    /// Candidates in tie-break order: directions as declared, then angles ascending.
    pub fn iter(&self) -> impl Iterator<Item = (Direction, Angle)> + '_ {
        self.directions()
            .iter()
            .flat_map(move |&d| self.angles().iter().map(move |&a| (d, a)))
    }

    pub fn len(&self) -> usize {
        self.directions().len() * self.angle_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn direction_bits(&self) -> u32 {
        u32::from(self.mirrored)
    }

    pub fn angle_bits(&self) -> u32 {
        self.angle_count.trailing_zeros()
    }
}

/// Source pixel `(row, col)` that lands at `(r, c)` after the variation.
#[inline]
pub fn variation_source_index(
    direction: Direction,
    angle: Angle,
    n: usize,
    r: usize,
    c: usize,
) -> (usize, usize) {
    let (i, j) = match angle {
        Angle::Deg0 => (r, c),
        Angle::Deg90 => (c, n - 1 - r),
        Angle::Deg180 => (n - 1 - r, n - 1 - c),
        Angle::Deg270 => (n - 1 - c, r),
    };
    match direction {
        Direction::Identity => (i, j),
        Direction::Mirrored => (i, n - 1 - j),
    }
}

/// Mirrors (optionally) and then rotates a block counterclockwise.
pub fn apply_variation(block: &Block, direction: Direction, angle: Angle) -> Block {
    let n = block.size();
    if direction == Direction::Identity && angle == Angle::Deg0 {
        return block.clone();
    }
    Block::from_fn(n, |r, c| {
        let (i, j) = variation_source_index(direction, angle, n, r, c);
        block.get(i, j)
    })
}

/// Uniform quantizer over `[lo, hi]` with `2^bits` levels including both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantizer {
    bits: u32,
    lo: f64,
    hi: f64,
}

impl Quantizer {
    pub const CONTRAST_RANGE: (f64, f64) = (-2.0, 2.0);
    pub const BRIGHTNESS_RANGE: (f64, f64) = (-255.0, 255.0);
    pub const MAX_BITS: u32 = 16;

    pub fn new(bits: u32, lo: f64, hi: f64) -> Result<Self> {
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(FicError::InvalidConfig(format!(
                "quantizer bits must be in 1..={}, got {bits}",
                Self::MAX_BITS
            )));
        }
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(FicError::InvalidConfig(format!(
                "quantizer range [{lo}, {hi}] is empty"
            )));
        }
        Ok(Self { bits, lo, hi })
    }

    /// Contrast quantizer over `[-2, 2]`.
    pub fn contrast(bits: u32) -> Result<Self> {
        if bits < 2 {
            return Err(FicError::InvalidConfig(
                "contrast needs at least 2 bits to keep |alpha| < 2".into(),
            ));
        }
        Self::new(bits, Self::CONTRAST_RANGE.0, Self::CONTRAST_RANGE.1)
    }

    /// Brightness quantizer over `[-255, 255]`.
    pub fn brightness(bits: u32) -> Result<Self> {
        Self::new(bits, Self::BRIGHTNESS_RANGE.0, Self::BRIGHTNESS_RANGE.1)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.max_code() as f64
    }

    pub fn quantize(&self, value: f64) -> u32 {
        let v = value.clamp(self.lo, self.hi);
        let code = ((v - self.lo) / self.step()).round();
        (code.max(0.0) as u32).min(self.max_code())
    }

    pub fn dequantize(&self, code: u32) -> f64 {
        if code >= self.max_code() {
            return self.hi;
        }
        self.lo + code as f64 * self.step()
    }

    /// Values that quantize strictly inside the end codes. Fitted contrast is
    /// clamped here so every stored alpha satisfies `|alpha| < 2`.
    pub fn interior_range(&self) -> (f64, f64) {
        if self.max_code() < 2 {
            return (self.lo, self.hi);
        }
        (self.lo + self.step(), self.hi - self.step())
    }
}

/// Best variation and quantized intensity map for one destination block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedTransform {
    pub direction: Direction,
    pub angle: Angle,
    pub alpha_code: u32,
    pub beta_code: u32,
    pub mse: f64,
}

/// Block statistics reused across every destination a source is scored against.
#[derive(Clone, Debug)]
pub struct PreparedBlock {
    pub data: Vec<f64>,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub centered_ss: f64,
}

impl PreparedBlock {
    pub fn new(data: Vec<f64>) -> Self {
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let centered_ss = data.iter().map(|v| (v - mean) * (v - mean)).sum();
        Self {
            data,
            mean,
            centered_ss,
        }
    }

    pub fn from_block(block: &Block) -> Self {
        Self::new(block.data().to_vec())
    }
}

/// Least-squares `(alpha, beta)` from prepared statistics, alpha clamped into
/// the contrast quantizer's interior and beta refit for the clamped alpha.
fn fit_prepared(source: &PreparedBlock, dest: &PreparedBlock, contrast: &Quantizer) -> (f64, f64) {
    let alpha = if source.centered_ss == 0.0 {
        0.0
    } else {
        let cov: f64 = source
            .data
            .iter()
            .zip(&dest.data)
            .map(|(s, d)| (s - source.mean) * (d - dest.mean))
            .sum();
        cov / source.centered_ss
    };
    let (lo, hi) = contrast.interior_range();
    let alpha = alpha.clamp(lo, hi);
    (alpha, dest.mean - alpha * source.mean)
}

/// Least-squares contrast and brightness mapping `source` onto `dest`.
///
/// A constant source yields `alpha = 0, beta = mean(dest)`.
pub fn fit_contrast_brightness(source: &Block, dest: &Block, contrast: &Quantizer) -> (f64, f64) {
    assert_eq!(source.size(), dest.size(), "blocks must have the same size");
    fit_prepared(
        &PreparedBlock::from_block(source),
        &PreparedBlock::from_block(dest),
        contrast,
    )
}

/// Quantized parameters and resulting MSE of mapping `source` onto `dest`.
///
/// Brightness is refit against the dequantized contrast before it is
/// quantized, and the score uses the dequantized pair the decoder will see.
pub fn score_prepared(
    source: &PreparedBlock,
    dest: &PreparedBlock,
    contrast: &Quantizer,
    brightness: &Quantizer,
) -> (u32, u32, f64) {
    let (alpha, _) = fit_prepared(source, dest, contrast);
    let alpha_code = contrast.quantize(alpha);
    let alpha_hat = contrast.dequantize(alpha_code);
    let beta_code = brightness.quantize(dest.mean - alpha_hat * source.mean);
    let beta_hat = brightness.dequantize(beta_code);
    let sse: f64 = source
        .data
        .iter()
        .zip(&dest.data)
        .map(|(s, d)| {
            let e = alpha_hat * s + beta_hat - d;
            e * e
        })
        .sum();
    (alpha_code, beta_code, sse / source.data.len() as f64)
}

/// Tries every candidate variation of `reduced_source` against `dest` and
/// keeps the lowest MSE; ties go to the earliest candidate.
pub fn best_fit(
    reduced_source: &Block,
    dest: &Block,
    candidates: &CandidateSet,
    contrast: &Quantizer,
    brightness: &Quantizer,
) -> FittedTransform {
    assert_eq!(reduced_source.size(), dest.size(), "blocks must have the same size");
    let dest = PreparedBlock::from_block(dest);
    let mut best: Option<FittedTransform> = None;
    for (direction, angle) in candidates.iter() {
        let varied = PreparedBlock::from_block(&apply_variation(reduced_source, direction, angle));
        let (alpha_code, beta_code, mse) = score_prepared(&varied, &dest, contrast, brightness);
        if best.is_none_or(|b| mse < b.mse) {
            best = Some(FittedTransform {
                direction,
                angle,
                alpha_code,
                beta_code,
                mse,
            });
        }
    }
    best.expect("candidate sets are never empty")
}
