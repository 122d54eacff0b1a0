//! Box-counting fractal dimension of destination blocks, used to decide
//! which blocks get a stored transformation.

use rayon::prelude::*;

use crate::error::{FicError, Result};
use crate::image_io::Image;
use crate::preprocess::{Block, BlockGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCountConfig {
    /// A box counts when its mean intensity is strictly above `t1`.
    pub t1: u8,
    /// A block is selected when its dimension is strictly above `t2`.
    pub t2: f64,
    /// Strictly decreasing box edge lengths.
    pub box_sizes: Vec<usize>,
}

impl BoxCountConfig {
    pub fn new(t1: u8, t2: f64, box_sizes: Vec<usize>) -> Result<Self> {
        if !(0.0..=2.0).contains(&t2) {
            return Err(FicError::InvalidConfig(format!("t2 must lie in [0, 2], got {t2}")));
        }
        if box_sizes.len() < 2 {
            return Err(FicError::InvalidConfig(
                "box counting needs at least two box sizes".into(),
            ));
        }
        if box_sizes.contains(&0) || box_sizes.windows(2).any(|w| w[0] <= w[1]) {
            return Err(FicError::InvalidConfig(format!(
                "box sizes must be positive and strictly decreasing, got {box_sizes:?}"
            )));
        }
        Ok(Self { t1, t2, box_sizes })
    }

    /// Default ladder for `block_size`: the powers of two dividing it, from
    /// the block size (or its largest power-of-two divisor) down to 2.
    pub fn default_box_sizes(block_size: usize) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut s = 1usize << (usize::BITS - 1 - block_size.leading_zeros());
        while s >= 2 {
            if block_size.is_multiple_of(s) {
                sizes.push(s);
            }
            s /= 2;
        }
        if sizes.len() < 2 {
            sizes.push(1);
        }
        sizes
    }

    pub fn with_default_sizes(t1: u8, t2: f64, block_size: usize) -> Result<Self> {
        Self::new(t1, t2, Self::default_box_sizes(block_size))
    }

    /// Checks that every box size tiles a block of `block_size` exactly.
    pub fn validate_for(&self, block_size: usize) -> Result<()> {
        match self.box_sizes.iter().find(|&&r| !block_size.is_multiple_of(r)) {
            Some(&box_size) => Err(FicError::NonDivisibleBoxSize {
                size: block_size,
                box_size,
            }),
            None => Ok(()),
        }
    }
}

/// Per-block dimension estimates in raster order.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionMap {
    pub rows: usize,
    pub cols: usize,
    pub t2: f64,
    pub dimensions: Vec<f64>,
    pub selected: Vec<bool>,
}

impl DimensionMap {
    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    /// `(block_row, block_col, D, selected)` in raster order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, bool)> + '_ {
        self.dimensions
            .iter()
            .zip(&self.selected)
            .enumerate()
            .map(|(i, (&d, &s))| (i / self.cols, i % self.cols, d, s))
    }

    /// CSV with header `block_row,block_col,D,selected`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["block_row", "block_col", "D", "selected"])?;
        for (r, c, d, s) in self.entries() {
            w.write_record([
                r.to_string(),
                c.to_string(),
                format!("{d:.6}"),
                u8::from(s).to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Number of `r`×`r` boxes whose mean intensity exceeds `t1`.
pub fn count_boxes(block: &Block, r: usize, t1: f64) -> Result<usize> {
    let n = block.size();
    if r == 0 || !n.is_multiple_of(r) {
        return Err(FicError::NonDivisibleBoxSize { size: n, box_size: r });
    }
    let per_side = n / r;
    let mut sums = vec![0.0; per_side * per_side];
    for (row, values) in block.data().chunks_exact(n).enumerate() {
        let acc = &mut sums[(row / r) * per_side..][..per_side];
        for (s, cells) in acc.iter_mut().zip(values.chunks_exact(r)) {
            *s += cells.iter().sum::<f64>();
        }
    }
    let area = (r * r) as f64;
    Ok(sums.into_iter().filter(|s| s / area > t1).count())
}

/// Least-squares slope of `ln N(r)` against `ln(1/r)`, using only the box
/// sizes with a non-zero count. Fewer than two usable sizes gives 0.
pub fn fractal_dimension(block: &Block, cfg: &BoxCountConfig) -> Result<f64> {
    let mut points = Vec::with_capacity(cfg.box_sizes.len());
    for &r in &cfg.box_sizes {
        let count = count_boxes(block, r, f64::from(cfg.t1))?;
        if count > 0 {
            points.push(((1.0 / r as f64).ln(), (count as f64).ln()));
        }
    }
    if points.len() < 2 {
        return Ok(0.0);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Dimension of every block of `grid` and whether it clears `t2`.
pub fn select_blocks(img: &Image, grid: &BlockGrid, cfg: &BoxCountConfig) -> Result<DimensionMap> {
    cfg.validate_for(grid.block_size)?;
    let dimensions = grid
        .indices()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k, l)| {
            let (r, c) = grid.origin(k, l);
            fractal_dimension(&Block::from_image(img, r, c, grid.block_size), cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DimensionMap {
        rows: grid.rows,
        cols: grid.cols,
        t2: cfg.t2,
        selected: dimensions.iter().map(|&d| d > cfg.t2).collect(),
        dimensions,
    })
}
