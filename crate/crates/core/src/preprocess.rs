//! Block geometry, source-block reduction and the Gaussian pre-filter.

use crate::error::{FicError, Result};
use crate::image_io::Image;

/// Square tiling of an image with a fixed block size and step.
///
/// Block `(k, l)` covers rows `[k*step, k*step + block_size)` and columns
/// `[l*step, l*step + block_size)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub step: usize,
    pub rows: usize,
    pub cols: usize,
}

impl BlockGrid {
    pub fn new(width: usize, height: usize, block_size: usize, step: usize) -> Result<Self> {
        if block_size == 0 || step == 0 {
            return Err(FicError::InvalidConfig(
                "block size and step must be at least 1".into(),
            ));
        }
        if block_size > width || block_size > height {
            return Err(FicError::BlockTooLarge {
                block_size,
                width,
                height,
            });
        }
        Ok(Self {
            block_size,
            step,
            rows: (height - block_size) / step + 1,
            cols: (width - block_size) / step + 1,
        })
    }

    pub fn for_image(img: &Image, block_size: usize, step: usize) -> Result<Self> {
        Self::new(img.width(), img.height(), block_size, step)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Top-left pixel `(row, col)` of block `(k, l)`.
    pub fn origin(&self, k: usize, l: usize) -> (usize, usize) {
        (k * self.step, l * self.step)
    }

    /// Block indices in raster order.
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |k| (0..self.cols).map(move |l| (k, l)))
    }
}

/// Square block of real-valued intensities, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    size: usize,
    data: Vec<f64>,
}

impl Block {
    pub fn new(size: usize, data: Vec<f64>) -> Self {
        assert!(size >= 1, "block size must be at least 1");
        assert_eq!(data.len(), size * size, "block data must be size x size");
        Self { size, data }
    }

    pub fn constant(size: usize, value: f64) -> Self {
        Self::new(size, vec![value; size * size])
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                data.push(f(r, c));
            }
        }
        Self::new(size, data)
    }

    /// Copies the `size`×`size` window at `(row, col)` out of an 8-bit image.
    pub fn from_image(img: &Image, row: usize, col: usize, size: usize) -> Self {
        Self::from_plane(img.pixels(), img.width(), row, col, size, |v| v as f64)
    }

    /// Copies a window out of any row-major plane.
    pub fn from_plane<T: Copy>(
        plane: &[T],
        width: usize,
        row: usize,
        col: usize,
        size: usize,
        to_f64: impl Fn(T) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for r in row..row + size {
            let start = r * width + col;
            data.extend(plane[start..start + size].iter().map(|&v| to_f64(v)));
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Splits `img` into `block_size` blocks on a `step` grid, in raster order.
pub fn partition(img: &Image, block_size: usize, step: usize) -> Result<Vec<(usize, usize, Block)>> {
    let grid = BlockGrid::for_image(img, block_size, step)?;
    Ok(grid
        .indices()
        .map(|(k, l)| {
            let (r, c) = grid.origin(k, l);
            (k, l, Block::from_image(img, r, c, block_size))
        })
        .collect())
}

/// Shrinks a block by averaging each `factor`×`factor` tile.
///
/// Tiles are accumulated one input row at a time; every output sum sees its
/// inputs in the same row-major order as a per-tile double loop, so the
/// result is bit-identical to the naive reduction.
pub fn reduce(block: &Block, factor: usize) -> Result<Block> {
    if factor == 0 || !block.size.is_multiple_of(factor) {
        return Err(FicError::NonDivisibleFactor {
            size: block.size,
            factor,
        });
    }
    if factor == 1 {
        return Ok(block.clone());
    }
    let out_size = block.size / factor;
    let mut out = vec![0.0; out_size * out_size];
    for (r, row) in block.data.chunks_exact(block.size).enumerate() {
        let acc = &mut out[(r / factor) * out_size..][..out_size];
        for (tile, cells) in acc.iter_mut().zip(row.chunks_exact(factor)) {
            for &v in cells {
                *tile += v;
            }
        }
    }
    let area = (factor * factor) as f64;
    for v in &mut out {
        *v /= area;
    }
    Ok(Block::new(out_size, out))
}

/// Normalized 1-D Gaussian kernel of radius `ceil(3 * sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|x| (-((x * x) as f64) / denom).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= total;
    }
    kernel
}

/// Half-sample symmetric reflection: `-1 -> 0`, `n -> n - 1`.
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian blur with reflected borders. `sigma == 0` is the identity.
pub fn gaussian_filter(block: &Block, sigma: f64) -> Block {
    if sigma <= 0.0 {
        return block.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let n = block.size;

    let mut horizontal = vec![0.0; n * n];
    for r in 0..n {
        let row = &block.data[r * n..][..n];
        for c in 0..n {
            horizontal[r * n + c] = kernel
                .iter()
                .enumerate()
                .map(|(i, w)| w * row[reflect(c as i64 + i as i64 - radius, n)])
                .sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = kernel
                .iter()
                .enumerate()
                .map(|(i, w)| w * horizontal[reflect(r as i64 + i as i64 - radius, n) * n + c])
                .sum();
        }
    }
    Block::new(n, out)
}
