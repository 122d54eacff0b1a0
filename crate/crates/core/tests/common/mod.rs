#![allow(dead_code)]

use fic::codec::StreamHeader;
use fic::{Angle, CodecConfig, CompressedImage, Direction, Image, Transformation};

/// Straight-line reference encoder: no pool precomputation, no parallelism,
/// every block and variation rebuilt from pixels with plain loops.
pub fn reference_encode(img: &Image, cfg: &CodecConfig) -> CompressedImage {
    assert_eq!(cfg.gaussian_sigma, 0.0, "reference encoder has no pre-filter");
    assert!(cfg.box_counting.is_none(), "reference encoder covers every block");
    let (w, h) = (img.width(), img.height());
    let n = cfg.dest_size;
    let src_rows = (h - cfg.source_size) / cfg.step + 1;
    let src_cols = (w - cfg.source_size) / cfg.step + 1;

    let c_lo = -2.0;
    let c_levels = (1u32 << cfg.contrast_bits) - 1;
    let c_step = 4.0 / c_levels as f64;
    let b_lo = -255.0;
    let b_levels = (1u32 << cfg.brightness_bits) - 1;
    let b_step = 510.0 / b_levels as f64;
    let quant = |v: f64, lo: f64, step: f64, max: u32| -> u32 {
        let hi = lo + max as f64 * step;
        (((v.clamp(lo, hi) - lo) / step).round().max(0.0) as u32).min(max)
    };
    let dequant = |code: u32, lo: f64, step: f64, max: u32, hi: f64| -> f64 {
        if code >= max {
            hi
        } else {
            lo + code as f64 * step
        }
    };

    let mut transforms = Vec::new();
    for bi in 0..h / n {
        for bj in 0..w / n {
            let mut d = vec![0.0; n * n];
            for r in 0..n {
                for c in 0..n {
                    d[r * n + c] = img.get(bi * n + r, bj * n + c) as f64;
                }
            }
            let mut best: Option<(f64, Transformation)> = None;
            for k in 0..src_rows {
                for l in 0..src_cols {
                    let mut reduced = vec![0.0; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            let mut s = 0.0;
                            for a in 0..2 {
                                for b in 0..2 {
                                    s += img.get(k * cfg.step + 2 * i + a, l * cfg.step + 2 * j + b) as f64;
                                }
                            }
                            reduced[i * n + j] = s / 4.0;
                        }
                    }
                    for &direction in cfg.candidates.directions() {
                        for &angle in cfg.candidates.angles() {
                            let mut v = vec![0.0; n * n];
                            for r in 0..n {
                                for c in 0..n {
                                    // undo the counterclockwise quarter turns, then the mirror
                                    let (mut i, mut j) = (r, c);
                                    for _ in 0..angle.quarter_turns() {
                                        (i, j) = (j, n - 1 - i);
                                    }
                                    if direction == Direction::Mirrored {
                                        j = n - 1 - j;
                                    }
                                    v[r * n + c] = reduced[i * n + j];
                                }
                            }
                            let px = (n * n) as f64;
                            let mut ss = 0.0;
                            for x in &v {
                                ss += x;
                            }
                            let ms = ss / px;
                            let mut sd = 0.0;
                            for y in &d {
                                sd += y;
                            }
                            let md = sd / px;
                            let mut sxx = 0.0;
                            for x in &v {
                                sxx += (x - ms) * (x - ms);
                            }
                            let mut sxy = 0.0;
                            for (x, y) in v.iter().zip(&d) {
                                sxy += (x - ms) * (y - md);
                            }
                            let alpha = if sxx == 0.0 { 0.0 } else { sxy / sxx };
                            let alpha = alpha.clamp(c_lo + c_step, 2.0 - c_step);
                            let ac = quant(alpha, c_lo, c_step, c_levels);
                            let ah = dequant(ac, c_lo, c_step, c_levels, 2.0);
                            let bc = quant(md - ah * ms, b_lo, b_step, b_levels);
                            let bh = dequant(bc, b_lo, b_step, b_levels, 255.0);
                            let mut sse = 0.0;
                            for (x, y) in v.iter().zip(&d) {
                                let e = ah * x + bh - y;
                                sse += e * e;
                            }
                            let mse = sse / px;
                            if best.as_ref().is_none_or(|(m, _)| mse < *m) {
                                best = Some((
                                    mse,
                                    Transformation {
                                        k: k as u32,
                                        l: l as u32,
                                        direction,
                                        angle,
                                        alpha_code: ac,
                                        beta_code: bc,
                                    },
                                ));
                            }
                        }
                    }
                }
            }
            transforms.push(best.unwrap().1);
        }
    }
    let header = StreamHeader::new(w, h, cfg).unwrap();
    let count = transforms.len();
    CompressedImage::new(header, vec![true; count], transforms).unwrap()
}

pub fn random_image(width: usize, height: usize, seed: u64) -> Image {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(width, height, |_, _| rng.random())
}

pub fn max_abs_diff(a: &Image, b: &Image) -> u8 {
    a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

/// Stream with the first `count` destination blocks covered by copies of one
/// transformation; content is irrelevant to bit accounting.
pub fn synthetic_stream(width: usize, height: usize, cfg: &CodecConfig, count: usize) -> CompressedImage {
    let header = StreamHeader::new(width, height, cfg).unwrap();
    let blocks = header.dest_grid().len();
    let coverage: Vec<bool> = (0..blocks).map(|i| i < count).collect();
    let t = Transformation {
        k: 0,
        l: 0,
        direction: Direction::Identity,
        angle: Angle::Deg0,
        alpha_code: 0,
        beta_code: 0,
    };
    CompressedImage::new(header, coverage, vec![t; count]).unwrap()
}
