//! Deterministic synthetic test images.

use crate::image_io::Image;

/// Diagonal ramp from 0 at the top-left to 255 at the bottom-right.
pub fn gradient(width: usize, height: usize) -> Image {
    let span = (width + height).saturating_sub(2).max(1) as f64;
    Image::from_fn(width, height, |r, c| ((r + c) as f64 * 255.0 / span).round() as u8)
}

/// Alternating 0/255 squares of side `cell`.
pub fn checkerboard(width: usize, height: usize, cell: usize) -> Image {
    let cell = cell.max(1);
    Image::from_fn(width, height, |r, c| {
        if (r / cell + c / cell).is_multiple_of(2) {
            255
        } else {
            0
        }
    })
}

/// Square rendering of the Sierpinski carpet: filled cells 255, holes 0.
pub fn sierpinski_carpet(size: usize) -> Image {
    let mut levels = 0;
    let mut span = 1usize;
    while span < size {
        span *= 3;
        levels += 1;
    }
    let in_hole = |p: usize, q: usize| {
        // map pixel centers onto the 3^levels lattice
        let x = ((2 * p + 1) * span) / (2 * size);
        let y = ((2 * q + 1) * span) / (2 * size);
        let (mut x, mut y) = (x, y);
        for _ in 0..levels {
            if x % 3 == 1 && y % 3 == 1 {
                return true;
            }
            x /= 3;
            y /= 3;
        }
        false
    };
    Image::from_fn(size, size, |r, c| if in_hole(r, c) { 0 } else { 255 })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lattice(seed: u64, octave: u64, x: u64, y: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(octave ^ splitmix64(x ^ splitmix64(y))));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Multi-octave value noise with smoothstep interpolation, seeded.
pub fn value_noise(width: usize, height: usize, seed: u64) -> Image {
    const OCTAVES: [(usize, f64); 4] = [(32, 0.45), (16, 0.25), (8, 0.18), (4, 0.12)];
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    Image::from_fn(width, height, |r, c| {
        let mut v = 0.0;
        for (octave, &(cell, amp)) in OCTAVES.iter().enumerate() {
            let (gy, gx) = (r / cell, c / cell);
            let ty = smooth((r % cell) as f64 / cell as f64);
            let tx = smooth((c % cell) as f64 / cell as f64);
            let o = octave as u64;
            let at = |y: usize, x: usize| lattice(seed, o, x as u64, y as u64);
            let top = at(gy, gx) * (1.0 - tx) + at(gy, gx + 1) * tx;
            let bottom = at(gy + 1, gx) * (1.0 - tx) + at(gy + 1, gx + 1) * tx;
            v += amp * (top * (1.0 - ty) + bottom * ty);
        }
        (v * 255.0).round().clamp(0.0, 255.0) as u8
    })
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 4] = ["gradient", "checkerboard", "carpet", "texture"];

/// Named fixture at the given square size.
pub fn by_name(name: &str, size: usize) -> Option<Image> {
    match name {
        "gradient" => Some(gradient(size, size)),
        "checkerboard" => Some(checkerboard(size, size, 8)),
        "carpet" => Some(sierpinski_carpet(size)),
        "texture" => Some(value_noise(size, size, 0x5eed)),
        _ => None,
    }
}
