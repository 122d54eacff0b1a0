//! `.fic` container.
//!
//! ```text
//! offset  size  field
//!  0      4     magic "FIC1"
//!  4      1     version (1)
//!  5      2     width, big-endian
//!  7      2     height, big-endian
//!  9      1     source_size
//! 10      1     dest_size
//! 11      1     step
//! 12      1     flags: bit0 direction, bits1-2 log2(angle count), bit3 box counting
//! 13      1     contrast_bits
//! 14      1     brightness_bits
//! 15      1     t1 (0 when unused)
//! 16      2     t2 * 256, big-endian (0 when unused)
//! 18      1     decode_iterations
//! 19      ..    coverage bitmap, ceil(blocks / 8) bytes, MSB-first
//!         ..    transforms: k, l, [direction], angle, alpha, beta; MSB-first,
//!               zero-padded to a byte boundary at the end
//! ```

use super::{CompressedImage, StreamHeader, Transformation};
use crate::bitio::{BitReader, BitWriter};
use crate::error::{FicError, Result};
use crate::transform::{Angle, CandidateSet, Direction, Quantizer};

pub const MAGIC: &[u8; 4] = b"FIC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 19;

const FLAG_DIRECTION: u8 = 0b0001;
const FLAG_ANGLE_MASK: u8 = 0b0110;
const FLAG_BOX_COUNTING: u8 = 0b1000;

pub fn serialize(c: &CompressedImage) -> Vec<u8> {
    let h = c.header();
    let mut out = Vec::with_capacity(HEADER_LEN + c.coverage().len() / 8 + 1);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(h.width as u16).to_be_bytes());
    out.extend_from_slice(&(h.height as u16).to_be_bytes());
    out.push(h.source_size as u8);
    out.push(h.dest_size as u8);
    out.push(h.step as u8);
    let mut flags = 0u8;
    if h.candidates.mirrored() {
        flags |= FLAG_DIRECTION;
    }
    flags |= (h.candidates.angle_bits() as u8) << 1;
    if h.box_counting.is_some() {
        flags |= FLAG_BOX_COUNTING;
    }
    out.push(flags);
    out.push(h.contrast_bits as u8);
    out.push(h.brightness_bits as u8);
    let (t1, t2) = h.box_counting.unwrap_or((0, 0));
    out.push(t1);
    out.extend_from_slice(&t2.to_be_bytes());
    out.push(h.decode_iterations as u8);

    let mut bitmap = BitWriter::new();
    for &covered in c.coverage() {
        bitmap.write_bool(covered);
    }
    out.extend(bitmap.finish());

    let budget = h.bit_budget();
    let mut w = BitWriter::new();
    for t in c.transforms() {
        w.write(t.k, budget.bits_k);
        w.write(t.l, budget.bits_l);
        if budget.bits_direction > 0 {
            w.write_bool(t.direction == Direction::Mirrored);
        }
        w.write(t.angle.quarter_turns(), budget.bits_angle);
        w.write(t.alpha_code, budget.bits_contrast);
        w.write(t.beta_code, budget.bits_brightness);
    }
    out.extend(w.finish());
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = pos.checked_add(n).ok_or(FicError::TruncatedStream)?;
    let slice = bytes.get(*pos..end).ok_or(FicError::TruncatedStream)?;
    *pos = end;
    Ok(slice)
}

fn invalid(msg: impl Into<String>) -> FicError {
    FicError::InvariantViolation(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<StreamHeader> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(FicError::BadMagic);
    }
    let mut pos = 4;
    let version = take(bytes, &mut pos, 1)?[0];
    if version != VERSION {
        return Err(FicError::VersionMismatch(version));
    }
    let fixed = take(bytes, &mut pos, HEADER_LEN - 5)?;
    let width = u16::from_be_bytes([fixed[0], fixed[1]]) as usize;
    let height = u16::from_be_bytes([fixed[2], fixed[3]]) as usize;
    let (source_size, dest_size, step) = (fixed[4] as usize, fixed[5] as usize, fixed[6] as usize);
    let flags = fixed[7];
    let contrast_bits = u32::from(fixed[8]);
    let brightness_bits = u32::from(fixed[9]);
    let t1 = fixed[10];
    let t2 = u16::from_be_bytes([fixed[11], fixed[12]]);
    let decode_iterations = u32::from(fixed[13]);

    if flags & !(FLAG_DIRECTION | FLAG_ANGLE_MASK | FLAG_BOX_COUNTING) != 0 {
        return Err(invalid(format!("unknown flag bits {flags:#010b}")));
    }
    let angle_bits = (flags & FLAG_ANGLE_MASK) >> 1;
    if angle_bits > 2 {
        return Err(invalid("angle count field exceeds 4 angles"));
    }
    let candidates = CandidateSet::new(flags & FLAG_DIRECTION != 0, 1 << angle_bits)?;
    let box_counting = if flags & FLAG_BOX_COUNTING != 0 {
        if t2 > 512 {
            return Err(invalid(format!("t2 {} outside [0, 2]", f64::from(t2) / 256.0)));
        }
        Some((t1, t2))
    } else {
        if t1 != 0 || t2 != 0 {
            return Err(invalid("thresholds set without box counting"));
        }
        None
    };
    if width == 0 || height == 0 {
        return Err(invalid("zero image dimension"));
    }
    if dest_size == 0 || source_size != 2 * dest_size {
        return Err(invalid(format!(
            "source size {source_size} is not twice destination size {dest_size}"
        )));
    }
    if step == 0 {
        return Err(invalid("zero step"));
    }
    if !width.is_multiple_of(dest_size) || !height.is_multiple_of(dest_size) || source_size > width || source_size > height {
        return Err(invalid(format!(
            "block sizes {source_size}/{dest_size} incompatible with {width}x{height}"
        )));
    }
    if Quantizer::contrast(contrast_bits).is_err() || Quantizer::brightness(brightness_bits).is_err() {
        return Err(invalid(format!(
            "unsupported quantizer widths {contrast_bits}/{brightness_bits}"
        )));
    }
    if decode_iterations == 0 {
        return Err(invalid("zero decode iterations"));
    }
    Ok(StreamHeader {
        width,
        height,
        source_size,
        dest_size,
        step,
        candidates,
        box_counting,
        contrast_bits,
        brightness_bits,
        decode_iterations,
    })
}

pub fn deserialize(bytes: &[u8]) -> Result<CompressedImage> {
    let header = parse_header(bytes)?;
    let mut pos = HEADER_LEN;

    let blocks = header.dest_grid().len();
    let bitmap = take(bytes, &mut pos, blocks.div_ceil(8))?;
    let mut r = BitReader::new(bitmap);
    let coverage = (0..blocks).map(|_| r.read_bool()).collect::<Result<Vec<_>>>()?;
    if r.read(r.remaining() as u32)? != 0 {
        return Err(invalid("non-zero coverage padding"));
    }
    let covered = coverage.iter().filter(|&&c| c).count();

    let budget = header.bit_budget();
    let payload_bits = covered * budget.bits_per_transform as usize;
    let payload = take(bytes, &mut pos, payload_bits.div_ceil(8))?;
    if pos != bytes.len() {
        return Err(invalid(format!("{} trailing bytes", bytes.len() - pos)));
    }
    let mut r = BitReader::new(payload);
    let mut transforms = Vec::with_capacity(covered);
    for _ in 0..covered {
        let k = r.read(budget.bits_k)?;
        let l = r.read(budget.bits_l)?;
        let direction = if budget.bits_direction > 0 && r.read_bool()? {
            Direction::Mirrored
        } else {
            Direction::Identity
        };
        let angle = Angle::ALL[r.read(budget.bits_angle)? as usize];
        let alpha_code = r.read(budget.bits_contrast)?;
        let beta_code = r.read(budget.bits_brightness)?;
        transforms.push(Transformation {
            k,
            l,
            direction,
            angle,
            alpha_code,
            beta_code,
        });
    }
    if r.read(r.remaining() as u32)? != 0 {
        return Err(invalid("non-zero payload padding"));
    }
    CompressedImage::new(header, coverage, transforms)
}
