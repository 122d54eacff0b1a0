//! MSB-first bit packing.

use crate::error::{FicError, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Bits already used in the last byte (0 means byte-aligned).
    used: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || value >> width == 0, "value {value} exceeds {width} bits");
        for i in (0..width).rev() {
            if self.used == 0 {
                self.bytes.push(0);
            }
            let bit = ((value >> i) & 1) as u8;
            let last = self.bytes.last_mut().expect("pushed above");
            *last |= bit << (7 - self.used);
            self.used = (self.used + 1) % 8;
        }
    }

    pub fn write_bool(&mut self, bit: bool) {
        self.write(u32::from(bit), 1);
    }

    pub fn bit_len(&self) -> usize {
        if self.used == 0 {
            self.bytes.len() * 8
        } else {
            (self.bytes.len() - 1) * 8 + self.used as usize
        }
    }

    /// Zero-pads to a byte boundary and returns the bytes.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn read(&mut self, width: u32) -> Result<u32> {
        debug_assert!(width <= 32);
        if self.pos + width as usize > self.bytes.len() * 8 {
            return Err(FicError::TruncatedStream);
        }
        let mut value = 0u32;
        for _ in 0..width {
            let byte = self.bytes[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            value = (value << 1) | u32::from(bit);
            self.pos += 1;
        }
        Ok(value)
    }

    pub fn read_bool(&mut self) -> Result<bool> {
        Ok(self.read(1)? == 1)
    }

    pub fn bit_pos(&self) -> usize {
        self.pos
    }

    /// Bits left before the end of the buffer.
    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        w.write(0b1, 1);
        w.write(0b1_1110_0001, 9);
        assert_eq!(w.bit_len(), 13);
        assert_eq!(w.finish(), vec![0b1011_1111, 0b0000_1000]);
    }

    #[test]
    fn zero_width_is_noop() {
        let mut w = BitWriter::new();
        w.write(0, 0);
        assert_eq!(w.bit_len(), 0);
        assert!(w.finish().is_empty());
        let mut r = BitReader::new(&[]);
        assert_eq!(r.read(0).unwrap(), 0);
    }

    #[test]
    fn reading_past_end() {
        let mut r = BitReader::new(&[0xff]);
        assert_eq!(r.read(5).unwrap(), 0b11111);
        assert!(matches!(r.read(4), Err(FicError::TruncatedStream)));
    }

    proptest! {
        #[test]
        fn round_trip(fields in proptest::collection::vec((any::<u32>(), 0u32..=32), 0..64)) {
            let fields: Vec<(u32, u32)> = fields
                .into_iter()
                .map(|(v, w)| (if w == 32 { v } else { v & ((1u32 << w) - 1) }, w))
                .collect();
            let mut w = BitWriter::new();
            for &(v, width) in &fields {
                w.write(v, width);
            }
            let total: u32 = fields.iter().map(|f| f.1).sum();
            prop_assert_eq!(w.bit_len(), total as usize);
            let bytes = w.finish();
            prop_assert_eq!(bytes.len(), (total as usize).div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &(v, width) in &fields {
                prop_assert_eq!(r.read(width).unwrap(), v);
            }
        }
    }
}
