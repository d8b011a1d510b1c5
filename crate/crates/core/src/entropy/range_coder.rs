//! Byte-oriented range coder.
//!
//! The coder keeps a 56-bit window of the code value in a `u64`, with bit 56
//! acting as the carry. Carries are resolved with a cached byte plus a run of
//! pending `0xFF` bytes. Output is big-endian.
//!
//! Stream layout: one byte per normalization shift followed by a 4-byte
//! flush tail. A stream that coded no symbols is empty. The decoder preloads
//! seven bytes and treats up to three bytes past the end as zeros; needing
//! more than that means the payload was truncated.

use crate::error::{Error, Result};

const WINDOW_BITS: u32 = 56;
const MASK: u64 = (1u64 << WINDOW_BITS) - 1;
/// Renormalize once the range drops below this.
const BOTTOM: u64 = 1u64 << 48;
const TOP_BYTE_SHIFT: u32 = WINDOW_BITS - 8;
const TAIL_BYTES: usize = 4;
const PRELOAD_BYTES: usize = (WINDOW_BITS / 8) as usize;
const MAX_OVERRUN: usize = PRELOAD_BYTES - TAIL_BYTES;

#[derive(Debug)]
pub struct RangeEncoder {
    low: u64,
    range: u64,
    cache: Option<u8>,
    pending: usize,
    out: Vec<u8>,
    symbols: usize,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: MASK,
            cache: None,
            pending: 0,
            out: Vec::new(),
            symbols: 0,
        }
    }

    /// Codes the sub-interval `[cum, cum + freq)` of `[0, total)`.
    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) -> Result<()> {
        if freq == 0 || total == 0 || cum as u64 + freq as u64 > total as u64 {
            return Err(Error::Entropy(format!(
                "invalid interval [{cum}, {cum}+{freq}) of {total}"
            )));
        }
        let r = self.range / total as u64;
        self.low += r * cum as u64;
        self.range = r * freq as u64;
        while self.range < BOTTOM {
            self.shift_low();
            self.range <<= 8;
        }
        self.symbols += 1;
        Ok(())
    }

    fn shift_low(&mut self) {
        let carry = (self.low >> WINDOW_BITS) as u8;
        if carry != 0 || (self.low >> TOP_BYTE_SHIFT) & 0xFF != 0xFF {
            if let Some(c) = self.cache {
                self.out.push(c.wrapping_add(carry));
            }
            for _ in 0..self.pending {
                self.out.push(0xFFu8.wrapping_add(carry));
            }
            self.pending = 0;
            self.cache = Some(((self.low >> TOP_BYTE_SHIFT) & 0xFF) as u8);
        } else {
            self.pending += 1;
        }
        self.low = (self.low << 8) & MASK;
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.symbols == 0 {
            return Vec::new();
        }
        // Any value in [low, low + range) identifies the stream; pick one whose
        // bits below the tail are zero so they need not be written.
        let drop_bits = WINDOW_BITS - 8 * TAIL_BYTES as u32;
        let round = (1u64 << drop_bits) - 1;
        self.low = (self.low + round) & !round;
        for _ in 0..TAIL_BYTES {
            self.shift_low();
        }
        if let Some(c) = self.cache {
            self.out.push(c);
        }
        for _ in 0..self.pending {
            self.out.push(0xFF);
        }
        self.out
    }
}

#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    overrun: usize,
    code: u64,
    range: u64,
    step: u64,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        if data.len() < TAIL_BYTES {
            return Err(Error::Entropy(format!(
                "payload exhausted: {} bytes is shorter than the flush tail",
                data.len()
            )));
        }
        let mut d = RangeDecoder {
            data,
            pos: 0,
            overrun: 0,
            code: 0,
            range: MASK,
            step: 1,
        };
        for _ in 0..PRELOAD_BYTES {
            let b = d.next_byte();
            d.code = (d.code << 8) | b as u64;
        }
        d.check_overrun()?;
        Ok(d)
    }

    #[inline]
    fn next_byte(&mut self) -> u8 {
        match self.data.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                b
            }
            None => {
                self.overrun += 1;
                0
            }
        }
    }

    fn check_overrun(&self) -> Result<()> {
        if self.overrun > MAX_OVERRUN {
            return Err(Error::Entropy("payload exhausted early".into()));
        }
        Ok(())
    }

    /// Position of the next symbol within `[0, total)`; must be followed by
    /// [`RangeDecoder::consume`] with the interval that contains it.
    #[inline]
    pub fn target(&mut self, total: u32) -> u32 {
        self.step = self.range / total as u64;
        ((self.code / self.step).min(total as u64 - 1)) as u32
    }

    pub fn consume(&mut self, cum: u32, freq: u32) -> Result<()> {
        self.code -= self.step * cum as u64;
        self.range = self.step * freq as u64;
        while self.range < BOTTOM {
            let b = self.next_byte();
            self.code = ((self.code << 8) | b as u64) & MASK;
            self.range <<= 8;
        }
        self.check_overrun()
    }

    /// Bytes present beyond the end of the encoded stream.
    pub fn trailing_unread(&self) -> usize {
        (self.data.len() + MAX_OVERRUN).saturating_sub(self.pos + self.overrun)
    }
}
