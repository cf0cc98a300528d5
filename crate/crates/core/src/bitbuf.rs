//! Fixed-length bit storage and the windows that alias into it.
//!
//! A [`BitBuffer`] plays the role of a qubit register. Registers live in a
//! [`RegisterFile`] and are addressed by [`BufferId`]; a [`Window`] names a
//! contiguous bit range of one register and is read or modified as an
//! unsigned little-endian integer, modular in its own width.
//!
//! Windows are plain descriptors. Several may overlap, and none of them
//! borrows the buffer, so the register file stays the single owner of all
//! bits and every mutation goes through it.

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, Zero};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn mask64(bits: usize) -> u64 {
    if bits >= WORD {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[inline]
pub(crate) fn mask128(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitBuffer {
    words: Vec<u64>,
    len: usize,
}

impl BitBuffer {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when every bit is 0.
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.len, "bit {index} out of range {}", self.len);
        (self.words[index / WORD] >> (index % WORD)) & 1 == 1
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit {index} out of range {}", self.len);
        let word = &mut self.words[index / WORD];
        let bit = 1u64 << (index % WORD);
        if value {
            *word |= bit;
        } else {
            *word &= !bit;
        }
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    fn check(&self, offset: usize, width: usize) -> Result<()> {
        match offset.checked_add(width) {
            Some(end) if end <= self.len => Ok(()),
            _ => Err(Error::Range {
                offset,
                width,
                len: self.len,
            }),
        }
    }

    #[inline]
    fn read_u64(&self, offset: usize, width: usize) -> u64 {
        debug_assert!(width <= WORD && offset + width <= self.len);
        if width == 0 {
            return 0;
        }
        let wi = offset / WORD;
        let bi = offset % WORD;
        let mut value = self.words[wi] >> bi;
        if bi + width > WORD {
            value |= self.words[wi + 1] << (WORD - bi);
        }
        value & mask64(width)
    }

    #[inline]
    fn write_u64(&mut self, offset: usize, width: usize, value: u64) {
        debug_assert!(width <= WORD && offset + width <= self.len);
        if width == 0 {
            return;
        }
        let value = value & mask64(width);
        let wi = offset / WORD;
        let bi = offset % WORD;
        let low_bits = (WORD - bi).min(width);
        let low_mask = mask64(low_bits) << bi;
        self.words[wi] = (self.words[wi] & !low_mask) | ((value << bi) & low_mask);
        if low_bits < width {
            let high_bits = width - low_bits;
            let high_mask = mask64(high_bits);
            self.words[wi + 1] =
                (self.words[wi + 1] & !high_mask) | ((value >> low_bits) & high_mask);
        }
    }

    /// Reads up to 128 bits starting at `offset`.
    #[inline]
    pub(crate) fn read_u128(&self, offset: usize, width: usize) -> u128 {
        debug_assert!(width <= 128);
        if width <= WORD {
            u128::from(self.read_u64(offset, width))
        } else {
            let low = self.read_u64(offset, WORD);
            let high = self.read_u64(offset + WORD, width - WORD);
            u128::from(low) | (u128::from(high) << WORD)
        }
    }

    #[inline]
    pub(crate) fn write_u128(&mut self, offset: usize, width: usize, value: u128) {
        debug_assert!(width <= 128);
        if width <= WORD {
            self.write_u64(offset, width, value as u64);
        } else {
            self.write_u64(offset, WORD, value as u64);
            self.write_u64(offset + WORD, width - WORD, (value >> WORD) as u64);
        }
    }

    pub(crate) fn read_big(&self, offset: usize, width: usize) -> BigUint {
        let mut digits = Vec::with_capacity(width.div_ceil(32));
        let mut pos = 0;
        while pos < width {
            let take = (width - pos).min(32);
            digits.push(self.read_u64(offset + pos, take) as u32);
            pos += take;
        }
        BigUint::new(digits)
    }

    /// Writes `value mod 2^width`.
    pub(crate) fn write_big(&mut self, offset: usize, width: usize, value: &BigUint) {
        let digits = value.to_u64_digits();
        let mut pos = 0;
        let mut i = 0;
        while pos < width {
            let take = (width - pos).min(WORD);
            let digit = digits.get(i).copied().unwrap_or(0);
            self.write_u64(offset + pos, take, digit);
            pos += take;
            i += 1;
        }
    }

    /// Copies `width` bits starting at `offset` into 64-bit chunks.
    pub(crate) fn read_chunks(&self, offset: usize, width: usize) -> Vec<u64> {
        (0..width)
            .step_by(WORD)
            .map(|pos| self.read_u64(offset + pos, (width - pos).min(WORD)))
            .collect()
    }

    /// XORs chunks produced by [`Self::read_chunks`] into `[offset, offset + width)`.
    pub(crate) fn xor_chunks(&mut self, offset: usize, width: usize, chunks: &[u64]) {
        for (i, pos) in (0..width).step_by(WORD).enumerate() {
            let take = (width - pos).min(WORD);
            let d = self.read_u64(offset + pos, take);
            self.write_u64(offset + pos, take, d ^ chunks[i]);
        }
    }
}

/// Handle to a register inside a [`RegisterFile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BufferId(pub(crate) u32);

impl BufferId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A contiguous `[offset, offset + width)` range of one register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    buffer: BufferId,
    offset: usize,
    width: usize,
}

impl Window {
    /// Caller guarantees the range lies inside the buffer.
    pub(crate) fn from_parts(buffer: BufferId, offset: usize, width: usize) -> Self {
        Self {
            buffer,
            offset,
            width,
        }
    }

    pub fn buffer(&self) -> BufferId {
        self.buffer
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    /// True when the two windows share at least one bit.
    pub fn overlaps(&self, other: &Window) -> bool {
        self.buffer == other.buffer && self.offset < other.end() && other.offset < self.end()
    }

    /// Sub-window at `offset` relative to this window's start.
    pub fn sub(&self, offset: usize, width: usize) -> Result<Window> {
        let fits = width >= 1 && offset.checked_add(width).is_some_and(|e| e <= self.width);
        if !fits {
            return Err(Error::Range {
                offset,
                width,
                len: self.width,
            });
        }
        Ok(Window {
            buffer: self.buffer,
            offset: self.offset + offset,
            width,
        })
    }

    /// Sub-window from `offset` to the end of this window, or `None` when
    /// nothing is left.
    pub fn tail(&self, offset: usize) -> Option<Window> {
        (offset < self.width).then(|| Window {
            buffer: self.buffer,
            offset: self.offset + offset,
            width: self.width - offset,
        })
    }
}

/// Owner of every register. Slots of released registers are reused.
#[derive(Debug, Default, Clone)]
pub struct RegisterFile {
    slots: Vec<Option<BitBuffer>>,
    vacant: Vec<u32>,
}

impl RegisterFile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates a zeroed register of `length` bits.
    pub fn new_buffer(&mut self, length: usize) -> BufferId {
        let buf = BitBuffer::new(length);
        match self.vacant.pop() {
            Some(slot) => {
                self.slots[slot as usize] = Some(buf);
                BufferId(slot)
            }
            None => {
                let id = u32::try_from(self.slots.len()).expect("register slot overflow");
                self.slots.push(Some(buf));
                BufferId(id)
            }
        }
    }

    /// Removes a register and hands back its final contents.
    pub fn remove(&mut self, id: BufferId) -> Result<BitBuffer> {
        let buf = self
            .slots
            .get_mut(id.index())
            .and_then(Option::take)
            .ok_or(Error::UnknownBuffer(id))?;
        self.vacant.push(id.0);
        Ok(buf)
    }

    pub fn buffer(&self, id: BufferId) -> Result<&BitBuffer> {
        self.slots
            .get(id.index())
            .and_then(Option::as_ref)
            .ok_or(Error::UnknownBuffer(id))
    }

    pub(crate) fn buffer_mut(&mut self, id: BufferId) -> Result<&mut BitBuffer> {
        self.slots
            .get_mut(id.index())
            .and_then(Option::as_mut)
            .ok_or(Error::UnknownBuffer(id))
    }

    /// Number of live registers.
    pub fn live(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn window(&self, id: BufferId, offset: usize, width: usize) -> Result<Window> {
        let buf = self.buffer(id)?;
        buf.check(offset, width)?;
        if width == 0 {
            return Err(Error::Range {
                offset,
                width,
                len: buf.len(),
            });
        }
        Ok(Window {
            buffer: id,
            offset,
            width,
        })
    }

    /// Window over a whole register.
    pub fn full_window(&self, id: BufferId) -> Result<Window> {
        let len = self.buffer(id)?.len();
        self.window(id, 0, len)
    }

    pub fn read_uint(&self, w: Window) -> Result<BigUint> {
        Ok(self.buffer(w.buffer)?.read_big(w.offset, w.width))
    }

    /// Reads a window of at most 128 bits.
    pub fn read_u128(&self, w: Window) -> Result<u128> {
        if w.width > 128 {
            return Err(Error::InvalidInput(format!(
                "window of {} bits does not fit in u128",
                w.width
            )));
        }
        Ok(self.buffer(w.buffer)?.read_u128(w.offset, w.width))
    }

    /// Overwrites the window with `value mod 2^width`. This is register
    /// preparation, not a reversible operation.
    pub fn write_uint(&mut self, w: Window, value: &BigUint) -> Result<()> {
        self.buffer_mut(w.buffer)?
            .write_big(w.offset, w.width, value);
        Ok(())
    }

    /// `value(w) <- (value(w) + delta) mod 2^width(w)`.
    pub fn offset_uint(&mut self, w: Window, delta: &BigInt) -> Result<()> {
        let buf = self.buffer_mut(w.buffer)?;
        if w.width <= 128 {
            let (sign, mag) = delta.clone().into_parts();
            let low = low_u128(&mag);
            let step = if sign == BigSign::Minus {
                low.wrapping_neg()
            } else {
                low
            };
            let old = buf.read_u128(w.offset, w.width);
            buf.write_u128(w.offset, w.width, old.wrapping_add(step) & mask128(w.width));
            return Ok(());
        }
        let modulus = BigUint::one() << w.width;
        let old = BigInt::from(buf.read_big(w.offset, w.width));
        let mut updated = (old + delta) % BigInt::from(modulus.clone());
        if updated < BigInt::zero() {
            updated += BigInt::from(modulus);
        }
        let updated = updated.to_biguint().expect("reduced value is non-negative");
        buf.write_big(w.offset, w.width, &updated);
        Ok(())
    }
}

/// Low 128 bits of an arbitrary-precision value.
pub(crate) fn low_u128(value: &BigUint) -> u128 {
    let digits = value.to_u64_digits();
    let lo = u128::from(digits.first().copied().unwrap_or(0));
    let hi = u128::from(digits.get(1).copied().unwrap_or(0));
    lo | (hi << 64)
}
