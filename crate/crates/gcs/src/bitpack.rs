//! Fixed-width bit-packed symbol sequences.
//!
//! Symbols are stored `width` bits each, with the earliest symbol in the
//! lowest-order bits of the first word. Copies between buffers move up to
//! 64 bits per step, so runs of packed symbols transfer word-at-a-time.

/// A growable sequence of fixed-width values packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedString {
    words: Vec<u64>,
    width: u32,
    bits: usize,
}

impl PackedString {
    /// `width` must be in `1..=32`.
    pub fn new(width: u32) -> Self {
        assert!((1..=32).contains(&width), "unsupported symbol width {width}");
        PackedString { words: Vec::new(), width, bits: 0 }
    }

    pub fn with_capacity(width: u32, n: usize) -> Self {
        let mut p = Self::new(width);
        p.words.reserve((n * width as usize + 63) / 64);
        p
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.bits / self.width as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_raw(words: Vec<u64>, width: u32, len: usize) -> Self {
        assert!(words.len() * 64 >= len * width as usize);
        PackedString { words, width, bits: len * width as usize }
    }

    fn mask(width: u32) -> u64 {
        if width == 64 { u64::MAX } else { (1u64 << width) - 1 }
    }

    /// Read `nbits <= 64` bits starting at absolute bit position `pos`.
    fn get_bits(&self, pos: usize, nbits: u32) -> u64 {
        debug_assert!(nbits <= 64);
        if nbits == 0 {
            return 0;
        }
        let word = pos / 64;
        let shift = (pos % 64) as u32;
        let mut v = self.words[word] >> shift;
        let taken = 64 - shift;
        if nbits > taken {
            v |= self.words[word + 1] << taken;
        }
        v & Self::mask(nbits)
    }

    /// Append `nbits <= 64` bits.
    fn push_bits(&mut self, value: u64, nbits: u32) {
        debug_assert!(nbits == 64 || value < (1u64 << nbits));
        if nbits == 0 {
            return;
        }
        let word = self.bits / 64;
        let shift = (self.bits % 64) as u32;
        if word == self.words.len() {
            self.words.push(0);
        }
        self.words[word] |= value << shift;
        let avail = 64 - shift;
        if nbits > avail {
            self.words.push(value >> avail);
        }
        self.bits += nbits as usize;
    }

    /// Append one value.
    pub fn push(&mut self, value: u64) {
        debug_assert!(value <= Self::mask(self.width));
        self.push_bits(value & Self::mask(self.width), self.width);
    }

    /// Value at index `i` (0-based).
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len());
        self.get_bits(i * self.width as usize, self.width)
    }

    /// Append `count` values copied from `other[start..start + count]`.
    /// Both buffers must use the same width. Moves whole words where possible.
    pub fn extend_from(&mut self, other: &PackedString, start: usize, count: usize) {
        debug_assert_eq!(self.width, other.width);
        debug_assert!(start + count <= other.len());
        let w = self.width as usize;
        let mut src_bit = start * w;
        let mut remaining = count * w;
        while remaining > 0 {
            let chunk = remaining.min(64) as u32;
            let v = other.get_bits(src_bit, chunk);
            self.push_bits(v, chunk);
            src_bit += chunk as usize;
            remaining -= chunk as usize;
        }
    }

    /// Append `count` values copied from `self[start..start + count]`.
    /// The source range must lie before the current end.
    pub fn extend_from_self(&mut self, start: usize, count: usize) {
        debug_assert!(start + count <= self.len());
        let w = self.width as usize;
        let mut src_bit = start * w;
        let mut remaining = count * w;
        while remaining > 0 {
            let chunk = remaining.min(64) as u32;
            let v = self.get_bits(src_bit, chunk);
            self.push_bits(v, chunk);
            src_bit += chunk as usize;
            remaining -= chunk as usize;
        }
    }

    /// All values as a plain vector.
    pub fn to_vec(&self) -> Vec<u64> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}
