//! Packed bit sequences.
//!
//! All sequence material (keystream, ciphertext, noise) lives in
//! 64-bit limbs, least significant bit first. Operations that combine
//! two sequences require equal lengths.

/// Fixed-length bit sequence packed into u64 limbs.
///
/// Invariant: bits at positions >= len in the last limb are zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSequence {
    limbs: Vec<u64>,
    len: usize,
}

impl BitSequence {
    /// All-zero sequence of the given length.
    pub fn zeros(len: usize) -> Self {
        BitSequence {
            limbs: vec![0u64; len.div_ceil(64)],
            len,
        }
    }

    /// Collects bits (0/1) from an iterator of bools.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut limbs = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len % 64 == 0 {
                limbs.push(0u64);
            }
            if b {
                *limbs.last_mut().expect("limb pushed above") |= 1u64 << (len % 64);
            }
            len += 1;
        }
        BitSequence { limbs, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len);
        (self.limbs[idx / 64] >> (idx % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, value: bool) {
        debug_assert!(idx < self.len);
        let mask = 1u64 << (idx % 64);
        if value {
            self.limbs[idx / 64] |= mask;
        } else {
            self.limbs[idx / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.limbs[idx / 64] ^= 1u64 << (idx % 64);
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    /// Number of positions where the two sequences differ.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "hamming over unequal lengths");
        self.limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// In-place XOR with another sequence of the same length.
    pub fn xor_with(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor over unequal lengths");
        for (a, b) in self.limbs.iter_mut().zip(&other.limbs) {
            *a ^= b;
        }
    }

    /// XOR into a fresh sequence.
    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    /// Number of positions where both sequences have a set bit.
    pub fn and_count(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "and over unequal lengths");
        self.limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Parity (XOR) of the bits at the given positions.
    pub fn parity_at(&self, positions: &[u32]) -> bool {
        let mut acc = false;
        for &p in positions {
            acc ^= self.get(p as usize);
        }
        acc
    }

    /// Iterator over bits as bools, position order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl std::fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitSequence[{}; ", self.len)?;
        let shown = self.len.min(64);
        for i in 0..shown {
            write!(f, "{}", self.get(i) as u8)?;
        }
        if self.len > shown {
            write!(f, "..")?;
        }
        write!(f, "]")
    }
}
