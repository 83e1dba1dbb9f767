//! 32-bit flag words and the two bit-scan primitives the decoder relies on.

/// Index of the most significant set bit (31 = MSB), `None` for zero.
#[inline]
pub fn firstbithigh(word: u32) -> Option<u32> {
    if word == 0 {
        None
    } else {
        Some(31 - word.leading_zeros())
    }
}

/// Population count.
#[inline]
pub fn countbits(word: u32) -> u32 {
    word.count_ones()
}

/// Number of 32-bit words needed for `bits` flags.
#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(32)
}

/// Bit vector packed into little-endian-ordered 32-bit words: bit `k` of
/// word `w` is flag `32 * w + k`. Padding bits are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlagBits {
    words: Vec<u32>,
    len: usize,
}

impl FlagBits {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds from raw words; rejects a word count that does not match
    /// `len` and set padding bits.
    pub fn from_words(words: Vec<u32>, len: usize) -> Option<Self> {
        if words.len() != words_for(len) {
            return None;
        }
        if !len.is_multiple_of(32) {
            let last = *words.last()?;
            if last >> (len % 32) != 0 {
                return None;
            }
        }
        Some(Self { words, len })
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(32) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % 32);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "flag {i} out of range {}", self.len);
        self.words[i / 32] >> (i % 32) & 1 == 1
    }

    /// Flips flag `i` in place.
    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 32] ^= 1 << (i % 32);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|&w| countbits(w) as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

impl FromIterator<bool> for FlagBits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = FlagBits::new();
        for b in iter {
            bits.push(b);
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn firstbithigh_examples() {
        assert_eq!(firstbithigh(0x8000_0000), Some(31));
        assert_eq!(firstbithigh(0x0000_0001), Some(0));
        assert_eq!(firstbithigh(0), None);
        assert_eq!(firstbithigh(0x0000_F0F0), Some(15));
    }

    #[test]
    fn countbits_examples() {
        assert_eq!(countbits(0xFFFF_FFFF), 32);
        assert_eq!(countbits(0), 0);
        assert_eq!(countbits(0x0000_FF00), 8);
    }

    #[test]
    fn padding_must_be_zero() {
        assert!(FlagBits::from_words(vec![0b111], 3).is_some());
        assert!(FlagBits::from_words(vec![0b1111], 3).is_none());
        assert!(FlagBits::from_words(vec![0, 0], 3).is_none());
        assert!(FlagBits::from_words(vec![], 0).is_some());
    }

    proptest! {
        #[test]
        fn firstbithigh_matches_scan(w: u32) {
            let scan = (0..32).rev().find(|&k| w >> k & 1 == 1);
            prop_assert_eq!(firstbithigh(w), scan);
        }

        #[test]
        fn packing_preserves_bits(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let packed: FlagBits = bits.iter().copied().collect();
            prop_assert_eq!(packed.words().len(), words_for(bits.len()));
            prop_assert_eq!(packed.iter().collect::<Vec<_>>(), bits.clone());
            let again = FlagBits::from_words(packed.words().to_vec(), bits.len()).unwrap();
            prop_assert_eq!(again, packed);
        }
    }
}
