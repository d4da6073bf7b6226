//! Minimal growable bit vector used for causal pasts and the concurrency matrix.

#[derive(Debug, Clone, Default)]
pub(crate) struct BitVec {
    words: Vec<u64>,
    len: usize,
}

/// Equality is on the set bits; trailing zero padding is ignored.
impl PartialEq for BitVec {
    fn eq(&self, other: &Self) -> bool {
        let n = self.words.len().max(other.words.len());
        (0..n).all(|i| {
            self.words.get(i).copied().unwrap_or(0) == other.words.get(i).copied().unwrap_or(0)
        })
    }
}

impl Eq for BitVec {}

impl BitVec {
    pub fn new() -> Self {
        BitVec::default()
    }

    pub fn with_len(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Grows to `len` bits, padding with zeros. Never shrinks.
    pub fn grow(&mut self, len: usize) {
        if len > self.len {
            self.len = len;
            self.words.resize(len.div_ceil(64), 0);
        }
    }

    pub fn get(&self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn or_assign(&mut self, other: &BitVec) {
        self.grow(other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    /// Intersects in place; bits beyond `other.len` are cleared.
    pub fn and_assign(&mut self, other: &BitVec) {
        for (i, w) in self.words.iter_mut().enumerate() {
            let o = other.words.get(i).copied().unwrap_or(0);
            *w &= o;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}
