use std::fmt;

/// A point of the Boolean cube `{0,1}^n`, packed 64 coordinates per word.
///
/// Bits beyond `len` are always zero, so word-level operations (weight,
/// equality, AND) never see stale padding.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut a = Assignment {
            len,
            words: vec![!0; word_count(len)],
        };
        a.clear_padding();
        a
    }

    /// Indicator vector of `support`. Indices must be `< len`.
    pub fn indicator<I: IntoIterator<Item = usize>>(len: usize, support: I) -> Self {
        let mut a = Assignment::zeros(len);
        for i in support {
            a.set(i, true);
        }
        a
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut a = Assignment::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                a.set(i, true);
            }
        }
        a
    }

    /// Low `len` bits of `value`, coordinate `i` taken from bit `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 coordinates");
        let mut a = Assignment::zeros(len);
        if len > 0 {
            a.words[0] = value;
            a.clear_padding();
        }
        a
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range for arity {}", self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Componentwise product `self * other`.
    pub fn and(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    pub fn and_assign(&mut self, other: &Assignment) {
        assert_eq!(self.len, other.len, "arity mismatch in componentwise product");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    pub fn xor_assign(&mut self, other: &Assignment) {
        assert_eq!(self.len, other.len, "arity mismatch in componentwise sum");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Overwrites `self` with `other` without reallocating.
    pub fn copy_from(&mut self, other: &Assignment) {
        assert_eq!(self.len, other.len);
        self.words.copy_from_slice(&other.words);
    }

    /// Coordinates set to one, in increasing order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Value of the assignment read as an integer with coordinate 0 as the
    /// least significant bit. Only meaningful for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Hex rendering with coordinate 0 as the least significant bit.
    pub fn to_hex(&self) -> String {
        if self.len == 0 {
            return "0".to_string();
        }
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.words[bit >> 6] >> (bit & 63)) & 0xf;
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub(crate) fn clear_padding(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let bits: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
            write!(f, "Assignment({bits})")
        } else {
            write!(f, "Assignment(n={}, ones={:?})", self.len, self.ones_iter().collect::<Vec<_>>())
        }
    }
}
