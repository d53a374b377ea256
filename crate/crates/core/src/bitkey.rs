//! Fixed-width binary strings and the word-level arithmetic the tries are
//! built on.
//!
//! Bit index 0 is the most significant (leftmost) bit of a string. A
//! [`BitString`] of length `len` stores its bits right-aligned in a `u64`, so
//! the prefix of length `l` of a `w`-bit key `x` is simply `x >> (w - l)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Largest supported key width.
pub const MAX_WIDTH: u32 = 64;

/// Low-`len` bits mask; `len` may be 64.
#[inline]
pub(crate) fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Binary logarithm with the convention `lg(x) = 1` whenever `x < 2`.
pub fn lg(x: f64) -> f64 {
    if x < 2.0 {
        1.0
    } else {
        x.log2()
    }
}

/// `⌈lg(n)⌉` for integers, under the same convention.
pub fn ceil_lg(n: u64) -> u32 {
    if n < 2 {
        1
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// A binary string of length at most [`MAX_WIDTH`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString {
    bits: u64,
    len: u8,
}

impl BitString {
    pub const EMPTY: BitString = BitString { bits: 0, len: 0 };

    pub fn new(bits: u64, len: u32) -> Result<Self> {
        if len > MAX_WIDTH {
            return contract(format!("string length {len} exceeds {MAX_WIDTH}"));
        }
        if bits & !mask(len) != 0 {
            return contract(format!("bits {bits:#x} do not fit in length {len}"));
        }
        Ok(Self { bits, len: len as u8 })
    }

    #[inline]
    pub(crate) fn from_raw(bits: u64, len: u32) -> Self {
        debug_assert!(len <= MAX_WIDTH && bits & !mask(len) == 0);
        Self { bits, len: len as u8 }
    }

    /// The prefix of length `len` of the `width`-bit key `value`.
    #[inline]
    pub fn key_prefix(value: u64, width: u32, len: u32) -> Self {
        debug_assert!(len <= width);
        if len == 0 {
            Self::EMPTY
        } else {
            Self::from_raw(value >> (width - len), len)
        }
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.len as u32
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i` (0 is leftmost).
    #[inline]
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    /// `self[0..len)`; `len` must not exceed the length.
    #[inline]
    pub fn prefix(&self, len: u32) -> Self {
        debug_assert!(len <= self.len());
        if len == 0 {
            Self::EMPTY
        } else {
            Self::from_raw(self.bits >> (self.len() - len), len)
        }
    }

    /// The substring `self[a..b)`.
    pub fn slice(&self, a: u32, b: u32) -> Result<Self> {
        if a > b || b > self.len() {
            return contract(format!("slice [{a}..{b}) of a string of length {}", self.len()));
        }
        let p = self.prefix(b);
        Ok(Self::from_raw(p.bits & mask(b - a), b - a))
    }

    /// Appends one bit.
    pub fn push(&self, bit: bool) -> Result<Self> {
        if self.len() == MAX_WIDTH {
            return contract("string is already at maximum length");
        }
        Ok(Self::from_raw((self.bits << 1) | bit as u64, self.len() + 1))
    }

    /// Length of the longest common prefix.
    #[inline]
    pub fn lcp_len(&self, other: &Self) -> u32 {
        let l = self.len().min(other.len());
        if l == 0 {
            return 0;
        }
        let diff = self.prefix(l).bits ^ other.prefix(l).bits;
        if diff == 0 {
            l
        } else {
            l - 1 - (63 - diff.leading_zeros())
        }
    }

    pub fn lcp(&self, other: &Self) -> Self {
        self.prefix(self.lcp_len(other))
    }

    /// Prefix order `self ⪯ other`.
    #[inline]
    pub fn is_prefix_of(&self, other: &Self) -> bool {
        self.len() <= other.len() && other.prefix(self.len()).bits == self.bits
    }

    /// Strict prefix order `self ≺ other`.
    #[inline]
    pub fn is_proper_prefix_of(&self, other: &Self) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// Lexicographic successor among strings of the same length (`p + 1`).
    pub fn succ(&self) -> Option<Self> {
        (self.bits != mask(self.len())).then(|| Self::from_raw(self.bits + 1, self.len()))
    }

    /// Lexicographic predecessor among strings of the same length (`p - 1`).
    pub fn pred(&self) -> Option<Self> {
        (!self.is_empty() && self.bits != 0).then(|| Self::from_raw(self.bits - 1, self.len()))
    }
}

/// Lexicographic order; a proper prefix sorts before its extensions.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let l = self.lcp_len(other);
        if l == self.len().min(other.len()) {
            self.len().cmp(&other.len())
        } else {
            self.bit(l).cmp(&other.bit(l))
        }
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Self::EMPTY);
        }
        let mut out = Self::EMPTY;
        for c in s.chars() {
            out = match c {
                '0' => out.push(false)?,
                '1' => out.push(true)?,
                _ => return contract(format!("invalid bit character {c:?}")),
            };
        }
        Ok(out)
    }
}

/// A `width`-bit key, viewed both as an integer and as a bit sequence.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Key {
    value: u64,
    width: u8,
}

impl Key {
    pub fn new(value: u64, width: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Width(width));
        }
        if value & !mask(width) != 0 {
            return Err(Error::KeyRange { value, width });
        }
        Ok(Self { value, width: width as u8 })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width as u32
    }

    pub fn as_bits(&self) -> BitString {
        BitString::from_raw(self.value, self.width())
    }

    pub fn prefix(&self, len: u32) -> BitString {
        BitString::key_prefix(self.value, self.width(), len)
    }

    pub fn slice(&self, a: u32, b: u32) -> Result<BitString> {
        self.as_bits().slice(a, b)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.as_bits(), f)
    }
}

/// Index of the most significant set bit.
pub fn msb(z: u64) -> Result<u32> {
    if z == 0 {
        return contract("msb of zero");
    }
    Ok(63 - z.leading_zeros())
}

#[inline]
pub(crate) fn fattest(a: u64, b: u64) -> u64 {
    debug_assert!(a < b);
    (u64::MAX << (63 - (a ^ b).leading_zeros())) & b
}

/// The 2-fattest number of the half-open interval `(a..b]`: the unique
/// element with the most trailing zeros.
pub fn two_fattest(a: u64, b: u64) -> Result<u64> {
    if a >= b {
        return contract(format!("empty interval ({a}..{b}]"));
    }
    Ok(fattest(a, b))
}

/// Same as [`two_fattest`], found by testing decreasing powers of two.
pub fn two_fattest_iterative(a: u64, b: u64) -> Result<u64> {
    if a >= b {
        return contract(format!("empty interval ({a}..{b}]"));
    }
    let span = b - a;
    let mut i = if span == 1 { 0 } else { 64 - (span - 1).leading_zeros() };
    loop {
        let m = if i >= 64 { 0 } else { u64::MAX << i };
        if m & a != m & b {
            return Ok(b & m);
        }
        // At i = 0 the test always succeeds since a != b.
        i -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn tz_scan(a: u64, b: u64) -> u64 {
        (a + 1..=b).max_by_key(|v| v.trailing_zeros()).unwrap()
    }

    #[test]
    fn slice_examples() {
        let x = Key::new(0b0110, 4).unwrap();
        assert_eq!(x.slice(0, 3).unwrap(), bs("011"));
        assert_eq!(x.slice(0, 0).unwrap(), BitString::EMPTY);
        assert_eq!(x.slice(1, 3).unwrap(), bs("11"));
        assert_eq!(bs("00100110100100").slice(0, 8).unwrap(), bs("00100110"));
        assert!(x.slice(2, 5).is_err());
        assert!(x.slice(3, 2).is_err());
    }

    #[test]
    fn lcp_examples() {
        assert_eq!(bs("0110").lcp(&bs("0010")), bs("0"));
        assert_eq!(bs("0100").lcp(&bs("0111")), bs("01"));
        assert_eq!(bs("1011").lcp(&bs("1011")), bs("1011"));
        assert_eq!(bs("10").lcp(&bs("1011")), bs("10"));
        assert_eq!(bs("0").lcp(&bs("1")), BitString::EMPTY);
    }

    #[test]
    fn two_fattest_examples() {
        assert_eq!(two_fattest(7, 13).unwrap(), 8);
        assert_eq!(two_fattest(5, 7).unwrap(), 6);
        assert_eq!(two_fattest(0, 13).unwrap(), 8);
        assert_eq!(two_fattest(0, 1).unwrap(), 1);
        assert!(two_fattest(4, 4).is_err());
        assert!(two_fattest_iterative(9, 3).is_err());
    }

    #[test]
    fn two_fattest_exhaustive() {
        for a in 0..256u64 {
            for b in a + 1..=256 {
                let f = two_fattest(a, b).unwrap();
                assert!(a < f && f <= b);
                assert_eq!(f, tz_scan(a, b), "({a}..{b}]");
                assert_eq!(two_fattest_iterative(a, b).unwrap(), f);
                // the two halves contain at most one multiple of 2^tz(f)
                let step = 1u64 << f.trailing_zeros();
                let multiples = |lo: u64, hi: u64| (lo + 1..=hi).filter(|v| v % step == 0).count();
                assert!(multiples(a, f - 1) <= 1);
                assert!(multiples(f, b) <= 1);
            }
        }
    }

    #[test]
    fn two_fattest_from_zero_is_power_of_two() {
        for b in 1..5000u64 {
            assert_eq!(two_fattest(0, b).unwrap(), 1 << msb(b).unwrap());
        }
        assert_eq!(two_fattest(0, u64::MAX).unwrap(), 1 << 63);
    }

    #[test]
    fn msb_examples() {
        assert_eq!(msb(1).unwrap(), 0);
        assert_eq!(msb(8).unwrap(), 3);
        assert_eq!(msb(13).unwrap(), 3);
        assert!(msb(0).is_err());
    }

    #[test]
    fn succ_and_pred_prefix() {
        assert_eq!(bs("0011").succ(), Some(bs("0100")));
        assert_eq!(bs("111").succ(), None);
        assert_eq!(bs("000").pred(), None);
        assert_eq!(bs("100").pred(), Some(bs("011")));
        assert_eq!(BitString::EMPTY.succ(), None);
        assert_eq!(BitString::EMPTY.pred(), None);
    }

    #[test]
    fn log_convention() {
        assert_eq!(lg(0.0), 1.0);
        assert_eq!(lg(1.5), 1.0);
        assert_eq!(lg(8.0), 3.0);
        assert_eq!(ceil_lg(0), 1);
        assert_eq!(ceil_lg(1), 1);
        assert_eq!(ceil_lg(2), 1);
        assert_eq!(ceil_lg(5), 3);
        assert_eq!(ceil_lg(8), 3);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(bs("0101").to_string(), "0101");
        assert_eq!(BitString::EMPTY.to_string(), "ε");
        assert!("012".parse::<BitString>().is_err());
        assert!(Key::new(16, 4).is_err());
        assert!(Key::new(0, 0).is_err());
        assert_eq!(Key::new(u64::MAX, 64).unwrap().prefix(64).bits(), u64::MAX);
    }

    fn arb_string() -> impl Strategy<Value = BitString> {
        (0u32..=64, any::<u64>()).prop_map(|(len, bits)| BitString::from_raw(bits & mask(len), len))
    }

    proptest! {
        #[test]
        fn lcp_is_commutative_and_matches_first_difference(u in arb_string(), v in arb_string()) {
            let l = u.lcp(&v);
            prop_assert_eq!(l, v.lcp(&u));
            prop_assert_eq!(u.lcp(&u), u);
            prop_assert!(l.is_prefix_of(&u) && l.is_prefix_of(&v));
            let first_diff = (0..u.len().min(v.len()))
                .find(|&i| u.bit(i) != v.bit(i))
                .unwrap_or(u.len().min(v.len()));
            prop_assert_eq!(l.len(), first_diff);
        }

        #[test]
        fn succ_pred_are_inverse(p in arb_string()) {
            if let Some(s) = p.succ() {
                prop_assert_eq!(s.pred(), Some(p));
            }
            if let Some(q) = p.pred() {
                prop_assert_eq!(q.succ(), Some(p));
            }
        }

        #[test]
        fn two_fattest_routes_agree(a in any::<u64>(), span in 1u64..u64::MAX) {
            let b = a.saturating_add(span);
            prop_assume!(a < b);
            prop_assert_eq!(two_fattest(a, b).unwrap(), two_fattest_iterative(a, b).unwrap());
        }
    }
}
