//! Range locator, extents, the handle-to-extent map and the prefix patch.
//!
//! Everything here answers correctly on its build domain and returns *some*
//! in-range value elsewhere; callers re-verify against the key array
//! wherever the algorithms need certainty.

pub mod mmphf;
pub mod rank;
pub mod static_fn;

use serde::{Deserialize, Serialize};

use crate::bitkey::{mask, BitString};
use crate::error::{Error, Result};
use crate::trie::{check_sorted, CompactedTrie};
use mmphf::Mmphf;
use rank::RankBits;
pub use static_fn::{Backend, StaticFn};

/// The sorted key array `S`, with the width it is interpreted at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keys {
    values: Vec<u64>,
    width: u32,
}

impl Keys {
    pub fn new(values: Vec<u64>, width: u32) -> Result<Self> {
        check_sorted(&values, width)?;
        Ok(Self { values, width })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn bits(&self, x: u64) -> BitString {
        BitString::key_prefix(x, self.width, self.width)
    }

    /// Longest common prefix of `S[l]` and `S[r]`.
    #[inline]
    pub fn extent(&self, l: usize, r: usize) -> BitString {
        let (a, b) = (self.values[l], self.values[r]);
        let len = if a == b {
            self.width
        } else {
            self.width - 1 - (63 - (a ^ b).leading_zeros())
        };
        BitString::key_prefix(a, self.width, len)
    }
}

/// Total-order encoding that places the begin marker of a node name before
/// every key it prefixes and the end marker after them.
#[inline]
fn begin_item(p: &BitString, w: u32) -> u128 {
    let padded = if p.is_empty() { 0 } else { p.bits() << (w - p.len()) };
    ((padded as u128) << 8) | p.len() as u128
}

#[inline]
fn end_item(p: &BitString, w: u32) -> u128 {
    let padded = if p.is_empty() { 0 } else { p.bits() << (w - p.len()) } | mask(w - p.len());
    ((padded as u128) << 8) | (2 * w + 2 - p.len()) as u128
}

#[inline]
fn key_item(k: u64, w: u32) -> u128 {
    ((k as u128) << 8) | (w + 1) as u128
}

/// Maps a node name to the rank interval of the keys it prefixes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeLocator {
    width: u32,
    n: usize,
    positions: Mmphf,
    is_key: RankBits,
}

impl RangeLocator {
    pub fn build(trie: &CompactedTrie, keys: &Keys, backend: Backend) -> Result<Self> {
        let w = keys.width();
        let mut items: Vec<(u128, bool)> = Vec::with_capacity(2 * trie.node_count() + keys.len());
        for node in trie.nodes() {
            let name = node.name();
            items.push((begin_item(&name, w), false));
            items.push((end_item(&name, w), false));
        }
        items.extend(keys.as_slice().iter().map(|&k| (key_item(k, w), true)));
        items.sort_unstable();
        let sorted: Vec<u128> = items.iter().map(|i| i.0).collect();
        Ok(Self {
            width: w,
            n: keys.len(),
            positions: Mmphf::build(&sorted, backend.derive(0x10c))?,
            is_key: RankBits::from_bits(items.iter().map(|i| i.1)),
        })
    }

    /// Rank of the first key prefixed by the node name `p`.
    #[inline]
    pub fn left(&self, p: &BitString) -> usize {
        if p.len() > self.width {
            return 0;
        }
        let pos = self.positions.get(begin_item(p, self.width));
        self.is_key.rank1(pos).min(self.n - 1)
    }

    /// Rank of the last key prefixed by the node name `p`.
    #[inline]
    pub fn right(&self, p: &BitString) -> usize {
        if p.len() > self.width {
            return 0;
        }
        let pos = self.positions.get(end_item(p, self.width));
        self.is_key.rank1(pos).saturating_sub(1).min(self.n - 1)
    }

    #[inline]
    pub fn range(&self, p: &BitString) -> (usize, usize) {
        (self.left(p), self.right(p))
    }

    /// Extent of the node named `p`: the LCP of its first and last key.
    #[inline]
    pub fn extent(&self, keys: &Keys, p: &BitString) -> BitString {
        let (l, r) = self.range(p);
        keys.extent(l, r)
    }

    pub fn space_bits(&self) -> u64 {
        self.positions.space_bits() + self.is_key.space_bits()
    }
}

/// The z-fast map `T`: handle of an internal node to its extent, realised as
/// a handle-to-name-length function composed with the range locator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HandleMap {
    name_len: StaticFn<BitString>,
}

impl HandleMap {
    pub fn build(trie: &CompactedTrie, backend: Backend) -> Result<Self> {
        let entries: Vec<(BitString, u64)> = trie
            .internal_nodes()
            .map(|n| (n.handle, n.name_len as u64))
            .collect();
        Ok(Self {
            name_len: StaticFn::build(&entries, static_fn::bits_for(trie.width() as u64), backend.derive(0x7))?,
        })
    }

    /// `T(h)`: the extent of the node with handle `h`, and for any other
    /// string the LCP of some two keys (an internal extent unless both ranks
    /// coincide).
    #[inline]
    pub fn extent(&self, locator: &RangeLocator, keys: &Keys, h: &BitString) -> BitString {
        let g = (self.name_len.get(h) as u32).min(h.len());
        locator.extent(keys, &h.prefix(g))
    }

    pub fn len(&self) -> usize {
        self.name_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.name_len.is_empty()
    }

    pub fn space_bits(&self) -> u64 {
        self.name_len.space_bits()
    }
}

/// Verifies a candidate exit-name length `t` for `p`: keeps it when
/// `t ≤ |p|` and `p ⪯ extent(p[0..t))`, otherwise answers ⊥ (`None`).
#[inline]
pub fn patch(t: u32, p: &BitString, locator: &RangeLocator, keys: &Keys) -> Option<u32> {
    if t > p.len() {
        return None;
    }
    p.is_prefix_of(&locator.extent(keys, &p.prefix(t)))
        .then_some(t)
}

/// A prefix-to-exit-name-length function patched to answer ⊥ outside the
/// prefixes of the key set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatchedFn {
    f: StaticFn<BitString>,
}

impl PatchedFn {
    /// `entries` pairs each `p` of the domain with `|n_exit(p)|`.
    pub fn build(entries: &[(BitString, u64)], width: u32, backend: Backend) -> Result<Self> {
        if let Some((p, _)) = entries.iter().find(|(p, t)| *t > p.len() as u64) {
            return Err(Error::Contract(format!("exit name longer than prefix {p}")));
        }
        Ok(Self {
            f: StaticFn::build(entries, static_fn::bits_for(width as u64), backend)?,
        })
    }

    #[inline]
    pub fn get(&self, p: &BitString, locator: &RangeLocator, keys: &Keys) -> Option<u32> {
        patch(self.f.get(p) as u32, p, locator, keys)
    }

    /// The unpatched value, as stored.
    pub fn raw(&self, p: &BitString) -> u64 {
        self.f.get(p)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn space_bits(&self) -> u64 {
        self.f.space_bits()
    }
}
