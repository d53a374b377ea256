//! Z-fast trie: fat binary search for the exit node and predecessor lookup
//! from an exit-name length.

use serde::{Deserialize, Serialize};

use crate::bitkey::{fattest, BitString};
use crate::error::Result;
use crate::locator::{Backend, HandleMap, Keys, RangeLocator};
use crate::oracle::QueryTrace;
use crate::trie::CompactedTrie;

/// Predecessor rank of `x` given the leaf range `[l..r]` of a node whose
/// extent `x` leaves (or matches).
#[inline]
pub(crate) fn pred_from_range(keys: &Keys, x: u64, l: usize, r: usize) -> Option<usize> {
    let e = keys.extent(l, r);
    let xb = keys.bits(x);
    let common = xb.lcp_len(&e);
    let goes_left = if common == e.len() {
        e.len() == xb.len()
    } else {
        !xb.bit(common)
    };
    if goes_left {
        l.checked_sub(1)
    } else {
        Some(r)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZFastTrie {
    keys: Keys,
    locator: RangeLocator,
    handles: HandleMap,
    root_extent_len: u32,
}

/// One fat binary search in progress on the open window `(a..b)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Fbs {
    pub a: u32,
    pub b: u32,
}

impl Fbs {
    pub fn start(a: u32, b: u32, trace: &mut QueryTrace) -> Self {
        debug_assert!(a < b);
        trace.window = Some((a, b));
        Self { a, b }
    }

    #[inline]
    pub fn done(&self) -> bool {
        self.b <= self.a + 1
    }

    #[inline]
    pub fn step(&mut self, z: &ZFastTrie, xb: &BitString, trace: &mut QueryTrace) {
        let f = fattest(self.a as u64, self.b as u64 - 1) as u32;
        let e = z.handles.extent(&z.locator, &z.keys, &xb.prefix(f));
        trace.fbs_iterations += 1;
        trace.static_fn_probes += 3;
        if f <= e.len() && e.is_proper_prefix_of(xb) {
            self.a = e.len();
        } else {
            self.b = f;
        }
    }

    /// Length of the exit-node name (0 for the root).
    #[inline]
    pub fn name_len(&self, z: &ZFastTrie) -> u32 {
        if self.a == 0 && z.root_extent_len != 0 {
            0
        } else {
            self.a + 1
        }
    }
}

impl ZFastTrie {
    pub fn build(keys: &[u64], width: u32, backend: Backend) -> Result<Self> {
        let keys = Keys::new(keys.to_vec(), width)?;
        let trie = CompactedTrie::build(keys.as_slice(), width)?;
        Self::from_trie(&trie, keys, backend)
    }

    pub fn from_trie(trie: &CompactedTrie, keys: Keys, backend: Backend) -> Result<Self> {
        Ok(Self {
            locator: RangeLocator::build(trie, &keys, backend)?,
            handles: HandleMap::build(trie, backend)?,
            root_extent_len: trie.root().extent.len(),
            keys,
        })
    }

    pub fn keys(&self) -> &Keys {
        &self.keys
    }

    pub fn locator(&self) -> &RangeLocator {
        &self.locator
    }

    pub fn handles(&self) -> &HandleMap {
        &self.handles
    }

    pub fn width(&self) -> u32 {
        self.keys.width()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Exit-node name of `x`, searching lengths in `(a..b)`; the window must
    /// contain the length of the longest internal extent that is a proper
    /// prefix of `x`, or have `a` equal to it.
    pub fn fat_binary_search(&self, x: u64, a: u32, b: u32, trace: &mut QueryTrace) -> BitString {
        self.fat_binary_search_observed(x, a, b, trace, |_, _| {})
    }

    /// As [`fat_binary_search`](Self::fat_binary_search), calling `observe(a, b)`
    /// on entry and after every iteration.
    pub fn fat_binary_search_observed(
        &self,
        x: u64,
        a: u32,
        b: u32,
        trace: &mut QueryTrace,
        mut observe: impl FnMut(u32, u32),
    ) -> BitString {
        let xb = self.keys.bits(x);
        let mut s = Fbs::start(a, b, trace);
        observe(s.a, s.b);
        while !s.done() {
            s.step(self, &xb, trace);
            observe(s.a, s.b);
        }
        xb.prefix(s.name_len(self))
    }

    /// Predecessor rank of `x` from the length `t` of its exit-node name.
    #[inline]
    pub fn pred_at(&self, x: u64, t: u32, trace: &mut QueryTrace) -> Option<usize> {
        let (l, r) = self.locator.range(&self.keys.bits(x).prefix(t));
        trace.static_fn_probes += 2;
        pred_from_range(&self.keys, x, l, r)
    }

    pub fn fbs_pred(&self, x: u64, a: u32, b: u32, trace: &mut QueryTrace) -> Option<usize> {
        let t = self.fat_binary_search(x, a, b, trace).len();
        self.pred_at(x, t, trace)
    }

    /// Predecessor rank by a fat binary search over all lengths.
    pub fn predecessor(&self, x: u64, trace: &mut QueryTrace) -> Option<usize> {
        if self.keys.len() == 1 {
            return self.single(x);
        }
        self.fbs_pred(x, 0, self.width(), trace)
    }

    #[inline]
    pub(crate) fn single(&self, x: u64) -> Option<usize> {
        (x > self.keys.get(0)).then_some(0)
    }

    pub fn space_bits(&self) -> u64 {
        self.locator.space_bits() + self.handles.space_bits()
    }
}
