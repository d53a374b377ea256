//! Finger predecessor search on top of a weak prefix-search layer.

use serde::{Deserialize, Serialize};

use crate::bitkey::BitString;
use crate::distsearch::long::next_probe;
use crate::error::{contract, Result};
use crate::locator::static_fn::bits_for;
use crate::locator::{Backend, Keys, StaticFn};
use crate::oracle::QueryTrace;
use crate::zfast::{pred_from_range, ZFastTrie};

/// Leaf-rank block of every prefix of the key set. Answers for strings
/// outside the prefix set are arbitrary; [`in_pref`](Self::in_pref) rules
/// them out with one key access.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakPrefixIndex {
    rank_bits: u32,
    n: usize,
    blocks: StaticFn<BitString>,
}

impl WeakPrefixIndex {
    pub fn build(keys: &Keys, backend: Backend) -> Result<Self> {
        let (w, n) = (keys.width(), keys.len());
        let rank_bits = bits_for(n as u64 - 1).max(1);
        let mut entries = Vec::new();
        for len in 0..=w {
            let mut l = 0;
            while l < n {
                let p = BitString::key_prefix(keys.get(l), w, len);
                let mut r = l;
                while r + 1 < n && BitString::key_prefix(keys.get(r + 1), w, len) == p {
                    r += 1;
                }
                entries.push((p, ((l as u64) << rank_bits) | r as u64));
                l = r + 1;
            }
        }
        Ok(Self {
            rank_bits,
            n,
            blocks: StaticFn::build(&entries, 2 * rank_bits, backend.derive(0xf1))?,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    #[inline]
    pub fn weak_range(&self, p: &BitString) -> (usize, usize) {
        let v = self.blocks.get(p);
        let l = (v >> self.rank_bits) as usize;
        let r = (v & ((1 << self.rank_bits) - 1)) as usize;
        (l.min(self.n - 1), r.min(self.n - 1))
    }

    pub fn in_pref(&self, keys: &Keys, p: &BitString) -> bool {
        let (l, _) = self.weak_range(p);
        p.is_prefix_of(&keys.bits(keys.get(l)))
    }

    pub fn extent_any(&self, keys: &Keys, p: &BitString) -> BitString {
        let (l, r) = self.weak_range(p);
        keys.extent(l, r)
    }

    pub fn space_bits(&self) -> u64 {
        self.blocks.space_bits()
    }
}

/// `max{s : y[0..s) + 1 ⪯ x}` for `y < x`.
pub fn cut_point(x: u64, y: u64, width: u32) -> Result<u32> {
    if y >= x {
        return contract(format!("finger {y} is not below the query {x}"));
    }
    let c = width - 1 - (63 - (x ^ y).leading_zeros());
    // bits after position c where y is 1 and x is 0, as a run from the top
    let below = if c + 1 >= width { 0 } else { width - c - 1 };
    let run_mask = y & !x;
    let shifted = if below == 0 { 0 } else { run_mask << (64 - below) };
    let j = shifted.leading_ones().min(below);
    Ok(c + 1 + j)
}

/// Outcome of a finger search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerOutcome {
    pub rank: Option<usize>,
    pub trace: QueryTrace,
    pub cut: u32,
    /// Length of the extent the loop started from, if it was entered.
    pub extent_len: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FingerIndex {
    weak: WeakPrefixIndex,
}

impl FingerIndex {
    pub fn build(keys: &Keys, backend: Backend) -> Result<Self> {
        Ok(Self {
            weak: WeakPrefixIndex::build(keys, backend)?,
        })
    }

    pub fn weak(&self) -> &WeakPrefixIndex {
        &self.weak
    }

    pub fn space_bits(&self) -> u64 {
        self.weak.space_bits()
    }

    /// Predecessor rank of `x` given a key `y < x` of the set.
    pub fn pred_finger(&self, z: &ZFastTrie, x: u64, y: u64) -> Result<FingerOutcome> {
        let keys = z.keys();
        let w = keys.width();
        let weak = &self.weak;
        let yb = keys.bits(y);
        let mut out = FingerOutcome::default();
        let tr = &mut out.trace;
        tr.static_fn_probes += 1;
        if !weak.in_pref(keys, &yb) {
            return contract(format!("finger {y} is not a key"));
        }
        out.cut = cut_point(x, y, w)?;
        let t = out.cut;
        let xb = keys.bits(x);
        let q = xb.prefix(t);
        tr.static_fn_probes += 1;
        let e = weak.extent_any(keys, &q);
        if !q.is_prefix_of(&e) {
            tr.static_fn_probes += 1;
            out.rank = Some(weak.weak_range(&yb.prefix(t)).1);
            return Ok(out);
        }
        if !e.is_proper_prefix_of(&xb) {
            let (l, r) = weak.weak_range(&q);
            out.rank = pred_from_range(keys, x, l, r);
            return Ok(out);
        }
        let el = e.len();
        out.extent_len = Some(el);
        let mut a = 0;
        while 2 * a < w - el {
            tr.loop_iterations += 1;
            let m = next_probe(a, w - el);
            let p = xb.prefix(m + el);
            tr.static_fn_probes += 1;
            if !weak.in_pref(keys, &p) {
                out.rank = z.fbs_pred(x, a + el, m + el, tr);
                return Ok(out);
            }
            let (l, r) = weak.weak_range(&p);
            if keys.get(l) >= x {
                out.rank = l.checked_sub(1);
                return Ok(out);
            }
            if keys.get(r) < x {
                out.rank = Some(r);
                return Ok(out);
            }
            a = keys.extent(l, r).len() - el;
        }
        out.rank = z.fbs_pred(x, a + el, w, tr);
        Ok(out)
    }
}
