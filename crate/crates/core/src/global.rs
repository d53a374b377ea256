//! Predecessor search whose cost depends on the ratio between the largest
//! and smallest gap of the key set: keys are bucketed by their top
//! `⌈lg n⌉` bits and each bucket gets its own long-distance index.

use serde::{Deserialize, Serialize};

use crate::bitkey::{ceil_lg, mask};
use crate::distsearch::LongIndex;
use crate::error::{Error, Result};
use crate::locator::{Backend, Keys};
use crate::oracle::QueryTrace;
use crate::trie::{check_sorted, CompactedTrie};
use crate::zfast::ZFastTrie;

/// Largest and smallest gap between consecutive keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalStats {
    pub delta_max: u64,
    pub delta_min: u64,
}

impl GlobalStats {
    pub fn ratio(&self) -> f64 {
        self.delta_max as f64 / self.delta_min as f64
    }
}

pub fn stats(keys: &[u64]) -> Result<GlobalStats> {
    if keys.len() < 2 {
        return Err(Error::TooFewKeys { needed: 2, got: keys.len() });
    }
    let gaps = keys.windows(2).map(|p| p[1] - p[0]);
    Ok(GlobalStats {
        delta_max: gaps.clone().max().unwrap(),
        delta_min: gaps.min().unwrap(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Bucket {
    z: ZFastTrie,
    long: LongIndex,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalIndex {
    width: u32,
    bucket_bits: u32,
    keys: Vec<u64>,
    offsets: Vec<usize>,
    /// Position in `buckets` of each bucket holding two or more keys.
    slot: Vec<u32>,
    buckets: Vec<Bucket>,
    stats: GlobalStats,
}

const NO_SLOT: u32 = u32::MAX;

impl GlobalIndex {
    pub fn build(keys: &[u64], width: u32, backend: Backend) -> Result<Self> {
        check_sorted(keys, width)?;
        let stats = stats(keys)?;
        let bucket_bits = ceil_lg(keys.len() as u64).min(width);
        let inner = width - bucket_bits;
        let count = 1usize << bucket_bits;
        let mut offsets = Vec::with_capacity(count + 1);
        let mut slot = vec![NO_SLOT; count];
        let mut buckets = Vec::new();
        let mut start = 0;
        for (i, s) in slot.iter_mut().enumerate() {
            offsets.push(start);
            let end = start + keys[start..].partition_point(|&k| (k >> inner) as usize == i);
            if end - start >= 2 {
                let local: Vec<u64> = keys[start..end].iter().map(|&k| k & mask(inner)).collect();
                let trie = CompactedTrie::build(&local, inner)?;
                let be = backend.derive(i as u64 + 0x100);
                *s = buckets.len() as u32;
                buckets.push(Bucket {
                    long: LongIndex::build(&trie, be)?,
                    z: ZFastTrie::from_trie(&trie, Keys::new(local, inner)?, be)?,
                });
            }
            start = end;
        }
        offsets.push(start);
        debug_assert_eq!(start, keys.len());
        Ok(Self {
            width,
            bucket_bits,
            keys: keys.to_vec(),
            offsets,
            slot,
            buckets,
            stats,
        })
    }

    pub fn bucket_bits(&self) -> u32 {
        self.bucket_bits
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn stats(&self) -> GlobalStats {
        self.stats
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Index of the bucket holding `x`.
    pub fn bucket_of(&self, x: u64) -> usize {
        (x >> (self.width - self.bucket_bits)) as usize
    }

    pub fn pred_global(&self, x: u64, trace: &mut QueryTrace) -> Option<usize> {
        *trace = QueryTrace::default();
        let i = self.bucket_of(x);
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        if lo == hi || x <= self.keys[lo] {
            return lo.checked_sub(1);
        }
        if x > self.keys[hi - 1] {
            return Some(hi - 1);
        }
        let b = &self.buckets[self.slot[i] as usize];
        let inner = self.width - self.bucket_bits;
        let r = b.long.pred_long(&b.z, x & mask(inner), trace);
        Some(lo + r.expect("x lies above the bucket minimum"))
    }

    pub fn space_bits(&self) -> u64 {
        let offsets = self.offsets.len() as u64 * (ceil_lg(self.keys.len() as u64 + 1) as u64);
        offsets
            + self
                .buckets
                .iter()
                .map(|b| b.long.space_bits() + b.z.space_bits())
                .sum::<u64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    const FOUR: [u64; 4] = [0b0010, 0b0100, 0b0111, 0b1101];

    #[test]
    fn four_key_layout() {
        let g = GlobalIndex::build(&FOUR, 4, Backend::Exact).unwrap();
        assert_eq!(g.bucket_bits(), 2);
        assert_eq!(g.offsets(), &[0, 1, 3, 3, 4]);
        assert_eq!(g.buckets.len(), 1);
        let mut tr = QueryTrace::default();
        // bucket 10 is empty
        assert_eq!(g.pred_global(0b1011, &mut tr), Some(2));
        assert_eq!(g.pred_global(0b0001, &mut tr), None);
        assert_eq!(g.pred_global(0b0110, &mut tr), Some(1));
        assert_eq!(g.pred_global(0b0100, &mut tr), Some(0));
    }

    #[test]
    fn stats_examples() {
        assert_eq!(stats(&FOUR).unwrap(), GlobalStats { delta_max: 6, delta_min: 2 });
        assert_eq!(stats(&[0, 15]).unwrap(), GlobalStats { delta_max: 15, delta_min: 15 });
        let even: Vec<u64> = (0..16).map(|i| i * 8).collect();
        let s = stats(&even).unwrap();
        assert_eq!(s.delta_max, s.delta_min);
        assert!(stats(&[3]).is_err());
        assert!(GlobalIndex::build(&[3], 4, Backend::Exact).is_err());
    }

    #[test]
    fn clustered_set_uses_one_bucket() {
        let keys: Vec<u64> = (0..10).collect();
        let g = GlobalIndex::build(&keys, 16, Backend::Exact).unwrap();
        assert_eq!(g.buckets.len(), 1);
        assert_eq!(g.offsets()[1], 10);
    }

    #[test]
    fn exhaustive_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for round in 0..60 {
            let w = 2 + (round % 9) as u32;
            let n = 2 + rng.gen_range(0..(1usize << w).min(80) - 1);
            let mut s = BTreeSet::new();
            while s.len() < n {
                s.insert(rng.gen::<u64>() & mask(w));
            }
            let keys: Vec<u64> = s.into_iter().collect();
            let o = Oracle::new(&keys, w);
            for be in [Backend::Exact, Backend::Lossy { seed: round }] {
                let g = GlobalIndex::build(&keys, w, be).unwrap();
                assert_eq!(*g.offsets().last().unwrap(), n);
                for x in 0..(1u64 << w) {
                    let mut tr = QueryTrace::default();
                    assert_eq!(g.pred_global(x, &mut tr), o.naive_pred(x), "{keys:?} x={x}");
                }
            }
        }
    }
}
