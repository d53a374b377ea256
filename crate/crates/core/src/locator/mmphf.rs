//! Monotone minimal perfect hash over a sorted set of 128-bit items, by
//! longest-common-prefix bucketing: each item maps to the LCP length of its
//! bucket, the LCP maps to the bucket, and the item maps to its offset
//! inside the bucket. Buckets of a sorted fixed-width set have pairwise
//! distinct LCPs, so the three functions compose to the item's rank.

use serde::{Deserialize, Serialize};

use super::static_fn::{bits_for, Backend, StaticFn, WidePrefix};
use crate::error::{contract, Result};

const BUCKET_BITS: u32 = 5;
const BUCKET: usize = 1 << BUCKET_BITS;

#[inline]
fn wide_prefix(item: u128, len: u32) -> WidePrefix {
    WidePrefix {
        bits: if len == 0 { 0 } else { item >> (128 - len) },
        len: len as u8,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mmphf {
    len: usize,
    lcp_len: StaticFn<u128>,
    bucket_of: StaticFn<WidePrefix>,
    offset: StaticFn<u128>,
}

impl Mmphf {
    pub fn build(items: &[u128], backend: Backend) -> Result<Self> {
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return contract("monotone hash items must be strictly increasing");
        }
        let mut lcps = Vec::with_capacity(items.len());
        let mut offsets = Vec::with_capacity(items.len());
        let mut buckets = Vec::with_capacity(items.len() / BUCKET + 1);
        for (b, chunk) in items.chunks(BUCKET).enumerate() {
            let (first, last) = (chunk[0], chunk[chunk.len() - 1]);
            let l = if chunk.len() == 1 {
                128
            } else {
                (first ^ last).leading_zeros()
            };
            buckets.push((wide_prefix(first, l), b as u64));
            for (o, &item) in chunk.iter().enumerate() {
                lcps.push((item, l as u64));
                offsets.push((item, o as u64));
            }
        }
        Ok(Self {
            len: items.len(),
            lcp_len: StaticFn::build(&lcps, bits_for(128), backend.derive(1))?,
            bucket_of: StaticFn::build(
                &buckets,
                bits_for(buckets.len().saturating_sub(1) as u64),
                backend.derive(2),
            )?,
            offset: StaticFn::build(&offsets, BUCKET_BITS, backend.derive(3))?,
        })
    }

    /// Rank of `item` in the build set; an arbitrary rank in `0..len` for
    /// other items.
    #[inline]
    pub fn get(&self, item: u128) -> usize {
        let l = (self.lcp_len.get(&item) as u32).min(128);
        let bucket = self.bucket_of.get(&wide_prefix(item, l)) as usize;
        let pos = bucket * BUCKET + self.offset.get(&item) as usize;
        pos.min(self.len.saturating_sub(1))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn space_bits(&self) -> u64 {
        self.lcp_len.space_bits() + self.bucket_of.space_bits() + self.offset.space_bits()
    }
}
