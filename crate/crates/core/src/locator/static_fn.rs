//! Static functions from keys to small integer payloads.
//!
//! [`Backend::Exact`] is a plain hash map and can tell when a key lies
//! outside its domain. [`Backend::Lossy`] stores only payloads, placed by a
//! hash-and-displace perfect hash; keys are never verified, so an
//! out-of-domain lookup returns whatever payload sits in the slot it hashes
//! to. Unused slots are filled with seeded random payloads.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bitkey::{mask, BitString};
use crate::error::{contract, Result};

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn reduce(h: u64, n: usize) -> usize {
    ((h as u128 * n as u128) >> 64) as usize
}

/// Keys usable in a [`StaticFn`].
pub trait FnKey: Clone + Eq + Hash + Serialize + DeserializeOwned {
    fn mix(&self, seed: u64) -> u64;
    /// Bits an explicit key store would spend on this key.
    fn stored_bits(&self) -> u64;
}

impl FnKey for BitString {
    #[inline]
    fn mix(&self, seed: u64) -> u64 {
        mix64(mix64(self.bits() ^ seed) ^ (self.len() as u64).wrapping_mul(0xff51_afd7_ed55_8ccd))
    }

    fn stored_bits(&self) -> u64 {
        self.len() as u64 + 7
    }
}

impl FnKey for u128 {
    #[inline]
    fn mix(&self, seed: u64) -> u64 {
        mix64(mix64(*self as u64 ^ seed) ^ (*self >> 64) as u64)
    }

    fn stored_bits(&self) -> u64 {
        128
    }
}

/// A prefix of a 128-bit item: `len` leading bits, right-aligned in `bits`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct WidePrefix {
    pub bits: u128,
    pub len: u8,
}

impl FnKey for WidePrefix {
    #[inline]
    fn mix(&self, seed: u64) -> u64 {
        mix64(self.bits.mix(seed) ^ self.len as u64)
    }

    fn stored_bits(&self) -> u64 {
        self.len as u64 + 8
    }
}

/// Which store backs the static functions of an index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Exact,
    /// Payload-only store; `seed` drives both placement and the random
    /// payloads returned off-domain.
    Lossy { seed: u64 },
}

impl Backend {
    /// Same backend with the seed perturbed by `tag`, so that sibling
    /// functions of one index get independent garbage.
    pub(crate) fn derive(self, tag: u64) -> Self {
        match self {
            Backend::Exact => Backend::Exact,
            Backend::Lossy { seed } => Backend::Lossy { seed: mix64(seed ^ tag.wrapping_mul(0x2545_f491_4f6c_dd1d)) },
        }
    }
}

const BUCKET_LOAD: usize = 3;
const MAX_SEED: u32 = 1 << 20;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
enum Store<K: FnKey> {
    Exact(HashMap<K, u64>),
    Lossy {
        seed: u64,
        bucket_seeds: Vec<u32>,
        slots: Vec<u64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StaticFn<K: FnKey> {
    payload_bits: u32,
    len: usize,
    store: Store<K>,
}

impl<K: FnKey> StaticFn<K> {
    /// Builds a function over `entries`; every payload must fit in
    /// `payload_bits` bits and keys must be distinct.
    pub fn build(entries: &[(K, u64)], payload_bits: u32, backend: Backend) -> Result<Self> {
        if payload_bits > 64 {
            return contract("payloads wider than 64 bits");
        }
        if let Some((_, v)) = entries.iter().find(|(_, v)| v & !mask(payload_bits) != 0) {
            return contract(format!("payload {v} does not fit in {payload_bits} bits"));
        }
        let store = match backend {
            Backend::Exact => {
                let map: HashMap<K, u64> = entries.iter().cloned().collect();
                if map.len() != entries.len() {
                    return contract("duplicate keys in static function domain");
                }
                Store::Exact(map)
            }
            Backend::Lossy { seed } => {
                let mut distinct = HashSet::with_capacity(entries.len());
                if !entries.iter().all(|(k, _)| distinct.insert(k)) {
                    return contract("duplicate keys in static function domain");
                }
                Self::displace(entries, payload_bits, seed)
            }
        };
        Ok(Self {
            payload_bits,
            len: entries.len(),
            store,
        })
    }

    fn displace(entries: &[(K, u64)], payload_bits: u32, seed: u64) -> Store<K> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let garbage = |rng: &mut ChaCha8Rng| rng.gen::<u64>() & mask(payload_bits);
        if entries.is_empty() {
            return Store::Lossy {
                seed,
                bucket_seeds: Vec::new(),
                slots: vec![garbage(&mut rng)],
            };
        }
        let k = entries.len();
        let nb = k.div_ceil(BUCKET_LOAD);
        let m = k + k / 4 + 1;
        let mut attempt = 0u64;
        'retry: loop {
            let global = mix64(seed ^ attempt);
            attempt += 1;
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb];
            for (i, (key, _)) in entries.iter().enumerate() {
                buckets[reduce(key.mix(global), nb)].push(i);
            }
            let mut order: Vec<usize> = (0..nb).collect();
            order.sort_by_key(|&b| std::cmp::Reverse(buckets[b].len()));
            let mut taken = vec![false; m];
            let mut bucket_seeds = vec![0u32; nb];
            let mut slot_of = vec![0usize; k];
            let mut positions = Vec::with_capacity(8);
            for &b in &order {
                if buckets[b].is_empty() {
                    continue;
                }
                let mut s = 0u32;
                loop {
                    if s >= MAX_SEED {
                        continue 'retry;
                    }
                    positions.clear();
                    let salt = mix64(global ^ (s as u64 + 1));
                    let ok = buckets[b].iter().all(|&i| {
                        let p = reduce(entries[i].0.mix(salt), m);
                        let free = !taken[p] && !positions.contains(&p);
                        positions.push(p);
                        free
                    });
                    if ok {
                        break;
                    }
                    s += 1;
                }
                for (&i, &p) in buckets[b].iter().zip(&positions) {
                    taken[p] = true;
                    slot_of[i] = p;
                }
                bucket_seeds[b] = s;
            }
            let mut slots: Vec<u64> = (0..m).map(|_| garbage(&mut rng)).collect();
            for (i, (_, v)) in entries.iter().enumerate() {
                slots[slot_of[i]] = *v;
            }
            return Store::Lossy {
                seed: global,
                bucket_seeds,
                slots,
            };
        }
    }

    /// Value stored for `key`; arbitrary (but within the payload width) for
    /// keys outside the domain.
    #[inline]
    pub fn get(&self, key: &K) -> u64 {
        match &self.store {
            Store::Exact(map) => map.get(key).copied().unwrap_or(0),
            Store::Lossy {
                seed,
                bucket_seeds,
                slots,
            } => {
                if bucket_seeds.is_empty() {
                    return slots[0];
                }
                let b = reduce(key.mix(*seed), bucket_seeds.len());
                let salt = mix64(*seed ^ (bucket_seeds[b] as u64 + 1));
                slots[reduce(key.mix(salt), slots.len())]
            }
        }
    }

    /// Like [`get`](Self::get), but the exact backend reports keys outside
    /// the domain as `None`. The lossy backend cannot tell and always answers.
    pub fn try_get(&self, key: &K) -> Option<u64> {
        match &self.store {
            Store::Exact(map) => map.get(key).copied(),
            Store::Lossy { .. } => Some(self.get(key)),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    /// Space of the stored representation, in bits.
    pub fn space_bits(&self) -> u64 {
        match &self.store {
            Store::Exact(map) => map
                .keys()
                .map(|k| k.stored_bits() + self.payload_bits as u64)
                .sum(),
            Store::Lossy {
                bucket_seeds, slots, ..
            } => {
                let max_seed = bucket_seeds.iter().copied().max().unwrap_or(0);
                let seed_bits = (32 - max_seed.leading_zeros()).max(1) as u64;
                slots.len() as u64 * self.payload_bits as u64 + bucket_seeds.len() as u64 * seed_bits
            }
        }
    }
}

/// Smallest payload width able to hold `max`.
pub fn bits_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}
