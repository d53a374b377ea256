//! Brute-force ground truth and per-query instrumentation.
//!
//! The oracle works bit by bit on plain integers and shares no code with
//! the query paths it checks.

use serde::{Deserialize, Serialize};

use crate::bitkey::{ceil_lg, BitString};

/// Counters collected while answering one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTrace {
    /// Iterations of the algorithm's own loop (ladder, doubling, finger loop).
    pub loop_iterations: u32,
    /// Iterations of the fat binary search, if one ran.
    pub fbs_iterations: u32,
    /// Static-function and locator evaluations.
    pub static_fn_probes: u32,
    /// Window `(a, b)` the fat binary search was started on.
    pub window: Option<(u32, u32)>,
}

impl QueryTrace {
    pub fn steps(&self) -> u32 {
        self.loop_iterations + self.fbs_iterations
    }

    /// Whether the fat binary search stayed within `⌈lg(b − a)⌉` iterations.
    pub fn fbs_within_bound(&self) -> bool {
        match self.window {
            Some((a, b)) => self.fbs_iterations <= ceil_lg((b - a) as u64),
            None => self.fbs_iterations == 0,
        }
    }

    /// Fat-binary-search iterations beyond `⌈lg(b − a)⌉`.
    pub fn fbs_excess(&self) -> i64 {
        let allowed = self.window.map_or(0, |(a, b)| ceil_lg((b - a) as u64));
        self.fbs_iterations as i64 - allowed as i64
    }

    pub(crate) fn absorb(&mut self, other: &QueryTrace) {
        self.loop_iterations += other.loop_iterations;
        self.fbs_iterations += other.fbs_iterations;
        self.static_fn_probes += other.static_fn_probes;
    }
}

/// Short and long distance of a query from the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistancePair {
    pub short: u64,
    pub long: u64,
}

#[inline]
fn bit(x: u64, w: u32, i: u32) -> u64 {
    (x >> (w - 1 - i)) & 1
}

fn naive_lcp(a: u64, b: u64, w: u32) -> u32 {
    (0..w).find(|&i| bit(a, w, i) != bit(b, w, i)).unwrap_or(w)
}

fn naive_prefix(x: u64, w: u32, len: u32) -> (u64, u32) {
    let mut v = 0;
    for i in 0..len {
        v = (v << 1) | bit(x, w, i);
    }
    (v, len)
}

/// The 2-fattest number of `(a..b]` by scanning for the most trailing zeros.
pub fn naive_two_fattest(a: u64, b: u64) -> u64 {
    let mut best = a + 1;
    let mut v = a + 1;
    while v <= b {
        let tz = if v == 0 { 64 } else { v.trailing_zeros() };
        if tz > best.trailing_zeros() {
            best = v;
        }
        if v == u64::MAX {
            break;
        }
        v += 1;
    }
    best
}

/// Brute-force view of a sorted key set.
#[derive(Clone, Debug)]
pub struct Oracle {
    keys: Vec<u64>,
    width: u32,
    internal: Vec<(u64, u32)>,
}

impl Oracle {
    pub fn new(keys: &[u64], width: u32) -> Self {
        let mut internal: Vec<(u64, u32)> = keys
            .windows(2)
            .map(|p| naive_prefix(p[0], width, naive_lcp(p[0], p[1], width)))
            .collect();
        internal.sort_unstable_by_key(|&(v, l)| (l, v));
        internal.dedup();
        Self {
            keys: keys.to_vec(),
            width,
            internal,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    /// Rank of the largest key strictly below `x`.
    pub fn naive_pred(&self, x: u64) -> Option<usize> {
        let below = self.keys.iter().filter(|&&k| k < x).count();
        below.checked_sub(1)
    }

    /// Smallest key `≥ x`.
    pub fn succ_key(&self, x: u64) -> Option<u64> {
        self.keys.iter().copied().find(|&k| k >= x)
    }

    pub fn pred_key(&self, x: u64) -> Option<u64> {
        self.keys.iter().rev().copied().find(|&k| k < x)
    }

    pub fn naive_distances(&self, x: u64) -> DistancePair {
        let up = self.succ_key(x).map(|s| s - x);
        let down = self.pred_key(x).map(|p| x - p);
        match (up, down) {
            (Some(u), Some(d)) => DistancePair {
                short: u.min(d),
                long: u.max(d),
            },
            (Some(v), None) | (None, Some(v)) => DistancePair { short: v, long: v },
            (None, None) => unreachable!("oracle over an empty set"),
        }
    }

    /// Whether `p` prefixes some key.
    pub fn in_pref(&self, p: &BitString) -> bool {
        self.keys
            .iter()
            .any(|&k| naive_prefix(k, self.width, p.len()) == (p.bits(), p.len()))
    }

    /// Extents of all internal nodes (as `(bits, len)`), by length.
    pub fn internal_extents(&self) -> &[(u64, u32)] {
        &self.internal
    }

    /// Lengths `|p_0| < |p_1| < … < |p_t|` of ε and of the internal extents
    /// that are proper prefixes of `x`.
    pub fn extent_chain(&self, x: u64) -> Vec<u32> {
        let mut chain = vec![0];
        for &(v, l) in &self.internal {
            if l > 0 && l < self.width && naive_prefix(x, self.width, l) == (v, l) {
                chain.push(l);
            }
        }
        chain
    }

    /// Length of the name of the exit node of `x`, with the root reported
    /// as the empty name.
    pub fn naive_exit(&self, x: u64) -> u32 {
        let top = *self.extent_chain(x).last().unwrap();
        let root_extent = if self.keys.len() == 1 {
            self.width
        } else {
            naive_lcp(self.keys[0], *self.keys.last().unwrap(), self.width)
        };
        if top == 0 && root_extent != 0 {
            0
        } else {
            top + 1
        }
    }

    /// Smallest and largest gap between consecutive keys.
    pub fn gaps(&self) -> Option<(u64, u64)> {
        let gaps = self.keys.windows(2).map(|p| p[1] - p[0]);
        Some((gaps.clone().min()?, gaps.max()?))
    }
}
