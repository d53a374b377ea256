use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bitkey::BitString;
use crate::error::Result;
use crate::locator::static_fn::bits_for;
use crate::locator::{patch, Backend, StaticFn};
use crate::oracle::QueryTrace;
use crate::trie::CompactedTrie;
use crate::zfast::{Fbs, ZFastTrie};

use super::{enter_search, search_step, Machine};

/// Number of ladder levels: the `i` with `2^{2^i} ≤ w/2`.
pub fn level_count(w: u32) -> u32 {
    (0..6).take_while(|&i| 1u64 << (1u32 << i) <= (w / 2) as u64).count() as u32
}

/// Prefix length probed at level `i`: `w − 2^{2^i}`.
#[inline]
pub fn level_len(w: u32, i: u32) -> u32 {
    w - (1u32 << (1u32 << i))
}

/// Index for the short-distance search: a ladder of prefix lengths
/// `w − 2^{2^i}` and a two-stage map from those prefixes to exit-name lengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShortIndex {
    width: u32,
    levels: u32,
    q_size: usize,
    p_size: usize,
    f_q: StaticFn<BitString>,
    f_pi: StaticFn<BitString>,
}

impl ShortIndex {
    pub fn build(trie: &CompactedTrie, backend: Backend) -> Result<Self> {
        let w = trie.width();
        let levels = level_count(w);
        let lens: Vec<u32> = (0..levels).map(|i| level_len(w, i)).collect();
        let mut q_entries = Vec::new();
        for node in trie.nodes() {
            let (lo, hi) = (node.name_len, node.extent.len());
            if let Some(&l) = lens.iter().rev().find(|&&l| lo <= l && l <= hi) {
                q_entries.push((node.extent.prefix(l), node.name_len as u64));
            }
        }
        let q: HashSet<BitString> = q_entries.iter().map(|e| e.0).collect();
        let mut p: HashSet<BitString> = HashSet::new();
        for node in trie.nodes().iter().filter(|n| n.is_leaf()) {
            for &l in &lens {
                p.insert(node.extent.prefix(l));
            }
        }
        let mut pi_entries: Vec<(BitString, u64)> = Vec::with_capacity(p.len());
        for s in p {
            let i = (0..levels)
                .find(|&i| lens[i as usize] <= s.len() && q.contains(&s.prefix(lens[i as usize])))
                .expect("every ladder prefix reaches a node's shortest ladder prefix");
            pi_entries.push((s, i as u64));
        }
        Ok(Self {
            width: w,
            levels,
            q_size: q_entries.len(),
            p_size: pi_entries.len(),
            f_q: StaticFn::build(&q_entries, bits_for(w as u64), backend.derive(0x51))?,
            f_pi: StaticFn::build(&pi_entries, bits_for(levels.saturating_sub(1) as u64).max(1), backend.derive(0x52))?,
        })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn q_len(&self) -> usize {
        self.q_size
    }

    pub fn p_len(&self) -> usize {
        self.p_size
    }

    pub fn level_payload_bits(&self) -> u32 {
        self.f_pi.payload_bits()
    }

    /// Patched exit-name length of a ladder prefix, or ⊥.
    pub fn fhat(&self, z: &ZFastTrie, p: &BitString, trace: &mut QueryTrace) -> Option<u32> {
        trace.static_fn_probes += 1;
        let i = self.f_pi.get(p) as u32;
        if i >= self.levels {
            return None;
        }
        let l = level_len(self.width, i);
        if l > p.len() {
            return None;
        }
        trace.static_fn_probes += 3;
        let t = self.f_q.get(&p.prefix(l)) as u32;
        patch(t, p, z.locator(), z.keys())
    }

    pub fn space_bits(&self) -> u64 {
        self.f_q.space_bits() + self.f_pi.space_bits()
    }

    pub fn run<'a>(&'a self, z: &'a ZFastTrie, x: u64) -> ShortRun<'a> {
        let mut run = ShortRun {
            idx: self,
            z,
            x,
            xb: z.keys().bits(x),
            state: State::Ladder(0),
            trace: QueryTrace::default(),
        };
        if z.len() == 1 {
            run.state = State::Done(z.single(x));
        }
        run
    }

    /// Predecessor rank of `x`, probing the ladder before a fat binary search.
    pub fn pred_short(&self, z: &ZFastTrie, x: u64, trace: &mut QueryTrace) -> Option<usize> {
        let mut run = self.run(z, x);
        let r = run.finish();
        *trace = run.trace;
        r
    }
}

#[derive(Clone, Copy, Debug)]
enum State {
    Ladder(u32),
    Search(Fbs),
    Done(Option<usize>),
}

pub struct ShortRun<'a> {
    idx: &'a ShortIndex,
    z: &'a ZFastTrie,
    x: u64,
    xb: BitString,
    state: State,
    trace: QueryTrace,
}

impl ShortRun<'_> {
    fn ladder(&mut self, i: u32) -> State {
        let (z, idx, tr) = (self.z, self.idx, &mut self.trace);
        let w = idx.width;
        tr.loop_iterations += 1;
        let p = self.xb.prefix(level_len(w, i));
        if let Some(t) = idx.fhat(z, &p, tr) {
            tr.static_fn_probes += 2;
            let e = z.locator().extent(z.keys(), &self.xb.prefix(t));
            if e.is_proper_prefix_of(&self.xb) {
                return enter_search(z, self.x, e.len(), w, tr).into();
            }
            return State::Done(z.pred_at(self.x, t, tr));
        }
        if let Some(q) = p.succ() {
            if let Some(t) = idx.fhat(z, &q, tr) {
                tr.static_fn_probes += 1;
                return State::Done(z.locator().left(&q.prefix(t)).checked_sub(1));
            }
        }
        if let Some(q) = p.pred() {
            if let Some(t) = idx.fhat(z, &q, tr) {
                tr.static_fn_probes += 1;
                return State::Done(Some(z.locator().right(&q.prefix(t))));
            }
        }
        State::Ladder(i + 1)
    }
}

impl Machine for ShortRun<'_> {
    fn step(&mut self) -> Option<Option<usize>> {
        loop {
            match self.state {
                State::Done(r) => return Some(r),
                State::Search(mut f) => {
                    self.state = search_step(self.z, self.x, &self.xb, &mut f, &mut self.trace).into();
                }
                State::Ladder(i) if i >= self.idx.levels => {
                    self.state = enter_search(self.z, self.x, 0, self.idx.width, &mut self.trace).into();
                    continue;
                }
                State::Ladder(i) => self.state = self.ladder(i),
            }
            return match self.state {
                State::Done(r) => Some(r),
                _ => None,
            };
        }
    }

    fn trace(&self) -> &QueryTrace {
        &self.trace
    }
}

impl From<super::Phase> for State {
    fn from(p: super::Phase) -> Self {
        match p {
            super::Phase::Search(f) => State::Search(f),
            super::Phase::Done(r) => State::Done(r),
        }
    }
}
