use serde::{Deserialize, Serialize};

use crate::bitkey::BitString;
use crate::error::Result;
use crate::locator::{Backend, PatchedFn};
use crate::oracle::QueryTrace;
use crate::trie::CompactedTrie;
use crate::zfast::{Fbs, ZFastTrie};

use super::{enter_search, search_step, Machine, Phase};

/// Least power of two strictly above `a`, capped at `w`.
#[inline]
pub fn next_probe(a: u32, w: u32) -> u32 {
    (a + 1).next_power_of_two().min(w)
}

/// Index for the long-distance search: every node's extent cut at the
/// smallest power of two between its name and extent lengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongIndex {
    width: u32,
    f_p: PatchedFn,
}

impl LongIndex {
    pub fn build(trie: &CompactedTrie, backend: Backend) -> Result<Self> {
        let w = trie.width();
        let mut entries = Vec::with_capacity(trie.node_count());
        for node in trie.nodes() {
            let (lo, hi) = (node.name_len, node.extent.len());
            let k = lo.max(1).next_power_of_two();
            if k <= hi {
                entries.push((node.extent.prefix(k), node.name_len as u64));
            }
        }
        Ok(Self {
            width: w,
            f_p: PatchedFn::build(&entries, w, backend.derive(0x10))?,
        })
    }

    pub fn len(&self) -> usize {
        self.f_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_p.is_empty()
    }

    pub fn fhat(&self, z: &ZFastTrie, p: &BitString, trace: &mut QueryTrace) -> Option<u32> {
        trace.static_fn_probes += 3;
        self.f_p.get(p, z.locator(), z.keys())
    }

    pub fn space_bits(&self) -> u64 {
        self.f_p.space_bits()
    }

    pub fn run<'a>(&'a self, z: &'a ZFastTrie, x: u64) -> LongRun<'a> {
        LongRun {
            idx: self,
            z,
            x,
            xb: z.keys().bits(x),
            state: if z.len() == 1 {
                State::Done(z.single(x))
            } else {
                State::Doubling(0)
            },
            trace: QueryTrace::default(),
        }
    }

    /// Predecessor rank of `x`, growing a known extent by probing
    /// power-of-two prefix lengths before a fat binary search.
    pub fn pred_long(&self, z: &ZFastTrie, x: u64, trace: &mut QueryTrace) -> Option<usize> {
        let mut run = self.run(z, x);
        let r = run.finish();
        *trace = run.trace;
        r
    }
}

#[derive(Clone, Copy, Debug)]
enum State {
    Doubling(u32),
    Search(Fbs),
    Done(Option<usize>),
}

impl From<Phase> for State {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Search(f) => State::Search(f),
            Phase::Done(r) => State::Done(r),
        }
    }
}

pub struct LongRun<'a> {
    idx: &'a LongIndex,
    z: &'a ZFastTrie,
    x: u64,
    xb: BitString,
    state: State,
    trace: QueryTrace,
}

impl LongRun<'_> {
    fn double(&mut self, a: u32) -> State {
        let (z, tr) = (self.z, &mut self.trace);
        let w = self.idx.width;
        tr.loop_iterations += 1;
        let m = next_probe(a, w);
        let Some(t) = self.idx.fhat(z, &self.xb.prefix(m), tr) else {
            return enter_search(z, self.x, a, m, tr).into();
        };
        let (l, r) = z.locator().range(&self.xb.prefix(t));
        tr.static_fn_probes += 2;
        let keys = z.keys();
        if keys.get(l) >= self.x {
            return State::Done(l.checked_sub(1));
        }
        if keys.get(r) < self.x {
            return State::Done(Some(r));
        }
        State::Doubling(keys.extent(l, r).len())
    }
}

impl Machine for LongRun<'_> {
    fn step(&mut self) -> Option<Option<usize>> {
        loop {
            match self.state {
                State::Done(r) => return Some(r),
                State::Search(mut f) => {
                    self.state = search_step(self.z, self.x, &self.xb, &mut f, &mut self.trace).into();
                }
                State::Doubling(a) if 2 * a >= self.idx.width => {
                    self.state = enter_search(self.z, self.x, a, self.idx.width, &mut self.trace).into();
                    continue;
                }
                State::Doubling(a) => self.state = self.double(a),
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
