//! Distance-sensitive predecessor search: a short-distance ladder, a
//! long-distance doubling search, and both run in lockstep.

pub mod long;
pub mod short;

use serde::{Deserialize, Serialize};

use crate::bitkey::BitString;
use crate::oracle::QueryTrace;
use crate::zfast::{Fbs, ZFastTrie};

pub use long::LongIndex;
pub use short::ShortIndex;

/// A query in progress, advanced one loop or search iteration at a time.
pub trait Machine {
    /// Performs one step; `Some(rank)` once the answer is known.
    fn step(&mut self) -> Option<Option<usize>>;
    fn trace(&self) -> &QueryTrace;

    fn finish(&mut self) -> Option<usize> {
        loop {
            if let Some(r) = self.step() {
                return r;
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Phase {
    Search(Fbs),
    Done(Option<usize>),
}

pub(crate) fn enter_search(z: &ZFastTrie, x: u64, a: u32, b: u32, trace: &mut QueryTrace) -> Phase {
    let f = Fbs::start(a, b, trace);
    if f.done() {
        Phase::Done(z.pred_at(x, f.name_len(z), trace))
    } else {
        Phase::Search(f)
    }
}

pub(crate) fn search_step(z: &ZFastTrie, x: u64, xb: &BitString, f: &mut Fbs, trace: &mut QueryTrace) -> Phase {
    f.step(z, xb, trace);
    if f.done() {
        Phase::Done(z.pred_at(x, f.name_len(z), trace))
    } else {
        Phase::Search(*f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    Short,
    Long,
}

#[derive(Clone, Copy, Debug)]
pub struct CombinedOutcome {
    pub rank: Option<usize>,
    pub short: QueryTrace,
    pub long: QueryTrace,
    /// Rounds of the interleaving; each round steps both searches once.
    pub rounds: u32,
    pub winner: Winner,
}

impl CombinedOutcome {
    pub fn total_steps(&self) -> u32 {
        self.short.steps() + self.long.steps()
    }
}

/// Runs both searches alternately, one step each, and returns the first answer.
pub fn pred_combined(z: &ZFastTrie, short: &ShortIndex, long: &LongIndex, x: u64) -> CombinedOutcome {
    let mut s = short.run(z, x);
    let mut l = long.run(z, x);
    let mut rounds = 0;
    loop {
        rounds += 1;
        let (rank, winner) = if let Some(r) = s.step() {
            (r, Winner::Short)
        } else if let Some(r) = l.step() {
            (r, Winner::Long)
        } else {
            continue;
        };
        return CombinedOutcome {
            rank,
            short: *s.trace(),
            long: *l.trace(),
            rounds,
            winner,
        };
    }
}
