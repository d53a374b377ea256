//! The queryable bundle of all search structures, its space report and
//! its on-disk image.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distsearch::{pred_combined, LongIndex, ShortIndex};
use crate::error::{Error, Result};
use crate::finger::FingerIndex;
use crate::global::GlobalIndex;
use crate::locator::{Backend, Keys};
use crate::oracle::QueryTrace;
use crate::trie::CompactedTrie;
use crate::zfast::ZFastTrie;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Algo {
    Baseline,
    Short,
    Long,
    Combined,
    Global,
    Finger,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::Baseline,
        Algo::Short,
        Algo::Long,
        Algo::Combined,
        Algo::Global,
        Algo::Finger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Baseline => "baseline",
            Algo::Short => "short",
            Algo::Long => "long",
            Algo::Combined => "combined",
            Algo::Global => "global",
            Algo::Finger => "finger",
        }
    }
}

/// Which optional structures to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub short: bool,
    pub long: bool,
    pub global: bool,
    pub finger: bool,
    pub backend: Backend,
}

impl BuildOptions {
    pub fn all(backend: Backend) -> Self {
        Self {
            short: true,
            long: true,
            global: true,
            finger: true,
            backend,
        }
    }

    pub fn only(algo: Algo, backend: Backend) -> Self {
        let mut o = Self {
            short: false,
            long: false,
            global: false,
            finger: false,
            backend,
        };
        match algo {
            Algo::Baseline => {}
            Algo::Short => o.short = true,
            Algo::Long => o.long = true,
            Algo::Combined => (o.short, o.long) = (true, true),
            Algo::Global => o.global = true,
            Algo::Finger => o.finger = true,
        }
        o
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub rank: Option<usize>,
    pub trace: QueryTrace,
}

/// Index sizes in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub n: usize,
    pub width: u32,
    pub key_bits: u64,
    pub locator_bits: u64,
    pub handle_bits: u64,
    pub short_bits: u64,
    pub long_bits: u64,
    pub global_bits: u64,
    pub finger_bits: u64,
    pub finger_entries: usize,
}

impl SpaceReport {
    /// Locator, handle, short and long tables together.
    pub fn core_bits(&self) -> u64 {
        self.locator_bits + self.handle_bits + self.short_bits + self.long_bits
    }

    /// `core_bits / (n · lg w)`.
    pub fn per_key_log_w(&self) -> f64 {
        self.core_bits() as f64 / (self.n as f64 * crate::bitkey::lg(self.width as f64))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredIndex {
    backend: Backend,
    z: ZFastTrie,
    short: Option<ShortIndex>,
    long: Option<LongIndex>,
    global: Option<GlobalIndex>,
    finger: Option<FingerIndex>,
}

const MAGIC: &[u8; 4] = b"ZPRD";
pub const IMAGE_VERSION: u32 = 1;

impl PredIndex {
    /// Builds over strictly increasing keys. The global index is skipped
    /// for a single key.
    pub fn build(keys: &[u64], width: u32, opts: BuildOptions) -> Result<Self> {
        let trie = CompactedTrie::build(keys, width)?;
        let k = Keys::new(keys.to_vec(), width)?;
        let be = opts.backend;
        Ok(Self {
            backend: be,
            short: opts.short.then(|| ShortIndex::build(&trie, be)).transpose()?,
            long: opts.long.then(|| LongIndex::build(&trie, be)).transpose()?,
            global: (opts.global && keys.len() >= 2)
                .then(|| GlobalIndex::build(keys, width, be))
                .transpose()?,
            finger: opts.finger.then(|| FingerIndex::build(&k, be)).transpose()?,
            z: ZFastTrie::from_trie(&trie, k, be)?,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn keys(&self) -> &Keys {
        self.z.keys()
    }

    pub fn width(&self) -> u32 {
        self.z.width()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn zfast(&self) -> &ZFastTrie {
        &self.z
    }

    pub fn short(&self) -> Option<&ShortIndex> {
        self.short.as_ref()
    }

    pub fn long(&self) -> Option<&LongIndex> {
        self.long.as_ref()
    }

    pub fn global(&self) -> Option<&GlobalIndex> {
        self.global.as_ref()
    }

    pub fn finger(&self) -> Option<&FingerIndex> {
        self.finger.as_ref()
    }

    pub fn supports(&self, algo: Algo) -> bool {
        match algo {
            Algo::Baseline => true,
            Algo::Short => self.short.is_some(),
            Algo::Long => self.long.is_some(),
            Algo::Combined => self.short.is_some() && self.long.is_some(),
            Algo::Global => self.global.is_some(),
            Algo::Finger => self.finger.is_some(),
        }
    }

    fn need<'a, T>(part: &'a Option<T>, name: &'static str) -> Result<&'a T> {
        part.as_ref().ok_or(Error::Missing(name))
    }

    /// Answers with `algo`. The finger search uses `finger` when given and
    /// the smallest key otherwise; a query not above the finger has no
    /// finger to start from and is answered directly.
    pub fn query(&self, algo: Algo, x: u64, finger: Option<u64>) -> Result<Answer> {
        let z = &self.z;
        let mut trace = QueryTrace::default();
        let rank = match algo {
            Algo::Baseline => z.predecessor(x, &mut trace),
            Algo::Short => Self::need(&self.short, "short")?.pred_short(z, x, &mut trace),
            Algo::Long => Self::need(&self.long, "long")?.pred_long(z, x, &mut trace),
            Algo::Combined => {
                let c = pred_combined(z, Self::need(&self.short, "short")?, Self::need(&self.long, "long")?, x);
                trace = c.short;
                trace.absorb(&c.long);
                trace.window = match c.winner {
                    crate::distsearch::Winner::Short => c.short.window,
                    crate::distsearch::Winner::Long => c.long.window,
                };
                c.rank
            }
            Algo::Global => Self::need(&self.global, "global")?.pred_global(x, &mut trace),
            Algo::Finger => {
                let f = Self::need(&self.finger, "finger")?;
                let y = finger.unwrap_or(z.keys().get(0));
                if y >= x && finger.is_none() {
                    None
                } else {
                    let out = f.pred_finger(z, x, y)?;
                    trace = out.trace;
                    out.rank
                }
            }
        };
        Ok(Answer { rank, trace })
    }

    pub fn space(&self) -> SpaceReport {
        SpaceReport {
            n: self.len(),
            width: self.width(),
            key_bits: self.len() as u64 * self.width() as u64,
            locator_bits: self.z.locator().space_bits(),
            handle_bits: self.z.handles().space_bits(),
            short_bits: self.short.as_ref().map_or(0, |s| s.space_bits()),
            long_bits: self.long.as_ref().map_or(0, |l| l.space_bits()),
            global_bits: self.global.as_ref().map_or(0, |g| g.space_bits()),
            finger_bits: self.finger.as_ref().map_or(0, |f| f.space_bits()),
            finger_entries: self.finger.as_ref().map_or(0, |f| f.weak().len()),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&IMAGE_VERSION.to_le_bytes())?;
        bincode::serialize_into(w, self).map_err(|e| Error::Image(e.to_string()))
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)
            .map_err(|_| Error::Image("truncated header".into()))?;
        if &head[..4] != MAGIC {
            return Err(Error::Image("not an index image".into()));
        }
        let version = u32::from_le_bytes(head[4..].try_into().unwrap());
        if version != IMAGE_VERSION {
            return Err(Error::Image(format!("unsupported image version {version}")));
        }
        bincode::deserialize_from(r).map_err(|e| Error::Image(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
