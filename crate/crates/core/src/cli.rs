//! Command-line front end.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitkey::{mask, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::global;
use crate::index::{Algo, BuildOptions, PredIndex};
use crate::locator::Backend;
use crate::oracle::Oracle;
use crate::trie::CompactedTrie;

/// Parsed key file: a `w=<int>` header, then one key per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyFile {
    pub width: u32,
    /// Sorted, distinct.
    pub keys: Vec<u64>,
}

fn parse_width(line: &str, lineno: usize) -> Result<u32> {
    let w = line
        .trim()
        .strip_prefix("w=")
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "expected header `w=<int>`".into(),
        })?;
    if w == 0 || w > MAX_WIDTH {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("width {w} outside 1..={MAX_WIDTH}"),
        });
    }
    Ok(w)
}

/// Parses one key written as `w` binary digits, or as hex when `hex` is set.
pub fn parse_key(s: &str, width: u32, hex: bool) -> std::result::Result<u64, String> {
    let s = s.trim();
    if hex {
        let v = u64::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|e| format!("bad hex key `{s}`: {e}"))?;
        if v & !mask(width) != 0 {
            return Err(format!("key {s} does not fit in {width} bits"));
        }
        return Ok(v);
    }
    if s.len() != width as usize {
        return Err(format!("key `{s}` has {} digits, expected {width}", s.len()));
    }
    s.bytes().try_fold(0u64, |v, c| match c {
        b'0' => Ok(v << 1),
        b'1' => Ok((v << 1) | 1),
        _ => Err(format!("key `{s}` is not binary")),
    })
}

pub fn format_key(v: u64, width: u32, hex: bool) -> String {
    if hex {
        format!("{v:x}")
    } else {
        format!("{:0>1$b}", v, width as usize)
    }
}

impl KeyFile {
    pub fn parse(text: &str, hex: bool) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty key file".into(),
        })?;
        let width = parse_width(header, hline + 1)?;
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for (i, l) in lines {
            let v = parse_key(l, width, hex).map_err(|msg| Error::Parse { line: i + 1, msg })?;
            if let Some(first) = seen.insert(v, i + 1) {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate key (first on line {first})"),
                });
            }
        }
        let mut keys: Vec<u64> = seen.into_keys().collect();
        if keys.is_empty() {
            return Err(Error::Empty);
        }
        keys.sort_unstable();
        Ok(Self { width, keys })
    }

    pub fn read(path: &Path, hex: bool) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, hex)
    }

    pub fn render(&self, hex: bool) -> String {
        let mut out = format!("w={}\n", self.width);
        for &k in &self.keys {
            let _ = writeln!(out, "{}", format_key(k, self.width, hex));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IndexSel {
    Short,
    Long,
    Combined,
    Global,
    Finger,
    Baseline,
    All,
}

impl IndexSel {
    pub fn algos(self) -> Vec<Algo> {
        match self {
            IndexSel::All => Algo::ALL.to_vec(),
            IndexSel::Short => vec![Algo::Short],
            IndexSel::Long => vec![Algo::Long],
            IndexSel::Combined => vec![Algo::Combined],
            IndexSel::Global => vec![Algo::Global],
            IndexSel::Finger => vec![Algo::Finger],
            IndexSel::Baseline => vec![Algo::Baseline],
        }
    }

    fn options(self, backend: Backend) -> BuildOptions {
        match self {
            IndexSel::All => BuildOptions::all(backend),
            _ => BuildOptions::only(self.algos()[0], backend),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendSel {
    Exact,
    Lossy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Uniform,
    Clustered,
    NearMember,
    Far,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Which search structures to build or use.
    #[arg(long, value_enum, default_value = "all")]
    pub index: IndexSel,
    #[arg(long, value_enum, default_value = "lossy")]
    pub backend: BackendSel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keys are written in hexadecimal instead of binary digits.
    #[arg(long)]
    pub hex: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl Common {
    fn backend(&self) -> Backend {
        match self.backend {
            BackendSel::Exact => Backend::Exact,
            BackendSel::Lossy => Backend::Lossy { seed: self.seed },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "zpred", version, about = "Distance-sensitive predecessor search over fixed-width keys")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Build an index image from a key file.
    Build {
        keys: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Answer predecessor queries, given as arguments or one per stdin line.
    Query {
        /// Index image or key file.
        input: PathBuf,
        queries: Vec<String>,
        /// Finger key for the finger search (defaults to the smallest key).
        #[arg(long)]
        finger: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check every algorithm against brute force.
    Verify {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: VerifyMode,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Measure per-query work on generated queries.
    Bench {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "uniform")]
        distribution: Distribution,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Print 0 instead of wall-clock nanoseconds, for reproducible output.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the compacted trie in DOT form.
    Dump {
        keys: PathBuf,
        #[arg(long)]
        hex: bool,
    },
    /// Print key-set statistics and index sizes.
    Stats {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn is_image(path: &Path) -> Result<bool> {
    let mut head = [0u8; 4];
    let mut f = std::fs::File::open(path)?;
    Ok(io::Read::read(&mut f, &mut head)? == 4 && &head == b"ZPRD")
}

/// Loads an image, or builds an index from a key file.
pub fn load_input(path: &Path, common: &Common) -> Result<PredIndex> {
    if is_image(path)? {
        PredIndex::load(path)
    } else {
        let kf = KeyFile::read(path, common.hex)?;
        PredIndex::build(&kf.keys, kf.width, common.index.options(common.backend()))
    }
}

fn selected(idx: &PredIndex, sel: IndexSel) -> Result<Vec<Algo>> {
    let algos: Vec<Algo> = sel.algos().into_iter().filter(|&a| idx.supports(a)).collect();
    if algos.is_empty() {
        return Err(Error::Missing("requested index"));
    }
    Ok(algos)
}

#[derive(Serialize)]
struct QueryRow {
    algo: &'static str,
    query: String,
    rank: i64,
    pred_key: Option<String>,
}

fn cmd_query(input: &Path, queries: Vec<String>, finger: Option<String>, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let idx = load_input(input, common)?;
    let w = idx.width();
    let queries = if queries.is_empty() {
        io::stdin().lock().lines().collect::<io::Result<Vec<_>>>()?
    } else {
        queries
    };
    let finger = finger
        .map(|f| parse_key(&f, w, common.hex).map_err(|msg| Error::Parse { line: 0, msg }))
        .transpose()?;
    let algos = selected(&idx, common.index)?;
    let mut rows = Vec::new();
    for (i, q) in queries.iter().filter(|q| !q.trim().is_empty()).enumerate() {
        let x = parse_key(q, w, common.hex).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        for &algo in &algos {
            let a = idx.query(algo, x, finger)?;
            rows.push(QueryRow {
                algo: algo.name(),
                query: format_key(x, w, common.hex),
                rank: a.rank.map_or(-1, |r| r as i64),
                pred_key: a.rank.map(|r| format_key(idx.keys().get(r), w, common.hex)),
            });
        }
    }
    match common.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap())?,
        Format::Csv => {
            let multi = algos.len() > 1;
            for r in &rows {
                let key = r.pred_key.as_deref().unwrap_or("-");
                if multi {
                    writeln!(out, "{},{},{},{}", r.algo, r.query, r.rank, key)?;
                } else {
                    writeln!(out, "{},{},{}", r.query, r.rank, key)?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Outcome of checking one algorithm.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct VerifyRow {
    pub algo: &'static str,
    pub queries: u64,
    pub mismatches: u64,
    /// Searches that went past `⌈lg(b − a)⌉ + 1` iterations.
    pub bound_violations: u64,
    /// Searches that took exactly `⌈lg(b − a)⌉ + 1` iterations.
    pub at_slack: u64,
}

/// Checks every supported algorithm in `algos` against brute force.
pub fn verify(idx: &PredIndex, algos: &[Algo], queries: &[u64], seed: u64) -> Vec<VerifyRow> {
    let keys = idx.keys().as_slice();
    let oracle = Oracle::new(keys, idx.width());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    algos
        .iter()
        .map(|&algo| {
            let mut row = VerifyRow {
                algo: algo.name(),
                ..Default::default()
            };
            for &x in queries {
                let want = oracle.naive_pred(x);
                let below = keys.partition_point(|&k| k < x);
                let fingers: Vec<Option<u64>> = if algo == Algo::Finger && below > 0 {
                    let mut f = vec![keys[0], keys[below - 1], keys[rng.gen_range(0..below)]];
                    f.dedup();
                    f.into_iter().map(Some).collect()
                } else {
                    vec![None]
                };
                for y in fingers {
                    row.queries += 1;
                    match idx.query(algo, x, y) {
                        Ok(a) => {
                            row.mismatches += (a.rank != want) as u64;
                            let excess = a.trace.fbs_excess();
                            row.bound_violations += (excess > 1) as u64;
                            row.at_slack += (excess == 1) as u64;
                        }
                        Err(_) => row.mismatches += 1,
                    }
                }
            }
            row
        })
        .collect()
}

fn sample_queries(keys: &[u64], width: u32, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                rng.gen::<u64>() & mask(width)
            } else {
                let k = keys[rng.gen_range(0..keys.len())];
                k.wrapping_add(rng.gen_range(0..33)).wrapping_sub(16) & mask(width)
            }
        })
        .collect()
}

fn cmd_verify(input: &Path, mode: VerifyMode, samples: usize, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let idx = load_input(input, common)?;
    let w = idx.width();
    let queries: Vec<u64> = match mode {
        VerifyMode::Exhaustive if w > 20 => {
            return Err(Error::Contract(format!("exhaustive verification needs w ≤ 20, got {w}")))
        }
        VerifyMode::Exhaustive => (0..1u64 << w).collect(),
        VerifyMode::Sampled => sample_queries(idx.keys().as_slice(), w, samples, common.seed),
    };
    let algos = selected(&idx, common.index)?;
    let rows = verify(&idx, &algos, &queries, common.seed);
    match common.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap())?,
        Format::Csv => {
            writeln!(out, "algo,queries,mismatches,bound_violations,at_slack")?;
            for r in &rows {
                writeln!(out, "{},{},{},{},{}", r.algo, r.queries, r.mismatches, r.bound_violations, r.at_slack)?;
            }
        }
    }
    let failed = rows.iter().any(|r| r.mismatches > 0 || r.bound_violations > 0);
    Ok(if failed { EXIT_VERIFY } else { EXIT_OK })
}

/// One benchmark measurement.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BenchRow {
    pub algo: &'static str,
    pub query: u64,
    pub d: u64,
    #[serde(rename = "D")]
    pub big_d: u64,
    pub loop_iters: u32,
    pub fbs_iters: u32,
    pub probes: u32,
    pub nanos: u64,
}

pub const BENCH_HEADER: &str = "algo,query,d,D,loop_iters,fbs_iters,probes,nanos";

/// Generates `trials` queries from `dist`.
pub fn bench_queries(keys: &[u64], width: u32, dist: Distribution, trials: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = mask(width);
    let mut gaps: Vec<(u64, u64)> = keys.windows(2).map(|p| (p[1] - p[0], p[0])).collect();
    gaps.sort_unstable_by(|a, b| b.cmp(a));
    (0..trials)
        .map(|_| match dist {
            Distribution::Uniform => rng.gen::<u64>() & m,
            Distribution::Clustered => {
                let k = keys[rng.gen_range(0..keys.len())];
                let spread = 1u64 << (width / 4).max(1);
                k.wrapping_add(rng.gen_range(0..spread)).wrapping_sub(spread / 2) & m
            }
            Distribution::NearMember => {
                let k = keys[rng.gen_range(0..keys.len())];
                if rng.gen_bool(0.5) {
                    k.wrapping_add(rng.gen_range(1..=4)) & m
                } else {
                    k.wrapping_sub(rng.gen_range(1..=4)) & m
                }
            }
            Distribution::Far => {
                if gaps.is_empty() {
                    rng.gen::<u64>() & m
                } else {
                    let top = (gaps.len() / 10).max(1);
                    let (g, start) = gaps[rng.gen_range(0..top)];
                    start + g / 2
                }
            }
        })
        .collect()
}

/// Distances of `x` from a sorted key set.
pub fn distances(keys: &[u64], x: u64) -> (u64, u64) {
    let i = keys.partition_point(|&k| k < x);
    let up = keys.get(i).map(|&s| s - x);
    let down = i.checked_sub(1).map(|j| x - keys[j]);
    match (up, down) {
        (Some(u), Some(d)) => (u.min(d), u.max(d)),
        (Some(v), None) | (None, Some(v)) => (v, v),
        (None, None) => (0, 0),
    }
}

pub fn bench(idx: &PredIndex, algos: &[Algo], queries: &[u64], timing: bool) -> Vec<BenchRow> {
    let keys = idx.keys().as_slice();
    queries
        .par_iter()
        .map(|&x| {
            let (d, big_d) = distances(keys, x);
            algos
                .iter()
                .map(|&algo| {
                    let start = Instant::now();
                    let a = idx.query(algo, x, None).expect("selected algorithms are built");
                    let nanos = if timing { start.elapsed().as_nanos() as u64 } else { 0 };
                    BenchRow {
                        algo: algo.name(),
                        query: x,
                        d,
                        big_d,
                        loop_iters: a.trace.loop_iterations,
                        fbs_iters: a.trace.fbs_iterations,
                        probes: a.trace.static_fn_probes,
                        nanos,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    input: &Path,
    dist: Distribution,
    trials: usize,
    no_timing: bool,
    out_path: Option<&Path>,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32> {
    let idx = load_input(input, common)?;
    let algos = selected(&idx, common.index)?;
    let queries = bench_queries(idx.keys().as_slice(), idx.width(), dist, trials, common.seed);
    let rows = bench(&idx, &algos, &queries, !no_timing);
    let mut text = String::new();
    match common.format {
        Format::Json => text = serde_json::to_string_pretty(&rows).unwrap() + "\n",
        Format::Csv => {
            text.push_str(BENCH_HEADER);
            text.push('\n');
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    r.algo, r.query, r.d, r.big_d, r.loop_iters, r.fbs_iters, r.probes, r.nanos
                );
            }
        }
    }
    match out_path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StatsReport {
    n: usize,
    width: u32,
    delta_max: Option<u64>,
    delta_min: Option<u64>,
    space: crate::index::SpaceReport,
    core_bits_per_key_log_w: f64,
}

fn cmd_stats(input: &Path, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let idx = load_input(input, common)?;
    let st = global::stats(idx.keys().as_slice()).ok();
    let space = idx.space();
    let report = StatsReport {
        n: idx.len(),
        width: idx.width(),
        delta_max: st.map(|s| s.delta_max),
        delta_min: st.map(|s| s.delta_min),
        space,
        core_bits_per_key_log_w: space.per_key_log_w(),
    };
    match common.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())?,
        Format::Csv => {
            let v = serde_json::to_value(&report).unwrap();
            let mut flat = Vec::new();
            for (k, v) in v.as_object().unwrap() {
                match v.as_object() {
                    Some(inner) => flat.extend(inner.iter().map(|(k2, v2)| (format!("{k}.{k2}"), v2.to_string()))),
                    None => flat.push((k.clone(), v.to_string())),
                }
            }
            for (k, v) in flat {
                writeln!(out, "{k},{v}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command, writing results to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.cmd {
        Cmd::Build { keys, out: path, common } => {
            let kf = KeyFile::read(&keys, common.hex)?;
            let idx = PredIndex::build(&kf.keys, kf.width, common.index.options(common.backend()))?;
            idx.save(&path)?;
            writeln!(out, "built n={} w={} -> {}", idx.len(), idx.width(), path.display())?;
            Ok(EXIT_OK)
        }
        Cmd::Query {
            input,
            queries,
            finger,
            common,
        } => cmd_query(&input, queries, finger, &common, out),
        Cmd::Verify {
            input,
            mode,
            samples,
            common,
        } => cmd_verify(&input, mode, samples, &common, out),
        Cmd::Bench {
            input,
            distribution,
            trials,
            no_timing,
            out: path,
            common,
        } => cmd_bench(&input, distribution, trials, no_timing, path.as_deref(), &common, out),
        Cmd::Dump { keys, hex } => {
            let kf = KeyFile::read(&keys, hex)?;
            out.write_all(CompactedTrie::build(&kf.keys, kf.width)?.to_dot().as_bytes())?;
            Ok(EXIT_OK)
        }
        Cmd::Stats { input, common } => cmd_stats(&input, &common, out),
    }
}
