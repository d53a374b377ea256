//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zpred::bitkey::BitString;
use zpred::oracle::{Oracle, QueryTrace};
use zpred::{Algo, Backend, BuildOptions, PredIndex};

const SUITE_W: u32 = 8;
const SUITE_SETS: usize = 50;
const SUITE_NS: [usize; 7] = [1, 2, 3, 5, 17, 64, 200];
const SUITE_DEADLINE: Duration = Duration::from_secs(60);

const WIDE_W: u32 = 32;
const WIDE_N: usize = 10_000;
const WIDE_QUERIES: usize = 2_000;
const MEAN_QUERIES: usize = 200_000;
const SHORT_TARGETS: [u64; 5] = [1, 1 << 4, 1 << 8, 1 << 16, 1 << 24];
const LONG_TARGETS: [u64; 5] = [1, 1 << 4, 1 << 8, 1 << 16, 1 << 24];

const COMBINED_SLACK: u32 = 2;

const GLOBAL_N: usize = 1 << 10;
const GLOBAL_C: u32 = 2;
const TWO_SCALE_RATIOS: [u64; 3] = [1 << 1, 1 << 8, 1 << 16];
const TWO_SCALE_GROUP: usize = 32;

const SPACE_W: u32 = 64;
const SPACE_NS: [usize; 3] = [1 << 10, 1 << 14, 1 << 18];
const SPACE_TOLERANCE: f64 = 0.20;

fn verdict(criterion: u32, pass: bool, detail: String) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// `lg` with values at or below 2 reading as 1.
fn lg1(v: f64) -> f64 {
    v.log2().max(1.0)
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, w: u32) -> Vec<u64> {
    let mut s = BTreeSet::new();
    while s.len() < n {
        s.insert(rng.gen_range(0..1u64 << w));
    }
    s.into_iter().collect()
}

fn suite_sets() -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    (0..SUITE_SETS)
        .map(|i| random_set(&mut rng, SUITE_NS[i % SUITE_NS.len()], SUITE_W))
        .collect()
}

/// Every query of the exhaustive suite, with the finger used (if any).
struct SuiteQuery {
    algo: Algo,
    x: u64,
    finger: Option<u64>,
}

fn suite_queries(keys: &[u64], idx: &PredIndex) -> Vec<SuiteQuery> {
    let mut out = Vec::new();
    for x in 0..1u64 << SUITE_W {
        for algo in Algo::ALL {
            if !idx.supports(algo) {
                continue;
            }
            if algo == Algo::Finger {
                out.extend(keys.iter().filter(|&&y| y < x).map(|&y| SuiteQuery { algo, x, finger: Some(y) }));
            } else {
                out.push(SuiteQuery { algo, x, finger: None });
            }
        }
    }
    out
}

struct SuiteRun {
    queries: u64,
    mismatches: u64,
    elapsed: Duration,
}

fn run_suite(backend_for: impl Fn(usize) -> Backend) -> SuiteRun {
    let start = Instant::now();
    let mut run = SuiteRun {
        queries: 0,
        mismatches: 0,
        elapsed: Duration::ZERO,
    };
    for (i, keys) in suite_sets().iter().enumerate() {
        let oracle = Oracle::new(keys, SUITE_W);
        let idx = PredIndex::build(keys, SUITE_W, BuildOptions::all(backend_for(i))).unwrap();
        assert_eq!(idx.supports(Algo::Global), keys.len() >= 2);
        for q in suite_queries(keys, &idx) {
            let a = idx.query(q.algo, q.x, q.finger).unwrap();
            run.queries += 1;
            run.mismatches += (a.rank != oracle.naive_pred(q.x)) as u64;
        }
    }
    run.elapsed = start.elapsed();
    run
}

/// Fat-binary-search runs of one query, each with its own window.
fn fbs_runs(idx: &PredIndex, q: &SuiteQuery, trace: &QueryTrace) -> Vec<QueryTrace> {
    if q.algo == Algo::Combined {
        let c = zpred::distsearch::pred_combined(idx.zfast(), idx.short().unwrap(), idx.long().unwrap(), q.x);
        vec![c.short, c.long]
    } else {
        vec![*trace]
    }
}

#[test]
fn c01_oracle_equivalence_exact() {
    let run = run_suite(|_| Backend::Exact);
    verdict(
        1,
        run.mismatches == 0 && run.elapsed < SUITE_DEADLINE,
        format!(
            "{} queries, {} mismatches, {:.1}s (limit {}s)",
            run.queries,
            run.mismatches,
            run.elapsed.as_secs_f64(),
            SUITE_DEADLINE.as_secs()
        ),
    );
}

#[test]
fn c02_fat_binary_search_bound() {
    let mut runs = 0u64;
    let mut violations = 0u64;
    let mut worst = i64::MIN;
    for (i, keys) in suite_sets().iter().enumerate() {
        let idx = PredIndex::build(keys, SUITE_W, BuildOptions::all(Backend::Lossy { seed: i as u64 })).unwrap();
        for q in suite_queries(keys, &idx) {
            let a = idx.query(q.algo, q.x, q.finger).unwrap();
            for t in fbs_runs(&idx, &q, &a.trace) {
                if t.window.is_none() {
                    continue;
                }
                runs += 1;
                violations += !t.fbs_within_bound() as u64;
                worst = worst.max(t.fbs_excess());
            }
        }
    }
    verdict(
        2,
        violations == 0,
        format!("{runs} searches, {violations} over ⌈lg(b−a)⌉ (largest excess {worst})"),
    );
}

fn wide_set() -> (Vec<u64>, PredIndex, Oracle) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let keys = random_set(&mut rng, WIDE_N, WIDE_W);
    let idx = PredIndex::build(&keys, WIDE_W, BuildOptions::all(Backend::Lossy { seed: 77 })).unwrap();
    let oracle = Oracle::new(&keys, WIDE_W);
    (keys, idx, oracle)
}

/// Queries at offset `target` from random keys, on either side. The same
/// seed picks the same keys and sides for every target.
fn offset_queries(keys: &[u64], target: u64, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 1u64 << WIDE_W;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = keys[rng.gen_range(0..keys.len())];
        let x = if rng.gen_bool(0.5) { k.checked_add(target) } else { k.checked_sub(target) };
        if let Some(x) = x.filter(|&x| x < top) {
            out.push(x);
        }
    }
    out
}

/// Rank of the predecessor and the short distance, by binary search.
fn sorted_pred_and_d(keys: &[u64], x: u64) -> (Option<usize>, u64) {
    let i = keys.partition_point(|&k| k < x);
    let up = keys.get(i).map(|&k| k - x);
    let down = i.checked_sub(1).map(|j| x - keys[j]);
    (i.checked_sub(1), up.into_iter().chain(down).min().unwrap())
}

#[test]
fn c03_short_distance_sensitivity() {
    let (keys, idx, oracle) = wide_set();
    let mut violations = 0u64;
    let mut means = Vec::new();
    let mut detail = String::new();
    for &target in &SHORT_TARGETS {
        let qs = offset_queries(&keys, target, MEAN_QUERIES, 1);
        let mut probes = 0u64;
        let (mut loop_v, mut win_v) = (0, 0);
        for (i, &x) in qs.iter().enumerate() {
            let a = idx.query(Algo::Short, x, None).unwrap();
            let (rank, d) = sorted_pred_and_d(&keys, x);
            assert_eq!(a.rank, rank);
            if i < WIDE_QUERIES {
                assert_eq!(a.rank, oracle.naive_pred(x));
                assert_eq!(d, oracle.naive_distances(x).short);
            }
            let d = d as f64;
            let loop_bound = (lg1(lg1(lg1(d))).ceil() as u32 + 1).max(1);
            if a.trace.loop_iterations > loop_bound {
                loop_v += 1;
            }
            if let Some((lo, hi)) = a.trace.window {
                if (hi - lo) as f64 > lg1(d).powi(2) {
                    win_v += 1;
                }
            }
            probes += a.trace.static_fn_probes as u64;
        }
        let mean = probes as f64 / qs.len() as f64;
        means.push(mean);
        violations += loop_v + win_v;
        detail += &format!("d≈2^{}: mean probes {mean:.3}, loop/window violations {loop_v}/{win_v}; ", target.trailing_zeros());
    }
    let monotone = means.windows(2).all(|m| m[0] <= m[1]);
    verdict(3, violations == 0 && monotone, format!("{detail}nondecreasing={monotone}"));
}

#[test]
fn c04_long_distance_sensitivity() {
    let (keys, idx, oracle) = wide_set();
    let mut violations = 0u64;
    let mut detail = String::new();
    for (ti, &target) in LONG_TARGETS.iter().enumerate() {
        let qs = offset_queries(&keys, target, WIDE_QUERIES, 100 + ti as u64);
        let (mut loop_v, mut win_v, mut max_loop) = (0, 0, 0);
        for &x in &qs {
            let a = idx.query(Algo::Long, x, None).unwrap();
            assert_eq!(a.rank, oracle.naive_pred(x));
            let big_d = oracle.naive_distances(x).long as f64;
            let bound = lg1(WIDE_W as f64 - lg1(big_d)).ceil() as u32 + 1;
            max_loop = max_loop.max(a.trace.loop_iterations);
            if a.trace.loop_iterations > bound {
                loop_v += 1;
            }
            if let Some((lo, hi)) = a.trace.window {
                if hi - lo > lo {
                    win_v += 1;
                }
            }
        }
        violations += loop_v + win_v;
        detail += &format!(
            "D≈2^{}: max loop {max_loop}, loop/window violations {loop_v}/{win_v}; ",
            target.trailing_zeros()
        );
    }
    verdict(4, violations == 0, detail);
}

#[test]
fn c05_combined_within_twice_the_minimum() {
    let (keys, idx, _) = wide_set();
    let mut queries = 0u64;
    let mut violations = 0u64;
    let mut worst = 0f64;
    for (ti, &target) in SHORT_TARGETS.iter().chain(&LONG_TARGETS).enumerate() {
        for x in offset_queries(&keys, target, WIDE_QUERIES, 200 + ti as u64) {
            let s = idx.query(Algo::Short, x, None).unwrap().trace.steps();
            let l = idx.query(Algo::Long, x, None).unwrap().trace.steps();
            let c = idx.query(Algo::Combined, x, None).unwrap().trace.steps();
            queries += 1;
            violations += (c > 2 * s.min(l) + COMBINED_SLACK) as u64;
            worst = worst.max(c as f64 / s.min(l).max(1) as f64);
        }
    }
    verdict(
        5,
        violations == 0,
        format!("{queries} queries, {violations} over 2·min+{COMBINED_SLACK}, worst ratio {worst:.2}"),
    );
}

/// `GLOBAL_N` keys in groups of `TWO_SCALE_GROUP` with gap `δ` inside a
/// group and `ratio·δ` between groups, stretched over the universe.
fn two_scale_set(ratio: u64) -> Vec<u64> {
    let groups = (GLOBAL_N / TWO_SCALE_GROUP) as u64;
    let span = GLOBAL_N as u64 - groups + groups * ratio;
    let delta = ((1u64 << WIDE_W) - 1) / span;
    let mut keys = Vec::with_capacity(GLOBAL_N);
    let mut k = 0u64;
    for i in 0..GLOBAL_N {
        keys.push(k);
        k += if (i + 1) % TWO_SCALE_GROUP == 0 { ratio * delta } else { delta };
    }
    keys
}

/// Largest and mean loop count of the global search over random queries
/// and queries next to keys.
fn global_loops(keys: &[u64], seed: u64) -> (u32, f64) {
    let idx = PredIndex::build(keys, WIDE_W, BuildOptions::only(Algo::Global, Backend::Lossy { seed })).unwrap();
    let oracle = Oracle::new(keys, WIDE_W);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max, mut total, mut count) = (0, 0u64, 0u64);
    for i in 0..4 * WIDE_QUERIES {
        let x = if i % 2 == 0 {
            rng.gen_range(0..1u64 << WIDE_W)
        } else {
            let k = keys[rng.gen_range(0..keys.len())];
            (k + rng.gen_range(1..1u64 << 12)).min((1 << WIDE_W) - 1)
        };
        let a = idx.query(Algo::Global, x, None).unwrap();
        assert_eq!(a.rank, oracle.naive_pred(x));
        max = max.max(a.trace.loop_iterations);
        total += a.trace.loop_iterations as u64;
        count += 1;
    }
    (max, total as f64 / count as f64)
}

#[test]
fn c06_global_gap_ratio() {
    let mut detail = String::new();
    let mut even_max = 0;
    for (i, spacing) in [1u64 << 22, 3 << 20, 1_234_567].into_iter().enumerate() {
        let offset = 12_345 % spacing;
        let keys: Vec<u64> = (0..GLOBAL_N as u64).map(|j| offset + j * spacing).collect();
        let (max, _) = global_loops(&keys, i as u64);
        even_max = even_max.max(max);
    }
    detail += &format!("equally spaced: measured C = {even_max} (limit {GLOBAL_C}); ");
    let mut series = Vec::new();
    for (i, &ratio) in TWO_SCALE_RATIOS.iter().enumerate() {
        let keys = two_scale_set(ratio);
        let (max, mean) = global_loops(&keys, 10 + i as u64);
        series.push((max, mean));
        detail += &format!("ratio 2^{}: max {max}, mean {mean:.3}; ", ratio.trailing_zeros());
    }
    let monotone = series.windows(2).all(|p| p[0].0 <= p[1].0 && p[0].1 <= p[1].1);
    verdict(6, even_max <= GLOBAL_C && monotone, format!("{detail}monotone={monotone}"));
}

#[test]
fn c07_finger_bounds() {
    let mut entered = 0u64;
    let mut violations = 0u64;
    for (i, keys) in suite_sets().iter().enumerate() {
        let idx = PredIndex::build(keys, SUITE_W, BuildOptions::all(Backend::Lossy { seed: i as u64 })).unwrap();
        let oracle = Oracle::new(keys, SUITE_W);
        let f = idx.finger().unwrap();
        for x in 0..1u64 << SUITE_W {
            for &y in keys.iter().filter(|&&y| y < x) {
                let out = f.pred_finger(idx.zfast(), x, y).unwrap();
                let Some(el) = out.extent_len else { continue };
                entered += 1;
                let rest = (SUITE_W - el) as f64;
                let big_d = oracle.naive_distances(x).long as f64;
                let bound = lg1(rest - lg1(big_d)).ceil() as u32 + 1;
                if rest > ((x - y) as f64).log2() + 1.0 || out.trace.loop_iterations > bound {
                    violations += 1;
                }
            }
        }
    }
    verdict(7, violations == 0, format!("{entered} loop-entering finger queries, {violations} violations"));
}

#[test]
fn c08_prefix_properties() {
    let w = SUITE_W;
    let (mut checked2, mut checked3, mut violations) = (0u64, 0u64, 0u64);
    for keys in suite_sets() {
        let oracle = Oracle::new(&keys, w);
        for x in 0..1u64 << w {
            let dist = oracle.naive_distances(x);
            let xb = BitString::key_prefix(x, w, w);
            for j in 0..=w {
                let p = xb.prefix(j);
                if dist.short == 0 || j as f64 <= w as f64 - (dist.short as f64).log2() {
                    checked2 += 1;
                    let hit = oracle.in_pref(&p)
                        || p.succ().is_some_and(|q| oracle.in_pref(&q))
                        || p.pred().is_some_and(|q| oracle.in_pref(&q));
                    violations += !hit as u64;
                }
                if dist.long > 0 && oracle.in_pref(&p) && j as f64 > w as f64 - (dist.long as f64).log2() {
                    checked3 += 1;
                    let under = |k: &u64| BitString::key_prefix(*k, w, j) == p;
                    let below = keys.iter().filter(|k| under(k)).any(|&k| k < x);
                    let above = keys.iter().filter(|k| under(k)).any(|&k| k >= x);
                    violations += (below && above) as u64;
                }
            }
        }
    }
    verdict(
        8,
        violations == 0,
        format!("{checked2} hit-prefix and {checked3} one-side cases, {violations} violations"),
    );
}

#[test]
fn c09_lossy_backend() {
    let run = run_suite(|i| Backend::Lossy { seed: 0xbad0 + i as u64 });
    verdict(9, run.mismatches == 0, format!("{} queries, {} mismatches", run.queries, run.mismatches));
}

#[test]
fn c10_space_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ace);
    let mut cs = Vec::new();
    let mut detail = String::new();
    for &n in &SPACE_NS {
        let mut s = BTreeSet::new();
        while s.len() < n {
            s.insert(rng.gen::<u64>());
        }
        let keys: Vec<u64> = s.into_iter().collect();
        let opts = BuildOptions {
            finger: n <= 1 << 14,
            ..BuildOptions::all(Backend::Lossy { seed: n as u64 })
        };
        let space = PredIndex::build(&keys, SPACE_W, opts).unwrap().space();
        let c = space.per_key_log_w();
        cs.push(c);
        detail += &format!("n=2^{}: c={c:.2}", n.trailing_zeros());
        if space.finger_entries > 0 {
            detail += &format!(
                " (weak prefix index: {} entries = {:.1}·n·w, {:.1} bits/key)",
                space.finger_entries,
                space.finger_entries as f64 / (n as f64 * SPACE_W as f64),
                space.finger_bits as f64 / n as f64
            );
        }
        detail += "; ";
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let stable = cs.iter().all(|&c| (c - mean).abs() <= SPACE_TOLERANCE * mean);
    verdict(10, stable, format!("{detail}mean c={mean:.2}, within ±{}%", SPACE_TOLERANCE * 100.0));
}

#[test]
fn c11_image_round_trip() {
    let mut queries = 0u64;
    let mut differences = 0u64;
    for (i, keys) in suite_sets().iter().enumerate() {
        let idx = PredIndex::build(keys, SUITE_W, BuildOptions::all(Backend::Lossy { seed: i as u64 })).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.img");
        idx.save(&path).unwrap();
        let back = PredIndex::load(&path).unwrap();
        assert_eq!(back.to_bytes().unwrap(), idx.to_bytes().unwrap());
        for q in suite_queries(keys, &idx) {
            queries += 1;
            let (a, b) = (idx.query(q.algo, q.x, q.finger).unwrap(), back.query(q.algo, q.x, q.finger).unwrap());
            differences += (a != b) as u64;
        }
    }
    verdict(11, differences == 0, format!("{queries} queries, {differences} differ after reload"));
}
