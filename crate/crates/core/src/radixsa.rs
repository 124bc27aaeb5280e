//! RadixSA: bucket refinement driven right to left over text positions.
//!
//! After an initial radix sort by `d` symbols every suffix sits in a bucket of
//! suffixes sharing that prefix. Positions are then visited from `n - 1` down
//! to `0`; whenever the visited suffix is in a non-singleton bucket of depth
//! `d`, that bucket is re-sorted by the bucket numbers of `j + d` for each
//! member `j`. Because `i + d` was visited earlier it is already a singleton,
//! so suffix `i` leaves the step in a singleton bucket.
//!
//! Buckets whose members already took part in more than `C` sorts during the
//! current pass are skipped and picked up by a later pass. Buckets holding
//! members `i, i - p, i - 2p, ...` with `p <= d` are periodic and are ordered
//! by induction from the chain anchors instead of by repeated sorting.

use crate::error::{Error, Result};
use crate::radix::{Bucket, BucketState, FlatKeys, Group, RadixSorter, Scratch, WordKeys, DEFAULT_SMALL_THRESHOLD};
use crate::text::{SuffixArray, Text};

pub const DEFAULT_ACCESS_CAP: u32 = 8;

/// Largest configurable cap; per-pass counters are bytes.
pub const MAX_ACCESS_CAP: u32 = 254;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadixSaConfig {
    /// Symbols in the first sort key. `None` packs as many as fit 64 bits.
    pub initial_depth: Option<u32>,
    /// Sort participations per suffix per pass before its bucket is
    /// deferred. `None` disables the cap (single pass).
    pub access_cap: Option<u32>,
    pub small_bucket_threshold: usize,
    pub periods: bool,
    /// Keep per-suffix participation totals.
    pub instrument: bool,
}

impl Default for RadixSaConfig {
    fn default() -> Self {
        RadixSaConfig {
            initial_depth: None,
            access_cap: Some(DEFAULT_ACCESS_CAP),
            small_bucket_threshold: DEFAULT_SMALL_THRESHOLD,
            periods: true,
            instrument: false,
        }
    }
}

impl RadixSaConfig {
    fn resolve_depth(&self, t: &Text) -> Result<u32> {
        let bps = t.bits_per_symbol();
        let max = 64 / bps;
        match self.initial_depth {
            None => Ok(max),
            Some(0) => Err(Error::Config("initial depth must be >= 1".into())),
            Some(d) if d > max => Err(Error::Config(format!(
                "initial depth {d} does not fit one word at {bps} bits per symbol (max {max})"
            ))),
            Some(d) => Ok(d),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.access_cap {
            Some(0) => Err(Error::Config("access cap must be >= 1".into())),
            Some(c) if c > MAX_ACCESS_CAP => Err(Error::Config(format!(
                "access cap {c} exceeds {MAX_ACCESS_CAP}; disable the cap instead"
            ))),
            _ => Ok(()),
        }
    }
}

/// Counters collected during one construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstructionStats {
    pub passes: u32,
    pub pass_bound: u32,
    /// Sort participations summed over all suffixes and passes.
    pub participations: u64,
    pub participations_per_pass: Vec<u64>,
    pub skipped_buckets: u64,
    pub generic_sorts: u64,
    pub period_sorts: u64,
    /// Smallest depth among non-singleton buckets left after each pass.
    pub min_depth_after_pass: Vec<Option<u32>>,
    /// Per-suffix participations, when instrumented.
    pub access: Option<Vec<u32>>,
}

impl ConstructionStats {
    pub fn mean_access(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.participations as f64 / n as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct RadixSaOutput {
    pub sa: SuffixArray,
    pub stats: ConstructionStats,
}

/// Hooks into the construction, for tracing and instrumented tests.
pub trait Observer {
    fn initial(&mut self, _state: &BucketState) {}
    /// Called after the bucket of `suffix` was sorted.
    fn bucket_sorted(&mut self, _suffix: usize, _state: &BucketState) {}
    /// Called after position `suffix` was visited in a pass.
    fn position_visited(&mut self, _suffix: usize, _capped: bool, _state: &BucketState) {}
}

impl Observer for () {}

/// `ceil(log_{C+1} n) + 1`; 1 without a cap.
pub fn pass_bound(n: usize, cap: Option<u32>) -> u32 {
    let Some(c) = cap else { return 1 };
    let base = c as u128 + 1;
    let mut k = 0u32;
    let mut reach = 1u128;
    while reach < n as u128 {
        reach *= base;
        k += 1;
    }
    k + 1
}

pub fn radixsa(t: &Text, cfg: &RadixSaConfig) -> Result<RadixSaOutput> {
    radixsa_observed(t, cfg, &mut ())
}

pub fn radixsa_observed<O: Observer>(t: &Text, cfg: &RadixSaConfig, obs: &mut O) -> Result<RadixSaOutput> {
    cfg.validate()?;
    let d = cfg.resolve_depth(t)?;
    let n = t.len();
    let mut work = RefineWork::new(cfg.small_bucket_threshold);
    let mut state = initial_sort(t, d, &mut work.sorter, &mut work.scratch, cfg.instrument);
    obs.initial(&state);

    let mut stats = ConstructionStats {
        pass_bound: if n > 1 { pass_bound(n, cfg.access_cap) } else { 0 },
        ..Default::default()
    };

    // The loop always runs once for n > 1, then again while buckets remain.
    while n > 1 && (stats.passes == 0 || !state.is_done()) {
        stats.passes += 1;
        if stats.passes > stats.pass_bound {
            panic!(
                "RadixSA exceeded its pass bound: pass {} > {} with {} non-singleton buckets left (n = {n})",
                stats.passes,
                stats.pass_bound,
                state.nonsingleton_count()
            );
        }
        // The last admissible pass runs uncapped, which always finishes.
        let cap = match cfg.access_cap {
            Some(c) if stats.passes < stats.pass_bound => Some(c),
            _ => None,
        };
        state.reset_access();
        let before = state.participations();
        for i in (0..n).rev() {
            let b = state.bucket_of(i);
            if !b.is_singleton() {
                let first = state.order()[b.start as usize] as usize;
                if cap.is_some_and(|c| state.access_count(first) as u32 > c) {
                    stats.skipped_buckets += 1;
                } else {
                    if process_bucket(t, &mut state, b, cfg.periods, &mut work) {
                        stats.period_sorts += 1;
                    } else {
                        stats.generic_sorts += 1;
                    }
                    obs.bucket_sorted(i, &state);
                }
            }
            obs.position_visited(i, cap.is_some(), &state);
        }
        stats.participations_per_pass.push(state.participations() - before);
        stats.min_depth_after_pass.push(state.min_depth());
    }

    stats.participations = state.participations();
    stats.access = state.take_access_totals();
    Ok(RadixSaOutput {
        sa: SuffixArray::from_vec(state.into_order()),
        stats,
    })
}

/// Sorter and buffers reused across bucket refinements.
#[derive(Debug)]
pub struct RefineWork {
    sorter: RadixSorter,
    scratch: Scratch,
    periods: PeriodScratch,
}

impl RefineWork {
    pub fn new(small_bucket_threshold: usize) -> Self {
        RefineWork {
            sorter: RadixSorter::new(small_bucket_threshold),
            scratch: Scratch::default(),
            periods: PeriodScratch::default(),
        }
    }
}

/// Returns true when the bucket was resolved by period induction.
fn process_bucket(t: &Text, state: &mut BucketState, b: Bucket, periods: bool, work: &mut RefineWork) -> bool {
    if periods {
        let chains = detect_periods(state, b, work);
        if !chains.is_empty() {
            handle_periods(state, b, &chains, work);
            return true;
        }
    }
    sort_by_successor(t.len(), state, b, &mut work.sorter, &mut work.scratch);
    false
}

/// Sorts `b` by the bucket numbers of `j + d`. A member with `j + d = n`
/// has nothing left after its shared prefix and gets the smallest key.
fn sort_by_successor(n: usize, state: &mut BucketState, b: Bucket, sorter: &mut RadixSorter, scratch: &mut Scratch) {
    let d = state.depth_at(b.start);
    let key_bits = 64 - (n as u64 + 1).leading_zeros();
    state.sort_bucket_by_key(
        sorter,
        scratch,
        b,
        key_bits,
        |st, j| successor_key(st, n, j as usize + d as usize),
        |st, key| d.saturating_add(st.depth_at(key as u32 - 1)),
    );
}

#[inline]
fn successor_key(st: &BucketState, n: usize, at: usize) -> u64 {
    if at >= n {
        0
    } else {
        st.bucket_number(at) as u64 + 1
    }
}

/// Members `anchor, anchor - p, ...` of one bucket, all of which share at
/// least `p` symbols, where `anchor + p` lies outside the bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodChain {
    pub period: u32,
    pub anchor: u32,
    pub len: u32,
}

impl PeriodChain {
    /// Members from the anchor downwards.
    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).map(move |k| self.anchor - k * self.period)
    }
}

#[derive(Debug, Default)]
struct PeriodScratch {
    positions: Vec<u32>,
    lower: Vec<AnchorKey>,
    upper: Vec<AnchorKey>,
    sorted: Vec<AnchorKey>,
    class_depth: Vec<u64>,
    out: Vec<u32>,
    tags: Vec<(u32, u32)>,
    groups: Vec<Group>,
}

#[inline]
fn in_bucket(st: &BucketState, b: Bucket, x: usize) -> bool {
    x < st.len() && st.bucket_number(x) == b.start
}

/// Finds the smallest positive gap `p` between members of `b`. If `p` does
/// not exceed the bucket depth, returns the partition of the bucket into
/// maximal chains with that period (a chain may have a single member);
/// otherwise returns nothing.
pub fn detect_periods(st: &BucketState, b: Bucket, work: &mut RefineWork) -> Vec<PeriodChain> {
    let d = st.depth_at(b.start);
    let pos = &mut work.periods.positions;
    pos.clear();
    pos.extend_from_slice(st.members(b));
    pos.sort_unstable();
    let p = pos.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(u32::MAX);
    if p > d {
        return Vec::new();
    }
    let mut chains = Vec::new();
    for &a in pos.iter().rev() {
        let a_us = a as usize;
        if in_bucket(st, b, a_us + p as usize) {
            continue;
        }
        let mut len = 1;
        let mut x = a_us;
        while x >= p as usize && in_bucket(st, b, x - p as usize) {
            x -= p as usize;
            len += 1;
        }
        chains.push(PeriodChain { period: p, anchor: a, len });
    }
    chains
}

/// Orders a periodic bucket from its chain anchors.
///
/// All members share their first `p` symbols `B`, so a member `l - 1` steps
/// below anchor `a` reads `B^l` followed by the suffix `a + p`, which lies
/// outside the bucket. Lower anchors (`a + p` orders before the bucket)
/// precede every member and their chains grow upwards with the level; upper
/// anchors follow every member and their chains grow downwards. Within one
/// level, members follow their anchors, which are ordered by the bucket of
/// `a + p` and then by the bucket of `a + d`. Anchors equal on both keys
/// stay together, one sub-bucket per level.
pub fn handle_periods(state: &mut BucketState, b: Bucket, chains: &[PeriodChain], work: &mut RefineWork) {
    let n = state.len();
    let d = state.depth_at(b.start);
    let p = chains[0].period;
    let ps = &mut work.periods;
    ps.lower.clear();
    ps.upper.clear();
    for c in chains {
        let a = c.anchor as usize;
        let anchor = AnchorKey {
            near: successor_key(state, n, a + p as usize),
            far: successor_key(state, n, a + d as usize),
            anchor: c.anchor,
        };
        if anchor.near <= b.start as u64 {
            ps.lower.push(anchor);
        } else {
            ps.upper.push(anchor);
        }
    }
    sort_anchors(&mut work.sorter, &mut work.scratch, &mut ps.lower, &mut ps.sorted, n);
    sort_anchors(&mut work.sorter, &mut work.scratch, &mut ps.upper, &mut ps.sorted, n);

    ps.out.clear();
    ps.tags.clear();
    ps.class_depth.clear();
    seed_anchors(state, p, d, ps.lower.iter(), &mut ps.class_depth, &mut ps.out, &mut ps.tags);
    expand(state, b, p, &mut ps.out, &mut ps.tags, 0);
    let upper_start = ps.out.len();
    seed_anchors(state, p, d, ps.upper.iter().rev(), &mut ps.class_depth, &mut ps.out, &mut ps.tags);
    expand(state, b, p, &mut ps.out, &mut ps.tags, upper_start);
    ps.out[upper_start..].reverse();
    ps.tags[upper_start..].reverse();
    debug_assert_eq!(ps.out.len(), b.len as usize);

    ps.groups.clear();
    let mut run = 0u32;
    for k in 0..ps.out.len() {
        run += 1;
        if k + 1 == ps.out.len() || ps.tags[k + 1] != ps.tags[k] {
            let (class, level) = ps.tags[k];
            let depth = if run > 1 {
                let shared = (level as u64 - 1) * p as u64 + ps.class_depth[class as usize];
                shared.min(u32::MAX as u64) as u32
            } else {
                0
            };
            ps.groups.push(Group { len: run, depth });
            run = 0;
        }
    }
    let out = std::mem::take(&mut ps.out);
    let groups = std::mem::take(&mut ps.groups);
    state.refine(b, &out, &groups);
    ps.out = out;
    ps.groups = groups;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AnchorKey {
    near: u64,
    far: u64,
    anchor: u32,
}

/// Breadth-first expansion of the chains seeded at `out[start..]` towards
/// smaller positions, one level at a time.
fn expand(st: &BucketState, b: Bucket, p: u32, out: &mut Vec<u32>, tags: &mut Vec<(u32, u32)>, start: usize) {
    let mut at = start;
    while at < out.len() {
        let y = out[at] as usize;
        let (class, level) = tags[at];
        if y >= p as usize && in_bucket(st, b, y - p as usize) {
            out.push(y as u32 - p);
            tags.push((class, level + 1));
        }
        at += 1;
    }
}

/// Appends anchors at level 1, starting a new class whenever the key pair
/// changes, and records how many symbols the anchors of each class share.
fn seed_anchors<'a>(
    st: &BucketState,
    p: u32,
    d: u32,
    anchors: impl Iterator<Item = &'a AnchorKey>,
    class_depth: &mut Vec<u64>,
    out: &mut Vec<u32>,
    tags: &mut Vec<(u32, u32)>,
) {
    let mut last = None;
    for a in anchors {
        if last != Some((a.near, a.far)) {
            last = Some((a.near, a.far));
            // only read when the class has two anchors, so both keys name
            // non-singleton buckets
            let via_near = p as u64 + key_depth(st, a.near);
            let via_far = d as u64 + key_depth(st, a.far);
            class_depth.push(via_near.max(via_far));
        }
        out.push(a.anchor);
        tags.push(((class_depth.len() - 1) as u32, 1));
    }
}

#[inline]
fn key_depth(st: &BucketState, key: u64) -> u64 {
    if key == 0 {
        0
    } else {
        st.depth_at(key as u32 - 1) as u64
    }
}

fn sort_anchors(
    sorter: &mut RadixSorter,
    scratch: &mut Scratch,
    anchors: &mut [AnchorKey],
    buf: &mut Vec<AnchorKey>,
    n: usize,
) {
    if anchors.len() <= 1 {
        return;
    }
    let bits = 64 - (n as u64 + 1).leading_zeros();
    scratch.keys.clear();
    scratch.keys.extend(anchors.iter().map(|a| (a.near << bits) | a.far));
    scratch.items.clear();
    scratch.items.extend(0..anchors.len() as u32);
    if 2 * bits <= 64 {
        sorter.sort(&mut scratch.items, &WordKeys::new(&scratch.keys, 2 * bits));
    } else {
        scratch.keys.clear();
        scratch.keys.extend(anchors.iter().flat_map(|a| [a.near, a.far]));
        sorter.sort(&mut scratch.items, &FlatKeys::new(&scratch.keys, 2));
    }
    buf.clear();
    buf.extend(scratch.items.iter().map(|&i| anchors[i as usize]));
    anchors.copy_from_slice(buf);
}

/// Packs `count` codes starting at `i` (pad past the end) into the low bits.
#[inline]
fn pack(codes: &[u16], i: usize, count: u32, bps: u32) -> u64 {
    let mut v = 0u64;
    for k in 0..count as usize {
        v = (v << bps) | codes.get(i + k).copied().unwrap_or(0) as u64;
    }
    v
}

/// Sorts all suffixes by their first `d` symbols.
///
/// A counting sort on the leading symbols (at most 16 bits) places positions
/// straight into the output order; each resulting bucket is then sorted on
/// its remaining symbols with buffers sized to that bucket.
pub fn initial_sort(t: &Text, d: u32, sorter: &mut RadixSorter, scratch: &mut Scratch, instrument: bool) -> BucketState {
    let n = t.len();
    let codes = t.codes();
    let bps = t.bits_per_symbol();
    let lead = (16 / bps).clamp(1, d);
    let rest = d - lead;
    let lead_bits = lead * bps;

    let mut counts = vec![0u32; (1usize << lead_bits) + 1];
    for i in 0..n {
        counts[pack(codes, i, lead, bps) as usize + 1] += 1;
    }
    for k in 1..counts.len() {
        counts[k] += counts[k - 1];
    }
    let mut sa = vec![0u32; n];
    {
        let mut next = counts.clone();
        for i in 0..n {
            let c = pack(codes, i, lead, bps) as usize;
            sa[next[c] as usize] = i as u32;
            next[c] += 1;
        }
    }
    let mut state = BucketState::with_order(sa, instrument);
    for w in counts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        if len == 0 {
            continue;
        }
        if len == 1 || rest == 0 {
            state.declare_bucket(lo, len, d);
            continue;
        }
        scratch.keys.clear();
        scratch
            .keys
            .extend(state.order()[lo as usize..hi as usize].iter().map(|&s| pack(codes, s as usize + lead as usize, rest, bps)));
        scratch.items.clear();
        scratch.items.extend(0..len);
        sorter.sort(&mut scratch.items, &WordKeys::new(&scratch.keys, rest * bps));
        scratch.order.clear();
        {
            let seg = &state.order()[lo as usize..hi as usize];
            scratch.order.extend(scratch.items.iter().map(|&k| seg[k as usize]));
        }
        state.set_segment(lo, &scratch.order);
        let mut run_start = 0usize;
        for k in 0..len as usize {
            let key = scratch.keys[scratch.items[k] as usize];
            if k + 1 == len as usize || scratch.keys[scratch.items[k + 1] as usize] != key {
                state.declare_bucket(lo + run_start as u32, (k + 1 - run_start) as u32, d);
                run_start = k + 1;
            }
        }
    }
    state
}

/// Buckets of one state in order: members as stored, depth for non-singletons.
pub type Snapshot = Vec<(Vec<u32>, Option<u32>)>;

pub fn snapshot(state: &BucketState) -> Snapshot {
    state
        .buckets()
        .into_iter()
        .map(|(b, depth)| (state.members(b).to_vec(), depth))
        .collect()
}

/// Records the state after the initial sort and after every bucket sort.
/// Meant for small inputs; each step copies the whole state.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub initial: Snapshot,
    /// Visited position whose bucket was sorted, and the state afterwards.
    pub steps: Vec<(usize, Snapshot)>,
}

impl Observer for Trace {
    fn initial(&mut self, state: &BucketState) {
        self.initial = snapshot(state);
    }

    fn bucket_sorted(&mut self, suffix: usize, state: &BucketState) {
        self.steps.push((suffix, snapshot(state)));
    }
}
