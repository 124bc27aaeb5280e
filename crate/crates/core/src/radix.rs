//! LSD radix sorting and bucket bookkeeping.
//!
//! [`RadixSorter`] sorts item indices by keys exposed through [`KeySource`].
//! All digit histograms are collected in a single scan before any placement
//! pass, and rounds whose digit is constant are skipped. Inputs shorter than
//! the small-bucket threshold go through an iterative merge sort instead.
//!
//! [`BucketState`] is the partition of suffixes into buckets of the current
//! ordering. Each suffix owns one 32-bit [`PackedBucketEntry`] holding the
//! start of its bucket and, when it fits, the bucket length. Depths live in a
//! byte per bucket start, with rare large values spilled to side maps.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::text::Text;

/// Bits per LSD digit.
pub const DIGIT_BITS: u32 = 8;
const RADIX: usize = 1 << DIGIT_BITS;

/// Below this many items a merge sort is used.
pub const DEFAULT_SMALL_THRESHOLD: usize = 32;

/// Keyed items for [`RadixSorter`]. Items are `u32` indices; round 0 is the
/// least significant digit.
pub trait KeySource {
    fn rounds(&self) -> usize;
    fn digit(&self, item: u32, round: usize) -> u8;
    fn compare(&self, a: u32, b: u32) -> Ordering;
}

/// Single-word keys indexed by item, using only the low `bits` bits.
pub struct WordKeys<'a> {
    keys: &'a [u64],
    rounds: usize,
}

impl<'a> WordKeys<'a> {
    pub fn new(keys: &'a [u64], bits: u32) -> Self {
        WordKeys {
            keys,
            rounds: bits.div_ceil(DIGIT_BITS).max(1) as usize,
        }
    }
}

impl KeySource for WordKeys<'_> {
    fn rounds(&self) -> usize {
        self.rounds
    }

    #[inline]
    fn digit(&self, item: u32, round: usize) -> u8 {
        (self.keys[item as usize] >> (round as u32 * DIGIT_BITS)) as u8
    }

    #[inline]
    fn compare(&self, a: u32, b: u32) -> Ordering {
        self.keys[a as usize].cmp(&self.keys[b as usize])
    }
}

/// Multi-word big-endian keys stored flat, `width` words per item.
pub struct FlatKeys<'a> {
    words: &'a [u64],
    width: usize,
}

impl<'a> FlatKeys<'a> {
    pub fn new(words: &'a [u64], width: usize) -> Self {
        FlatKeys { words, width }
    }

    #[inline]
    fn key(&self, item: u32) -> &[u64] {
        let at = item as usize * self.width;
        &self.words[at..at + self.width]
    }
}

impl KeySource for FlatKeys<'_> {
    fn rounds(&self) -> usize {
        self.width * 8
    }

    #[inline]
    fn digit(&self, item: u32, round: usize) -> u8 {
        let word = self.width - 1 - round / 8;
        (self.words[item as usize * self.width + word] >> ((round % 8) * 8)) as u8
    }

    fn compare(&self, a: u32, b: u32) -> Ordering {
        self.key(a).cmp(self.key(b))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SortStats {
    /// Counting scans over the input; one per radix sort invocation.
    pub histogram_scans: u64,
    pub placement_passes: u64,
    pub radix_sorts: u64,
    pub merge_sorts: u64,
}

/// Reusable LSD radix sorter. Scratch grows to the largest input seen.
#[derive(Debug)]
pub struct RadixSorter {
    small_threshold: usize,
    counts: Vec<[u32; RADIX]>,
    buf: Vec<u32>,
    pub stats: SortStats,
}

impl Default for RadixSorter {
    fn default() -> Self {
        Self::new(DEFAULT_SMALL_THRESHOLD)
    }
}

impl RadixSorter {
    pub fn new(small_threshold: usize) -> Self {
        RadixSorter {
            small_threshold,
            counts: Vec::new(),
            buf: Vec::new(),
            stats: SortStats::default(),
        }
    }

    pub fn small_threshold(&self) -> usize {
        self.small_threshold
    }

    /// Stable sort of `items` by key.
    pub fn sort<K: KeySource>(&mut self, items: &mut [u32], keys: &K) {
        if items.len() <= 1 {
            return;
        }
        if items.len() < self.small_threshold {
            self.merge_sort(items, keys);
        } else {
            self.radix_sort(items, keys);
        }
    }

    /// Forces the radix path regardless of size.
    pub fn radix_sort<K: KeySource>(&mut self, items: &mut [u32], keys: &K) {
        let len = items.len();
        let rounds = keys.rounds();
        self.stats.radix_sorts += 1;
        if self.counts.len() < rounds {
            self.counts.resize(rounds, [0; RADIX]);
        }
        let counts = &mut self.counts[..rounds];
        for c in counts.iter_mut() {
            c.fill(0);
        }
        self.stats.histogram_scans += 1;
        for &item in items.iter() {
            for (r, c) in counts.iter_mut().enumerate() {
                c[keys.digit(item, r) as usize] += 1;
            }
        }
        if self.buf.len() < len {
            self.buf.resize(len, 0);
        }
        let buf = &mut self.buf[..len];
        let mut in_buf = false;
        for (r, c) in counts.iter_mut().enumerate() {
            if c.iter().any(|&k| k as usize == len) {
                continue;
            }
            let mut sum = 0u32;
            for k in c.iter_mut() {
                let v = *k;
                *k = sum;
                sum += v;
            }
            let (src, dst): (&[u32], &mut [u32]) = if in_buf {
                (&*buf, &mut *items)
            } else {
                (&*items, &mut *buf)
            };
            for &item in src {
                let d = keys.digit(item, r) as usize;
                dst[c[d] as usize] = item;
                c[d] += 1;
            }
            in_buf = !in_buf;
            self.stats.placement_passes += 1;
        }
        if in_buf {
            items.copy_from_slice(buf);
        }
    }

    fn merge_sort<K: KeySource>(&mut self, items: &mut [u32], keys: &K) {
        let len = items.len();
        self.stats.merge_sorts += 1;
        if self.buf.len() < len {
            self.buf.resize(len, 0);
        }
        let buf = &mut self.buf[..len];
        let mut width = 1;
        let mut in_buf = false;
        while width < len {
            let (src, dst): (&[u32], &mut [u32]) = if in_buf {
                (&*buf, &mut *items)
            } else {
                (&*items, &mut *buf)
            };
            let mut lo = 0;
            while lo < len {
                let mid = (lo + width).min(len);
                let hi = (lo + 2 * width).min(len);
                let (mut a, mut b, mut out) = (lo, mid, lo);
                while a < mid && b < hi {
                    if keys.compare(src[b], src[a]) == Ordering::Less {
                        dst[out] = src[b];
                        b += 1;
                    } else {
                        dst[out] = src[a];
                        a += 1;
                    }
                    out += 1;
                }
                dst[out..out + mid - a].copy_from_slice(&src[a..mid]);
                out += mid - a;
                dst[out..out + hi - b].copy_from_slice(&src[b..hi]);
                lo = hi;
            }
            in_buf = !in_buf;
            width *= 2;
        }
        if in_buf {
            items.copy_from_slice(buf);
        }
    }
}

/// Bit layout of a [`PackedBucketEntry`] for a given text length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntryLayout {
    pub start_bits: u32,
    pub len_bits: u32,
}

impl EntryLayout {
    pub fn for_len(n: usize) -> Self {
        let max_start = n.saturating_sub(1) as u64;
        let start_bits = (64 - max_start.leading_zeros()).max(1);
        EntryLayout {
            start_bits,
            len_bits: 32 - start_bits,
        }
    }

    #[inline]
    pub fn pack(self, start: u32, len: u32) -> PackedBucketEntry {
        let fits = self.len_bits > 0 && (len as u64) < (1u64 << self.len_bits);
        if fits {
            PackedBucketEntry(start | (len << self.start_bits))
        } else {
            PackedBucketEntry(start)
        }
    }

    #[inline]
    pub fn start(self, e: PackedBucketEntry) -> u32 {
        if self.start_bits >= 32 {
            e.0
        } else {
            e.0 & ((1u32 << self.start_bits) - 1)
        }
    }

    /// Length field; `None` is the overflow marker.
    #[inline]
    pub fn len(self, e: PackedBucketEntry) -> Option<u32> {
        if self.len_bits == 0 {
            return None;
        }
        match e.0 >> self.start_bits {
            0 => None,
            l => Some(l),
        }
    }
}

/// Per-suffix word: bucket start in the low bits, bucket length (0 when it
/// does not fit) in the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackedBucketEntry(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bucket {
    pub start: u32,
    pub len: u32,
}

impl Bucket {
    pub fn is_singleton(self) -> bool {
        self.len == 1
    }

    pub fn range(self) -> std::ops::Range<usize> {
        self.start as usize..(self.start + self.len) as usize
    }
}

/// One sub-bucket produced by a refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Group {
    pub len: u32,
    pub depth: u32,
}

const DEPTH_SPILL: u8 = u8::MAX;

/// Partition of all suffixes into buckets of the current ordering.
#[derive(Debug)]
pub struct BucketState {
    sa: Vec<u32>,
    entries: Vec<PackedBucketEntry>,
    layout: EntryLayout,
    depth: Vec<u8>,
    long_depth: HashMap<u32, u32>,
    long_len: HashMap<u32, u32>,
    access: Vec<u8>,
    totals: Option<Vec<u32>>,
    nonsingleton: usize,
    participations: u64,
}

impl BucketState {
    /// Wraps an ordering; buckets must then be declared with
    /// [`BucketState::declare_bucket`] so that they cover `[0, n)`.
    pub fn with_order(sa: Vec<u32>, instrument: bool) -> Self {
        let n = sa.len();
        BucketState {
            layout: EntryLayout::for_len(n),
            entries: vec![PackedBucketEntry(0); n],
            depth: vec![0; n],
            long_depth: HashMap::new(),
            long_len: HashMap::new(),
            access: vec![0; n],
            totals: instrument.then(|| vec![0; n]),
            nonsingleton: 0,
            participations: 0,
            sa,
        }
    }

    /// Builds the state from an ordering and the sizes of consecutive buckets.
    pub fn from_groups(sa: Vec<u32>, groups: impl IntoIterator<Item = Group>, instrument: bool) -> Self {
        let mut state = Self::with_order(sa, instrument);
        let mut start = 0u32;
        for g in groups {
            state.declare_bucket(start, g.len, g.depth);
            start += g.len;
        }
        debug_assert_eq!(start as usize, state.len());
        state
    }

    pub fn declare_bucket(&mut self, start: u32, len: u32, depth: u32) {
        let entry = self.layout.pack(start, len);
        for &s in &self.sa[start as usize..(start + len) as usize] {
            self.entries[s as usize] = entry;
        }
        if self.layout.len(entry).is_none() {
            self.long_len.insert(start, len);
        } else if !self.long_len.is_empty() {
            self.long_len.remove(&start);
        }
        if len > 1 {
            self.nonsingleton += 1;
            self.set_depth(start, depth);
        }
    }

    fn set_depth(&mut self, start: u32, depth: u32) {
        if depth < DEPTH_SPILL as u32 {
            self.depth[start as usize] = depth as u8;
        } else {
            self.depth[start as usize] = DEPTH_SPILL;
            self.long_depth.insert(start, depth);
        }
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    pub fn layout(&self) -> EntryLayout {
        self.layout
    }

    pub fn order(&self) -> &[u32] {
        &self.sa
    }

    pub fn entry(&self, suffix: usize) -> PackedBucketEntry {
        self.entries[suffix]
    }

    /// Bucket start of `suffix`. Numbers order buckets lexicographically.
    #[inline]
    pub fn bucket_number(&self, suffix: usize) -> u32 {
        self.layout.start(self.entries[suffix])
    }

    #[inline]
    pub fn bucket_of(&self, suffix: usize) -> Bucket {
        let e = self.entries[suffix];
        let start = self.layout.start(e);
        let len = match self.layout.len(e) {
            Some(l) => l,
            None => self.long_len[&start],
        };
        Bucket { start, len }
    }

    /// Sorting depth of the non-singleton bucket starting at `start`.
    #[inline]
    pub fn depth_at(&self, start: u32) -> u32 {
        match self.depth[start as usize] {
            DEPTH_SPILL => self.long_depth[&start],
            d => d as u32,
        }
    }

    pub fn members(&self, b: Bucket) -> &[u32] {
        &self.sa[b.range()]
    }

    pub fn nonsingleton_count(&self) -> usize {
        self.nonsingleton
    }

    pub fn is_done(&self) -> bool {
        self.nonsingleton == 0
    }

    pub fn access_count(&self, suffix: usize) -> u8 {
        self.access[suffix]
    }

    pub fn reset_access(&mut self) {
        self.access.fill(0);
    }

    /// Total sort participations so far.
    pub fn participations(&self) -> u64 {
        self.participations
    }

    /// Per-suffix participation totals when instrumented.
    pub fn access_totals(&self) -> Option<&[u32]> {
        self.totals.as_deref()
    }

    pub fn take_access_totals(&mut self) -> Option<Vec<u32>> {
        self.totals.take()
    }

    /// Smallest depth among non-singleton buckets.
    pub fn min_depth(&self) -> Option<u32> {
        if self.nonsingleton == 0 {
            return None;
        }
        let mut best = None;
        let mut at = 0usize;
        while at < self.sa.len() {
            let b = self.bucket_of(self.sa[at] as usize);
            if !b.is_singleton() {
                let d = self.depth_at(b.start);
                best = Some(best.map_or(d, |x: u32| x.min(d)));
            }
            at += b.len as usize;
        }
        best
    }

    /// Buckets in order, with depth for non-singletons.
    pub fn buckets(&self) -> Vec<(Bucket, Option<u32>)> {
        let mut out = Vec::new();
        let mut at = 0usize;
        while at < self.sa.len() {
            let b = self.bucket_of(self.sa[at] as usize);
            let depth = (!b.is_singleton()).then(|| self.depth_at(b.start));
            out.push((b, depth));
            at += b.len as usize;
        }
        out
    }

    /// Replaces bucket `b` by consecutive sub-buckets. `new_order` is the
    /// members' new order and `groups` the sub-bucket sizes and depths.
    /// Every member counts one participation.
    pub fn refine(&mut self, b: Bucket, new_order: &[u32], groups: &[Group]) {
        debug_assert!(!b.is_singleton());
        debug_assert_eq!(new_order.len(), b.len as usize);
        debug_assert_eq!(groups.iter().map(|g| g.len).sum::<u32>(), b.len);
        self.sa[b.range()].copy_from_slice(new_order);
        for &s in new_order {
            let a = &mut self.access[s as usize];
            *a = a.saturating_add(1);
        }
        if let Some(t) = self.totals.as_mut() {
            for &s in new_order {
                t[s as usize] += 1;
            }
        }
        self.participations += b.len as u64;
        self.nonsingleton -= 1;
        let mut start = b.start;
        for g in groups {
            self.declare_bucket(start, g.len, g.depth);
            start += g.len;
        }
    }

    /// Stable radix sort of `b`'s members by `key_of`, splitting runs of equal
    /// keys into sub-buckets whose depth is `depth_of(key)`. All keys are read
    /// before anything is modified. Returns the number of sub-buckets.
    pub fn sort_bucket_by_key(
        &mut self,
        sorter: &mut RadixSorter,
        scratch: &mut Scratch,
        b: Bucket,
        key_bits: u32,
        key_of: impl Fn(&Self, u32) -> u64,
        depth_of: impl Fn(&Self, u64) -> u32,
    ) -> usize {
        let m = b.len as usize;
        scratch.keys.clear();
        scratch.keys.extend(self.members(b).iter().map(|&s| key_of(self, s)));
        scratch.items.clear();
        scratch.items.extend(0..m as u32);
        sorter.sort(&mut scratch.items, &WordKeys::new(&scratch.keys, key_bits));

        scratch.order.clear();
        scratch.groups.clear();
        let members = &self.sa[b.range()];
        let mut run_start = 0;
        for k in 0..m {
            let item = scratch.items[k] as usize;
            scratch.order.push(members[item]);
            let last = k + 1 == m || scratch.keys[scratch.items[k + 1] as usize] != scratch.keys[item];
            if last {
                let len = (k + 1 - run_start) as u32;
                let depth = if len > 1 { depth_of(self, scratch.keys[item]) } else { 0 };
                scratch.groups.push(Group { len, depth });
                run_start = k + 1;
            }
        }
        let order = std::mem::take(&mut scratch.order);
        let groups = std::mem::take(&mut scratch.groups);
        self.refine(b, &order, &groups);
        let count = groups.len();
        scratch.order = order;
        scratch.groups = groups;
        count
    }

    /// Overwrites part of the ordering without touching entries; the caller
    /// declares the buckets of that range afterwards.
    pub(crate) fn set_segment(&mut self, start: u32, order: &[u32]) {
        self.sa[start as usize..start as usize + order.len()].copy_from_slice(order);
    }

    pub fn into_order(self) -> Vec<u32> {
        self.sa
    }

    /// Checks the structural invariants against the text: buckets partition
    /// the ordering, entries agree with it, members of each bucket share a
    /// prefix of the recorded depth, and bucket order agrees with suffix order.
    pub fn validate(&self, t: &Text) -> Result<(), String> {
        let n = self.sa.len();
        if n != t.len() {
            return Err(format!("state has {n} suffixes, text {}", t.len()));
        }
        let mut seen = vec![false; n];
        let mut nonsingleton = 0;
        let mut at = 0usize;
        while at < n {
            let first = self.sa[at] as usize;
            let b = self.bucket_of(first);
            if b.start as usize != at || b.len == 0 || at + b.len as usize > n {
                return Err(format!("bucket of {first} is {b:?}, expected start {at}"));
            }
            let depth = if b.is_singleton() { 0 } else { self.depth_at(b.start) as usize };
            if !b.is_singleton() {
                nonsingleton += 1;
            }
            for &s in self.members(b) {
                let s = s as usize;
                if seen[s] {
                    return Err(format!("suffix {s} appears twice"));
                }
                seen[s] = true;
                if self.bucket_of(s) != b {
                    return Err(format!("suffix {s} has entry {:?}, expected {b:?}", self.bucket_of(s)));
                }
                if t.codes().get(s..s + depth) != t.codes().get(first..first + depth) {
                    return Err(format!("suffixes {s} and {first} do not share depth {depth}"));
                }
            }
            at += b.len as usize;
        }
        if nonsingleton != self.nonsingleton {
            return Err(format!("nonsingleton counter {} != {nonsingleton}", self.nonsingleton));
        }
        // consecutive buckets must be ordered: max of one below min of next
        let buckets = self.buckets();
        for w in buckets.windows(2) {
            let (lo, hi) = (w[0].0, w[1].0);
            let lo_max = self.members(lo).iter().max_by(|&&a, &&b| crate::text::suffix_compare(t, a as usize, b as usize));
            let hi_min = self.members(hi).iter().min_by(|&&a, &&b| crate::text::suffix_compare(t, a as usize, b as usize));
            if let (Some(&a), Some(&b)) = (lo_max, hi_min) {
                if crate::text::suffix_compare(t, a as usize, b as usize) != Ordering::Less {
                    return Err(format!("bucket at {} not below bucket at {}", lo.start, hi.start));
                }
            }
        }
        Ok(())
    }
}

/// Temporary buffers reused across bucket sorts.
#[derive(Debug, Default)]
pub struct Scratch {
    pub keys: Vec<u64>,
    pub items: Vec<u32>,
    pub order: Vec<u32>,
    pub groups: Vec<Group>,
}

/// Sorts positions by their flat multi-word keys and groups equal keys into
/// buckets of depth `depth`.
pub fn lsd_sort_fingerprints(
    sorter: &mut RadixSorter,
    keys: &[u64],
    width: usize,
    payload: Vec<u32>,
    depth: u32,
    instrument: bool,
) -> BucketState {
    let mut order = payload;
    let n = order.len();
    if width == 0 {
        return BucketState::from_groups(order, [Group { len: n as u32, depth }], instrument);
    }
    let flat = FlatKeys::new(keys, width);
    if n > 1 {
        sorter.radix_sort(&mut order, &flat);
    }
    let mut groups = Vec::new();
    let mut run = 0u32;
    for k in 0..n {
        run += 1;
        if k + 1 == n || flat.compare(order[k], order[k + 1]) != Ordering::Equal {
            groups.push(Group { len: run, depth });
            run = 0;
        }
    }
    BucketState::from_groups(order, groups, instrument)
}
