//! The l-mer builders: radix sort every suffix by its first `ell` symbols and
//! hope every bucket is a singleton, which for random texts and `ell` from
//! [`choose_ell`](crate::lmer::choose_ell) happens with high probability.
//!
//! [`sa1`] finishes the rare non-singleton buckets with a comparison sort.
//! [`sa2`] gives up on the first non-singleton bucket and hands the whole text
//! to a full builder. Either way the output is always correct; only the
//! running time depends on luck.

use crate::error::Result;
use crate::lmer::{fingerprints, LmerConfig};
use crate::radix::{lsd_sort_fingerprints, BucketState, RadixSorter};
use crate::radixsa::{radixsa, ConstructionStats, RadixSaConfig};
use crate::text::{suffix_compare, SuffixArray, Text};

/// A builder used when the l-mer buckets are not all singletons.
pub trait FullBuilder {
    fn build(&self, t: &Text) -> Result<(SuffixArray, Option<ConstructionStats>)>;
}

impl FullBuilder for RadixSaConfig {
    fn build(&self, t: &Text) -> Result<(SuffixArray, Option<ConstructionStats>)> {
        let out = radixsa(t, self)?;
        Ok((out.sa, Some(out.stats)))
    }
}

impl<F> FullBuilder for F
where
    F: Fn(&Text) -> Result<SuffixArray>,
{
    fn build(&self, t: &Text) -> Result<(SuffixArray, Option<ConstructionStats>)> {
        Ok((self(t)?, None))
    }
}

/// Bucket counts after the l-mer sort.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LmerBucketStats {
    pub buckets: usize,
    pub nonsingleton_buckets: usize,
    pub max_bucket_size: usize,
}

/// Radix sorts all positions by their packed l-mers.
pub fn sort_lmers(t: &Text, cfg: &LmerConfig) -> (BucketState, LmerBucketStats) {
    let (keys, width) = fingerprints(t, cfg.ell);
    let mut sorter = RadixSorter::default();
    let state = lsd_sort_fingerprints(
        &mut sorter,
        &keys,
        width,
        (0..t.len() as u32).collect(),
        cfg.ell.min(u32::MAX as usize) as u32,
        false,
    );
    let mut stats = LmerBucketStats::default();
    let mut at = 0usize;
    while at < state.len() {
        let b = state.bucket_of(state.order()[at] as usize);
        stats.buckets += 1;
        if !b.is_singleton() {
            stats.nonsingleton_buckets += 1;
        }
        stats.max_bucket_size = stats.max_bucket_size.max(b.len as usize);
        at += b.len as usize;
    }
    (state, stats)
}

#[derive(Clone, Debug)]
pub struct Sa1Outcome {
    pub sa: SuffixArray,
    pub buckets: LmerBucketStats,
}

pub fn sa1(t: &Text, cfg: &LmerConfig) -> SuffixArray {
    sa1_with_stats(t, cfg).sa
}

/// Non-singleton buckets are finished with a plain comparison sort, which
/// is quadratic in the worst case for highly repetitive buckets.
pub fn sa1_with_stats(t: &Text, cfg: &LmerConfig) -> Sa1Outcome {
    let (state, stats) = sort_lmers(t, cfg);
    let spans: Vec<(usize, usize)> = if stats.nonsingleton_buckets == 0 {
        Vec::new()
    } else {
        let mut v = Vec::with_capacity(stats.nonsingleton_buckets);
        let mut at = 0usize;
        while at < state.len() {
            let b = state.bucket_of(state.order()[at] as usize);
            if !b.is_singleton() {
                v.push((at, b.len as usize));
            }
            at += b.len as usize;
        }
        v
    };
    let mut order = state.into_order();
    for (start, len) in spans {
        order[start..start + len].sort_by(|&a, &b| suffix_compare(t, a as usize, b as usize));
    }
    Sa1Outcome {
        sa: SuffixArray::from_vec(order),
        buckets: stats,
    }
}

#[derive(Clone, Debug)]
pub struct Sa2Outcome {
    pub sa: SuffixArray,
    pub fell_back: bool,
    pub nonsingleton_buckets: usize,
    pub max_bucket_size: usize,
    /// Statistics of the fallback run, when it reports any.
    pub fallback_stats: Option<ConstructionStats>,
}

pub fn sa2<B: FullBuilder + ?Sized>(t: &Text, cfg: &LmerConfig, fallback: &B) -> Result<Sa2Outcome> {
    let (state, stats) = sort_lmers(t, cfg);
    if stats.nonsingleton_buckets == 0 {
        return Ok(Sa2Outcome {
            sa: SuffixArray::from_vec(state.into_order()),
            fell_back: false,
            nonsingleton_buckets: 0,
            max_bucket_size: stats.max_bucket_size,
            fallback_stats: None,
        });
    }
    drop(state);
    let (sa, fallback_stats) = fallback.build(t)?;
    Ok(Sa2Outcome {
        sa,
        fell_back: true,
        nonsingleton_buckets: stats.nonsingleton_buckets,
        max_bucket_size: stats.max_bucket_size,
        fallback_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: &Text, ell: Option<usize>) -> LmerConfig {
        LmerConfig::for_text(t, 1.0, ell).unwrap()
    }

    fn naive(t: &Text) -> Vec<u32> {
        let mut v: Vec<u32> = (0..t.len() as u32).collect();
        v.sort_by(|&a, &b| t.codes()[a as usize..].cmp(&t.codes()[b as usize..]));
        v
    }

    #[test]
    fn sa1_table_example() {
        let t = Text::ingest(b"cdaxcdayca").unwrap();
        let out = sa1_with_stats(&t, &cfg(&t, Some(3)));
        assert_eq!(out.sa.as_slice(), &[9, 2, 6, 8, 0, 4, 1, 5, 3, 7]);
        assert_eq!(out.buckets.nonsingleton_buckets, 1);
        assert_eq!(out.buckets.max_bucket_size, 2);
    }

    #[test]
    fn sa1_single() {
        let t = Text::ingest(b"a").unwrap();
        let out = sa1_with_stats(&t, &cfg(&t, None));
        assert_eq!(out.sa.as_slice(), &[0]);
        assert_eq!(out.buckets.nonsingleton_buckets, 0);
    }

    #[test]
    fn sa2_falls_back_on_repeat() {
        let t = Text::ingest(b"cdaxcdayca").unwrap();
        let out = sa2(&t, &cfg(&t, Some(3)), &RadixSaConfig::default()).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.nonsingleton_buckets, 1);
        assert!(out.fallback_stats.is_some());
        assert_eq!(out.sa.as_slice(), &[9, 2, 6, 8, 0, 4, 1, 5, 3, 7]);
    }

    #[test]
    fn sa2_distinct_symbols_no_fallback() {
        let t = Text::ingest(b"qwertyuiop").unwrap();
        let out = sa2(&t, &cfg(&t, Some(1)), &|_: &Text| -> Result<SuffixArray> {
            panic!("fallback must not run")
        })
        .unwrap();
        assert!(!out.fell_back);
        assert_eq!(out.sa.as_slice(), &naive(&t)[..]);
    }

    #[test]
    fn closure_fallback() {
        let t = Text::ingest(b"aaaa").unwrap();
        let out = sa2(&t, &cfg(&t, Some(1)), &|t: &Text| Ok(SuffixArray::from_vec(naive(t)))).unwrap();
        assert!(out.fell_back);
        assert!(out.fallback_stats.is_none());
        assert_eq!(out.sa.as_slice(), &[3, 2, 1, 0]);
    }
}
