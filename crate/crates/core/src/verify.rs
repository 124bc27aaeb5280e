//! Independent correctness tools: a comparison-sort oracle, a linear-time
//! suffix array checker, and exact and sampled checks of l-mer collision
//! probabilities.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::datagen::SymbolSampler;
use crate::error::{Error, Result};
use crate::lmer::collision_probability;
use crate::text::{suffix_compare, ProbabilityModel, SuffixArray, Text};

pub const DEFAULT_ORACLE_LIMIT: usize = 1_000_000;

pub fn oracle_sa(t: &Text) -> Result<SuffixArray> {
    oracle_sa_with_limit(t, DEFAULT_ORACLE_LIMIT)
}

pub fn oracle_sa_with_limit(t: &Text, limit: usize) -> Result<SuffixArray> {
    if t.len() > limit {
        return Err(Error::OracleLimit { n: t.len(), limit });
    }
    let mut v: Vec<u32> = (0..t.len() as u32).collect();
    v.sort_by(|&a, &b| suffix_compare(t, a as usize, b as usize));
    Ok(SuffixArray::from_vec(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `sa.len() != n`.
    Length,
    /// An entry is not a text position.
    OutOfRange,
    /// A position occurs twice.
    Duplicate,
    /// First symbols decrease.
    FirstSymbol,
    /// Equal first symbols but the successors are out of order.
    Successor,
}

/// The earliest offending index of the suffix array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Length => "length differs from the text",
            ViolationKind::OutOfRange => "entry is not a text position",
            ViolationKind::Duplicate => "position occurs twice",
            ViolationKind::FirstSymbol => "first symbol smaller than the previous entry's",
            ViolationKind::Successor => "suffix not greater than the previous entry",
        };
        write!(f, "{what} at index {}", self.index)
    }
}

/// Checks `sa` in O(n): it must be a permutation, first symbols must not
/// decrease, and two neighbours with the same first symbol must have their
/// successors ranked in the same order. A suffix of length one has no
/// successor and orders before any longer suffix with its first symbol.
pub fn check_sa(t: &Text, sa: &SuffixArray) -> std::result::Result<(), Violation> {
    let n = t.len();
    let sa = sa.as_slice();
    if sa.len() != n {
        return Err(Violation {
            kind: ViolationKind::Length,
            index: sa.len().min(n),
        });
    }
    let mut rank = vec![u32::MAX; n];
    for (k, &p) in sa.iter().enumerate() {
        let p = p as usize;
        if p >= n {
            return Err(Violation { kind: ViolationKind::OutOfRange, index: k });
        }
        if rank[p] != u32::MAX {
            return Err(Violation { kind: ViolationKind::Duplicate, index: k });
        }
        rank[p] = k as u32;
    }
    let codes = t.codes();
    for k in 1..n {
        let (i, j) = (sa[k - 1] as usize, sa[k] as usize);
        match codes[i].cmp(&codes[j]) {
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Greater => {
                return Err(Violation { kind: ViolationKind::FirstSymbol, index: k });
            }
            std::cmp::Ordering::Equal => {
                let ok = if i + 1 == n {
                    true
                } else if j + 1 == n {
                    false
                } else {
                    rank[i + 1] < rank[j + 1]
                };
                if !ok {
                    return Err(Violation { kind: ViolationKind::Successor, index: k });
                }
            }
        }
    }
    Ok(())
}

/// [`check_sa`] as a crate error.
pub fn ensure_valid(t: &Text, sa: &SuffixArray) -> Result<()> {
    check_sa(t, sa).map_err(Error::Verification)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaMode {
    Exact,
    MonteCarlo,
}

/// Collision frequency of `P_i` and `P_{i+offset}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEstimate {
    pub offset: usize,
    /// Exact probability (exact mode), identical for every start `i`.
    pub exact: Option<BigRational>,
    pub estimate: f64,
    /// Half width of the 99% interval; 0 in exact mode.
    pub radius: f64,
    /// Exact collision probability of the two windows under the sampled
    /// model. Equals the theoretical value for uniform models and for
    /// non-overlapping windows, but not for overlapping windows under a
    /// skewed model.
    pub model_exact: Option<BigRational>,
    /// The theoretical value lies in the interval (exact: equals it).
    pub ok: bool,
}

/// Probability that `P_0 = P_2 = P_3`, next to the value independence
/// of the two equalities would give.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleReport {
    pub positions: [usize; 3],
    pub probability: BigRational,
    pub independent: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub mode: LemmaMode,
    pub sigma: usize,
    pub n: usize,
    pub ell: usize,
    pub theoretical: BigRational,
    pub pairs: Vec<PairEstimate>,
    pub triple: Option<TripleReport>,
    pub trials: u64,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.pairs.iter().all(|p| p.ok)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode", "test", "offset", "estimate", "radius", "theory", "exact", "model", "ok"])?;
        let mode = match self.mode {
            LemmaMode::Exact => "exact",
            LemmaMode::MonteCarlo => "montecarlo",
        };
        let theory = self.theoretical.to_f64().unwrap_or(f64::NAN);
        for p in &self.pairs {
            out.write_record([
                mode.to_string(),
                "pair".into(),
                p.offset.to_string(),
                p.estimate.to_string(),
                p.radius.to_string(),
                theory.to_string(),
                p.exact.as_ref().map(|r| r.to_string()).unwrap_or_default(),
                p.model_exact.as_ref().map(|r| r.to_string()).unwrap_or_default(),
                p.ok.to_string(),
            ])?;
        }
        if let Some(t) = &self.triple {
            out.write_record([
                mode.to_string(),
                "triple".into(),
                format!("{}/{}/{}", t.positions[0], t.positions[1], t.positions[2]),
                t.probability.to_f64().unwrap_or(f64::NAN).to_string(),
                "0".into(),
                t.independent.to_f64().unwrap_or(f64::NAN).to_string(),
                t.probability.to_string(),
                t.probability.to_string(),
                (t.probability != t.independent).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:?} sigma={} n={} ell={} theory={} trials={}",
            self.mode, self.sigma, self.n, self.ell, self.theoretical, self.trials
        )?;
        for p in &self.pairs {
            match (&p.exact, &p.model_exact) {
                (Some(r), _) => writeln!(f, "  k={:<3} exact={} {}", p.offset, r, verdict(p.ok))?,
                (None, m) => writeln!(
                    f,
                    "  k={:<3} estimate={:.6} +/- {:.6} {} (window model value {:.6})",
                    p.offset,
                    p.estimate,
                    p.radius,
                    verdict(p.ok),
                    m.as_ref().and_then(|m| m.to_f64()).unwrap_or(f64::NAN)
                )?,
            }
        }
        if let Some(t) = &self.triple {
            writeln!(
                f,
                "  triple {:?}: {} (independent would give {})",
                t.positions, t.probability, t.independent
            )?;
        }
        Ok(())
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

pub const ENUMERATION_LIMIT: u64 = 1 << 24;
pub const TRIPLE_POSITIONS: [usize; 3] = [0, 2, 3];

/// Enumerates all `sigma^n` strings and computes `Prob[P_i = P_{i+k}]`
/// exactly for each offset, checking it against `sigma^-ell` at every start
/// `i` where both windows fit. Also reports the triple at positions 0, 2, 3.
pub fn lemma_exact(sigma: usize, n: usize, ell: usize, offsets: &[usize]) -> Result<LemmaReport> {
    if sigma == 0 || ell == 0 {
        return Err(Error::Config("sigma and ell must be >= 1".into()));
    }
    let total = (sigma as u64).checked_pow(n as u32).filter(|&t| t <= ENUMERATION_LIMIT);
    let Some(total) = total else {
        return Err(Error::EnumerationTooLarge { sigma, n });
    };
    for &k in offsets {
        if k == 0 || k + ell > n {
            return Err(Error::Config(format!("offset {k} with ell {ell} does not fit n = {n}")));
        }
    }
    let triple_fits = TRIPLE_POSITIONS[2] + ell <= n;

    // counts[o][i]: strings with P_i = P_{i + offsets[o]}
    let mut counts: Vec<Vec<u64>> = offsets.iter().map(|&k| vec![0; n - k - ell + 1]).collect();
    let mut triple = 0u64;
    let mut s = vec![0usize; n];
    for _ in 0..total {
        for (o, &k) in offsets.iter().enumerate() {
            for (i, c) in counts[o].iter_mut().enumerate() {
                if s[i..i + ell] == s[i + k..i + k + ell] {
                    *c += 1;
                }
            }
        }
        if triple_fits {
            let [a, b, c] = TRIPLE_POSITIONS;
            if s[a..a + ell] == s[b..b + ell] && s[b..b + ell] == s[c..c + ell] {
                triple += 1;
            }
        }
        // next string in odometer order
        for d in s.iter_mut() {
            *d += 1;
            if *d < sigma {
                break;
            }
            *d = 0;
        }
    }

    let model = ProbabilityModel::uniform(sigma)?;
    let theoretical = collision_probability(&model, ell)?;
    let denom = BigInt::from(total);
    let pairs = offsets
        .iter()
        .zip(&counts)
        .map(|(&k, per_start)| {
            let probs: Vec<BigRational> = per_start
                .iter()
                .map(|&c| BigRational::new(BigInt::from(c), denom.clone()))
                .collect();
            let ok = probs.iter().all(|p| *p == theoretical);
            let first = probs[0].clone();
            PairEstimate {
                offset: k,
                estimate: first.to_f64().unwrap_or(f64::NAN),
                model_exact: Some(first.clone()),
                exact: Some(first),
                radius: 0.0,
                ok,
            }
        })
        .collect();
    let triple = triple_fits.then(|| TripleReport {
        positions: TRIPLE_POSITIONS,
        probability: BigRational::new(BigInt::from(triple), denom.clone()),
        independent: &theoretical * &theoretical,
    });
    Ok(LemmaReport {
        mode: LemmaMode::Exact,
        sigma,
        n,
        ell,
        theoretical,
        pairs,
        triple,
        trials: total,
    })
}

pub const MIN_TRIALS: u64 = 10_000;
/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Samples `trials` independent strings from `model` and estimates
/// `Prob[P_0 = P_k]` for each offset, with 99% Wilson score intervals.
/// Only the `max(offsets) + ell` symbols the comparisons read are drawn.
pub fn lemma_montecarlo(
    model: &ProbabilityModel,
    n: usize,
    ell: usize,
    trials: u64,
    offsets: &[usize],
    seed: u64,
) -> Result<LemmaReport> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { got: trials, min: MIN_TRIALS });
    }
    if ell == 0 || offsets.is_empty() {
        return Err(Error::Config("need ell >= 1 and at least one offset".into()));
    }
    let window = offsets.iter().max().unwrap() + ell;
    if offsets.contains(&0) || window > n {
        return Err(Error::Config(format!("offsets with ell {ell} must be >= 1 and fit n = {n}")));
    }
    let mut sampler = SymbolSampler::weighted(&model.weights_f64(), seed);
    let mut hits = vec![0u64; offsets.len()];
    let mut s = vec![0usize; window];
    for _ in 0..trials {
        for x in s.iter_mut() {
            *x = sampler.next_symbol();
        }
        for (h, &k) in hits.iter_mut().zip(offsets) {
            if s[..ell] == s[k..k + ell] {
                *h += 1;
            }
        }
    }
    let theoretical = collision_probability(model, ell)?;
    let theory = theoretical.to_f64().unwrap_or(f64::NAN);
    let pairs = offsets
        .iter()
        .zip(&hits)
        .map(|(&k, &h)| {
            let (centre, radius) = wilson(h, trials, Z99);
            PairEstimate {
                offset: k,
                exact: None,
                estimate: h as f64 / trials as f64,
                radius,
                model_exact: Some(window_collision(model, k, ell)),
                ok: (theory - centre).abs() <= radius,
            }
        })
        .collect();
    Ok(LemmaReport {
        mode: LemmaMode::MonteCarlo,
        sigma: model.sigma(),
        n,
        ell,
        theoretical,
        pairs,
        triple: None,
        trials,
    })
}

/// `Prob[P_0 = P_k]` for i.i.d. symbols: the equalities tie positions with
/// the same residue mod `k` inside `0..k + ell`, and a class of `m` tied
/// positions matches with probability `sum_j p_j^m`.
pub fn window_collision(model: &ProbabilityModel, k: usize, ell: usize) -> BigRational {
    let span = k + ell;
    let mut prob = BigRational::one();
    for r in 0..k.min(span) {
        let m = (span - r).div_ceil(k);
        let class: BigRational = model.weights().iter().map(|p| num_traits::pow(p.clone(), m)).sum();
        prob *= class;
    }
    prob
}

/// Centre and half width of the Wilson score interval.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let nt = trials as f64;
    let p = successes as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let centre = (p + z2 / (2.0 * nt)) / denom;
    let radius = z * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    (centre, radius)
}

/// `true` iff `r` equals `1 / 2^k`.
pub fn is_inverse_power_of_two(r: &BigRational, k: u32) -> bool {
    *r.numer() == BigInt::one() && *r.denom() == (BigInt::one() << k) && !r.is_zero()
}
