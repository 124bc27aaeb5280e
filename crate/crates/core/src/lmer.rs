//! Prefix length selection and exact packed l-mer fingerprints.
//!
//! A fingerprint of position `i` is the l-mer `s[i..i+ell]` with codes packed
//! MSB-first into `ceil(ell * bits_per_symbol / 64)` words. Positions past the
//! end contribute the pad code 0. Comparing fingerprints word by word is the
//! same as comparing the padded l-mers symbol by symbol; nothing is hashed.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::text::{ModelKind, ProbabilityModel, Text};

pub const WORD_BITS: u32 = 64;

/// Result of [`choose_ell`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllChoice {
    pub ell: usize,
    /// The collision base is 1 (single-symbol alphabet), so no finite
    /// prefix separates suffixes; `ell` was set to `n`.
    pub degenerate: bool,
}

/// `ceil((alpha + 2) * log_base(n))`, clamped to `n`, where base is `sigma`
/// for the uniform model and `1/P` otherwise.
pub fn choose_ell(n: usize, model: &ProbabilityModel, alpha: f64) -> Result<EllChoice> {
    if alpha.is_nan() || alpha < 1.0 || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be >= 1, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let base = match model.kind() {
        ModelKind::Uniform => model.sigma() as f64,
        ModelKind::Explicit => 1.0 / model.collision_base().to_f64().unwrap_or(1.0),
    };
    if base <= 1.0 + 1e-12 {
        return Ok(EllChoice { ell: n, degenerate: true });
    }
    if n == 1 {
        return Ok(EllChoice { ell: 1, degenerate: false });
    }
    let exact = (alpha + 2.0) * (n as f64).ln() / base.ln();
    // absorb rounding noise so that e.g. 3 * log4(65536) stays 24
    let ell = (exact - 1e-9).ceil().max(1.0) as usize;
    Ok(EllChoice { ell: ell.min(n), degenerate: false })
}

/// `P^ell` exactly.
pub fn collision_probability(model: &ProbabilityModel, ell: usize) -> Result<BigRational> {
    if ell == 0 {
        return Err(Error::Config("ell must be >= 1".into()));
    }
    Ok(num_traits::pow(model.collision_base().clone(), ell))
}

/// Prefix length and the derived fingerprint width.
#[derive(Clone, Debug, PartialEq)]
pub struct LmerConfig {
    pub ell: usize,
    pub alpha: f64,
    pub model: ProbabilityModel,
    pub bits_per_symbol: u32,
    pub words_per_fingerprint: usize,
    pub degenerate: bool,
}

impl LmerConfig {
    /// Uniform model over the text's alphabet, `ell` from [`choose_ell`]
    /// unless `ell_override` is given.
    pub fn for_text(t: &Text, alpha: f64, ell_override: Option<usize>) -> Result<LmerConfig> {
        let model = ProbabilityModel::uniform(t.sigma())?;
        Self::with_model(t, model, alpha, ell_override)
    }

    pub fn with_model(
        t: &Text,
        model: ProbabilityModel,
        alpha: f64,
        ell_override: Option<usize>,
    ) -> Result<LmerConfig> {
        let choice = choose_ell(t.len(), &model, alpha)?;
        let (ell, degenerate) = match ell_override {
            Some(0) => return Err(Error::Config("ell must be >= 1".into())),
            Some(ell) => (ell, choice.degenerate),
            None => (choice.ell, choice.degenerate),
        };
        let bits_per_symbol = t.bits_per_symbol();
        Ok(LmerConfig {
            ell,
            alpha,
            model,
            bits_per_symbol,
            words_per_fingerprint: words_for(ell, bits_per_symbol),
            degenerate,
        })
    }
}

pub fn words_for(ell: usize, bits_per_symbol: u32) -> usize {
    (ell * bits_per_symbol as usize).div_ceil(WORD_BITS as usize)
}

/// Packed l-mer; big-integer order of `words` is lexicographic l-mer order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint {
    pub words: Vec<u64>,
}

pub fn fingerprint(t: &Text, i: usize, ell: usize) -> Fingerprint {
    let bps = t.bits_per_symbol();
    let mut words = vec![0u64; words_for(ell, bps)];
    pack_into(t, i, ell, bps, &mut words);
    Fingerprint { words }
}

/// Fingerprints of every position, flattened: position `i` owns
/// `words[i * w .. (i + 1) * w]` with `w = words_for(ell, bps)`.
pub fn fingerprints(t: &Text, ell: usize) -> (Vec<u64>, usize) {
    let bps = t.bits_per_symbol();
    let w = words_for(ell, bps);
    let mut words = vec![0u64; t.len() * w];
    for (i, slot) in words.chunks_exact_mut(w.max(1)).enumerate().take(t.len()) {
        pack_into(t, i, ell, bps, slot);
    }
    (words, w)
}

fn pack_into(t: &Text, i: usize, ell: usize, bps: u32, out: &mut [u64]) {
    let codes = t.codes();
    let mut bit = 0usize;
    for k in 0..ell {
        let Some(&code) = codes.get(i + k) else {
            // the rest is pad, already zero
            break;
        };
        let code = code as u64;
        let word = bit / 64;
        let off = (bit % 64) as u32;
        let room = 64 - off;
        if room >= bps {
            out[word] |= code << (room - bps);
        } else {
            let spill = bps - room;
            out[word] |= code >> spill;
            out[word + 1] |= code << (64 - spill);
        }
        bit += bps as usize;
    }
}

/// Compares two padded l-mers symbol by symbol. Reference for the packing.
pub fn compare_padded(t: &Text, i: usize, j: usize, ell: usize) -> Ordering {
    (0..ell)
        .map(|k| t.code_or_pad(i + k).cmp(&t.code_or_pad(j + k)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// `1 / sigma^ell` as an exact rational.
pub fn uniform_collision(sigma: usize, ell: usize) -> BigRational {
    BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(sigma), ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ell_examples() {
        let u4 = ProbabilityModel::uniform(4).unwrap();
        assert_eq!(choose_ell(65536, &u4, 1.0).unwrap().ell, 24);
        let half = ProbabilityModel::parse_weights("1/2,1/2").unwrap();
        assert_eq!(choose_ell(65536, &half, 1.0).unwrap().ell, 48);
        let u2 = ProbabilityModel::uniform(2).unwrap();
        assert_eq!(choose_ell(2, &u2, 1.0).unwrap().ell, 2);
        let u1 = ProbabilityModel::uniform(1).unwrap();
        assert_eq!(
            choose_ell(100, &u1, 1.0).unwrap(),
            EllChoice { ell: 100, degenerate: true }
        );
        assert!(choose_ell(100, &u4, 0.5).is_err());
    }

    #[test]
    fn ell_monotone() {
        let mut prev = 0;
        for n in (2..5000).step_by(37) {
            let e = choose_ell(n, &ProbabilityModel::uniform(4).unwrap(), 1.0).unwrap().ell;
            assert!(e >= prev);
            prev = e;
        }
        for sigma in 2..40 {
            let a = choose_ell(1 << 20, &ProbabilityModel::uniform(sigma).unwrap(), 1.0).unwrap().ell;
            let b = choose_ell(1 << 20, &ProbabilityModel::uniform(sigma + 1).unwrap(), 1.0).unwrap().ell;
            assert!(b <= a);
            let c = choose_ell(1 << 20, &ProbabilityModel::uniform(sigma).unwrap(), 2.5).unwrap().ell;
            assert!(c >= a);
        }
    }

    #[test]
    fn collision_examples() {
        let u4 = ProbabilityModel::uniform(4).unwrap();
        assert_eq!(collision_probability(&u4, 3).unwrap(), r(1, 64));
        let m = ProbabilityModel::parse_weights("1/2,1/4,1/4").unwrap();
        assert_eq!(collision_probability(&m, 2).unwrap(), r(9, 64));
        let u2 = ProbabilityModel::uniform(2).unwrap();
        assert!(collision_probability(&u2, 0).is_err());
    }

    #[test]
    fn fingerprint_examples() {
        let t = Text::ingest(b"cdaxcdayca").unwrap();
        assert_eq!(fingerprint(&t, 0, 3), fingerprint(&t, 4, 3));
        let tail = fingerprint(&t, 9, 3);
        // a, pad, pad at 3 bits each, MSB-first
        assert_eq!(tail.words, vec![1u64 << 61]);
        assert!(tail < fingerprint(&t, 2, 3));
    }

    #[test]
    fn nonoverlapping_collision_rate_by_enumeration() {
        // two disjoint windows of length 3 over {a,b}: count equal assignments
        let mut equal = 0;
        for bits in 0u32..64 {
            let raw: Vec<u8> = (0..6).map(|k| if bits >> k & 1 == 1 { b'b' } else { b'a' }).collect();
            // force sigma = 2 so packing is stable across assignments
            let mut with_both = raw.clone();
            with_both.extend_from_slice(b"ab");
            let t = Text::ingest(&with_both).unwrap();
            if fingerprint(&t, 0, 3) == fingerprint(&t, 3, 3) {
                equal += 1;
            }
        }
        assert_eq!(equal, 8); // 2^6 * 2^-3
    }

    proptest! {
        #[test]
        fn order_embedding(raw in proptest::collection::vec(0u8..20, 1..60), ell in 1usize..30) {
            let t = Text::ingest(&raw).unwrap();
            let (flat, w) = fingerprints(&t, ell);
            for i in 0..t.len() {
                let fi = fingerprint(&t, i, ell);
                prop_assert_eq!(&flat[i * w..(i + 1) * w], &fi.words[..]);
                for j in 0..t.len() {
                    let fj = fingerprint(&t, j, ell);
                    prop_assert_eq!(fi.cmp(&fj), compare_padded(&t, i, j, ell));
                }
            }
        }
    }
}
