//! Input text, alphabet remapping and the suffix array output type.
//!
//! Every builder works on a [`Text`] whose symbols have been recoded to a dense
//! alphabet `1..=sigma`. Code `0` never occurs in the text; it is the virtual
//! pad that fingerprints use past the end of the string, so a suffix that runs
//! out compares smaller than any extension of it.

use std::cmp::Ordering;
use std::io::{self, BufRead, Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest text length the builders accept. Positions are stored in 32-bit words.
pub const MAX_LEN: usize = u32::MAX as usize;

/// A recoded input string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Text {
    data: Vec<u16>,
    sigma: usize,
    code_map: Vec<u16>,
    bits_per_symbol: u32,
}

impl Text {
    /// Recodes raw bytes to dense, order-preserving codes starting at 1.
    pub fn ingest(raw: &[u8]) -> Result<Text> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        if raw.len() > MAX_LEN {
            return Err(Error::TooLong(raw.len()));
        }
        let mut used = [false; 256];
        for &b in raw {
            used[b as usize] = true;
        }
        let mut code_map = vec![0u16; 256];
        let mut sigma = 0usize;
        for (byte, &u) in used.iter().enumerate() {
            if u {
                sigma += 1;
                code_map[byte] = sigma as u16;
            }
        }
        let data = raw.iter().map(|&b| code_map[b as usize]).collect();
        Ok(Text {
            data,
            sigma,
            code_map,
            bits_per_symbol: bits_for(sigma),
        })
    }

    /// Builds a text from arbitrary integer symbols, remapping them densely.
    /// `code_map` is left empty because there is no byte alphabet to report.
    pub fn from_symbols(symbols: &[u32]) -> Result<Text> {
        if symbols.is_empty() {
            return Err(Error::EmptyInput);
        }
        if symbols.len() > MAX_LEN {
            return Err(Error::TooLong(symbols.len()));
        }
        let mut distinct: Vec<u32> = symbols.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() > u16::MAX as usize {
            return Err(Error::AlphabetTooLarge(distinct.len()));
        }
        let data = symbols
            .iter()
            .map(|s| (distinct.binary_search(s).unwrap() + 1) as u16)
            .collect();
        Ok(Text {
            data,
            sigma: distinct.len(),
            code_map: Vec::new(),
            bits_per_symbol: bits_for(distinct.len()),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn codes(&self) -> &[u16] {
        &self.data
    }

    /// Code at `i`, or the pad code 0 past the end.
    #[inline]
    pub fn code_or_pad(&self, i: usize) -> u16 {
        self.data.get(i).copied().unwrap_or(0)
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// `ceil(log2(sigma + 1))`: enough bits for every code plus the pad.
    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    /// Dense code of an original byte, if that byte occurs in the text.
    pub fn code_of(&self, byte: u8) -> Option<u16> {
        match self.code_map.get(byte as usize) {
            Some(&c) if c != 0 => Some(c),
            _ => None,
        }
    }
}

fn bits_for(sigma: usize) -> u32 {
    usize::BITS - sigma.leading_zeros()
}

/// Lexicographic order of suffixes `i` and `j`; a proper prefix is smaller.
pub fn suffix_compare(t: &Text, i: usize, j: usize) -> Ordering {
    if i == j {
        return Ordering::Equal;
    }
    t.data[i..].cmp(&t.data[j..])
}

/// Sorted suffix start positions, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixArray {
    order: Vec<u32>,
}

const MAGIC: &[u8; 4] = b"SUFA";

impl SuffixArray {
    pub fn from_vec(order: Vec<u32>) -> SuffixArray {
        SuffixArray { order }
    }

    pub fn from_positions(order: &[usize]) -> SuffixArray {
        SuffixArray {
            order: order.iter().map(|&p| p as u32).collect(),
        }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.order
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn to_positions(&self) -> Vec<usize> {
        self.order.iter().map(|&p| p as usize).collect()
    }

    /// Binary form: `SUFA`, entry width in bytes as u32 LE (4 or 8), then
    /// entries little-endian. Width is 8 once n reaches 2^31.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let width: u32 = if self.order.len() >= 1 << 31 { 8 } else { 4 };
        w.write_all(MAGIC)?;
        w.write_all(&width.to_le_bytes())?;
        let mut buf = Vec::with_capacity(64 * 1024);
        for &p in &self.order {
            if width == 8 {
                buf.extend_from_slice(&(p as u64).to_le_bytes());
            } else {
                buf.extend_from_slice(&p.to_le_bytes());
            }
            if buf.len() >= 60 * 1024 {
                w.write_all(&buf)?;
                buf.clear();
            }
        }
        w.write_all(&buf)?;
        w.flush()
    }

    /// One decimal position per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        for &p in &self.order {
            writeln!(w, "{p}")?;
        }
        w.flush()
    }

    /// Reads either form, choosing by the magic header.
    pub fn read<R: Read>(mut r: R) -> Result<SuffixArray> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.starts_with(MAGIC) {
            Self::parse_binary(&bytes)
        } else {
            Self::parse_text(&bytes)
        }
    }

    fn parse_binary(bytes: &[u8]) -> Result<SuffixArray> {
        if bytes.len() < 8 {
            return Err(Error::Format("truncated header".into()));
        }
        let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        if width != 4 && width != 8 {
            return Err(Error::Format(format!("unsupported entry width {width}")));
        }
        let body = &bytes[8..];
        if !body.len().is_multiple_of(width) {
            return Err(Error::Format("body is not a whole number of entries".into()));
        }
        let mut order = Vec::with_capacity(body.len() / width);
        for chunk in body.chunks_exact(width) {
            let v = if width == 8 {
                u64::from_le_bytes(chunk.try_into().unwrap())
            } else {
                u32::from_le_bytes(chunk.try_into().unwrap()) as u64
            };
            let v = u32::try_from(v)
                .map_err(|_| Error::Format(format!("position {v} out of range")))?;
            order.push(v);
        }
        Ok(SuffixArray { order })
    }

    fn parse_text(bytes: &[u8]) -> Result<SuffixArray> {
        let mut order = Vec::new();
        for (lineno, line) in bytes.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: u32 = line
                .parse()
                .map_err(|_| Error::Format(format!("line {}: not a position", lineno + 1)))?;
            order.push(v);
        }
        Ok(SuffixArray { order })
    }
}

/// How symbols of a random text are assumed to be drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Uniform,
    Explicit,
}

/// Symbol probabilities `p_1..p_sigma` and the collision base `P = sum p_j^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityModel {
    kind: ModelKind,
    weights: Vec<BigRational>,
    collision_base: BigRational,
}

impl ProbabilityModel {
    pub fn uniform(sigma: usize) -> Result<ProbabilityModel> {
        if sigma == 0 {
            return Err(Error::Config("uniform model needs sigma >= 1".into()));
        }
        let p = BigRational::new(BigInt::one(), BigInt::from(sigma));
        Ok(ProbabilityModel {
            kind: ModelKind::Uniform,
            weights: vec![p.clone(); sigma],
            collision_base: p,
        })
    }

    /// Weights must be positive and sum to exactly 1.
    pub fn explicit(weights: Vec<BigRational>) -> Result<ProbabilityModel> {
        if weights.is_empty() {
            return Err(Error::Config("model needs at least one weight".into()));
        }
        if weights.iter().any(|w| *w <= BigRational::zero()) {
            return Err(Error::Config("weights must be positive".into()));
        }
        let total: BigRational = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Config(format!("weights sum to {total}, not 1")));
        }
        let collision_base = weights.iter().map(|w| w * w).sum();
        Ok(ProbabilityModel {
            kind: ModelKind::Explicit,
            weights,
            collision_base,
        })
    }

    /// Parses a comma separated list of decimals (`0.7,0.3`) or fractions (`1/2,1/4,1/4`).
    pub fn parse_weights(s: &str) -> Result<ProbabilityModel> {
        let weights = s
            .split(',')
            .map(|w| parse_rational(w.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(weights)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn sigma(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.to_f64().unwrap_or(0.0))
            .collect()
    }

    pub fn collision_base(&self) -> &BigRational {
        &self.collision_base
    }
}

/// Exact rational from `a/b` or a plain decimal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("cannot parse `{s}` as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ingest_table_example() {
        let t = Text::ingest(b"cdaxcdayca").unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(t.sigma(), 5);
        for (b, c) in [(b'a', 1), (b'c', 2), (b'd', 3), (b'x', 4), (b'y', 5)] {
            assert_eq!(t.code_of(b), Some(c));
        }
        assert_eq!(t.code_of(b'b'), None);
        assert_eq!(t.bits_per_symbol(), 3);
    }

    #[test]
    fn ingest_single_and_order() {
        let t = Text::ingest(b"a").unwrap();
        assert_eq!((t.len(), t.sigma(), t.codes()), (1, 1, &[1u16][..]));
        let t = Text::ingest(b"zzyy").unwrap();
        assert_eq!(t.codes(), &[2, 2, 1, 1]);
        assert!(matches!(Text::ingest(b""), Err(Error::EmptyInput)));
    }

    #[test]
    fn full_byte_alphabet() {
        let raw: Vec<u8> = (0..=255u8).rev().collect();
        let t = Text::ingest(&raw).unwrap();
        assert_eq!(t.sigma(), 256);
        assert_eq!(t.bits_per_symbol(), 9);
        assert_eq!(t.codes()[0], 256);
    }

    #[test]
    fn compare_examples() {
        let t = Text::ingest(b"cdaxcdayca").unwrap();
        assert_eq!(suffix_compare(&t, 0, 4), Ordering::Less);
        assert_eq!(suffix_compare(&t, 3, 3), Ordering::Equal);
        let t = Text::ingest(b"aaa").unwrap();
        assert_eq!(suffix_compare(&t, 2, 0), Ordering::Less);
    }

    #[test]
    fn binary_and_text_forms_read_back() {
        let sa = SuffixArray::from_vec(vec![9, 2, 6, 8, 0, 4, 1, 5, 3, 7]);
        let mut bin = Vec::new();
        sa.write_binary(&mut bin).unwrap();
        assert_eq!(&bin[..8], b"SUFA\x04\x00\x00\x00");
        assert_eq!(bin.len(), 8 + 40);
        assert_eq!(SuffixArray::read(&bin[..]).unwrap(), sa);
        let mut txt = Vec::new();
        sa.write_text(&mut txt).unwrap();
        assert!(txt.starts_with(b"9\n2\n6\n"));
        assert_eq!(SuffixArray::read(&txt[..]).unwrap(), sa);
        assert!(SuffixArray::read(&b"SUFA\x03\x00\x00\x00"[..]).is_err());
    }

    #[test]
    fn models() {
        let m = ProbabilityModel::parse_weights("1/2,1/4,1/4").unwrap();
        assert_eq!(m.collision_base(), &BigRational::new(3.into(), 8.into()));
        let m = ProbabilityModel::parse_weights("0.7,0.3").unwrap();
        assert_eq!(m.collision_base(), &BigRational::new(58.into(), 100.into()));
        assert!(ProbabilityModel::parse_weights("0.5,0.4").is_err());
        assert!(ProbabilityModel::parse_weights("1,0").is_err());
        let u = ProbabilityModel::uniform(4).unwrap();
        assert_eq!(u.collision_base(), &BigRational::new(1.into(), 4.into()));
    }

    proptest! {
        #[test]
        fn recoding_preserves_suffix_order(raw in proptest::collection::vec(0u8..6, 1..40)) {
            let t = Text::ingest(&raw).unwrap();
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    prop_assert_eq!(suffix_compare(&t, i, j), raw[i..].cmp(&raw[j..]));
                }
            }
        }

        #[test]
        fn compare_is_strict_total_order(raw in proptest::collection::vec(0u8..3, 1..25)) {
            let t = Text::ingest(&raw).unwrap();
            let n = raw.len();
            for i in 0..n {
                for j in 0..n {
                    let ij = suffix_compare(&t, i, j);
                    prop_assert_eq!(ij, suffix_compare(&t, j, i).reverse());
                    prop_assert_eq!(ij == Ordering::Equal, i == j);
                    for k in 0..n {
                        if ij == Ordering::Less && suffix_compare(&t, j, k) == Ordering::Less {
                            prop_assert_eq!(suffix_compare(&t, i, k), Ordering::Less);
                        }
                    }
                }
            }
        }
    }
}
