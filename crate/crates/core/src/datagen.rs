//! Seeded generators for the synthetic input families.
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`seed_from_u64`). A uniform draw is `(next_u64 >> 11) * 2^-53` and picks
//! the first symbol whose cumulative weight exceeds it. Symbol `j` is written
//! as byte `b'a' + j` for alphabets up to 26, `b'!' + j` up to 94, and as
//! byte `j` otherwise.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Periodic,
    Fibonacci,
    Unary,
    Debruijn,
    File,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "random" => Family::Random,
            "periodic" => Family::Periodic,
            "fibonacci" => Family::Fibonacci,
            "unary" => Family::Unary,
            "debruijn" => Family::Debruijn,
            "file" => Family::File,
            other => return Err(Error::Dataset(format!("unknown family {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// Label used in reports; defaults to the family name.
    #[serde(default)]
    pub name: Option<String>,
    pub family: Family,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub sigma: Option<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub period_len: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn new(family: Family, n: usize) -> DatasetSpec {
        DatasetSpec {
            name: None,
            family,
            n,
            sigma: None,
            weights: None,
            period_len: None,
            seed: 0,
            path: None,
        }
    }

    pub fn random(n: usize, sigma: usize, seed: u64) -> DatasetSpec {
        DatasetSpec {
            sigma: Some(sigma),
            seed,
            ..DatasetSpec::new(Family::Random, n)
        }
    }

    pub fn periodic(n: usize, period_len: usize, sigma: usize, seed: u64) -> DatasetSpec {
        DatasetSpec {
            sigma: Some(sigma),
            period_len: Some(period_len),
            seed,
            ..DatasetSpec::new(Family::Periodic, n)
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> DatasetSpec {
        DatasetSpec {
            path: Some(path.into()),
            ..DatasetSpec::new(Family::File, 0)
        }
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.family {
            Family::Random => format!("random_s{}_n{}", self.sigma.unwrap_or(0), self.n),
            Family::Periodic => format!("period_{}_n{}", self.period_len.unwrap_or(0), self.n),
            Family::File => self
                .path
                .as_deref()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
            f => format!("{}_n{}", format!("{f:?}").to_ascii_lowercase(), self.n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Dataset(m.to_string()));
        if self.family == Family::File {
            if self.path.is_none() {
                return bad("file family needs a path");
            }
            if self.sigma.is_some() || self.weights.is_some() || self.period_len.is_some() {
                return bad("file family takes no sigma, weights or period_len");
            }
            return Ok(());
        }
        if self.path.is_some() {
            return bad("path is only valid for the file family");
        }
        if self.n == 0 {
            return bad("n must be >= 1");
        }
        if let Some(s) = self.sigma {
            if !(1..=256).contains(&s) {
                return bad("sigma must be in 1..=256");
            }
        }
        match self.family {
            Family::Random => {
                if self.period_len.is_some() {
                    return bad("period_len is only valid for the periodic family");
                }
                match (&self.sigma, &self.weights) {
                    (Some(_), Some(_)) => return bad("give sigma or weights, not both"),
                    (None, None) => return bad("random family needs sigma or weights"),
                    (None, Some(w)) => {
                        if w.is_empty() || w.len() > 256 {
                            return bad("weights must list 1..=256 entries");
                        }
                        if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                            return bad("weights must be positive");
                        }
                    }
                    _ => {}
                }
            }
            Family::Periodic => {
                if self.weights.is_some() {
                    return bad("weights are only valid for the random family");
                }
                match self.period_len {
                    None | Some(0) => return bad("periodic family needs period_len >= 1"),
                    _ => {}
                }
            }
            Family::Fibonacci | Family::Unary | Family::Debruijn => {
                if self.sigma.is_some() || self.weights.is_some() || self.period_len.is_some() {
                    return bad("this family takes only n");
                }
                if self.family == Family::Debruijn && self.n < 2 {
                    return bad("debruijn needs n >= 2");
                }
            }
            Family::File => unreachable!(),
        }
        Ok(())
    }
}

/// Draws symbol indices from fixed weights.
#[derive(Clone, Debug)]
pub struct SymbolSampler {
    rng: Xoshiro256PlusPlus,
    cumulative: Vec<f64>,
}

impl SymbolSampler {
    pub fn uniform(sigma: usize, seed: u64) -> SymbolSampler {
        Self::weighted(&vec![1.0; sigma.max(1)], seed)
    }

    /// Weights need not be normalised.
    pub fn weighted(weights: &[f64], seed: u64) -> SymbolSampler {
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        SymbolSampler {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            cumulative,
        }
    }

    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_symbol(&mut self) -> usize {
        let u = self.unit();
        let k = self.cumulative.partition_point(|&c| c <= u);
        k.min(self.cumulative.len() - 1)
    }
}

/// Byte used for symbol `j` of a `sigma`-letter alphabet.
pub fn symbol_byte(j: usize, sigma: usize) -> u8 {
    if sigma <= 26 {
        b'a' + j as u8
    } else if sigma <= 94 {
        b'!' + j as u8
    } else {
        j as u8
    }
}

pub fn gen(spec: &DatasetSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    let n = spec.n;
    Ok(match spec.family {
        Family::Random => {
            let (mut s, sigma) = match &spec.weights {
                Some(w) => (SymbolSampler::weighted(w, spec.seed), w.len()),
                None => {
                    let sigma = spec.sigma.unwrap();
                    (SymbolSampler::uniform(sigma, spec.seed), sigma)
                }
            };
            (0..n).map(|_| symbol_byte(s.next_symbol(), sigma)).collect()
        }
        Family::Periodic => {
            let p = spec.period_len.unwrap();
            let sigma = spec.sigma.unwrap_or(26);
            let mut s = SymbolSampler::uniform(sigma, spec.seed);
            let block: Vec<u8> = (0..p).map(|_| symbol_byte(s.next_symbol(), sigma)).collect();
            block.iter().copied().cycle().take(n).collect()
        }
        Family::Fibonacci => fibonacci(n),
        Family::Unary => vec![b'a'; n],
        Family::Debruijn => {
            let mut order = 1;
            while debruijn_len(order + 1) <= n {
                order += 1;
            }
            debruijn(order)
        }
        Family::File => load(spec.path.as_deref().unwrap())?,
    })
}

/// Reads a file as raw bytes.
pub fn load(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(bytes)
}

/// `|F_k|` with `F_0 = b`, `F_1 = a`, `F_k = F_{k-1} F_{k-2}`.
pub fn fib_len(k: u32) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..k {
        (a, b) = (b, a + b);
    }
    a
}

/// The shortest Fibonacci string of length at least `n`, truncated to `n`.
pub fn fibonacci(n: usize) -> Vec<u8> {
    let mut prev = vec![b'b'];
    let mut cur = vec![b'a'];
    while cur.len() < n {
        let mut next = Vec::with_capacity(cur.len() + prev.len());
        next.extend_from_slice(&cur);
        next.extend_from_slice(&prev);
        prev = cur;
        cur = next;
    }
    cur.truncate(n);
    cur
}

/// `F_k` in full.
pub fn fibonacci_word(k: u32) -> Vec<u8> {
    if k == 0 {
        return vec![b'b'];
    }
    fibonacci(fib_len(k) as usize)
}

/// Length of the linear binary de Bruijn sequence of the given order.
pub fn debruijn_len(order: u32) -> usize {
    (1usize << order) + order as usize - 1
}

/// Linear binary de Bruijn sequence over `{a, b}`: every word of length
/// `order` occurs exactly once.
pub fn debruijn(order: u32) -> Vec<u8> {
    let k = order as usize;
    let mut a = vec![0u8; k + 1];
    let mut seq = Vec::with_capacity(debruijn_len(order));
    fkm(1, 1, k, &mut a, &mut seq);
    let head: Vec<u8> = seq[..k - 1].to_vec();
    seq.extend(head);
    seq.into_iter().map(|b| b'a' + b).collect()
}

// Fredricksen-Kessler-Maiorana over a binary alphabet.
fn fkm(t: usize, p: usize, k: usize, a: &mut [u8], seq: &mut Vec<u8>) {
    if t > k {
        if k.is_multiple_of(p) {
            seq.extend_from_slice(&a[1..=p]);
        }
        return;
    }
    a[t] = a[t - p];
    fkm(t + 1, p, k, a, seq);
    for j in a[t - p] + 1..2 {
        a[t] = j;
        fkm(t + 1, t, k, a, seq);
    }
}

/// One row of the shipped corpus manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    pub length: u64,
    pub sigma: usize,
    pub reference_seconds: Option<f64>,
    pub synthetic: bool,
}

pub const CORPUS_MANIFEST: &str = include_str!("../data/corpus.manifest");

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::Dataset(format!("manifest line {}: {m}", lineno + 1));
        let mut name = None;
        let mut length = None;
        let mut sigma = None;
        let mut reference_seconds = None;
        let mut synthetic = false;
        for field in line.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| err(format!("expected key=value, got {field:?}")))?;
            let num = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{k}: {e}")));
            match k {
                "name" => name = Some(v.to_string()),
                "length" => length = Some(num(v)?),
                "sigma" => sigma = Some(num(v)? as usize),
                "radixsa_s" => reference_seconds = Some(v.parse::<f64>().map_err(|e| err(format!("{k}: {e}")))?),
                "synthetic" => synthetic = v == "true",
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        out.push(ManifestEntry {
            name: name.ok_or_else(|| err("missing name".into()))?,
            length: length.ok_or_else(|| err("missing length".into()))?,
            sigma: sigma.ok_or_else(|| err("missing sigma".into()))?,
            reference_seconds,
            synthetic,
        });
    }
    Ok(out)
}

pub fn corpus_manifest() -> Vec<ManifestEntry> {
    parse_manifest(CORPUS_MANIFEST).expect("shipped manifest parses")
}

/// Compares a user supplied corpus file with its manifest row.
pub fn check_against_manifest(name: &str, bytes: &[u8]) -> Result<()> {
    let entries = corpus_manifest();
    let e = entries
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Dataset(format!("{name} is not in the manifest")))?;
    let mut used = [false; 256];
    for &b in bytes {
        used[b as usize] = true;
    }
    let sigma = used.iter().filter(|&&u| u).count();
    if bytes.len() as u64 != e.length || sigma != e.sigma {
        return Err(Error::Dataset(format!(
            "{name}: expected length {} and sigma {}, got {} and {sigma}",
            e.length,
            e.sigma,
            bytes.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Text;
    use std::collections::HashSet;

    #[test]
    fn fibonacci_prefix() {
        assert_eq!(fibonacci(13), b"abaababaabaab");
        assert_eq!(fibonacci(1), b"a");
        let words: Vec<Vec<u8>> = (0..8).map(fibonacci_word).collect();
        assert_eq!(words[2], b"ab");
        assert_eq!(words[5], b"abaababa");
        for k in 2..8 {
            let mut cat = words[k - 1].clone();
            cat.extend_from_slice(&words[k - 2]);
            assert_eq!(words[k], cat);
            assert_eq!(words[k].len() as u64, fib_len(k as u32));
        }
        assert_eq!(fib_len(30), 1_346_269);
    }

    #[test]
    fn unary() {
        assert_eq!(gen(&DatasetSpec::new(Family::Unary, 5)).unwrap(), b"aaaaa");
    }

    #[test]
    fn periodic_autocorrelation() {
        let s = gen(&DatasetSpec::periodic(100_000, 20, 17, 3)).unwrap();
        assert_eq!(s.len(), 100_000);
        assert!((0..s.len() - 20).all(|i| s[i] == s[i + 20]));
    }

    #[test]
    fn reproducible() {
        let spec = DatasetSpec::random(1000, 26, 42);
        assert_eq!(gen(&spec).unwrap(), gen(&spec).unwrap());
        let other = DatasetSpec::random(1000, 26, 43);
        assert_ne!(gen(&spec).unwrap(), gen(&other).unwrap());
        let s = gen(&spec).unwrap();
        assert!(s.iter().all(|b| b.is_ascii_lowercase()));
        assert_eq!(Text::ingest(&s).unwrap().sigma(), 26);
    }

    #[test]
    fn weighted_frequencies() {
        let mut spec = DatasetSpec::new(Family::Random, 100_000);
        spec.weights = Some(vec![0.7, 0.3]);
        let s = gen(&spec).unwrap();
        let a = s.iter().filter(|&&b| b == b'a').count() as f64 / s.len() as f64;
        assert!((a - 0.7).abs() < 0.01, "{a}");
    }

    #[test]
    fn debruijn_windows() {
        for order in 1..=10 {
            let s = debruijn(order);
            assert_eq!(s.len(), debruijn_len(order));
            let k = order as usize;
            let windows: HashSet<&[u8]> = s.windows(k).collect();
            assert_eq!(windows.len(), 1 << order);
        }
        let s = gen(&DatasetSpec::new(Family::Debruijn, 40)).unwrap();
        assert_eq!(s.len(), debruijn_len(5));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gen(&DatasetSpec::new(Family::Unary, 0)).is_err());
        assert!(gen(&DatasetSpec::new(Family::Random, 10)).is_err());
        assert!(gen(&DatasetSpec::new(Family::Periodic, 10)).is_err());
        let mut s = DatasetSpec::random(10, 4, 1);
        s.period_len = Some(3);
        assert!(gen(&s).is_err());
        let mut s = DatasetSpec::new(Family::Fibonacci, 10);
        s.sigma = Some(2);
        assert!(gen(&s).is_err());
        assert!(gen(&DatasetSpec::new(Family::File, 10)).is_err());
    }

    #[test]
    fn load_files() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty");
        fs::write(&empty, b"").unwrap();
        assert!(matches!(load(&empty), Err(Error::EmptyInput)));
        let all = dir.path().join("all");
        let bytes: Vec<u8> = (0..=255u8).collect();
        fs::write(&all, &bytes).unwrap();
        let got = gen(&DatasetSpec::file(&all)).unwrap();
        assert_eq!(Text::ingest(&got).unwrap().sigma(), 256);
        assert!(load(&dir.path().join("missing")).is_err());
    }

    #[test]
    fn manifest_rows() {
        let m = corpus_manifest();
        let bible = m.iter().find(|e| e.name == "bible").unwrap();
        assert_eq!((bible.length, bible.sigma), (4_047_391, 63));
        let p20 = m.iter().find(|e| e.name == "period_20").unwrap();
        assert_eq!((p20.length, p20.sigma), (20_000_000, 17));
        assert!(p20.synthetic);
        assert!(parse_manifest("name=x length=1").is_err());
        assert!(check_against_manifest("bible", b"abc").is_err());
    }

    #[test]
    fn spec_from_toml() {
        let spec: DatasetSpec = toml::from_str("family = \"periodic\"\nn = 50\nperiod_len = 7\nsigma = 4\nseed = 9").unwrap();
        assert_eq!(spec, DatasetSpec::periodic(50, 7, 4, 9));
    }
}
