//! Timing, access-count and memory measurements over generated datasets.
//!
//! Each build is timed on its own (ingest and file I/O excluded), verified
//! with [`check_sa`](crate::verify::check_sa), and reported as one CSV row
//! per repetition. Peak auxiliary bytes are only available when the process
//! runs with [`TrackingAllocator`](crate::alloc::TrackingAllocator); the
//! output suffix array is not counted.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alloc::{self, PeakWindow};
use crate::datagen::{corpus_manifest, gen, DatasetSpec};
use crate::error::{Error, Result};
use crate::lmer::LmerConfig;
use crate::prob::{sa1, sa2};
use crate::radixsa::{radixsa, RadixSaConfig};
use crate::text::{SuffixArray, Text};
use crate::verify::ensure_valid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Radixsa,
    Sa1,
    Sa2,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Radixsa, Algo::Sa1, Algo::Sa2];
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Radixsa => "radixsa",
            Algo::Sa1 => "sa1",
            Algo::Sa2 => "sa2",
        })
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        match s.to_ascii_lowercase().as_str() {
            "radixsa" => Ok(Algo::Radixsa),
            "sa1" => Ok(Algo::Sa1),
            "sa2" => Ok(Algo::Sa2),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Benchmark settings, also the shape of a TOML spec file:
///
/// ```toml
/// reps = 10
/// algos = ["radixsa", "sa2"]
///
/// [[dataset]]
/// family = "random"
/// n = 1000000
/// sigma = 26
/// seed = 1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_algos")]
    pub algos: Vec<Algo>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Run one extra instrumented RadixSA build per dataset for the
    /// per-suffix access histogram.
    #[serde(default)]
    pub histogram: bool,
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
}

fn default_reps() -> usize {
    10
}

fn default_algos() -> Vec<Algo> {
    vec![Algo::Radixsa]
}

fn default_alpha() -> f64 {
    1.0
}

impl BenchSpec {
    pub fn new(datasets: Vec<DatasetSpec>, algos: Vec<Algo>, reps: usize) -> BenchSpec {
        BenchSpec {
            reps,
            algos,
            alpha: default_alpha(),
            histogram: false,
            datasets,
        }
    }

    pub fn parse(text: &str) -> Result<BenchSpec> {
        let spec: BenchSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<BenchSpec> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.algos.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        for d in &self.datasets {
            d.validate()?;
        }
        Ok(())
    }
}

/// Measurements for one (dataset, algorithm) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub dataset: String,
    pub n: usize,
    pub sigma: usize,
    pub algo: Algo,
    /// Milliseconds per repetition, rounded to microseconds.
    pub wall_ms: Vec<f64>,
    /// Sort participations per suffix; 0 for l-mer builds that did not
    /// fall back.
    pub mean_access: f64,
    pub passes: u32,
    /// Peak auxiliary bytes per repetition; 0 without the tracking allocator.
    pub aux_bytes: Vec<u64>,
    /// `access_histogram[c]` suffixes took part in exactly `c` sorts.
    pub access_histogram: Option<Vec<u64>>,
    /// Reference time for a manifest dataset of the same name.
    pub reference_seconds: Option<f64>,
}

impl RunStats {
    pub fn mean_ms(&self) -> f64 {
        self.wall_ms.iter().sum::<f64>() / self.wall_ms.len() as f64
    }

    pub fn stddev_ms(&self) -> f64 {
        let m = self.mean_ms();
        let k = self.wall_ms.len();
        if k < 2 {
            return 0.0;
        }
        (self.wall_ms.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    }

    pub fn peak_aux_bytes(&self) -> u64 {
        self.aux_bytes.iter().copied().max().unwrap_or(0)
    }

    pub fn records(&self) -> Vec<BenchRecord> {
        self.wall_ms
            .iter()
            .zip(&self.aux_bytes)
            .enumerate()
            .map(|(rep, (&ms, &aux))| BenchRecord {
                dataset: self.dataset.clone(),
                n: self.n,
                sigma: self.sigma,
                algo: self.algo,
                rep,
                ms,
                mean_access: self.mean_access,
                passes: self.passes,
                aux_bytes: aux,
            })
            .collect()
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub n: usize,
    pub sigma: usize,
    pub algo: Algo,
    pub rep: usize,
    pub ms: f64,
    pub mean_access: f64,
    pub passes: u32,
    pub aux_bytes: u64,
}

pub fn write_csv<W: Write>(stats: &[RunStats], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for s in stats {
        for r in s.records() {
            out.serialize(r)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<RunStats>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut records = Vec::new();
    for rec in rdr.deserialize() {
        records.push(rec?);
    }
    Ok(from_records(&records))
}

/// Groups per-repetition rows back into [`RunStats`], in first-seen order.
/// Histograms are not part of the CSV and come back as `None`.
pub fn from_records(records: &[BenchRecord]) -> Vec<RunStats> {
    let mut out: Vec<RunStats> = Vec::new();
    for r in records {
        let pos = out.iter().position(|s| s.dataset == r.dataset && s.algo == r.algo);
        let s = match pos {
            Some(i) => &mut out[i],
            None => {
                out.push(RunStats {
                    dataset: r.dataset.clone(),
                    n: r.n,
                    sigma: r.sigma,
                    algo: r.algo,
                    wall_ms: Vec::new(),
                    mean_access: r.mean_access,
                    passes: r.passes,
                    aux_bytes: Vec::new(),
                    access_histogram: None,
                    reference_seconds: reference_seconds(&r.dataset),
                });
                out.last_mut().unwrap()
            }
        };
        s.wall_ms.push(r.ms);
        s.aux_bytes.push(r.aux_bytes);
    }
    out
}

fn reference_seconds(name: &str) -> Option<f64> {
    corpus_manifest()
        .into_iter()
        .find(|e| e.name == name)
        .and_then(|e| e.reference_seconds)
}

/// Result of a single timed build.
#[derive(Clone, Debug)]
pub struct Build {
    pub sa: SuffixArray,
    pub ms: f64,
    pub aux_bytes: u64,
    pub participations: u64,
    pub passes: u32,
}

/// Builds once with `algo`, timing construction only.
pub fn timed_build(t: &Text, algo: Algo, alpha: f64, cfg: &RadixSaConfig) -> Result<Build> {
    let lmer = match algo {
        Algo::Radixsa => None,
        _ => Some(LmerConfig::for_text(t, alpha, None)?),
    };
    let window = PeakWindow::start();
    let start = Instant::now();
    let (sa, participations, passes) = match algo {
        Algo::Radixsa => {
            let out = radixsa(t, cfg)?;
            (out.sa, out.stats.participations, out.stats.passes)
        }
        Algo::Sa1 => (sa1(t, lmer.as_ref().unwrap()), 0, 0),
        Algo::Sa2 => {
            let out = sa2(t, lmer.as_ref().unwrap(), cfg)?;
            let (p, k) = out
                .fallback_stats
                .map(|s| (s.participations, s.passes))
                .unwrap_or((0, 0));
            (out.sa, p, k)
        }
    };
    let elapsed = start.elapsed();
    let aux_bytes = if alloc::is_installed() {
        window.peak_above_base().saturating_sub(sa.len() * 4) as u64
    } else {
        0
    };
    Ok(Build {
        sa,
        ms: (elapsed.as_secs_f64() * 1e6).round() / 1e3,
        aux_bytes,
        participations,
        passes,
    })
}

pub fn bench(specs: &[DatasetSpec], algos: &[Algo], reps: usize) -> Result<Vec<RunStats>> {
    bench_spec(&BenchSpec::new(specs.to_vec(), algos.to_vec(), reps))
}

/// Runs every (dataset, algorithm) pair `reps` times. Any build that fails
/// verification aborts the whole run.
pub fn bench_spec(spec: &BenchSpec) -> Result<Vec<RunStats>> {
    spec.validate()?;
    let cfg = RadixSaConfig::default();
    let mut out = Vec::new();
    for ds in &spec.datasets {
        let bytes = gen(ds)?;
        let t = Text::ingest(&bytes)?;
        drop(bytes);
        let name = ds.label();
        let histogram = if spec.histogram {
            Some(histogram_of(&access_profile(&t, &cfg)?))
        } else {
            None
        };
        for &algo in &spec.algos {
            let mut s = RunStats {
                dataset: name.clone(),
                n: t.len(),
                sigma: t.sigma(),
                algo,
                wall_ms: Vec::with_capacity(spec.reps),
                mean_access: 0.0,
                passes: 0,
                aux_bytes: Vec::with_capacity(spec.reps),
                access_histogram: if algo == Algo::Radixsa { histogram.clone() } else { None },
                reference_seconds: if algo == Algo::Radixsa { reference_seconds(&name) } else { None },
            };
            for _ in 0..spec.reps {
                let b = timed_build(&t, algo, spec.alpha, &cfg)?;
                ensure_valid(&t, &b.sa)?;
                s.wall_ms.push(b.ms);
                s.aux_bytes.push(b.aux_bytes);
                s.mean_access = b.participations as f64 / t.len() as f64;
                s.passes = b.passes;
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Per-suffix sort participations from an instrumented RadixSA run.
pub fn access_profile(t: &Text, cfg: &RadixSaConfig) -> Result<Vec<u32>> {
    let cfg = RadixSaConfig {
        instrument: true,
        ..cfg.clone()
    };
    let out = radixsa(t, &cfg)?;
    Ok(out.stats.access.unwrap_or_else(|| vec![0; t.len()]))
}

pub fn histogram_of(profile: &[u32]) -> Vec<u64> {
    let max = profile.iter().copied().max().unwrap_or(0) as usize;
    let mut h = vec![0u64; max + 1];
    for &c in profile {
        h[c as usize] += 1;
    }
    h
}

pub fn mean(profile: &[u32]) -> f64 {
    if profile.is_empty() {
        return 0.0;
    }
    profile.iter().map(|&c| c as u64).sum::<u64>() as f64 / profile.len() as f64
}

/// Least-squares fit `y = a + b x`; returns `(a, b, r)` with `r` the
/// Pearson correlation.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let r = if syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    (my - b * mx, b, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::Family;

    #[test]
    fn small_bench_round_trips() {
        let specs = vec![
            DatasetSpec::random(5000, 4, 1),
            DatasetSpec::periodic(3000, 20, 4, 2),
            DatasetSpec::new(Family::Fibonacci, 2000),
        ];
        let stats = bench(&specs, &Algo::ALL, 2).unwrap();
        assert_eq!(stats.len(), 9);
        for s in &stats {
            assert_eq!(s.wall_ms.len(), 2);
            assert!(s.stddev_ms() >= 0.0);
        }
        let mut buf = Vec::new();
        write_csv(&stats, &mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("dataset,n,sigma,algo,rep,ms,mean_access,passes,aux_bytes\n"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back, stats);
    }

    #[test]
    fn trivial_dataset() {
        let stats = bench(&[DatasetSpec::new(Family::Unary, 1)], &[Algo::Radixsa], 1).unwrap();
        assert_eq!(stats[0].passes, 0);
        assert_eq!(stats[0].mean_access, 0.0);
        let t = Text::ingest(b"x").unwrap();
        assert_eq!(access_profile(&t, &RadixSaConfig::default()).unwrap(), vec![0]);
    }

    #[test]
    fn histogram_sums_to_participations() {
        let t = Text::ingest(&gen(&DatasetSpec::random(20_000, 4, 5)).unwrap()).unwrap();
        let cfg = RadixSaConfig::default();
        let profile = access_profile(&t, &cfg).unwrap();
        let h = histogram_of(&profile);
        let total: u64 = h.iter().enumerate().map(|(c, k)| c as u64 * k).sum();
        let plain = radixsa(&t, &cfg).unwrap();
        assert_eq!(total, plain.stats.participations);
        assert_eq!(h.iter().sum::<u64>(), t.len() as u64);
        let instrumented = radixsa(&t, &RadixSaConfig { instrument: true, ..cfg }).unwrap();
        assert_eq!(instrumented.sa, plain.sa);
    }

    #[test]
    fn unary_profile_is_constant() {
        let t = Text::ingest(&[b'a'; 1024]).unwrap();
        let with = mean(&access_profile(&t, &RadixSaConfig::default()).unwrap());
        let without = mean(&access_profile(&t, &RadixSaConfig { periods: false, ..Default::default() }).unwrap());
        assert!(with <= 2.0, "{with}");
        assert!(with <= without);
    }

    #[test]
    fn spec_file() {
        let spec = BenchSpec::parse(
            "reps = 3\nalgos = [\"radixsa\", \"sa2\"]\n\n[[dataset]]\nname = \"random\"\nfamily = \"random\"\nn = 100\nsigma = 26\nseed = 4\n",
        )
        .unwrap();
        assert_eq!(spec.reps, 3);
        assert_eq!(spec.algos, vec![Algo::Radixsa, Algo::Sa2]);
        assert_eq!(spec.datasets[0].label(), "random");
        let stats = bench_spec(&spec).unwrap();
        assert_eq!(stats[0].reference_seconds, Some(2.25));
        assert!(BenchSpec::parse("reps = 0").is_err());
        assert!(BenchSpec::parse("bogus = 1").is_err());
    }

    #[test]
    fn fit() {
        let (a, b, r) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
    }
}
