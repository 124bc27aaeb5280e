use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radix_sa::alloc::{PeakWindow, TrackingAllocator};
use radix_sa::bench::{self, BenchSpec};
use radix_sa::datagen::{self, DatasetSpec, Family};
use radix_sa::lmer::LmerConfig;
use radix_sa::prob::{sa1_with_stats, sa2};
use radix_sa::radixsa::{radixsa, RadixSaConfig};
use radix_sa::text::{ProbabilityModel, SuffixArray, Text};
use radix_sa::verify::{check_sa, lemma_exact, lemma_montecarlo, LemmaReport};

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

#[derive(Parser)]
#[command(name = "radixsa", version, about = "Suffix array construction by radix sorting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the suffix array of a file.
    Build(BuildArgs),
    /// Check a suffix array file against its text.
    Verify { text: PathBuf, sa: PathBuf },
    /// Check l-mer collision probabilities exactly or by sampling.
    Lemma(LemmaArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Time builds over the datasets of a TOML spec and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Radixsa,
    Sa1,
    Sa2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Binary,
    Text,
}

#[derive(Args)]
struct BuildArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "radixsa")]
    algo: AlgoArg,
    /// Output file; nothing is written without it.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binary")]
    format: Format,
    /// Confidence exponent for the prefix length of sa1 and sa2.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Prefix length for sa1 and sa2, overriding the choice from alpha.
    #[arg(long)]
    ell: Option<usize>,
    /// Sort participations per suffix and pass before a bucket is deferred.
    #[arg(long, default_value_t = 8, conflicts_with = "no_cap")]
    cap: u32,
    /// Single uncapped pass.
    #[arg(long)]
    no_cap: bool,
    /// Symbols in the initial sort key (default: as many as fit 64 bits).
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    no_periods: bool,
    /// Write construction statistics as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Run the linear-time checker on the result.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, conflicts_with = "mc", required_unless_present = "mc")]
    exact: bool,
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 2)]
    sigma: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    ell: usize,
    /// Comma separated offsets k, comparing P_i with P_{i+k}.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
    offsets: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Symbol probabilities for --mc, e.g. "0.7,0.3" or "1/2,1/4,1/4".
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the report as CSV instead of text.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sigma: Option<usize>,
    /// Comma separated symbol weights (random family).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the repetitions of the spec file.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Build(a) => build(a),
        Cmd::Verify { text, sa } => verify(&text, &sa),
        Cmd::Lemma(a) => lemma(a),
        Cmd::Gen(a) => generate(a),
        Cmd::Bench(a) => run_bench(a),
    }
}

fn read_text(path: &Path) -> Result<Text> {
    let raw = datagen::load(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Text::ingest(&raw)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn build(a: BuildArgs) -> Result<ExitCode> {
    let t = read_text(&a.input)?;
    let n = t.len();
    let cfg = RadixSaConfig {
        initial_depth: a.depth,
        access_cap: (!a.no_cap).then_some(a.cap),
        periods: !a.no_periods,
        ..Default::default()
    };
    let lmer = match a.algo {
        AlgoArg::Radixsa => None,
        _ => Some(LmerConfig::for_text(&t, a.alpha, a.ell)?),
    };

    let mut stats: Vec<(&str, String)> = vec![("n", n.to_string()), ("sigma", t.sigma().to_string())];
    let window = PeakWindow::start();
    let start = Instant::now();
    let sa = match a.algo {
        AlgoArg::Radixsa => {
            let out = radixsa(&t, &cfg)?;
            let s = &out.stats;
            stats.extend([
                ("algo", "radixsa".to_string()),
                ("passes", s.passes.to_string()),
                ("pass_bound", s.pass_bound.to_string()),
                ("participations", s.participations.to_string()),
                ("mean_access", format!("{:.4}", s.mean_access(n))),
                ("generic_sorts", s.generic_sorts.to_string()),
                ("period_sorts", s.period_sorts.to_string()),
                ("skipped_buckets", s.skipped_buckets.to_string()),
            ]);
            out.sa
        }
        AlgoArg::Sa1 => {
            let lm = lmer.as_ref().unwrap();
            let out = sa1_with_stats(&t, lm);
            stats.extend([
                ("algo", "sa1".to_string()),
                ("ell", lm.ell.to_string()),
                ("buckets", out.buckets.buckets.to_string()),
                ("nonsingleton_buckets", out.buckets.nonsingleton_buckets.to_string()),
                ("max_bucket_size", out.buckets.max_bucket_size.to_string()),
            ]);
            out.sa
        }
        AlgoArg::Sa2 => {
            let lm = lmer.as_ref().unwrap();
            let out = sa2(&t, lm, &cfg)?;
            stats.extend([
                ("algo", "sa2".to_string()),
                ("ell", lm.ell.to_string()),
                ("fell_back", out.fell_back.to_string()),
                ("nonsingleton_buckets", out.nonsingleton_buckets.to_string()),
                ("max_bucket_size", out.max_bucket_size.to_string()),
            ]);
            out.sa
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let aux = window.peak_above_base().saturating_sub(sa.len() * 4);
    stats.extend([("ms", format!("{ms:.3}")), ("aux_bytes", aux.to_string())]);

    let mut code = ExitCode::SUCCESS;
    if a.verify {
        match check_sa(&t, &sa) {
            Ok(()) => stats.push(("verified", "true".into())),
            Err(v) => {
                eprintln!("verification failed: {v}");
                stats.push(("verified", "false".into()));
                code = ExitCode::from(1);
            }
        }
    }
    for (k, v) in &stats {
        eprintln!("{k}: {v}");
    }
    if let Some(path) = &a.stats {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(stats.iter().map(|(k, _)| *k))?;
        w.write_record(stats.iter().map(|(_, v)| v.as_str()))?;
        w.flush()?;
    }
    if let Some(path) = &a.output {
        let mut w = create(path)?;
        match a.format {
            Format::Binary => sa.write_binary(&mut w)?,
            Format::Text => sa.write_text(&mut w)?,
        }
        w.flush()?;
    }
    Ok(code)
}

fn verify(text: &Path, sa_path: &Path) -> Result<ExitCode> {
    let t = read_text(text)?;
    let f = File::open(sa_path).with_context(|| format!("opening {}", sa_path.display()))?;
    let sa = SuffixArray::read(io::BufReader::new(f))?;
    match check_sa(&t, &sa) {
        Ok(()) => {
            println!("ok: {} suffixes", t.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(v) => {
            println!("invalid: {v}");
            Ok(ExitCode::from(1))
        }
    }
}

fn lemma(a: LemmaArgs) -> Result<ExitCode> {
    let report: LemmaReport = if a.exact {
        if a.weights.is_some() {
            bail!("--weights only applies to --mc");
        }
        lemma_exact(a.sigma, a.n, a.ell, &a.offsets)?
    } else {
        let model = match &a.weights {
            Some(w) => ProbabilityModel::parse_weights(w)?,
            None => ProbabilityModel::uniform(a.sigma)?,
        };
        lemma_montecarlo(&model, a.n, a.ell, a.trials, &a.offsets, a.seed)?
    };
    match &a.csv {
        Some(path) => report.write_csv(create(path)?)?,
        None => print!("{report}"),
    }
    Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn generate(a: GenArgs) -> Result<ExitCode> {
    if a.family == Family::File {
        bail!("the file family reads existing data; nothing to generate");
    }
    let spec = DatasetSpec {
        sigma: a.sigma,
        weights: a.weights,
        period_len: a.period,
        seed: a.seed,
        ..DatasetSpec::new(a.family, a.n)
    };
    let bytes = datagen::gen(&spec)?;
    let mut w = create(&a.output)?;
    w.write_all(&bytes)?;
    w.flush()?;
    eprintln!("wrote {} bytes to {}", bytes.len(), a.output.display());
    Ok(ExitCode::SUCCESS)
}

fn run_bench(a: BenchArgs) -> Result<ExitCode> {
    let mut spec = BenchSpec::load(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    if let Some(r) = a.reps {
        spec.reps = r;
    }
    if spec.datasets.is_empty() {
        bail!("{} lists no datasets", a.spec.display());
    }
    let stats = bench::bench_spec(&spec)?;
    for s in &stats {
        let reference = s
            .reference_seconds
            .map(|r| format!(" (reference {r} s)"))
            .unwrap_or_default();
        println!(
            "{:<24} {:>10} {:<8} mean {:>10.3} ms  sd {:>8.3}  access {:>6.3}  passes {}  aux {} B{reference}",
            s.dataset,
            s.n,
            s.algo.to_string(),
            s.mean_ms(),
            s.stddev_ms(),
            s.mean_access,
            s.passes,
            s.peak_aux_bytes()
        );
    }
    if let Some(path) = &a.csv {
        bench::write_csv(&stats, create(path)?)?;
    }
    Ok(ExitCode::SUCCESS)
}
