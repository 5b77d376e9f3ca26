// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mmdseg::benchmark::{run_benchmark, BenchmarkCell, BenchmarkReport};
use mmdseg::desc::{DetectorParams, DetectorRegistry, TraceEvent};
use mmdseg::kernel::{gram_matrix, BandwidthChoice};
use mmdseg::mmd::{rho_curve_in, SplitRange};
use mmdseg::oracle::{SingleChangeOracle, TwoChangeOracle};
use mmdseg::simgen::{generate, ModelId, ModelSpec, DEFAULT_GRID_SIZE};

use crate::config::{BandwidthArg, ConfigFile, Format, Overrides, PValueArg, RunConfig};
use crate::data::{load_csv, write_csv};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "mmdseg", version, about = "Changepoint detection for functional data with kernel MMD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unsupervised detection: recursive splitting gated by a permutation test.
    DetectU(DetectArgs),
    /// Supervised detection of exactly `--k` changepoints.
    DetectS(DetectArgs),
    /// Semi-supervised detection with `--k-lower` ..= `--k-upper` changepoints.
    DetectSs(DetectArgs),
    /// Force `--k-lower` changepoints, then search each segment unsupervised.
    DetectForward(DetectArgs),
    /// Draw a dataset from a benchmark model.
    Simulate(SimulateArgs),
    /// Empirical and oracle split curves of labeled data.
    OracleCurve(OracleArgs),
    /// Monte Carlo evaluation of a detector on simulated models.
    Benchmark(BenchmarkArgs),
}

/// Settings that can also come from `--config`.
#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    /// Key = value file supplying any of these settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Boundary fraction excluded at both ends of a tested block [default: 0.05].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of permutations per test [default: 199].
    #[arg(long, short = 'R')]
    pub permutations: Option<usize>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `auto` for the median heuristic, or a fixed positive bandwidth [default: auto].
    #[arg(long)]
    pub bandwidth: Option<BandwidthArg>,
    /// `strict` or `add-one` [default: strict].
    #[arg(long)]
    pub p_value: Option<PValueArg>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_lower: Option<usize>,
    #[arg(long)]
    pub k_upper: Option<usize>,
    /// `json` or `csv` [default: json].
    #[arg(long)]
    pub format: Option<Format>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

impl SettingsArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            delta: self.delta,
            permutations: self.permutations,
            alpha: self.alpha,
            seed: self.seed,
            bandwidth: self.bandwidth,
            p_value: self.p_value,
            k: self.k,
            k_lower: self.k_lower,
            k_upper: self.k_upper,
            format: self.format,
            threads: self.threads,
        };
        let run = RunConfig::resolve(&flags, &file)?;
        if let Some(threads) = run.threads {
            // Fails only if the pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
        Ok(run)
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV file: one observed curve per row, in time order.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub settings: SettingsArgs,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Include wall-clock timing (makes output differ between runs).
    #[arg(long)]
    pub timing: bool,
}

/// Which model to draw and how its observations split into segments.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// N1-N4, 1-12, M1 or M2.
    #[arg(long)]
    pub model: Option<String>,
    /// Segment lengths, e.g. `100,100,100`.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<usize>,
    /// Sample size for a two-segment model split at `--gamma`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Breakfraction: the first `⌊n·gamma⌋` observations form segment one.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Signal strength of M1 and M2.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
}

impl ModelArgs {
    fn spec(&self, seed: u64) -> Result<ModelSpec> {
        let model: ModelId = self.model.as_deref().ok_or_else(|| CliError::config("--model is required"))?.parse()?;
        let spec = match (self.lengths.is_empty(), self.n, self.gamma) {
            (false, None, None) => ModelSpec::new(model, self.lengths.clone(), seed),
            (true, Some(n), Some(gamma)) => ModelSpec::with_breakfraction(model, n, gamma, seed)?,
            (true, Some(n), None) if model.populations() == 1 => ModelSpec::new(model, vec![n], seed),
            _ => return Err(CliError::config("give either --lengths, or --n with --gamma")),
        };
        let spec = ModelSpec { c: self.c, ..spec }.with_grid_size(self.grid_size);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; the truth goes to the same path with a `.json` extension.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Labeled CSV data; needs `--segments`.
    #[arg(long, requires = "segments", conflicts_with = "model")]
    pub input: Option<PathBuf>,
    /// Lengths of the labeled segments of `--input`.
    #[arg(long, value_delimiter = ',')]
    pub segments: Vec<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub bandwidth: Option<BandwidthArg>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// JSON array of cells; replaces the single-cell flags.
    #[arg(long, conflicts_with_all = ["model", "algorithm"])]
    pub cells: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Detector name: u, s, ss or forward.
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports always serialize");
    bytes.push(b'\n');
    bytes
}

fn csv_bytes(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write(&mut writer).map_err(|e| CliError::data(e.to_string()))?;
    writer.into_inner().map_err(|e| CliError::data(e.to_string()))
}

#[derive(Serialize)]
struct DetectionReport<'a> {
    detector: &'a str,
    n: usize,
    grid_size: usize,
    bandwidth: f64,
    params: &'a DetectorParams,
    k_hat: usize,
    boundaries: &'a [usize],
    breakfractions: Vec<f64>,
    p_values: &'a [Option<f64>],
    segments: Vec<[usize; 2]>,
    trace: &'a [TraceEvent],
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_secs: Option<f64>,
}

pub fn detect(name: &str, args: &DetectArgs) -> Result<()> {
    let run = args.settings.resolve()?;
    let detector = DetectorRegistry::default().build(name, &run.params)?;
    let data = load_csv(&args.input)?;
    let started = Instant::now();
    let h = run.bandwidth.resolve(&data)?;
    let gram = gram_matrix(&data, h)?;
    let detection = detector.detect(&gram)?;
    let elapsed = started.elapsed().as_secs_f64();

    let segmentation = &detection.segmentation;
    let bytes = match run.format {
        Format::Json => to_json(&DetectionReport {
            detector: detector.name(),
            n: data.len(),
            grid_size: data.grid_size(),
            bandwidth: h.get(),
            params: &run.params,
            k_hat: segmentation.k(),
            boundaries: segmentation.boundaries(),
            breakfractions: segmentation.breakfractions(),
            p_values: &detection.p_values,
            segments: segmentation.segments().into_iter().map(|s| [s.start, s.end]).collect(),
            trace: &detection.trace.events,
            elapsed_secs: args.timing.then_some(elapsed),
        }),
        Format::Csv => csv_bytes(|w| {
            w.write_record(["boundary", "breakfraction", "p_value"])?;
            for ((b, f), p) in
                segmentation.boundaries().iter().zip(segmentation.breakfractions()).zip(&detection.p_values)
            {
                w.write_record([b.to_string(), f.to_string(), p.map(|p| p.to_string()).unwrap_or_default()])?;
            }
            Ok(())
        })?,
    };
    emit(args.output.as_deref(), &bytes)
}

#[derive(Serialize)]
struct SimulationSidecar<'a> {
    spec: &'a ModelSpec,
    n: usize,
    grid: Vec<f64>,
    boundaries: &'a [usize],
    breakfractions: Vec<f64>,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = args.model.spec(args.seed)?;
    let sample = generate(&spec)?;
    let mut csv = Vec::new();
    write_csv(&sample.data, &mut csv)?;
    emit(Some(&args.output), &csv)?;
    let sidecar = SimulationSidecar {
        spec: &spec,
        n: sample.data.len(),
        grid: mmdseg::simgen::grid(spec.grid_size),
        boundaries: sample.truth.boundaries(),
        breakfractions: sample.truth.breakfractions(),
    };
    emit(Some(&args.output.with_extension("json")), &to_json(&sidecar))
}

pub fn oracle_curve(args: &OracleArgs) -> Result<()> {
    let (data, lengths) = match &args.input {
        Some(path) => (load_csv(path)?, args.segments.clone()),
        None => {
            let sample = generate(&args.model.spec(args.seed)?)?;
            let lengths = sample.model.segment_lengths.clone();
            (sample.data, lengths)
        }
    };
    if lengths.iter().sum::<usize>() != data.len() || lengths.contains(&0) {
        return Err(CliError::config(format!(
            "segment lengths {lengths:?} do not partition {} observations",
            data.len()
        )));
    }
    let h = args.bandwidth.map_or(BandwidthChoice::MedianHeuristic, |b| b.0).resolve(&data)?;
    let gram = gram_matrix(&data, h)?;
    let oracle: Vec<(usize, f64)> = match lengths[..] {
        [n1, _] => SingleChangeOracle::new(&gram, n1)?.curve(),
        [n1, n2, _] => TwoChangeOracle::new(&gram, n1, n2)?.curve(),
        _ => return Err(CliError::config("oracle curves need two or three labeled segments")),
    };
    let order: Vec<usize> = (0..data.len()).collect();
    let empirical = rho_curve_in(&gram, &order, SplitRange::full(data.len())?);
    let bytes = csv_bytes(|w| {
        w.write_record(["r", "rho_star", "rho"])?;
        for ((r, star), (_, rho)) in oracle.iter().zip(empirical.iter()) {
            w.write_record([r.to_string(), star.to_string(), rho.to_string()])?;
        }
        Ok(())
    })?;
    emit(args.output.as_deref(), &bytes)
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let run = args.settings.resolve()?;
    let cells: Vec<BenchmarkCell> = match &args.cells {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => vec![BenchmarkCell {
            model: args.model.spec(0)?,
            algorithm: args.algorithm.clone().ok_or_else(|| CliError::config("--algorithm is required"))?,
            params: run.params,
            bandwidth: run.bandwidth,
        }],
    };
    let report = run_benchmark(&cells, args.replications, run.params.amoc.seed)?;
    let report = if args.timing { report } else { report.without_timing() };
    let bytes = match run.format {
        Format::Json => to_json(&report),
        Format::Csv => benchmark_csv(&report, args.timing)?,
    };
    emit(args.output.as_deref(), &bytes)
}

fn benchmark_csv(report: &BenchmarkReport, timing: bool) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        let mut header = vec![
            "model",
            "n",
            "segment_lengths",
            "algorithm",
            "replications",
            "k_true",
            "rate_detect",
            "se_detect",
            "rate_k_correct",
            "se_k_correct",
            "rate_match",
            "se_match",
            "rate_superset",
            "se_superset",
            "rate_subset",
            "se_subset",
            "mean_hausdorff",
        ];
        if timing {
            header.push("mean_secs");
        }
        w.write_record(&header)?;
        for c in &report.cells {
            let lengths: Vec<String> = c.segment_lengths.iter().map(|l| l.to_string()).collect();
            let mut row = vec![
                c.model.clone(),
                c.n.to_string(),
                lengths.join(";"),
                c.algorithm.clone(),
                c.replications.to_string(),
                c.k_true.to_string(),
            ];
            for rate in [c.rate_detect, c.rate_k_correct, c.rate_match, c.rate_superset, c.rate_subset] {
                row.push(rate.rate.to_string());
                row.push(rate.se.to_string());
            }
            row.push(c.mean_hausdorff.map(|h| h.to_string()).unwrap_or_default());
            if timing {
                row.push(c.runtime.mean_secs.to_string());
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::DetectU(args) => detect("u", args),
        Command::DetectS(args) => detect("s", args),
        Command::DetectSs(args) => detect("ss", args),
        Command::DetectForward(args) => detect("forward", args),
        Command::Simulate(args) => simulate(args),
        Command::OracleCurve(args) => oracle_curve(args),
        Command::Benchmark(args) => benchmark(args),
    }
}
