//! Command-line front end: Monte Carlo runs with CSV/JSON outputs, analytic
//! reference curves, and deterministic SVG plots.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 numeric failure,
//! 4 I/O failure.

mod output;
mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmt2d::ensembles::ClassTag;
use rmt2d::harness::{ExperimentConfig, SpectraRetention, UnfoldPolicy};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rmt2d", version, about = "Spectral statistics of non-Hermitian random matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an ensemble and write statistics to an output directory.
    Run(RunArgs),
    /// Evaluate an analytic reference curve and write it as CSV.
    Analytic(AnalyticArgs),
    /// Render a CSV table produced by `run` or `analytic` as an SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    A,
    Eginue,
    Ai,
    Aii,
    Poisson,
}

impl EnsembleArg {
    fn tag(self) -> ClassTag {
        match self {
            EnsembleArg::A => ClassTag::A,
            EnsembleArg::Eginue => ClassTag::EGinUe,
            EnsembleArg::Ai => ClassTag::AiDag,
            EnsembleArg::Aii => ClassTag::AiiDag,
            EnsembleArg::Poisson => ClassTag::PoissonGauss,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnfoldArg {
    None,
    EdgeOnly,
    EdgeAndPoissonBulk,
}

#[derive(Args)]
struct RunArgs {
    /// Start from a TOML config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    /// Matrix size N (the self-dual class builds 2N x 2N matrices).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ellipticity parameter, eGinUE only.
    #[arg(long)]
    tau: Option<f64>,
    /// Worker threads (default: all cores; RMT2D_WORKERS overrides).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    unfold: Option<UnfoldArg>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Rows in radial_density.csv (the histogram itself is much finer).
    #[arg(long, default_value_t = 512)]
    density_rows: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    GinueDensity,
    AiDensity,
    GinueNn,
    GinueNnn,
    PoissonNn,
    PoissonNnn,
    Surmise,
    SurmiseMarginal,
    GueSurmise,
    HermitianLimit,
    Pentadiagonal,
    EdgeGap,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Conditional,
    Unconditional,
}

#[derive(Clone, Copy, ValueEnum)]
enum GueKindArg {
    Consecutive,
    Nn,
    ConditionalNn,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Radial,
    Angular,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(value_enum)]
    curve: CurveArg,
    /// Matrix size for finite-size curves.
    #[arg(long)]
    n: Option<usize>,
    /// Product truncation order of the Ginibre spacing law.
    #[arg(long, default_value_t = 20)]
    terms: usize,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    which: Option<GueKindArg>,
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    /// Signed distance of the conditioned eigenvalue from the edge.
    #[arg(long)]
    d: Option<f64>,
    /// Grid resolution (1D points, or per axis for 2D curves).
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKindArg {
    Ratio2d,
    Marginal,
    Spacing,
    SmallSLoglog,
    DensityRadial,
    Analytic,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKindArg,
    /// Input CSV (from `run` or `analytic`).
    #[arg(long)]
    input: PathBuf,
    /// Analytic overlay CSV (x,value); may repeat.
    #[arg(long)]
    overlay: Vec<PathBuf>,
    /// Region filter for run outputs.
    #[arg(long, default_value = "bulk")]
    region: String,
    /// Marginal axis selector (radial|angular) for marginal plots.
    #[arg(long, default_value = "radial")]
    which: String,
    #[arg(long)]
    title: Option<String>,
    /// Draw a power-law guide line with this slope on log-log plots.
    #[arg(long)]
    guide_slope: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// Process-level error with its exit code.
enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<rmt2d::harness::HarnessError> for CliError {
    fn from(e: rmt2d::harness::HarnessError) -> Self {
        use rmt2d::harness::HarnessError as H;
        match e {
            H::InvalidConfig(m) => CliError::Usage(m),
            H::Io(m) => CliError::Io(m.to_string()),
            H::Archive(m) => CliError::Io(m.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<rmt2d::analytic::AnalyticError> for CliError {
    fn from(e: rmt2d::analytic::AnalyticError) -> Self {
        use rmt2d::analytic::AnalyticError as A;
        match e {
            A::Domain(m) => CliError::Usage(m.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<rmt2d::stats::StatError> for CliError {
    fn from(e: rmt2d::stats::StatError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Plot(args) => plot::cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Usage(format!("config parse error: {e}")))?
        }
        None => {
            let ensemble = args
                .ensemble
                .ok_or_else(|| CliError::Usage("--ensemble is required without --config".into()))?;
            let n = args.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
            let samples =
                args.samples.ok_or_else(|| CliError::Usage("--samples is required".into()))?;
            let seed = args.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
            ExperimentConfig::new(ensemble.tag(), n, samples, seed)
        }
    };
    if let Some(e) = args.ensemble {
        config.class_tag = e.tag();
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(s) = args.samples {
        config.samples = s;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.tau {
        config.tau = Some(t);
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(c) = args.checkpoint_every {
        config.checkpoint_every = c;
    }
    config.unfold = match args.unfold {
        Some(UnfoldArg::None) => UnfoldPolicy::None,
        Some(UnfoldArg::EdgeOnly) => UnfoldPolicy::EdgeOnly,
        Some(UnfoldArg::EdgeAndPoissonBulk) => UnfoldPolicy::EdgeAndPoissonBulk,
        None => {
            // the Poisson cloud has no flat bulk, so unfold it by default
            if config.class_tag == ClassTag::PoissonGauss {
                UnfoldPolicy::EdgeAndPoissonBulk
            } else {
                config.unfold
            }
        }
    };
    config.output_dir = Some(args.out.clone());
    if config.retention == SpectraRetention::Replay {
        // spectra fit in memory at command-line scale; skip the second solve
        config.retention = SpectraRetention::InMemory;
    }
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out)?;
    let output = rmt2d::harness::run(&config)?;
    output::write_run_outputs(&args.out, &config, &output, args.density_rows)
}

fn cmd_analytic(args: AnalyticArgs) -> Result<(), CliError> {
    output::write_analytic_curve(&args)
}
