mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Smooth maximum approximations, certified recovery and max-convolution.
#[derive(Debug, Parser)]
#[command(name = "smoothmax", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact summary of a vector (max, multiplicities, gaps) as JSON.
    Summarize { file: PathBuf },
    /// Evaluate one smooth approximation of max(v).
    Approx(ApproxArgs),
    /// Certified max, its multiplicity and the second value of an integer vector.
    Certify { file: PathBuf },
    /// Convergence bound for a method.
    Bound(BoundArgs),
    /// Max- or min-plus convolution of two vectors.
    Maxconv(MaxconvArgs),
    /// Best sums of consecutive entries, by window length.
    Mcsp(McspArgs),
    /// Lower and upper output envelopes from service curves.
    Servicecurve(ServiceArgs),
    /// Sample a polynomial or rate-latency curve on a uniform grid.
    Discretize(DiscretizeArgs),
    /// Upper boundary of the amoeba and its tentacle lines.
    Amoeba(AmoebaArgs),
    /// Newton polygon, tropical rays and tentacles as JSON.
    Tropical { file: PathBuf },
    /// Seeded comparisons of LogSumExp and the ratio approximation.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApproxMethod {
    L,
    R,
    Rk,
    D,
    Pnorm,
    Contour,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    method: ApproxMethod,
    /// Evaluation point (required except for pnorm and contour).
    #[arg(long)]
    t: Option<f64>,
    /// Derivative order for rk and contour.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Exponent for pnorm.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Check the evaluation point against a convergence bound; exit 2 if it falls short.
    #[arg(long)]
    certify: bool,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Known multiplicity of the maximum (otherwise the worst case is assumed).
    #[arg(long)]
    mu: Option<usize>,
    /// Known lower bound on the top gap (needed for non-integer input).
    #[arg(long)]
    g2: Option<f64>,
    /// Upper estimate of the maximum, for pnorm.
    #[arg(long)]
    m_upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundMethod {
    L,
    R,
    D,
    Pnorm,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    method: BoundMethod,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: usize,
    #[arg(long, default_value_t = 1.0)]
    g2: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    m_upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    #[value(name = "L")]
    L,
    #[value(name = "D")]
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Fft,
    Exact,
}

#[derive(Debug, Args)]
struct MaxconvArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum, default_value = "L")]
    algorithm: AlgorithmArg,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Force a backend; by default the floating path falls back to the exact one.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Min-plus instead of max-plus.
    #[arg(long)]
    min: bool,
    /// Exit 2 unless every coefficient is proven exact.
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct McspArgs {
    file: PathBuf,
    /// Natural log of the base for real-valued input.
    #[arg(long)]
    log_t: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ServiceArgs {
    #[arg(long)]
    r: PathBuf,
    #[arg(long)]
    beta: PathBuf,
    #[arg(long)]
    gamma: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base of the pipeline; defaults to (N-1)^25.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1.01)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct DiscretizeArgs {
    /// Polynomial coefficients, lowest degree first.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "input_curve"
    )]
    coeffs: Vec<f64>,
    /// Use the built-in degree-7 input curve.
    #[arg(long)]
    input_curve: bool,
    /// Sample max(0, rate·(T - latency)) instead, given as RATE,LATENCY.
    #[arg(long, value_parser = parse_pair)]
    rate_latency: Option<(f64, f64)>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AmoebaArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    umin: f64,
    #[arg(long, allow_hyphen_values = true)]
    umax: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the tentacle lines (integer input only).
    #[arg(long)]
    lines: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKindArg {
    Integer,
    Uniform,
    Cluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DeltaArg {
    One,
    Exp1,
    InvN,
    OneHundredth,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKindArg,
    /// Largest entry of the integer heatmap.
    #[arg(long = "M", default_value_t = 50)]
    max: i64,
    #[arg(long, default_value_t = 50)]
    nmax: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance rule of the uniform heatmap.
    #[arg(long, value_enum, default_value = "one")]
    delta: DeltaArg,
    /// Cluster gaps (default 0.05, 0.10, ..., 1).
    #[arg(long, value_delimiter = ',')]
    gaps: Vec<f64>,
    /// Cluster noise half-widths (default 0.05, 0.10, ..., 1).
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected RATE,LATENCY, got `{text}`"))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smoothmax: {e}");
            ExitCode::from(e.code())
        }
    }
}
