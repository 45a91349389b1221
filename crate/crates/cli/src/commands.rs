use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use smoothmax::applications::{
    discretize, mcsp, rate_latency, service_bounds, ServiceOptions, INPUT_CURVE, INPUT_CURVE_T_MAX,
};
use smoothmax::approx::{
    contour_max, eval_d, eval_l, eval_pnorm, eval_r, eval_rk, ApproxResult, ContourParams,
};
use smoothmax::experiment::{
    default_cluster_grid, run_experiment, DeltaRule, ExperimentConfig, ExperimentKind,
};
use smoothmax::io::{
    format_boundary, format_curve_grid, format_lines, format_service_bounds, format_vector,
    parse_curve_grid, parse_vector,
};
use smoothmax::maxconv::{
    maxconv, maxconv_float, minconv, minconv_float, Algorithm, Backend, MaxConvOptions,
    MaxConvResult,
};
use smoothmax::provable::{
    bound_d, bound_l, bound_pnorm, bound_r, certified_multiplicity, certify, second_value,
    BoundRequest, BoundResult,
};
use smoothmax::tropical::{amoeba_upper_boundary, newton_polygon, tentacle_lines, trop_rays};
use smoothmax::{summarize, RealVector};

use super::{
    AlgorithmArg, AmoebaArgs, ApproxArgs, ApproxMethod, BackendArg, BoundArgs, BoundMethod,
    Command, DeltaArg, DiscretizeArgs, ExperimentArgs, ExperimentKindArg, MaxconvArgs, McspArgs,
    ServiceArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input.
    Usage(String),
    /// The numerics failed or could not be certified.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<smoothmax::Error> for CliError {
    fn from(e: smoothmax::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<RealVector> {
    parse_vector(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_grid(path: &Path) -> Result<smoothmax::applications::CurveGrid> {
    parse_curve_grid(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Summarize { file } => {
            let v = read_vector(&file)?;
            print_json(&serde_json::to_value(summarize(&v)).expect("serializable"));
            Ok(())
        }
        Command::Approx(args) => approx(args),
        Command::Certify { file } => certify_integer(&file),
        Command::Bound(args) => bound(args),
        Command::Maxconv(args) => max_convolution(args),
        Command::Mcsp(args) => consecutive_sums(args),
        Command::Servicecurve(args) => service(args),
        Command::Discretize(args) => sample_curve(args),
        Command::Amoeba(args) => amoeba(args),
        Command::Tropical { file } => tropical(&file),
        Command::Experiment(args) => experiment(args),
    }
}

fn required(value: Option<f64>, flag: &str) -> Result<f64> {
    value.ok_or_else(|| CliError::Usage(format!("this method needs --{flag}")))
}

fn method_name(m: ApproxMethod, k: usize) -> String {
    match m {
        ApproxMethod::L => "logsumexp".into(),
        ApproxMethod::R => "ratio".into(),
        ApproxMethod::Rk => format!("ratio{k}"),
        ApproxMethod::D => "difference".into(),
        ApproxMethod::Pnorm => "pnorm".into(),
        ApproxMethod::Contour => "contour".into(),
    }
}

/// The bound for `method`, either at a known multiplicity or at the worst one.
fn approx_bound(args: &ApproxArgs, v: &RealVector) -> Result<BoundResult> {
    let g2 = match args.g2 {
        Some(g) => g,
        None if v.is_integral() => 1.0,
        None => {
            return Err(CliError::Usage(
                "certifying non-integer input needs --g2".into(),
            ))
        }
    };
    let n = v.len();
    let at = |mu: usize| -> Result<BoundResult> {
        let mut req = BoundRequest::new(n, mu, g2, args.delta);
        req.alpha = Some(args.alpha);
        req.m_upper = args.m_upper;
        Ok(match args.method {
            ApproxMethod::L => bound_l(&req)?,
            ApproxMethod::R => bound_r(&req)?,
            ApproxMethod::D => bound_d(&req)?,
            ApproxMethod::Pnorm => bound_pnorm(&req)?,
            ApproxMethod::Rk | ApproxMethod::Contour => {
                return Err(CliError::Usage(
                    "--certify supports the l, r, d and pnorm methods".into(),
                ))
            }
        })
    };
    match args.mu {
        Some(mu) => at(mu),
        // Every bound is monotone in μ, so one of the extremes is the worst case.
        None => {
            let (low, high) = (at(1)?, at(n)?);
            Ok(if high.t_min > low.t_min { high } else { low })
        }
    }
}

fn approx(args: ApproxArgs) -> Result<()> {
    let v = read_vector(&args.file)?;
    let mut result: ApproxResult = match args.method {
        ApproxMethod::L => eval_l(&v, required(args.t, "t")?)?,
        ApproxMethod::R => eval_r(&v, required(args.t, "t")?)?,
        ApproxMethod::Rk => eval_rk(&v, required(args.t, "t")?, args.k)?,
        ApproxMethod::D => eval_d(&v, required(args.t, "t")?, args.alpha)?,
        ApproxMethod::Pnorm => eval_pnorm(&v, required(args.p, "p")?)?,
        ApproxMethod::Contour => contour_max(
            &v,
            ContourParams {
                k: args.k,
                radius: args.radius,
                nodes: args.nodes,
            },
        )?,
    };
    let mut error_bound = match args.method {
        // 0 <= L - M <= log_t(n) for every vector
        ApproxMethod::L => Some((v.len() as f64).ln() / result.t.ln()),
        _ => None,
    };
    if args.certify {
        let bound = approx_bound(&args, &v)?;
        result = certify(result, &bound, args.delta);
        if result.certified {
            error_bound = Some(error_bound.map_or(args.delta, |e| e.min(args.delta)));
        }
    }
    print_json(&json!({
        "method": method_name(args.method, args.k),
        "value": result.value,
        "t": result.t,
        "certified": result.certified,
        "error_bound": error_bound,
    }));
    if args.certify && !result.certified {
        return Err(CliError::Numerical(format!(
            "t = {} does not reach the certified threshold",
            result.t
        )));
    }
    Ok(())
}

fn certify_integer(file: &Path) -> Result<()> {
    let v = read_vector(file)?;
    let (max, multiplicity) = certified_multiplicity(&v)?;
    let second = if v.max() > v.min() {
        Some(second_value(&v)?)
    } else {
        None
    };
    print_json(&json!({
        "max": max,
        "multiplicity": multiplicity,
        "second_value": second,
    }));
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    let mut req = BoundRequest::new(args.n, args.mu, args.g2, args.delta);
    req.alpha = args.alpha;
    req.m_upper = args.m_upper;
    let result = match args.method {
        BoundMethod::L => bound_l(&req)?,
        BoundMethod::R => bound_r(&req)?,
        BoundMethod::D => bound_d(&req)?,
        BoundMethod::Pnorm => bound_pnorm(&req)?,
    };
    print_json(&serde_json::to_value(result).expect("serializable"));
    Ok(())
}

fn max_convolution(args: MaxconvArgs) -> Result<()> {
    let a = read_vector(&args.a)?;
    let b = read_vector(&args.b)?;
    let algorithm = match args.algorithm {
        AlgorithmArg::L => Algorithm::LogSumExp,
        AlgorithmArg::D => Algorithm::Difference,
    };
    let opts = MaxConvOptions {
        t_star: args.t,
        alpha_star: args.alpha,
        backend: args.backend.map(|b| match b {
            BackendArg::Fft => Backend::FftFloat,
            BackendArg::Exact => Backend::ExactInt,
        }),
        rounding: None,
    };
    let integral = a.is_integral() && b.is_integral();
    let result: MaxConvResult = match (integral, args.min) {
        (true, false) => maxconv(&a, &b, algorithm, &opts)?,
        (true, true) => minconv(&a, &b, algorithm, &opts)?,
        (false, false) => maxconv_float(&a, &b, algorithm, &opts)?,
        (false, true) => minconv_float(&a, &b, algorithm, &opts)?,
    };
    if args.certify && !result.certified {
        return Err(CliError::Numerical(
            "some coefficients could not be certified; raise --t or use --backend exact".into(),
        ));
    }
    if args.json {
        let error_bound = if result.certified {
            0.0
        } else {
            result.raw_errors.iter().copied().fold(0.0, f64::max)
        };
        print_json(&json!({
            "method": match algorithm {
                Algorithm::LogSumExp => "logsumexp",
                Algorithm::Difference => "difference",
            },
            "value": result.coefficients,
            "t": result.plan.t_star,
            "certified": result.certified,
            "error_bound": error_bound,
        }));
    } else {
        print!("{}", format_vector(&RealVector::new(result.coefficients)?));
    }
    Ok(())
}

fn consecutive_sums(args: McspArgs) -> Result<()> {
    let v = read_vector(&args.file)?;
    let r = mcsp(&v, args.log_t.map(f64::exp))?;
    if args.json {
        print_json(&json!({
            "method": "mcsp",
            "value": r.sums,
            "t": args.log_t.map(f64::exp),
            "certified": r.exact,
            "error_bound": r.errors.iter().copied().fold(0.0, f64::max),
        }));
    } else {
        print!("{}", format_vector(&RealVector::new(r.sums)?));
    }
    Ok(())
}

fn service(args: ServiceArgs) -> Result<()> {
    let input = read_grid(&args.r)?;
    let beta = read_grid(&args.beta)?;
    let gamma = read_grid(&args.gamma)?;
    let opts = ServiceOptions {
        t: args.t,
        alpha: args.alpha,
    };
    let bounds = service_bounds(&input, &beta, &gamma, &opts)?;
    emit(&format_service_bounds(&bounds), args.out.as_ref())
}

fn sample_curve(args: DiscretizeArgs) -> Result<()> {
    let (coeffs, default_t_max) = if args.input_curve {
        (INPUT_CURVE.to_vec(), Some(INPUT_CURVE_T_MAX))
    } else {
        (args.coeffs.clone(), None)
    };
    let t_max = args
        .t_max
        .or(default_t_max)
        .ok_or_else(|| CliError::Usage("--t-max is required".into()))?;
    let grid = match &args.rate_latency {
        Some((rate, latency)) => rate_latency(&discretize(&[0.0], t_max, args.n)?, *rate, *latency),
        None if coeffs.is_empty() => {
            return Err(CliError::Usage(
                "give --coeffs, --input-curve or --rate-latency".into(),
            ))
        }
        None => discretize(&coeffs, t_max, args.n)?,
    };
    emit(&format_curve_grid(&grid), args.out.as_ref())
}

fn amoeba(args: AmoebaArgs) -> Result<()> {
    let v = read_vector(&args.file)?;
    let points = amoeba_upper_boundary(&v, args.umin, args.umax, args.samples)?;
    if let Some(path) = &args.lines {
        emit(&format_lines(&tentacle_lines(&v)?), Some(path))?;
    }
    emit(&format_boundary(&points), args.out.as_ref())
}

fn tropical(file: &Path) -> Result<()> {
    let v = read_vector(file)?;
    let polygon = newton_polygon(&v)?;
    let rays = if polygon.degenerate {
        None
    } else {
        Some(trop_rays(&v)?)
    };
    print_json(&json!({
        "newton_polygon": polygon,
        "rays": rays,
        "tentacles": tentacle_lines(&v)?,
    }));
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let kind = match args.kind {
        ExperimentKindArg::Integer => ExperimentKind::IntegerHeatmap { max: args.max },
        ExperimentKindArg::Uniform => ExperimentKind::UniformHeatmap {
            delta: match args.delta {
                DeltaArg::One => DeltaRule::One,
                DeltaArg::Exp1 => DeltaRule::Exp1,
                DeltaArg::InvN => DeltaRule::InvN,
                DeltaArg::OneHundredth => DeltaRule::OneHundredth,
            },
        },
        ExperimentKindArg::Cluster => {
            let or_default = |v: Vec<f64>| {
                if v.is_empty() {
                    default_cluster_grid()
                } else {
                    v
                }
            };
            ExperimentKind::Cluster {
                gaps: or_default(args.gaps),
                epsilons: or_default(args.epsilons),
            }
        }
    };
    let cfg = ExperimentConfig {
        kind,
        n_max: args.nmax,
        reps: args.reps,
        seed: args.seed,
    };
    let table = run_experiment(&cfg)?;
    emit(&table.to_csv(), args.out.as_ref())
}
