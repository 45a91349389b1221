//! Seeded comparisons of LogSumExp against the ratio approximation.
//!
//! Every subexperiment draws from its own ChaCha8 stream: the generator is
//! seeded with the experiment seed and switched to stream
//! `(a << 42) | (b << 21) | rep`, where `(a, b)` is `(n, μ)` for the heatmaps
//! and the grid indices `(g, ε)` for the cluster study. Results therefore do
//! not depend on thread count or scheduling.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::{eval_l, eval_r, ratio_at};
use crate::error::{Error, Result};
use crate::vector::RealVector;

/// First point of the t* search schedule.
pub const TSTAR_START: f64 = 1.0 + 1e-3;
/// The search gives up beyond this `t`.
pub const TSTAR_BUDGET: f64 = 1e9;
const TSTAR_RESOLUTION: f64 = 1e-3;
const STREAM_FIELD: u32 = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TStarMethod {
    LogSumExp,
    Ratio,
}

/// Smallest `t` on the search schedule at which the approximation is within
/// `delta` of `max(v)`.
///
/// The schedule doubles from [`TSTAR_START`] until the tolerance is met, then
/// bisects the last bracket down to a relative width of `1e-3`. Both errors
/// shrink monotonically in `t`, so the bracket always contains the threshold.
pub fn find_tstar(v: &RealVector, method: TStarMethod, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be > 0, got {delta}")));
    }
    let target = v.max();
    let within = |t: f64| -> Result<bool> {
        let r = match method {
            TStarMethod::LogSumExp => eval_l(v, t)?,
            TStarMethod::Ratio => eval_r(v, t)?,
        };
        Ok((r.value - target).abs() < delta)
    };
    let mut hi = TSTAR_START;
    if within(hi)? {
        return Ok(hi);
    }
    let mut lo;
    loop {
        lo = hi;
        hi *= 2.0;
        if hi > TSTAR_BUDGET {
            return Err(Error::BudgetExhausted {
                limit: TSTAR_BUDGET,
            });
        }
        if within(hi)? {
            break;
        }
    }
    while hi - lo > TSTAR_RESOLUTION * hi {
        let mid = 0.5 * (lo + hi);
        if within(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Absolute tolerances for the uniform heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaRule {
    One,
    Exp1,
    InvN,
    OneHundredth,
}

impl DeltaRule {
    pub fn delta(self, n: usize) -> f64 {
        match self {
            DeltaRule::One => 1.0,
            DeltaRule::Exp1 => std::f64::consts::E,
            DeltaRule::InvN => 1.0 / n as f64,
            DeltaRule::OneHundredth => 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    /// `μ` copies of `max` plus `n - μ` integers drawn from `[1, max - 1]`.
    IntegerHeatmap { max: i64 },
    /// `μ` ones plus `n - μ` uniform draws scaled by `(n - 1)/n`.
    UniformHeatmap { delta: DeltaRule },
    /// Five true values with top gap `g`, each measured 20 times with
    /// uniform noise of half-width `ε`.
    Cluster { gaps: Vec<f64>, epsilons: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_max: usize,
    pub reps: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n_max: 50,
            reps: 10,
            seed: 42,
        }
    }

    fn validate(&self) -> Result<()> {
        let limit = 1usize << STREAM_FIELD;
        if self.reps == 0 || self.reps >= limit {
            return Err(Error::param("reps", format!("must be in 1..{limit}")));
        }
        if self.n_max == 0 || self.n_max >= limit {
            return Err(Error::param("n_max", format!("must be in 1..{limit}")));
        }
        match &self.kind {
            ExperimentKind::IntegerHeatmap { max } if *max < 2 => Err(Error::param(
                "max",
                "needs room for smaller entries (max >= 2)",
            )),
            ExperimentKind::Cluster { gaps, epsilons } => {
                if gaps.is_empty() || epsilons.is_empty() {
                    return Err(Error::param(
                        "grid",
                        "gap and epsilon lists must be nonempty",
                    ));
                }
                if let Some(g) = gaps.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
                    return Err(Error::param("grid", format!("gap {g} is outside (0, 1]")));
                }
                if let Some(e) = epsilons.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
                    return Err(Error::param(
                        "grid",
                        format!("epsilon {e} must be finite and > 0"),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Default cluster grid: `g` and `ε` both in `0.05, 0.10, …, 1.0`.
pub fn default_cluster_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

/// One subexperiment of a heatmap cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStarRecord {
    pub n: usize,
    pub mu: usize,
    pub t_star_l: f64,
    pub t_star_r: f64,
    /// Either search ran out of budget and reports [`TSTAR_BUDGET`].
    pub censored: bool,
}

impl TStarRecord {
    pub fn difference(&self) -> f64 {
        self.t_star_l - self.t_star_r
    }
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        out
    }
}

fn stream(seed: u64, a: usize, b: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((a as u64) << (2 * STREAM_FIELD)) | ((b as u64) << STREAM_FIELD) | rep as u64);
    rng
}

/// `sign(x)·ln(1 + |x|)`, which is `ln(1 + x)` whenever `x >= 0`.
fn signed_log1p(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

fn search_or_censor(v: &RealVector, method: TStarMethod, delta: f64) -> Result<(f64, bool)> {
    match find_tstar(v, method, delta) {
        Ok(t) => Ok((t, false)),
        Err(Error::BudgetExhausted { limit }) => Ok((limit, true)),
        Err(e) => Err(e),
    }
}

fn record(v: &RealVector, n: usize, mu: usize, delta: f64) -> Result<TStarRecord> {
    let (t_star_l, cl) = search_or_censor(v, TStarMethod::LogSumExp, delta)?;
    let (t_star_r, cr) = search_or_censor(v, TStarMethod::Ratio, delta)?;
    Ok(TStarRecord {
        n,
        mu,
        t_star_l,
        t_star_r,
        censored: cl || cr,
    })
}

fn heatmap_cells(n_max: usize) -> Vec<(usize, usize)> {
    (1..=n_max)
        .flat_map(|n| (1..=n).map(move |mu| (n, mu)))
        .collect()
}

/// Every subexperiment of a heatmap, cell by cell in `(n, μ)` order.
pub fn heatmap_records(cfg: &ExperimentConfig) -> Result<Vec<Vec<TStarRecord>>> {
    cfg.validate()?;
    let sample = |n: usize, mu: usize, rng: &mut ChaCha8Rng| -> Result<(RealVector, f64)> {
        match cfg.kind {
            ExperimentKind::IntegerHeatmap { max } => {
                let entries = (0..n).map(|i| {
                    if i < mu {
                        max
                    } else {
                        rng.random_range(1..max)
                    }
                });
                Ok((RealVector::from_ints(entries)?, 1.0))
            }
            ExperimentKind::UniformHeatmap { delta } => {
                let scale = (n - 1) as f64 / n as f64;
                let entries = (0..n)
                    .map(|i| {
                        if i < mu {
                            1.0
                        } else {
                            rng.random::<f64>() * scale
                        }
                    })
                    .collect();
                Ok((RealVector::new(entries)?, delta.delta(n)))
            }
            ExperimentKind::Cluster { .. } => Err(Error::param(
                "kind",
                "the cluster study has no heatmap records",
            )),
        }
    };
    heatmap_cells(cfg.n_max)
        .par_iter()
        .map(|&(n, mu)| {
            (0..cfg.reps)
                .map(|rep| {
                    let mut rng = stream(cfg.seed, n, mu, rep);
                    let (v, delta) = sample(n, mu, &mut rng)?;
                    record(&v, n, mu, delta)
                })
                .collect()
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    sum / count as f64
}

/// Runs the configured study and returns its CSV table.
///
/// * Integer heatmap: `n, mu, t_star_l, t_star_r, statistic, censored`, the
///   statistic being the cell mean of `ln(1 + t*_L - t*_R)`.
/// * Uniform heatmap: the same columns plus `alpha`; the statistic is the
///   cell mean of `ln(α + t*_L - t*_R) - ln α` with `α = |min(t*_L - t*_R)| + 1`
///   taken over the whole experiment.
/// * Cluster: `g, epsilon, t_star, mean_error, successes`, where the ratio
///   approximation is evaluated at `t* = (4g/ε)^{1/g}`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    match &cfg.kind {
        ExperimentKind::Cluster { gaps, epsilons } => run_cluster(cfg, gaps, epsilons),
        ExperimentKind::IntegerHeatmap { .. } => {
            let records = heatmap_records(cfg)?;
            Ok(heatmap_table(&records, None))
        }
        ExperimentKind::UniformHeatmap { .. } => {
            let records = heatmap_records(cfg)?;
            let lowest = records
                .iter()
                .flatten()
                .map(TStarRecord::difference)
                .fold(f64::INFINITY, f64::min);
            Ok(heatmap_table(&records, Some(lowest.abs() + 1.0)))
        }
    }
}

fn heatmap_table(records: &[Vec<TStarRecord>], alpha: Option<f64>) -> Table {
    let mut columns = vec!["n", "mu", "t_star_l", "t_star_r", "statistic", "censored"];
    if alpha.is_some() {
        columns.push("alpha");
    }
    let rows = records
        .iter()
        .map(|cell| {
            let statistic = match alpha {
                None => mean(cell.iter().map(|r| signed_log1p(r.difference()))),
                Some(a) => mean(cell.iter().map(|r| (a + r.difference()).ln() - a.ln())),
            };
            let mut row = vec![
                cell[0].n as f64,
                cell[0].mu as f64,
                mean(cell.iter().map(|r| r.t_star_l)),
                mean(cell.iter().map(|r| r.t_star_r)),
                statistic,
                cell.iter().filter(|r| r.censored).count() as f64,
            ];
            row.extend(alpha);
            row
        })
        .collect();
    Table { columns, rows }
}

const CLUSTER_VALUES: usize = 5;
const CLUSTER_REPEATS: usize = 20;

fn cluster_sample(g: f64, eps: f64, rng: &mut ChaCha8Rng) -> RealVector {
    let mut truth = [0.0; CLUSTER_VALUES];
    for w in truth.iter_mut().take(CLUSTER_VALUES - 2) {
        *w = rng.random::<f64>() * (1.0 - g);
    }
    truth[CLUSTER_VALUES - 2] = 1.0 - g;
    truth[CLUSTER_VALUES - 1] = 1.0;
    let entries = truth
        .iter()
        .flat_map(|&w| (0..CLUSTER_REPEATS).map(move |_| w))
        .map(|w| w + eps * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    RealVector::new(entries).expect("finite samples")
}

fn run_cluster(cfg: &ExperimentConfig, gaps: &[f64], epsilons: &[f64]) -> Result<Table> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..gaps.len())
        .flat_map(|gi| (0..epsilons.len()).map(move |ei| (gi, ei)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(gi, ei)| {
            let (g, eps) = (gaps[gi], epsilons[ei]);
            let log_t = (4.0 * g / eps).ln() / g;
            let errors: Vec<f64> = (0..cfg.reps)
                .map(|rep| {
                    let mut rng = stream(cfg.seed, gi, ei, rep);
                    let v = cluster_sample(g, eps, &mut rng);
                    (1.0 - ratio_at(&v, log_t)).abs()
                })
                .collect();
            let successes = errors.iter().filter(|&&e| e < eps).count();
            vec![
                g,
                eps,
                log_t.exp(),
                mean(errors.iter().copied()),
                successes as f64,
            ]
        })
        .collect();
    Ok(Table {
        columns: vec!["g", "epsilon", "t_star", "mean_error", "successes"],
        rows,
    })
}
