//! Monte Carlo regret estimation and log-log slope fits across market sizes.
//!
//! Regret of a policy is `1 - E[revenue] / J^D` where `J^D` is the optimal
//! value of the deterministic relaxation. Every `(n, replication)` cell gets
//! its own seed derived from the root seed, so different policies evaluated
//! with the same root seed see paired randomness.

use std::io::Write;

use rayon::prelude::*;

use crate::demand::ProblemInstance;
use crate::error::{Error, Result};
use crate::market_sim::{run_policy, PolicyDiagnostics, SimulationTrace};
use crate::policies::PolicySpec;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at market size `n` under `root`.
pub fn cell_seed(root: u64, n: u64, rep: u64) -> u64 {
    mix(mix(mix(root) ^ n) ^ rep)
}

/// Runs `replications` seasons of `spec` and maps each finished season
/// through `inspect`. The policy is built against `policy_view` (what the
/// seller is told) and simulated against `truth`. Results come back in
/// replication order whatever the thread count.
pub fn run_replications<T, F>(
    truth: &ProblemInstance,
    policy_view: &ProblemInstance,
    spec: &PolicySpec,
    replications: u64,
    root_seed: u64,
    inspect: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SimulationTrace, &PolicyDiagnostics) -> T + Sync,
{
    // fail on bad parameters before spinning up the pool
    spec.build(policy_view)?;
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut policy = spec.build(policy_view)?;
            let seed = cell_seed(root_seed, truth.market_size, rep);
            let trace = run_policy(truth, policy.as_mut(), seed)?;
            Ok(inspect(&trace, &policy.diagnostics()))
        })
        .collect()
}

/// Regret estimate for one `(instance, policy)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretEstimate {
    pub market_size: u64,
    pub replications: u64,
    /// Deterministic benchmark `J^D_n`.
    pub benchmark: f64,
    pub mean_revenue: f64,
    /// Standard error of `mean_revenue`.
    pub revenue_se: f64,
    pub mean_regret: f64,
    /// `revenue_se / J^D_n`: the benchmark is deterministic.
    pub std_error: f64,
}

impl RegretEstimate {
    /// Builds the estimate from per-replication revenues.
    pub fn from_revenues(market_size: u64, benchmark: f64, revenues: &[f64]) -> Result<Self> {
        if !(benchmark > 0.0) {
            return Err(Error::UndefinedRegret);
        }
        let (mean, se) = mean_and_se(revenues);
        Ok(Self {
            market_size,
            replications: revenues.len() as u64,
            benchmark,
            mean_revenue: mean,
            revenue_se: se,
            mean_regret: 1.0 - mean / benchmark,
            std_error: se / benchmark,
        })
    }

    /// Mean revenue does not exceed the benchmark by more than `k` standard errors.
    pub fn respects_benchmark(&self, k: f64) -> bool {
        self.mean_revenue <= self.benchmark + k * self.revenue_se
    }
}

/// Sample mean and its standard error `sd / sqrt(len)`.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// Estimates the regret of `spec` on `instance`.
pub fn estimate_regret(
    instance: &ProblemInstance,
    spec: &PolicySpec,
    replications: u64,
    seed: u64,
) -> Result<RegretEstimate> {
    estimate_regret_under(instance, instance, spec, replications, seed)
}

/// Regret of a policy built for `policy_view` when demand actually follows `truth`.
pub fn estimate_regret_under(
    truth: &ProblemInstance,
    policy_view: &ProblemInstance,
    spec: &PolicySpec,
    replications: u64,
    seed: u64,
) -> Result<RegretEstimate> {
    if replications < 2 {
        return Err(Error::domain("regret estimation needs at least 2 replications"));
    }
    let benchmark = truth.deterministic_value();
    if !(benchmark > 0.0) {
        return Err(Error::UndefinedRegret);
    }
    let revenues = run_replications(truth, policy_view, spec, replications, seed, |t, _| t.terminal_revenue)?;
    RegretEstimate::from_revenues(truth.market_size, benchmark, &revenues)
}

/// Ordinary least squares fit of `ln(regret)` on `ln(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `y = intercept + slope·x` by least squares. Needs two distinct `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LogLogFit> {
    if points.len() < 2 {
        return None;
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Regret across market sizes plus the log-log fit.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretReport {
    pub policy: String,
    pub per_n: Vec<RegretEstimate>,
    pub fit: Option<LogLogFit>,
    /// Market sizes left out of the fit because their mean regret was not positive.
    pub excluded: Vec<u64>,
}

impl RegretReport {
    /// Fits the log-log line through the positive-regret points of `per_n`.
    pub fn from_estimates(policy: impl Into<String>, per_n: Vec<RegretEstimate>) -> Self {
        let mut excluded = Vec::new();
        let mut points = Vec::new();
        for e in &per_n {
            if e.mean_regret > 0.0 {
                points.push(((e.market_size as f64).ln(), e.mean_regret.ln()));
            } else {
                log::warn!(
                    "n={}: mean regret {} is not positive; left out of the log-log fit",
                    e.market_size,
                    e.mean_regret
                );
                excluded.push(e.market_size);
            }
        }
        Self {
            policy: policy.into(),
            per_n,
            fit: fit_line(&points),
            excluded,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Rows `n,policy,replications,mean_regret,std_error`.
    pub fn write_regret_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for e in &self.per_n {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.market_size, self.policy, e.replications, e.mean_regret, e.std_error
            )?;
        }
        Ok(())
    }

    /// Row `policy,slope,intercept,r_squared` (empty fields without a fit).
    pub fn write_slope_row<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        match self.fit {
            Some(f) => writeln!(out, "{},{},{},{}", self.policy, f.slope, f.intercept, f.r_squared),
            None => writeln!(out, "{},,,", self.policy),
        }
    }
}

pub const REGRET_CSV_COLUMNS: &str = "n,policy,replications,mean_regret,std_error";
pub const SLOPE_CSV_COLUMNS: &str = "policy,slope,intercept,r_squared";

/// Estimates regret of `spec` at every market size in `market_sizes`.
pub fn sweep(
    template: &ProblemInstance,
    spec: &PolicySpec,
    market_sizes: &[u64],
    replications: u64,
    seed: u64,
) -> Result<RegretReport> {
    let mut distinct = market_sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::domain("a sweep needs at least 3 distinct market sizes"));
    }
    let per_n = market_sizes
        .iter()
        .map(|&n| estimate_regret(&template.with_market_size(n), spec, replications, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegretReport::from_estimates(spec.name(), per_n))
}
