//! The one-parameter linear family `λ(p; z) = 1/2 + z − z·p` on `[1/2, 3/2]`
//! used for lower bounds, the pathwise Poisson KL divergence, and empirical
//! checks of the two inequalities the bound is built from.
//!
//! Every member of the family sells at rate 1/2 at the price 1, so a seller
//! who sits at that price learns nothing about `z`.

use std::io::Write;

use crate::demand::{DemandModel, Price, ProblemInstance};
use crate::error::{Error, Result};
use crate::market_sim::SimulationTrace;
use crate::policies::PolicySpec;
use crate::regret::{mean_and_se, run_replications, RegretEstimate};

pub const Z0: f64 = 0.5;
pub const Z_MIN: f64 = 1.0 / 3.0;
pub const Z_MAX: f64 = 2.0 / 3.0;
pub const INVENTORY: f64 = 2.0;
pub const HORIZON: f64 = 1.0;

/// Alternative parameter `z₁ = 1/2 + 1/(4·n^{1/4})`.
pub fn z1(n: f64) -> f64 {
    Z0 + 0.25 * n.powf(-0.25)
}

fn check_z(z: f64) -> Result<()> {
    if (Z_MIN - 1e-12..=Z_MAX + 1e-12).contains(&z) {
        Ok(())
    } else {
        Err(Error::domain(format!("z = {z} is outside [1/3, 2/3]")))
    }
}

/// One member of the family together with its fixed inventory and horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCaseInstance {
    pub z: f64,
}

impl WorstCaseInstance {
    pub fn new(z: f64) -> Result<Self> {
        check_z(z)?;
        Ok(Self { z })
    }

    pub fn rate(&self, p: f64) -> f64 {
        0.5 + self.z * (1.0 - p)
    }

    pub fn model(&self) -> DemandModel {
        DemandModel::worst_case(self.z).expect("z was range checked")
    }

    /// Problem instance with `x = 2`, `T = 1` at market size `n`.
    pub fn instance(&self, market_size: u64) -> Result<ProblemInstance> {
        ProblemInstance::new(self.model(), INVENTORY, HORIZON, market_size)
    }
}

/// Closed-form optimal price `(1 + 2z)/(4z)`.
pub fn pd_of_z(z: f64) -> Result<f64> {
    check_z(z)?;
    Ok((1.0 + 2.0 * z) / (4.0 * z))
}

/// `1/(6912·√n)`.
pub fn regret_lower_bound(n: f64) -> f64 {
    1.0 / (6912.0 * n.sqrt())
}

/// Pathwise divergence of one trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathDivergence {
    /// Nats; `+∞` when `infinite` is set.
    pub value: f64,
    /// Some priced segment had `λ_z = 0 < λ₀`.
    pub infinite: bool,
}

/// `n·Σ duration·[λ₀ ln(λ₀/λ_z) + λ_z − λ₀]` over the priced segments of
/// `trace`, with `λ₀ = λ(p; z0)` and `λ_z = λ(p; z)`. Cutoff segments add 0.
pub fn kl_path(trace: &SimulationTrace, n: f64, z0: f64, z: f64) -> Result<PathDivergence> {
    let (f0, fz) = (WorstCaseInstance { z: z0 }, WorstCaseInstance { z });
    let mut total = 0.0;
    let mut infinite = false;
    for seg in &trace.segments {
        let p = match seg.price {
            Price::Cutoff => continue,
            Price::Posted(p) => p,
        };
        if !(0.5 - 1e-9..=1.5 + 1e-9).contains(&p) {
            return Err(Error::domain(format!("price {p} is outside [1/2, 3/2]")));
        }
        let (l0, lz) = (f0.rate(p), fz.rate(p));
        if l0 < 0.0 || lz < 0.0 {
            return Err(Error::domain(format!("negative rate at price {p}")));
        }
        let rate = if l0 == 0.0 {
            lz
        } else if lz == 0.0 {
            infinite = true;
            f64::INFINITY
        } else {
            l0 * (l0 / lz).ln() + lz - l0
        };
        if seg.duration > 0.0 {
            total += seg.duration * rate;
        }
    }
    Ok(PathDivergence {
        value: if infinite { f64::INFINITY } else { n * total },
        infinite,
    })
}

/// Monte Carlo evidence for the divergence bound and the two-point regret
/// bound of one policy at one market size.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub policy: String,
    pub market_size: u64,
    pub k_hat: f64,
    pub k_se: f64,
    pub regret_z0: RegretEstimate,
    pub regret_z1: RegretEstimate,
    /// `K̂`.
    pub divergence_lhs: f64,
    /// `24·n·(z₀ − z₁)²·R̂(z₀)`.
    pub divergence_rhs: f64,
    pub divergence_pass: bool,
    /// `R̂(z₀) + R̂(z₁)`.
    pub two_point_lhs: f64,
    /// `e^{−K̂}/(6912·√n)`.
    pub two_point_rhs: f64,
    pub two_point_pass: bool,
}

impl LowerBoundReport {
    pub fn pass(&self) -> bool {
        self.divergence_pass && self.two_point_pass
    }

    pub fn write_row<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.policy,
            self.market_size,
            self.k_hat,
            self.k_se,
            self.regret_z0.mean_regret,
            self.regret_z1.mean_regret,
            self.divergence_lhs,
            self.divergence_rhs,
            self.two_point_lhs,
            self.two_point_rhs,
            self.pass()
        )
    }
}

pub const LOWER_BOUND_CSV_COLUMNS: &str =
    "policy,n,K_hat,K_se,R_hat_z0,R_hat_z1,divergence_lhs,divergence_rhs,two_point_lhs,two_point_rhs,pass";

/// Runs `spec`, built for the `z₀` member, under both `z₀` and `z₁`, and tests
/// both inequalities with a slack of `se_multiple` combined standard errors.
pub fn check_two_point(
    spec: &PolicySpec,
    market_size: u64,
    replications: u64,
    seed: u64,
    se_multiple: f64,
) -> Result<LowerBoundReport> {
    if replications < 2 {
        return Err(Error::domain("lower-bound checks need at least 2 replications"));
    }
    let n = market_size as f64;
    let alt = z1(n);
    let base = WorstCaseInstance::new(Z0)?.instance(market_size)?;
    let other = WorstCaseInstance::new(alt)?.instance(market_size)?;

    let under_z0 = run_replications(&base, &base, spec, replications, seed, |t, _| {
        (t.terminal_revenue, kl_path(t, n, Z0, alt))
    })?;
    let mut revenues = Vec::with_capacity(under_z0.len());
    let mut divergences = Vec::with_capacity(under_z0.len());
    for (revenue, kl) in under_z0 {
        revenues.push(revenue);
        divergences.push(kl?.value);
    }
    let regret_z0 = RegretEstimate::from_revenues(market_size, base.deterministic_value(), &revenues)?;
    let (k_hat, k_se) = mean_and_se(&divergences);

    let revenues_z1 = run_replications(&other, &base, spec, replications, seed, |t, _| t.terminal_revenue)?;
    let regret_z1 = RegretEstimate::from_revenues(market_size, other.deterministic_value(), &revenues_z1)?;

    let coeff = 24.0 * n * (Z0 - alt).powi(2);
    let divergence_rhs = coeff * regret_z0.mean_regret;
    let divergence_slack = se_multiple * (k_se.powi(2) + (coeff * regret_z0.std_error).powi(2)).sqrt();
    let divergence_pass = k_hat <= divergence_rhs + divergence_slack;

    let two_point_lhs = regret_z0.mean_regret + regret_z1.mean_regret;
    let two_point_rhs = regret_lower_bound(n) * (-k_hat).exp();
    let two_point_slack = se_multiple * (regret_z0.std_error.powi(2) + regret_z1.std_error.powi(2)).sqrt();
    let two_point_pass = two_point_lhs >= two_point_rhs - two_point_slack;

    Ok(LowerBoundReport {
        policy: spec.name().to_string(),
        market_size,
        k_hat,
        k_se,
        regret_z0,
        regret_z1,
        divergence_lhs: k_hat,
        divergence_rhs,
        divergence_pass,
        two_point_lhs,
        two_point_rhs,
        two_point_pass,
    })
}
