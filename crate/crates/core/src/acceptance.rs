//! The acceptance suite: one function per criterion, each returning a
//! PASS/FAIL outcome with the measured numbers. Used by the `acceptance`
//! test target and by `dynprice check`.

use std::fmt;
use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::demand::{DemandModel, Price, ProblemInstance, RegularityConstants};
use crate::error::Result;
use crate::lower_bound::{check_two_point, kl_path, pd_of_z, z1, WorstCaseInstance, Z0};
use crate::market_sim::{poisson_tail_check, run_policy, MarketState, Segment, SimulationTrace};
use crate::output::{regret_csv, slope_csv};
use crate::policies::{LogMode, PolicySpec};
use crate::regret::{estimate_regret, run_replications, sweep, RegretEstimate};

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn outcome(id: u32, name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name,
        passed,
        detail,
    }
}

/// Monte Carlo sizes for the statistical criteria.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub seed: u64,
    /// Replications per regret cell.
    pub replications: u64,
    /// Runs for the frequency criteria.
    pub runs: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            replications: 1000,
            runs: 200,
        }
    }
}

/// `λ(p) = 30 − 3p` on `[0.1, 10]`, `x = 20`, `T = 1`.
pub fn linear_instance(n: u64) -> ProblemInstance {
    let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).expect("valid linear model");
    ProblemInstance::new(m, 20.0, 1.0, n).expect("valid instance")
}

/// `λ(p) = 80·e^{−0.5p}` on `[0.1, 10]`, `x = 20`, `T = 1`.
pub fn exponential_instance(n: u64) -> ProblemInstance {
    let m = DemandModel::exponential(80.0, 0.5, 0.1, 10.0).expect("valid exponential model");
    ProblemInstance::new(m, 20.0, 1.0, n).expect("valid instance")
}

/// Price of the kink of [`kinked_instance`].
pub const KINK: f64 = 5.0;

/// Piecewise-linear demand whose revenue peaks at a kink: `λ = 30 − p` up to
/// `p = 5`, then `75 − 10p` down to zero at `7.5`. Inventory `x = 30` never binds.
pub fn kinked_instance(n: u64) -> ProblemInstance {
    let knots = vec![(0.1, 29.9), (KINK, 25.0), (7.5, 0.0)];
    let constants = RegularityConstants::from_knots(&knots);
    let m = DemandModel::tabulated(knots, constants).expect("valid kinked model");
    ProblemInstance::new(m, 30.0, 1.0, n).expect("valid instance")
}

fn combined_se(a: &RegretEstimate, b: &RegretEstimate) -> f64 {
    (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

/// Closed-form benchmark prices and values.
pub fn criterion_1() -> Outcome {
    outcome(1, "closed-form benchmark", || {
        let start = Instant::now();
        let lin = linear_instance(1);
        let exp = exponential_instance(1);
        let pu = lin.demand.solve_pu();
        let jl = lin.deterministic_value();
        let pd = exp.deterministic_price();
        let je = exp.deterministic_value();
        let secs = start.elapsed().as_secs_f64();
        let ln4 = 4f64.ln();
        let ok = (pu - 5.0).abs() <= 1e-6
            && (jl - 75.0).abs() <= 1e-6
            && (pd - 2.0 * ln4).abs() <= 1e-6
            && (je - 40.0 * ln4).abs() <= 1e-6
            && secs < 1.0;
        Ok((
            ok,
            format!(
                "linear p^u={pu:.9} J^D={jl:.9}; exponential p^D={pd:.9} (2ln4={:.9}) J^D={je:.9} (40ln4={:.9}); {secs:.4}s",
                2.0 * ln4,
                40.0 * ln4
            ),
        ))
    })
}

/// Log-log regret slope of the default learning policy on both instances.
pub fn criterion_2(s: &Settings) -> Outcome {
    outcome(2, "regret slope", || {
        let sizes = [100, 1_000, 10_000, 100_000];
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, inst, target) in [
            ("linear", linear_instance(1), -0.444),
            ("exponential", exponential_instance(1), -0.465),
        ] {
            let report = sweep(&inst, &PolicySpec::dpa(), &sizes, s.replications, s.seed)?;
            let slope = report.slope().unwrap_or(f64::NAN);
            ok &= (slope - target).abs() <= 0.10;
            let regrets: Vec<String> = report.per_n.iter().map(|e| format!("{:.4}", e.mean_regret)).collect();
            parts.push(format!(
                "{label} slope={slope:.3} (target {target}) regrets=[{}]",
                regrets.join(", ")
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// clairvoyant < learning policy < single sweep at `n = 10⁵`.
pub fn criterion_3(s: &Settings) -> Outcome {
    outcome(3, "regret ordering", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, inst) in [
            ("linear", linear_instance(100_000)),
            ("exponential", exponential_instance(100_000)),
        ] {
            let c = estimate_regret(&inst, &PolicySpec::Clairvoyant, s.replications, s.seed)?;
            let d = estimate_regret(&inst, &PolicySpec::dpa(), s.replications, s.seed)?;
            let b = estimate_regret(&inst, &PolicySpec::single_phase(), s.replications, s.seed)?;
            let g1 = (d.mean_regret - c.mean_regret) / combined_se(&c, &d);
            let g2 = (b.mean_regret - d.mean_regret) / combined_se(&d, &b);
            ok &= g1 >= 2.0 && g2 >= 2.0;
            parts.push(format!(
                "{label}: clairvoyant={:.5} dpa={:.5} single_phase={:.5} gaps={g1:.1}/{g2:.1} SE",
                c.mean_regret, d.mean_regret, b.mean_regret
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

fn dpa_runs(inst: &ProblemInstance, s: &Settings) -> Result<Vec<crate::market_sim::PolicyDiagnostics>> {
    run_replications(inst, inst, &PolicySpec::dpa(), s.runs, s.seed ^ 0x5eed, |_, d| {
        d.clone()
    })
}

/// Every tested interval contains `p^D`.
pub fn criterion_4(s: &Settings) -> Outcome {
    outcome(4, "interval containment", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, inst) in [
            ("linear", linear_instance(100_000)),
            ("exponential", exponential_instance(100_000)),
        ] {
            let pd = inst.deterministic_price();
            let runs = dpa_runs(&inst, s)?;
            let tol = 1e-9 * pd.abs().max(1.0);
            let hits = runs
                .iter()
                .filter(|d| d.intervals.iter().all(|&(lo, hi)| lo - tol <= pd && pd <= hi + tol))
                .count();
            let freq = hits as f64 / runs.len() as f64;
            ok &= freq >= 0.95;
            parts.push(format!("{label}: {freq:.3}"));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// Switch to the constrained track rarely when `p^u ≥ p^c`, usually otherwise.
pub fn criterion_5(s: &Settings) -> Outcome {
    outcome(5, "transition discrimination", || {
        let freq = |inst: &ProblemInstance| -> Result<f64> {
            let runs = dpa_runs(inst, s)?;
            Ok(runs.iter().filter(|d| d.switched_to_constrained).count() as f64 / runs.len() as f64)
        };
        let lin = freq(&linear_instance(100_000))?;
        let exp = freq(&exponential_instance(100_000))?;
        Ok((
            lin <= 0.10 && exp >= 0.90,
            format!("switch frequency linear={lin:.3} (<= 0.10), exponential={exp:.3} (>= 0.90)"),
        ))
    })
}

fn moment_check(
    model: &DemandModel,
    n: f64,
    price: f64,
    duration: f64,
    reps: u64,
    seed: u64,
) -> Result<(bool, String)> {
    let counts = (0..reps)
        .map(|r| {
            let mut st = MarketState::new(u64::MAX, 1.0, crate::regret::cell_seed(seed, n as u64, r));
            st.simulate_segment(model, n, Price::Posted(price), duration)
                .map(|o| o.demand as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let len = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / len;
    let m2 = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / len;
    let m4 = counts.iter().map(|c| (c - mean).powi(4)).sum::<f64>() / len;
    let var = m2 * len / (len - 1.0);
    let want = n * model.rate_unchecked(price) * duration;
    let mean_z = (mean - want) / (m2 / len).sqrt();
    let var_z = (var - want) / ((m4 - m2 * m2) / len).sqrt();
    Ok((
        mean_z.abs() <= 4.0 && var_z.abs() <= 4.0,
        format!("mean {mean:.2} var {var:.2} vs {want}: z={mean_z:.2}/{var_z:.2}"),
    ))
}

/// Poisson moments and the deviation-tail frequency of the sampler.
pub fn criterion_6(s: &Settings) -> Outcome {
    outcome(6, "simulator statistics", || {
        let lin = linear_instance(1).demand;
        let (a, da) = moment_check(&lin, 1e5, 5.0, 0.01, 10_000, s.seed)?;
        let (b, db) = moment_check(&lin, 100.0, 9.0, 0.02, 10_000, s.seed)?;
        let n = 1e4;
        let tail = poisson_tail_check(15.0, lin.constants().rate_bound, n, n, 1.0, 100_000, s.seed)?;
        let bound = 10.0 / n;
        let c = tail.upper <= bound && tail.lower <= bound;
        Ok((
            a && b && c,
            format!(
                "large mean {da}; small mean {db}; tail upper={} lower={} (<= {bound}, band {:.1})",
                tail.upper, tail.lower, tail.band
            ),
        ))
    })
}

/// Divergence, the two lower-bound inequalities, and the closed-form price.
pub fn criterion_7(s: &Settings) -> Outcome {
    outcome(7, "lower-bound lab", || {
        let n = 10_000u64;
        let trace = SimulationTrace {
            segments: vec![Segment {
                price: Price::Posted(1.0),
                start: 0.0,
                duration: 1.0,
                sales: 0,
            }],
            initial_inventory: 0,
            remaining_inventory: 0,
            terminal_revenue: 0.0,
            stockout_time: None,
        };
        let kl1 = kl_path(&trace, n as f64, Z0, z1(n as f64))?.value;
        let mut ok = kl1 == 0.0;
        let mut parts = vec![format!("kl(p=1)={kl1}")];
        let mut worst_pd = 0.0f64;
        for z in [1.0 / 3.0, 0.4, 0.5, 0.6, 2.0 / 3.0] {
            let generic = WorstCaseInstance::new(z)?.model().solve_pu();
            worst_pd = worst_pd.max((generic - pd_of_z(z)?).abs());
        }
        ok &= worst_pd <= 1e-8;
        parts.push(format!("max |p^D(z) - solver| = {worst_pd:.1e}"));
        for spec in [
            PolicySpec::Clairvoyant,
            PolicySpec::Fixed { price: 1.5 },
            PolicySpec::single_phase(),
        ] {
            let r = check_two_point(&spec, n, s.replications, s.seed, 2.0)?;
            ok &= r.pass();
            parts.push(format!(
                "{}: K={:.4} <= {:.4} [{}], R0+R1={:.5} >= {:.2e} [{}]",
                r.policy,
                r.divergence_lhs,
                r.divergence_rhs,
                if r.divergence_pass { "ok" } else { "violated" },
                r.two_point_lhs,
                r.two_point_rhs,
                if r.two_point_pass { "ok" } else { "violated" }
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// Runs a small sweep twice, once per thread-pool size, and compares the CSV bytes.
pub fn criterion_8(s: &Settings) -> Outcome {
    outcome(8, "determinism", || {
        let cfg = ExperimentConfig {
            market_sizes: vec![10, 100, 1000],
            replications: 50,
            seed: s.seed,
            ..ExperimentConfig::default()
        };
        let produce = |threads: usize| -> Result<(String, String)> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            pool.install(|| {
                let inst = cfg.instance(1)?;
                let report = sweep(&inst, &cfg.policy, &cfg.market_sizes, cfg.replications, cfg.seed)?;
                Ok((
                    regret_csv(&cfg, std::slice::from_ref(&report)),
                    slope_csv(&cfg, &[report]),
                ))
            })
        };
        let a = produce(1)?;
        let b = produce(4)?;
        let inst = linear_instance(1000);
        let mut p1 = PolicySpec::dpa().build(&inst)?;
        let mut p2 = PolicySpec::dpa().build(&inst)?;
        let same_trace = run_policy(&inst, p1.as_mut(), 11)? == run_policy(&inst, p2.as_mut(), 11)?;
        Ok((
            a == b && same_trace,
            format!(
                "regret CSV {} bytes, slope CSV {} bytes, identical across runs: {}",
                a.0.len(),
                a.1.len(),
                a == b && same_trace
            ),
        ))
    })
}

/// Single-track policy on kinked demand: final price near the kink, regret falls.
pub fn criterion_9(s: &Settings) -> Outcome {
    outcome(9, "kinked demand", || {
        let spec = PolicySpec::Dpa2 {
            delta: PolicySpec::DEFAULT_DELTA,
            log_mode: LogMode::Practical,
        };
        let inst = kinked_instance(100_000);
        let finals = run_replications(&inst, &inst, &spec, s.runs, s.seed ^ 0x5eed, |_, d| d.final_price)?;
        let near = finals
            .iter()
            .filter(|p| p.is_some_and(|p| (p - KINK).abs() <= 0.05))
            .count() as f64
            / finals.len() as f64;
        let small = estimate_regret(&kinked_instance(1_000), &spec, s.replications, s.seed)?;
        let large = estimate_regret(&inst, &spec, s.replications, s.seed)?;
        let ratio = small.mean_regret / large.mean_regret;
        Ok((
            near >= 0.90 && large.mean_regret > 0.0 && ratio >= 3.0,
            format!(
                "final price within 0.05 of kink: {near:.3}; regret n=1e3 {:.5}, n=1e5 {:.5}, ratio {ratio:.2}",
                small.mean_regret, large.mean_regret
            ),
        ))
    })
}

pub fn run_all(s: &Settings) -> Vec<Outcome> {
    vec![
        criterion_1(),
        criterion_2(s),
        criterion_3(s),
        criterion_4(s),
        criterion_5(s),
        criterion_6(s),
        criterion_7(s),
        criterion_8(s),
        criterion_9(s),
    ]
}
