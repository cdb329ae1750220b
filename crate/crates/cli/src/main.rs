use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dynprice::acceptance::{self, Settings};
use dynprice::config::{parse_policy, Command, ExperimentConfig};
use dynprice::lower_bound::{check_two_point, pd_of_z, Z0};
use dynprice::market_sim::SimulationTrace;
use dynprice::output::{lower_bound_csv, regret_csv, slope_csv, trace_csv};
use dynprice::regret::{run_replications, sweep, RegretEstimate};

/// Dynamic pricing experiments: benchmarks, simulations, regret sweeps and
/// lower-bound checks.
#[derive(Parser, Debug)]
#[command(name = "dynprice", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Config file (`key = value` with sections); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Policy name with optional parameters, e.g. `dpa2 delta=0.4`.
    #[arg(long, global = true)]
    policy: Option<String>,
    /// Demand curve, e.g. `linear 30 3` or `exponential 80 0.5`.
    #[arg(long, global = true)]
    demand: Option<String>,
    /// Market size or comma-separated list.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Replications per cell.
    #[arg(long, global = true)]
    reps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// `practical` or `theoretical`.
    #[arg(long, global = true)]
    log_mode: Option<String>,
    /// `last` or `full`.
    #[arg(long, global = true)]
    step3_interval: Option<String>,
    /// Inventory per unit of market size.
    #[arg(long, global = true)]
    inventory: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Verify invariants and exit non-zero when one fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Print p^u, p^c, p^D and J^D.
    Solve,
    /// Simulate one (instance, policy) cell and write its traces.
    Run,
    /// Regret across market sizes with a log-log fit.
    Sweep,
    /// Divergence and two-point regret checks on the worst-case family.
    Lowerbound,
    /// Run the acceptance suite.
    Check,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Run => Command::Run,
            Cmd::Sweep => Command::Sweep,
            Cmd::Lowerbound => Command::Lowerbound,
            Cmd::Check => Command::Check,
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.command = cli.command.into();
    if let Some(p) = &cli.policy {
        cfg.policy = parse_policy(p)?;
    }
    let overrides = [
        ("demand", "curve", cli.demand.clone()),
        ("problem", "n", cli.n.clone()),
        ("problem", "inventory", cli.inventory.map(|v| v.to_string())),
        ("problem", "horizon", cli.horizon.map(|v| v.to_string())),
        ("", "replications", cli.reps.map(|v| v.to_string())),
        ("", "seed", cli.seed.map(|v| v.to_string())),
        ("", "workers", cli.workers.map(|v| v.to_string())),
        ("policy", "delta", cli.delta.map(|v| v.to_string())),
        ("policy", "log_mode", cli.log_mode.clone()),
        ("policy", "step3_interval", cli.step3_interval.clone()),
    ];
    for (section, key, value) in overrides {
        if let Some(v) = value {
            cfg.set(section, key, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

/// Reports violated invariants; true when there were none.
fn report(violations: &[String]) -> bool {
    for v in violations {
        eprintln!("invariant violated: {v}");
    }
    violations.is_empty()
}

fn solve(cfg: &ExperimentConfig) -> Result<bool> {
    let inst = cfg.instance(1)?;
    let d = &inst.demand;
    println!(
        "demand: {} on [{}, {}]",
        cfg.demand.curve_string(),
        d.price_floor(),
        d.price_ceil()
    );
    println!("x = {}, T = {}", cfg.inventory, cfg.horizon);
    println!("p^u = {:.10}", d.solve_pu());
    println!("p^c = {:.10}", d.solve_pc(cfg.inventory, cfg.horizon));
    println!("p^D = {:.10}", inst.deterministic_price());
    println!("J^D per unit n = {:.10}", inst.deterministic_value());
    for &n in &cfg.market_sizes {
        println!("J^D at n = {n}: {:.10}", inst.with_market_size(n).deterministic_value());
    }
    Ok(true)
}

fn trace_violations(trace: &SimulationTrace, horizon: f64) -> Vec<String> {
    let mut out = Vec::new();
    let sold: u64 = trace.segments.iter().map(|s| s.sales).sum();
    if trace.initial_inventory != trace.remaining_inventory + sold {
        out.push("initial inventory = remaining + sales".to_string());
    }
    if (trace.end_time() - horizon).abs() > 1e-9 {
        out.push(format!("segments cover [0, T]: they end at {}", trace.end_time()));
    }
    out
}

fn run(cfg: &ExperimentConfig, verify: bool) -> Result<bool> {
    let &[n] = cfg.market_sizes.as_slice() else {
        bail!("`run` simulates a single market size; pass one value with --n");
    };
    let inst = cfg.instance(n)?;
    let traces = run_replications(&inst, &inst, &cfg.policy, cfg.replications, cfg.seed, |t, _| t.clone())?;
    write_file(&cfg.out, "traces.csv", &trace_csv(cfg, &traces))?;
    let revenues: Vec<f64> = traces.iter().map(|t| t.terminal_revenue).collect();
    let est = RegretEstimate::from_revenues(n, inst.deterministic_value(), &revenues)?;
    println!(
        "{} n={n} reps={}: mean regret {:.6} (se {:.6}), mean revenue {:.3}, J^D {:.3}",
        cfg.policy, est.replications, est.mean_regret, est.std_error, est.mean_revenue, est.benchmark
    );
    if !verify {
        return Ok(true);
    }
    let mut violations: Vec<String> = traces
        .iter()
        .enumerate()
        .flat_map(|(rep, t)| {
            trace_violations(t, inst.horizon)
                .into_iter()
                .map(move |v| format!("rep {rep}: {v}"))
        })
        .collect();
    if !est.respects_benchmark(4.0) {
        violations.push(format!("n={n}: mean revenue <= J^D + 4 SE"));
    }
    Ok(report(&violations))
}

fn sweep_cmd(cfg: &ExperimentConfig, verify: bool) -> Result<bool> {
    let template = cfg.instance(1)?;
    let rep = sweep(&template, &cfg.policy, &cfg.market_sizes, cfg.replications, cfg.seed)?;
    let reports = [rep];
    write_file(&cfg.out, "regret.csv", &regret_csv(cfg, &reports))?;
    write_file(&cfg.out, "slopes.csv", &slope_csv(cfg, &reports))?;
    let rep = &reports[0];
    println!("{:>10} {:>12} {:>12}", "n", "regret", "se");
    for e in &rep.per_n {
        println!("{:>10} {:>12.6} {:>12.6}", e.market_size, e.mean_regret, e.std_error);
    }
    match rep.fit {
        Some(f) => println!(
            "slope {:.4}, intercept {:.4}, r^2 {:.4}",
            f.slope, f.intercept, f.r_squared
        ),
        None => println!("no fit: fewer than two positive regret estimates"),
    }
    if !verify {
        return Ok(true);
    }
    let mut violations: Vec<String> = rep
        .per_n
        .iter()
        .filter(|e| !e.respects_benchmark(4.0))
        .map(|e| format!("n={}: mean revenue <= J^D + 4 SE", e.market_size))
        .collect();
    if rep.fit.is_none() {
        violations.push("log-log fit needs two positive regret estimates".to_string());
    }
    Ok(report(&violations))
}

fn lowerbound(cfg: &ExperimentConfig, verify: bool) -> Result<bool> {
    let reports = cfg
        .market_sizes
        .iter()
        .map(|&n| check_two_point(&cfg.policy, n, cfg.replications, cfg.seed, 2.0))
        .collect::<dynprice::Result<Vec<_>>>()?;
    write_file(&cfg.out, "lowerbound.csv", &lower_bound_csv(cfg, &reports))?;
    println!("policy built for z0 = {Z0} (p^D = {})", pd_of_z(Z0)?);
    for r in &reports {
        println!(
            "n={}: K={:.5} (se {:.5}) vs {:.5}; R(z0)+R(z1)={:.6} vs {:.3e}; {}",
            r.market_size,
            r.divergence_lhs,
            r.k_se,
            r.divergence_rhs,
            r.two_point_lhs,
            r.two_point_rhs,
            if r.pass() { "pass" } else { "FAIL" }
        );
    }
    if !verify {
        return Ok(true);
    }
    let mut violations = Vec::new();
    for r in &reports {
        if !r.divergence_pass {
            violations.push(format!("n={}: K <= 24n(z0-z1)^2 R(z0) within 2 SE", r.market_size));
        }
        if !r.two_point_pass {
            violations.push(format!(
                "n={}: R(z0) + R(z1) >= e^-K / (6912 sqrt n) within 2 SE",
                r.market_size
            ));
        }
    }
    Ok(report(&violations))
}

fn acceptance_suite(cli: &Cli, cfg: &ExperimentConfig) -> Result<bool> {
    let mut s = Settings::default();
    if cli.seed.is_some() {
        s.seed = cfg.seed;
    }
    if cli.reps.is_some() {
        s.replications = cfg.replications;
    }
    let outcomes = acceptance::run_all(&s);
    for o in &outcomes {
        println!("{o}");
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = (|| -> Result<bool> {
        let cfg = build_config(&cli)?;
        if cfg.workers > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build_global()
                .context("configuring the worker pool")?;
        }
        match cli.command {
            Cmd::Solve => solve(&cfg),
            Cmd::Run => run(&cfg, cli.check),
            Cmd::Sweep => sweep_cmd(&cfg, cli.check),
            Cmd::Lowerbound => lowerbound(&cfg, cli.check),
            Cmd::Check => acceptance_suite(&cli, &cfg),
        }
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
