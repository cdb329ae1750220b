//! Experiment configuration: a plain-text `key = value` file with one
//! section per concern, plus the comment header written atop every CSV.
//!
//! ```text
//! command = sweep
//! seed = 1
//! replications = 1000
//! workers = 0
//! out = results
//!
//! [demand]
//! curve = linear 30 3
//! price_floor = 0.1
//! price_ceil = 10
//!
//! [problem]
//! inventory = 20
//! horizon = 1
//! n = 10, 100, 1000, 10000, 100000
//!
//! [policy]
//! name = dpa
//! delta = 0.49
//! log_mode = practical
//! step3_interval = last
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::demand::{DemandFamily, DemandModel, ProblemInstance, RegularityConstants};
use crate::error::{Error, Result};
use crate::lower_bound::WorstCaseInstance;
use crate::policies::PolicySpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Run,
    Sweep,
    Lowerbound,
    Check,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::Lowerbound => "lowerbound",
            Command::Check => "check",
        })
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "solve" => Ok(Command::Solve),
            "run" => Ok(Command::Run),
            "sweep" => Ok(Command::Sweep),
            "lowerbound" => Ok(Command::Lowerbound),
            "check" => Ok(Command::Check),
            other => Err(Error::config("command", format!("unknown command `{other}`"))),
        }
    }
}

/// Demand curve plus optional price bounds.
///
/// Curves are written as a family name followed by its parameters:
/// `linear 30 3`, `exponential 80 0.5`, `logit -2 0.5`, `worstcase 0.5`,
/// `tabulated 0.1:29.9 5:25 7.5:0`. Commas work as separators too and a
/// parameter may carry a `name=` prefix (`worstcase z=0.5`).
#[derive(Clone, Debug, PartialEq)]
pub struct DemandSpec {
    pub family: DemandFamily,
    pub price_floor: Option<f64>,
    pub price_ceil: Option<f64>,
}

pub const DEFAULT_PRICE_FLOOR: f64 = 0.1;
pub const DEFAULT_PRICE_CEIL: f64 = 10.0;

impl DemandSpec {
    pub fn new(family: DemandFamily) -> Self {
        Self {
            family,
            price_floor: None,
            price_ceil: None,
        }
    }

    /// Parses the curve grammar described on the type.
    pub fn parse_curve(text: &str) -> Result<DemandFamily> {
        let mut tokens = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let name = tokens
            .next()
            .ok_or_else(|| Error::config("demand.curve", "empty demand curve"))?
            .to_ascii_lowercase();
        let args: Vec<&str> = tokens.map(|t| t.rsplit_once('=').map_or(t, |(_, v)| v)).collect();
        let nums = |want: usize| -> Result<Vec<f64>> {
            if args.len() != want {
                return Err(Error::config(
                    "demand.curve",
                    format!("`{name}` takes {want} parameter(s), got {}", args.len()),
                ));
            }
            args.iter().map(|a| parse_f64("demand.curve", a)).collect()
        };
        Ok(match name.as_str() {
            "linear" => {
                let v = nums(2)?;
                DemandFamily::Linear { a: v[0], b: v[1] }
            }
            "exponential" => {
                let v = nums(2)?;
                DemandFamily::Exponential { a: v[0], b: v[1] }
            }
            "logit" => {
                let v = nums(2)?;
                DemandFamily::Logit { a: v[0], b: v[1] }
            }
            "worstcase" => DemandFamily::WorstCaseLinear { z: nums(1)?[0] },
            "tabulated" => {
                let knots = args
                    .iter()
                    .map(|a| {
                        let (p, l) = a
                            .split_once(':')
                            .ok_or_else(|| Error::config("demand.curve", format!("knot `{a}` is not price:rate")))?;
                        Ok((parse_f64("demand.curve", p)?, parse_f64("demand.curve", l)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DemandFamily::Tabulated { knots }
            }
            other => {
                return Err(Error::config(
                    "demand.curve",
                    format!("unknown demand family `{other}`"),
                ))
            }
        })
    }

    pub fn curve_string(&self) -> String {
        match &self.family {
            DemandFamily::Linear { a, b } => format!("linear {a} {b}"),
            DemandFamily::Exponential { a, b } => format!("exponential {a} {b}"),
            DemandFamily::Logit { a, b } => format!("logit {a} {b}"),
            DemandFamily::WorstCaseLinear { z } => format!("worstcase {z}"),
            DemandFamily::Tabulated { knots } => {
                let mut s = String::from("tabulated");
                for (p, l) in knots {
                    let _ = write!(s, " {p}:{l}");
                }
                s
            }
        }
    }

    /// Builds the model. Analytic curves default to `[0.1, 10]`, the
    /// worst-case family to `[1/2, 3/2]`; tabulated curves span their knots.
    pub fn model(&self) -> Result<DemandModel> {
        match &self.family {
            DemandFamily::Tabulated { knots } => {
                if self.price_floor.is_some() || self.price_ceil.is_some() {
                    return Err(Error::config(
                        "price_floor",
                        "a tabulated curve takes its price interval from its knots",
                    ));
                }
                DemandModel::tabulated(knots.clone(), RegularityConstants::from_knots(knots))
            }
            DemandFamily::WorstCaseLinear { .. } => DemandModel::new(
                self.family.clone(),
                self.price_floor.unwrap_or(0.5),
                self.price_ceil.unwrap_or(1.5),
            ),
            _ => DemandModel::new(
                self.family.clone(),
                self.price_floor.unwrap_or(DEFAULT_PRICE_FLOOR),
                self.price_ceil.unwrap_or(DEFAULT_PRICE_CEIL),
            ),
        }
    }
}

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub demand: DemandSpec,
    pub inventory: f64,
    pub horizon: f64,
    pub market_sizes: Vec<u64>,
    pub policy: PolicySpec,
    pub replications: u64,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Output directory.
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Sweep,
            demand: DemandSpec::new(DemandFamily::Linear { a: 30.0, b: 3.0 }),
            inventory: 20.0,
            horizon: 1.0,
            market_sizes: vec![10, 100, 1_000, 10_000, 100_000],
            policy: PolicySpec::dpa(),
            replications: 1000,
            seed: 1,
            workers: 0,
            out: PathBuf::from("results"),
        }
    }
}

fn parse_f64(field: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("`{v}` is not a number")))
}

fn parse_int<T: FromStr>(field: &str, v: &str) -> Result<T> {
    let v = v.trim();
    if let Ok(x) = v.parse() {
        return Ok(x);
    }
    // allow 1e5-style sizes when they are whole numbers
    match v.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 => (f as u64)
            .to_string()
            .parse()
            .map_err(|_| Error::config(field, format!("`{v}` is out of range"))),
        _ => Err(Error::config(field, format!("`{v}` is not a non-negative integer"))),
    }
}

/// Parses `10, 100, 1e3` into market sizes.
pub fn parse_market_sizes(v: &str) -> Result<Vec<u64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_int("n", t))
        .collect()
}

fn opt<T: fmt::Display>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(|x| x.to_string())
}

impl ExperimentConfig {
    /// Reads and parses a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses config text on top of the defaults. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut policy_keys: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_ascii_lowercase();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            if section == "policy" {
                policy_keys.push((key, value.to_string()));
            } else {
                cfg.set(&section, &key, value)?;
            }
        }
        // the name picks the variant, so it goes first
        policy_keys.sort_by_key(|(k, _)| k != "name");
        for (k, v) in policy_keys {
            cfg.set("policy", &k, &v)?;
        }
        Ok(cfg)
    }

    /// Sets one field. `section` is `""` for top-level keys.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let field = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        match (section, key) {
            ("", "command") => self.command = value.parse()?,
            ("", "seed") => self.seed = parse_int(&field, value)?,
            ("", "replications") => self.replications = parse_int(&field, value)?,
            ("", "workers") => self.workers = parse_int(&field, value)?,
            ("", "out") => self.out = PathBuf::from(value),
            ("demand", "curve") => self.demand.family = DemandSpec::parse_curve(value)?,
            ("demand", "price_floor") => self.demand.price_floor = Some(parse_f64(&field, value)?),
            ("demand", "price_ceil") => self.demand.price_ceil = Some(parse_f64(&field, value)?),
            ("problem", "inventory") => self.inventory = parse_f64(&field, value)?,
            ("problem", "horizon") => self.horizon = parse_f64(&field, value)?,
            ("problem", "n") => self.market_sizes = parse_market_sizes(value)?,
            ("policy", _) => self.set_policy(key, value)?,
            _ => return Err(Error::config(field, "unknown key")),
        }
        Ok(())
    }

    fn set_policy(&mut self, key: &str, value: &str) -> Result<()> {
        let field = format!("policy.{key}");
        let misplaced =
            |p: &PolicySpec| Error::config(field.clone(), format!("does not apply to policy `{}`", p.name()));
        match key {
            "name" => {
                self.policy = match value.trim().to_ascii_lowercase().as_str() {
                    "dpa" => PolicySpec::dpa(),
                    "dpa2" => PolicySpec::dpa2(),
                    "clairvoyant" => PolicySpec::Clairvoyant,
                    "single_phase" | "singlephase" => PolicySpec::single_phase(),
                    "fixed" => PolicySpec::Fixed { price: f64::NAN },
                    other => return Err(Error::config(field, format!("unknown policy `{other}`"))),
                }
            }
            "delta" => match &mut self.policy {
                PolicySpec::Dpa { delta, .. } | PolicySpec::Dpa2 { delta, .. } => *delta = parse_f64(&field, value)?,
                p => return Err(misplaced(p)),
            },
            "log_mode" => match &mut self.policy {
                PolicySpec::Dpa { log_mode, .. } | PolicySpec::Dpa2 { log_mode, .. } => *log_mode = value.parse()?,
                p => return Err(misplaced(p)),
            },
            "step3_interval" => match &mut self.policy {
                PolicySpec::Dpa { step3_interval, .. } => *step3_interval = value.parse()?,
                p => return Err(misplaced(p)),
            },
            "learn_fraction" => match &mut self.policy {
                PolicySpec::SinglePhase { learn_fraction, .. } => *learn_fraction = Some(parse_f64(&field, value)?),
                p => return Err(misplaced(p)),
            },
            "grid_size" => match &mut self.policy {
                PolicySpec::SinglePhase { grid_size, .. } => *grid_size = Some(parse_int(&field, value)?),
                p => return Err(misplaced(p)),
            },
            "price" => match &mut self.policy {
                PolicySpec::Fixed { price } => *price = parse_f64(&field, value)?,
                p => return Err(misplaced(p)),
            },
            _ => return Err(Error::config(field, "unknown key")),
        }
        Ok(())
    }

    /// Canonical text form; `parse(print(c)) == c`.
    pub fn print(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("command", self.command.to_string());
        kv("seed", self.seed.to_string());
        kv("replications", self.replications.to_string());
        kv("workers", self.workers.to_string());
        kv("out", self.out.display().to_string());
        s.push_str("\n[demand]\n");
        let _ = writeln!(s, "curve = {}", self.demand.curve_string());
        if let Some(v) = self.demand.price_floor {
            let _ = writeln!(s, "price_floor = {v}");
        }
        if let Some(v) = self.demand.price_ceil {
            let _ = writeln!(s, "price_ceil = {v}");
        }
        s.push_str("\n[problem]\n");
        let _ = writeln!(s, "inventory = {}", self.inventory);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let sizes: Vec<String> = self.market_sizes.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "n = {}", sizes.join(", "));
        s.push_str("\n[policy]\n");
        let _ = writeln!(s, "name = {}", self.policy.name());
        let mut keys: Vec<(&str, Option<String>)> = Vec::new();
        match &self.policy {
            PolicySpec::Dpa {
                delta,
                log_mode,
                step3_interval,
            } => {
                keys.push(("delta", Some(delta.to_string())));
                keys.push(("log_mode", Some(log_mode.to_string())));
                keys.push(("step3_interval", Some(step3_interval.to_string())));
            }
            PolicySpec::Dpa2 { delta, log_mode } => {
                keys.push(("delta", Some(delta.to_string())));
                keys.push(("log_mode", Some(log_mode.to_string())));
            }
            PolicySpec::Clairvoyant => {}
            PolicySpec::SinglePhase {
                learn_fraction,
                grid_size,
            } => {
                keys.push(("learn_fraction", opt(learn_fraction)));
                keys.push(("grid_size", opt(grid_size)));
            }
            PolicySpec::Fixed { price } => keys.push(("price", Some(price.to_string()))),
        }
        for (k, v) in keys {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    /// Problem instance at market size `n`.
    pub fn instance(&self, market_size: u64) -> Result<ProblemInstance> {
        ProblemInstance::new(self.demand.model()?, self.inventory, self.horizon, market_size)
    }

    /// Checks every field against the preconditions of the command it feeds,
    /// so nothing fails halfway through a simulation.
    pub fn validate(&self) -> Result<()> {
        let model = self.demand.model()?;
        if self.command == Command::Check {
            return Ok(());
        }
        if !(self.inventory.is_finite() && self.inventory > 0.0) {
            return Err(Error::config("problem.inventory", "must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::config("problem.horizon", "must be positive"));
        }
        let base = ProblemInstance::new(model, self.inventory, self.horizon, 1)?;
        if self.command == Command::Solve {
            return Ok(());
        }
        if self.market_sizes.is_empty() {
            return Err(Error::config("problem.n", "at least one market size is required"));
        }
        if self.replications < 2 {
            return Err(Error::config("replications", "at least 2 replications are required"));
        }
        if let PolicySpec::Fixed { price } = self.policy {
            if !price.is_finite() {
                return Err(Error::config("policy.price", "a fixed policy needs a price"));
            }
        }
        if self.command == Command::Sweep {
            let mut distinct = self.market_sizes.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 3 {
                return Err(Error::config(
                    "problem.n",
                    "a sweep needs at least 3 distinct market sizes",
                ));
            }
        }
        for &n in &self.market_sizes {
            if n == 0 {
                return Err(Error::config("problem.n", "market sizes must be positive"));
            }
            let inst = if self.command == Command::Lowerbound {
                WorstCaseInstance::new(crate::lower_bound::Z0)?.instance(n)?
            } else {
                base.with_market_size(n)
            };
            self.policy
                .build(&inst)
                .map_err(|e| Error::config("policy", format!("n={n}: {e}")))?;
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical text, ignoring `workers` and `out`,
    /// which do not change results.
    pub fn hash(&self) -> u64 {
        let mut c = self.clone();
        c.workers = 0;
        c.out = PathBuf::new();
        c.print().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    /// Comment lines that open every CSV this config produces.
    pub fn csv_header(&self) -> String {
        format!(
            "# dynprice {}\n# config_hash = {:016x}\n# seed = {}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            self.seed
        )
    }
}

/// Parses a policy from its name and `key=value` parameters, e.g.
/// `dpa delta=0.4 log_mode=theoretical`.
pub fn parse_policy(text: &str) -> Result<PolicySpec> {
    let mut cfg = ExperimentConfig::default();
    let mut tokens = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty());
    let name = tokens.next().ok_or_else(|| Error::config("policy", "empty policy"))?;
    cfg.set("policy", "name", name)?;
    let params: BTreeMap<&str, &str> = tokens
        .map(|t| {
            t.split_once('=')
                .ok_or_else(|| Error::config("policy", format!("`{t}` is not key=value")))
        })
        .collect::<Result<_>>()?;
    for (k, v) in params {
        cfg.set("policy", k, v)?;
    }
    Ok(cfg.policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{LogMode, Step3Interval};

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.print()).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn parses_sections_and_order_free_policy() {
        let text = "command = run\n[policy]\nlearn_fraction = 0.2\nname = single_phase\n[problem]\nn = 1e3, 10\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.command, Command::Run);
        assert_eq!(c.market_sizes, vec![1000, 10]);
        assert_eq!(
            c.policy,
            PolicySpec::SinglePhase {
                learn_fraction: Some(0.2),
                grid_size: None
            }
        );
        assert_eq!(ExperimentConfig::parse(&c.print()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse("[problem]\ninventory = abc\n").unwrap_err();
        assert!(e.to_string().contains("problem.inventory"), "{e}");
        let e = ExperimentConfig::parse("[policy]\nname = clairvoyant\ndelta = 0.3\n").unwrap_err();
        assert!(e.to_string().contains("policy.delta"), "{e}");
        let e = ExperimentConfig::parse("bogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn curves() {
        for text in [
            "linear 30 3",
            "exponential 80 0.5",
            "logit -2 0.5",
            "worstcase 0.5",
            "tabulated 0.1:29.9 5:25 7.5:0",
        ] {
            let f = DemandSpec::parse_curve(text).unwrap();
            assert_eq!(DemandSpec::new(f.clone()).curve_string(), text);
            DemandSpec::new(f).model().unwrap();
        }
        assert_eq!(
            DemandSpec::parse_curve("worstcase z=0.5").unwrap(),
            DemandFamily::WorstCaseLinear { z: 0.5 }
        );
        assert!(DemandSpec::parse_curve("linear 30").is_err());
        assert!(DemandSpec::parse_curve("cubic 1 2").is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let c = ExperimentConfig {
            policy: PolicySpec::Dpa {
                delta: 0.7,
                log_mode: LogMode::Practical,
                step3_interval: Step3Interval::LastInterval,
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig {
            market_sizes: vec![10, 100],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.command = Command::Run;
        c.validate().unwrap();
        c.replications = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn policy_shorthand() {
        assert_eq!(
            parse_policy("dpa2 delta=0.3").unwrap(),
            PolicySpec::Dpa2 {
                delta: 0.3,
                log_mode: LogMode::Practical
            }
        );
        assert_eq!(
            parse_policy("fixed price=1.5").unwrap(),
            PolicySpec::Fixed { price: 1.5 }
        );
        assert!(parse_policy("dpa price=1").is_err());
    }

    #[test]
    fn header_changes_with_config() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.replications = 999;
        assert_ne!(a.hash(), b.hash());
        assert!(a.csv_header().starts_with("# dynprice "));
        assert!(a.csv_header().contains("# seed = 1"));
    }
}
