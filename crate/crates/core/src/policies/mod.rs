//! Pricing policies and the schedules they run on.

mod baseline;
mod dpa;
mod dpa2;
pub mod grid;
pub mod schedule;

use std::fmt;

pub use baseline::{default_grid_size, default_learn_fraction, FixedPricePolicy, SinglePhasePolicy};
pub use dpa::{DpaPolicy, IterationRecord, Step3Interval, TrackKind};
pub use dpa2::Dpa2Policy;
pub use schedule::{LearningSchedule, LogMode, Track};

use crate::demand::{Price, ProblemInstance};
use crate::error::Result;
use crate::market_sim::PricingPolicy;

/// A policy and its parameters, independent of any one season.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Dpa {
        delta: f64,
        log_mode: LogMode,
        step3_interval: Step3Interval,
    },
    Dpa2 {
        delta: f64,
        log_mode: LogMode,
    },
    /// Fixed price at the deterministic optimum of the instance it is built for.
    Clairvoyant,
    /// Learn-then-earn; `None` picks `n^{-1/4}` and `⌈n^{1/4}⌉`.
    SinglePhase {
        learn_fraction: Option<f64>,
        grid_size: Option<usize>,
    },
    Fixed {
        price: f64,
    },
}

impl PolicySpec {
    pub const DEFAULT_DELTA: f64 = 0.49;

    pub fn dpa() -> Self {
        PolicySpec::Dpa {
            delta: Self::DEFAULT_DELTA,
            log_mode: LogMode::Practical,
            step3_interval: Step3Interval::LastInterval,
        }
    }

    pub fn dpa2() -> Self {
        PolicySpec::Dpa2 {
            delta: Self::DEFAULT_DELTA,
            log_mode: LogMode::Practical,
        }
    }

    pub fn single_phase() -> Self {
        PolicySpec::SinglePhase {
            learn_fraction: None,
            grid_size: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Dpa { .. } => "dpa",
            PolicySpec::Dpa2 { .. } => "dpa2",
            PolicySpec::Clairvoyant => "clairvoyant",
            PolicySpec::SinglePhase { .. } => "single_phase",
            PolicySpec::Fixed { .. } => "fixed",
        }
    }

    /// Fresh policy state for one season of `instance`. Only the clairvoyant
    /// policy reads the demand curve; the others use the price bounds,
    /// inventory, horizon and market size.
    pub fn build(&self, instance: &ProblemInstance) -> Result<Box<dyn PricingPolicy>> {
        Ok(match *self {
            PolicySpec::Dpa {
                delta,
                log_mode,
                step3_interval,
            } => Box::new(DpaPolicy::new(instance, delta, log_mode, step3_interval)?),
            PolicySpec::Dpa2 { delta, log_mode } => Box::new(Dpa2Policy::new(instance, delta, log_mode)?),
            PolicySpec::Clairvoyant => Box::new(FixedPricePolicy::clairvoyant(instance)),
            PolicySpec::SinglePhase {
                learn_fraction,
                grid_size,
            } => {
                let n = instance.n();
                Box::new(SinglePhasePolicy::new(
                    instance,
                    learn_fraction.unwrap_or_else(|| default_learn_fraction(n)),
                    grid_size.unwrap_or_else(|| default_grid_size(n)),
                )?)
            }
            PolicySpec::Fixed { price } => {
                if !instance.demand.is_feasible(price) {
                    return Err(crate::error::Error::domain(format!(
                        "fixed price {price} is outside the feasible interval"
                    )));
                }
                Box::new(FixedPricePolicy::new(Price::Posted(price), instance.horizon))
            }
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Dpa {
                delta,
                log_mode,
                step3_interval,
            } => write!(
                f,
                "dpa(delta={delta}, log_mode={log_mode}, step3_interval={step3_interval})"
            ),
            PolicySpec::Dpa2 { delta, log_mode } => write!(f, "dpa2(delta={delta}, log_mode={log_mode})"),
            PolicySpec::Clairvoyant => f.write_str("clairvoyant"),
            PolicySpec::SinglePhase {
                learn_fraction,
                grid_size,
            } => {
                f.write_str("single_phase(")?;
                match learn_fraction {
                    Some(v) => write!(f, "learn_fraction={v}")?,
                    None => f.write_str("learn_fraction=n^-1/4")?,
                }
                match grid_size {
                    Some(v) => write!(f, ", grid_size={v})"),
                    None => f.write_str(", grid_size=ceil(n^1/4))"),
                }
            }
            PolicySpec::Fixed { price } => write!(f, "fixed(price={price})"),
        }
    }
}
