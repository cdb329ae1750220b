//! Learning schedules: how long each shrinking iteration lasts (`τ_i`), how
//! many prices it tests (`κ_i`), and how many iterations a track runs.
//!
//! Times are fractions of the horizon (the schedules assume `T = 1`) and all
//! logarithms are natural.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Whether the poly-log factors of the schedule are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogMode {
    /// Schedule exactly as analyzed, with every `log n` factor.
    Theoretical,
    /// `log n` factors dropped from the durations and from the stopping
    /// rule, which is what makes moderate market sizes run several iterations.
    Practical,
}

impl fmt::Display for LogMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogMode::Theoretical => "theoretical",
            LogMode::Practical => "practical",
        })
    }
}

impl FromStr for LogMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theoretical" => Ok(LogMode::Theoretical),
            "practical" => Ok(LogMode::Practical),
            other => Err(Error::config(
                "log_mode",
                format!("expected theoretical|practical, got `{other}`"),
            )),
        }
    }
}

/// Shape constants of one track.
#[derive(Clone, Copy, Debug, PartialEq)]
struct TrackShape {
    /// Geometric ratio of the exponents (3/5 or 2/3).
    ratio: f64,
    /// `κ_i = n^{grid_coeff·ratio^{i-1}·(1-δ)}·log n`.
    grid_coeff: f64,
    /// Power of `log n` in `τ_1`.
    first_log_power: f64,
    /// Power of `log n` in `τ_i` for `i ≥ 2`.
    log_power: f64,
    /// Power of `log n` on the right-hand side of the stopping rule
    /// `n^{2δ-1+(1-δ)·ratio^l} < (log n)^power`.
    stop_log_power: f64,
    /// Closed-form width is `n^{-width_coeff·(1-δ)·(1-ratio^{i-1})}`.
    width_coeff: f64,
}

const UNCONSTRAINED: TrackShape = TrackShape {
    ratio: 3.0 / 5.0,
    grid_coeff: 1.0 / 5.0,
    first_log_power: 3.5,
    log_power: 5.0,
    stop_log_power: 5.0,
    width_coeff: 0.5,
};

const CONSTRAINED: TrackShape = TrackShape {
    ratio: 2.0 / 3.0,
    grid_coeff: 1.0 / 3.0,
    first_log_power: 2.5,
    log_power: 3.0,
    stop_log_power: 3.0,
    width_coeff: 1.0,
};

const SINGLE: TrackShape = TrackShape {
    ratio: 2.0 / 3.0,
    grid_coeff: 1.0 / 3.0,
    first_log_power: 3.0,
    log_power: 3.0,
    stop_log_power: 3.5,
    width_coeff: 1.0,
};

/// Durations and grid sizes of one learning track.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    /// `τ_i`, as fractions of the horizon.
    pub durations: Vec<f64>,
    /// `κ_i`, floored and at least 2.
    pub grid_sizes: Vec<usize>,
    ratio: f64,
    width_coeff: f64,
}

impl Track {
    fn build(shape: TrackShape, n: f64, delta: f64, mode: LogMode) -> Self {
        let log_n = n.ln();
        let cap = iteration_bound(shape.ratio, delta);
        let keep = |power: f64| match mode {
            LogMode::Theoretical => log_n.powf(power),
            LogMode::Practical => 1.0,
        };
        let stop_rhs = match mode {
            LogMode::Theoretical => shape.stop_log_power * log_n.ln(),
            LogMode::Practical => 0.0,
        };
        let iterations = (1..=cap)
            .find(|&l| (2.0 * delta - 1.0 + (1.0 - delta) * shape.ratio.powi(l as i32)) * log_n < stop_rhs)
            .unwrap_or(cap);

        let mut durations = Vec::with_capacity(iterations);
        let mut grid_sizes = Vec::with_capacity(iterations);
        for i in 1..=iterations {
            let geo = shape.ratio.powi(i as i32 - 1);
            let kappa = (n.powf(shape.grid_coeff * geo * (1.0 - delta)) * log_n).floor();
            grid_sizes.push((kappa as usize).max(2));
            let tau = if i == 1 {
                n.powf(-delta) * keep(shape.first_log_power)
            } else {
                n.powf(1.0 - 2.0 * delta - (1.0 - delta) * geo) * keep(shape.log_power)
            };
            durations.push(tau);
        }
        Self {
            durations,
            grid_sizes,
            ratio: shape.ratio,
            width_coeff: shape.width_coeff,
        }
    }

    pub fn iterations(&self) -> usize {
        self.durations.len()
    }

    /// Interval width the schedule is designed for at iteration `i`
    /// (1-based) on a unit-width starting interval.
    pub fn closed_form_width(&self, n: f64, delta: f64, i: usize) -> f64 {
        n.powf(-self.width_coeff * (1.0 - delta) * (1.0 - self.ratio.powi(i as i32 - 1)))
    }

    /// Places where rounding broke the intended ordering: durations should
    /// increase and grid sizes decrease from one iteration to the next.
    pub fn order_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..self.iterations() {
            if !(self.durations[i] > self.durations[i - 1]) {
                out.push(format!(
                    "duration of iteration {} does not exceed iteration {}",
                    i + 1,
                    i
                ));
            }
            if !(self.grid_sizes[i] < self.grid_sizes[i - 1]) {
                out.push(format!(
                    "grid size of iteration {} ({}) is not below iteration {} ({})",
                    i + 1,
                    self.grid_sizes[i],
                    i,
                    self.grid_sizes[i - 1]
                ));
            }
        }
        out
    }
}

/// `⌊log_ratio((1-2δ)/(1-δ))⌋ + 1`, the largest number of iterations a track
/// with this ratio can need.
pub fn iteration_bound(ratio: f64, delta: f64) -> usize {
    (((1.0 - 2.0 * delta) / (1.0 - delta)).ln() / ratio.ln()).floor() as usize + 1
}

/// Full schedule of the two-track algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningSchedule {
    pub market_size: f64,
    pub delta: f64,
    pub log_mode: LogMode,
    pub unconstrained: Track,
    pub constrained: Track,
}

fn check(n: f64, delta: f64) -> Result<()> {
    if !(n >= 2.0) {
        return Err(Error::domain(format!("schedules need market size n >= 2, got {n}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    Ok(())
}

impl LearningSchedule {
    pub fn build(n: f64, delta: f64, log_mode: LogMode) -> Result<Self> {
        check(n, delta)?;
        let schedule = Self {
            market_size: n,
            delta,
            log_mode,
            unconstrained: Track::build(UNCONSTRAINED, n, delta, log_mode),
            constrained: Track::build(CONSTRAINED, n, delta, log_mode),
        };
        for v in schedule
            .unconstrained
            .order_violations()
            .into_iter()
            .chain(schedule.constrained.order_violations())
        {
            log::debug!("schedule at n={n}: {v}");
        }
        Ok(schedule)
    }

    /// Bound on the unconstrained-track iteration count for this `δ`.
    pub fn unconstrained_bound(delta: f64) -> usize {
        iteration_bound(UNCONSTRAINED.ratio, delta)
    }

    /// Bound on the constrained-track iteration count for this `δ`.
    pub fn constrained_bound(delta: f64) -> usize {
        iteration_bound(CONSTRAINED.ratio, delta)
    }
}

/// Schedule of the single-track (kinked demand) algorithm.
pub fn build_single_track(n: f64, delta: f64, log_mode: LogMode) -> Result<Track> {
    check(n, delta)?;
    Ok(Track::build(SINGLE, n, delta, log_mode))
}
