//! Two-track learning-while-doing pricing.
//!
//! The unconstrained track tests a price grid on a shrinking interval,
//! recentering each time on the larger of the empirical revenue maximizer
//! and the empirical run-out price. The new interval is skewed upward
//! (`log n / 3` grid steps below, `2 log n / 3` above). If the run-out price
//! clearly exceeds the revenue maximizer, the policy concludes that
//! inventory binds and switches to the constrained track, which recenters
//! symmetrically (`log n / 2` steps each side) on the run-out estimate. When a
//! track finishes, the learned price is held for the rest of the season: the
//! unconstrained estimate is pushed up by `2·sqrt(log n)` grid steps to
//! protect inventory, and the constrained one is used as is.

use std::fmt;
use std::str::FromStr;

use crate::demand::{Price, ProblemInstance};
use crate::error::{Error, Result};
use crate::market_sim::{Decision, Observation, PolicyDiagnostics, PricingPolicy};

use super::grid::{shrink, GridSweep};
use super::schedule::{LearningSchedule, LogMode, Track};

/// Starting interval of the constrained track.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step3Interval {
    /// Restart from the full feasible interval.
    FullInterval,
    /// Reuse the interval of the iteration that triggered the switch.
    LastInterval,
}

impl fmt::Display for Step3Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step3Interval::FullInterval => "full",
            Step3Interval::LastInterval => "last",
        })
    }
}

impl FromStr for Step3Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "fullinterval" | "full_interval" => Ok(Step3Interval::FullInterval),
            "last" | "lastinterval" | "last_interval" => Ok(Step3Interval::LastInterval),
            other => Err(Error::config(
                "step3_interval",
                format!("expected full|last, got `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackKind {
    Unconstrained,
    Constrained,
}

/// What one finished iteration saw and decided.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub track: TrackKind,
    /// 1-based iteration index within its track.
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub kappa: usize,
    pub revenue_price: f64,
    pub runout_price: f64,
    /// Center of the next interval.
    pub center: f64,
    /// Next interval before truncation to the feasible set.
    pub next_untruncated: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    Unconstrained(usize),
    Constrained(usize),
    Apply(f64),
    Done,
}

/// Policy state for one season.
#[derive(Clone, Debug)]
pub struct DpaPolicy {
    schedule: LearningSchedule,
    step3_interval: Step3Interval,
    market_size: f64,
    log_n: f64,
    runout_rate: f64,
    horizon: f64,
    floor: f64,
    ceil: f64,
    phase: Phase,
    interval: (f64, f64),
    sweep: Option<GridSweep>,
    awaiting: bool,
    clock: f64,
    last_unconstrained: Option<(f64, f64)>,
    last_constrained: Option<f64>,
    switch_runout: Option<f64>,
    switch_iteration: Option<usize>,
    history: Vec<IterationRecord>,
    diag: PolicyDiagnostics,
}

impl DpaPolicy {
    pub fn new(
        instance: &ProblemInstance,
        delta: f64,
        log_mode: LogMode,
        step3_interval: Step3Interval,
    ) -> Result<Self> {
        let schedule = LearningSchedule::build(instance.n(), delta, log_mode)?;
        Ok(Self::with_schedule(instance, schedule, step3_interval))
    }

    pub fn with_schedule(
        instance: &ProblemInstance,
        schedule: LearningSchedule,
        step3_interval: Step3Interval,
    ) -> Self {
        let (floor, ceil) = (instance.demand.price_floor(), instance.demand.price_ceil());
        Self {
            log_n: instance.n().ln(),
            market_size: instance.n(),
            runout_rate: instance.inventory / instance.horizon,
            horizon: instance.horizon,
            floor,
            ceil,
            schedule,
            step3_interval,
            phase: Phase::Unconstrained(1),
            interval: (floor, ceil),
            sweep: None,
            awaiting: false,
            clock: 0.0,
            last_unconstrained: None,
            last_constrained: None,
            switch_runout: None,
            switch_iteration: None,
            history: Vec::new(),
            diag: PolicyDiagnostics::default(),
        }
    }

    pub fn schedule(&self) -> &LearningSchedule {
        &self.schedule
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    /// Unconstrained iteration at which the policy switched tracks.
    pub fn switch_iteration(&self) -> Option<usize> {
        self.switch_iteration
    }

    /// `p̂ + 2·sqrt(log n)·granularity`, kept feasible.
    fn adjusted(&self, center: f64, granularity: f64) -> f64 {
        (center + 2.0 * self.log_n.sqrt() * granularity).min(self.ceil)
    }

    fn fallback_price(&self, track: TrackKind) -> Option<f64> {
        match track {
            TrackKind::Unconstrained => self.last_unconstrained.map(|(c, g)| self.adjusted(c, g)),
            TrackKind::Constrained => self.last_constrained.or(self.switch_runout),
        }
    }

    fn enter_apply(&mut self, price: f64) {
        self.diag.final_price = Some(price);
        self.phase = Phase::Apply(price);
    }

    fn track(&self, kind: TrackKind) -> &Track {
        match kind {
            TrackKind::Unconstrained => &self.schedule.unconstrained,
            TrackKind::Constrained => &self.schedule.constrained,
        }
    }

    /// Sets up iteration `i` of `kind`, or returns the price to hold for the
    /// rest of the season when the iteration cannot run.
    fn start_iteration(&mut self, kind: TrackKind, i: usize) -> Option<f64> {
        let track = self.track(kind);
        let mut tau = track.durations[i - 1] * self.horizon;
        let kappa = track.grid_sizes[i - 1];
        let remaining = self.horizon - self.clock;
        let fallback = self.fallback_price(kind);
        if tau > remaining * (1.0 + 1e-12) {
            match fallback {
                Some(p) => {
                    self.diag.ran_out_of_time = true;
                    return Some(p);
                }
                // nothing learned yet: squeeze the first sweep into the season
                None => tau = remaining,
            }
        }
        let (lo, hi) = self.interval;
        if hi - lo <= f64::EPSILON * kappa as f64 * hi.abs().max(1.0) {
            self.diag.degenerate_interval = true;
            return Some(fallback.unwrap_or(lo));
        }
        if !(tau > 0.0) {
            return Some(fallback.unwrap_or(lo));
        }
        self.diag.intervals.push((lo, hi));
        self.sweep = Some(GridSweep::new(lo, hi, kappa, tau / kappa as f64));
        None
    }

    fn finish_iteration(&mut self, kind: TrackKind, i: usize, sweep: GridSweep) {
        let g = sweep.granularity();
        let revenue_price = sweep.best_revenue_price(self.market_size);
        let runout_price = sweep.best_runout_price(self.market_size, self.runout_rate);
        let mut record = IterationRecord {
            track: kind,
            index: i,
            lo: sweep.lo,
            hi: sweep.hi,
            kappa: sweep.kappa(),
            revenue_price,
            runout_price,
            center: f64::NAN,
            next_untruncated: (f64::NAN, f64::NAN),
        };
        match kind {
            TrackKind::Unconstrained => {
                if runout_price > revenue_price + 2.0 * self.log_n.sqrt() * g {
                    self.switch_iteration = Some(i);
                    self.switch_runout = Some(runout_price);
                    self.diag.switched_to_constrained = true;
                    self.interval = match self.step3_interval {
                        Step3Interval::FullInterval => (self.floor, self.ceil),
                        Step3Interval::LastInterval => (sweep.lo, sweep.hi),
                    };
                    record.center = runout_price;
                    self.history.push(record);
                    self.phase = Phase::Constrained(1);
                    return;
                }
                let center = revenue_price.max(runout_price);
                let (below, above) = (self.log_n / 3.0, 2.0 * self.log_n / 3.0);
                record.center = center;
                record.next_untruncated = (center - below * g, center + above * g);
                self.history.push(record);
                self.interval = shrink(center, g, below, above, self.floor, self.ceil);
                self.last_unconstrained = Some((center, g));
                if i >= self.schedule.unconstrained.iterations() {
                    self.enter_apply(self.adjusted(center, g));
                } else {
                    self.phase = Phase::Unconstrained(i + 1);
                }
            }
            TrackKind::Constrained => {
                let half = self.log_n / 2.0;
                record.center = runout_price;
                record.next_untruncated = (runout_price - half * g, runout_price + half * g);
                self.history.push(record);
                self.interval = shrink(runout_price, g, half, half, self.floor, self.ceil);
                self.last_constrained = Some(runout_price);
                if i >= self.schedule.constrained.iterations() {
                    self.enter_apply(runout_price);
                } else {
                    self.phase = Phase::Constrained(i + 1);
                }
            }
        }
    }
}

impl PricingPolicy for DpaPolicy {
    fn next_segment(&mut self, last: Option<Observation>) -> Decision {
        if let Some(obs) = last {
            self.clock = obs.clock;
            if self.awaiting {
                if let Some(sweep) = self.sweep.as_mut() {
                    sweep.record(obs.sales);
                }
                self.awaiting = false;
            }
        }
        loop {
            let (kind, i) = match self.phase {
                Phase::Done => return Decision::Finished,
                Phase::Apply(p) => {
                    self.phase = Phase::Done;
                    let remaining = self.horizon - self.clock;
                    if remaining > 0.0 {
                        return Decision::Segment {
                            price: Price::Posted(p),
                            duration: remaining,
                        };
                    }
                    continue;
                }
                Phase::Unconstrained(i) => (TrackKind::Unconstrained, i),
                Phase::Constrained(i) => (TrackKind::Constrained, i),
            };
            if self.sweep.is_none() {
                if let Some(p) = self.start_iteration(kind, i) {
                    self.enter_apply(p);
                    continue;
                }
            }
            let sweep = self.sweep.as_ref().expect("sweep in progress");
            if let Some(p) = sweep.next_price() {
                self.awaiting = true;
                return Decision::Segment {
                    price: Price::Posted(p),
                    duration: sweep.hold,
                };
            }
            let sweep = self.sweep.take().expect("sweep in progress");
            self.finish_iteration(kind, i, sweep);
        }
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        self.diag.clone()
    }
}
