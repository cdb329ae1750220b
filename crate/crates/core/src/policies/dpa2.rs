//! Single-track learning for demand whose revenue has a kink at its maximum.
//!
//! Each iteration recenters on `max(p̂^u, p̂^c)` and keeps `log n / 2` grid
//! steps on each side. The last estimate is held unadjusted for the rest of
//! the season.

use crate::demand::{Price, ProblemInstance};
use crate::error::Result;
use crate::market_sim::{Decision, Observation, PolicyDiagnostics, PricingPolicy};

use super::grid::{shrink, GridSweep};
use super::schedule::{build_single_track, LogMode, Track};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    Learn(usize),
    Apply(f64),
    Done,
}

#[derive(Clone, Debug)]
pub struct Dpa2Policy {
    track: Track,
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
    last_center: Option<f64>,
    centers: Vec<f64>,
    diag: PolicyDiagnostics,
}

impl Dpa2Policy {
    pub fn new(instance: &ProblemInstance, delta: f64, log_mode: LogMode) -> Result<Self> {
        let track = build_single_track(instance.n(), delta, log_mode)?;
        let (floor, ceil) = (instance.demand.price_floor(), instance.demand.price_ceil());
        Ok(Self {
            track,
            market_size: instance.n(),
            log_n: instance.n().ln(),
            runout_rate: instance.inventory / instance.horizon,
            horizon: instance.horizon,
            floor,
            ceil,
            phase: Phase::Learn(1),
            interval: (floor, ceil),
            sweep: None,
            awaiting: false,
            clock: 0.0,
            last_center: None,
            centers: Vec::new(),
            diag: PolicyDiagnostics::default(),
        })
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    /// Recentering prices `p̂_i` in iteration order.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    fn enter_apply(&mut self, price: f64) {
        self.diag.final_price = Some(price);
        self.phase = Phase::Apply(price);
    }

    fn start_iteration(&mut self, i: usize) -> Option<f64> {
        let mut tau = self.track.durations[i - 1] * self.horizon;
        let kappa = self.track.grid_sizes[i - 1];
        let remaining = self.horizon - self.clock;
        if tau > remaining * (1.0 + 1e-12) {
            match self.last_center {
                Some(p) => {
                    self.diag.ran_out_of_time = true;
                    return Some(p);
                }
                None => tau = remaining,
            }
        }
        let (lo, hi) = self.interval;
        if hi - lo <= f64::EPSILON * kappa as f64 * hi.abs().max(1.0) {
            self.diag.degenerate_interval = true;
            return Some(self.last_center.unwrap_or(lo));
        }
        if !(tau > 0.0) {
            return Some(self.last_center.unwrap_or(lo));
        }
        self.diag.intervals.push((lo, hi));
        self.sweep = Some(GridSweep::new(lo, hi, kappa, tau / kappa as f64));
        None
    }

    fn finish_iteration(&mut self, i: usize, sweep: GridSweep) {
        let g = sweep.granularity();
        let center = sweep
            .best_revenue_price(self.market_size)
            .max(sweep.best_runout_price(self.market_size, self.runout_rate));
        self.centers.push(center);
        self.last_center = Some(center);
        let half = self.log_n / 2.0;
        self.interval = shrink(center, g, half, half, self.floor, self.ceil);
        if i >= self.track.iterations() {
            self.enter_apply(center);
        } else {
            self.phase = Phase::Learn(i + 1);
        }
    }
}

impl PricingPolicy for Dpa2Policy {
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
            let i = match self.phase {
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
                Phase::Learn(i) => i,
            };
            if self.sweep.is_none() {
                if let Some(p) = self.start_iteration(i) {
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
            self.finish_iteration(i, sweep);
        }
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        self.diag.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandModel;
    use crate::market_sim::run_policy;

    #[test]
    fn first_segment_and_iteration_cap() {
        let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
        let inst = ProblemInstance::new(m, 20.0, 1.0, 100_000).unwrap();
        let mut p = Dpa2Policy::new(&inst, 0.49, LogMode::Practical).unwrap();
        assert!(p.track().iterations() <= 8);
        let (tau, kappa) = (p.track().durations[0], p.track().grid_sizes[0]);
        assert_eq!(
            p.next_segment(None),
            Decision::Segment {
                price: Price::Posted(0.1),
                duration: tau / kappa as f64
            }
        );
    }

    #[test]
    fn final_price_is_last_center() {
        let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
        let inst = ProblemInstance::new(m, 20.0, 1.0, 10_000).unwrap();
        let mut p = Dpa2Policy::new(&inst, 0.49, LogMode::Practical).unwrap();
        run_policy(&inst, &mut p, 4).unwrap();
        assert_eq!(p.diagnostics().final_price, p.centers().last().copied());
    }
}
