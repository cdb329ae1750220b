//! Reference policies: a fixed price (the clairvoyant one holds `p^D`) and
//! learn-then-earn with a single grid sweep.

use crate::demand::{Price, ProblemInstance};
use crate::error::{Error, Result};
use crate::market_sim::{Decision, Observation, PolicyDiagnostics, PricingPolicy};

use super::grid::GridSweep;

/// Holds one price for the whole season.
#[derive(Clone, Debug)]
pub struct FixedPricePolicy {
    price: Price,
    horizon: f64,
    issued: bool,
}

impl FixedPricePolicy {
    pub fn new(price: Price, horizon: f64) -> Self {
        Self {
            price,
            horizon,
            issued: false,
        }
    }

    /// Fixed price at the deterministic optimum of the true demand.
    pub fn clairvoyant(instance: &ProblemInstance) -> Self {
        Self::new(Price::Posted(instance.deterministic_price()), instance.horizon)
    }

    pub fn price(&self) -> Price {
        self.price
    }
}

impl PricingPolicy for FixedPricePolicy {
    fn next_segment(&mut self, _: Option<Observation>) -> Decision {
        if self.issued {
            return Decision::Finished;
        }
        self.issued = true;
        Decision::Segment {
            price: self.price,
            duration: self.horizon,
        }
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics {
            final_price: self.price.posted(),
            ..Default::default()
        }
    }
}

/// Default learning share `n^{-1/4}` of the single-sweep baseline.
pub fn default_learn_fraction(n: f64) -> f64 {
    n.powf(-0.25)
}

/// Default grid size `⌈n^{1/4}⌉`, at least 2.
pub fn default_grid_size(n: f64) -> usize {
    (n.powf(0.25).ceil() as usize).max(2)
}

/// Tests an even grid over the whole interval during the first
/// `learn_fraction` of the season, then holds `max(p̂^u, p̂^c)`.
#[derive(Clone, Debug)]
pub struct SinglePhasePolicy {
    sweep: GridSweep,
    market_size: f64,
    runout_rate: f64,
    horizon: f64,
    awaiting: bool,
    clock: f64,
    applied: Option<f64>,
    done: bool,
}

impl SinglePhasePolicy {
    pub fn new(instance: &ProblemInstance, learn_fraction: f64, grid_size: usize) -> Result<Self> {
        if !(learn_fraction > 0.0 && learn_fraction < 1.0) {
            return Err(Error::domain(format!(
                "learn_fraction must lie in (0, 1), got {learn_fraction}"
            )));
        }
        if grid_size < 2 {
            return Err(Error::domain(format!("grid_size must be at least 2, got {grid_size}")));
        }
        let d = &instance.demand;
        let hold = learn_fraction * instance.horizon / grid_size as f64;
        Ok(Self {
            sweep: GridSweep::new(d.price_floor(), d.price_ceil(), grid_size, hold),
            market_size: instance.n(),
            runout_rate: instance.inventory / instance.horizon,
            horizon: instance.horizon,
            awaiting: false,
            clock: 0.0,
            applied: None,
            done: false,
        })
    }

    pub fn with_defaults(instance: &ProblemInstance) -> Result<Self> {
        let n = instance.n();
        Self::new(instance, default_learn_fraction(n), default_grid_size(n))
    }
}

impl PricingPolicy for SinglePhasePolicy {
    fn next_segment(&mut self, last: Option<Observation>) -> Decision {
        if let Some(obs) = last {
            self.clock = obs.clock;
            if self.awaiting {
                self.sweep.record(obs.sales);
                self.awaiting = false;
            }
        }
        if self.done {
            return Decision::Finished;
        }
        if let Some(p) = self.sweep.next_price() {
            self.awaiting = true;
            return Decision::Segment {
                price: Price::Posted(p),
                duration: self.sweep.hold,
            };
        }
        let p = self
            .sweep
            .best_revenue_price(self.market_size)
            .max(self.sweep.best_runout_price(self.market_size, self.runout_rate));
        self.applied = Some(p);
        self.done = true;
        Decision::Segment {
            price: Price::Posted(p),
            duration: (self.horizon - self.clock).max(0.0),
        }
    }

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics {
            intervals: vec![(self.sweep.lo, self.sweep.hi)],
            final_price: self.applied,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandModel;
    use crate::market_sim::run_policy;

    fn lin(n: u64) -> ProblemInstance {
        let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
        ProblemInstance::new(m, 20.0, 1.0, n).unwrap()
    }

    #[test]
    fn clairvoyant_is_one_segment_at_pd() {
        let inst = lin(1000);
        let mut p = FixedPricePolicy::clairvoyant(&inst);
        let tr = run_policy(&inst, &mut p, 9).unwrap();
        assert_eq!(tr.segments.len(), 1);
        let price = tr.segments[0].price.posted().unwrap();
        assert!((price - 5.0).abs() < 1e-8);
        assert_eq!(tr.segments[0].duration, 1.0);
    }

    #[test]
    fn single_phase_structure() {
        let inst = lin(1000);
        let mut p = SinglePhasePolicy::new(&inst, 0.1, 10).unwrap();
        let tr = run_policy(&inst, &mut p, 9).unwrap();
        assert_eq!(tr.segments.len(), 11);
        for s in &tr.segments[..10] {
            assert!((s.duration - 0.01).abs() < 1e-15);
        }
        assert!((tr.segments[10].duration - 0.9).abs() < 1e-9);
        assert!((tr.end_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_phase_validates() {
        let inst = lin(10);
        assert!(SinglePhasePolicy::new(&inst, 0.0, 10).is_err());
        assert!(SinglePhasePolicy::new(&inst, 1.0, 10).is_err());
        assert!(SinglePhasePolicy::new(&inst, 0.5, 1).is_err());
    }

    #[test]
    fn single_phase_is_consistent_at_huge_n() {
        // plenty of data per grid point: the estimate lands on the grid point nearest p^D
        let inst = lin(1_000_000_000);
        let mut p = SinglePhasePolicy::new(&inst, 0.1, 100).unwrap();
        run_policy(&inst, &mut p, 3).unwrap();
        let fp = p.diagnostics().final_price.unwrap();
        assert!((fp - 5.0).abs() <= 0.099 + 1e-9, "{fp}");
    }

    #[test]
    fn defaults() {
        assert_eq!(default_grid_size(1e4), 10);
        assert!((default_learn_fraction(1e4) - 0.1).abs() < 1e-15);
        assert_eq!(default_grid_size(1.0), 2);
    }
}
