//! Inventory-constrained Poisson selling season.
//!
//! Prices are piecewise constant, so a segment at price `p` lasting `Δ` in a
//! market of size `n` sells `min(Poisson(n·λ(p)·Δ), remaining stock)` units.
//! Only counts per segment are drawn, never arrival times.
//!
//! Randomness is counter-based: segment `k` of a replication draws from the
//! ChaCha stream `k` of the replication seed. A policy that changes how many
//! segments it requests therefore leaves the draws of earlier segments intact.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::demand::{DemandModel, Price, ProblemInstance};
use crate::error::{Error, Result};

/// Exact Poisson draw; `mean <= 0` gives zero.
pub fn sample_poisson<R: rand::Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    // mean is finite and positive, far below the sampler's upper limit here
    let dist = Poisson::new(mean).expect("valid Poisson mean");
    dist.sample(rng) as u64
}

/// RNG for segment `index` of the replication seeded with `seed`.
pub fn segment_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mutable state of one simulated season.
#[derive(Clone, Debug)]
pub struct MarketState {
    pub remaining_inventory: u64,
    pub clock: f64,
    pub revenue: f64,
    horizon: f64,
    seed: u64,
    segments_drawn: u64,
}

/// Demand drawn in a segment and the part of it that could be served.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentOutcome {
    pub demand: u64,
    pub sales: u64,
}

impl MarketState {
    pub fn new(initial_inventory: u64, horizon: f64, seed: u64) -> Self {
        Self {
            remaining_inventory: initial_inventory,
            clock: 0.0,
            revenue: 0.0,
            horizon,
            seed,
            segments_drawn: 0,
        }
    }

    pub fn for_instance(instance: &ProblemInstance, seed: u64) -> Self {
        Self::new(instance.scaled_inventory(), instance.horizon, seed)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Sells at a constant price for `duration` and advances the clock.
    pub fn simulate_segment(
        &mut self,
        model: &DemandModel,
        market_size: f64,
        price: Price,
        duration: f64,
    ) -> Result<SegmentOutcome> {
        if !(duration >= 0.0) {
            return Err(Error::domain(format!("segment duration must be >= 0, got {duration}")));
        }
        if self.clock + duration > self.horizon + 1e-12 * self.horizon.max(1.0) {
            return Err(Error::Protocol(format!(
                "segment [{}, {}] runs past the horizon {}",
                self.clock,
                self.clock + duration,
                self.horizon
            )));
        }
        let rate = model.rate(price)?;
        let mut rng = segment_rng(self.seed, self.segments_drawn);
        self.segments_drawn += 1;
        let demand = sample_poisson(market_size * rate * duration, &mut rng);
        let sales = demand.min(self.remaining_inventory);
        self.remaining_inventory -= sales;
        self.clock = (self.clock + duration).min(self.horizon);
        self.revenue += price.unit_revenue() * sales as f64;
        Ok(SegmentOutcome { demand, sales })
    }
}

/// One constant-price piece of a season.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub price: Price,
    pub start: f64,
    pub duration: f64,
    pub sales: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub segments: Vec<Segment>,
    pub initial_inventory: u64,
    pub remaining_inventory: u64,
    pub terminal_revenue: f64,
    pub stockout_time: Option<f64>,
}

impl SimulationTrace {
    pub fn units_sold(&self) -> u64 {
        self.segments.iter().map(|s| s.sales).sum()
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.start + s.duration)
    }

    /// Appends this trace as CSV rows `rep_id,seg_index,price,t_start,duration,sales,revenue_cum`.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W, rep_id: u64) -> std::io::Result<()> {
        let mut cum = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            cum += s.price.unit_revenue() * s.sales as f64;
            writeln!(
                out,
                "{rep_id},{k},{},{},{},{},{cum}",
                s.price, s.start, s.duration, s.sales
            )?;
        }
        Ok(())
    }
}

pub const TRACE_CSV_COLUMNS: &str = "rep_id,seg_index,price,t_start,duration,sales,revenue_cum";

/// What a policy learns after each segment it requested.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    /// Units sold in the segment, capped by the stock on hand.
    pub sales: u64,
    /// Simulator clock at the end of the segment.
    pub clock: f64,
}

/// A policy's answer to "what next?".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decision {
    Segment { price: Price, duration: f64 },
    Finished,
}

/// Extra per-run facts exposed by learning policies for property checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolicyDiagnostics {
    /// Price intervals in the order they were tested.
    pub intervals: Vec<(f64, f64)>,
    /// Whether the learning policy switched to its constrained track.
    pub switched_to_constrained: bool,
    /// Price used for the remainder of the season once learning stopped.
    pub final_price: Option<f64>,
    /// Learning stopped early because an interval collapsed to a point.
    pub degenerate_interval: bool,
    /// Learning stopped early because the next iteration did not fit in time.
    pub ran_out_of_time: bool,
}

/// Segment-request contract between policies and the simulator.
///
/// The simulator calls `next_segment(None)` first and then once after every
/// segment with the capped sales of that segment. The policy answers with a
/// price and a duration; durations must add up to the horizon, or the policy
/// says it is finished and the simulator fills the rest at the cutoff price.
pub trait PricingPolicy {
    fn next_segment(&mut self, last: Option<Observation>) -> Decision;

    fn diagnostics(&self) -> PolicyDiagnostics {
        PolicyDiagnostics::default()
    }
}

const MAX_SEGMENTS: usize = 10_000_000;

/// Runs one season of `policy` against the true demand of `instance`.
///
/// Once stock runs out the remainder of the season is priced at the cutoff
/// and the policy is not consulted again.
pub fn run_policy(instance: &ProblemInstance, policy: &mut dyn PricingPolicy, seed: u64) -> Result<SimulationTrace> {
    let model = &instance.demand;
    let horizon = instance.horizon;
    let end_tol = 1e-12 * horizon.max(1.0);
    let mut state = MarketState::for_instance(instance, seed);
    let initial_inventory = state.remaining_inventory;
    let mut segments = Vec::new();
    let mut stockout_time = None;
    let mut last = None;

    for _ in 0..MAX_SEGMENTS {
        if state.clock >= horizon - end_tol {
            return Ok(finish(segments, initial_inventory, &state, stockout_time));
        }
        if state.remaining_inventory == 0 {
            stockout_time.get_or_insert(state.clock);
            segments.push(Segment {
                price: Price::Cutoff,
                start: state.clock,
                duration: horizon - state.clock,
                sales: 0,
            });
            state.clock = horizon;
            continue;
        }
        let (price, duration) = match policy.next_segment(last) {
            Decision::Finished => (Price::Cutoff, horizon - state.clock),
            Decision::Segment { price, duration } => (price, duration),
        };
        if let Price::Posted(p) = price {
            if !model.is_feasible(p) {
                return Err(Error::Protocol(format!(
                    "policy posted {p}, outside [{}, {}] and not the cutoff",
                    model.price_floor(),
                    model.price_ceil()
                )));
            }
        }
        if !(duration >= 0.0) {
            return Err(Error::Protocol(format!("policy asked for duration {duration}")));
        }
        if state.clock + duration > horizon + 1e-9 * horizon.max(1.0) {
            return Err(Error::Protocol(format!(
                "policy asked for [{}, {}] past the horizon {horizon}",
                state.clock,
                state.clock + duration
            )));
        }
        let duration = duration.min(horizon - state.clock);
        let price = match price {
            Price::Posted(p) => Price::Posted(model.clamp(p)),
            cutoff => cutoff,
        };
        let start = state.clock;
        let outcome = state.simulate_segment(model, instance.n(), price, duration)?;
        if duration > 0.0 {
            segments.push(Segment {
                price,
                start,
                duration,
                sales: outcome.sales,
            });
        }
        if state.remaining_inventory == 0 && outcome.sales > 0 {
            stockout_time = Some(state.clock);
        }
        last = Some(Observation {
            sales: outcome.sales,
            clock: state.clock,
        });
    }
    Err(Error::Protocol(format!(
        "policy did not finish within {MAX_SEGMENTS} segments"
    )))
}

fn finish(
    segments: Vec<Segment>,
    initial_inventory: u64,
    state: &MarketState,
    stockout_time: Option<f64>,
) -> SimulationTrace {
    let terminal_revenue = segments.iter().map(|s| s.price.unit_revenue() * s.sales as f64).sum();
    SimulationTrace {
        segments,
        initial_inventory,
        remaining_inventory: state.remaining_inventory,
        terminal_revenue,
        stockout_time,
    }
}

/// Empirical tail frequencies of a Poisson count around its mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFrequency {
    /// `r_n·ε_n`, the half-width of the deviation band.
    pub band: f64,
    /// Fraction of draws with `N - μ·r_n > r_n·ε_n`.
    pub upper: f64,
    /// Fraction of draws with `N - μ·r_n < -r_n·ε_n`.
    pub lower: f64,
}

/// Draws `N(μ·r_n)` `reps` times and reports how often it leaves the band
/// `r_n·ε_n` with `ε_n = 2·sqrt(η·M·ln n / r_n)`.
pub fn poisson_tail_check(
    mu: f64,
    rate_bound: f64,
    n: f64,
    r_n: f64,
    eta: f64,
    reps: u64,
    seed: u64,
) -> Result<TailFrequency> {
    if !(mu >= 0.0 && mu <= rate_bound) {
        return Err(Error::domain(format!("mean rate {mu} must lie in [0, {rate_bound}]")));
    }
    if !(n > 1.0 && r_n > 0.0 && eta > 0.0) || reps == 0 {
        return Err(Error::domain("tail check needs n > 1, r_n > 0, eta > 0 and reps > 0"));
    }
    let eps = 2.0 * (eta * rate_bound * n.ln() / r_n).sqrt();
    let band = r_n * eps;
    let mean = mu * r_n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut upper, mut lower) = (0u64, 0u64);
    for _ in 0..reps {
        let dev = sample_poisson(mean, &mut rng) as f64 - mean;
        if dev > band {
            upper += 1;
        } else if dev < -band {
            lower += 1;
        }
    }
    Ok(TailFrequency {
        band,
        upper: upper as f64 / reps as f64,
        lower: lower as f64 / reps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin_instance(n: u64) -> ProblemInstance {
        let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
        ProblemInstance::new(m, 20.0, 1.0, n).unwrap()
    }

    struct Script(Vec<(Price, f64)>, usize);

    impl PricingPolicy for Script {
        fn next_segment(&mut self, _: Option<Observation>) -> Decision {
            let d = self
                .0
                .get(self.1)
                .map_or(Decision::Finished, |&(price, duration)| Decision::Segment {
                    price,
                    duration,
                });
            self.1 += 1;
            d
        }
    }

    #[test]
    fn empty_and_cutoff_segments_sell_nothing() {
        let inst = lin_instance(100);
        let mut s = MarketState::for_instance(&inst, 7);
        let before = s.clone();
        let out = s
            .simulate_segment(&inst.demand, 100.0, Price::Posted(5.0), 0.0)
            .unwrap();
        assert_eq!(out.sales, 0);
        assert_eq!(
            (s.remaining_inventory, s.clock, s.revenue),
            (before.remaining_inventory, before.clock, before.revenue)
        );
        let out = s.simulate_segment(&inst.demand, 100.0, Price::Cutoff, 0.5).unwrap();
        assert_eq!(out, SegmentOutcome { demand: 0, sales: 0 });
        assert_eq!(s.clock, 0.5);
    }

    #[test]
    fn segment_rejects_bad_durations() {
        let inst = lin_instance(100);
        let mut s = MarketState::for_instance(&inst, 7);
        assert!(matches!(
            s.simulate_segment(&inst.demand, 100.0, Price::Posted(5.0), -0.1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            s.simulate_segment(&inst.demand, 100.0, Price::Posted(5.0), 1.5),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn stockout_truncates_and_shuts_off() {
        // tiny stock, huge demand
        let m = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
        let inst = ProblemInstance::new(m, 0.01, 1.0, 1000).unwrap();
        let mut p = Script(vec![(Price::Posted(1.0), 0.5), (Price::Posted(1.0), 0.5)], 0);
        let tr = run_policy(&inst, &mut p, 3).unwrap();
        assert_eq!(tr.initial_inventory, 10);
        assert_eq!(tr.units_sold(), 10);
        assert_eq!(tr.remaining_inventory, 0);
        assert_eq!(tr.stockout_time, Some(0.5));
        assert_eq!(tr.segments.len(), 2);
        assert_eq!(tr.segments[1].price, Price::Cutoff);
        assert_eq!(tr.end_time(), 1.0);
        assert_eq!(tr.terminal_revenue, 10.0);
    }

    #[test]
    fn finished_early_is_filled_with_cutoff() {
        let inst = lin_instance(10);
        let mut p = Script(vec![(Price::Posted(5.0), 0.25)], 0);
        let tr = run_policy(&inst, &mut p, 1).unwrap();
        assert_eq!(tr.segments.len(), 2);
        assert_eq!(tr.segments[1].price, Price::Cutoff);
        assert_eq!(tr.segments[1].start, 0.25);
        assert_eq!(tr.end_time(), 1.0);
    }

    #[test]
    fn protocol_errors() {
        let inst = lin_instance(10);
        let mut p = Script(vec![(Price::Posted(12.0), 1.0)], 0);
        assert!(matches!(run_policy(&inst, &mut p, 1), Err(Error::Protocol(_))));
        let mut p = Script(vec![(Price::Posted(5.0), 2.0)], 0);
        assert!(matches!(run_policy(&inst, &mut p, 1), Err(Error::Protocol(_))));
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let inst = lin_instance(1000);
        let script = vec![
            (Price::Posted(5.0), 0.3),
            (Price::Posted(2.0), 0.3),
            (Price::Posted(8.0), 0.4),
        ];
        let a = run_policy(&inst, &mut Script(script.clone(), 0), 99).unwrap();
        let b = run_policy(&inst, &mut Script(script, 0), 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn segment_draws_do_not_depend_on_later_segments() {
        let inst = lin_instance(1000);
        let a = run_policy(
            &inst,
            &mut Script(vec![(Price::Posted(5.0), 0.3), (Price::Posted(2.0), 0.7)], 0),
            5,
        )
        .unwrap();
        let b = run_policy(
            &inst,
            &mut Script(vec![(Price::Posted(5.0), 0.3), (Price::Posted(9.0), 0.7)], 0),
            5,
        )
        .unwrap();
        assert_eq!(a.segments[0], b.segments[0]);
    }

    #[test]
    fn tail_check_degenerate_mean() {
        let t = poisson_tail_check(0.0, 29.7, 1e4, 1e4, 1.0, 1000, 1).unwrap();
        assert_eq!((t.upper, t.lower), (0.0, 0.0));
        assert!(poisson_tail_check(40.0, 29.7, 1e4, 1e4, 1.0, 10, 1).is_err());
    }

    #[test]
    fn csv_rows() {
        let inst = lin_instance(10);
        let mut p = Script(vec![(Price::Posted(5.0), 1.0)], 0);
        let tr = run_policy(&inst, &mut p, 1).unwrap();
        let mut buf = Vec::new();
        tr.write_csv_rows(&mut buf, 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let fields: Vec<&str> = text.trim().split(',').collect();
        assert_eq!(fields[0], "3");
        assert_eq!(fields[2], "5");
        assert_eq!(fields[6].parse::<f64>().unwrap(), tr.terminal_revenue);
    }
}
