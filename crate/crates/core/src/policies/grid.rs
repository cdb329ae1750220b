//! One price-testing sweep: a grid of left endpoints over an interval, each
//! held for the same time, followed by the empirical price estimates.

/// A sweep over `kappa` equally spaced left endpoints of `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct GridSweep {
    pub lo: f64,
    pub hi: f64,
    /// Time each test price is held, in horizon units.
    pub hold: f64,
    prices: Vec<f64>,
    sales: Vec<u64>,
}

impl GridSweep {
    pub fn new(lo: f64, hi: f64, kappa: usize, hold: f64) -> Self {
        let step = (hi - lo) / kappa as f64;
        let prices = (0..kappa).map(|j| lo + j as f64 * step).collect();
        Self {
            lo,
            hi,
            hold,
            prices,
            sales: Vec::with_capacity(kappa),
        }
    }

    pub fn kappa(&self) -> usize {
        self.prices.len()
    }

    /// Grid spacing `(hi - lo) / κ`.
    pub fn granularity(&self) -> f64 {
        (self.hi - self.lo) / self.kappa() as f64
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Price to test next, if any remain.
    pub fn next_price(&self) -> Option<f64> {
        self.prices.get(self.sales.len()).copied()
    }

    pub fn record(&mut self, sales: u64) {
        debug_assert!(self.sales.len() < self.prices.len());
        self.sales.push(sales);
    }

    pub fn is_complete(&self) -> bool {
        self.sales.len() == self.prices.len()
    }

    /// Observed demand rates `sales / (n·hold)` in unscaled units.
    pub fn rate_estimates(&self, market_size: f64) -> Vec<f64> {
        self.sales
            .iter()
            .map(|&s| s as f64 / (market_size * self.hold))
            .collect()
    }

    /// Tested price with the highest empirical revenue rate.
    pub fn best_revenue_price(&self, market_size: f64) -> f64 {
        let est = self.rate_estimates(market_size);
        argbest(&self.prices, |j| self.prices[j] * est[j], |a, b| a > b)
    }

    /// Tested price whose empirical rate is closest to `runout_rate`.
    pub fn best_runout_price(&self, market_size: f64, runout_rate: f64) -> f64 {
        let est = self.rate_estimates(market_size);
        argbest(&self.prices, |j| (est[j] - runout_rate).abs(), |a, b| a < b)
    }
}

// ties go to the smallest price since prices are scanned in increasing order
fn argbest(prices: &[f64], score: impl Fn(usize) -> f64, better: impl Fn(f64, f64) -> bool) -> f64 {
    let mut best = 0;
    let mut best_score = score(0);
    for j in 1..prices.len() {
        let s = score(j);
        if better(s, best_score) {
            best = j;
            best_score = s;
        }
    }
    prices[best]
}

/// `[center - below·g, center + above·g] ∩ [floor, ceil]`.
pub fn shrink(center: f64, granularity: f64, below: f64, above: f64, floor: f64, ceil: f64) -> (f64, f64) {
    (
        (center - below * granularity).max(floor),
        (center + above * granularity).min(ceil),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_uses_left_endpoints() {
        let g = GridSweep::new(0.0, 1.0, 4, 0.01);
        assert_eq!(g.prices(), &[0.0, 0.25, 0.5, 0.75]);
        assert_eq!(g.granularity(), 0.25);
    }

    #[test]
    fn estimates_and_ties() {
        let mut g = GridSweep::new(1.0, 5.0, 4, 0.5);
        for s in [40, 20, 10, 8] {
            g.record(s);
        }
        assert!(g.is_complete());
        // rates 40, 20, 10, 8 at n = 2, hold 0.5; revenues 40, 40, 30, 32
        assert_eq!(g.rate_estimates(2.0), vec![40.0, 20.0, 10.0, 8.0]);
        assert_eq!(g.best_revenue_price(2.0), 1.0);
        // |rate - 15| = 25, 5, 5, 7: tie goes to the smaller price
        assert_eq!(g.best_runout_price(2.0, 15.0), 2.0);
    }

    #[test]
    fn shrink_example() {
        // interval [0.4, 0.6], κ = 4, center 0.5, log n = 9
        let g = 0.2 / 4.0;
        let (lo, hi) = shrink(0.5, g, 9.0 / 3.0, 2.0 * 9.0 / 3.0, 0.1, 10.0);
        assert!((lo - 0.35).abs() < 1e-12 && (hi - 0.8).abs() < 1e-12);
        let (lo, hi) = shrink(0.5, g, 3.0, 6.0, 0.4, 0.7);
        assert_eq!((lo, hi), (0.4, 0.7));
    }
}
