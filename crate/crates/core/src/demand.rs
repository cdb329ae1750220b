//! Regular demand curves, their regularity constants, and the deterministic
//! full-information benchmark.
//!
//! A demand curve maps a posted price `p` to a Poisson arrival rate `λ(p)`.
//! It is strictly decreasing on `[p_floor, p_ceil]`, has an inverse `γ(λ)`,
//! and the revenue rate `r(λ) = λ·γ(λ)` is strictly concave. Besides the
//! interval, every model accepts the symbolic cutoff price at which demand is
//! shut off.
//!
//! Models stay in user units. Policies that need the normalized `T = 1`,
//! `p_ceil - p_floor = 1` frame do that conversion themselves.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, golden_section_max, is_unimodal, parabolic_polish, MAX_ITER, PRICE_TOL};

/// A price the seller can post: a point of the feasible interval or the
/// cutoff price with zero demand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Price {
    Posted(f64),
    Cutoff,
}

impl Price {
    pub fn posted(&self) -> Option<f64> {
        match self {
            Price::Posted(p) => Some(*p),
            Price::Cutoff => None,
        }
    }

    /// Revenue earned per unit sold. Nothing sells at the cutoff, so zero.
    pub fn unit_revenue(&self) -> f64 {
        self.posted().unwrap_or(0.0)
    }

    pub fn is_cutoff(&self) -> bool {
        matches!(self, Price::Cutoff)
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Price::Posted(p) => write!(f, "{p}"),
            Price::Cutoff => f.write_str("cutoff"),
        }
    }
}

/// Parametric (or tabulated) shape of `λ(p)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DemandFamily {
    /// `λ(p) = a - b·p`
    Linear { a: f64, b: f64 },
    /// `λ(p) = a·exp(-b·p)`
    Exponential { a: f64, b: f64 },
    /// `λ(p) = exp(-a - b·p) / (1 + exp(-a - b·p))`
    Logit { a: f64, b: f64 },
    /// `λ(p; z) = 1/2 + z - z·p`, the one-parameter worst-case family.
    WorstCaseLinear { z: f64 },
    /// Linear interpolation through `(price, rate)` knots, prices increasing
    /// and rates strictly decreasing.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl DemandFamily {
    fn linear_coeffs(&self) -> Option<(f64, f64)> {
        match *self {
            DemandFamily::Linear { a, b } => Some((a, b)),
            DemandFamily::WorstCaseLinear { z } => Some((0.5 + z, z)),
            _ => None,
        }
    }

    fn rate(&self, p: f64) -> f64 {
        if let DemandFamily::WorstCaseLinear { z } = self {
            // exact 1/2 at p = 1 for every z
            return 0.5 + z * (1.0 - p);
        }
        if let Some((a, b)) = self.linear_coeffs() {
            return a - b * p;
        }
        match self {
            DemandFamily::Exponential { a, b } => a * (-b * p).exp(),
            DemandFamily::Logit { a, b } => 1.0 / (1.0 + (a + b * p).exp()),
            DemandFamily::Tabulated { knots } => {
                let k = tab_segment(knots, p);
                let (p0, l0) = knots[k];
                let (p1, l1) = knots[k + 1];
                l0 + (l1 - l0) * (p - p0) / (p1 - p0)
            }
            _ => unreachable!(),
        }
    }

    /// `λ'(p)`. For tabulated curves this is the slope of the piece to the
    /// right of `p` (left piece at the last knot).
    fn rate_slope(&self, p: f64) -> f64 {
        if let Some((_, b)) = self.linear_coeffs() {
            return -b;
        }
        match self {
            DemandFamily::Exponential { a, b } => -a * b * (-b * p).exp(),
            DemandFamily::Logit { b, .. } => {
                let l = self.rate(p);
                -b * l * (1.0 - l)
            }
            DemandFamily::Tabulated { knots } => {
                let k = tab_segment(knots, p);
                (knots[k + 1].1 - knots[k].1) / (knots[k + 1].0 - knots[k].0)
            }
            _ => unreachable!(),
        }
    }

    fn inverse(&self, lambda: f64) -> f64 {
        if let Some((a, b)) = self.linear_coeffs() {
            return (a - lambda) / b;
        }
        match self {
            DemandFamily::Exponential { a, b } => (a / lambda).ln() / b,
            DemandFamily::Logit { a, b } => (((1.0 - lambda) / lambda).ln() - a) / b,
            DemandFamily::Tabulated { knots } => {
                // rates decrease along the knots
                let k = knots
                    .windows(2)
                    .position(|w| lambda >= w[1].1)
                    .unwrap_or(knots.len() - 2);
                let (p0, l0) = knots[k];
                let (p1, l1) = knots[k + 1];
                p0 + (p1 - p0) * (lambda - l0) / (l1 - l0)
            }
            _ => unreachable!(),
        }
    }

    /// `r''(λ)` where it exists in closed form.
    fn revenue_curvature(&self, lambda: f64) -> Option<f64> {
        if let Some((_, b)) = self.linear_coeffs() {
            return Some(-2.0 / b);
        }
        match self {
            DemandFamily::Exponential { b, .. } => Some(-1.0 / (b * lambda)),
            DemandFamily::Logit { b, .. } => Some(-1.0 / (b * lambda * (1.0 - lambda).powi(2))),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DemandFamily::Linear { .. } => "linear",
            DemandFamily::Exponential { .. } => "exponential",
            DemandFamily::Logit { .. } => "logit",
            DemandFamily::WorstCaseLinear { .. } => "worstcase",
            DemandFamily::Tabulated { .. } => "tabulated",
        }
    }
}

fn tab_segment(knots: &[(f64, f64)], p: f64) -> usize {
    knots.windows(2).position(|w| p < w[1].0).unwrap_or(knots.len() - 2)
}

/// Regularity constants of a demand curve on its price interval.
///
/// `rate_bound` is M with `λ(p) ≤ M`; `lipschitz` is K, which bounds the
/// Lipschitz factors of `λ(p)`, `r(λ(p))` and `γ(λ)`; and the curvature pair
/// gives `-max_curvature ≤ r''(λ) ≤ -min_curvature < 0` (m_L and m_U).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityConstants {
    pub rate_bound: f64,
    pub lipschitz: f64,
    pub max_curvature: f64,
    pub min_curvature: f64,
}

impl RegularityConstants {
    /// Rate bound and steepest slope of a piecewise-linear curve. Curvature
    /// is undefined for such curves and left as NaN.
    pub fn from_knots(knots: &[(f64, f64)]) -> Self {
        let rate_bound = knots.iter().map(|k| k.1).fold(0.0, f64::max);
        let lipschitz = knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max);
        Self {
            rate_bound,
            lipschitz,
            max_curvature: f64::NAN,
            min_curvature: f64::NAN,
        }
    }
}

const SCAN_POINTS: usize = 4001;

/// An immutable demand model: curve, feasible price interval and constants.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandModel {
    family: DemandFamily,
    price_floor: f64,
    price_ceil: f64,
    constants: RegularityConstants,
}

impl DemandModel {
    /// Builds a model from an analytic family, deriving its regularity
    /// constants by scanning the closed-form derivatives over the interval.
    pub fn new(family: DemandFamily, price_floor: f64, price_ceil: f64) -> Result<Self> {
        if !(price_floor.is_finite() && price_ceil.is_finite() && price_floor < price_ceil) {
            return Err(Error::model(format!(
                "price interval [{price_floor}, {price_ceil}] is empty or not finite"
            )));
        }
        match &family {
            DemandFamily::Linear { a, b } | DemandFamily::Exponential { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(Error::model(format!(
                        "{} demand needs a > 0 and b > 0, got a={a}, b={b}",
                        family.name()
                    )));
                }
            }
            DemandFamily::Logit { a, b } => {
                if !(a.is_finite() && *b > 0.0) {
                    return Err(Error::model(format!("logit demand needs b > 0, got a={a}, b={b}")));
                }
            }
            DemandFamily::WorstCaseLinear { z } => {
                if !(*z > 0.0) {
                    return Err(Error::model(format!("worst-case family needs z > 0, got {z}")));
                }
            }
            DemandFamily::Tabulated { .. } => {
                return Err(Error::model(
                    "tabulated demand needs caller-supplied constants; use DemandModel::tabulated",
                ))
            }
        }
        // the curve must not go negative on the interval
        if family.rate(price_ceil) < 0.0 {
            return Err(Error::model(format!(
                "demand rate is negative at the price ceiling {price_ceil}"
            )));
        }
        let constants = scan_constants(&family, price_floor, price_ceil)?;
        Ok(Self {
            family,
            price_floor,
            price_ceil,
            constants,
        })
    }

    pub fn linear(a: f64, b: f64, price_floor: f64, price_ceil: f64) -> Result<Self> {
        Self::new(DemandFamily::Linear { a, b }, price_floor, price_ceil)
    }

    pub fn exponential(a: f64, b: f64, price_floor: f64, price_ceil: f64) -> Result<Self> {
        Self::new(DemandFamily::Exponential { a, b }, price_floor, price_ceil)
    }

    pub fn logit(a: f64, b: f64, price_floor: f64, price_ceil: f64) -> Result<Self> {
        Self::new(DemandFamily::Logit { a, b }, price_floor, price_ceil)
    }

    /// Member of the worst-case family on its native interval `[1/2, 3/2]`.
    pub fn worst_case(z: f64) -> Result<Self> {
        Self::new(DemandFamily::WorstCaseLinear { z }, 0.5, 1.5)
    }

    /// A piecewise-linear curve through `knots`. The price interval is the span
    /// of the knot prices and the constants are taken as given.
    pub fn tabulated(knots: Vec<(f64, f64)>, constants: RegularityConstants) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::model("tabulated demand needs at least two knots"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::model("tabulated knot prices must be strictly increasing"));
            }
            if !(w[1].1 < w[0].1) {
                return Err(Error::model("tabulated rates must be strictly decreasing in price"));
            }
        }
        if knots.iter().any(|&(p, l)| !p.is_finite() || !(l >= 0.0)) {
            return Err(Error::model("tabulated knots must be finite with non-negative rates"));
        }
        let price_floor = knots[0].0;
        let price_ceil = knots[knots.len() - 1].0;
        Ok(Self {
            family: DemandFamily::Tabulated { knots },
            price_floor,
            price_ceil,
            constants,
        })
    }

    pub fn family(&self) -> &DemandFamily {
        &self.family
    }

    pub fn price_floor(&self) -> f64 {
        self.price_floor
    }

    pub fn price_ceil(&self) -> f64 {
        self.price_ceil
    }

    pub fn constants(&self) -> &RegularityConstants {
        &self.constants
    }

    /// Same curve restricted to (or widened to) another price interval.
    pub fn with_bounds(&self, price_floor: f64, price_ceil: f64) -> Result<Self> {
        match &self.family {
            DemandFamily::Tabulated { .. } => Err(Error::model("tabulated demand takes its bounds from its knots")),
            family => Self::new(family.clone(), price_floor, price_ceil),
        }
    }

    fn tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.price_ceil.abs().max(self.price_floor.abs()))
    }

    /// Whether `p` lies in the feasible interval, up to rounding noise.
    pub fn is_feasible(&self, p: f64) -> bool {
        let tol = self.tolerance();
        p >= self.price_floor - tol && p <= self.price_ceil + tol
    }

    /// Clamps a candidate price into the feasible interval.
    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.price_floor, self.price_ceil)
    }

    /// Demand rate at a posted price or the cutoff.
    pub fn rate(&self, price: Price) -> Result<f64> {
        match price {
            Price::Cutoff => Ok(0.0),
            Price::Posted(p) if self.is_feasible(p) => Ok(self.rate_unchecked(self.clamp(p))),
            Price::Posted(p) => Err(Error::domain(format!(
                "price {p} is outside [{}, {}] and is not the cutoff",
                self.price_floor, self.price_ceil
            ))),
        }
    }

    /// `λ(p)` with no feasibility check. Never negative.
    pub fn rate_unchecked(&self, p: f64) -> f64 {
        self.family.rate(p).max(0.0)
    }

    /// `λ'(p)`.
    pub fn rate_slope(&self, p: f64) -> f64 {
        self.family.rate_slope(p)
    }

    /// Inverse demand `γ(λ)`.
    pub fn inverse(&self, lambda: f64) -> f64 {
        self.family.inverse(lambda)
    }

    /// Revenue rate `p·λ(p)`.
    pub fn revenue_rate(&self, p: f64) -> f64 {
        p * self.rate_unchecked(p)
    }

    /// Revenue rate as a function of the demand level, `r(λ) = λ·γ(λ)`.
    pub fn revenue_of_rate(&self, lambda: f64) -> f64 {
        lambda * self.inverse(lambda)
    }

    /// Unconstrained revenue-maximizing price over the feasible interval.
    pub fn solve_pu(&self) -> f64 {
        let (lo, hi) = (self.price_floor, self.price_ceil);
        let f = |p: f64| self.revenue_rate(p);
        if let DemandFamily::Tabulated { .. } = self.family {
            return self.solve_pu_tabulated();
        }
        let p = golden_section_max(f, lo, hi, PRICE_TOL, MAX_ITER);
        parabolic_polish(f, p, lo, hi)
    }

    // Piecewise-linear revenue is piecewise quadratic: unimodal curves are
    // searched directly, anything else is scanned on a grid of
    // TABULATED_SCAN cells first and refined inside the best cell.
    fn solve_pu_tabulated(&self) -> f64 {
        const TABULATED_SCAN: usize = 100_000;
        let (lo, hi) = (self.price_floor, self.price_ceil);
        let f = |p: f64| self.revenue_rate(p);
        let h = (hi - lo) / TABULATED_SCAN as f64;
        let samples: Vec<f64> = (0..=TABULATED_SCAN).map(|k| f(lo + k as f64 * h)).collect();
        if is_unimodal(&samples, 0.0) {
            return golden_section_max(f, lo, hi, PRICE_TOL, MAX_ITER);
        }
        log::warn!("tabulated revenue curve is not unimodal; using a {TABULATED_SCAN}-cell scan");
        let best = samples
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
            )
            .0;
        let a = (lo + (best as f64 - 1.0) * h).max(lo);
        let b = (lo + (best as f64 + 1.0) * h).min(hi);
        golden_section_max(f, a, b, PRICE_TOL, MAX_ITER)
    }

    /// Price whose demand rate is closest to the run-out rate `x / T`.
    pub fn solve_pc(&self, inventory: f64, horizon: f64) -> f64 {
        let target = inventory / horizon;
        bisect_decreasing(
            |p| self.rate_unchecked(p),
            target,
            self.price_floor,
            self.price_ceil,
            PRICE_TOL,
            MAX_ITER,
        )
    }

    /// Optimal fixed price of the deterministic relaxation, `max(p^u, p^c)`.
    pub fn deterministic_price(&self, inventory: f64, horizon: f64) -> f64 {
        self.solve_pu().max(self.solve_pc(inventory, horizon))
    }

    /// Optimal revenue of the deterministic relaxation for a market of size
    /// `market_size`: `n·p^D·min(T·λ(p^D), x)`.
    pub fn deterministic_value(&self, inventory: f64, horizon: f64, market_size: f64) -> f64 {
        if !(inventory > 0.0) || !(horizon > 0.0) {
            return 0.0;
        }
        let p = self.deterministic_price(inventory, horizon);
        market_size * (p * (horizon * self.rate_unchecked(p)).min(inventory))
    }

    /// Samples the curve and checks the regular-demand conditions: strict
    /// decrease, `0 ≤ λ ≤ M`, inverse consistency, and second differences of
    /// `r(λ)` inside `[-m_L, -m_U]`.
    pub fn validate(&self) -> Result<()> {
        const N: usize = 1001;
        let (lo, hi) = (self.price_floor, self.price_ceil);
        let c = &self.constants;
        let prices: Vec<f64> = (0..N).map(|k| lo + (hi - lo) * k as f64 / (N - 1) as f64).collect();
        let rates: Vec<f64> = prices.iter().map(|&p| self.family.rate(p)).collect();
        for (w, pw) in rates.windows(2).zip(prices.windows(2)) {
            if !(w[1] < w[0]) {
                return Err(Error::model(format!(
                    "demand is not strictly decreasing between p={} and p={}",
                    pw[0], pw[1]
                )));
            }
        }
        let m_tol = 1e-9 * c.rate_bound.max(1.0);
        for (&p, &l) in prices.iter().zip(&rates) {
            if l < -m_tol || l > c.rate_bound + m_tol {
                return Err(Error::model(format!(
                    "rate {l} at p={p} violates 0 <= rate <= M={}",
                    c.rate_bound
                )));
            }
            if l > 0.0 {
                let back = self.inverse(l);
                if (back - p).abs() > 1e-9 * (1.0 + p.abs()) {
                    return Err(Error::model(format!("inverse demand gives {back} at p={p}")));
                }
            }
        }
        if let DemandFamily::Tabulated { .. } = self.family {
            // piecewise-linear curves have no second derivative at the knots
            return Ok(());
        }
        let (l_lo, l_hi) = (self.family.rate(hi), self.family.rate(lo));
        let h = 1e-3 * (l_hi - l_lo);
        for k in 1..(N - 1) {
            let l = l_lo + (l_hi - l_lo) * k as f64 / (N - 1) as f64;
            if l - h <= 0.0 || l - h < l_lo || l + h > l_hi {
                continue;
            }
            let second =
                (self.revenue_of_rate(l + h) - 2.0 * self.revenue_of_rate(l) + self.revenue_of_rate(l - h)) / (h * h);
            let tol = 1e-4 * c.max_curvature + 1e-6;
            if second < -c.max_curvature - tol || second > -c.min_curvature + tol {
                return Err(Error::model(format!(
                    "r''({l}) ~ {second} is outside [-{}, -{}]",
                    c.max_curvature, c.min_curvature
                )));
            }
        }
        Ok(())
    }
}

fn scan_constants(family: &DemandFamily, lo: f64, hi: f64) -> Result<RegularityConstants> {
    let mut lambda_lip: f64 = 0.0;
    let mut revenue_lip: f64 = 0.0;
    let mut inverse_lip: f64 = 0.0;
    let mut max_curv = f64::NEG_INFINITY;
    let mut min_curv = f64::INFINITY;
    for k in 0..SCAN_POINTS {
        let p = lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64;
        let l = family.rate(p);
        let slope = family.rate_slope(p);
        if !(slope < 0.0) {
            return Err(Error::model(format!(
                "demand is not strictly decreasing at p={p} (slope {slope})"
            )));
        }
        lambda_lip = lambda_lip.max(slope.abs());
        revenue_lip = revenue_lip.max((l + p * slope).abs());
        inverse_lip = inverse_lip.max(1.0 / slope.abs());
        if l > 0.0 {
            if let Some(c) = family.revenue_curvature(l) {
                if !(c < 0.0) {
                    return Err(Error::model(format!("revenue is not strictly concave at p={p}")));
                }
                max_curv = max_curv.max(-c);
                min_curv = min_curv.min(-c);
            }
        }
    }
    Ok(RegularityConstants {
        rate_bound: family.rate(lo),
        lipschitz: lambda_lip.max(revenue_lip).max(inverse_lip),
        max_curvature: max_curv,
        min_curvature: min_curv,
    })
}

/// Ad-intensity response `λ(a)`, increasing in the intensity `a`.
#[derive(Clone, Debug, PartialEq)]
pub enum IntensityCurve {
    /// `λ(a) = intercept + slope·a`
    Affine { intercept: f64, slope: f64 },
    /// Linear interpolation through `(intensity, rate)` knots.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// Recasts a fixed-price, ad-intensity problem as a pricing problem.
///
/// With the sale price fixed at `price_fixed` and intensity `a` in
/// `[a_min, a_max]`, the margin `w = price_fixed - a` plays the role of the
/// price and `λ̃(w) = λ(price_fixed - w)` is the induced demand curve on
/// `[price_fixed - a_max, price_fixed - a_min]`.
pub fn advertisement_transform(
    price_fixed: f64,
    curve: &IntensityCurve,
    a_min: f64,
    a_max: f64,
) -> Result<DemandModel> {
    if !(a_min < a_max) {
        return Err(Error::model(format!("intensity range [{a_min}, {a_max}] is empty")));
    }
    let (w_lo, w_hi) = (price_fixed - a_max, price_fixed - a_min);
    match curve {
        IntensityCurve::Affine { intercept, slope } => {
            if !(*slope > 0.0) {
                return Err(Error::model(
                    "transformed demand is not strictly decreasing in the margin (intensity slope must be positive)",
                ));
            }
            DemandModel::linear(intercept + slope * price_fixed, *slope, w_lo, w_hi)
        }
        IntensityCurve::Tabulated { knots } => {
            let mapped: Vec<(f64, f64)> = knots.iter().rev().map(|&(a, l)| (price_fixed - a, l)).collect();
            let constants = RegularityConstants::from_knots(&mapped);
            DemandModel::tabulated(mapped, constants)
        }
    }
}

/// A selling problem: demand, inventory `x`, horizon `T`, market size `n`.
///
/// The size-`n` problem has inventory `n·x` and demand rate `n·λ(·)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub demand: DemandModel,
    pub inventory: f64,
    pub horizon: f64,
    pub market_size: u64,
}

impl ProblemInstance {
    pub fn new(demand: DemandModel, inventory: f64, horizon: f64, market_size: u64) -> Result<Self> {
        if !(inventory > 0.0 && inventory.is_finite()) {
            return Err(Error::domain(format!("inventory must be positive, got {inventory}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        if market_size == 0 {
            return Err(Error::domain("market size must be a positive integer"));
        }
        Ok(Self {
            demand,
            inventory,
            horizon,
            market_size,
        })
    }

    pub fn n(&self) -> f64 {
        self.market_size as f64
    }

    /// Same problem in a market of a different size.
    pub fn with_market_size(&self, market_size: u64) -> Self {
        Self {
            market_size,
            ..self.clone()
        }
    }

    /// Integer starting stock `⌊n·x⌋`.
    pub fn scaled_inventory(&self) -> u64 {
        (self.n() * self.inventory).floor() as u64
    }

    pub fn deterministic_price(&self) -> f64 {
        self.demand.deterministic_price(self.inventory, self.horizon)
    }

    pub fn deterministic_value(&self) -> f64 {
        self.demand.deterministic_value(self.inventory, self.horizon, self.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin() -> DemandModel {
        DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap()
    }

    fn expo() -> DemandModel {
        DemandModel::exponential(80.0, 0.5, 0.1, 10.0).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert_eq!(lin().rate(Price::Posted(5.0)).unwrap(), 15.0);
        assert_eq!(lin().rate(Price::Cutoff).unwrap(), 0.0);
        let p = 2.0 * 4f64.ln();
        assert!((expo().rate(Price::Posted(p)).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rate_rejects_infeasible_price() {
        assert!(matches!(lin().rate(Price::Posted(10.5)), Err(Error::Domain(_))));
        assert!(matches!(lin().rate(Price::Posted(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn unconstrained_price() {
        assert!((lin().solve_pu() - 5.0).abs() < 1e-8);
        assert!((expo().solve_pu() - 2.0).abs() < 1e-8);
        let wc = DemandModel::worst_case(0.5).unwrap();
        assert!((wc.solve_pu() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constrained_price() {
        assert!((expo().solve_pc(20.0, 1.0) - 2.0 * 4f64.ln()).abs() < 1e-8);
        assert!((lin().solve_pc(20.0, 1.0) - 10.0 / 3.0).abs() < 1e-8);
        // demand still exceeds x/T at the ceiling: clamp there
        let short = DemandModel::linear(30.0, 3.0, 0.1, 5.0).unwrap();
        assert_eq!(short.solve_pc(10.0, 1.0), 5.0);
        // demand never reaches x/T: clamp at the floor
        assert_eq!(lin().solve_pc(100.0, 1.0), 0.1);
    }

    #[test]
    fn deterministic_price_and_value() {
        assert!((lin().deterministic_price(20.0, 1.0) - 5.0).abs() < 1e-8);
        assert!((expo().deterministic_price(20.0, 1.0) - 2.0 * 4f64.ln()).abs() < 1e-8);
        let wc = DemandModel::worst_case(2.0 / 3.0).unwrap();
        assert!((wc.deterministic_price(2.0, 1.0) - 7.0 / 8.0).abs() < 1e-8);

        assert!((lin().deterministic_value(20.0, 1.0, 1.0) - 75.0).abs() < 1e-9);
        assert!((expo().deterministic_value(20.0, 1.0, 1.0) - 40.0 * 4f64.ln()).abs() < 1e-8);
        assert_eq!(lin().deterministic_value(0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn value_scales_with_market_size() {
        for m in [lin(), expo()] {
            let one = m.deterministic_value(20.0, 1.0, 1.0);
            for n in [10.0, 1e3, 1e5] {
                assert_eq!(m.deterministic_value(20.0, 1.0, n), n * one);
            }
        }
    }

    #[test]
    fn rate_hits_runout_level() {
        let m = expo();
        for x in [10.0, 20.0, 40.0, 70.0] {
            let p = m.solve_pc(x, 1.0);
            assert!((m.rate_unchecked(p) - x).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn builtin_families_validate() {
        lin().validate().unwrap();
        expo().validate().unwrap();
        DemandModel::logit(-2.0, 0.8, 0.1, 10.0).unwrap().validate().unwrap();
        for z in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            DemandModel::worst_case(z).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn linear_constants() {
        let c = *lin().constants();
        assert!((c.rate_bound - 29.7).abs() < 1e-12);
        // r(λ) = λ(a - λ)/b has r'' = -2/b
        assert!((c.max_curvature - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.min_curvature - 2.0 / 3.0).abs() < 1e-12);
        assert!(c.lipschitz >= 3.0);
    }

    #[test]
    fn exponential_constants() {
        let c = *expo().constants();
        assert!((c.rate_bound - 80.0 * (-0.05f64).exp()).abs() < 1e-9);
        // r''(λ) = -1/(bλ) over λ in [λ(10), λ(0.1)]
        assert!((c.max_curvature - 1.0 / (0.5 * 80.0 * (-5f64).exp())).abs() < 1e-6);
        assert!((c.min_curvature - 1.0 / (0.5 * 80.0 * (-0.05f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DemandModel::linear(30.0, 0.0, 0.1, 10.0).is_err());
        assert!(DemandModel::linear(30.0, 3.0, 0.1, 11.0).is_err());
        assert!(DemandModel::exponential(80.0, 0.5, 5.0, 1.0).is_err());
        let c = *lin().constants();
        assert!(DemandModel::tabulated(vec![(1.0, 5.0), (2.0, 5.0)], c).is_err());
        assert!(DemandModel::tabulated(vec![(1.0, 5.0)], c).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_inverts() {
        let c = *lin().constants();
        let m = DemandModel::tabulated(vec![(0.0, 30.0), (5.0, 25.0), (7.5, 0.0)], c).unwrap();
        assert!((m.rate_unchecked(2.5) - 27.5).abs() < 1e-12);
        assert!((m.rate_unchecked(6.25) - 12.5).abs() < 1e-12);
        assert!((m.inverse(12.5) - 6.25).abs() < 1e-12);
        assert!((m.inverse(27.5) - 2.5).abs() < 1e-12);
        // revenue peaks at the kink
        assert!((m.solve_pu() - 5.0).abs() < 1e-8);
    }

    #[test]
    fn advertisement_examples() {
        let m = advertisement_transform(
            10.0,
            &IntensityCurve::Affine {
                intercept: 0.0,
                slope: 1.0,
            },
            0.0,
            9.0,
        )
        .unwrap();
        assert_eq!(m.family(), &DemandFamily::Linear { a: 10.0, b: 1.0 });
        assert_eq!((m.price_floor(), m.price_ceil()), (1.0, 10.0));

        let flat = IntensityCurve::Affine {
            intercept: 4.0,
            slope: 0.0,
        };
        assert!(advertisement_transform(10.0, &flat, 0.0, 9.0).is_err());

        // λ(a) = 30 - 3(10 - a)
        let m = advertisement_transform(
            10.0,
            &IntensityCurve::Affine {
                intercept: 0.0,
                slope: 3.0,
            },
            0.5,
            9.9,
        )
        .unwrap();
        assert_eq!(m.family(), &DemandFamily::Linear { a: 30.0, b: 3.0 });
        assert!((m.rate_unchecked(4.0) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn advertisement_tabulated() {
        let curve = IntensityCurve::Tabulated {
            knots: vec![(0.0, 2.0), (1.0, 6.0), (3.0, 8.0)],
        };
        let m = advertisement_transform(10.0, &curve, 0.0, 3.0).unwrap();
        assert_eq!((m.price_floor(), m.price_ceil()), (7.0, 10.0));
        assert!((m.rate_unchecked(9.0) - 6.0).abs() < 1e-12);
        let flat = IntensityCurve::Tabulated {
            knots: vec![(0.0, 2.0), (1.0, 2.0)],
        };
        assert!(advertisement_transform(10.0, &flat, 0.0, 1.0).is_err());
    }

    #[test]
    fn instance_scaling() {
        let inst = ProblemInstance::new(lin(), 20.0, 1.0, 1).unwrap();
        let big = inst.with_market_size(1000);
        assert_eq!(big.deterministic_price(), inst.deterministic_price());
        assert_eq!(big.deterministic_value(), 1000.0 * inst.deterministic_value());
        assert_eq!(big.scaled_inventory(), 20_000);
        assert!(ProblemInstance::new(lin(), 0.0, 1.0, 1).is_err());
        assert!(ProblemInstance::new(lin(), 1.0, 1.0, 0).is_err());
    }
}
