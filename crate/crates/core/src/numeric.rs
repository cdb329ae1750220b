//! Derivative-free one-dimensional search used by the demand solvers.

/// Price tolerance shared by the golden-section and bisection searches.
pub const PRICE_TOL: f64 = 1e-10;

/// Iteration cap shared by the golden-section and bisection searches.
pub const MAX_ITER: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Returns the midpoint of the final bracket, or whichever end point is better
/// if the maximum sits on the boundary.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // the bracket collapses onto an end point when the maximum is on the boundary
    [lo, mid, hi]
        .into_iter()
        .map(|p| (p, f(p)))
        .fold((mid, f(mid)), |best, cand| if cand.1 > best.1 { cand } else { best })
        .0
}

/// Sharpens an interior maximizer of a smooth concave `f` with symmetric
/// three-point parabolic steps.
///
/// Golden-section comparisons stall near `sqrt(eps)` relative accuracy because
/// `f` is flat at its maximum; the parabola vertex does not have that problem.
/// A step is only taken when the three samples are concave and the vertex stays
/// within one step of the current point.
pub fn parabolic_polish<F: Fn(f64) -> f64>(f: F, p: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let mut p = p;
    for rel in [1e-4, 1e-6] {
        let h = rel * width;
        if p - h < lo || p + h > hi {
            return p;
        }
        let (fm, f0, fp) = (f(p - h), f(p), f(p + h));
        let curvature = fm - 2.0 * f0 + fp;
        if !(curvature < 0.0) {
            return p;
        }
        let step = h * (fm - fp) / (2.0 * curvature);
        if step.abs() > h {
            return p;
        }
        p += step;
    }
    p
}

/// Finds where a non-increasing `f` crosses `target` on `[lo, hi]`.
///
/// If `f` never reaches `target` inside the interval, the end point with the
/// smaller `|f - target|` is returned.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64, tol: f64, max_iter: usize) -> f64 {
    if f(lo) <= target {
        return lo;
    }
    if f(hi) >= target {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..max_iter {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if f(m) > target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Checks that a sampled sequence rises (weakly) and then falls (weakly).
pub fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let diff = w[1] - w[0];
        if falling && diff > tol {
            return false;
        }
        if diff < -tol {
            falling = true;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_peak() {
        let p = golden_section_max(|p| -(p - 1.3) * (p - 1.3), 0.0, 4.0, PRICE_TOL, MAX_ITER);
        assert!((p - 1.3).abs() < 1e-7);
        let p = parabolic_polish(|p| -(p - 1.3) * (p - 1.3), p, 0.0, 4.0);
        assert!((p - 1.3).abs() < 1e-12);
    }

    #[test]
    fn golden_reports_boundary_maximum() {
        assert_eq!(golden_section_max(|p| -p, 2.0, 5.0, PRICE_TOL, MAX_ITER), 2.0);
        assert_eq!(golden_section_max(|p| p, 2.0, 5.0, PRICE_TOL, MAX_ITER), 5.0);
    }

    #[test]
    fn polish_leaves_kinks_alone() {
        let f = |p: f64| -(p - 1.0).abs();
        let p = parabolic_polish(f, 1.0, 0.0, 2.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn bisection_clamps() {
        let f = |p: f64| 10.0 - p;
        assert_eq!(bisect_decreasing(f, 20.0, 0.0, 5.0, PRICE_TOL, MAX_ITER), 0.0);
        assert_eq!(bisect_decreasing(f, 1.0, 0.0, 5.0, PRICE_TOL, MAX_ITER), 5.0);
        let p = bisect_decreasing(f, 7.5, 0.0, 5.0, PRICE_TOL, MAX_ITER);
        assert!((p - 2.5).abs() < 1e-9);
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&[1.0, 2.0, 3.0, 2.0, 1.0], 0.0));
        assert!(is_unimodal(&[3.0, 2.0, 1.0], 0.0));
        assert!(!is_unimodal(&[1.0, 3.0, 1.0, 3.0], 0.0));
    }
}
