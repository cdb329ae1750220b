use dynprice::demand::{DemandModel, ProblemInstance};
use proptest::prelude::*;

// closed forms worked by hand: linear p^u = a/(2b); exponential p^u = 1/b,
// p^c = ln(a·T/x)/b
#[test]
fn linear_and_exponential_closed_forms() {
    let lin = ProblemInstance::new(DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap(), 20.0, 1.0, 1).unwrap();
    assert!((lin.demand.solve_pu() - 5.0).abs() < 1e-8);
    assert!((lin.deterministic_value() - 75.0).abs() < 1e-6);
    let exp = ProblemInstance::new(DemandModel::exponential(80.0, 0.5, 0.1, 10.0).unwrap(), 20.0, 1.0, 1).unwrap();
    assert!((exp.demand.solve_pu() - 2.0).abs() < 1e-8);
    assert!((exp.deterministic_price() - 2.0 * 4f64.ln()).abs() < 1e-8);
    assert!((exp.deterministic_value() - 40.0 * 4f64.ln()).abs() < 1e-6);
}

proptest! {
    #[test]
    fn scaling_regime(a in 5.0f64..50.0, b in 0.5f64..4.0, x in 1.0f64..60.0, n in 1u64..1_000_000) {
        let ceil = 0.99 * a / b;
        let m = DemandModel::linear(a, b, 0.1, ceil).unwrap();
        let one = ProblemInstance::new(m, x, 1.0, 1).unwrap();
        let big = one.with_market_size(n);
        prop_assert_eq!(one.deterministic_price(), big.deterministic_price());
        prop_assert_eq!(big.deterministic_value(), n as f64 * one.deterministic_value());
        // linear p^c solves a − b·p = x/T when that is reachable
        let pc = m_pc(&one);
        if x <= a - b * 0.1 && x >= a - b * ceil {
            prop_assert!((one.demand.rate_unchecked(pc) - x).abs() < 1e-6);
            prop_assert!((pc - (a - x) / b).abs() < 1e-8);
        }
        let pu = one.demand.solve_pu();
        prop_assert!((pu - (a / (2.0 * b)).clamp(0.1, ceil)).abs() < 1e-7);
    }

    #[test]
    fn exponential_runout(a in 10.0f64..100.0, b in 0.1f64..1.0, x in 1.0f64..9.0) {
        let m = DemandModel::exponential(a, b, 0.1, 10.0).unwrap();
        let pc = m.solve_pc(x, 1.0);
        let want = ((a / x).ln() / b).clamp(0.1, 10.0);
        prop_assert!((pc - want).abs() < 1e-8, "{} vs {}", pc, want);
    }
}

fn m_pc(inst: &ProblemInstance) -> f64 {
    inst.demand.solve_pc(inst.inventory, inst.horizon)
}
