use dynprice::config::{Command, DemandSpec, ExperimentConfig};
use dynprice::demand::DemandFamily;
use dynprice::policies::{LogMode, PolicySpec, Step3Interval};
use proptest::prelude::*;
use std::path::PathBuf;

fn families() -> impl Strategy<Value = DemandFamily> {
    prop_oneof![
        (1.0f64..100.0, 0.01f64..5.0).prop_map(|(a, b)| DemandFamily::Linear { a, b }),
        (1.0f64..100.0, 0.01f64..5.0).prop_map(|(a, b)| DemandFamily::Exponential { a, b }),
        (-5.0f64..5.0, 0.01f64..5.0).prop_map(|(a, b)| DemandFamily::Logit { a, b }),
        (1.0f64 / 3.0..2.0 / 3.0).prop_map(|z| DemandFamily::WorstCaseLinear { z }),
        prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 2..6).prop_map(|steps| {
            let (mut p, mut l) = (0.1, 50.0);
            let knots = steps
                .into_iter()
                .map(|(dp, dl)| {
                    p += dp;
                    l -= dl;
                    (p, l)
                })
                .collect();
            DemandFamily::Tabulated { knots }
        }),
    ]
}

fn policies() -> impl Strategy<Value = PolicySpec> {
    let mode = prop_oneof![Just(LogMode::Practical), Just(LogMode::Theoretical)];
    let step3 = prop_oneof![Just(Step3Interval::LastInterval), Just(Step3Interval::FullInterval)];
    prop_oneof![
        (0.01f64..0.5, mode.clone(), step3).prop_map(|(delta, log_mode, step3_interval)| PolicySpec::Dpa {
            delta,
            log_mode,
            step3_interval
        }),
        (0.01f64..0.5, mode).prop_map(|(delta, log_mode)| PolicySpec::Dpa2 { delta, log_mode }),
        Just(PolicySpec::Clairvoyant),
        (prop::option::of(0.01f64..0.99), prop::option::of(2usize..100)).prop_map(|(learn_fraction, grid_size)| {
            PolicySpec::SinglePhase {
                learn_fraction,
                grid_size,
            }
        }),
        (0.1f64..10.0).prop_map(|price| PolicySpec::Fixed { price }),
    ]
}

fn commands() -> impl Strategy<Value = Command> {
    prop_oneof![
        Just(Command::Solve),
        Just(Command::Run),
        Just(Command::Sweep),
        Just(Command::Lowerbound),
        Just(Command::Check),
    ]
}

proptest! {
    #[test]
    fn parse_print_round_trip(
        command in commands(),
        family in families(),
        floor in prop::option::of(0.01f64..1.0),
        ceil in prop::option::of(2.0f64..20.0),
        inventory in 0.1f64..100.0,
        horizon in 0.1f64..10.0,
        market_sizes in prop::collection::vec(1u64..10_000_000, 1..6),
        policy in policies(),
        replications in 1u64..100_000,
        seed in any::<u64>(),
        workers in 0usize..64,
        out in "[a-z]{1,8}(/[a-z]{1,8})?",
    ) {
        let cfg = ExperimentConfig {
            command,
            demand: DemandSpec { family, price_floor: floor, price_ceil: ceil },
            inventory,
            horizon,
            market_sizes,
            policy,
            replications,
            seed,
            workers,
            out: PathBuf::from(out),
        };
        let text = cfg.print();
        prop_assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg.clone());
        prop_assert_eq!(ExperimentConfig::parse(&text).unwrap().hash(), cfg.hash());
    }
}
