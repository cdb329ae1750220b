//! Dynamic pricing with unknown demand and limited inventory.
//!
//! A seller with `n·x` units and a season of length `T` faces Poisson demand
//! at rate `n·λ(p)`. The crate provides demand models and the deterministic
//! benchmark ([`demand`]), a seeded season simulator ([`market_sim`]),
//! learning and reference policies ([`policies`]), Monte Carlo regret
//! estimation ([`regret`]) and numerical checks of the lower-bound argument
//! ([`lower_bound`]).
//!
//! ```
//! use dynprice::demand::{DemandModel, ProblemInstance};
//! use dynprice::policies::PolicySpec;
//! use dynprice::regret::estimate_regret;
//!
//! let model = DemandModel::linear(30.0, 3.0, 0.1, 10.0).unwrap();
//! let inst = ProblemInstance::new(model, 20.0, 1.0, 1000).unwrap();
//! assert!((inst.deterministic_price() - 5.0).abs() < 1e-6);
//! let est = estimate_regret(&inst, &PolicySpec::dpa(), 20, 7).unwrap();
//! assert!(est.mean_regret < 1.0);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod demand;
pub mod error;
pub mod lower_bound;
pub mod market_sim;
pub mod numeric;
pub mod output;
pub mod policies;
pub mod regret;

pub use error::{Error, Result};
