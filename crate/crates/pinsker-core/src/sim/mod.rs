//! Monte Carlo verification engine: sphere sampling, ball-norm-saturating
//! targets, exact block-aggregated excess risk of the linear filter, and the
//! sequence-model and Bayes-risk oracles.

mod delta;
mod monte_carlo;
mod rng;
mod sample;
mod sequence;
mod stats;
mod target;

pub use delta::{delta_diagnostics, CrossEstimate, DeltaDiagnostics, MomentEstimate};
pub use monte_carlo::{monte_carlo, SimReport, TargetReport};
pub use rng::stream_rng;
pub use sample::{sample_sphere, Points};
pub use sequence::{
    bayes_risk, bayes_risk_mc, prior_bayes_mc, sequence_exact_risk, sequence_mc_risk,
    sequence_sup_risk,
};
pub use stats::{empirical_block_stats, excess_risk, DegreeStats, EmpiricalStats, DEFAULT_GRAM_CAP};
pub use target::{make_target, Allocation, RegressionFunction, TargetComponent};
