//! Joint lifetime models and the ordering probabilities they induce.
//!
//! For a model without ties, `q_j(A)` is the probability that the components
//! outliving `j` are exactly `A`, `r_j(A)` the probability that every member
//! of `A` outlives `j`, and `q(A)` the probability that the `|A|` longest
//! lived components are exactly `A`.

mod model;
mod ordering;
pub mod quadrature;
mod sampling;
mod weibull;

pub use model::{
    parse_permutation_key, EmpiricalSampler, IndependentMarginals, IndependentWeibull,
    JointLifetimeModel, LifetimeDistribution, MarginalDistribution, OrderDistribution,
    SamplerFn, MAX_ENUMERATED_COMPONENTS,
};
pub use ordering::{
    exchangeable_qj, independent_qj, independent_rj, order_distribution_qj,
    ordering_probabilities, q_from_qj, qj_from_rj, rj_from_qj, EvalOptions, Method,
    OrderingProbabilities, OrderingTables, Tables, MAX_MONTE_CARLO_TABLE_COMPONENTS,
};
pub use sampling::{draw, sample_lifetimes, Draw, MAX_CONSECUTIVE_REDRAWS};
pub use weibull::{weibull_qj, weibull_rj, CANCELLATION_GUARD};
