//! Hypothesis testing for discrete distributions with access to a predicted
//! distribution.
//!
//! The testers in [`testers`] receive sample access to unknown distributions
//! together with a *prediction* `p̂` of one of them and a suggested accuracy
//! level `α`. They either answer the testing question (accept / reject) or
//! report that the prediction is not as accurate as suggested. [`search`]
//! wraps such a tester and tunes `α` automatically by doubling the sample
//! budget until a conclusive answer is found.
//!
//! Domain elements are numbered `1..=n` everywhere in the public API
//! (index sets, flat indices, file formats). Slices returned by accessors
//! such as [`Distribution::probs`] are ordinary 0-based views.

pub mod dist;
pub mod flatten;
pub mod harness;
pub mod ingest;
pub mod instances;
pub mod io;
pub mod l2;
pub mod oracle;
pub mod rng;
pub mod search;
pub mod testers;

pub use dist::{
    draw, empirical, make_distribution, mass, mix, poisson_count, scheffe_set, tv_distance,
    DistError, Distribution, IndexSet, SampleBatch, Sampler,
};
pub use flatten::{
    build_augmented_flattening, build_multiplicative_flattening, flatten_batch,
    flatten_distribution, flatten_sample, l2sq_exact, FlattenError, Flattening,
};
pub use l2::{collision_count, collision_rate, estimate_l2sq, L2Estimate};
pub use oracle::{DistributionOracle, FlattenedOracle, OracleError, SampleOracle};
pub use rng::{child_seed, splitmix64, SeededRng};
pub use search::{
    closeness_search, inverse_budget, search_test, SampleComplexityFn, SearchError, SearchReport,
};
pub use testers::{
    augmented_closeness_test, augmented_identity_test, crs15_test, standard_closeness_test,
    standard_identity_test, t_statistic, Branch, ClosenessOptions, TestReport, TesterError,
    Verdict,
};
