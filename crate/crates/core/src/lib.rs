//! Observable-independent entanglement detection for multipartite Gaussian
//! states.
//!
//! Given a covariance matrix and a split of its modes into parties, the
//! library builds the parametric matrix Γ whose positive semidefiniteness
//! for every parameter choice is necessary for full separability, minimizes
//! its leading principal minors over per-party-normalized parameters, and
//! turns a negative minimum into an ENTANGLED verdict with a standalone
//! witness. A positive scan is always INCONCLUSIVE — the criterion is
//! one-sided by nature.
//!
//! Modules:
//! - [`state`]: party structures, covariance matrices, state/report files
//! - [`gamma`]: assembly of Γ from covariance entries and parameters
//! - [`criterion`]: submatrices, leading minors, λ minimization, verdicts
//! - [`optimizer`]: multi-start local search on sphere products, gradients,
//!   and the sampling cross-check oracle
//! - [`variance`]: the ΔU² + ΔV² expansion and the separability inequality
//! - [`states`]: worked example states and synthetic test families

pub mod criterion;
pub mod error;
pub mod gamma;
pub mod linalg;
pub mod optimizer;
pub mod state;
pub mod states;
pub mod variance;

pub use crate::criterion::{
    check_partition_grouping, evaluate_lambda, leading_minors, subset_gamma, MinorSummary,
    OptimizerMeta, Status, VerdictReport, WitnessParams,
};
pub use crate::error::{Error, Result};
pub use crate::gamma::{build_gamma, gamma_quadratic_form, GammaMatrix, ParamVector};
pub use crate::optimizer::{
    minimize_minor, minor_gradient, sample_oracle, MinorObjective, MinorResult, OptimizerConfig,
};
pub use crate::state::{
    load_report, load_state, report_to_json, save_report, save_state, state_from_json,
    state_to_json, CovarianceMatrix, PartitionQuery, PartyStructure,
};
pub use crate::variance::{
    check_separable_inequality, lur_bound, variance_sum, CollectiveWeights,
};
