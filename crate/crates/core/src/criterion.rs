//! The verdict layer: partition submatrices, leading principal minors, and
//! the λ minimization that decides ENTANGLED vs INCONCLUSIVE.
//!
//! Positivity of Γ for every parameter choice is necessary for full
//! separability, so a single negative minor at a single parameter point is a
//! certificate of entanglement — and nothing here ever claims separability:
//! the only statuses are ENTANGLED and INCONCLUSIVE.
//!
//! The scan runs over prefixes of the queried subset. The k-th leading
//! principal minor of Γ(i₁,…,i_l) involves only parties i₁,…,i_k, so the
//! (l, k) double loop collapses to one optimization per distinct k; the
//! report carries one entry per minor order with the parties it actually
//! involves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{GammaMatrix, ParamVector};
use crate::linalg::det_pivoted;
use crate::optimizer::{minimize_minor, MinorResult, OptimizerConfig};
use crate::state::{CovarianceMatrix, PartitionQuery, PartyStructure};

/// Keep rows/columns of `m` listed in `indices`, in the given order.
pub(crate) fn principal_submatrix(m: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), indices.len(), |i, j| m[(indices[i], indices[j])])
}

/// Submatrix of Γ keeping the queried parties (rows and columns of everything
/// else removed), in increasing order.
pub fn subset_gamma(gamma: &GammaMatrix, subset: &PartitionQuery) -> Result<DMatrix<f64>> {
    if *subset.parties().last().unwrap() >= gamma.order() {
        return Err(Error::Partition(format!(
            "subset refers to party {} but Γ has order {}",
            subset.parties().last().unwrap() + 1,
            gamma.order()
        )));
    }
    Ok(principal_submatrix(gamma.matrix(), subset.parties()))
}

/// All leading principal minors `(det G[..1], det G[..2], …, det G)`,
/// each by pivoted elimination. Singular blocks yield 0.
pub fn leading_minors(g: &DMatrix<f64>) -> Vec<f64> {
    assert_eq!(g.nrows(), g.ncols(), "leading minors of a non-square matrix");
    (1..=g.nrows())
        .map(|k| det_pivoted(&g.view((0, 0), (k, k)).into_owned()))
        .collect()
}

/// Regroup contiguous mode blocks into a coarser party bookkeeping.
///
/// `grouping` lists 0-based mode indices; the concatenation of all groups
/// must be exactly 0..S in order. The covariance matrix is untouched, only
/// the party structure changes.
pub fn check_partition_grouping(
    ps: &PartyStructure,
    grouping: &[Vec<usize>],
) -> Result<PartyStructure> {
    if grouping.is_empty() {
        return Err(Error::Grouping("empty grouping".into()));
    }
    let mut expected = 0usize;
    for (gi, group) in grouping.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::Grouping(format!("group {} is empty", gi + 1)));
        }
        for &mode in group {
            if mode != expected {
                return Err(Error::Grouping(format!(
                    "groups must cover modes 1..{} contiguously and in order; \
                     group {} hits mode {} where mode {} was expected",
                    ps.total_modes(),
                    gi + 1,
                    mode + 1,
                    expected + 1
                )));
            }
            expected += 1;
        }
    }
    if expected != ps.total_modes() {
        return Err(Error::Grouping(format!(
            "groups cover {} modes but the state has {}",
            expected,
            ps.total_modes()
        )));
    }
    PartyStructure::new(grouping.iter().map(|g| g.len()).collect())
}

/// Verdict status. Theorem-level one-sidedness: SEPARABLE is not a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Entangled,
    Inconclusive,
}

/// Witness parameters in report form: one row per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl WitnessParams {
    pub fn from_param_vector(v: &ParamVector) -> Self {
        Self { alpha: v.alphas.clone(), beta: v.betas.clone() }
    }

    pub fn to_param_vector(&self) -> Result<ParamVector> {
        ParamVector::new(self.alpha.clone(), self.beta.clone())
    }
}

/// One row of the minor scan, as serialized. `parties` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorSummary {
    pub k: usize,
    pub parties: Vec<usize>,
    pub min_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerMeta {
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// Full result of a partition query. Serializes to the stable report schema;
/// field order here is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub status: Status,
    /// Queried parties, 1-based.
    pub partition: Vec<usize>,
    /// Minimum over all scanned minors.
    pub lambda: f64,
    /// Parameter point attaining `lambda`.
    pub witness: WitnessParams,
    pub minors: Vec<MinorSummary>,
    pub optimizer: OptimizerMeta,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
}

fn verdict(lambda: f64, tolerance: f64) -> Status {
    if lambda < -tolerance {
        Status::Entangled
    } else {
        Status::Inconclusive
    }
}

/// All non-empty subsequences of `parties`, ordered by (length, position).
fn all_subsets(parties: &[usize]) -> Vec<Vec<usize>> {
    let m = parties.len();
    let mut out = Vec::with_capacity((1usize << m) - 1);
    for len in 1..=m {
        let mut idx: Vec<usize> = (0..len).collect();
        loop {
            out.push(idx.iter().map(|&i| parties[i]).collect());
            // advance the rightmost index that still has room
            let mut advanced = false;
            for pos in (0..len).rev() {
                if idx[pos] < m - (len - pos) {
                    idx[pos] += 1;
                    for later in (pos + 1)..len {
                        idx[later] = idx[later - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    out
}

/// Run the triple minimization for one partition query.
///
/// For the prefix scan the tasks are the minor orders k = 1..=m on the
/// prefix (i₁,…,i_k); with `cfg.exhaustive` every non-empty party subset of
/// the query is scanned instead (all principal minors, not only leading
/// ones). λ is the minimum over tasks, the witness is the parameter point of
/// the winning task, ties resolve to the earliest task.
pub fn evaluate_lambda(
    cm: &CovarianceMatrix,
    ps: &PartyStructure,
    query: &PartitionQuery,
    cfg: &OptimizerConfig,
) -> Result<VerdictReport> {
    cfg.validate()?;
    if *query.parties().last().unwrap() >= ps.party_count() {
        return Err(Error::Partition(format!(
            "query refers to party {} but the structure has {} parties",
            query.parties().last().unwrap() + 1,
            ps.party_count()
        )));
    }
    let tasks: Vec<Vec<usize>> = if cfg.exhaustive {
        if query.len() > 16 {
            return Err(Error::Config(
                "exhaustive minor scan is limited to 16 parties".into(),
            ));
        }
        all_subsets(query.parties())
    } else {
        (1..=query.len()).map(|k| query.parties()[..k].to_vec()).collect()
    };

    let compute = || -> Result<Vec<MinorResult>> {
        tasks.iter().map(|t| minimize_minor(cm, ps, t, t.len(), cfg)).collect()
    };
    let results = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(compute)
    } else {
        compute()
    }?;

    let mut best = 0usize;
    for (i, r) in results.iter().enumerate() {
        if r.min_value < results[best].min_value {
            best = i;
        }
    }
    let lambda = results[best].min_value;
    Ok(VerdictReport {
        status: verdict(lambda, cfg.decision_tolerance),
        partition: query.to_one_based(),
        lambda,
        witness: WitnessParams::from_param_vector(&results[best].witness),
        minors: results
            .iter()
            .map(|r| MinorSummary {
                k: r.k,
                parties: r.parties.iter().map(|&p| p + 1).collect(),
                min_value: r.min_value,
            })
            .collect(),
        optimizer: OptimizerMeta {
            restarts: cfg.restarts,
            seed: cfg.seed,
            tolerance: cfg.decision_tolerance,
        },
        timestamp: None,
    })
}
