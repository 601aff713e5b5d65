//! Collective-observable variance algebra.
//!
//! For weights t and parameter blocks (α, β), the collective quadratures are
//! U = Σ t_k X̂⁽ᵏ⁾ and V = Σ t_k P̂⁽ᵏ⁾ with X̂⁽ᵏ⁾ = Σ α_i x̂_i, P̂⁽ᵏ⁾ = Σ β_i p̂_i.
//! `variance_sum` expands ΔU² + ΔV² as a quadratic form in the
//! covariance-matrix entries, `lur_bound` is the commutator lower bound
//! Σ_k (Σ_i α_i β_i) t_k² that every fully separable state obeys, and the
//! difference of the two is exactly tᵀ Γ t. That identity ties the Γ
//! construction to the variance expansion entry by entry and is the
//! strongest single check against index-arithmetic mistakes.

use crate::error::{Error, Result};
use crate::gamma::ParamVector;
use crate::state::{CovarianceMatrix, PartyStructure};

/// The weights t_k of the collective observables, one per party.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveWeights {
    pub t: Vec<f64>,
}

impl CollectiveWeights {
    pub fn new(t: Vec<f64>) -> Self {
        Self { t }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

impl From<Vec<f64>> for CollectiveWeights {
    fn from(t: Vec<f64>) -> Self {
        Self::new(t)
    }
}

fn check_dims(ps: &PartyStructure, v: &ParamVector, t: &CollectiveWeights) -> Result<()> {
    if !v.matches(ps) {
        return Err(Error::Dimension("parameter blocks do not match the party structure".into()));
    }
    if t.len() != ps.party_count() {
        return Err(Error::Dimension(format!(
            "{} weights vs {} parties",
            t.len(),
            ps.party_count()
        )));
    }
    Ok(())
}

/// ΔU² + ΔV² as the covariance-matrix quadratic form
/// Σ_{i,j} t_i t_j (α⁽ⁱ⁾ᵀ M_xx⁽ⁱʲ⁾ α⁽ʲ⁾ + β⁽ⁱ⁾ᵀ M_pp⁽ⁱʲ⁾ β⁽ʲ⁾),
/// using the same index arithmetic as the Γ assembly.
pub fn variance_sum(
    cm: &CovarianceMatrix,
    ps: &PartyStructure,
    v: &ParamVector,
    t: &CollectiveWeights,
) -> Result<f64> {
    check_dims(ps, v, t)?;
    if cm.dim() != ps.dim() {
        return Err(Error::Dimension(format!(
            "covariance matrix dimension {} vs structure dimension {}",
            cm.dim(),
            ps.dim()
        )));
    }
    let n = ps.party_count();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut form = 0.0;
            for m in 0..ps.size(i) {
                for h in 0..ps.size(j) {
                    form += v.alphas[i][m] * v.alphas[j][h] * cm.entry(ps.x_index(i, m), ps.x_index(j, h));
                }
            }
            for m in 0..ps.size(i) {
                for h in 0..ps.size(j) {
                    form += v.betas[i][m] * v.betas[j][h] * cm.entry(ps.p_index(i, m), ps.p_index(j, h));
                }
            }
            acc += t.t[i] * t.t[j] * form;
        }
    }
    Ok(acc)
}

/// Commutator lower bound Σ_k (Σ_i α_i⁽ᵏ⁾ β_i⁽ᵏ⁾) t_k².
pub fn lur_bound(ps: &PartyStructure, v: &ParamVector, t: &CollectiveWeights) -> Result<f64> {
    check_dims(ps, v, t)?;
    Ok((0..ps.party_count()).map(|k| v.alpha_beta_dot(k) * t.t[k] * t.t[k]).sum())
}

/// Slack of the separability inequality: `variance_sum − lur_bound`.
/// Nonnegative for every fully separable state; a negative slack is an
/// entanglement certificate in its own right.
pub fn check_separable_inequality(
    cm: &CovarianceMatrix,
    ps: &PartyStructure,
    v: &ParamVector,
    t: &CollectiveWeights,
) -> Result<f64> {
    Ok(variance_sum(cm, ps, v, t)? - lur_bound(ps, v, t)?)
}
