//! Assembly of the parametric n×n matrix Γ from a covariance matrix.
//!
//! For parameter blocks α⁽ᵏ⁾, β⁽ᵏ⁾ (one pair of length-s_k vectors per party)
//! the entries are
//!
//! ```text
//! γ_kk      = Σ_{m,h} α_m α_h M[x_m, x_h] + Σ_{m,h} β_m β_h M[p_m, p_h] − Σ_i α_i β_i
//! γ_cd, c≠d = Σ_{m,h} α_m^{(c)} α_h^{(d)} M[x_m^{(c)}, x_h^{(d)}]
//!           + Σ_{m,h} β_m^{(c)} β_h^{(d)} M[p_m^{(c)}, p_h^{(d)}]
//! ```
//!
//! Each entry is accumulated in a fixed order (m outer, h inner) so repeated
//! runs are bit-identical. The diagonal subtraction carries no absolute
//! value: the parameters range over all signs, which covers both branches.
//!
//! Γ is a homogeneous quadratic form per party block: scaling block i by c
//! scales row i and column i by c (the diagonal by c²). That homogeneity is
//! what makes the sign of Γ's minors on the unit-sphere product equivalent to
//! the unbounded-descent question for the unconstrained minimization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{CovarianceMatrix, PartyStructure};

/// Criterion parameters: per party `i`, real vectors `alpha[i]`, `beta[i]` of
/// length `s_i`. Not required to be normalized; normalization is the
/// optimizer's concern.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub alphas: Vec<Vec<f64>>,
    pub betas: Vec<Vec<f64>>,
}

impl ParamVector {
    pub fn new(alphas: Vec<Vec<f64>>, betas: Vec<Vec<f64>>) -> Result<Self> {
        if alphas.len() != betas.len() {
            return Err(Error::Dimension(format!(
                "{} alpha blocks vs {} beta blocks",
                alphas.len(),
                betas.len()
            )));
        }
        for (i, (a, b)) in alphas.iter().zip(&betas).enumerate() {
            if a.len() != b.len() {
                return Err(Error::Dimension(format!(
                    "party {}: alpha block has {} entries, beta block {}",
                    i + 1,
                    a.len(),
                    b.len()
                )));
            }
        }
        Ok(Self { alphas, betas })
    }

    /// All-zero parameters shaped for `ps`.
    pub fn zeros(ps: &PartyStructure) -> Self {
        Self {
            alphas: ps.sizes().iter().map(|&s| vec![0.0; s]).collect(),
            betas: ps.sizes().iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    /// Normalized filler: per party α = e₁, β = 0. Used for parties whose
    /// block does not enter the objective at hand.
    pub fn canonical(ps: &PartyStructure) -> Self {
        let mut v = Self::zeros(ps);
        for block in &mut v.alphas {
            block[0] = 1.0;
        }
        v
    }

    pub fn matches(&self, ps: &PartyStructure) -> bool {
        self.alphas.len() == ps.party_count()
            && self.alphas.iter().enumerate().all(|(i, a)| a.len() == ps.size(i))
    }

    pub fn party_count(&self) -> usize {
        self.alphas.len()
    }

    /// ‖(α⁽ⁱ⁾, β⁽ⁱ⁾)‖₂ of one party block.
    pub fn block_norm(&self, party: usize) -> f64 {
        let sq: f64 = self.alphas[party].iter().chain(&self.betas[party]).map(|v| v * v).sum();
        sq.sqrt()
    }

    /// Σ_j α_j β_j of one party block.
    pub fn alpha_beta_dot(&self, party: usize) -> f64 {
        self.alphas[party].iter().zip(&self.betas[party]).map(|(a, b)| a * b).sum()
    }

    /// Scale one party's block in place.
    pub fn scale_block(&mut self, party: usize, factor: f64) {
        for v in self.alphas[party].iter_mut().chain(self.betas[party].iter_mut()) {
            *v *= factor;
        }
    }
}

/// The symmetric n×n matrix Γ of the separability criterion, evaluated at one
/// parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    g: DMatrix<f64>,
}

impl GammaMatrix {
    pub fn order(&self) -> usize {
        self.g.nrows()
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.g[(k, l)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }
}

/// Evaluate Γ at the given parameters. The upper triangle is computed once
/// and mirrored, so the result is exactly symmetric.
pub fn build_gamma(
    cm: &CovarianceMatrix,
    ps: &PartyStructure,
    v: &ParamVector,
) -> Result<GammaMatrix> {
    if cm.dim() != ps.dim() {
        return Err(Error::Dimension(format!(
            "covariance matrix is {}×{} but the party structure needs {}×{}",
            cm.dim(),
            cm.dim(),
            ps.dim(),
            ps.dim()
        )));
    }
    if !v.matches(ps) {
        return Err(Error::Dimension("parameter blocks do not match the party structure".into()));
    }
    let n = ps.party_count();
    let mut g = DMatrix::zeros(n, n);
    for k in 0..n {
        let sk = ps.size(k);
        let mut acc = 0.0;
        for m in 0..sk {
            for h in 0..sk {
                acc += v.alphas[k][m] * v.alphas[k][h] * cm.entry(ps.x_index(k, m), ps.x_index(k, h));
            }
        }
        for m in 0..sk {
            for h in 0..sk {
                acc += v.betas[k][m] * v.betas[k][h] * cm.entry(ps.p_index(k, m), ps.p_index(k, h));
            }
        }
        g[(k, k)] = acc - v.alpha_beta_dot(k);
    }
    for c in 0..n {
        for d in (c + 1)..n {
            let mut acc = 0.0;
            for m in 0..ps.size(c) {
                for h in 0..ps.size(d) {
                    acc += v.alphas[c][m] * v.alphas[d][h] * cm.entry(ps.x_index(c, m), ps.x_index(d, h));
                }
            }
            for m in 0..ps.size(c) {
                for h in 0..ps.size(d) {
                    acc += v.betas[c][m] * v.betas[d][h] * cm.entry(ps.p_index(c, m), ps.p_index(d, h));
                }
            }
            g[(c, d)] = acc;
            g[(d, c)] = acc;
        }
    }
    Ok(GammaMatrix { g })
}

#[cfg(test)]
pub(crate) fn gamma_from_raw(g: DMatrix<f64>) -> GammaMatrix {
    GammaMatrix { g }
}

/// tᵀ Γ t.
pub fn gamma_quadratic_form(gamma: &GammaMatrix, t: &[f64]) -> Result<f64> {
    let n = gamma.order();
    if t.len() != n {
        return Err(Error::Dimension(format!("weight vector length {} vs Γ order {n}", t.len())));
    }
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            acc += t[k] * t[l] * gamma.entry(k, l);
        }
    }
    Ok(acc)
}
