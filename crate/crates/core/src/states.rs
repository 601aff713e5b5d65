//! Generators for the worked example states and synthetic test families.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{CovarianceMatrix, PartyStructure};

/// Off-diagonal coefficients of the 5-mode pure symmetric state:
/// c₁ = (3(a²−1) + √((a²−1)(25a²−9))) / 8a and c₂ with the − branch.
pub fn symmetric_coefficients(a: f64) -> Result<(f64, f64)> {
    if !(a >= 1.0) {
        return Err(Error::Config(format!("symmetric state needs a ≥ 1, got {a}")));
    }
    let root = ((a * a - 1.0) * (25.0 * a * a - 9.0)).sqrt();
    let base = 3.0 * (a * a - 1.0);
    Ok(((base + root) / (8.0 * a), (base - root) / (8.0 * a)))
}

/// The 10×10 covariance matrix of the 5-mode pure symmetric Gaussian state:
/// `a` on the diagonal, c₁ on every x–x off-diagonal, c₂ on every p–p
/// off-diagonal, no x–p mixing. Five singleton parties.
pub fn symmetric_pure_cm(a: f64) -> Result<(PartyStructure, CovarianceMatrix)> {
    let (c1, c2) = symmetric_coefficients(a)?;
    let ps = PartyStructure::singletons(5)?;
    let mut m = DMatrix::zeros(10, 10);
    for i in 0..5 {
        for j in 0..5 {
            if i == j {
                m[(2 * i, 2 * j)] = a;
                m[(2 * i + 1, 2 * j + 1)] = a;
            } else {
                m[(2 * i, 2 * j)] = c1;
                m[(2 * i + 1, 2 * j + 1)] = c2;
            }
        }
    }
    Ok((ps, CovarianceMatrix::new(m)?))
}

/// The 4-mode bipartite mixed-state family: first 4×4 block `8/5 + λ` on the
/// diagonal with `2/5` off-diagonals, second block `1/2 + λ` with `−1/8`,
/// and a constant `1/10` cross block. Two parties of two modes each.
///
/// λ is unconstrained; callers asking about unphysical inputs get the
/// criterion's answer for the matrix as given.
pub fn mixed_bipartite_cm(lambda: f64) -> (PartyStructure, CovarianceMatrix) {
    let ps = PartyStructure::new(vec![2, 2]).expect("fixed sizes");
    let mut m = DMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = if i == j { 8.0 / 5.0 + lambda } else { 2.0 / 5.0 };
            m[(4 + i, 4 + j)] = if i == j { 0.5 + lambda } else { -0.125 };
            m[(i, 4 + j)] = 0.1;
            m[(4 + j, i)] = 0.1;
        }
    }
    (ps, CovarianceMatrix::new(m).expect("symmetric by construction"))
}

/// n singleton vacuum modes: the 2n×2n identity.
pub fn vacuum_cm(parties: usize) -> Result<(PartyStructure, CovarianceMatrix)> {
    let ps = PartyStructure::singletons(parties)?;
    let cm = CovarianceMatrix::identity(ps.dim());
    Ok((ps, cm))
}

/// Block-diagonal assembly of per-party covariance blocks; all cross-party
/// moments vanish, which is the CM shape of a product state.
pub fn separable_product_cm(blocks: &[DMatrix<f64>]) -> Result<(PartyStructure, CovarianceMatrix)> {
    if blocks.is_empty() {
        return Err(Error::Structure("need at least one block".into()));
    }
    let mut sizes = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        if b.nrows() != b.ncols() || b.nrows() == 0 || b.nrows() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "block {} must be square with even dimension, got {}×{}",
                i + 1,
                b.nrows(),
                b.ncols()
            )));
        }
        sizes.push(b.nrows() / 2);
    }
    let ps = PartyStructure::new(sizes)?;
    let mut m = DMatrix::zeros(ps.dim(), ps.dim());
    let mut at = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                m[(at + i, at + j)] = b[(i, j)];
            }
        }
        at += b.nrows();
    }
    Ok((ps, CovarianceMatrix::new(m)?))
}
