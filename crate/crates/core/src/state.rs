//! Party structures, covariance matrices, and bit-exact file I/O.
//!
//! A state is a real symmetric `2S×2S` second-moment matrix together with a
//! split of its `S` modes into parties. Quadrature ordering is x,p-interleaved
//! per mode with parties concatenated: mode `m` of party `i` (0-based) owns
//! rows `2·o_i + 2m` (x̂) and `2·o_i + 2m + 1` (p̂), where `o_i` is the number
//! of modes in earlier parties. No other ordering is accepted.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::criterion::VerdictReport;
use crate::error::{Error, Result};

/// Asymmetry up to this bound is silently symmetrized; beyond it the input is
/// rejected as corrupt rather than noisy.
pub const ASYMMETRY_LIMIT: f64 = 1e-9;

/// How the total mode set splits into parties `(s_1, …, s_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl PartyStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Structure("need at least one party".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Structure("every party needs at least one mode".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self { sizes, offsets })
    }

    /// n singleton parties (one mode each).
    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn party_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, party: usize) -> usize {
        self.sizes[party]
    }

    pub fn offset(&self, party: usize) -> usize {
        self.offsets[party]
    }

    pub fn total_modes(&self) -> usize {
        self.offsets.last().unwrap() + self.sizes.last().unwrap()
    }

    /// Side length of the covariance matrix this structure describes.
    pub fn dim(&self) -> usize {
        2 * self.total_modes()
    }

    /// Row/column of x̂ for `mode` of `party` (all 0-based).
    pub fn x_index(&self, party: usize, mode: usize) -> usize {
        2 * self.offsets[party] + 2 * mode
    }

    /// Row/column of p̂ for `mode` of `party` (all 0-based).
    pub fn p_index(&self, party: usize, mode: usize) -> usize {
        2 * self.offsets[party] + 2 * mode + 1
    }
}

/// Real symmetric second-moment matrix in the canonical quadrature ordering.
///
/// Exactly symmetric after construction: the upper triangle is mirrored once
/// the (tolerated) serialization noise has been averaged out.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut max_abs = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_abs = max_abs.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_abs > ASYMMETRY_LIMIT {
            return Err(Error::Asymmetric { max_abs, limit: ASYMMETRY_LIMIT });
        }
        let mut sym = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
                sym[(i, j)] = avg;
                sym[(j, i)] = avg;
            }
        }
        Ok(Self { m: sym })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("covariance matrix rows have uneven lengths".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }
}

/// A strictly increasing subset of at least two parties, identifying which
/// subsystems a verdict is asked about. Stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionQuery {
    parties: Vec<usize>,
}

impl PartitionQuery {
    pub fn new(parties: Vec<usize>, party_count: usize) -> Result<Self> {
        if parties.len() < 2 {
            return Err(Error::Partition("need at least two parties".into()));
        }
        if !parties.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Partition("party indices must be strictly increasing".into()));
        }
        if *parties.last().unwrap() >= party_count {
            return Err(Error::Partition(format!(
                "party index {} out of range for {} parties",
                parties.last().unwrap() + 1,
                party_count
            )));
        }
        Ok(Self { parties })
    }

    /// Build from the 1-based indices used in files and on the command line.
    pub fn from_one_based(parties: &[usize], party_count: usize) -> Result<Self> {
        if parties.iter().any(|&p| p == 0) {
            return Err(Error::Partition("party indices are 1-based".into()));
        }
        Self::new(parties.iter().map(|&p| p - 1).collect(), party_count)
    }

    /// All parties of a structure, the default query.
    pub fn all(party_count: usize) -> Result<Self> {
        Self::new((0..party_count).collect(), party_count)
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.parties.iter().map(|&p| p + 1).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    party_sizes: Vec<usize>,
    cm: Vec<Vec<f64>>,
}

/// Load a state file, validate it, and return the symmetrized matrix.
pub fn load_state(path: impl AsRef<Path>) -> Result<(PartyStructure, CovarianceMatrix)> {
    state_from_json(&fs::read_to_string(path)?)
}

pub fn state_from_json(text: &str) -> Result<(PartyStructure, CovarianceMatrix)> {
    let file: StateFile = serde_json::from_str(text)?;
    let ps = PartyStructure::new(file.party_sizes)?;
    let cm = CovarianceMatrix::from_rows(&file.cm)?;
    if cm.dim() != ps.dim() {
        return Err(Error::Dimension(format!(
            "party sizes imply a {0}×{0} matrix but the file holds {1}×{1}",
            ps.dim(),
            cm.dim()
        )));
    }
    Ok((ps, cm))
}

pub fn save_state(
    path: impl AsRef<Path>,
    ps: &PartyStructure,
    cm: &CovarianceMatrix,
) -> Result<()> {
    fs::write(path, state_to_json(ps, cm))?;
    Ok(())
}

pub fn state_to_json(ps: &PartyStructure, cm: &CovarianceMatrix) -> String {
    let file = StateFile { party_sizes: ps.sizes().to_vec(), cm: cm.to_rows() };
    serde_json::to_string_pretty(&file).expect("state serialization cannot fail")
}

/// Write a verdict report; the JSON round-trips losslessly.
pub fn save_report(report: &VerdictReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report_to_json(report))?;
    Ok(())
}

pub fn report_to_json(report: &VerdictReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

pub fn load_report(path: impl AsRef<Path>) -> Result<VerdictReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_rejects_empty_and_zero_parties() {
        assert!(PartyStructure::new(vec![]).is_err());
        assert!(PartyStructure::new(vec![1, 0, 2]).is_err());
    }

    #[test]
    fn structure_offsets_accumulate() {
        let ps = PartyStructure::new(vec![2, 1, 2]).unwrap();
        assert_eq!(ps.offset(0), 0);
        assert_eq!(ps.offset(1), 2);
        assert_eq!(ps.offset(2), 3);
        assert_eq!(ps.total_modes(), 5);
        assert_eq!(ps.dim(), 10);
    }

    #[test]
    fn index_map_is_a_bijection() {
        let ps = PartyStructure::new(vec![3, 1, 2, 2]).unwrap();
        let mut seen = vec![false; ps.dim()];
        for party in 0..ps.party_count() {
            for mode in 0..ps.size(party) {
                for idx in [ps.x_index(party, mode), ps.p_index(party, mode)] {
                    assert!(idx < ps.dim());
                    assert!(!seen[idx], "index {idx} hit twice");
                    seen[idx] = true;
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn appendix_index_formula() {
        // 1-based paper formula: x̂_m^(i) = q_{2(s_1+…+s_{i-1}) + 2m − 1}.
        let ps = PartyStructure::new(vec![2, 3]).unwrap();
        assert_eq!(ps.x_index(1, 0) + 1, 2 * 2 + 2 * 1 - 1);
        assert_eq!(ps.p_index(1, 2) + 1, 2 * 2 + 2 * 3);
    }

    #[test]
    fn small_asymmetry_is_symmetrized_exactly() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1e-10;
        m[(1, 0)] = -1e-10;
        let cm = CovarianceMatrix::new(m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(cm.entry(i, j), cm.entry(j, i));
            }
        }
        assert_eq!(cm.entry(0, 1), 0.0);
    }

    #[test]
    fn large_asymmetry_is_a_hard_error() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1e-6;
        assert!(matches!(CovarianceMatrix::new(m), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn identity_state_loads() {
        let text = r#"{"party_sizes":[1,1],"cm":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#;
        let (ps, cm) = state_from_json(text).unwrap();
        assert_eq!(ps.sizes(), &[1, 1]);
        assert_eq!(cm.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{"party_sizes":[1,1],"cm":[[1,0,0,0,0,0],[0,1,0,0,0,0],[0,0,1,0,0,0],[0,0,0,1,0,0],[0,0,0,0,1,0],[0,0,0,0,0,1]]}"#;
        assert!(matches!(state_from_json(text), Err(Error::Dimension(_))));
    }

    #[test]
    fn state_round_trip_is_exact() {
        let ps = PartyStructure::new(vec![2, 2]).unwrap();
        let (gen_ps, cm) = crate::states::mixed_bipartite_cm(0.1);
        assert_eq!(ps, gen_ps);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        save_state(&path, &ps, &cm).unwrap();
        let (ps2, cm2) = load_state(&path).unwrap();
        assert_eq!(ps, ps2);
        // serde_json prints shortest round-trip floats, so equality is exact
        assert_eq!(cm.matrix(), cm2.matrix());
    }

    #[test]
    fn partition_query_validation() {
        assert!(PartitionQuery::new(vec![0], 3).is_err());
        assert!(PartitionQuery::new(vec![1, 1], 3).is_err());
        assert!(PartitionQuery::new(vec![2, 1], 3).is_err());
        assert!(PartitionQuery::new(vec![0, 3], 3).is_err());
        let q = PartitionQuery::from_one_based(&[2, 4, 5], 5).unwrap();
        assert_eq!(q.parties(), &[1, 3, 4]);
        assert_eq!(q.to_one_based(), vec![2, 4, 5]);
    }
}
