//! Property tests for the algebraic invariants.

use gausswit_core::{
    build_gamma, gamma_quadratic_form, lur_bound, state_from_json, state_to_json, variance_sum,
    CollectiveWeights, CovarianceMatrix, ParamVector, PartyStructure,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    sizes: Vec<usize>,
    cm: Vec<f64>,      // packed upper triangle
    alphas: Vec<Vec<f64>>,
    betas: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn instances() -> impl Strategy<Value = Instance> {
    prop::collection::vec(1usize..=3, 1..=4).prop_flat_map(|sizes| {
        let modes: usize = sizes.iter().sum();
        let dim = 2 * modes;
        let tri = dim * (dim + 1) / 2;
        let n = sizes.len();
        (
            Just(sizes.clone()),
            prop::collection::vec(-2.0f64..2.0, tri),
            prop::collection::vec(
                prop::collection::vec(-2.0f64..2.0, sizes.iter().copied().fold(1, usize::max)),
                n,
            ),
            prop::collection::vec(
                prop::collection::vec(-2.0f64..2.0, sizes.iter().copied().fold(1, usize::max)),
                n,
            ),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(move |(sizes, cm, mut alphas, mut betas, weights)| {
                for (i, &s) in sizes.iter().enumerate() {
                    alphas[i].truncate(s);
                    betas[i].truncate(s);
                }
                Instance { sizes, cm, alphas, betas, weights }
            })
    })
}

fn unpack(instance: &Instance) -> (PartyStructure, CovarianceMatrix, ParamVector, CollectiveWeights) {
    let ps = PartyStructure::new(instance.sizes.clone()).unwrap();
    let dim = ps.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut at = 0;
    for i in 0..dim {
        for j in i..dim {
            m[(i, j)] = instance.cm[at];
            m[(j, i)] = instance.cm[at];
            at += 1;
        }
    }
    let cm = CovarianceMatrix::new(m).unwrap();
    let v = ParamVector::new(instance.alphas.clone(), instance.betas.clone()).unwrap();
    (ps, cm, v, CollectiveWeights::new(instance.weights.clone()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_variance_identity(instance in instances()) {
        let (ps, cm, v, t) = unpack(&instance);
        let gamma = build_gamma(&cm, &ps, &v).unwrap();
        let lhs = gamma_quadratic_form(&gamma, &t.t).unwrap();
        let rhs = variance_sum(&cm, &ps, &v, &t).unwrap() - lur_bound(&ps, &v, &t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn per_party_scaling_homogeneity(instance in instances(), party_pick in 0usize..8) {
        let (ps, cm, v, _) = unpack(&instance);
        let gamma = build_gamma(&cm, &ps, &v).unwrap();
        let party = party_pick % ps.party_count();
        for c in [-2.0, 0.5, 3.0] {
            let mut scaled = v.clone();
            scaled.scale_block(party, c);
            let gs = build_gamma(&cm, &ps, &scaled).unwrap();
            for k in 0..ps.party_count() {
                for l in 0..ps.party_count() {
                    let factor = match (k == party, l == party) {
                        (true, true) => c * c,
                        (true, false) | (false, true) => c,
                        (false, false) => 1.0,
                    };
                    let want = factor * gamma.entry(k, l);
                    let got = gs.entry(k, l);
                    prop_assert!(
                        (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                        "entry ({}, {}): {} vs {}", k, l, got, want
                    );
                }
            }
        }
    }

    #[test]
    fn state_files_round_trip_exactly(instance in instances()) {
        let (ps, cm, _, _) = unpack(&instance);
        let text = state_to_json(&ps, &cm);
        let (ps2, cm2) = state_from_json(&text).unwrap();
        prop_assert_eq!(ps, ps2);
        prop_assert_eq!(cm.matrix(), cm2.matrix());
    }
}
