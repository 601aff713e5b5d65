//! End-to-end behavior of the verdict pipeline across modules.

use approx::assert_relative_eq;
use gausswit_core::{
    build_gamma, check_separable_inequality, evaluate_lambda, leading_minors, subset_gamma,
    CollectiveWeights, CovarianceMatrix, OptimizerConfig, ParamVector, PartitionQuery,
    PartyStructure, Status,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick_cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts: 16, max_iters: 200, seed, ..OptimizerConfig::default() }
}

#[test]
fn vacuum_product_lambda_is_two_to_the_minus_n() {
    for n in [2usize, 3] {
        let (ps, cm) = gausswit_core::states::vacuum_cm(n).unwrap();
        let query = PartitionQuery::all(n).unwrap();
        let report = evaluate_lambda(&cm, &ps, &query, &quick_cfg(7)).unwrap();
        assert_eq!(report.status, Status::Inconclusive);
        assert_relative_eq!(report.lambda, 0.5f64.powi(n as i32), epsilon = 1e-7);
        assert_eq!(report.minors.len(), n);
        for (idx, minor) in report.minors.iter().enumerate() {
            let k = idx + 1;
            assert_eq!(minor.k, k);
            assert_eq!(minor.parties, (1..=k).collect::<Vec<_>>());
            assert_relative_eq!(minor.min_value, 0.5f64.powi(k as i32), epsilon = 1e-7);
        }
    }
}

#[test]
fn mixed_state_is_entangled_with_a_standalone_witness() {
    let (ps, cm) = gausswit_core::states::mixed_bipartite_cm(0.1);
    let query = PartitionQuery::all(2).unwrap();
    let report = evaluate_lambda(&cm, &ps, &query, &quick_cfg(11)).unwrap();
    assert_eq!(report.status, Status::Entangled);
    assert_relative_eq!(report.lambda, -0.08, epsilon = 1e-6);

    // the witness alone must reproduce the cited minor strictly below zero
    let winning = report
        .minors
        .iter()
        .min_by(|a, b| a.min_value.total_cmp(&b.min_value))
        .unwrap();
    let witness = report.witness.to_param_vector().unwrap();
    let gamma = build_gamma(&cm, &ps, &witness).unwrap();
    let parties0: Vec<usize> = winning.parties.iter().map(|&p| p - 1).collect();
    let sub = if parties0.len() >= 2 {
        let q = PartitionQuery::new(parties0, ps.party_count()).unwrap();
        subset_gamma(&gamma, &q).unwrap()
    } else {
        DMatrix::from_element(1, 1, gamma.entry(parties0[0], parties0[0]))
    };
    let reproduced = *leading_minors(&sub).last().unwrap();
    assert!(reproduced < 0.0, "witness is not a certificate: {reproduced}");
    assert_relative_eq!(reproduced, report.lambda, epsilon = 1e-9);

    // witness blocks are normalized per party
    for p in 0..2 {
        assert_relative_eq!(witness.block_norm(p), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn symmetric_state_at_a_10_scan_is_positive() {
    // Measured behavior of the Γ construction on the 5-mode symmetric state
    // regrouped as 12|3|45: every leading minor stays positive (the global
    // minimum of the 3×3 determinant on the sphere product sits near 0.0341),
    // so the scan is INCONCLUSIVE.
    let (_, cm) = gausswit_core::states::symmetric_pure_cm(10.0).unwrap();
    let ps = PartyStructure::new(vec![2, 1, 2]).unwrap();
    let query = PartitionQuery::all(3).unwrap();
    let cfg = OptimizerConfig { seed: 5, ..OptimizerConfig::default() };
    let report = evaluate_lambda(&cm, &ps, &query, &cfg).unwrap();
    assert_eq!(report.status, Status::Inconclusive);
    assert!(
        report.lambda > 0.03 && report.lambda < 0.04,
        "expected the measured ~0.0341 plateau, got {}",
        report.lambda
    );
    // the k = 1 minimum is the smallest eigenvalue of party 1's form matrix
    assert_relative_eq!(report.minors[0].min_value, 0.059927740283, epsilon = 1e-6);
}

#[test]
fn adding_parties_never_increases_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..8 {
        let ps = PartyStructure::singletons(4).unwrap();
        let raw = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let cm = CovarianceMatrix::new(0.5 * (&raw + raw.transpose())).unwrap();
        let cfg = quick_cfg(3);
        let mut previous = f64::INFINITY;
        for m in 2..=4 {
            let query = PartitionQuery::new((0..m).collect(), 4).unwrap();
            let report = evaluate_lambda(&cm, &ps, &query, &cfg).unwrap();
            assert!(
                report.lambda <= previous + 1e-12,
                "lambda rose from {previous} to {} when extending the subset",
                report.lambda
            );
            previous = report.lambda;
        }
    }
}

#[test]
fn subsetting_gamma_equals_building_on_the_reduced_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let ps = PartyStructure::new(vec![1, 2, 1, 2]).unwrap();
    let raw = DMatrix::from_fn(ps.dim(), ps.dim(), |_, _| rng.gen_range(-1.0..1.0));
    let cm = CovarianceMatrix::new(0.5 * (&raw + raw.transpose())).unwrap();
    let v = ParamVector::new(
        ps.sizes().iter().map(|&s| (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
        ps.sizes().iter().map(|&s| (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
    )
    .unwrap();

    let keep = [0usize, 2];
    let full = build_gamma(&cm, &ps, &v).unwrap();
    let query = PartitionQuery::new(keep.to_vec(), 4).unwrap();
    let via_subset = subset_gamma(&full, &query).unwrap();

    // restrict the covariance matrix and the parameters to the kept parties
    let mut rows = Vec::new();
    for &p in &keep {
        for mode in 0..ps.size(p) {
            rows.push(ps.x_index(p, mode));
            rows.push(ps.p_index(p, mode));
        }
    }
    let reduced_ps = PartyStructure::new(keep.iter().map(|&p| ps.size(p)).collect()).unwrap();
    let reduced_cm = CovarianceMatrix::new(DMatrix::from_fn(rows.len(), rows.len(), |i, j| {
        cm.entry(rows[i], rows[j])
    }))
    .unwrap();
    let reduced_v = ParamVector::new(
        keep.iter().map(|&p| v.alphas[p].clone()).collect(),
        keep.iter().map(|&p| v.betas[p].clone()).collect(),
    )
    .unwrap();
    let direct = build_gamma(&reduced_cm, &reduced_ps, &reduced_v).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_relative_eq!(via_subset[(i, j)], direct.entry(i, j), epsilon = 1e-12);
        }
    }
}

#[test]
fn thermal_product_states_stay_inconclusive() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let n = rng.gen_range(2..=4);
        let blocks: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let s = rng.gen_range(1..=2);
                rng.gen_range(1.0..5.0) * DMatrix::<f64>::identity(2 * s, 2 * s)
            })
            .collect();
        let (ps, cm) = gausswit_core::states::separable_product_cm(&blocks).unwrap();
        let query = PartitionQuery::all(n).unwrap();
        let report = evaluate_lambda(&cm, &ps, &query, &quick_cfg(9)).unwrap();
        assert_eq!(report.status, Status::Inconclusive);
        assert!(report.lambda >= -1e-7, "separable state flagged: λ = {}", report.lambda);
    }
}

#[test]
fn negative_gamma_eigenvector_violates_the_separability_inequality() {
    // Take the entangled mixed state's witness, embed the eigenvector of the
    // negative-determinant submatrix as collective weights, and watch the
    // inequality fail — the Lemma-level form of the same certificate.
    let (ps, cm) = gausswit_core::states::mixed_bipartite_cm(0.1);
    let query = PartitionQuery::all(2).unwrap();
    let report = evaluate_lambda(&cm, &ps, &query, &quick_cfg(11)).unwrap();
    assert_eq!(report.status, Status::Entangled);
    let witness = report.witness.to_param_vector().unwrap();
    let gamma = build_gamma(&cm, &ps, &witness).unwrap();
    let sub = subset_gamma(&gamma, &query).unwrap();
    let eigen = sub.symmetric_eigen();
    let (mut min_idx, mut min_val) = (0, f64::INFINITY);
    for (i, &value) in eigen.eigenvalues.iter().enumerate() {
        if value < min_val {
            min_val = value;
            min_idx = i;
        }
    }
    assert!(min_val < 0.0, "winning witness must leave a negative eigenvalue");
    let t: Vec<f64> = eigen.eigenvectors.column(min_idx).iter().copied().collect();
    let slack =
        check_separable_inequality(&cm, &ps, &witness, &CollectiveWeights::new(t)).unwrap();
    assert!(slack < 0.0, "inequality not violated: slack = {slack}");
}

#[test]
fn exhaustive_scan_sees_non_leading_principal_minors() {
    // For the mixed state, γ_22 alone dips to −0.025, but {2} is never a
    // leading minor of the {1,2} prefix scan; the exhaustive mode covers it.
    let (ps, cm) = gausswit_core::states::mixed_bipartite_cm(0.1);
    let query = PartitionQuery::all(2).unwrap();
    let cfg = OptimizerConfig { exhaustive: true, ..quick_cfg(13) };
    let report = evaluate_lambda(&cm, &ps, &query, &cfg).unwrap();
    assert_eq!(report.minors.len(), 3); // {1}, {2}, {1,2}
    let singleton_two = report
        .minors
        .iter()
        .find(|m| m.parties == vec![2])
        .expect("exhaustive scan must include the {2} subset");
    assert_relative_eq!(singleton_two.min_value, -0.025, epsilon = 1e-6);
    assert_eq!(report.status, Status::Entangled);
}

#[test]
fn thread_count_does_not_change_results() {
    let (ps, cm) = gausswit_core::states::mixed_bipartite_cm(0.1);
    let query = PartitionQuery::all(2).unwrap();
    let mut single = quick_cfg(31);
    single.threads = 1;
    let mut quad = quick_cfg(31);
    quad.threads = 4;
    let a = evaluate_lambda(&cm, &ps, &query, &single).unwrap();
    let b = evaluate_lambda(&cm, &ps, &query, &quad).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.witness, b.witness);
    assert_eq!(a.minors, b.minors);
}

#[test]
fn report_json_round_trips_and_matches_the_schema() {
    let (ps, cm) = gausswit_core::states::mixed_bipartite_cm(0.1);
    let query = PartitionQuery::all(2).unwrap();
    let mut report = evaluate_lambda(&cm, &ps, &query, &quick_cfg(17)).unwrap();
    report.timestamp = Some("2026-01-01T00:00:00Z".into());

    let text = gausswit_core::report_to_json(&report);
    let parsed: gausswit_core::VerdictReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, report);

    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["status"], "entangled");
    assert_eq!(value["partition"], serde_json::json!([1, 2]));
    assert!(value["lambda"].is_f64());
    assert!(value["witness"]["alpha"].is_array());
    assert!(value["witness"]["beta"].is_array());
    assert!(value["minors"].as_array().unwrap().iter().all(|m| {
        m["k"].is_u64() && m["parties"].is_array() && m["min_value"].is_number()
    }));
    assert!(value["optimizer"]["restarts"].is_u64());
    assert!(value["optimizer"]["seed"].is_u64());
    assert!(value["optimizer"]["tolerance"].is_f64());

    // without a timestamp the field is absent entirely
    report.timestamp = None;
    let bare = gausswit_core::report_to_json(&report);
    assert!(!bare.contains("timestamp"));
}
