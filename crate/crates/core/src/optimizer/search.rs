//! Local-search kernels behind a common trait, looked up by name.
//!
//! `gradient` is the production path: projected gradient descent on the
//! sphere product with a backtracking (sufficient-decrease) line search and
//! re-normalization after every step. `nelder-mead` (alias
//! `derivative-free`) runs a simplex search on stereographic chart
//! coordinates of each block sphere; it exists to cross-check the gradient
//! path without sharing any of its machinery.

use super::{MinorObjective, OptimizerConfig};
use crate::error::{Error, Result};

/// What one restart produced.
pub struct SearchOutcome {
    /// Objective value at `point`.
    pub value: f64,
    /// Packed, per-block-normalized parameter point.
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Whether the kernel's own stopping rule fired before the iteration cap.
    pub converged: bool,
    /// Objective values of accepted iterates, best-first never violated:
    /// the sequence is non-increasing.
    pub accepted_values: Vec<f64>,
}

pub trait LocalSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, obj: &MinorObjective<'_>, start: Vec<f64>, cfg: &OptimizerConfig) -> SearchOutcome;
}

static STRATEGIES: [&dyn LocalSearch; 2] = [&GradientDescent, &NelderMead];

/// Every registered kernel.
pub fn strategies() -> &'static [&'static dyn LocalSearch] {
    &STRATEGIES
}

/// Resolve a kernel by registry name. `derivative-free` is accepted as an
/// alias for `nelder-mead`.
pub fn lookup(name: &str) -> Result<&'static dyn LocalSearch> {
    let canonical = if name == "derivative-free" { "nelder-mead" } else { name };
    STRATEGIES.iter().copied().find(|s| s.name() == canonical).ok_or_else(|| {
        let known: Vec<&str> = STRATEGIES.iter().map(|s| s.name()).collect();
        Error::UnknownStrategy(name.to_string(), known.join(", "))
    })
}

/// Projected gradient descent with backtracking line search.
pub struct GradientDescent;

impl LocalSearch for GradientDescent {
    fn name(&self) -> &'static str {
        "gradient"
    }

    fn run(&self, obj: &MinorObjective<'_>, start: Vec<f64>, cfg: &OptimizerConfig) -> SearchOutcome {
        let mut x = start;
        obj.normalize_blocks(&mut x);
        let mut fx = obj.value_flat(&x);
        let mut accepted = vec![fx];
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..cfg.max_iters {
            iterations += 1;
            let grad = obj.gradient_flat(&x);
            let tangent = obj.project_tangent(&x, &grad);
            let norm_sq: f64 = tangent.iter().map(|v| v * v).sum();
            if norm_sq.sqrt() <= cfg.gradient_tolerance {
                converged = true;
                break;
            }
            // Backtrack to the first step with sufficient decrease, then keep
            // shrinking while that strictly improves the value. The extra
            // probes cost one evaluation each and avoid the mirror trap where
            // a long re-normalized step reflects across the minimum with a
            // tiny accepted decrease.
            let mut step = cfg.initial_step;
            let mut chosen: Option<(f64, Vec<f64>)> = None;
            for _ in 0..60 {
                let mut candidate: Vec<f64> =
                    x.iter().zip(&tangent).map(|(xi, ti)| xi - step * ti).collect();
                obj.normalize_blocks(&mut candidate);
                let fc = obj.value_flat(&candidate);
                // strict `<` so that a required decrease below one ulp cannot
                // be "met" by an equal value
                let sufficient = fc < fx && fc <= fx - cfg.sufficient_decrease * step * norm_sq;
                match &chosen {
                    None if sufficient => chosen = Some((fc, candidate)),
                    None => {}
                    Some((best, _)) if sufficient && fc < *best => chosen = Some((fc, candidate)),
                    Some(_) => break,
                }
                step *= cfg.step_shrink;
            }
            match chosen {
                Some((fc, candidate)) => {
                    x = candidate;
                    fx = fc;
                    accepted.push(fx);
                }
                None => {
                    // no descent at any step length: numerically stationary
                    converged = true;
                    break;
                }
            }
        }
        SearchOutcome { value: fx, point: x, iterations, converged, accepted_values: accepted }
    }
}

/// Nelder–Mead on stereographic chart coordinates of the sphere product.
///
/// Each block sphere S^{d−1} is charted from the pole −e_d; a block is
/// sign-flipped into the chart's hemisphere first, which costs nothing
/// because every minor is even per party block. The chart removes the scale
/// degeneracy a naive ambient-space simplex would have.
pub struct NelderMead;

const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;
const NM_INIT_SPREAD: f64 = 0.25;

impl NelderMead {
    fn to_chart(obj: &MinorObjective<'_>, x: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(x.len() - obj.free_block_dims().len());
        let mut at = 0;
        for &d in obj.free_block_dims() {
            let block = &x[at..at + d];
            let flip = if block[d - 1] < 0.0 { -1.0 } else { 1.0 };
            let denom = 1.0 + flip * block[d - 1];
            for &v in &block[..d - 1] {
                u.push(flip * v / denom);
            }
            at += d;
        }
        u
    }

    fn from_chart(obj: &MinorObjective<'_>, u: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(u.len() + obj.free_block_dims().len());
        let mut at = 0;
        for &d in obj.free_block_dims() {
            let coords = &u[at..at + d - 1];
            let norm_sq: f64 = coords.iter().map(|v| v * v).sum();
            let denom = 1.0 + norm_sq;
            for &v in coords {
                x.push(2.0 * v / denom);
            }
            x.push((1.0 - norm_sq) / denom);
            at += d - 1;
        }
        x
    }
}

impl LocalSearch for NelderMead {
    fn name(&self) -> &'static str {
        "nelder-mead"
    }

    fn run(&self, obj: &MinorObjective<'_>, start: Vec<f64>, cfg: &OptimizerConfig) -> SearchOutcome {
        let mut x0 = start;
        obj.normalize_blocks(&mut x0);
        let u0 = Self::to_chart(obj, &x0);
        let dim = u0.len();
        let eval = |u: &[f64]| obj.value_flat(&Self::from_chart(obj, u));

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(u0.clone());
        for i in 0..dim {
            let mut v = u0.clone();
            v[i] += NM_INIT_SPREAD;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|u| eval(u)).collect();

        let mut accepted = vec![values.iter().copied().fold(f64::INFINITY, f64::min)];
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..cfg.max_iters {
            iterations += 1;
            // order vertices best..worst; stable sort keeps ties deterministic
            let mut order: Vec<usize> = (0..simplex.len()).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let best = values[0];
            let worst = values[dim];
            if worst - best <= cfg.gradient_tolerance * (1.0 + best.abs()) {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
                .collect();
            let stretch = |from: &[f64], factor: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, w)| c + factor * (c - w))
                    .collect()
            };

            let reflected = stretch(&simplex[dim], NM_REFLECT);
            let f_reflected = eval(&reflected);
            if f_reflected < values[0] {
                let expanded = stretch(&simplex[dim], NM_EXPAND);
                let f_expanded = eval(&expanded);
                if f_expanded < f_reflected {
                    simplex[dim] = expanded;
                    values[dim] = f_expanded;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = f_reflected;
                }
            } else if f_reflected < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = f_reflected;
            } else {
                let (contracted, f_contracted) = if f_reflected < values[dim] {
                    let outside = stretch(&simplex[dim], NM_REFLECT * NM_CONTRACT);
                    let f = eval(&outside);
                    (outside, f)
                } else {
                    let inside = stretch(&simplex[dim], -NM_CONTRACT);
                    let f = eval(&inside);
                    (inside, f)
                };
                if f_contracted < values[dim].min(f_reflected) {
                    simplex[dim] = contracted;
                    values[dim] = f_contracted;
                } else {
                    for i in 1..=dim {
                        for j in 0..dim {
                            simplex[i][j] = simplex[0][j] + NM_SHRINK * (simplex[i][j] - simplex[0][j]);
                        }
                        values[i] = eval(&simplex[i]);
                    }
                }
            }
            let current_best = values.iter().copied().fold(f64::INFINITY, f64::min);
            let previous = *accepted.last().unwrap();
            accepted.push(current_best.min(previous));
        }

        let mut best_idx = 0;
        for i in 1..values.len() {
            if values[i] < values[best_idx] {
                best_idx = i;
            }
        }
        let mut point = Self::from_chart(obj, &simplex[best_idx]);
        obj.normalize_blocks(&mut point);
        let value = obj.value_flat(&point);
        SearchOutcome { value, point, iterations, converged, accepted_values: accepted }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{CovarianceMatrix, PartyStructure};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn registry_resolves_names_and_alias() {
        assert_eq!(lookup("gradient").unwrap().name(), "gradient");
        assert_eq!(lookup("nelder-mead").unwrap().name(), "nelder-mead");
        assert_eq!(lookup("derivative-free").unwrap().name(), "nelder-mead");
        assert!(lookup("simulated-annealing").is_err());
        assert_eq!(strategies().len(), 2);
    }

    #[test]
    fn chart_round_trip_is_the_identity_up_to_block_sign() {
        let ps = PartyStructure::new(vec![2, 1]).unwrap();
        let cm = CovarianceMatrix::identity(ps.dim());
        let obj = MinorObjective::new(&cm, &ps, &[0, 1], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = obj.random_start(&mut rng);
            let u = NelderMead::to_chart(&obj, &x);
            let y = NelderMead::from_chart(&obj, &u);
            // per block, the chart may have flipped the overall sign
            let mut at = 0;
            for &d in obj.free_block_dims() {
                let sign = if x[at + d - 1] < 0.0 { -1.0 } else { 1.0 };
                for i in at..at + d {
                    assert_relative_eq!(sign * x[i], y[i], epsilon = 1e-12);
                }
                at += d;
            }
        }
    }

    #[test]
    fn nelder_mead_solves_the_vacuum_pair() {
        let ps = PartyStructure::singletons(2).unwrap();
        let cm = CovarianceMatrix::identity(4);
        let obj = MinorObjective::new(&cm, &ps, &[0, 1], 2).unwrap();
        let cfg = OptimizerConfig { max_iters: 2000, ..OptimizerConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let start = obj.random_start(&mut rng);
            best = best.min(NelderMead.run(&obj, start, &cfg).value);
        }
        assert_relative_eq!(best, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn both_kernels_find_the_mixed_state_negativity() {
        let (ps, cm) = crate::states::mixed_bipartite_cm(0.1);
        let obj = MinorObjective::new(&cm, &ps, &[0, 1], 2).unwrap();
        let cfg = OptimizerConfig { max_iters: 2000, ..OptimizerConfig::default() };
        for strategy in strategies() {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut best = f64::INFINITY;
            for _ in 0..12 {
                let start = obj.random_start(&mut rng);
                best = best.min(strategy.run(&obj, start, &cfg).value);
            }
            assert!(best < -0.07, "{} only reached {best}", strategy.name());
        }
    }
}
