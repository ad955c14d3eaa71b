mod common;

use common::*;
use fgw_core::barycenter::{solve_barycenter, update_structure, BarycenterProblem};
use fgw_core::fgw::{compose_couplings, Start};
use fgw_core::graphs::{gen_sbm, permute_graph, random_connected_graph, shortest_path_matrix, wl_relabel, SbmSpec};
use fgw_core::learn::{knn_predict, pairwise_fgw_matrix};
use fgw_core::lp::solve_exact_ot;
use fgw_core::measure::{feature_cost_matrix, product_coupling, MARGINAL_TOL};
use fgw_core::{solve_fgw, Coupling, Error, FgwParams, Matrix, Sequential};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn permutation(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Coupling for `(mu, nu.permuted(sigma))` matching `pi` for `(mu, nu)`.
fn permute_columns(pi: &Coupling, sigma: &[usize]) -> Coupling {
    let m = pi.matrix();
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, &s) in sigma.iter().enumerate() {
            out[(i, s)] = m[(i, j)];
        }
    }
    Coupling::from_matrix_unchecked(out)
}

fn non_increasing(trace: &[f64], slack: f64) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + slack)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_coupling_is_feasible(seed in any::<u64>(), n in 1usize..12, m in 1usize..12) {
        let mut rng = rng(seed);
        let h = random_histogram(&mut rng, n);
        let g = random_histogram(&mut rng, m);
        prop_assert!(product_coupling(&h, &g).check(&h, &g, MARGINAL_TOL).is_ok());
    }

    #[test]
    fn feature_cost_is_symmetric_under_swap(seed in any::<u64>(), n in 1usize..8, m in 1usize..8, d in 1usize..4) {
        let mut rng = rng(seed);
        let a = random_measure(&mut rng, n, d);
        let b = random_measure(&mut rng, m, d);
        let ab = feature_cost_matrix(a.features(), b.features()).unwrap();
        let ba = feature_cost_matrix(b.features(), a.features()).unwrap();
        prop_assert_eq!(ab, ba.transpose());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_is_permutation_invariant(seed in any::<u64>(), n in 1usize..9, m in 1usize..9) {
        let mut rng = rng(seed);
        let h = random_histogram(&mut rng, n);
        let g = random_histogram(&mut rng, m);
        let cost = random_matrix(&mut rng, n, m);
        let (rp, cp) = (permutation(&mut rng, n), permutation(&mut rng, m));
        let permuted = Matrix::from_fn(n, m, |i, j| cost[(rp[i], cp[j])]);
        let base = solve_exact_ot(&cost, &h, &g).unwrap();
        let other = solve_exact_ot(&permuted, &h.permuted(&rp), &g.permuted(&cp)).unwrap();
        prop_assert!((base.objective - other.objective).abs() <= 1e-12);
    }

    #[test]
    fn constant_cost_shift_moves_objective_by_the_shift(seed in any::<u64>(), n in 1usize..9, m in 1usize..9, kappa in -5.0f64..5.0) {
        let mut rng = rng(seed);
        let h = random_histogram(&mut rng, n);
        let g = random_histogram(&mut rng, m);
        let cost = random_matrix(&mut rng, n, m);
        let shifted = cost.map(|x| x + kappa);
        let base = solve_exact_ot(&cost, &h, &g).unwrap();
        let other = solve_exact_ot(&shifted, &h, &g).unwrap();
        prop_assert!((other.objective - base.objective - kappa).abs() <= 1e-12);
        prop_assert!(other.coupling.check(&h, &g, MARGINAL_TOL).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solver_output_is_feasible_and_descends(seed in any::<u64>(), n in 2usize..10, m in 2usize..10, alpha in 0.0f64..=1.0, q in 1u32..=2) {
        let mut rng = rng(seed);
        let mu = random_graph_measure(&mut rng, n, 2);
        let nu = random_graph_measure(&mut rng, m, 2);
        let params = FgwParams::new(q, alpha).unwrap()
            .with_starts(vec![Start::Product, Start::Wasserstein, Start::GromovWasserstein]);
        let r = solve_fgw(&mu, &nu, &params).unwrap();
        prop_assert!(r.coupling.check(mu.weights(), nu.weights(), MARGINAL_TOL).is_ok());
        prop_assert!(non_increasing(&r.loss_trace, 1e-12), "{:?}", r.loss_trace);
        prop_assert!(r.loss >= -1e-12);
    }

    #[test]
    fn swapping_the_measures_keeps_the_loss(seed in any::<u64>(), n in 2usize..10, m in 2usize..10, alpha in 0.0f64..=1.0, q in 1u32..=2) {
        let mut rng = rng(seed);
        let mu = random_graph_measure(&mut rng, n, 2);
        let nu = random_graph_measure(&mut rng, m, 2);
        let given = random_coupling(&mut rng, mu.weights(), nu.weights());
        let starts = vec![Start::Product, Start::Wasserstein, Start::Given(given)];
        let forward = FgwParams::new(q, alpha).unwrap().with_starts(starts.clone());
        let backward = FgwParams::new(q, alpha).unwrap()
            .with_starts(starts.iter().map(Start::transposed).collect());
        let ab = solve_fgw(&mu, &nu, &forward).unwrap();
        let ba = solve_fgw(&nu, &mu, &backward).unwrap();
        prop_assert!((ab.loss - ba.loss).abs() <= 1e-9, "{} vs {}", ab.loss, ba.loss);
    }

    #[test]
    fn relabeling_nodes_keeps_the_loss(seed in any::<u64>(), n in 2usize..10, m in 2usize..10, alpha in 0.0f64..=1.0, q in 1u32..=2) {
        let mut rng = rng(seed);
        let mu = random_graph_measure(&mut rng, n, 2);
        let nu = random_graph_measure(&mut rng, m, 2);
        let sigma = permutation(&mut rng, m);
        let nu_perm = nu.permuted(&sigma).unwrap();
        let given = random_coupling(&mut rng, mu.weights(), nu.weights());
        let base = FgwParams::new(q, alpha).unwrap()
            .with_starts(vec![Start::Product, Start::Given(given.clone())]);
        let moved = FgwParams::new(q, alpha).unwrap()
            .with_starts(vec![Start::Product, Start::Given(permute_columns(&given, &sigma))]);
        let a = solve_fgw(&mu, &nu, &base).unwrap();
        let b = solve_fgw(&mu, &nu_perm, &moved).unwrap();
        prop_assert!((a.loss - b.loss).abs() <= 1e-9, "{} vs {}", a.loss, b.loss);
    }

    #[test]
    fn composed_couplings_are_feasible(seed in any::<u64>(), n in 1usize..8, m in 1usize..8, k in 1usize..8) {
        let mut rng = rng(seed);
        let (h, g, f) = (random_histogram(&mut rng, n), random_histogram(&mut rng, m), random_histogram(&mut rng, k));
        let p = random_coupling(&mut rng, &h, &g);
        let q = random_coupling(&mut rng, &g, &f);
        prop_assert!(compose_couplings(&p, &q).unwrap().check(&h, &f, MARGINAL_TOL).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_update_ignores_input_relabeling(seed in any::<u64>(), size in 2usize..7, inputs in 1usize..4) {
        let mut rng = rng(seed);
        let h = random_histogram(&mut rng, size);
        let mut structures = Vec::new();
        let mut couplings = Vec::new();
        let mut permuted_structures = Vec::new();
        let mut permuted_couplings = Vec::new();
        for _ in 0..inputs {
            let nk = rng.random_range(2..7);
            let c = random_structure(&mut rng, nk);
            let hk = random_histogram(&mut rng, nk);
            let pi = random_coupling(&mut rng, &h, &hk);
            let sigma = permutation(&mut rng, nk);
            let inv = fgw_core::graphs::inverse_permutation(&sigma, nk).unwrap();
            permuted_structures.push(c.permuted(&inv));
            permuted_couplings.push(permute_columns(&pi, &sigma));
            structures.push(c);
            couplings.push(pi);
        }
        let lambdas = vec![1.0 / inputs as f64; inputs];
        let refs: Vec<&Matrix> = structures.iter().collect();
        let prefs: Vec<&Matrix> = permuted_structures.iter().collect();
        let a = update_structure(&couplings, &refs, &lambdas, &h).unwrap();
        let b = update_structure(&permuted_couplings, &prefs, &lambdas, &h).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn barycenter_descends_with_feasible_couplings(seed in any::<u64>(), size in 2usize..7, inputs in 1usize..4, alpha in 0.0f64..=1.0) {
        let mut rng = rng(seed);
        let measures: Vec<_> = (0..inputs)
            .map(|_| { let n = rng.random_range(2..8); random_graph_measure(&mut rng, n, 2) })
            .collect();
        let mut problem = BarycenterProblem::new(&measures, size, alpha).unwrap();
        problem.outer_iters = 5;
        let state = solve_barycenter(&problem, None, seed).unwrap();
        prop_assert!(non_increasing(&state.trace, 1e-8), "{:?}", state.trace);
        for (c, m) in state.couplings.iter().zip(&measures) {
            prop_assert!(c.check(&problem.weights, m.weights(), MARGINAL_TOL).is_ok());
        }
    }

    #[test]
    fn shortest_paths_form_a_metric(seed in any::<u64>(), n in 1usize..=20) {
        let mut rng = rng(seed);
        let g = random_connected_graph(n, 0.15, &mut rng);
        let d = shortest_path_matrix(&g).unwrap();
        for i in 0..n {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(d[(i, j)], d[(j, i)]);
                for k in 0..n {
                    prop_assert!(d[(i, j)] <= d[(i, k)] + d[(k, j)]);
                }
            }
        }
    }

    #[test]
    fn wl_iterations_refine_partitions(seed in any::<u64>(), n in 1usize..25, h in 1usize..4) {
        let mut rng = rng(seed);
        let labels: Vec<i64> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let g = random_connected_graph(n, 0.1, &mut rng).with_labels(labels).unwrap();
        let seqs = wl_relabel(&g, h).unwrap();
        for it in 1..=h {
            for a in 0..n {
                for b in 0..n {
                    if seqs[a][it] == seqs[b][it] {
                        prop_assert_eq!(seqs[a][it - 1], seqs[b][it - 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn relabeled_graph_measures_are_at_distance_zero(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = rng(seed);
        let g = random_connected_graph(n, 0.2, &mut rng);
        // Distinct features make the feature-optimal coupling the relabeling.
        let g = g.with_attributes(Matrix::from_fn(n, 1, |i, _| i as f64)).unwrap();
        let sigma = permutation(&mut rng, n);
        let kind = fgw_core::graphs::StructureKind::ShortestPath;
        let a = fgw_core::graphs::attributed_measure(&g, kind).unwrap();
        let b = fgw_core::graphs::attributed_measure(&permute_graph(&g, &sigma).unwrap(), kind).unwrap();
        let params = FgwParams::new(2, 0.5).unwrap().with_starts(vec![Start::Wasserstein]);
        prop_assert!(solve_fgw(&a, &b, &params).unwrap().loss.abs() <= 1e-9);
    }

    #[test]
    fn knn_ignores_train_order(seed in any::<u64>(), train in 1usize..15, test in 1usize..6, k in 1usize..5) {
        let mut rng = rng(seed);
        let k = k.min(train);
        let d = random_matrix(&mut rng, test, train);
        let labels: Vec<i64> = (0..train).map(|_| rng.random_range(0..3)).collect();
        let sigma = permutation(&mut rng, train);
        let d_perm = Matrix::from_fn(test, train, |i, j| d[(i, sigma[j])]);
        let labels_perm: Vec<i64> = sigma.iter().map(|&j| labels[j]).collect();
        prop_assert_eq!(knn_predict(&d, &labels, k).unwrap(), knn_predict(&d_perm, &labels_perm, k).unwrap());
    }
}

#[test]
fn pairwise_matrix_is_symmetric_with_zero_diagonal() {
    let mut rng = rng(5);
    let measures: Vec<_> = (0..5).map(|i| random_graph_measure(&mut rng, 3 + i, 2)).collect();
    let d = pairwise_fgw_matrix(&Sequential, &measures, &FgwParams::new(2, 0.5).unwrap()).unwrap();
    for i in 0..5 {
        assert_eq!(d.values[(i, i)], 0.0);
        for j in 0..5 {
            assert_eq!(d.values[(i, j)], d.values[(j, i)]);
        }
    }
}

#[test]
fn sbm_generation_is_seed_deterministic_and_reports_disconnection() {
    let spec = SbmSpec {
        communities: 2,
        nodes: 20,
        p_in: 0.8,
        p_out: 0.05,
        label_means: vec![0.0, 1.0],
        label_noise: 0.1,
        seed: 9,
    };
    assert_eq!(gen_sbm(&spec).unwrap(), gen_sbm(&spec).unwrap());
    let isolated = SbmSpec { p_out: 0.0, ..spec };
    assert!(matches!(gen_sbm(&isolated), Err(Error::ConnectivityRetriesExceeded(_))));
}
