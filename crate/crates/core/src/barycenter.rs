//! Fused Gromov-Wasserstein barycenters by block-coordinate descent.
//!
//! The barycenter has `N` points with a fixed histogram `h`, an `N x N`
//! structure `C` and `N x d` features `A`. Each outer iteration solves the
//! `K` coupling problems against the current `(C, A)`, then replaces `C`
//! and `A` with their closed-form minimizers for `q = 2` and squared
//! Euclidean features:
//!
//! ```text
//! C = sum_k lambda_k pi_k C_k pi_k^T / (h h^T)      (entrywise division)
//! A = diag(1/h) sum_k lambda_k pi_k B_k
//! ```
//!
//! with couplings `pi_k` of shape `N x n_k`. The diagonal of `C` is held at
//! zero, which keeps the structure update an exact minimizer over valid
//! structure matrices.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::fgw::{fgw_loss, solve_fgw, FgwParams, Start};
use crate::graphs::{random_connected_graph, shortest_path_matrix};
use crate::matrix::Matrix;
use crate::measure::{
    build_measure, feature_cost_matrix, product_coupling, Coupling, Features, Histogram, StructuredMeasure,
    MARGINAL_TOL,
};

pub const DEFAULT_OUTER_ITERS: usize = 20;
pub const DEFAULT_OUTER_REL_TOL: f64 = 1e-7;

/// Extra-edge probability of the random graph used to initialize `C` when
/// no input has exactly `N` nodes.
const INIT_EXTRA_EDGE_PROB: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct BarycenterProblem<'a> {
    pub inputs: &'a [StructuredMeasure],
    pub lambdas: Vec<f64>,
    /// Fixed histogram of the barycenter; its length is `N`.
    pub weights: Histogram,
    pub alpha: f64,
    pub outer_iters: usize,
    pub outer_rel_tol: f64,
    /// Solver settings for the coupling block. `q` must be 2; `alpha` and
    /// `starts` are overridden.
    pub inner: FgwParams,
    pub fix_structure: bool,
    pub fix_features: bool,
    /// Start each coupling solve from the previous coupling only, instead
    /// of also trying the product coupling.
    pub warm_start: bool,
}

impl<'a> BarycenterProblem<'a> {
    /// Uniform `lambda`, uniform `h` on `n` points, default iteration limits.
    pub fn new(inputs: &'a [StructuredMeasure], n: usize, alpha: f64) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidParameter("a barycenter needs at least one input"));
        }
        let problem = Self {
            inputs,
            lambdas: vec![1.0 / inputs.len() as f64; inputs.len()],
            weights: Histogram::uniform(n)?,
            alpha,
            outer_iters: DEFAULT_OUTER_ITERS,
            outer_rel_tol: DEFAULT_OUTER_REL_TOL,
            inner: FgwParams::new(2, alpha)?,
            fix_structure: false,
            fix_features: false,
            warm_start: false,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    /// Common feature dimension of the inputs.
    pub fn feature_dim(&self) -> Result<usize> {
        let mut dim = None;
        for m in self.inputs {
            let Features::Vectors(b) = m.features() else {
                return Err(Error::MixedFeatureModes);
            };
            match dim {
                None => dim = Some(b.cols()),
                Some(d) if d != b.cols() => {
                    return Err(Error::DimensionMismatch {
                        context: "input feature dimension",
                        expected: d,
                        found: b.cols(),
                    })
                }
                _ => {}
            }
        }
        dim.ok_or(Error::InvalidParameter("a barycenter needs at least one input"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidParameter("a barycenter needs at least one input"));
        }
        if self.lambdas.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                context: "barycenter lambdas",
                expected: self.inputs.len(),
                found: self.lambdas.len(),
            });
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter("lambdas must be positive"));
        }
        if (self.lambdas.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("lambdas must sum to 1"));
        }
        if self.inner.q != 2 {
            return Err(Error::UnsupportedExponent(self.inner.q));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        self.inner.validate()?;
        self.feature_dim()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterState {
    pub structure: Matrix,
    pub features: Matrix,
    /// One `N x n_k` coupling per input.
    pub couplings: Vec<Coupling>,
    pub objective: f64,
    /// Objective at initialization and after every outer iteration.
    pub trace: Vec<f64>,
}

impl BarycenterState {
    pub fn to_measure(&self, weights: &Histogram) -> Result<StructuredMeasure> {
        build_measure(
            Some(weights.as_slice()),
            Features::Vectors(self.features.clone()),
            self.structure.clone(),
        )
    }
}

fn check_couplings(couplings: &[Coupling], sizes: &[usize], lambdas: &[f64], h: &Histogram) -> Result<()> {
    if couplings.len() != sizes.len() || lambdas.len() != sizes.len() {
        return Err(Error::DimensionMismatch {
            context: "number of couplings",
            expected: sizes.len(),
            found: couplings.len(),
        });
    }
    for (c, &n) in couplings.iter().zip(sizes) {
        if c.shape() != (h.len(), n) {
            return Err(Error::DimensionMismatch {
                context: "barycenter coupling shape",
                expected: h.len() * n,
                found: c.shape().0 * c.shape().1,
            });
        }
    }
    Ok(())
}

/// Closed-form structure update for fixed couplings.
pub fn update_structure(
    couplings: &[Coupling],
    structures: &[&Matrix],
    lambdas: &[f64],
    h: &Histogram,
) -> Result<Matrix> {
    let sizes: Vec<usize> = structures.iter().map(|c| c.rows()).collect();
    check_couplings(couplings, &sizes, lambdas, h)?;
    let n = h.len();
    let mut acc = Matrix::zeros(n, n);
    for ((pi, ck), &lambda) in couplings.iter().zip(structures).zip(lambdas) {
        let pi = pi.matrix();
        acc.axpy(lambda, &pi.matmul(ck).matmul(&pi.transpose()));
    }
    let w = h.as_slice();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * (acc[(i, j)] + acc[(j, i)]) / (w[i] * w[j])
        }
    }))
}

/// Closed-form feature update for fixed couplings.
pub fn update_features(couplings: &[Coupling], features: &[&Matrix], lambdas: &[f64], h: &Histogram) -> Result<Matrix> {
    let sizes: Vec<usize> = features.iter().map(|b| b.rows()).collect();
    check_couplings(couplings, &sizes, lambdas, h)?;
    let d = features.first().map_or(0, |b| b.cols());
    let mut acc = Matrix::zeros(h.len(), d);
    for ((pi, bk), &lambda) in couplings.iter().zip(features).zip(lambdas) {
        if bk.cols() != d {
            return Err(Error::DimensionMismatch {
                context: "input feature dimension",
                expected: d,
                found: bk.cols(),
            });
        }
        acc.axpy(lambda, &pi.matrix().matmul(bk));
    }
    for i in 0..h.len() {
        let inv = 1.0 / h[i];
        acc.row_mut(i).iter_mut().for_each(|x| *x *= inv);
    }
    Ok(acc)
}

fn input_features(m: &StructuredMeasure) -> &Matrix {
    match m.features() {
        Features::Vectors(b) => b,
        Features::Labels(_) => unreachable!("validated as vector features"),
    }
}

/// `sum_k lambda_k E_2(M(A, B_k), C, C_k, pi_k)`.
pub fn barycenter_objective(
    problem: &BarycenterProblem<'_>,
    structure: &Matrix,
    features: &Matrix,
    couplings: &[Coupling],
) -> Result<f64> {
    let a = Features::Vectors(features.clone());
    let mut total = 0.0;
    for ((input, pi), &lambda) in problem.inputs.iter().zip(couplings).zip(&problem.lambdas) {
        let m = feature_cost_matrix(&a, input.features())?;
        total += lambda * fgw_loss(&m, structure, input.structure(), pi, 2, problem.alpha)?;
    }
    Ok(total)
}

fn initial_state(problem: &BarycenterProblem<'_>, seed: u64) -> Result<BarycenterState> {
    let n = problem.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.random_range(0..problem.inputs.len());
    let structure = if problem.inputs[pick].len() == n {
        problem.inputs[pick].structure().clone()
    } else {
        shortest_path_matrix(&random_connected_graph(n, INIT_EXTRA_EDGE_PROB, &mut rng))?
    };
    let couplings: Vec<Coupling> = problem
        .inputs
        .iter()
        .map(|m| product_coupling(&problem.weights, m.weights()))
        .collect();
    let feats: Vec<&Matrix> = problem.inputs.iter().map(input_features).collect();
    let features = update_features(&couplings, &feats, &problem.lambdas, &problem.weights)?;
    let objective = barycenter_objective(problem, &structure, &features, &couplings)?;
    Ok(BarycenterState {
        structure,
        features,
        couplings,
        objective,
        trace: vec![objective],
    })
}

fn check_init(problem: &BarycenterProblem<'_>, init: &BarycenterState, dim: usize) -> Result<()> {
    let n = problem.size();
    if init.structure.shape() != (n, n) || init.features.shape() != (n, dim) {
        return Err(Error::DimensionMismatch {
            context: "initial barycenter shape",
            expected: n,
            found: init.structure.rows(),
        });
    }
    let sizes: Vec<usize> = problem.inputs.iter().map(StructuredMeasure::len).collect();
    check_couplings(&init.couplings, &sizes, &problem.lambdas, &problem.weights)?;
    for (c, m) in init.couplings.iter().zip(problem.inputs) {
        c.check(&problem.weights, m.weights(), MARGINAL_TOL)?;
    }
    Ok(())
}

/// Runs block-coordinate descent from `init`, or from a seeded default.
pub fn solve_barycenter(
    problem: &BarycenterProblem<'_>,
    init: Option<BarycenterState>,
    seed: u64,
) -> Result<BarycenterState> {
    solve_barycenter_with(&Sequential, problem, init, seed)
}

/// [`solve_barycenter`] with the coupling solves of each outer iteration
/// dispatched through `executor`.
pub fn solve_barycenter_with<E: Executor>(
    executor: &E,
    problem: &BarycenterProblem<'_>,
    init: Option<BarycenterState>,
    seed: u64,
) -> Result<BarycenterState> {
    problem.validate()?;
    let dim = problem.feature_dim()?;
    let mut state = match init {
        Some(mut s) => {
            check_init(problem, &s, dim)?;
            s.objective = barycenter_objective(problem, &s.structure, &s.features, &s.couplings)?;
            s.trace = vec![s.objective];
            s
        }
        None => initial_state(problem, seed)?,
    };
    let feats: Vec<&Matrix> = problem.inputs.iter().map(input_features).collect();
    let structs: Vec<&Matrix> = problem.inputs.iter().map(|m| m.structure()).collect();

    for _ in 0..problem.outer_iters {
        if state.objective <= 0.0 {
            break;
        }
        let center = state.to_measure(&problem.weights)?;
        let solved: Vec<Result<Coupling>> = executor.map(problem.inputs.len(), |k| {
            let previous = Start::Given(state.couplings[k].clone());
            let starts = if problem.warm_start {
                vec![previous]
            } else {
                // The previous coupling keeps the block a descent step.
                vec![previous, Start::Product]
            };
            let mut params = problem.inner.clone().with_starts(starts);
            params.alpha = problem.alpha;
            Ok(solve_fgw(&center, &problem.inputs[k], &params)?.coupling)
        });
        let couplings = solved.into_iter().collect::<Result<Vec<_>>>()?;

        let structure = if problem.fix_structure {
            state.structure.clone()
        } else {
            update_structure(&couplings, &structs, &problem.lambdas, &problem.weights)?
        };
        let features = if problem.fix_features {
            state.features.clone()
        } else {
            update_features(&couplings, &feats, &problem.lambdas, &problem.weights)?
        };
        let objective = barycenter_objective(problem, &structure, &features, &couplings)?;
        let previous = state.objective;
        state.structure = structure;
        state.features = features;
        state.couplings = couplings;
        state.objective = objective;
        state.trace.push(objective);
        if (previous - objective) / previous.max(1e-16) < problem.outer_rel_tol {
            break;
        }
    }
    Ok(state)
}
