//! Fused Gromov-Wasserstein loss and its conditional-gradient solver.
//!
//! For measures `mu = (h, A, C1)` and `nu = (g, B, C2)` with feature
//! distances `M = M_AB`, the loss of a coupling `pi` is
//!
//! ```text
//! E_q(pi) = (1 - alpha) <M^q, pi> + alpha <L^q (x) pi, pi>,
//! (L^q (x) pi)_ij = sum_kl |C1(i,k) - C2(j,l)|^q pi_kl.
//! ```
//!
//! `alpha = 0` is the Wasserstein problem on the features (solved directly
//! as a linear program) and `alpha = 1` the Gromov-Wasserstein problem on
//! the structures. For `q = 2` the tensor product factors as
//! `c(p, r) - 2 C1 pi C2^T`, where `c` only depends on the marginals of
//! `pi`, which brings the cost down to `O(n^2 m + n m^2)`.
//!
//! The solver is Frank-Wolfe: linearize at the current coupling, solve the
//! exact transport problem with the gradient as ground cost, then minimize
//! the (quadratic) loss exactly along the segment towards that vertex. The
//! problem is not convex, so the result is a stationary point and the loss
//! is an upper bound on the true distance; several starting couplings may
//! be tried and the best one kept.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::solve_exact_ot;
use crate::matrix::Matrix;
use crate::measure::{feature_cost_matrix, product_coupling, Coupling, Histogram, StructuredMeasure, MARGINAL_TOL};

pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// How the conditional-gradient iterations are initialized.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// The independent coupling `h g^T`.
    Product,
    /// The optimal coupling of the pure feature (Wasserstein) problem.
    Wasserstein,
    /// The coupling found by the solver on the pure structure problem.
    GromovWasserstein,
    /// A caller-supplied feasible coupling.
    Given(Coupling),
}

impl Start {
    /// Maps a start for `(mu, nu)` to the matching start for `(nu, mu)`.
    pub fn transposed(&self) -> Self {
        match self {
            Start::Given(c) => Start::Given(c.transpose()),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgwParams {
    pub q: u32,
    pub alpha: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub starts: Vec<Start>,
}

impl FgwParams {
    /// Defaults: product start, `max_iter = 1000`, `rel_tol = 1e-9`.
    pub fn new(q: u32, alpha: f64) -> Result<Self> {
        let p = Self {
            q,
            alpha,
            max_iter: DEFAULT_MAX_ITER,
            rel_tol: DEFAULT_REL_TOL,
            starts: vec![Start::Product],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_starts(mut self, starts: Vec<Start>) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_tolerance(mut self, rel_tol: f64, max_iter: usize) -> Self {
        self.rel_tol = rel_tol;
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.q)?;
        check_alpha(self.alpha)?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter("rel_tol must be positive"));
        }
        if self.starts.is_empty() {
            return Err(Error::InvalidParameter("at least one start is required"));
        }
        Ok(())
    }
}

fn check_exponent(q: u32) -> Result<()> {
    if q == 1 || q == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(q))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgwResult {
    pub coupling: Coupling,
    /// `E_q` at `coupling`.
    pub loss: f64,
    pub iterations: usize,
    /// Loss after initialization and after every accepted step.
    pub loss_trace: Vec<f64>,
    pub converged: bool,
}

/// Exact minimizer of the loss along the segment from the current coupling
/// towards the linearized vertex, with the quadratic `a t^2 + b t + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineSearch {
    fn from_coefficients(a: f64, b: f64, c: f64) -> Self {
        let tau = if a > 0.0 {
            (-b / (2.0 * a)).clamp(0.0, 1.0)
        } else if a + b < 0.0 {
            1.0
        } else {
            0.0
        };
        Self { tau, a, b, c }
    }

    pub fn value_at(&self, tau: f64) -> f64 {
        (self.a * tau + self.b) * tau + self.c
    }
}

fn check_square(m: &Matrix, context: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: m.rows(),
            found: m.cols(),
        })
    }
}

fn check_coupling_shape(c1: &Matrix, c2: &Matrix, pi: &Matrix) -> Result<()> {
    check_square(c1, "first structure matrix")?;
    check_square(c2, "second structure matrix")?;
    if pi.rows() != c1.rows() {
        return Err(Error::DimensionMismatch {
            context: "coupling rows",
            expected: c1.rows(),
            found: pi.rows(),
        });
    }
    if pi.cols() != c2.rows() {
        return Err(Error::DimensionMismatch {
            context: "coupling columns",
            expected: c2.rows(),
            found: pi.cols(),
        });
    }
    Ok(())
}

/// `L^2 (x) pi` through the factorization
/// `c - 2 C1 pi C2^T` with `c_ij = sum_k C1_ik^2 p_k + sum_l C2_jl^2 r_l`,
/// where `p` and `r` are the row and column sums of `pi`.
pub fn tensor_product_q2(c1: &Matrix, c2: &Matrix, pi: &Coupling) -> Result<Matrix> {
    let pi = pi.matrix();
    check_coupling_shape(c1, c2, pi)?;
    Ok(tensor_q2(&c1.powi(2), &c2.powi(2), c1, c2, pi))
}

fn tensor_q2(c1_sq: &Matrix, c2_sq: &Matrix, c1: &Matrix, c2: &Matrix, pi: &Matrix) -> Matrix {
    let left = c1_sq.mul_vec(&pi.row_sums());
    let right = c2_sq.mul_vec(&pi.col_sums());
    let cross = c1.matmul(pi).matmul(&c2.transpose());
    Matrix::from_fn(pi.rows(), pi.cols(), |i, j| left[i] + right[j] - 2.0 * cross[(i, j)])
}

/// `L^1 (x) pi` by direct summation.
fn tensor_q1(c1: &Matrix, c2: &Matrix, pi: &Matrix) -> Matrix {
    let (n, m) = pi.shape();
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        for k in 0..n {
            let a = c1[(i, k)];
            let pi_k = pi.row(k);
            for j in 0..m {
                let c2_j = c2.row(j);
                let mut acc = 0.0;
                for l in 0..m {
                    acc += (a - c2_j[l]).abs() * pi_k[l];
                }
                out[(i, j)] += acc;
            }
        }
    }
    out
}

/// `L^q (x) pi` for `q` in `{1, 2}`.
pub fn tensor_product(c1: &Matrix, c2: &Matrix, pi: &Coupling, q: u32) -> Result<Matrix> {
    check_exponent(q)?;
    check_coupling_shape(c1, c2, pi.matrix())?;
    Ok(match q {
        1 => tensor_q1(c1, c2, pi.matrix()),
        _ => tensor_product_q2(c1, c2, pi)?,
    })
}

/// Everything the solver reuses across iterations for one pair of measures.
struct Objective<'a> {
    /// `(1 - alpha) M^q`, or `None` when the feature term is dropped.
    linear: Option<Matrix>,
    c1: &'a Matrix,
    c2: &'a Matrix,
    c1_sq: Matrix,
    c2_sq: Matrix,
    q: u32,
    alpha: f64,
}

impl<'a> Objective<'a> {
    fn new(feature_cost_q: Option<&Matrix>, c1: &'a Matrix, c2: &'a Matrix, q: u32, alpha: f64) -> Self {
        let linear = if alpha < 1.0 {
            feature_cost_q.map(|m| m.scale(1.0 - alpha))
        } else {
            None
        };
        let (c1_sq, c2_sq) = if q == 2 && alpha > 0.0 {
            (c1.powi(2), c2.powi(2))
        } else {
            (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
        };
        Self {
            linear,
            c1,
            c2,
            c1_sq,
            c2_sq,
            q,
            alpha,
        }
    }

    fn tensor(&self, pi: &Matrix) -> Matrix {
        match self.q {
            1 => tensor_q1(self.c1, self.c2, pi),
            _ => tensor_q2(&self.c1_sq, &self.c2_sq, self.c1, self.c2, pi),
        }
    }

    fn loss(&self, pi: &Matrix) -> f64 {
        let mut e = self.linear.as_ref().map_or(0.0, |lin| lin.dot(pi));
        if self.alpha > 0.0 {
            e += self.alpha * self.tensor(pi).dot(pi);
        }
        e.max(0.0)
    }

    fn gradient(&self, pi: &Matrix) -> Matrix {
        let mut g = match &self.linear {
            Some(lin) => lin.clone(),
            None => Matrix::zeros(pi.rows(), pi.cols()),
        };
        if self.alpha > 0.0 {
            g.axpy(2.0 * self.alpha, &self.tensor(pi));
        }
        g
    }

    fn line_search(&self, prev: &Matrix, target: &Matrix) -> LineSearch {
        let delta = target.add_scaled(prev, -1.0);
        let c = self.loss(prev);
        let mut b = self.linear.as_ref().map_or(0.0, |lin| lin.dot(&delta));
        let mut a = 0.0;
        if self.alpha > 0.0 {
            match self.q {
                1 => {
                    a = self.alpha * tensor_q1(self.c1, self.c2, &delta).dot(&delta);
                    b += 2.0 * self.alpha * tensor_q1(self.c1, self.c2, prev).dot(&delta);
                }
                _ => {
                    // Delta has zero marginals, so only the cross term of the
                    // factorization survives.
                    let c2t = self.c2.transpose();
                    let cross_delta = self.c1.matmul(&delta).matmul(&c2t);
                    let cross_prev = self.c1.matmul(prev).matmul(&c2t);
                    a = -2.0 * self.alpha * cross_delta.dot(&delta);
                    b -= 4.0 * self.alpha * cross_prev.dot(&delta);
                }
            }
        }
        LineSearch::from_coefficients(a, b, c)
    }
}

fn check_problem(m_ab: &Matrix, c1: &Matrix, c2: &Matrix, pi: &Matrix, q: u32, alpha: f64) -> Result<()> {
    check_exponent(q)?;
    check_alpha(alpha)?;
    check_coupling_shape(c1, c2, pi)?;
    if m_ab.shape() != pi.shape() {
        return Err(Error::DimensionMismatch {
            context: "feature cost shape",
            expected: pi.rows() * pi.cols(),
            found: m_ab.rows() * m_ab.cols(),
        });
    }
    Ok(())
}

/// `E_q` of `pi` given the feature distance matrix `M_AB` (not yet raised
/// to the power `q`).
pub fn fgw_loss(m_ab: &Matrix, c1: &Matrix, c2: &Matrix, pi: &Coupling, q: u32, alpha: f64) -> Result<f64> {
    check_problem(m_ab, c1, c2, pi.matrix(), q, alpha)?;
    let mq = m_ab.powi(q);
    Ok(Objective::new(Some(&mq), c1, c2, q, alpha).loss(pi.matrix()))
}

/// Gradient `(1 - alpha) M^q + 2 alpha L^q (x) pi` of `E_q` at `pi`.
pub fn fgw_gradient(m_ab: &Matrix, c1: &Matrix, c2: &Matrix, pi: &Coupling, q: u32, alpha: f64) -> Result<Matrix> {
    check_problem(m_ab, c1, c2, pi.matrix(), q, alpha)?;
    let mq = m_ab.powi(q);
    Ok(Objective::new(Some(&mq), c1, c2, q, alpha).gradient(pi.matrix()))
}

/// Feature part `H_q(pi) = <M^q, pi>`.
pub fn feature_objective(m_ab: &Matrix, pi: &Coupling, q: u32) -> Result<f64> {
    check_exponent(q)?;
    if m_ab.shape() != pi.shape() {
        return Err(Error::DimensionMismatch {
            context: "feature cost shape",
            expected: pi.shape().0 * pi.shape().1,
            found: m_ab.rows() * m_ab.cols(),
        });
    }
    Ok(m_ab.powi(q).dot(pi.matrix()))
}

/// Structure part `J_q(pi) = <L^q (x) pi, pi>`.
pub fn structure_objective(c1: &Matrix, c2: &Matrix, pi: &Coupling, q: u32) -> Result<f64> {
    Ok(tensor_product(c1, c2, pi, q)?.dot(pi.matrix()).max(0.0))
}

/// Exact line search for `q = 2` between `pi_prev` and `pi_tilde`, which
/// must share their marginals.
pub fn line_search_q2(
    m_ab: &Matrix,
    c1: &Matrix,
    c2: &Matrix,
    pi_prev: &Coupling,
    pi_tilde: &Coupling,
    alpha: f64,
) -> Result<LineSearch> {
    check_problem(m_ab, c1, c2, pi_prev.matrix(), 2, alpha)?;
    let (p, t) = (pi_prev.matrix(), pi_tilde.matrix());
    if p.shape() != t.shape() {
        return Err(Error::MarginalMismatch {
            deviation: f64::INFINITY,
        });
    }
    let deviation = p
        .row_sums()
        .iter()
        .zip(t.row_sums())
        .chain(p.col_sums().iter().zip(t.col_sums()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if deviation > MARGINAL_TOL {
        return Err(Error::MarginalMismatch { deviation });
    }
    let mq = m_ab.powi(2);
    Ok(Objective::new(Some(&mq), c1, c2, 2, alpha).line_search(p, t))
}

fn conditional_gradient(
    objective: &Objective<'_>,
    h: &Histogram,
    g: &Histogram,
    start: Matrix,
    max_iter: usize,
    rel_tol: f64,
) -> Result<FgwResult> {
    let mut pi = start;
    let mut loss = objective.loss(&pi);
    let mut trace = vec![loss];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let grad = objective.gradient(&pi);
        let vertex = solve_exact_ot(&grad, h, g)?.coupling.into_matrix();
        let step = objective.line_search(&pi, &vertex);
        if step.tau <= 0.0 {
            converged = true;
            break;
        }
        let mut next = pi.scale(1.0 - step.tau);
        next.axpy(step.tau, &vertex);
        let next_loss = objective.loss(&next);
        if next_loss > loss {
            // Only rounding can get here; keep the better iterate.
            converged = true;
            break;
        }
        let decrease = (loss - next_loss) / loss.max(1e-16);
        pi = next;
        loss = next_loss;
        trace.push(loss);
        if decrease < rel_tol {
            converged = true;
            break;
        }
    }
    Ok(FgwResult {
        coupling: Coupling::from_matrix_unchecked(pi),
        loss,
        iterations,
        loss_trace: trace,
        converged,
    })
}

/// Approximates `FGW_{q, alpha}(mu, nu)` with conditional gradient, trying
/// every requested start and keeping the lowest loss.
pub fn solve_fgw(mu: &StructuredMeasure, nu: &StructuredMeasure, params: &FgwParams) -> Result<FgwResult> {
    params.validate()?;
    let (h, g) = (mu.weights(), nu.weights());
    let (c1, c2) = (mu.structure(), nu.structure());
    let q = params.q;

    let needs_features = params.alpha < 1.0 || params.starts.iter().any(|s| matches!(s, Start::Wasserstein));
    let feature_cost_q = if needs_features {
        Some(feature_cost_matrix(mu.features(), nu.features())?.powi(q))
    } else {
        None
    };

    if params.alpha == 0.0 {
        let mq = feature_cost_q.as_ref().expect("features are needed at alpha = 0");
        let ot = solve_exact_ot(mq, h, g)?;
        let objective = Objective::new(Some(mq), c1, c2, q, 0.0);
        let loss = objective.loss(ot.coupling.matrix());
        return Ok(FgwResult {
            coupling: ot.coupling,
            loss,
            iterations: 0,
            loss_trace: vec![loss],
            converged: true,
        });
    }

    let objective = Objective::new(feature_cost_q.as_ref(), c1, c2, q, params.alpha);
    let mut best: Option<FgwResult> = None;
    for start in &params.starts {
        let init = match start {
            Start::Product => product_coupling(h, g).into_matrix(),
            Start::Wasserstein => {
                let mq = feature_cost_q.as_ref().expect("computed for Wasserstein starts");
                solve_exact_ot(mq, h, g)?.coupling.into_matrix()
            }
            Start::GromovWasserstein => {
                let gw = Objective::new(None, c1, c2, q, 1.0);
                let init = product_coupling(h, g).into_matrix();
                conditional_gradient(&gw, h, g, init, params.max_iter, params.rel_tol)?
                    .coupling
                    .into_matrix()
            }
            Start::Given(c) => {
                c.check(h, g, MARGINAL_TOL)?;
                c.matrix().clone()
            }
        };
        let run = conditional_gradient(&objective, h, g, init, params.max_iter, params.rel_tol)?;
        if best.as_ref().is_none_or(|b| run.loss < b.loss) {
            best = Some(run);
        }
    }
    Ok(best.expect("starts is non-empty"))
}

/// Glues `P` (over `(h, g)`) and `Q` (over `(g, f)`) into
/// `S = P diag(1/g) Q` over `(h, f)`.
pub fn compose_couplings(p: &Coupling, q: &Coupling) -> Result<Coupling> {
    let (p, q) = (p.matrix(), q.matrix());
    if p.cols() != q.rows() {
        return Err(Error::DimensionMismatch {
            context: "middle marginal",
            expected: p.cols(),
            found: q.rows(),
        });
    }
    let middle = p.col_sums();
    let deviation = middle
        .iter()
        .zip(q.row_sums())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if deviation > MARGINAL_TOL {
        return Err(Error::MarginalMismatch { deviation });
    }
    let scaled = Matrix::from_fn(q.rows(), q.cols(), |e, j| {
        if middle[e] > 0.0 {
            q[(e, j)] / middle[e]
        } else {
            0.0
        }
    });
    Ok(Coupling::from_matrix_unchecked(p.matmul(&scaled)))
}
