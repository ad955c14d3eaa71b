//! Independent reference computations used to check the solvers.
#![allow(dead_code)]

use fgw_core::graphs::{attributed_measure, random_connected_graph, StructureKind};
use fgw_core::{build_measure, Coupling, Features, Histogram, Matrix, StructuredMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_histogram(rng: &mut ChaCha8Rng, n: usize) -> Histogram {
    let w: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
    Histogram::new(&w).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

/// Symmetric, zero-diagonal matrix with entries in `[0, 1)`.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let x = rng.random::<f64>();
            c[(i, j)] = x;
            c[(j, i)] = x;
        }
    }
    c
}

/// Random connected graph with shortest-path structure, `d`-dimensional
/// uniform attributes and random weights.
pub fn random_graph_measure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> StructuredMeasure {
    let g = random_connected_graph(n, 0.2, rng);
    let attrs = random_matrix(rng, n, d);
    let w: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
    let g = g.with_attributes(attrs).unwrap().with_weights(w).unwrap();
    attributed_measure(&g, StructureKind::ShortestPath).unwrap()
}

pub fn random_measure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> StructuredMeasure {
    let h = random_histogram(rng, n);
    let a = random_matrix(rng, n, d);
    build_measure(Some(h.as_slice()), Features::Vectors(a), random_structure(rng, n)).unwrap()
}

/// A feasible coupling that is neither a vertex nor the product coupling:
/// a random convex mix of the product coupling and a greedy vertex.
pub fn random_coupling(rng: &mut ChaCha8Rng, h: &Histogram, g: &Histogram) -> Coupling {
    let cost = random_matrix(rng, h.len(), g.len());
    let vertex = fgw_core::lp::solve_exact_ot(&cost, h, g).unwrap().coupling;
    let t = rng.random::<f64>();
    let prod = fgw_core::measure::product_coupling(h, g);
    Coupling::from_matrix_unchecked(vertex.matrix().scale(t).add_scaled(prod.matrix(), 1.0 - t))
}

pub fn pow(x: f64, q: u32) -> f64 {
    (0..q).fold(1.0, |acc, _| acc * x)
}

/// `sum_{ijkl} |C1(i,k) - C2(j,l)|^q pi_ij pi_kl`, as a quadruple loop.
pub fn naive_structure_cost(c1: &Matrix, c2: &Matrix, pi: &Matrix, q: u32) -> f64 {
    let (n, m) = pi.shape();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            for k in 0..n {
                for l in 0..m {
                    total += pow((c1[(i, k)] - c2[(j, l)]).abs(), q) * pi[(i, j)] * pi[(k, l)];
                }
            }
        }
    }
    total
}

/// `(L^q ⊗ pi)(i, j) = sum_{kl} |C1(i,k) - C2(j,l)|^q pi_kl`, as a quadruple loop.
pub fn naive_tensor(c1: &Matrix, c2: &Matrix, pi: &Matrix, q: u32) -> Matrix {
    let (n, m) = pi.shape();
    Matrix::from_fn(n, m, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..m {
                s += pow((c1[(i, k)] - c2[(j, l)]).abs(), q) * pi[(k, l)];
            }
        }
        s
    })
}

/// The fused objective evaluated term by term.
pub fn naive_fgw(m_ab: &Matrix, c1: &Matrix, c2: &Matrix, pi: &Matrix, q: u32, alpha: f64) -> f64 {
    let feature: f64 = m_ab
        .as_slice()
        .iter()
        .zip(pi.as_slice())
        .map(|(&d, &p)| pow(d, q) * p)
        .sum();
    (1.0 - alpha) * feature + alpha * naive_structure_cost(c1, c2, pi, q)
}

/// Random direction with zero row and column sums (double centering).
pub fn zero_marginal_direction(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    let r = Matrix::from_fn(n, m, |_, _| rng.random::<f64>() - 0.5);
    let rows = r.row_sums();
    let cols = r.col_sums();
    let total = r.sum();
    Matrix::from_fn(n, m, |i, j| {
        r[(i, j)] - rows[i] / m as f64 - cols[j] / n as f64 + total / (n * m) as f64
    })
}

/// Central difference of `f` at `x` along `dir`.
pub fn directional_derivative(f: impl Fn(&Matrix) -> f64, x: &Matrix, dir: &Matrix, step: f64) -> f64 {
    let plus = x.add_scaled(dir, step);
    let minus = x.add_scaled(dir, -step);
    (f(&plus) - f(&minus)) / (2.0 * step)
}

/// Minimum of `f` over `points` equally spaced values of `[0, 1]`.
pub fn grid_minimum(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|i| f(i as f64 / (points - 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

// Exact transport references.

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, y) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                        *x -= f * y;
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..n {
        if n - i < k - current.len() {
            break;
        }
        current.push(i);
        combinations(n, k, i + 1, current, out);
        current.pop();
    }
}

/// Minimum cost over every basic feasible solution, found by solving the
/// marginal equations on each choice of `n + m - 1` cells.
pub fn ot_by_vertex_enumeration(cost: &Matrix, h: &[f64], g: &[f64]) -> f64 {
    let (n, m) = cost.shape();
    let k = n + m - 1;
    let mut subsets = Vec::new();
    combinations(n * m, k, 0, &mut Vec::new(), &mut subsets);
    let rhs: Vec<f64> = h.iter().chain(&g[..m - 1]).copied().collect();
    let mut best = f64::INFINITY;
    for cells in subsets {
        let mut a = vec![vec![0.0; k]; k];
        for (col, &cell) in cells.iter().enumerate() {
            let (i, j) = (cell / m, cell % m);
            a[i][col] = 1.0;
            if j < m - 1 {
                a[n + j][col] = 1.0;
            }
        }
        if let Some(x) = solve_dense(a, rhs.clone()) {
            if x.iter().all(|&v| v >= -1e-12) {
                let value: f64 = cells.iter().zip(&x).map(|(&c, &v)| cost.as_slice()[c] * v).sum();
                best = best.min(value);
            }
        }
    }
    best
}

/// Dense two-phase simplex with Bland's rule on the marginal equations.
pub fn ot_by_dense_simplex(cost: &Matrix, h: &[f64], g: &[f64]) -> f64 {
    let (n, m) = cost.shape();
    let vars = n * m;
    // Rows: n row sums, m - 1 column sums (the last one is implied).
    let rows = n + m - 1;
    let width = vars + rows + 1;
    let mut t = vec![vec![0.0; width]; rows];
    for i in 0..n {
        for j in 0..m {
            t[i][i * m + j] = 1.0;
            if j < m - 1 {
                t[n + j][i * m + j] = 1.0;
            }
        }
    }
    for (r, row) in t.iter_mut().enumerate() {
        row[vars + r] = 1.0;
        row[width - 1] = if r < n { h[r] } else { g[r - n] };
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, c: usize| {
        let p = t[r][c];
        for x in t[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = t[r].clone();
        for (k, row) in t.iter_mut().enumerate() {
            if k != r && row[c] != 0.0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        basis[r] = c;
    };

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, obj: &dyn Fn(usize) -> f64, allowed: usize| loop {
        let reduced = |c: usize, t: &Vec<Vec<f64>>, basis: &Vec<usize>| {
            obj(c) - (0..rows).map(|r| obj(basis[r]) * t[r][c]).sum::<f64>()
        };
        let entering = (0..allowed).find(|&c| !basis.contains(&c) && reduced(c, t, basis) < -1e-12);
        let Some(c) = entering else { break };
        let mut leave: Option<usize> = None;
        for r in 0..rows {
            if t[r][c] > 1e-12 {
                let ratio = t[r][width - 1] / t[r][c];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][c];
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[r] < basis[l])
                    }
                };
                if better {
                    leave = Some(r);
                }
            }
        }
        let r = leave.expect("transport problems are bounded");
        pivot(t, basis, r, c);
    };

    // Phase one: drive the artificial variables to zero.
    let phase_one = |c: usize| if c >= vars { 1.0 } else { 0.0 };
    run(&mut t, &mut basis, &phase_one, vars + rows);
    for r in 0..rows {
        if basis[r] >= vars {
            if let Some(c) = (0..vars).find(|&c| t[r][c].abs() > 1e-9) {
                pivot(&mut t, &mut basis, r, c);
            }
        }
    }
    let phase_two = |c: usize| if c < vars { cost.as_slice()[c] } else { 0.0 };
    run(&mut t, &mut basis, &phase_two, vars);
    (0..rows)
        .filter(|&r| basis[r] < vars)
        .map(|r| cost.as_slice()[basis[r]] * t[r][width - 1])
        .sum()
}

// Oracle sweeps shared by the integration tests and the acceptance suite.
// Each returns the worst observed error.

use fgw_core::fgw::{fgw_gradient, fgw_loss, line_search_q2, tensor_product, tensor_product_q2};
use fgw_core::lp::solve_exact_ot;
use fgw_core::measure::feature_cost_matrix;

fn problem(rng: &mut ChaCha8Rng) -> (StructuredMeasure, StructuredMeasure, Matrix, Coupling) {
    let n = rng.random_range(2..=7);
    let m = rng.random_range(2..=7);
    let mu = random_measure(rng, n, 2);
    let nu = random_measure(rng, m, 2);
    let m_ab = feature_cost_matrix(mu.features(), nu.features()).unwrap();
    let pi = random_coupling(rng, mu.weights(), nu.weights());
    (mu, nu, m_ab, pi)
}

/// Max-abs gap between the factorized `q = 2` tensor product (and the
/// generic one for `q = 1, 2`) and the quadruple loop.
pub fn tensor_error(seed: u64, instances: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (mu, nu, _, pi) = problem(&mut rng);
        let (c1, c2) = (mu.structure(), nu.structure());
        let naive2 = naive_tensor(c1, c2, pi.matrix(), 2);
        worst = worst.max(tensor_product_q2(c1, c2, &pi).unwrap().max_abs_diff(&naive2));
        for q in [1, 2] {
            let naive = naive_tensor(c1, c2, pi.matrix(), q);
            worst = worst.max(tensor_product(c1, c2, &pi, q).unwrap().max_abs_diff(&naive));
        }
    }
    worst
}

/// Max-abs gap between the loss and its term-by-term evaluation.
pub fn loss_error(seed: u64, instances: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (mu, nu, m_ab, pi) = problem(&mut rng);
        let alpha = rng.random::<f64>();
        for q in [1, 2] {
            let fast = fgw_loss(&m_ab, mu.structure(), nu.structure(), &pi, q, alpha).unwrap();
            let slow = naive_fgw(&m_ab, mu.structure(), nu.structure(), pi.matrix(), q, alpha);
            worst = worst.max((fast - slow).abs());
        }
    }
    worst
}

/// Relative gap between `<grad, D>` and a central difference of the naive
/// objective along zero-marginal directions `D`.
pub fn gradient_error(seed: u64, instances: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (mu, nu, m_ab, pi) = problem(&mut rng);
        let alpha = rng.random::<f64>();
        let (c1, c2) = (mu.structure(), nu.structure());
        for q in [1, 2] {
            let grad = fgw_gradient(&m_ab, c1, c2, &pi, q, alpha).unwrap();
            for _ in 0..3 {
                let dir = zero_marginal_direction(&mut rng, pi.shape().0, pi.shape().1);
                let analytic = grad.dot(&dir);
                let numeric =
                    directional_derivative(|x| naive_fgw(&m_ab, c1, c2, x, q, alpha), pi.matrix(), &dir, 1e-4);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
                worst = worst.max(rel);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LineSearchReport {
    /// Largest `E(tau) - min_grid E`.
    pub grid_excess: f64,
    /// Largest relative gap between `a + b + c` and `E_2` at the target.
    pub endpoint_error: f64,
}

/// Checks the exact step towards the linearized vertex against a
/// `points`-point grid over `[0, 1]`.
pub fn line_search_check(seed: u64, instances: usize, points: usize) -> LineSearchReport {
    let mut rng = rng(seed);
    let mut report = LineSearchReport::default();
    for _ in 0..instances {
        let (mu, nu, m_ab, pi) = problem(&mut rng);
        let alpha = rng.random::<f64>();
        let (c1, c2) = (mu.structure(), nu.structure());
        let grad = fgw_gradient(&m_ab, c1, c2, &pi, 2, alpha).unwrap();
        let tilde = solve_exact_ot(&grad, mu.weights(), nu.weights()).unwrap().coupling;
        let ls = line_search_q2(&m_ab, c1, c2, &pi, &tilde, alpha).unwrap();
        let along = |t: f64| {
            let x = pi.matrix().scale(1.0 - t).add_scaled(tilde.matrix(), t);
            naive_fgw(&m_ab, c1, c2, &x, 2, alpha)
        };
        report.grid_excess = report.grid_excess.max(along(ls.tau) - grid_minimum(along, points));
        let target = naive_fgw(&m_ab, c1, c2, tilde.matrix(), 2, alpha);
        let rel = (ls.a + ls.b + ls.c - target).abs() / target.abs().max(1e-300);
        report.endpoint_error = report.endpoint_error.max(rel);
    }
    report
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LpReport {
    pub simplex_error: f64,
    pub enumeration_error: f64,
    pub enumerated: usize,
    /// Largest primal-dual objective gap reported by the solver.
    pub duality_gap: f64,
}

/// Exact transport against dense references on random problems with
/// `n, m <= 6`; vertex enumeration runs where `n m <= 12`.
pub fn lp_check(seed: u64, instances: usize) -> LpReport {
    let mut rng = rng(seed);
    let mut report = LpReport::default();
    for k in 0..instances {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=6);
        let h = random_histogram(&mut rng, n);
        let g = random_histogram(&mut rng, m);
        // Every fourth cost is integer-valued to exercise degenerate ties.
        let cost = if k % 4 == 0 {
            Matrix::from_fn(n, m, |_, _| rng.random_range(0..3) as f64)
        } else {
            random_matrix(&mut rng, n, m)
        };
        let sol = solve_exact_ot(&cost, &h, &g).unwrap();
        let reference = ot_by_dense_simplex(&cost, h.as_slice(), g.as_slice());
        report.simplex_error = report.simplex_error.max((sol.objective - reference).abs());
        report.duality_gap = report
            .duality_gap
            .max((sol.objective - sol.dual_objective(&h, &g)).abs());
        if n * m <= 12 {
            let vertex = ot_by_vertex_enumeration(&cost, h.as_slice(), g.as_slice());
            report.enumeration_error = report.enumeration_error.max((sol.objective - vertex).abs());
            report.enumerated += 1;
        }
    }
    report
}
