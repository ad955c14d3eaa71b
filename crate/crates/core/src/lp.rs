//! Exact discrete optimal transport by the transportation simplex.
//!
//! The basis is a spanning tree of the bipartite graph rows x columns with
//! `n + m - 1` basic cells. Each pivot recomputes the tree potentials and
//! flows from scratch, prices every non-basic cell, and swaps one cell along
//! the cycle closed by the entering cell. Entering cells are chosen by the
//! most negative reduced cost; after a run of degenerate pivots the solver
//! falls back to Bland's lowest-index rule until progress resumes, which
//! rules out cycling. All ties go to the lowest cell index so results are
//! deterministic.
//!
//! Costs may be negative; conditional-gradient linearizations often are.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::measure::{Coupling, Histogram};

/// Flows at or below this count as a degenerate (zero-length) step.
const DEGENERATE_FLOW: f64 = 1e-15;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    pub coupling: Coupling,
    pub objective: f64,
    pub dual_row: Vec<f64>,
    pub dual_col: Vec<f64>,
}

impl OtSolution {
    /// `sum_i h_i u_i + sum_j g_j v_j`.
    pub fn dual_objective(&self, h: &Histogram, g: &Histogram) -> f64 {
        let r: f64 = self.dual_row.iter().zip(h.as_slice()).map(|(u, w)| u * w).sum();
        let c: f64 = self.dual_col.iter().zip(g.as_slice()).map(|(v, w)| v * w).sum();
        r + c
    }
}

/// Solves `min <pi, cost>` over the couplings of `h` and `g` exactly.
pub fn solve_exact_ot(cost: &Matrix, h: &Histogram, g: &Histogram) -> Result<OtSolution> {
    let (n, m) = (h.len(), g.len());
    if cost.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            context: "cost matrix shape",
            expected: n * m,
            found: cost.rows() * cost.cols(),
        });
    }
    for i in 0..n {
        for j in 0..m {
            if !cost[(i, j)].is_finite() {
                return Err(Error::NonFiniteCost { row: i, col: j });
            }
        }
    }

    let mut simplex = Simplex::new(cost, h.as_slice(), g.as_slice());
    simplex.run()?;
    Ok(simplex.into_solution())
}

struct Simplex<'a> {
    cost: &'a Matrix,
    supply: &'a [f64],
    demand: &'a [f64],
    n: usize,
    m: usize,
    /// Basic cells as `i * m + j`.
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    // Tree scratch, indexed by node: rows are 0..n, columns n..n+m.
    adjacency: Vec<Vec<(usize, usize)>>,
    parent: Vec<usize>,
    parent_slot: Vec<usize>,
    depth: Vec<usize>,
    order: Vec<usize>,
    potential: Vec<f64>,
    /// Flow per basis slot.
    flow: Vec<f64>,
    pricing_tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(cost: &'a Matrix, supply: &'a [f64], demand: &'a [f64]) -> Self {
        let (n, m) = (supply.len(), demand.len());
        let scale = 1.0 + cost.max_abs();
        let mut s = Self {
            cost,
            supply,
            demand,
            n,
            m,
            basis: Vec::with_capacity(n + m - 1),
            is_basic: vec![false; n * m],
            adjacency: vec![Vec::new(); n + m],
            parent: vec![usize::MAX; n + m],
            parent_slot: vec![usize::MAX; n + m],
            depth: vec![0; n + m],
            order: Vec::with_capacity(n + m),
            potential: vec![0.0; n + m],
            flow: vec![0.0; n + m - 1],
            pricing_tol: 1e-12 * scale,
        };
        s.northwest_corner();
        s
    }

    /// Staircase initial basis; always a spanning tree.
    fn northwest_corner(&mut self) {
        let (n, m) = (self.n, self.m);
        let (mut i, mut j) = (0, 0);
        let mut rs = self.supply[0];
        let mut rd = self.demand[0];
        loop {
            let cell = i * m + j;
            self.basis.push(cell);
            self.is_basic[cell] = true;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || rs <= rd {
                rd -= rs;
                i += 1;
                rs = self.supply[i];
            } else {
                rs -= rd;
                j += 1;
                rd = self.demand[j];
            }
        }
        debug_assert_eq!(self.basis.len(), n + m - 1);
    }

    /// Rebuilds the rooted tree, the potentials and the basic flows.
    fn refresh_tree(&mut self) {
        let (n, m) = (self.n, self.m);
        for list in &mut self.adjacency {
            list.clear();
        }
        for (slot, &cell) in self.basis.iter().enumerate() {
            let (i, j) = (cell / m, cell % m);
            self.adjacency[i].push((n + j, slot));
            self.adjacency[n + j].push((i, slot));
        }

        // Depth-first order from row 0.
        self.order.clear();
        self.parent[0] = usize::MAX;
        self.parent_slot[0] = usize::MAX;
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        self.order.push(0);
        let mut cursor = 0;
        while cursor < self.order.len() {
            let node = self.order[cursor];
            cursor += 1;
            for k in 0..self.adjacency[node].len() {
                let (next, slot) = self.adjacency[node][k];
                if next == self.parent[node] && slot == self.parent_slot[node] {
                    continue;
                }
                self.parent[next] = node;
                self.parent_slot[next] = slot;
                self.depth[next] = self.depth[node] + 1;
                let cell = self.basis[slot];
                let c = self.cost[(cell / m, cell % m)];
                // u_i + v_j = c_ij on every basic cell.
                self.potential[next] = c - self.potential[node];
                self.order.push(next);
            }
        }
        debug_assert_eq!(self.order.len(), n + m, "basis is not a spanning tree");

        // Net supply of each subtree flows through its parent edge.
        let mut net: Vec<f64> = self
            .supply
            .iter()
            .copied()
            .chain(self.demand.iter().map(|d| -d))
            .collect();
        for &node in self.order.iter().skip(1).rev() {
            let slot = self.parent_slot[node];
            let p = self.parent[node];
            self.flow[slot] = if node < n { net[node] } else { -net[node] };
            net[p] += net[node];
        }
    }

    fn reduced_cost(&self, i: usize, j: usize) -> f64 {
        self.cost[(i, j)] - self.potential[i] - self.potential[self.n + j]
    }

    fn select_entering(&self, bland: bool) -> Option<usize> {
        let m = self.m;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.n {
            for j in 0..m {
                let cell = i * m + j;
                if self.is_basic[cell] {
                    continue;
                }
                let rc = self.reduced_cost(i, j);
                if rc < -self.pricing_tol {
                    if bland {
                        return Some(cell);
                    }
                    if best.is_none_or(|(_, b)| rc < b) {
                        best = Some((cell, rc));
                    }
                }
            }
        }
        best.map(|(c, _)| c)
    }

    /// Basis slots on the tree path from row `i` to column `j`, each tagged
    /// with whether it loses flow when `(i, j)` enters.
    fn cycle(&self, i: usize, j: usize) -> Vec<(usize, bool)> {
        let (mut a, mut b) = (i, self.n + j);
        let mut from_row = Vec::new();
        let mut from_col = Vec::new();
        while self.depth[a] > self.depth[b] {
            from_row.push(self.parent_slot[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            from_col.push(self.parent_slot[b]);
            b = self.parent[b];
        }
        while a != b {
            from_row.push(self.parent_slot[a]);
            a = self.parent[a];
            from_col.push(self.parent_slot[b]);
            b = self.parent[b];
        }
        // Along the path row i -> column j, odd-numbered edges lose flow.
        let mut out = Vec::with_capacity(from_row.len() + from_col.len());
        for (t, &slot) in from_row.iter().enumerate() {
            out.push((slot, t % 2 == 0));
        }
        for (s, &slot) in from_col.iter().enumerate() {
            out.push((slot, s % 2 == 0));
        }
        out
    }

    fn run(&mut self) -> Result<()> {
        let limit = 1000 + 50 * self.n * self.m;
        let mut degenerate_run = 0;
        for _ in 0..limit {
            self.refresh_tree();
            let bland = degenerate_run >= DEGENERATE_RUN;
            let Some(entering) = self.select_entering(bland) else {
                return Ok(());
            };
            let (i, j) = (entering / self.m, entering % self.m);
            let cycle = self.cycle(i, j);
            let mut leaving: Option<(usize, f64)> = None;
            for &(slot, loses) in &cycle {
                if !loses {
                    continue;
                }
                let f = self.flow[slot].max(0.0);
                let better = match leaving {
                    None => true,
                    Some((ls, lf)) => f < lf || (f == lf && self.basis[slot] < self.basis[ls]),
                };
                if better {
                    leaving = Some((slot, f));
                }
            }
            let (slot, theta) = leaving.expect("cycle has a decreasing edge");
            if theta <= DEGENERATE_FLOW {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let old = self.basis[slot];
            self.is_basic[old] = false;
            self.is_basic[entering] = true;
            self.basis[slot] = entering;
        }
        Err(Error::PivotLimit(limit))
    }

    fn into_solution(mut self) -> OtSolution {
        self.refresh_tree();
        let (n, m) = (self.n, self.m);
        let mut plan = Matrix::zeros(n, m);
        let mut objective = 0.0;
        for (slot, &cell) in self.basis.iter().enumerate() {
            let (i, j) = (cell / m, cell % m);
            let f = self.flow[slot].max(0.0);
            plan[(i, j)] = f;
            objective += f * self.cost[(i, j)];
        }
        OtSolution {
            coupling: Coupling::from_matrix_unchecked(plan),
            objective,
            dual_row: self.potential[..n].to_vec(),
            dual_col: self.potential[n..].to_vec(),
        }
    }
}
