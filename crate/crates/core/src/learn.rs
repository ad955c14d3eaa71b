//! Distance-based learning on structured measures.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barycenter::{solve_barycenter_with, update_features, update_structure, BarycenterProblem, BarycenterState};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fgw::{compose_couplings, solve_fgw, FgwParams, FgwResult, Start};
use crate::matrix::Matrix;
use crate::measure::{monotone_coupling, Coupling, Features, Histogram, StructuredMeasure};

#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub values: Matrix,
    pub params: FgwParams,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }
}

/// Symmetric matrix of FGW losses; the diagonal is zero by definition.
pub fn pairwise_fgw_matrix<E: Executor>(
    executor: &E,
    measures: &[StructuredMeasure],
    params: &FgwParams,
) -> Result<DistanceMatrix> {
    params.validate()?;
    let k = measures.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let losses = executor.map(pairs.len(), |p| {
        let (i, j) = pairs[p];
        solve_fgw(&measures[i], &measures[j], params).map(|r| r.loss)
    });
    let mut values = Matrix::zeros(k, k);
    for (&(i, j), loss) in pairs.iter().zip(losses) {
        let loss = loss?;
        values[(i, j)] = loss;
        values[(j, i)] = loss;
    }
    Ok(DistanceMatrix {
        values,
        params: params.clone(),
    })
}

/// FGW losses from every row measure to every column measure.
pub fn cross_fgw_matrix<E: Executor>(
    executor: &E,
    rows: &[StructuredMeasure],
    cols: &[StructuredMeasure],
    params: &FgwParams,
) -> Result<Matrix> {
    params.validate()?;
    let m = cols.len();
    let losses = executor.map(rows.len() * m, |p| {
        solve_fgw(&rows[p / m], &cols[p % m], params).map(|r| r.loss)
    });
    let data = losses.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_vec(rows.len(), m, data))
}

/// Entrywise `exp(-gamma * D)`.
pub fn fgw_kernel(distances: &Matrix, gamma: f64) -> Result<Matrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidGamma(gamma));
    }
    Ok(distances.map(|d| libm::exp(-gamma * d)))
}

/// Majority vote among the `k` nearest training points of each test row.
///
/// `distances` is `tests x train`. Distance ties go to the smaller training
/// index and vote ties to the smaller label.
pub fn knn_predict(distances: &Matrix, train_labels: &[i64], k: usize) -> Result<Vec<i64>> {
    let n_train = train_labels.len();
    if n_train == 0 {
        return Err(Error::EmptyTrainSet);
    }
    if distances.cols() != n_train {
        return Err(Error::DimensionMismatch {
            context: "test-train distance columns",
            expected: n_train,
            found: distances.cols(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if k > n_train {
        return Err(Error::KTooLarge { k, count: n_train });
    }
    let mut out = Vec::with_capacity(distances.rows());
    for row in distances.iter_rows() {
        let mut order: Vec<usize> = (0..n_train).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        let mut votes: BTreeMap<i64, usize> = BTreeMap::new();
        for &t in &order[..k] {
            *votes.entry(train_labels[t]).or_default() += 1;
        }
        let best = votes.values().copied().max().unwrap_or(0);
        let label = votes
            .iter()
            .find(|&(_, &c)| c == best)
            .map(|(&l, _)| l)
            .expect("k >= 1 votes");
        out.push(label);
    }
    Ok(out)
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "labelings",
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let sum_rows: f64 = rows.values().map(|&n| choose2(n)).sum();
    let sum_cols: f64 = cols.values().map(|&n| choose2(n)).sum();
    let total = choose2(a.len());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        // Both labelings are trivial (all singletons or one block).
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max_index - expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentroidSize {
    Fixed(usize),
    /// Each centroid has as many points as the graph it was seeded from.
    MatchSeed,
}

pub const DEFAULT_THRESHOLD: f64 = 1.1;
pub const DEFAULT_KMEANS_ITERS: usize = 10;
pub const DEFAULT_CENTROID_ITERS: usize = 10;
pub const DEFAULT_RESTARTS: usize = 8;

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub k: usize,
    /// Distance settings; `q` must be 2 since centroids are barycenters.
    pub params: FgwParams,
    pub centroid_size: CentroidSize,
    pub centroid_iters: usize,
    pub threshold: f64,
    pub seed: u64,
    pub max_iters: usize,
    /// Number of independently seeded runs.
    pub restarts: usize,
    /// Graphs to seed the clusters from; replaces the seeded runs.
    pub initial_centers: Option<Vec<usize>>,
}

impl KMeansConfig {
    pub fn new(k: usize, alpha: f64, centroid_size: CentroidSize) -> Result<Self> {
        Ok(Self {
            k,
            params: FgwParams::new(2, alpha)?,
            centroid_size,
            centroid_iters: DEFAULT_CENTROID_ITERS,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            max_iters: DEFAULT_KMEANS_ITERS,
            restarts: DEFAULT_RESTARTS,
            initial_centers: None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<BarycenterState>,
    pub centroid_weights: Vec<Histogram>,
    /// Sum of FGW losses to the assigned centroid, one entry per assignment step.
    pub inertia: Vec<f64>,
    /// Edges `(i, j)`, `i < j`, with `C(i, j) <= threshold`, per centroid.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    pub iterations: usize,
    pub converged: bool,
    /// Graphs the returned run was seeded from, in cluster order.
    pub seeds: Vec<usize>,
}

impl ClusteringResult {
    pub fn final_inertia(&self) -> f64 {
        self.inertia.last().copied().unwrap_or(f64::INFINITY)
    }
}

struct Centroid {
    state: BarycenterState,
    weights: Histogram,
}

impl Centroid {
    fn measure(&self) -> Result<StructuredMeasure> {
        self.state.to_measure(&self.weights)
    }
}

fn vector_features(m: &StructuredMeasure) -> Result<&Matrix> {
    match m.features() {
        Features::Vectors(b) => Ok(b),
        Features::Labels(_) => Err(Error::MixedFeatureModes),
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn thresholded_edges(c: &Matrix, threshold: f64) -> Vec<(usize, usize)> {
    let n = c.rows();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| c[(i, j)] <= threshold)
        .collect()
}

/// Lloyd iterations with FGW assignments and barycenter centroids.
///
/// The first run is seeded by farthest-first traversal from a random graph;
/// further runs (`restarts > 1`) sample each next seed with probability
/// proportional to its loss to the nearest seed already chosen. The run with
/// the lowest final inertia is returned, the earliest on ties.
///
/// A centroid keeps its barycenter couplings as extra starts for its members
/// and is refit from its current state, so each round can only lower the
/// inertia.
pub fn kmeans_graphs<E: Executor>(
    executor: &E,
    measures: &[StructuredMeasure],
    config: &KMeansConfig,
) -> Result<ClusteringResult> {
    let count = measures.len();
    if config.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if config.k > count {
        return Err(Error::KTooLarge { k: config.k, count });
    }
    if config.params.q != 2 {
        return Err(Error::UnsupportedExponent(config.params.q));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("at least one k-means run is required"));
    }
    config.params.validate()?;
    for m in measures {
        vector_features(m)?;
    }
    if let Some(c) = &config.initial_centers {
        let mut sorted = c.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if c.len() != config.k || sorted.len() != config.k || sorted.iter().any(|&g| g >= count) {
            return Err(Error::InvalidParameter(
                "initial centers must be k distinct graph indices",
            ));
        }
        let (seeds, rows) = seed_rows(executor, measures, config, Seeding::Given(c))?;
        return lloyd(executor, measures, config, seeds, rows);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<ClusteringResult> = None;
    for run in 0..config.restarts {
        let seeding = if run == 0 {
            Seeding::FarthestFirst(&mut rng)
        } else {
            Seeding::Proportional(&mut rng)
        };
        let (seeds, rows) = seed_rows(executor, measures, config, seeding)?;
        let result = lloyd(executor, measures, config, seeds, rows)?;
        let better = match &best {
            None => true,
            Some(b) => result.final_inertia() < b.final_inertia(),
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one run"))
}

enum Seeding<'a> {
    Given(&'a [usize]),
    FarthestFirst(&'a mut ChaCha8Rng),
    Proportional(&'a mut ChaCha8Rng),
}

/// Chooses `k` seeds and returns them with their solves against every graph.
fn seed_rows<E: Executor>(
    executor: &E,
    measures: &[StructuredMeasure],
    config: &KMeansConfig,
    mut seeding: Seeding<'_>,
) -> Result<(Vec<usize>, Vec<Vec<FgwResult>>)> {
    let count = measures.len();
    let mut seeds = vec![match &mut seeding {
        Seeding::Given(c) => c[0],
        Seeding::FarthestFirst(rng) | Seeding::Proportional(rng) => rng.random_range(0..count),
    }];
    let mut rows: Vec<Vec<FgwResult>> = Vec::new();
    let mut nearest = vec![f64::INFINITY; count];
    loop {
        let s = *seeds.last().expect("at least one seed");
        let row = executor.map(count, |g| solve_fgw(&measures[s], &measures[g], &config.params));
        let row = row.into_iter().collect::<Result<Vec<_>>>()?;
        for (g, r) in row.iter().enumerate() {
            nearest[g] = nearest[g].min(r.loss);
        }
        rows.push(row);
        if seeds.len() == config.k {
            break;
        }
        let free: Vec<usize> = (0..count).filter(|g| !seeds.contains(g)).collect();
        let next = match &mut seeding {
            Seeding::Given(c) => c[seeds.len()],
            Seeding::FarthestFirst(_) => {
                let mut next = free[0];
                for &g in &free[1..] {
                    if nearest[g] > nearest[next] {
                        next = g;
                    }
                }
                next
            }
            Seeding::Proportional(rng) => {
                let total: f64 = free.iter().map(|&g| nearest[g].max(0.0)).sum();
                let mut target = rng.random::<f64>() * total;
                let mut next = free[0];
                if total > 0.0 {
                    for &g in &free {
                        next = g;
                        target -= nearest[g].max(0.0);
                        if target < 0.0 {
                            break;
                        }
                    }
                }
                next
            }
        };
        seeds.push(next);
    }
    Ok((seeds, rows))
}

fn lloyd<E: Executor>(
    executor: &E,
    measures: &[StructuredMeasure],
    config: &KMeansConfig,
    seeds: Vec<usize>,
    seed_rows: Vec<Vec<FgwResult>>,
) -> Result<ClusteringResult> {
    let count = measures.len();
    let k = config.k;

    let mut assignments: Vec<usize> = (0..count)
        .map(|g| match seeds.iter().position(|&s| s == g) {
            Some(j) => j,
            None => argmin(seed_rows.iter().map(|row| row[g].loss)),
        })
        .collect();

    let sizes: Vec<usize> = seeds
        .iter()
        .map(|&s| match config.centroid_size {
            CentroidSize::Fixed(n) => n,
            CentroidSize::MatchSeed => measures[s].len(),
        })
        .collect();

    // Each centroid starts as its seed pushed onto `N` uniform points by the
    // monotone coupling; member couplings are composed through the seed.
    let mut member_couplings: Vec<Option<Coupling>> = vec![None; count];
    let mut centroids = Vec::with_capacity(k);
    for (j, &s) in seeds.iter().enumerate() {
        let seed = &measures[s];
        let weights = Histogram::uniform(sizes[j])?;
        let push = monotone_coupling(&weights, seed.weights());
        let single = core::slice::from_ref(&push);
        let structure = update_structure(single, &[seed.structure()], &[1.0], &weights)?;
        let features = update_features(single, &[vector_features(seed)?], &[1.0], &weights)?;
        for g in (0..count).filter(|&g| assignments[g] == j) {
            member_couplings[g] = Some(if g == s {
                push.clone()
            } else {
                compose_couplings(&push, &seed_rows[j][g].coupling)?
            });
        }
        centroids.push(Centroid {
            state: BarycenterState {
                structure,
                features,
                couplings: Vec::new(),
                objective: f64::INFINITY,
                trace: Vec::new(),
            },
            weights,
        });
    }
    let mut member_couplings: Vec<Coupling> = member_couplings
        .into_iter()
        .map(|c| c.expect("every graph is assigned"))
        .collect();

    let mut fitted = refit(executor, measures, config, &assignments, &member_couplings, &centroids)?;
    let mut inertia = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let centers: Vec<StructuredMeasure> = fitted.iter().map(Centroid::measure).collect::<Result<_>>()?;
        let solved = executor.map(count * k, |p| {
            let (g, j) = (p / k, p % k);
            let mut params = config.params.clone();
            if assignments[g] == j {
                let member = fitted[j].state.couplings[member_index(&assignments, j, g)].clone();
                let mut starts = vec![Start::Given(member)];
                starts.extend(params.starts.iter().cloned());
                params = params.with_starts(starts);
            }
            solve_fgw(&centers[j], &measures[g], &params)
        });
        let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
        let mut next: Vec<usize> = (0..count)
            .map(|g| argmin((0..k).map(|j| solved[g * k + j].loss)))
            .collect();
        // Keep the current cluster on exact ties.
        for g in 0..count {
            let cur = assignments[g];
            if solved[g * k + cur].loss <= solved[g * k + next[g]].loss {
                next[g] = cur;
            }
        }
        inertia.push((0..count).map(|g| solved[g * k + next[g]].loss).sum());

        for j in 0..k {
            if next.iter().all(|&a| a != j) {
                // Reseed with the graph farthest from its centroid among
                // those whose cluster would not become empty.
                let donor = (0..count)
                    .filter(|&g| next.iter().filter(|&&a| a == next[g]).count() > 1)
                    .max_by(|&a, &b| {
                        let (da, db) = (solved[a * k + next[a]].loss, solved[b * k + next[b]].loss);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("k <= count leaves a cluster with two members");
                next[donor] = j;
            }
        }

        if next == assignments {
            converged = true;
            break;
        }
        for g in 0..count {
            member_couplings[g] = solved[g * k + next[g]].coupling.clone();
        }
        assignments = next;
        fitted = refit(executor, measures, config, &assignments, &member_couplings, &fitted)?;
    }

    let adjacency = fitted
        .iter()
        .map(|c| thresholded_edges(&c.state.structure, config.threshold))
        .collect();
    Ok(ClusteringResult {
        assignments,
        centroid_weights: fitted.iter().map(|c| c.weights.clone()).collect(),
        centroids: fitted.into_iter().map(|c| c.state).collect(),
        inertia,
        adjacency,
        iterations,
        converged,
        seeds,
    })
}

/// Position of graph `g` among the members of cluster `j`.
fn member_index(assignments: &[usize], j: usize, g: usize) -> usize {
    assignments[..g].iter().filter(|&&a| a == j).count()
}

/// Fits every cluster's barycenter, starting from its current centroid
/// with the given member couplings. A cluster that just received a reseeded
/// graph starts from the couplings computed against its old centroid.
fn refit<E: Executor>(
    executor: &E,
    measures: &[StructuredMeasure],
    config: &KMeansConfig,
    assignments: &[usize],
    member_couplings: &[Coupling],
    current: &[Centroid],
) -> Result<Vec<Centroid>> {
    let fits = executor.map(config.k, |j| {
        let members: Vec<usize> = (0..measures.len()).filter(|&g| assignments[g] == j).collect();
        let inputs: Vec<StructuredMeasure> = members.iter().map(|&g| measures[g].clone()).collect();
        let centroid = &current[j];
        let mut problem = BarycenterProblem::new(&inputs, centroid.weights.len(), config.params.alpha)?;
        problem.weights = centroid.weights.clone();
        problem.outer_iters = config.centroid_iters;
        problem.inner = config.params.clone();
        let init = BarycenterState {
            structure: centroid.state.structure.clone(),
            features: centroid.state.features.clone(),
            couplings: members.iter().map(|&g| member_couplings[g].clone()).collect(),
            objective: f64::INFINITY,
            trace: Vec::new(),
        };
        let state = solve_barycenter_with(executor, &problem, Some(init), config.seed)?;
        Ok(Centroid {
            state,
            weights: problem.weights.clone(),
        })
    });
    fits.into_iter().collect()
}
