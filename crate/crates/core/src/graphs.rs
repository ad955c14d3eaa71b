//! Raw graphs and their conversion to structure matrices and labels.
//!
//! Also home to the two synthetic generators: the pair of binary trees
//! whose features and structures each match but not jointly, and
//! stochastic block model community graphs.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::measure::{build_measure, Features, StructuredMeasure};

/// Undirected simple graph with optional node labels, attributes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    node_count: usize,
    /// Sorted, deduplicated, each pair stored as `(low, high)`.
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<i64>>,
    attributes: Option<Matrix>,
    weights: Option<Vec<f64>>,
}

impl LabeledGraph {
    /// Builds a graph, normalizing edge orientation and dropping duplicates.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b || a >= node_count || b >= node_count {
                return Err(Error::InvalidEdge(a, b));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self {
            node_count,
            edges: normalized,
            labels: None,
            attributes: None,
            weights: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        self.check_len(labels.len(), "node labels")?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_attributes(mut self, attributes: Matrix) -> Result<Self> {
        self.check_len(attributes.rows(), "node attributes")?;
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.check_len(weights.len(), "node weights")?;
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        self.weights = Some(weights);
        Ok(self)
    }

    fn check_len(&self, found: usize, context: &'static str) -> Result<()> {
        if found == self.node_count {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected: self.node_count,
                found,
            })
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn attributes(&self) -> Option<&Matrix> {
        self.attributes.as_ref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.neighbors();
        let mut seen = vec![false; self.node_count];
        let mut out = Vec::new();
        for s in 0..self.node_count {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Induced subgraph on `nodes` (in the given order).
    pub fn subgraph(&self, nodes: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.node_count];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.node_count || index[old] != usize::MAX {
                return Err(Error::InvalidPermutation(self.node_count));
            }
            index[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|&(a, b)| (index[a], index[b]));
        let mut g = Self::new(nodes.len(), edges)?;
        g.labels = self.labels.as_ref().map(|l| nodes.iter().map(|&v| l[v]).collect());
        g.attributes = self.attributes.as_ref().map(|a| a.rows_permuted(nodes));
        g.weights = self.weights.as_ref().map(|w| nodes.iter().map(|&v| w[v]).collect());
        Ok(g)
    }

    /// The largest connected component (ties go to the one with the
    /// smallest node) and the original ids of its nodes.
    pub fn largest_component(&self) -> Result<(Self, Vec<usize>)> {
        let comps = self.components();
        let mut best: &[usize] = &[];
        for c in &comps {
            if c.len() > best.len() {
                best = c;
            }
        }
        let nodes = best.to_vec();
        Ok((self.subgraph(&nodes)?, nodes))
    }
}

/// Unweighted hop distances between all node pairs.
pub fn shortest_path_matrix(g: &LabeledGraph) -> Result<Matrix> {
    let n = g.node_count();
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::DisconnectedGraph { components: comps });
    }
    let adj = g.neighbors();
    let mut out = Matrix::zeros(n, n);
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (t, &d) in dist.iter().enumerate() {
            out[(s, t)] = d as f64;
        }
    }
    Ok(out)
}

/// 0/1 adjacency matrix.
pub fn adjacency_matrix(g: &LabeledGraph) -> Matrix {
    let n = g.node_count();
    let mut out = Matrix::zeros(n, n);
    for &(a, b) in g.edges() {
        out[(a, b)] = 1.0;
        out[(b, a)] = 1.0;
    }
    out
}

/// Weisfeiler-Lehman label refinement over a collection of graphs sharing
/// one dictionary, so ids are comparable across graphs.
///
/// Returns, per graph and node, the sequence of `iterations + 1` labels:
/// entry 0 is the original label and entry `k` the id of the pair
/// (label at `k - 1`, sorted neighbor labels at `k - 1`). Ids are handed
/// out in order of first appearance, scanning graphs then nodes in order.
pub fn wl_relabel_collection(graphs: &[LabeledGraph], iterations: usize) -> Result<Vec<Vec<Vec<i64>>>> {
    let mut sequences = Vec::with_capacity(graphs.len());
    let mut neighbors = Vec::with_capacity(graphs.len());
    for g in graphs {
        let labels = g.labels().ok_or(Error::MissingLabels)?;
        sequences.push(labels.iter().map(|&l| vec![l]).collect::<Vec<_>>());
        neighbors.push(g.neighbors());
    }
    for k in 1..=iterations {
        let mut dictionary: BTreeMap<(i64, Vec<i64>), i64> = BTreeMap::new();
        for (seqs, adj) in sequences.iter_mut().zip(&neighbors) {
            let next: Vec<i64> = (0..seqs.len())
                .map(|v| {
                    let mut around: Vec<i64> = adj[v].iter().map(|&w| seqs[w][k - 1]).collect();
                    around.sort_unstable();
                    let fresh = dictionary.len() as i64;
                    *dictionary.entry((seqs[v][k - 1], around)).or_insert(fresh)
                })
                .collect();
            for (s, id) in seqs.iter_mut().zip(next) {
                s.push(id);
            }
        }
    }
    Ok(sequences)
}

/// Weisfeiler-Lehman label sequences of a single graph.
pub fn wl_relabel(g: &LabeledGraph, iterations: usize) -> Result<Vec<Vec<i64>>> {
    Ok(wl_relabel_collection(core::slice::from_ref(g), iterations)?
        .pop()
        .expect("one graph in, one out"))
}

/// Checks that `sigma` is a permutation of `0..n` and returns its inverse.
pub fn inverse_permutation(sigma: &[usize], n: usize) -> Result<Vec<usize>> {
    if sigma.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    let mut inv = vec![usize::MAX; n];
    for (i, &s) in sigma.iter().enumerate() {
        if s >= n || inv[s] != usize::MAX {
            return Err(Error::InvalidPermutation(n));
        }
        inv[s] = i;
    }
    Ok(inv)
}

/// Relabels nodes: node `i` of `g` becomes node `sigma[i]`.
pub fn permute_graph(g: &LabeledGraph, sigma: &[usize]) -> Result<LabeledGraph> {
    let inv = inverse_permutation(sigma, g.node_count())?;
    // Node i of the result is node inv[i] of g.
    g.subgraph(&inv)
}

/// Which matrix encodes the structure of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    ShortestPath,
    Adjacency,
}

pub fn structure_matrix(g: &LabeledGraph, kind: StructureKind) -> Result<Matrix> {
    match kind {
        StructureKind::ShortestPath => shortest_path_matrix(g),
        StructureKind::Adjacency => Ok(adjacency_matrix(g)),
    }
}

/// Measure of a graph with its attributes as vector features.
pub fn attributed_measure(g: &LabeledGraph, kind: StructureKind) -> Result<StructuredMeasure> {
    let attrs = g.attributes().ok_or(Error::MissingAttributes)?;
    build_measure(
        g.weights(),
        Features::Vectors(attrs.clone()),
        structure_matrix(g, kind)?,
    )
}

/// The two depth-3 binary trees plus the structure isomorphism between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrees {
    pub tree_a: LabeledGraph,
    pub tree_b: LabeledGraph,
    /// Node `i` of `tree_a` sits at node `isomorphism[i]` of `tree_b`.
    pub isomorphism: Vec<usize>,
}

pub const TREE_RED: f64 = 0.0;
pub const TREE_BLUE: f64 = 10.0;
pub const TREE_INTERNAL: f64 = 5.0;

/// Two 15-node complete binary trees with one scalar attribute per node.
///
/// Both carry four red and four blue leaves and the same internal values,
/// so their feature distributions coincide, and the trees are isomorphic.
/// In `tree_a` each depth-2 node has two leaves of one color (blue, red,
/// blue, red from left to right); in `tree_b` every depth-2 node has one
/// leaf of each color, so no isomorphism also preserves the features.
/// `tree_b` is stored under a fixed node shuffle.
pub fn gen_reference_trees() -> ReferenceTrees {
    const N: usize = 15;
    let edges: Vec<(usize, usize)> = (1..N).map(|v| ((v - 1) / 2, v)).collect();
    let feature = |leaf_colors: &[f64; 8], v: usize| {
        if v >= 7 {
            leaf_colors[v - 7]
        } else {
            TREE_INTERNAL
        }
    };
    let (r, b) = (TREE_RED, TREE_BLUE);
    let colors_a = [b, b, r, r, b, b, r, r];
    let colors_b = [b, r, b, r, b, r, b, r];

    let tree_a = LabeledGraph::new(N, edges.iter().copied())
        .and_then(|g| g.with_attributes(Matrix::from_fn(N, 1, |v, _| feature(&colors_a, v))))
        .expect("static tree is valid");
    let canonical_b = LabeledGraph::new(N, edges.iter().copied())
        .and_then(|g| g.with_attributes(Matrix::from_fn(N, 1, |v, _| feature(&colors_b, v))))
        .expect("static tree is valid");
    // 7 is coprime with 15, so this is a bijection.
    let shuffle: Vec<usize> = (0..N).map(|v| (7 * v + 3) % N).collect();
    let tree_b = permute_graph(&canonical_b, &shuffle).expect("shuffle is a permutation");
    ReferenceTrees {
        tree_a,
        tree_b,
        isomorphism: shuffle,
    }
}

/// Parameters of a stochastic block model graph with one scalar attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub communities: usize,
    pub nodes: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Attribute mean of each community.
    pub label_means: Vec<f64>,
    /// Attributes are the community mean plus uniform noise in
    /// `[-label_noise, label_noise]`.
    pub label_noise: f64,
    pub seed: u64,
}

pub const SBM_MAX_ATTEMPTS: usize = 200;

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.communities == 0 {
            return Err(Error::SpecInvalid("at least one community is required"));
        }
        if self.nodes < self.communities {
            return Err(Error::SpecInvalid("fewer nodes than communities"));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::SpecInvalid("need 0 <= p_out < p_in <= 1"));
        }
        if self.label_means.len() != self.communities {
            return Err(Error::SpecInvalid("one label mean per community"));
        }
        if !(self.label_noise >= 0.0 && self.label_noise.is_finite()) || self.label_means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::SpecInvalid("label means and noise must be finite, noise >= 0"));
        }
        Ok(())
    }

    /// Community of each node: contiguous blocks of near-equal size.
    pub fn community_of(&self, v: usize) -> usize {
        v * self.communities / self.nodes
    }
}

/// Samples an SBM graph, resampling until it is connected.
pub fn gen_sbm(spec: &SbmSpec) -> Result<LabeledGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes;
    for _ in 0..SBM_MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let p = if spec.community_of(a) == spec.community_of(b) {
                    spec.p_in
                } else {
                    spec.p_out
                };
                if rng.random::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        let attrs = Matrix::from_fn(n, 1, |v, _| {
            let noise = spec.label_noise * (2.0 * rng.random::<f64>() - 1.0);
            spec.label_means[spec.community_of(v)] + noise
        });
        let g = LabeledGraph::new(n, edges)?;
        if g.is_connected() {
            return g.with_attributes(attrs);
        }
    }
    Err(Error::ConnectivityRetriesExceeded(SBM_MAX_ATTEMPTS))
}

pub const SBM_GROUP_SIZES: [usize; 4] = [20, 30, 40, 50];
pub const SBM_GROUP_P_IN: f64 = 0.8;
pub const SBM_GROUP_P_OUT: f64 = 0.05;
pub const SBM_GROUP_LABEL_NOISE: f64 = 0.1;

/// A labelled collection of SBM graphs: `per_group` graphs for each entry of
/// `communities`, group `g` having `communities[g]` communities whose
/// attribute means are `0, 1, 2, ...`. Node counts are drawn uniformly from
/// [`SBM_GROUP_SIZES`]. Returns graphs with their group index, group-major.
pub fn gen_sbm_groups(communities: &[usize], per_group: usize, seed: u64) -> Result<Vec<(LabeledGraph, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(communities.len() * per_group);
    for (group, &c) in communities.iter().enumerate() {
        for _ in 0..per_group {
            let spec = SbmSpec {
                communities: c,
                nodes: SBM_GROUP_SIZES[rng.random_range(0..SBM_GROUP_SIZES.len())],
                p_in: SBM_GROUP_P_IN,
                p_out: SBM_GROUP_P_OUT,
                label_means: (0..c).map(|j| j as f64).collect(),
                label_noise: SBM_GROUP_LABEL_NOISE,
                seed: rng.random(),
            };
            out.push((gen_sbm(&spec)?, group));
        }
    }
    Ok(out)
}

/// A random recursive tree on `n` nodes plus independent extra edges with
/// probability `extra_edge_prob`; always connected.
pub fn random_connected_graph<R: Rng>(n: usize, extra_edge_prob: f64, rng: &mut R) -> LabeledGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < extra_edge_prob {
                edges.push((a, b));
            }
        }
    }
    LabeledGraph::new(n, edges).expect("generated edges are in range")
}
