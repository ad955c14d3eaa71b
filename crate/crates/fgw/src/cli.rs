//! The `fgw` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fgw_core::barycenter::{solve_barycenter_with, BarycenterProblem, DEFAULT_OUTER_ITERS};
use fgw_core::fgw::{DEFAULT_MAX_ITER, DEFAULT_REL_TOL};
use fgw_core::graphs::{gen_reference_trees, gen_sbm_groups, LabeledGraph, StructureKind};
use fgw_core::learn::{
    adjusted_rand_index, cross_fgw_matrix, fgw_kernel, kmeans_graphs, knn_predict, pairwise_fgw_matrix, CentroidSize,
    KMeansConfig, DEFAULT_CENTROID_ITERS, DEFAULT_KMEANS_ITERS, DEFAULT_RESTARTS, DEFAULT_THRESHOLD,
};
use fgw_core::{solve_fgw, Coupling, FgwParams, Matrix, Start, StructuredMeasure};
use serde::{Deserialize, Serialize};

use crate::convert::{measures_from_graphs, parse_structure, structure_name, FeatureMode};
use crate::error::{exit, Error, Result};
use crate::export::{matrix_rows, matrix_to_csv, to_json_string};
use crate::graph_dir::{indexed_names, read_graph_dir, read_graph_files, write_graph_dir, GraphDir, Manifest};
use crate::graph_json::{read_graph, write_graph};
use crate::pool::Pool;
use crate::tudataset::parse_tudataset;

#[derive(Debug, Parser)]
#[command(
    name = "fgw",
    version,
    about = "Fused Gromov-Wasserstein distances between attributed graphs"
)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = parse_count)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// FGW distance between two graphs.
    Dist(DistArgs),
    /// FGW barycenter of a set of graphs.
    Barycenter(BarycenterArgs),
    /// k-means clustering of graphs with barycenter centroids.
    Cluster(ClusterArgs),
    /// k-nearest-neighbour classification by FGW distance.
    Knn(KnnArgs),
    /// Pairwise FGW distances and the kernel exp(-gamma * FGW).
    Kernel(KernelArgs),
    /// Synthetic graph generators.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Benchmark dataset tools.
    #[command(subcommand)]
    Dataset(DatasetCommand),
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("{a} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive"))
    }
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StartName {
    Product,
    Wasserstein,
    Gw,
}

fn parse_start(s: &str) -> std::result::Result<StartName, String> {
    match s {
        "product" => Ok(StartName::Product),
        "wasserstein" => Ok(StartName::Wasserstein),
        "gw" => Ok(StartName::Gw),
        _ => Err(format!("unknown start `{s}` (expected product, wasserstein or gw)")),
    }
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Structure matrix: shortest-path hops or adjacency.
    #[arg(long, value_parser = parse_structure)]
    structure: Option<StructureKind>,
    /// Node features: l2 (attributes), label, wl:H or none; defaults to the
    /// manifest or to what the graphs carry.
    #[arg(long)]
    feature: Option<FeatureMode>,
    /// Keep only the largest connected component of each graph.
    #[arg(long)]
    largest_component: bool,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Trade-off between features (0) and structure (1).
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Exponent of the ground costs.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
    q: u32,
    /// Comma-separated starting couplings.
    #[arg(long, value_delimiter = ',', value_parser = parse_start, default_value = "product")]
    starts: Vec<StartName>,
    /// Relative loss decrease below which the solver stops.
    #[arg(long, default_value_t = DEFAULT_REL_TOL, value_parser = parse_positive)]
    tol: f64,
    /// Iteration limit per start.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER, value_parser = parse_count)]
    max_iter: usize,
}

impl SolverArgs {
    fn params(&self) -> Result<FgwParams> {
        let starts = self
            .starts
            .iter()
            .map(|s| match s {
                StartName::Product => Start::Product,
                StartName::Wasserstein => Start::Wasserstein,
                StartName::Gw => Start::GromovWasserstein,
            })
            .collect();
        Ok(FgwParams::new(self.q, self.alpha)?
            .with_starts(starts)
            .with_tolerance(self.tol, self.max_iter))
    }

    fn start_names(&self) -> Vec<&'static str> {
        self.starts
            .iter()
            .map(|s| match s {
                StartName::Product => "product",
                StartName::Wasserstein => "wasserstein",
                StartName::Gw => "gw",
            })
            .collect()
    }
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Extra starting coupling: a JSON node mapping `[j_0, j_1, ...]` from
    /// A to B, or a JSON matrix.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BarycenterArgs {
    /// A directory of graphs or a comma-separated list of graph files.
    #[arg(long)]
    inputs: String,
    /// Number of barycenter nodes.
    #[arg(long, value_parser = parse_count)]
    n: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, conflicts_with = "fix_structure")]
    fix_features: bool,
    #[arg(long)]
    fix_structure: bool,
    /// Start each coupling solve from the previous coupling only.
    #[arg(long)]
    warm_start: bool,
    #[arg(long, default_value_t = DEFAULT_OUTER_ITERS)]
    outer_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long, value_parser = parse_count)]
    k: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Nodes per centroid; by default each centroid matches its seed graph.
    #[arg(long, value_parser = parse_count)]
    centroid_nodes: Option<usize>,
    /// Centroid edges join nodes whose structure entry is at most this.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_KMEANS_ITERS)]
    lloyd_iters: usize,
    #[arg(long, default_value_t = DEFAULT_CENTROID_ITERS)]
    centroid_iters: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS, value_parser = parse_count)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct KnnArgs {
    /// Training graphs; the directory must hold `labels.json`.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_parser = parse_count)]
    k: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    gamma: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Also write the distance matrix here.
    #[arg(long)]
    distances: Option<PathBuf>,
    /// `.json` writes JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// The two attributed trees with identical structure and feature multisets.
    Trees {
        #[arg(long)]
        out: PathBuf,
    },
    /// Groups of stochastic block model graphs.
    Sbm {
        /// Comma-separated community count of each group.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_count)]
        groups: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        per_group: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Converts a text-format benchmark dataset to a directory of JSON graphs.
    Convert {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, value_parser = parse_structure, default_value = "sp")]
        structure: StructureKind,
        #[arg(long)]
        feature: Option<FeatureMode>,
        #[arg(long)]
        largest_component: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("FGW_LOG", "warn")).try_init();
    let pool = Pool::new(cli.workers);
    match execute(cli.command, &pool) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn execute(command: Command, pool: &Pool) -> Result<()> {
    match command {
        Command::Dist(args) => dist(args, pool),
        Command::Barycenter(args) => barycenter(args, pool),
        Command::Cluster(args) => cluster(args, pool),
        Command::Knn(args) => knn(args, pool),
        Command::Kernel(args) => kernel(args, pool),
        Command::Gen(GenCommand::Trees { out }) => gen_trees(&out),
        Command::Gen(GenCommand::Sbm {
            groups,
            per_group,
            seed,
            out,
        }) => gen_sbm(&groups, per_group, seed, &out),
        Command::Dataset(DatasetCommand::Convert {
            dir,
            name,
            structure,
            feature,
            largest_component,
            out,
        }) => convert(&dir, &name, structure, feature, largest_component, &out, pool),
    }
}

/// Resolved measure settings: flags first, then the manifest, then defaults.
struct MeasureSettings {
    structure: StructureKind,
    feature: FeatureMode,
    largest_component: bool,
}

impl MeasureArgs {
    fn resolve(&self, graphs: &[LabeledGraph], manifest: Option<&Manifest>) -> Result<MeasureSettings> {
        let structure = match (self.structure, manifest) {
            (Some(s), _) => s,
            (None, Some(m)) => parse_structure(&m.structure).map_err(Error::Usage)?,
            (None, None) => StructureKind::ShortestPath,
        };
        let feature = match (self.feature, manifest) {
            (Some(f), _) => f,
            (None, Some(m)) => m.feature.parse().map_err(Error::Usage)?,
            (None, None) => FeatureMode::auto(graphs),
        };
        Ok(MeasureSettings {
            structure,
            feature,
            largest_component: self.largest_component || manifest.is_some_and(|m| m.largest_component),
        })
    }

    fn measures(
        &self,
        pool: &Pool,
        graphs: &[LabeledGraph],
        manifest: Option<&Manifest>,
    ) -> Result<(Vec<StructuredMeasure>, MeasureSettings)> {
        let settings = self.resolve(graphs, manifest)?;
        log::info!(
            "building {} measures ({}, {})",
            graphs.len(),
            structure_name(settings.structure),
            settings.feature
        );
        let measures = measures_from_graphs(
            pool,
            graphs,
            settings.structure,
            settings.feature,
            settings.largest_component,
        )?;
        Ok((measures, settings))
    }
}

fn read_inputs(spec: &str) -> Result<GraphDir> {
    let path = Path::new(spec);
    if path.is_dir() {
        return read_graph_dir(path);
    }
    let files: Vec<PathBuf> = spec.split(',').filter(|s| !s.is_empty()).map(PathBuf::from).collect();
    if files.is_empty() {
        return Err(Error::Usage("--inputs names no graphs".into()));
    }
    read_graph_files(&files, None)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InitFile {
    Mapping(Vec<usize>),
    Matrix(Vec<Vec<f64>>),
}

fn read_init(path: &Path, mu: &StructuredMeasure, nu: &StructuredMeasure) -> Result<Coupling> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let init: InitFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |message: &str| Error::InvalidGraph {
        path: path.to_path_buf(),
        message: message.into(),
    };
    let matrix = match init {
        InitFile::Mapping(map) => {
            if map.len() != mu.len() || map.iter().any(|&j| j >= nu.len()) {
                return Err(bad("mapping must send every node of A to a node of B"));
            }
            let mut m = Matrix::zeros(mu.len(), nu.len());
            for (i, &j) in map.iter().enumerate() {
                m[(i, j)] = mu.weights()[i];
            }
            m
        }
        InitFile::Matrix(rows) => Matrix::from_rows(&rows).ok_or_else(|| bad("ragged coupling matrix"))?,
    };
    Ok(Coupling::new(matrix, mu.weights(), nu.weights())?)
}

#[derive(Serialize)]
struct DistOutput {
    loss: f64,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
    coupling: Vec<Vec<f64>>,
    alpha: f64,
    q: u32,
    starts: Vec<&'static str>,
}

fn dist(args: DistArgs, pool: &Pool) -> Result<()> {
    let graphs = [read_graph(&args.a)?, read_graph(&args.b)?];
    let (measures, _) = args.measure.measures(pool, &graphs, None)?;
    let mut params = args.solver.params()?;
    let mut starts = args.solver.start_names();
    if let Some(init) = &args.init {
        let given = read_init(init, &measures[0], &measures[1])?;
        params.starts.push(Start::Given(given));
        starts.push("given");
    }
    let result = solve_fgw(&measures[0], &measures[1], &params)?;
    log::info!("loss {} after {} iterations", result.loss, result.iterations);
    let out = DistOutput {
        loss: result.loss,
        converged: result.converged,
        iterations: result.iterations,
        trace: result.loss_trace,
        coupling: matrix_rows(result.coupling.matrix()),
        alpha: params.alpha,
        q: params.q,
        starts,
    };
    write_file(&args.out, &to_json_string(&out))
}

#[derive(Serialize)]
struct BarycenterOutput {
    objective: f64,
    trace: Vec<f64>,
    inputs: Vec<String>,
    weights: Vec<f64>,
    structure: Vec<Vec<f64>>,
    features: Vec<Vec<f64>>,
    couplings: Vec<Vec<Vec<f64>>>,
}

fn barycenter(args: BarycenterArgs, pool: &Pool) -> Result<()> {
    if args.solver.q != 2 {
        return Err(Error::Usage("barycenters support --q 2 only".into()));
    }
    let dir = read_inputs(&args.inputs)?;
    let (measures, _) = args.measure.measures(pool, &dir.graphs, dir.manifest.as_ref())?;
    let mut problem = BarycenterProblem::new(&measures, args.n, args.solver.alpha)?;
    problem.inner = args.solver.params()?;
    problem.outer_iters = args.outer_iters;
    problem.fix_features = args.fix_features;
    problem.fix_structure = args.fix_structure;
    problem.warm_start = args.warm_start;
    let state = solve_barycenter_with(pool, &problem, None, args.seed)?;
    let out = BarycenterOutput {
        objective: state.objective,
        trace: state.trace,
        inputs: dir.names,
        weights: problem.weights.as_slice().to_vec(),
        structure: matrix_rows(&state.structure),
        features: matrix_rows(&state.features),
        couplings: state.couplings.iter().map(|c| matrix_rows(c.matrix())).collect(),
    };
    write_file(&args.out, &to_json_string(&out))
}

#[derive(Serialize)]
struct CentroidOutput {
    size: usize,
    objective: f64,
    structure: Vec<Vec<f64>>,
    features: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct ClusterOutput {
    names: Vec<String>,
    assignments: Vec<usize>,
    inertia: Vec<f64>,
    iterations: usize,
    converged: bool,
    seeds: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjusted_rand_index: Option<f64>,
    centroids: Vec<CentroidOutput>,
}

fn cluster(args: ClusterArgs, pool: &Pool) -> Result<()> {
    if args.solver.q != 2 {
        return Err(Error::Usage("clustering supports --q 2 only".into()));
    }
    let dir = read_graph_dir(&args.inputs)?;
    let (measures, _) = args.measure.measures(pool, &dir.graphs, dir.manifest.as_ref())?;
    let size = args.centroid_nodes.map_or(CentroidSize::MatchSeed, CentroidSize::Fixed);
    let mut config = KMeansConfig::new(args.k, args.solver.alpha, size)?;
    config.params = args.solver.params()?;
    config.threshold = args.threshold;
    config.max_iters = args.lloyd_iters;
    config.centroid_iters = args.centroid_iters;
    config.restarts = args.restarts;
    config.seed = args.seed;
    let result = kmeans_graphs(pool, &measures, &config)?;
    let ari = match &dir.labels {
        Some(labels) => {
            let truth = dense_ids(labels);
            Some(adjusted_rand_index(&result.assignments, &truth)?)
        }
        None => None,
    };
    let centroids = result
        .centroids
        .iter()
        .zip(&result.adjacency)
        .map(|(c, edges)| CentroidOutput {
            size: c.structure.rows(),
            objective: c.objective,
            structure: matrix_rows(&c.structure),
            features: matrix_rows(&c.features),
            edges: edges.iter().map(|&(a, b)| [a, b]).collect(),
        })
        .collect();
    let out = ClusterOutput {
        names: dir.names,
        assignments: result.assignments,
        inertia: result.inertia,
        iterations: result.iterations,
        converged: result.converged,
        seeds: result.seeds,
        adjusted_rand_index: ari,
        centroids,
    };
    write_file(&args.out, &to_json_string(&out))
}

/// Maps arbitrary integer labels to `0..` in order of first appearance.
fn dense_ids(labels: &[i64]) -> Vec<usize> {
    let mut seen: Vec<i64> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(i) => i,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

#[derive(Serialize)]
struct KnnOutput {
    names: Vec<String>,
    predictions: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
}

fn knn(args: KnnArgs, pool: &Pool) -> Result<()> {
    let train = read_graph_dir(&args.train)?;
    let test = read_graph_dir(&args.test)?;
    let train_labels = train.labels.clone().ok_or_else(|| Error::InvalidGraph {
        path: args.train.clone(),
        message: "training directory has no labels.json".into(),
    })?;
    // One collection so that label dictionaries are shared.
    let all: Vec<LabeledGraph> = train.graphs.iter().chain(&test.graphs).cloned().collect();
    let (measures, _) = args.measure.measures(pool, &all, train.manifest.as_ref())?;
    let (train_m, test_m) = measures.split_at(train.graphs.len());
    let params = args.solver.params()?;
    let distances = cross_fgw_matrix(pool, test_m, train_m, &params)?;
    let predictions = knn_predict(&distances, &train_labels, args.k)?;
    let accuracy = test.labels.as_ref().map(|truth| {
        let hits = truth.iter().zip(&predictions).filter(|(a, b)| a == b).count();
        hits as f64 / truth.len() as f64
    });
    let out = KnnOutput {
        names: test.names,
        predictions,
        accuracy,
    };
    write_file(&args.out, &to_json_string(&out))
}

#[derive(Serialize)]
struct MatrixOutput<'a> {
    names: &'a [String],
    alpha: f64,
    q: u32,
    starts: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    values: Vec<Vec<f64>>,
}

fn kernel(args: KernelArgs, pool: &Pool) -> Result<()> {
    let dir = read_graph_dir(&args.inputs)?;
    let (measures, settings) = args.measure.measures(pool, &dir.graphs, dir.manifest.as_ref())?;
    let params = args.solver.params()?;
    let d = pairwise_fgw_matrix(pool, &measures, &params)?;
    let k = fgw_kernel(&d.values, args.gamma)?;
    let starts = args.solver.start_names();
    let metadata = |gamma: Option<f64>| {
        let mut meta = vec![
            ("alpha", params.alpha.to_string()),
            ("q", params.q.to_string()),
            ("starts", starts.join("+")),
            ("structure", structure_name(settings.structure).to_string()),
            ("feature", settings.feature.to_string()),
        ];
        if let Some(g) = gamma {
            meta.insert(0, ("kind", "kernel".to_string()));
            meta.push(("gamma", g.to_string()));
        } else {
            meta.insert(0, ("kind", "distance".to_string()));
        }
        meta
    };
    let render = |path: &Path, m: &Matrix, gamma: Option<f64>| {
        if path.extension().is_some_and(|e| e == "json") {
            to_json_string(&MatrixOutput {
                names: &dir.names,
                alpha: params.alpha,
                q: params.q,
                starts: starts.clone(),
                gamma,
                values: matrix_rows(m),
            })
        } else {
            matrix_to_csv(m, &metadata(gamma), Some(&dir.names))
        }
    };
    if let Some(path) = &args.distances {
        write_file(path, &render(path, &d.values, None))?;
    }
    write_file(&args.out, &render(&args.out, &k, Some(args.gamma)))
}

fn gen_trees(out: &Path) -> Result<()> {
    let trees = gen_reference_trees();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_graph(&out.join("tree_a.json"), &trees.tree_a)?;
    write_graph(&out.join("tree_b.json"), &trees.tree_b)?;
    write_file(&out.join("isomorphism.json"), &to_json_string(&trees.isomorphism))
}

fn gen_sbm(groups: &[usize], per_group: usize, seed: u64, out: &Path) -> Result<()> {
    let data = gen_sbm_groups(groups, per_group, seed)?;
    let names = indexed_names("graph", data.len());
    let graphs: Vec<LabeledGraph> = data.iter().map(|(g, _)| g.clone()).collect();
    let labels: Vec<i64> = data.iter().map(|&(_, l)| l as i64).collect();
    write_graph_dir(out, &names, &graphs, Some(&labels), None)
}

fn convert(
    dir: &Path,
    name: &str,
    structure: StructureKind,
    feature: Option<FeatureMode>,
    largest_component: bool,
    out: &Path,
    pool: &Pool,
) -> Result<()> {
    let ds = parse_tudataset(dir, name)?;
    log::info!("{name}: {} graphs, {} nodes", ds.graphs.len(), ds.node_count());
    let feature = feature.unwrap_or_else(|| FeatureMode::auto(&ds.graphs));
    // Building the measures validates the requested settings.
    crate::tudataset::measures_from_dataset(pool, &ds, structure, feature, largest_component)?;
    let graphs = if largest_component {
        crate::convert::largest_components(&ds.graphs)?
    } else {
        ds.graphs.clone()
    };
    let names = indexed_names(name, graphs.len());
    let manifest = Manifest {
        name: name.to_string(),
        structure: structure_name(structure).to_string(),
        feature: feature.to_string(),
        largest_component: false,
        graphs: graphs.len(),
    };
    write_graph_dir(out, &names, &graphs, Some(&ds.graph_labels), Some(&manifest))
}
