//! Reader for the text format of the public graph-benchmark collection.
//!
//! A dataset `NAME` is a directory holding
//!
//! - `NAME_A.txt`: one `a, b` edge per line, 1-based global node ids;
//! - `NAME_graph_indicator.txt`: the 1-based graph id of every node;
//! - `NAME_graph_labels.txt`: one integer class per graph;
//! - optionally `NAME_node_labels.txt` (one integer per node) and
//!   `NAME_node_attributes.txt` (comma-separated floats per node).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use fgw_core::graphs::{LabeledGraph, StructureKind};
use fgw_core::{Executor, Matrix, StructuredMeasure};

use crate::convert::{measures_from_graphs, FeatureMode};
use crate::error::{DatasetError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Edges listed in one direction only; they are symmetrized.
    pub one_way_edges: usize,
    /// Self-loops, which are dropped.
    pub self_loops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<LabeledGraph>,
    pub graph_labels: Vec<i64>,
    pub has_node_labels: bool,
    pub has_node_attributes: bool,
    pub report: ParseReport,
}

impl GraphDataset {
    pub fn node_count(&self) -> usize {
        self.graphs.iter().map(LabeledGraph::node_count).sum()
    }
}

struct Lines {
    file: String,
    /// `(1-based line number, trimmed content)`; trailing blank lines removed.
    lines: Vec<(usize, String)>,
}

impl Lines {
    fn malformed(&self, line: usize, message: impl Into<String>) -> DatasetError {
        DatasetError::MalformedLine {
            file: self.file.clone(),
            line,
            message: message.into(),
        }
    }
}

fn read_lines(path: &Path, required: bool) -> std::result::Result<Option<Lines>, DatasetError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(_) if !required && !path.exists() => return Ok(None),
        Err(_) => return Err(DatasetError::MissingFile(path.to_path_buf())),
    };
    let mut lines: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.is_empty()) {
        lines.pop();
    }
    let file = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
    let out = Lines { file, lines };
    if let Some((n, _)) = out.lines.iter().find(|(_, l)| l.is_empty()) {
        return Err(out.malformed(*n, "blank line"));
    }
    Ok(Some(out))
}

fn parse_int(lines: &Lines, line: usize, field: &str) -> std::result::Result<i64, DatasetError> {
    field
        .trim()
        .parse()
        .map_err(|_| lines.malformed(line, format!("expected an integer, found `{}`", field.trim())))
}

fn file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

pub fn parse_tudataset(dir: &Path, name: &str) -> std::result::Result<GraphDataset, DatasetError> {
    let indicator = read_lines(&file(dir, name, "graph_indicator"), true)?.expect("required");
    let adjacency = read_lines(&file(dir, name, "A"), true)?.expect("required");
    let class_lines = read_lines(&file(dir, name, "graph_labels"), true)?.expect("required");
    let node_labels = read_lines(&file(dir, name, "node_labels"), false)?;
    let node_attributes = read_lines(&file(dir, name, "node_attributes"), false)?;

    // Graph of every node; ids must run 1, 1, ..., 2, 2, ... without gaps.
    let mut graph_of = Vec::with_capacity(indicator.lines.len());
    let mut graph_count = 0usize;
    for (line, text) in &indicator.lines {
        let id = parse_int(&indicator, *line, text)?;
        if id < 1 {
            return Err(DatasetError::IndexOutOfRange {
                file: indicator.file.clone(),
                line: *line,
                value: id,
            });
        }
        let id = (id - 1) as usize;
        if id + 1 < graph_count || id > graph_count {
            return Err(DatasetError::InconsistentCounts(format!(
                "{}:{line}: graph ids must be contiguous blocks in increasing order",
                indicator.file
            )));
        }
        graph_count = graph_count.max(id + 1);
        graph_of.push(id);
    }
    let n = graph_of.len();
    let mut first_node = vec![0usize; graph_count + 1];
    for &g in &graph_of {
        first_node[g + 1] += 1;
    }
    for g in 0..graph_count {
        first_node[g + 1] += first_node[g];
    }

    let graph_labels: Vec<i64> = class_lines
        .lines
        .iter()
        .map(|(line, text)| parse_int(&class_lines, *line, text))
        .collect::<std::result::Result<_, _>>()?;
    if graph_labels.len() != graph_count {
        return Err(DatasetError::InconsistentCounts(format!(
            "{} graph labels for {graph_count} graphs",
            graph_labels.len()
        )));
    }

    let mut report = ParseReport::default();
    let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (line, text) in &adjacency.lines {
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 2 {
            return Err(adjacency.malformed(*line, "expected `a, b`"));
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            let v = parse_int(&adjacency, *line, field)?;
            if v < 1 || v as usize > n {
                return Err(DatasetError::IndexOutOfRange {
                    file: adjacency.file.clone(),
                    line: *line,
                    value: v,
                });
            }
            *slot = (v - 1) as usize;
        }
        let [a, b] = ends;
        if graph_of[a] != graph_of[b] {
            return Err(DatasetError::InconsistentCounts(format!(
                "{}:{line}: edge joins graphs {} and {}",
                adjacency.file,
                graph_of[a] + 1,
                graph_of[b] + 1
            )));
        }
        if a == b {
            report.self_loops += 1;
            continue;
        }
        directed.insert((a, b));
    }
    report.one_way_edges = directed.iter().filter(|&&(a, b)| !directed.contains(&(b, a))).count();
    if report.one_way_edges > 0 {
        log::warn!("{name}: {} edges listed in one direction only", report.one_way_edges);
    }
    if report.self_loops > 0 {
        log::warn!("{name}: dropped {} self-loops", report.self_loops);
    }

    let labels = match &node_labels {
        Some(lines) => {
            if lines.lines.len() != n {
                return Err(DatasetError::InconsistentCounts(format!(
                    "{} node labels for {n} nodes",
                    lines.lines.len()
                )));
            }
            let parsed: Vec<i64> = lines
                .lines
                .iter()
                .map(|(line, text)| parse_int(lines, *line, text))
                .collect::<std::result::Result<_, _>>()?;
            Some(parsed)
        }
        None => None,
    };
    let attributes = match &node_attributes {
        Some(lines) => {
            if lines.lines.len() != n {
                return Err(DatasetError::InconsistentCounts(format!(
                    "{} attribute rows for {n} nodes",
                    lines.lines.len()
                )));
            }
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
            for (line, text) in &lines.lines {
                let row = text
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| lines.malformed(*line, "expected comma-separated finite floats"))?;
                if rows.first().is_some_and(|r| r.len() != row.len()) {
                    return Err(lines.malformed(*line, "attribute rows differ in length"));
                }
                rows.push(row);
            }
            Some(rows)
        }
        None => None,
    };

    let mut edges_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for &(a, b) in &directed {
        let g = graph_of[a];
        edges_of[g].push((a - first_node[g], b - first_node[g]));
    }
    let mut graphs = Vec::with_capacity(graph_count);
    for (g, edges) in edges_of.into_iter().enumerate() {
        let (lo, hi) = (first_node[g], first_node[g + 1]);
        let invalid = |e: fgw_core::Error| DatasetError::InconsistentCounts(format!("graph {}: {e}", g + 1));
        let mut graph = LabeledGraph::new(hi - lo, edges).map_err(invalid)?;
        if let Some(labels) = &labels {
            graph = graph.with_labels(labels[lo..hi].to_vec()).map_err(invalid)?;
        }
        if let Some(rows) = &attributes {
            let attrs = Matrix::from_rows(&rows[lo..hi]).expect("rows checked to share one length");
            graph = graph.with_attributes(attrs).map_err(invalid)?;
        }
        graphs.push(graph);
    }

    Ok(GraphDataset {
        name: name.to_string(),
        graphs,
        graph_labels,
        has_node_labels: labels.is_some(),
        has_node_attributes: attributes.is_some(),
        report,
    })
}

/// Uniform-weight measures for every graph of the dataset.
pub fn measures_from_dataset<E: Executor>(
    executor: &E,
    ds: &GraphDataset,
    structure: StructureKind,
    features: FeatureMode,
    largest_component: bool,
) -> Result<Vec<StructuredMeasure>> {
    match features {
        FeatureMode::Attributes if !ds.has_node_attributes => {
            return Err(DatasetError::FeatureModeUnavailable("l2").into())
        }
        FeatureMode::RawLabels if !ds.has_node_labels => {
            return Err(DatasetError::FeatureModeUnavailable("label").into())
        }
        FeatureMode::Wl(_) if !ds.has_node_labels => return Err(DatasetError::FeatureModeUnavailable("wl").into()),
        _ => {}
    }
    measures_from_graphs(executor, &ds.graphs, structure, features, largest_component)
}
