//! Directories of JSON graphs.
//!
//! Every `*.json` file other than `labels.json` and `manifest.json` is a
//! graph; graphs are ordered by file name. `labels.json` optionally maps file
//! names to integer classes, and `manifest.json` records how a converted
//! dataset should be turned into measures.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fgw_core::graphs::LabeledGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::to_json_string;
use crate::graph_json::{read_graph, write_graph};

pub const LABELS_FILE: &str = "labels.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub structure: String,
    pub feature: String,
    pub largest_component: bool,
    pub graphs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDir {
    pub names: Vec<String>,
    pub graphs: Vec<LabeledGraph>,
    pub labels: Option<Vec<i64>>,
    pub manifest: Option<Manifest>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn graph_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if path.is_file() && name.ends_with(".json") && name != LABELS_FILE && name != MANIFEST_FILE {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_graph_dir(dir: &Path) -> Result<GraphDir> {
    let files = graph_files(dir)?;
    if files.is_empty() {
        return Err(Error::InvalidGraph {
            path: dir.to_path_buf(),
            message: "directory holds no graph files".into(),
        });
    }
    read_graph_files(&files, Some(dir))
}

/// Reads the given graph files; `labels.json` and `manifest.json` are taken
/// from `dir` when present.
pub fn read_graph_files(files: &[PathBuf], dir: Option<&Path>) -> Result<GraphDir> {
    let names: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
        })
        .collect();
    let graphs = files.iter().map(|p| read_graph(p)).collect::<Result<Vec<_>>>()?;
    let mut labels = None;
    let mut manifest = None;
    if let Some(dir) = dir {
        let path = dir.join(LABELS_FILE);
        if path.exists() {
            let map: BTreeMap<String, i64> = read_json(&path)?;
            let ordered = names
                .iter()
                .map(|n| map.get(n).copied())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::InvalidGraph {
                    path: path.clone(),
                    message: "a graph file has no label".into(),
                })?;
            labels = Some(ordered);
        }
        let path = dir.join(MANIFEST_FILE);
        if path.exists() {
            manifest = Some(read_json(&path)?);
        }
    }
    Ok(GraphDir {
        names,
        graphs,
        labels,
        manifest,
    })
}

/// File names `{prefix}_0000.json, ...`, which sort in index order.
pub fn indexed_names(prefix: &str, count: usize) -> Vec<String> {
    let width = count.saturating_sub(1).to_string().len().max(4);
    (0..count).map(|i| format!("{prefix}_{i:0width$}.json")).collect()
}

pub fn write_graph_dir(
    dir: &Path,
    names: &[String],
    graphs: &[LabeledGraph],
    labels: Option<&[i64]>,
    manifest: Option<&Manifest>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, g) in names.iter().zip(graphs) {
        write_graph(&dir.join(name), g)?;
    }
    if let Some(labels) = labels {
        let map: BTreeMap<&str, i64> = names.iter().map(String::as_str).zip(labels.iter().copied()).collect();
        let path = dir.join(LABELS_FILE);
        fs::write(&path, to_json_string(&map)).map_err(|e| Error::io(&path, e))?;
    }
    if let Some(manifest) = manifest {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, to_json_string(manifest)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
