//! JSON encoding of attributed graphs.
//!
//! ```json
//! {"nodes": [{"id": 0, "label": 3, "attributes": [0.5], "weight": 0.5}, {"id": 1}],
//!  "edges": [[0, 1]]}
//! ```
//!
//! Node ids must be `0..n` in some order. `label`, `attributes` and `weight`
//! are each either given on every node or on none.

use std::fs;
use std::path::Path;

use fgw_core::graphs::LabeledGraph;
use fgw_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::to_json_string;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
}

fn all_or_none<T>(items: Vec<Option<T>>, what: &str) -> std::result::Result<Option<Vec<T>>, String> {
    let present = items.iter().filter(|x| x.is_some()).count();
    if present == 0 {
        Ok(None)
    } else if present == items.len() {
        Ok(Some(items.into_iter().flatten().collect()))
    } else {
        Err(format!("{what} must be given on every node or on none"))
    }
}

impl GraphRecord {
    pub fn to_graph(&self) -> std::result::Result<LabeledGraph, String> {
        let n = self.nodes.len();
        let mut slot = vec![usize::MAX; n];
        for (pos, node) in self.nodes.iter().enumerate() {
            if node.id >= n || slot[node.id] != usize::MAX {
                return Err(format!("node ids must be 0..{n}, each once (bad id {})", node.id));
            }
            slot[node.id] = pos;
        }
        let ordered: Vec<&NodeRecord> = slot.iter().map(|&p| &self.nodes[p]).collect();
        let mut g = LabeledGraph::new(n, self.edges.iter().map(|e| (e[0], e[1]))).map_err(|e| e.to_string())?;
        if let Some(labels) = all_or_none(ordered.iter().map(|v| v.label).collect(), "label")? {
            g = g.with_labels(labels).map_err(|e| e.to_string())?;
        }
        if let Some(rows) = all_or_none(ordered.iter().map(|v| v.attributes.clone()).collect(), "attributes")? {
            let attrs = Matrix::from_rows(&rows).ok_or("attribute vectors must share one length")?;
            g = g.with_attributes(attrs).map_err(|e| e.to_string())?;
        }
        if let Some(weights) = all_or_none(ordered.iter().map(|v| v.weight).collect(), "weight")? {
            g = g.with_weights(weights).map_err(|e| e.to_string())?;
        }
        Ok(g)
    }

    pub fn from_graph(g: &LabeledGraph) -> Self {
        let nodes = (0..g.node_count())
            .map(|v| NodeRecord {
                id: v,
                label: g.labels().map(|l| l[v]),
                attributes: g.attributes().map(|a| a.row(v).to_vec()),
                weight: g.weights().map(|w| w[v]),
            })
            .collect();
        Self {
            nodes,
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

pub fn parse_graph(text: &str) -> std::result::Result<LabeledGraph, String> {
    let record: GraphRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
    record.to_graph()
}

pub fn read_graph(path: &Path) -> Result<LabeledGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let record: GraphRecord = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    record.to_graph().map_err(|message| Error::InvalidGraph {
        path: path.to_path_buf(),
        message,
    })
}

pub fn graph_to_json(g: &LabeledGraph) -> String {
    to_json_string(&GraphRecord::from_graph(g))
}

pub fn write_graph(path: &Path, g: &LabeledGraph) -> Result<()> {
    fs::write(path, graph_to_json(g)).map_err(|e| Error::io(path, e))
}
