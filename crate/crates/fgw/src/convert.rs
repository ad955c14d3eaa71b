//! From graphs to structured measures.

use std::fmt;
use std::str::FromStr;

use fgw_core::graphs::{structure_matrix, wl_relabel_collection, LabeledGraph, StructureKind};
use fgw_core::{build_measure, Executor, Features, StructuredMeasure};

use crate::error::{DatasetError, Error, Result};

/// How node features are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Real attribute vectors, compared with the Euclidean distance.
    Attributes,
    /// Discrete labels, compared by equality.
    RawLabels,
    /// Weisfeiler-Lehman label sequences of `H` refinements, compared by
    /// the number of mismatching positions.
    Wl(usize),
    /// No features: only structure is compared.
    None,
}

impl FeatureMode {
    /// Attributes if every graph has them, else labels if every graph has
    /// them, else none.
    pub fn auto(graphs: &[LabeledGraph]) -> Self {
        if !graphs.is_empty() && graphs.iter().all(|g| g.attributes().is_some()) {
            FeatureMode::Attributes
        } else if !graphs.is_empty() && graphs.iter().all(|g| g.labels().is_some()) {
            FeatureMode::RawLabels
        } else {
            FeatureMode::None
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::Attributes => f.write_str("l2"),
            FeatureMode::RawLabels => f.write_str("label"),
            FeatureMode::Wl(h) => write!(f, "wl:{h}"),
            FeatureMode::None => f.write_str("none"),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l2" => Ok(FeatureMode::Attributes),
            "label" => Ok(FeatureMode::RawLabels),
            "none" => Ok(FeatureMode::None),
            _ => s
                .strip_prefix("wl:")
                .and_then(|h| h.parse().ok())
                .map(FeatureMode::Wl)
                .ok_or_else(|| format!("unknown feature mode `{s}` (expected l2, label, wl:H or none)")),
        }
    }
}

pub fn parse_structure(s: &str) -> std::result::Result<StructureKind, String> {
    match s {
        "sp" => Ok(StructureKind::ShortestPath),
        "adj" => Ok(StructureKind::Adjacency),
        _ => Err(format!("unknown structure `{s}` (expected sp or adj)")),
    }
}

pub fn structure_name(kind: StructureKind) -> &'static str {
    match kind {
        StructureKind::ShortestPath => "sp",
        StructureKind::Adjacency => "adj",
    }
}

/// Replaces every graph by its largest connected component.
pub fn largest_components(graphs: &[LabeledGraph]) -> Result<Vec<LabeledGraph>> {
    graphs.iter().map(|g| Ok(g.largest_component()?.0)).collect()
}

/// Builds one measure per graph. WL labels share one dictionary across the
/// whole collection so that ids are comparable between graphs.
pub fn measures_from_graphs<E: Executor>(
    executor: &E,
    graphs: &[LabeledGraph],
    structure: StructureKind,
    features: FeatureMode,
    largest_component: bool,
) -> Result<Vec<StructuredMeasure>> {
    let reduced;
    let graphs = if largest_component {
        reduced = largest_components(graphs)?;
        &reduced[..]
    } else {
        graphs
    };
    let features: Vec<Features> = match features {
        FeatureMode::Attributes => {
            if graphs.iter().any(|g| g.attributes().is_none()) {
                return Err(DatasetError::FeatureModeUnavailable("l2").into());
            }
            graphs
                .iter()
                .map(|g| Features::Vectors(g.attributes().expect("checked above").clone()))
                .collect()
        }
        FeatureMode::RawLabels | FeatureMode::Wl(_) => {
            if graphs.iter().any(|g| g.labels().is_none()) {
                let name = if features == FeatureMode::RawLabels {
                    "label"
                } else {
                    "wl"
                };
                return Err(DatasetError::FeatureModeUnavailable(name).into());
            }
            let h = if let FeatureMode::Wl(h) = features { h } else { 0 };
            wl_relabel_collection(graphs, h)?
                .into_iter()
                .map(Features::Labels)
                .collect()
        }
        FeatureMode::None => graphs.iter().map(|g| Features::none(g.node_count())).collect(),
    };
    let built = executor.map(graphs.len(), |i| {
        let g = &graphs[i];
        let c = structure_matrix(g, structure)?;
        build_measure(g.weights(), features[i].clone(), c)
    });
    built.into_iter().map(|m| m.map_err(Error::from)).collect()
}
