//! JSON and CSV file formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certify::Certificate;
use crate::error::{Error, Result};
use crate::gnn::{GcnParams, Matrix};
use crate::graph::{Graph, InjectedNode, NodeId, Perturbation};
use crate::perturb::{SweepSummary, ViolationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub x: Vec<f64>,
    #[serde(default)]
    pub y: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub directed: bool,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[NodeId; 2]>,
    #[serde(default)]
    pub graph_label: Option<usize>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        Self {
            directed: g.is_directed(),
            nodes: g
                .nodes()
                .map(|(id, n)| NodeRecord {
                    id,
                    x: n.features.clone(),
                    y: n.label,
                })
                .collect(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            graph_label: g.graph_label(),
        }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    /// Builds and validates a graph, canonicalizing undirected edges.
    fn try_from(file: GraphFile) -> Result<Graph> {
        let mut g = Graph::new(file.directed);
        g.set_graph_label(file.graph_label);
        for n in file.nodes {
            if g.contains_node(n.id) {
                return Err(Error::InvalidGraph(vec![format!("node {} listed twice", n.id)]));
            }
            g.insert_node(n.id, n.x, n.y);
        }
        for [u, v] in file.edges {
            if let Some(missing) = [u, v].into_iter().find(|&w| !g.contains_node(w)) {
                return Err(Error::InvalidGraph(vec![format!(
                    "edge [{u},{v}] has endpoint {missing} not in node set"
                )]));
            }
            g.insert_edge(u, v);
        }
        g.validate().into_result()?;
        Ok(g)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, context: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    parse::<GraphFile>(text, "graph")?.try_into()
}

pub fn graph_to_json(g: &Graph) -> String {
    to_json(&GraphFile::from(g))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = read(path)?;
    parse::<GraphFile>(&text, &path.display().to_string())?.try_into()
}

pub fn save_graph(g: &Graph, path: &Path) -> Result<()> {
    write(path, &graph_to_json(g))
}

/// Reads either a single graph object or an array of graphs.
pub fn load_graphs(path: &Path) -> Result<Vec<Graph>> {
    let text = read(path)?;
    let context = path.display().to_string();
    if text.trim_start().starts_with('[') {
        parse::<Vec<GraphFile>>(&text, &context)?
            .into_iter()
            .map(Graph::try_from)
            .collect()
    } else {
        Ok(vec![parse::<GraphFile>(&text, &context)?.try_into()?])
    }
}

pub fn save_graphs(graphs: &[Graph], path: &Path) -> Result<()> {
    let files: Vec<GraphFile> = graphs.iter().map(GraphFile::from).collect();
    write(path, &to_json(&files))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub dims: Vec<usize>,
    pub layers: Vec<Vec<f64>>,
}

impl From<&GcnParams> for ParamsFile {
    fn from(p: &GcnParams) -> Self {
        Self {
            dims: p.dims(),
            layers: p.layers().iter().map(|w| w.as_slice().to_vec()).collect(),
        }
    }
}

impl TryFrom<ParamsFile> for GcnParams {
    type Error = Error;

    fn try_from(file: ParamsFile) -> Result<GcnParams> {
        if file.dims.len() != file.layers.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} dims for {} layers",
                file.dims.len(),
                file.layers.len()
            )));
        }
        let layers = file
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, data)| Matrix::from_row_major(file.dims[k + 1], file.dims[k], data))
            .collect::<Result<_>>()?;
        GcnParams::new(layers)
    }
}

pub fn params_from_json(text: &str) -> Result<GcnParams> {
    parse::<ParamsFile>(text, "params")?.try_into()
}

pub fn params_to_json(p: &GcnParams) -> String {
    to_json(&ParamsFile::from(p))
}

pub fn load_params(path: &Path) -> Result<GcnParams> {
    parse::<ParamsFile>(&read(path)?, &path.display().to_string())?.try_into()
}

pub fn save_params(p: &GcnParams, path: &Path) -> Result<()> {
    write(path, &params_to_json(p))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub class: usize,
    pub runner_up: usize,
    pub counts: Vec<usize>,
    #[serde(rename = "M")]
    pub m: usize,
}

impl From<&Certificate> for CertificateFile {
    fn from(c: &Certificate) -> Self {
        Self {
            class: c.voted_class,
            runner_up: c.runner_up,
            counts: c.tally.counts().to_vec(),
            m: c.certified_size,
        }
    }
}

pub fn certificate_to_json(c: &Certificate) -> String {
    to_json(&CertificateFile::from(c))
}

/// A certificate for one target of a batch run, with its true label if known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCertificate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<usize>,
    pub label: Option<usize>,
    #[serde(flatten)]
    pub certificate: CertificateFile,
}

pub fn save_target_certificates(certs: &[TargetCertificate], path: &Path) -> Result<()> {
    write(path, &to_json(&certs))
}

pub fn load_target_certificates(path: &Path) -> Result<Vec<TargetCertificate>> {
    parse(&read(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedNodeRecord {
    pub id: NodeId,
    pub x: Vec<f64>,
    pub edges: Vec<[NodeId; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteRecord {
    pub id: NodeId,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFile {
    pub edges_added: Vec<[NodeId; 2]>,
    pub edges_deleted: Vec<[NodeId; 2]>,
    pub nodes_added: Vec<InjectedNodeRecord>,
    pub nodes_deleted: Vec<NodeId>,
    pub features_rewritten: Vec<RewriteRecord>,
}

impl From<&Perturbation> for PerturbationFile {
    fn from(p: &Perturbation) -> Self {
        Self {
            edges_added: p.edges_added.iter().map(|&(u, v)| [u, v]).collect(),
            edges_deleted: p.edges_deleted.iter().map(|&(u, v)| [u, v]).collect(),
            nodes_added: p
                .nodes_added
                .iter()
                .map(|(&id, n)| InjectedNodeRecord {
                    id,
                    x: n.features.clone(),
                    edges: n.edges.iter().map(|&(u, v)| [u, v]).collect(),
                })
                .collect(),
            nodes_deleted: p.nodes_deleted.iter().copied().collect(),
            features_rewritten: p
                .features_rewritten
                .iter()
                .map(|(&id, x)| RewriteRecord { id, x: x.clone() })
                .collect(),
        }
    }
}

impl From<PerturbationFile> for Perturbation {
    fn from(f: PerturbationFile) -> Self {
        Perturbation {
            edges_added: f.edges_added.into_iter().map(|[u, v]| (u, v)).collect(),
            edges_deleted: f.edges_deleted.into_iter().map(|[u, v]| (u, v)).collect(),
            nodes_added: f
                .nodes_added
                .into_iter()
                .map(|n| {
                    let node = InjectedNode {
                        features: n.x,
                        edges: n.edges.into_iter().map(|[u, v]| (u, v)).collect(),
                    };
                    (n.id, node)
                })
                .collect(),
            nodes_deleted: f.nodes_deleted.into_iter().collect(),
            features_rewritten: f.features_rewritten.into_iter().map(|r| (r.id, r.x)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub perturbation: PerturbationFile,
    pub expected: usize,
    pub observed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolationRecord {
    pub perturbation: PerturbationFile,
    pub altered: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub attacks_tried: usize,
    pub max_altered: usize,
    pub violations: Vec<ViolationRecord>,
    pub bound_violations: Vec<BoundViolationRecord>,
}

impl From<&ViolationReport> for ReportFile {
    fn from(r: &ViolationReport) -> Self {
        Self {
            attacks_tried: r.attacks_tried,
            max_altered: r.max_altered,
            violations: r
                .violations
                .iter()
                .map(|v| ViolationRecord {
                    perturbation: (&v.perturbation).into(),
                    expected: v.expected,
                    observed: v.observed,
                })
                .collect(),
            bound_violations: r
                .bound_violations
                .iter()
                .map(|v| BoundViolationRecord {
                    perturbation: (&v.perturbation).into(),
                    altered: v.altered,
                    bound: v.bound,
                })
                .collect(),
        }
    }
}

pub fn report_to_json(r: &ViolationReport) -> String {
    to_json(&ReportFile::from(r))
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    to_json(value)
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write(path, contents)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    parse(&read(path)?, &path.display().to_string())
}

pub const CURVE_HEADER: &str = "m,certified_accuracy";
pub const SWEEP_HEADER: &str = "theorem,max_altered,bound,slack";

pub fn curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for (m, acc) in curve {
        writeln!(out, "{m},{acc}").unwrap();
    }
    out
}

/// Parses a curve CSV back into `(m, accuracy)` rows.
pub fn parse_curve_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(Error::Config(format!("curve CSV must start with {CURVE_HEADER:?}")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Config(format!("curve CSV line {}: {line:?}", i + 2));
            let (m, acc) = line.split_once(',').ok_or_else(bad)?;
            Ok((m.parse().map_err(|_| bad())?, acc.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn sweep_csv(summary: &SweepSummary) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in &summary.rows {
        writeln!(out, "{},{},{},{}", r.theorem, r.max_altered, r.bound, r.slack).unwrap();
    }
    out
}
