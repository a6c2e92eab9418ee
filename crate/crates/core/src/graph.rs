//! Graph representation, perturbation descriptions and structural validation.
//!
//! A [`Graph`] stores node features, optional labels and an edge set. Undirected
//! edges are always stored in canonical `(min, max)` order so that membership
//! queries do not depend on the orientation a caller happens to use.
//!
//! A [`Perturbation`] describes an arbitrary attack declaratively: injected and
//! deleted edges, injected nodes (with features and incident edges), deleted
//! nodes, and rewritten node features. It is checked against a concrete graph
//! before it is applied.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type NodeId = u64;

/// An edge as an ordered pair. Canonical for undirected graphs when `0 <= 1`.
pub type Edge = (NodeId, NodeId);

/// Orders undirected endpoints as `(min, max)`; directed edges keep orientation.
pub fn canonicalize_edge(u: NodeId, v: NodeId, directed: bool) -> Edge {
    if directed || u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub features: Vec<f64>,
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Graph {
    directed: bool,
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeSet<Edge>,
    graph_label: Option<usize>,
    /// Nodes that take part in message passing but not in graph-level pooling.
    unpooled: BTreeSet<NodeId>,
}

impl Graph {
    pub fn new(directed: bool) -> Self {
        Self {
            directed,
            ..Self::default()
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inserts (or replaces) a node. Does not check feature dimensionality;
    /// see [`Graph::validate`].
    pub fn insert_node(&mut self, id: NodeId, features: Vec<f64>, label: Option<usize>) {
        self.nodes.insert(id, Node { features, label });
    }

    /// Removes a node together with every incident edge.
    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let node = self.nodes.remove(&id)?;
        self.edges.retain(|&(a, b)| a != id && b != id);
        self.unpooled.remove(&id);
        Some(node)
    }

    /// Inserts an edge in canonical form. Endpoints are not checked here so that
    /// malformed input can still be represented and reported by `validate`.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        self.edges.insert(canonicalize_edge(u, v, self.directed))
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        self.edges.remove(&canonicalize_edge(u, v, self.directed))
    }

    pub fn contains_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&canonicalize_edge(u, v, self.directed))
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn features(&self, id: NodeId) -> Option<&[f64]> {
        self.nodes.get(&id).map(|n| n.features.as_slice())
    }

    pub fn set_features(&mut self, id: NodeId, features: Vec<f64>) -> Result<()> {
        let node = self.nodes.get_mut(&id).ok_or(Error::MissingNode(id))?;
        node.features = features;
        Ok(())
    }

    pub fn node_label(&self, id: NodeId) -> Option<usize> {
        self.nodes.get(&id).and_then(|n| n.label)
    }

    pub fn set_node_label(&mut self, id: NodeId, label: Option<usize>) -> Result<()> {
        let node = self.nodes.get_mut(&id).ok_or(Error::MissingNode(id))?;
        node.label = label;
        Ok(())
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    pub fn set_graph_label(&mut self, label: Option<usize>) {
        self.graph_label = label;
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(&id, n)| (id, n))
    }

    /// Edges in ascending canonical order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.nodes.keys().next_back().copied()
    }

    /// Feature dimensionality of the lowest-id node, if any.
    pub fn feature_dim(&self) -> Option<usize> {
        self.nodes.values().next().map(|n| n.features.len())
    }

    /// Edges touching `id`, in either direction.
    pub fn incident_edges(&self, id: NodeId) -> impl Iterator<Item = Edge> + '_ {
        self.edges
            .iter()
            .copied()
            .filter(move |&(a, b)| a == id || b == id)
    }

    /// Number of distinct edges touching `id`. A self-loop counts once.
    pub fn degree(&self, id: NodeId) -> usize {
        self.incident_edges(id).count()
    }

    /// Whether `id` has no incident edge at all.
    pub fn is_isolated(&self, id: NodeId) -> bool {
        self.incident_edges(id).next().is_none()
    }

    /// Marks a node as excluded from graph-level pooling.
    pub fn exclude_from_pooling(&mut self, id: NodeId) {
        self.unpooled.insert(id);
    }

    pub fn is_pooled(&self, id: NodeId) -> bool {
        !self.unpooled.contains(&id)
    }

    /// Checks every structural invariant and lists each violation.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for &(u, v) in &self.edges {
            for endpoint in [u, v] {
                if !self.nodes.contains_key(&endpoint) {
                    violations.push(format!("edge endpoint {endpoint} not in node set"));
                }
            }
            if !self.directed && u > v {
                violations.push(format!("undirected edge ({u},{v}) is not canonical"));
            }
        }
        if let Some(dim) = self.feature_dim() {
            if dim == 0 {
                violations.push("feature vectors must have at least one dimension".to_string());
            }
            for (&id, node) in &self.nodes {
                if node.features.len() != dim {
                    violations.push(format!(
                        "node {id} has feature dimension {} but expected {dim}",
                        node.features.len()
                    ));
                }
                if node.features.iter().any(|x| !x.is_finite()) {
                    violations.push(format!("node {id} has a non-finite feature"));
                }
            }
        }
        ValidationReport { violations }
    }

    /// Checks that every label present lies in `[0, num_classes)`.
    pub fn validate_labels(&self, num_classes: usize) -> ValidationReport {
        let mut violations = Vec::new();
        for (&id, node) in &self.nodes {
            if let Some(y) = node.label {
                if y >= num_classes {
                    violations.push(format!(
                        "node {id} label {y} outside [0, {num_classes})"
                    ));
                }
            }
        }
        if let Some(y) = self.graph_label {
            if y >= num_classes {
                violations.push(format!("graph label {y} outside [0, {num_classes})"));
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(self.violations))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.violations.join("\n"))
    }
}

/// Which prediction is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    NodeClassification(NodeId),
    GraphClassification,
}

impl Task {
    pub fn kind(self) -> TaskKind {
        match self {
            Task::NodeClassification(_) => TaskKind::Node,
            Task::GraphClassification => TaskKind::Graph,
        }
    }

    pub fn target(self) -> Option<NodeId> {
        match self {
            Task::NodeClassification(v) => Some(v),
            Task::GraphClassification => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Node,
    Graph,
}

/// An injected node: its features and the edges it brings along.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InjectedNode {
    pub features: Vec<f64>,
    pub edges: BTreeSet<Edge>,
}

/// A declarative arbitrary attack on a graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Perturbation {
    pub edges_added: BTreeSet<Edge>,
    pub edges_deleted: BTreeSet<Edge>,
    pub nodes_added: BTreeMap<NodeId, InjectedNode>,
    pub nodes_deleted: BTreeSet<NodeId>,
    pub features_rewritten: BTreeMap<NodeId, Vec<f64>>,
}

/// Edge sets induced by node-level manipulations, computed against the clean graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InducedEdges {
    /// Edges brought in by injected nodes.
    pub injected: BTreeSet<Edge>,
    /// Edges removed together with deleted nodes.
    pub deleted: BTreeSet<Edge>,
    /// Edges touching nodes whose features are rewritten.
    pub rewritten: BTreeSet<Edge>,
}

impl Perturbation {
    pub fn is_empty(&self) -> bool {
        self.edges_added.is_empty()
            && self.edges_deleted.is_empty()
            && self.nodes_added.is_empty()
            && self.nodes_deleted.is_empty()
            && self.features_rewritten.is_empty()
    }

    pub fn add_edge(mut self, u: NodeId, v: NodeId) -> Self {
        self.edges_added.insert((u, v));
        self
    }

    pub fn delete_edge(mut self, u: NodeId, v: NodeId) -> Self {
        self.edges_deleted.insert((u, v));
        self
    }

    /// Injects node `id` linked to each of `neighbors`.
    pub fn inject_node(mut self, id: NodeId, features: Vec<f64>, neighbors: &[NodeId]) -> Self {
        let edges = neighbors.iter().map(|&n| (id, n)).collect();
        self.nodes_added.insert(id, InjectedNode { features, edges });
        self
    }

    pub fn delete_node(mut self, id: NodeId) -> Self {
        self.nodes_deleted.insert(id);
        self
    }

    pub fn rewrite_features(mut self, id: NodeId, features: Vec<f64>) -> Self {
        self.features_rewritten.insert(id, features);
        self
    }

    /// Checks consistency against `g`, naming the first offending element.
    pub fn check(&self, g: &Graph) -> Result<()> {
        let bad = |msg: String| Err(Error::InconsistentPerturbation(msg));
        let directed = g.is_directed();
        let max_id = g.max_node_id();
        let dim = g.feature_dim();
        let dim_ok = |x: &[f64]| dim.is_none_or(|d| x.len() == d);

        for &id in &self.nodes_deleted {
            if !g.contains_node(id) {
                return bad(format!("deleted node {id} is not in the graph"));
            }
        }
        for (&id, x) in &self.features_rewritten {
            if !g.contains_node(id) {
                return bad(format!("rewritten node {id} is not in the graph"));
            }
            if self.nodes_deleted.contains(&id) {
                return bad(format!("node {id} is both deleted and rewritten"));
            }
            if !dim_ok(x) {
                return bad(format!("rewritten features of node {id} have wrong dimension"));
            }
        }
        for (&id, node) in &self.nodes_added {
            if g.contains_node(id) {
                return bad(format!("injected node {id} already exists"));
            }
            if max_id.is_some_and(|m| id <= m) {
                return bad(format!(
                    "injected node {id} must exceed the maximum existing id"
                ));
            }
            if !dim_ok(&node.features) {
                return bad(format!("features of injected node {id} have wrong dimension"));
            }
            for &(a, b) in &node.edges {
                if a != id && b != id {
                    return bad(format!("edge ({a},{b}) listed under injected node {id} does not touch it"));
                }
                let other = if a == id { b } else { a };
                let other_ok = self.nodes_added.contains_key(&other)
                    || (g.contains_node(other) && !self.nodes_deleted.contains(&other));
                if !other_ok {
                    return bad(format!("edge ({a},{b}) of injected node {id} has a missing endpoint"));
                }
            }
        }
        let touches_node_op = |u: NodeId| {
            self.nodes_added.contains_key(&u) || self.nodes_deleted.contains(&u)
        };
        for &(u, v) in &self.edges_deleted {
            if touches_node_op(u) || touches_node_op(v) {
                return bad(format!("deleted edge ({u},{v}) touches an injected or deleted node"));
            }
            if !g.contains_edge(u, v) {
                return bad(format!("deleted edge ({u},{v}) is not in the graph"));
            }
        }
        for &(u, v) in &self.edges_added {
            if touches_node_op(u) || touches_node_op(v) {
                return bad(format!("added edge ({u},{v}) touches an injected or deleted node"));
            }
            if !g.contains_node(u) || !g.contains_node(v) {
                return bad(format!("added edge ({u},{v}) has a missing endpoint"));
            }
            if g.contains_edge(u, v) {
                return bad(format!("added edge ({u},{v}) already exists"));
            }
        }
        let canonical = |set: &BTreeSet<Edge>| -> BTreeSet<Edge> {
            set.iter()
                .map(|&(a, b)| canonicalize_edge(a, b, directed))
                .collect()
        };
        if !canonical(&self.edges_added).is_disjoint(&canonical(&self.edges_deleted)) {
            return bad("an edge is both added and deleted".to_string());
        }
        Ok(())
    }

    /// Derived edge sets, each counted as a set against the clean graph `g`.
    pub fn induced_edges(&self, g: &Graph) -> InducedEdges {
        let directed = g.is_directed();
        let injected = self
            .nodes_added
            .values()
            .flat_map(|n| n.edges.iter())
            .map(|&(a, b)| canonicalize_edge(a, b, directed))
            .collect();
        let touching = |set: &dyn Fn(NodeId) -> bool| -> BTreeSet<Edge> {
            g.edges().filter(|&(a, b)| set(a) || set(b)).collect()
        };
        InducedEdges {
            injected,
            deleted: touching(&|u| self.nodes_deleted.contains(&u)),
            rewritten: touching(&|u| self.features_rewritten.contains_key(&u)),
        }
    }

    /// The perturbation that undoes `self` once applied to `g`.
    ///
    /// Only defined for perturbations without node deletions, since re-injecting
    /// a deleted node would reuse an id below the graph's maximum.
    pub fn inverse(&self, g: &Graph) -> Result<Perturbation> {
        if !self.nodes_deleted.is_empty() {
            return Err(Error::InconsistentPerturbation(
                "node deletions have no admissible inverse".to_string(),
            ));
        }
        let mut inv = Perturbation {
            edges_added: self.edges_deleted.clone(),
            edges_deleted: self.edges_added.clone(),
            nodes_deleted: self.nodes_added.keys().copied().collect(),
            ..Perturbation::default()
        };
        for &id in self.features_rewritten.keys() {
            let x = g.features(id).ok_or(Error::MissingNode(id))?;
            inv.features_rewritten.insert(id, x.to_vec());
        }
        Ok(inv)
    }
}

/// Produces the perturbed graph; `g` is left untouched.
pub fn apply_perturbation(g: &Graph, p: &Perturbation) -> Result<Graph> {
    p.check(g)?;
    let mut out = g.clone();
    for &id in &p.nodes_deleted {
        out.remove_node(id);
    }
    for &(u, v) in &p.edges_deleted {
        out.remove_edge(u, v);
    }
    for (&id, node) in &p.nodes_added {
        out.insert_node(id, node.features.clone(), None);
    }
    for node in p.nodes_added.values() {
        for &(a, b) in &node.edges {
            out.insert_edge(a, b);
        }
    }
    for &(u, v) in &p.edges_added {
        out.insert_edge(u, v);
    }
    for (&id, x) in &p.features_rewritten {
        out.set_features(id, x.clone())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u64) -> Graph {
        let mut g = Graph::new(false);
        for i in 0..n {
            g.insert_node(i, vec![i as f64], None);
        }
        for i in 1..n {
            g.insert_edge(i - 1, i);
        }
        g
    }

    #[test]
    fn canonicalize() {
        assert_eq!(canonicalize_edge(7, 5, false), (5, 7));
        assert_eq!(canonicalize_edge(5, 7, false), (5, 7));
        assert_eq!(canonicalize_edge(7, 5, true), (7, 5));
        assert_eq!(canonicalize_edge(3, 3, false), (3, 3));
    }

    #[test]
    fn undirected_membership_is_symmetric() {
        let mut g = path(3);
        g.insert_edge(2, 0);
        assert!(g.contains_edge(0, 2) && g.contains_edge(2, 0));
        assert!(g.edges().all(|(a, b)| a <= b));
    }

    #[test]
    fn validate_reports_dangling_endpoint() {
        let mut g = Graph::new(false);
        g.insert_node(0, vec![1.0], None);
        g.insert_edge(0, 9);
        assert_eq!(g.validate().violations, vec!["edge endpoint 9 not in node set"]);
    }

    #[test]
    fn validate_empty_graph() {
        assert!(Graph::new(false).validate().is_empty());
    }

    #[test]
    fn validate_reports_dim_mismatch() {
        let mut g = Graph::new(false);
        g.insert_node(0, vec![0.0; 3], None);
        g.insert_node(1, vec![0.0; 3], None);
        g.insert_node(4, vec![0.0; 4], None);
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("node 4"));
    }

    #[test]
    fn validate_labels_range() {
        let mut g = path(2);
        g.set_node_label(1, Some(3)).unwrap();
        assert!(g.validate_labels(4).is_empty());
        assert_eq!(g.validate_labels(3).violations.len(), 1);
    }

    #[test]
    fn empty_perturbation_is_identity() {
        let g = path(4);
        assert_eq!(apply_perturbation(&g, &Perturbation::default()).unwrap(), g);
    }

    #[test]
    fn deleting_node_removes_incident_edges() {
        let mut g = path(4);
        g.insert_edge(1, 3);
        assert_eq!(g.degree(1), 3);
        let gp = apply_perturbation(&g, &Perturbation::default().delete_node(1)).unwrap();
        assert_eq!(gp.num_nodes(), g.num_nodes() - 1);
        assert_eq!(gp.num_edges(), g.num_edges() - 3);
    }

    #[test]
    fn injecting_node_into_path() {
        let g = path(4);
        let p = Perturbation::default().inject_node(10, vec![0.5], &[0, 3]);
        let gp = apply_perturbation(&g, &p).unwrap();
        assert_eq!((gp.num_nodes(), gp.num_edges()), (5, 5));
        assert!(gp.contains_edge(3, 10));
        // original untouched
        assert_eq!(g.num_nodes(), 4);
    }

    #[test]
    fn rejects_inconsistent_perturbations() {
        let g = path(4);
        let cases = [
            Perturbation::default().delete_edge(0, 2),
            Perturbation::default().add_edge(0, 1),
            Perturbation::default().add_edge(0, 7),
            Perturbation::default().delete_node(9),
            Perturbation::default().inject_node(2, vec![0.0], &[0]),
            Perturbation::default().inject_node(8, vec![0.0], &[9]),
            Perturbation::default().inject_node(8, vec![0.0, 1.0], &[0]),
            Perturbation::default().delete_node(1).add_edge(1, 3),
            Perturbation::default().delete_node(1).rewrite_features(1, vec![0.0]),
            Perturbation::default().inject_node(8, vec![0.0], &[1]).delete_node(1),
        ];
        for p in cases {
            let err = apply_perturbation(&g, &p).unwrap_err();
            assert!(matches!(err, Error::InconsistentPerturbation(_)), "{p:?}");
        }
    }

    #[test]
    fn deleting_nonexistent_edge_names_it() {
        let g = path(4);
        let err = apply_perturbation(&g, &Perturbation::default().delete_edge(2, 0)).unwrap_err();
        assert!(err.to_string().contains("(2,0)"));
    }

    #[test]
    fn induced_edges_are_sets() {
        // triangle 0-1-2 plus pendant 2-3
        let mut g = path(4);
        g.insert_edge(0, 2);
        let p = Perturbation::default()
            .rewrite_features(0, vec![1.0])
            .rewrite_features(1, vec![1.0]);
        let induced = p.induced_edges(&g);
        // edge (0,1) touches both rewritten nodes but counts once
        assert_eq!(induced.rewritten.len(), 3);
        let p = Perturbation::default().delete_node(2);
        assert_eq!(p.induced_edges(&g).deleted.len(), 3);
    }

    #[test]
    fn directed_graph_keeps_orientation() {
        let mut g = Graph::new(true);
        g.insert_node(0, vec![0.0], None);
        g.insert_node(1, vec![0.0], None);
        g.insert_edge(1, 0);
        assert!(g.contains_edge(1, 0));
        assert!(!g.contains_edge(0, 1));
        let gp = apply_perturbation(&g, &Perturbation::default().add_edge(0, 1)).unwrap();
        assert_eq!(gp.num_edges(), 2);
    }
}
