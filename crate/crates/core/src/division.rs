//! Hash-based graph division.
//!
//! Every edge (edge-centric) or every node's outgoing edges (node-centric) is
//! assigned to one of `T` subgraphs by hashing zero-padded decimal node ids.
//! The assignment depends only on the ids involved, so manipulating one part of
//! a graph leaves the assignment of every other part untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use md5::Md5;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{canonicalize_edge, Graph, NodeId, TaskKind};

pub const DEFAULT_PAD_LENGTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HashAlgorithm {
    #[default]
    Md5,
    Sha256,
}

impl HashAlgorithm {
    pub fn digest(self, message: &[u8]) -> Vec<u8> {
        match self {
            HashAlgorithm::Md5 => Md5::digest(message).to_vec(),
            HashAlgorithm::Sha256 => Sha256::digest(message).to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashAlgorithm::Md5 => "md5",
            HashAlgorithm::Sha256 => "sha256",
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md5" => Ok(HashAlgorithm::Md5),
            "sha256" | "sha-256" => Ok(HashAlgorithm::Sha256),
            other => Err(Error::Config(format!("unknown hash algorithm {other:?}"))),
        }
    }
}

/// Hash function plus the fixed width node ids are padded to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashScheme {
    pub algorithm: HashAlgorithm,
    pub pad_length: usize,
}

impl Default for HashScheme {
    fn default() -> Self {
        Self {
            algorithm: HashAlgorithm::Md5,
            pad_length: DEFAULT_PAD_LENGTH,
        }
    }
}

impl HashScheme {
    pub fn new(algorithm: HashAlgorithm, pad_length: usize) -> Self {
        Self {
            algorithm,
            pad_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    EdgeCentric,
    NodeCentric,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::EdgeCentric => "edge",
            Strategy::NodeCentric => "node",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge" | "edge-centric" => Ok(Strategy::EdgeCentric),
            "node" | "node-centric" => Ok(Strategy::NodeCentric),
            other => Err(Error::Config(format!("unknown division strategy {other:?}"))),
        }
    }
}

/// Decimal representation of `u` left-padded with `'0'` to exactly `len` characters.
pub fn pad_index(u: NodeId, len: usize) -> Result<String> {
    let s = u.to_string();
    if s.len() > len {
        return Err(Error::IdTooWide { id: u, len });
    }
    Ok(format!("{s:0>len$}"))
}

/// Reads `digest` as a big-endian unsigned integer and maps it to `[1, t]`.
pub fn digest_to_index(digest: &[u8], t: usize) -> usize {
    assert!(t >= 1, "subgraph count must be at least 1");
    let modulus = t as u128;
    let rem = digest
        .iter()
        .fold(0u128, |acc, &b| (acc * 256 + b as u128) % modulus);
    rem as usize + 1
}

pub fn hash_to_index(message: &[u8], t: usize, scheme: HashScheme) -> usize {
    digest_to_index(&scheme.algorithm.digest(message), t)
}

/// Subgraph index of edge `(u, v)`. Undirected edges are canonicalized first, so
/// both orientations land in the same subgraph.
pub fn edge_subgraph_index(
    u: NodeId,
    v: NodeId,
    t: usize,
    scheme: HashScheme,
    directed: bool,
) -> Result<usize> {
    let (a, b) = canonicalize_edge(u, v, directed);
    let mut message = pad_index(a, scheme.pad_length)?;
    message.push_str(&pad_index(b, scheme.pad_length)?);
    Ok(hash_to_index(message.as_bytes(), t, scheme))
}

/// Subgraph index shared by every outgoing edge of `u`.
pub fn node_subgraph_index(u: NodeId, t: usize, scheme: HashScheme) -> Result<usize> {
    let message = pad_index(u, scheme.pad_length)?;
    Ok(hash_to_index(message.as_bytes(), t, scheme))
}

/// The `T` subgraphs of one graph, stored in index order `1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphSet {
    pub t: usize,
    pub strategy: Strategy,
    pub task: TaskKind,
    pub subgraphs: Vec<Graph>,
}

impl SubgraphSet {
    /// Subgraph with 1-based index `i`.
    pub fn get(&self, i: usize) -> Option<&Graph> {
        i.checked_sub(1).and_then(|k| self.subgraphs.get(k))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, &Graph)> + '_ {
        self.subgraphs.iter().enumerate().map(|(k, g)| (k + 1, g))
    }

    pub fn len(&self) -> usize {
        self.subgraphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgraphs.is_empty()
    }
}

/// A complete division configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Division {
    pub t: usize,
    pub scheme: HashScheme,
    pub strategy: Strategy,
    /// Whether the aggregator node of purified node-centric subgraphs enters
    /// graph-level pooling.
    pub pool_virtual: bool,
}

impl Division {
    pub fn new(t: usize, scheme: HashScheme, strategy: Strategy) -> Self {
        Self {
            t,
            scheme,
            strategy,
            pool_virtual: true,
        }
    }

    pub fn divide(&self, g: &Graph, task: TaskKind) -> Result<SubgraphSet> {
        match self.strategy {
            Strategy::EdgeCentric => divide_edge_centric(g, self.t, self.scheme, task),
            Strategy::NodeCentric => {
                divide_node_centric_with(g, self.t, self.scheme, task, self.pool_virtual)
            }
        }
    }
}

fn empty_like(g: &Graph, directed: bool) -> Graph {
    let mut out = Graph::new(directed);
    out.set_graph_label(g.graph_label());
    out
}

/// Edge-centric division. Node classification keeps every node in every
/// subgraph; graph classification drops nodes left without edges.
pub fn divide_edge_centric(
    g: &Graph,
    t: usize,
    scheme: HashScheme,
    task: TaskKind,
) -> Result<SubgraphSet> {
    if t == 0 {
        return Err(Error::ZeroSubgraphs);
    }
    let directed = g.is_directed();
    let mut buckets: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); t];
    for (u, v) in g.edges() {
        let i = edge_subgraph_index(u, v, t, scheme, directed)?;
        buckets[i - 1].push((u, v));
    }
    let subgraphs = buckets
        .into_iter()
        .map(|edges| {
            let mut sub = empty_like(g, directed);
            for (id, node) in g.nodes() {
                let keep = match task {
                    TaskKind::Node => true,
                    TaskKind::Graph => edges.iter().any(|&(a, b)| a == id || b == id),
                };
                if keep {
                    sub.insert_node(id, node.features.clone(), node.label);
                }
            }
            for (u, v) in edges {
                sub.insert_edge(u, v);
            }
            sub
        })
        .collect();
    Ok(SubgraphSet {
        t,
        strategy: Strategy::EdgeCentric,
        task,
        subgraphs,
    })
}

/// Node-centric division with the aggregator node included in pooling.
pub fn divide_node_centric(
    g: &Graph,
    t: usize,
    scheme: HashScheme,
    task: TaskKind,
) -> Result<SubgraphSet> {
    divide_node_centric_with(g, t, scheme, task, true)
}

/// Node-centric division into directed subgraphs.
///
/// Each undirected edge becomes two directed edges and every directed edge goes
/// to the subgraph of its source. For graph classification, subgraph `i` keeps
/// only index-`i` nodes plus a zero-feature aggregator node that every kept
/// node points to. A subgraph with no index-`i` node is left empty.
pub fn divide_node_centric_with(
    g: &Graph,
    t: usize,
    scheme: HashScheme,
    task: TaskKind,
    pool_virtual: bool,
) -> Result<SubgraphSet> {
    if t == 0 {
        return Err(Error::ZeroSubgraphs);
    }
    let index: BTreeMap<NodeId, usize> = g
        .node_ids()
        .map(|u| node_subgraph_index(u, t, scheme).map(|i| (u, i)))
        .collect::<Result<_>>()?;
    let mut buckets: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); t];
    for (u, v) in g.edges() {
        if let Some(&i) = index.get(&u) {
            buckets[i - 1].push((u, v));
        }
        if !g.is_directed() && u != v {
            if let Some(&i) = index.get(&v) {
                buckets[i - 1].push((v, u));
            }
        }
    }
    let virtual_base = g.max_node_id().map_or(0, |m| m + 1);
    let dim = g.feature_dim().unwrap_or(0);

    let subgraphs = buckets
        .into_iter()
        .enumerate()
        .map(|(k, edges)| {
            let i = k + 1;
            let mut sub = empty_like(g, true);
            match task {
                TaskKind::Node => {
                    for (id, node) in g.nodes() {
                        sub.insert_node(id, node.features.clone(), node.label);
                    }
                    for (u, v) in edges {
                        sub.insert_edge(u, v);
                    }
                }
                TaskKind::Graph => {
                    let kept: Vec<NodeId> = index
                        .iter()
                        .filter(|&(_, &j)| j == i)
                        .map(|(&u, _)| u)
                        .collect();
                    if kept.is_empty() {
                        return sub;
                    }
                    for &u in &kept {
                        let node = g.node(u).expect("indexed node exists");
                        sub.insert_node(u, node.features.clone(), node.label);
                    }
                    for (u, v) in edges {
                        if index.get(&v) == Some(&i) {
                            sub.insert_edge(u, v);
                        }
                    }
                    let aggregator = virtual_base + i as NodeId;
                    sub.insert_node(aggregator, vec![0.0; dim], None);
                    for &u in &kept {
                        sub.insert_edge(u, aggregator);
                    }
                    if !pool_virtual {
                        sub.exclude_from_pooling(aggregator);
                    }
                }
            }
            sub
        })
        .collect();
    Ok(SubgraphSet {
        t,
        strategy: Strategy::NodeCentric,
        task,
        subgraphs,
    })
}
