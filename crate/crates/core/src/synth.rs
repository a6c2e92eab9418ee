//! Seeded synthetic datasets and small graph families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Two blocks of `n_per_block` nodes; edges appear with probability `p_in`
    /// inside a block and `p_out` across blocks.
    TwoBlockSbm { n_per_block: usize, p_in: f64, p_out: f64 },
    /// Cliques joined in a ring by one edge between consecutive cliques.
    Caveman { cliques: usize, clique_size: usize },
    /// Random trees (class 0) and random trees with one extra edge (class 1).
    RandomGraphClassSet { num_graphs: usize, min_size: usize, max_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub feature_dim: usize,
    /// Distance of each class mean from the origin along its own axis.
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self {
            family,
            feature_dim: 2,
            class_separation: 1.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.feature_dim == 0 {
            return bad("feature dimension must be at least 1");
        }
        match self.family {
            Family::TwoBlockSbm { n_per_block, p_in, p_out } => {
                if n_per_block == 0 {
                    return bad("blocks need at least one node");
                }
                if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
                    return bad("edge probabilities must lie in [0, 1]");
                }
            }
            Family::Caveman { cliques, clique_size } => {
                if cliques == 0 || clique_size == 0 {
                    return bad("caveman graphs need at least one clique of one node");
                }
            }
            Family::RandomGraphClassSet { num_graphs, min_size, max_size } => {
                if num_graphs == 0 {
                    return bad("need at least one graph");
                }
                if min_size < 3 || min_size > max_size {
                    return bad("graph sizes must satisfy 3 <= min <= max");
                }
            }
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        match self.family {
            Family::TwoBlockSbm { .. } | Family::RandomGraphClassSet { .. } => 2,
            Family::Caveman { cliques, .. } => cliques,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// One graph whose nodes carry labels.
    Nodes(Graph),
    /// Many graphs, each carrying a graph label.
    Graphs(Vec<Graph>),
}

/// Class mean on its own axis (wrapping when there are more classes than
/// dimensions) plus standard normal noise.
fn class_features(rng: &mut ChaCha8Rng, class: usize, dim: usize, separation: f64) -> Vec<f64> {
    (0..dim)
        .map(|k| {
            let mean = if k == class % dim { separation } else { 0.0 };
            mean + rng.sample::<f64, _>(StandardNormal)
        })
        .collect()
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(NodeId, NodeId)> {
    (1..n)
        .map(|v| (rng.random_range(0..v) as NodeId, v as NodeId))
        .collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (dim, sep) = (spec.feature_dim, spec.class_separation);
    Ok(match spec.family {
        Family::TwoBlockSbm { n_per_block, p_in, p_out } => {
            let n = 2 * n_per_block;
            let block = |u: usize| u / n_per_block;
            let mut g = Graph::new(false);
            for u in 0..n {
                let x = class_features(&mut rng, block(u), dim, sep);
                g.insert_node(u as NodeId, x, Some(block(u)));
            }
            for u in 0..n {
                for v in u + 1..n {
                    let p = if block(u) == block(v) { p_in } else { p_out };
                    if rng.random::<f64>() < p {
                        g.insert_edge(u as NodeId, v as NodeId);
                    }
                }
            }
            Dataset::Nodes(g)
        }
        Family::Caveman { cliques, clique_size } => {
            let mut g = Graph::new(false);
            for c in 0..cliques {
                let base = c * clique_size;
                for k in 0..clique_size {
                    let x = class_features(&mut rng, c, dim, sep);
                    g.insert_node((base + k) as NodeId, x, Some(c));
                }
                for a in 0..clique_size {
                    for b in a + 1..clique_size {
                        g.insert_edge((base + a) as NodeId, (base + b) as NodeId);
                    }
                }
            }
            if cliques > 1 {
                for c in 0..cliques {
                    let next = (c + 1) % cliques;
                    let u = (c * clique_size + clique_size - 1) as NodeId;
                    let v = (next * clique_size) as NodeId;
                    if u != v {
                        g.insert_edge(u, v);
                    }
                }
            }
            Dataset::Nodes(g)
        }
        Family::RandomGraphClassSet { num_graphs, min_size, max_size } => {
            let graphs = (0..num_graphs)
                .map(|i| {
                    let class = i % 2;
                    let n = rng.random_range(min_size..=max_size);
                    let mut g = Graph::new(false);
                    for u in 0..n {
                        g.insert_node(u as NodeId, class_features(&mut rng, class, dim, sep), None);
                    }
                    for (u, v) in random_tree(&mut rng, n) {
                        g.insert_edge(u, v);
                    }
                    if class == 1 {
                        let mut missing: Vec<(NodeId, NodeId)> = (0..n as NodeId)
                            .flat_map(|u| (u + 1..n as NodeId).map(move |v| (u, v)))
                            .filter(|&(u, v)| !g.contains_edge(u, v))
                            .collect();
                        missing.shuffle(&mut rng);
                        let (u, v) = missing[0];
                        g.insert_edge(u, v);
                    }
                    g.set_graph_label(Some(class));
                    g
                })
                .collect();
            Dataset::Graphs(graphs)
        }
    })
}

/// Whether an undirected graph contains a cycle.
pub fn has_cycle(g: &Graph) -> bool {
    // a forest has exactly |V| - (#components) edges
    let ids: Vec<NodeId> = g.node_ids().collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let pos = |id: NodeId| ids.binary_search(&id).expect("endpoint in graph");
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, pos(u)), find(&mut parent, pos(v)));
        if a == b {
            return true;
        }
        parent[a] = b;
    }
    false
}

/// Deterministic shuffle of `0..n` cut into consecutive parts with the given
/// fractions; the last part takes the remainder.
pub fn split_indices(n: usize, fractions: &[f64], seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(fractions.len());
    let mut start = 0;
    for (k, f) in fractions.iter().enumerate() {
        let end = if k + 1 == fractions.len() {
            n
        } else {
            (start + (f * n as f64).round() as usize).min(n)
        };
        out.push(idx[start..end].to_vec());
        start = end;
    }
    out
}

/// Graph shapes used by exhaustive sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Path,
    Cycle,
    Star,
    Complete,
    /// Erdős–Rényi with edge probability one half.
    Er,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Shape::Path),
            "cycle" => Ok(Shape::Cycle),
            "star" => Ok(Shape::Star),
            "complete" => Ok(Shape::Complete),
            "er" => Ok(Shape::Er),
            other => Err(Error::Config(format!("unknown graph family {other:?}"))),
        }
    }
}

/// An `n`-node graph of the given shape with standard normal features.
pub fn shape_graph(shape: Shape, n: usize, dim: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(false);
    for u in 0..n as NodeId {
        let x = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        g.insert_node(u, x, None);
    }
    let n = n as NodeId;
    match shape {
        Shape::Path => (1..n).for_each(|v| {
            g.insert_edge(v - 1, v);
        }),
        Shape::Cycle => {
            (1..n).for_each(|v| {
                g.insert_edge(v - 1, v);
            });
            if n >= 3 {
                g.insert_edge(0, n - 1);
            }
        }
        Shape::Star => (1..n).for_each(|v| {
            g.insert_edge(0, v);
        }),
        Shape::Complete => {
            for u in 0..n {
                for v in u + 1..n {
                    g.insert_edge(u, v);
                }
            }
        }
        Shape::Er => {
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < 0.5 {
                        g.insert_edge(u, v);
                    }
                }
            }
        }
    }
    g
}

/// Every graph of `shape` with `min_nodes..=max_nodes` nodes.
pub fn shape_family(shape: Shape, min_nodes: usize, max_nodes: usize, dim: usize, seed: u64) -> Vec<Graph> {
    (min_nodes..=max_nodes)
        .map(|n| shape_graph(shape, n, dim, seed.wrapping_add(n as u64)))
        .collect()
}
