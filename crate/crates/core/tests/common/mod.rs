#![allow(dead_code)]

use agnncert::gnn::{GcnParams, Matrix};
use agnncert::{Graph, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with `n` nodes, ids drawn sparsely from `0..id_range`, edge
/// probability `p`, optional self-loops, features in [-2, 2].
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, directed: bool, dim: usize, id_range: u64) -> Graph {
    let mut ids: Vec<NodeId> = if id_range as usize <= n {
        (0..n as NodeId).collect()
    } else {
        let mut set = std::collections::BTreeSet::new();
        while set.len() < n {
            set.insert(r.random_range(0..id_range));
        }
        set.into_iter().collect()
    };
    ids.shuffle(r);
    let mut g = Graph::new(directed);
    for &id in &ids {
        let x = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        g.insert_node(id, x, None);
    }
    for &u in &ids {
        for &v in &ids {
            if (directed || u <= v) && r.random::<f64>() < p {
                if u == v && r.random::<f64>() > 0.2 {
                    continue;
                }
                g.insert_edge(u, v);
            }
        }
    }
    g
}

pub fn random_params(r: &mut ChaCha8Rng, dims: &[usize]) -> GcnParams {
    let layers = dims
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1]).map(|_| r.random_range(-1.5..1.5)).collect();
            Matrix::from_row_major(w[1], w[0], data).unwrap()
        })
        .collect();
    GcnParams::new(layers).unwrap()
}

/// Random layer widths `[d0, hidden.., classes]` with `layers` weight matrices.
pub fn random_dims(r: &mut ChaCha8Rng, layers: usize, d0: usize, classes: usize) -> Vec<usize> {
    let mut dims = vec![d0];
    for _ in 1..layers {
        dims.push(r.random_range(2..=5));
    }
    dims.push(classes);
    dims
}
