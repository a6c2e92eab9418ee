//! A small GCN with mean aggregation and directed message passing.
//!
//! Layer `k` computes `h_v = ReLU(W_k · mean({h_u : u ∈ N(v)} ∪ {h_v}))`, where
//! `N(v)` is every neighbour for undirected graphs and only the in-neighbours for
//! directed ones. The last layer is linear and yields logits. Aggregation sums
//! run in ascending node-id order, so a node's output depends bit-for-bit only
//! on the nodes that can reach it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::division::Division;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, TaskKind};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(w, a)| w * a).sum();
        }
    }
}

/// Weights of a K-layer GCN. Layer `k` maps `dims[k-1]` features to `dims[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    layers: Vec<Matrix>,
}

impl GcnParams {
    pub fn new(layers: Vec<Matrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::DimensionMismatch("a GCN needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].cols != pair[0].rows {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    k + 1,
                    pair[0].rows,
                    k + 2,
                    pair[1].cols
                )));
            }
        }
        if layers.iter().any(|w| w.data.iter().any(|x| !x.is_finite())) {
            return Err(Error::DimensionMismatch("non-finite weight".into()));
        }
        Ok(Self { layers })
    }

    /// Uniform init in `±1/sqrt(fan_in)` from a seeded ChaCha8 stream.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid layer dims {dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let bound = 1.0 / (d[0] as f64).sqrt();
                let data = (0..d[0] * d[1])
                    .map(|_| rng.random::<f64>() * 2.0 * bound - bound)
                    .collect();
                Matrix::from_row_major(d[1], d[0], data)
            })
            .collect::<Result<_>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Matrix] {
        &mut self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn num_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    /// `(d_0, d_1, ..., d_K)`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|w| w.rows))
            .collect()
    }
}

/// Final-layer outputs, one row per node in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLogits {
    ids: Vec<NodeId>,
    values: Matrix,
}

impl NodeLogits {
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn get(&self, id: NodeId) -> Option<&[f64]> {
        self.ids.binary_search(&id).ok().map(|i| self.values.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[f64])> + '_ {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, self.values.row(i)))
    }
}

/// Per-node aggregation sets (self included), as sorted row indices.
struct Structure {
    ids: Vec<NodeId>,
    agg: Vec<Vec<usize>>,
}

impl Structure {
    fn of(g: &Graph) -> Self {
        let ids: Vec<NodeId> = g.node_ids().collect();
        let pos = |id: NodeId| ids.binary_search(&id).ok();
        let mut agg: Vec<Vec<usize>> = (0..ids.len()).map(|i| vec![i]).collect();
        for (u, v) in g.edges() {
            let (Some(iu), Some(iv)) = (pos(u), pos(v)) else {
                continue;
            };
            agg[iv].push(iu);
            if !g.is_directed() {
                agg[iu].push(iv);
            }
        }
        for set in &mut agg {
            set.sort_unstable();
            set.dedup();
        }
        Self { ids, agg }
    }
}

/// Everything the backward pass needs from a forward pass.
struct Trace {
    structure: Structure,
    /// Mean-aggregated inputs of each layer.
    aggregated: Vec<Matrix>,
    /// Pre-activations of each layer; the last one holds the logits.
    pre: Vec<Matrix>,
}

fn features_matrix(g: &Graph, params: &GcnParams) -> Result<Matrix> {
    let d = params.input_dim();
    let mut x = Matrix::zeros(g.num_nodes(), d);
    for (i, (id, node)) in g.nodes().enumerate() {
        if node.features.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "node {id} has {} features but the model expects {d}",
                node.features.len()
            )));
        }
        x.row_mut(i).copy_from_slice(&node.features);
    }
    Ok(x)
}

fn forward_trace(g: &Graph, params: &GcnParams) -> Result<Trace> {
    let structure = Structure::of(g);
    let n = structure.ids.len();
    let mut h = features_matrix(g, params)?;
    let mut aggregated = Vec::with_capacity(params.num_layers());
    let mut pre = Vec::with_capacity(params.num_layers());
    let last = params.num_layers() - 1;
    for (k, w) in params.layers.iter().enumerate() {
        let mut a = Matrix::zeros(n, w.cols);
        for (v, set) in structure.agg.iter().enumerate() {
            let row = a.row_mut(v);
            for &u in set {
                for (acc, x) in row.iter_mut().zip(h.row(u)) {
                    *acc += x;
                }
            }
            let count = set.len() as f64;
            for acc in row.iter_mut() {
                *acc /= count;
            }
        }
        let mut z = Matrix::zeros(n, w.rows);
        for v in 0..n {
            w.matvec(a.row(v), z.row_mut(v));
        }
        h = z.clone();
        if k != last {
            for x in h.data.iter_mut() {
                *x = x.max(0.0);
            }
        }
        aggregated.push(a);
        pre.push(z);
    }
    Ok(Trace {
        structure,
        aggregated,
        pre,
    })
}

/// Logits for every node of `g`.
pub fn gcn_forward(g: &Graph, params: &GcnParams) -> Result<NodeLogits> {
    let mut trace = forward_trace(g, params)?;
    let values = trace.pre.pop().expect("at least one layer");
    Ok(NodeLogits {
        ids: trace.structure.ids,
        values,
    })
}

/// Pre-activations of every layer; the last entry holds the logits.
pub fn preactivations(g: &Graph, params: &GcnParams) -> Result<Vec<Matrix>> {
    Ok(forward_trace(g, params)?.pre)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest value; the smallest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate().skip(1) {
        if x > values[best] {
            best = i;
        }
    }
    best
}

/// Class of the softmax over `logits`.
pub fn classify(logits: &[f64]) -> usize {
    argmax(&softmax(logits))
}

pub fn predict_node(g: &Graph, params: &GcnParams, v: NodeId) -> Result<usize> {
    if !g.contains_node(v) {
        return Err(Error::MissingNode(v));
    }
    let logits = gcn_forward(g, params)?;
    Ok(classify(logits.get(v).expect("node present")))
}

/// Class returned for a graph with no pooled node.
pub const EMPTY_GRAPH_CLASS: usize = 0;

fn pooled_logits(g: &Graph, logits: &NodeLogits) -> Option<Vec<f64>> {
    let mut sum: Option<Vec<f64>> = None;
    let mut count = 0usize;
    for (id, row) in logits.iter() {
        if !g.is_pooled(id) {
            continue;
        }
        count += 1;
        match &mut sum {
            None => sum = Some(row.to_vec()),
            Some(s) => s.iter_mut().zip(row).for_each(|(a, b)| *a += b),
        }
    }
    sum.map(|mut s| {
        s.iter_mut().for_each(|x| *x /= count as f64);
        s
    })
}

/// Mean of the final node logits, or `None` when nothing is pooled.
pub fn graph_logits(g: &Graph, params: &GcnParams) -> Result<Option<Vec<f64>>> {
    let logits = gcn_forward(g, params)?;
    Ok(pooled_logits(g, &logits))
}

pub fn predict_graph(g: &Graph, params: &GcnParams) -> Result<usize> {
    Ok(graph_logits(g, params)?.map_or(EMPTY_GRAPH_CLASS, |z| classify(&z)))
}

/// Supervision for one training graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Nodes(BTreeMap<NodeId, usize>),
    Graph(usize),
}

impl Labels {
    pub fn task(&self) -> TaskKind {
        match self {
            Labels::Nodes(_) => TaskKind::Node,
            Labels::Graph(_) => TaskKind::Graph,
        }
    }
}

fn cross_entropy(logits: &[f64], y: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    let mut grad = softmax(logits);
    grad[y] -= 1.0;
    (lse - logits[y], grad)
}

fn check_class(y: usize, num_classes: usize) -> Result<()> {
    if y >= num_classes {
        return Err(Error::ClassOutOfRange {
            class: y,
            num_classes,
        });
    }
    Ok(())
}

/// Mean cross-entropy loss and its exact gradient with respect to every layer.
pub fn backward(g: &Graph, params: &GcnParams, labels: &Labels) -> Result<(f64, Vec<Matrix>)> {
    let trace = forward_trace(g, params)?;
    let ids = &trace.structure.ids;
    let n = ids.len();
    let classes = params.num_classes();
    let logits = trace.pre.last().expect("at least one layer");
    let mut dz = Matrix::zeros(n, classes);
    let loss = match labels {
        Labels::Nodes(map) => {
            if map.is_empty() {
                return Err(Error::MissingLabels("no labeled nodes".into()));
            }
            let scale = 1.0 / map.len() as f64;
            let mut loss = 0.0;
            for (&id, &y) in map {
                check_class(y, classes)?;
                let i = ids.binary_search(&id).map_err(|_| Error::MissingNode(id))?;
                let (l, grad) = cross_entropy(logits.row(i), y);
                loss += l * scale;
                for (d, gr) in dz.row_mut(i).iter_mut().zip(grad) {
                    *d = gr * scale;
                }
            }
            loss
        }
        Labels::Graph(y) => {
            check_class(*y, classes)?;
            let pooled: Vec<usize> = (0..n).filter(|&i| g.is_pooled(ids[i])).collect();
            if pooled.is_empty() {
                return Err(Error::MissingLabels("graph has no pooled node".into()));
            }
            let mut mean = vec![0.0; classes];
            for &i in &pooled {
                mean.iter_mut().zip(logits.row(i)).for_each(|(a, b)| *a += b);
            }
            let scale = 1.0 / pooled.len() as f64;
            mean.iter_mut().for_each(|x| *x *= scale);
            let (loss, grad) = cross_entropy(&mean, *y);
            for &i in &pooled {
                for (d, gr) in dz.row_mut(i).iter_mut().zip(&grad) {
                    *d = gr * scale;
                }
            }
            loss
        }
    };

    let mut grads: Vec<Matrix> = params
        .layers
        .iter()
        .map(|w| Matrix::zeros(w.rows, w.cols))
        .collect();
    for k in (0..params.num_layers()).rev() {
        let w = &params.layers[k];
        let a = &trace.aggregated[k];
        let gw = &mut grads[k];
        for v in 0..n {
            let dzv = dz.row(v);
            let av = a.row(v);
            for (i, &d) in dzv.iter().enumerate() {
                if d != 0.0 {
                    for (j, &x) in av.iter().enumerate() {
                        gw.data[i * w.cols + j] += d * x;
                    }
                }
            }
        }
        if k == 0 {
            break;
        }
        // Through the mean aggregation, then the ReLU of the previous layer.
        let mut dh = Matrix::zeros(n, w.cols);
        let mut da = vec![0.0; w.cols];
        for (v, set) in trace.structure.agg.iter().enumerate() {
            da.iter_mut().for_each(|x| *x = 0.0);
            for (i, &d) in dz.row(v).iter().enumerate() {
                for (j, x) in da.iter_mut().enumerate() {
                    *x += w.get(i, j) * d;
                }
            }
            let share = 1.0 / set.len() as f64;
            for &u in set {
                for (acc, x) in dh.row_mut(u).iter_mut().zip(&da) {
                    *acc += x * share;
                }
            }
        }
        let prev = &trace.pre[k - 1];
        for (d, &z) in dh.data.iter_mut().zip(&prev.data) {
            if z <= 0.0 {
                *d = 0.0;
            }
        }
        dz = dh;
    }
    Ok((loss, grads))
}

/// Loss only, for finite-difference checks and monitoring.
pub fn loss(g: &Graph, params: &GcnParams, labels: &Labels) -> Result<f64> {
    backward(g, params, labels).map(|(l, _)| l)
}

/// One training graph with its supervision.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub graph: Graph,
    pub labels: Labels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Widths of the hidden layers; the GCN has `hidden.len() + 1` layers.
    pub hidden: Vec<usize>,
    pub num_classes: usize,
    /// When set, every example's subgraphs are added with the same labels.
    pub augment: Option<Division>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.1,
            seed: 0,
            hidden: vec![16],
            num_classes: 2,
            augment: None,
        }
    }
}

/// Adds each example's subgraphs to the training set. Subgraphs without a
/// pooled node carry no graph-level signal and are skipped.
pub fn augment_dataset(dataset: &[Example], division: &Division) -> Result<Vec<Example>> {
    let mut out = dataset.to_vec();
    for ex in dataset {
        let set = division.divide(&ex.graph, ex.labels.task())?;
        for sub in set.subgraphs {
            let usable = match &ex.labels {
                Labels::Nodes(_) => true,
                Labels::Graph(_) => sub.node_ids().any(|id| sub.is_pooled(id)),
            };
            if usable {
                out.push(Example {
                    graph: sub,
                    labels: ex.labels.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Full-batch gradient descent on the mean loss over all examples.
pub fn train(dataset: &[Example], cfg: &TrainConfig) -> Result<GcnParams> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::MissingLabels("empty training set".into()))?;
    let input_dim = first
        .graph
        .feature_dim()
        .ok_or_else(|| Error::DimensionMismatch("first training graph has no nodes".into()))?;
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    let dims: Vec<usize> = std::iter::once(input_dim)
        .chain(cfg.hidden.iter().copied())
        .chain(std::iter::once(cfg.num_classes))
        .collect();
    let mut params = GcnParams::init(&dims, cfg.seed)?;
    if cfg.epochs == 0 {
        return Ok(params);
    }
    let examples = match &cfg.augment {
        Some(division) => augment_dataset(dataset, division)?,
        None => dataset.to_vec(),
    };
    let scale = 1.0 / examples.len() as f64;
    for epoch in 1..=cfg.epochs {
        let mut total = 0.0;
        let mut acc: Vec<Matrix> = params
            .layers
            .iter()
            .map(|w| Matrix::zeros(w.rows, w.cols))
            .collect();
        for ex in &examples {
            let (l, grads) = backward(&ex.graph, &params, &ex.labels)?;
            total += l;
            for (a, gr) in acc.iter_mut().zip(grads) {
                a.data.iter_mut().zip(gr.data).for_each(|(x, y)| *x += y);
            }
        }
        if !total.is_finite() {
            return Err(Error::Divergence(epoch));
        }
        for (w, gr) in params.layers.iter_mut().zip(acc) {
            for (x, d) in w.data.iter_mut().zip(gr.data) {
                *x -= cfg.learning_rate * d * scale;
            }
        }
        if params.layers.iter().any(|w| w.data.iter().any(|x| !x.is_finite())) {
            return Err(Error::Divergence(epoch));
        }
    }
    Ok(params)
}
