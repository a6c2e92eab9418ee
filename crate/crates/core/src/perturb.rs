//! Attack enumeration and the brute-force verification harness.
//!
//! Attacks are built from atomic operations (delete an edge, add an edge,
//! delete a node, rewrite a node's features, inject a node with a neighbour
//! set). Exhaustive enumeration walks every consistent combination whose
//! perturbation size stays within the budget, each exactly once, in a fixed
//! order. Every attack is then replayed against the voting classifier.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certify::{perturbation_size, subgraph_predictions, tally_votes, voting_predict, Certificate, VoteTally};
use crate::division::{Division, Strategy};
use crate::error::{Error, Result};
use crate::gnn::{self, GcnParams};
use crate::graph::{apply_perturbation, Edge, Graph, InjectedNode, NodeId, Perturbation, Task, TaskKind};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Feature vectors an attacker may write: zeros, large constants of both signs,
/// and copies of the features of up to two existing nodes.
pub fn default_feature_candidates(g: &Graph) -> Vec<Vec<f64>> {
    let d = g.feature_dim().unwrap_or(1);
    let mut out = vec![vec![0.0; d], vec![50.0; d], vec![-50.0; d]];
    out.extend(g.nodes().take(2).map(|(_, n)| n.features.clone()));
    dedup_vectors(out)
}

fn dedup_vectors(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    vs.into_iter()
        .filter(|v| seen.insert(v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    EdgeAdd,
    EdgeDelete,
    /// Inject up to `max_nodes` nodes, each linked to between one and
    /// `max_incident_edges` existing nodes, with features from `features`.
    NodeInject {
        max_incident_edges: usize,
        max_nodes: usize,
        features: Vec<Vec<f64>>,
    },
    NodeDelete,
    FeatureRewrite { candidates: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    Exhaustive,
    Randomized { seed: u64, samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpace {
    pub budget: usize,
    /// Cost model that `budget` is measured in.
    pub strategy: Strategy,
    pub allowed: Vec<AttackKind>,
    pub enumeration: Enumeration,
    /// Node that may be neither deleted nor rewritten (the node-classification target).
    pub protected: Option<NodeId>,
    pub cap: u64,
}

impl AttackSpace {
    pub fn exhaustive(budget: usize, strategy: Strategy, allowed: Vec<AttackKind>) -> Self {
        Self {
            budget,
            strategy,
            allowed,
            enumeration: Enumeration::Exhaustive,
            protected: None,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Every kind of manipulation, with the default feature candidates.
    pub fn all_kinds(g: &Graph, max_incident_edges: usize, max_nodes: usize) -> Vec<AttackKind> {
        let candidates = default_feature_candidates(g);
        vec![
            AttackKind::EdgeAdd,
            AttackKind::EdgeDelete,
            AttackKind::NodeInject {
                max_incident_edges,
                max_nodes,
                features: candidates.clone(),
            },
            AttackKind::NodeDelete,
            AttackKind::FeatureRewrite { candidates },
        ]
    }

    pub fn protecting(mut self, task: Task) -> Self {
        self.protected = task.target();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    DeleteEdge(usize),
    AddEdge(Edge),
    DeleteNode(usize),
    Rewrite { node: usize, candidate: usize },
    Inject { neighbors: Vec<usize>, features: usize },
}

/// The atomic operations available on one graph, plus the bookkeeping needed
/// to price combinations of them.
#[derive(Debug, Clone)]
struct OpTable {
    strategy: Strategy,
    ids: Vec<NodeId>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    ops: Vec<Op>,
    rewrite_candidates: Vec<Vec<f64>>,
    inject_features: Vec<Vec<f64>>,
    max_injected: usize,
    next_id: NodeId,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl OpTable {
    fn new(g: &Graph, space: &AttackSpace) -> Self {
        let ids: Vec<NodeId> = g.node_ids().collect();
        let edges: Vec<Edge> = g.edges().collect();
        let pos = |id: NodeId| ids.binary_search(&id).expect("edge endpoint in graph");
        let mut incident = vec![Vec::new(); ids.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            incident[pos(a)].push(e);
            if a != b {
                incident[pos(b)].push(e);
            }
        }
        let protected_pos = space.protected.and_then(|t| ids.binary_search(&t).ok());
        let protected = |i: usize| protected_pos == Some(i);
        let mut table = Self {
            strategy: space.strategy,
            next_id: g.max_node_id().map_or(0, |m| m + 1),
            ids,
            edges,
            incident,
            ops: Vec::new(),
            rewrite_candidates: Vec::new(),
            inject_features: Vec::new(),
            max_injected: 0,
        };
        let n = table.ids.len();
        let has = |want: fn(&AttackKind) -> bool| space.allowed.iter().any(want);
        if has(|k| matches!(k, AttackKind::EdgeDelete)) {
            table.ops.extend((0..table.edges.len()).map(Op::DeleteEdge));
        }
        if has(|k| matches!(k, AttackKind::EdgeAdd)) {
            for i in 0..n {
                let lo = if g.is_directed() { 0 } else { i + 1 };
                for j in lo..n {
                    let (u, v) = (table.ids[i], table.ids[j]);
                    if u != v && !g.contains_edge(u, v) {
                        table.ops.push(Op::AddEdge((u, v)));
                    }
                }
            }
        }
        if has(|k| matches!(k, AttackKind::NodeDelete)) {
            table
                .ops
                .extend((0..n).filter(|&i| !protected(i)).map(Op::DeleteNode));
        }
        for kind in &space.allowed {
            if let AttackKind::FeatureRewrite { candidates } = kind {
                table.rewrite_candidates = dedup_vectors(candidates.clone());
                for node in (0..n).filter(|&i| !protected(i)) {
                    for candidate in 0..table.rewrite_candidates.len() {
                        table.ops.push(Op::Rewrite { node, candidate });
                    }
                }
            }
        }
        for kind in &space.allowed {
            if let AttackKind::NodeInject {
                max_incident_edges,
                max_nodes,
                features,
            } = kind
            {
                table.inject_features = dedup_vectors(features.clone());
                table.max_injected = *max_nodes;
                for k in 1..=(*max_incident_edges).min(n) {
                    for neighbors in subsets(n, k) {
                        for f in 0..table.inject_features.len() {
                            table.ops.push(Op::Inject {
                                neighbors: neighbors.clone(),
                                features: f,
                            });
                        }
                    }
                }
            }
        }
        table
    }

    fn materialize(&self, chosen: &[u32]) -> Perturbation {
        let mut p = Perturbation::default();
        let mut next = self.next_id;
        for &c in chosen {
            match &self.ops[c as usize] {
                Op::DeleteEdge(e) => {
                    p.edges_deleted.insert(self.edges[*e]);
                }
                Op::AddEdge(e) => {
                    p.edges_added.insert(*e);
                }
                Op::DeleteNode(i) => {
                    p.nodes_deleted.insert(self.ids[*i]);
                }
                Op::Rewrite { node, candidate } => {
                    p.features_rewritten
                        .insert(self.ids[*node], self.rewrite_candidates[*candidate].clone());
                }
                Op::Inject {
                    neighbors,
                    features,
                } => {
                    let edges = neighbors.iter().map(|&i| (next, self.ids[i])).collect();
                    p.nodes_added.insert(
                        next,
                        InjectedNode {
                            features: self.inject_features[*features].clone(),
                            edges,
                        },
                    );
                    next += 1;
                }
            }
        }
        p
    }
}

/// Incremental consistency and cost state for a partial combination of ops.
struct Walk<'a> {
    table: &'a OpTable,
    budget: usize,
    cost: usize,
    chosen: Vec<u32>,
    deleted: Vec<bool>,
    rewritten: Vec<bool>,
    edge_ops_at: Vec<u32>,
    injected_at: Vec<u32>,
    injected: usize,
    deleted_cover: Vec<u32>,
    rewritten_cover: Vec<u32>,
}

impl<'a> Walk<'a> {
    fn new(table: &'a OpTable, budget: usize) -> Self {
        let n = table.ids.len();
        let m = table.edges.len();
        Self {
            table,
            budget,
            cost: 0,
            chosen: Vec::new(),
            deleted: vec![false; n],
            rewritten: vec![false; n],
            edge_ops_at: vec![0; n],
            injected_at: vec![0; n],
            injected: 0,
            deleted_cover: vec![0; m],
            rewritten_cover: vec![0; m],
        }
    }

    fn endpoints(&self, e: Edge) -> (usize, usize) {
        let pos = |id| self.table.ids.binary_search(&id).expect("known node");
        (pos(e.0), pos(e.1))
    }

    fn fresh_edges(&self, node: usize, cover: &[u32]) -> usize {
        self.table.incident[node]
            .iter()
            .filter(|&&e| cover[e] == 0)
            .count()
    }

    /// Cost of adding op `i`, or `None` if it is inconsistent with the current choice.
    fn price(&self, i: usize) -> Option<usize> {
        let edge_centric = self.table.strategy == Strategy::EdgeCentric;
        match &self.table.ops[i] {
            Op::DeleteEdge(e) => {
                let (a, b) = self.endpoints(self.table.edges[*e]);
                (!self.deleted[a] && !self.deleted[b]).then_some(1)
            }
            Op::AddEdge(e) => {
                let (a, b) = self.endpoints(*e);
                (!self.deleted[a] && !self.deleted[b]).then_some(1)
            }
            Op::DeleteNode(u) => {
                let free = !self.deleted[*u]
                    && !self.rewritten[*u]
                    && self.edge_ops_at[*u] == 0
                    && self.injected_at[*u] == 0;
                free.then(|| {
                    if edge_centric {
                        self.fresh_edges(*u, &self.deleted_cover)
                    } else {
                        1
                    }
                })
            }
            Op::Rewrite { node, .. } => {
                let free = !self.deleted[*node] && !self.rewritten[*node];
                free.then(|| {
                    if edge_centric {
                        self.fresh_edges(*node, &self.rewritten_cover)
                    } else {
                        1
                    }
                })
            }
            Op::Inject { neighbors, .. } => {
                let free = self.injected < self.table.max_injected
                    && neighbors.iter().all(|&u| !self.deleted[u]);
                free.then(|| if edge_centric { neighbors.len() } else { 1 })
            }
        }
    }

    fn push(&mut self, i: usize, cost: usize) {
        self.cost += cost;
        self.chosen.push(i as u32);
        self.apply(i, 1);
    }

    fn pop(&mut self, cost: usize) {
        let i = self.chosen.pop().expect("non-empty walk") as usize;
        self.cost -= cost;
        self.apply(i, -1);
    }

    fn apply(&mut self, i: usize, sign: i32) {
        let bump = |x: &mut u32| *x = (*x as i32 + sign) as u32;
        let table = self.table;
        match &table.ops[i] {
            Op::DeleteEdge(e) => {
                let (a, b) = self.endpoints(table.edges[*e]);
                bump(&mut self.edge_ops_at[a]);
                bump(&mut self.edge_ops_at[b]);
            }
            Op::AddEdge(e) => {
                let (a, b) = self.endpoints(*e);
                bump(&mut self.edge_ops_at[a]);
                bump(&mut self.edge_ops_at[b]);
            }
            Op::DeleteNode(u) => {
                self.deleted[*u] = sign > 0;
                for &e in &table.incident[*u] {
                    bump(&mut self.deleted_cover[e]);
                }
            }
            Op::Rewrite { node, .. } => {
                self.rewritten[*node] = sign > 0;
                for &e in &table.incident[*node] {
                    bump(&mut self.rewritten_cover[e]);
                }
            }
            Op::Inject { neighbors, .. } => {
                self.injected = (self.injected as i32 + sign) as usize;
                for &u in neighbors {
                    bump(&mut self.injected_at[u]);
                }
            }
        }
    }

    /// Visits every consistent combination extending the current one with ops
    /// at index `start` or later. Returns `false` if `visit` asked to stop.
    fn explore(&mut self, start: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if !visit(&self.chosen) {
            return false;
        }
        for i in start..self.table.ops.len() {
            let Some(c) = self.price(i) else { continue };
            if self.cost + c > self.budget {
                continue;
            }
            self.push(i, c);
            // injections may repeat, everything else is used at most once
            let next = if matches!(self.table.ops[i], Op::Inject { .. }) { i } else { i + 1 };
            let go_on = self.explore(next, visit);
            self.pop(c);
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// A finite, ordered list of attacks on one graph.
#[derive(Debug, Clone)]
pub struct AttackPlan {
    table: OpTable,
    choices: Vec<Box<[u32]>>,
}

impl AttackPlan {
    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Perturbation> {
        self.choices.get(i).map(|c| self.table.materialize(c))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Perturbation> + '_ {
        self.choices.iter().map(|c| self.table.materialize(c))
    }
}

/// Counts exhaustive attacks, giving up once the count passes `limit`.
fn count_exhaustive(table: &OpTable, budget: usize, limit: u64) -> (u64, bool) {
    let mut count = 0u64;
    let mut walk = Walk::new(table, budget);
    let finished = walk.explore(0, &mut |_| {
        count += 1;
        count <= limit
    });
    (count, finished)
}

/// Lists the attacks described by `space` against `g`.
pub fn enumerate_attacks(g: &Graph, space: &AttackSpace) -> Result<AttackPlan> {
    let table = OpTable::new(g, space);
    let choices = match space.enumeration {
        Enumeration::Exhaustive => {
            let (count, _) = count_exhaustive(&table, space.budget, space.cap);
            if count > space.cap {
                // report the full size when it is cheap enough to finish counting
                let (count, _) = count_exhaustive(&table, space.budget, space.cap.saturating_mul(100));
                return Err(Error::EnumerationCap {
                    count,
                    cap: space.cap,
                });
            }
            let mut out = Vec::with_capacity(count as usize);
            let mut walk = Walk::new(&table, space.budget);
            walk.explore(0, &mut |c| {
                out.push(c.to_vec().into_boxed_slice());
                true
            });
            out
        }
        Enumeration::Randomized { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(samples);
            let n_ops = table.ops.len();
            for _ in 0..samples {
                let mut walk = Walk::new(&table, space.budget);
                let target = rng.random_range(0..=space.budget.max(1));
                let mut costs = Vec::new();
                let mut attempts = 0;
                while walk.chosen.len() < target && n_ops > 0 && attempts < 8 * n_ops {
                    attempts += 1;
                    let i = rng.random_range(0..n_ops);
                    let repeatable = matches!(table.ops[i], Op::Inject { .. });
                    if !repeatable && walk.chosen.contains(&(i as u32)) {
                        continue;
                    }
                    if let Some(c) = walk.price(i) {
                        if walk.cost + c <= space.budget {
                            walk.push(i, c);
                            costs.push(c);
                        }
                    }
                }
                let mut chosen = walk.chosen.clone();
                chosen.sort_unstable();
                out.push(chosen.into_boxed_slice());
            }
            out
        }
    };
    Ok(AttackPlan { table, choices })
}

/// Number of subgraph indices whose base prediction differs between `g` and `g_prime`.
pub fn count_altered(
    g: &Graph,
    g_prime: &Graph,
    task: Task,
    division: &Division,
    params: &GcnParams,
) -> Result<usize> {
    if let Task::NodeClassification(v) = task {
        if !g.contains_node(v) {
            return Err(Error::MissingNode(v));
        }
        if !g_prime.contains_node(v) {
            return Err(Error::TargetDeleted(v));
        }
    }
    let before = subgraph_predictions(g, task, division, params)?;
    let after = subgraph_predictions(g_prime, task, division, params)?;
    Ok(before.iter().zip(&after).filter(|(a, b)| a != b).count())
}

/// Upper bound on altered subgraph predictions for `p` under `strategy`.
pub fn theorem_bound(p: &Perturbation, g: &Graph, strategy: Strategy) -> Result<usize> {
    perturbation_size(p, g, strategy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub perturbation: Perturbation,
    pub expected: usize,
    pub observed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub perturbation: Perturbation,
    pub altered: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    pub bound_violations: Vec<BoundViolation>,
    pub attacks_tried: usize,
    pub max_altered: usize,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.bound_violations.is_empty()
    }
}

/// Replays every attack in `space` against the voting classifier behind `cert`.
pub fn verify_certificate(
    g: &Graph,
    cert: &Certificate,
    space: &AttackSpace,
    division: &Division,
    params: &GcnParams,
) -> Result<ViolationReport> {
    if space.budget > cert.certified_size {
        return Err(Error::Config(format!(
            "attack budget {} exceeds the certified size {}",
            space.budget, cert.certified_size
        )));
    }
    if division.strategy != cert.strategy || space.strategy != cert.strategy {
        return Err(Error::Config("strategy differs from the certificate's".into()));
    }
    let task = cert.task;
    let space = space.clone().protecting(task);
    let plan = enumerate_attacks(g, &space)?;
    let clean = subgraph_predictions(g, task, division, params)?;
    let num_classes = params.num_classes();

    let outcomes: Vec<(Perturbation, usize, usize, usize)> = (0..plan.len())
        .into_par_iter()
        .map(|i| -> Result<_> {
            let p = plan.get(i).expect("index in range");
            let g_prime = apply_perturbation(g, &p)?;
            let preds = subgraph_predictions(&g_prime, task, division, params)?;
            let altered = clean.iter().zip(&preds).filter(|(a, b)| a != b).count();
            let bound = theorem_bound(&p, g, division.strategy)?;
            let (voted, _) = voting_predict(&tally_votes(&preds, num_classes)?);
            Ok((p, altered, bound, voted))
        })
        .collect::<Result<_>>()?;

    let mut report = ViolationReport {
        attacks_tried: outcomes.len(),
        ..ViolationReport::default()
    };
    for (p, altered, bound, voted) in outcomes {
        report.max_altered = report.max_altered.max(altered);
        if altered > bound {
            report.bound_violations.push(BoundViolation {
                perturbation: p.clone(),
                altered,
                bound,
            });
        }
        if voted != cert.voted_class {
            report.violations.push(Violation {
                perturbation: p,
                expected: cert.voted_class,
                observed: voted,
            });
        }
    }
    Ok(report)
}

/// All tallies reachable from `tally` by changing exactly `k` predictions,
/// each to a different class.
pub fn vote_redistributions(tally: &VoteTally, k: usize) -> BTreeSet<Vec<usize>> {
    fn rec(counts: &mut Vec<usize>, moved: &mut Vec<usize>, k: usize, from: usize, out: &mut BTreeSet<Vec<usize>>) {
        if k == 0 {
            out.insert(counts.clone());
            return;
        }
        let c = counts.len();
        for src in from..c {
            // only votes that have not been moved yet may change
            if counts[src] <= moved[src] {
                continue;
            }
            for dst in 0..c {
                if dst == src {
                    continue;
                }
                counts[src] -= 1;
                counts[dst] += 1;
                moved[dst] += 1;
                rec(counts, moved, k - 1, src, out);
                moved[dst] -= 1;
                counts[dst] -= 1;
                counts[src] += 1;
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut counts = tally.counts().to_vec();
    let mut moved = vec![0; counts.len()];
    rec(&mut counts, &mut moved, k, 0, &mut out);
    out
}

/// A redistribution of `k` altered predictions that changes the voted class, if any.
pub fn find_vote_flip(tally: &VoteTally, k: usize) -> Option<VoteTally> {
    let (winner, _) = voting_predict(tally);
    vote_redistributions(tally, k)
        .into_iter()
        .map(VoteTally::new)
        .find(|t| voting_predict(t).0 != winner)
}

/// Settings for [`theorem_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub inject_degrees: std::ops::RangeInclusive<usize>,
    pub feature_candidates: Vec<Vec<f64>>,
    /// Also try every pair of edge additions/deletions.
    pub edge_pairs: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            inject_degrees: 1..=5,
            feature_candidates: vec![vec![0.0], vec![50.0], vec![-50.0]],
            edge_pairs: false,
        }
    }
}

/// Observed altered counts against the bound for one manipulation class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub theorem: String,
    pub attacks: usize,
    pub checks: usize,
    pub max_altered: usize,
    pub bound: usize,
    /// Smallest `bound - altered` over every check; negative means a violation.
    pub slack: i64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }

    pub fn row(&self, theorem: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.theorem == theorem)
    }
}

/// Base predictions per subgraph: one per node (node task) or one per graph.
fn prediction_grid(
    g: &Graph,
    task: TaskKind,
    division: &Division,
    params: &GcnParams,
) -> Result<Vec<BTreeMap<Option<NodeId>, usize>>> {
    let set = division.divide(g, task)?;
    set.subgraphs
        .par_iter()
        .map(|sub| -> Result<_> {
            Ok(match task {
                TaskKind::Node => gnn::gcn_forward(sub, params)?
                    .iter()
                    .map(|(id, z)| (Some(id), gnn::classify(z)))
                    .collect(),
                TaskKind::Graph => BTreeMap::from([(None, gnn::predict_graph(sub, params)?)]),
            })
        })
        .collect()
}

fn single_manipulations(g: &Graph, cfg: &SweepConfig) -> Vec<(&'static str, Perturbation)> {
    let mut out = Vec::new();
    let ids: Vec<NodeId> = g.node_ids().collect();
    let next = g.max_node_id().map_or(0, |m| m + 1);
    let mut edge_ops: Vec<Perturbation> = Vec::new();
    for (u, v) in g.edges() {
        edge_ops.push(Perturbation::default().delete_edge(u, v));
    }
    for (i, &u) in ids.iter().enumerate() {
        let rest = if g.is_directed() { &ids[..] } else { &ids[i + 1..] };
        for &v in rest {
            if u != v && !g.contains_edge(u, v) {
                edge_ops.push(Perturbation::default().add_edge(u, v));
            }
        }
    }
    out.extend(edge_ops.iter().cloned().map(|p| ("edge", p)));
    if cfg.edge_pairs {
        for i in 0..edge_ops.len() {
            for j in i + 1..edge_ops.len() {
                let mut p = edge_ops[i].clone();
                p.edges_added.extend(edge_ops[j].edges_added.iter().copied());
                p.edges_deleted.extend(edge_ops[j].edges_deleted.iter().copied());
                out.push(("edge", p));
            }
        }
    }
    for k in cfg.inject_degrees.clone() {
        if k > ids.len() {
            break;
        }
        for subset in subsets(ids.len(), k) {
            let neighbors: Vec<NodeId> = subset.iter().map(|&i| ids[i]).collect();
            for x in &cfg.feature_candidates {
                out.push(("node-inject", Perturbation::default().inject_node(next, x.clone(), &neighbors)));
            }
        }
    }
    for &u in &ids {
        out.push(("node-delete", Perturbation::default().delete_node(u)));
    }
    for &u in &ids {
        let class = if g.is_isolated(u) { "isolated-rewrite" } else { "feature-rewrite" };
        for x in &cfg.feature_candidates {
            out.push((class, Perturbation::default().rewrite_features(u, x.clone())));
        }
    }
    out
}

/// For every graph and every single manipulation, checks that the number of
/// altered subgraph predictions stays within the bound, for every admissible
/// target (node task) or for the graph itself (graph task).
pub fn theorem_sweep(
    graphs: &[Graph],
    task: TaskKind,
    division: &Division,
    params: &GcnParams,
    cfg: &SweepConfig,
) -> Result<SweepSummary> {
    let strategy = division.strategy;
    let prefix = match strategy {
        Strategy::EdgeCentric => "edge-centric",
        Strategy::NodeCentric => "node-centric",
    };
    let classes = ["edge", "node-inject", "node-delete", "feature-rewrite", "isolated-rewrite"];
    let mut rows: Vec<SweepRow> = classes
        .iter()
        .map(|c| SweepRow {
            theorem: format!("{prefix}/{c}"),
            attacks: 0,
            checks: 0,
            max_altered: 0,
            bound: 0,
            slack: i64::MAX,
            violations: 0,
        })
        .collect();

    for g in graphs {
        let clean = prediction_grid(g, task, division, params)?;
        let attacks = single_manipulations(g, cfg);
        let results: Vec<(usize, Vec<usize>, usize)> = attacks
            .par_iter()
            .map(|(class, p)| -> Result<_> {
                let row = classes.iter().position(|c| c == class).expect("known class");
                let bound = theorem_bound(p, g, strategy)?;
                let g_prime = apply_perturbation(g, p)?;
                let after = prediction_grid(&g_prime, task, division, params)?;
                let keys: Vec<Option<NodeId>> = match task {
                    TaskKind::Graph => vec![None],
                    TaskKind::Node => g
                        .node_ids()
                        .filter(|u| !p.nodes_deleted.contains(u) && !p.features_rewritten.contains_key(u))
                        .map(Some)
                        .collect(),
                };
                let altered = keys
                    .iter()
                    .map(|k| clean.iter().zip(&after).filter(|(a, b)| a[k] != b[k]).count())
                    .collect();
                Ok((row, altered, bound))
            })
            .collect::<Result<_>>()?;
        for (row, altered, bound) in results {
            let r = &mut rows[row];
            r.attacks += 1;
            r.bound = r.bound.max(bound);
            for a in altered {
                r.checks += 1;
                r.max_altered = r.max_altered.max(a);
                r.slack = r.slack.min(bound as i64 - a as i64);
                if a > bound {
                    r.violations += 1;
                }
            }
        }
    }
    for r in &mut rows {
        if r.checks == 0 {
            r.slack = 0;
        }
    }
    Ok(SweepSummary { rows })
}
