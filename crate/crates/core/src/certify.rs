//! Majority voting over subgraph predictions and the certified perturbation size.

use rayon::prelude::*;

use crate::division::{Division, Strategy};
use crate::error::{Error, Result};
use crate::gnn::{self, GcnParams};
use crate::graph::{Graph, Perturbation, Task};

/// Per-class vote counts over the `T` subgraph predictions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoteTally {
    counts: Vec<usize>,
}

impl VoteTally {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    /// Total number of votes, i.e. `T`.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn tally_votes(predictions: &[usize], num_classes: usize) -> Result<VoteTally> {
    let mut counts = vec![0; num_classes];
    for &y in predictions {
        *counts.get_mut(y).ok_or(Error::ClassOutOfRange {
            class: y,
            num_classes,
        })? += 1;
    }
    Ok(VoteTally { counts })
}

/// Winner and runner-up, each chosen with ties going to the smaller class index.
///
/// Panics if the tally has fewer than two classes.
pub fn voting_predict(tally: &VoteTally) -> (usize, usize) {
    assert!(tally.num_classes() >= 2, "voting needs at least two classes");
    let best_excluding = |skip: Option<usize>| {
        let mut best: Option<usize> = None;
        for (y, &c) in tally.counts.iter().enumerate() {
            if Some(y) == skip {
                continue;
            }
            if best.is_none_or(|b| c > tally.counts[b]) {
                best = Some(y);
            }
        }
        best.expect("at least two classes")
    };
    let winner = best_excluding(None);
    (winner, best_excluding(Some(winner)))
}

/// `floor((c_a - c_b - [a > b]) / 2)`, never negative.
pub fn certified_size(tally: &VoteTally) -> usize {
    let (a, b) = voting_predict(tally);
    let gap = tally.counts[a] as i64 - tally.counts[b] as i64 - i64::from(a > b);
    (gap.max(0) / 2) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub voted_class: usize,
    pub runner_up: usize,
    pub tally: VoteTally,
    pub certified_size: usize,
    pub strategy: Strategy,
    pub task: Task,
}

impl Certificate {
    pub fn from_tally(tally: VoteTally, strategy: Strategy, task: Task) -> Self {
        let (voted_class, runner_up) = voting_predict(&tally);
        let certified_size = certified_size(&tally);
        Self {
            voted_class,
            runner_up,
            tally,
            certified_size,
            strategy,
            task,
        }
    }
}

/// Size of `p` as counted by the bound for `strategy`.
///
/// Edge-centric: `|E+| + |E-| + |E_V+| + |E_V-| + |E_Vr|`.
/// Node-centric: `|E+| + |E-| + |V+| + |V-| + |Vr|`.
pub fn perturbation_size(p: &Perturbation, g: &Graph, strategy: Strategy) -> Result<usize> {
    p.check(g)?;
    let edges = p.edges_added.len() + p.edges_deleted.len();
    Ok(match strategy {
        Strategy::EdgeCentric => {
            let induced = p.induced_edges(g);
            edges + induced.injected.len() + induced.deleted.len() + induced.rewritten.len()
        }
        Strategy::NodeCentric => {
            edges + p.nodes_added.len() + p.nodes_deleted.len() + p.features_rewritten.len()
        }
    })
}

/// Base-classifier prediction on each subgraph, in index order.
pub fn subgraph_predictions(
    g: &Graph,
    task: Task,
    division: &Division,
    params: &GcnParams,
) -> Result<Vec<usize>> {
    if let Task::NodeClassification(v) = task {
        if !g.contains_node(v) {
            return Err(Error::MissingNode(v));
        }
    }
    let set = division.divide(g, task.kind())?;
    set.subgraphs
        .par_iter()
        .map(|sub| match task {
            Task::NodeClassification(v) => gnn::predict_node(sub, params, v),
            Task::GraphClassification => gnn::predict_graph(sub, params),
        })
        .collect()
}

/// Divides `g`, votes over the subgraph predictions and derives the certified size.
pub fn certify(
    g: &Graph,
    task: Task,
    division: &Division,
    params: &GcnParams,
) -> Result<Certificate> {
    if params.num_classes() < 2 {
        return Err(Error::Config("certification needs at least two classes".into()));
    }
    let predictions = subgraph_predictions(g, task, division, params)?;
    let tally = tally_votes(&predictions, params.num_classes())?;
    Ok(Certificate::from_tally(tally, division.strategy, task))
}

/// One certified test target with its ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveRecord {
    pub voted_class: usize,
    pub certified_size: usize,
    pub label: usize,
}

impl CurveRecord {
    pub fn new(cert: &Certificate, label: usize) -> Self {
        Self {
            voted_class: cert.voted_class,
            certified_size: cert.certified_size,
            label,
        }
    }
}

/// Fraction of targets that are correctly classified with certified size at least `m`.
pub fn certified_accuracy_curve(records: &[CurveRecord], m_values: &[usize]) -> Vec<(usize, f64)> {
    m_values
        .iter()
        .map(|&m| {
            let hits = records
                .iter()
                .filter(|r| r.voted_class == r.label && r.certified_size >= m)
                .count();
            let frac = if records.is_empty() {
                0.0
            } else {
                hits as f64 / records.len() as f64
            };
            (m, frac)
        })
        .collect()
}
