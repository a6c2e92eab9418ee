//! End-to-end run: generate, train with subgraph augmentation, certify every
//! test target, then write the curve, optional verification and sweep tables.
//!
//! Every random choice is seeded from one run seed. Stage seeds are the first
//! eight bytes (big-endian) of SHA-256 over `"{seed}:{stage}"`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::certify::{certified_accuracy_curve, certify, Certificate, CurveRecord};
use crate::division::{Division, HashScheme, Strategy};
use crate::error::{Error, Result};
use crate::gnn::{self, Example, GcnParams, Labels, TrainConfig};
use crate::graph::{Graph, NodeId, Task, TaskKind};
use crate::io::{self, CertificateFile, TargetCertificate};
use crate::perturb::{self, AttackSpace, Enumeration, SweepConfig};
use crate::synth::{self, Dataset, Family, SyntheticSpec};

pub fn sub_seed(seed: u64, stage: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{stage}").as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn default_t(task: TaskKind) -> usize {
    match task {
        TaskKind::Node => 6,
        TaskKind::Graph => 10,
    }
}

/// Train/validation/test fractions.
pub fn default_split(task: TaskKind) -> [f64; 3] {
    match task {
        TaskKind::Node => [0.3, 0.1, 0.6],
        TaskKind::Graph => [0.5, 0.2, 0.3],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub task: TaskKind,
    pub family: Family,
    pub feature_dim: usize,
    pub class_separation: f64,
    pub t: usize,
    pub scheme: HashScheme,
    pub strategy: Strategy,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    /// Random attacks tried per test target at budget `M`; zero skips verification.
    pub verify_samples: usize,
    pub sweep: bool,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(task: TaskKind, out: impl Into<PathBuf>) -> Self {
        let family = match task {
            TaskKind::Node => Family::TwoBlockSbm {
                n_per_block: 8,
                p_in: 0.9,
                p_out: 0.05,
            },
            TaskKind::Graph => Family::RandomGraphClassSet {
                num_graphs: 20,
                min_size: 5,
                max_size: 8,
            },
        };
        Self {
            seed: 0,
            task,
            family,
            feature_dim: 2,
            class_separation: 1.5,
            t: default_t(task),
            scheme: HashScheme::default(),
            strategy: Strategy::EdgeCentric,
            epochs: 200,
            learning_rate: 0.1,
            hidden: vec![16],
            verify_samples: 0,
            sweep: false,
            out: out.into(),
        }
    }

    fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            family: self.family.clone(),
            feature_dim: self.feature_dim,
            class_separation: self.class_separation,
            seed: sub_seed(self.seed, "generate"),
        }
    }

    pub fn division(&self) -> Division {
        Division::new(self.t, self.scheme, self.strategy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::ZeroSubgraphs);
        }
        let expected = match self.family {
            Family::RandomGraphClassSet { .. } => TaskKind::Graph,
            _ => TaskKind::Node,
        };
        if expected != self.task {
            return Err(Error::Config("dataset family does not match the task".into()));
        }
        self.synthetic_spec().validate()
    }

    pub fn manifest(&self) -> serde_json::Value {
        let family = match &self.family {
            Family::TwoBlockSbm { n_per_block, p_in, p_out } => {
                json!({"kind": "two-block-sbm", "n_per_block": n_per_block, "p_in": p_in, "p_out": p_out})
            }
            Family::Caveman { cliques, clique_size } => {
                json!({"kind": "caveman", "cliques": cliques, "clique_size": clique_size})
            }
            Family::RandomGraphClassSet { num_graphs, min_size, max_size } => {
                json!({"kind": "tree-classes", "num_graphs": num_graphs, "min_size": min_size, "max_size": max_size})
            }
        };
        let stages = ["generate", "split", "train", "verify"];
        let seeds: BTreeMap<&str, u64> = stages.iter().map(|&s| (s, sub_seed(self.seed, s))).collect();
        json!({
            "seed": self.seed,
            "stage_seeds": seeds,
            "task": task_name(self.task),
            "family": family,
            "feature_dim": self.feature_dim,
            "class_separation": self.class_separation,
            "T": self.t,
            "hash": self.scheme.algorithm.name(),
            "pad_length": self.scheme.pad_length,
            "strategy": self.strategy.name(),
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "hidden": self.hidden,
            "split": default_split(self.task),
            "verify_samples": self.verify_samples,
            "sweep": self.sweep,
        })
    }
}

pub fn task_name(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Node => "node",
        TaskKind::Graph => "graph",
    }
}

/// One certified test target.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedTarget {
    pub graph_index: usize,
    pub task: Task,
    pub label: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub params: GcnParams,
    pub targets: Vec<CertifiedTarget>,
    pub curve: Vec<(usize, f64)>,
    pub violations: usize,
    pub bound_violations: usize,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Graphs of the dataset plus training examples and test targets.
fn prepare(cfg: &RunConfig, dataset: &Dataset) -> Result<(Vec<Graph>, Vec<Example>, Vec<(usize, Task, usize)>)> {
    let split_seed = sub_seed(cfg.seed, "split");
    let fractions = default_split(cfg.task);
    match dataset {
        Dataset::Nodes(g) => {
            let ids: Vec<NodeId> = g.node_ids().collect();
            let parts = synth::split_indices(ids.len(), &fractions, split_seed);
            let label = |v: NodeId| g.node_label(v).ok_or_else(|| Error::MissingLabels(format!("node {v}")));
            let train: BTreeMap<NodeId, usize> = parts[0]
                .iter()
                .map(|&i| Ok((ids[i], label(ids[i])?)))
                .collect::<Result<_>>()?;
            let mut test: Vec<NodeId> = parts[2].iter().map(|&i| ids[i]).collect();
            test.sort_unstable();
            let targets = test
                .into_iter()
                .map(|v| Ok((0, Task::NodeClassification(v), label(v)?)))
                .collect::<Result<_>>()?;
            let examples = vec![Example {
                graph: g.clone(),
                labels: Labels::Nodes(train),
            }];
            Ok((vec![g.clone()], examples, targets))
        }
        Dataset::Graphs(graphs) => {
            let parts = synth::split_indices(graphs.len(), &fractions, split_seed);
            let label = |i: usize| {
                graphs[i]
                    .graph_label()
                    .ok_or_else(|| Error::MissingLabels(format!("graph {i}")))
            };
            let examples = parts[0]
                .iter()
                .map(|&i| {
                    Ok(Example {
                        graph: graphs[i].clone(),
                        labels: Labels::Graph(label(i)?),
                    })
                })
                .collect::<Result<_>>()?;
            let mut test = parts[2].clone();
            test.sort_unstable();
            let targets = test
                .into_iter()
                .map(|i| Ok((i, Task::GraphClassification, label(i)?)))
                .collect::<Result<_>>()?;
            Ok((graphs.clone(), examples, targets))
        }
    }
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary> {
    stage("config", cfg.validate())?;
    let out = cfg.out.as_path();
    let spec = cfg.synthetic_spec();
    let dataset = stage("generate", synth::generate(&spec))?;
    let (graphs, examples, targets) = stage("split", prepare(cfg, &dataset))?;
    stage("generate", io::save_graphs(&graphs, &out.join("dataset.json")))?;

    let division = cfg.division();
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        seed: sub_seed(cfg.seed, "train"),
        hidden: cfg.hidden.clone(),
        num_classes: spec.num_classes(),
        augment: Some(division),
    };
    let params = stage("train", gnn::train(&examples, &train_cfg))?;
    stage("train", io::save_params(&params, &out.join("params.json")))?;

    let certified: Vec<CertifiedTarget> = stage(
        "certify",
        targets
            .iter()
            .map(|&(gi, task, label)| {
                Ok(CertifiedTarget {
                    graph_index: gi,
                    task,
                    label,
                    certificate: certify(&graphs[gi], task, &division, &params)?,
                })
            })
            .collect(),
    )?;
    let files: Vec<TargetCertificate> = certified
        .iter()
        .map(|c| TargetCertificate {
            node: c.task.target(),
            graph: (cfg.task == TaskKind::Graph).then_some(c.graph_index),
            label: Some(c.label),
            certificate: CertificateFile::from(&c.certificate),
        })
        .collect();
    stage("certify", io::save_target_certificates(&files, &out.join("certificates.json")))?;

    let records: Vec<CurveRecord> = certified.iter().map(|c| CurveRecord::new(&c.certificate, c.label)).collect();
    let m_values: Vec<usize> = (0..=cfg.t / 2).collect();
    let curve = certified_accuracy_curve(&records, &m_values);
    stage("curve", io::write_text(&out.join("curve.csv"), &io::curve_csv(&curve)))?;

    let (mut violations, mut bound_violations) = (0, 0);
    if cfg.verify_samples > 0 {
        let verify_seed = sub_seed(cfg.seed, "verify");
        let mut table = String::from("target,M,attacks_tried,violations,bound_violations\n");
        for (k, c) in certified.iter().enumerate() {
            let g = &graphs[c.graph_index];
            let space = AttackSpace {
                budget: c.certificate.certified_size,
                strategy: cfg.strategy,
                allowed: AttackSpace::all_kinds(g, 2, 2),
                enumeration: Enumeration::Randomized {
                    seed: verify_seed.wrapping_add(k as u64),
                    samples: cfg.verify_samples,
                },
                protected: None,
                cap: perturb::DEFAULT_ENUMERATION_CAP,
            };
            let report = stage(
                "verify",
                perturb::verify_certificate(g, &c.certificate, &space, &division, &params),
            )?;
            violations += report.violations.len();
            bound_violations += report.bound_violations.len();
            let name = match c.task {
                Task::NodeClassification(v) => format!("node-{v}"),
                Task::GraphClassification => format!("graph-{}", c.graph_index),
            };
            writeln!(
                table,
                "{name},{},{},{},{}",
                c.certificate.certified_size,
                report.attacks_tried,
                report.violations.len(),
                report.bound_violations.len()
            )
            .unwrap();
        }
        stage("verify", io::write_text(&out.join("verify.csv"), &table))?;
    }

    if cfg.sweep {
        let sweep_graphs: Vec<Graph> = match cfg.task {
            TaskKind::Node => graphs.clone(),
            TaskKind::Graph => certified.iter().map(|c| graphs[c.graph_index].clone()).collect(),
        };
        let sweep_cfg = SweepConfig {
            inject_degrees: 1..=2,
            feature_candidates: vec![
                vec![0.0; cfg.feature_dim],
                vec![50.0; cfg.feature_dim],
                vec![-50.0; cfg.feature_dim],
            ],
            edge_pairs: false,
        };
        let summary = stage(
            "sweep",
            perturb::theorem_sweep(&sweep_graphs, cfg.task, &division, &params, &sweep_cfg),
        )?;
        bound_violations += summary.total_violations();
        stage("sweep", io::write_text(&out.join("sweep.csv"), &io::sweep_csv(&summary)))?;
    }

    stage(
        "manifest",
        io::write_text(&out.join("manifest.json"), &io::to_pretty_json(&cfg.manifest())),
    )?;
    Ok(RunSummary {
        params,
        targets: certified,
        curve,
        violations,
        bound_violations,
    })
}
