use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use agnncert::certify::{certified_accuracy_curve, CurveRecord};
use agnncert::division::{HashAlgorithm, HashScheme, Strategy};
use agnncert::gnn::{self, Example, GcnParams, Labels, TrainConfig};
use agnncert::io::{self, CertificateFile, TargetCertificate};
use agnncert::perturb::{self, AttackSpace, Enumeration, SweepConfig};
use agnncert::pipeline::{self, RunConfig};
use agnncert::synth::{self, Dataset, Family, Shape, SyntheticSpec};
use agnncert::{certify, Division, Error, Graph, NodeId, Task, TaskKind};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VIOLATIONS: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "agnncert", version, about = "Certified GNN predictions via hash-based graph division")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = HashArg::Md5)]
    hash: HashArg,
    /// Number of subgraphs (default 6 for node tasks, 10 for graph tasks).
    #[arg(long = "T", global = true)]
    t: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Edge)]
    strategy: StrategyArg,
    #[arg(long, global = true, value_enum, default_value_t = TaskArg::Node)]
    task: TaskArg,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum HashArg {
    Md5,
    Sha256,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StrategyArg {
    Edge,
    Node,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TaskArg {
    Node,
    Graph,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DatasetArg {
    Sbm,
    Caveman,
    Trees,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ShapeArg {
    Path,
    Cycle,
    Star,
    Complete,
    Er,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Dataset family; defaults to sbm for node tasks and trees for graph tasks.
    #[arg(long)]
    dataset: Option<DatasetArg>,
    #[arg(long, default_value_t = 8)]
    n_per_block: usize,
    #[arg(long, default_value_t = 0.9)]
    p_in: f64,
    #[arg(long, default_value_t = 0.05)]
    p_out: f64,
    #[arg(long, default_value_t = 3)]
    cliques: usize,
    #[arg(long, default_value_t = 4)]
    clique_size: usize,
    #[arg(long, default_value_t = 20)]
    num_graphs: usize,
    #[arg(long, default_value_t = 5)]
    min_size: usize,
    #[arg(long, default_value_t = 8)]
    max_size: usize,
    #[arg(long, default_value_t = 2)]
    feature_dim: usize,
    #[arg(long, default_value_t = 1.5)]
    separation: f64,
}

#[derive(Args, Debug, Clone)]
struct TrainArgs {
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    hidden: Vec<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset to <out>/dataset.json.
    Generate(DataArgs),
    /// Split a graph into T subgraphs, one JSON file each.
    Divide {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Train a GCN and write <out>/params.json.
    Train {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        /// Add every training graph's subgraphs to the training set.
        #[arg(long)]
        augment: bool,
    },
    /// Certify one node, every node, or every graph in a file.
    Certify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        node: Option<NodeId>,
    },
    /// Certified accuracy at each m from a certificates file.
    Curve {
        #[arg(long)]
        certificates: PathBuf,
        /// Range of certified sizes, written `lo..hi` (inclusive).
        #[arg(long, default_value = "0..10")]
        m: String,
    },
    /// Attack a certificate within its budget and report any flipped vote.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        node: Option<NodeId>,
        #[arg(long)]
        budget: usize,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 2)]
        max_incident_edges: usize,
        #[arg(long, default_value_t = 2)]
        max_injected: usize,
    },
    /// Check the altered-prediction bounds for every single manipulation.
    Sweep {
        #[arg(long, value_enum)]
        family: ShapeArg,
        #[arg(long, default_value_t = 6)]
        max_nodes: usize,
        /// Parameters to use; random ones are drawn from the seed otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        max_inject_degree: usize,
        #[arg(long)]
        edge_pairs: bool,
    },
    /// Generate, train, certify and write the curve in one run.
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value_t = 0)]
        verify_samples: usize,
        #[arg(long)]
        sweep: bool,
    },
}

enum Failure {
    Data(Error),
    Usage(String),
    Violations(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = Result<(), Failure>;

impl Global {
    fn task(&self) -> TaskKind {
        match self.task {
            TaskArg::Node => TaskKind::Node,
            TaskArg::Graph => TaskKind::Graph,
        }
    }

    fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyArg::Edge => Strategy::EdgeCentric,
            StrategyArg::Node => Strategy::NodeCentric,
        }
    }

    fn scheme(&self) -> HashScheme {
        let algorithm = match self.hash {
            HashArg::Md5 => HashAlgorithm::Md5,
            HashArg::Sha256 => HashAlgorithm::Sha256,
        };
        HashScheme::new(algorithm, agnncert::division::DEFAULT_PAD_LENGTH)
    }

    fn t(&self) -> usize {
        self.t.unwrap_or_else(|| pipeline::default_t(self.task()))
    }

    fn division(&self) -> Division {
        Division::new(self.t(), self.scheme(), self.strategy())
    }
}

impl DataArgs {
    fn family(&self, task: TaskKind) -> Family {
        let dataset = self.dataset.unwrap_or(match task {
            TaskKind::Node => DatasetArg::Sbm,
            TaskKind::Graph => DatasetArg::Trees,
        });
        match dataset {
            DatasetArg::Sbm => Family::TwoBlockSbm {
                n_per_block: self.n_per_block,
                p_in: self.p_in,
                p_out: self.p_out,
            },
            DatasetArg::Caveman => Family::Caveman {
                cliques: self.cliques,
                clique_size: self.clique_size,
            },
            DatasetArg::Trees => Family::RandomGraphClassSet {
                num_graphs: self.num_graphs,
                min_size: self.min_size,
                max_size: self.max_size,
            },
        }
    }
}

fn print_and_save(text: &str, path: &Path) -> CmdResult {
    io::write_text(path, text)?;
    print!("{text}");
    Ok(())
}

fn generate(g: &Global, data: &DataArgs) -> CmdResult {
    let spec = SyntheticSpec {
        family: data.family(g.task()),
        feature_dim: data.feature_dim,
        class_separation: data.separation,
        seed: g.seed,
    };
    let graphs = match synth::generate(&spec)? {
        Dataset::Nodes(graph) => vec![graph],
        Dataset::Graphs(graphs) => graphs,
    };
    let path = g.out.join("dataset.json");
    if graphs.len() == 1 {
        io::save_graph(&graphs[0], &path)?;
    } else {
        io::save_graphs(&graphs, &path)?;
    }
    println!("{}", path.display());
    Ok(())
}

fn divide(g: &Global, graph: &Path) -> CmdResult {
    let graph = io::load_graph(graph)?;
    let set = g.division().divide(&graph, g.task())?;
    let mut files = Vec::new();
    for (i, sub) in set.iter() {
        let name = format!("subgraph-{i}.json");
        io::save_graph(sub, &g.out.join(&name))?;
        files.push(serde_json::json!({"index": i, "file": name, "nodes": sub.num_nodes(), "edges": sub.num_edges()}));
    }
    let manifest = serde_json::json!({
        "T": set.t,
        "strategy": set.strategy.name(),
        "task": pipeline::task_name(set.task),
        "hash": g.scheme().algorithm.name(),
        "subgraphs": files,
    });
    print_and_save(&io::to_pretty_json(&manifest), &g.out.join("manifest.json"))
}

/// Training examples from the training split of a dataset file.
fn training_examples(g: &Global, graphs: &[Graph]) -> Result<Vec<Example>, Error> {
    let split_seed = pipeline::sub_seed(g.seed, "split");
    let fractions = pipeline::default_split(g.task());
    match g.task() {
        TaskKind::Node => graphs
            .iter()
            .map(|graph| {
                let ids: Vec<NodeId> = graph.node_ids().filter(|&v| graph.node_label(v).is_some()).collect();
                let parts = synth::split_indices(ids.len(), &fractions, split_seed);
                let labels = parts[0]
                    .iter()
                    .map(|&i| (ids[i], graph.node_label(ids[i]).expect("filtered to labeled nodes")))
                    .collect();
                Ok(Example {
                    graph: graph.clone(),
                    labels: Labels::Nodes(labels),
                })
            })
            .collect(),
        TaskKind::Graph => {
            let parts = synth::split_indices(graphs.len(), &fractions, split_seed);
            parts[0]
                .iter()
                .map(|&i| {
                    let y = graphs[i]
                        .graph_label()
                        .ok_or_else(|| Error::MissingLabels(format!("graph {i} has no label")))?;
                    Ok(Example {
                        graph: graphs[i].clone(),
                        labels: Labels::Graph(y),
                    })
                })
                .collect()
        }
    }
}

fn num_classes(graphs: &[Graph], task: TaskKind) -> usize {
    let max = match task {
        TaskKind::Node => graphs
            .iter()
            .flat_map(|g| g.node_ids().filter_map(|v| g.node_label(v)))
            .max(),
        TaskKind::Graph => graphs.iter().filter_map(Graph::graph_label).max(),
    };
    max.map_or(2, |m| (m + 1).max(2))
}

fn train(g: &Global, graph: &Path, args: &TrainArgs, augment: bool) -> CmdResult {
    let graphs = io::load_graphs(graph)?;
    let examples = training_examples(g, &graphs)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        seed: pipeline::sub_seed(g.seed, "train"),
        hidden: args.hidden.clone(),
        num_classes: num_classes(&graphs, g.task()),
        augment: augment.then(|| g.division()),
    };
    let params = gnn::train(&examples, &cfg)?;
    let path = g.out.join("params.json");
    io::save_params(&params, &path)?;
    println!("{}", path.display());
    Ok(())
}

fn certify_cmd(g: &Global, graph: &Path, params: &Path, node: Option<NodeId>) -> CmdResult {
    let graphs = io::load_graphs(graph)?;
    let params = io::load_params(params)?;
    let division = g.division();
    if let Some(v) = node {
        let graph = graphs.first().ok_or_else(|| Failure::Usage("graph file is empty".into()))?;
        let cert = certify(graph, Task::NodeClassification(v), &division, &params)?;
        return print_and_save(&io::certificate_to_json(&cert), &g.out.join("certificate.json"));
    }
    let mut out = Vec::new();
    for (i, graph) in graphs.iter().enumerate() {
        match g.task() {
            TaskKind::Node => {
                for v in graph.node_ids() {
                    let cert = certify(graph, Task::NodeClassification(v), &division, &params)?;
                    out.push(TargetCertificate {
                        node: Some(v),
                        graph: (graphs.len() > 1).then_some(i),
                        label: graph.node_label(v),
                        certificate: CertificateFile::from(&cert),
                    });
                }
            }
            TaskKind::Graph => {
                let cert = certify(graph, Task::GraphClassification, &division, &params)?;
                out.push(TargetCertificate {
                    node: None,
                    graph: Some(i),
                    label: graph.graph_label(),
                    certificate: CertificateFile::from(&cert),
                });
            }
        }
    }
    print_and_save(&io::to_pretty_json(&out), &g.out.join("certificates.json"))
}

fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("--m expects lo..hi, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn curve(g: &Global, certificates: &Path, m: &str) -> CmdResult {
    let m_values = parse_range(m)?;
    let certs = io::load_target_certificates(certificates)?;
    let records = certs
        .iter()
        .map(|c| {
            let label = c
                .label
                .ok_or_else(|| Error::MissingLabels("certificate without a true label".into()))?;
            Ok(CurveRecord {
                voted_class: c.certificate.class,
                certified_size: c.certificate.m,
                label,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let curve = certified_accuracy_curve(&records, &m_values);
    print_and_save(&io::curve_csv(&curve), &g.out.join("curve.csv"))
}

#[allow(clippy::too_many_arguments)]
fn verify(
    g: &Global,
    graph: &Path,
    params: &Path,
    node: Option<NodeId>,
    budget: usize,
    samples: Option<usize>,
    max_incident_edges: usize,
    max_injected: usize,
) -> CmdResult {
    let graph = io::load_graph(graph)?;
    let params = io::load_params(params)?;
    let task = match (g.task(), node) {
        (TaskKind::Node, Some(v)) => Task::NodeClassification(v),
        (TaskKind::Node, None) => return Err(Failure::Usage("--node is required for node tasks".into())),
        (TaskKind::Graph, _) => Task::GraphClassification,
    };
    let division = g.division();
    let cert = certify(&graph, task, &division, &params)?;
    let enumeration = match samples {
        Some(samples) => Enumeration::Randomized { seed: g.seed, samples },
        None => Enumeration::Exhaustive,
    };
    let space = AttackSpace {
        budget,
        strategy: g.strategy(),
        allowed: AttackSpace::all_kinds(&graph, max_incident_edges, max_injected),
        enumeration,
        protected: None,
        cap: perturb::DEFAULT_ENUMERATION_CAP,
    };
    let report = perturb::verify_certificate(&graph, &cert, &space, &division, &params)?;
    print_and_save(&io::report_to_json(&report), &g.out.join("report.json"))?;
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Violations(format!(
            "{} flipped votes and {} bound violations",
            report.violations.len(),
            report.bound_violations.len()
        )))
    }
}

fn sweep(g: &Global, shape: ShapeArg, max_nodes: usize, params: Option<&Path>, max_inject_degree: usize, edge_pairs: bool) -> CmdResult {
    let shape = match shape {
        ShapeArg::Path => Shape::Path,
        ShapeArg::Cycle => Shape::Cycle,
        ShapeArg::Star => Shape::Star,
        ShapeArg::Complete => Shape::Complete,
        ShapeArg::Er => Shape::Er,
    };
    let params = match params {
        Some(path) => io::load_params(path)?,
        None => GcnParams::init(&[2, 16, 2], g.seed)?,
    };
    let dim = params.input_dim();
    let graphs = synth::shape_family(shape, 2.min(max_nodes), max_nodes, dim, g.seed);
    let cfg = SweepConfig {
        inject_degrees: 1..=max_inject_degree,
        feature_candidates: vec![vec![0.0; dim], vec![50.0; dim], vec![-50.0; dim]],
        edge_pairs,
    };
    let summary = perturb::theorem_sweep(&graphs, g.task(), &g.division(), &params, &cfg)?;
    print_and_save(&io::sweep_csv(&summary), &g.out.join("sweep.csv"))?;
    match summary.total_violations() {
        0 => Ok(()),
        n => Err(Failure::Violations(format!("{n} bound violations"))),
    }
}

fn pipeline_cmd(g: &Global, data: &DataArgs, train: &TrainArgs, verify_samples: usize, sweep: bool) -> CmdResult {
    let task = g.task();
    let mut cfg = RunConfig::new(task, &g.out);
    cfg.seed = g.seed;
    cfg.family = data.family(task);
    cfg.feature_dim = data.feature_dim;
    cfg.class_separation = data.separation;
    cfg.t = g.t();
    cfg.scheme = g.scheme();
    cfg.strategy = g.strategy();
    cfg.epochs = train.epochs;
    cfg.learning_rate = train.lr;
    cfg.hidden = train.hidden.clone();
    cfg.verify_samples = verify_samples;
    cfg.sweep = sweep;
    let summary = pipeline::run_pipeline(&cfg)?;
    print!("{}", io::curve_csv(&summary.curve));
    if summary.violations + summary.bound_violations > 0 {
        return Err(Failure::Violations(format!(
            "{} flipped votes and {} bound violations",
            summary.violations, summary.bound_violations
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Generate(data) => generate(g, data),
        Command::Divide { graph } => divide(g, graph),
        Command::Train { graph, train: args, augment } => train(g, graph, args, *augment),
        Command::Certify { graph, params, node } => certify_cmd(g, graph, params, *node),
        Command::Curve { certificates, m } => curve(g, certificates, m),
        Command::Verify {
            graph,
            params,
            node,
            budget,
            exhaustive: _,
            samples,
            max_incident_edges,
            max_injected,
        } => verify(g, graph, params, *node, *budget, *samples, *max_incident_edges, *max_injected),
        Command::Sweep {
            family,
            max_nodes,
            params,
            max_inject_degree,
            edge_pairs,
        } => sweep(g, *family, *max_nodes, params.as_deref(), *max_inject_degree, *edge_pairs),
        Command::Pipeline {
            data,
            train: args,
            verify_samples,
            sweep,
        } => pipeline_cmd(g, data, args, *verify_samples, *sweep),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Violations(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VIOLATIONS)
        }
    }
}
