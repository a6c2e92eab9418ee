//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use agnncert::certify::{certified_size, voting_predict, VoteTally};
use agnncert::division::{divide_edge_centric, divide_node_centric, edge_subgraph_index, node_subgraph_index};
use agnncert::gnn::{self, Example, Labels, TrainConfig};
use agnncert::perturb::{self, find_vote_flip, vote_redistributions, AttackKind, AttackSpace, SweepConfig, SweepSummary};
use agnncert::pipeline::{self, RunConfig};
use agnncert::synth::{self, Dataset, Family, Shape, SyntheticSpec};
use agnncert::{certify, Division, GcnParams, Graph, HashScheme, NodeId, Strategy, Task, TaskKind};
use md5::{Digest, Md5};
use rand::Rng;

use common::{random_dims, random_graph, random_params, rng};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed.as_secs() < limit_secs, || {
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

const STRATEGIES: [Strategy; 2] = [Strategy::EdgeCentric, Strategy::NodeCentric];
const TASKS: [TaskKind; 2] = [TaskKind::Node, TaskKind::Graph];

fn partition_laws() -> Outcome {
    let start = Instant::now();
    let scheme = HashScheme::default();
    let mut r = rng(1);
    for case in 0..1000 {
        let n = r.random_range(1..=50);
        let directed = case % 3 == 0;
        let p = r.random_range(0.0..0.3);
        let g = random_graph(&mut r, n, p, directed, 1, 1_000_000);
        let t = r.random_range(1..=30);

        let set = divide_edge_centric(&g, t, scheme, TaskKind::Node).map_err(|e| e.to_string())?;
        let mut seen = BTreeSet::new();
        for sub in &set.subgraphs {
            for e in sub.edges() {
                check(seen.insert(e), || format!("case {case}: edge {e:?} in two buckets"))?;
            }
        }
        check(&seen == g.edge_set(), || format!("case {case}: bucket union differs from E"))?;

        let set = divide_node_centric(&g, t, scheme, TaskKind::Node).map_err(|e| e.to_string())?;
        let mut home: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut total = 0;
        for (i, sub) in set.iter() {
            check(sub.is_directed(), || format!("case {case}: subgraph {i} undirected"))?;
            for (u, _) in sub.edges() {
                total += 1;
                let first = *home.entry(u).or_insert(i);
                check(first == i, || format!("case {case}: out-edges of {u} split"))?;
                let home_index = node_subgraph_index(u, t, scheme).map_err(|e| e.to_string())?;
                check(home_index == i, || format!("case {case}: {u} misplaced"))?;
            }
        }
        let expected: usize = g
            .edges()
            .map(|(u, v)| if directed || u == v { 1 } else { 2 })
            .sum();
        check(total == expected, || format!("case {case}: {total} directed edges, expected {expected}"))?;
    }
    within(start.elapsed(), 30)?;
    Ok(format!("1000 graphs in {:.1}s", start.elapsed().as_secs_f64()))
}

/// Connected family graphs of 2..=6 nodes, each also with an extra isolated node.
fn sweep_graphs(with_isolated: bool) -> Vec<Graph> {
    let mut out = Vec::new();
    for (k, shape) in [Shape::Path, Shape::Cycle, Shape::Star, Shape::Complete].into_iter().enumerate() {
        for g in synth::shape_family(shape, 2, 6, 2, 100 + k as u64) {
            if with_isolated {
                let mut h = g.clone();
                let id = g.max_node_id().unwrap() + 1;
                h.insert_node(id, vec![0.5, -0.5], None);
                out.push(h);
            }
            out.push(g);
        }
    }
    out
}

struct SweepRun {
    strategy: Strategy,
    task: TaskKind,
    t: usize,
    summary: SweepSummary,
}

fn sweep_params() -> Vec<GcnParams> {
    let mut r = rng(7);
    vec![
        random_params(&mut r, &[2, 6, 2]),
        random_params(&mut r, &[2, 4, 4, 3]),
        GcnParams::init(&[2, 8, 2], 11).unwrap(),
    ]
}

fn sweeps(edge_pairs: bool, inject: bool, isolated: bool) -> Result<Vec<SweepRun>, String> {
    let graphs = sweep_graphs(isolated);
    let cfg = SweepConfig {
        inject_degrees: if inject { 1..=5 } else { 1..=0 },
        feature_candidates: vec![vec![0.0, 0.0], vec![50.0, 50.0], vec![-50.0, 50.0]],
        edge_pairs,
    };
    let mut runs = Vec::new();
    for strategy in STRATEGIES {
        for task in TASKS {
            for t in [2, 3, 6] {
                let division = Division::new(t, HashScheme::default(), strategy);
                let mut merged: Option<SweepSummary> = None;
                for params in sweep_params() {
                    let s = perturb::theorem_sweep(&graphs, task, &division, &params, &cfg)
                        .map_err(|e| e.to_string())?;
                    merged = Some(match merged {
                        None => s,
                        Some(mut m) => {
                            for (a, b) in m.rows.iter_mut().zip(s.rows) {
                                a.attacks += b.attacks;
                                a.checks += b.checks;
                                a.max_altered = a.max_altered.max(b.max_altered);
                                a.bound = a.bound.max(b.bound);
                                a.violations += b.violations;
                                if b.checks > 0 {
                                    a.slack = if a.checks == b.checks { b.slack } else { a.slack.min(b.slack) };
                                }
                            }
                            m
                        }
                    });
                }
                runs.push(SweepRun {
                    strategy,
                    task,
                    t,
                    summary: merged.expect("at least one parameter set"),
                });
            }
        }
    }
    Ok(runs)
}

fn row_check(runs: &[SweepRun], class: &str) -> Result<(usize, usize, usize), String> {
    let (mut checks, mut max_altered, mut violations) = (0, 0, 0);
    for run in runs {
        let prefix = match run.strategy {
            Strategy::EdgeCentric => "edge-centric",
            Strategy::NodeCentric => "node-centric",
        };
        let row = run.summary.row(&format!("{prefix}/{class}")).expect("row exists");
        checks += row.checks;
        max_altered = max_altered.max(row.max_altered);
        violations += row.violations;
        check(row.violations == 0, || {
            format!(
                "{prefix}/{class}, {:?} task, T={}: {} checks over the bound (max altered {}, bound {})",
                run.task, run.t, row.violations, row.max_altered, row.bound
            )
        })?;
    }
    Ok((checks, max_altered, violations))
}

fn edge_manipulation() -> Outcome {
    let start = Instant::now();
    let runs = sweeps(true, false, false)?;
    let (checks, max_altered, _) = row_check(&runs, "edge")?;
    within(start.elapsed(), 300)?;
    Ok(format!("{checks} checks, max altered {max_altered}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn node_manipulation() -> Outcome {
    let start = Instant::now();
    let runs = sweeps(false, true, false)?;
    let (c1, m1, _) = row_check(&runs, "node-inject")?;
    let (c2, m2, _) = row_check(&runs, "node-delete")?;
    // node-centric: at most one altered prediction per manipulated node, whatever its degree
    for run in runs.iter().filter(|r| r.strategy == Strategy::NodeCentric) {
        for class in ["node-centric/node-inject", "node-centric/node-delete"] {
            let row = run.summary.row(class).unwrap();
            check(row.max_altered <= 1, || format!("{class}: altered {}", row.max_altered))?;
        }
    }
    within(start.elapsed(), 300)?;
    Ok(format!(
        "{} checks, max altered inject {m1} / delete {m2}, {:.1}s",
        c1 + c2,
        start.elapsed().as_secs_f64()
    ))
}

fn feature_manipulation() -> Outcome {
    let start = Instant::now();
    let runs = sweeps(false, false, true)?;
    let (checks, max_altered, _) = row_check(&runs, "feature-rewrite")?;
    for run in runs.iter().filter(|r| r.strategy == Strategy::NodeCentric) {
        let row = run.summary.row("node-centric/feature-rewrite").unwrap();
        check(row.max_altered <= 1, || format!("node-centric rewrite altered {}", row.max_altered))?;
    }
    let mut pooled_isolated = 0;
    for run in &runs {
        let prefix = match run.strategy {
            Strategy::EdgeCentric => "edge-centric",
            Strategy::NodeCentric => "node-centric",
        };
        let row = run.summary.row(&format!("{prefix}/isolated-rewrite")).unwrap();
        check(row.checks > 0, || "no isolated-node rewrites were checked".into())?;
        if run.strategy == Strategy::NodeCentric && run.task == TaskKind::Graph {
            // the purified subgraph keeps the isolated node and pools it
            check(row.max_altered <= 1, || format!("isolated rewrite altered {}", row.max_altered))?;
            pooled_isolated = pooled_isolated.max(row.max_altered);
        } else {
            check(row.max_altered == 0, || {
                format!("{prefix}, {:?} task, T={}: isolated rewrite altered {}", run.task, run.t, row.max_altered)
            })?;
        }
    }
    within(start.elapsed(), 300)?;
    Ok(format!(
        "{checks} checks, max altered {max_altered}; isolated rewrites alter 0 \
         (node-centric graph task keeps the node: max {pooled_isolated} <= 1), {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

/// Every manipulation kind. Candidates are zeros, large constants and a copy of
/// the last node's features; large graphs drop one candidate to stay under the cap.
fn attack_kinds(g: &Graph) -> Vec<AttackKind> {
    let far = g.nodes().last().map(|(_, n)| n.features.clone()).unwrap_or_else(|| vec![0.0, 0.0]);
    let mut candidates = vec![vec![0.0, 0.0], vec![50.0, 50.0], vec![-50.0, 50.0], far];
    if g.num_nodes() > 6 {
        candidates.remove(2);
    }
    vec![
        AttackKind::EdgeAdd,
        AttackKind::EdgeDelete,
        AttackKind::NodeInject {
            max_incident_edges: 2,
            max_nodes: 2,
            features: candidates.clone(),
        },
        AttackKind::NodeDelete,
        AttackKind::FeatureRewrite { candidates },
    ]
}

fn train(examples: &[Example], division: Division, num_classes: usize, seed: u64) -> GcnParams {
    let cfg = TrainConfig {
        epochs: 150,
        learning_rate: 0.2,
        seed,
        hidden: vec![6],
        num_classes,
        augment: Some(division),
    };
    gnn::train(examples, &cfg).unwrap()
}

struct Target {
    graph: Graph,
    task: Task,
    division: Division,
    params: GcnParams,
}

fn node_dataset(family: Family, seed: u64) -> (Graph, Vec<Example>) {
    let spec = SyntheticSpec::new(family, seed);
    let Ok(Dataset::Nodes(g)) = synth::generate(&spec) else { unreachable!() };
    let labels: BTreeMap<NodeId, usize> = g.node_ids().map(|v| (v, g.node_label(v).unwrap())).collect();
    let examples = vec![Example { graph: g.clone(), labels: Labels::Nodes(labels) }];
    (g, examples)
}

fn soundness_targets() -> Vec<Target> {
    let mut out = Vec::new();
    let node_sets = [
        (node_dataset(Family::TwoBlockSbm { n_per_block: 3, p_in: 0.9, p_out: 0.15 }, 21), 2),
        (node_dataset(Family::TwoBlockSbm { n_per_block: 4, p_in: 0.8, p_out: 0.1 }, 23), 2),
        (node_dataset(Family::Caveman { cliques: 3, clique_size: 2 }, 24), 3),
    ];

    let spec = SyntheticSpec::new(Family::RandomGraphClassSet { num_graphs: 12, min_size: 4, max_size: 5 }, 22);
    let Ok(Dataset::Graphs(graphs)) = synth::generate(&spec) else { unreachable!() };
    let graph_examples: Vec<Example> = graphs[..8]
        .iter()
        .map(|h| Example { graph: h.clone(), labels: Labels::Graph(h.graph_label().unwrap()) })
        .collect();

    for strategy in STRATEGIES {
        for t in [2, 3, 6] {
            let division = Division::new(t, HashScheme::default(), strategy);
            for ((g, examples), classes) in &node_sets {
                let params = train(examples, division, *classes, 5);
                for v in g.node_ids() {
                    out.push(Target { graph: g.clone(), task: Task::NodeClassification(v), division, params: params.clone() });
                }
            }
            let params = train(&graph_examples, division, 2, 6);
            for h in &graphs[8..] {
                out.push(Target { graph: h.clone(), task: Task::GraphClassification, division, params: params.clone() });
            }
        }
    }
    out
}

fn vote_gap_algebra() -> Result<String, String> {
    let mut tallies = 0;
    for classes in 2..=3usize {
        for total in 1..=8usize {
            let mut stack = vec![Vec::new()];
            while let Some(prefix) = stack.pop() {
                let used: usize = prefix.iter().sum();
                if prefix.len() + 1 == classes {
                    let mut counts = prefix.clone();
                    counts.push(total - used);
                    let tally = VoteTally::new(counts);
                    let (winner, _) = voting_predict(&tally);
                    let m = certified_size(&tally);
                    for k in 0..=m {
                        for counts in vote_redistributions(&tally, k) {
                            let (w, _) = voting_predict(&VoteTally::new(counts.clone()));
                            check(w == winner, || format!("{:?} -> {counts:?} flips with {k} <= M={m}", tally.counts()))?;
                        }
                    }
                    check(find_vote_flip(&tally, m + 1).is_some(), || {
                        format!("{:?}: no flip with M+1={} votes", tally.counts(), m + 1)
                    })?;
                    tallies += 1;
                    continue;
                }
                for c in 0..=total - used {
                    let mut next = prefix.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
    }
    Ok(format!("{tallies} tallies"))
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let targets = soundness_targets();
    check(targets.len() >= 50, || format!("only {} targets", targets.len()))?;
    let (mut attacks, mut by_m) = (0usize, BTreeMap::<usize, usize>::new());
    for (k, target) in targets.iter().enumerate() {
        let cert = certify(&target.graph, target.task, &target.division, &target.params).map_err(|e| e.to_string())?;
        *by_m.entry(cert.certified_size).or_default() += 1;
        let mut space = AttackSpace::exhaustive(cert.certified_size, target.division.strategy, attack_kinds(&target.graph));
        space.protected = target.task.target();
        let report = perturb::verify_certificate(&target.graph, &cert, &space, &target.division, &target.params)
            .map_err(|e| format!("target {k}: {e}"))?;
        attacks += report.attacks_tried;
        check(report.violations.is_empty(), || {
            format!("target {k} ({:?}, {:?}): {} flipped votes, first {:?}", target.task, target.division.strategy, report.violations.len(), report.violations[0])
        })?;
        check(report.bound_violations.is_empty(), || {
            format!("target {k}: {} attacks over the bound, first {:?}", report.bound_violations.len(), report.bound_violations[0])
        })?;
    }
    let algebra = vote_gap_algebra()?;
    within(start.elapsed(), 900)?;
    Ok(format!(
        "{} targets (M histogram {by_m:?}), {attacks} attacks, 0 violations; {algebra}; {:.1}s",
        targets.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn certified_size_arithmetic() -> Outcome {
    let cases = [(vec![30, 0], 15), (vec![10, 10], 0), (vec![0, 9, 0, 12], 1)];
    for (counts, m) in cases {
        let got = certified_size(&VoteTally::new(counts.clone()));
        check(got == m, || format!("{counts:?}: M={got}, expected {m}"))?;
    }
    let mut r = rng(6);
    for _ in 0..10_000 {
        let classes = r.random_range(2..=6);
        let counts: Vec<usize> = (0..classes).map(|_| r.random_range(0..=5)).collect();
        // naive reference: sort by (count descending, index ascending)
        let mut order: Vec<usize> = (0..classes).collect();
        order.sort_by_key(|&y| (std::cmp::Reverse(counts[y]), y));
        let got = voting_predict(&VoteTally::new(counts.clone()));
        check(got == (order[0], order[1]), || format!("{counts:?}: got {got:?}, expected {:?}", (order[0], order[1])))?;
    }
    Ok("3 hand tallies, 10000 random tie-break checks".into())
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(7_000);
    let (mut instances, mut worst, mut resampled) = (0, 0.0f64, 0);
    while instances < 20 {
        let n = r.random_range(1..=6);
        let directed = r.random::<bool>();
        let g = random_graph(&mut r, n, 0.5, directed, 3, 20);
        let layers = r.random_range(1..=3);
        let classes = r.random_range(2..=3);
        let dims = random_dims(&mut r, layers, 3, classes);
        let params = random_params(&mut r, &dims);
        let labels = if r.random::<bool>() {
            Labels::Graph(r.random_range(0..classes))
        } else {
            Labels::Nodes(g.node_ids().map(|v| (v, r.random_range(0..classes))).collect())
        };
        // finite differences are meaningless across a ReLU kink
        let pre = gnn::preactivations(&g, &params).unwrap();
        let near_kink = pre[..pre.len() - 1]
            .iter()
            .any(|m| m.as_slice().iter().any(|z| z.abs() < 1e-3));
        if near_kink {
            resampled += 1;
            continue;
        }
        let (_, grads) = gnn::backward(&g, &params, &labels).unwrap();
        let h = 1e-5;
        for (k, grad) in grads.iter().enumerate() {
            for idx in 0..grad.as_slice().len() {
                let mut plus = params.clone();
                plus.layers_mut()[k].as_mut_slice()[idx] += h;
                let mut minus = params.clone();
                minus.layers_mut()[k].as_mut_slice()[idx] -= h;
                let fd = (gnn::loss(&g, &plus, &labels).unwrap() - gnn::loss(&g, &minus, &labels).unwrap()) / (2.0 * h);
                let err = relative_error(grad.as_slice()[idx], fd);
                worst = worst.max(err);
                check(err <= 1e-4, || {
                    format!("instance {instances}, layer {k}, entry {idx}: analytic {} vs numeric {fd}", grad.as_slice()[idx])
                })?;
            }
        }
        instances += 1;
    }
    within(start.elapsed(), 10)?;
    Ok(format!("20 instances, worst relative error {worst:.2e}, {resampled} resampled near kinks"))
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn independence() -> Outcome {
    let mut r = rng(8);
    for case in 0..100 {
        let n = r.random_range(1..=8);
        let mut g = random_graph(&mut r, n, 0.4, false, 3, 50);
        let u = 1000;
        g.insert_node(u, vec![1.0, -1.0, 0.5], None);
        let layers = r.random_range(1..=3);
        let dims = random_dims(&mut r, layers, 3, 3);
        let params = random_params(&mut r, &dims);
        let before = gnn::gcn_forward(&g, &params).unwrap();
        let mut h = g.clone();
        h.set_features(u, (0..3).map(|_| r.random_range(-100.0..100.0)).collect()).unwrap();
        let after = gnn::gcn_forward(&h, &params).unwrap();
        for v in g.node_ids().filter(|&v| v != u) {
            check(same_bits(before.get(v).unwrap(), after.get(v).unwrap()), || {
                format!("isolated case {case}: logits of {v} changed")
            })?;
        }
    }
    for case in 0..100 {
        let n = r.random_range(2..=8);
        let mut g = random_graph(&mut r, n, 0.4, true, 3, 50);
        let ids: Vec<NodeId> = g.node_ids().collect();
        let u = ids[r.random_range(0..ids.len())];
        let out_edges: Vec<_> = g.edges().filter(|&(a, _)| a == u).collect();
        for (a, b) in out_edges {
            g.remove_edge(a, b);
        }
        let layers = r.random_range(1..=3);
        let dims = random_dims(&mut r, layers, 3, 2);
        let params = random_params(&mut r, &dims);
        let before = gnn::gcn_forward(&g, &params).unwrap();

        let mut rewritten = g.clone();
        rewritten.set_features(u, vec![77.0, -3.0, 9.0]).unwrap();
        let mut deleted = g.clone();
        deleted.remove_node(u);
        let mut added = g.clone();
        let fresh = 5000;
        added.insert_node(fresh, vec![-8.0, 8.0, 1.0], None);
        for &v in ids.iter().filter(|_| r.random::<bool>()) {
            added.insert_edge(v, fresh);
        }
        for (name, variant) in [("rewrite", &rewritten), ("delete", &deleted), ("add", &added)] {
            let after = gnn::gcn_forward(variant, &params).unwrap();
            for v in ids.iter().copied().filter(|&v| v != u) {
                check(same_bits(before.get(v).unwrap(), after.get(v).unwrap()), || {
                    format!("no-outgoing case {case} ({name}): logits of {v} changed")
                })?;
            }
        }
    }
    Ok("100 isolated-node and 100 no-outgoing-edge instances, bit-exact".into())
}

/// Independent edge-centric division: every node kept, each edge placed by the
/// MD5 digest read as one 128-bit big-endian integer.
fn reference_division(g: &Graph, t: usize) -> Vec<(BTreeSet<NodeId>, BTreeSet<(NodeId, NodeId)>)> {
    let mut subs = vec![(g.node_ids().collect::<BTreeSet<_>>(), BTreeSet::new()); t];
    for (u, v) in g.edges() {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let digest = Md5::digest(format!("{a:010}{b:010}").as_bytes());
        let value = u128::from_be_bytes(digest.into());
        let i = (value % t as u128) as usize;
        subs[i].1.insert((u, v));
    }
    subs
}

fn gnncert_equivalence() -> Outcome {
    let mut r = rng(9);
    let mut compared = 0;
    for case in 0..100 {
        let n = r.random_range(1..=30);
        let g = random_graph(&mut r, n, 0.2, false, 2, 100_000);
        for t in [3, 10] {
            let ours = divide_edge_centric(&g, t, HashScheme::default(), TaskKind::Graph).map_err(|e| e.to_string())?;
            let reference = reference_division(&g, t);
            for (i, (sub, (nodes, edges))) in ours.subgraphs.iter().zip(&reference).enumerate() {
                check(sub.edge_set() == edges, || format!("case {case}, T={t}, subgraph {}: edge sets differ", i + 1))?;
                // the reference keeps isolated nodes; ours drops them
                let touched: BTreeSet<NodeId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
                let kept: BTreeSet<NodeId> = sub.node_ids().collect();
                check(kept == touched && kept.is_subset(nodes), || format!("case {case}, T={t}: node sets differ"))?;
                for v in &kept {
                    check(sub.features(*v) == g.features(*v), || format!("case {case}: features of {v} differ"))?;
                }
                compared += 1;
            }
            for (u, v) in g.edges() {
                let ours = edge_subgraph_index(u, v, t, HashScheme::default(), false).map_err(|e| e.to_string())?;
                check(reference[ours - 1].1.contains(&(u, v)), || format!("edge ({u},{v}) index differs"))?;
            }
        }
    }
    Ok(format!("{compared} subgraphs identical"))
}

fn pipeline_reproducibility() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (task, strategy) in [(TaskKind::Node, Strategy::EdgeCentric), (TaskKind::Node, Strategy::NodeCentric), (TaskKind::Graph, Strategy::EdgeCentric)] {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut csvs = Vec::new();
        let mut curve = Vec::new();
        for dir in &dirs {
            let mut cfg = RunConfig::new(task, dir.path());
            cfg.seed = 2024;
            cfg.strategy = strategy;
            cfg.verify_samples = 20;
            cfg.sweep = true;
            let summary = pipeline::run_pipeline(&cfg).map_err(|e| e.to_string())?;
            check(summary.violations == 0 && summary.bound_violations == 0, || "pipeline found violations".into())?;
            curve = summary.curve;
            let files: Vec<Vec<u8>> = ["curve.csv", "sweep.csv", "verify.csv", "certificates.json", "params.json", "manifest.json"]
                .iter()
                .map(|f| std::fs::read(dir.path().join(f)).unwrap())
                .collect();
            csvs.push(files);
        }
        check(csvs[0] == csvs[1], || format!("{task:?}/{strategy:?}: artifacts differ between runs"))?;
        check(curve.windows(2).all(|w| w[1].1 <= w[0].1), || format!("curve not non-increasing: {curve:?}"))?;
        if task == TaskKind::Node {
            check(curve[0].1 >= 0.5, || format!("normal accuracy {} below 0.5", curve[0].1))?;
            notes.push(format!("{strategy} accuracy {:.2}", curve[0].1));
        }
    }
    within(start.elapsed(), 180)?;
    Ok(format!("byte-identical reruns, non-increasing curves, {}", notes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 partition laws", partition_laws),
        ("2 edge manipulation bounds", edge_manipulation),
        ("3 node manipulation bounds", node_manipulation),
        ("4 feature manipulation bounds", feature_manipulation),
        ("5 end-to-end soundness", soundness),
        ("6 certified-size arithmetic", certified_size_arithmetic),
        ("7 gradient correctness", gradient_correctness),
        ("8 independence invariants", independence),
        ("9 edge-centric division equivalence", gnncert_equivalence),
        ("10 pipeline reproducibility", pipeline_reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS  criterion {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  criterion {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
