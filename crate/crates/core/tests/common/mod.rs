//! Shared helpers for the integration suites: the fixed corpus schedule,
//! spanning-tree assertions, and the counterexample shrinker.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trapspan::diagram::{self, Diagram, Mode};
use trapspan::graph::{self, IntersectionGraph};
use trapspan::spanner::{self, SpannerTree, TraceLog};
use trapspan::verify::{self, TreeView};

pub const D5_TEXT: &str = "5\n1 4 2 5\n2 6 1 3\n3 7 4 8\n5 9 6 9\n8 10 7 10\n";

/// Tree over D5 with parents 0 3 1 5 3; stretch exactly 3 on edge (2,4).
pub const D5_REFERENCE_TREE: &str = "5\n0 3 1 5 3\n";

pub const ALL_MODES: [Mode; 3] = [Mode::General, Mode::Interval, Mode::Permutation];

#[derive(Debug, Clone, Copy)]
pub struct CorpusConfig {
    pub n: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// Deterministic corpus schedule: `count` configurations with `n` drawn
/// uniformly from `n_lo..=n_hi`, cycling through `modes`.
pub fn corpus_schedule(
    count: usize,
    n_lo: usize,
    n_hi: usize,
    modes: &[Mode],
    schedule_seed: u64,
) -> Vec<CorpusConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule_seed);
    (0..count)
        .map(|k| CorpusConfig {
            n: rng.gen_range(n_lo..=n_hi),
            seed: rng.gen(),
            mode: modes[k % modes.len()],
        })
        .collect()
}

pub fn generate(cfg: CorpusConfig) -> Diagram {
    diagram::generate_random(cfg.n, cfg.seed, cfg.mode)
        .unwrap_or_else(|e| panic!("generation failed for {cfg:?}: {e}"))
}

pub fn build(diag: &Diagram) -> (IntersectionGraph, SpannerTree, TraceLog) {
    let g = graph::build_graph(diag);
    let (tree, trace) = spanner::build_tree3spanner(diag).expect("connected canonical diagram");
    (g, tree, trace)
}

/// Checks the spanning-tree invariants (single root, acyclic, connected,
/// every link an edge of the graph) and returns the validated view.
pub fn assert_spanning_tree(g: &IntersectionGraph, tree: &SpannerTree) -> TreeView {
    let view = TreeView::new(tree.parents()).expect("tree structure");
    assert_eq!(view.root(), 1);
    let foreign = verify::non_graph_edges(g, &view);
    assert!(foreign.is_empty(), "non-graph tree edges: {foreign:?}");
    view
}

pub fn max_stretch(g: &IntersectionGraph, view: &TreeView) -> u32 {
    verify::max_edge_stretch(g, view, 3).max_edge_stretch
}

fn violates_threshold(diag: &Diagram, threshold: u32) -> bool {
    if diag.n() < 2 {
        return false;
    }
    let (canon, _) = diagram::canonicalize(diag);
    let g = graph::build_graph(&canon);
    if !graph::is_connected(&g) {
        return false;
    }
    match spanner::build_tree3spanner(&canon) {
        Ok((tree, _)) => match TreeView::new(tree.parents()) {
            Ok(view) => !verify::max_edge_stretch(&g, &view, threshold).ok(),
            Err(_) => false,
        },
        Err(_) => false,
    }
}

/// Greedy shrinker: removes one trapezoid at a time while the stretch
/// violation persists, restarting after each successful removal.
pub fn shrink_violation(diag: &Diagram, threshold: u32) -> Diagram {
    let mut current = diag.clone();
    loop {
        let mut improved = false;
        for skip in 0..current.n() {
            let rows: Vec<_> = current
                .trapezoids()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, t)| *t)
                .collect();
            let candidate = Diagram::new(rows);
            if violates_threshold(&candidate, threshold) {
                let (canon, _) = diagram::canonicalize(&candidate);
                current = canon;
                improved = true;
                break;
            }
        }
        if !improved {
            return current;
        }
    }
}

/// Writes a shrunk counterexample and its trace next to the test target
/// directory; returns the diagram path.
pub fn emit_counterexample(tag: &str, diag: &Diagram, trace: &TraceLog) -> std::path::PathBuf {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("counterexamples");
    std::fs::create_dir_all(&dir).expect("create counterexample dir");
    let diag_path = dir.join(format!("{tag}.diagram"));
    std::fs::write(&diag_path, diagram::serialize(diag)).expect("write counterexample");
    std::fs::write(dir.join(format!("{tag}.trace")), trace.render()).expect("write trace");
    diag_path
}
