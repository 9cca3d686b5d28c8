//! Marking of all alternative shortest paths between the root and the
//! deepest BFS level.
//!
//! The sweep runs top-down from level `h`: everything at level `h` is
//! marked, and a vertex at level `i` is marked exactly when it has a
//! marked neighbor at level `i + 1`. The marked subgraph `M*` keeps every
//! cross-level edge between marked vertices; unmarked vertices are
//! projected out rather than deleted from the tree.

use crate::bfstree::LeveledTree;
use crate::graph::{self, IntersectionGraph};

/// The subgraph of all root-to-last-level shortest paths: marked flags,
/// per-level marked sets `P_i`, their complements `F_i = L_i - P_i`, and
/// the cross-level edges among marked vertices.
#[derive(Debug, Clone)]
pub struct MarkedSubgraph {
    marked: Vec<bool>,
    p_sets: Vec<Vec<usize>>,
    f_sets: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl MarkedSubgraph {
    pub fn is_marked(&self, v: usize) -> bool {
        self.marked[v]
    }

    /// Marked vertices at level `i`, sorted ascending.
    pub fn p_set(&self, i: usize) -> &[usize] {
        &self.p_sets[i]
    }

    pub fn p_sets(&self) -> &[Vec<usize>] {
        &self.p_sets
    }

    /// Unmarked vertices at level `i`, sorted ascending.
    pub fn f_set(&self, i: usize) -> &[usize] {
        &self.f_sets[i]
    }

    /// Edges of `M*` as `(u, v)` with `level(u) + 1 = level(v)`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Runs the marking sweep over a built BFS tree.
pub fn mark_shortest_paths(g: &IntersectionGraph, t: &LeveledTree) -> MarkedSubgraph {
    let n = g.n();
    let h = t.height();
    let mut marked = vec![false; n + 1];
    for &v in t.level_set(h) {
        marked[v] = true;
    }
    for i in (0..h).rev() {
        for &v in t.level_set(i) {
            if t.level_set(i + 1)
                .iter()
                .any(|&w| marked[w] && g.has_edge(v, w))
            {
                marked[v] = true;
            }
        }
    }

    let mut p_sets = Vec::with_capacity(h + 1);
    let mut f_sets = Vec::with_capacity(h + 1);
    for i in 0..=h {
        let (p, f): (Vec<usize>, Vec<usize>) =
            t.level_set(i).iter().partition(|&&v| marked[v]);
        p_sets.push(p);
        f_sets.push(f);
    }

    let mut edges = Vec::new();
    for i in 0..h {
        for &u in &p_sets[i] {
            for &v in &p_sets[i + 1] {
                if g.has_edge(u, v) {
                    edges.push((u, v));
                }
            }
        }
    }
    edges.sort_unstable();

    MarkedSubgraph {
        marked,
        p_sets,
        f_sets,
        edges,
    }
}

/// Outcome of [`verify_marked_semantics`].
#[derive(Debug, Clone, Default)]
pub struct MarkedCheck {
    pub violations: Vec<String>,
}

impl MarkedCheck {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a marked subgraph against the definition it is supposed to
/// realize: `v` is marked iff `v` lies on some shortest path from the
/// root to a deepest-level vertex (decided with a BFS distance oracle),
/// and no unmarked vertex is adjacent to a marked vertex one level down.
pub fn verify_marked_semantics(
    g: &IntersectionGraph,
    t: &LeveledTree,
    m: &MarkedSubgraph,
) -> MarkedCheck {
    let mut check = MarkedCheck::default();
    let h = t.height() as u32;

    // Oracle: v is on a shortest path to L_h iff some w in L_h has
    // d(v, w) = h - level(v).
    let mut expected = vec![false; g.n() + 1];
    for &w in t.level_set(h as usize) {
        let dist = graph::bfs_distances(g, w);
        for v in 1..=g.n() {
            if dist[v] == Some(h - t.level(v)) {
                expected[v] = true;
            }
        }
    }
    for v in 1..=g.n() {
        if m.is_marked(v) != expected[v] {
            check.violations.push(format!(
                "vertex {v}: marked={} but oracle says {}",
                m.is_marked(v),
                expected[v]
            ));
        }
    }

    // No F_i -> P_{i+1} edges.
    for i in 0..t.height() {
        for &v in m.f_set(i) {
            for &w in m.p_set(i + 1) {
                if g.has_edge(v, w) {
                    check
                        .violations
                        .push(format!("unmarked {v} at level {i} adjacent to marked {w}"));
                }
            }
        }
    }
    check
}
