//! Leveled BFS tree rooted at vertex 1, with a dominating-parent rule:
//! each next-level vertex attaches to the current level's maximum-`b`
//! vertex when adjacent, otherwise to the maximum-`d` vertex. The rule
//! keeps the number of internal nodes per level at two or fewer whenever
//! it applies; a counted fallback keeps the builder total when it does
//! not.

use thiserror::Error;

use crate::diagram::Diagram;
use crate::graph::{self, IntersectionGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BfsTreeError {
    #[error("graph is disconnected")]
    Disconnected,
}

/// BFS tree with exact levels, the level partition, and the tree path
/// from the root to vertex `n` (the main path).
#[derive(Debug, Clone)]
pub struct LeveledTree {
    parent: Vec<usize>,
    level: Vec<u32>,
    level_sets: Vec<Vec<usize>>,
    main_path: Vec<usize>,
    fallback_parents: usize,
}

impl LeveledTree {
    /// Parent of `v`, or 0 for the root.
    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Exact distance from the root (vertex 1) to `v`.
    pub fn level(&self, v: usize) -> u32 {
        self.level[v]
    }

    /// Tree height `h`: the maximum level.
    pub fn height(&self) -> usize {
        self.level_sets.len() - 1
    }

    /// Vertices at level `i`, sorted ascending.
    pub fn level_set(&self, i: usize) -> &[usize] {
        &self.level_sets[i]
    }

    pub fn level_sets(&self) -> &[Vec<usize>] {
        &self.level_sets
    }

    /// Tree path `1 = u_0, u_1, ..., u_k = n`; `k` equals `level(n)`.
    pub fn main_path(&self) -> &[usize] {
        &self.main_path
    }

    /// How many vertices attached through neither dominating vertex.
    pub fn fallback_parents(&self) -> usize {
        self.fallback_parents
    }

    /// Distinct parents used by each next level: entry `i` lists the
    /// internal nodes of level `i`, sorted. Has `height()` entries.
    pub fn internal_nodes_per_level(&self) -> Vec<Vec<usize>> {
        let h = self.height();
        let mut internals = Vec::with_capacity(h);
        for i in 0..h {
            let mut parents: Vec<usize> = self.level_sets[i + 1]
                .iter()
                .map(|&v| self.parent[v])
                .collect();
            parents.sort_unstable();
            parents.dedup();
            internals.push(parents);
        }
        internals
    }

    /// Number of internal nodes per level; `internal_nodes_per_level`
    /// collapsed to counts.
    pub fn internal_node_count_per_level(&self) -> Vec<usize> {
        self.internal_nodes_per_level()
            .iter()
            .map(|p| p.len())
            .collect()
    }
}

/// Structural checks on same-level internal nodes: for internal `i`, `j`
/// sharing a level, `b_j < b_i` must imply `d_i < d_j`, and the two must
/// be adjacent. Violations name the offending pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InternalNodeReport {
    /// Pairs where the `b`/`d` order agreed instead of crossing.
    pub order_violations: Vec<(usize, usize)>,
    /// Same-level internal pairs that are not adjacent.
    pub adjacency_violations: Vec<(usize, usize)>,
    /// Largest number of internal nodes seen on any level.
    pub max_internal_nodes: usize,
}

impl InternalNodeReport {
    pub fn is_clean(&self) -> bool {
        self.order_violations.is_empty() && self.adjacency_violations.is_empty()
    }
}

/// Evaluates the internal-node structure of a built tree.
pub fn check_internal_nodes(
    t: &LeveledTree,
    g: &IntersectionGraph,
    diag: &Diagram,
) -> InternalNodeReport {
    let mut report = InternalNodeReport::default();
    for internals in t.internal_nodes_per_level() {
        report.max_internal_nodes = report.max_internal_nodes.max(internals.len());
        for (idx, &u) in internals.iter().enumerate() {
            for &v in &internals[idx + 1..] {
                let (tu, tv) = (diag.trap(u), diag.trap(v));
                // Canonical order gives b_u < b_v; crossing demands d_v < d_u.
                if !(tv.d < tu.d) {
                    report.order_violations.push((u, v));
                }
                if !g.has_edge(u, v) {
                    report.adjacency_violations.push((u, v));
                }
            }
        }
    }
    report
}

/// Builds the leveled BFS tree of a connected graph. Levels come from a
/// plain BFS (exact distances); parents follow the dominating-parent
/// rule, falling back to the child's maximum-`b` neighbor one level up
/// when neither dominator is adjacent.
pub fn build_bfs_tree(
    g: &IntersectionGraph,
    diag: &Diagram,
) -> Result<LeveledTree, BfsTreeError> {
    let n = g.n();
    let dist = graph::bfs_distances(g, 1);
    if dist.iter().skip(1).any(|d| d.is_none()) {
        return Err(BfsTreeError::Disconnected);
    }
    let level: Vec<u32> = std::iter::once(0)
        .chain((1..=n).map(|v| dist[v].unwrap()))
        .collect();
    let h = (1..=n).map(|v| level[v]).max().unwrap_or(0) as usize;
    let mut level_sets = vec![Vec::new(); h + 1];
    for v in 1..=n {
        level_sets[level[v] as usize].push(v);
    }

    let mut parent = vec![0usize; n + 1];
    let mut fallback_parents = 0;
    for i in 0..h {
        let max_b = *level_sets[i]
            .iter()
            .max_by_key(|&&v| diag.trap(v).b)
            .expect("nonempty level");
        let max_d = *level_sets[i]
            .iter()
            .max_by_key(|&&v| diag.trap(v).d)
            .expect("nonempty level");
        for &v in &level_sets[i + 1] {
            parent[v] = if g.has_edge(v, max_b) {
                max_b
            } else if g.has_edge(v, max_d) {
                max_d
            } else {
                fallback_parents += 1;
                *level_sets[i]
                    .iter()
                    .filter(|&&u| g.has_edge(v, u))
                    .max_by_key(|&&u| diag.trap(u).b)
                    .expect("BFS level guarantees a previous-level neighbor")
            };
        }
    }

    let mut main_path = vec![n];
    let mut v = n;
    while v != 1 {
        v = parent[v];
        main_path.push(v);
    }
    main_path.reverse();

    Ok(LeveledTree {
        parent,
        level,
        level_sets,
        main_path,
        fallback_parents,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::diagram::tests::d5;
    use crate::diagram::{canonicalize, generate_random, Diagram, Mode};
    use crate::graph::build_graph;

    /// Chained intervals: consecutive intervals overlap by one unit, so
    /// the derived graph is the path 1-2-...-n.
    pub(crate) fn chained_intervals(n: usize) -> Diagram {
        let rows: Vec<[i64; 4]> = (1..=n as i64)
            .map(|v| [4 * v - 3, 4 * v + 2, 4 * v - 3, 4 * v + 2])
            .collect();
        let (canon, _) = canonicalize(&Diagram::from_rows(&rows));
        canon
    }

    #[test]
    fn d5_tree_shape() {
        let d = d5();
        let g = build_graph(&d);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.height(), 2);
        assert_eq!(t.level_set(0), &[1]);
        assert_eq!(t.level_set(1), &[2, 3]);
        assert_eq!(t.level_set(2), &[4, 5]);
        assert_eq!(t.parents(), &[0, 0, 1, 1, 3, 3]);
        assert_eq!(t.fallback_parents(), 0);
    }

    #[test]
    fn d5_main_path() {
        let d = d5();
        let g = build_graph(&d);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.main_path(), &[1, 3, 5]);
    }

    #[test]
    fn d5_internal_counts() {
        let d = d5();
        let g = build_graph(&d);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.internal_node_count_per_level(), vec![1, 1]);
        assert!(check_internal_nodes(&t, &g, &d).is_clean());
    }

    #[test]
    fn single_vertex_tree() {
        let d = Diagram::from_rows(&[[1, 2, 1, 2]]);
        let g = build_graph(&d);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.height(), 0);
        assert_eq!(t.main_path(), &[1]);
        assert!(t.internal_node_count_per_level().is_empty());
    }

    #[test]
    fn path_graph_tree_is_the_path() {
        let d = chained_intervals(3);
        let g = build_graph(&d);
        assert_eq!(g.edges(), vec![(1, 2), (2, 3)]);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.parents(), &[0, 0, 1, 2]);
        assert_eq!(t.main_path(), &[1, 2, 3]);
    }

    #[test]
    fn four_vertex_path_main_path() {
        let d = chained_intervals(4);
        let g = build_graph(&d);
        let t = build_bfs_tree(&g, &d).unwrap();
        assert_eq!(t.main_path(), &[1, 2, 3, 4]);
        assert_eq!(t.main_path().len() - 1, t.level(4) as usize);
    }

    #[test]
    fn disconnected_rejected() {
        let d = Diagram::from_rows(&[[1, 2, 1, 2], [3, 4, 3, 4]]);
        let g = build_graph(&d);
        assert_eq!(build_bfs_tree(&g, &d).unwrap_err(), BfsTreeError::Disconnected);
    }

    #[test]
    fn levels_match_distance_oracle() {
        for seed in 0..10 {
            let d = generate_random(40, seed, Mode::General).unwrap();
            let g = build_graph(&d);
            let t = build_bfs_tree(&g, &d).unwrap();
            let dist = crate::graph::bfs_distances(&g, 1);
            for v in 1..=g.n() {
                assert_eq!(Some(t.level(v)), dist[v]);
                if v != 1 {
                    assert!(g.has_edge(v, t.parent(v)));
                    assert_eq!(t.level(t.parent(v)) + 1, t.level(v));
                }
            }
        }
    }

    #[test]
    fn dominating_rule_keeps_two_internals_on_random_corpus() {
        for seed in 0..20 {
            for mode in [Mode::General, Mode::Interval, Mode::Permutation] {
                let d = generate_random(35, seed, mode).unwrap();
                let g = build_graph(&d);
                let t = build_bfs_tree(&g, &d).unwrap();
                assert_eq!(t.fallback_parents(), 0, "seed {seed} mode {mode}");
                let report = check_internal_nodes(&t, &g, &d);
                assert!(report.max_internal_nodes <= 2, "seed {seed} mode {mode}");
                assert!(report.is_clean(), "seed {seed} mode {mode}: {report:?}");
            }
        }
    }
}
