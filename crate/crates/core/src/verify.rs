//! Independent verification of spanner outputs: tree distances, per-edge
//! stretch reports, the definitional all-pairs check, and an exhaustive
//! minimum-stretch search over all spanning trees of tiny graphs.
//!
//! Everything here works from a bare parent array, so it can check trees
//! read from files just as well as freshly built ones.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::graph::{self, IntersectionGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("no root: no vertex has parent 0")]
    NoRoot,
    #[error("multiple roots: vertices {0} and {1} both have parent 0")]
    MultipleRoots(usize, usize),
    #[error("cycle: vertex {vertex} never reaches the root")]
    Cycle { vertex: usize },
}

/// A validated rooted tree over vertices `1..=n` with precomputed depths
/// for distance queries.
#[derive(Debug, Clone)]
pub struct TreeView {
    parent: Vec<usize>,
    depth: Vec<u32>,
    root: usize,
}

impl TreeView {
    /// Validates a parent array (index 0 unused, parent 0 = root): there
    /// must be exactly one root and every vertex must reach it.
    pub fn new(parents: &[usize]) -> Result<TreeView, TreeError> {
        let n = parents.len() - 1;
        let mut root = 0;
        for v in 1..=n {
            if parents[v] == 0 {
                if root != 0 {
                    return Err(TreeError::MultipleRoots(root, v));
                }
                root = v;
            }
        }
        if root == 0 {
            return Err(TreeError::NoRoot);
        }
        let mut children = vec![Vec::new(); n + 1];
        for v in 1..=n {
            if v != root {
                children[parents[v]].push(v);
            }
        }
        let mut depth = vec![u32::MAX; n + 1];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                queue.push_back(c);
            }
        }
        if let Some(v) = (1..=n).find(|&v| depth[v] == u32::MAX) {
            return Err(TreeError::Cycle { vertex: v });
        }
        Ok(TreeView {
            parent: parents.to_vec(),
            depth,
            root,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Number of edges on the unique tree path between `u` and `v`:
    /// depth-aligned upward walks to the lowest common ancestor.
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        let (mut u, mut v) = (u, v);
        let mut dist = 0;
        while self.depth[u] > self.depth[v] {
            u = self.parent[u];
            dist += 1;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v];
            dist += 1;
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
            dist += 2;
        }
        dist
    }
}

/// Tree edges whose endpoints are not adjacent in `g`; nonempty means
/// the tree is not a spanning tree *of the graph*.
pub fn non_graph_edges(g: &IntersectionGraph, tree: &TreeView) -> Vec<(usize, usize)> {
    (1..=tree.n())
        .filter(|&v| v != tree.root())
        .map(|v| (v, tree.parent[v]))
        .filter(|&(v, p)| !g.has_edge(v, p))
        .collect()
}

/// Per-edge stretch summary at a threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StretchReport {
    pub max_edge_stretch: u32,
    pub threshold: u32,
    /// Graph edges `(u, v)` with tree distance `d` above the threshold.
    pub violations: Vec<(usize, usize, u32)>,
}

impl StretchReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for StretchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max_stretch={} threshold={} violations=[",
            self.max_edge_stretch, self.threshold
        )?;
        for (i, (u, v, d)) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({u},{v},{d})")?;
        }
        write!(f, "]")
    }
}

/// Evaluates the tree distance of every graph edge. A spanning tree is a
/// tree `t`-spanner exactly when no edge stretches above `t`.
pub fn max_edge_stretch(g: &IntersectionGraph, tree: &TreeView, threshold: u32) -> StretchReport {
    let mut max = if g.n() <= 1 { 1 } else { 0 };
    let mut violations = Vec::new();
    for (u, v) in g.edges() {
        let d = tree.distance(u, v);
        max = max.max(d);
        if d > threshold {
            violations.push((u, v, d));
        }
    }
    StretchReport {
        max_edge_stretch: max.max(1),
        threshold,
        violations,
    }
}

fn tree_adjacency(tree: &TreeView) -> Vec<Vec<usize>> {
    let n = tree.n();
    let mut adj = vec![Vec::new(); n + 1];
    for v in 1..=n {
        let p = tree.parent[v];
        if p != 0 {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    adj
}

fn bfs_over(adj: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// The definitional check: `d_T(u, v) <= t * d_G(u, v)` for every vertex
/// pair, computed with full distance matrices on both sides. Quadratic;
/// meant for modest `n`.
pub fn all_pairs_stretch_check(g: &IntersectionGraph, tree: &TreeView, t: u32) -> bool {
    let n = g.n();
    let dg = graph::all_pairs_distances(g);
    let adj = tree_adjacency(tree);
    for u in 1..=n {
        let dt = bfs_over(&adj, u);
        for v in 1..=n {
            if let (Some(dg_uv), Some(dt_uv)) = (dg[u][v], dt[v]) {
                if u64::from(dt_uv) > u64::from(t) * u64::from(dg_uv) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: n = {n} > 9")]
    TooLarge { n: usize },
    #[error("graph is disconnected: no spanning tree exists")]
    Disconnected,
}

/// Max edge stretch of one explicit spanning tree, given as an edge list.
fn stretch_of_tree(g: &IntersectionGraph, tree_edges: &[(usize, usize)]) -> u32 {
    let n = g.n();
    let mut adj = vec![Vec::new(); n + 1];
    for &(u, v) in tree_edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut max = 1;
    for u in 1..=n {
        let dist = bfs_over(&adj, u);
        for &v in g.neighbors(u) {
            if v > u {
                max = max.max(dist[v].expect("spanning tree connects all vertices"));
            }
        }
    }
    max
}

fn find(labels: &mut [usize], v: usize) -> usize {
    let mut r = v;
    while labels[r] != r {
        r = labels[r];
    }
    let mut c = v;
    while labels[c] != r {
        let next = labels[c];
        labels[c] = r;
        c = next;
    }
    r
}

/// Minimum over all spanning trees of the maximum edge stretch, by
/// recursive edge inclusion/exclusion with cycle pruning. Capped at
/// `n <= 9` to bound the spanning-tree count; stops early once the
/// structural floor (1 for trees, otherwise 2) is reached.
pub fn exhaustive_best_tree_stretch(g: &IntersectionGraph) -> Result<u32, OracleError> {
    let n = g.n();
    if n > 9 {
        return Err(OracleError::TooLarge { n });
    }
    if !graph::is_connected(g) {
        return Err(OracleError::Disconnected);
    }
    if n <= 1 {
        return Ok(1);
    }
    let edges = g.edges();
    let m = edges.len();
    let floor = if m == n - 1 { 1 } else { 2 };
    let mut best = u32::MAX;

    fn recurse(
        g: &IntersectionGraph,
        edges: &[(usize, usize)],
        idx: usize,
        chosen: &mut Vec<(usize, usize)>,
        labels: &[usize],
        best: &mut u32,
        floor: u32,
    ) {
        let n = g.n();
        if *best == floor {
            return;
        }
        if chosen.len() == n - 1 {
            *best = (*best).min(stretch_of_tree(g, chosen));
            return;
        }
        if idx == edges.len() || chosen.len() + (edges.len() - idx) < n - 1 {
            return;
        }
        let (u, v) = edges[idx];
        let mut merged = labels.to_vec();
        let (ru, rv) = (find(&mut merged, u), find(&mut merged, v));
        if ru != rv {
            merged[ru] = rv;
            chosen.push((u, v));
            recurse(g, edges, idx + 1, chosen, &merged, best, floor);
            chosen.pop();
        }
        recurse(g, edges, idx + 1, chosen, labels, best, floor);
    }

    let labels: Vec<usize> = (0..=n).collect();
    let mut chosen = Vec::with_capacity(n - 1);
    recurse(g, &edges, 0, &mut chosen, &labels, &mut best, floor);
    debug_assert_ne!(best, u32::MAX, "connected graph has a spanning tree");
    Ok(best)
}
