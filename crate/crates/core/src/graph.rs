//! Intersection graph of a canonical diagram, plus unweighted distance
//! oracles used by the verification layer.

use std::collections::VecDeque;

use crate::diagram::{Diagram, Trapezoid};

/// Adjacency structure of the derived graph. Immutable after
/// construction; neighbor lists are sorted ascending and symmetric.
#[derive(Debug, Clone)]
pub struct IntersectionGraph {
    n: usize,
    m: usize,
    adj: Vec<Vec<usize>>,
    matrix: Vec<bool>,
}

impl IntersectionGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sorted open neighborhood of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.matrix[u * (self.n + 1) + v]
    }

    /// All edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 1..=self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Intersection predicate for canonically ordered trapezoids `i < j`
/// (hence `b_i < b_j`): they intersect iff `a_j < b_i` or `c_j < d_i`.
pub fn intersects(t_i: &Trapezoid, t_j: &Trapezoid) -> bool {
    t_j.a < t_i.b || t_j.c < t_i.d
}

/// Builds the full adjacency structure by evaluating the predicate on all
/// pairs; `O(n^2)` time and memory.
pub fn build_graph(diag: &Diagram) -> IntersectionGraph {
    let n = diag.n();
    let mut adj = vec![Vec::new(); n + 1];
    let mut matrix = vec![false; (n + 1) * (n + 1)];
    let mut m = 0;
    for i in 1..=n {
        for j in (i + 1)..=n {
            if intersects(&diag.trap(i), &diag.trap(j)) {
                adj[i].push(j);
                adj[j].push(i);
                matrix[i * (n + 1) + j] = true;
                matrix[j * (n + 1) + i] = true;
                m += 1;
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    IntersectionGraph { n, m, adj, matrix }
}

/// BFS distances from `src`; `None` marks unreachable vertices. Index 0
/// is unused.
pub fn bfs_distances(g: &IntersectionGraph, src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n() + 1];
    dist[src] = Some(0);
    let mut queue = VecDeque::new();
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// True iff one BFS from vertex 1 reaches every vertex.
pub fn is_connected(g: &IntersectionGraph) -> bool {
    if g.n() == 0 {
        return true;
    }
    bfs_distances(g, 1).iter().skip(1).all(|d| d.is_some())
}

/// Full distance matrix via `n` BFS runs; `matrix[u][v] = d(u, v)`.
/// Row and column 0 are unused. Intended for instances small enough that
/// `O(n^2)` output is cheap.
pub fn all_pairs_distances(g: &IntersectionGraph) -> Vec<Vec<Option<u32>>> {
    let mut matrix = vec![vec![None; g.n() + 1]];
    for src in 1..=g.n() {
        matrix.push(bfs_distances(g, src));
    }
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::tests::d5;
    use crate::diagram::Diagram;

    #[test]
    fn intersects_d5_pairs() {
        let d = d5();
        // a_2 = 2 < b_1 = 4
        assert!(intersects(&d.trap(1), &d.trap(2)));
        // a_4 = 5 >= b_1 = 4 and c_4 = 6 >= d_1 = 5
        assert!(!intersects(&d.trap(1), &d.trap(4)));
    }

    #[test]
    fn intersects_disjoint_on_both_lines() {
        let t_i = Trapezoid::new(1, 2, 1, 2);
        let t_j = Trapezoid::new(3, 4, 3, 4);
        assert!(!intersects(&t_i, &t_j));
    }

    #[test]
    fn build_graph_d5_edges() {
        let g = build_graph(&d5());
        assert_eq!(g.m(), 7);
        assert_eq!(
            g.edges(),
            vec![(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)]
        );
    }

    #[test]
    fn build_graph_single_vertex() {
        let g = build_graph(&Diagram::from_rows(&[[1, 2, 1, 2]]));
        assert_eq!(g.n(), 1);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn identity_permutation_is_edgeless() {
        // a_i = b_i = i on top, c_i = d_i = i on bottom: no inversions.
        let rows: Vec<[i64; 4]> = (1..=4).map(|i| [i, i, i, i]).collect();
        let g = build_graph(&Diagram::from_rows(&rows));
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn bfs_distances_d5() {
        let g = build_graph(&d5());
        let dist = bfs_distances(&g, 1);
        assert_eq!(
            dist,
            vec![None, Some(0), Some(1), Some(1), Some(2), Some(2)]
        );
    }

    #[test]
    fn bfs_unreachable_marked() {
        let g = build_graph(&Diagram::from_rows(&[[1, 2, 1, 2], [3, 4, 3, 4]]));
        let dist = bfs_distances(&g, 1);
        assert_eq!(dist[1], Some(0));
        assert_eq!(dist[2], None);
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&build_graph(&d5())));
        assert!(is_connected(&build_graph(&Diagram::from_rows(&[[
            1, 2, 1, 2
        ]]))));
        assert!(!is_connected(&build_graph(&Diagram::from_rows(&[
            [1, 2, 1, 2],
            [3, 4, 3, 4]
        ]))));
    }

    #[test]
    fn all_pairs_d5() {
        let g = build_graph(&d5());
        let m = all_pairs_distances(&g);
        assert_eq!(m[1][5], Some(2));
        assert_eq!(m[2][5], Some(2));
        for v in 1..=5 {
            assert_eq!(m[v][v], Some(0));
        }
        for u in 1..=5 {
            for v in 1..=5 {
                assert_eq!(m[u][v], m[v][u]);
            }
        }
    }
}
