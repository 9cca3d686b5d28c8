//! Tree 3-spanner construction for trapezoid graphs.
//!
//! A trapezoid diagram places one interval per vertex on each of two
//! horizontal lines; vertices are adjacent exactly when their trapezoids
//! intersect. This crate models such diagrams, derives the intersection
//! graph, and builds a spanning tree in which every graph edge has tree
//! distance at most 3. Every stage is paired with an independent checker,
//! so the stretch claim is verified rather than assumed on each output.
//!
//! Pipeline: [`diagram`] (model, parse, generate) → [`graph`] (adjacency,
//! BFS distance oracles) → [`bfstree`] (leveled BFS tree with a
//! dominating-parent rule) → [`maspt`] (marked shortest-path subgraph) →
//! [`spanner`] (spine cascade and parent assignment) → [`verify`]
//! (stretch reports, all-pairs oracle, exhaustive tiny-instance search).
//!
//! Vertices are `1..=n` throughout; arrays indexed by vertex keep slot 0
//! unused. Parent arrays use 0 for "no parent" (the root), matching the
//! tree file format emitted by the CLI.

pub mod bfstree;
pub mod cli;
pub mod diagram;
pub mod graph;
pub mod maspt;
pub mod spanner;
pub mod verify;

pub use bfstree::LeveledTree;
pub use diagram::{Diagram, Mode, Trapezoid};
pub use graph::IntersectionGraph;
pub use maspt::MarkedSubgraph;
pub use spanner::{build_tree3spanner, SpannerTree, TraceLog};
pub use verify::{StretchReport, TreeView};
