//! Command-line front door: generate, build, verify, oracle, dot export,
//! and benchmarking.
//!
//! Exit codes are stable so scripts can branch on them:
//! 0 success (verify: no violations), 1 verify found violations or an
//! output could not be written, 2 parse/validation problems (including
//! n mismatches), 3 disconnected graph, 4 tree not spanning, 5 instance
//! too large for the exhaustive oracle.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::diagram::{self, Diagram, Mode};
use crate::graph::{self, IntersectionGraph};
use crate::spanner::{self, SpannerError};
use crate::verify::{self, TreeView};

pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DISCONNECTED: i32 = 3;
pub const EXIT_NOT_SPANNING: i32 = 4;
pub const EXIT_TOO_LARGE: i32 = 5;

#[derive(Parser)]
#[command(
    name = "trapspan",
    version,
    about = "Tree 3-spanner construction and verification for trapezoid graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a random connected trapezoid diagram.
    Gen {
        /// Number of trapezoids (at least 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// general, interval or permutation.
        #[arg(long, default_value = "general", value_parser = parse_mode)]
        mode: Mode,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the tree 3-spanner of a diagram file.
    Build {
        #[arg(short, long)]
        input: PathBuf,
        /// Tree file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the per-level construction trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Report the stretch of every graph edge under a tree file.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 3)]
        threshold: u32,
    },
    /// Minimum achievable stretch over all spanning trees (n <= 9).
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Emit the intersection graph as DOT; tree edges bold if supplied.
    Dot {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        tree: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the generate/build/verify phases across instance sizes.
    Bench {
        /// Comma-separated instance sizes, ascending.
        #[arg(long, required = true, value_delimiter = ',', num_args(1..))]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        seed: u64,
    },
}

struct CmdError {
    code: i32,
    message: String,
}

impl CmdError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CmdError {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), CmdError>;

/// Parses arguments from the process environment and runs the command;
/// returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Clap handles --help/--version (exit 0) and usage errors (exit 2).
        Err(e) => e.exit(),
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

pub fn dispatch(command: Command) -> Result<(), i32> {
    let result = match command {
        Command::Gen {
            n,
            seed,
            mode,
            output,
        } => cmd_gen(n as usize, seed, mode, output.as_deref()),
        Command::Build {
            input,
            output,
            trace,
        } => cmd_build(&input, output.as_deref(), trace.as_deref()),
        Command::Verify {
            input,
            tree,
            threshold,
        } => cmd_verify(&input, &tree, threshold),
        Command::Oracle { input } => cmd_oracle(&input),
        Command::Dot {
            input,
            tree,
            output,
        } => cmd_dot(&input, tree.as_deref(), output.as_deref()),
        Command::Bench { sizes, seed } => cmd_bench(&sizes, seed),
    };
    result.map_err(|e| {
        eprintln!("error: {}", e.message);
        e.code
    })
}

fn write_out(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CmdError::new(EXIT_VIOLATIONS, format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CmdError::new(EXIT_VIOLATIONS, format!("cannot write stdout: {e}")))
        }
    }
}

fn read_diagram(path: &Path) -> Result<Diagram, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    let diag = diagram::parse_diagram(&text)
        .map_err(|e| CmdError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let report = diagram::validate(&diag);
    if !report.is_valid() {
        let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CmdError::new(
            EXIT_PARSE,
            format!("{}: invalid diagram: {}", path.display(), lines.join("; ")),
        ));
    }
    Ok(diag)
}

/// Reads, validates and canonicalizes a diagram, and builds its graph.
fn load_graph(path: &Path) -> Result<(Diagram, IntersectionGraph), CmdError> {
    let diag = read_diagram(path)?;
    let (canonical, _) = diagram::canonicalize(&diag);
    let g = graph::build_graph(&canonical);
    Ok((canonical, g))
}

fn cmd_gen(n: usize, seed: u64, mode: Mode, output: Option<&Path>) -> CmdResult {
    let diag = diagram::generate_random(n, seed, mode)
        .map_err(|e| CmdError::new(EXIT_DISCONNECTED, e.to_string()))?;
    write_out(output, &diagram::serialize(&diag))
}

fn cmd_build(input: &Path, output: Option<&Path>, trace: Option<&Path>) -> CmdResult {
    let diag = read_diagram(input)?;
    let (tree, log) = spanner::build_tree3spanner(&diag).map_err(|e| match e {
        SpannerError::Disconnected => CmdError::new(EXIT_DISCONNECTED, e.to_string()),
        SpannerError::Invalid(_) => CmdError::new(EXIT_PARSE, e.to_string()),
    })?;
    write_out(output, &spanner::serialize_tree(tree.parents()))?;
    if let Some(trace_path) = trace {
        write_out(Some(trace_path), &log.render())?;
    }
    Ok(())
}

fn read_tree(path: &Path, n: usize) -> Result<Vec<usize>, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    let parents = spanner::parse_tree(&text)
        .map_err(|e| CmdError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    if parents.len() - 1 != n {
        return Err(CmdError::new(
            EXIT_PARSE,
            format!(
                "vertex count mismatch: diagram has {n}, tree has {}",
                parents.len() - 1
            ),
        ));
    }
    Ok(parents)
}

fn cmd_verify(input: &Path, tree_path: &Path, threshold: u32) -> CmdResult {
    let (_, g) = load_graph(input)?;
    let parents = read_tree(tree_path, g.n())?;
    let tree = TreeView::new(&parents)
        .map_err(|e| CmdError::new(EXIT_NOT_SPANNING, format!("tree is not spanning: {e}")))?;
    let foreign = verify::non_graph_edges(&g, &tree);
    if !foreign.is_empty() {
        let (v, p) = foreign[0];
        return Err(CmdError::new(
            EXIT_NOT_SPANNING,
            format!("tree edge ({v},{p}) is not a graph edge"),
        ));
    }
    let report = verify::max_edge_stretch(&g, &tree, threshold);
    println!("{report}");
    if report.ok() {
        Ok(())
    } else {
        Err(CmdError::new(
            EXIT_VIOLATIONS,
            format!("{} edge(s) exceed threshold {threshold}", report.violations.len()),
        ))
    }
}

fn cmd_oracle(input: &Path) -> CmdResult {
    let (_, g) = load_graph(input)?;
    let best = verify::exhaustive_best_tree_stretch(&g).map_err(|e| match e {
        verify::OracleError::TooLarge { .. } => CmdError::new(EXIT_TOO_LARGE, e.to_string()),
        verify::OracleError::Disconnected => CmdError::new(EXIT_DISCONNECTED, e.to_string()),
    })?;
    println!("{best}");
    Ok(())
}

fn render_dot(g: &IntersectionGraph, tree_parents: Option<&[usize]>) -> String {
    let bold: std::collections::BTreeSet<(usize, usize)> = tree_parents
        .map(|parents| {
            (1..parents.len())
                .filter(|&v| parents[v] != 0)
                .map(|v| (v.min(parents[v]), v.max(parents[v])))
                .collect()
        })
        .unwrap_or_default();
    let mut out = String::from("graph trapspan {\n");
    for v in 1..=g.n() {
        out.push_str(&format!("  {v};\n"));
    }
    for (u, v) in g.edges() {
        if bold.contains(&(u, v)) {
            out.push_str(&format!("  {u} -- {v} [style=bold];\n"));
        } else {
            out.push_str(&format!("  {u} -- {v};\n"));
        }
    }
    out.push_str("}\n");
    out
}

fn cmd_dot(input: &Path, tree: Option<&Path>, output: Option<&Path>) -> CmdResult {
    let (_, g) = load_graph(input)?;
    let parents = match tree {
        Some(path) => Some(read_tree(path, g.n())?),
        None => None,
    };
    write_out(output, &render_dot(&g, parents.as_deref()))
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

fn cmd_bench(sizes: &[usize], seed: u64) -> CmdResult {
    for (idx, &n) in sizes.iter().enumerate() {
        let instance_seed = seed.wrapping_add(idx as u64);
        let mut gen_ms = Vec::new();
        let mut build_ms = Vec::new();
        let mut verify_ms = Vec::new();
        let mut max_stretch = 0;
        for _ in 0..3 {
            let t0 = Instant::now();
            let diag = diagram::generate_random(n, instance_seed, Mode::General)
                .map_err(|e| CmdError::new(EXIT_DISCONNECTED, e.to_string()))?;
            gen_ms.push(t0.elapsed().as_secs_f64() * 1e3);

            let t1 = Instant::now();
            let (tree, _) = spanner::build_tree3spanner(&diag)
                .map_err(|e| CmdError::new(EXIT_DISCONNECTED, e.to_string()))?;
            build_ms.push(t1.elapsed().as_secs_f64() * 1e3);

            let t2 = Instant::now();
            let g = graph::build_graph(&diag);
            let view = TreeView::new(tree.parents())
                .map_err(|e| CmdError::new(EXIT_NOT_SPANNING, e.to_string()))?;
            let report = verify::max_edge_stretch(&g, &view, 3);
            verify_ms.push(t2.elapsed().as_secs_f64() * 1e3);
            max_stretch = max_stretch.max(report.max_edge_stretch);
        }
        println!(
            "n={n} gen_ms={:.3} build_ms={:.3} verify_ms={:.3} max_stretch={max_stretch}",
            median(gen_ms),
            median(build_ms),
            median(verify_ms),
        );
    }
    Ok(())
}
