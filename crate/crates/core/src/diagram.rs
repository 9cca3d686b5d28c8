//! Trapezoid diagrams: parsing, validation, canonical form, random
//! generation, and serialization.
//!
//! A diagram is an ordered list of trapezoids. Trapezoid `i` occupies the
//! interval `[a, b]` on the top line and `[c, d]` on the bottom line. The
//! canonical form sorts trapezoids by increasing `b` and rank-compresses
//! each line's coordinates, so only coordinate order survives — the
//! intersection predicate never looks at magnitudes.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph;

/// Corner points of one trapezoid: `[a, b]` on the top line, `[c, d]` on
/// the bottom line. `a <= b` and `c <= d`; equality is the degenerate case
/// used by the interval and permutation subclasses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Trapezoid {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Trapezoid {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Trapezoid { a, b, c, d }
    }
}

/// An ordered collection of trapezoids; vertex `v` of the derived graph is
/// `trapezoids[v-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    trapezoids: Vec<Trapezoid>,
}

impl Diagram {
    pub fn new(trapezoids: Vec<Trapezoid>) -> Self {
        Diagram { trapezoids }
    }

    /// Builds a diagram from `[a, b, c, d]` rows, in row order.
    pub fn from_rows(rows: &[[i64; 4]]) -> Self {
        Diagram::new(
            rows.iter()
                .map(|r| Trapezoid::new(r[0], r[1], r[2], r[3]))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.trapezoids.len()
    }

    /// Trapezoid of vertex `v` (1-based).
    pub fn trap(&self, v: usize) -> Trapezoid {
        self.trapezoids[v - 1]
    }

    pub fn trapezoids(&self) -> &[Trapezoid] {
        &self.trapezoids
    }

    /// True when trapezoids are already sorted by increasing `b`.
    pub fn is_sorted_by_b(&self) -> bool {
        self.trapezoids.windows(2).all(|w| w[0].b < w[1].b)
    }
}

/// Subclass of diagrams to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Independent intervals on each line, randomly matched.
    General,
    /// One interval per vertex copied to both lines (`a = c`, `b = d`).
    Interval,
    /// Points on both lines (`a = b`, `c = d`); the graph is the inversion
    /// graph of the bottom permutation.
    Permutation,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::General => "general",
            Mode::Interval => "interval",
            Mode::Permutation => "permutation",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Mode::General),
            "interval" => Ok(Mode::Interval),
            "permutation" => Ok(Mode::Permutation),
            other => Err(format!(
                "unknown mode {other:?} (expected general, interval or permutation)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty diagram file")]
    Empty,
    #[error("line {line}: expected vertex count, got {text:?}")]
    BadCount { line: usize, text: String },
    #[error("line {line}: expected 4 fields \"a b c d\", found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: invalid integer {text:?}")]
    BadInteger { line: usize, text: String },
    #[error("expected {expected} trapezoids, found {found}")]
    CountMismatch { expected: usize, found: usize },
}

/// Parses the diagram file format: first a line with `n`, then `n` lines
/// of four integers `a b c d`. Lines starting with `#` and blank lines are
/// ignored. The result keeps file order; it is not yet canonical.
pub fn parse_diagram(text: &str) -> Result<Diagram, ParseError> {
    let mut rows = Vec::new();
    let mut expected: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        match expected {
            None => {
                let n: usize = content.parse().map_err(|_| ParseError::BadCount {
                    line,
                    text: content.to_string(),
                })?;
                expected = Some(n);
            }
            Some(_) => {
                let fields: Vec<&str> = content.split_whitespace().collect();
                if fields.len() != 4 {
                    return Err(ParseError::FieldCount {
                        line,
                        found: fields.len(),
                    });
                }
                let mut vals = [0i64; 4];
                for (slot, field) in vals.iter_mut().zip(&fields) {
                    *slot = field.parse().map_err(|_| ParseError::BadInteger {
                        line,
                        text: field.to_string(),
                    })?;
                }
                rows.push(Trapezoid::new(vals[0], vals[1], vals[2], vals[3]));
            }
        }
    }
    let expected = expected.ok_or(ParseError::Empty)?;
    if rows.len() != expected {
        return Err(ParseError::CountMismatch {
            expected,
            found: rows.len(),
        });
    }
    Ok(Diagram::new(rows))
}

/// Canonical textual form: `n`, then one `a b c d` line per trapezoid.
pub fn serialize(diag: &Diagram) -> String {
    let mut out = String::new();
    out.push_str(&diag.n().to_string());
    out.push('\n');
    for t in diag.trapezoids() {
        out.push_str(&format!("{} {} {} {}\n", t.a, t.b, t.c, t.d));
    }
    out
}

/// One invariant violation found by [`validate`]. Vertex indices refer to
/// the diagram's current order (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `a > b` at the given vertex.
    TopInverted { vertex: usize },
    /// `c > d` at the given vertex.
    BottomInverted { vertex: usize },
    /// Two distinct vertices share a top-line coordinate.
    DuplicateTop { value: i64, vertices: (usize, usize) },
    /// Two distinct vertices share a bottom-line coordinate.
    DuplicateBottom { value: i64, vertices: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TopInverted { vertex } => write!(f, "vertex {vertex}: a > b"),
            Violation::BottomInverted { vertex } => write!(f, "vertex {vertex}: c > d"),
            Violation::DuplicateTop { value, vertices } => write!(
                f,
                "vertices {} and {} share top coordinate {value}",
                vertices.0, vertices.1
            ),
            Violation::DuplicateBottom { value, vertices } => write!(
                f,
                "vertices {} and {} share bottom coordinate {value}",
                vertices.0, vertices.1
            ),
        }
    }
}

/// Result of [`validate`]; empty means the diagram is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the diagram invariants: `a <= b`, `c <= d`, and no two
/// trapezoids sharing an end point on either line. A coordinate repeated
/// within one trapezoid (`a = b` or `c = d`) is the allowed degenerate
/// case and is not reported.
pub fn validate(diag: &Diagram) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, t) in diag.trapezoids().iter().enumerate() {
        let vertex = i + 1;
        if t.a > t.b {
            report.violations.push(Violation::TopInverted { vertex });
        }
        if t.c > t.d {
            report.violations.push(Violation::BottomInverted { vertex });
        }
    }
    let mut check_line = |coords: &mut Vec<(i64, usize)>, top: bool| {
        coords.sort_unstable();
        for w in coords.windows(2) {
            let ((v0, i0), (v1, i1)) = (w[0], w[1]);
            if v0 == v1 && i0 != i1 {
                let vertices = (i0.min(i1), i0.max(i1));
                report.violations.push(if top {
                    Violation::DuplicateTop {
                        value: v0,
                        vertices,
                    }
                } else {
                    Violation::DuplicateBottom {
                        value: v0,
                        vertices,
                    }
                });
            }
        }
    };
    let mut top = Vec::with_capacity(2 * diag.n());
    let mut bottom = Vec::with_capacity(2 * diag.n());
    for (i, t) in diag.trapezoids().iter().enumerate() {
        let vertex = i + 1;
        top.push((t.a, vertex));
        if t.b != t.a {
            top.push((t.b, vertex));
        }
        bottom.push((t.c, vertex));
        if t.d != t.c {
            bottom.push((t.d, vertex));
        }
    }
    check_line(&mut top, true);
    check_line(&mut bottom, false);
    report
}

/// Rank-compresses one line in place: coordinates are replaced by their
/// 1-based rank among the distinct values of that line, preserving order.
fn compress_line(values: &mut [&mut i64]) {
    let mut distinct: Vec<i64> = values.iter().map(|v| **v).collect();
    distinct.sort_unstable();
    distinct.dedup();
    for v in values.iter_mut() {
        let rank = distinct.partition_point(|&x| x < **v) + 1;
        **v = rank as i64;
    }
}

/// Sorts trapezoids by increasing `b`, reindexes them `1..=n`, and
/// rank-compresses each line's coordinates. Returns the canonical diagram
/// and the permutation mapping old vertex `v` to `perm[v-1]` (1-based).
///
/// The input must pass [`validate`]; with distinct end points the sort
/// order is unique.
pub fn canonicalize(diag: &Diagram) -> (Diagram, Vec<usize>) {
    let n = diag.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (diag.trapezoids()[i].b, i));
    let mut perm = vec![0usize; n];
    for (new_pos, &old_pos) in order.iter().enumerate() {
        perm[old_pos] = new_pos + 1;
    }
    let mut traps: Vec<Trapezoid> = order.iter().map(|&i| diag.trapezoids()[i]).collect();
    {
        let mut top: Vec<&mut i64> = Vec::with_capacity(2 * n);
        for t in traps.iter_mut() {
            let Trapezoid { a, b, .. } = t;
            top.push(a);
            top.push(b);
        }
        compress_line(&mut top);
    }
    {
        let mut bottom: Vec<&mut i64> = Vec::with_capacity(2 * n);
        for t in traps.iter_mut() {
            let Trapezoid { c, d, .. } = t;
            bottom.push(c);
            bottom.push(d);
        }
        compress_line(&mut bottom);
    }
    (Diagram::new(traps), perm)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("n must be at least 1")]
    ZeroVertices,
    #[error("no connected diagram found in {attempts} attempts (n = {n}, mode = {mode})")]
    ConnectivityExhausted {
        n: usize,
        mode: Mode,
        attempts: usize,
    },
}

const MAX_ATTEMPTS: u64 = 100;

/// Draws a random canonical diagram whose derived graph is connected.
/// Deterministic for a fixed `(n, seed, mode)` triple: disconnected draws
/// are redrawn from a seed-derived successor stream, up to 100 attempts.
pub fn generate_random(n: usize, seed: u64, mode: Mode) -> Result<Diagram, GenerateError> {
    if n == 0 {
        return Err(GenerateError::ZeroVertices);
    }
    for attempt in 0..MAX_ATTEMPTS {
        let attempt_seed = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let diag = draw(n, mode, &mut rng);
        let (canonical, _) = canonicalize(&diag);
        let g = graph::build_graph(&canonical);
        if graph::is_connected(&g) {
            return Ok(canonical);
        }
    }
    Err(GenerateError::ConnectivityExhausted {
        n,
        mode,
        attempts: MAX_ATTEMPTS as usize,
    })
}

/// Shuffles `1..=2n` and pairs consecutive entries into `n` ordered
/// intervals.
fn random_intervals(n: usize, rng: &mut ChaCha8Rng) -> Vec<(i64, i64)> {
    let mut points: Vec<i64> = (1..=2 * n as i64).collect();
    points.shuffle(rng);
    points
        .chunks(2)
        .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
        .collect()
}

fn draw(n: usize, mode: Mode, rng: &mut ChaCha8Rng) -> Diagram {
    match mode {
        Mode::General => {
            let top = random_intervals(n, rng);
            let bottom = random_intervals(n, rng);
            let mut matching: Vec<usize> = (0..n).collect();
            matching.shuffle(rng);
            let traps = (0..n)
                .map(|i| {
                    let (a, b) = top[i];
                    let (c, d) = bottom[matching[i]];
                    Trapezoid::new(a, b, c, d)
                })
                .collect();
            Diagram::new(traps)
        }
        Mode::Interval => {
            let intervals = random_intervals(n, rng);
            let traps = intervals
                .iter()
                .map(|&(a, b)| Trapezoid::new(a, b, a, b))
                .collect();
            Diagram::new(traps)
        }
        Mode::Permutation => {
            let mut pi: Vec<i64> = (1..=n as i64).collect();
            pi.shuffle(rng);
            let traps = (0..n)
                .map(|i| {
                    let p = i as i64 + 1;
                    Trapezoid::new(p, p, pi[i], pi[i])
                })
                .collect();
            Diagram::new(traps)
        }
    }
}
