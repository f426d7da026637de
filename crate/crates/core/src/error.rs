use std::fmt;

use crate::hypercube::{Vertex, D_MAX};

/// Errors reported by the toolkit.
///
/// Precondition violations (bad dimensions, mismatched inputs, invalid
/// certificates) are ordinary errors; `TheoremViolation` and `SplitFailure`
/// flag outcomes that contradict proven statements and therefore indicate a
/// solver bug — callers are expected to surface them loudly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Dimension outside `2..=D_MAX`.
    DimensionRange { d: usize },
    /// Layer index outside `0..=d`.
    LayerRange { d: usize, layer: usize },
    /// Coordinate index outside `1..=d`.
    CoordinateRange { d: usize, coordinate: usize },
    /// Vertex code with bits beyond the cube dimension.
    VertexRange { d: usize, bits: u32 },
    /// Operands live in cubes of different dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// A vertex pair that should form an upward edge does not.
    NotAnEdge { lo: Vertex, hi: Vertex },
    /// Unparseable vertex, function table, or coloring literal.
    Parse(String),
    /// An operation that requires a nonempty set received an empty one.
    EmptySet(&'static str),
    /// The matched-pair invariants do not hold; carries the first violation.
    InvalidPair(PairViolation),
    /// Matched pair whose sides are not single levels of the cube.
    LevelsRequired,
    /// Doubled routing needs the two levels at distance two or more.
    LevelGapTooSmall { gap: usize },
    /// Source or sink set escapes the flow problem's graph.
    TerminalOutsideGraph { vertex: Vertex },
    /// Sources and sinks must be disjoint.
    TerminalOverlap { vertex: Vertex },
    /// The flow value is unbounded: an all-infinite source-sink path exists.
    UnboundedFlow { path: Vec<Vertex> },
    /// Alleged cut fails to block some source-to-sink path.
    InvalidCut { path: Vec<Vertex> },
    /// Flow and cut values differ, so slackness cannot be checked.
    NotOptimalPair { flow: u64, cut: String },
    /// A complementary-slackness condition failed.
    Slackness(String),
    /// Flow/cut/path inputs do not belong to the given problem.
    ContextMismatch(String),
    /// A flow split that is guaranteed to exist could not be constructed.
    SplitFailure { instance: String },
    /// A proven theorem's conclusion failed on a concrete instance.
    TheoremViolation { theorem: &'static str, instance: String },
    /// No directed-volume certificate exists (the volume is zero).
    NoCertificate,
    /// Coloring domain differs from the function's violated edge set.
    ColoringDomain(String),
    /// Exhaustive coloring search beyond the supported size.
    TooManyViolatedEdges { count: usize, cap: usize },
    /// Malformed search or sweep configuration.
    Config(String),
}

/// First offending fact found while validating a matched pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairViolation {
    /// A source vertex appears twice.
    DuplicateSource(Vertex),
    /// A target vertex appears twice, so the map is not a bijection.
    DuplicateTarget(Vertex),
    /// A source is not strictly below its target.
    NotStrictlyBelow { source: Vertex, target: Vertex },
    /// A vertex has the wrong dimension.
    WrongDimension { vertex: Vertex, expected: usize },
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairViolation::DuplicateSource(v) => write!(f, "duplicate source {v}"),
            PairViolation::DuplicateTarget(v) => write!(f, "duplicate target {v}"),
            PairViolation::NotStrictlyBelow { source, target } => {
                write!(f, "{source} is not strictly below {target}")
            }
            PairViolation::WrongDimension { vertex, expected } => {
                write!(f, "vertex {vertex} does not live in the {expected}-cube")
            }
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionRange { d } => {
                write!(f, "dimension {d} out of range (2..={D_MAX})")
            }
            Error::LayerRange { d, layer } => {
                write!(f, "layer {layer} out of range for the {d}-cube (0..={d})")
            }
            Error::CoordinateRange { d, coordinate } => {
                write!(f, "coordinate {coordinate} out of range for the {d}-cube (1..={d})")
            }
            Error::VertexRange { d, bits } => {
                write!(f, "vertex code {bits} does not fit in the {d}-cube")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotAnEdge { lo, hi } => {
                write!(f, "{lo} -> {hi} is not an upward hypercube edge")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::EmptySet(what) => write!(f, "{what} must be nonempty"),
            Error::InvalidPair(v) => write!(f, "not a matched pair: {v}"),
            Error::LevelsRequired => write!(f, "levels required: each side must sit inside a single layer"),
            Error::LevelGapTooSmall { gap } => {
                write!(f, "level distance {gap} too small: distance \u{2265} 2 required")
            }
            Error::TerminalOutsideGraph { vertex } => {
                write!(f, "terminal {vertex} is not a vertex of the flow graph")
            }
            Error::TerminalOverlap { vertex } => {
                write!(f, "vertex {vertex} is both a source and a sink")
            }
            Error::UnboundedFlow { path } => {
                write!(f, "flow is unbounded along {}", render_path(path))
            }
            Error::InvalidCut { path } => {
                write!(f, "not a cut: path {} is cut-free", render_path(path))
            }
            Error::NotOptimalPair { flow, cut } => {
                write!(f, "flow value {flow} and cut value {cut} differ; not an optimal pair")
            }
            Error::Slackness(msg) => write!(f, "complementary slackness violated: {msg}"),
            Error::ContextMismatch(msg) => write!(f, "inconsistent inputs: {msg}"),
            Error::SplitFailure { instance } => {
                write!(f, "SPLIT FAILURE: no feasible half-flow; instance archived: {instance}")
            }
            Error::TheoremViolation { theorem, instance } => {
                write!(f, "THEOREM VIOLATION ({theorem}): instance archived: {instance}")
            }
            Error::NoCertificate => write!(f, "directed volume is zero: no certificate"),
            Error::ColoringDomain(msg) => write!(f, "coloring domain mismatch: {msg}"),
            Error::TooManyViolatedEdges { count, cap } => {
                write!(
                    f,
                    "{count} violated edges exceed the exhaustive cap of {cap}; use the local-search mode"
                )
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

fn render_path(path: &[Vertex]) -> String {
    path.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}
