//! Primitives for the directed boolean hypercube `{0,1}^d`.
//!
//! Vertices are `d`-bit vectors packed into an unsigned integer: coordinate
//! `i` (1-based) lives at bit position `i - 1`.  The textual rendering is
//! the bitstring `x_1 x_2 … x_d`, so the 3-cube vertex with coordinate 2 set
//! prints as `010` and has code 2.  Every edge is oriented from the endpoint
//! with the distinguishing coordinate clear to the endpoint with it set, so
//! walks along edges strictly increase Hamming weight.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::Error;

/// Largest supported cube dimension.
pub const D_MAX: usize = 20;

/// Validated dimension of a hypercube, between 2 and [`D_MAX`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u8);

impl Dimension {
    /// Validates `2 <= d <= D_MAX`.
    pub fn new(d: usize) -> Result<Self, Error> {
        if (2..=D_MAX).contains(&d) {
            Ok(Dimension(d as u8))
        } else {
            Err(Error::DimensionRange { d })
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Number of vertices, `2^d`.
    pub fn vertex_count(self) -> usize {
        1usize << self.0
    }

    /// Bitmask with all `d` coordinates set.
    pub fn full_mask(self) -> u32 {
        (1u32 << self.0) - 1
    }

    /// The all-zeros vertex.
    pub fn bottom(self) -> Vertex {
        Vertex { d: self, bits: 0 }
    }

    /// The all-ones vertex.
    pub fn top(self) -> Vertex {
        Vertex { d: self, bits: self.full_mask() }
    }

    /// All vertices in code order.
    pub fn vertices(self) -> impl Iterator<Item = Vertex> {
        (0..=self.full_mask()).map(move |bits| Vertex { d: self, bits })
    }

    /// Builds the vertex with the given code, checking the range.
    pub fn vertex(self, bits: u32) -> Result<Vertex, Error> {
        if bits <= self.full_mask() {
            Ok(Vertex { d: self, bits })
        } else {
            Err(Error::VertexRange { d: self.get(), bits })
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vertex of the `d`-cube.
///
/// Ordered by `(d, code)`, so same-dimension sets sort by integer code —
/// the canonical order used everywhere determinism matters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    d: Dimension,
    bits: u32,
}

impl Vertex {
    pub fn new(d: Dimension, bits: u32) -> Result<Self, Error> {
        d.vertex(bits)
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    /// Integer code of the bit vector.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Hamming weight; the index of the layer containing this vertex.
    pub fn layer(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Value of coordinate `r` (1-based).
    pub fn coordinate(&self, r: usize) -> Result<bool, Error> {
        check_coordinate(self.d, r)?;
        Ok(self.bits >> (r - 1) & 1 == 1)
    }

    /// Whether `self ⪯ other` in the subset order.  Panics on dimension
    /// mismatch; use [`precedes`] for checked comparison.
    pub fn leq(&self, other: &Vertex) -> bool {
        assert_eq!(self.d, other.d, "comparing vertices of different cubes");
        self.bits & other.bits == self.bits
    }

    /// Whether `self ≺ other` strictly.
    pub fn lt(&self, other: &Vertex) -> bool {
        self.leq(other) && self.bits != other.bits
    }

    /// The vertex with coordinate `r` flipped.
    pub fn project(&self, r: usize) -> Result<Vertex, Error> {
        check_coordinate(self.d, r)?;
        Ok(Vertex { d: self.d, bits: self.bits ^ (1 << (r - 1)) })
    }

    /// Upward neighbors as `(coordinate, vertex)`, ascending by coordinate.
    pub fn up_neighbors(self) -> impl Iterator<Item = (usize, Vertex)> {
        let v = self;
        (1..=v.d.get()).filter_map(move |r| {
            let bit = 1u32 << (r - 1);
            if v.bits & bit == 0 {
                Some((r, Vertex { d: v.d, bits: v.bits | bit }))
            } else {
                None
            }
        })
    }

    /// Downward neighbors as `(coordinate, vertex)`, ascending by coordinate.
    pub fn down_neighbors(self) -> impl Iterator<Item = (usize, Vertex)> {
        let v = self;
        (1..=v.d.get()).filter_map(move |r| {
            let bit = 1u32 << (r - 1);
            if v.bits & bit != 0 {
                Some((r, Vertex { d: v.d, bits: v.bits & !bit }))
            } else {
                None
            }
        })
    }
}

fn check_coordinate(d: Dimension, r: usize) -> Result<(), Error> {
    if (1..=d.get()).contains(&r) {
        Ok(())
    } else {
        Err(Error::CoordinateRange { d: d.get(), coordinate: r })
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.d.get() {
            write!(f, "{}", self.bits >> r & 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({self})")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses a bitstring `x_1 x_2 … x_d`; the dimension is the length.
    fn from_str(s: &str) -> Result<Self, Error> {
        let d = Dimension::new(s.len())
            .map_err(|_| Error::Parse(format!("vertex bitstring of unsupported length: {s:?}")))?;
        let mut bits = 0u32;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(Error::Parse(format!("invalid bitstring {s:?}"))),
            }
        }
        Ok(Vertex { d, bits })
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A directed edge of the hypercube, oriented upward.
///
/// Stored as the lower endpoint plus the distinguishing coordinate; the
/// upper endpoint has that coordinate set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    lo: Vertex,
    dim: u8,
}

impl Edge {
    /// Edge from `lo` upward along coordinate `dim` (1-based).
    pub fn new(lo: Vertex, dim: usize) -> Result<Self, Error> {
        check_coordinate(lo.d, dim)?;
        if lo.bits & (1 << (dim - 1)) != 0 {
            return Err(Error::NotAnEdge { lo, hi: lo });
        }
        Ok(Edge { lo, dim: dim as u8 })
    }

    /// Edge between two vertices that differ in exactly one raised coordinate.
    pub fn between(lo: Vertex, hi: Vertex) -> Result<Self, Error> {
        if lo.d != hi.d {
            return Err(Error::DimensionMismatch { left: lo.d.get(), right: hi.d.get() });
        }
        let diff = lo.bits ^ hi.bits;
        if diff.count_ones() != 1 || hi.bits & diff == 0 {
            return Err(Error::NotAnEdge { lo, hi });
        }
        Ok(Edge { lo, dim: (diff.trailing_zeros() + 1) as u8 })
    }

    pub fn lo(&self) -> Vertex {
        self.lo
    }

    pub fn hi(&self) -> Vertex {
        Vertex { d: self.lo.d, bits: self.lo.bits | 1 << (self.dim - 1) }
    }

    /// The coordinate (1-based) raised along this edge.
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn dimension(&self) -> Dimension {
        self.lo.d
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lo(), self.hi())
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Edge({} -> {})", self.lo(), self.hi())
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(2))?;
        seq.serialize_element(&self.lo())?;
        seq.serialize_element(&self.hi())?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EdgeVisitor;

        impl<'de> Visitor<'de> for EdgeVisitor {
            type Value = Edge;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a two-element [lo, hi] bitstring array")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Edge, A::Error> {
                let lo: Vertex = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let hi: Vertex = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<serde::de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Edge::between(lo, hi).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(EdgeVisitor)
    }
}

/// All vertices of layer `i` (Hamming weight `i`), ascending by code.
pub fn layer(d: Dimension, i: usize) -> Result<Vec<Vertex>, Error> {
    if i > d.get() {
        return Err(Error::LayerRange { d: d.get(), layer: i });
    }
    if i == 0 {
        return Ok(vec![d.bottom()]);
    }
    // Enumerate weight-i codes with Gosper's hack.
    let mut out = Vec::new();
    let limit = d.full_mask();
    let mut v: u32 = (1 << i) - 1;
    while v <= limit {
        out.push(Vertex { d, bits: v });
        let c = v & v.wrapping_neg();
        let r = v + c;
        if r > limit || c == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
    }
    Ok(out)
}

/// Checked subset-order comparison `x ⪯ y`.
pub fn precedes(x: &Vertex, y: &Vertex) -> Result<bool, Error> {
    if x.d != y.d {
        return Err(Error::DimensionMismatch { left: x.d.get(), right: y.d.get() });
    }
    Ok(x.bits & y.bits == x.bits)
}

/// Checked strict comparison `x ≺ y`.
pub fn precedes_strict(x: &Vertex, y: &Vertex) -> Result<bool, Error> {
    Ok(precedes(x, y)? && x.bits != y.bits)
}

/// Checked coordinate projection `Π_r(x)`: flips coordinate `r`.
pub fn project(x: &Vertex, r: usize) -> Result<Vertex, Error> {
    x.project(r)
}

/// Membership bitmap over all `2^d` vertex codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct CodeSet {
    words: Vec<u64>,
}

impl CodeSet {
    pub fn new(d: Dimension) -> Self {
        CodeSet { words: vec![0; d.vertex_count().div_ceil(64)] }
    }

    pub fn insert(&mut self, bits: u32) {
        self.words[(bits >> 6) as usize] |= 1u64 << (bits & 63);
    }

    pub fn contains(&self, bits: u32) -> bool {
        self.words[(bits >> 6) as usize] >> (bits & 63) & 1 == 1
    }
}

/// The subgraph spanned between two vertex sets.
///
/// Contains every vertex `v` with `s ⪯ v ⪯ t` for some `s ∈ S`, `t ∈ T`,
/// and every hypercube edge with both endpoints inside that set.  The empty
/// graph (no comparable pair) is a valid value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverGraph {
    d: Dimension,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    members: CodeSet,
    src_layer: usize,
    dst_layer: usize,
}

impl CoverGraph {
    pub fn d(&self) -> Dimension {
        self.d
    }

    /// Vertices in code order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges ascending by `(lo, dim)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.d == self.d && self.members.contains(v.bits)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.contains(&e.lo()) && self.contains(&e.hi())
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Lowest layer with a vertex (0 for the empty graph).
    pub fn src_layer(&self) -> usize {
        self.src_layer
    }

    /// Highest layer with a vertex (0 for the empty graph).
    pub fn dst_layer(&self) -> usize {
        self.dst_layer
    }

    /// Members of layer `i`, ascending by code.
    pub fn layer_vertices(&self, i: usize) -> Vec<Vertex> {
        self.vertices.iter().copied().filter(|v| v.layer() == i).collect()
    }

    /// Out-neighbors inside the graph, ascending by coordinate.
    pub fn out_neighbors<'a>(&'a self, v: &Vertex) -> impl Iterator<Item = Vertex> + 'a {
        debug_assert!(self.contains(v));
        let v = *v;
        v.up_neighbors().map(|(_, w)| w).filter(move |w| self.contains(w))
    }

    /// The full `d`-cube, as the cover graph of bottom and top.
    pub fn full(d: Dimension) -> CoverGraph {
        cover_graph(&[d.bottom()], &[d.top()]).expect("bottom/top always comparable")
    }

    pub(crate) fn empty(d: Dimension) -> CoverGraph {
        CoverGraph {
            d,
            vertices: Vec::new(),
            edges: Vec::new(),
            members: CodeSet::new(d),
            src_layer: 0,
            dst_layer: 0,
        }
    }

    pub(crate) fn from_member_set(d: Dimension, members: CodeSet) -> CoverGraph {
        let mut vertices = Vec::new();
        for bits in 0..=d.full_mask() {
            if members.contains(bits) {
                vertices.push(Vertex { d, bits });
            }
        }
        let mut edges = Vec::new();
        for v in &vertices {
            for (r, w) in v.up_neighbors() {
                if members.contains(w.bits) {
                    edges.push(Edge { lo: *v, dim: r as u8 });
                }
            }
        }
        let src_layer = vertices.iter().map(Vertex::layer).min().unwrap_or(0);
        let dst_layer = vertices.iter().map(Vertex::layer).max().unwrap_or(0);
        CoverGraph { d, vertices, edges, members, src_layer, dst_layer }
    }
}

/// Builds the cover graph of `sources` and `sinks`.
///
/// Both sets must be nonempty and live in one cube; the result may still be
/// empty when no source precedes any sink.
pub fn cover_graph(sources: &[Vertex], sinks: &[Vertex]) -> Result<CoverGraph, Error> {
    let d = common_dimension(sources.iter().chain(sinks))?;
    if sources.is_empty() {
        return Err(Error::EmptySet("source set"));
    }
    if sinks.is_empty() {
        return Err(Error::EmptySet("sink set"));
    }

    let n = d.vertex_count();
    // above[v]: some source precedes v; below[v]: v precedes some sink.
    let mut above = vec![false; n];
    let mut below = vec![false; n];
    for s in sources {
        above[s.bits as usize] = true;
    }
    for t in sinks {
        below[t.bits as usize] = true;
    }
    for code in 0..n {
        if !above[code] {
            let mut m = code as u32;
            while m != 0 {
                let bit = m & m.wrapping_neg();
                if above[(code as u32 & !bit) as usize] {
                    above[code] = true;
                    break;
                }
                m &= m - 1;
            }
        }
    }
    for code in (0..n).rev() {
        if !below[code] {
            let free = !(code as u32) & d.full_mask();
            let mut m = free;
            while m != 0 {
                let bit = m & m.wrapping_neg();
                if below[(code as u32 | bit) as usize] {
                    below[code] = true;
                    break;
                }
                m &= m - 1;
            }
        }
    }

    let mut members = CodeSet::new(d);
    for code in 0..n {
        if above[code] && below[code] {
            members.insert(code as u32);
        }
    }
    Ok(CoverGraph::from_member_set(d, members))
}

/// Common dimension of a family of vertices, or the mismatch error.
pub(crate) fn common_dimension<'a, I>(mut vs: I) -> Result<Dimension, Error>
where
    I: Iterator<Item = &'a Vertex>,
{
    let first = vs.next().ok_or(Error::EmptySet("vertex set"))?;
    for v in vs {
        if v.d != first.d {
            return Err(Error::DimensionMismatch { left: first.d.get(), right: v.d.get() });
        }
    }
    Ok(first.d)
}

/// Parses a whitespace/comma-separated list of vertex bitstrings.
pub fn parse_vertex_list(s: &str) -> Result<Vec<Vertex>, Error> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|tok| !tok.is_empty())
        .map(str::parse)
        .collect()
}
