//! Integral max-flow/min-cut on hypercube subgraphs with simultaneous
//! vertex and edge capacities.
//!
//! Problems route from a source set to a sink set through implicit
//! infinite-capacity supernodes.  Vertex capacities are realized by node
//! splitting; the solver is a blocking-flow method on the split network.
//! Both sides of the duality are produced: an integral flow with a
//! deterministic path decomposition, and a cut certificate read off the
//! final residual graph.  Complementary slackness between the two can be
//! verified exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::hypercube::{common_dimension, CoverGraph, Edge, Vertex};
use crate::Error;

/// Arc capacities below this bound are exact; this sentinel stands for ∞
/// inside the solver.
pub(crate) const INF: u64 = u64::MAX / 4;

/// A nonnegative integer capacity or ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    pub fn is_finite(&self) -> bool {
        matches!(self, Capacity::Finite(_))
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            Capacity::Finite(c) => Some(*c),
            Capacity::Infinite => None,
        }
    }

    fn checked_add(self, other: Capacity) -> Capacity {
        match (self, other) {
            (Capacity::Finite(a), Capacity::Finite(b)) => Capacity::Finite(a + b),
            _ => Capacity::Infinite,
        }
    }
}

impl From<u64> for Capacity {
    fn from(c: u64) -> Capacity {
        Capacity::Finite(c)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(c) => serializer.serialize_u64(*c),
            Capacity::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CapVisitor;
        impl Visitor<'_> for CapVisitor {
            type Value = Capacity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, c: u64) -> Result<Capacity, E> {
                Ok(Capacity::Finite(c))
            }

            fn visit_i64<E: de::Error>(self, c: i64) -> Result<Capacity, E> {
                u64::try_from(c).map(Capacity::Finite).map_err(|_| {
                    E::custom(format!("capacity must be nonnegative, got {c}"))
                })
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Capacity, E> {
                if s == "inf" {
                    Ok(Capacity::Infinite)
                } else {
                    Err(E::custom(format!("expected \"inf\", got {s:?}")))
                }
            }
        }
        deserializer.deserialize_any(CapVisitor)
    }
}

/// A capacity assignment: one default plus per-key overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapMap<K: Ord> {
    default: Capacity,
    overrides: BTreeMap<K, Capacity>,
}

impl<K: Ord> CapMap<K> {
    pub fn uniform(default: Capacity) -> Self {
        CapMap { default, overrides: BTreeMap::new() }
    }

    pub fn set(&mut self, key: K, cap: Capacity) {
        self.overrides.insert(key, cap);
    }

    pub fn with(mut self, key: K, cap: Capacity) -> Self {
        self.set(key, cap);
        self
    }

    pub fn get(&self, key: &K) -> Capacity {
        self.overrides.get(key).copied().unwrap_or(self.default)
    }

    pub fn default_cap(&self) -> Capacity {
        self.default
    }
}

/// A capacitated routing instance on a hypercube subgraph.
///
/// Supernodes Ⓢ and Ⓣ are implicit: Ⓢ feeds every source and every sink
/// feeds Ⓣ through infinite-capacity arcs.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    graph: CoverGraph,
    sources: Vec<Vertex>,
    sinks: Vec<Vertex>,
    vcap: CapMap<Vertex>,
    ecap: CapMap<Edge>,
}

impl FlowProblem {
    pub fn new(
        graph: CoverGraph,
        sources: &[Vertex],
        sinks: &[Vertex],
        vcap: CapMap<Vertex>,
        ecap: CapMap<Edge>,
    ) -> Result<Self, Error> {
        if sources.is_empty() {
            return Err(Error::EmptySet("sources"));
        }
        if sinks.is_empty() {
            return Err(Error::EmptySet("sinks"));
        }
        let d = common_dimension(sources.iter().chain(sinks.iter()))?;
        if d != graph.d() {
            return Err(Error::DimensionMismatch { left: graph.d().get(), right: d.get() });
        }
        let mut sources = sources.to_vec();
        sources.sort_unstable();
        sources.dedup();
        let mut sinks = sinks.to_vec();
        sinks.sort_unstable();
        sinks.dedup();
        for v in sources.iter().chain(sinks.iter()) {
            if !graph.contains(v) {
                return Err(Error::TerminalOutsideGraph { vertex: *v });
            }
        }
        for s in &sources {
            if sinks.binary_search(s).is_ok() {
                return Err(Error::TerminalOverlap { vertex: *s });
            }
        }
        let too_large = |c: Capacity| matches!(c, Capacity::Finite(x) if x >= INF);
        let vcap_values = graph.vertices().iter().map(|v| vcap.get(v));
        let ecap_values = graph.edges().iter().map(|e| ecap.get(e));
        if vcap_values.chain(ecap_values).any(too_large) {
            return Err(Error::Config(format!("finite capacities must be below {INF}")));
        }
        Ok(FlowProblem { graph, sources, sinks, vcap, ecap })
    }

    pub fn on_full_cube(
        d: crate::hypercube::Dimension,
        sources: &[Vertex],
        sinks: &[Vertex],
        vcap: CapMap<Vertex>,
        ecap: CapMap<Edge>,
    ) -> Result<Self, Error> {
        FlowProblem::new(CoverGraph::full(d), sources, sinks, vcap, ecap)
    }

    pub fn graph(&self) -> &CoverGraph {
        &self.graph
    }

    /// Sources, ascending.
    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    /// Sinks, ascending.
    pub fn sinks(&self) -> &[Vertex] {
        &self.sinks
    }

    pub fn vcap(&self) -> &CapMap<Vertex> {
        &self.vcap
    }

    pub fn ecap(&self) -> &CapMap<Edge> {
        &self.ecap
    }
}

/// An integral flow with its canonical path decomposition.
///
/// Every path is a monotone source-to-sink vertex sequence carrying one
/// unit; the flow value equals the number of paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    value: u64,
    arc_flow: BTreeMap<Edge, u64>,
    paths: Vec<Vec<Vertex>>,
}

impl FlowSolution {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Unit paths in peel order: by starting source, then lexicographically
    /// smallest continuation.
    pub fn paths(&self) -> &[Vec<Vertex>] {
        &self.paths
    }

    /// Positive per-edge flows.
    pub fn arc_flow(&self) -> &BTreeMap<Edge, u64> {
        &self.arc_flow
    }

    pub fn flow_on(&self, e: &Edge) -> u64 {
        self.arc_flow.get(e).copied().unwrap_or(0)
    }

    /// Rebuilds a solution from unit paths, revalidating monotonicity.
    pub fn from_paths(paths: Vec<Vec<Vertex>>) -> Result<Self, Error> {
        let mut arc_flow: BTreeMap<Edge, u64> = BTreeMap::new();
        for path in &paths {
            if path.len() < 2 {
                return Err(Error::Parse(format!(
                    "path must have at least two vertices, got {}",
                    path.len()
                )));
            }
            for w in path.windows(2) {
                let e = Edge::between(w[0], w[1])?;
                *arc_flow.entry(e).or_insert(0) += 1;
            }
        }
        Ok(FlowSolution { value: paths.len() as u64, arc_flow, paths })
    }

    /// Number of paths through each vertex.
    pub fn throughput(&self) -> BTreeMap<Vertex, u64> {
        let mut t = BTreeMap::new();
        for path in &self.paths {
            for v in path {
                *t.entry(*v).or_insert(0) += 1;
            }
        }
        t
    }
}

impl Serialize for FlowSolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FlowSolution", 2)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("paths", &self.paths)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FlowSolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            value: u64,
            paths: Vec<Vec<Vertex>>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let solution = FlowSolution::from_paths(wire.paths).map_err(de::Error::custom)?;
        if solution.value != wire.value {
            return Err(de::Error::custom(format!(
                "value {} does not match {} paths",
                wire.value,
                solution.paths.len()
            )));
        }
        Ok(solution)
    }
}

/// A dual certificate: a vertex set and an edge set that together meet
/// every source-to-sink path.
///
/// Certificates produced by [`min_cut`] are genuine minimum cuts; hand
/// crafted values are validated by the operations that consume them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutCertificate {
    c: Vec<Vertex>,
    f: Vec<Edge>,
    value: Capacity,
}

impl CutCertificate {
    /// Builds a certificate from raw parts, pricing it under the problem's
    /// capacities.  Validity as a cut is not checked here.
    pub fn new(p: &FlowProblem, c: &[Vertex], f: &[Edge]) -> Result<Self, Error> {
        let mut c = c.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut f = f.to_vec();
        f.sort_unstable();
        f.dedup();
        for v in &c {
            if !p.graph.contains(v) {
                return Err(Error::ContextMismatch(format!("cut vertex {v} is not in the graph")));
            }
        }
        for e in &f {
            if !p.graph.contains_edge(e) {
                return Err(Error::ContextMismatch(format!("cut edge {e} is not in the graph")));
            }
        }
        let mut value = Capacity::Finite(0);
        for v in &c {
            value = value.checked_add(p.vcap.get(v));
        }
        for e in &f {
            value = value.checked_add(p.ecap.get(e));
        }
        Ok(CutCertificate { c, f, value })
    }

    /// Cut vertices, ascending.
    pub fn vertices(&self) -> &[Vertex] {
        &self.c
    }

    /// Cut edges, ascending.
    pub fn edges(&self) -> &[Edge] {
        &self.f
    }

    pub fn value(&self) -> Capacity {
        self.value
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty() && self.f.is_empty()
    }
}

impl Serialize for CutCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CutCertificate", 3)?;
        st.serialize_field("C", &self.c)?;
        st.serialize_field("F", &self.f)?;
        st.serialize_field("value", &self.value)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CutCertificate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            #[serde(rename = "C")]
            c: Vec<Vertex>,
            #[serde(rename = "F")]
            f: Vec<Edge>,
            value: Capacity,
        }
        let mut wire = Wire::deserialize(deserializer)?;
        wire.c.sort_unstable();
        wire.c.dedup();
        wire.f.sort_unstable();
        wire.f.dedup();
        Ok(CutCertificate { c: wire.c, f: wire.f, value: wire.value })
    }
}

/// The three-way vertex partition induced by a valid cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPartition {
    s_side: Vec<Vertex>,
    cut: Vec<Vertex>,
    t_side: Vec<Vertex>,
}

impl CutPartition {
    pub(crate) fn from_parts(s_side: Vec<Vertex>, cut: Vec<Vertex>, t_side: Vec<Vertex>) -> Self {
        CutPartition { s_side, cut, t_side }
    }

    /// Vertices reachable from the sources by a cut-free path, ascending.
    pub fn s_side(&self) -> &[Vertex] {
        &self.s_side
    }

    /// Cut vertices plus any residue reachable from neither side, ascending.
    pub fn cut(&self) -> &[Vertex] {
        &self.cut
    }

    /// Vertices that reach the sinks by a cut-free path, ascending.
    pub fn t_side(&self) -> &[Vertex] {
        &self.t_side
    }
}

/// Counts from a successful complementary-slackness verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlacknessReport {
    pub paths: usize,
    pub cut_vertices: usize,
    pub cut_edges: usize,
    /// True when the certificate cuts vertices only (the single-collection
    /// routing regime).
    pub vertex_only: bool,
}

/// A bare blocking-flow solver over paired residual arcs, shared by the
/// cube networks here and the bounded-flow reductions elsewhere.
pub(crate) struct DinicCore {
    arcs: Vec<NetArc>,
    adj: Vec<Vec<usize>>,
}

struct NetArc {
    to: usize,
    /// Residual capacity; the paired reverse arc holds the pushed flow.
    cap: u64,
}

impl DinicCore {
    pub(crate) fn new(nodes: usize) -> Self {
        DinicCore { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds a forward arc and its zero-capacity reverse; returns the
    /// forward index (reverse is `index ^ 1`).
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let idx = self.arcs.len();
        self.arcs.push(NetArc { to, cap });
        self.arcs.push(NetArc { to: from, cap: 0 });
        self.adj[from].push(idx);
        self.adj[to].push(idx + 1);
        idx
    }

    pub(crate) fn head(&self, arc: usize) -> usize {
        self.arcs[arc].to
    }

    pub(crate) fn residual(&self, arc: usize) -> u64 {
        self.arcs[arc].cap
    }

    pub(crate) fn flow_on(&self, arc: usize) -> u64 {
        self.arcs[arc ^ 1].cap
    }

    pub(crate) fn out_arcs(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    /// Dinic's blocking-flow loop; returns the flow value pushed from
    /// `s` to `t` (on top of any flow already present).
    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.adj.len();
        let mut total = 0u64;
        let mut level = vec![usize::MAX; n];
        loop {
            level.fill(usize::MAX);
            level[s] = 0;
            let mut queue = VecDeque::new();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let w = self.arcs[a].to;
                    if self.arcs[a].cap > 0 && level[w] == usize::MAX {
                        level[w] = level[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.dfs(s, t, INF, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, limit: u64, level: &[usize], iter: &mut [usize]) -> u64 {
        if u == t {
            return limit;
        }
        while iter[u] < self.adj[u].len() {
            let a = self.adj[u][iter[u]];
            let w = self.arcs[a].to;
            if self.arcs[a].cap > 0 && level[w] == level[u] + 1 {
                let pushed = self.dfs(w, t, limit.min(self.arcs[a].cap), level, iter);
                if pushed > 0 {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                    return pushed;
                }
            }
            iter[u] += 1;
        }
        0
    }

    /// Nodes reachable from `s` through positive residual capacity.
    pub(crate) fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let w = self.arcs[a].to;
                if self.arcs[a].cap > 0 && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// The split network: one node per infinite-capacity vertex, an in/out
/// node pair per finite-capacity vertex, plus the two supernodes.
struct Network {
    core: DinicCore,
    node_in: Vec<usize>,
    node_out: Vec<usize>,
    s_node: usize,
    t_node: usize,
    /// Vertex index owning each node, or usize::MAX for supernodes.
    node_vertex: Vec<usize>,
    /// Arc index carrying each graph edge, parallel to `graph.edges()`.
    edge_arcs: Vec<usize>,
    source_arcs: Vec<usize>,
    sink_arcs: Vec<usize>,
}

impl Network {
    fn build(p: &FlowProblem) -> Network {
        let verts = p.graph.vertices();
        let index_of: BTreeMap<Vertex, usize> =
            verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut node_in = vec![0usize; verts.len()];
        let mut node_out = vec![0usize; verts.len()];
        let mut node_vertex = Vec::new();
        for (i, v) in verts.iter().enumerate() {
            node_in[i] = node_vertex.len();
            node_vertex.push(i);
            if p.vcap.get(v).is_finite() {
                node_vertex.push(i);
            }
            node_out[i] = node_vertex.len() - 1;
        }
        let s_node = node_vertex.len();
        let t_node = s_node + 1;
        node_vertex.push(usize::MAX);
        node_vertex.push(usize::MAX);

        let mut net = Network {
            core: DinicCore::new(node_vertex.len()),
            node_in,
            node_out,
            s_node,
            t_node,
            node_vertex,
            edge_arcs: Vec::new(),
            source_arcs: Vec::new(),
            sink_arcs: Vec::new(),
        };
        for (i, v) in verts.iter().enumerate() {
            if let Capacity::Finite(c) = p.vcap.get(v) {
                net.core.add_arc(net.node_in[i], net.node_out[i], c);
            }
        }
        for s in &p.sources {
            let a = net.core.add_arc(net.s_node, net.node_in[index_of[s]], INF);
            net.source_arcs.push(a);
        }
        for t in &p.sinks {
            let a = net.core.add_arc(net.node_out[index_of[t]], net.t_node, INF);
            net.sink_arcs.push(a);
        }
        for e in p.graph.edges() {
            let cap = match p.ecap.get(e) {
                Capacity::Finite(c) => c,
                Capacity::Infinite => INF,
            };
            let a =
                net.core.add_arc(net.node_out[index_of[&e.lo()]], net.node_in[index_of[&e.hi()]], cap);
            net.edge_arcs.push(a);
        }
        net
    }

    /// A source-to-sink path using only ∞-capacity arcs, as graph vertices,
    /// if one exists.  Such a path makes the maximum flow unbounded.
    fn infinite_path(&self, p: &FlowProblem) -> Option<Vec<Vertex>> {
        let n = self.node_vertex.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[self.s_node] = true;
        queue.push_back(self.s_node);
        while let Some(u) = queue.pop_front() {
            for &a in self.core.out_arcs(u) {
                if a % 2 == 1 || self.core.residual(a) != INF {
                    continue;
                }
                let w = self.core.head(a);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        if !seen[self.t_node] {
            return None;
        }
        let mut nodes = vec![self.t_node];
        while let Some(u) = parent[*nodes.last().unwrap()] {
            nodes.push(u);
        }
        nodes.reverse();
        let mut path = Vec::new();
        for n in nodes {
            let vi = self.node_vertex[n];
            if vi != usize::MAX {
                let v = p.graph.vertices()[vi];
                if path.last() != Some(&v) {
                    path.push(v);
                }
            }
        }
        Some(path)
    }
}

/// Peels the network flow into unit source-to-sink paths: repeatedly start
/// at the smallest source with flow left and follow the smallest-head
/// out-edge with flow left, leaving through Ⓣ when none remains.
fn decompose(p: &FlowProblem, net: &Network, value: u64) -> Vec<Vec<Vertex>> {
    let verts = p.graph.vertices();
    let index_of: BTreeMap<Vertex, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut source_rem: Vec<u64> =
        net.source_arcs.iter().map(|&a| net.core.flow_on(a)).collect();
    let mut sink_rem: BTreeMap<usize, u64> = p
        .sinks
        .iter()
        .zip(&net.sink_arcs)
        .map(|(t, &a)| (index_of[t], net.core.flow_on(a)))
        .collect();
    // Outgoing edge flows per vertex, heads ascending by code.
    let mut out_rem: Vec<Vec<(usize, u64)>> = vec![Vec::new(); verts.len()];
    for (e, &a) in p.graph.edges().iter().zip(&net.edge_arcs) {
        let f = net.core.flow_on(a);
        if f > 0 {
            out_rem[index_of[&e.lo()]].push((index_of[&e.hi()], f));
        }
    }
    for list in &mut out_rem {
        list.sort_unstable();
    }

    let mut paths = Vec::with_capacity(value as usize);
    let mut next_source = 0usize;
    for _ in 0..value {
        while source_rem[next_source] == 0 {
            next_source += 1;
        }
        source_rem[next_source] -= 1;
        let mut vi = index_of[&p.sources[next_source]];
        let mut path = vec![verts[vi]];
        loop {
            match out_rem[vi].iter_mut().find(|(_, f)| *f > 0) {
                Some((head, f)) => {
                    *f -= 1;
                    vi = *head;
                    path.push(verts[vi]);
                }
                None => {
                    let rem = sink_rem
                        .get_mut(&vi)
                        .expect("flow conservation: stuck vertex must be a sink");
                    assert!(*rem > 0, "flow conservation: sink arc exhausted");
                    *rem -= 1;
                    break;
                }
            }
        }
        paths.push(path);
    }
    paths
}

/// Solves the problem on both sides: an integral maximum flow with its
/// path decomposition, and a minimum cut of equal value read off the final
/// residual graph (the source-side minimal cut).
///
/// Errors with [`Error::UnboundedFlow`] when a source-to-sink path of
/// ∞-capacity elements makes the value unbounded.
pub fn max_flow_min_cut(p: &FlowProblem) -> Result<(FlowSolution, CutCertificate), Error> {
    let mut net = Network::build(p);
    if let Some(path) = net.infinite_path(p) {
        return Err(Error::UnboundedFlow { path });
    }
    let value = net.core.max_flow(net.s_node, net.t_node);

    let mut arc_flow = BTreeMap::new();
    for (e, &a) in p.graph.edges().iter().zip(&net.edge_arcs) {
        let f = net.core.flow_on(a);
        if f > 0 {
            arc_flow.insert(*e, f);
        }
    }
    let paths = decompose(p, &net, value);
    let solution = FlowSolution { value, arc_flow, paths };

    let reach = net.core.reachable(net.s_node);
    let verts = p.graph.vertices();
    let mut c = Vec::new();
    let mut cut_value = 0u64;
    for (i, v) in verts.iter().enumerate() {
        if net.node_in[i] != net.node_out[i] && reach[net.node_in[i]] && !reach[net.node_out[i]] {
            c.push(*v);
            cut_value += p.vcap.get(v).as_finite().expect("split vertices have finite capacity");
        }
    }
    let index_of: BTreeMap<Vertex, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut f = Vec::new();
    for e in p.graph.edges() {
        let lo = index_of[&e.lo()];
        let hi = index_of[&e.hi()];
        if reach[net.node_out[lo]] && !reach[net.node_in[hi]] {
            let cap = p.ecap.get(e).as_finite().unwrap_or(INF);
            f.push(*e);
            cut_value += cap;
        }
    }
    assert_eq!(cut_value, value, "strong duality: residual cut must equal the flow value");
    let cut = CutCertificate { c, f, value: Capacity::Finite(value) };
    Ok((solution, cut))
}

/// Integral maximum flow with a deterministic path decomposition.
pub fn max_flow(p: &FlowProblem) -> Result<FlowSolution, Error> {
    max_flow_min_cut(p).map(|(f, _)| f)
}

/// Minimum cut certificate of value equal to the maximum flow.
pub fn min_cut(p: &FlowProblem) -> Result<CutCertificate, Error> {
    max_flow_min_cut(p).map(|(_, c)| c)
}

/// A cut-free source-to-sink path, if the given sets fail to cut the
/// problem.  `Ok(())` means (C, F) meets every source-to-sink path.
fn cut_violation(p: &FlowProblem, c: &[Vertex], f: &[Edge]) -> Result<(), Vec<Vertex>> {
    let verts = p.graph.vertices();
    let index_of: BTreeMap<Vertex, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let in_c = |v: &Vertex| c.binary_search(v).is_ok();
    let in_f = |e: &Edge| f.binary_search(e).is_ok();
    let mut parent: Vec<Option<usize>> = vec![None; verts.len()];
    let mut seen = vec![false; verts.len()];
    let mut queue = VecDeque::new();
    for s in &p.sources {
        if !in_c(s) {
            let i = index_of[s];
            seen[i] = true;
            queue.push_back(i);
        }
    }
    let is_sink = |i: usize| p.sinks.binary_search(&verts[i]).is_ok();
    let mut hit = None;
    while let Some(u) = queue.pop_front() {
        if is_sink(u) {
            hit = Some(u);
            break;
        }
        for w in p.graph.out_neighbors(&verts[u]) {
            let wi = index_of[&w];
            if seen[wi] || in_c(&w) {
                continue;
            }
            let e = Edge::between(verts[u], w).expect("cover edges are cube edges");
            if in_f(&e) {
                continue;
            }
            seen[wi] = true;
            parent[wi] = Some(u);
            queue.push_back(wi);
        }
    }
    match hit {
        None => Ok(()),
        Some(mut i) => {
            let mut path = vec![verts[i]];
            while let Some(u) = parent[i] {
                path.push(verts[u]);
                i = u;
            }
            path.reverse();
            Err(path)
        }
    }
}

/// Rewrites a valid cut so that no vertex meets two or more cut edges:
/// any such vertex absorbs its edges into the vertex side of the cut.
///
/// Validity is preserved (every path through a removed edge passes the
/// promoted vertex).  Under the two-unit-vertex/unit-edge capacity regime
/// the value never increases.
pub fn normalize_cut(p: &FlowProblem, cut: &CutCertificate) -> Result<CutCertificate, Error> {
    if let Err(path) = cut_violation(p, &cut.c, &cut.f) {
        return Err(Error::InvalidCut { path });
    }
    let mut c: BTreeSet<Vertex> = cut.c.iter().copied().collect();
    let mut f: Vec<Edge> = cut.f.clone();
    loop {
        let mut degree: BTreeMap<Vertex, usize> = BTreeMap::new();
        for e in &f {
            *degree.entry(e.lo()).or_insert(0) += 1;
            *degree.entry(e.hi()).or_insert(0) += 1;
        }
        match degree.into_iter().find(|(_, k)| *k >= 2) {
            Some((v, _)) => {
                f.retain(|e| e.lo() != v && e.hi() != v);
                c.insert(v);
            }
            None => break,
        }
    }
    let c: Vec<Vertex> = c.into_iter().collect();
    let out = CutCertificate::new(p, &c, &f)?;
    debug_assert!(cut_violation(p, &out.c, &out.f).is_ok());
    Ok(out)
}

/// Splits the graph's vertices into the cut-free-reachable side 𝒮, the
/// cut (plus any residue reachable from neither terminal), and the
/// cut-free-co-reachable side 𝒯.
///
/// Errors with [`Error::InvalidCut`] and a witness path when some
/// source-to-sink path avoids the cut.
pub fn partition_by_cut(p: &FlowProblem, cut: &CutCertificate) -> Result<CutPartition, Error> {
    if let Err(path) = cut_violation(p, &cut.c, &cut.f) {
        return Err(Error::InvalidCut { path });
    }
    let (s_side, t_side) = cut_sides(p, cut);
    let in_any = |v: &Vertex| {
        s_side.binary_search(v).is_ok() || t_side.binary_search(v).is_ok()
    };
    let mut cut_set: BTreeSet<Vertex> = cut.c.iter().copied().collect();
    for v in p.graph.vertices() {
        if !in_any(v) {
            cut_set.insert(*v);
        }
    }
    debug_assert!(s_side.iter().all(|v| {
        p.graph.out_neighbors(v).all(|w| {
            t_side.binary_search(&w).is_err()
                || cut.f.binary_search(&Edge::between(*v, w).unwrap()).is_ok()
        })
    }));
    Ok(CutPartition { s_side, cut: cut_set.into_iter().collect(), t_side })
}

/// Forward and backward cut-free closures, ascending.  Tolerates invalid
/// cuts (the sides then overlap), which the gateway diagnostics rely on.
pub(crate) fn cut_sides(p: &FlowProblem, cut: &CutCertificate) -> (Vec<Vertex>, Vec<Vertex>) {
    let verts = p.graph.vertices();
    let index_of: BTreeMap<Vertex, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let in_c = |v: &Vertex| cut.c.binary_search(v).is_ok();
    let in_f = |e: &Edge| cut.f.binary_search(e).is_ok();

    let mut fwd = vec![false; verts.len()];
    let mut queue = VecDeque::new();
    for s in &p.sources {
        if !in_c(s) {
            fwd[index_of[s]] = true;
            queue.push_back(index_of[s]);
        }
    }
    while let Some(u) = queue.pop_front() {
        for w in p.graph.out_neighbors(&verts[u]) {
            let wi = index_of[&w];
            if fwd[wi] || in_c(&w) {
                continue;
            }
            if in_f(&Edge::between(verts[u], w).unwrap()) {
                continue;
            }
            fwd[wi] = true;
            queue.push_back(wi);
        }
    }

    let mut in_neighbors: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for e in p.graph.edges() {
        if !in_f(e) {
            in_neighbors[index_of[&e.hi()]].push(index_of[&e.lo()]);
        }
    }
    let mut bwd = vec![false; verts.len()];
    for t in &p.sinks {
        if !in_c(t) {
            bwd[index_of[t]] = true;
            queue.push_back(index_of[t]);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &wi in &in_neighbors[u] {
            if bwd[wi] || in_c(&verts[wi]) {
                continue;
            }
            bwd[wi] = true;
            queue.push_back(wi);
        }
    }

    let collect = |mask: &[bool]| {
        verts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask[*i])
            .map(|(_, v)| *v)
            .collect::<Vec<_>>()
    };
    (collect(&fwd), collect(&bwd))
}

/// Verifies the optimality coupling between a flow and a cut of equal
/// value: every path meets exactly one cut element, every cut vertex lies
/// on exactly its capacity in paths, and every cut edge carries exactly
/// its capacity in paths.
///
/// Errors with [`Error::NotOptimalPair`] when the values differ and
/// [`Error::Slackness`] naming the first violated condition otherwise.
pub fn verify_complementary_slackness(
    p: &FlowProblem,
    flow: &FlowSolution,
    cut: &CutCertificate,
) -> Result<SlacknessReport, Error> {
    let mut priced = Capacity::Finite(0);
    for v in &cut.c {
        priced = priced.checked_add(p.vcap.get(v));
    }
    for e in &cut.f {
        priced = priced.checked_add(p.ecap.get(e));
    }
    if priced != Capacity::Finite(flow.value) {
        return Err(Error::NotOptimalPair { flow: flow.value, cut: priced.to_string() });
    }
    let in_c = |v: &Vertex| cut.c.binary_search(v).is_ok();
    let in_f = |e: &Edge| cut.f.binary_search(e).is_ok();

    let mut vertex_use: BTreeMap<Vertex, u64> = cut.c.iter().map(|v| (*v, 0)).collect();
    let mut edge_use: BTreeMap<Edge, u64> = cut.f.iter().map(|e| (*e, 0)).collect();
    for path in &flow.paths {
        let mut elements = 0u64;
        for v in path {
            if in_c(v) {
                elements += 1;
                *vertex_use.get_mut(v).unwrap() += 1;
            }
        }
        for w in path.windows(2) {
            let e = Edge::between(w[0], w[1])?;
            if in_f(&e) {
                elements += 1;
                *edge_use.get_mut(&e).unwrap() += 1;
            }
        }
        if elements != 1 {
            return Err(Error::Slackness(format!(
                "path {} meets {elements} cut elements, expected exactly 1",
                render_path(path)
            )));
        }
    }
    for (v, used) in &vertex_use {
        let cap = p.vcap.get(v).as_finite().expect("finite cut value implies finite capacities");
        if *used != cap {
            return Err(Error::Slackness(format!(
                "cut vertex {v} lies on {used} paths, capacity {cap}"
            )));
        }
    }
    for (e, used) in &edge_use {
        let cap = p.ecap.get(e).as_finite().expect("finite cut value implies finite capacities");
        if *used != cap {
            return Err(Error::Slackness(format!(
                "cut edge {e} lies on {used} paths, capacity {cap}"
            )));
        }
    }
    Ok(SlacknessReport {
        paths: flow.paths.len(),
        cut_vertices: cut.c.len(),
        cut_edges: cut.f.len(),
        vertex_only: cut.f.is_empty(),
    })
}

pub(crate) fn render_path(path: &[Vertex]) -> String {
    let parts: Vec<String> = path.iter().map(|v| v.to_string()).collect();
    parts.join(" -> ")
}
