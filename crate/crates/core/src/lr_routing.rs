//! Path systems between matched level sets: single vertex-disjoint
//! collections, double collections with an edge-disjoint union, and the
//! structural diagnostics (gateways, pink edges, projection step sets)
//! used to study routing obstructions.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::{self, Deserializer};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::flow::{
    cut_sides, max_flow, CapMap, Capacity, CutCertificate, CutPartition, DinicCore, FlowProblem,
    FlowSolution, INF,
};
use crate::hypercube::{cover_graph, CoverGraph, Edge, Vertex};
use crate::matched_pairs::MatchedPair;
use crate::Error;

/// One collection of pairwise vertex-disjoint monotone unit paths, one
/// per source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LRSolution {
    paths: Vec<Vec<Vertex>>,
}

impl LRSolution {
    /// Validates that the paths are monotone and pairwise vertex-disjoint.
    pub fn from_paths(paths: Vec<Vec<Vertex>>) -> Result<Self, Error> {
        let mut seen: BTreeSet<Vertex> = BTreeSet::new();
        for path in &paths {
            if path.len() < 2 {
                return Err(Error::Parse(format!(
                    "path must have at least two vertices, got {}",
                    path.len()
                )));
            }
            for w in path.windows(2) {
                Edge::between(w[0], w[1])?;
            }
            for v in path {
                if !seen.insert(*v) {
                    return Err(Error::ContextMismatch(format!(
                        "paths are not vertex-disjoint: {v} repeats"
                    )));
                }
            }
        }
        Ok(LRSolution { paths })
    }

    pub fn paths(&self) -> &[Vec<Vertex>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Path starting points, ascending.
    pub fn sources(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.paths.iter().map(|p| p[0]).collect();
        out.sort_unstable();
        out
    }

    /// Path end points, ascending.
    pub fn targets(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.paths.iter().map(|p| *p.last().unwrap()).collect();
        out.sort_unstable();
        out
    }
}

impl Serialize for LRSolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LRSolution", 1)?;
        st.serialize_field("paths", &self.paths)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for LRSolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            paths: Vec<Vec<Vertex>>,
        }
        let wire = Wire::deserialize(deserializer)?;
        LRSolution::from_paths(wire.paths).map_err(de::Error::custom)
    }
}

/// Two path collections over the same sources and targets whose union is
/// edge-disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleLRSolution {
    first: LRSolution,
    second: LRSolution,
}

impl DoubleLRSolution {
    pub fn new(first: LRSolution, second: LRSolution) -> Result<Self, Error> {
        check_double(&first, &second)?;
        Ok(DoubleLRSolution { first, second })
    }

    pub fn first(&self) -> &LRSolution {
        &self.first
    }

    pub fn second(&self) -> &LRSolution {
        &self.second
    }

    /// Re-checks every invariant: per-collection vertex-disjointness,
    /// matching endpoints, and edge-disjointness of the union.
    pub fn verify(&self) -> Result<(), Error> {
        LRSolution::from_paths(self.first.paths.clone())?;
        LRSolution::from_paths(self.second.paths.clone())?;
        check_double(&self.first, &self.second)
    }
}

fn check_double(first: &LRSolution, second: &LRSolution) -> Result<(), Error> {
    if first.sources() != second.sources() {
        return Err(Error::ContextMismatch(
            "collections start from different source sets".into(),
        ));
    }
    if first.targets() != second.targets() {
        return Err(Error::ContextMismatch("collections end in different target sets".into()));
    }
    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    for path in first.paths().iter().chain(second.paths()) {
        for w in path.windows(2) {
            let e = Edge::between(w[0], w[1])?;
            if !edges.insert(e) {
                return Err(Error::ContextMismatch(format!(
                    "union is not edge-disjoint: {e} repeats"
                )));
            }
        }
    }
    Ok(())
}

impl Serialize for DoubleLRSolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DoubleLRSolution", 2)?;
        st.serialize_field("first", &self.first.paths)?;
        st.serialize_field("second", &self.second.paths)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DoubleLRSolution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            first: Vec<Vec<Vertex>>,
            second: Vec<Vec<Vertex>>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let first = LRSolution::from_paths(wire.first).map_err(de::Error::custom)?;
        let second = LRSolution::from_paths(wire.second).map_err(de::Error::custom)?;
        DoubleLRSolution::new(first, second).map_err(de::Error::custom)
    }
}

/// Routes `|S|` vertex-disjoint monotone paths from the sources of `p` to
/// its targets, via a unit-vertex-capacity flow on the cover graph.
///
/// A flow value below `|S|` is reported as a [`Error::TheoremViolation`];
/// for level pairs it cannot occur.
pub fn lr_solution(p: &MatchedPair) -> Result<LRSolution, Error> {
    p.levels().ok_or(Error::LevelsRequired)?;
    let sources = p.sources();
    let targets = p.targets();
    let cover = cover_graph(&sources, &targets)?;
    let problem = FlowProblem::new(
        cover,
        &sources,
        &targets,
        CapMap::uniform(1.into()),
        CapMap::uniform(Capacity::Infinite),
    )?;
    let flow = max_flow(&problem)?;
    if flow.value() != p.len() as u64 {
        return Err(Error::TheoremViolation {
            theorem: "vertex-disjoint routing",
            instance: serde_json::to_string(p).expect("pair serializes"),
        });
    }
    let solution = LRSolution::from_paths(flow.paths().to_vec())?;
    debug_assert_eq!(solution.sources(), sources);
    debug_assert_eq!(solution.targets(), targets);
    Ok(solution)
}

/// Routes two full path collections whose union is edge-disjoint, via a
/// two-units-per-vertex, one-unit-per-edge flow on the cover graph, then
/// splits the flow with [`split_flow_two_collections`].
///
/// Requires the pair's levels to be at least two apart.
pub fn double_lr_solution(p: &MatchedPair) -> Result<DoubleLRSolution, Error> {
    let (i, j) = p.levels().ok_or(Error::LevelsRequired)?;
    if j - i < 2 {
        return Err(Error::LevelGapTooSmall { gap: j - i });
    }
    let sources = p.sources();
    let targets = p.targets();
    let cover = cover_graph(&sources, &targets)?;
    let problem = FlowProblem::new(
        cover,
        &sources,
        &targets,
        CapMap::uniform(2.into()),
        CapMap::uniform(1.into()),
    )?;
    let flow = max_flow(&problem)?;
    if flow.value() != 2 * p.len() as u64 {
        return Err(Error::TheoremViolation {
            theorem: "edge-disjoint double routing",
            instance: serde_json::to_string(p).expect("pair serializes"),
        });
    }
    let (g1, g2) = split_flow_two_collections(&flow)?;
    DoubleLRSolution::new(
        LRSolution::from_paths(g1.paths().to_vec())?,
        LRSolution::from_paths(g2.paths().to_vec())?,
    )
}

/// Splits a flow carrying two units per source into two one-unit-per-source
/// flows whose edge sets partition the support and whose vertex throughput
/// is at most one each.
///
/// Preconditions: even value, edge flows in {0,1}, vertex throughput ≤ 2,
/// every path start emitting exactly two units.  The split is found as a
/// flow with lower bounds on the support network; an infeasible instance —
/// none is known to exist — is archived in [`Error::SplitFailure`].
pub fn split_flow_two_collections(
    f: &FlowSolution,
) -> Result<(FlowSolution, FlowSolution), Error> {
    let mut parts = split_flow_collections(f, 2)?;
    let second = parts.pop().expect("two collections");
    let first = parts.pop().expect("two collections");
    Ok((first, second))
}

/// Splits a flow carrying `r` units per source into `r` one-unit-per-source
/// flows, pairwise edge-disjoint, each with vertex throughput at most one.
///
/// Peels one collection at a time: the next collection must route between
/// `max(0, t(v)−(r−1))` and `min(1, t(v))` units through each vertex of
/// throughput `t(v)`, which keeps the remainder splittable.
pub(crate) fn split_flow_collections(
    f: &FlowSolution,
    r: u64,
) -> Result<Vec<FlowSolution>, Error> {
    assert!(r >= 1, "need at least one collection");
    if !f.value().is_multiple_of(r) {
        return Err(Error::ContextMismatch(format!(
            "flow value {} is not a multiple of {r}",
            f.value()
        )));
    }
    for (e, &fl) in f.arc_flow() {
        if fl > 1 {
            return Err(Error::ContextMismatch(format!(
                "edge {e} carries {fl} units, expected at most 1"
            )));
        }
    }
    for (v, &t) in &f.throughput() {
        if t > r {
            return Err(Error::ContextMismatch(format!(
                "vertex {v} has throughput {t}, expected at most {r}"
            )));
        }
    }
    let mut start_mult: BTreeMap<Vertex, u64> = BTreeMap::new();
    let mut end_rem: BTreeMap<Vertex, u64> = BTreeMap::new();
    for path in f.paths() {
        *start_mult.entry(path[0]).or_insert(0) += 1;
        *end_rem.entry(*path.last().unwrap()).or_insert(0) += 1;
    }
    for (v, &k) in &start_mult {
        if k != r {
            return Err(Error::ContextMismatch(format!(
                "source {v} emits {k} units, expected exactly {r}"
            )));
        }
    }
    let sources: Vec<Vertex> = start_mult.keys().copied().collect();
    let unit_sources: BTreeMap<Vertex, u64> = sources.iter().map(|s| (*s, 1)).collect();

    let mut edge_rem: BTreeMap<Edge, u64> = f.arc_flow().clone();
    let mut collections = Vec::with_capacity(r as usize);
    for m in (2..=r).rev() {
        let (g_edges, g_ends) = peel_one(&sources, m, &edge_rem, &end_rem, f)?;
        let g_edge_map: BTreeMap<Edge, u64> = g_edges.iter().map(|e| (*e, 1)).collect();
        let paths = walk_paths(&unit_sources, &g_ends, &g_edge_map);
        collections.push(FlowSolution::from_paths(paths)?);
        for e in &g_edges {
            let slot = edge_rem.get_mut(e).expect("peeled edge has remaining flow");
            *slot -= 1;
            if *slot == 0 {
                edge_rem.remove(e);
            }
        }
        for (v, g) in &g_ends {
            let slot = end_rem.get_mut(v).expect("peeled end has remaining supply");
            *slot -= g;
            if *slot == 0 {
                end_rem.remove(v);
            }
        }
    }
    let paths = walk_paths(&unit_sources, &end_rem, &edge_rem);
    collections.push(FlowSolution::from_paths(paths)?);
    Ok(collections)
}

/// One feasible collection of a flow still carrying `m` units per source:
/// the chosen sub-flow takes exactly one unit from each source, at most
/// one unit through any vertex or edge, and at least `t(v)−(m−1)` units
/// where the remaining throughput `t(v)` forces it.
fn peel_one(
    sources: &[Vertex],
    m: u64,
    edge_rem: &BTreeMap<Edge, u64>,
    end_rem: &BTreeMap<Vertex, u64>,
    original: &FlowSolution,
) -> Result<(BTreeSet<Edge>, BTreeMap<Vertex, u64>), Error> {
    let mut vert_set: BTreeSet<Vertex> = sources.iter().copied().collect();
    vert_set.extend(end_rem.keys().copied());
    for e in edge_rem.keys() {
        vert_set.insert(e.lo());
        vert_set.insert(e.hi());
    }
    let verts: Vec<Vertex> = vert_set.into_iter().collect();
    let idx: BTreeMap<Vertex, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = verts.len();

    let mut throughput = vec![0u64; n];
    for (e, &fl) in edge_rem {
        debug_assert_eq!(fl, 1);
        throughput[idx[&e.hi()]] += fl;
    }
    for s in sources {
        throughput[idx[s]] += m;
    }

    // Node layout: vertex i splits into 2i (in) and 2i+1 (out); then the
    // flow supernodes and the excess supernodes of the bounds reduction.
    let s_node = 2 * n;
    let t_node = 2 * n + 1;
    let ss = 2 * n + 2;
    let tt = 2 * n + 3;
    let mut core = DinicCore::new(2 * n + 4);
    let mut excess = vec![0i64; 2 * n + 4];
    let add_bounded = |core: &mut DinicCore, excess: &mut Vec<i64>, from: usize, to: usize, lo: u64, hi: u64| {
        excess[to] += lo as i64;
        excess[from] -= lo as i64;
        core.add_arc(from, to, hi - lo)
    };

    for (i, &t) in throughput.iter().enumerate() {
        debug_assert!(t >= 1 && t <= m, "support throughput {t} out of range");
        add_bounded(&mut core, &mut excess, 2 * i, 2 * i + 1, t.saturating_sub(m - 1), 1);
    }
    let mut edge_arcs = Vec::with_capacity(edge_rem.len());
    for e in edge_rem.keys() {
        let a = add_bounded(&mut core, &mut excess, 2 * idx[&e.lo()] + 1, 2 * idx[&e.hi()], 0, 1);
        edge_arcs.push(a);
    }
    for s in sources {
        add_bounded(&mut core, &mut excess, s_node, 2 * idx[s], 1, 1);
    }
    let mut end_arcs = Vec::with_capacity(end_rem.len());
    for (v, &tau) in end_rem {
        let a = add_bounded(
            &mut core,
            &mut excess,
            2 * idx[v] + 1,
            t_node,
            tau.saturating_sub(m - 1),
            1,
        );
        end_arcs.push((*v, a, tau.saturating_sub(m - 1)));
    }
    add_bounded(&mut core, &mut excess, t_node, s_node, 0, INF);

    let mut demand = 0u64;
    for (node, &ex) in excess.iter().enumerate() {
        match ex.cmp(&0) {
            std::cmp::Ordering::Greater => {
                core.add_arc(ss, node, ex as u64);
                demand += ex as u64;
            }
            std::cmp::Ordering::Less => {
                core.add_arc(node, tt, (-ex) as u64);
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    if core.max_flow(ss, tt) != demand {
        return Err(Error::SplitFailure {
            instance: serde_json::to_string(original).expect("flow serializes"),
        });
    }

    let g_edges: BTreeSet<Edge> = edge_rem
        .keys()
        .zip(&edge_arcs)
        .filter(|(_, &a)| core.flow_on(a) == 1)
        .map(|(e, _)| *e)
        .collect();
    let g_ends: BTreeMap<Vertex, u64> = end_arcs
        .iter()
        .map(|&(v, a, lo)| (v, lo + core.flow_on(a)))
        .filter(|(_, g)| *g > 0)
        .collect();
    debug_assert_eq!(g_ends.values().sum::<u64>(), sources.len() as u64);
    Ok((g_edges, g_ends))
}

/// Canonical unit-path walk over explicit supplies: start at the smallest
/// source with units left, follow the smallest-head edge with flow left,
/// and stop where only terminal supply remains.
fn walk_paths(
    start_mult: &BTreeMap<Vertex, u64>,
    end_mult: &BTreeMap<Vertex, u64>,
    edge_flow: &BTreeMap<Edge, u64>,
) -> Vec<Vec<Vertex>> {
    let mut out_rem: BTreeMap<Vertex, BTreeMap<Vertex, u64>> = BTreeMap::new();
    for (e, &fl) in edge_flow {
        if fl > 0 {
            *out_rem.entry(e.lo()).or_default().entry(e.hi()).or_insert(0) += fl;
        }
    }
    let mut ends = end_mult.clone();
    let mut paths = Vec::new();
    for (s, &k) in start_mult {
        for _ in 0..k {
            let mut v = *s;
            let mut path = vec![v];
            loop {
                let next = out_rem
                    .get_mut(&v)
                    .and_then(|heads| heads.iter_mut().find(|(_, fl)| **fl > 0));
                match next {
                    Some((head, fl)) => {
                        *fl -= 1;
                        v = *head;
                        path.push(v);
                    }
                    None => {
                        let rem = ends.get_mut(&v).expect("conservation: stuck vertex is an end");
                        assert!(*rem > 0, "conservation: end supply exhausted");
                        *rem -= 1;
                        break;
                    }
                }
            }
            paths.push(path);
        }
    }
    paths
}

/// Shared context for the routing diagnostics: a flow problem's path
/// collection 𝒫, a candidate cut, and the vertex partition the cut
/// induces.
///
/// The partition is diagnostic: an invalid cut is tolerated, and its two
/// sides may then overlap.
#[derive(Clone, Debug)]
pub struct GatewayContext {
    cover: CoverGraph,
    paths: FlowSolution,
    cut: CutCertificate,
    partition: CutPartition,
    restricted: CoverGraph,
    throughput: BTreeMap<Vertex, u64>,
}

impl GatewayContext {
    pub fn new(p: &FlowProblem, flow: &FlowSolution, cut: &CutCertificate) -> Result<Self, Error> {
        for path in flow.paths() {
            for v in path {
                if !p.graph().contains(v) {
                    return Err(Error::ContextMismatch(format!(
                        "path vertex {v} is not in the graph"
                    )));
                }
            }
            for w in path.windows(2) {
                let e = Edge::between(w[0], w[1])?;
                if !p.graph().contains_edge(&e) {
                    return Err(Error::ContextMismatch(format!(
                        "path edge {e} is not in the graph"
                    )));
                }
            }
            if p.sources().binary_search(&path[0]).is_err() {
                return Err(Error::ContextMismatch(format!(
                    "path starts at {} which is not a source",
                    path[0]
                )));
            }
            let last = path.last().unwrap();
            if p.sinks().binary_search(last).is_err() {
                return Err(Error::ContextMismatch(format!(
                    "path ends at {last} which is not a sink"
                )));
            }
        }
        for v in cut.vertices() {
            if !p.graph().contains(v) {
                return Err(Error::ContextMismatch(format!("cut vertex {v} is not in the graph")));
            }
        }
        for e in cut.edges() {
            if !p.graph().contains_edge(e) {
                return Err(Error::ContextMismatch(format!("cut edge {e} is not in the graph")));
            }
        }
        let (s_side, t_side) = cut_sides(p, cut);
        let mut residue: BTreeSet<Vertex> = cut.vertices().iter().copied().collect();
        for v in p.graph().vertices() {
            if s_side.binary_search(v).is_err() && t_side.binary_search(v).is_err() {
                residue.insert(*v);
            }
        }
        let restricted = if s_side.is_empty() || t_side.is_empty() {
            CoverGraph::empty(p.graph().d())
        } else {
            cover_graph(&s_side, &t_side)?
        };
        let partition = CutPartition::from_parts(
            s_side,
            residue.into_iter().collect(),
            t_side,
        );
        Ok(GatewayContext {
            cover: p.graph().clone(),
            paths: flow.clone(),
            cut: cut.clone(),
            partition,
            restricted,
            throughput: flow.throughput(),
        })
    }

    pub fn cover(&self) -> &CoverGraph {
        &self.cover
    }

    pub fn paths(&self) -> &FlowSolution {
        &self.paths
    }

    pub fn cut(&self) -> &CutCertificate {
        &self.cut
    }

    pub fn partition(&self) -> &CutPartition {
        &self.partition
    }

    /// Cover graph spanned from the cut's source side to its sink side.
    pub fn restricted_cover(&self) -> &CoverGraph {
        &self.restricted
    }

    /// Number of paths through `v`.
    pub fn path_count(&self, v: &Vertex) -> u64 {
        self.throughput.get(v).copied().unwrap_or(0)
    }
}

/// Which gateway predicate to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GatewayMode {
    /// Vertex-cut regime: the vertex lies on no path and has an outgoing
    /// edge in the ambient cover graph.
    VertexOnly,
    /// Mixed-cut regime: the vertex lies on at most one path and has an
    /// outgoing non-cut edge within the restricted cover graph.
    General,
}

/// Source-side layer-`k` vertices with routing slack: candidates through
/// which one more path could be pushed.
pub fn gateways(ctx: &GatewayContext, k: usize, mode: GatewayMode) -> Vec<Vertex> {
    ctx.partition
        .s_side()
        .iter()
        .filter(|v| v.layer() == k)
        .filter(|v| match mode {
            GatewayMode::VertexOnly => {
                ctx.path_count(v) == 0 && ctx.cover.out_neighbors(v).next().is_some()
            }
            GatewayMode::General => {
                ctx.path_count(v) <= 1
                    && ctx.restricted.contains(v)
                    && ctx.restricted.out_neighbors(v).any(|w| {
                        let e = Edge::between(**v, w).expect("cover edges are cube edges");
                        ctx.cut.edges().binary_search(&e).is_err()
                    })
            }
        })
        .copied()
        .collect()
}

/// Number of distinct path edges that keep coordinate `r` fixed and touch
/// the vertex set `w`.
pub fn pink_count(ctx: &GatewayContext, r: usize, w: &[Vertex]) -> Result<usize, Error> {
    let d = ctx.cover.d();
    if !(1..=d.get()).contains(&r) {
        return Err(Error::CoordinateRange { d: d.get(), coordinate: r });
    }
    let wset: BTreeSet<Vertex> = w.iter().copied().collect();
    Ok(ctx
        .paths
        .arc_flow()
        .keys()
        .filter(|e| e.dim() != r && (wset.contains(&e.lo()) || wset.contains(&e.hi())))
        .count())
}

/// The four projection step sets around a layer-`k` vertex along
/// coordinate `r`: candidate sources `A`, their raised copies `X`, the
/// path successors `B` of `X`, and their lowered copies `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSets {
    a: Vec<Vertex>,
    x: Vec<Vertex>,
    b: Vec<Vertex>,
    y: Vec<Vertex>,
}

impl StepSets {
    pub fn a(&self) -> &[Vertex] {
        &self.a
    }

    pub fn x(&self) -> &[Vertex] {
        &self.x
    }

    pub fn b(&self) -> &[Vertex] {
        &self.b
    }

    pub fn y(&self) -> &[Vertex] {
        &self.y
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.a.len(), self.x.len(), self.b.len(), self.y.len())
    }
}

/// Computes the step sets at `v_star`'s layer along coordinate `r`:
/// `A` collects the source-side layer-`k` vertices with coordinate `r`
/// clear whose raised copy lies in the restricted cover graph; `X = Π_r(A)`;
/// `B` collects the immediate path successors of `X`; `Y = Π_r(B)`.
///
/// `|X| = |A|` and `|Y| = |B|` always, the projections being injective.
pub fn gateway_step_sets(
    ctx: &GatewayContext,
    v_star: &Vertex,
    r: usize,
) -> Result<StepSets, Error> {
    let d = ctx.cover.d();
    if v_star.dimension() != d {
        return Err(Error::DimensionMismatch {
            left: d.get(),
            right: v_star.dimension().get(),
        });
    }
    if v_star.coordinate(r)? {
        return Err(Error::ContextMismatch(format!(
            "{v_star} has coordinate {r} set; the step sets need it clear"
        )));
    }
    let k = v_star.layer();
    let mut a = Vec::new();
    for v in ctx.partition.s_side() {
        if v.layer() != k || v.coordinate(r)? {
            continue;
        }
        if ctx.restricted.contains(&v.project(r)?) {
            a.push(*v);
        }
    }
    let x: Vec<Vertex> = a.iter().map(|v| v.project(r).expect("coordinate checked")).collect();
    let xset: BTreeSet<Vertex> = x.iter().copied().collect();
    let mut bset: BTreeSet<Vertex> = BTreeSet::new();
    for path in ctx.paths.paths() {
        for w in path.windows(2) {
            if xset.contains(&w[0]) {
                bset.insert(w[1]);
            }
        }
    }
    let b: Vec<Vertex> = bset.into_iter().collect();
    let y: Vec<Vertex> =
        b.iter().map(|v| v.project(r)).collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(x.len(), a.len());
    debug_assert_eq!(y.len(), b.len());
    Ok(StepSets { a, x, b, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::max_flow_min_cut;
    use crate::hypercube::{layer, Dimension};
    use crate::matched_pairs::canonical_matching;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    fn vs(names: &[&str]) -> Vec<Vertex> {
        names.iter().map(|s| v(s)).collect()
    }

    fn pair(entries: &[(&str, &str)]) -> MatchedPair {
        let d = Dimension::new(entries[0].0.len()).unwrap();
        let pairs: Vec<(Vertex, Vertex)> =
            entries.iter().map(|(s, t)| (v(s), v(t))).collect();
        MatchedPair::new(d, pairs).unwrap()
    }

    fn square_problem(vcap: Capacity, ecap: Capacity) -> FlowProblem {
        let cover = cover_graph(&[v("00")], &[v("11")]).unwrap();
        FlowProblem::new(cover, &[v("00")], &[v("11")], CapMap::uniform(vcap), CapMap::uniform(ecap))
            .unwrap()
    }

    fn diagnostic_ctx(p: &FlowProblem, paths: Vec<Vec<Vertex>>) -> GatewayContext {
        let flow = FlowSolution::from_paths(paths).unwrap();
        let cut = CutCertificate::new(p, &[], &[]).unwrap();
        GatewayContext::new(p, &flow, &cut).unwrap()
    }

    fn path_set(s: &LRSolution) -> BTreeSet<Vec<Vertex>> {
        s.paths().iter().cloned().collect()
    }

    #[test]
    fn single_square_route() {
        let solution = lr_solution(&pair(&[("00", "11")])).unwrap();
        assert_eq!(solution.paths(), [vec![v("00"), v("10"), v("11")]]);
    }

    #[test]
    fn single_level_pair_in_cube() {
        let p = pair(&[("001", "101"), ("010", "011")]);
        let solution = lr_solution(&p).unwrap();
        assert_eq!(solution.len(), 2);
        assert_eq!(solution.sources(), p.sources());
        assert_eq!(solution.targets(), p.targets());
    }

    #[test]
    fn single_full_layers() {
        let d = Dimension::new(4).unwrap();
        let s = layer(d, 1).unwrap();
        let t = layer(d, 3).unwrap();
        let matching = canonical_matching(&s, &t).unwrap();
        let p = MatchedPair::new(d, matching).unwrap();
        let solution = lr_solution(&p).unwrap();
        assert_eq!(solution.len(), 4);
        assert_eq!(solution.sources(), s);
        assert_eq!(solution.targets(), t);
    }

    #[test]
    fn single_requires_levels() {
        let p = pair(&[("000", "011"), ("001", "101")]);
        assert_eq!(lr_solution(&p).unwrap_err(), Error::LevelsRequired);
        assert_eq!(double_lr_solution(&p).unwrap_err(), Error::LevelsRequired);
    }

    #[test]
    fn double_square_route() {
        let solution = double_lr_solution(&pair(&[("00", "11")])).unwrap();
        solution.verify().unwrap();
        let mut all = path_set(solution.first());
        all.extend(path_set(solution.second()));
        let expected: BTreeSet<Vec<Vertex>> =
            [vec![v("00"), v("10"), v("11")], vec![v("00"), v("01"), v("11")]].into();
        assert_eq!(all, expected);
    }

    #[test]
    fn double_needs_gap() {
        let err = double_lr_solution(&pair(&[("00", "01")])).unwrap_err();
        assert_eq!(err, Error::LevelGapTooSmall { gap: 1 });
        assert!(err.to_string().contains("distance \u{2265} 2 required"));
    }

    #[test]
    fn double_bent_pipe() {
        let solution = double_lr_solution(&pair(&[("000", "110")])).unwrap();
        solution.verify().unwrap();
        let mut all = path_set(solution.first());
        all.extend(path_set(solution.second()));
        let expected: BTreeSet<Vec<Vertex>> = [
            vec![v("000"), v("100"), v("110")],
            vec![v("000"), v("010"), v("110")],
        ]
        .into();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_plumbing_off_levels() {
        let sources = vs(&["0000", "0001"]);
        let targets = vs(&["0111", "1011"]);
        let cover = cover_graph(&sources, &targets).unwrap();
        let problem = FlowProblem::new(
            cover,
            &sources,
            &targets,
            CapMap::uniform(2.into()),
            CapMap::uniform(1.into()),
        )
        .unwrap();
        let flow = max_flow(&problem).unwrap();
        assert_eq!(flow.value(), 4);
        let (g1, g2) = split_flow_two_collections(&flow).unwrap();
        let first = LRSolution::from_paths(g1.paths().to_vec()).unwrap();
        let second = LRSolution::from_paths(g2.paths().to_vec()).unwrap();
        let double = DoubleLRSolution::new(first, second).unwrap();
        double.verify().unwrap();
        assert_eq!(double.first().len(), 2);
        assert_eq!(double.second().len(), 2);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let odd = FlowSolution::from_paths(vec![vec![v("00"), v("01"), v("11")]]).unwrap();
        let err = split_flow_two_collections(&odd).unwrap_err();
        assert!(err.to_string().contains("not a multiple of 2"));

        let doubled_edge = FlowSolution::from_paths(vec![
            vec![v("00"), v("01"), v("11")],
            vec![v("00"), v("01"), v("11")],
        ])
        .unwrap();
        let err = split_flow_two_collections(&doubled_edge).unwrap_err();
        assert!(err.to_string().contains("carries 2 units"));

        let overloaded = FlowSolution::from_paths(vec![
            vec![v("000"), v("100")],
            vec![v("000"), v("010")],
            vec![v("000"), v("001")],
            vec![v("011"), v("111")],
        ])
        .unwrap();
        let err = split_flow_two_collections(&overloaded).unwrap_err();
        assert!(err.to_string().contains("throughput 3"));

        let uneven = FlowSolution::from_paths(vec![
            vec![v("000"), v("100")],
            vec![v("000"), v("010")],
            vec![v("001"), v("101")],
            vec![v("011"), v("111")],
        ])
        .unwrap();
        let err = split_flow_two_collections(&uneven).unwrap_err();
        assert!(err.to_string().contains("emits 1 units"));
    }

    #[test]
    fn lr_serde_round_trip() {
        let solution = lr_solution(&pair(&[("00", "11")])).unwrap();
        let json = serde_json::to_string(&solution).unwrap();
        assert_eq!(json, r#"{"paths":[["00","10","11"]]}"#);
        let back: LRSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, solution);
        assert!(serde_json::from_str::<LRSolution>(
            r#"{"paths":[["00","10","11"],["00","01","11"]]}"#
        )
        .is_err());
    }

    #[test]
    fn double_serde_round_trip() {
        let solution = double_lr_solution(&pair(&[("00", "11")])).unwrap();
        let json = serde_json::to_string(&solution).unwrap();
        let back: DoubleLRSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, solution);
        assert!(serde_json::from_str::<DoubleLRSolution>(
            r#"{"first":[["00","10","11"]],"second":[["00","10","11"]]}"#
        )
        .is_err());
    }

    #[test]
    fn gateway_with_empty_paths() {
        let p = square_problem(Capacity::Infinite, 1.into());
        let ctx = diagnostic_ctx(&p, vec![]);
        assert_eq!(gateways(&ctx, 0, GatewayMode::VertexOnly), [v("00")]);
        assert_eq!(gateways(&ctx, 0, GatewayMode::General), [v("00")]);
    }

    #[test]
    fn gateway_excludes_double_path_vertices() {
        let p = square_problem(2.into(), 1.into());
        let flow = max_flow(&p).unwrap();
        let cut = CutCertificate::new(&p, &[], &[]).unwrap();
        let ctx = GatewayContext::new(&p, &flow, &cut).unwrap();
        assert_eq!(ctx.path_count(&v("00")), 2);
        assert!(gateways(&ctx, 0, GatewayMode::VertexOnly).is_empty());
        assert!(gateways(&ctx, 0, GatewayMode::General).is_empty());
    }

    #[test]
    fn gateway_modes_differ_on_single_path() {
        let p = square_problem(2.into(), 1.into());
        let ctx = diagnostic_ctx(&p, vec![vec![v("00"), v("10"), v("11")]]);
        assert!(gateways(&ctx, 0, GatewayMode::VertexOnly).is_empty());
        assert_eq!(gateways(&ctx, 0, GatewayMode::General), [v("00")]);
        assert_eq!(gateways(&ctx, 1, GatewayMode::VertexOnly), [v("01")]);
        assert_eq!(gateways(&ctx, 1, GatewayMode::General), [v("10"), v("01")]);
    }

    #[test]
    fn gateway_respects_cut_sides() {
        let p = square_problem(2.into(), 1.into());
        let (flow, cut) = max_flow_min_cut(&p).unwrap();
        let ctx = GatewayContext::new(&p, &flow, &cut).unwrap();
        assert!(ctx.partition().s_side().is_empty());
        assert!(gateways(&ctx, 0, GatewayMode::VertexOnly).is_empty());
        assert!(gateways(&ctx, 1, GatewayMode::General).is_empty());
    }

    #[test]
    fn context_rejects_foreign_paths() {
        let p = square_problem(2.into(), 1.into());
        let flow = FlowSolution::from_paths(vec![vec![v("10"), v("11")]]).unwrap();
        let cut = CutCertificate::new(&p, &[], &[]).unwrap();
        let err = GatewayContext::new(&p, &flow, &cut).unwrap_err();
        assert!(err.to_string().contains("not a source"));
    }

    #[test]
    fn pink_counts_fixed_coordinate_edges() {
        let p = square_problem(Capacity::Infinite, 1.into());
        let empty = diagnostic_ctx(&p, vec![]);
        assert_eq!(pink_count(&empty, 1, &vs(&["00", "01", "10", "11"])).unwrap(), 0);

        let ctx = diagnostic_ctx(&p, vec![vec![v("00"), v("01"), v("11")]]);
        assert_eq!(pink_count(&ctx, 1, &[v("01")]).unwrap(), 1);
        assert_eq!(pink_count(&ctx, 1, &vs(&["00", "01"])).unwrap(), 1);
        assert_eq!(pink_count(&ctx, 2, &[v("01")]).unwrap(), 1);
        assert_eq!(pink_count(&ctx, 2, &[v("00")]).unwrap(), 0);
        assert_eq!(
            pink_count(&ctx, 3, &[v("00")]).unwrap_err(),
            Error::CoordinateRange { d: 2, coordinate: 3 }
        );
    }

    #[test]
    fn step_sets_in_square() {
        let p = square_problem(Capacity::Infinite, 1.into());
        let ctx = diagnostic_ctx(&p, vec![]);
        let sets = gateway_step_sets(&ctx, &v("00"), 1).unwrap();
        assert_eq!(sets.a(), [v("00")]);
        assert_eq!(sets.x(), [v("10")]);
        assert!(sets.b().is_empty());
        assert!(sets.y().is_empty());
        assert_eq!(sets.sizes(), (1, 1, 0, 0));
    }

    #[test]
    fn step_sets_need_clear_coordinate() {
        let p = square_problem(Capacity::Infinite, 1.into());
        let ctx = diagnostic_ctx(&p, vec![]);
        let err = gateway_step_sets(&ctx, &v("10"), 1).unwrap_err();
        assert!(err.to_string().contains("coordinate 1 set"));
    }

    #[test]
    fn step_sets_follow_paths() {
        let cover = cover_graph(&[v("000")], &[v("111")]).unwrap();
        let p = FlowProblem::new(
            cover,
            &[v("000")],
            &[v("111")],
            CapMap::uniform(Capacity::Infinite),
            CapMap::uniform(1.into()),
        )
        .unwrap();
        let flow = max_flow(&p).unwrap();
        let cut = CutCertificate::new(&p, &[], &[]).unwrap();
        let ctx = GatewayContext::new(&p, &flow, &cut).unwrap();
        let sets = gateway_step_sets(&ctx, &v("000"), 1).unwrap();
        assert_eq!(sets.a(), [v("000")]);
        assert_eq!(sets.x(), [v("100")]);
        assert_eq!(sets.b(), [v("110")]);
        assert_eq!(sets.y(), [v("010")]);
        assert_eq!(sets.sizes(), (1, 1, 1, 1));
    }
}
