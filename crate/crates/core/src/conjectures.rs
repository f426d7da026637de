//! Checks of the directed-cube flow lower bounds and search drivers for
//! the two open routing conjectures: the r-collection strengthening of
//! the disjoint-path theorems and the square-capacity flow bound.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{max_flow, partition_by_cut, CapMap, Capacity, CutCertificate, FlowProblem};
use crate::hypercube::{cover_graph, layer, Dimension, Edge, Vertex};
use crate::lr_routing::{split_flow_collections, LRSolution};
use crate::matched_pairs::{
    directed_volume, separation_distance, separation_distance_of_set, MatchedPair,
};
use crate::monotonicity::{
    charged_degree_table, check_domain, talagrand_objective, BooleanFunction, EdgeColoring,
};
use crate::{Error, Rational};

fn complement(d: Dimension, set: &[Vertex]) -> Vec<Vertex> {
    let members: BTreeSet<u32> = set.iter().map(Vertex::bits).collect();
    (0..d.vertex_count() as u32)
        .filter(|code| !members.contains(code))
        .map(|code| d.vertex(code).unwrap())
        .collect()
}

fn unit() -> Capacity {
    Capacity::Finite(1)
}

/// Flow versus directed volume under unit edge capacities.
#[derive(Clone, Debug, Serialize)]
pub struct FlowVolumeRecord {
    pub flow: u64,
    pub dirvol: u64,
    pub pass: bool,
}

/// Checks that the edge-capacitated max-flow from a set to its
/// complement is at least the set's directed volume.
pub fn check_thm_flowpoin(d: Dimension, set: &[Vertex]) -> Result<FlowVolumeRecord, Error> {
    let (dirvol, _) = directed_volume(d, set)?;
    let p = FlowProblem::on_full_cube(
        d,
        set,
        &complement(d, set),
        CapMap::uniform(Capacity::Infinite),
        CapMap::uniform(unit()),
    )?;
    let flow = max_flow(&p)?.value();
    Ok(FlowVolumeRecord {
        flow,
        dirvol: dirvol as u64,
        pass: flow >= dirvol as u64,
    })
}

/// Flow versus separation-scaled volume under unit edge capacities.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationFlowRecord {
    pub flow: u64,
    pub dirvol: u64,
    pub r: Option<Rational>,
    /// `r * dirvol`, or zero when the volume vanishes.
    pub bound: Rational,
    pub pass: bool,
    pub vacuous: bool,
}

/// Checks that the edge-capacitated max-flow is at least `r * dirvol`,
/// with `r` the separation distance of the set. Zero volume passes
/// vacuously.
pub fn check_thm_cspoin(d: Dimension, set: &[Vertex]) -> Result<SeparationFlowRecord, Error> {
    let (dirvol, _) = directed_volume(d, set)?;
    let p = FlowProblem::on_full_cube(
        d,
        set,
        &complement(d, set),
        CapMap::uniform(Capacity::Infinite),
        CapMap::uniform(unit()),
    )?;
    let flow = max_flow(&p)?.value();
    if dirvol == 0 {
        return Ok(SeparationFlowRecord {
            flow,
            dirvol: 0,
            r: None,
            bound: Rational::from_integer(0),
            pass: true,
            vacuous: true,
        });
    }
    let (r, _) = separation_distance_of_set(d, set)?;
    let bound = r * Rational::from_integer(dirvol as i64);
    Ok(SeparationFlowRecord {
        flow,
        dirvol: dirvol as u64,
        r: Some(r),
        bound,
        pass: Rational::from_integer(flow as i64) >= bound,
        vacuous: false,
    })
}

/// Flow versus `dirvol / (32 r)` under unit vertex capacities.
#[derive(Clone, Debug, Serialize)]
pub struct VertexFlowRecord {
    pub flow: u64,
    pub dirvol: u64,
    pub r: Option<Rational>,
    /// `dirvol / (32 r)`, or zero when the volume vanishes.
    pub bound: Rational,
    /// The much tighter observed ratio `flow * r / dirvol`.
    pub empirical: Option<Rational>,
    pub pass: bool,
    pub vacuous: bool,
}

/// Checks that the vertex-capacitated (all capacities one) max-flow is
/// at least `dirvol / (32 r)`. Zero volume passes vacuously.
pub fn check_thm_cslr(d: Dimension, set: &[Vertex]) -> Result<VertexFlowRecord, Error> {
    let (dirvol, _) = directed_volume(d, set)?;
    let p = FlowProblem::on_full_cube(
        d,
        set,
        &complement(d, set),
        CapMap::uniform(unit()),
        CapMap::uniform(Capacity::Infinite),
    )?;
    let flow = max_flow(&p)?.value();
    if dirvol == 0 {
        return Ok(VertexFlowRecord {
            flow,
            dirvol: 0,
            r: None,
            bound: Rational::from_integer(0),
            empirical: None,
            pass: true,
            vacuous: true,
        });
    }
    let (r, _) = separation_distance_of_set(d, set)?;
    let volume = Rational::from_integer(dirvol as i64);
    let bound = volume / (Rational::from_integer(32) * r);
    let empirical = Rational::from_integer(flow as i64) * r / volume;
    Ok(VertexFlowRecord {
        flow,
        dirvol: dirvol as u64,
        r: Some(r),
        bound,
        empirical: Some(empirical),
        pass: Rational::from_integer(flow as i64) >= bound,
        vacuous: false,
    })
}

/// Outcome of the r-collection split attempt.
#[derive(Clone, Debug)]
pub enum SplitOutcome {
    /// Instance too large or the flow signal already failed.
    NotAttempted,
    /// The flow split into `r` collections of vertex-disjoint paths
    /// with edge-disjoint union.
    Split(Vec<LRSolution>),
    Failed(String),
}

impl SplitOutcome {
    pub fn succeeded(&self) -> bool {
        matches!(self, SplitOutcome::Split(_))
    }
}

/// Record for one level-pair instance of the r-collection conjecture.
#[derive(Clone, Debug)]
pub struct GlrRecord {
    pub pair: MatchedPair,
    pub r: u64,
    pub flow: u64,
    /// `r * |S|`, the value the conjecture needs.
    pub required: u64,
    pub ratio: Rational,
    pub flow_pass: bool,
    pub split: SplitOutcome,
}

/// Largest cover graph on which the split is attempted.
pub const SPLIT_VERTEX_CAP: usize = 200;
/// Largest collection count for which the split is attempted.
pub const SPLIT_R_CAP: u64 = 3;

fn verify_collections(parts: Vec<crate::flow::FlowSolution>, p: &MatchedPair) -> Result<Vec<LRSolution>, Error> {
    let sources = p.sources();
    let targets = p.targets();
    let mut seen = BTreeSet::new();
    let mut collections = Vec::with_capacity(parts.len());
    for part in parts {
        for e in part.arc_flow().keys() {
            if !seen.insert(*e) {
                return Err(Error::ContextMismatch(format!(
                    "collection union is not edge-disjoint: {e} repeats"
                )));
            }
        }
        let sol = LRSolution::from_paths(part.paths().to_vec())?;
        if sol.sources() != sources || sol.targets() != targets {
            return Err(Error::ContextMismatch(
                "a collection does not route the full pair".into(),
            ));
        }
        collections.push(sol);
    }
    Ok(collections)
}

/// Tests the r-collection conjecture on one level matched pair: checks
/// the flow necessary condition (value `r|S|` under unit edge and `r`
/// vertex capacities on the cover graph) and, on small instances with
/// `r <= 3`, attempts the actual split into collections.
pub fn test_conj_glr(p: &MatchedPair) -> Result<GlrRecord, Error> {
    let (i, j) = p.levels().ok_or(Error::LevelsRequired)?;
    let r = (j - i) as u64;
    let graph = cover_graph(&p.sources(), &p.targets())?;
    let small = r <= SPLIT_R_CAP && graph.vertex_count() <= SPLIT_VERTEX_CAP;
    let problem = FlowProblem::new(
        graph,
        &p.sources(),
        &p.targets(),
        CapMap::uniform(Capacity::Finite(r)),
        CapMap::uniform(unit()),
    )?;
    let solution = max_flow(&problem)?;
    let flow = solution.value();
    let required = r * p.len() as u64;
    let ratio = Rational::new(flow as i64, required as i64);
    let flow_pass = flow >= required;
    let split = if flow_pass && small {
        match split_flow_collections(&solution, r).and_then(|parts| verify_collections(parts, p)) {
            Ok(collections) => SplitOutcome::Split(collections),
            Err(e) => SplitOutcome::Failed(e.to_string()),
        }
    } else {
        SplitOutcome::NotAttempted
    };
    Ok(GlrRecord {
        pair: p.clone(),
        r,
        flow,
        required,
        ratio,
        flow_pass,
        split,
    })
}

/// One vertex-capacity variant of the square-capacity check.
#[derive(Clone, Debug, Serialize)]
pub struct RoutCapRun {
    pub vcap: u64,
    pub flow: u64,
    /// `flow / (r * dirvol)`.
    pub ratio: Rational,
}

/// Record for one subset instance of the square-capacity conjecture.
#[derive(Clone, Debug)]
pub struct RoutRecord {
    pub d: usize,
    pub set: Vec<Vertex>,
    pub dirvol: u64,
    pub r: Option<Rational>,
    /// The `ceil(r^2)` run first; a second `floor(r)^2` run when `r` is
    /// fractional.
    pub runs: Vec<RoutCapRun>,
    pub vacuous: bool,
}

impl RoutRecord {
    /// The ratio of the `ceil(r^2)` run, absent on vacuous instances.
    pub fn primary_ratio(&self) -> Option<Rational> {
        self.runs.first().map(|run| run.ratio)
    }
}

/// Tests the square-capacity conjecture on one subset: unit edge
/// capacities, vertex capacities `ceil(r^2)` (and `floor(r)^2` when `r`
/// is fractional), ratio `flow / (r * dirvol)` recorded per run.
pub fn test_conj_rout(d: Dimension, set: &[Vertex]) -> Result<RoutRecord, Error> {
    let (dirvol, _) = directed_volume(d, set)?;
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if dirvol == 0 {
        return Ok(RoutRecord {
            d: d.get(),
            set: sorted,
            dirvol: 0,
            r: None,
            runs: Vec::new(),
            vacuous: true,
        });
    }
    let (r, _) = separation_distance_of_set(d, set)?;
    let sinks = complement(d, set);
    let mut caps = vec![(r * r).ceil().to_integer() as u64];
    if !r.is_integer() {
        let floor = r.floor().to_integer() as u64;
        caps.push(floor * floor);
    }
    let denom = r * Rational::from_integer(dirvol as i64);
    let mut runs = Vec::with_capacity(caps.len());
    for vcap in caps {
        let p = FlowProblem::on_full_cube(
            d,
            set,
            &sinks,
            CapMap::uniform(Capacity::Finite(vcap)),
            CapMap::uniform(unit()),
        )?;
        let flow = max_flow(&p)?.value();
        runs.push(RoutCapRun {
            vcap,
            flow,
            ratio: Rational::from_integer(flow as i64) / denom,
        });
    }
    Ok(RoutRecord {
        d: d.get(),
        set: sorted,
        dirvol: dirvol as u64,
        r: Some(r),
        runs,
        vacuous: false,
    })
}

/// The square-capacity check on a matched pair, restricting the sinks
/// to the pair's target side; `r` is the pair's own separation
/// distance and the volume its size.
pub fn test_conj_rout_pair(p: &MatchedPair) -> Result<RoutRecord, Error> {
    if p.is_empty() {
        return Err(Error::EmptySet("matched pair"));
    }
    let d = p.d();
    let r = separation_distance(p);
    let sources = p.sources();
    let targets = p.targets();
    let mut caps = vec![(r * r).ceil().to_integer() as u64];
    if !r.is_integer() {
        let floor = r.floor().to_integer() as u64;
        caps.push(floor * floor);
    }
    let denom = r * Rational::from_integer(p.len() as i64);
    let mut runs = Vec::with_capacity(caps.len());
    for vcap in caps {
        let problem = FlowProblem::on_full_cube(
            d,
            &sources,
            &targets,
            CapMap::uniform(Capacity::Finite(vcap)),
            CapMap::uniform(unit()),
        )?;
        let flow = max_flow(&problem)?.value();
        runs.push(RoutCapRun {
            vcap,
            flow,
            ratio: Rational::from_integer(flow as i64) / denom,
        });
    }
    Ok(RoutRecord {
        d: d.get(),
        set: sources,
        dirvol: p.len() as u64,
        r: Some(r),
        runs,
        vacuous: false,
    })
}

/// Record for the disjoint-sides edge-disjoint routing bound.
#[derive(Clone, Debug, Serialize)]
pub struct SachdevaRecord {
    pub flow: u64,
    /// `|S|`, the number of paths the bound promises.
    pub required: u64,
    pub pass: bool,
}

/// Checks that a matched pair with disjoint sides admits an
/// edge-capacitated flow of value at least `|S|`.
pub fn check_thm_sachdeva(p: &MatchedPair) -> Result<SachdevaRecord, Error> {
    if p.is_empty() {
        return Err(Error::EmptySet("matched pair"));
    }
    let sources = p.sources();
    let targets = p.targets();
    if let Some(v) = sources.iter().find(|v| targets.binary_search(v).is_ok()) {
        return Err(Error::TerminalOverlap { vertex: *v });
    }
    let graph = cover_graph(&sources, &targets)?;
    let problem = FlowProblem::new(
        graph,
        &sources,
        &targets,
        CapMap::uniform(Capacity::Infinite),
        CapMap::uniform(unit()),
    )?;
    let flow = max_flow(&problem)?.value();
    Ok(SachdevaRecord {
        flow,
        required: p.len() as u64,
        pass: flow >= p.len() as u64,
    })
}

/// A charged-degree cut derived from an edge coloring, with its
/// validity verdict in the unit-edge, `r^2`-vertex network between the
/// function's 1-set and 0-set.
#[derive(Clone, Debug, Serialize)]
pub struct ColoringCutRecord {
    /// Absent only for constant functions, where no network exists.
    pub cut: Option<CutCertificate>,
    #[serde(rename = "C")]
    pub c: Vec<Vertex>,
    #[serde(rename = "F")]
    pub f_edges: Vec<Edge>,
    pub value: u64,
    pub objective: f64,
    /// Cut value over `r * sum_x sqrt(d(x))`; at most 2 when the
    /// charged-degree accounting is right.
    pub charge_ratio: Option<f64>,
    pub valid: bool,
    pub vacuous: bool,
}

/// Builds the cut behind the coloring-to-cut reduction: a violated edge
/// is cut when its charged endpoint has degree at most `r^2`, and the
/// charged vertex is cut otherwise. Verifies the result separates the
/// 1-set from the 0-set; an invalid cut is reported, not raised.
pub fn coloring_to_cut(
    f: &BooleanFunction,
    chi: &EdgeColoring,
    r: u64,
) -> Result<ColoringCutRecord, Error> {
    if r == 0 {
        return Err(Error::Config("the capacity scale r must be at least 1".into()));
    }
    check_domain(f, chi)?;
    let d = f.dimension();
    let r2 = r * r;
    let deg = charged_degree_table(f, chi);
    let mut c = Vec::new();
    for (code, &k) in deg.iter().enumerate() {
        if k as u64 > r2 {
            c.push(d.vertex(code as u32).unwrap());
        }
    }
    let mut f_edges = Vec::new();
    for (e, color) in chi.iter() {
        let charged = if color { e.lo() } else { e.hi() };
        if deg[charged.bits() as usize] as u64 <= r2 {
            f_edges.push(*e);
        }
    }
    let value = f_edges.len() as u64 + r2 * c.len() as u64;
    let objective = talagrand_objective(f, chi)?;
    let sqrt_total = objective * d.vertex_count() as f64;
    let charge_ratio = (sqrt_total > 0.0).then(|| value as f64 / (r as f64 * sqrt_total));
    let ones = f.level_set(true);
    let zeros = f.level_set(false);
    if ones.is_empty() || zeros.is_empty() {
        debug_assert!(c.is_empty() && f_edges.is_empty());
        return Ok(ColoringCutRecord {
            cut: None,
            c,
            f_edges,
            value,
            objective,
            charge_ratio,
            valid: true,
            vacuous: true,
        });
    }
    let problem = FlowProblem::on_full_cube(
        d,
        &ones,
        &zeros,
        CapMap::uniform(Capacity::Finite(r2)),
        CapMap::uniform(unit()),
    )?;
    let cut = CutCertificate::new(&problem, &c, &f_edges)?;
    debug_assert_eq!(cut.value(), Capacity::Finite(value));
    let valid = match partition_by_cut(&problem, &cut) {
        Ok(_) => true,
        Err(Error::InvalidCut { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(ColoringCutRecord {
        cut: Some(cut),
        c,
        f_edges,
        value,
        objective,
        charge_ratio,
        valid,
        vacuous: false,
    })
}

/// Which conjecture a search exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conjecture {
    /// The r-collection routing conjecture on level matched pairs.
    Glr,
    /// The square-capacity flow conjecture on vertex subsets.
    Rout,
}

/// Instance source for a search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Exhaustive,
    Random { count: u64, seed: u64 },
}

/// A search configuration: conjecture, dimension, instance source, and
/// the level-pair size cap (used by the pair conjecture only).
#[derive(Clone, Copy, Debug)]
pub struct SearchSpec {
    pub conjecture: Conjecture,
    pub d: Dimension,
    pub generator: Generator,
    pub max_size: usize,
}

impl SearchSpec {
    pub fn new(conjecture: Conjecture, d: Dimension, generator: Generator) -> Self {
        SearchSpec {
            conjecture,
            d,
            generator,
            max_size: 6,
        }
    }
}

/// An instance a search visited, in replayable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchWitness {
    Glr(MatchedPair),
    Rout {
        d: usize,
        #[serde(rename = "S")]
        set: Vec<Vertex>,
    },
}

/// A failed instance with the failing signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchFailure {
    pub instance: SearchWitness,
    pub reason: String,
}

/// An exact ratio in serialized form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioParts {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RatioParts {
    fn from(q: Rational) -> Self {
        RatioParts {
            num: *q.numer(),
            den: *q.denom(),
        }
    }
}

impl From<RatioParts> for Rational {
    fn from(p: RatioParts) -> Self {
        Rational::new(p.num, p.den)
    }
}

/// Aggregated outcome of a conjecture search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub conjecture: Conjecture,
    pub seed: u64,
    pub instances: u64,
    pub min_ratio: Option<RatioParts>,
    pub witness: Option<SearchWitness>,
    pub failures: Vec<SearchFailure>,
}

impl ConjectureReport {
    /// One CSV row (with header) summarizing the report.
    pub fn csv_summary(&self) -> String {
        let name = match self.conjecture {
            Conjecture::Glr => "glr",
            Conjecture::Rout => "rout",
        };
        let (num, den) = match self.min_ratio {
            Some(r) => (r.num.to_string(), r.den.to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "conjecture,seed,instances,min_ratio_num,min_ratio_den,failures\n{},{},{},{},{},{}\n",
            name,
            self.seed,
            self.instances,
            num,
            den,
            self.failures.len()
        )
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

fn random_subset(d: Dimension, rng: &mut ChaCha8Rng) -> Vec<Vertex> {
    loop {
        let picked: Vec<Vertex> = (0..d.vertex_count() as u32)
            .filter(|_| rng.gen::<bool>())
            .map(|code| d.vertex(code).unwrap())
            .collect();
        if !picked.is_empty() && picked.len() < d.vertex_count() {
            return picked;
        }
    }
}

fn random_layer_subset(pool: &[Vertex], size: usize, rng: &mut ChaCha8Rng) -> Vec<Vertex> {
    let mut pool = pool.to_vec();
    for k in 0..size {
        let pick = rng.gen_range(k..pool.len());
        pool.swap(k, pick);
    }
    pool.truncate(size);
    pool.sort_unstable();
    pool
}

fn random_level_pair(d: Dimension, max_size: usize, rng: &mut ChaCha8Rng) -> MatchedPair {
    loop {
        let i = rng.gen_range(0..d.get());
        let j = rng.gen_range(i + 1..=d.get());
        let li = layer(d, i).unwrap();
        let lj = layer(d, j).unwrap();
        let cap = max_size.min(li.len()).min(lj.len());
        let size = rng.gen_range(1..=cap);
        let s = random_layer_subset(&li, size, rng);
        let t = random_layer_subset(&lj, size, rng);
        if let Some(pairs) = crate::matched_pairs::canonical_matching(&s, &t) {
            return MatchedPair::new(d, pairs).unwrap();
        }
    }
}

fn glr_instances(spec: &SearchSpec) -> Result<Vec<MatchedPair>, Error> {
    match spec.generator {
        Generator::Exhaustive => {
            let d = spec.d;
            let mut out = Vec::new();
            for i in 0..d.get() {
                for j in i + 1..=d.get() {
                    let size_cap = spec
                        .max_size
                        .min(binomial(d.get(), i))
                        .min(binomial(d.get(), j));
                    for pair in
                        crate::matched_pairs::enumerate_level_matched_pairs(d, i, j, size_cap)?
                    {
                        out.push(pair);
                    }
                }
            }
            Ok(out)
        }
        Generator::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| random_level_pair(spec.d, spec.max_size, &mut rng))
                .collect())
        }
    }
}

fn rout_instances(spec: &SearchSpec) -> Vec<Vec<Vertex>> {
    match spec.generator {
        Generator::Exhaustive => {
            let d = spec.d;
            let full = (1u64 << d.vertex_count()) - 1;
            (1..full)
                .map(|mask| {
                    (0..d.vertex_count() as u32)
                        .filter(|code| mask >> code & 1 == 1)
                        .map(|code| d.vertex(code).unwrap())
                        .collect()
                })
                .collect()
        }
        Generator::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| random_subset(spec.d, &mut rng)).collect()
        }
    }
}

fn validate_spec(spec: &SearchSpec) -> Result<(), Error> {
    if let Generator::Random { count, .. } = spec.generator {
        if count == 0 {
            return Err(Error::Config("instance budget must be at least 1".into()));
        }
    }
    match spec.conjecture {
        Conjecture::Glr => {
            if !(1..=6).contains(&spec.max_size) {
                return Err(Error::Config(format!(
                    "level-pair size cap must lie in 1..=6, got {}",
                    spec.max_size
                )));
            }
            if spec.generator == Generator::Exhaustive && spec.d.get() > 4 {
                return Err(Error::Config(format!(
                    "exhaustive level-pair search needs d <= 4, got d = {}",
                    spec.d.get()
                )));
            }
        }
        Conjecture::Rout => {
            if spec.generator == Generator::Exhaustive && spec.d.get() > 3 {
                return Err(Error::Config(format!(
                    "exhaustive subset search needs d <= 3, got d = {}",
                    spec.d.get()
                )));
            }
        }
    }
    Ok(())
}

/// Streams instances from the configured generator through the
/// conjecture tester and folds the records into a report. The fold
/// visits instances in canonical order, so a fixed seed reproduces the
/// report byte for byte.
pub fn run_search(spec: &SearchSpec) -> Result<ConjectureReport, Error> {
    validate_spec(spec)?;
    let seed = match spec.generator {
        Generator::Exhaustive => 0,
        Generator::Random { seed, .. } => seed,
    };
    let mut min_ratio: Option<Rational> = None;
    let mut witness = None;
    let mut failures = Vec::new();
    let instances;
    match spec.conjecture {
        Conjecture::Glr => {
            let pairs = glr_instances(spec)?;
            instances = pairs.len() as u64;
            let records = pairs
                .par_iter()
                .map(test_conj_glr)
                .collect::<Result<Vec<_>, _>>()?;
            for record in records {
                if min_ratio.is_none_or(|best| record.ratio < best) {
                    min_ratio = Some(record.ratio);
                    witness = Some(SearchWitness::Glr(record.pair.clone()));
                }
                if !record.flow_pass {
                    failures.push(SearchFailure {
                        instance: SearchWitness::Glr(record.pair.clone()),
                        reason: format!(
                            "flow {} below the required {}",
                            record.flow, record.required
                        ),
                    });
                }
                if let SplitOutcome::Failed(reason) = &record.split {
                    failures.push(SearchFailure {
                        instance: SearchWitness::Glr(record.pair.clone()),
                        reason: format!("split failed: {reason}"),
                    });
                }
            }
        }
        Conjecture::Rout => {
            let sets = rout_instances(spec);
            instances = sets.len() as u64;
            let records = sets
                .par_iter()
                .map(|set| test_conj_rout(spec.d, set))
                .collect::<Result<Vec<_>, _>>()?;
            for record in records {
                let Some(ratio) = record.primary_ratio() else {
                    continue;
                };
                if min_ratio.is_none_or(|best| ratio < best) {
                    min_ratio = Some(ratio);
                    witness = Some(SearchWitness::Rout {
                        d: record.d,
                        set: record.set.clone(),
                    });
                }
            }
        }
    }
    Ok(ConjectureReport {
        conjecture: spec.conjecture,
        seed,
        instances,
        min_ratio: min_ratio.map(RatioParts::from),
        witness,
        failures,
    })
}

/// Re-runs the tester on a report's witness instance and returns the
/// ratio it reproduces.
pub fn replay_witness(report: &ConjectureReport) -> Result<Option<Rational>, Error> {
    match &report.witness {
        None => Ok(None),
        Some(SearchWitness::Glr(pair)) => Ok(Some(test_conj_glr(pair)?.ratio)),
        Some(SearchWitness::Rout { d, set }) => {
            let d = Dimension::new(*d)?;
            Ok(test_conj_rout(d, set)?.primary_ratio())
        }
    }
}

/// Aggregate outcome of a proven-theorem sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremSweep {
    pub d: usize,
    pub mode: String,
    pub seed: u64,
    pub instances: u64,
    pub flowpoin_failures: u64,
    pub cspoin_failures: u64,
    pub cslr_failures: u64,
    pub sachdeva_failures: u64,
    /// Smallest observed `flow * r / dirvol` for the vertex-capacitated
    /// bound, with the subset attaining it.
    pub min_cslr_empirical: Option<RatioParts>,
    pub min_cslr_witness: Option<SearchWitness>,
    pub failures: Vec<SearchFailure>,
}

impl TheoremSweep {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

struct InstanceOutcome {
    set: Vec<Vertex>,
    flowpoin_pass: bool,
    cspoin_pass: bool,
    cslr_pass: bool,
    sachdeva_pass: Option<bool>,
    empirical: Option<Rational>,
    reasons: Vec<String>,
}

fn check_instance(d: Dimension, set: &[Vertex]) -> Result<InstanceOutcome, Error> {
    let flowpoin = check_thm_flowpoin(d, set)?;
    let cspoin = check_thm_cspoin(d, set)?;
    let cslr = check_thm_cslr(d, set)?;
    let (_, cert) = directed_volume(d, set)?;
    let sachdeva = if cert.pair().is_empty() {
        None
    } else {
        Some(check_thm_sachdeva(cert.pair())?)
    };
    let mut reasons = Vec::new();
    if !flowpoin.pass {
        reasons.push(format!(
            "edge-capacitated flow {} below directed volume {}",
            flowpoin.flow, flowpoin.dirvol
        ));
    }
    if !cspoin.pass {
        reasons.push(format!(
            "edge-capacitated flow {} below separation bound {}",
            cspoin.flow, cspoin.bound
        ));
    }
    if !cslr.pass {
        reasons.push(format!(
            "vertex-capacitated flow {} below bound {}",
            cslr.flow, cslr.bound
        ));
    }
    if let Some(record) = &sachdeva {
        if !record.pass {
            reasons.push(format!(
                "pair flow {} below the pair size {}",
                record.flow, record.required
            ));
        }
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    Ok(InstanceOutcome {
        set: sorted,
        flowpoin_pass: flowpoin.pass,
        cspoin_pass: cspoin.pass,
        cslr_pass: cslr.pass,
        sachdeva_pass: sachdeva.map(|r| r.pass),
        empirical: cslr.empirical,
        reasons,
    })
}

/// Sweeps the four proven flow bounds over subsets: every proper
/// nonempty subset when exhaustive (`d <= 3`), or seeded random subsets.
pub fn sweep_theorems(d: Dimension, generator: Generator) -> Result<TheoremSweep, Error> {
    let (sets, mode, seed) = match generator {
        Generator::Exhaustive => {
            if d.get() > 3 {
                return Err(Error::Config(format!(
                    "exhaustive theorem sweep needs d <= 3, got d = {}",
                    d.get()
                )));
            }
            let spec = SearchSpec::new(Conjecture::Rout, d, Generator::Exhaustive);
            (rout_instances(&spec), "exhaustive", 0)
        }
        Generator::Random { count, seed } => {
            if count == 0 {
                return Err(Error::Config("instance budget must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sets = (0..count).map(|_| random_subset(d, &mut rng)).collect();
            (sets, "random", seed)
        }
    };
    let outcomes = sets
        .par_iter()
        .map(|set| check_instance(d, set))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sweep = TheoremSweep {
        d: d.get(),
        mode: mode.to_string(),
        seed,
        instances: outcomes.len() as u64,
        flowpoin_failures: 0,
        cspoin_failures: 0,
        cslr_failures: 0,
        sachdeva_failures: 0,
        min_cslr_empirical: None,
        min_cslr_witness: None,
        failures: Vec::new(),
    };
    let mut min_empirical: Option<Rational> = None;
    for outcome in outcomes {
        sweep.flowpoin_failures += u64::from(!outcome.flowpoin_pass);
        sweep.cspoin_failures += u64::from(!outcome.cspoin_pass);
        sweep.cslr_failures += u64::from(!outcome.cslr_pass);
        sweep.sachdeva_failures += u64::from(outcome.sachdeva_pass == Some(false));
        if let Some(e) = outcome.empirical {
            if min_empirical.is_none_or(|best| e < best) {
                min_empirical = Some(e);
                sweep.min_cslr_witness = Some(SearchWitness::Rout {
                    d: d.get(),
                    set: outcome.set.clone(),
                });
            }
        }
        for reason in outcome.reasons {
            sweep.failures.push(SearchFailure {
                instance: SearchWitness::Rout {
                    d: d.get(),
                    set: outcome.set.clone(),
                },
                reason,
            });
        }
    }
    sweep.min_cslr_empirical = min_empirical.map(RatioParts::from);
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn verts(names: &[&str]) -> Vec<Vertex> {
        names.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn pair(d: usize, pairs: &[(&str, &str)]) -> MatchedPair {
        MatchedPair::new(
            dim(d),
            pairs
                .iter()
                .map(|(s, t)| (s.parse().unwrap(), t.parse().unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn flow_bound_on_square_sets() {
        let r = check_thm_flowpoin(dim(2), &verts(&["00"])).unwrap();
        assert!(r.pass && r.flow >= 1 && r.dirvol == 1);
        let r = check_thm_flowpoin(dim(2), &verts(&["00", "01"])).unwrap();
        assert_eq!((r.flow, r.dirvol, r.pass), (2, 2, true));
    }

    #[test]
    fn flow_bound_on_the_lower_half() {
        let r = check_thm_flowpoin(dim(3), &verts(&["000", "010", "001", "011"])).unwrap();
        assert_eq!((r.flow, r.dirvol, r.pass), (4, 4, true));
    }

    #[test]
    fn separation_bound_on_corners() {
        let r = check_thm_cspoin(dim(2), &verts(&["00"])).unwrap();
        assert_eq!(r.flow, 2);
        assert_eq!(r.bound, Rational::from_integer(1));
        assert!(r.pass && !r.vacuous);
        let r = check_thm_cspoin(dim(3), &verts(&["000"])).unwrap();
        assert_eq!(r.flow, 3);
        assert_eq!(r.r, Some(Rational::from_integer(1)));
        assert!(r.pass);
    }

    #[test]
    fn zero_volume_passes_vacuously() {
        let r = check_thm_cspoin(dim(2), &verts(&["11"])).unwrap();
        assert!(r.pass && r.vacuous && r.r.is_none());
        let r = check_thm_cslr(dim(2), &verts(&["11"])).unwrap();
        assert!(r.pass && r.vacuous && r.empirical.is_none());
    }

    #[test]
    fn vertex_bound_on_corners() {
        let r = check_thm_cslr(dim(2), &verts(&["00"])).unwrap();
        assert_eq!(r.flow, 1);
        assert_eq!(r.bound, Rational::new(1, 32));
        assert_eq!(r.empirical, Some(Rational::from_integer(1)));
        assert!(r.pass);
        let r = check_thm_cslr(dim(3), &verts(&["000"])).unwrap();
        assert_eq!(r.flow, 1);
        assert!(r.pass);
    }

    #[test]
    fn collections_on_the_cube_diagonal() {
        let record = test_conj_glr(&pair(3, &[("000", "111")])).unwrap();
        assert_eq!((record.r, record.flow, record.required), (3, 3, 3));
        assert_eq!(record.ratio, Rational::from_integer(1));
        assert!(record.flow_pass);
        let SplitOutcome::Split(collections) = &record.split else {
            panic!("split expected, got {:?}", record.split);
        };
        assert_eq!(collections.len(), 3);
        for sol in collections {
            assert_eq!(sol.len(), 1);
        }
        let mut edges = BTreeSet::new();
        for sol in collections {
            for path in sol.paths() {
                for pair in path.windows(2) {
                    assert!(edges.insert(Edge::between(pair[0], pair[1]).unwrap()));
                }
            }
        }
    }

    #[test]
    fn small_gaps_reduce_to_the_proven_theorems() {
        let record = test_conj_glr(&pair(3, &[("001", "011")])).unwrap();
        assert_eq!((record.r, record.flow), (1, 1));
        assert!(record.flow_pass && record.split.succeeded());

        let record = test_conj_glr(&pair(2, &[("00", "11")])).unwrap();
        assert_eq!((record.r, record.flow, record.required), (2, 2, 2));
        let SplitOutcome::Split(collections) = &record.split else {
            panic!("split expected");
        };
        assert_eq!(collections.len(), 2);
    }

    #[test]
    fn collections_need_level_pairs() {
        let err = test_conj_glr(&pair(3, &[("000", "011"), ("100", "111")])).unwrap_err();
        assert!(matches!(err, Error::LevelsRequired));
    }

    #[test]
    fn square_capacity_on_a_corner() {
        let record = test_conj_rout(dim(2), &verts(&["00"])).unwrap();
        assert_eq!(record.dirvol, 1);
        assert_eq!(record.r, Some(Rational::from_integer(1)));
        assert_eq!(record.runs.len(), 1);
        assert_eq!((record.runs[0].vcap, record.runs[0].flow), (1, 1));
        assert_eq!(record.runs[0].ratio, Rational::from_integer(1));
        assert_eq!(record.primary_ratio(), Some(Rational::from_integer(1)));
    }

    #[test]
    fn fractional_separation_runs_both_caps() {
        let record = test_conj_rout(dim(3), &verts(&["000", "100", "010", "001"])).unwrap();
        assert_eq!(record.dirvol, 4);
        assert_eq!(record.r, Some(Rational::new(3, 2)));
        assert_eq!(record.runs.len(), 2);
        assert_eq!((record.runs[0].vcap, record.runs[0].flow), (3, 6));
        assert_eq!(record.runs[0].ratio, Rational::from_integer(1));
        assert_eq!((record.runs[1].vcap, record.runs[1].flow), (1, 3));
        assert_eq!(record.runs[1].ratio, Rational::new(1, 2));
    }

    #[test]
    fn restricted_sinks_use_the_pair_distance() {
        let record = test_conj_rout_pair(&pair(3, &[("000", "111")])).unwrap();
        assert_eq!(record.r, Some(Rational::from_integer(3)));
        assert_eq!(record.runs.len(), 1);
        assert_eq!(record.runs[0].vcap, 9);
        assert_eq!(record.runs[0].flow, 3);
        assert_eq!(record.runs[0].ratio, Rational::from_integer(1));
    }

    #[test]
    fn vacuous_square_capacity_instances() {
        let record = test_conj_rout(dim(2), &verts(&["11"])).unwrap();
        assert!(record.vacuous && record.runs.is_empty());
        assert_eq!(record.primary_ratio(), None);
    }

    #[test]
    fn edge_disjoint_paths_for_disjoint_pairs() {
        let record = check_thm_sachdeva(&pair(2, &[("00", "11")])).unwrap();
        assert!(record.pass);
        assert_eq!((record.flow, record.required), (2, 1));

        let record = check_thm_sachdeva(&pair(
            3,
            &[("001", "011"), ("010", "111"), ("100", "101")],
        ))
        .unwrap();
        assert!(record.pass && record.flow >= 3);
    }

    #[test]
    fn overlapping_sides_are_rejected() {
        let p = pair(2, &[("00", "01"), ("01", "11")]);
        let err = check_thm_sachdeva(&p).unwrap_err();
        assert!(matches!(err, Error::TerminalOverlap { .. }), "{err}");
    }

    #[test]
    fn coloring_cut_keeps_light_edges() {
        let f: BooleanFunction = "1010".parse().unwrap();
        let chi = EdgeColoring::uniform(&f, true);
        let record = coloring_to_cut(&f, &chi, 1).unwrap();
        assert!(record.valid && !record.vacuous);
        assert!(record.c.is_empty());
        assert_eq!(record.f_edges.len(), 2);
        assert_eq!(record.value, 2);
        assert_eq!(record.charge_ratio, Some(1.0));
    }

    #[test]
    fn coloring_cut_promotes_heavy_vertices() {
        let f: BooleanFunction = "1000".parse().unwrap();
        let chi = EdgeColoring::uniform(&f, true);
        let record = coloring_to_cut(&f, &chi, 1).unwrap();
        assert!(record.valid);
        assert_eq!(record.c, verts(&["00"]));
        assert!(record.f_edges.is_empty());
        assert_eq!(record.value, 1);
    }

    #[test]
    fn monotone_functions_cut_nothing() {
        let f: BooleanFunction = "0001".parse().unwrap();
        let chi = EdgeColoring::uniform(&f, true);
        let record = coloring_to_cut(&f, &chi, 1).unwrap();
        assert!(record.valid && !record.vacuous);
        assert_eq!(record.value, 0);
        assert!(record.cut.is_some());

        let constant: BooleanFunction = "0000".parse().unwrap();
        let chi = EdgeColoring::uniform(&constant, true);
        let record = coloring_to_cut(&constant, &chi, 1).unwrap();
        assert!(record.valid && record.vacuous && record.cut.is_none());
    }

    #[test]
    fn coloring_cut_checks_inputs() {
        let f: BooleanFunction = "1010".parse().unwrap();
        let other: BooleanFunction = "1000".parse().unwrap();
        let chi = EdgeColoring::uniform(&other, true);
        assert!(matches!(
            coloring_to_cut(&f, &chi, 1),
            Err(Error::ColoringDomain(_))
        ));
        let chi = EdgeColoring::uniform(&f, true);
        assert!(matches!(
            coloring_to_cut(&f, &chi, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn search_specs_are_validated_up_front() {
        let glr = SearchSpec::new(Conjecture::Glr, dim(5), Generator::Exhaustive);
        assert!(matches!(run_search(&glr), Err(Error::Config(_))));
        let rout = SearchSpec::new(Conjecture::Rout, dim(4), Generator::Exhaustive);
        assert!(matches!(run_search(&rout), Err(Error::Config(_))));
        let empty = SearchSpec::new(
            Conjecture::Rout,
            dim(3),
            Generator::Random { count: 0, seed: 0 },
        );
        assert!(matches!(run_search(&empty), Err(Error::Config(_))));
        let mut oversized = SearchSpec::new(Conjecture::Glr, dim(3), Generator::Exhaustive);
        oversized.max_size = 7;
        assert!(matches!(run_search(&oversized), Err(Error::Config(_))));
    }

    #[test]
    fn exhaustive_pair_search_on_the_square() {
        let spec = SearchSpec::new(Conjecture::Glr, dim(2), Generator::Exhaustive);
        let report = run_search(&spec).unwrap();
        assert_eq!(report.instances, 5);
        assert!(report.failures.is_empty());
        assert_eq!(report.min_ratio, Some(RatioParts { num: 1, den: 1 }));
        let replayed = replay_witness(&report).unwrap();
        assert_eq!(replayed, report.min_ratio.map(Rational::from));
    }

    #[test]
    fn exhaustive_subset_search_on_the_square() {
        let spec = SearchSpec::new(Conjecture::Rout, dim(2), Generator::Exhaustive);
        let report = run_search(&spec).unwrap();
        assert_eq!(report.instances, 14);
        assert!(report.failures.is_empty());
        let min = report.min_ratio.expect("non-vacuous instances exist");
        assert!(min.num > 0);
        let replayed = replay_witness(&report).unwrap();
        assert_eq!(replayed, Some(Rational::from(min)));
    }

    #[test]
    fn random_searches_reproduce_reports() {
        for conjecture in [Conjecture::Glr, Conjecture::Rout] {
            let spec = SearchSpec::new(
                conjecture,
                dim(4),
                Generator::Random { count: 40, seed: 7 },
            );
            let a = run_search(&spec).unwrap();
            let b = run_search(&spec).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
            assert_eq!(a.instances, 40);
            assert_eq!(a.seed, 7);
            let replayed = replay_witness(&a).unwrap();
            assert_eq!(replayed, a.min_ratio.map(Rational::from));
        }
    }

    #[test]
    fn report_serde_round_trips() {
        let spec = SearchSpec::new(Conjecture::Glr, dim(2), Generator::Exhaustive);
        let report = run_search(&spec).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with("{\"conjecture\":\"glr\",\"seed\":0,\"instances\":5,"));
        let back: ConjectureReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(matches!(back.witness, Some(SearchWitness::Glr(_))));

        let spec = SearchSpec::new(Conjecture::Rout, dim(2), Generator::Exhaustive);
        let report = run_search(&spec).unwrap();
        let back: ConjectureReport =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert!(matches!(back.witness, Some(SearchWitness::Rout { .. })));
        assert_eq!(back, report);
    }

    #[test]
    fn csv_summary_shape() {
        let spec = SearchSpec::new(Conjecture::Rout, dim(2), Generator::Exhaustive);
        let report = run_search(&spec).unwrap();
        let csv = report.csv_summary();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("conjecture,seed,instances,min_ratio_num,min_ratio_den,failures")
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("rout,0,14,"), "{row}");
    }

    #[test]
    fn theorem_sweep_on_the_square() {
        let sweep = sweep_theorems(dim(2), Generator::Exhaustive).unwrap();
        assert_eq!(sweep.instances, 14);
        assert!(sweep.all_pass());
        assert_eq!(sweep.flowpoin_failures, 0);
        assert_eq!(sweep.cspoin_failures, 0);
        assert_eq!(sweep.cslr_failures, 0);
        assert_eq!(sweep.sachdeva_failures, 0);
        let min = sweep.min_cslr_empirical.expect("non-vacuous instances");
        assert!(min.num > 0);
        assert!(sweep.min_cslr_witness.is_some());
    }

    #[test]
    fn random_theorem_sweep_is_deterministic() {
        let gen = Generator::Random { count: 25, seed: 3 };
        let a = sweep_theorems(dim(4), gen).unwrap();
        let b = sweep_theorems(dim(4), gen).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.all_pass());
        assert_eq!(a.instances, 25);
        assert_eq!(a.mode, "random");
    }

    #[test]
    fn sweep_dimension_guard() {
        assert!(matches!(
            sweep_theorems(dim(4), Generator::Exhaustive),
            Err(Error::Config(_))
        ));
    }
}
