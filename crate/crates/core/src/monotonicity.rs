//! Boolean functions on the directed hypercube and their isoperimetric
//! quantities: violated edges, directed influence, distance to
//! monotonicity, violated-edge matchings, and colored square-root
//! objectives.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hypercube::{Dimension, Edge, Vertex};
use crate::matching::hopcroft_karp;
use crate::{Error, Rational};

/// Exhaustive coloring minimization is refused above this many violated
/// edges.
pub const EXHAUSTIVE_EDGE_CAP: usize = 24;

/// A Boolean function on `{0,1}^d`, stored as a bit table of length
/// `2^d` indexed by the vertex integer encoding.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    d: Dimension,
    words: Vec<u64>,
}

impl BooleanFunction {
    fn blank(d: Dimension) -> Self {
        let words = vec![0u64; d.vertex_count().div_ceil(64)];
        BooleanFunction { d, words }
    }

    /// Builds a function from its bit table; `values[i]` is the value on
    /// the vertex with integer encoding `i`.
    pub fn from_values(d: Dimension, values: &[bool]) -> Result<Self, Error> {
        if values.len() != d.vertex_count() {
            return Err(Error::Parse(format!(
                "table holds {} values, expected 2^d = {}",
                values.len(),
                d.vertex_count()
            )));
        }
        let mut f = Self::blank(d);
        for (code, &value) in values.iter().enumerate() {
            if value {
                f.words[code >> 6] |= 1 << (code & 63);
            }
        }
        Ok(f)
    }

    /// Builds the indicator of a vertex subset.
    pub fn from_indicator(d: Dimension, subset: &[Vertex]) -> Result<Self, Error> {
        let mut f = Self::blank(d);
        for v in subset {
            if v.dimension() != d {
                return Err(Error::DimensionMismatch {
                    left: d.get(),
                    right: v.dimension().get(),
                });
            }
            f.words[(v.bits() >> 6) as usize] |= 1 << (v.bits() & 63);
        }
        Ok(f)
    }

    /// Builds a function at `d <= 6` from the integer whose bit `i` is
    /// the value on the vertex with encoding `i`.
    pub fn from_word(d: Dimension, word: u64) -> Result<Self, Error> {
        if d.get() > 6 {
            return Err(Error::Config(format!(
                "word construction needs 2^d <= 64 table bits, got d = {}",
                d.get()
            )));
        }
        let mask = if d.vertex_count() == 64 {
            u64::MAX
        } else {
            (1u64 << d.vertex_count()) - 1
        };
        Ok(BooleanFunction {
            d,
            words: vec![word & mask],
        })
    }

    /// Draws a uniformly random function.
    pub fn random(d: Dimension, rng: &mut impl Rng) -> Self {
        let mut f = Self::blank(d);
        for word in &mut f.words {
            *word = rng.gen();
        }
        let tail = d.vertex_count() & 63;
        if tail != 0 {
            *f.words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        f
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    /// The value on the vertex with integer encoding `code`.
    pub fn value_at(&self, code: u32) -> bool {
        debug_assert!((code as usize) < self.d.vertex_count());
        self.words[(code >> 6) as usize] >> (code & 63) & 1 == 1
    }

    pub fn value(&self, v: &Vertex) -> Result<bool, Error> {
        if v.dimension() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d.get(),
                right: v.dimension().get(),
            });
        }
        Ok(self.value_at(v.bits()))
    }

    /// The vertices on which the function equals `value`.
    pub fn level_set(&self, value: bool) -> Vec<Vertex> {
        (0..self.d.vertex_count() as u32)
            .filter(|&code| self.value_at(code) == value)
            .map(|code| self.d.vertex(code).unwrap())
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        for lo in 0..self.d.vertex_count() as u32 {
            if !self.value_at(lo) {
                continue;
            }
            for p in 0..self.d.get() as u32 {
                let hi = lo | 1 << p;
                if hi != lo && !self.value_at(hi) {
                    return false;
                }
            }
        }
        true
    }

    /// Renders the bit table as a 0/1 string indexed by vertex encoding.
    pub fn table_string(&self) -> String {
        (0..self.d.vertex_count() as u32)
            .map(|code| if self.value_at(code) { '1' } else { '0' })
            .collect()
    }
}

fn table_dimension(bits: usize) -> Result<Dimension, Error> {
    if bits.is_power_of_two() {
        if let Ok(dim) = Dimension::new(bits.trailing_zeros() as usize) {
            return Ok(dim);
        }
    }
    Err(Error::Parse(format!(
        "table holds {bits} values, expected 2^d for some d in 2..=20"
    )))
}

impl FromStr for BooleanFunction {
    type Err = Error;

    /// Parses a bit table: either a 0/1 string of length `2^d`, or a
    /// `0x`-prefixed hex string whose digits expand (high bit first) to
    /// such a table.
    fn from_str(s: &str) -> Result<Self, Error> {
        let expanded;
        let bits = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            expanded = hex
                .chars()
                .map(|c| {
                    c.to_digit(16).ok_or_else(|| {
                        Error::Parse(format!("bad hex digit {c:?} in function table"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .flat_map(|digit| (0..4).rev().map(move |p| digit >> p & 1 == 1))
                .collect::<Vec<bool>>();
            &expanded
        } else {
            expanded = s
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::Parse(format!(
                        "bad character {other:?} in function table"
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            &expanded
        };
        let d = table_dimension(bits.len())?;
        BooleanFunction::from_values(d, bits)
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table_string())
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({self})")
    }
}

impl Serialize for BooleanFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.table_string())
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// The edges `x -> y` of the hypercube with `f(x) = 1` and `f(y) = 0`,
/// ascending.
pub fn violated_edges(f: &BooleanFunction) -> Vec<Edge> {
    let d = f.dimension();
    let mut edges = Vec::new();
    for lo in 0..d.vertex_count() as u32 {
        if !f.value_at(lo) {
            continue;
        }
        for r in 1..=d.get() {
            let hi = lo | 1 << (r - 1);
            if hi != lo && !f.value_at(hi) {
                edges.push(Edge::new(d.vertex(lo).unwrap(), r).unwrap());
            }
        }
    }
    edges
}

/// The total directed influence `2^{-d} * sum_x I^+(x)`, where `I^+(x)`
/// counts the violated edges incident to `x`; every violated edge
/// contributes at both endpoints.
pub fn directed_influence(f: &BooleanFunction) -> Rational {
    let incidences = 2 * violated_edges(f).len() as i64;
    Rational::new(incidences, f.dimension().vertex_count() as i64)
}

/// The distance to monotonicity: the maximum matching between 1-points
/// and 0-points joined when `x < y`, divided by `2^d`.
pub fn distance_to_monotonicity(f: &BooleanFunction) -> Rational {
    let d = f.dimension();
    let ones: Vec<u32> = (0..d.vertex_count() as u32).filter(|&c| f.value_at(c)).collect();
    let zeros: Vec<u32> = (0..d.vertex_count() as u32)
        .filter(|&c| !f.value_at(c))
        .collect();
    let one_index: BTreeMap<u32, usize> = ones.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut adj = vec![Vec::new(); ones.len()];
    for (j, &y) in zeros.iter().enumerate() {
        if y == 0 {
            continue;
        }
        let mut s = (y - 1) & y;
        loop {
            if let Some(&i) = one_index.get(&s) {
                adj[i].push(j);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & y;
        }
    }
    let (matched, _) = hopcroft_karp(ones.len(), zeros.len(), &adj);
    Rational::new(matched as i64, d.vertex_count() as i64)
}

fn violated_edge_matching(f: &BooleanFunction) -> usize {
    let edges = violated_edges(f);
    let mut evens = BTreeMap::new();
    let mut odds = BTreeMap::new();
    for e in &edges {
        let (even, odd) = if e.lo().layer() % 2 == 0 {
            (e.lo(), e.hi())
        } else {
            (e.hi(), e.lo())
        };
        let next = evens.len();
        evens.entry(even).or_insert(next);
        let next = odds.len();
        odds.entry(odd).or_insert(next);
    }
    let mut adj = vec![Vec::new(); evens.len()];
    for e in &edges {
        let (even, odd) = if e.lo().layer() % 2 == 0 {
            (e.lo(), e.hi())
        } else {
            (e.hi(), e.lo())
        };
        adj[evens[&even]].push(odds[&odd]);
    }
    hopcroft_karp(evens.len(), odds.len(), &adj).0
}

/// The size of a maximum vertex-disjoint set of violated edges.
pub fn gamma_plus_count(f: &BooleanFunction) -> usize {
    violated_edge_matching(f)
}

/// The maximum vertex-disjoint set of violated edges, divided by `2^d`.
pub fn gamma_plus(f: &BooleanFunction) -> Rational {
    Rational::new(
        violated_edge_matching(f) as i64,
        f.dimension().vertex_count() as i64,
    )
}

/// A two-coloring whose domain is exactly the violated edges of a
/// companion function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeColoring {
    color: BTreeMap<Edge, bool>,
}

impl EdgeColoring {
    /// Wraps an assignment after checking its domain is exactly the
    /// violated edges of `f`.
    pub fn new(f: &BooleanFunction, color: BTreeMap<Edge, bool>) -> Result<Self, Error> {
        let violated = violated_edges(f);
        if color.len() != violated.len() || !violated.iter().all(|e| color.contains_key(e)) {
            let missing = violated.iter().find(|e| !color.contains_key(e));
            let foreign = color.keys().find(|e| violated.binary_search(e).is_err());
            let detail = match (missing, foreign) {
                (Some(e), _) => format!("violated edge {e} is uncolored"),
                (None, Some(e)) => format!("{e} is not a violated edge"),
                (None, None) => unreachable!("domains of equal size differ by an element"),
            };
            return Err(Error::ColoringDomain(detail));
        }
        Ok(EdgeColoring { color })
    }

    /// Colors every violated edge of `f` with `value`.
    pub fn uniform(f: &BooleanFunction, value: bool) -> Self {
        EdgeColoring {
            color: violated_edges(f).into_iter().map(|e| (e, value)).collect(),
        }
    }

    /// Colors the violated edges of `f`, ascending, by the bits of
    /// `mask`.
    pub fn from_mask(f: &BooleanFunction, mask: u64) -> Result<Self, Error> {
        let violated = violated_edges(f);
        if violated.len() > 64 {
            return Err(Error::TooManyViolatedEdges {
                count: violated.len(),
                cap: 64,
            });
        }
        Ok(EdgeColoring {
            color: violated
                .into_iter()
                .enumerate()
                .map(|(i, e)| (e, mask >> i & 1 == 1))
                .collect(),
        })
    }

    pub fn get(&self, e: &Edge) -> Option<bool> {
        self.color.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.color.len()
    }

    pub fn is_empty(&self) -> bool {
        self.color.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, bool)> {
        self.color.iter().map(|(e, &c)| (e, c))
    }

    /// The bits of this coloring over the domain in ascending edge
    /// order.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.color.len() <= 64);
        self.color
            .values()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | (u64::from(c) << i))
    }
}

pub(crate) fn check_domain(f: &BooleanFunction, chi: &EdgeColoring) -> Result<Vec<Edge>, Error> {
    let violated = violated_edges(f);
    if chi.color.len() != violated.len() || !violated.iter().all(|e| chi.color.contains_key(e)) {
        return Err(Error::ColoringDomain(format!(
            "coloring covers {} edges, the function has {} violated edges",
            chi.color.len(),
            violated.len()
        )));
    }
    Ok(violated)
}

/// Charged degrees under a coloring, indexed by vertex encoding: a
/// violated edge with color 1 counts at its 1-endpoint, with color 0 at
/// its 0-endpoint.
pub(crate) fn charged_degree_table(f: &BooleanFunction, chi: &EdgeColoring) -> Vec<u32> {
    let mut deg = vec![0u32; f.dimension().vertex_count()];
    for (e, c) in chi.iter() {
        let charged = if c { e.lo() } else { e.hi() };
        deg[charged.bits() as usize] += 1;
    }
    deg
}

fn sqrt_sum(counts: &[u64]) -> f64 {
    counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &n)| n as f64 * (k as f64).sqrt())
        .sum()
}

/// The colored objective `2^{-d} * sum_x sqrt(d(x))`, where `d(x)`
/// counts the violated edges incident to `x` whose color equals
/// `f(x)`.
pub fn talagrand_objective(f: &BooleanFunction, chi: &EdgeColoring) -> Result<f64, Error> {
    check_domain(f, chi)?;
    let total: f64 = charged_degree_table(f, chi)
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| (k as f64).sqrt())
        .sum();
    Ok(total / f.dimension().vertex_count() as f64)
}

/// Strategy for minimizing the colored objective over all colorings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TalagrandMode {
    /// Enumerates every coloring; refused above
    /// [`EXHAUSTIVE_EDGE_CAP`] violated edges.
    Exhaustive,
    /// Seeded hill descent by single-edge recoloring, restarted from
    /// fresh random colorings.
    LocalSearch { restarts: u32, seed: u64 },
}

struct ChargeState {
    deg: Vec<u32>,
    counts: Vec<u64>,
}

impl ChargeState {
    fn new(f: &BooleanFunction, chi: &EdgeColoring) -> Self {
        let deg = charged_degree_table(f, chi);
        let mut counts = vec![0u64; deg.iter().max().copied().unwrap_or(0) as usize + 2];
        for &k in &deg {
            counts[k as usize] += 1;
        }
        ChargeState { deg, counts }
    }

    fn shift(&mut self, code: u32, delta: i32) {
        let old = self.deg[code as usize];
        let new = old.checked_add_signed(delta).unwrap();
        self.deg[code as usize] = new;
        self.counts[old as usize] -= 1;
        if new as usize + 1 >= self.counts.len() {
            self.counts.resize(new as usize + 2, 0);
        }
        self.counts[new as usize] += 1;
    }

    /// Recolors edge `e` from `old` to `!old`, moving its charge.
    fn flip(&mut self, e: &Edge, old: bool) {
        let (from, to) = if old {
            (e.lo(), e.hi())
        } else {
            (e.hi(), e.lo())
        };
        self.shift(from.bits(), -1);
        self.shift(to.bits(), 1);
    }

    fn objective(&self, vertex_count: u64) -> f64 {
        sqrt_sum(&self.counts) / vertex_count as f64
    }
}

fn exhaustive_min(f: &BooleanFunction, violated: &[Edge]) -> (f64, u64) {
    let n = violated.len();
    let vertex_count = f.dimension().vertex_count() as u64;
    let mut state = ChargeState::new(f, &EdgeColoring::from_mask(f, 0).unwrap());
    let mut best = (state.objective(vertex_count), 0u64);
    let mut gray = 0u64;
    for step in 1u64..1u64 << n {
        let bit = step.trailing_zeros() as usize;
        let old = gray >> bit & 1 == 1;
        gray ^= 1 << bit;
        state.flip(&violated[bit], old);
        let value = state.objective(vertex_count);
        if value < best.0 || (value == best.0 && gray < best.1) {
            best = (value, gray);
        }
    }
    best
}

fn descend(
    f: &BooleanFunction,
    violated: &[Edge],
    mut mask: u64,
    vertex_count: u64,
) -> (f64, u64) {
    let mut state = ChargeState::new(f, &EdgeColoring::from_mask(f, mask).unwrap());
    let mut value = state.objective(vertex_count);
    loop {
        let mut improvement: Option<(f64, usize)> = None;
        for (i, e) in violated.iter().enumerate() {
            let old = mask >> i & 1 == 1;
            state.flip(e, old);
            let candidate = state.objective(vertex_count);
            state.flip(e, !old);
            if candidate < value && improvement.is_none_or(|(best, _)| candidate < best) {
                improvement = Some((candidate, i));
            }
        }
        match improvement {
            Some((next, i)) => {
                state.flip(&violated[i], mask >> i & 1 == 1);
                mask ^= 1 << i;
                value = next;
            }
            None => return (value, mask),
        }
    }
}

/// Minimizes the colored objective over colorings of the violated
/// edges, returning the minimum and a coloring attaining it.
pub fn min_talagrand(
    f: &BooleanFunction,
    mode: TalagrandMode,
) -> Result<(f64, EdgeColoring), Error> {
    let violated = violated_edges(f);
    let (value, mask) = match mode {
        TalagrandMode::Exhaustive => {
            if violated.len() > EXHAUSTIVE_EDGE_CAP {
                return Err(Error::TooManyViolatedEdges {
                    count: violated.len(),
                    cap: EXHAUSTIVE_EDGE_CAP,
                });
            }
            exhaustive_min(f, &violated)
        }
        TalagrandMode::LocalSearch { restarts, seed } => {
            if violated.len() > 64 {
                return Err(Error::TooManyViolatedEdges {
                    count: violated.len(),
                    cap: 64,
                });
            }
            let vertex_count = f.dimension().vertex_count() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full = if violated.len() == 64 {
                u64::MAX
            } else {
                (1u64 << violated.len()) - 1
            };
            let mut best = descend(f, &violated, 0, vertex_count);
            for _ in 0..restarts {
                let start = rng.gen::<u64>() & full;
                let candidate = descend(f, &violated, start, vertex_count);
                if candidate.0 < best.0 || (candidate.0 == best.0 && candidate.1 < best.1) {
                    best = candidate;
                }
            }
            best
        }
    };
    Ok((value, EdgeColoring::from_mask(f, mask)?))
}
