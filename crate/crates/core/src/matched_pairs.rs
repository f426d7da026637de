//! Matched pairs of vertex sets, directed volume, and separation distance.
//!
//! A matched pair `(S, T; φ)` couples two equal-size vertex sets through a
//! bijection `φ : S → T` with `s ≺ φ(s)` for every source.  Matched pairs
//! are the input objects of the routing theorems; the directed volume of a
//! set measures how much of it can be matched strictly upward into its
//! complement, and the separation distance averages the layer gaps of the
//! cheapest such matching.

use serde::de::{self, Deserializer};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::PairViolation;
use crate::hypercube::{common_dimension, layer, CodeSet, Dimension, Vertex};
use crate::matching::{hopcroft_karp, min_cost_max_matching};
use crate::{Error, Rational};

/// A matched pair `(S, T; φ)`: a bijection pushing every source strictly
/// upward.  Construction validates all invariants, so a value of this type
/// is always a genuine matched pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchedPair {
    d: Dimension,
    pairs: Vec<(Vertex, Vertex)>,
}

impl MatchedPair {
    /// Builds a matched pair from `(s, φ(s))` entries, in any order.
    pub fn new(d: Dimension, pairs: Vec<(Vertex, Vertex)>) -> Result<Self, Error> {
        validate_matched_pair(d, &pairs).map_err(Error::InvalidPair)?;
        let mut pairs = pairs;
        pairs.sort_unstable();
        Ok(MatchedPair { d, pairs })
    }

    pub fn d(&self) -> Dimension {
        self.d
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(s, φ(s))` entries, ascending by source.
    pub fn pairs(&self) -> &[(Vertex, Vertex)] {
        &self.pairs
    }

    /// Sources in ascending order.
    pub fn sources(&self) -> Vec<Vertex> {
        self.pairs.iter().map(|&(s, _)| s).collect()
    }

    /// Targets in ascending order.
    pub fn targets(&self) -> Vec<Vertex> {
        let mut t: Vec<Vertex> = self.pairs.iter().map(|&(_, t)| t).collect();
        t.sort_unstable();
        t
    }

    pub fn target_of(&self, s: &Vertex) -> Option<Vertex> {
        self.pairs
            .binary_search_by(|(src, _)| src.cmp(s))
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// `Some((i, j))` when all sources sit in layer `i` and all targets in
    /// layer `j`; `None` for mixed-layer sides or the empty pair.
    pub fn levels(&self) -> Option<(usize, usize)> {
        let (first_s, first_t) = self.pairs.first()?;
        let (i, j) = (first_s.layer(), first_t.layer());
        for (s, t) in &self.pairs {
            if s.layer() != i || t.layer() != j {
                return None;
            }
        }
        Some((i, j))
    }

    /// Average layer gap `|φ(s)| - |s|` over the pair, as an exact rational.
    pub fn separation_distance(&self) -> Rational {
        separation_distance(self)
    }

    /// Whether the source and target sets share no vertex.
    pub fn sides_disjoint(&self) -> bool {
        let targets = self.targets();
        self.pairs
            .iter()
            .all(|(s, _)| targets.binary_search(s).is_err())
    }
}

/// Checks the matched-pair invariants over raw parts, reporting the first
/// violation: sources distinct, targets distinct (bijection), every source
/// strictly below its target, and all vertices in the `d`-cube.
pub fn validate_matched_pair(
    d: Dimension,
    pairs: &[(Vertex, Vertex)],
) -> Result<(), PairViolation> {
    for (s, t) in pairs {
        for v in [s, t] {
            if v.dimension() != d {
                return Err(PairViolation::WrongDimension { vertex: *v, expected: d.get() });
            }
        }
        if !s.lt(t) {
            return Err(PairViolation::NotStrictlyBelow { source: *s, target: *t });
        }
    }
    let mut sources: Vec<Vertex> = pairs.iter().map(|&(s, _)| s).collect();
    sources.sort_unstable();
    if let Some(w) = sources.windows(2).find(|w| w[0] == w[1]) {
        return Err(PairViolation::DuplicateSource(w[0]));
    }
    let mut targets: Vec<Vertex> = pairs.iter().map(|&(_, t)| t).collect();
    targets.sort_unstable();
    if let Some(w) = targets.windows(2).find(|w| w[0] == w[1]) {
        return Err(PairViolation::DuplicateTarget(w[0]));
    }
    Ok(())
}

impl Serialize for MatchedPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("MatchedPair", 4)?;
        st.serialize_field("d", &self.d.get())?;
        st.serialize_field("S", &self.sources())?;
        st.serialize_field("T", &self.targets())?;
        st.serialize_field("phi", &self.pairs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for MatchedPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            d: usize,
            #[serde(rename = "S")]
            s: Vec<Vertex>,
            #[serde(rename = "T")]
            t: Vec<Vertex>,
            phi: Vec<(Vertex, Vertex)>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let d = Dimension::new(wire.d).map_err(de::Error::custom)?;
        let pair = MatchedPair::new(d, wire.phi).map_err(de::Error::custom)?;
        let mut s = wire.s;
        s.sort_unstable();
        let mut t = wire.t;
        t.sort_unstable();
        if pair.sources() != s {
            return Err(de::Error::custom("S does not match the domain of phi"));
        }
        if pair.targets() != t {
            return Err(de::Error::custom("T does not match the image of phi"));
        }
        Ok(pair)
    }
}

/// A maximum upward matching of a set into its complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolumeCertificate {
    pair: MatchedPair,
}

impl VolumeCertificate {
    pub fn pair(&self) -> &MatchedPair {
        &self.pair
    }

    /// Number of matched sources, i.e. the directed volume.
    pub fn value(&self) -> usize {
        self.pair.len()
    }
}

fn dedup_sorted(d: Dimension, set: &[Vertex]) -> Result<Vec<Vertex>, Error> {
    let common = common_dimension(set.iter())?;
    if common != d {
        return Err(Error::DimensionMismatch { left: d.get(), right: common.get() });
    }
    let mut out = set.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Both the comparability adjacency of `set` into its complement and the
/// complement itself, as parallel index structures.
struct UpwardBigraph {
    lefts: Vec<Vertex>,
    rights: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
}

fn upward_bigraph(d: Dimension, set: &[Vertex]) -> UpwardBigraph {
    let mut members = CodeSet::new(d);
    for v in set {
        members.insert(v.bits());
    }
    let mut rights = Vec::new();
    let mut right_index = vec![usize::MAX; d.vertex_count()];
    for code in 0..=d.full_mask() {
        if !members.contains(code) {
            right_index[code as usize] = rights.len();
            rights.push(Vertex::new(d, code).unwrap());
        }
    }
    let full = d.full_mask();
    let adj = set
        .iter()
        .map(|s| {
            let free = !s.bits() & full;
            let mut out = Vec::new();
            // Strict supersets of s are s | m for nonempty submasks m of the
            // complement of s; collect the ones outside the set.
            let mut m = free;
            while m != 0 {
                let code = s.bits() | m;
                if !members.contains(code) {
                    out.push(right_index[code as usize]);
                }
                m = (m - 1) & free;
            }
            out.sort_unstable();
            out
        })
        .collect();
    UpwardBigraph { lefts: set.to_vec(), rights, adj }
}

fn certificate_from(
    g: &UpwardBigraph,
    partners: &[Option<usize>],
    d: Dimension,
) -> VolumeCertificate {
    let pairs: Vec<(Vertex, Vertex)> = partners
        .iter()
        .enumerate()
        .filter_map(|(l, p)| p.map(|r| (g.lefts[l], g.rights[r])))
        .collect();
    let pair = MatchedPair::new(d, pairs).expect("matching edges go strictly upward");
    VolumeCertificate { pair }
}

/// Directed volume of a set: the size of a maximum matching of `set` into
/// its complement along strict comparabilities, with a witness matching.
///
/// The full vertex set has volume 0 with an empty certificate.
pub fn directed_volume(
    d: Dimension,
    set: &[Vertex],
) -> Result<(usize, VolumeCertificate), Error> {
    let set = dedup_sorted(d, set)?;
    if set.len() == d.vertex_count() {
        let pair = MatchedPair::new(d, Vec::new()).unwrap();
        return Ok((0, VolumeCertificate { pair }));
    }
    let g = upward_bigraph(d, &set);
    let (size, partners) = hopcroft_karp(g.lefts.len(), g.rights.len(), &g.adj);
    let cert = certificate_from(&g, &partners, d);
    debug_assert_eq!(cert.value(), size);
    Ok((size, cert))
}

/// Average layer gap of a matched pair, as an exact rational.
///
/// The empty pair has distance 0 by convention.
pub fn separation_distance(pair: &MatchedPair) -> Rational {
    if pair.is_empty() {
        return Rational::from_integer(0);
    }
    let total: i64 = pair
        .pairs()
        .iter()
        .map(|(s, t)| (t.layer() - s.layer()) as i64)
        .sum();
    Rational::new(total, pair.len() as i64)
}

/// Separation distance of a set: the smallest average layer gap over all
/// maximum upward matchings into the complement, with a witness.
///
/// Errors with [`Error::NoCertificate`] when the directed volume is zero.
pub fn separation_distance_of_set(
    d: Dimension,
    set: &[Vertex],
) -> Result<(Rational, VolumeCertificate), Error> {
    let set = dedup_sorted(d, set)?;
    if set.len() == d.vertex_count() {
        return Err(Error::NoCertificate);
    }
    let g = upward_bigraph(d, &set);
    let cost_adj: Vec<Vec<(usize, u64)>> = g
        .adj
        .iter()
        .enumerate()
        .map(|(l, rs)| {
            let base = g.lefts[l].layer();
            rs.iter()
                .map(|&r| (r, (g.rights[r].layer() - base) as u64))
                .collect()
        })
        .collect();
    let (total, partners) = min_cost_max_matching(g.lefts.len(), g.rights.len(), &cost_adj);
    let cert = certificate_from(&g, &partners, d);
    if cert.value() == 0 {
        return Err(Error::NoCertificate);
    }
    let r = Rational::new(total as i64, cert.value() as i64);
    debug_assert_eq!(r, cert.pair().separation_distance());
    Ok((r, cert))
}

/// Ascending `k`-combinations of `0..n`.
struct Combinations {
    n: usize,
    k: usize,
    next: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let next = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, k, next }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let idx = self.next.as_mut().unwrap();
        // Advance the rightmost index that can still move.
        let mut i = self.k;
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            if idx[i] < self.n - (self.k - i) {
                idx[i] += 1;
                for j in i + 1..self.k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}

/// Lexicographically smallest perfect matching between equal-size level
/// sets, as `(s, t)` entries ascending by source, or `None` if no perfect
/// matching exists.
pub(crate) fn canonical_matching(s: &[Vertex], t: &[Vertex]) -> Option<Vec<(Vertex, Vertex)>> {
    let k = s.len();
    debug_assert_eq!(k, t.len());
    let full_adj: Vec<Vec<usize>> = s
        .iter()
        .map(|sv| (0..k).filter(|&ri| sv.lt(&t[ri])).collect())
        .collect();
    let (size, _) = hopcroft_karp(k, k, &full_adj);
    if size < k {
        return None;
    }

    // Fix targets greedily in source order; each tentative choice must keep
    // the rest perfectly matchable.
    let mut used = vec![false; k];
    let mut chosen = vec![usize::MAX; k];
    for li in 0..k {
        let mut fixed = false;
        for &ri in &full_adj[li] {
            if used[ri] {
                continue;
            }
            used[ri] = true;
            chosen[li] = ri;
            let rest = k - li - 1;
            let sub_adj: Vec<Vec<usize>> = (li + 1..k)
                .map(|l2| full_adj[l2].iter().copied().filter(|&r2| !used[r2]).collect())
                .collect();
            let (sub_size, _) = hopcroft_karp(rest, k, &sub_adj);
            if sub_size == rest {
                fixed = true;
                break;
            }
            used[ri] = false;
        }
        debug_assert!(fixed, "perfect matching vanished during extension");
        if !fixed {
            return None;
        }
    }
    Some((0..k).map(|li| (s[li], t[chosen[li]])).collect())
}

/// Streams every level matched pair `(S ⊆ L_i, T ⊆ L_j, φ)` with
/// `1 <= |S| = |T| <= max_size` that admits a perfect comparability
/// matching, one canonical `φ` per `(S, T)`.
///
/// Order: by size, then source combination, then target combination, each
/// lexicographic over the ascending level enumerations.
pub fn enumerate_level_matched_pairs(
    d: Dimension,
    i: usize,
    j: usize,
    max_size: usize,
) -> Result<LevelMatchedPairs, Error> {
    if j > d.get() {
        return Err(Error::LayerRange { d: d.get(), layer: j });
    }
    if i >= j {
        return Err(Error::Config(format!("levels must satisfy i < j, got i={i}, j={j}")));
    }
    if max_size == 0 {
        return Err(Error::Config("max_size must be at least 1".into()));
    }
    let li = layer(d, i)?;
    let lj = layer(d, j)?;
    Ok(LevelMatchedPairs {
        d,
        li,
        lj,
        size: 1,
        max_size,
        s_combos: Combinations::new(0, 1),
        current_s: None,
        t_combos: Combinations::new(0, 1),
        primed: false,
    })
}

/// Iterator produced by [`enumerate_level_matched_pairs`].
pub struct LevelMatchedPairs {
    d: Dimension,
    li: Vec<Vertex>,
    lj: Vec<Vertex>,
    size: usize,
    max_size: usize,
    s_combos: Combinations,
    current_s: Option<Vec<Vertex>>,
    t_combos: Combinations,
    primed: bool,
}

impl Iterator for LevelMatchedPairs {
    type Item = MatchedPair;

    fn next(&mut self) -> Option<MatchedPair> {
        let cap = self.max_size.min(self.li.len()).min(self.lj.len());
        loop {
            if !self.primed {
                if self.size > cap {
                    return None;
                }
                self.s_combos = Combinations::new(self.li.len(), self.size);
                self.current_s = None;
                self.primed = true;
            }
            if self.current_s.is_none() {
                match self.s_combos.next() {
                    Some(idx) => {
                        self.current_s = Some(idx.iter().map(|&x| self.li[x]).collect());
                        self.t_combos = Combinations::new(self.lj.len(), self.size);
                    }
                    None => {
                        self.size += 1;
                        self.primed = false;
                        continue;
                    }
                }
            }
            let s = self.current_s.as_ref().unwrap().clone();
            match self.t_combos.next() {
                Some(idx) => {
                    let t: Vec<Vertex> = idx.iter().map(|&x| self.lj[x]).collect();
                    if let Some(pairs) = canonical_matching(&s, &t) {
                        let pair = MatchedPair::new(self.d, pairs)
                            .expect("canonical matching is a matched pair");
                        return Some(pair);
                    }
                }
                None => {
                    self.current_s = None;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn valid_pair_constructs() {
        let p = MatchedPair::new(dim(3), vec![(v("001"), v("101")), (v("010"), v("011"))]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.levels(), Some((1, 2)));
        assert_eq!(p.target_of(&v("001")), Some(v("101")));
        assert!(p.sides_disjoint());
    }

    #[test]
    fn non_bijection_rejected() {
        let err =
            MatchedPair::new(dim(2), vec![(v("00"), v("11")), (v("10"), v("11"))]).unwrap_err();
        assert_eq!(err, Error::InvalidPair(PairViolation::DuplicateTarget(v("11"))));
    }

    #[test]
    fn incomparable_pair_rejected() {
        let err = MatchedPair::new(dim(2), vec![(v("01"), v("10"))]).unwrap_err();
        assert!(matches!(err, Error::InvalidPair(PairViolation::NotStrictlyBelow { .. })));
    }

    #[test]
    fn equal_pair_rejected() {
        let err = MatchedPair::new(dim(2), vec![(v("01"), v("01"))]).unwrap_err();
        assert!(matches!(err, Error::InvalidPair(PairViolation::NotStrictlyBelow { .. })));
    }

    #[test]
    fn pair_serde_round_trip() {
        let p = MatchedPair::new(dim(3), vec![(v("001"), v("101")), (v("010"), v("011"))]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"d":3,"S":["010","001"],"T":["101","011"],"phi":[["010","011"],["001","101"]]}"#
        );
        let back: MatchedPair = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn pair_deserialize_checks_sides() {
        let bad = r#"{"d":2,"S":["00"],"T":["11"],"phi":[["00","01"]]}"#;
        assert!(serde_json::from_str::<MatchedPair>(bad).is_err());
        let invalid = r#"{"d":2,"S":["01"],"T":["10"],"phi":[["01","10"]]}"#;
        assert!(serde_json::from_str::<MatchedPair>(invalid).is_err());
    }

    #[test]
    fn volume_of_lower_pair() {
        let (vol, cert) = directed_volume(dim(2), &[v("00"), v("01")]).unwrap();
        assert_eq!(vol, 2);
        assert_eq!(cert.value(), 2);
        assert_eq!(
            cert.pair().pairs(),
            [(v("00"), v("10")), (v("01"), v("11"))]
        );
    }

    #[test]
    fn volume_of_up_set_is_zero() {
        let (vol, cert) = directed_volume(dim(2), &[v("11")]).unwrap();
        assert_eq!(vol, 0);
        assert!(cert.pair().is_empty());
        let all: Vec<Vertex> = dim(2).vertices().collect();
        let (vol, _) = directed_volume(dim(2), &all).unwrap();
        assert_eq!(vol, 0);
    }

    #[test]
    fn separation_of_pair_averages_gaps() {
        let p = MatchedPair::new(dim(3), vec![(v("000"), v("111")), (v("100"), v("110"))]).unwrap();
        assert_eq!(p.separation_distance(), Rational::new(4, 2));
    }

    #[test]
    fn separation_of_set_picks_cheapest_certificate() {
        let (r, cert) = separation_distance_of_set(dim(2), &[v("00"), v("01")]).unwrap();
        assert_eq!(r, Rational::from_integer(1));
        assert_eq!(
            cert.pair().pairs(),
            [(v("00"), v("10")), (v("01"), v("11"))]
        );
    }

    #[test]
    fn separation_of_set_fractional() {
        // The lower ball of the 3-cube matches onto the whole upper ball;
        // only three weight-2 targets exist for four sources, so one source
        // pays an extra step and the total gap is 6 either way.
        let ball = [v("000"), v("100"), v("010"), v("001")];
        let (r, cert) = separation_distance_of_set(dim(3), &ball).unwrap();
        assert_eq!(cert.value(), 4);
        assert_eq!(r, Rational::new(3, 2));
    }

    #[test]
    fn separation_of_up_set_has_no_certificate() {
        assert_eq!(
            separation_distance_of_set(dim(2), &[v("11")]).unwrap_err(),
            Error::NoCertificate
        );
    }

    #[test]
    fn enumerate_bottom_to_top() {
        let pairs: Vec<_> = enumerate_level_matched_pairs(dim(2), 0, 2, 1).unwrap().collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].pairs(), [(v("00"), v("11"))]);
    }

    #[test]
    fn enumerate_single_sources() {
        let pairs: Vec<_> = enumerate_level_matched_pairs(dim(3), 0, 1, 1).unwrap().collect();
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn enumerate_rejects_bad_levels() {
        assert!(enumerate_level_matched_pairs(dim(3), 2, 2, 1).is_err());
        assert!(enumerate_level_matched_pairs(dim(3), 1, 4, 1).is_err());
    }

    #[test]
    fn canonical_matching_is_lex_smallest() {
        // Between L_1 and L_2 of the 3-cube the full levels form a 6-cycle;
        // the canonical matching pairs each source with its smallest target.
        let s = layer(dim(3), 1).unwrap();
        let t = layer(dim(3), 2).unwrap();
        let m = canonical_matching(&s, &t).unwrap();
        for (sv, tv) in &m {
            assert!(sv.lt(tv));
        }
        assert_eq!(m[0].0, v("100"));
        assert_eq!(m[0].1, v("110"));
    }
}
