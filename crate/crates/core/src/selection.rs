//! Pair selection over finite families.
//!
//! Given finite `X`, `V`, a rational `alpha in (0, 1)`, neighborhoods
//! `N_v ⊆ X` and relations `~_d` on `V`, the engine checks the two
//! hypotheses
//!
//! * `|N_v| >= alpha |X|` for every `v`, and
//! * `|{u : u ~_d v}| <= (alpha^2 / 4) |V|` for every `v` and `d in N_v`,
//!
//! and searches for `u, v` with more than `(alpha^2 / 2) |X|` elements
//! `d in N_u ∩ N_v` with `u ≁_d v`. When the hypotheses hold such a pair
//! always exists; the search itself is unconditional. All threshold
//! comparisons are exact integer arithmetic.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::{Error, Result};

/// Upper bound on `|X|` and `|V|`.
pub const MAX_ELEMENTS: usize = 10_000;

// Dense relation storage is used up to this many bits.
const DENSE_TRIPLE_BITS: usize = 100_000_000;
const DENSE_PAIR_BITS: usize = 10_000_000;

/// The family of relations `u ~_d v`.
pub trait Similarity: Sync {
    fn similar(&self, d: usize, u: usize, v: usize) -> bool;
}

/// Wraps a closure `(d, u, v) -> bool` as a relation.
pub struct Predicate<F>(pub F);

impl<F> Similarity for Predicate<F>
where
    F: Fn(usize, usize, usize) -> bool + Sync,
{
    fn similar(&self, d: usize, u: usize, v: usize) -> bool {
        (self.0)(d, u, v)
    }
}

impl<S: Similarity + ?Sized> Similarity for &S {
    fn similar(&self, d: usize, u: usize, v: usize) -> bool {
        (**self).similar(d, u, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Storage<K: std::hash::Hash + Eq> {
    Dense(Vec<u64>),
    Sparse(HashSet<K>),
}

fn bit(bits: &[u64], i: usize) -> bool {
    bits[i >> 6] >> (i & 63) & 1 == 1
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i >> 6] |= 1 << (i & 63);
}

/// A materialized relation: the listed triples `(d, u, v)` are related.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleRelation {
    x_len: usize,
    v_len: usize,
    storage: Storage<(u32, u32, u32)>,
}

impl TripleRelation {
    pub fn new(x_len: usize, v_len: usize) -> Self {
        let bits = x_len * v_len * v_len;
        let storage = if bits <= DENSE_TRIPLE_BITS {
            Storage::Dense(vec![0; bits.div_ceil(64)])
        } else {
            Storage::Sparse(HashSet::new())
        };
        Self { x_len, v_len, storage }
    }

    fn index(&self, d: usize, u: usize, v: usize) -> usize {
        (d * self.v_len + u) * self.v_len + v
    }

    pub fn insert(&mut self, d: usize, u: usize, v: usize) -> Result<()> {
        if d >= self.x_len || u >= self.v_len || v >= self.v_len {
            return Err(Error::Parameter(format!("relation triple ({d}, {u}, {v}) out of range")));
        }
        let i = self.index(d, u, v);
        match &mut self.storage {
            Storage::Dense(bits) => set_bit(bits, i),
            Storage::Sparse(set) => {
                set.insert((d as u32, u as u32, v as u32));
            }
        }
        Ok(())
    }

    /// All related triples in lexicographic order.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for d in 0..self.x_len {
            for u in 0..self.v_len {
                for v in 0..self.v_len {
                    if self.similar(d, u, v) {
                        out.push((d, u, v));
                    }
                }
            }
        }
        out
    }
}

impl Similarity for TripleRelation {
    fn similar(&self, d: usize, u: usize, v: usize) -> bool {
        match &self.storage {
            Storage::Dense(bits) => bit(bits, self.index(d, u, v)),
            Storage::Sparse(set) => set.contains(&(d as u32, u as u32, v as u32)),
        }
    }
}

/// A single relation `u ~ v` shared by every `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRelation {
    v_len: usize,
    storage: Storage<(u32, u32)>,
}

impl PairRelation {
    pub fn new(v_len: usize) -> Self {
        let bits = v_len * v_len;
        let storage = if bits <= DENSE_PAIR_BITS {
            Storage::Dense(vec![0; bits.div_ceil(64)])
        } else {
            Storage::Sparse(HashSet::new())
        };
        Self { v_len, storage }
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.v_len || v >= self.v_len {
            return Err(Error::Parameter(format!("relation pair ({u}, {v}) out of range")));
        }
        match &mut self.storage {
            Storage::Dense(bits) => set_bit(bits, u * self.v_len + v),
            Storage::Sparse(set) => {
                set.insert((u as u32, v as u32));
            }
        }
        Ok(())
    }

    pub fn related(&self, u: usize, v: usize) -> bool {
        match &self.storage {
            Storage::Dense(bits) => bit(bits, u * self.v_len + v),
            Storage::Sparse(set) => set.contains(&(u as u32, v as u32)),
        }
    }
}

impl Similarity for PairRelation {
    fn similar(&self, _d: usize, u: usize, v: usize) -> bool {
        self.related(u, v)
    }
}

/// Inputs of the selection problem.
#[derive(Clone, Debug)]
pub struct SelectionInstance<R> {
    x_len: usize,
    neighborhoods: Vec<Vec<u32>>,
    alpha: Ratio<u64>,
    relation: R,
}

/// The first hypothesis failure found, scanning `v` in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `|N_v| < alpha |X|`.
    SmallNeighborhood { v: usize, size: usize },
    /// More than `(alpha^2 / 4) |V|` elements `u` with `u ~_d v`.
    TooManySimilar { v: usize, d: usize, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SmallNeighborhood { v, size } => write!(f, "|N_{v}| = {size} is below alpha|X|"),
            Violation::TooManySimilar { v, d, count } => {
                write!(f, "{count} elements similar to {v} under d = {d} exceed alpha^2|V|/4")
            }
        }
    }
}

/// A pair with its witness count. `witnesses > (alpha^2 / 2) |X|` holds strictly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCertificate {
    pub u: usize,
    pub v: usize,
    /// `|{d in N_u ∩ N_v : u ≁_d v}|`.
    pub witnesses: usize,
    /// `(alpha^2 / 2) |X|` as an exact rational.
    pub threshold: Ratio<u64>,
}

/// Sizes of sorted-list intersections.
fn intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl<R: Similarity> SelectionInstance<R> {
    pub fn new(x_len: usize, neighborhoods: Vec<Vec<u32>>, alpha: Ratio<u64>, relation: R) -> Result<Self> {
        if x_len > MAX_ELEMENTS || neighborhoods.len() > MAX_ELEMENTS {
            return Err(Error::Parameter(format!("|X| and |V| are limited to {MAX_ELEMENTS}")));
        }
        if *alpha.numer() == 0 || alpha.numer() >= alpha.denom() {
            return Err(Error::Parameter(format!("alpha = {alpha} is not in (0, 1)")));
        }
        let mut cleaned = Vec::with_capacity(neighborhoods.len());
        for (v, mut n) in neighborhoods.into_iter().enumerate() {
            n.sort_unstable();
            n.dedup();
            if let Some(&d) = n.last() {
                if d as usize >= x_len {
                    return Err(Error::Parameter(format!("N_{v} contains {d}, outside X of size {x_len}")));
                }
            }
            cleaned.push(n);
        }
        Ok(Self { x_len, neighborhoods: cleaned, alpha, relation })
    }

    pub fn x_len(&self) -> usize {
        self.x_len
    }

    pub fn v_len(&self) -> usize {
        self.neighborhoods.len()
    }

    pub fn alpha(&self) -> Ratio<u64> {
        self.alpha
    }

    pub fn neighborhood(&self, v: usize) -> &[u32] {
        &self.neighborhoods[v]
    }

    pub fn relation(&self) -> &R {
        &self.relation
    }

    fn pq(&self) -> (u128, u128) {
        (*self.alpha.numer() as u128, *self.alpha.denom() as u128)
    }

    /// `(alpha^2 / 2) |X|`.
    pub fn threshold(&self) -> Ratio<u64> {
        let (p, q) = (*self.alpha.numer(), *self.alpha.denom());
        Ratio::new(p * p * self.x_len as u64, 2 * q * q)
    }

    /// `count > (alpha^2 / 2) |X|`, i.e. `2 q^2 count > p^2 |X|`.
    fn exceeds_threshold(&self, count: usize) -> bool {
        let (p, q) = self.pq();
        2 * q * q * count as u128 > p * p * self.x_len as u128
    }

    /// `|N_v| >= alpha |X|` and the similarity cap for every `d in N_v`.
    pub fn verify_hypotheses(&self) -> std::result::Result<(), Violation> {
        let (p, q) = self.pq();
        let nv = self.v_len() as u128;
        for (v, n) in self.neighborhoods.iter().enumerate() {
            if q * (n.len() as u128) < p * self.x_len as u128 {
                return Err(Violation::SmallNeighborhood { v, size: n.len() });
            }
            for &d in n {
                let d = d as usize;
                let count = (0..self.v_len()).filter(|&u| self.relation.similar(d, u, v)).count();
                if 4 * q * q * count as u128 > p * p * nv {
                    return Err(Violation::TooManySimilar { v, d, count });
                }
            }
        }
        Ok(())
    }

    /// Witness count for the ordered pair `(u, v)`, or `None` when the
    /// neighborhood sizes already rule the pair out.
    fn pair_witnesses(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = (&self.neighborhoods[u], &self.neighborhoods[v]);
        if !self.exceeds_threshold(a.len().min(b.len())) {
            return None;
        }
        if !self.exceeds_threshold(intersection_len(a, b)) {
            return None;
        }
        let (mut i, mut j, mut w) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if !self.relation.similar(a[i] as usize, u, v) {
                        w += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Some(w)
    }

    fn certificate(&self, u: usize, v: usize) -> Option<PairCertificate> {
        let w = self.pair_witnesses(u, v)?;
        self.exceeds_threshold(w).then(|| PairCertificate { u, v, witnesses: w, threshold: self.threshold() })
    }

    /// The lexicographically least qualifying ordered pair `(u, v)`, checked
    /// by direct recount before it is returned. Pairs with `u = v` are included.
    pub fn find_pair(&self) -> Option<PairCertificate> {
        let nv = self.v_len();
        let found = (0..nv).into_par_iter().find_map_first(|u| (0..nv).find_map(|v| self.certificate(u, v)))?;
        assert!(
            found.recount(self),
            "search produced a certificate that fails the direct recount: {found:?}"
        );
        Some(found)
    }

    /// Every qualifying ordered pair, in lexicographic order.
    pub fn qualifying_pairs(&self) -> Vec<PairCertificate> {
        let nv = self.v_len();
        (0..nv)
            .into_par_iter()
            .flat_map_iter(|u| (0..nv).filter_map(move |v| self.certificate(u, v)))
            .collect()
    }

    /// For relations that ignore `d`: a pair with `u ≁ v` and
    /// `|N_u ∩ N_v| > (alpha^2 / 2) |X|`.
    ///
    /// Independence from `d` is spot-checked on up to three values of `d`
    /// for every pair; a failure is a precondition error.
    pub fn single_relation_pair(&self) -> Result<Option<(usize, usize, usize)>> {
        let nv = self.v_len();
        if self.x_len > 1 {
            let probes = [0, self.x_len / 2, self.x_len - 1];
            for u in 0..nv {
                for v in 0..nv {
                    let base = self.relation.similar(probes[0], u, v);
                    if probes[1..].iter().any(|&d| self.relation.similar(d, u, v) != base) {
                        return Err(Error::Precondition(format!("relation depends on d at pair ({u}, {v})")));
                    }
                }
            }
        }
        let probe = 0;
        Ok((0..nv).into_par_iter().find_map_first(|u| {
            (0..nv).find_map(|v| {
                if self.relation.similar(probe, u, v) {
                    return None;
                }
                let n = intersection_len(&self.neighborhoods[u], &self.neighborhoods[v]);
                self.exceeds_threshold(n).then_some((u, v, n))
            })
        }))
    }
}

impl PairCertificate {
    /// Recounts the witnesses with a plain scan over `X`, independent of the
    /// search path, and checks the strict threshold.
    pub fn recount<R: Similarity>(&self, inst: &SelectionInstance<R>) -> bool {
        let nu = inst.neighborhood(self.u);
        let nv = inst.neighborhood(self.v);
        let count = (0..inst.x_len() as u32)
            .filter(|d| nu.contains(d) && nv.contains(d) && !inst.relation().similar(*d as usize, self.u, self.v))
            .count();
        count == self.witnesses && Ratio::from_integer(count as u64) > self.threshold
    }
}

/// Text interchange:
///
/// ```text
/// X <n> V <m> alpha <p>/<q>
/// <indices of N_0>
/// ...
/// <indices of N_{m-1}>
/// d u v          (zero or more related triples)
/// ```
impl SelectionInstance<TripleRelation> {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "X {} V {} alpha {}/{}\n",
            self.x_len,
            self.v_len(),
            self.alpha.numer(),
            self.alpha.denom()
        );
        for n in &self.neighborhoods {
            let items: Vec<String> = n.iter().map(|d| d.to_string()).collect();
            out.push_str(&items.join(" "));
            out.push('\n');
        }
        for (d, u, v) in self.relation.triples() {
            out.push_str(&format!("{d} {u} {v}\n"));
        }
        out
    }
}

impl FromStr for SelectionInstance<TripleRelation> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty instance".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "X" || parts[2] != "V" || parts[4] != "alpha" {
            return Err(Error::Format(format!("bad header line: {header:?}")));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad integer {s:?}")));
        let x_len = parse_usize(parts[1])?;
        let v_len = parse_usize(parts[3])?;
        let (p, q) = parts[5].split_once('/').ok_or_else(|| Error::Format("alpha must be p/q".into()))?;
        let (p, q) = (parse_usize(p)? as u64, parse_usize(q)? as u64);
        if q == 0 {
            return Err(Error::Format("alpha has a zero denominator".into()));
        }
        if x_len > MAX_ELEMENTS || v_len > MAX_ELEMENTS {
            return Err(Error::Format(format!("|X| and |V| are limited to {MAX_ELEMENTS}")));
        }
        let mut neighborhoods = Vec::with_capacity(v_len);
        for v in 0..v_len {
            let line = lines.next().ok_or_else(|| Error::Format(format!("missing neighborhood line for v = {v}")))?;
            let n = line.split_whitespace().map(|s| parse_usize(s).map(|d| d as u32)).collect::<Result<Vec<_>>>()?;
            neighborhoods.push(n);
        }
        let mut relation = TripleRelation::new(x_len, v_len);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let t = line.split_whitespace().map(parse_usize).collect::<Result<Vec<_>>>()?;
            if t.len() != 3 {
                return Err(Error::Format(format!("relation line must be `d u v`: {line:?}")));
            }
            relation.insert(t[0], t[1], t[2]).map_err(|e| Error::Format(e.to_string()))?;
        }
        SelectionInstance::new(x_len, neighborhoods, Ratio::new(p, q), relation)
            .map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(related: bool) -> SelectionInstance<Predicate<impl Fn(usize, usize, usize) -> bool + Sync>> {
        SelectionInstance::new(2, vec![vec![0, 1], vec![0, 1]], Ratio::new(1, 2), Predicate(move |_, _, _| related))
            .unwrap()
    }

    #[test]
    fn empty_relation_instance() {
        let inst = two_by_two(false);
        assert_eq!(inst.verify_hypotheses(), Ok(()));
        let cert = inst.find_pair().unwrap();
        assert_eq!((cert.u, cert.v, cert.witnesses), (0, 0, 2));
        assert_eq!(cert.threshold, Ratio::new(1, 4));
        // The (v1, v2) pair qualifies too.
        assert!(inst.qualifying_pairs().iter().any(|c| (c.u, c.v, c.witnesses) == (0, 1, 2)));
    }

    #[test]
    fn full_relation_violates_cap() {
        let inst = two_by_two(true);
        assert_eq!(inst.verify_hypotheses(), Err(Violation::TooManySimilar { v: 0, d: 0, count: 2 }));
        assert_eq!(inst.find_pair(), None);
    }

    #[test]
    fn reflexive_singleton() {
        let inst =
            SelectionInstance::new(5, vec![vec![0, 1, 2, 3, 4]], Ratio::new(1, 10), Predicate(|_, u, v| u == v))
                .unwrap();
        assert_eq!(inst.find_pair(), None);
        assert_eq!(inst.verify_hypotheses(), Err(Violation::TooManySimilar { v: 0, d: 0, count: 1 }));
    }

    #[test]
    fn small_neighborhood_pinpointed() {
        let rel = PairRelation::new(3);
        let inst = SelectionInstance::new(4, vec![vec![0, 1, 2, 3], vec![0], vec![1, 2, 3]], Ratio::new(1, 2), rel)
            .unwrap();
        assert_eq!(inst.verify_hypotheses(), Err(Violation::SmallNeighborhood { v: 1, size: 1 }));
    }

    #[test]
    fn single_relation_examples() {
        let rel = PairRelation::new(3);
        let all = vec![vec![0, 1, 2, 3]; 3];
        let inst = SelectionInstance::new(4, all, Ratio::new(1, 2), rel).unwrap();
        assert_eq!(inst.single_relation_pair().unwrap(), Some((0, 0, 4)));

        let dep = SelectionInstance::new(3, vec![vec![0, 1, 2]; 2], Ratio::new(1, 2), Predicate(|d, _, _| d == 1))
            .unwrap();
        assert!(matches!(dep.single_relation_pair(), Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        let rel = PairRelation::new(1);
        assert!(SelectionInstance::new(2, vec![vec![0]], Ratio::new(1, 1), rel.clone()).is_err());
        assert!(SelectionInstance::new(2, vec![vec![0]], Ratio::new(0, 3), rel.clone()).is_err());
        assert!(SelectionInstance::new(2, vec![vec![2]], Ratio::new(1, 3), rel).is_err());
    }

    #[test]
    fn text_format() {
        let text = "X 3 V 2 alpha 2/3\n0 1\n2 1 0\n0 1 0\n2 0 1\n";
        let inst: SelectionInstance<TripleRelation> = text.parse().unwrap();
        assert_eq!(inst.neighborhood(1), &[0, 1, 2]);
        assert!(inst.relation().similar(0, 1, 0));
        assert!(!inst.relation().similar(0, 0, 1));
        let again: SelectionInstance<TripleRelation> = inst.to_text().parse().unwrap();
        assert_eq!(again.to_text(), inst.to_text());
        assert_eq!(again.to_text(), "X 3 V 2 alpha 2/3\n0 1\n0 1 2\n0 1 0\n2 0 1\n");
        assert!("X 3 V 2 alpha 2\n".parse::<SelectionInstance<TripleRelation>>().is_err());
        assert!("X 3 V 2 alpha 1/2\n0\n".parse::<SelectionInstance<TripleRelation>>().is_err());
        assert!("X 3 V 1 alpha 1/2\n0\n5 0 0\n".parse::<SelectionInstance<TripleRelation>>().is_err());
    }
}
