//! Discounted normal play games.
//!
//! A DNP game is played on a subgraph of the game graph (sinks allowed) with
//! zero weights: reaching a sink after `s` moves costs the stuck player
//! `λ^s`. Its values only ever take the form `±λ^k` or `0`, so they are stored
//! symbolically and computed independently of `λ`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::game::Owner;
use crate::weight::{pow, Rational};

/// `+λ^k`, `0` or `-λ^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DnpValue {
    Pos(u32),
    Zero,
    Neg(u32),
}

impl DnpValue {
    pub fn sign(self) -> i8 {
        match self {
            DnpValue::Pos(_) => 1,
            DnpValue::Zero => 0,
            DnpValue::Neg(_) => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, DnpValue::Pos(_))
    }

    pub fn is_negative(self) -> bool {
        matches!(self, DnpValue::Neg(_))
    }

    /// Multiplication by `λ`.
    pub fn scale_by_lambda(self) -> DnpValue {
        match self {
            DnpValue::Pos(k) => DnpValue::Pos(k + 1),
            DnpValue::Zero => DnpValue::Zero,
            DnpValue::Neg(k) => DnpValue::Neg(k + 1),
        }
    }

    pub fn instantiate(self, lambda: &Rational) -> Rational {
        match self {
            DnpValue::Pos(k) => pow(lambda, k),
            DnpValue::Zero => Rational::zero(),
            DnpValue::Neg(k) => -pow(lambda, k),
        }
    }
}

/// Agrees with the numeric order for every `λ ∈ (0, 1)`.
impl Ord for DnpValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use DnpValue::*;
        match (*self, *other) {
            (Pos(a), Pos(b)) => b.cmp(&a),
            (Neg(a), Neg(b)) => a.cmp(&b),
            _ => self.sign().cmp(&other.sign()),
        }
    }
}

impl PartialOrd for DnpValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DnpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DnpValue::Pos(k) => write!(f, "+λ^{k}"),
            DnpValue::Zero => write!(f, "0"),
            DnpValue::Neg(k) => write!(f, "-λ^{k}"),
        }
    }
}

impl Serialize for DnpValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn symbolic_compare(u: DnpValue, v: DnpValue) -> Ordering {
    u.cmp(&v)
}

/// A subgraph over a fixed node set, given by its node pairs.
#[derive(Clone, Debug)]
pub struct Subgraph<'a> {
    owners: &'a [Owner],
    succ: Vec<Vec<usize>>,
}

impl<'a> Subgraph<'a> {
    pub fn new(owners: &'a [Owner], pairs: &[(usize, usize)]) -> Self {
        let mut succ = vec![Vec::new(); owners.len()];
        for &(a, b) in pairs {
            succ[a].push(b);
        }
        Self { owners, succ }
    }

    pub fn n(&self) -> usize {
        self.owners.len()
    }

    pub fn owners(&self) -> &[Owner] {
        self.owners
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.succ[v].is_empty()
    }
}

/// Per-node DNP values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DnpValues(pub Vec<DnpValue>);

impl DnpValues {
    pub fn get(&self, v: usize) -> DnpValue {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = DnpValue> + '_ {
        self.0.iter().copied()
    }

    pub fn instantiate(&self, lambda: &Rational) -> Vec<Rational> {
        self.0.iter().map(|d| d.instantiate(lambda)).collect()
    }
}

/// Peels off the nodes of value `±λ^0, ±λ^1, …` in layers; whatever is never
/// reached gets value zero.
pub fn dnp_solve(graph: &Subgraph<'_>) -> DnpValues {
    let n = graph.n();
    let mut values = vec![DnpValue::Zero; n];
    for favoured in [Owner::Min, Owner::Max] {
        // `favoured` sinks pay out: sinks of Min give +1 to Max, sinks of Max give -1.
        let mut level: Vec<Option<u32>> = vec![None; n];
        let mut frontier: Vec<usize> = (0..n)
            .filter(|&v| graph.is_sink(v) && graph.owners()[v] == favoured)
            .collect();
        let mut k = 0u32;
        while !frontier.is_empty() {
            for &v in &frontier {
                level[v] = Some(k);
            }
            k += 1;
            frontier = (0..n)
                .filter(|&v| level[v].is_none() && !graph.is_sink(v))
                .filter(|&v| {
                    let succ = graph.successors(v);
                    // The player who is not `favoured` needs every move to lead
                    // into the layers; the other player needs just one.
                    if graph.owners()[v] == favoured {
                        succ.iter().all(|&b| level[b].is_some())
                    } else {
                        succ.iter().any(|&b| level[b].is_some())
                    }
                })
                .collect();
        }
        for v in 0..n {
            if let Some(k) = level[v] {
                values[v] = match favoured {
                    Owner::Min => DnpValue::Pos(k),
                    Owner::Max => DnpValue::Neg(k),
                };
            }
        }
    }
    DnpValues(values)
}

/// Applies the contracting operator once to the numeric instantiation of
/// `delta` and reports whether it is a fixed point.
pub fn dnp_fixpoint_check(graph: &Subgraph<'_>, delta: &DnpValues, lambda: &Rational) -> bool {
    if delta.len() != graph.n() {
        return false;
    }
    let f = delta.instantiate(lambda);
    (0..graph.n()).all(|a| {
        let image = if graph.is_sink(a) {
            match graph.owners()[a] {
                Owner::Max => -Rational::one(),
                Owner::Min => Rational::one(),
            }
        } else {
            let succ = graph.successors(a).iter().map(|&b| &f[b]);
            let pick = match graph.owners()[a] {
                Owner::Max => succ.max(),
                Owner::Min => succ.min(),
            };
            lambda * pick.expect("non-sink has a successor")
        };
        image == f[a]
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    Optimal,
    Violating,
    StronglyViolating,
    Neutral,
}

impl PairClass {
    pub fn is_violating(self) -> bool {
        matches!(self, PairClass::Violating | PairClass::StronglyViolating)
    }
}

/// Classifies an arbitrary node pair `(a, b)`, edge or not.
pub fn classify_pair(a: usize, b: usize, delta: &DnpValues, owners: &[Owner]) -> PairClass {
    let da = delta.get(a);
    let db = delta.get(b);
    let strongly = match owners[a] {
        Owner::Min => da.is_positive() && db.is_negative(),
        Owner::Max => da.is_negative() && db.is_positive(),
    };
    if strongly {
        return PairClass::StronglyViolating;
    }
    let target = db.scale_by_lambda();
    match (owners[a], da.cmp(&target)) {
        (_, Ordering::Equal) => PairClass::Optimal,
        (Owner::Max, Ordering::Less) | (Owner::Min, Ordering::Greater) => PairClass::Violating,
        _ => PairClass::Neutral,
    }
}

/// The pair `(f, g)` of level-count vectors, each of length `2n - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub f: Vec<u32>,
    pub g: Vec<u32>,
}

pub fn signature(delta: &DnpValues, owners: &[Owner]) -> Signature {
    let n = owners.len();
    let len = 2 * n - 1;
    let mut f = vec![0u32; len];
    let mut g = vec![0u32; len];
    // Level i ≥ 1 occupies coordinates 2i-1 and 2i (zero based): first the
    // player who moves towards the sink, then the other.
    let slot = |k: u32, first: bool| -> usize {
        if k == 0 {
            0
        } else {
            2 * k as usize - 1 + usize::from(!first)
        }
    };
    for (v, d) in delta.iter().enumerate() {
        match d {
            DnpValue::Pos(k) => f[slot(k, owners[v] == Owner::Max)] += 1,
            DnpValue::Neg(k) => g[slot(k, owners[v] == Owner::Min)] += 1,
            DnpValue::Zero => {}
        }
    }
    Signature { f, g }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("vectors of different lengths ({0} vs {1})")]
pub struct LengthMismatch(pub usize, pub usize);

/// Lexicographic order with the integer order reversed on the odd (1-based)
/// coordinates.
pub fn alt_lex_compare(u: &[u32], v: &[u32]) -> Result<Ordering, LengthMismatch> {
    if u.len() != v.len() {
        return Err(LengthMismatch(u.len(), v.len()));
    }
    for (i, (a, b)) in u.iter().zip(v).enumerate() {
        if a != b {
            // zero-based even index = one-based odd coordinate
            return Ok(if i % 2 == 0 { b.cmp(a) } else { a.cmp(b) });
        }
    }
    Ok(Ordering::Equal)
}

/// `(-v₁, v₂ - v₃, …, v_{2n-2} - v_{2n-1})`.
pub fn transformed_signature(v: &[u32]) -> Vec<i64> {
    assert!(v.len() % 2 == 1, "signature vectors have odd length");
    let mut out = Vec::with_capacity(v.len() / 2 + 1);
    out.push(-(v[0] as i64));
    for pair in v[1..].chunks(2) {
        out.push(pair[0] as i64 - pair[1] as i64);
    }
    out
}

/// Whether `v` is a possible level-count vector: norm at most `n`, and once
/// the leading coordinate or some level pair is zero, everything after it is
/// zero. For bipartite graphs only one side of each level can be populated.
pub fn satisfies_signature_constraints(v: &[u32], bipartite: bool) -> bool {
    let n = v.len().div_ceil(2);
    if v.iter().map(|&x| x as usize).sum::<usize>() > n {
        return false;
    }
    let mut closed = v[0] == 0;
    for (i, pair) in v[1..].chunks(2).enumerate() {
        let level = i + 1;
        let (first, second) = (pair[0], pair[1]);
        if closed && (first > 0 || second > 0) {
            return false;
        }
        if bipartite && ((level % 2 == 0 && first > 0) || (level % 2 == 1 && second > 0)) {
            return false;
        }
        if first == 0 && second == 0 {
            closed = true;
        }
    }
    true
}

/// Number of vectors satisfying [`satisfies_signature_constraints`] with
/// norm at most `norm_cap`.
pub fn count_signature_space(n: usize, bipartite: bool, norm_cap: usize) -> BigUint {
    assert!(n >= 1);
    let cap = norm_cap.min(n);
    // ways[s]: number of sequences of t non-zero level pairs with total s,
    // summed over t = 0..=n-1.
    let mut row = vec![BigUint::zero(); cap + 1];
    row[0] = BigUint::one();
    let mut total = row.clone();
    for _ in 1..n {
        let mut next = vec![BigUint::zero(); cap + 1];
        for (s, ways) in row.iter().enumerate() {
            if ways.is_zero() {
                continue;
            }
            for add in 1..=cap - s {
                let choices = if bipartite { 1u32 } else { add as u32 + 1 };
                next[s + add] += ways * choices;
            }
        }
        for (t, w) in total.iter_mut().zip(&next) {
            *t += w;
        }
        row = next;
    }
    let mut prefix = vec![BigUint::zero(); cap + 1];
    let mut acc = BigUint::zero();
    for (s, w) in total.iter().enumerate() {
        acc += w;
        prefix[s] = acc.clone();
    }
    let mut count = BigUint::one();
    for lead in 1..=cap {
        count += &prefix[cap - lead];
    }
    count
}
