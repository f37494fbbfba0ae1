//! Runtime verification of DNP games iterations.
//!
//! A solver feeds the monitor the node-pair sets of its successive tight
//! graphs. Each transition must keep every optimal edge of the previous graph,
//! add a (strongly) violating pair, and move the signature vectors upward in
//! the alternating lexicographic order. At the end the number of steps is
//! compared with twice the size of the signature space.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dnp::{
    alt_lex_compare, classify_pair, count_signature_space, dnp_solve, signature,
    transformed_signature, DnpValues, PairClass, Signature, Subgraph,
};
use crate::game::Owner;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorMode {
    /// Discounted games: a violating pair appears in every step.
    Plain,
    /// Energy games: graphs are bipartite and acyclic and a strongly
    /// violating pair appears in every step.
    Strong,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub from: usize,
    pub to: usize,
    pub class: PairClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub step: usize,
    pub edges: Vec<(usize, usize)>,
    pub delta: DnpValues,
    pub signature: Signature,
    pub transformed_f: Vec<i64>,
    pub transformed_g: Vec<i64>,
    /// The new pair that witnessed this step; `None` for the first graph.
    pub evidence: Option<Evidence>,
}

impl IterationRecord {
    /// Record for the first graph of an iteration.
    pub fn initial(owners: &[Owner], edges: &[(usize, usize)]) -> Self {
        Self::build(owners, 0, edges, None)
    }

    fn build(owners: &[Owner], step: usize, edges: &[(usize, usize)], evidence: Option<Evidence>) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let delta = dnp_solve(&Subgraph::new(owners, &edges));
        let signature = signature(&delta, owners);
        let transformed_f = transformed_signature(&signature.f);
        let transformed_g = transformed_signature(&signature.g);
        Self { step, edges, delta, signature, transformed_f, transformed_g, evidence }
    }

    fn contains(&self, pair: (usize, usize)) -> bool {
        self.edges.binary_search(&pair).is_ok()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MonitorViolation {
    #[error("step {step}: optimal edge ({from}, {to}) dropped")]
    OptimalEdgeDropped { step: usize, from: usize, to: usize },
    #[error("step {step}: no violating pair")]
    NoViolatingPair { step: usize },
    #[error("step {step}: no strongly violating pair")]
    NoStronglyViolatingPair { step: usize },
    #[error("step {step}: signature {which} decreased")]
    SignatureDecreased { step: usize, which: char },
    #[error("step {step}: neither signature increased")]
    NoSignatureIncrease { step: usize },
    #[error("step {step}: signature {which} did not increase in strong mode")]
    StrongSignatureStalled { step: usize, which: char },
    #[error("step {step}: transformed signature {which} decreased")]
    TransformedDecreased { step: usize, which: char },
    #[error("step {step}: graph is not bipartite")]
    NotBipartite { step: usize },
    #[error("step {step}: graph has a cycle")]
    NotAcyclic { step: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepVerdict {
    pub step: usize,
    pub f_increased: bool,
    pub g_increased: bool,
    pub transformed_f_increased: bool,
    pub transformed_g_increased: bool,
}

fn as_decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonitorReport {
    pub mode: MonitorMode,
    pub n: usize,
    pub bipartite: bool,
    pub steps: usize,
    /// Size of the signature space the bound is taken over.
    #[serde(serialize_with = "as_decimal")]
    pub signature_space: BigUint,
    /// Twice the signature space size.
    #[serde(serialize_with = "as_decimal")]
    pub bound: BigUint,
    pub verdicts: Vec<StepVerdict>,
    pub failure: Option<String>,
    pub pass: bool,
}

impl MonitorReport {
    /// `steps / bound`, for reporting.
    pub fn ratio(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.steps as f64 / self.bound.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn is_bipartite(owners: &[Owner], edges: &[(usize, usize)]) -> bool {
    edges.iter().all(|&(a, b)| owners[a] != owners[b])
}

fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    // Kahn's algorithm
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
        indeg[b] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &b in &succ[v] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                queue.push(b);
            }
        }
    }
    seen == n
}

fn check_strong_shape(owners: &[Owner], rec: &IterationRecord) -> Result<(), MonitorViolation> {
    if !is_bipartite(owners, &rec.edges) {
        return Err(MonitorViolation::NotBipartite { step: rec.step });
    }
    if !is_acyclic(owners.len(), &rec.edges) {
        return Err(MonitorViolation::NotAcyclic { step: rec.step });
    }
    Ok(())
}

fn check_transition(
    owners: &[Owner],
    prev: &IterationRecord,
    next: &IterationRecord,
    mode: MonitorMode,
) -> Result<StepVerdict, MonitorViolation> {
    let step = next.step;
    for &(a, b) in &prev.edges {
        if classify_pair(a, b, &prev.delta, owners) == PairClass::Optimal && !next.contains((a, b)) {
            return Err(MonitorViolation::OptimalEdgeDropped { step, from: a, to: b });
        }
    }
    let wanted = |c: PairClass| match mode {
        MonitorMode::Plain => c.is_violating(),
        MonitorMode::Strong => c == PairClass::StronglyViolating,
    };
    let witnessed = next
        .edges
        .iter()
        .any(|&(a, b)| wanted(classify_pair(a, b, &prev.delta, owners)));
    if !witnessed {
        return Err(match mode {
            MonitorMode::Plain => MonitorViolation::NoViolatingPair { step },
            MonitorMode::Strong => MonitorViolation::NoStronglyViolatingPair { step },
        });
    }
    if mode == MonitorMode::Strong {
        check_strong_shape(owners, next)?;
    }

    let f = alt_lex_compare(&next.signature.f, &prev.signature.f).expect("same length");
    let g = alt_lex_compare(&next.signature.g, &prev.signature.g).expect("same length");
    if f == Ordering::Less {
        return Err(MonitorViolation::SignatureDecreased { step, which: 'f' });
    }
    if g == Ordering::Less {
        return Err(MonitorViolation::SignatureDecreased { step, which: 'g' });
    }
    match mode {
        MonitorMode::Plain if f == Ordering::Equal && g == Ordering::Equal => {
            return Err(MonitorViolation::NoSignatureIncrease { step });
        }
        MonitorMode::Strong if f != Ordering::Greater => {
            return Err(MonitorViolation::StrongSignatureStalled { step, which: 'f' });
        }
        MonitorMode::Strong if g != Ordering::Greater => {
            return Err(MonitorViolation::StrongSignatureStalled { step, which: 'g' });
        }
        _ => {}
    }

    let tf = next.transformed_f.cmp(&prev.transformed_f);
    let tg = next.transformed_g.cmp(&prev.transformed_g);
    if f == Ordering::Greater && tf == Ordering::Less {
        return Err(MonitorViolation::TransformedDecreased { step, which: 'f' });
    }
    if g == Ordering::Greater && tg == Ordering::Less {
        return Err(MonitorViolation::TransformedDecreased { step, which: 'g' });
    }
    Ok(StepVerdict {
        step,
        f_increased: f == Ordering::Greater,
        g_increased: g == Ordering::Greater,
        transformed_f_increased: tf == Ordering::Greater,
        transformed_g_increased: tg == Ordering::Greater,
    })
}

/// Verifies that `next_edges` is one step of a (strong) DNP games iteration
/// from `prev` and returns its record.
pub fn record_step(
    owners: &[Owner],
    prev: &IterationRecord,
    next_edges: &[(usize, usize)],
    mode: MonitorMode,
) -> Result<IterationRecord, MonitorViolation> {
    let mut next = IterationRecord::build(owners, prev.step + 1, next_edges, None);
    check_transition(owners, prev, &next, mode)?;
    next.evidence = next.edges.iter().find_map(|&(a, b)| {
        let class = classify_pair(a, b, &prev.delta, owners);
        let ok = match mode {
            MonitorMode::Plain => class.is_violating(),
            MonitorMode::Strong => class == PairClass::StronglyViolating,
        };
        ok.then_some(Evidence { from: a, to: b, class })
    });
    Ok(next)
}

/// The step bound for an `n`-node iteration.
pub fn step_bound(n: usize, mode: MonitorMode, bipartite: bool) -> (BigUint, BigUint) {
    thread_local! {
        static CACHE: RefCell<HashMap<(usize, MonitorMode, bool), (BigUint, BigUint)>> = RefCell::new(HashMap::new());
    }
    CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, mode, bipartite))
            .or_insert_with(|| {
                let space = match mode {
                    MonitorMode::Plain => count_signature_space(n.max(1), bipartite, n.max(1)),
                    MonitorMode::Strong => count_signature_space(n.max(1), true, n / 2),
                };
                let bound = &space * 2u32;
                (space, bound)
            })
            .clone()
    })
}

/// Re-checks every transition of `records` and compares the number of
/// steps with the bound.
pub fn finalize(owners: &[Owner], records: &[IterationRecord], mode: MonitorMode, bipartite: bool) -> MonitorReport {
    let n = owners.len();
    let steps = records.len().saturating_sub(1);
    let (signature_space, bound) = step_bound(n, mode, bipartite);
    let mut verdicts = Vec::with_capacity(steps);
    let mut failure = None;
    if mode == MonitorMode::Strong {
        if let Some(first) = records.first() {
            if let Err(v) = check_strong_shape(owners, first) {
                failure = Some(v.to_string());
            }
        }
    }
    for pair in records.windows(2) {
        match check_transition(owners, &pair[0], &pair[1], mode) {
            Ok(v) => verdicts.push(v),
            Err(v) => {
                failure.get_or_insert(v.to_string());
            }
        }
    }
    if failure.is_none() && BigUint::from(steps) > bound {
        failure = Some(format!("{steps} steps exceed the bound {bound}"));
    }
    MonitorReport {
        mode,
        n,
        bipartite,
        steps,
        signature_space,
        bound,
        verdicts,
        pass: failure.is_none(),
        failure,
    }
}

/// Stateful wrapper used by the solvers.
#[derive(Clone, Debug)]
pub struct IterationMonitor {
    owners: Vec<Owner>,
    mode: MonitorMode,
    records: Vec<IterationRecord>,
}

impl IterationMonitor {
    pub fn new(owners: Vec<Owner>, mode: MonitorMode, initial_edges: &[(usize, usize)]) -> Result<Self, MonitorViolation> {
        let first = IterationRecord::initial(&owners, initial_edges);
        if mode == MonitorMode::Strong {
            check_strong_shape(&owners, &first)?;
        }
        Ok(Self { owners, mode, records: vec![first] })
    }

    pub fn observe(&mut self, next_edges: &[(usize, usize)]) -> Result<(), MonitorViolation> {
        let prev = self.records.last().expect("monitor starts with a record");
        let next = record_step(&self.owners, prev, next_edges, self.mode)?;
        self.records.push(next);
        Ok(())
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn finalize(&self, bipartite: bool) -> MonitorReport {
        finalize(&self.owners, &self.records, self.mode, bipartite)
    }
}
