//! The game model shared by every solver.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::weight::{GroupWeight, LexWeight, Rational, WeightValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Max,
    Min,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Max => Owner::Min,
            Owner::Min => Owner::Max,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Owner::Max => "max",
            Owner::Min => "min",
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: String,
    pub owner: Owner,
}

/// A weighted edge between node indices. The edge id is its position in
/// [`GameSpec::edges`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: WeightValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    Discounted { lambda: Rational },
    Energy,
    MeanPayoffDecision { threshold: Rational },
}

impl GameKind {
    pub fn tag(&self) -> &'static str {
        match self {
            GameKind::Discounted { .. } => "discounted",
            GameKind::Energy => "energy",
            GameKind::MeanPayoffDecision { .. } => "mpd",
        }
    }
}

/// A directed multigraph with a Max/Min partition and weighted edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameSpec {
    pub kind: GameKind,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoNodes,
    DuplicateNodeId(String),
    DanglingEdge { edge: usize },
    SinkNode(String),
    DiscountOutOfRange,
    MixedWeightDomains { edge: usize },
    LexWeightInDiscountedGame { edge: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoNodes => write!(f, "game has no nodes"),
            Violation::DuplicateNodeId(id) => write!(f, "duplicate node id {id:?}"),
            Violation::DanglingEdge { edge } => {
                write!(f, "edge #{edge} references a node index out of range")
            }
            Violation::SinkNode(id) => write!(f, "sink node {id:?} has no out-going edge"),
            Violation::DiscountOutOfRange => write!(f, "discount out of range (need 0 < lambda < 1)"),
            Violation::MixedWeightDomains { edge } => {
                write!(f, "edge #{edge} mixes lexicographic and plain rational weights")
            }
            Violation::LexWeightInDiscountedGame { edge } => {
                write!(f, "edge #{edge} has a lexicographic weight, which cannot be discounted")
            }
        }
    }
}

impl GameSpec {
    pub fn new(kind: GameKind, nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        Self { kind, nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn owners(&self) -> Vec<Owner> {
        self.nodes.iter().map(|n| n.owner).collect()
    }

    /// Every invariant violation, each naming the offending node or edge.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            out.push(Violation::NoNodes);
        }
        let mut seen = HashSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                out.push(Violation::DuplicateNodeId(node.id.clone()));
            }
        }
        let n = self.nodes.len();
        let mut degree = vec![0usize; n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                out.push(Violation::DanglingEdge { edge: i });
            } else {
                degree[e.from] += 1;
            }
        }
        for (node, d) in self.nodes.iter().zip(&degree) {
            if *d == 0 {
                out.push(Violation::SinkNode(node.id.clone()));
            }
        }
        if let GameKind::Discounted { lambda } = &self.kind {
            if !lambda.is_positive() || *lambda >= Rational::one() {
                out.push(Violation::DiscountOutOfRange);
            }
            for (i, e) in self.edges.iter().enumerate() {
                if e.weight.is_lex() {
                    out.push(Violation::LexWeightInDiscountedGame { edge: i });
                }
            }
        } else if let Some(first) = self.edges.first() {
            let lex = first.weight.is_lex();
            for (i, e) in self.edges.iter().enumerate() {
                if e.weight.is_lex() != lex {
                    out.push(Violation::MixedWeightDomains { edge: i });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn has_lex_weights(&self) -> bool {
        self.edges.iter().any(|e| e.weight.is_lex())
    }

    /// Largest `|w(e)|`; zero for a game without edges. Lexicographic
    /// weights use the componentwise absolute value.
    pub fn max_abs_weight(&self) -> WeightValue {
        if self.has_lex_weights() {
            let best = self
                .edges
                .iter()
                .map(|e| e.weight.to_lex().magnitude())
                .max()
                .unwrap_or_else(LexWeight::identity);
            WeightValue::Lex(best)
        } else {
            let best = self
                .edges
                .iter()
                .filter_map(|e| e.weight.as_rational())
                .map(|w| w.abs())
                .max()
                .unwrap_or_else(Rational::zero);
            WeightValue::Rational(best)
        }
    }

    /// True iff every edge joins nodes of different owners.
    pub fn is_bipartite(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.nodes[e.from].owner != self.nodes[e.to].owner)
    }

    pub fn lambda(&self) -> Option<&Rational> {
        match &self.kind {
            GameKind::Discounted { lambda } => Some(lambda),
            _ => None,
        }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// The graph with plain rational weights, if every weight is one.
    pub fn rational_graph(&self) -> Option<GameGraph<Rational>> {
        let weights = self
            .edges
            .iter()
            .map(|e| e.weight.as_rational().cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(self.graph_with(weights))
    }

    /// The graph viewed over the lexicographic group.
    pub fn lex_graph(&self) -> GameGraph<LexWeight> {
        let weights = self.edges.iter().map(|e| e.weight.to_lex()).collect();
        self.graph_with(weights)
    }

    pub fn graph_with<W>(&self, weights: Vec<W>) -> GameGraph<W> {
        assert_eq!(weights.len(), self.edges.len());
        GameGraph::new(
            self.owners(),
            self.edges
                .iter()
                .zip(weights)
                .map(|(e, w)| (e.from, e.to, w))
                .collect(),
        )
    }
}

/// Index-based adjacency view of a game used internally by the solvers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameGraph<W> {
    pub owners: Vec<Owner>,
    pub edges: Vec<GraphEdge<W>>,
    out: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge<W> {
    pub from: usize,
    pub to: usize,
    pub weight: W,
}

impl<W> GameGraph<W> {
    pub fn new(owners: Vec<Owner>, edges: Vec<(usize, usize, W)>) -> Self {
        let n = owners.len();
        let mut out = vec![Vec::new(); n];
        let edges: Vec<_> = edges
            .into_iter()
            .enumerate()
            .map(|(i, (from, to, weight))| {
                out[from].push(i);
                GraphEdge { from, to, weight }
            })
            .collect();
        Self { owners, edges, out }
    }

    pub fn n(&self) -> usize {
        self.owners.len()
    }

    /// Indices of the edges leaving `v`, in input order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn is_bipartite(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.owners[e.from] != self.owners[e.to])
    }

    pub fn map_weights<U>(&self, mut f: impl FnMut(&W) -> U) -> GameGraph<U> {
        GameGraph {
            owners: self.owners.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdge { from: e.from, to: e.to, weight: f(&e.weight) })
                .collect(),
            out: self.out.clone(),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::weight::{int, rat};

    pub fn node(id: &str, owner: Owner) -> Node {
        Node { id: id.to_string(), owner }
    }

    pub fn edge(from: usize, to: usize, w: i64) -> Edge {
        Edge { from, to, weight: WeightValue::Rational(int(w)) }
    }

    pub fn discounted(lambda: (i64, i64), nodes: Vec<Node>, edges: Vec<Edge>) -> GameSpec {
        GameSpec::new(GameKind::Discounted { lambda: rat(lambda.0, lambda.1) }, nodes, edges)
    }

    pub fn energy(nodes: Vec<Node>, edges: Vec<Edge>) -> GameSpec {
        GameSpec::new(GameKind::Energy, nodes, edges)
    }

    /// a∈Max, b∈Min, a→b 0, b→a 0, b→b 1.
    pub fn three_edge(lambda: (i64, i64)) -> GameSpec {
        discounted(
            lambda,
            vec![node("a", Owner::Max), node("b", Owner::Min)],
            vec![edge(0, 1, 0), edge(1, 0, 0), edge(1, 1, 1)],
        )
    }
}
