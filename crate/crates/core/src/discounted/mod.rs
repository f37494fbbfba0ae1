//! Value iteration over the optimality polyhedron of a discounted game.
//!
//! The iterate `x` always satisfies `x_a >= w + λ x_b` on Max edges and
//! `x_a <= w + λ x_b` on Min edges. Each step moves `x` along the DNP values
//! of its tight subgraph until a new edge becomes tight, and stops once the
//! tight subgraph has no sinks.

pub mod simplex;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dnp::{classify_pair, dnp_solve, DnpValues, PairClass, Subgraph};
use crate::error::{input_error, SolveError};
use crate::game::{GameGraph, GameKind, GameSpec, Owner};
use crate::json::rational_to_json;
use crate::monitor::{step_bound, IterationMonitor, MonitorMode, MonitorReport};
use crate::weight::Rational;
use simplex::{find_vertex, LinearConstraint, Relation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizeStrategy {
    /// Keep the shifted point as is.
    PassThrough,
    /// Replace it by a basic feasible point of the system with the tight
    /// edges as equalities.
    ExactVertex,
    /// `PassThrough` up to 16 nodes, `ExactVertex` above.
    #[default]
    Auto,
}

impl RealizeStrategy {
    fn resolve(self, n: usize) -> RealizeStrategy {
        match self {
            RealizeStrategy::Auto if n <= 16 => RealizeStrategy::PassThrough,
            RealizeStrategy::Auto => RealizeStrategy::ExactVertex,
            s => s,
        }
    }
}

/// Deliberate solver corruption for testing the verification harness.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Fault {
    #[default]
    None,
    /// Flip one comparison inside the main loop.
    FlipComparison,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DiscountedOptions {
    pub realize: RealizeStrategy,
    pub monitor: bool,
    #[doc(hidden)]
    pub fault: Fault,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedronPoint {
    pub coords: Vec<Rational>,
    pub tight: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepReport {
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    pub binding: Vec<usize>,
    #[serde(serialize_with = "ser_rationals")]
    pub delta: Vec<Rational>,
    pub pre_tight: Vec<usize>,
    pub post_tight: Vec<usize>,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    rational_to_json(r).serialize(s)
}

fn ser_rationals<S: serde::Serializer>(r: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(rational_to_json))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedSolution {
    pub values: Vec<Rational>,
    pub iterations: usize,
    pub steps: Vec<StepReport>,
    pub monitor: Option<MonitorReport>,
}

/// An edge whose inequality fails at the given point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Infeasible {
    pub edge: usize,
}

/// Slack of edge `e` at `x`; non-negative iff the edge inequality holds.
pub fn slack(graph: &GameGraph<Rational>, lambda: &Rational, x: &[Rational], e: usize) -> Rational {
    let edge = &graph.edges[e];
    let rhs = &edge.weight + lambda * &x[edge.to];
    match graph.owners[edge.from] {
        Owner::Max => &x[edge.from] - rhs,
        Owner::Min => rhs - &x[edge.from],
    }
}

/// Edge indices with zero slack, or the first edge with negative slack.
pub fn tight_edges(graph: &GameGraph<Rational>, lambda: &Rational, x: &[Rational]) -> Result<Vec<usize>, Infeasible> {
    let mut tight = Vec::new();
    for e in 0..graph.edges.len() {
        let s = slack(graph, lambda, x, e);
        if s.is_negative() {
            return Err(Infeasible { edge: e });
        }
        if s.is_zero() {
            tight.push(e);
        }
    }
    Ok(tight)
}

fn max_abs(graph: &GameGraph<Rational>) -> Rational {
    graph
        .edges
        .iter()
        .map(|e| e.weight.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `±W/(1-λ)` on Max/Min nodes.
pub fn initial_point(graph: &GameGraph<Rational>, lambda: &Rational) -> Result<PolyhedronPoint, Infeasible> {
    let bound = max_abs(graph) / (Rational::one() - lambda);
    let coords: Vec<Rational> = graph
        .owners
        .iter()
        .map(|o| match o {
            Owner::Max => bound.clone(),
            Owner::Min => -bound.clone(),
        })
        .collect();
    let tight = tight_edges(graph, lambda, &coords)?;
    Ok(PolyhedronPoint { coords, tight })
}

fn pairs(graph: &GameGraph<Rational>, edges: &[usize]) -> Vec<(usize, usize)> {
    edges.iter().map(|&e| (graph.edges[e].from, graph.edges[e].to)).collect()
}

/// DNP values of the tight subgraph, symbolic and instantiated at `λ`.
pub fn feasible_shift(graph: &GameGraph<Rational>, lambda: &Rational, tight: &[usize]) -> (DnpValues, Vec<Rational>) {
    let delta = dnp_solve(&Subgraph::new(&graph.owners, &pairs(graph, tight)));
    let numeric = delta.instantiate(lambda);
    (delta, numeric)
}

/// Rate at which the slack of `e` changes along `delta`.
fn rate(graph: &GameGraph<Rational>, lambda: &Rational, delta: &[Rational], e: usize) -> Rational {
    let edge = &graph.edges[e];
    let lhs = &delta[edge.from];
    let rhs = lambda * &delta[edge.to];
    match graph.owners[edge.from] {
        Owner::Max => lhs - rhs,
        Owner::Min => rhs - lhs,
    }
}

/// Largest step along `delta` that stays in the polyhedron, together with
/// the edges that become tight there. `None` if no edge bounds the step.
pub fn epsilon_max(
    graph: &GameGraph<Rational>,
    lambda: &Rational,
    x: &[Rational],
    delta: &[Rational],
) -> Option<(Rational, Vec<usize>)> {
    epsilon_max_with(graph, lambda, x, delta, Fault::None)
}

fn epsilon_max_with(
    graph: &GameGraph<Rational>,
    lambda: &Rational,
    x: &[Rational],
    delta: &[Rational],
    fault: Fault,
) -> Option<(Rational, Vec<usize>)> {
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for e in 0..graph.edges.len() {
        let s = slack(graph, lambda, x, e);
        if s.is_zero() {
            continue;
        }
        let r = rate(graph, lambda, delta, e);
        if !r.is_negative() {
            continue;
        }
        let root = s / -r;
        match &mut best {
            None => best = Some((root, vec![e])),
            Some((eps, binding)) => {
                let better = match fault {
                    Fault::None => root < *eps,
                    Fault::FlipComparison => root > *eps,
                };
                if better {
                    *eps = root;
                    *binding = vec![e];
                } else if root == *eps {
                    binding.push(e);
                }
            }
        }
    }
    best
}

/// The edge system with `equalities` forced tight, in the form used by the
/// simplex routine.
fn edge_system(graph: &GameGraph<Rational>, lambda: &Rational, equalities: &[usize]) -> Vec<LinearConstraint> {
    let mut forced = vec![false; graph.edges.len()];
    for &e in equalities {
        forced[e] = true;
    }
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let coeffs = if e.from == e.to {
                vec![(e.from, Rational::one() - lambda)]
            } else {
                vec![(e.from, Rational::one()), (e.to, -lambda.clone())]
            };
            let relation = if forced[i] {
                Relation::Eq
            } else {
                match graph.owners[e.from] {
                    Owner::Max => Relation::Ge,
                    Owner::Min => Relation::Le,
                }
            };
            LinearConstraint { coeffs, relation, rhs: e.weight.clone() }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotFound;

/// A point of the polyhedron whose tight set contains `required`.
pub fn realize_graph(
    graph: &GameGraph<Rational>,
    lambda: &Rational,
    required: &[usize],
    witness: &[Rational],
    strategy: RealizeStrategy,
) -> Result<Vec<Rational>, NotFound> {
    match strategy.resolve(graph.n()) {
        RealizeStrategy::PassThrough => Ok(witness.to_vec()),
        _ => find_vertex(graph.n(), &edge_system(graph, lambda, required)).ok_or(NotFound),
    }
}

/// Whether `x` solves the optimality equations exactly.
pub fn check_optimality(graph: &GameGraph<Rational>, lambda: &Rational, x: &[Rational]) -> bool {
    if x.len() != graph.n() {
        return false;
    }
    (0..graph.n()).all(|a| {
        let best = graph.out_edges(a).iter().map(|&e| {
            let edge = &graph.edges[e];
            &edge.weight + lambda * &x[edge.to]
        });
        let best = match graph.owners[a] {
            Owner::Max => best.max(),
            Owner::Min => best.min(),
        };
        best.as_ref() == Some(&x[a])
    })
}

fn has_sink(graph: &GameGraph<Rational>, tight: &[usize]) -> bool {
    let mut out = vec![false; graph.n()];
    for &e in tight {
        out[graph.edges[e].from] = true;
    }
    out.contains(&false)
}

struct Trace {
    points: Vec<Vec<Rational>>,
    tight: Vec<Vec<usize>>,
}

impl Trace {
    fn fail(&self, message: String) -> SolveError {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| Value::Array(p.iter().map(rational_to_json).collect()))
            .collect();
        SolveError::Internal {
            trace: json!({ "message": message, "points": points, "tight": self.tight }),
            message,
        }
    }
}

/// Solves a discounted game given in index form.
pub fn solve_discounted_graph(
    graph: &GameGraph<Rational>,
    lambda: &Rational,
    options: &DiscountedOptions,
) -> Result<DiscountedSolution, SolveError> {
    let n = graph.n();
    let strategy = options.realize.resolve(n);
    let mut point = initial_point(graph, lambda).map_err(|inf| SolveError::Internal {
        message: format!("initial point violates edge {}", inf.edge),
        trace: Value::Null,
    })?;
    let mut trace = Trace { points: vec![point.coords.clone()], tight: vec![point.tight.clone()] };
    let mut monitor = if options.monitor {
        Some(IterationMonitor::new(graph.owners.clone(), MonitorMode::Plain, &pairs(graph, &point.tight)).map_err(|v| trace.fail(v.to_string()))?)
    } else {
        None
    };
    let bipartite = graph.is_bipartite();
    let (_, bound) = step_bound(n, MonitorMode::Plain, bipartite);
    let mut steps = Vec::new();

    while has_sink(graph, &point.tight) {
        if num_bigint::BigUint::from(steps.len()) >= bound {
            return Err(trace.fail(format!("iteration count exceeds the bound {bound}")));
        }
        let (delta, numeric) = feasible_shift(graph, lambda, &point.tight);
        if numeric.iter().all(|d| d.is_zero()) {
            return Err(trace.fail("zero shift at a non-optimal point".into()));
        }
        for &e in &point.tight {
            if rate(graph, lambda, &numeric, e).is_negative() {
                return Err(trace.fail(format!("shift is infeasible on tight edge {e}")));
            }
        }
        let Some((epsilon, binding)) = epsilon_max_with(graph, lambda, &point.coords, &numeric, options.fault) else {
            return Err(trace.fail("no edge bounds the step".into()));
        };
        if !epsilon.is_positive() {
            return Err(trace.fail(format!("non-positive step {epsilon}")));
        }
        let shifted: Vec<Rational> = point
            .coords
            .iter()
            .zip(&numeric)
            .map(|(x, d)| x + &epsilon * d)
            .collect();
        let shifted_tight = tight_edges(graph, lambda, &shifted)
            .map_err(|inf| trace.fail(format!("shifted point violates edge {}", inf.edge)))?;
        for &e in &point.tight {
            let edge = &graph.edges[e];
            if classify_pair(edge.from, edge.to, &delta, &graph.owners) == PairClass::Optimal
                && shifted_tight.binary_search(&e).is_err()
            {
                return Err(trace.fail(format!("optimal edge {e} lost its tightness")));
            }
        }
        if shifted_tight.iter().all(|e| point.tight.binary_search(e).is_ok()) {
            return Err(trace.fail("no new tight edge".into()));
        }
        let next = realize_graph(graph, lambda, &shifted_tight, &shifted, strategy)
            .map_err(|_| trace.fail("realize_graph found no point".into()))?;
        let next_tight = tight_edges(graph, lambda, &next)
            .map_err(|inf| trace.fail(format!("realized point violates edge {}", inf.edge)))?;
        if shifted_tight.iter().any(|e| next_tight.binary_search(e).is_err()) {
            return Err(trace.fail("realized point lost a required tight edge".into()));
        }
        trace.points.push(next.clone());
        trace.tight.push(next_tight.clone());
        if let Some(m) = monitor.as_mut() {
            m.observe(&pairs(graph, &next_tight)).map_err(|v| trace.fail(v.to_string()))?;
        }
        steps.push(StepReport {
            epsilon,
            binding,
            delta: numeric,
            pre_tight: std::mem::take(&mut point.tight),
            post_tight: next_tight.clone(),
        });
        point = PolyhedronPoint { coords: next, tight: next_tight };
    }
    if !check_optimality(graph, lambda, &point.coords) {
        return Err(trace.fail("final point does not solve the optimality equations".into()));
    }
    let report = monitor.map(|m| m.finalize(bipartite));
    if let Some(r) = &report {
        if !r.pass {
            return Err(trace.fail(r.failure.clone().unwrap_or_default()));
        }
    }
    Ok(DiscountedSolution { values: point.coords, iterations: steps.len(), steps, monitor: report })
}

pub fn solve_discounted(spec: &GameSpec, options: &DiscountedOptions) -> Result<DiscountedSolution, SolveError> {
    if let Some(err) = input_error(spec) {
        return Err(err);
    }
    let GameKind::Discounted { lambda } = &spec.kind else {
        return Err(SolveError::Input(format!("expected a discounted game, got {}", spec.kind.tag())));
    };
    let graph = spec
        .rational_graph()
        .ok_or_else(|| SolveError::Input("discounted games need rational weights".into()))?;
    solve_discounted_graph(&graph, lambda, options)
}
