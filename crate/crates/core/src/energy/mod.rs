//! Energy games by value iteration over the polyhedron of potentials, and
//! the mean-payoff decision problem on top of it.
//!
//! Pipeline: decide trivial nodes and cycles, reduce to a bipartite game,
//! perturb every weight by a formal `+ρ`, then iterate. The iterate always
//! satisfies `x_a >= w + x_b` on Max edges and `x_a <= w + x_b` on Min
//! edges; each step raises the nodes of positive DNP value until a new edge
//! becomes tight.

pub mod pratt;
pub mod reduce;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dnp::{classify_pair, dnp_solve, DnpValue, PairClass, Subgraph};
use crate::error::{input_error, SolveError};
use crate::game::{Edge, GameGraph, GameKind, GameSpec, Owner};
use crate::monitor::{step_bound, IterationMonitor, MonitorMode, MonitorReport};
use crate::oracles::WinnerPartition;
use crate::paths::{find_cycle, Arc};
use crate::weight::{GroupWeight, LexWeight, Rational, WeightValue};
use pratt::{pratt_realize, DifferenceSystem};
use reduce::{bipartite_reduce, eliminate_trivial, ReductionCertificate, UnderlyingPath};

pub use crate::discounted::Fault;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EnergyOptions {
    /// Replace the formal perturbation by `w ↦ (n+1)·w + 1` on integer
    /// weights (after scaling by the common denominator).
    pub integer_fast_path: bool,
    pub monitor: bool,
    #[doc(hidden)]
    pub fault: Fault,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySolution {
    pub partition: WinnerPartition,
    pub certificate: ReductionCertificate,
    /// Nodes left for the main loop after trivial elimination.
    pub reduced_nodes: usize,
    pub iterations: usize,
    pub monitor: Option<MonitorReport>,
}

/// Maps every weight `w` to `(w, 1)`.
pub fn perturb_graph(g: &GameGraph<Rational>) -> GameGraph<LexWeight> {
    g.map_weights(|w| LexWeight::new(w.clone(), Rational::one()))
}

/// [`perturb_graph`] on a game description.
pub fn perturb(spec: &GameSpec) -> GameSpec {
    let edges = spec
        .edges
        .iter()
        .map(|e| {
            let base = e.weight.to_lex();
            Edge {
                from: e.from,
                to: e.to,
                weight: WeightValue::Lex(LexWeight::new(base.base, base.rho + Rational::one())),
            }
        })
        .collect();
    GameSpec::new(spec.kind.clone(), spec.nodes.clone(), edges)
}

fn slack<W: GroupWeight>(g: &GameGraph<W>, x: &[W], e: usize) -> W {
    let edge = &g.edges[e];
    let rhs = edge.weight.plus(&x[edge.to]);
    match g.owners[edge.from] {
        Owner::Max => x[edge.from].minus(&rhs),
        Owner::Min => rhs.minus(&x[edge.from]),
    }
}

fn tight_set<W: GroupWeight>(g: &GameGraph<W>, x: &[W]) -> Result<Vec<usize>, usize> {
    let mut tight = Vec::new();
    for e in 0..g.edges.len() {
        let s = slack(g, x, e);
        if s.below_zero() {
            return Err(e);
        }
        if s.is_identity() {
            tight.push(e);
        }
    }
    Ok(tight)
}

fn pairs<W>(g: &GameGraph<W>, edges: &[usize]) -> Vec<(usize, usize)> {
    edges.iter().map(|&e| (g.edges[e].from, g.edges[e].to)).collect()
}

/// The system of edge inequalities with `equalities` forced tight.
fn potential_system<W: GroupWeight>(g: &GameGraph<W>, equalities: &[usize]) -> DifferenceSystem<W> {
    let mut forced = vec![false; g.edges.len()];
    for &e in equalities {
        forced[e] = true;
    }
    let mut sys = DifferenceSystem::new(g.n());
    for (i, e) in g.edges.iter().enumerate() {
        // Max: x_b - x_a <= -w ; Min: x_a - x_b <= w
        let (a, b, c) = match g.owners[e.from] {
            Owner::Max => (e.to, e.from, e.weight.negated()),
            Owner::Min => (e.from, e.to, e.weight.clone()),
        };
        if forced[i] {
            sys.equal(a, b, c);
        } else {
            sys.at_most(a, b, c);
        }
    }
    sys
}

/// Outcome of the main loop on a bipartite game without zero cycles.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopOutcome {
    pub max_wins: Vec<bool>,
    pub iterations: usize,
    pub monitor: Option<MonitorReport>,
}

struct Trace {
    points: Vec<Vec<String>>,
    tight: Vec<Vec<usize>>,
}

impl Trace {
    fn push<W: GroupWeight>(&mut self, x: &[W], tight: &[usize]) {
        self.points.push(x.iter().map(|v| format!("{v:?}")).collect());
        self.tight.push(tight.to_vec());
    }

    fn fail(&self, message: String) -> SolveError {
        SolveError::Internal {
            trace: json!({ "message": message, "points": self.points, "tight": self.tight }),
            message,
        }
    }
}

/// Runs the iteration on a bipartite game whose weights admit no zero
/// cycles.
pub fn potential_iteration<W: GroupWeight>(g: &GameGraph<W>, monitor: bool, fault: Fault) -> Result<LoopOutcome, SolveError> {
    let n = g.n();
    let owners = &g.owners;
    let mut trace = Trace { points: Vec::new(), tight: Vec::new() };
    if n == 0 {
        return Ok(LoopOutcome { max_wins: Vec::new(), iterations: 0, monitor: None });
    }
    if !g.is_bipartite() {
        return Err(trace.fail("main loop needs a bipartite game".into()));
    }
    let big = g
        .edges
        .iter()
        .map(|e| e.weight.magnitude())
        .max()
        .unwrap_or_else(W::identity);
    let mut x: Vec<W> = owners
        .iter()
        .map(|o| match o {
            Owner::Max => big.clone(),
            Owner::Min => W::identity(),
        })
        .collect();
    let mut tight = tight_set(g, &x).map_err(|e| trace.fail(format!("initial point violates edge {e}")))?;
    trace.push(&x, &tight);
    let mut mon = if monitor {
        Some(IterationMonitor::new(owners.clone(), MonitorMode::Strong, &pairs(g, &tight)).map_err(|v| trace.fail(v.to_string()))?)
    } else {
        None
    };
    let (_, bound) = step_bound(n, MonitorMode::Strong, true);
    let mut iterations = 0usize;
    let all_arcs: Vec<Arc<()>> = g.edges.iter().map(|e| Arc::new(e.from, e.to, ())).collect();
    loop {
        if find_cycle(n, &all_arcs, &tight).is_some() {
            return Err(trace.fail("tight subgraph has a cycle".into()));
        }
        let delta = dnp_solve(&Subgraph::new(owners, &pairs(g, &tight)));
        if delta.iter().any(|d| d == DnpValue::Zero) {
            return Err(trace.fail("zero DNP value on an acyclic graph".into()));
        }
        let plus: Vec<bool> = delta.iter().map(|d| d.is_positive()).collect();
        let positive_side = |v: usize| match fault {
            Fault::None => plus[v],
            Fault::FlipComparison => !plus[v],
        };
        let strongly = |e: usize| {
            let edge = &g.edges[e];
            classify_pair(edge.from, edge.to, &delta, owners) == PairClass::StronglyViolating
        };
        if !(0..g.edges.len()).any(strongly) {
            break;
        }
        if num_bigint::BigUint::from(iterations) >= bound {
            return Err(trace.fail(format!("iteration count exceeds the bound {bound}")));
        }
        let chi: Vec<bool> = (0..n).map(positive_side).collect();
        // rate of e's slack along chi is -1, 0 or +1
        let falling = |e: usize| {
            let edge = &g.edges[e];
            let (a, b) = (chi[edge.from], chi[edge.to]);
            match owners[edge.from] {
                Owner::Max => !a && b,
                Owner::Min => a && !b,
            }
        };
        if let Some(&e) = tight.iter().find(|&&e| falling(e)) {
            return Err(trace.fail(format!("shift is infeasible on tight edge {e}")));
        }
        let mut eps: Option<W> = None;
        for e in (0..g.edges.len()).filter(|&e| falling(e)) {
            let s = slack(g, &x, e);
            if eps.as_ref().is_none_or(|cur| s < *cur) {
                eps = Some(s);
            }
        }
        let Some(eps) = eps else {
            return Err(trace.fail("no edge bounds the step".into()));
        };
        if !eps.above_zero() {
            return Err(trace.fail("non-positive step".into()));
        }
        let y: Vec<W> = x
            .iter()
            .zip(&chi)
            .map(|(v, &c)| if c { v.plus(&eps) } else { v.clone() })
            .collect();
        let y_tight = tight_set(g, &y).map_err(|e| trace.fail(format!("shifted point violates edge {e}")))?;
        for &e in &tight {
            let edge = &g.edges[e];
            if classify_pair(edge.from, edge.to, &delta, owners) == PairClass::Optimal && y_tight.binary_search(&e).is_err() {
                return Err(trace.fail(format!("optimal edge {e} lost its tightness")));
            }
        }
        let fresh: Vec<usize> = y_tight.iter().copied().filter(|e| tight.binary_search(e).is_err()).collect();
        if fresh.is_empty() {
            return Err(trace.fail("no new tight edge".into()));
        }
        if let Some(&e) = fresh.iter().find(|&&e| !strongly(e)) {
            return Err(trace.fail(format!("new tight edge {e} is not strongly violating")));
        }
        let next = pratt_realize(&potential_system(g, &y_tight))
            .map_err(|inf| trace.fail(format!("realization infeasible on constraints {:?}", inf.cycle)))?;
        let next_tight = tight_set(g, &next).map_err(|e| trace.fail(format!("realized point violates edge {e}")))?;
        if y_tight.iter().any(|e| next_tight.binary_search(e).is_err()) {
            return Err(trace.fail("realized point lost a required tight edge".into()));
        }
        trace.push(&next, &next_tight);
        if let Some(m) = mon.as_mut() {
            m.observe(&pairs(g, &next_tight)).map_err(|v| trace.fail(v.to_string()))?;
        }
        x = next;
        tight = next_tight;
        iterations += 1;
    }
    let report = mon.map(|m| m.finalize(true));
    if let Some(r) = &report {
        if !r.pass {
            return Err(trace.fail(r.failure.clone().unwrap_or_default()));
        }
    }
    let delta = dnp_solve(&Subgraph::new(owners, &pairs(g, &tight)));
    Ok(LoopOutcome { max_wins: delta.iter().map(|d| d.is_positive()).collect(), iterations, monitor: report })
}

/// Integer weights `w·L` for the least common denominator `L`.
fn integer_weights(g: &GameGraph<Rational>) -> Vec<BigInt> {
    let lcm = g
        .edges
        .iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.weight.denom()));
    g.edges
        .iter()
        .map(|e| e.weight.numer() * (&lcm / e.weight.denom()))
        .collect()
}

/// Machine-size copies of `values` if every one is at most `limit` in
/// absolute value.
fn small(values: &[BigInt], limit: i64) -> Option<Vec<i64>> {
    values
        .iter()
        .map(|v| v.to_i64().filter(|x| x.unsigned_abs() <= limit as u64))
        .collect()
}

// Keeps every potential, a sum of at most n+1 weights, far from overflow.
const SMALL_LIMIT: i64 = 1 << 40;

fn run_perturbed(g: &GameGraph<Rational>, options: &EnergyOptions) -> Result<LoopOutcome, SolveError> {
    let ints = integer_weights(g);
    let (m, f) = (options.monitor, options.fault);
    if options.integer_fast_path {
        let k = BigInt::from(g.n() as u64 + 1);
        let shifted: Vec<BigInt> = ints.iter().map(|w| w * &k + 1).collect();
        return match small(&shifted, SMALL_LIMIT) {
            Some(ws) => potential_iteration(&graph_with(g, ws), m, f),
            None => potential_iteration(&graph_with(g, shifted.into_iter().map(Rational::from_integer).collect()), m, f),
        };
    }
    // Scaling every base weight by the same positive integer changes neither
    // cycle signs nor tight sets, so exact machine integers can stand in.
    match small(&ints, SMALL_LIMIT) {
        Some(ws) => potential_iteration(&graph_with(g, ws.into_iter().map(|w| LexWeight::new(w, 1i64)).collect()), m, f),
        None => potential_iteration(&perturb_graph(g), m, f),
    }
}

fn graph_with<W, U>(g: &GameGraph<W>, weights: Vec<U>) -> GameGraph<U> {
    let mut it = weights.into_iter();
    g.map_weights(|_| it.next().expect("one weight per edge"))
}

/// Full pipeline on a game in index form with rational weights.
pub fn solve_energy_graph(g: &GameGraph<Rational>, options: &EnergyOptions) -> Result<EnergySolution, SolveError> {
    pipeline(g, |bip| run_perturbed(bip, options))
}

/// Full pipeline on weights that already carry a `ρ` coefficient. The
/// perturbation becomes a second, smaller infinitesimal: `w ↦ (w, (1, 0))`.
pub fn solve_energy_lex_graph(g: &GameGraph<LexWeight>, options: &EnergyOptions) -> Result<EnergySolution, SolveError> {
    let unit = LexWeight::new(Rational::one(), Rational::from_integer(0.into()));
    pipeline(g, |bip| {
        potential_iteration(&bip.map_weights(|w| LexWeight::new(w.clone(), unit.clone())), options.monitor, options.fault)
    })
}

fn pipeline<W: GroupWeight>(
    g: &GameGraph<W>,
    run: impl FnOnce(&GameGraph<W>) -> Result<LoopOutcome, SolveError>,
) -> Result<EnergySolution, SolveError> {
    let n = g.n();
    let elim = eliminate_trivial(g);
    let (bip, paths) = bipartite_reduce(&elim.reduced).map_err(|e| SolveError::Internal {
        message: format!("bipartite reduction: {e}"),
        trace: Value::Null,
    })?;
    let outcome = run(&bip)?;
    let mut max_wins = vec![false; n];
    for v in 0..n {
        if let Some(w) = elim.decided[v] {
            max_wins[v] = w == Owner::Max;
        }
    }
    for (i, &v) in elim.survivors.iter().enumerate() {
        max_wins[v] = outcome.max_wins[i];
    }
    let paths = paths
        .into_iter()
        .map(|p| UnderlyingPath {
            from: elim.survivors[p.from],
            to: elim.survivors[p.to],
            edges: p.edges.iter().map(|&e| elim.edge_map[e]).collect(),
        })
        .collect();
    Ok(EnergySolution {
        partition: WinnerPartition::from_flags(&max_wins),
        certificate: ReductionCertificate { decided: elim.evidence, paths },
        reduced_nodes: elim.survivors.len(),
        iterations: outcome.iterations,
        monitor: outcome.monitor,
    })
}

/// Rational weights go through [`solve_energy_graph`]; any lexicographic
/// weight sends the whole game through [`solve_energy_lex_graph`].
pub fn solve_energy(spec: &GameSpec, options: &EnergyOptions) -> Result<EnergySolution, SolveError> {
    if let Some(err) = input_error(spec) {
        return Err(err);
    }
    if spec.kind != GameKind::Energy {
        return Err(SolveError::Input(format!("expected an energy game, got {}", spec.kind.tag())));
    }
    match spec.rational_graph() {
        Some(g) => solve_energy_graph(&g, options),
        None => solve_energy_lex_graph(&spec.lex_graph(), options),
    }
}

/// Nodes whose mean-payoff value is at least `threshold`, via the energy
/// game with every weight lowered by `threshold`.
pub fn decide_mean_payoff_graph(
    g: &GameGraph<Rational>,
    threshold: &Rational,
    options: &EnergyOptions,
) -> Result<EnergySolution, SolveError> {
    solve_energy_graph(&g.map_weights(|w| w - threshold), options)
}

pub fn decide_mean_payoff(spec: &GameSpec, options: &EnergyOptions) -> Result<EnergySolution, SolveError> {
    if let Some(err) = input_error(spec) {
        return Err(err);
    }
    let GameKind::MeanPayoffDecision { threshold } = &spec.kind else {
        return Err(SolveError::Input(format!("expected a mean-payoff decision game, got {}", spec.kind.tag())));
    };
    match spec.rational_graph() {
        Some(g) => decide_mean_payoff_graph(&g, threshold, options),
        None => {
            let t = LexWeight::lift(threshold.clone());
            solve_energy_lex_graph(&spec.lex_graph().map_weights(|w| w.minus(&t)), options)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::*;
    use crate::oracles::{brute_energy, DEFAULT_CAP};
    use crate::weight::int;

    fn opts(fast: bool) -> EnergyOptions {
        EnergyOptions { integer_fast_path: fast, monitor: true, fault: Fault::None }
    }

    fn two_cycle(w1: i64, w2: i64) -> GameSpec {
        energy(vec![node("a", Owner::Max), node("b", Owner::Min)], vec![edge(0, 1, w1), edge(1, 0, w2)])
    }

    #[test]
    fn perturb_examples() {
        let p = perturb(&two_cycle(0, -1));
        assert_eq!(p.edges[0].weight, WeightValue::Lex(LexWeight::new(int(0), int(1))));
        assert_eq!(p.edges[1].weight, WeightValue::Lex(LexWeight::new(int(-1), int(1))));
        let cycle = LexWeight::new(int(0), int(1)).plus(&LexWeight::new(int(0), int(1)));
        assert!(cycle.above_zero());
        assert!(LexWeight::new(int(-1), int(1)).below_zero());
    }

    #[test]
    fn zero_cycle_is_won_by_max() {
        for fast in [false, true] {
            let s = solve_energy(&two_cycle(1, -1), &opts(fast)).unwrap();
            assert_eq!(s.partition.w_max, vec![0, 1]);
            assert_eq!(s.iterations, 0);
        }
    }

    #[test]
    fn lex_input_matches_oracle_and_perturbation() {
        // a zero cycle, a cycle that is negative only in ρ, and one that is
        // positive only in ρ
        let lex = |b: i64, r: i64| WeightValue::Lex(LexWeight::new(int(b), int(r)));
        let nodes = vec![node("a", Owner::Max), node("b", Owner::Min), node("c", Owner::Max), node("d", Owner::Min)];
        let edges = vec![
            Edge { from: 0, to: 1, weight: lex(1, 0) },
            Edge { from: 1, to: 0, weight: lex(-1, -1) },
            Edge { from: 1, to: 2, weight: lex(0, 0) },
            Edge { from: 2, to: 3, weight: lex(2, 1) },
            Edge { from: 3, to: 2, weight: lex(-2, 0) },
            Edge { from: 3, to: 0, weight: lex(0, 3) },
        ];
        let g = energy(nodes, edges);
        let oracle = brute_energy(&g.lex_graph(), DEFAULT_CAP).unwrap();
        let s = solve_energy(&g, &opts(false)).unwrap();
        assert_eq!(s.partition, oracle);
        assert!(s.monitor.is_none_or(|m| m.pass));
        for spec in [two_cycle(1, -1), two_cycle(1, -2), three_edge((1, 2))] {
            let spec = GameSpec::new(GameKind::Energy, spec.nodes, spec.edges);
            let plain = solve_energy(&spec, &opts(false)).unwrap();
            assert_eq!(solve_energy(&perturb(&spec), &opts(false)).unwrap().partition, plain.partition);
        }
    }

    #[test]
    fn negative_cycle_is_won_by_min() {
        for fast in [false, true] {
            let s = solve_energy(&two_cycle(1, -2), &opts(fast)).unwrap();
            assert_eq!(s.partition.w_min, vec![0, 1]);
            let s = solve_energy(&energy(vec![node("a", Owner::Max)], vec![edge(0, 0, -1)]), &opts(fast)).unwrap();
            assert_eq!(s.partition.w_min, vec![0]);
        }
    }

    #[test]
    fn mean_payoff_thresholds() {
        let mk = |t: i64| {
            GameSpec::new(
                GameKind::MeanPayoffDecision { threshold: int(t) },
                vec![node("a", Owner::Min)],
                vec![edge(0, 0, 3)],
            )
        };
        assert_eq!(decide_mean_payoff(&mk(2), &opts(false)).unwrap().partition.w_max, vec![0]);
        assert_eq!(decide_mean_payoff(&mk(3), &opts(false)).unwrap().partition.w_max, vec![0]);
        assert_eq!(decide_mean_payoff(&mk(4), &opts(false)).unwrap().partition.w_min, vec![0]);
    }

    #[test]
    fn iterating_game_matches_oracle() {
        // a∈Max chooses between a Min node with a losing loop and one whose
        // cycle back to a is positive.
        let g = energy(
            vec![node("a", Owner::Max), node("b", Owner::Min), node("c", Owner::Min), node("d", Owner::Max)],
            vec![
                edge(0, 1, 2),
                edge(0, 2, -1),
                edge(1, 0, -1),
                edge(1, 3, 0),
                edge(2, 0, 3),
                edge(3, 2, -3),
                edge(3, 1, -2),
            ],
        );
        let oracle = brute_energy(&g.rational_graph().unwrap(), DEFAULT_CAP).unwrap();
        for fast in [false, true] {
            let s = solve_energy(&g, &opts(fast)).unwrap();
            assert_eq!(s.partition, oracle);
            assert!(s.monitor.unwrap().pass);
        }
    }

    #[test]
    fn pratt_system_matches_tight_set() {
        let g = GameGraph::new(vec![Owner::Max, Owner::Min], vec![(0, 1, 3i64), (1, 0, -1)]);
        let x = pratt_realize(&potential_system(&g, &[0])).unwrap();
        assert_eq!(tight_set(&g, &x).unwrap(), vec![0]);
    }

    #[test]
    fn fault_is_detected() {
        let g = energy(
            vec![node("a", Owner::Max), node("b", Owner::Min)],
            vec![edge(0, 1, 1), edge(1, 0, -2), edge(1, 1, 5), edge(0, 0, -3)],
        );
        let o = EnergyOptions { fault: Fault::FlipComparison, ..opts(false) };
        let honest = solve_energy(&g, &opts(false));
        let broken = solve_energy(&g, &o);
        assert!(honest.is_ok());
        assert!(broken.is_err() || broken.unwrap().partition != honest.unwrap().partition);
    }
}
