//! Solver-versus-oracle checks on single instances, shared by the CLI
//! `verify` command and the test suites.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::discounted::{solve_discounted_graph, DiscountedOptions, Fault, RealizeStrategy};
use crate::energy::{decide_mean_payoff_graph, solve_energy_graph, solve_energy_lex_graph, EnergyOptions};
use crate::game::{GameGraph, GameKind, GameSpec};
use crate::monitor::{step_bound, MonitorMode};
use crate::oracles::{brute_disc, brute_energy, brute_mean_payoff, WinnerPartition, DEFAULT_CAP};
use crate::weight::{LexWeight, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub iterations: usize,
    /// Step bound the iteration count is held to.
    #[serde(serialize_with = "as_decimal")]
    pub bound: BigUint,
    pub detail: Option<String>,
    /// Solver trace of an internal assertion failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<serde_json::Value>,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Verdict {
    fn fail(bound: BigUint, detail: String) -> Self {
        Self { ok: false, iterations: 0, bound, detail: Some(detail), trace: None }
    }

    fn pass(iterations: usize, bound: BigUint) -> Self {
        Self { ok: true, iterations, bound, detail: None, trace: None }
    }

    fn with_trace(mut self, error: &crate::SolveError) -> Self {
        self.trace = error.trace().cloned();
        self
    }

    /// `iterations / bound`.
    pub fn margin(&self) -> f64 {
        self.iterations as f64 / self.bound.to_f64().unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CheckOptions {
    pub monitor: bool,
    #[doc(hidden)]
    pub fault: Fault,
}

/// Solves with every strategy in `strategies` and compares with the oracle.
pub fn check_discounted(
    g: &GameGraph<Rational>,
    lambda: &Rational,
    strategies: &[RealizeStrategy],
    opts: &CheckOptions,
) -> Verdict {
    let (_, bound) = step_bound(g.n(), MonitorMode::Plain, g.is_bipartite());
    let oracle = match brute_disc(g, lambda, DEFAULT_CAP) {
        Ok(v) => v,
        Err(e) => return Verdict::fail(bound, format!("oracle: {e}")),
    };
    let mut iterations = 0;
    for &realize in strategies {
        let o = DiscountedOptions { realize, monitor: opts.monitor, fault: opts.fault };
        match solve_discounted_graph(g, lambda, &o) {
            Err(e) => return Verdict::fail(bound, format!("{realize:?}: {e}")).with_trace(&e),
            Ok(sol) => {
                if sol.values != oracle {
                    return Verdict::fail(bound, format!("{realize:?}: values differ from the oracle"));
                }
                if BigUint::from(sol.iterations) > bound {
                    return Verdict::fail(bound, format!("{realize:?}: {} iterations", sol.iterations));
                }
                if let Some(m) = sol.monitor.as_ref().filter(|m| !m.pass) {
                    return Verdict::fail(bound, format!("{realize:?}: monitor failed: {}", m.failure.as_deref().unwrap_or("?")));
                }
                iterations = iterations.max(sol.iterations);
            }
        }
    }
    Verdict::pass(iterations, bound)
}

fn compare_energy(
    label: &str,
    result: Result<crate::energy::EnergySolution, crate::SolveError>,
    oracle: &WinnerPartition,
) -> Result<usize, (String, Option<serde_json::Value>)> {
    let plain = |m: String| Err((m, None));
    match result {
        Err(e) => Err((format!("{label}: {e}"), e.trace().cloned())),
        Ok(sol) if sol.partition != *oracle => plain(format!("{label}: winners differ from the oracle")),
        Ok(sol) if sol.monitor.as_ref().is_some_and(|m| !m.pass) => {
            let why = sol.monitor.and_then(|m| m.failure).unwrap_or_default();
            plain(format!("{label}: monitor failed: {why}"))
        }
        Ok(sol) => {
            let (_, bound) = step_bound(sol.reduced_nodes, MonitorMode::Strong, true);
            if BigUint::from(sol.iterations) > bound {
                return plain(format!("{label}: {} iterations exceed {bound}", sol.iterations));
            }
            Ok(sol.iterations)
        }
    }
}

fn integer_graph(g: &GameGraph<Rational>) -> Option<GameGraph<i64>> {
    const LIMIT: i64 = 1 << 40;
    let fits = g.edges.iter().all(|e| {
        e.weight.is_integer() && e.weight.to_integer().to_i64().is_some_and(|v| v.abs() <= LIMIT)
    });
    fits.then(|| g.map_weights(|w| w.to_integer().to_i64().expect("checked above")))
}

/// Runs the perturbed and the integer pipeline and compares both with the
/// oracle.
pub fn check_energy(g: &GameGraph<Rational>, opts: &CheckOptions) -> Verdict {
    let (_, bound) = step_bound(g.n(), MonitorMode::Strong, true);
    let oracle = match integer_graph(g).map_or_else(|| brute_energy(g, DEFAULT_CAP), |gi| brute_energy(&gi, DEFAULT_CAP)) {
        Ok(v) => v,
        Err(e) => return Verdict::fail(bound, format!("oracle: {e}")),
    };
    let mut iterations = 0;
    for fast in [false, true] {
        let o = EnergyOptions { integer_fast_path: fast, monitor: opts.monitor, fault: opts.fault };
        let label = if fast { "integer" } else { "perturbed" };
        match compare_energy(label, solve_energy_graph(g, &o), &oracle) {
            Ok(it) => iterations = iterations.max(it),
            Err((d, trace)) => return Verdict { trace, ..Verdict::fail(bound, d) },
        }
    }
    Verdict::pass(iterations, bound)
}

/// Energy game with lexicographic weights against the oracle on the same
/// weights.
pub fn check_energy_lex(g: &GameGraph<LexWeight>, opts: &CheckOptions) -> Verdict {
    let (_, bound) = step_bound(g.n(), MonitorMode::Strong, true);
    let oracle = match brute_energy(g, DEFAULT_CAP) {
        Ok(v) => v,
        Err(e) => return Verdict::fail(bound, format!("oracle: {e}")),
    };
    let o = EnergyOptions { integer_fast_path: false, monitor: opts.monitor, fault: opts.fault };
    match compare_energy("lex", solve_energy_lex_graph(g, &o), &oracle) {
        Ok(it) => Verdict::pass(it, bound),
        Err((d, trace)) => Verdict { trace, ..Verdict::fail(bound, d) },
    }
}

/// Mean-payoff decision against the exact values of the oracle.
pub fn check_mean_payoff(g: &GameGraph<Rational>, threshold: &Rational, opts: &CheckOptions) -> Verdict {
    let (_, bound) = step_bound(g.n(), MonitorMode::Strong, true);
    let values = match brute_mean_payoff(g, DEFAULT_CAP) {
        Ok(v) => v,
        Err(e) => return Verdict::fail(bound, format!("oracle: {e}")),
    };
    let flags: Vec<bool> = values.iter().map(|v| v >= threshold).collect();
    let oracle = WinnerPartition::from_flags(&flags);
    let o = EnergyOptions { integer_fast_path: false, monitor: opts.monitor, fault: opts.fault };
    match compare_energy("mpd", decide_mean_payoff_graph(g, threshold, &o), &oracle) {
        Ok(iterations) => Verdict::pass(iterations, bound),
        Err((d, trace)) => Verdict { trace, ..Verdict::fail(bound, d) },
    }
}

/// Checks any valid game according to its kind.
pub fn check_game(spec: &GameSpec, strategies: &[RealizeStrategy], opts: &CheckOptions) -> Verdict {
    let Some(g) = spec.rational_graph() else {
        if spec.kind == GameKind::Energy {
            return check_energy_lex(&spec.lex_graph(), opts);
        }
        return Verdict::fail(BigUint::from(0u32), "rational weights required".into());
    };
    match &spec.kind {
        GameKind::Discounted { lambda } => check_discounted(&g, lambda, strategies, opts),
        GameKind::Energy => check_energy(&g, opts),
        GameKind::MeanPayoffDecision { threshold } => check_mean_payoff(&g, threshold, opts),
    }
}
