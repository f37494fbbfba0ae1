//! Brute-force reference solvers for small games.
//!
//! Everything here enumerates positional strategies directly and shares no
//! code with the polyhedral solvers beyond the graph type and Bellman–Ford.

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::game::{GameGraph, Owner};
use crate::paths::{find_nonnegative_cycle, Arc};
use crate::weight::{GroupWeight, Rational};

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("strategy space of size {size} exceeds the cap {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("max-min and min-max differ at node {node}")]
    NotDetermined { node: usize },
}

/// A positional strategy: one out-edge for each node of `owner`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PositionalStrategy {
    pub owner: Owner,
    /// Edge index per node; `None` on the other player's nodes.
    pub choice: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WinnerPartition {
    pub w_max: Vec<usize>,
    pub w_min: Vec<usize>,
}

impl WinnerPartition {
    pub fn from_flags(max_wins: &[bool]) -> Self {
        let (w_max, w_min) = (0..max_wins.len()).partition(|&v| max_wins[v]);
        Self { w_max, w_min }
    }

    pub fn max_flags(&self, n: usize) -> Vec<bool> {
        let mut f = vec![false; n];
        for &v in &self.w_max {
            f[v] = true;
        }
        f
    }
}

fn space_size<W>(graph: &GameGraph<W>, owner: Option<Owner>) -> u128 {
    (0..graph.n())
        .filter(|&v| owner.is_none_or(|o| graph.owners[v] == o))
        .map(|v| graph.out_edges(v).len() as u128)
        .try_fold(1u128, |acc, d| acc.checked_mul(d))
        .unwrap_or(u128::MAX)
}

fn check_cap<W>(graph: &GameGraph<W>, owner: Option<Owner>, cap: u64) -> Result<(), OracleError> {
    let size = space_size(graph, owner);
    if size > cap as u128 {
        return Err(OracleError::CapExceeded { size, cap });
    }
    Ok(())
}

/// All positional strategies of `owner` in mixed-radix order, node 0 varying
/// fastest.
pub fn strategies<W>(graph: &GameGraph<W>, owner: Owner) -> impl Iterator<Item = PositionalStrategy> + '_ {
    let nodes: Vec<usize> = (0..graph.n()).filter(|&v| graph.owners[v] == owner).collect();
    let mut digits = vec![0usize; nodes.len()];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let mut choice = vec![None; graph.n()];
        for (i, &v) in nodes.iter().enumerate() {
            choice[v] = Some(graph.out_edges(v)[digits[i]]);
        }
        // advance
        done = true;
        for (i, &v) in nodes.iter().enumerate() {
            digits[i] += 1;
            if digits[i] < graph.out_edges(v).len() {
                done = false;
                break;
            }
            digits[i] = 0;
        }
        Some(PositionalStrategy { owner, choice })
    })
}

/// Edge taken at every node when both players follow their strategies.
fn joint(sigma: &PositionalStrategy, tau: &PositionalStrategy) -> Vec<usize> {
    sigma
        .choice
        .iter()
        .zip(&tau.choice)
        .map(|(s, t)| s.or(*t).expect("strategies cover all nodes"))
        .collect()
}

/// Discounted payoff from every node in the functional graph `next`.
fn play_values(graph: &GameGraph<Rational>, lambda: &Rational, next: &[usize]) -> Vec<Rational> {
    let n = graph.n();
    let mut value: Vec<Option<Rational>> = vec![None; n];
    for start in 0..n {
        if value[start].is_some() {
            continue;
        }
        // walk until a known node or a repeat
        let mut path = Vec::new();
        let mut pos = vec![usize::MAX; n];
        let mut v = start;
        while value[v].is_none() && pos[v] == usize::MAX {
            pos[v] = path.len();
            path.push(v);
            v = graph.edges[next[v]].to;
        }
        let mut stop = path.len();
        if value[v].is_none() {
            // path[pos[v]..] is a cycle
            let cycle = &path[pos[v]..];
            let mut num = Rational::zero();
            let mut factor = Rational::one();
            for &c in cycle {
                num += &factor * &graph.edges[next[c]].weight;
                factor *= lambda;
            }
            let head = num / (Rational::one() - factor);
            value[cycle[0]] = Some(head);
            for &c in cycle.iter().skip(1).rev() {
                let e = &graph.edges[next[c]];
                let x = &e.weight + lambda * value[e.to].as_ref().unwrap();
                value[c] = Some(x);
            }
            stop = pos[v];
        }
        for &u in path[..stop].iter().rev() {
            let e = &graph.edges[next[u]];
            let x = &e.weight + lambda * value[e.to].as_ref().unwrap();
            value[u] = Some(x);
        }
    }
    value.into_iter().map(Option::unwrap).collect()
}

/// Per-node `max_σ min_τ` and `min_τ max_σ` of the discounted payoff.
pub fn brute_disc_bounds(
    graph: &GameGraph<Rational>,
    lambda: &Rational,
    cap: u64,
) -> Result<(Vec<Rational>, Vec<Rational>), OracleError> {
    check_cap(graph, None, cap)?;
    let sigmas: Vec<_> = strategies(graph, Owner::Max).collect();
    let taus: Vec<_> = strategies(graph, Owner::Min).collect();
    let n = graph.n();
    // table[s][t] = payoff vector
    let table: Vec<Vec<Vec<Rational>>> = sigmas
        .iter()
        .map(|s| taus.iter().map(|t| play_values(graph, lambda, &joint(s, t))).collect())
        .collect();
    let mut maxmin = Vec::with_capacity(n);
    let mut minmax = Vec::with_capacity(n);
    for v in 0..n {
        let mm = table
            .iter()
            .map(|row| row.iter().map(|p| &p[v]).min().unwrap())
            .max()
            .unwrap();
        let nm = (0..taus.len())
            .map(|t| table.iter().map(|row| &row[t][v]).max().unwrap())
            .min()
            .unwrap();
        maxmin.push(mm.clone());
        minmax.push(nm.clone());
    }
    Ok((maxmin, minmax))
}

/// Exact values of a discounted game by double strategy enumeration. Fails if
/// max-min and min-max disagree anywhere.
pub fn brute_disc(graph: &GameGraph<Rational>, lambda: &Rational, cap: u64) -> Result<Vec<Rational>, OracleError> {
    let (maxmin, minmax) = brute_disc_bounds(graph, lambda, cap)?;
    if let Some(node) = (0..maxmin.len()).find(|&v| maxmin[v] != minmax[v]) {
        return Err(OracleError::NotDetermined { node });
    }
    Ok(maxmin)
}

/// Nodes from which a negative cycle of `arcs` can be reached.
fn reaches_negative_cycle<W: GroupWeight>(n: usize, arcs: &[Arc<W>]) -> Vec<bool> {
    // Bellman–Ford on the reversed graph: nodes whose distance keeps falling
    // after n rounds are reachable from a negative cycle there.
    let rev: Vec<Arc<W>> = arcs.iter().map(|a| Arc::new(a.to, a.from, a.weight.clone())).collect();
    let mut dist = vec![W::identity(); n];
    for _ in 0..n {
        for a in &rev {
            let cand = dist[a.from].plus(&a.weight);
            if cand < dist[a.to] {
                dist[a.to] = cand;
            }
        }
    }
    let mut bad = vec![false; n];
    for _ in 0..n {
        for a in &rev {
            let cand = dist[a.from].plus(&a.weight);
            if cand < dist[a.to] {
                dist[a.to] = cand;
                bad[a.to] = true;
            }
        }
    }
    // close under reachability in the reversed graph
    let mut stack: Vec<usize> = (0..n).filter(|&v| bad[v]).collect();
    while let Some(v) = stack.pop() {
        for a in rev.iter().filter(|a| a.from == v) {
            if !bad[a.to] {
                bad[a.to] = true;
                stack.push(a.to);
            }
        }
    }
    bad
}

fn restricted_arcs<W: Clone>(graph: &GameGraph<W>, strategy: &PositionalStrategy) -> Vec<Arc<W>> {
    graph
        .edges
        .iter()
        .enumerate()
        .filter(|(i, e)| strategy.choice[e.from].is_none_or(|c| c == *i))
        .map(|(_, e)| Arc::new(e.from, e.to, e.weight.clone()))
        .collect()
}

/// Energy winners: `v` is won by Max iff some Max strategy leaves only
/// non-negative cycles reachable from `v`.
pub fn brute_energy<W: GroupWeight>(graph: &GameGraph<W>, cap: u64) -> Result<WinnerPartition, OracleError> {
    check_cap(graph, Some(Owner::Max), cap)?;
    let n = graph.n();
    let mut max_wins = vec![false; n];
    for sigma in strategies(graph, Owner::Max) {
        let bad = reaches_negative_cycle(n, &restricted_arcs(graph, &sigma));
        for v in 0..n {
            max_wins[v] |= !bad[v];
        }
    }
    Ok(WinnerPartition::from_flags(&max_wins))
}

/// Nodes won by Min, computed from Min's side: some Min strategy leaves only
/// negative cycles reachable. Used to cross-check [`brute_energy`].
pub fn brute_energy_min_side<W: GroupWeight>(graph: &GameGraph<W>, cap: u64) -> Result<Vec<bool>, OracleError> {
    check_cap(graph, Some(Owner::Min), cap)?;
    let n = graph.n();
    let mut min_wins = vec![false; n];
    for tau in strategies(graph, Owner::Min) {
        let arcs = restricted_arcs(graph, &tau);
        for v in 0..n {
            if min_wins[v] {
                continue;
            }
            let reach = reachable(n, &arcs, v);
            let sub: Vec<Arc<W>> = arcs.iter().filter(|a| reach[a.from]).cloned().collect();
            if find_nonnegative_cycle(n, &sub).is_none() {
                min_wins[v] = true;
            }
        }
    }
    Ok(min_wins)
}

fn reachable<W>(n: usize, arcs: &[Arc<W>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for a in arcs.iter().filter(|a| a.from == v) {
            if !seen[a.to] {
                seen[a.to] = true;
                stack.push(a.to);
            }
        }
    }
    seen
}

/// Mean payoff of the cycle eventually reached from every node in the
/// functional graph `next`.
fn play_means(graph: &GameGraph<Rational>, next: &[usize]) -> Vec<Rational> {
    let n = graph.n();
    (0..n)
        .map(|start| {
            let mut pos = vec![usize::MAX; n];
            let mut path = Vec::new();
            let mut v = start;
            while pos[v] == usize::MAX {
                pos[v] = path.len();
                path.push(v);
                v = graph.edges[next[v]].to;
            }
            let cycle = &path[pos[v]..];
            let sum: Rational = cycle.iter().map(|&c| graph.edges[next[c]].weight.clone()).sum();
            sum / Rational::from_integer((cycle.len() as i64).into())
        })
        .collect()
}

/// Mean-payoff values by double strategy enumeration.
pub fn brute_mean_payoff(graph: &GameGraph<Rational>, cap: u64) -> Result<Vec<Rational>, OracleError> {
    check_cap(graph, None, cap)?;
    let sigmas: Vec<_> = strategies(graph, Owner::Max).collect();
    let taus: Vec<_> = strategies(graph, Owner::Min).collect();
    let table: Vec<Vec<Vec<Rational>>> = sigmas
        .iter()
        .map(|s| taus.iter().map(|t| play_means(graph, &joint(s, t))).collect())
        .collect();
    let n = graph.n();
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let maxmin = table.iter().map(|row| row.iter().map(|p| &p[v]).min().unwrap()).max().unwrap();
        let minmax = (0..taus.len())
            .map(|t| table.iter().map(|row| &row[t][v]).max().unwrap())
            .min()
            .unwrap();
        if maxmin != minmax {
            return Err(OracleError::NotDetermined { node: v });
        }
        out.push(maxmin.clone());
    }
    Ok(out)
}

/// Classical value iteration in floating point, starting from zero.
pub fn shapley_vi(graph: &GameGraph<Rational>, lambda: &Rational, sweeps: usize) -> Vec<f64> {
    let lam = lambda.to_f64().expect("finite discount");
    let weights: Vec<f64> = graph.edges.iter().map(|e| e.weight.to_f64().expect("finite weight")).collect();
    let mut x = vec![0.0f64; graph.n()];
    for _ in 0..sweeps {
        x = (0..graph.n())
            .map(|a| {
                let vals = graph.out_edges(a).iter().map(|&e| weights[e] + lam * x[graph.edges[e].to]);
                match graph.owners[a] {
                    Owner::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                    Owner::Min => vals.fold(f64::INFINITY, f64::min),
                }
            })
            .collect();
    }
    x
}

/// `λ^sweeps · W / (1-λ)`, the sup-norm error bound of [`shapley_vi`].
pub fn shapley_error_bound(graph: &GameGraph<Rational>, lambda: &Rational, sweeps: usize) -> f64 {
    let lam = lambda.to_f64().unwrap();
    let w = graph
        .edges
        .iter()
        .map(|e| e.weight.to_f64().unwrap().abs())
        .fold(0.0, f64::max);
    lam.powi(sweeps as i32) * w / (1.0 - lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{int, rat};

    fn g(owners: &[Owner], edges: &[(usize, usize, i64)]) -> GameGraph<Rational> {
        GameGraph::new(owners.to_vec(), edges.iter().map(|&(a, b, w)| (a, b, int(w))).collect())
    }

    #[test]
    fn discounted_examples() {
        let half = rat(1, 2);
        assert_eq!(brute_disc(&g(&[Owner::Max], &[(0, 0, 1)]), &half, DEFAULT_CAP).unwrap(), vec![int(2)]);
        let zero = g(&[Owner::Max, Owner::Min], &[(0, 1, 0), (1, 0, 0)]);
        assert_eq!(brute_disc(&zero, &half, DEFAULT_CAP).unwrap(), vec![int(0), int(0)]);
        let two = g(&[Owner::Max], &[(0, 0, 1), (0, 0, 3)]);
        assert_eq!(brute_disc(&two, &half, DEFAULT_CAP).unwrap(), vec![int(6)]);
    }

    #[test]
    fn tail_and_cycle_values() {
        // b→c→b cycle with weights 1, 0; a→b with weight 4
        let game = g(&[Owner::Max, Owner::Max, Owner::Max], &[(0, 1, 4), (1, 2, 1), (2, 1, 0)]);
        let half = rat(1, 2);
        let v = brute_disc(&game, &half, DEFAULT_CAP).unwrap();
        // x_b = 1 + x_c/2, x_c = x_b/2 → x_b = 4/3
        assert_eq!(v[1], rat(4, 3));
        assert_eq!(v[2], rat(2, 3));
        assert_eq!(v[0], int(4) + rat(2, 3));
    }

    #[test]
    fn cap_is_enforced() {
        let game = g(&[Owner::Max, Owner::Min], &[(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)]);
        assert_eq!(
            brute_disc(&game, &rat(1, 2), 3),
            Err(OracleError::CapExceeded { size: 4, cap: 3 })
        );
    }

    #[test]
    fn energy_examples() {
        let neg = g(&[Owner::Max], &[(0, 0, -1)]);
        assert_eq!(brute_energy(&neg, DEFAULT_CAP).unwrap().w_min, vec![0]);
        let zero = g(&[Owner::Max], &[(0, 0, 0)]);
        assert_eq!(brute_energy(&zero, DEFAULT_CAP).unwrap().w_max, vec![0]);
        let bip = g(&[Owner::Max, Owner::Min], &[(0, 1, 1), (1, 0, -1)]);
        assert_eq!(brute_energy(&bip, DEFAULT_CAP).unwrap().w_max, vec![0, 1]);
        let bip = g(&[Owner::Max, Owner::Min], &[(0, 1, 1), (1, 0, -2)]);
        assert_eq!(brute_energy(&bip, DEFAULT_CAP).unwrap().w_min, vec![0, 1]);
    }

    #[test]
    fn min_side_is_the_complement() {
        let game = g(
            &[Owner::Max, Owner::Min, Owner::Min],
            &[(0, 1, 2), (0, 2, -1), (1, 0, -2), (1, 1, 0), (2, 0, 0), (2, 2, -1)],
        );
        let max = brute_energy(&game, DEFAULT_CAP).unwrap().max_flags(3);
        let min = brute_energy_min_side(&game, DEFAULT_CAP).unwrap();
        for v in 0..3 {
            assert_ne!(max[v], min[v]);
        }
    }

    #[test]
    fn mean_payoff_values() {
        let game = g(&[Owner::Max, Owner::Min], &[(0, 1, 3), (1, 0, 0), (1, 1, 1), (0, 0, 1)]);
        // Max prefers the 2-cycle (mean 3/2) but Min breaks off to its loop (1).
        let v = brute_mean_payoff(&game, DEFAULT_CAP).unwrap();
        assert_eq!(v, vec![int(1), int(1)]);
    }

    #[test]
    fn shapley_converges() {
        let one = g(&[Owner::Max], &[(0, 0, 1)]);
        let x = shapley_vi(&one, &rat(1, 2), 40);
        assert!((x[0] - 2.0).abs() < 1e-9);
        let zero = g(&[Owner::Max, Owner::Min], &[(0, 1, 0), (1, 0, 0)]);
        assert_eq!(shapley_vi(&zero, &rat(1, 2), 1), vec![0.0, 0.0]);
    }
}
