//! Reduction of an energy game to a bipartite one: decide trivial nodes and
//! cycles, remove their attractors, then replace owner-internal paths by
//! single edges.

use serde::Serialize;
use thiserror::Error;

use crate::game::{GameGraph, Owner};
use crate::paths::{find_negative_cycle, find_nonnegative_cycle, Arc};
use crate::weight::GroupWeight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialKind {
    /// Only nodes of the same owner are reachable.
    Node,
    /// A single-owner cycle good for its owner.
    Cycle,
}

/// Why a group of nodes was decided before the main loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrivialEvidence {
    pub kind: TrivialKind,
    /// The trivial node, or the nodes of the trivial cycle.
    pub nodes: Vec<usize>,
    pub winner: Owner,
    /// Edges of the cycle that decided the one-player game or formed the
    /// trivial cycle; empty when a trivial node is lost for lack of one.
    pub cycle: Vec<usize>,
    /// Everything removed with it, including `nodes`.
    pub attractor: Vec<usize>,
}

/// Edge of the bipartite game and the path it stands for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnderlyingPath {
    pub from: usize,
    pub to: usize,
    /// Edge indices of the input game, in path order.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReductionCertificate {
    pub decided: Vec<TrivialEvidence>,
    pub paths: Vec<UnderlyingPath>,
}

/// Result of [`eliminate_trivial`]. Indices in `reduced` are positions in
/// `survivors`.
#[derive(Clone, Debug)]
pub struct Elimination<W> {
    pub reduced: GameGraph<W>,
    pub survivors: Vec<usize>,
    /// Input edge index of every edge of `reduced`.
    pub edge_map: Vec<usize>,
    /// Winner of each input node removed here.
    pub decided: Vec<Option<Owner>>,
    pub evidence: Vec<TrivialEvidence>,
}

fn reachable_alive<W>(g: &GameGraph<W>, alive: &[bool], from: usize) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    seen[from] = true;
    let mut stack = vec![from];
    let mut out = vec![from];
    while let Some(v) = stack.pop() {
        for &e in g.out_edges(v) {
            let b = g.edges[e].to;
            if alive[b] && !seen[b] {
                seen[b] = true;
                stack.push(b);
                out.push(b);
            }
        }
    }
    out.sort_unstable();
    out
}

fn arcs_where<W: Clone>(g: &GameGraph<W>, keep: impl Fn(usize, usize) -> bool) -> (Vec<Arc<W>>, Vec<usize>) {
    let mut arcs = Vec::new();
    let mut ids = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if keep(e.from, e.to) {
            arcs.push(Arc::new(e.from, e.to, e.weight.clone()));
            ids.push(i);
        }
    }
    (arcs, ids)
}

/// Nodes from which `winner` can force the play into `target`.
fn attractor<W>(g: &GameGraph<W>, alive: &[bool], target: &[usize], winner: Owner) -> Vec<usize> {
    let mut inside = vec![false; g.n()];
    for &t in target {
        inside[t] = true;
    }
    loop {
        let mut grew = false;
        for v in 0..g.n() {
            if !alive[v] || inside[v] {
                continue;
            }
            let mut moves = g.out_edges(v).iter().map(|&e| g.edges[e].to).filter(|&b| alive[b]);
            let pulled = if g.owners[v] == winner {
                moves.any(|b| inside[b])
            } else {
                moves.all(|b| inside[b])
            };
            if pulled {
                inside[v] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    (0..g.n()).filter(|&v| inside[v]).collect()
}

/// A trivial node and its one-player verdict, in node order.
fn find_trivial_node<W: GroupWeight>(g: &GameGraph<W>, alive: &[bool]) -> Option<(usize, Owner, Vec<usize>)> {
    for a in (0..g.n()).filter(|&a| alive[a]) {
        let owner = g.owners[a];
        let region = reachable_alive(g, alive, a);
        if region.iter().any(|&v| g.owners[v] != owner) {
            continue;
        }
        let mut in_region = vec![false; g.n()];
        for &v in &region {
            in_region[v] = true;
        }
        let (arcs, ids) = arcs_where(g, |f, t| in_region[f] && in_region[t]);
        // The owner moves alone: Max wants a non-negative cycle, Min a negative one.
        let cycle = match owner {
            Owner::Max => find_nonnegative_cycle(g.n(), &arcs),
            Owner::Min => find_negative_cycle(g.n(), &arcs),
        };
        return Some(match cycle {
            Some(c) => (a, owner, c.into_iter().map(|i| ids[i]).collect()),
            None => (a, owner.opponent(), Vec::new()),
        });
    }
    None
}

fn find_trivial_cycle<W: GroupWeight>(g: &GameGraph<W>, alive: &[bool]) -> Option<(Owner, Vec<usize>)> {
    for owner in [Owner::Max, Owner::Min] {
        let (arcs, ids) = arcs_where(g, |f, t| alive[f] && alive[t] && g.owners[f] == owner && g.owners[t] == owner);
        let cycle = match owner {
            Owner::Max => find_nonnegative_cycle(g.n(), &arcs),
            Owner::Min => find_negative_cycle(g.n(), &arcs),
        };
        if let Some(c) = cycle {
            return Some((owner, c.into_iter().map(|i| ids[i]).collect()));
        }
    }
    None
}

/// Repeatedly decides a trivial node or cycle and removes the winner's
/// attractor, until none is left.
pub fn eliminate_trivial<W: GroupWeight>(g: &GameGraph<W>) -> Elimination<W> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut decided = vec![None; n];
    let mut evidence = Vec::new();
    loop {
        let found = if let Some((a, winner, cycle)) = find_trivial_node(g, &alive) {
            Some((TrivialKind::Node, vec![a], winner, cycle))
        } else {
            find_trivial_cycle(g, &alive).map(|(winner, cycle)| {
                let mut nodes: Vec<usize> = cycle.iter().map(|&e| g.edges[e].from).collect();
                nodes.sort_unstable();
                (TrivialKind::Cycle, nodes, winner, cycle)
            })
        };
        let Some((kind, nodes, winner, cycle)) = found else {
            break;
        };
        let attr = attractor(g, &alive, &nodes, winner);
        for &v in &attr {
            alive[v] = false;
            decided[v] = Some(winner);
        }
        evidence.push(TrivialEvidence { kind, nodes, winner, cycle, attractor: attr });
    }
    let survivors: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in survivors.iter().enumerate() {
        index[v] = i;
    }
    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if alive[e.from] && alive[e.to] {
            edges.push((index[e.from], index[e.to], e.weight.clone()));
            edge_map.push(i);
        }
    }
    let reduced = GameGraph::new(survivors.iter().map(|&v| g.owners[v]).collect(), edges);
    Elimination { reduced, survivors, edge_map, decided, evidence }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("{owner} node {node} has a cycle of its own nodes that is good for it")]
    TrivialCycle { owner: Owner, node: usize },
    #[error("node {node} has no controllable path to an opponent node")]
    TrivialNode { node: usize },
}

/// Bipartite game on the same nodes: `(a, b)` is an edge iff there is an
/// `a`-controllable path from `a` to an opponent node `b`, weighted by the
/// best such path for the owner of `a`. Input must be free of trivial nodes
/// and cycles.
pub fn bipartite_reduce<W: GroupWeight>(g: &GameGraph<W>) -> Result<(GameGraph<W>, Vec<UnderlyingPath>), ReduceError> {
    let n = g.n();
    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for a in 0..n {
        let owner = g.owners[a];
        // better(u, v): u is preferable to v for `owner`
        let better = |u: &W, v: &W| match owner {
            Owner::Max => u > v,
            Owner::Min => u < v,
        };
        let mut dist: Vec<Option<W>> = vec![None; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        dist[a] = Some(W::identity());
        let mut settled = false;
        for _ in 0..=n {
            let mut changed = false;
            for (i, e) in g.edges.iter().enumerate() {
                // opponent nodes end a controllable path
                if g.owners[e.from] != owner {
                    continue;
                }
                let Some(d) = dist[e.from].as_ref() else { continue };
                let cand = d.plus(&e.weight);
                if dist[e.to].as_ref().is_none_or(|cur| better(&cand, cur)) {
                    if e.to == a {
                        // a cycle back to the start that improves on zero
                        return Err(ReduceError::TrivialCycle { owner, node: a });
                    }
                    dist[e.to] = Some(cand);
                    pred[e.to] = Some(i);
                    changed = true;
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(ReduceError::TrivialCycle { owner, node: a });
        }
        let mut any = false;
        for b in 0..n {
            if g.owners[b] == owner {
                continue;
            }
            let Some(w) = dist[b].clone() else { continue };
            let mut path = Vec::new();
            let mut v = b;
            while v != a {
                let e = pred[v].expect("reached node has a predecessor");
                path.push(e);
                v = g.edges[e].from;
            }
            path.reverse();
            edges.push((a, b, w));
            paths.push(UnderlyingPath { from: a, to: b, edges: path });
            any = true;
        }
        if !any {
            return Err(ReduceError::TrivialNode { node: a });
        }
    }
    Ok((GameGraph::new(g.owners.clone(), edges), paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{brute_energy, DEFAULT_CAP};

    const MAX: Owner = Owner::Max;
    const MIN: Owner = Owner::Min;

    fn g(owners: &[Owner], edges: &[(usize, usize, i64)]) -> GameGraph<i64> {
        GameGraph::new(owners.to_vec(), edges.to_vec())
    }

    #[test]
    fn lone_negative_loop_is_lost_by_max() {
        let e = eliminate_trivial(&g(&[MAX], &[(0, 0, -1)]));
        assert_eq!(e.decided, vec![Some(MIN)]);
        assert!(e.survivors.is_empty());
        assert_eq!(e.evidence[0].kind, TrivialKind::Node);
    }

    #[test]
    fn zero_loop_under_perturbation_is_won_by_max() {
        use crate::weight::LexWeight;
        let game = GameGraph::new(vec![MAX], vec![(0, 0, LexWeight::new(0i64, 1))]);
        let e = eliminate_trivial(&game);
        assert_eq!(e.decided, vec![Some(MAX)]);
        assert_eq!(e.evidence[0].cycle, vec![0]);
    }

    #[test]
    fn attractor_pulls_in_forced_min_node() {
        // a, c ∈ Max on a positive cycle; b ∈ Min whose only edge enters it
        let game = g(&[MAX, MIN, MAX], &[(0, 2, 1), (2, 0, 1), (1, 0, -5)]);
        let e = eliminate_trivial(&game);
        assert_eq!(e.decided, vec![Some(MAX); 3]);
        assert_eq!(brute_energy(&game, DEFAULT_CAP).unwrap().w_max, vec![0, 1, 2]);
    }

    #[test]
    fn reduction_of_documented_example() {
        // a=0 ∈ Max, c=1 ∈ Max, b=2 ∈ Min
        let game = g(&[MAX, MAX, MIN], &[(0, 1, 2), (1, 2, 3), (0, 2, 4), (2, 0, -10)]);
        let (r, paths) = bipartite_reduce(&game).unwrap();
        let edges: Vec<_> = r.edges.iter().map(|e| (e.from, e.to, e.weight)).collect();
        assert_eq!(edges, vec![(0, 2, 5), (1, 2, 3), (2, 0, -10)]);
        assert_eq!(paths[0].edges, vec![0, 1]);
        assert_eq!(brute_energy(&game, DEFAULT_CAP).unwrap(), brute_energy(&r, DEFAULT_CAP).unwrap());
        assert_eq!(brute_energy(&r, DEFAULT_CAP).unwrap().w_min, vec![0, 1, 2]);
    }

    #[test]
    fn bipartite_input_is_unchanged() {
        let game = g(&[MAX, MIN], &[(0, 1, 3), (0, 1, -1), (1, 0, 2)]);
        let (r, _) = bipartite_reduce(&game).unwrap();
        let edges: Vec<_> = r.edges.iter().map(|e| (e.from, e.to, e.weight)).collect();
        // parallel edges collapse to the best one
        assert_eq!(edges, vec![(0, 1, 3), (1, 0, 2)]);
    }

    #[test]
    fn reports_precondition_violations() {
        let game = g(&[MAX, MIN], &[(0, 0, 1), (0, 1, 0), (1, 0, 0)]);
        assert!(bipartite_reduce(&game).is_err());
    }
}
