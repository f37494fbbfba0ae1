//! Bellman–Ford over an ordered group: potentials, negative cycles and
//! non-negative cycles. Only additions and comparisons are used.

use crate::weight::GroupWeight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc<W> {
    pub from: usize,
    pub to: usize,
    pub weight: W,
}

impl<W> Arc<W> {
    pub fn new(from: usize, to: usize, weight: W) -> Self {
        Self { from, to, weight }
    }
}

/// Shortest-path distances from a virtual source joined to every node by a
/// zero arc. Ties are broken by arc order: only strict improvements relax.
///
/// On a negative cycle, returns the arc indices of one such cycle in path
/// order.
pub fn potentials<W: GroupWeight>(n: usize, arcs: &[Arc<W>]) -> Result<Vec<W>, Vec<usize>> {
    let mut dist = vec![W::identity(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for _round in 0..n {
        let mut changed = None;
        for (i, arc) in arcs.iter().enumerate() {
            let cand = dist[arc.from].plus(&arc.weight);
            if cand < dist[arc.to] {
                dist[arc.to] = cand;
                pred[arc.to] = Some(i);
                changed = Some(arc.to);
            }
        }
        if changed.is_none() {
            return Ok(dist);
        }
    }
    // A simple shortest path has at most n-1 arcs plus the source arc, so a
    // further improvement means a negative cycle.
    let mut hit = None;
    for (i, arc) in arcs.iter().enumerate() {
        let cand = dist[arc.from].plus(&arc.weight);
        if cand < dist[arc.to] {
            dist[arc.to] = cand;
            pred[arc.to] = Some(i);
            hit = Some(arc.to);
            break;
        }
    }
    let Some(mut v) = hit else {
        return Ok(dist);
    };
    for _ in 0..n {
        v = arcs[pred[v].expect("relaxed node has a predecessor")].from;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let a = pred[v].expect("cycle node has a predecessor");
        cycle.push(a);
        v = arcs[a].from;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Err(cycle)
}

pub fn find_negative_cycle<W: GroupWeight>(n: usize, arcs: &[Arc<W>]) -> Option<Vec<usize>> {
    potentials(n, arcs).err()
}

/// A cycle of weight `>= 0`, if one exists: positive cycles are found as
/// negative cycles of the negated weights, zero cycles as cycles among the
/// arcs that are tight for the resulting longest-path potentials.
pub fn find_nonnegative_cycle<W: GroupWeight>(n: usize, arcs: &[Arc<W>]) -> Option<Vec<usize>> {
    let negated: Vec<Arc<W>> = arcs
        .iter()
        .map(|a| Arc::new(a.from, a.to, a.weight.negated()))
        .collect();
    let dist = match potentials(n, &negated) {
        Err(cycle) => return Some(cycle),
        Ok(d) => d,
    };
    let tight: Vec<usize> = (0..arcs.len())
        .filter(|&i| dist[negated[i].to] == dist[negated[i].from].plus(&negated[i].weight))
        .collect();
    find_cycle(n, arcs, &tight)
}

/// Any directed cycle using only the arcs listed in `allowed`.
pub fn find_cycle<W>(n: usize, arcs: &[Arc<W>], allowed: &[usize]) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in allowed {
        out[arcs[i].from].push(i);
    }
    let mut state = vec![0u8; n];
    let mut stack_arcs: Vec<usize> = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        // iterative DFS keeping the arc path to the current node
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < out[v].len() {
                let a = out[v][*next];
                *next += 1;
                let b = arcs[a].to;
                match state[b] {
                    0 => {
                        state[b] = 1;
                        stack_arcs.push(a);
                        stack.push((b, 0));
                    }
                    1 => {
                        let pos = stack.iter().position(|&(u, _)| u == b).expect("on stack");
                        let mut cycle: Vec<usize> = stack_arcs[pos..].to_vec();
                        cycle.push(a);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
                stack_arcs.pop();
            }
        }
    }
    None
}

pub fn cycle_weight<W: GroupWeight>(arcs: &[Arc<W>], cycle: &[usize]) -> W {
    cycle
        .iter()
        .fold(W::identity(), |acc, &i| acc.plus(&arcs[i].weight))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcs(list: &[(usize, usize, i64)]) -> Vec<Arc<i64>> {
        list.iter().map(|&(f, t, w)| Arc::new(f, t, w)).collect()
    }

    fn is_closed(a: &[Arc<i64>], cycle: &[usize]) -> bool {
        cycle.windows(2).all(|w| a[w[0]].to == a[w[1]].from)
            && a[*cycle.last().unwrap()].to == a[cycle[0]].from
    }

    #[test]
    fn potentials_and_negative_cycles() {
        let a = arcs(&[(0, 1, 2), (1, 2, -3), (2, 0, 2)]);
        let d = potentials(3, &a).unwrap();
        for arc in &a {
            assert!(d[arc.to] <= d[arc.from] + arc.weight);
        }
        let b = arcs(&[(0, 1, 2), (1, 2, -3), (2, 0, 0), (2, 3, 5)]);
        let c = find_negative_cycle(4, &b).unwrap();
        assert!(is_closed(&b, &c));
        assert!(cycle_weight(&b, &c) < 0);
    }

    #[test]
    fn nonnegative_cycles() {
        let zero = arcs(&[(0, 1, 1), (1, 0, -1), (1, 2, -5), (2, 2, -1)]);
        let c = find_nonnegative_cycle(3, &zero).unwrap();
        assert!(is_closed(&zero, &c));
        assert_eq!(cycle_weight(&zero, &c), 0);
        let pos = arcs(&[(0, 0, -1), (1, 1, 3)]);
        let c = find_nonnegative_cycle(2, &pos).unwrap();
        assert_eq!(c, vec![1]);
        let none = arcs(&[(0, 1, 1), (1, 0, -2), (1, 1, -1)]);
        assert_eq!(find_nonnegative_cycle(2, &none), None);
    }

    #[test]
    fn find_cycle_respects_allowed() {
        let a = arcs(&[(0, 1, 0), (1, 0, 0), (1, 1, 0)]);
        assert_eq!(find_cycle(2, &a, &[0]), None);
        assert_eq!(find_cycle(2, &a, &[2]), Some(vec![2]));
        let c = find_cycle(2, &a, &[0, 1]).unwrap();
        assert!(is_closed(&a, &c));
    }
}
