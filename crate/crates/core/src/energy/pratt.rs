//! Difference constraints `x_a - x_b <= c` (or `=`) solved as shortest-path
//! potentials, using only additions and comparisons.

use crate::paths::{potentials, Arc};
use crate::weight::GroupWeight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffConstraint<W> {
    pub a: usize,
    pub b: usize,
    pub c: W,
    /// `x_a - x_b = c` instead of `<=`.
    pub equality: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DifferenceSystem<W> {
    pub n: usize,
    pub constraints: Vec<DiffConstraint<W>>,
}

impl<W: GroupWeight> DifferenceSystem<W> {
    pub fn new(n: usize) -> Self {
        Self { n, constraints: Vec::new() }
    }

    pub fn at_most(&mut self, a: usize, b: usize, c: W) {
        self.constraints.push(DiffConstraint { a, b, c, equality: false });
    }

    pub fn equal(&mut self, a: usize, b: usize, c: W) {
        self.constraints.push(DiffConstraint { a, b, c, equality: true });
    }

    pub fn is_satisfied_by(&self, x: &[W]) -> bool {
        self.constraints.iter().all(|k| {
            let d = x[k.a].minus(&x[k.b]);
            if k.equality {
                d == k.c
            } else {
                d <= k.c
            }
        })
    }

    fn arcs(&self) -> Vec<Arc<W>> {
        let mut arcs = Vec::with_capacity(2 * self.constraints.len());
        for k in &self.constraints {
            arcs.push(Arc::new(k.b, k.a, k.c.clone()));
            if k.equality {
                arcs.push(Arc::new(k.a, k.b, k.c.negated()));
            }
        }
        arcs
    }
}

/// The system has no solution; `cycle` lists constraint indices on a
/// negative cycle of the constraint graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infeasible {
    pub cycle: Vec<usize>,
}

/// Potentials from a virtual source at 0 joined to every variable, with
/// relaxation ties broken by constraint order.
pub fn pratt_realize<W: GroupWeight>(system: &DifferenceSystem<W>) -> Result<Vec<W>, Infeasible> {
    let arcs = system.arcs();
    // map arc indices back to constraints
    let mut owner = Vec::with_capacity(arcs.len());
    for (i, k) in system.constraints.iter().enumerate() {
        owner.push(i);
        if k.equality {
            owner.push(i);
        }
    }
    potentials(system.n, &arcs).map_err(|cycle| {
        let mut c: Vec<usize> = cycle.into_iter().map(|a| owner[a]).collect();
        c.dedup();
        Infeasible { cycle: c }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::LexWeight;

    #[test]
    fn single_equality() {
        let mut s = DifferenceSystem::<i64>::new(2);
        s.equal(0, 1, 1);
        let x = pratt_realize(&s).unwrap();
        assert_eq!(x[0] - x[1], 1);
        assert_eq!(x, vec![0, -1]);
    }

    #[test]
    fn contradictory_cycle() {
        let mut s = DifferenceSystem::<i64>::new(2);
        s.equal(0, 1, 1);
        s.equal(1, 0, 1);
        assert!(pratt_realize(&s).is_err());
    }

    #[test]
    fn lexicographic_slack_cycle() {
        let mut s = DifferenceSystem::new(2);
        s.at_most(0, 1, LexWeight::new(0i64, 1));
        s.at_most(1, 0, LexWeight::new(0i64, 1));
        let x = pratt_realize(&s).unwrap();
        assert!(s.is_satisfied_by(&x));
        assert_eq!(x, vec![LexWeight::new(0, 0), LexWeight::new(0, 0)]);
    }
}
