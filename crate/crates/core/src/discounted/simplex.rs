//! Exact phase-1 simplex: finds a basic feasible solution of a system of
//! linear constraints over free variables.

use num_traits::{One, Signed, Zero};

use crate::weight::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A vertex of `{x : constraints}` in the split-variable formulation, or
/// `None` if the system is infeasible. Pivoting follows Bland's rule, so the
/// result is a deterministic function of the constraint order.
pub fn find_vertex(nvars: usize, constraints: &[LinearConstraint]) -> Option<Vec<Rational>> {
    let m = constraints.len();
    if m == 0 {
        return Some(vec![Rational::zero(); nvars]);
    }
    let slack_cols: Vec<Option<usize>> = {
        let mut next = 2 * nvars;
        constraints
            .iter()
            .map(|c| {
                (c.relation != Relation::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let nslack = slack_cols.iter().flatten().count();
    let art0 = 2 * nvars + nslack;

    // rows[i] = coefficients followed by rhs; rows whose slack enters the
    // basis with coefficient +1 need no artificial column
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut needs_artificial = Vec::with_capacity(m);
    for (i, c) in constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); art0];
        for (j, a) in &c.coeffs {
            row[2 * j] += a;
            row[2 * j + 1] -= a;
        }
        if let Some(s) = slack_cols[i] {
            row[s] = match c.relation {
                Relation::Le => Rational::one(),
                _ => -Rational::one(),
            };
        }
        let mut rhs = c.rhs.clone();
        if rhs.is_negative() {
            for v in row.iter_mut().filter(|v| !v.is_zero()) {
                *v = -&*v;
            }
            rhs = -rhs;
        }
        match slack_cols[i] {
            Some(s) if row[s].is_one() => {
                basis.push(s);
                needs_artificial.push(false);
            }
            _ => {
                basis.push(usize::MAX);
                needs_artificial.push(true);
            }
        }
        row.push(rhs);
        rows.push(row);
    }
    let nart = needs_artificial.iter().filter(|&&a| a).count();
    let width = art0 + nart;
    let mut next = art0;
    for (i, row) in rows.iter_mut().enumerate() {
        let rhs = row.pop().expect("rhs present");
        row.resize(width, Rational::zero());
        if needs_artificial[i] {
            row[next] = Rational::one();
            basis[i] = next;
            next += 1;
        }
        row.push(rhs);
    }
    // objective: minimise the sum of artificials, expressed in non-basic terms
    let mut cost = vec![Rational::zero(); width + 1];
    for (row, _) in rows.iter().zip(&needs_artificial).filter(|(_, &a)| a) {
        for j in 0..art0 {
            if !row[j].is_zero() {
                cost[j] -= &row[j];
            }
        }
        cost[width] -= &row[width];
    }

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.expect("phase-1 objective is bounded below");
        pivot(&mut rows, &mut cost, r, enter);
        basis[r] = enter;
    }
    if !cost[width].is_zero() {
        return None;
    }
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if basis[r] >= art0 {
            if let Some(j) = (0..art0).find(|&j| !rows[r][j].is_zero()) {
                pivot(&mut rows, &mut cost, r, j);
                basis[r] = j;
            }
        }
    }
    let mut z = vec![Rational::zero(); width];
    for (r, &b) in basis.iter().enumerate() {
        z[b] = rows[r][width].clone();
    }
    Some((0..nvars).map(|j| &z[2 * j] - &z[2 * j + 1]).collect())
}

fn pivot(rows: &mut [Vec<Rational>], cost: &mut [Rational], r: usize, col: usize) {
    let p = rows[r][col].clone();
    if !p.is_one() {
        for v in rows[r].iter_mut().filter(|v| !v.is_zero()) {
            *v /= &p;
        }
    }
    let pivot_row = rows[r].clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i != r && !row[col].is_zero() {
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
    }
    if !cost[col].is_zero() {
        let f = cost[col].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{int, rat};

    fn c(coeffs: &[(usize, i64)], relation: Relation, rhs: i64) -> LinearConstraint {
        LinearConstraint {
            coeffs: coeffs.iter().map(|&(j, a)| (j, int(a))).collect(),
            relation,
            rhs: int(rhs),
        }
    }

    fn holds(x: &[Rational], k: &LinearConstraint) -> bool {
        let lhs: Rational = k.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
        match k.relation {
            Relation::Le => lhs <= k.rhs,
            Relation::Ge => lhs >= k.rhs,
            Relation::Eq => lhs == k.rhs,
        }
    }

    #[test]
    fn solves_small_system() {
        let sys = vec![
            c(&[(0, 1), (1, 1)], Relation::Eq, 3),
            c(&[(0, 1), (1, -1)], Relation::Ge, -5),
            c(&[(0, 2)], Relation::Le, 1),
        ];
        let x = find_vertex(2, &sys).unwrap();
        assert!(sys.iter().all(|k| holds(&x, k)));
    }

    #[test]
    fn detects_infeasibility() {
        let sys = vec![c(&[(0, 1)], Relation::Ge, 2), c(&[(0, 1)], Relation::Le, 1)];
        assert_eq!(find_vertex(1, &sys), None);
    }

    #[test]
    fn discount_equalities() {
        // x_a = x_b / 2, x_b = x_a / 2
        let half = rat(-1, 2);
        let sys = vec![
            LinearConstraint { coeffs: vec![(0, int(1)), (1, half.clone())], relation: Relation::Eq, rhs: int(0) },
            LinearConstraint { coeffs: vec![(1, int(1)), (0, half)], relation: Relation::Eq, rhs: int(0) },
        ];
        assert_eq!(find_vertex(2, &sys).unwrap(), vec![int(0), int(0)]);
    }
}
