//! Exact feasibility of `A x = b, x ≥ 0` over the rationals: phase-one
//! simplex with Bland's rule.

use num_traits::{Signed, Zero};

use crate::term::Rational;

#[derive(Clone, Debug, Default)]
pub struct Lp {
    vars: usize,
    rows: Vec<(Vec<(usize, Rational)>, Rational)>,
}

impl Lp {
    pub fn new() -> Self {
        Self::default()
    }

    /// A fresh nonnegative variable.
    pub fn var(&mut self) -> usize {
        self.vars += 1;
        self.vars - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    /// `Σ coeff·x = rhs`. Repeated variables are summed.
    pub fn eq(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        self.rows.push((coeffs, rhs));
    }

    /// A feasible point, if any.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        let n = self.vars;
        let m = self.rows.len();
        let width = n + m + 1;
        let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
        for (i, (coeffs, rhs)) in self.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            for (j, c) in coeffs {
                row[*j] += c;
            }
            row[width - 1] = rhs.clone();
            if rhs.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[n + i] = Rational::from_integer(1.into());
            tab.push(row);
        }
        let mut basis: Vec<usize> = (n..n + m).collect();

        // Objective: minimize the sum of artificials, i.e. maximize -Σ a.
        // Reduced costs for the artificial basis are minus the column sums.
        let mut cost = vec![Rational::zero(); width];
        for row in &tab {
            for j in 0..n {
                cost[j] -= &row[j];
            }
            cost[width - 1] -= &row[width - 1];
        }

        while let Some(pc) = (0..n + m).find(|&j| cost[j].is_negative()) {
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in tab.iter().enumerate() {
                if row[pc].is_positive() {
                    let ratio = &row[width - 1] / &row[pc];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((pr, _)) = best else {
                // Unbounded is impossible for a phase-one objective bounded by zero.
                break;
            };
            pivot(&mut tab, &mut cost, pr, pc);
            basis[pr] = pc;
        }

        if !cost[width - 1].is_zero() {
            return None;
        }
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][width - 1].clone();
            }
        }
        Some(x)
    }
}

fn pivot(tab: &mut [Vec<Rational>], cost: &mut [Rational], pr: usize, pc: usize) {
    let width = tab[pr].len();
    let p = tab[pr][pc].clone();
    for x in tab[pr].iter_mut() {
        if !x.is_zero() {
            *x /= &p;
        }
    }
    let nonzero: Vec<usize> = (0..width).filter(|&j| !tab[pr][j].is_zero()).collect();
    let pivot_row = tab[pr].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for &j in &nonzero {
            let d = &f * &pivot_row[j];
            row[j] -= d;
        }
    }
    if !cost[pc].is_zero() {
        let f = cost[pc].clone();
        for &j in &nonzero {
            let d = &f * &pivot_row[j];
            cost[j] -= d;
        }
    }
}
