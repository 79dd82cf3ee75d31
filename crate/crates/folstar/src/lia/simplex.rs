//! Exact rational feasibility checking.
//!
//! A bounded-variable simplex: each input row introduces a slack
//! variable equal to a linear combination of the original columns, and
//! feasibility of the row's bounds is decided by pivoting (smallest
//! variable index first, so the procedure terminates). Arithmetic is
//! exact over arbitrary-precision rationals.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Optional lower/upper bounds on a slack row.
#[derive(Debug, Clone, Default)]
pub struct RowBounds {
    pub lower: Option<BigRational>,
    pub upper: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexOutcome {
    /// Values for the original columns `0..n_vars`.
    Feasible(Vec<BigRational>),
    Infeasible,
    BudgetExceeded,
}

/// Decide whether there is a rational point where every row's linear
/// combination of the columns lies within its bounds. Each pivot consumes
/// one unit of `pivot_budget`.
pub fn solve(
    n_vars: usize,
    rows: &[(Vec<(usize, BigRational)>, RowBounds)],
    pivot_budget: &mut u64,
) -> SimplexOutcome {
    let total = n_vars + rows.len();
    let zero = BigRational::zero();

    // Per-variable bounds: originals are unbounded, slack i carries the
    // bounds of row i.
    let mut lower: Vec<Option<BigRational>> = vec![None; total];
    let mut upper: Vec<Option<BigRational>> = vec![None; total];
    for (i, (_, b)) in rows.iter().enumerate() {
        lower[n_vars + i] = b.lower.clone();
        upper[n_vars + i] = b.upper.clone();
    }

    // Tableau: row r defines its basic variable as a combination of the
    // nonbasic ones (entries under basic columns stay zero).
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(rows.len());
    for (coeffs, _) in rows {
        let mut row = vec![zero.clone(); total];
        for (col, c) in coeffs {
            row[*col] = c.clone();
        }
        tab.push(row);
    }
    let mut basic: Vec<usize> = (n_vars..total).collect();
    let mut row_of: Vec<Option<usize>> = vec![None; total];
    for (r, v) in basic.iter().enumerate() {
        row_of[*v] = Some(r);
    }
    // All originals at zero satisfies every equation.
    let mut beta: Vec<BigRational> = vec![zero.clone(); total];

    loop {
        // Smallest violated basic variable.
        let mut violated: Option<(usize, bool)> = None;
        for v in 0..total {
            let Some(_) = row_of[v] else { continue };
            if let Some(l) = &lower[v] {
                if beta[v] < *l {
                    violated = Some((v, true));
                    break;
                }
            }
            if let Some(u) = &upper[v] {
                if beta[v] > *u {
                    violated = Some((v, false));
                    break;
                }
            }
        }
        let Some((xi, below)) = violated else {
            return SimplexOutcome::Feasible(beta[..n_vars].to_vec());
        };
        let r = row_of[xi].unwrap();
        let target = if below {
            lower[xi].clone().unwrap()
        } else {
            upper[xi].clone().unwrap()
        };

        // Smallest nonbasic variable whose movement can fix xi.
        let mut entering = None;
        for xj in 0..total {
            if row_of[xj].is_some() || tab[r][xj].is_zero() {
                continue;
            }
            let a_pos = tab[r][xj].is_positive();
            let can_inc = upper[xj].as_ref().is_none_or(|u| beta[xj] < *u);
            let can_dec = lower[xj].as_ref().is_none_or(|l| beta[xj] > *l);
            let ok = if below {
                (a_pos && can_inc) || (!a_pos && can_dec)
            } else {
                (a_pos && can_dec) || (!a_pos && can_inc)
            };
            if ok {
                entering = Some(xj);
                break;
            }
        }
        let Some(xj) = entering else {
            return SimplexOutcome::Infeasible;
        };

        if *pivot_budget == 0 {
            return SimplexOutcome::BudgetExceeded;
        }
        *pivot_budget -= 1;

        // Move xj so that xi reaches its bound, then swap them in the basis.
        let theta = (&target - &beta[xi]) / &tab[r][xj];
        beta[xi] = target;
        beta[xj] = &beta[xj] + &theta;
        for k in 0..tab.len() {
            if k != r {
                let delta = &tab[k][xj] * &theta;
                beta[basic[k]] = &beta[basic[k]] + delta;
            }
        }

        // Solve row r for xj: xj = (xi − Σ_{c≠xj} a_c·c) / a_j.
        let aij = tab[r][xj].clone();
        let mut new_row = vec![zero.clone(); total];
        new_row[xi] = BigRational::one() / &aij;
        for c in 0..total {
            if c != xj && !tab[r][c].is_zero() {
                new_row[c] = -&tab[r][c] / &aij;
            }
        }
        for k in 0..tab.len() {
            if k == r || tab[k][xj].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut tab[k][xj], zero.clone());
            for c in 0..total {
                if !new_row[c].is_zero() {
                    let add = &factor * &new_row[c];
                    tab[k][c] = &tab[k][c] + add;
                }
            }
        }
        tab[r] = new_row;
        row_of[xi] = None;
        row_of[xj] = Some(r);
        basic[r] = xj;
    }
}
