//! Dense tableau simplex for `max c·z  s.t.  A z <= b, z >= 0` with `b >= 0`,
//! so the slack basis is feasible from the start. Bland's rule keeps it
//! finite under degeneracy; with an exact scalar the result is exact.

use crate::error::{Error, Result};
use crate::scalar::LpScalar;

#[derive(Debug, Clone)]
pub struct LpProblem<S> {
    pub objective: Vec<S>,
    pub rows: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    pub primal: Vec<S>,
    /// Optimal multipliers of the constraint rows (`y >= 0`, `Aᵀy >= c`,
    /// `bᵀy = value`).
    pub dual: Vec<S>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Unbounded,
}

pub fn solve<S: LpScalar>(problem: &LpProblem<S>, max_pivots: usize) -> Result<LpOutcome<S>> {
    let n = problem.objective.len();
    let m = problem.rows.len();
    if problem.rhs.len() != m || problem.rows.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition("LP dimensions do not agree".into()));
    }
    if problem.rhs.iter().any(|b| b.is_negative()) {
        return Err(Error::Precondition(
            "LP right-hand sides must be non-negative".into(),
        ));
    }
    let width = n + m + 1;
    let rhs_col = n + m;
    // Row 0 holds reduced costs: z_j - c_j.
    let mut tab: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    let mut obj = vec![S::zero(); width];
    for (j, c) in problem.objective.iter().enumerate() {
        obj[j] = -c.clone();
    }
    tab.push(obj);
    for (i, row) in problem.rows.iter().enumerate() {
        let mut r = vec![S::zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = S::one();
        r[rhs_col] = problem.rhs[i].clone();
        tab.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let tol = S::pivot_tol();

    let mut pivots = 0;
    while let Some(enter) = (0..rhs_col).find(|&j| tab[0][j] < -tol.clone()) {
        let mut leave: Option<(usize, S)> = None;
        for i in 1..=m {
            let a = &tab[i][enter];
            if *a > tol {
                let ratio = tab[i][rhs_col].clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && basis[i - 1] < basis[*k - 1])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(LpOutcome::Unbounded);
        };
        if pivots == max_pivots {
            return Err(Error::SolverIterationCap(max_pivots));
        }
        pivot(&mut tab, r, enter);
        basis[r - 1] = enter;
        pivots += 1;
    }

    let mut primal = vec![S::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            primal[b] = tab[i + 1][rhs_col].clone();
        }
    }
    let dual = (0..m).map(|i| tab[0][n + i].clone()).collect();
    Ok(LpOutcome::Optimal(LpSolution {
        value: tab[0][rhs_col].clone(),
        primal,
        dual,
        pivots,
    }))
}

fn pivot<S: LpScalar>(tab: &mut [Vec<S>], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for v in tab[r].iter_mut() {
        if !v.is_zero() {
            *v = v.clone() / p.clone();
        }
    }
    let support: Vec<usize> = (0..tab[r].len())
        .filter(|&j| !tab[r][j].is_zero())
        .collect();
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for &j in &support {
            row[j] = row[j].clone() - f.clone() * pivot_row[j].clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
        let p = LpProblem {
            objective: vec![q(3, 1), q(5, 1)],
            rows: vec![
                vec![q(1, 1), q(0, 1)],
                vec![q(0, 1), q(2, 1)],
                vec![q(3, 1), q(2, 1)],
            ],
            rhs: vec![q(4, 1), q(12, 1), q(18, 1)],
        };
        let LpOutcome::Optimal(s) = solve(&p, 100).unwrap() else {
            panic!()
        };
        assert_eq!(s.value, q(36, 1));
        assert_eq!(s.primal, vec![q(2, 1), q(6, 1)]);
        assert_eq!(s.dual, vec![q(0, 1), q(3, 2), q(1, 1)]);
    }

    #[test]
    fn f64_and_unbounded() {
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![vec![1.0, -1.0]],
            rhs: vec![1.0],
        };
        assert_eq!(solve(&p, 100).unwrap(), LpOutcome::Unbounded);
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![vec![2.0]],
            rhs: vec![3.0],
        };
        let LpOutcome::Optimal(s) = solve(&p, 100).unwrap() else {
            panic!()
        };
        assert_eq!(s.value, 1.5);
    }

    #[test]
    fn rejects_negative_rhs() {
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![vec![1.0]],
            rhs: vec![-1.0],
        };
        assert!(solve(&p, 10).is_err());
    }
}
