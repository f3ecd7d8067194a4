//! Exact linear programs over small bounded polytopes, solved by vertex
//! enumeration.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::Budget;

/// `maximize objective·x` subject to `row·x ≤ bound` for every constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    objective: Vec<BigRational>,
    constraints: Vec<(Vec<BigRational>, BigRational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        point: Vec<BigRational>,
    },
    Infeasible,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<BigRational>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    /// Adds `row·x ≤ bound`.
    pub fn at_most(&mut self, row: Vec<BigRational>, bound: BigRational) -> Result<&mut Self> {
        if row.len() != self.variables() {
            return Err(Error::DimensionMismatch(format!(
                "constraint has {} coefficients for {} variables",
                row.len(),
                self.variables()
            )));
        }
        self.constraints.push((row, bound));
        Ok(self)
    }

    /// Adds `row·x ≥ bound`.
    pub fn at_least(&mut self, row: Vec<BigRational>, bound: BigRational) -> Result<&mut Self> {
        self.at_most(row.into_iter().map(|c| -c).collect(), -bound)
    }

    /// Adds `low ≤ x_var ≤ high`.
    pub fn bounds(&mut self, var: usize, low: BigRational, high: BigRational) -> Result<&mut Self> {
        let unit = |sign: i64| {
            let mut row = vec![BigRational::zero(); self.variables()];
            row[var] = BigRational::from_integer(sign.into());
            row
        };
        let (up, down) = (unit(1), unit(-1));
        self.at_most(up, high)?;
        self.at_most(down, -low)
    }

    pub fn is_feasible_point(&self, point: &[BigRational]) -> bool {
        self.constraints.iter().all(|(row, bound)| dot(row, point) <= *bound)
    }

    /// Optimum over the vertices of the feasible region, which must be
    /// bounded. Ties keep the vertex found first (constraint subsets in
    /// lexicographic order).
    pub fn solve(&self, budget: &Budget) -> Result<LpOutcome> {
        let n = self.variables();
        let k = self.constraints.len();
        budget.admit(binomial(k, n))?;
        if n > k {
            return Ok(LpOutcome::Infeasible);
        }
        let mut best: Option<(BigRational, Vec<BigRational>)> = None;
        let mut subset: Vec<usize> = (0..n).collect();
        loop {
            if let Some(point) = self.vertex(&subset) {
                if self.is_feasible_point(&point) {
                    let value = dot(&self.objective, &point);
                    if best.as_ref().is_none_or(|(v, _)| value > *v) {
                        best = Some((value, point));
                    }
                }
            }
            if !next_subset(&mut subset, k) {
                break;
            }
        }
        Ok(match best {
            Some((value, point)) => LpOutcome::Optimal { value, point },
            None => LpOutcome::Infeasible,
        })
    }

    /// Unique solution of the chosen constraints held with equality.
    fn vertex(&self, subset: &[usize]) -> Option<Vec<BigRational>> {
        let n = self.variables();
        let mut rows: Vec<Vec<BigRational>> = subset
            .iter()
            .map(|&c| {
                let (row, bound) = &self.constraints[c];
                let mut r = row.clone();
                r.push(bound.clone());
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
            rows.swap(col, pivot);
            let lead = rows[col][col].clone();
            for entry in rows[col].iter_mut() {
                *entry /= &lead;
            }
            for r in (0..n).filter(|&r| r != col) {
                let factor = rows[r][col].clone();
                if factor.is_zero() {
                    continue;
                }
                let pivot = rows[col].clone();
                for (entry, p) in rows[r].iter_mut().zip(&pivot).skip(col) {
                    *entry -= &factor * p;
                }
            }
        }
        Some(
            rows.into_iter()
                .map(|mut r| r.pop().expect("augmented column"))
                .collect(),
        )
    }
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(k: usize, n: usize) -> Option<u128> {
    if n > k {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 0..n.min(k - n) {
        acc = acc.checked_mul((k - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Advances to the next ascending `subset.len()`-subset of `0..k`.
fn next_subset(subset: &mut [usize], k: usize) -> bool {
    let n = subset.len();
    for i in (0..n).rev() {
        if subset[i] < k - n + i {
            subset[i] += 1;
            for j in i + 1..n {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
