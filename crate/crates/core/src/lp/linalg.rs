//! Exact sparse Gaussian elimination for square rational systems.

use crate::rational::Rational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Solves `M x = rhs` for a square matrix given by its sparse rows.
/// Returns `None` when `M` is singular.
pub(super) fn solve(rows: Vec<Vec<(usize, Rational)>>, rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut rows: Vec<BTreeMap<usize, Rational>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    let mut rhs = rhs;
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, r) in rows.iter().enumerate() {
        for &j in r.keys() {
            col_rows[j].insert(i);
        }
    }
    let mut row_done = vec![false; n];
    // (row, column) in elimination order.
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        // Sparsest remaining row, then its sparsest column.
        let i = (0..n).filter(|&i| !row_done[i]).min_by_key(|&i| (rows[i].len(), i))?;
        let j = *rows[i].keys().min_by_key(|&&j| (col_rows[j].len(), j))?;
        row_done[i] = true;
        let pivot = rows[i][&j].clone();
        let others: Vec<usize> = col_rows[j].iter().copied().filter(|&k| k != i).collect();
        for k in others {
            if row_done[k] {
                continue;
            }
            let f = &rows[k][&j] / &pivot;
            let src: Vec<(usize, Rational)> = rows[i].iter().map(|(c, a)| (*c, a.clone())).collect();
            for (c, a) in src {
                let v = rows[k].get(&c).cloned().unwrap_or_else(Rational::zero) - &f * a;
                if v.is_zero() {
                    rows[k].remove(&c);
                    col_rows[c].remove(&k);
                } else {
                    rows[k].insert(c, v);
                    col_rows[c].insert(k);
                }
            }
            let delta = &f * &rhs[i];
            rhs[k] -= delta;
        }
        order.push((i, j));
    }
    // Back substitution in reverse elimination order: row i only mentions
    // its pivot column and columns pivoted later.
    let mut x = vec![Rational::zero(); n];
    for &(i, j) in order.iter().rev() {
        let mut acc = rhs[i].clone();
        for (c, a) in &rows[i] {
            if *c != j {
                acc -= a * &x[*c];
            }
        }
        x[j] = acc / &rows[i][&j];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn solves_small_system() {
        // x + y = 3, x - y = 1
        let rows = vec![
            vec![(0, ratio(1, 1)), (1, ratio(1, 1))],
            vec![(0, ratio(1, 1)), (1, ratio(-1, 1))],
        ];
        let x = solve(rows, vec![ratio(3, 1), ratio(1, 1)]).unwrap();
        assert_eq!(x, vec![ratio(2, 1), ratio(1, 1)]);
    }

    #[test]
    fn singular_is_none() {
        let rows = vec![
            vec![(0, ratio(1, 1)), (1, ratio(1, 1))],
            vec![(0, ratio(2, 1)), (1, ratio(2, 1))],
        ];
        assert!(solve(rows, vec![ratio(1, 1), ratio(2, 1)]).is_none());
    }
}
