//! Exact presolve: singleton rows become bounds, fixed columns are
//! substituted, forcing and redundant rows are resolved from activity bounds,
//! and doubleton equalities eliminate one of their two columns.
//!
//! Every reduction is exact and invertible through [`Reduced::postsolve`].

use super::{LpProblem, Relation};
use crate::rational::Rational;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// `lo <= sum a_j x_j <= hi`; a missing side is unbounded.
#[derive(Debug, Clone)]
pub(super) struct Row {
    pub terms: BTreeMap<usize, Rational>,
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

#[derive(Debug, Clone)]
enum Elimination {
    Fixed(usize, Rational),
    /// `x = c + k * y`.
    Affine {
        x: usize,
        c: Rational,
        k: Rational,
        y: usize,
    },
}

/// The problem left after presolve, over the surviving original columns.
#[derive(Debug)]
pub(super) struct Reduced {
    pub rows: Vec<Row>,
    pub columns: Vec<usize>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    n: usize,
    stack: Vec<Elimination>,
}

impl Reduced {
    /// Extends a point of the reduced problem (indexed like `columns`) to the
    /// original columns.
    pub fn postsolve(&self, reduced: &[Rational]) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for (k, &j) in self.columns.iter().enumerate() {
            x[j] = reduced[k].clone();
        }
        for step in self.stack.iter().rev() {
            match step {
                Elimination::Fixed(j, v) => x[*j] = v.clone(),
                Elimination::Affine { x: xi, c, k, y } => x[*xi] = c + k * &x[*y],
            }
        }
        x
    }
}

pub(super) struct Infeasible;

struct State {
    rows: Vec<Option<Row>>,
    col_rows: Vec<BTreeSet<usize>>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    active: Vec<bool>,
    stack: Vec<Elimination>,
}

impl State {
    fn set_term(&mut self, i: usize, j: usize, a: Rational) {
        let row = self.rows[i].as_mut().expect("live row");
        if a.is_zero() {
            row.terms.remove(&j);
            self.col_rows[j].remove(&i);
        } else {
            row.terms.insert(j, a);
            self.col_rows[j].insert(i);
        }
    }

    fn drop_row(&mut self, i: usize) {
        if let Some(row) = self.rows[i].take() {
            for j in row.terms.keys() {
                self.col_rows[*j].remove(&i);
            }
        }
    }

    fn shift_row(row: &mut Row, delta: &Rational) {
        if let Some(lo) = row.lo.as_mut() {
            *lo -= delta;
        }
        if let Some(hi) = row.hi.as_mut() {
            *hi -= delta;
        }
    }

    /// Intersects the bounds of column `j` with `[lo, hi]`.
    fn tighten(&mut self, j: usize, lo: Option<Rational>, hi: Option<Rational>) -> Result<bool, Infeasible> {
        let mut changed = false;
        if let Some(lo) = lo {
            if lo > self.lower[j] {
                self.lower[j] = lo;
                changed = true;
            }
        }
        if let Some(hi) = hi {
            if self.upper[j].as_ref().is_none_or(|u| hi < *u) {
                self.upper[j] = Some(hi);
                changed = true;
            }
        }
        if self.upper[j].as_ref().is_some_and(|u| *u < self.lower[j]) {
            return Err(Infeasible);
        }
        Ok(changed)
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j].as_ref() == Some(&self.lower[j])
    }

    fn fix(&mut self, j: usize, v: Rational) -> Result<(), Infeasible> {
        if v < self.lower[j] || self.upper[j].as_ref().is_some_and(|u| v > *u) {
            return Err(Infeasible);
        }
        for i in std::mem::take(&mut self.col_rows[j]) {
            let row = self.rows[i].as_mut().expect("live row");
            let a = row.terms.remove(&j).expect("term");
            Self::shift_row(row, &(a * &v));
        }
        self.active[j] = false;
        self.stack.push(Elimination::Fixed(j, v));
        Ok(())
    }

    /// Minimum and maximum of the row's activity over the column bounds.
    fn activity(&self, row: &Row) -> (Option<Rational>, Option<Rational>) {
        let mut min = Some(Rational::zero());
        let mut max = Some(Rational::zero());
        for (j, a) in &row.terms {
            let (at_min, at_max) = if a.is_positive() {
                (Some(&self.lower[*j]), self.upper[*j].as_ref())
            } else {
                (self.upper[*j].as_ref(), Some(&self.lower[*j]))
            };
            min = min.and_then(|m| at_min.map(|b| m + a * b));
            max = max.and_then(|m| at_max.map(|b| m + a * b));
        }
        (min, max)
    }

    /// One pass over a row. Returns whether anything changed.
    fn process_row(&mut self, i: usize) -> Result<bool, Infeasible> {
        let Some(row) = self.rows[i].clone() else {
            return Ok(false);
        };
        if row.terms.is_empty() {
            let zero = Rational::zero();
            if row.lo.as_ref().is_some_and(|lo| *lo > zero) || row.hi.as_ref().is_some_and(|hi| *hi < zero) {
                return Err(Infeasible);
            }
            self.drop_row(i);
            return Ok(true);
        }
        if row.terms.len() == 1 {
            let (&j, a) = row.terms.iter().next().expect("one term");
            let lo = row.lo.as_ref().map(|v| v / a);
            let hi = row.hi.as_ref().map(|v| v / a);
            let (lo, hi) = if a.is_positive() { (lo, hi) } else { (hi, lo) };
            self.drop_row(i);
            self.tighten(j, lo, hi)?;
            if self.is_fixed(j) {
                let v = self.lower[j].clone();
                self.fix(j, v)?;
            }
            return Ok(true);
        }
        let (min, max) = self.activity(&row);
        if let (Some(hi), Some(min)) = (&row.hi, &min) {
            if hi < min {
                return Err(Infeasible);
            }
        }
        if let (Some(lo), Some(max)) = (&row.lo, &max) {
            if lo > max {
                return Err(Infeasible);
            }
        }
        // Forcing rows: the only way to meet the bound is at an extreme.
        let force_min = matches!((&row.hi, &min), (Some(hi), Some(m)) if hi == m);
        let force_max = matches!((&row.lo, &max), (Some(lo), Some(m)) if lo == m);
        if force_min || force_max {
            self.drop_row(i);
            for (j, a) in &row.terms {
                let low_side = a.is_positive() == force_min;
                let v = if low_side {
                    self.lower[*j].clone()
                } else {
                    self.upper[*j].clone().expect("finite activity")
                };
                self.fix(*j, v)?;
            }
            return Ok(true);
        }
        let lo_redundant = row.lo.is_none() || matches!((&row.lo, &min), (Some(lo), Some(m)) if m >= lo);
        let hi_redundant = row.hi.is_none() || matches!((&row.hi, &max), (Some(hi), Some(m)) if m <= hi);
        if lo_redundant && hi_redundant {
            self.drop_row(i);
            return Ok(true);
        }
        if lo_redundant != row.lo.is_none() || hi_redundant != row.hi.is_none() {
            let r = self.rows[i].as_mut().expect("live row");
            if lo_redundant {
                r.lo = None;
            }
            if hi_redundant {
                r.hi = None;
            }
            return Ok(true);
        }
        if row.terms.len() == 2 && row.lo.is_some() && row.lo == row.hi {
            self.eliminate_doubleton(i, &row)?;
            return Ok(true);
        }
        Ok(false)
    }

    /// `a x + b y = c`: substitutes `x = c/a - (b/a) y` everywhere.
    fn eliminate_doubleton(&mut self, i: usize, row: &Row) -> Result<(), Infeasible> {
        let mut it = row.terms.iter();
        let (&j1, a1) = it.next().expect("two terms");
        let (&j2, a2) = it.next().expect("two terms");
        // Eliminate the column that appears in fewer rows.
        let (x, a, y, b) = if self.col_rows[j1].len() <= self.col_rows[j2].len() {
            (j1, a1.clone(), j2, a2.clone())
        } else {
            (j2, a2.clone(), j1, a1.clone())
        };
        let c = row.lo.clone().expect("equality") / &a;
        let k = -(b / &a);
        self.drop_row(i);
        // Bounds of x become bounds on y: lx <= c + k y <= ux.
        let lx = &self.lower[x] - &c;
        let ux = self.upper[x].as_ref().map(|u| u - &c);
        let (ylo, yhi) = if k.is_positive() {
            (Some(&lx / &k), ux.map(|u| u / &k))
        } else {
            (ux.map(|u| u / &k), Some(&lx / &k))
        };
        self.tighten(y, ylo, yhi)?;
        for r in std::mem::take(&mut self.col_rows[x]) {
            let ax = self.rows[r].as_mut().expect("live row").terms.remove(&x).expect("term");
            Self::shift_row(self.rows[r].as_mut().expect("live row"), &(&ax * &c));
            let old = self.rows[r]
                .as_ref()
                .expect("live row")
                .terms
                .get(&y)
                .cloned()
                .unwrap_or_else(Rational::zero);
            self.set_term(r, y, old + &ax * &k);
        }
        self.active[x] = false;
        self.stack.push(Elimination::Affine { x, c, k, y });
        if self.is_fixed(y) {
            let v = self.lower[y].clone();
            self.fix(y, v)?;
        }
        Ok(())
    }
}

pub(super) fn presolve(lp: &LpProblem) -> Result<Reduced, Infeasible> {
    let n = lp.variable_count();
    let mut st = State {
        rows: Vec::with_capacity(lp.constraints.len()),
        col_rows: vec![BTreeSet::new(); n],
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
        active: vec![true; n],
        stack: Vec::new(),
    };
    for j in 0..n {
        if st.upper[j].as_ref().is_some_and(|u| *u < st.lower[j]) {
            return Err(Infeasible);
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut terms: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, a) in &c.terms {
            *terms.entry(*j).or_insert_with(Rational::zero) += a;
        }
        terms.retain(|_, a| !a.is_zero());
        for j in terms.keys() {
            st.col_rows[*j].insert(i);
        }
        let (lo, hi) = match c.relation {
            Relation::Eq => (Some(c.rhs.clone()), Some(c.rhs.clone())),
            Relation::Le => (None, Some(c.rhs.clone())),
            Relation::Ge => (Some(c.rhs.clone()), None),
        };
        st.rows.push(Some(Row { terms, lo, hi }));
    }
    for j in 0..n {
        if st.is_fixed(j) {
            let v = st.lower[j].clone();
            st.fix(j, v)?;
        }
    }
    loop {
        let mut changed = false;
        for i in 0..st.rows.len() {
            changed |= st.process_row(i)?;
        }
        if !changed {
            break;
        }
    }
    let columns: Vec<usize> = (0..n).filter(|&j| st.active[j]).collect();
    let index: BTreeMap<usize, usize> = columns.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let rows = st
        .rows
        .into_iter()
        .flatten()
        .map(|r| Row {
            terms: r.terms.into_iter().map(|(j, a)| (index[&j], a)).collect(),
            lo: r.lo,
            hi: r.hi,
        })
        .collect();
    Ok(Reduced {
        rows,
        lower: columns.iter().map(|&j| st.lower[j].clone()).collect(),
        upper: columns.iter().map(|&j| st.upper[j].clone()).collect(),
        columns,
        n,
        stack: st.stack,
    })
}
