//! Phase-one simplex with bounded variables over sparse rows.
//!
//! Every row `lo <= a x <= hi` becomes `a x - s = 0` with the slack bounded
//! by `[lo, hi]`. Slacks whose range contains the starting activity start in
//! the basis; the other rows get an artificial variable, and the sum of
//! artificials is driven to zero. Pricing is Dantzig's rule, with Bland's rule
//! during long runs of degenerate pivots.
//!
//! A floating-point pass picks the final basis. The decision is then
//! certified exactly: a feasible basis is re-solved in rationals and checked
//! against every bound, and an infeasible one yields exact dual multipliers
//! that are checked as a Farkas certificate. When either check fails the
//! exact rational simplex runs from scratch.

use super::linalg;
use super::presolve::{presolve, Reduced};
use super::LpProblem;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Degenerate pivots tolerated before Bland's rule takes over.
const DEGENERATE_STREAK: usize = 50;

/// Pivots between recomputations of the basic values.
const REFRESH_EVERY: usize = 50;

/// Relative bound widening of the floating-point pass.
const PERTURBATION: f64 = 1e-7;

/// Zero tolerance of the floating-point pass.
const FLOAT_TOL: f64 = 1e-9;

/// Smallest pivot magnitude accepted by the floating-point pass.
const FLOAT_PIVOT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A witness point satisfying every bound and constraint.
    Feasible(Vec<Rational>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// How the decision was reached.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Route {
    /// Presolve alone decided the problem.
    #[default]
    Presolve,
    /// The floating-point basis passed the exact certificate check.
    Certified,
    /// The exact rational simplex ran.
    Exact,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub columns: usize,
    pub rows: usize,
    pub reduced_columns: usize,
    pub reduced_rows: usize,
    pub float_pivots: usize,
    pub exact_pivots: usize,
    pub bland: bool,
    pub route: Route,
}

type SparseRow<T> = Vec<(usize, T)>;

trait Scalar: Clone {
    /// Exact arithmetic uses Bland's rule against cycling; the
    /// floating-point pass relies on bound perturbation instead.
    const EXACT: bool;
    fn nil() -> Self;
    fn convert(r: &Rational) -> Self;
    fn sign(&self) -> Ordering;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Whether the entry is large enough to pivot on.
    fn pivotable(&self) -> bool;

    fn magnitude(&self) -> Self {
        if self.sign() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn lt(&self, o: &Self) -> bool {
        self.sub(o).sign() == Ordering::Less
    }

    fn same(&self, o: &Self) -> bool {
        self.sub(o).sign() == Ordering::Equal
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn nil() -> Self {
        Zero::zero()
    }
    fn convert(r: &Rational) -> Self {
        r.clone()
    }
    fn sign(&self) -> Ordering {
        self.cmp(&Zero::zero())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn pivotable(&self) -> bool {
        !self.is_zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn nil() -> Self {
        0.0
    }
    fn convert(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn sign(&self) -> Ordering {
        if *self > FLOAT_TOL {
            Ordering::Greater
        } else if *self < -FLOAT_TOL {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn pivotable(&self) -> bool {
        self.abs() > FLOAT_PIVOT_TOL
    }
}

fn get<T>(row: &SparseRow<T>, j: usize) -> Option<&T> {
    row.binary_search_by_key(&j, |(k, _)| *k).ok().map(|p| &row[p].1)
}

/// `target -= f * src`.
fn sub_scaled<T: Scalar>(target: SparseRow<T>, f: &T, src: &SparseRow<T>) -> SparseRow<T> {
    let mut out = Vec::with_capacity(target.len() + src.len());
    let mut it = target.into_iter().peekable();
    for (k, a) in src {
        while let Some(entry) = it.next_if(|(j, _)| j < k) {
            out.push(entry);
        }
        let delta = f.mul(a);
        let v = match it.next_if(|(j, _)| j == k) {
            Some((_, v)) => v.sub(&delta),
            None => delta.neg(),
        };
        if v.sign() != Ordering::Equal {
            out.push((*k, v));
        }
    }
    out.extend(it);
    out
}

/// The phase-one problem in its starting canonical form, in exact arithmetic.
/// Columns are the shifted structurals, then one slack per row, then the
/// artificials.
struct Augmented {
    rows: Vec<SparseRow<Rational>>,
    basis: Vec<usize>,
    value: Vec<Rational>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    artificial_from: usize,
}

impl Augmented {
    fn new(red: &Reduced) -> Self {
        let n = red.lower.len();
        let m = red.rows.len();
        let mut lower: Vec<Option<Rational>> = vec![Some(Rational::zero()); n];
        let mut upper: Vec<Option<Rational>> = (0..n)
            .map(|j| red.upper[j].as_ref().map(|u| u - &red.lower[j]))
            .collect();
        let mut value = vec![Rational::zero(); n];
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut pending = Vec::new();
        let zero = Rational::zero();
        for (i, row) in red.rows.iter().enumerate() {
            // Activity at the shifted origin.
            let base: Rational = row.terms.iter().map(|(j, a)| a * &red.lower[*j]).sum();
            let slo = row.lo.as_ref().map(|v| v - &base);
            let shi = row.hi.as_ref().map(|v| v - &base);
            let s = n + i;
            lower.push(slo.clone());
            upper.push(shi.clone());
            let mut terms: SparseRow<Rational> = row.terms.iter().map(|(j, a)| (*j, a.clone())).collect();
            terms.sort_by_key(|(j, _)| *j);
            let contains_zero = slo.as_ref().is_none_or(|lo| *lo <= zero) && shi.as_ref().is_none_or(|hi| *hi >= zero);
            if contains_zero {
                // s - a x = 0 with s basic at 0.
                let mut r: SparseRow<Rational> = terms.into_iter().map(|(j, a)| (j, -a)).collect();
                r.push((s, Rational::one()));
                value.push(Rational::zero());
                rows.push(r);
                basis.push(s);
            } else {
                let beta = match slo {
                    Some(lo) if lo > zero => lo,
                    _ => shi.expect("negative upper side"),
                };
                value.push(beta.clone());
                pending.push((i, terms, beta));
                rows.push(Vec::new());
                basis.push(usize::MAX);
            }
        }
        let artificial_from = n + m;
        for (k, (i, terms, beta)) in pending.into_iter().enumerate() {
            // sign * (a x - s) + t = 0 with t basic at |beta|.
            let t = artificial_from + k;
            let sign = if beta.is_positive() {
                Rational::one()
            } else {
                -Rational::one()
            };
            let mut r: SparseRow<Rational> = terms.into_iter().map(|(j, a)| (j, &sign * a)).collect();
            r.push((n + i, -sign));
            r.push((t, Rational::one()));
            lower.push(Some(Rational::zero()));
            upper.push(None);
            value.push(beta.abs());
            rows[i] = r;
            basis[i] = t;
        }
        Augmented {
            rows,
            basis,
            value,
            lower,
            upper,
            artificial_from,
        }
    }

    fn columns(&self) -> usize {
        self.value.len()
    }
}

struct Tableau<T> {
    rows: Vec<SparseRow<T>>,
    basis: Vec<usize>,
    cost: SparseRow<T>,
    value: Vec<T>,
    lower: Vec<Option<T>>,
    upper: Vec<Option<T>>,
    artificial_from: usize,
    pivots: usize,
    bland_used: bool,
}

impl<T: Scalar> Tableau<T> {
    fn new(aug: &Augmented) -> Self {
        let conv = |v: &Option<Rational>| v.as_ref().map(T::convert);
        let rows: Vec<SparseRow<T>> = aug
            .rows
            .iter()
            .map(|r| r.iter().map(|(j, a)| (*j, T::convert(a))).collect())
            .collect();
        // Phase-one reduced costs: minus the sum of the artificial rows,
        // restricted to nonbasic columns.
        let mut cost: SparseRow<T> = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if aug.basis[i] >= aug.artificial_from {
                let rest: SparseRow<T> = row.iter().filter(|(j, _)| *j != aug.basis[i]).cloned().collect();
                cost = sub_scaled(cost, &T::convert(&Rational::one()), &rest);
            }
        }
        Tableau {
            rows,
            basis: aug.basis.clone(),
            cost,
            value: aug.value.iter().map(T::convert).collect(),
            lower: aug.lower.iter().map(conv).collect(),
            upper: aug.upper.iter().map(conv).collect(),
            artificial_from: aug.artificial_from,
            pivots: 0,
            bland_used: false,
        }
    }

    fn at_lower(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_some_and(|l| self.value[j].same(l))
    }

    fn at_upper(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| self.value[j].same(u))
    }

    fn objective_is_zero(&self) -> bool {
        self.value[self.artificial_from..]
            .iter()
            .all(|v| v.sign() == Ordering::Equal)
    }

    fn choose_entering(&self, bland: bool, is_basic: &[bool]) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, T)> = None;
        for (j, d) in &self.cost {
            if is_basic[*j] {
                continue;
            }
            let up = d.sign() == Ordering::Less && !self.at_upper(*j);
            let down = d.sign() == Ordering::Greater && !self.at_lower(*j);
            if !(up || down) {
                continue;
            }
            if bland {
                return Some((*j, up));
            }
            let mag = d.magnitude();
            if best.as_ref().is_none_or(|(_, _, b)| b.lt(&mag)) {
                best = Some((*j, up, mag));
            }
        }
        best.map(|(j, up, _)| (j, up))
    }

    /// Runs phase one. Returns whether the artificials reached zero, or
    /// `None` if `max_pivots` ran out first.
    fn run(&mut self, max_pivots: Option<usize>) -> Option<bool> {
        let mut is_basic = vec![false; self.value.len()];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut streak = 0;
        let mut bland = false;
        let mut steps = 0;
        loop {
            if max_pivots.is_some_and(|cap| steps >= cap) {
                return None;
            }
            steps += 1;
            let Some((j, up)) = self.choose_entering(bland, &is_basic) else {
                return Some(self.objective_is_zero());
            };
            // Ratio test. Moving x_j by `step` moves basic x_B(i) by
            // `-alpha_i * step`.
            let own = if up {
                self.upper[j].as_ref().map(|u| u.sub(&self.value[j]))
            } else {
                self.lower[j].as_ref().map(|l| self.value[j].sub(l))
            };
            let mut limit: Option<(T, Option<(usize, bool)>)> = own.map(|t| (t, None));
            let mut limit_alpha = T::nil();
            for (i, row) in self.rows.iter().enumerate() {
                let Some(alpha) = get(row, j) else { continue };
                if !alpha.pivotable() {
                    continue;
                }
                let rate = if up { alpha.neg() } else { alpha.clone() };
                let b = self.basis[i];
                let falls = rate.sign() == Ordering::Less;
                let room = if falls {
                    self.lower[b].as_ref().map(|l| self.value[b].sub(l).div(&rate.neg()))
                } else {
                    self.upper[b].as_ref().map(|u| u.sub(&self.value[b]).div(&rate))
                };
                let Some(mut room) = room else { continue };
                if room.sign() == Ordering::Less {
                    room = T::nil();
                }
                let mag = alpha.magnitude();
                let better = match &limit {
                    None => true,
                    Some((best, who)) => {
                        room.lt(best)
                            || (room.same(best)
                                && who.is_some_and(
                                    |(w, _)| {
                                        if bland {
                                            b < self.basis[w]
                                        } else {
                                            limit_alpha.lt(&mag)
                                        }
                                    },
                                ))
                    }
                };
                if better {
                    limit = Some((room, Some((i, falls))));
                    limit_alpha = mag;
                }
            }
            let Some((theta, leave)) = limit else {
                // Unbounded improving ray: impossible in exact phase one.
                return None;
            };
            if theta.sign() == Ordering::Equal {
                streak += 1;
                if T::EXACT && streak >= DEGENERATE_STREAK {
                    bland = true;
                    self.bland_used = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
            let step = if up { theta.clone() } else { theta.neg() };
            self.value[j] = self.value[j].add(&step);
            for (i, row) in self.rows.iter().enumerate() {
                if let Some(alpha) = get(row, j) {
                    let b = self.basis[i];
                    self.value[b] = self.value[b].sub(&alpha.mul(&step));
                }
            }
            let Some((r, falls)) = leave else {
                // Bound flip: snap onto the bound.
                let bound = if up { &self.upper[j] } else { &self.lower[j] };
                self.value[j] = bound.clone().expect("finite bound");
                continue;
            };
            let leaving = self.basis[r];
            let alpha = get(&self.rows[r], j).expect("pivot entry").clone();
            let pivot: SparseRow<T> = self.rows[r].iter().map(|(k, a)| (*k, a.div(&alpha))).collect();
            for i in 0..self.rows.len() {
                if i == r {
                    continue;
                }
                if let Some(f) = get(&self.rows[i], j).cloned() {
                    let row = std::mem::take(&mut self.rows[i]);
                    self.rows[i] = sub_scaled(row, &f, &pivot);
                }
            }
            if let Some(f) = get(&self.cost, j).cloned() {
                let cost = std::mem::take(&mut self.cost);
                self.cost = sub_scaled(cost, &f, &pivot);
            }
            self.rows[r] = pivot;
            self.basis[r] = j;
            is_basic[j] = true;
            is_basic[leaving] = false;
            let bound = if falls {
                &self.lower[leaving]
            } else {
                &self.upper[leaving]
            };
            self.value[leaving] = bound.clone().expect("finite bound");
            if leaving >= self.artificial_from {
                // Artificials never re-enter.
                self.upper[leaving] = Some(T::nil());
            }
            self.pivots += 1;
            if self.pivots.is_multiple_of(REFRESH_EVERY) {
                self.refresh_basic_values(&is_basic);
            }
        }
    }

    /// Recomputes basic values from the rows, `x_B(i) = -sum alpha_ij x_j`.
    fn refresh_basic_values(&mut self, is_basic: &[bool]) {
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let mut acc = T::nil();
            for (j, a) in &self.rows[i] {
                if !is_basic[*j] {
                    acc = acc.sub(&a.mul(&self.value[*j]));
                }
            }
            self.value[b] = acc;
        }
    }
}

impl Tableau<f64> {
    /// Widens every structural and slack bound by a small, column-dependent
    /// amount so that ties in the ratio test become rare, then moves the
    /// nonbasic columns onto their widened bounds.
    fn perturb(&mut self) {
        let mut is_basic = vec![false; self.value.len()];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        for j in 0..self.artificial_from {
            // Golden-ratio sequence: deterministic and well spread in [1, 2).
            let spread = 1.0 + (j as f64 * 0.618_033_988_749_895).fract();
            let widen = |b: f64| PERTURBATION * spread * (1.0 + b.abs());
            let at_upper = !is_basic[j] && self.at_upper(j);
            if let Some(l) = self.lower[j].as_mut() {
                *l -= widen(*l);
            }
            if let Some(u) = self.upper[j].as_mut() {
                *u += widen(*u);
            }
            if !is_basic[j] {
                let bound = if at_upper { &self.upper[j] } else { &self.lower[j] };
                self.value[j] = bound.expect("nonbasic columns sit on a finite bound");
            }
        }
        self.refresh_basic_values(&is_basic);
    }
}

/// Exact value of each nonbasic column, read off the floating-point run.
fn nonbasic_values(aug: &Augmented, basis: &[usize], value: &[f64]) -> Option<Vec<Option<Rational>>> {
    let mut basic = vec![false; aug.columns()];
    for &b in basis {
        basic[b] = true;
    }
    let mut out = vec![None; aug.columns()];
    for j in 0..aug.columns() {
        if basic[j] {
            continue;
        }
        if j >= aug.artificial_from {
            out[j] = Some(Rational::zero());
            continue;
        }
        let near = |b: &Option<Rational>| b.as_ref().map(|b| (value[j] - rational::to_f64(b)).abs());
        out[j] = match (near(&aug.lower[j]), near(&aug.upper[j])) {
            (Some(l), Some(u)) if u < l => aug.upper[j].clone(),
            (Some(_), _) => aug.lower[j].clone(),
            (None, Some(_)) => aug.upper[j].clone(),
            (None, None) => return None,
        };
    }
    Some(out)
}

fn within(v: &Rational, lo: &Option<Rational>, hi: &Option<Rational>) -> bool {
    lo.as_ref().is_none_or(|l| v >= l) && hi.as_ref().is_none_or(|h| v <= h)
}

/// Re-solves the basis exactly. Returns the full column vector when it lies
/// within every bound with all artificials at zero.
fn certify_feasible(aug: &Augmented, basis: &[usize], value: &[f64]) -> Option<Vec<Rational>> {
    let fixed = nonbasic_values(aug, basis, value)?;
    let mut pos = vec![usize::MAX; aug.columns()];
    for (k, &b) in basis.iter().enumerate() {
        pos[b] = k;
    }
    let mut rows = Vec::with_capacity(aug.rows.len());
    let mut rhs = Vec::with_capacity(aug.rows.len());
    for row in &aug.rows {
        let mut r = Vec::new();
        let mut acc = Rational::zero();
        for (j, a) in row {
            match &fixed[*j] {
                Some(v) => acc -= a * v,
                None => r.push((pos[*j], a.clone())),
            }
        }
        rows.push(r);
        rhs.push(acc);
    }
    let xb = linalg::solve(rows, rhs)?;
    let mut z: Vec<Rational> = fixed.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    for (k, &b) in basis.iter().enumerate() {
        z[b] = xb[k].clone();
    }
    let ok = (0..aug.columns()).all(|j| {
        if j >= aug.artificial_from {
            z[j].is_zero()
        } else {
            within(&z[j], &aug.lower[j], &aug.upper[j])
        }
    });
    ok.then_some(z)
}

/// Solves for exact phase-one duals of the basis and checks them as a
/// Farkas certificate with every artificial fixed at zero: if `g = A^T y`
/// has `g . z < 0` (or `> 0`) over the whole box, `A z = 0` has no solution.
fn certify_infeasible(aug: &Augmented, basis: &[usize]) -> bool {
    let m = aug.rows.len();
    let mut pos = vec![usize::MAX; aug.columns()];
    for (k, &b) in basis.iter().enumerate() {
        pos[b] = k;
    }
    // Row k of B^T is basic column basis[k].
    let mut bt: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m];
    for (i, row) in aug.rows.iter().enumerate() {
        for (j, a) in row {
            if pos[*j] != usize::MAX {
                bt[pos[*j]].push((i, a.clone()));
            }
        }
    }
    let c: Vec<Rational> = basis
        .iter()
        .map(|&b| {
            if b >= aug.artificial_from {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    let Some(y) = linalg::solve(bt, c) else {
        return false;
    };
    let mut g = vec![Rational::zero(); aug.artificial_from];
    for (i, row) in aug.rows.iter().enumerate() {
        if y[i].is_zero() {
            continue;
        }
        for (j, a) in row {
            if *j < aug.artificial_from {
                g[*j] += a * &y[i];
            }
        }
    }
    // Extremes of g . z over the box; None is unbounded.
    let mut max = Some(Rational::zero());
    let mut min = Some(Rational::zero());
    for (j, gj) in g.iter().enumerate() {
        if gj.is_zero() {
            continue;
        }
        let (hi, lo) = if gj.is_positive() {
            (&aug.upper[j], &aug.lower[j])
        } else {
            (&aug.lower[j], &aug.upper[j])
        };
        max = max.and_then(|s| hi.as_ref().map(|h| s + gj * h));
        min = min.and_then(|s| lo.as_ref().map(|l| s + gj * l));
    }
    max.is_some_and(|v| v.is_negative()) || min.is_some_and(|v| v.is_positive())
}

/// Which simplex passes to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Floating-point pass with an exact certificate, exact fallback.
    #[default]
    Guided,
    /// Exact rational simplex only.
    ExactOnly,
}

/// Decides feasibility exactly. A feasible answer carries a witness that has
/// been checked against every bound and constraint of `lp`.
pub fn check_feasible(lp: &LpProblem) -> (Feasibility, SolveStats) {
    check_feasible_with(lp, Strategy::Guided)
}

pub fn check_feasible_with(lp: &LpProblem, strategy: Strategy) -> (Feasibility, SolveStats) {
    let mut stats = SolveStats {
        columns: lp.variable_count(),
        rows: lp.constraints.len(),
        ..SolveStats::default()
    };
    let Ok(reduced) = presolve(lp) else {
        return (Feasibility::Infeasible, stats);
    };
    stats.reduced_columns = reduced.columns.len();
    stats.reduced_rows = reduced.rows.len();
    if reduced.rows.is_empty() {
        // Every column sits at its lower bound.
        let x = reduced.postsolve(&reduced.lower);
        return (finish(lp, x), stats);
    }
    let aug = Augmented::new(&reduced);
    let certified = match strategy {
        Strategy::Guided => {
            let mut float = Tableau::<f64>::new(&aug);
            float.perturb();
            let cap = 50 * aug.columns() + 1000;
            let verdict = float.run(Some(cap));
            stats.float_pivots = float.pivots;
            match verdict {
                Some(true) => certify_feasible(&aug, &float.basis, &float.value).map(Feasibility::Feasible),
                Some(false) => certify_infeasible(&aug, &float.basis).then_some(Feasibility::Infeasible),
                None => None,
            }
        }
        Strategy::ExactOnly => None,
    };
    let outcome = match certified {
        Some(f) => {
            stats.route = Route::Certified;
            f
        }
        None => {
            stats.route = Route::Exact;
            let mut exact = Tableau::<Rational>::new(&aug);
            let feasible = exact.run(None).expect("exact phase one terminates");
            stats.exact_pivots = exact.pivots;
            stats.bland = exact.bland_used;
            if feasible {
                Feasibility::Feasible(exact.value)
            } else {
                Feasibility::Infeasible
            }
        }
    };
    match outcome {
        Feasibility::Infeasible => (Feasibility::Infeasible, stats),
        Feasibility::Feasible(z) => {
            let point: Vec<Rational> = (0..reduced.columns.len()).map(|k| &reduced.lower[k] + &z[k]).collect();
            (finish(lp, reduced.postsolve(&point)), stats)
        }
    }
}

fn finish(lp: &LpProblem, x: Vec<Rational>) -> Feasibility {
    let bad = lp.violations(&x);
    assert!(bad.is_empty(), "simplex witness violates the problem: {bad:?}");
    Feasibility::Feasible(x)
}
