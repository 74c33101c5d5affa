//! The linear program induced by a coupling tree, and an exact feasibility
//! check.
//!
//! Each node carries a sigma-side and a tau-side variable; each internal
//! feasible node also carries one pair per branch edge. The constraints are
//! grouped into six families:
//!
//! 1. box bounds `[0, 1]` and root values equal to 1;
//! 2. node value equals the sum over its branch edges;
//! 3. each edge value equals the matching sum over that edge's children;
//! 4. at feasible good leaves, `r- * w * pt <= ps <= r+ * w * pt` with
//!    `w = mu(tau) / mu(sigma)`;
//! 5. the zero-completion set of an internal feasible node carries at least
//!    `B` times the node's value;
//! 6. infeasible nodes are 0.

mod linalg;
mod presolve;
mod simplex;

use crate::rational::{self, Rational};
use crate::tree::{CouplingTree, Direction, NodeId};
use num_traits::{One, Zero};
use std::fmt::{self, Write as _};

pub use simplex::{check_feasible, check_feasible_with, Feasibility, Route, SolveStats, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("invalid bracket: r- = {0} exceeds r+ = {1}")]
    InvalidBracket(String, String),
    #[error("negative bracket endpoint {0}")]
    NegativeBracket(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    NodeSigma,
    NodeTau,
    EdgeSigma,
    EdgeTau,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpVariable {
    pub kind: VarKind,
    pub node: NodeId,
    /// Branch edge id for edge variables.
    pub edge: Option<usize>,
}

impl fmt::Display for LpVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.edge) {
            (VarKind::NodeSigma, _) => write!(f, "ps:{}", self.node),
            (VarKind::NodeTau, _) => write!(f, "pt:{}", self.node),
            (VarKind::EdgeSigma, Some(e)) => write!(f, "pse:{}:{e}", self.node),
            (VarKind::EdgeTau, Some(e)) => write!(f, "pte:{}:{e}", self.node),
            (_, None) => write!(f, "?:{}", self.node),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub family: u8,
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// A feasibility problem: bounded variables and linear constraints, exact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpProblem {
    pub names: Vec<String>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: Rational, upper: Option<Rational>) -> usize {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, family: u8, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            family,
            terms,
            relation,
            rhs,
        });
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    /// Whether `x` satisfies every bound and constraint.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        self.violations(x).is_empty()
    }

    /// Human-readable list of bounds and constraints that `x` violates.
    pub fn violations(&self, x: &[Rational]) -> Vec<String> {
        let mut out = Vec::new();
        for j in 0..self.variable_count() {
            let lo_ok = x[j] >= self.lower[j];
            let hi_ok = self.upper[j].as_ref().is_none_or(|u| x[j] <= *u);
            if !lo_ok || !hi_ok {
                out.push(format!(
                    "bound on {}: value {}",
                    self.names[j],
                    rational::to_string(&x[j])
                ));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.holds(x) {
                out.push(format!("constraint {i} (family {})", c.family));
            }
        }
        out
    }

    /// Number of constraints in each family, indexed by family number.
    pub fn family_counts(&self) -> [usize; 7] {
        let mut counts = [0; 7];
        for c in &self.constraints {
            counts[usize::from(c.family).min(6)] += 1;
        }
        counts
    }

    /// Plain-text dump: one bound or constraint per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for j in 0..self.variable_count() {
            let hi = self.upper[j].as_ref().map_or("inf".to_string(), rational::to_string);
            let _ = writeln!(
                out,
                "bound {} <= {} <= {}",
                rational::to_string(&self.lower[j]),
                self.names[j],
                hi
            );
        }
        for c in &self.constraints {
            let _ = write!(out, "f{}:", c.family);
            for (j, a) in &c.terms {
                let _ = write!(out, " {} {}", rational::to_string(a), self.names[*j]);
            }
            let _ = writeln!(out, " {} {}", c.relation, rational::to_string(&c.rhs));
        }
        out
    }
}

/// Which child equalities to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpForm {
    /// Impose a side's equality through its `e <- 1` children only when that
    /// extension is feasible.
    #[default]
    Repaired,
    /// Every equality, even through children that are infeasible by
    /// construction.
    Literal,
}

/// The LP of a tree together with the index of each node's variables.
#[derive(Debug, Clone)]
pub struct TreeLp {
    pub problem: LpProblem,
    pub variables: Vec<LpVariable>,
    node_vars: Vec<(usize, usize)>,
}

impl TreeLp {
    pub fn sigma_var(&self, n: NodeId) -> usize {
        self.node_vars[n.0].0
    }

    pub fn tau_var(&self, n: NodeId) -> usize {
        self.node_vars[n.0].1
    }
}

/// Builds the LP for the bracket `[r_minus, r_plus]` with coefficient `b` in
/// the zero-completion family.
pub fn build_lp(
    tree: &CouplingTree,
    r_minus: &Rational,
    r_plus: &Rational,
    b: &Rational,
    form: LpForm,
) -> Result<TreeLp, LpError> {
    if r_minus > r_plus {
        return Err(LpError::InvalidBracket(
            rational::to_string(r_minus),
            rational::to_string(r_plus),
        ));
    }
    if *r_minus < Rational::zero() {
        return Err(LpError::NegativeBracket(rational::to_string(r_minus)));
    }
    let one = Rational::one;
    let zero = Rational::zero;
    let mut lp = LpProblem::new();
    let mut variables = Vec::new();
    let mut add = |lp: &mut LpProblem, kind, node, edge| {
        let v = LpVariable { kind, node, edge };
        let idx = lp.add_variable(v.to_string(), zero(), Some(one()));
        variables.push(v);
        idx
    };
    let mut node_vars = Vec::with_capacity(tree.len());
    for (id, _) in tree.nodes() {
        let s = add(&mut lp, VarKind::NodeSigma, id, None);
        let t = add(&mut lp, VarKind::NodeTau, id, None);
        node_vars.push((s, t));
    }
    let mut edge_vars: Vec<Vec<(usize, usize)>> = vec![Vec::new(); tree.len()];
    for (id, node) in tree.nodes() {
        if node.leaf {
            continue;
        }
        for e in &node.branch_edges {
            let s = add(&mut lp, VarKind::EdgeSigma, id, Some(e.0));
            let t = add(&mut lp, VarKind::EdgeTau, id, Some(e.0));
            edge_vars[id.0].push((s, t));
        }
    }

    let (rs, rt) = node_vars[0];
    lp.add_constraint(1, vec![(rs, one())], Relation::Eq, one());
    lp.add_constraint(1, vec![(rt, one())], Relation::Eq, one());

    let neg = || -Rational::one();
    for (id, node) in tree.nodes() {
        let (ps, pt) = node_vars[id.0];
        let class = tree.class(id);
        if !node.feasible {
            lp.add_constraint(6, vec![(ps, one())], Relation::Eq, zero());
            lp.add_constraint(6, vec![(pt, one())], Relation::Eq, zero());
            continue;
        }
        if class.good_leaf {
            let w = tree.weight_ratio(id);
            lp.add_constraint(4, vec![(ps, one()), (pt, -(r_minus * &w))], Relation::Ge, zero());
            lp.add_constraint(4, vec![(ps, one()), (pt, -(r_plus * &w))], Relation::Le, zero());
            continue;
        }
        if node.leaf {
            continue;
        }
        let ev = &edge_vars[id.0];
        let mut flow_s = vec![(ps, one())];
        flow_s.extend(ev.iter().map(|(s, _)| (*s, neg())));
        lp.add_constraint(2, flow_s, Relation::Eq, zero());
        let mut flow_t = vec![(pt, one())];
        flow_t.extend(ev.iter().map(|(_, t)| (*t, neg())));
        lp.add_constraint(2, flow_t, Relation::Eq, zero());

        for (k, &(pse, pte)) in ev.iter().enumerate() {
            let [c0, c1, c2] = node.children_of_edge(k).map(|c| node_vars[c.0]);
            let (s_one, t_one) = match form {
                LpForm::Repaired => node.one_feasible[k],
                LpForm::Literal => (true, true),
            };
            let mut eq = |terms: Vec<(usize, Rational)>| lp.add_constraint(3, terms, Relation::Eq, zero());
            match node.direction() {
                // children (0,0), (1,0), (1,1)
                Direction::SigmaLower => {
                    eq(vec![(pse, one()), (c0.0, neg())]);
                    if s_one {
                        eq(vec![(pse, one()), (c1.0, neg()), (c2.0, neg())]);
                    }
                    eq(vec![(pte, one()), (c0.1, neg()), (c1.1, neg())]);
                    if t_one {
                        eq(vec![(pte, one()), (c2.1, neg())]);
                    }
                }
                // children (0,0), (0,1), (1,1)
                Direction::SigmaHigher => {
                    eq(vec![(pse, one()), (c0.0, neg()), (c1.0, neg())]);
                    if s_one {
                        eq(vec![(pse, one()), (c2.0, neg())]);
                    }
                    eq(vec![(pte, one()), (c0.1, neg())]);
                    if t_one {
                        eq(vec![(pte, one()), (c1.1, neg()), (c2.1, neg())]);
                    }
                }
            }
        }

        let d = tree.zero_completion_set(id).expect("internal node");
        let mut sum_s: Vec<(usize, Rational)> = d.iter().map(|n| (node_vars[n.0].0, one())).collect();
        sum_s.push((ps, -b.clone()));
        lp.add_constraint(5, sum_s, Relation::Ge, zero());
        let mut sum_t: Vec<(usize, Rational)> = d.iter().map(|n| (node_vars[n.0].1, one())).collect();
        sum_t.push((pt, -b.clone()));
        lp.add_constraint(5, sum_t, Relation::Ge, zero());
    }
    Ok(TreeLp {
        problem: lp,
        variables,
        node_vars,
    })
}

/// Assignment of an exact probability table to the LP variables.
pub fn table_point(lp: &TreeLp, table: &crate::coupling::TreeProbabilityTable, tree: &CouplingTree) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); lp.problem.variable_count()];
    for (id, _) in tree.nodes() {
        x[lp.sigma_var(id)] = table.sigma[id.0].clone();
        x[lp.tau_var(id)] = table.tau[id.0].clone();
    }
    for (j, v) in lp.variables.iter().enumerate() {
        if let (VarKind::EdgeSigma | VarKind::EdgeTau, Some(e)) = (v.kind, v.edge) {
            let node = tree.node(v.node);
            let k = node.branch_edges.iter().position(|b| b.0 == e).expect("branch edge");
            x[j] = match v.kind {
                VarKind::EdgeSigma => table.edge_sigma[v.node.0][k].clone(),
                _ => table.edge_tau[v.node.0][k].clone(),
            };
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::exact_tree_probabilities;
    use crate::fixtures;
    use crate::holant::{HolantInstance, Signature};
    use crate::oracle::Oracle;
    use crate::rational::{int, ratio};
    use crate::tree::HalfEdgeInstance;

    fn boxed(n: usize) -> LpProblem {
        let mut lp = LpProblem::new();
        for j in 0..n {
            lp.add_variable(format!("x{j}"), int(0), Some(int(1)));
        }
        lp
    }

    fn both_routes(lp: &LpProblem) -> bool {
        let (guided, _) = check_feasible(lp);
        let (exact, _) = check_feasible_with(lp, Strategy::ExactOnly);
        assert_eq!(guided.is_feasible(), exact.is_feasible());
        for f in [&guided, &exact] {
            if let Feasibility::Feasible(x) = f {
                assert!(lp.satisfied_by(x));
            }
        }
        guided.is_feasible()
    }

    #[test]
    fn empty_constraint_set_is_feasible() {
        assert!(both_routes(&boxed(3)));
        assert!(both_routes(&LpProblem::new()));
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let mut lp = boxed(1);
        lp.add_constraint(1, vec![(0, int(1))], Relation::Eq, int(1));
        lp.add_constraint(1, vec![(0, int(1))], Relation::Eq, int(0));
        assert!(!both_routes(&lp));
    }

    #[test]
    fn small_systems_agree_across_routes() {
        // x + y = 1, x - 2y >= 0, y >= 1/3: feasible at (2/3, 1/3) only.
        let mut lp = boxed(2);
        lp.add_constraint(2, vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_constraint(2, vec![(0, int(1)), (1, int(-2))], Relation::Ge, int(0));
        lp.add_constraint(2, vec![(1, int(1))], Relation::Ge, ratio(1, 3));
        assert!(both_routes(&lp));
        lp.add_constraint(2, vec![(1, int(3))], Relation::Ge, ratio(11, 10));
        assert!(!both_routes(&lp));
    }

    #[test]
    fn single_good_leaf_root_matches_weight_ratio() {
        let phi = HolantInstance::new(
            crate::graph::Graph::build(&["v".to_string()], &[], &["v".to_string()]).unwrap(),
            vec![Signature::from_ints(&[1, 3])],
        )
        .unwrap();
        let h = HalfEdgeInstance::new(phi).unwrap();
        let tree = CouplingTree::build(&h, 5, 1000).unwrap();
        assert_eq!(tree.len(), 1);
        let b = h.instance().b_bound();
        let feasible = |lo: i64, hi: i64| {
            let lp = build_lp(&tree, &int(lo), &int(hi), &b, LpForm::Repaired).unwrap();
            both_routes(&lp.problem)
        };
        assert!(feasible(3, 3));
        assert!(feasible(0, 5));
        assert!(!feasible(0, 2));
        assert!(!feasible(4, 5));
    }

    #[test]
    fn inverted_bracket_is_rejected() {
        let h = fixtures::lone_half_edge();
        let tree = CouplingTree::build(&h, 1, 10).unwrap();
        let err = build_lp(&tree, &int(2), &int(1), &int(1), LpForm::Repaired).unwrap_err();
        assert!(matches!(err, LpError::InvalidBracket(_, _)));
    }

    #[test]
    fn infeasible_nodes_are_pinned_to_zero() {
        let h = fixtures::half_edge_set()
            .into_iter()
            .find(|(n, _)| n == "star-3/b1")
            .unwrap()
            .1;
        let tree = CouplingTree::build(&h, 3, 100_000).unwrap();
        let r = Oracle::new(h.instance())
            .unwrap()
            .marginal_ratio(h.half_edge())
            .unwrap();
        let lp = build_lp(&tree, &r, &r, &h.instance().b_bound(), LpForm::Repaired).unwrap();
        let zeros = lp.problem.constraints.iter().filter(|c| c.family == 6).count();
        let infeasible = tree.nodes().filter(|(_, n)| !n.feasible).count();
        assert!(infeasible > 0);
        assert_eq!(zeros, 2 * infeasible);
    }

    #[test]
    fn exact_table_satisfies_lp_and_true_ratio_is_feasible() {
        for (name, h) in fixtures::half_edge_set() {
            let oracle = Oracle::new(h.instance()).unwrap();
            let r = oracle.marginal_ratio(h.half_edge()).unwrap();
            let b = h.instance().b_bound();
            for ell in [1, 3] {
                let tree = CouplingTree::build(&h, ell, 100_000).unwrap();
                let table = exact_tree_probabilities(&tree, &oracle).unwrap();
                let lp = build_lp(&tree, &r, &r, &b, LpForm::Repaired).unwrap();
                let point = table_point(&lp, &table, &tree);
                assert!(lp.problem.violations(&point).is_empty(), "{name} ell={ell}");
                assert!(check_feasible(&lp.problem).0.is_feasible(), "{name} ell={ell}");
            }
        }
    }

    #[test]
    fn literal_form_fails_when_the_half_edge_saturates_its_vertex() {
        let h = fixtures::half_edge_set()
            .into_iter()
            .find(|(n, _)| n == "path-2/b1")
            .unwrap()
            .1;
        let tree = CouplingTree::build(&h, 3, 1000).unwrap();
        let r = Oracle::new(h.instance())
            .unwrap()
            .marginal_ratio(h.half_edge())
            .unwrap();
        let b = h.instance().b_bound();
        let literal = build_lp(&tree, &int(0), &(&r * int(100)), &b, LpForm::Literal).unwrap();
        assert!(!both_routes(&literal.problem));
        let repaired = build_lp(&tree, &r, &r, &b, LpForm::Repaired).unwrap();
        assert!(both_routes(&repaired.problem));
    }

    #[test]
    fn routes_agree_on_bracket_grid() {
        for name in ["path-3/b1-mid", "triangle/b1", "path-2/weighted", "star-3/b1"] {
            let h = fixtures::half_edge_set()
                .into_iter()
                .find(|(n, _)| n == name)
                .unwrap()
                .1;
            let tree = CouplingTree::build(&h, 3, 100_000).unwrap();
            let b = h.instance().b_bound();
            let rmax = h.instance().r_max();
            for lo in 0..4 {
                for hi in lo..4 {
                    let q = |k: i64| &rmax * ratio(k, 3);
                    let lp = build_lp(&tree, &q(lo), &q(hi), &b, LpForm::Repaired).unwrap();
                    both_routes(&lp.problem);
                }
            }
        }
    }

    #[test]
    fn decision_and_text_are_deterministic() {
        let h = fixtures::amenability_counterexample();
        let tree = CouplingTree::build(&h, 2, 100_000).unwrap();
        let b = h.instance().b_bound();
        let lp = build_lp(&tree, &int(0), &int(1), &b, LpForm::Repaired).unwrap();
        let again = build_lp(&tree, &int(0), &int(1), &b, LpForm::Repaired).unwrap();
        assert_eq!(lp.problem.to_text(), again.problem.to_text());
        assert_eq!(check_feasible(&lp.problem), check_feasible(&again.problem));
    }

    #[test]
    fn text_dump_uses_stable_names() {
        let h = fixtures::lone_half_edge();
        let tree = CouplingTree::build(&h, 1, 10).unwrap();
        let lp = build_lp(&tree, &ratio(1, 2), &int(2), &int(1), LpForm::Repaired).unwrap();
        let text = lp.problem.to_text();
        assert!(text.contains("bound 0/1 <= ps:0 <= 1/1"), "{text}");
        assert!(text.contains("f1: 1/1 ps:0 = 1/1"), "{text}");
        assert!(text.contains("f4: 1/1 ps:0 -1/2 pt:0 >= 0/1"), "{text}");
    }
}
