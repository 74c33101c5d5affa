//! The invariant suite, checked on one instance against the brute-force
//! oracle. Used by the `verify` command and by the property tests.

use crate::coupling::{check_table, edge_marginals, exact_tree_probabilities, Check, CouplingError};
use crate::graph::{Edge, EdgeId};
use crate::holant::{HolantError, HolantInstance, PartialAssignment};
use crate::lp::{build_lp, check_feasible, table_point, LpError, LpForm};
use crate::oracle::{Oracle, OracleError, DEFAULT_MAX_ORACLE_EDGES};
use crate::rational::{self, Rational};
use crate::tree::{CouplingTree, Direction, HalfEdgeInstance, TreeError, DEFAULT_MAX_TREE_NODES};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Holant(#[from] HolantError),
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub ell: usize,
    pub max_tree_nodes: usize,
    pub max_oracle_edges: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            ell: 2,
            max_tree_nodes: DEFAULT_MAX_TREE_NODES,
            max_oracle_edges: DEFAULT_MAX_ORACLE_EDGES,
        }
    }
}

/// Instances with at most this many edges have every partial assignment
/// checked; larger ones only those binding at most two edges.
const FULL_ENUMERATION_EDGES: usize = 8;
const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Reported for information only; does not affect the verdict.
    pub informational: bool,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    fn push(&mut self, check: Check, informational: bool) {
        let failure_count = check.failures.len();
        self.checks.push(CheckReport {
            passed: check.passed(),
            name: check.name,
            informational,
            failure_count,
            failures: check.failures.into_iter().take(MAX_LISTED_FAILURES).collect(),
        });
        self.passed = self.checks.iter().all(|c| c.passed || c.informational);
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn r(x: &Rational) -> String {
    rational::to_string(x)
}

/// Partial assignments to check: all of them on small instances, otherwise
/// those binding at most two edges.
pub fn partial_assignments(phi: &HolantInstance) -> Vec<PartialAssignment> {
    let edges = phi.graph().edge_ids();
    let limit = if edges.len() <= FULL_ENUMERATION_EDGES {
        edges.len()
    } else {
        2
    };
    let mut out = vec![PartialAssignment::new()];
    let mut frontier = vec![(PartialAssignment::new(), 0usize)];
    for _ in 0..limit {
        let mut next = Vec::new();
        for (sigma, start) in &frontier {
            for (i, &e) in edges.iter().enumerate().skip(*start) {
                for c in [false, true] {
                    let s = sigma.with(e, c);
                    out.push(s.clone());
                    next.push((s, i + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Pinning a positive-weight edge value keeps the conditions and never
/// raises `r_max` or lowers `B`.
pub fn check_pinning_monotonicity(phi: &HolantInstance, oracle: &Oracle<'_>) -> Result<Check, VerifyError> {
    let mut check = Check::new("pinning monotonicity of r_max and B");
    let (r_max, b) = (phi.r_max(), phi.b_bound());
    for e in phi.graph().edge_ids() {
        for c in [false, true] {
            if oracle.weight(&PartialAssignment::single(e, c))?.is_zero() {
                continue;
            }
            let pinned = phi.pin(e, c)?;
            check.expect(pinned.validate().is_ok(), || {
                format!("edge {e} <- {}: pinned instance invalid", u8::from(c))
            });
            check.expect(pinned.r_max() <= r_max, || {
                format!("edge {e} <- {}: r_max rose", u8::from(c))
            });
            check.expect(pinned.b_bound() >= b, || format!("edge {e} <- {}: B fell", u8::from(c)));
        }
    }
    Ok(check)
}

/// `mu^sigma(E_v^sigma <- 0) >= B` for feasible `sigma` and every vertex whose
/// unpinned edges are all normal.
pub fn check_marginal_lower_bound(
    phi: &HolantInstance,
    oracle: &Oracle<'_>,
    sigmas: &[PartialAssignment],
) -> Result<Check, VerifyError> {
    let mut check = Check::new("all-zero marginal at a vertex is at least B");
    let b = phi.b_bound();
    let g = phi.graph();
    for sigma in sigmas {
        if oracle.weight(sigma)?.is_zero() {
            continue;
        }
        for v in g.vertices() {
            let free = phi.unpinned_at(sigma, v);
            if free.is_empty() || free.iter().any(|&e| matches!(g.edge(e), Some(Edge::Half(_)))) {
                continue;
            }
            let zeros = PartialAssignment::from_pairs(free.iter().map(|&e| (e, false)))?;
            let p = oracle.probability(sigma, &zeros)?;
            check.expect(p >= b, || {
                format!("sigma {sigma}, vertex {}: {} < B = {}", g.vertex_name(v), r(&p), r(&b))
            });
        }
    }
    Ok(check)
}

/// `R(e) <= r_max` for every half-edge.
pub fn check_half_edge_ratio_bound(phi: &HolantInstance, oracle: &Oracle<'_>) -> Result<Check, VerifyError> {
    let mut check = Check::new("half-edge marginal ratio at most r_max");
    let r_max = phi.r_max();
    for (e, _) in phi.graph().half_edges() {
        let ratio = oracle.marginal_ratio(e)?;
        check.expect(ratio <= r_max, || {
            format!("edge {e}: R = {} > r_max = {}", r(&ratio), r(&r_max))
        });
    }
    Ok(check)
}

/// The local feasibility decision agrees with positive conditioned weight.
pub fn check_feasibility_decision(
    phi: &HolantInstance,
    oracle: &Oracle<'_>,
    sigmas: &[PartialAssignment],
) -> Result<Check, VerifyError> {
    let mut check = Check::new("feasibility decision matches brute force");
    for sigma in sigmas {
        let fast = phi.is_feasible_partial(sigma)?;
        let slow = !oracle.weight(sigma)?.is_zero();
        check.expect(fast == slow, || {
            format!("sigma {sigma}: decided {fast}, brute force {slow}")
        });
    }
    Ok(check)
}

/// `R(e) = R_{Phi1}(e_v) * R_{Phi2}(e_u)` for every splittable normal edge,
/// and splitting keeps the conditions without raising `r_max` or lowering `B`.
pub fn check_split_factorization(phi: &HolantInstance, oracle: &Oracle<'_>, cap: usize) -> Result<Check, VerifyError> {
    let mut check = Check::new("split factorization of normal-edge ratios");
    for (e, u, v) in phi.graph().normal_edges() {
        if !phi.signature(u).is_positive_at(1) || !phi.signature(v).is_positive_at(1) {
            continue;
        }
        let s = phi.split(e)?;
        let whole = oracle.marginal_ratio(e)?;
        let first = Oracle::with_cap(&s.pinned_u, cap)?.marginal_ratio(s.ev)?;
        let second = Oracle::with_cap(&s.pinned_v, cap)?.marginal_ratio(s.eu)?;
        check.expect(whole == &first * &second, || {
            format!("edge {e}: {} != {} * {}", r(&whole), r(&first), r(&second))
        });
        for part in [&s.pinned_u, &s.pinned_v] {
            check.expect(part.validate().is_ok(), || format!("edge {e}: split part invalid"));
            check.expect(part.r_max() <= phi.r_max() && part.b_bound() >= phi.b_bound(), || {
                format!("edge {e}: split part breaks monotonicity")
            });
        }
    }
    Ok(check)
}

/// `Z = prod f_v(0) * prod (1 + R_{Phi_i}(e_i))` with exact ratios.
pub fn check_telescoping(phi: &HolantInstance, oracle: &Oracle<'_>, cap: usize) -> Result<Check, VerifyError> {
    let mut check = Check::new("telescoping product reconstructs Z");
    let z = oracle.partition_function()?;
    let mut product = phi.zero_weight();
    let mut chain = phi.clone();
    for e in phi.graph().edge_ids() {
        let ratio = Oracle::with_cap(&chain, cap)?.marginal_ratio(e)?;
        product *= Rational::one() + ratio;
        chain = chain.pin(e, false)?;
    }
    check.expect(product == z, || format!("{} != Z = {}", r(&product), r(&z)));
    Ok(check)
}

/// Structural properties of a built tree: root label, distinct labels, the
/// pair condition on every label, leaf rule, child patterns, degree and
/// depth bounds.
pub fn check_tree_structure(tree: &CouplingTree) -> Result<Check, VerifyError> {
    let mut check = Check::new("coupling tree structure");
    let root = tree.root();
    let phi = tree.instance();
    let g = phi.graph();
    let ell = tree.ell();
    let delta = g.max_degree();
    let normal = g.normal_edges().count();
    let e_bot = root.half_edge();
    let mut seen = HashSet::new();
    let label0 = tree.label(crate::tree::NodeId(0));
    check.expect(
        label0.sigma == root.sigma_root()
            && label0.tau == root.tau_root()
            && label0.s.is_empty()
            && label0.v == root.vertex()
            && label0.l == 0,
        || "root label differs from (sigma_bot, tau_bot, (), v_bot, 0)".into(),
    );
    for (id, node) in tree.nodes() {
        let label = tree.label(id);
        let key = format!("{}|{}|{:?}|{}|{}", label.sigma, label.tau, label.s, label.v, label.l);
        check.expect(seen.insert(key), || format!("node {id}: duplicate label"));
        let mut domain: Vec<EdgeId> = label.s.clone();
        domain.push(e_bot);
        domain.sort();
        let ds: Vec<EdgeId> = label.sigma.domain().collect();
        let dt: Vec<EdgeId> = label.tau.domain().collect();
        check.expect(ds == domain && dt == domain, || {
            format!("node {id}: domains differ from s + e_bot")
        });
        check.expect(
            label.sigma.get(e_bot) == Some(true) && label.tau.get(e_bot) == Some(false),
            || format!("node {id}: e_bot values"),
        );
        let distinct: Vec<_> = g
            .vertices()
            .filter(|&w| phi.ham(&label.sigma, w) != phi.ham(&label.tau, w))
            .collect();
        check.expect(distinct == vec![label.v], || {
            format!("node {id}: weight-distinct vertices {distinct:?}")
        });
        let gap = phi.ham(&label.sigma, label.v).abs_diff(phi.ham(&label.tau, label.v));
        check.expect(gap == 1, || format!("node {id}: discrepancy {gap} at v"));
        let l = label
            .s
            .iter()
            .filter(|&&e| label.sigma.get(e) != label.tau.get(e))
            .count();
        check.expect(l == label.l, || {
            format!("node {id}: L = {} but {l} disagreements", label.l)
        });
        let feasible = phi.is_feasible_partial(&label.sigma)? && phi.is_feasible_partial(&label.tau)?;
        check.expect(feasible == node.feasible, || format!("node {id}: feasibility flag"));
        let free = phi.unpinned_at(&label.sigma, label.v);
        let leaf = label.l >= ell || free.is_empty() || !feasible;
        check.expect(leaf == node.leaf, || format!("node {id}: leaf flag"));
        check.expect(label.sigma.len() <= delta * ell + 1, || {
            format!("node {id}: |Lambda| above Delta * ell + 1")
        });
        check.expect(label.s.len() <= normal, || format!("node {id}: depth above |E_1|"));
        if node.leaf {
            check.expect(node.children.is_empty(), || format!("leaf {id} has children"));
            continue;
        }
        check.expect(node.branch_edges == free, || {
            format!("node {id}: branch edges differ from E_v^sigma")
        });
        check.expect(
            node.children.len() == 3 * free.len() && node.children.len() <= 3 * delta,
            || format!("node {id}: {} children", node.children.len()),
        );
        let patterns = node.direction().patterns();
        let expected_direction = if node.ham_sigma < node.ham_tau {
            Direction::SigmaLower
        } else {
            Direction::SigmaHigher
        };
        check.expect(node.direction() == expected_direction, || {
            format!("node {id}: direction")
        });
        for (k, &e) in node.branch_edges.iter().enumerate() {
            for (j, c) in node.children_of_edge(k).into_iter().enumerate() {
                let step = tree.node(c).step;
                check.expect(step == Some((e, patterns[j].0, patterns[j].1)), || {
                    format!("node {id}: child {c} pattern")
                });
            }
        }
    }
    Ok(check)
}

/// At feasible good leaves, `mu(tau) / mu(sigma)` is the local weight ratio
/// and `mu^sigma = mu^tau` on the unassigned edges.
pub fn check_good_leaves(tree: &CouplingTree, oracle: &Oracle<'_>) -> Result<Check, VerifyError> {
    let mut check = Check::new("good leaves: local weight ratio and equal conditionals");
    let edges = tree.instance().graph().edge_ids();
    for (id, _) in tree.nodes() {
        let class = tree.class(id);
        if !class.good_leaf || !class.feasible {
            continue;
        }
        let label = tree.label(id);
        let ws = oracle.weight(&label.sigma)?;
        let wt = oracle.weight(&label.tau)?;
        let ratio = tree.weight_ratio(id);
        check.expect(&wt / &ws == ratio, || {
            format!("leaf {id}: {} != {}", r(&(&wt / &ws)), r(&ratio))
        });
        let free: Vec<EdgeId> = edges.iter().copied().filter(|e| !label.sigma.contains(*e)).collect();
        if free.len() > 12 {
            continue;
        }
        for mask in 0u32..(1 << free.len()) {
            let mut s = label.sigma.clone();
            let mut t = label.tau.clone();
            for (i, &e) in free.iter().enumerate() {
                let c = mask >> i & 1 == 1;
                s = s.with(e, c);
                t = t.with(e, c);
            }
            let lhs = oracle.weight(&s)? * &wt;
            let rhs = oracle.weight(&t)? * &ws;
            check.expect(lhs == rhs, || format!("leaf {id}: conditionals differ"));
        }
    }
    Ok(check)
}

/// The exact table satisfies the LP at `r- = r+ = R`, and that LP is feasible.
pub fn check_lp_at_ratio(tree: &CouplingTree, oracle: &Oracle<'_>) -> Result<Check, VerifyError> {
    let mut check = Check::new("LP feasible at the exact ratio");
    let ratio = oracle.marginal_ratio(tree.root().half_edge())?;
    let b = tree.instance().b_bound();
    let lp = build_lp(tree, &ratio, &ratio, &b, LpForm::Repaired)?;
    let table = exact_tree_probabilities(tree, oracle)?;
    let point = table_point(&lp, &table, tree);
    let violations = lp.problem.violations(&point);
    check.expect(violations.is_empty(), || {
        format!("exact table violates {}", violations.join("; "))
    });
    check.expect(check_feasible(&lp.problem).0.is_feasible(), || {
        "solver reports infeasible".into()
    });
    Ok(check)
}

/// Edges at `v_bot` that are not amenable under `(sigma_bot, tau_bot)`.
pub fn amenability_report(root: &HalfEdgeInstance, oracle: &Oracle<'_>) -> Result<Check, VerifyError> {
    let phi = root.instance();
    let g = phi.graph();
    let mut check = Check::new(format!(
        "every root edge at {} is amenable",
        g.vertex_name(root.vertex())
    ));
    let (sigma, tau) = (root.sigma_root(), root.tau_root());
    let (hs, ht) = (phi.ham(&sigma, root.vertex()), phi.ham(&tau, root.vertex()));
    let direction = if hs < ht {
        Direction::SigmaLower
    } else {
        Direction::SigmaHigher
    };
    let edges = phi.unpinned_at(&sigma, root.vertex());
    for m in edge_marginals(oracle, &sigma, &tau, direction, &edges)? {
        let rel = if m.sigma_one > m.tau_one { ">" } else { "<" };
        check.expect(m.amenable, || {
            format!(
                "edge {} {}: mu^sigma(1) = {} {rel} mu^tau(1) = {} with Ham(sigma) = {hs}, Ham(tau) = {ht}",
                m.edge,
                g.edge_label(m.edge),
                r(&m.sigma_one),
                r(&m.tau_one)
            )
        });
    }
    Ok(check)
}

/// Half-edge instances for the tree checks: each half-edge with the others
/// summed out, or both halves of the first splittable normal edge.
pub fn tree_targets(phi: &HolantInstance) -> Result<Vec<HalfEdgeInstance>, VerifyError> {
    let halves: Vec<EdgeId> = phi.graph().half_edges().map(|(e, _)| e).collect();
    let mut out = Vec::new();
    if halves.is_empty() {
        if let Some((e, _, _)) = phi
            .graph()
            .normal_edges()
            .find(|&(_, u, v)| phi.signature(u).is_positive_at(1) && phi.signature(v).is_positive_at(1))
        {
            let s = phi.split(e)?;
            out.push(HalfEdgeInstance::new(s.pinned_u)?);
            out.push(HalfEdgeInstance::new(s.pinned_v)?);
        }
    } else {
        for e in halves {
            out.push(HalfEdgeInstance::new(phi.isolate_half_edge(e)?)?);
        }
    }
    Ok(out)
}

/// Runs the whole suite.
pub fn verify(phi: &HolantInstance, options: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    let mut report = VerifyReport {
        passed: true,
        checks: Vec::new(),
    };
    let mut condition = Check::new("signature conditions");
    if let Err(v) = phi.validate() {
        condition.expect(false, || v.to_string());
        report.push(condition, false);
        return Ok(report);
    }
    report.push(condition, false);
    let cap = options.max_oracle_edges;
    let oracle = Oracle::with_cap(phi, cap)?;
    let sigmas = partial_assignments(phi);
    report.push(check_pinning_monotonicity(phi, &oracle)?, false);
    report.push(check_marginal_lower_bound(phi, &oracle, &sigmas)?, false);
    report.push(check_half_edge_ratio_bound(phi, &oracle)?, false);
    report.push(check_feasibility_decision(phi, &oracle, &sigmas)?, false);
    report.push(check_split_factorization(phi, &oracle, cap)?, false);
    report.push(check_telescoping(phi, &oracle, cap)?, false);
    for root in tree_targets(phi)? {
        let local = Oracle::with_cap(root.instance(), cap)?;
        if root.instance().r_max().is_zero() {
            continue;
        }
        let tree = CouplingTree::build(&root, options.ell, options.max_tree_nodes)?;
        let at = |c: Check| {
            let mut c = c;
            c.name = format!(
                "{} [half-edge at {}]",
                c.name,
                root.instance().graph().vertex_name(root.vertex())
            );
            c
        };
        report.push(at(check_tree_structure(&tree)?), false);
        report.push(at(check_good_leaves(&tree, &local)?), false);
        let table = exact_tree_probabilities(&tree, &local)?;
        for c in check_table(&tree, &table, &local)? {
            report.push(at(c), false);
        }
        report.push(at(check_lp_at_ratio(&tree, &local)?), false);
        report.push(amenability_report(&root, &local)?, true);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_pass() {
        for (name, phi) in fixtures::counting_set().into_iter().take(8) {
            let report = verify(&phi, &VerifyOptions::default()).unwrap();
            assert!(
                report.passed,
                "{name}: {:?}",
                report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
            );
        }
        for (name, h) in fixtures::half_edge_set().into_iter().take(6) {
            let report = verify(
                h.instance(),
                &VerifyOptions {
                    ell: 1,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(
                report.passed,
                "{name}: {:?}",
                report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn counterexample_reports_the_violation() {
        let h = fixtures::amenability_counterexample();
        let report = verify(
            h.instance(),
            &VerifyOptions {
                ell: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed);
        let amen = report.checks.iter().find(|c| c.informational).unwrap();
        assert!(!amen.passed);
        assert!(
            amen.failures
                .iter()
                .any(|f| f.contains("10301/24622 > mu^tau(1) = 14321/38742")),
            "{:?}",
            amen.failures
        );
    }

    #[test]
    fn invalid_instance_fails_first_check() {
        let g = crate::graph::Graph::build(&["v"], &[], &["v"]).unwrap();
        let phi = HolantInstance::new(g, vec![crate::Signature::from_ints(&[0, 1])]).unwrap();
        let report = verify(&phi, &VerifyOptions::default()).unwrap();
        assert!(!report.passed);
        assert_eq!(report.checks.len(), 1);
    }

    #[test]
    fn enumeration_sizes() {
        let phi = fixtures::single_edge();
        assert_eq!(partial_assignments(&phi).len(), 3);
        let phi = fixtures::path_matchings(2);
        assert_eq!(partial_assignments(&phi).len(), 9);
    }
}
