//! The coupling process, realized exactly over the tree and as a seeded
//! simulator.
//!
//! At a state `(sigma, tau, v)` the process takes the first amenable edge at
//! `v` and draws `(sigma_e, tau_e)` from the monotone coupling of the two
//! Bernoulli marginals. The exact realization pushes probability mass down
//! the tree along the chosen edges; the simulator follows one path.

use crate::graph::{Edge, EdgeId, VertexId};
use crate::holant::PartialAssignment;
use crate::oracle::{Oracle, OracleError};
use crate::rational::{self, Rational};
use crate::tree::{CouplingTree, Direction, HalfEdgeInstance, NodeId};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CouplingError {
    #[error("no amenable edge at vertex {vertex} for pair sigma={sigma} tau={tau}")]
    NoAmenableEdge { vertex: String, sigma: String, tau: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `(mu^sigma_e(1), mu^tau_e(1))` and whether `e` is amenable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMarginals {
    pub edge: EdgeId,
    pub sigma_one: Rational,
    pub tau_one: Rational,
    pub amenable: bool,
}

pub fn is_amenable(direction: Direction, sigma_one: &Rational, tau_one: &Rational) -> bool {
    match direction {
        Direction::SigmaLower => sigma_one >= tau_one,
        Direction::SigmaHigher => sigma_one <= tau_one,
    }
}

/// Marginals of every candidate edge, in order.
pub fn edge_marginals(
    oracle: &Oracle<'_>,
    sigma: &PartialAssignment,
    tau: &PartialAssignment,
    direction: Direction,
    candidates: &[EdgeId],
) -> Result<Vec<EdgeMarginals>, OracleError> {
    candidates
        .iter()
        .map(|&e| {
            let a = oracle.edge_marginal(sigma, e)?;
            let b = oracle.edge_marginal(tau, e)?;
            Ok(EdgeMarginals {
                edge: e,
                amenable: is_amenable(direction, &a, &b),
                sigma_one: a,
                tau_one: b,
            })
        })
        .collect()
}

/// The first amenable candidate, as `(index, mu^sigma_e(1), mu^tau_e(1))`.
fn first_amenable(
    oracle: &Oracle<'_>,
    sigma: &PartialAssignment,
    tau: &PartialAssignment,
    direction: Direction,
    candidates: &[EdgeId],
) -> Result<Option<(usize, Rational, Rational)>, OracleError> {
    for (i, &e) in candidates.iter().enumerate() {
        let a = oracle.edge_marginal(sigma, e)?;
        let b = oracle.edge_marginal(tau, e)?;
        if is_amenable(direction, &a, &b) {
            return Ok(Some((i, a, b)));
        }
    }
    Ok(None)
}

/// Masses of the three child patterns of [`Direction::patterns`] under the
/// monotone coupling.
pub fn transition_masses(direction: Direction, a: &Rational, b: &Rational) -> [Rational; 3] {
    let one = Rational::one();
    match direction {
        Direction::SigmaLower => [&one - a, a - b, b.clone()],
        Direction::SigmaHigher => [&one - b, b - a, a.clone()],
    }
}

/// Exact probabilities of the coupling process, normalized per node.
#[derive(Debug, Clone)]
pub struct TreeProbabilityTable {
    /// Probability that the node is a state of the process.
    pub reach: Vec<Rational>,
    /// Index into the node's branch edges of the edge the process picks, for
    /// internal nodes reached with positive probability.
    pub chosen: Vec<Option<usize>>,
    pub sigma: Vec<Rational>,
    pub tau: Vec<Rational>,
    /// Per internal node, one value per branch edge.
    pub edge_sigma: Vec<Vec<Rational>>,
    pub edge_tau: Vec<Vec<Rational>>,
}

impl TreeProbabilityTable {
    pub fn node_sigma(&self, n: NodeId) -> &Rational {
        &self.sigma[n.0]
    }

    pub fn node_tau(&self, n: NodeId) -> &Rational {
        &self.tau[n.0]
    }
}

/// Computes the table by forward recursion from the root.
pub fn exact_tree_probabilities(
    tree: &CouplingTree,
    oracle: &Oracle<'_>,
) -> Result<TreeProbabilityTable, CouplingError> {
    let root = tree.root();
    let n = tree.len();
    let mut reach = vec![Rational::zero(); n];
    let mut chosen = vec![None; n];
    let mut sigma = vec![Rational::zero(); n];
    let mut tau = vec![Rational::zero(); n];
    let mut edge_sigma = vec![Vec::new(); n];
    let mut edge_tau = vec![Vec::new(); n];
    reach[0] = Rational::one();
    let w_sigma_root = oracle.weight(&root.sigma_root())?;
    let w_tau_root = oracle.weight(&root.tau_root())?;
    // Node ids are BFS order, so parents are settled before their children.
    for i in 0..n {
        let id = NodeId(i);
        let node = tree.node(id);
        let internal = !node.leaf;
        if internal {
            edge_sigma[i] = vec![Rational::zero(); node.branch_edges.len()];
            edge_tau[i] = vec![Rational::zero(); node.branch_edges.len()];
        }
        if !node.feasible || reach[i].is_zero() {
            continue;
        }
        let label = tree.label(id);
        let mu_sigma = oracle.weight(&label.sigma)? / &w_sigma_root;
        let mu_tau = oracle.weight(&label.tau)? / &w_tau_root;
        sigma[i] = &reach[i] / &mu_sigma;
        tau[i] = &reach[i] / &mu_tau;
        if !internal {
            continue;
        }
        let direction = node.direction();
        let pick = first_amenable(oracle, &label.sigma, &label.tau, direction, &node.branch_edges)?;
        let Some((k, a, b)) = pick else {
            let name = tree.instance().graph().vertex_name(node.vertex).to_string();
            return Err(CouplingError::NoAmenableEdge {
                vertex: name,
                sigma: label.sigma.to_string(),
                tau: label.tau.to_string(),
            });
        };
        chosen[i] = Some(k);
        edge_sigma[i][k] = sigma[i].clone();
        edge_tau[i][k] = tau[i].clone();
        let masses = transition_masses(direction, &a, &b);
        for (child, mass) in node.children_of_edge(k).into_iter().zip(masses) {
            reach[child.0] = &reach[i] * mass;
        }
    }
    Ok(TreeProbabilityTable {
        reach,
        chosen,
        sigma,
        tau,
        edge_sigma,
        edge_tau,
    })
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub failures: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Checks the table against every identity and inequality it must satisfy:
/// range and root values, flow sums, child decompositions, the ratio
/// identity, reach bounds, and the zero-completion lower bound.
pub fn check_table(
    tree: &CouplingTree,
    table: &TreeProbabilityTable,
    oracle: &Oracle<'_>,
) -> Result<Vec<Check>, CouplingError> {
    let zero = Rational::zero();
    let one = Rational::one();
    let phi = tree.instance();
    let root = tree.root();
    let ratio = oracle.marginal_ratio(root.half_edge())?;
    let w_sigma_root = oracle.weight(&root.sigma_root())?;
    let w_tau_root = oracle.weight(&root.tau_root())?;
    let b = phi.b_bound();

    let mut range = Check::new("values in [0,1], root values 1");
    let mut flow = Check::new("node value equals sum over branch edges");
    let mut children = Check::new("edge value equals child decomposition");
    let mut ratio_id = Check::new("ratio identity on feasible nodes");
    let mut reach_bound = Check::new("reach bounded by conditional marginals");
    let mut zero_set = Check::new("zero-completion set carries at least B");

    range.expect(table.sigma[0] == one && table.tau[0] == one, || {
        "root values differ from 1".into()
    });
    for (id, node) in tree.nodes() {
        let i = id.0;
        let values = [&table.sigma[i], &table.tau[i]]
            .into_iter()
            .chain(table.edge_sigma[i].iter())
            .chain(table.edge_tau[i].iter());
        for x in values {
            range.expect(*x >= zero && *x <= one, || {
                format!("node {id}: value {}", rational::to_string(x))
            });
        }
        if !node.feasible {
            continue;
        }
        let label = tree.label(id);
        let w_sigma = oracle.weight(&label.sigma)?;
        let w_tau = oracle.weight(&label.tau)?;
        // p^sigma = p^tau * R * mu(tau) / mu(sigma)
        let rhs = &table.tau[i] * &ratio * &w_tau / &w_sigma;
        ratio_id.expect(table.sigma[i] == rhs, || format!("node {id}"));
        reach_bound.expect(
            table.reach[i] <= &w_sigma / &w_sigma_root && table.reach[i] <= &w_tau / &w_tau_root,
            || format!("node {id}"),
        );
        if node.leaf {
            continue;
        }
        let sum_s: Rational = table.edge_sigma[i].iter().sum();
        let sum_t: Rational = table.edge_tau[i].iter().sum();
        flow.expect(sum_s == table.sigma[i] && sum_t == table.tau[i], || {
            format!("node {id}")
        });
        let dir = node.direction();
        for k in 0..node.branch_edges.len() {
            let [c0, c1, c2] = node.children_of_edge(k);
            let (s, t) = (&table.sigma, &table.tau);
            let (es, et) = (&table.edge_sigma[i][k], &table.edge_tau[i][k]);
            // A side's equality through its `e <- 1` children only holds when
            // that extension is feasible; otherwise its marginal is 0.
            let (s_one, t_one) = node.one_feasible[k];
            let ok = match dir {
                // children (0,0), (1,0), (1,1)
                Direction::SigmaLower => {
                    *es == s[c0.0]
                        && (!s_one || *es == &s[c1.0] + &s[c2.0])
                        && *et == &t[c0.0] + &t[c1.0]
                        && (!t_one || *et == t[c2.0])
                }
                // children (0,0), (0,1), (1,1)
                Direction::SigmaHigher => {
                    *es == &s[c0.0] + &s[c1.0]
                        && (!s_one || *es == s[c2.0])
                        && *et == t[c0.0]
                        && (!t_one || *et == &t[c1.0] + &t[c2.0])
                }
            };
            children.expect(ok, || format!("node {id}, branch edge {}", node.branch_edges[k]));
        }
        let d = tree.zero_completion_set(id).expect("internal node");
        zero_set.expect(!d.is_empty(), || format!("node {id}: empty zero-completion set"));
        let ds: Rational = d.iter().map(|n| &table.sigma[n.0]).sum();
        let dt: Rational = d.iter().map(|n| &table.tau[n.0]).sum();
        zero_set.expect(ds >= &b * &table.sigma[i] && dt >= &b * &table.tau[i], || {
            format!("node {id}")
        });
    }
    Ok(vec![range, flow, children, ratio_id, reach_bound, zero_set])
}

/// One coupled step of the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoupleStep {
    pub vertex: String,
    pub edge: usize,
    #[serde(with = "rational::serde_str")]
    pub sigma_one: Rational,
    #[serde(with = "rational::serde_str")]
    pub tau_one: Rational,
    pub draw: u64,
    pub sigma: u8,
    pub tau: u8,
}

/// One draw of the final sample from `mu^sigma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailStep {
    pub edge: usize,
    #[serde(with = "rational::serde_str")]
    pub one: Rational,
    pub draw: u64,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoupleTranscript {
    pub seed: u64,
    pub steps: Vec<CoupleStep>,
    pub tail: Vec<TailStep>,
    pub sigma: BTreeMap<String, u8>,
    pub tau: BTreeMap<String, u8>,
}

#[derive(Debug, Clone)]
pub struct CoupleOutcome {
    pub sigma: PartialAssignment,
    pub tau: PartialAssignment,
    pub transcript: CoupleTranscript,
}

/// `draw / 2^64 < p`, exactly.
fn below(draw: u64, p: &Rational) -> bool {
    BigInt::from(draw) * p.denom() < p.numer() * (BigInt::one() << 64)
}

/// One run of the untruncated coupling with a ChaCha8 stream seeded by
/// `seed`. Returns full assignments distributed as a coupling of
/// `mu^{sigma_bot}` and `mu^{tau_bot}`.
pub fn simulate_couple(
    root: &HalfEdgeInstance,
    oracle: &Oracle<'_>,
    seed: u64,
) -> Result<CoupleOutcome, CouplingError> {
    let phi = root.instance();
    let graph = phi.graph();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma = root.sigma_root();
    let mut tau = root.tau_root();
    let mut v: VertexId = root.vertex();
    let mut steps = Vec::new();
    loop {
        let candidates = phi.unpinned_at(&sigma, v);
        if candidates.is_empty() {
            break;
        }
        let direction = if phi.ham(&sigma, v) < phi.ham(&tau, v) {
            Direction::SigmaLower
        } else {
            Direction::SigmaHigher
        };
        let Some((k, a, b)) = first_amenable(oracle, &sigma, &tau, direction, &candidates)? else {
            return Err(CouplingError::NoAmenableEdge {
                vertex: graph.vertex_name(v).to_string(),
                sigma: sigma.to_string(),
                tau: tau.to_string(),
            });
        };
        let e = candidates[k];
        let draw: u64 = rng.random();
        let (cs, ct) = (below(draw, &a), below(draw, &b));
        sigma = sigma.with(e, cs);
        tau = tau.with(e, ct);
        steps.push(CoupleStep {
            vertex: graph.vertex_name(v).to_string(),
            edge: e.0,
            sigma_one: a,
            tau_one: b,
            draw,
            sigma: u8::from(cs),
            tau: u8::from(ct),
        });
        if cs != ct {
            v = match graph.edge(e) {
                Some(Edge::Normal(x, y)) => {
                    if x == v {
                        y
                    } else {
                        x
                    }
                }
                _ => unreachable!("half-edge {e} chosen below the root"),
            };
        }
    }
    let mut tail = Vec::new();
    let mut rest = sigma.clone();
    for e in graph.edge_ids() {
        if rest.contains(e) {
            continue;
        }
        let p = oracle.edge_marginal(&rest, e)?;
        let draw: u64 = rng.random();
        let value = below(draw, &p);
        rest = rest.with(e, value);
        tau = tau.with(e, value);
        tail.push(TailStep {
            edge: e.0,
            one: p,
            draw,
            value: u8::from(value),
        });
    }
    let dump = |p: &PartialAssignment| p.iter().map(|(e, c)| (e.0.to_string(), u8::from(c))).collect();
    let transcript = CoupleTranscript {
        seed,
        steps,
        tail,
        sigma: dump(&rest),
        tau: dump(&tau),
    };
    Ok(CoupleOutcome {
        sigma: rest,
        tau,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    #[test]
    fn root_values_are_one() {
        for (name, h) in fixtures::half_edge_set() {
            let tree = CouplingTree::build(&h, 3, 100_000).unwrap();
            let oracle = Oracle::new(h.instance()).unwrap();
            let table = exact_tree_probabilities(&tree, &oracle).unwrap();
            assert_eq!(table.sigma[0], Rational::one(), "{name}");
            assert_eq!(table.tau[0], Rational::one(), "{name}");
        }
    }

    #[test]
    fn star_table_satisfies_all_checks() {
        let h = fixtures::with_half_edge(&fixtures::star_graph(3), "v0", |d| crate::Signature::at_most(d, 1));
        let tree = CouplingTree::build(&h, 4, 100_000).unwrap();
        let oracle = Oracle::new(h.instance()).unwrap();
        let table = exact_tree_probabilities(&tree, &oracle).unwrap();
        for c in check_table(&tree, &table, &oracle).unwrap() {
            assert!(c.passed(), "{}: {:?}", c.name, c.failures);
        }
    }

    #[test]
    fn counterexample_edge_is_not_amenable() {
        let h = fixtures::amenability_counterexample();
        let oracle = Oracle::new(h.instance()).unwrap();
        let edges = h.instance().unpinned_at(&h.sigma_root(), h.vertex());
        let m = edge_marginals(&oracle, &h.sigma_root(), &h.tau_root(), Direction::SigmaHigher, &edges).unwrap();
        let e2 = m.iter().find(|x| x.edge == EdgeId(1)).unwrap();
        assert_eq!(e2.sigma_one, ratio(10301, 24622));
        assert_eq!(e2.tau_one, ratio(14321, 38742));
        assert!(!e2.amenable);
        assert!(m.iter().any(|x| x.amenable));
    }

    #[test]
    fn simulator_is_deterministic() {
        let h = fixtures::amenability_counterexample();
        let oracle = Oracle::new(h.instance()).unwrap();
        let a = simulate_couple(&h, &oracle, 7).unwrap();
        let b = simulate_couple(&h, &oracle, 7).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.sigma.len(), h.instance().graph().edge_count());
        assert_eq!(a.tau.len(), h.instance().graph().edge_count());
    }

    #[test]
    fn below_is_exact() {
        assert!(below(0, &ratio(1, 2)));
        assert!(below(u64::MAX / 2, &ratio(1, 2)));
        assert!(!below(1u64 << 63, &ratio(1, 2)));
        assert!(!below(0, &Rational::zero()));
        assert!(below(u64::MAX, &Rational::one()));
    }
}
