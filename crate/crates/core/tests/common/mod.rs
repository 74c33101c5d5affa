//! Shared random-instance generator and properties for the invariant suites.

#![allow(dead_code)]

use holant::coupling::Check;
use holant::oracle::Oracle;
use holant::rational::{int, ratio, Rational};
use holant::tree::{CouplingTree, TreeError};
use holant::verify::{
    check_good_leaves, check_half_edge_ratio_bound, check_marginal_lower_bound, check_pinning_monotonicity,
    check_tree_structure, partial_assignments, tree_targets,
};
use holant::{Graph, HolantInstance, Signature};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 200;
const SEED: [u8; 32] = *b"holant invariant suite seed 0001";
const MAX_EDGES: usize = 8;

/// Log-concave with `f(0) > 0` and contiguous support: nonincreasing
/// successive ratios, then zeros.
pub fn signature(arity: usize, f0: i64, ratios: &[(i64, i64)], support: usize) -> Signature {
    let mut rs: Vec<Rational> = ratios.iter().map(|&(p, q)| ratio(p, q)).collect();
    rs.sort_by(|a, b| b.cmp(a));
    let mut vals = vec![int(f0)];
    for k in 1..=arity {
        let next = if k < support { &vals[k - 1] * &rs[k - 1] } else { int(0) };
        vals.push(next);
    }
    Signature::new(vals)
}

pub fn instance() -> impl Strategy<Value = HolantInstance> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            (
                Just(n),
                proptest::sample::subsequence(pairs.clone(), 0..=pairs.len().min(MAX_EDGES)),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(
                    (1i64..=3, proptest::collection::vec((1i64..=4, 1i64..=4), 7), 1usize..=7),
                    n,
                ),
            )
        })
        .prop_map(|(n, mut edges, halves, sigs)| {
            let mut halves: Vec<usize> = (0..n).filter(|&v| halves[v]).collect();
            edges.truncate(MAX_EDGES);
            halves.truncate(MAX_EDGES - edges.len());
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let es: Vec<(&str, &str)> = edges
                .iter()
                .map(|&(a, b)| (names[a].as_str(), names[b].as_str()))
                .collect();
            let hs: Vec<&str> = halves.iter().map(|&v| names[v].as_str()).collect();
            let ns: Vec<&str> = names.iter().map(String::as_str).collect();
            let g = Graph::build(&ns, &es, &hs).unwrap();
            let signatures = g
                .vertices()
                .map(|v| {
                    let (f0, rs, support) = &sigs[v.0];
                    signature(g.degree(v), *f0, rs, *support)
                })
                .collect();
            HolantInstance::new(g, signatures).unwrap()
        })
}

pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

/// Runs `test` on `CASES` seeded instances.
pub fn try_run(test: impl Fn(HolantInstance) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner()
        .run(&instance(), |phi| {
            prop_assert!(phi.validate().is_ok(), "generator produced an invalid instance");
            test(phi)
        })
        .map_err(|e| e.to_string())
}

pub fn run(test: impl Fn(HolantInstance) -> Result<(), TestCaseError>) {
    if let Err(e) = try_run(test) {
        panic!("{e}");
    }
}

pub fn passed(c: Check) -> Result<(), TestCaseError> {
    prop_assert!(c.passed(), "{}: {:?}", c.name, c.failures);
    Ok(())
}

pub fn pinning_is_monotone(phi: HolantInstance) -> Result<(), TestCaseError> {
    passed(check_pinning_monotonicity(&phi, &Oracle::new(&phi).unwrap()).unwrap())
}

pub fn zero_marginal_is_at_least_b(phi: HolantInstance) -> Result<(), TestCaseError> {
    let sigmas = partial_assignments(&phi);
    passed(check_marginal_lower_bound(&phi, &Oracle::new(&phi).unwrap(), &sigmas).unwrap())
}

pub fn half_edge_ratio_is_bounded(phi: HolantInstance) -> Result<(), TestCaseError> {
    passed(check_half_edge_ratio_bound(&phi, &Oracle::new(&phi).unwrap()).unwrap())
}

/// Distinct labels, the pair condition, leaf and child rules, degree and
/// depth bounds; and at feasible good leaves the weight ratio and equal
/// conditionals.
pub fn trees_are_well_formed(phi: HolantInstance) -> Result<(), TestCaseError> {
    for root in tree_targets(&phi).unwrap() {
        for ell in 1..=2 {
            let tree = match CouplingTree::build(&root, ell, 20_000) {
                Ok(t) => t,
                Err(TreeError::Budget { .. }) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            passed(check_tree_structure(&tree).unwrap())?;
            passed(check_good_leaves(&tree, &Oracle::new(root.instance()).unwrap()).unwrap())?;
        }
    }
    Ok(())
}
