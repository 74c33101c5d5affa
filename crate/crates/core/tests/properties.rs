//! Property tests over random small instances, checked exactly against the
//! brute-force oracle. 200 cases per property from a fixed seed.

mod common;

use common::{instance, run, runner, CASES};
use holant::rational::int;
use proptest::strategy::{Strategy, ValueTree};

#[test]
fn pinning_preserves_conditions_and_is_monotone() {
    run(common::pinning_is_monotone);
}

#[test]
fn all_zero_marginal_at_a_vertex_is_at_least_b() {
    run(common::zero_marginal_is_at_least_b);
}

#[test]
fn half_edge_ratio_is_at_most_r_max() {
    run(common::half_edge_ratio_is_bounded);
}

#[test]
fn built_trees_have_the_stated_structure() {
    run(common::trees_are_well_formed);
}

#[test]
fn generator_covers_half_edges_and_zeros() {
    let mut runner = runner();
    let strategy = instance();
    let (mut halves, mut cut) = (0, 0);
    for _ in 0..CASES {
        let phi = strategy.new_tree(&mut runner).unwrap().current();
        halves += usize::from(phi.graph().half_edges().next().is_some());
        cut += usize::from(phi.signatures().iter().any(|s| s.values().iter().any(|x| *x == int(0))));
    }
    assert!(halves > 20 && cut > 20, "half-edges in {halves}, zero entries in {cut}");
}
