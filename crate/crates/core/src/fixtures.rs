//! Small named instances shared by tests, the command line and the guide.

use crate::graph::Graph;
use crate::holant::{HolantInstance, Signature};
use crate::rational::int;
use crate::tree::HalfEdgeInstance;

/// Builds an instance whose signature at each vertex depends only on its
/// degree.
pub fn uniform(
    vertices: &[&str],
    edges: &[(&str, &str)],
    halves: &[&str],
    rule: impl Fn(usize) -> Signature,
) -> HolantInstance {
    let graph = Graph::build(vertices, edges, halves).expect("fixture graph");
    let sigs = graph.vertices().map(|v| rule(graph.degree(v))).collect();
    HolantInstance::new(graph, sigs).expect("fixture instance")
}

/// Every vertex carries "at most `b` incident edges".
pub fn b_matchings(graph: Graph, b: usize) -> HolantInstance {
    let sigs = graph
        .vertices()
        .map(|v| Signature::at_most(graph.degree(v), b))
        .collect();
    HolantInstance::new(graph, sigs).expect("fixture instance")
}

/// Every vertex carries "at least `b` incident edges". Not a valid instance
/// (`f(0) = 0`); use [`b_edge_covers_complement`] for the counting engine.
pub fn b_edge_covers(graph: Graph, b: usize) -> HolantInstance {
    let sigs = graph
        .vertices()
        .map(|v| Signature::at_least(graph.degree(v), b))
        .collect();
    HolantInstance::new(graph, sigs).expect("fixture instance")
}

/// Edge covers counted through their complements: at most `deg - b` edges
/// at each vertex. Panics if some degree is below `b`.
pub fn b_edge_covers_complement(graph: Graph, b: usize) -> HolantInstance {
    let sigs = graph
        .vertices()
        .map(|v| {
            let d = graph.degree(v);
            assert!(d >= b, "degree below b; no edge cover exists");
            Signature::at_most(d, d - b)
        })
        .collect();
    HolantInstance::new(graph, sigs).expect("fixture instance")
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Path with `n` edges on vertices `v0..vn`.
pub fn path_graph(n: usize) -> Graph {
    let vs = names(n + 1);
    let es: Vec<(String, String)> = (0..n).map(|i| (vs[i].clone(), vs[i + 1].clone())).collect();
    Graph::build(&vs, &es, &[]).expect("path")
}

/// Cycle with `n >= 3` edges.
pub fn cycle_graph(n: usize) -> Graph {
    let vs = names(n);
    let es: Vec<(String, String)> = (0..n).map(|i| (vs[i].clone(), vs[(i + 1) % n].clone())).collect();
    Graph::build(&vs, &es, &[]).expect("cycle")
}

/// Complete graph on `n` vertices, edges in lexicographic order.
pub fn complete_graph(n: usize) -> Graph {
    let vs = names(n);
    let mut es = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            es.push((vs[i].clone(), vs[j].clone()));
        }
    }
    Graph::build(&vs, &es, &[]).expect("complete graph")
}

/// Star with centre `v0` and `k` leaves.
pub fn star_graph(k: usize) -> Graph {
    let vs = names(k + 1);
    let es: Vec<(String, String)> = (1..=k).map(|i| (vs[0].clone(), vs[i].clone())).collect();
    Graph::build(&vs, &es, &[]).expect("star")
}

pub fn single_edge() -> HolantInstance {
    uniform(&["u", "v"], &[("u", "v")], &[], |_| Signature::from_ints(&[1, 1]))
}

pub fn path_matchings(n: usize) -> HolantInstance {
    b_matchings(path_graph(n), 1)
}

pub fn cycle_matchings(n: usize) -> HolantInstance {
    b_matchings(cycle_graph(n), 1)
}

pub fn triangle_edge_covers() -> HolantInstance {
    b_edge_covers(cycle_graph(3), 1)
}

/// One vertex with a half-edge and signature `[1, 1]`.
pub fn lone_half_edge() -> HalfEdgeInstance {
    let phi = uniform(&["v"], &[], &["v"], |_| Signature::from_ints(&[1, 1]));
    HalfEdgeInstance::new(phi).expect("lone half-edge")
}

/// A graph where the edge `e2 = {vb, v2}` (id 1) is not amenable at the root
/// pair: `mu^sigma_{e2}(1) = 10301/24622` exceeds `mu^tau_{e2}(1) =
/// 14321/38742` even though `Ham(sigma) > Ham(tau)` at `vb`.
///
/// The signature at `vb` counts the half-edge (arity 4, "at most 2"); reading
/// it as an arity-3 signature on the normal edges alone gives the second
/// fraction on both sides.
pub fn amenability_counterexample() -> HalfEdgeInstance {
    let graph = Graph::build(
        &["vb", "v1", "v2", "v3", "v4", "v5"],
        &[
            ("vb", "v1"),
            ("vb", "v2"),
            ("vb", "v3"),
            ("v1", "v4"),
            ("v3", "v5"),
            ("v4", "v5"),
        ],
        &["vb"],
    )
    .expect("fixture graph");
    let heavy = Signature::from_ints(&[1, 10, 0]);
    let sigs = vec![
        Signature::at_most(4, 2),
        heavy.clone(),
        Signature::from_ints(&[1, 1]),
        heavy.clone(),
        heavy.clone(),
        heavy,
    ];
    HalfEdgeInstance::new(HolantInstance::new(graph, sigs).expect("fixture")).expect("fixture")
}

/// Attaches a half-edge at `at` and extends that vertex's signature by one
/// entry using `rule(new_degree)`; every other vertex uses `rule(degree)`.
pub fn with_half_edge(graph: &Graph, at: &str, rule: impl Fn(usize) -> Signature) -> HalfEdgeInstance {
    let vs: Vec<&str> = graph.vertex_names().iter().map(String::as_str).collect();
    let es: Vec<(&str, &str)> = graph
        .normal_edges()
        .map(|(_, a, b)| (graph.vertex_name(a), graph.vertex_name(b)))
        .collect();
    HalfEdgeInstance::new(uniform(&vs, &es, &[at], rule)).expect("half-edge fixture")
}

/// Instances without half-edges: `|E| <= 6`, max degree `<= 3`, `b <= 2`.
pub fn counting_set() -> Vec<(String, HolantInstance)> {
    let mut out = Vec::new();
    let graphs: Vec<(&str, Graph)> = vec![
        ("single-edge", path_graph(1)),
        ("path-3", path_graph(3)),
        ("path-5", path_graph(5)),
        ("triangle", cycle_graph(3)),
        ("cycle-4", cycle_graph(4)),
        ("cycle-6", cycle_graph(6)),
        ("star-3", star_graph(3)),
        ("k4", complete_graph(4)),
        (
            "paw",
            Graph::build(
                &["a", "b", "c", "d"],
                &[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")],
                &[],
            )
            .unwrap(),
        ),
        (
            "bull",
            Graph::build(
                &["a", "b", "c", "d", "e"],
                &[("a", "b"), ("b", "c"), ("c", "a"), ("b", "d"), ("c", "e")],
                &[],
            )
            .unwrap(),
        ),
    ];
    for (name, g) in graphs {
        for b in 1..=2 {
            out.push((format!("{name}/matchings-b{b}"), b_matchings(g.clone(), b)));
        }
        out.push((format!("{name}/edge-covers-b1"), b_edge_covers_complement(g.clone(), 1)));
    }
    out.push((
        "path-3/weighted".into(),
        uniform(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")], &[], |d| {
            if d == 1 {
                Signature::from_ints(&[1, 2])
            } else {
                Signature::new(vec![int(1), int(3), int(2)])
            }
        }),
    ));
    out
}

/// Instances with a unique half-edge and at most 8 edges in total.
pub fn half_edge_set() -> Vec<(String, HalfEdgeInstance)> {
    let at_most = |b: usize| move |d: usize| Signature::at_most(d, b);
    let mut out = vec![
        ("lone".to_string(), lone_half_edge()),
        ("amenability-counterexample".to_string(), amenability_counterexample()),
        ("path-2/b1".into(), with_half_edge(&path_graph(2), "v0", at_most(1))),
        ("path-3/b1-mid".into(), with_half_edge(&path_graph(3), "v1", at_most(1))),
        ("star-3/b1".into(), with_half_edge(&star_graph(3), "v0", at_most(1))),
        ("star-3/b2".into(), with_half_edge(&star_graph(3), "v0", at_most(2))),
        ("triangle/b1".into(), with_half_edge(&cycle_graph(3), "v0", at_most(1))),
        ("cycle-4/b1".into(), with_half_edge(&cycle_graph(4), "v0", at_most(1))),
        ("cycle-4/b2".into(), with_half_edge(&cycle_graph(4), "v0", at_most(2))),
        ("k4/b1".into(), with_half_edge(&complete_graph(4), "v0", at_most(1))),
    ];
    out.push((
        "path-2/weighted".into(),
        with_half_edge(&path_graph(2), "v1", |d| match d {
            1 => Signature::from_ints(&[1, 3]),
            2 => Signature::from_ints(&[2, 2, 1]),
            _ => Signature::new(vec![int(1), int(2), int(2), int(1)]),
        }),
    ));
    out
}
