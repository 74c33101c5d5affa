//! Graphs with normal edges and half-edges.
//!
//! Edges live in slots indexed by [`EdgeId`]. The slot index is the global edge
//! order: normal edges first (input order), then half-edges. Removing an edge
//! leaves an empty slot so every other edge keeps its id, and splitting appends
//! the two new half-edges at the end.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Normal,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Normal(VertexId, VertexId),
    Half(VertexId),
}

impl Edge {
    pub fn kind(&self) -> EdgeKind {
        match self {
            Edge::Normal(..) => EdgeKind::Normal,
            Edge::Half(_) => EdgeKind::Half,
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        match *self {
            Edge::Normal(a, b) => a == v || b == v,
            Edge::Half(a) => a == v,
        }
    }

    pub fn endpoints(&self) -> impl Iterator<Item = VertexId> {
        let (a, b) = match *self {
            Edge::Normal(a, b) => (a, Some(b)),
            Edge::Half(a) => (a, None),
        };
        std::iter::once(a).chain(b)
    }

    /// The endpoint that is not `v`; `None` for half-edges.
    pub fn other(&self, v: VertexId) -> Option<VertexId> {
        match *self {
            Edge::Normal(a, b) if a == v => Some(b),
            Edge::Normal(a, b) if b == v => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex {0:?} declared twice")]
    DuplicateVertex(String),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(String, String),
    #[error("duplicate half-edge on {0:?}")]
    DuplicateHalfEdge(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is not a normal edge")]
    NotANormalEdge(EdgeId),
    #[error("edge {0} is not a half-edge")]
    NotAHalfEdge(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    slots: Vec<Option<Edge>>,
    incidence: Vec<Vec<EdgeId>>,
}

impl Graph {
    /// Builds a graph from named vertices, normal edges and half-edges.
    pub fn build<S: AsRef<str>>(vertices: &[S], normal_edges: &[(S, S)], half_edges: &[S]) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        let mut names = Vec::with_capacity(vertices.len());
        for v in vertices {
            let name = v.as_ref().to_string();
            if index.insert(name.clone(), VertexId(names.len())).is_some() {
                return Err(GraphError::DuplicateVertex(name));
            }
            names.push(name);
        }
        let lookup = |s: &S| {
            index
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(s.as_ref().to_string()))
        };
        let mut slots = Vec::with_capacity(normal_edges.len() + half_edges.len());
        let mut seen = BTreeSet::new();
        for (a, b) in normal_edges {
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(GraphError::SelfLoop(a.as_ref().to_string()));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(
                    a.as_ref().to_string(),
                    b.as_ref().to_string(),
                ));
            }
            slots.push(Some(Edge::Normal(u, v)));
        }
        let mut seen_half = BTreeSet::new();
        for a in half_edges {
            let u = lookup(a)?;
            if !seen_half.insert(u) {
                return Err(GraphError::DuplicateHalfEdge(a.as_ref().to_string()));
            }
            slots.push(Some(Edge::Half(u)));
        }
        Ok(Self::from_slots(names, slots))
    }

    fn from_slots(names: Vec<String>, slots: Vec<Option<Edge>>) -> Self {
        let mut incidence = vec![Vec::new(); names.len()];
        for (i, slot) in slots.iter().enumerate() {
            if let Some(edge) = slot {
                for v in edge.endpoints() {
                    incidence[v.0].push(EdgeId(i));
                }
            }
        }
        Graph {
            names,
            slots,
            incidence,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len()).map(VertexId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId)
    }

    /// Number of slots ever allocated; an upper bound on every live edge id.
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn edge(&self, e: EdgeId) -> Option<Edge> {
        self.slots.get(e.0).copied().flatten()
    }

    pub fn try_edge(&self, e: EdgeId) -> Result<Edge, GraphError> {
        self.edge(e).ok_or(GraphError::UnknownEdge(e))
    }

    /// Live edges in global order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|e| (EdgeId(i), e)))
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges().map(|(id, _)| id).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    pub fn normal_edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId)> + '_ {
        self.edges().filter_map(|(id, e)| match e {
            Edge::Normal(a, b) => Some((id, a, b)),
            Edge::Half(_) => None,
        })
    }

    pub fn half_edges(&self) -> impl Iterator<Item = (EdgeId, VertexId)> + '_ {
        self.edges().filter_map(|(id, e)| match e {
            Edge::Half(a) => Some((id, a)),
            Edge::Normal(..) => None,
        })
    }

    /// Edges containing `v`, sorted by global order.
    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v.0]
    }

    pub fn incident_edges_checked(&self, v: VertexId) -> Result<&[EdgeId], GraphError> {
        self.incidence
            .get(v.0)
            .map(Vec::as_slice)
            .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The graph with `e` removed; other ids are unchanged.
    pub fn remove_edge(&self, e: EdgeId) -> Result<Graph, GraphError> {
        self.try_edge(e)?;
        let mut slots = self.slots.clone();
        slots[e.0] = None;
        Ok(Self::from_slots(self.names.clone(), slots))
    }

    /// `{u,v}` for a normal edge, `{v}` for a half-edge.
    pub fn edge_label(&self, e: EdgeId) -> String {
        match self.edge(e) {
            Some(Edge::Normal(u, v)) => format!("{{{},{}}}", self.vertex_name(u), self.vertex_name(v)),
            Some(Edge::Half(v)) => format!("{{{}}}", self.vertex_name(v)),
            None => format!("#{e}"),
        }
    }

    /// Replaces the normal edge `e = {u, v}` by two half-edges `{u}` and `{v}`
    /// appended at the end of the order. Returns the new graph together with
    /// the ids of the `u` and `v` half-edges, where `u` is the first endpoint
    /// recorded for `e`.
    pub fn split_edge(&self, e: EdgeId) -> Result<(Graph, EdgeId, EdgeId), GraphError> {
        let (u, v) = match self.try_edge(e)? {
            Edge::Normal(u, v) => (u, v),
            Edge::Half(_) => return Err(GraphError::NotANormalEdge(e)),
        };
        let mut slots = self.slots.clone();
        slots[e.0] = None;
        let eu = EdgeId(slots.len());
        slots.push(Some(Edge::Half(u)));
        let ev = EdgeId(slots.len());
        slots.push(Some(Edge::Half(v)));
        Ok((Self::from_slots(self.names.clone(), slots), eu, ev))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::build(&["u", "v", "w"], &[("u", "v"), ("v", "w")], &[]).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = Graph::build(&["u", "v"], &[("u", "v")], &[]).unwrap();
        assert_eq!(g.degree(VertexId(0)), 1);
        assert_eq!(g.degree(VertexId(1)), 1);
    }

    #[test]
    fn half_edge_counts_toward_degree() {
        let g = Graph::build(&["v"], &[], &["v"]).unwrap();
        assert_eq!(g.degree(VertexId(0)), 1);
        assert_eq!(g.edge(EdgeId(0)), Some(Edge::Half(VertexId(0))));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            Graph::build(&["u"], &[("u", "x")], &[]),
            Err(GraphError::UnknownVertex("x".into()))
        );
        assert!(matches!(
            Graph::build(&["u", "v"], &[("u", "v"), ("v", "u")], &[]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::build(&["u"], &[("u", "u")], &[]),
            Err(GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn star_incidence_in_insertion_order() {
        let g = Graph::build(&["c", "a", "b", "d"], &[("c", "a"), ("b", "c"), ("c", "d")], &[]).unwrap();
        assert_eq!(g.incident_edges(VertexId(0)), &[EdgeId(0), EdgeId(1), EdgeId(2)]);
        let iso = Graph::build(&["x"], &[], &[]).unwrap();
        assert!(iso.incident_edges(VertexId(0)).is_empty());
        assert!(g.incident_edges_checked(VertexId(9)).is_err());
    }

    #[test]
    fn split_single_edge() {
        let g = Graph::build(&["u", "v"], &[("u", "v")], &[]).unwrap();
        let (h, eu, ev) = g.split_edge(EdgeId(0)).unwrap();
        assert_eq!(h.edge(eu), Some(Edge::Half(VertexId(0))));
        assert_eq!(h.edge(ev), Some(Edge::Half(VertexId(1))));
        assert_eq!(h.edge(EdgeId(0)), None);
        assert_eq!(h.edge_count(), 2);
    }

    #[test]
    fn split_path_keeps_other_ids() {
        let g = path3();
        let (h, _, ev) = g.split_edge(EdgeId(0)).unwrap();
        assert_eq!(h.edge(EdgeId(1)), g.edge(EdgeId(1)));
        assert_eq!(h.incident_edges(VertexId(1)), &[EdgeId(1), ev]);
        let (k, ..) = g.split_edge(EdgeId(0)).unwrap();
        assert!(matches!(k.split_edge(ev), Err(GraphError::NotANormalEdge(_))));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..7).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let np = pairs.len();
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), np),
                proptest::collection::vec(any::<bool>(), n),
                Just(pairs),
            )
                .prop_map(|(n, keep, halves, pairs)| {
                    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                    let edges: Vec<(String, String)> = pairs
                        .iter()
                        .zip(keep)
                        .filter(|(_, k)| *k)
                        .map(|((a, b), _)| (names[*a].clone(), names[*b].clone()))
                        .collect();
                    let half: Vec<String> = names
                        .iter()
                        .zip(halves)
                        .filter(|(_, h)| *h)
                        .map(|(s, _)| s.clone())
                        .collect();
                    Graph::build(&names, &edges, &half).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn handshake(g in arb_graph()) {
            let deg_sum: usize = g.vertices().map(|v| g.degree(v)).sum();
            let normal = g.normal_edges().count();
            let half = g.half_edges().count();
            prop_assert_eq!(deg_sum, 2 * normal + half);
            for v in g.vertices() {
                let inc = g.incident_edges(v);
                prop_assert!(inc.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(inc, g.incident_edges(v));
            }
        }

        #[test]
        fn split_preserves_degrees(g in arb_graph()) {
            if let Some((e, ..)) = g.normal_edges().next() {
                let (h, ..) = g.split_edge(e).unwrap();
                prop_assert_eq!(h.edge_count(), g.edge_count() + 1);
                for v in g.vertices() {
                    prop_assert_eq!(h.degree(v), g.degree(v));
                }
            }
        }
    }
}
