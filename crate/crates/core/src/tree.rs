//! The truncated extended coupling tree.
//!
//! Every node carries a label `(sigma, tau, s, v, L)`: two partial assignments
//! that agree on their domain except for a single weight-distinct vertex `v`,
//! the sequence `s` of edges assigned after the half-edge, and the number `L`
//! of edges in `s` where they disagree. Internal nodes expand every unpinned
//! edge at `v` into three children, so the tree can be built without knowing
//! which edge the coupling would actually pick.
//!
//! Nodes store only the edge they added; labels are rebuilt by walking to the
//! root. Node ids are BFS order.

use crate::graph::{Edge, EdgeId, VertexId};
use crate::holant::{HolantError, HolantInstance, PartialAssignment};
use crate::rational::Rational;
use num_traits::Zero;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

pub const DEFAULT_MAX_TREE_NODES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("instance does not have exactly one half-edge (found {0})")]
    HalfEdgeCount(usize),
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
    #[error("truncation depth must be at least 1")]
    ZeroDepth,
    #[error("tree exceeds {limit} nodes (max degree {max_degree}, ell {ell}, {edges} edges)")]
    Budget {
        limit: usize,
        max_degree: usize,
        ell: usize,
        edges: usize,
    },
    #[error("node {0} is not an internal feasible node")]
    NotInternalFeasible(NodeId),
    #[error(transparent)]
    Holant(#[from] HolantError),
}

/// An instance with a unique half-edge `e_bot = {v_bot}`, the starting point
/// of the coupling: `sigma_bot = (e_bot <- 1)` and `tau_bot = (e_bot <- 0)`.
#[derive(Debug, Clone)]
pub struct HalfEdgeInstance {
    instance: HolantInstance,
    half_edge: EdgeId,
    vertex: VertexId,
}

impl HalfEdgeInstance {
    pub fn new(instance: HolantInstance) -> Result<Self, TreeError> {
        let halves: Vec<_> = instance.graph().half_edges().collect();
        if halves.len() != 1 {
            return Err(TreeError::HalfEdgeCount(halves.len()));
        }
        instance
            .validate()
            .map_err(|v| TreeError::InvalidInstance(v.to_string()))?;
        let (half_edge, vertex) = halves[0];
        Ok(HalfEdgeInstance {
            instance,
            half_edge,
            vertex,
        })
    }

    pub fn instance(&self) -> &HolantInstance {
        &self.instance
    }

    pub fn half_edge(&self) -> EdgeId {
        self.half_edge
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    pub fn sigma_root(&self) -> PartialAssignment {
        PartialAssignment::single(self.half_edge, true)
    }

    pub fn tau_root(&self) -> PartialAssignment {
        PartialAssignment::single(self.half_edge, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which side has the smaller weight at the node's weight-distinct vertex.
/// Decides the child value patterns and the LP child equalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Ham(sigma, E_v) < Ham(tau, E_v)`; children `(0,0)`, `(1,0)`, `(1,1)`.
    SigmaLower,
    /// Otherwise; children `(0,0)`, `(0,1)`, `(1,1)`.
    SigmaHigher,
}

impl Direction {
    /// The `(sigma(e), tau(e))` values of the three children of one edge.
    pub fn patterns(self) -> [(bool, bool); 3] {
        match self {
            Direction::SigmaLower => [(false, false), (true, false), (true, true)],
            Direction::SigmaHigher => [(false, false), (false, true), (true, true)],
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub parent: Option<NodeId>,
    /// The edge appended to `s` by this node, with its sigma and tau values.
    pub step: Option<(EdgeId, bool, bool)>,
    pub vertex: VertexId,
    pub discrepancies: usize,
    pub depth: usize,
    pub ham_sigma: usize,
    pub ham_tau: usize,
    pub feasible: bool,
    pub leaf: bool,
    /// Unpinned edges at `vertex` that were expanded (empty for leaves).
    pub branch_edges: Vec<EdgeId>,
    /// Three children per branch edge, in branch-edge order.
    pub children: Vec<NodeId>,
    /// Per branch edge: whether `sigma ∧ (e <- 1)` and `tau ∧ (e <- 1)` are
    /// feasible. Setting an edge to 0 never breaks feasibility.
    pub one_feasible: Vec<(bool, bool)>,
}

impl TreeNode {
    pub fn direction(&self) -> Direction {
        if self.ham_sigma < self.ham_tau {
            Direction::SigmaLower
        } else {
            Direction::SigmaHigher
        }
    }

    /// The three children for `branch_edges[i]`.
    pub fn children_of_edge(&self, i: usize) -> [NodeId; 3] {
        [self.children[3 * i], self.children[3 * i + 1], self.children[3 * i + 2]]
    }
}

/// A fully materialized node label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabel {
    pub sigma: PartialAssignment,
    pub tau: PartialAssignment,
    pub s: Vec<EdgeId>,
    pub v: VertexId,
    pub l: usize,
}

/// Node classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeClass {
    pub feasible: bool,
    pub leaf: bool,
    pub good_leaf: bool,
    pub bad_leaf: bool,
}

/// Nodes keyed by their edge-by-edge `(e, sigma(e), tau(e))` assignments.
type AssignmentIndex = HashMap<Vec<(EdgeId, bool, bool)>, Vec<NodeId>>;

#[derive(Debug)]
pub struct CouplingTree {
    root: HalfEdgeInstance,
    ell: usize,
    nodes: Vec<TreeNode>,
    by_assignment: OnceLock<AssignmentIndex>,
}

impl CouplingTree {
    /// Builds the `ell`-truncated tree by BFS. A node is a leaf iff
    /// `L >= ell`, it has no unpinned edge at `v`, or one of its partial
    /// assignments is infeasible.
    pub fn build(root: &HalfEdgeInstance, ell: usize, max_nodes: usize) -> Result<Self, TreeError> {
        if ell == 0 {
            return Err(TreeError::ZeroDepth);
        }
        let phi = root.instance();
        let graph = phi.graph();
        let budget = |_: usize| TreeError::Budget {
            limit: max_nodes,
            max_degree: graph.max_degree(),
            ell,
            edges: graph.edge_count(),
        };
        let v0 = root.vertex();
        let f0 = phi.signature(v0);
        let mut nodes = vec![TreeNode {
            parent: None,
            step: None,
            vertex: v0,
            discrepancies: 0,
            depth: 0,
            ham_sigma: 1,
            ham_tau: 0,
            feasible: f0.is_positive_at(1) && f0.is_positive_at(0),
            leaf: false,
            branch_edges: Vec::new(),
            children: Vec::new(),
            one_feasible: Vec::new(),
        }];
        let mut queue = VecDeque::from([NodeId(0)]);
        let mut scratch = Assigned::new(graph.slot_count());
        while let Some(id) = queue.pop_front() {
            let node = &nodes[id.0];
            if !node.feasible || node.discrepancies >= ell {
                nodes[id.0].leaf = true;
                continue;
            }
            scratch.load(&nodes, id, root.half_edge());
            let v = node.vertex;
            let branch: Vec<EdgeId> = graph
                .incident_edges(v)
                .iter()
                .copied()
                .filter(|e| !scratch.is_bound(*e))
                .collect();
            if branch.is_empty() {
                nodes[id.0].leaf = true;
                continue;
            }
            let direction = node.direction();
            let (depth, l, ham_s, ham_t) = (node.depth, node.discrepancies, node.ham_sigma, node.ham_tau);
            let mut children = Vec::with_capacity(3 * branch.len());
            let mut one_feasible = Vec::with_capacity(branch.len());
            for &e in &branch {
                let other = match graph.edge(e) {
                    Some(Edge::Normal(a, b)) => {
                        if a == v {
                            b
                        } else {
                            a
                        }
                    }
                    // Only the root half-edge exists and it is always bound.
                    _ => unreachable!("half-edge {e} unbound below the root"),
                };
                let (os, ot) = (scratch.ham_sigma(graph, other), scratch.ham_tau(graph, other));
                let f_v = phi.signature(v);
                let f_o = phi.signature(other);
                one_feasible.push((
                    f_v.is_positive_at(ham_s + 1) && f_o.is_positive_at(os + 1),
                    f_v.is_positive_at(ham_t + 1) && f_o.is_positive_at(ot + 1),
                ));
                for (i, (cs, ct)) in direction.patterns().into_iter().enumerate() {
                    let (ns, nt) = (ham_s + usize::from(cs), ham_t + usize::from(ct));
                    let (ms, mt) = (os + usize::from(cs), ot + usize::from(ct));
                    let feasible = f_v.is_positive_at(ns)
                        && f_v.is_positive_at(nt)
                        && f_o.is_positive_at(ms)
                        && f_o.is_positive_at(mt);
                    // The middle pattern moves the discrepancy to the other endpoint.
                    let (vertex, hs, ht, disc) = if i == 1 { (other, ms, mt, l + 1) } else { (v, ns, nt, l) };
                    let child = NodeId(nodes.len());
                    if nodes.len() >= max_nodes {
                        return Err(budget(nodes.len()));
                    }
                    nodes.push(TreeNode {
                        parent: Some(id),
                        step: Some((e, cs, ct)),
                        vertex,
                        discrepancies: disc,
                        depth: depth + 1,
                        ham_sigma: hs,
                        ham_tau: ht,
                        feasible,
                        leaf: false,
                        branch_edges: Vec::new(),
                        children: Vec::new(),
                        one_feasible: Vec::new(),
                    });
                    children.push(child);
                    queue.push_back(child);
                }
            }
            let node = &mut nodes[id.0];
            node.branch_edges = branch;
            node.children = children;
            node.one_feasible = one_feasible;
        }
        Ok(CouplingTree {
            root: root.clone(),
            ell,
            nodes,
            by_assignment: OnceLock::new(),
        })
    }

    pub fn root(&self) -> &HalfEdgeInstance {
        &self.root
    }

    pub fn instance(&self) -> &HolantInstance {
        self.root.instance()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn class(&self, id: NodeId) -> NodeClass {
        let n = &self.nodes[id.0];
        let good = n.leaf && n.discrepancies < self.ell;
        NodeClass {
            feasible: n.feasible,
            leaf: n.leaf,
            good_leaf: good,
            bad_leaf: n.leaf && !good,
        }
    }

    /// Whether the node is internal; internal nodes are always feasible.
    pub fn is_internal(&self, id: NodeId) -> bool {
        !self.nodes[id.0].leaf
    }

    /// Rebuilds the full label of a node.
    pub fn label(&self, id: NodeId) -> NodeLabel {
        let e_bot = self.root.half_edge();
        let mut sigma = PartialAssignment::single(e_bot, true);
        let mut tau = PartialAssignment::single(e_bot, false);
        let mut s = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let n = &self.nodes[c.0];
            if let Some((e, cs, ct)) = n.step {
                sigma = sigma.with(e, cs);
                tau = tau.with(e, ct);
                s.push(e);
            }
            cur = n.parent;
        }
        s.reverse();
        let n = &self.nodes[id.0];
        NodeLabel {
            sigma,
            tau,
            s,
            v: n.vertex,
            l: n.discrepancies,
        }
    }

    fn assignment_key(&self, id: NodeId) -> Vec<(EdgeId, bool, bool)> {
        let mut key = Vec::with_capacity(self.nodes[id.0].depth);
        let mut cur = Some(id);
        while let Some(c) = cur {
            let n = &self.nodes[c.0];
            if let Some(step) = n.step {
                key.push(step);
            }
            cur = n.parent;
        }
        key.sort_unstable();
        key
    }

    fn assignment_index(&self) -> &AssignmentIndex {
        self.by_assignment.get_or_init(|| {
            let mut map: HashMap<_, Vec<NodeId>> = HashMap::new();
            for i in 0..self.nodes.len() {
                map.entry(self.assignment_key(NodeId(i))).or_default().push(NodeId(i));
            }
            map
        })
    }

    /// All nodes whose assignments equal this node's assignments extended by
    /// zeros on the node's branch edges. The node must be internal.
    pub fn zero_completion_set(&self, id: NodeId) -> Result<Vec<NodeId>, TreeError> {
        if !self.is_internal(id) {
            return Err(TreeError::NotInternalFeasible(id));
        }
        let mut key = self.assignment_key(id);
        key.extend(self.nodes[id.0].branch_edges.iter().map(|&e| (e, false, false)));
        key.sort_unstable();
        Ok(self.assignment_index().get(&key).cloned().unwrap_or_default())
    }

    /// `f_v(Ham(tau, E_v)) / f_v(Ham(sigma, E_v))` at the node's
    /// weight-distinct vertex: the ratio `mu(tau) / mu(sigma)` at a feasible
    /// good leaf.
    pub fn weight_ratio(&self, id: NodeId) -> Rational {
        let n = &self.nodes[id.0];
        let f = self.instance().signature(n.vertex);
        let den = f.value(n.ham_sigma);
        debug_assert!(!den.is_zero(), "weight ratio at an infeasible node");
        f.value(n.ham_tau) / den
    }

    /// Serializable dump in BFS order.
    pub fn dump(&self) -> TreeDump {
        let graph = self.instance().graph();
        let nodes = (0..self.nodes.len())
            .map(|i| {
                let id = NodeId(i);
                let label = self.label(id);
                let class = self.class(id);
                let mut flags = Vec::new();
                if class.feasible {
                    flags.push("feasible");
                }
                if class.leaf {
                    flags.push("leaf");
                }
                if class.good_leaf {
                    flags.push("good-leaf");
                }
                if class.bad_leaf {
                    flags.push("bad-leaf");
                }
                let fmt_assign =
                    |p: &PartialAssignment| p.iter().map(|(e, c)| (e.0.to_string(), u8::from(c))).collect();
                NodeDump {
                    id: i,
                    parent: self.nodes[i].parent.map(|p| p.0),
                    sigma: fmt_assign(&label.sigma),
                    tau: fmt_assign(&label.tau),
                    s: label.s.iter().map(|e| e.0).collect(),
                    v: graph.vertex_name(label.v).to_string(),
                    l: label.l,
                    flags: flags.into_iter().map(String::from).collect(),
                }
            })
            .collect();
        TreeDump {
            ell: self.ell,
            half_edge: self.root.half_edge().0,
            root_vertex: graph.vertex_name(self.root.vertex()).to_string(),
            nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeDump {
    pub ell: usize,
    pub half_edge: usize,
    pub root_vertex: String,
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeDump {
    pub id: usize,
    pub parent: Option<usize>,
    pub sigma: std::collections::BTreeMap<String, u8>,
    pub tau: std::collections::BTreeMap<String, u8>,
    pub s: Vec<usize>,
    pub v: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub flags: Vec<String>,
}

/// Per-slot scratch copy of a node's assignments, reloaded for each expanded
/// node.
struct Assigned {
    sigma: Vec<Option<bool>>,
    tau: Vec<Option<bool>>,
    touched: Vec<usize>,
}

impl Assigned {
    fn new(slots: usize) -> Self {
        Assigned {
            sigma: vec![None; slots],
            tau: vec![None; slots],
            touched: Vec::new(),
        }
    }

    fn load(&mut self, nodes: &[TreeNode], id: NodeId, e_bot: EdgeId) {
        for &i in &self.touched {
            self.sigma[i] = None;
            self.tau[i] = None;
        }
        self.touched.clear();
        self.set(e_bot.0, true, false);
        let mut cur = Some(id);
        while let Some(c) = cur {
            let n = &nodes[c.0];
            if let Some((e, cs, ct)) = n.step {
                self.set(e.0, cs, ct);
            }
            cur = n.parent;
        }
    }

    fn set(&mut self, i: usize, s: bool, t: bool) {
        self.sigma[i] = Some(s);
        self.tau[i] = Some(t);
        self.touched.push(i);
    }

    fn is_bound(&self, e: EdgeId) -> bool {
        self.sigma[e.0].is_some()
    }

    fn ham_sigma(&self, graph: &crate::graph::Graph, v: VertexId) -> usize {
        graph
            .incident_edges(v)
            .iter()
            .filter(|e| self.sigma[e.0] == Some(true))
            .count()
    }

    fn ham_tau(&self, graph: &crate::graph::Graph, v: VertexId) -> usize {
        graph
            .incident_edges(v)
            .iter()
            .filter(|e| self.tau[e.0] == Some(true))
            .count()
    }
}
