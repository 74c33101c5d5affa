//! Symmetric log-concave signatures, Holant instances, pinnings and partial
//! assignments.
//!
//! A vertex `v` of degree `d` carries a signature `[f(0), ..., f(d)]`; the
//! weight of a full assignment is the product over vertices of `f_v` evaluated
//! at the number of incident edges set to 1. Everything is exact.

use crate::graph::{Edge, EdgeId, Graph, GraphError, VertexId};
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<Rational>);

impl Signature {
    pub fn new(values: Vec<Rational>) -> Self {
        Signature(values)
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Signature(values.iter().map(|&v| rational::int(v)).collect())
    }

    /// `[1, ..., 1, 0, ..., 0]` of the given arity with `min(b, arity) + 1` ones.
    pub fn at_most(arity: usize, b: usize) -> Self {
        Signature(
            (0..=arity)
                .map(|k| if k <= b { Rational::one() } else { Rational::zero() })
                .collect(),
        )
    }

    /// The 0/1 indicator of `k >= b` over `0..=arity`.
    pub fn at_least(arity: usize, b: usize) -> Self {
        Signature(
            (0..=arity)
                .map(|k| if k >= b { Rational::one() } else { Rational::zero() })
                .collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// `f(k)`, with `f(k) = 0` past the arity.
    pub fn value(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_positive_at(&self, k: usize) -> bool {
        self.0.get(k).is_some_and(|x| x.is_positive())
    }

    /// `[f(c), ..., f(d - 1 + c)]`: the signature after one incident edge is
    /// fixed to `c`.
    pub fn shifted(&self, c: bool) -> Signature {
        let d = self.arity();
        let start = usize::from(c);
        Signature((start..d + start).map(|k| self.value(k)).collect())
    }

    /// Local polynomial `sum_i C(d, i) f(i) x^i`.
    pub fn local_polynomial(&self, x: &Rational) -> Rational {
        let d = self.arity();
        let mut acc = Rational::zero();
        let mut power = Rational::one();
        for (i, f) in self.0.iter().enumerate() {
            if !f.is_zero() {
                acc += Rational::from_integer(rational::binomial(d, i)) * f * &power;
            }
            power *= x;
        }
        acc
    }

    /// Checks the signature rules (ignoring arity). Reports the first broken
    /// rule in the order: sign, `f(0) > 0`, contiguous support, log-concavity.
    pub fn check(&self) -> Result<(), SignatureRule> {
        if let Some(k) = self.0.iter().position(|x| x.is_negative()) {
            return Err(SignatureRule::NegativeEntry { index: k });
        }
        if !self.is_positive_at(0) {
            return Err(SignatureRule::ZeroAtZero);
        }
        let last_positive = self.0.iter().rposition(|x| x.is_positive()).unwrap_or(0);
        if let Some(k) = (0..=last_positive).find(|&k| self.0[k].is_zero()) {
            return Err(SignatureRule::SupportGap { index: k });
        }
        for k in 1..self.0.len().saturating_sub(1) {
            if &self.0[k] * &self.0[k] < &self.0[k - 1] * &self.0[k + 1] {
                return Err(SignatureRule::NotLogConcave { index: k });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if x.is_integer() {
                write!(f, "{}", x.numer())?;
            } else {
                write!(f, "{}", rational::Display(x))?;
            }
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureRule {
    ArityMismatch { degree: usize, arity: usize },
    NegativeEntry { index: usize },
    ZeroAtZero,
    SupportGap { index: usize },
    NotLogConcave { index: usize },
}

impl fmt::Display for SignatureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureRule::ArityMismatch { degree, arity } => {
                write!(f, "signature arity {arity} does not match degree {degree}")
            }
            SignatureRule::NegativeEntry { index } => write!(f, "negative entry f({index})"),
            SignatureRule::ZeroAtZero => write!(f, "f(0) must be positive"),
            SignatureRule::SupportGap { index } => {
                write!(f, "support gap: f({index}) = 0 between positive entries")
            }
            SignatureRule::NotLogConcave { index } => {
                write!(f, "not log-concave at k = {index}: f(k)^2 < f(k-1) f(k+1)")
            }
        }
    }
}

/// The first vertex whose signature breaks a rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("vertex {vertex_name:?}: {rule}")]
pub struct Violation {
    pub vertex: VertexId,
    pub vertex_name: String,
    pub rule: SignatureRule,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HolantError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0} signatures given for {1} vertices")]
    SignatureCount(usize, usize),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is bound twice")]
    AlreadyBound(EdgeId),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// A Boolean-domain symmetric Holant instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolantInstance {
    graph: Graph,
    signatures: Vec<Signature>,
}

impl HolantInstance {
    /// Pairs a graph with one signature per vertex. No rule is checked here
    /// beyond the count; see [`HolantInstance::validate`].
    pub fn new(graph: Graph, signatures: Vec<Signature>) -> Result<Self, HolantError> {
        if graph.vertex_count() != signatures.len() {
            return Err(HolantError::SignatureCount(signatures.len(), graph.vertex_count()));
        }
        Ok(HolantInstance { graph, signatures })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn signature(&self, v: VertexId) -> &Signature {
        &self.signatures[v.0]
    }

    pub fn signatures(&self) -> &[Signature] {
        &self.signatures
    }

    /// Checks arity = degree, nonnegativity, `f(0) > 0`, contiguous support
    /// and log-concavity at every vertex.
    pub fn validate(&self) -> Result<(), Violation> {
        for v in self.graph.vertices() {
            let f = &self.signatures[v.0];
            let degree = self.graph.degree(v);
            let rule = if f.arity() != degree || f.values().is_empty() {
                Err(SignatureRule::ArityMismatch {
                    degree,
                    arity: f.arity(),
                })
            } else {
                f.check()
            };
            if let Err(rule) = rule {
                return Err(Violation {
                    vertex: v,
                    vertex_name: self.graph.vertex_name(v).to_string(),
                    rule,
                });
            }
        }
        Ok(())
    }

    /// The pinning with `e` fixed to `c`: `e` leaves the graph and each
    /// endpoint's signature shifts by `c`.
    pub fn pin(&self, e: EdgeId, c: bool) -> Result<HolantInstance, HolantError> {
        let edge = self.graph.edge(e).ok_or(HolantError::UnknownEdge(e))?;
        let graph = self.graph.remove_edge(e)?;
        let mut signatures = self.signatures.clone();
        for v in edge.endpoints() {
            signatures[v.0] = self.signatures[v.0].shifted(c);
        }
        Ok(HolantInstance { graph, signatures })
    }

    /// Pins a sequence of edges in order.
    pub fn pin_all(&self, bindings: &PartialAssignment) -> Result<HolantInstance, HolantError> {
        let mut out = self.clone();
        for (e, c) in bindings.iter() {
            out = out.pin(e, c)?;
        }
        Ok(out)
    }

    /// `max_v f_v(1) / f_v(0)`, with `f_v(1) = 0` for isolated vertices.
    pub fn r_max(&self) -> Rational {
        let mut best = Rational::zero();
        for v in self.graph.vertices() {
            let f = &self.signatures[v.0];
            if f.arity() == 0 || !f.is_positive_at(0) {
                continue;
            }
            let r = f.value(1) / f.value(0);
            if r > best {
                best = r;
            }
        }
        best
    }

    /// `min_v P_{f_v}(0) / P_{f_v}(r_max)`; lies in `(0, 1]` for valid instances.
    pub fn b_bound(&self) -> Rational {
        let r = self.r_max();
        let mut best = Rational::one();
        for f in &self.signatures {
            let denom = f.local_polynomial(&r);
            if denom.is_zero() {
                continue;
            }
            let q = f.value(0) / denom;
            if q < best {
                best = q;
            }
        }
        best
    }

    /// Product of `f_v(0)` over all vertices.
    pub fn zero_weight(&self) -> Rational {
        self.signatures.iter().map(|f| f.value(0)).product()
    }

    /// Hamming weight of `sigma` on the edges at `v`.
    pub fn ham(&self, sigma: &PartialAssignment, v: VertexId) -> usize {
        self.graph
            .incident_edges(v)
            .iter()
            .filter(|&&e| sigma.get(e) == Some(true))
            .count()
    }

    /// Unbound edges at `v` under `sigma`, in global order.
    pub fn unpinned_at(&self, sigma: &PartialAssignment, v: VertexId) -> Vec<EdgeId> {
        self.graph
            .incident_edges(v)
            .iter()
            .copied()
            .filter(|&e| !sigma.contains(e))
            .collect()
    }

    /// Whether some full assignment extending `sigma` has positive weight.
    /// Extending by zeros is enough, so only vertices touched by `sigma` need
    /// a lookup.
    pub fn is_feasible_partial(&self, sigma: &PartialAssignment) -> Result<bool, HolantError> {
        let mut ham: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (e, c) in sigma.iter() {
            let edge = self.graph.edge(e).ok_or(HolantError::UnknownEdge(e))?;
            for v in edge.endpoints() {
                *ham.entry(v).or_default() += usize::from(c);
            }
        }
        Ok(ham.into_iter().all(|(v, k)| self.signatures[v.0].is_positive_at(k)))
    }

    /// Sums out the half-edge `e`: it leaves the graph and its vertex's
    /// signature becomes `g(k) = f(k) + f(k + 1)`. The partition function is
    /// unchanged, and so is every marginal of the remaining edges.
    /// Convolution with `[1, 1]` keeps signatures log-concave.
    pub fn sum_out(&self, e: EdgeId) -> Result<HolantInstance, HolantError> {
        let v = match self.graph.edge(e) {
            Some(Edge::Half(v)) => v,
            Some(Edge::Normal(_, _)) => return Err(GraphError::NotAHalfEdge(e).into()),
            None => return Err(HolantError::UnknownEdge(e)),
        };
        let graph = self.graph.remove_edge(e)?;
        let mut signatures = self.signatures.clone();
        let f = &self.signatures[v.0];
        let summed: Vec<Rational> = (0..f.arity()).map(|k| f.value(k) + f.value(k + 1)).collect();
        signatures[v.0] = Signature::new(summed);
        Ok(HolantInstance { graph, signatures })
    }

    /// Sums out every half-edge except `keep`.
    pub fn isolate_half_edge(&self, keep: EdgeId) -> Result<HolantInstance, HolantError> {
        let mut out = self.clone();
        let others: Vec<EdgeId> = self.graph.half_edges().map(|(e, _)| e).filter(|&e| e != keep).collect();
        for e in others {
            out = out.sum_out(e)?;
        }
        Ok(out)
    }

    /// Sums out every half-edge.
    pub fn without_half_edges(&self) -> Result<HolantInstance, HolantError> {
        let mut out = self.clone();
        let all: Vec<EdgeId> = self.graph.half_edges().map(|(e, _)| e).collect();
        for e in all {
            out = out.sum_out(e)?;
        }
        Ok(out)
    }

    /// Splits the normal edge `e = {u, v}` into half-edges `e_u`, `e_v` and
    /// returns the three derived instances used to factor its marginal ratio.
    pub fn split(&self, e: EdgeId) -> Result<SplitInstances, HolantError> {
        let (u, v) = match self.graph.edge(e) {
            Some(Edge::Normal(u, v)) => (u, v),
            Some(Edge::Half(_)) => return Err(GraphError::NotANormalEdge(e).into()),
            None => return Err(HolantError::UnknownEdge(e)),
        };
        for w in [u, v] {
            if !self.signatures[w.0].is_positive_at(1) {
                return Err(HolantError::PreconditionViolated(format!(
                    "f_{}(1) = 0; the marginal ratio of edge {e} is 0",
                    self.graph.vertex_name(w)
                )));
            }
        }
        let (graph, eu, ev) = self.graph.split_edge(e)?;
        let split = HolantInstance {
            graph,
            signatures: self.signatures.clone(),
        };
        let pinned_u = split.pin(eu, true)?;
        let pinned_v = split.pin(ev, false)?;
        Ok(SplitInstances {
            split,
            pinned_u,
            pinned_v,
            u,
            v,
            eu,
            ev,
        })
    }
}

/// Result of [`HolantInstance::split`]. `pinned_u` keeps the half-edge `ev`
/// at `v`; `pinned_v` keeps `eu` at `u`.
#[derive(Debug, Clone)]
pub struct SplitInstances {
    pub split: HolantInstance,
    pub pinned_u: HolantInstance,
    pub pinned_v: HolantInstance,
    pub u: VertexId,
    pub v: VertexId,
    pub eu: EdgeId,
    pub ev: EdgeId,
}

/// A map from a subset of edges to `{0, 1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialAssignment(BTreeMap<EdgeId, bool>);

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(e: EdgeId, c: bool) -> Self {
        let mut p = Self::new();
        p.0.insert(e, c);
        p
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (EdgeId, bool)>) -> Result<Self, HolantError> {
        let mut p = Self::new();
        for (e, c) in pairs {
            p.bind(e, c)?;
        }
        Ok(p)
    }

    pub fn bind(&mut self, e: EdgeId, c: bool) -> Result<(), HolantError> {
        if self.0.insert(e, c).is_some() {
            return Err(HolantError::AlreadyBound(e));
        }
        Ok(())
    }

    /// `self ∧ (e ← c)`; panics if `e` is already bound.
    pub fn with(&self, e: EdgeId, c: bool) -> Self {
        let mut p = self.clone();
        let prev = p.0.insert(e, c);
        assert!(prev.is_none(), "edge {e} bound twice");
        p
    }

    /// `self ∧ other` for disjoint domains.
    pub fn concat(&self, other: &PartialAssignment) -> Result<Self, HolantError> {
        let mut p = self.clone();
        for (e, c) in other.iter() {
            p.bind(e, c)?;
        }
        Ok(p)
    }

    /// Extends by zeros on `edges` (already-bound edges are an error).
    pub fn with_zeros(&self, edges: &[EdgeId]) -> Result<Self, HolantError> {
        let mut p = self.clone();
        for &e in edges {
            p.bind(e, false)?;
        }
        Ok(p)
    }

    pub fn get(&self, e: EdgeId) -> Option<bool> {
        self.0.get(&e).copied()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.contains_key(&e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, bool)> + '_ {
        self.0.iter().map(|(&e, &c)| (e, c))
    }

    pub fn domain(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.keys().copied()
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, c)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}<-{}", u8::from(c))?;
        }
        write!(f, "}}")
    }
}
