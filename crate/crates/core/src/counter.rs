//! The telescoping partition-function estimator and the b-matching and
//! b-edge-cover front doors.
//!
//! With `Phi_1 = Phi` and `Phi_{i+1} = Phi_i^{e_i <- 0}`,
//! `Z = prod_v f_v(0) * prod_i (1 + R_{Phi_i}(e_i))`.

use crate::estimator::{estimate_edge_ratio, EstimatorConfig, EstimatorError, RatioEstimate};
use crate::graph::{EdgeId, Graph};
use crate::holant::{HolantError, HolantInstance, Signature};
use crate::rational::{self, Rational};
use num_traits::{One, Signed};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CounterError {
    #[error("invalid instance: {0}")]
    InstanceInvalid(String),
    #[error("invalid b: {0}")]
    InvalidB(String),
    #[error("epsilon must be positive, got {0}")]
    Domain(String),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Holant(#[from] HolantError),
}

/// `eps` is clamped to this before it is divided among the edges.
pub fn epsilon_clamp() -> Rational {
    Rational::new(6.into(), 25.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeEstimate {
    pub edge: EdgeId,
    pub label: String,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    pub estimate: RatioEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountEstimate {
    #[serde(rename = "zhat", with = "rational::serde_str")]
    pub value: Rational,
    #[serde(rename = "zhat_decimal")]
    pub decimal: f64,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// `min(eps, 6/25)`.
    #[serde(with = "rational::serde_str")]
    pub epsilon_used: Rational,
    #[serde(with = "rational::serde_str")]
    pub base: Rational,
    pub m: usize,
    pub per_edge: Vec<EdgeEstimate>,
}

/// Approximates `Z` within a factor `1 +- eps`.
pub fn approx_partition_function(
    instance: &HolantInstance,
    eps: &Rational,
    config: &EstimatorConfig,
) -> Result<CountEstimate, CounterError> {
    if !eps.is_positive() {
        return Err(CounterError::Domain(rational::to_string(eps)));
    }
    instance
        .validate()
        .map_err(|v| CounterError::InstanceInvalid(v.to_string()))?;
    let eps_used = eps.clone().min(epsilon_clamp());
    let edges = instance.graph().edge_ids();
    let m = edges.len();
    let base = instance.zero_weight();
    let mut value = base.clone();
    let mut per_edge = Vec::with_capacity(m);
    if m > 0 {
        let per = &eps_used / Rational::from_integer((2 * m).into());
        let only_zeros = instance.b_bound().is_one();
        let mut phi = instance.clone();
        for e in edges {
            let b = phi.b_bound();
            let estimate = if only_zeros {
                RatioEstimate::zero(&per, b.clone())
            } else {
                estimate_edge_ratio(&phi, e, &per, config)?
            };
            value *= Rational::one() + &estimate.value;
            per_edge.push(EdgeEstimate {
                edge: e,
                label: instance.graph().edge_label(e),
                b: b.clone(),
                estimate,
            });
            phi = phi.pin(e, false)?;
            assert!(b <= phi.b_bound(), "B decreased along the pinning chain");
        }
    }
    Ok(CountEstimate {
        decimal: rational::to_f64(&value),
        value,
        epsilon: eps.clone(),
        epsilon_used: eps_used,
        base,
        m,
        per_edge,
    })
}

fn check_b(graph: &Graph, b: &[usize]) -> Result<(), CounterError> {
    if graph.half_edges().next().is_some() {
        return Err(CounterError::InvalidB("the graph has half-edges".into()));
    }
    if b.len() != graph.vertex_count() {
        return Err(CounterError::InvalidB(format!(
            "{} values given for {} vertices",
            b.len(),
            graph.vertex_count()
        )));
    }
    Ok(())
}

/// The instance whose partition function counts b-matchings: at most `b_v`
/// chosen edges at each vertex.
pub fn b_matching_instance(graph: &Graph, b: &[usize]) -> Result<HolantInstance, CounterError> {
    check_b(graph, b)?;
    let sigs = graph
        .vertices()
        .map(|v| Signature::at_most(graph.degree(v), b[v.0]))
        .collect();
    Ok(HolantInstance::new(graph.clone(), sigs)?)
}

/// Approximates the number of b-matchings; every `b_v` must be at least 1.
pub fn count_b_matchings(
    graph: &Graph,
    b: &[usize],
    eps: &Rational,
    config: &EstimatorConfig,
) -> Result<CountEstimate, CounterError> {
    check_b(graph, b)?;
    if let Some(v) = graph.vertices().find(|v| b[v.0] == 0) {
        return Err(CounterError::InvalidB(format!("b = 0 at {}", graph.vertex_name(v))));
    }
    approx_partition_function(&b_matching_instance(graph, b)?, eps, config)
}

/// The complementary b'-matching instance with `b'_v = deg(v) - b_v`, where
/// every edge at a vertex with `b'_v = 0` is already pinned to 0.
pub fn b_edge_cover_instance(graph: &Graph, b: &[usize]) -> Result<HolantInstance, CounterError> {
    check_b(graph, b)?;
    let mut complement = Vec::with_capacity(b.len());
    for v in graph.vertices() {
        let d = graph.degree(v);
        if b[v.0] > d {
            return Err(CounterError::InvalidB(format!(
                "b = {} exceeds the degree {d} of {}",
                b[v.0],
                graph.vertex_name(v)
            )));
        }
        complement.push(d - b[v.0]);
    }
    let mut phi = b_matching_instance(graph, &complement)?;
    for v in graph.vertices().filter(|v| complement[v.0] == 0) {
        for e in phi.graph().incident_edges(v).to_vec() {
            phi = phi.pin(e, false)?;
        }
    }
    Ok(phi)
}

/// Approximates the number of b-edge covers through their complements.
pub fn count_b_edge_covers(
    graph: &Graph,
    b: &[usize],
    eps: &Rational,
    config: &EstimatorConfig,
) -> Result<CountEstimate, CounterError> {
    approx_partition_function(&b_edge_cover_instance(graph, b)?, eps, config)
}
