//! Brute-force ground truth by enumerating every assignment.
//!
//! Signatures are rescaled to integers per vertex so the inner loop works on
//! integers; sums are exact and the enumeration visits assignments in
//! increasing order of their bit masks over the global edge order.

use crate::graph::EdgeId;
use crate::holant::{HolantError, HolantInstance, PartialAssignment};
use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub const DEFAULT_MAX_ORACLE_EDGES: usize = 24;

/// Hard ceiling for the mask width.
const MASK_BITS: usize = 62;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance has {edges} edges, above the oracle cap of {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error("conditioning assignment has zero weight")]
    InfeasibleCondition,
    #[error("edge {0} is not in the instance")]
    UnknownEdge(EdgeId),
    #[error("edge {0} appears in both the condition and the target")]
    Overlap(EdgeId),
    #[error(transparent)]
    Holant(#[from] HolantError),
}

/// `mu^condition_S(target)` where `target` assigns every edge of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalQuery {
    pub condition: PartialAssignment,
    pub target: PartialAssignment,
}

enum Weights {
    /// Products and sums provably fit in `u128`.
    Small(Vec<Vec<u128>>),
    Big(Vec<Vec<BigInt>>),
}

/// Enumerator bound to one instance.
pub struct Oracle<'a> {
    instance: &'a HolantInstance,
    bit: Vec<Option<u32>>,
    vertex_masks: Vec<u64>,
    weights: Weights,
    /// Constant factor from isolated vertices, over the product of scales.
    factor: Rational,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a HolantInstance) -> Result<Self, OracleError> {
        Self::with_cap(instance, DEFAULT_MAX_ORACLE_EDGES)
    }

    pub fn with_cap(instance: &'a HolantInstance, cap: usize) -> Result<Self, OracleError> {
        let graph = instance.graph();
        let m = graph.edge_count();
        if m > cap.min(MASK_BITS) {
            return Err(OracleError::TooLarge { edges: m, cap });
        }
        let mut bit = vec![None; graph.slot_count()];
        for (i, e) in graph.edge_ids().into_iter().enumerate() {
            bit[e.0] = Some(i as u32);
        }
        let mut vertex_masks = Vec::new();
        let mut scaled: Vec<Vec<BigInt>> = Vec::new();
        let mut factor = Rational::one();
        for v in graph.vertices() {
            let f = instance.signature(v);
            let incident = graph.incident_edges(v);
            if incident.is_empty() {
                factor *= f.value(0);
                continue;
            }
            let scale = f.values().iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let row: Vec<BigInt> = (0..=incident.len())
                .map(|k| (f.value(k) * Rational::from_integer(scale.clone())).to_integer())
                .collect();
            factor /= Rational::from_integer(scale);
            let mask = incident
                .iter()
                .fold(0u64, |acc, e| acc | (1u64 << bit[e.0].expect("live edge")));
            vertex_masks.push(mask);
            scaled.push(row);
        }
        let bits: u64 = scaled
            .iter()
            .map(|row| row.iter().map(|x| x.bits()).max().unwrap_or(0))
            .sum();
        let weights = if bits + m as u64 <= 126 {
            Weights::Small(
                scaled
                    .iter()
                    .map(|row| row.iter().map(|x| x.to_u128().expect("nonnegative")).collect())
                    .collect(),
            )
        } else {
            Weights::Big(scaled)
        };
        Ok(Oracle {
            instance,
            bit,
            vertex_masks,
            weights,
            factor,
        })
    }

    pub fn instance(&self) -> &HolantInstance {
        self.instance
    }

    fn masks(&self, fixed: &PartialAssignment) -> Result<(u64, u64), OracleError> {
        let (mut domain, mut ones) = (0u64, 0u64);
        for (e, c) in fixed.iter() {
            let b = self
                .bit
                .get(e.0)
                .copied()
                .flatten()
                .ok_or(OracleError::UnknownEdge(e))?;
            domain |= 1 << b;
            if c {
                ones |= 1 << b;
            }
        }
        Ok((domain, ones))
    }

    /// Total weight of full assignments extending `fixed`.
    pub fn weight(&self, fixed: &PartialAssignment) -> Result<Rational, OracleError> {
        let (domain, ones) = self.masks(fixed)?;
        let m = self.bit.iter().flatten().count();
        let all = if m == 0 { 0 } else { u64::MAX >> (64 - m) };
        let free = all & !domain;
        let sum = match &self.weights {
            Weights::Small(rows) => BigInt::from(self.sum_small(rows, free, ones)),
            Weights::Big(rows) => self.sum_big(rows, free, ones),
        };
        Ok(Rational::from_integer(sum) * &self.factor)
    }

    fn sum_small(&self, rows: &[Vec<u128>], free: u64, ones: u64) -> u128 {
        let mut total = 0u128;
        let mut sub = 0u64;
        loop {
            let x = sub | ones;
            let mut w = 1u128;
            for (mask, row) in self.vertex_masks.iter().zip(rows) {
                w *= row[(x & mask).count_ones() as usize];
                if w == 0 {
                    break;
                }
            }
            total += w;
            if sub == free {
                return total;
            }
            sub = (sub | !free).wrapping_add(1) & free;
        }
    }

    fn sum_big(&self, rows: &[Vec<BigInt>], free: u64, ones: u64) -> BigInt {
        let mut total = BigInt::zero();
        let mut sub = 0u64;
        loop {
            let x = sub | ones;
            let mut w = BigInt::one();
            for (mask, row) in self.vertex_masks.iter().zip(rows) {
                let f = &row[(x & mask).count_ones() as usize];
                if f.is_zero() {
                    w = BigInt::zero();
                    break;
                }
                w *= f;
            }
            total += w;
            if sub == free {
                return total;
            }
            sub = (sub | !free).wrapping_add(1) & free;
        }
    }

    pub fn partition_function(&self) -> Result<Rational, OracleError> {
        self.weight(&PartialAssignment::new())
    }

    /// `mu^condition(target)`, the probability that a sample conditioned on
    /// `condition` agrees with `target`.
    pub fn probability(
        &self,
        condition: &PartialAssignment,
        target: &PartialAssignment,
    ) -> Result<Rational, OracleError> {
        let mut joint = condition.clone();
        for (e, c) in target.iter() {
            match condition.get(e) {
                Some(_) => return Err(OracleError::Overlap(e)),
                None => joint = joint.with(e, c),
            }
        }
        let den = self.weight(condition)?;
        if den.is_zero() {
            return Err(OracleError::InfeasibleCondition);
        }
        Ok(self.weight(&joint)? / den)
    }

    pub fn conditional_marginal(&self, q: &MarginalQuery) -> Result<Rational, OracleError> {
        self.probability(&q.condition, &q.target)
    }

    /// `mu^condition_e(1)`.
    pub fn edge_marginal(&self, condition: &PartialAssignment, e: EdgeId) -> Result<Rational, OracleError> {
        self.probability(condition, &PartialAssignment::single(e, true))
    }

    /// `Z^{e <- 1} / Z^{e <- 0}`.
    pub fn marginal_ratio(&self, e: EdgeId) -> Result<Rational, OracleError> {
        let one = self.weight(&PartialAssignment::single(e, true))?;
        let zero = self.weight(&PartialAssignment::single(e, false))?;
        if zero.is_zero() {
            return Err(OracleError::InfeasibleCondition);
        }
        Ok(one / zero)
    }
}

pub fn partition_function(instance: &HolantInstance) -> Result<Rational, OracleError> {
    Oracle::new(instance)?.partition_function()
}

pub fn conditional_marginal(instance: &HolantInstance, q: &MarginalQuery) -> Result<Rational, OracleError> {
    Oracle::new(instance)?.conditional_marginal(q)
}

pub fn marginal_ratio_exact(instance: &HolantInstance, e: EdgeId) -> Result<Rational, OracleError> {
    Oracle::new(instance)?.marginal_ratio(e)
}
