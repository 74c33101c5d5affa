//! Marginal-ratio estimation: truncation depth, the bisection over LP
//! feasibility for a half-edge, and normal edges by splitting.

use crate::graph::{Edge, EdgeId};
use crate::holant::{HolantError, HolantInstance};
use crate::lp::{build_lp, check_feasible_with, LpError, LpForm, Strategy};
use crate::rational::{self, Rational};
use crate::tree::{CouplingTree, HalfEdgeInstance, TreeError, DEFAULT_MAX_TREE_NODES};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EstimatorError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("binary search exceeded {cap} rounds (bracket [{r1}, {r2}])")]
    RoundCapExceeded { cap: usize, r1: String, r2: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Holant(#[from] HolantError),
}

/// Checks `0 < eps < 1/4`.
pub fn check_epsilon(eps: &Rational) -> Result<(), EstimatorError> {
    if !eps.is_positive() || *eps >= Rational::new(1.into(), 4.into()) {
        return Err(EstimatorError::Domain(format!(
            "epsilon must lie in (0, 1/4), got {}",
            rational::to_string(eps)
        )));
    }
    Ok(())
}

/// `(1 - B^2)^ell`, compared against rationals without computing the power
/// exactly unless that is cheap or the comparison is a near tie.
#[derive(Debug, Clone)]
pub struct Decay {
    num: BigUint,
    den: BigUint,
    ell: usize,
}

/// `m / 2^s`.
#[derive(Debug, Clone)]
struct Dyadic {
    m: BigUint,
    s: u64,
}

impl Dyadic {
    fn one() -> Self {
        Dyadic {
            m: BigUint::one(),
            s: 0,
        }
    }

    fn round(mut self, prec: u64, up: bool) -> Self {
        let bits = self.m.bits();
        if bits > prec {
            let d = bits - prec;
            let dropped = !(&self.m & ((BigUint::one() << d) - 1u32)).is_zero();
            self.m >>= d;
            if up && dropped {
                self.m += 1u32;
            }
            self.s -= d;
        }
        self
    }

    fn mul(&self, other: &Dyadic, prec: u64, up: bool) -> Self {
        Dyadic {
            m: &self.m * &other.m,
            s: self.s + other.s,
        }
        .round(prec, up)
    }

    /// Sign of `self - t`.
    fn cmp_rational(&self, t: &Rational) -> Ordering {
        if !t.is_positive() {
            return if self.m.is_zero() && t.is_zero() {
                Ordering::Equal
            } else {
                Ordering::Greater
            };
        }
        let lhs = BigInt::from(self.m.clone()) * t.denom();
        let rhs = t.numer() << self.s;
        lhs.cmp(&rhs)
    }
}

/// Largest `ell * log2(den)` for which the power is formed exactly.
const EXACT_BITS: u64 = 1 << 16;
const START_PRECISION: u64 = 128;
const MAX_PRECISION: u64 = 1 << 14;

impl Decay {
    /// `b` must lie in `(0, 1)`.
    pub fn new(b: &Rational, ell: usize) -> Self {
        let x = Rational::one() - b * b;
        Decay {
            num: x.numer().to_biguint().expect("0 < x"),
            den: x.denom().to_biguint().expect("positive denominator"),
            ell,
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// The exact value; the size grows linearly in `ell`.
    pub fn exact(&self) -> Rational {
        let x = Rational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()));
        rational::pow(&x, u32::try_from(self.ell).expect("ell fits in u32"))
    }

    fn bounds(&self, prec: u64) -> (Dyadic, Dyadic) {
        let k = prec + self.den.bits();
        let (q, r) = (&self.num << k).div_rem(&self.den);
        let base_lo = Dyadic { m: q.clone(), s: k }.round(prec, false);
        let base_hi = Dyadic {
            m: if r.is_zero() { q } else { q + 1u32 },
            s: k,
        }
        .round(prec, true);
        let (mut lo, mut hi) = (Dyadic::one(), Dyadic::one());
        let (mut blo, mut bhi) = (base_lo, base_hi);
        let mut e = self.ell;
        while e > 0 {
            if e & 1 == 1 {
                lo = lo.mul(&blo, prec, false);
                hi = hi.mul(&bhi, prec, true);
            }
            e >>= 1;
            if e > 0 {
                blo = blo.mul(&blo, prec, false);
                bhi = bhi.mul(&bhi, prec, true);
            }
        }
        (lo, hi)
    }

    /// Sign of `(1 - B^2)^ell - t`.
    pub fn compare(&self, t: &Rational) -> Ordering {
        let width = self.den.bits().max(1);
        if (self.ell as u64).saturating_mul(width) <= EXACT_BITS {
            return self.exact().cmp(t);
        }
        let mut prec = START_PRECISION;
        while prec <= MAX_PRECISION {
            let (lo, hi) = self.bounds(prec);
            if hi.cmp_rational(t) == Ordering::Less {
                return Ordering::Less;
            }
            if lo.cmp_rational(t) == Ordering::Greater {
                return Ordering::Greater;
            }
            prec *= 2;
        }
        self.exact().cmp(t)
    }

    /// `r1 >= r2 (1 - (1 - B^2)^ell)`, for `0 <= r1 <= r2`.
    pub fn bracket_closed(&self, r1: &Rational, r2: &Rational) -> bool {
        if r2.is_zero() {
            return true;
        }
        let gap = Rational::one() - r1 / r2;
        self.compare(&gap) != Ordering::Less
    }

    /// `value (1 - d) <= target <= value / (1 - d)` with `d = (1 - B^2)^ell`.
    pub fn sandwiches(&self, value: &Rational, target: &Rational) -> bool {
        if value.is_zero() || target.is_zero() {
            return value.is_zero() && target.is_zero();
        }
        // value (1 - d) <= target  <=>  d >= 1 - target / value, and
        // target (1 - d) <= value  <=>  d >= 1 - value / target.
        let one = Rational::one();
        self.compare(&(&one - target / value)) != Ordering::Less
            && self.compare(&(&one - value / target)) != Ordering::Less
    }
}

/// The smallest `ell >= 1` with `(1 - B^2)^ell <= eps / 2`.
pub fn choose_ell(b: &Rational, eps: &Rational) -> Result<usize, EstimatorError> {
    if !b.is_positive() || *b >= Rational::one() {
        return Err(EstimatorError::Domain(format!(
            "B must lie in (0, 1), got {}",
            rational::to_string(b)
        )));
    }
    check_epsilon(eps)?;
    let target = eps / Rational::from_integer(2.into());
    let holds = |ell: usize| Decay::new(b, ell).compare(&target) != Ordering::Greater;
    let mut hi = 1usize;
    while !holds(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| EstimatorError::Domain("truncation depth overflows".into()))?;
    }
    // holds(hi), and !holds(lo) unless hi = 1.
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The default round cap `ceil(log2(2 / eps)) + 2`.
pub fn default_round_cap(eps: &Rational) -> usize {
    let two = Rational::from_integer(2.into());
    let target = &two / eps;
    let mut k = 0usize;
    let mut p = Rational::one();
    while p < target {
        p *= &two;
        k += 1;
    }
    k + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundCap {
    /// At most `ceil(log2(2 / eps)) + 2` rounds that start with `r1 > 0`.
    /// Rounds with `r1 = 0` only locate the scale of `R` and number at most
    /// about `log2(r_max / R)`; once `r1 > 0` the bracket has `r2 <= 2 r1`.
    Refining,
    /// At most `ceil(log2(2 / eps)) + 2` rounds in total.
    Total,
    Fixed(usize),
    Unlimited,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    pub max_tree_nodes: usize,
    pub round_cap: RoundCap,
    pub strategy: Strategy,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            max_tree_nodes: DEFAULT_MAX_TREE_NODES,
            round_cap: RoundCap::Refining,
            strategy: Strategy::Guided,
        }
    }
}

/// One bisection round: the bracket it started from and both decisions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Round {
    #[serde(with = "rational::serde_str")]
    pub r1: Rational,
    #[serde(with = "rational::serde_str")]
    pub r2: Rational,
    #[serde(with = "rational::serde_str")]
    pub mid: Rational,
    pub lp1: bool,
    pub lp2: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioEstimate {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// Truncation depth; 0 when no tree was needed.
    pub ell: usize,
    pub rounds: usize,
    /// Nodes in the coupling tree (summed over both halves of a split edge).
    pub lp_nodes: usize,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    pub trace: Vec<Round>,
    /// The two half-edge estimates whose product is `value`, for a normal edge.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<RatioEstimate>,
}

impl RatioEstimate {
    /// Rounds that started with `r1 > 0`.
    pub fn refining_rounds(&self) -> usize {
        self.trace.iter().filter(|r| r.r1.is_positive()).count()
    }

    pub(crate) fn zero(eps: &Rational, b: Rational) -> Self {
        RatioEstimate {
            value: Rational::zero(),
            epsilon: eps.clone(),
            ell: 0,
            rounds: 0,
            lp_nodes: 0,
            b,
            trace: Vec::new(),
            parts: Vec::new(),
        }
    }
}

fn condition(e: impl ToString) -> EstimatorError {
    EstimatorError::ConditionViolated(e.to_string())
}

/// Estimates `R(e_bot)` for a half-edge within a factor `1 +- eps`.
/// Other half-edges are summed out first.
pub fn estimate_halfedge_ratio(
    instance: &HolantInstance,
    e_bot: EdgeId,
    eps: &Rational,
    config: &EstimatorConfig,
) -> Result<RatioEstimate, EstimatorError> {
    check_epsilon(eps)?;
    let v_bot = match instance.graph().edge(e_bot) {
        Some(Edge::Half(v)) => v,
        Some(Edge::Normal(..)) => return Err(condition(format!("edge {e_bot} is not a half-edge"))),
        None => return Err(HolantError::UnknownEdge(e_bot).into()),
    };
    let phi = instance.isolate_half_edge(e_bot)?;
    phi.validate().map_err(condition)?;
    let b = phi.b_bound();
    let r_max = phi.r_max();
    if !phi.signature(v_bot).is_positive_at(1) || r_max.is_zero() {
        return Ok(RatioEstimate::zero(eps, b));
    }
    let ell = choose_ell(&b, eps)?;
    let root = HalfEdgeInstance::new(phi).map_err(|e| match e {
        TreeError::InvalidInstance(m) => EstimatorError::ConditionViolated(m),
        other => other.into(),
    })?;
    let tree = CouplingTree::build(&root, ell, config.max_tree_nodes)?;
    let decay = Decay::new(&b, ell);
    let (cap, refining_only) = match config.round_cap {
        RoundCap::Refining => (Some(default_round_cap(eps)), true),
        RoundCap::Total => (Some(default_round_cap(eps)), false),
        RoundCap::Fixed(k) => (Some(k), false),
        RoundCap::Unlimited => (None, false),
    };
    let half = Rational::new(1.into(), 2.into());
    let feasible = |lo: &Rational, hi: &Rational| -> Result<bool, EstimatorError> {
        let lp = build_lp(&tree, lo, hi, &b, LpForm::Repaired)?;
        Ok(check_feasible_with(&lp.problem, config.strategy).0.is_feasible())
    };
    let (mut r1, mut r2) = (Rational::zero(), r_max);
    let mut trace = Vec::new();
    let mut refining = 0usize;
    loop {
        let counted = if refining_only { refining } else { trace.len() };
        if cap.is_some_and(|c| counted >= c) {
            return Err(EstimatorError::RoundCapExceeded {
                cap: cap.expect("cap"),
                r1: rational::to_string(&r1),
                r2: rational::to_string(&r2),
            });
        }
        if r1.is_positive() {
            refining += 1;
        }
        let mid = (&r1 + &r2) * &half;
        let (lp1, lp2) = std::thread::scope(|s| {
            let second = s.spawn(|| feasible(&mid, &r2));
            let first = feasible(&r1, &mid);
            (first, second.join().expect("LP worker panicked"))
        });
        let (lp1, lp2) = (lp1?, lp2?);
        trace.push(Round {
            r1: r1.clone(),
            r2: r2.clone(),
            mid: mid.clone(),
            lp1,
            lp2,
        });
        if (lp1 && lp2) || decay.bracket_closed(&r1, &r2) {
            return Ok(RatioEstimate {
                value: mid,
                epsilon: eps.clone(),
                ell,
                rounds: trace.len(),
                lp_nodes: tree.len(),
                b,
                trace,
                parts: Vec::new(),
            });
        }
        if lp1 {
            r2 = mid;
        } else {
            r1 = mid;
        }
    }
}

/// Estimates `R(e)` for a normal edge `e = {u, v}` within a factor `1 +- eps`
/// as `R_{Phi1}(e_v) * R_{Phi2}(e_u)`, each factor to `eps / 3`.
pub fn estimate_edge_ratio(
    instance: &HolantInstance,
    e: EdgeId,
    eps: &Rational,
    config: &EstimatorConfig,
) -> Result<RatioEstimate, EstimatorError> {
    check_epsilon(eps)?;
    match instance.graph().edge(e) {
        Some(Edge::Normal(..)) => {}
        Some(Edge::Half(_)) => return estimate_halfedge_ratio(instance, e, eps, config),
        None => return Err(HolantError::UnknownEdge(e).into()),
    }
    let phi = instance.without_half_edges()?;
    phi.validate().map_err(condition)?;
    let (u, v) = match phi.graph().edge(e) {
        Some(Edge::Normal(u, v)) => (u, v),
        _ => unreachable!("normal edge survives summing out half-edges"),
    };
    if !phi.signature(u).is_positive_at(1) || !phi.signature(v).is_positive_at(1) {
        return Ok(RatioEstimate::zero(eps, phi.b_bound()));
    }
    let split = phi.split(e)?;
    let third = eps / Rational::from_integer(3.into());
    let (first, second) = std::thread::scope(|s| {
        let second = s.spawn(|| estimate_halfedge_ratio(&split.pinned_v, split.eu, &third, config));
        let first = estimate_halfedge_ratio(&split.pinned_u, split.ev, &third, config);
        (first, second.join().expect("estimator worker panicked"))
    });
    let (first, second) = (first?, second?);
    Ok(RatioEstimate {
        value: &first.value * &second.value,
        epsilon: eps.clone(),
        ell: first.ell.max(second.ell),
        rounds: first.rounds + second.rounds,
        lp_nodes: first.lp_nodes + second.lp_nodes,
        b: phi.b_bound(),
        trace: Vec::new(),
        parts: vec![first, second],
    })
}
