//! Problem instances, feasibility checking and normalization.
//!
//! An instance pairs every `a_i` with between `alpha[i]` and `alpha_cap[i]`
//! distinct elements of `B`, and every `b_j` with between `beta[j]` and
//! `beta_cap[j]` distinct elements of `A`, at total cost `sum cost[i][j]`.

use std::fmt;

use thiserror::Error;

use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("a"),
            Side::B => f.write_str("b"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("side {0} must contain at least one element")]
    EmptySide(Side),
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("demand {demand} of {side}{index} exceeds its capacity {cap}")]
    DemandAboveCapacity {
        side: Side,
        index: usize,
        demand: usize,
        cap: usize,
    },
    #[error("cost[{i}][{j}] is not finite")]
    NonFiniteCost { i: usize, j: usize },
    #[error("cost[{i}][{j}] is negative")]
    NegativeCost { i: usize, j: usize },
}

/// A many-to-many matching problem with demands and capacities.
///
/// Costs are stored row-major, `s` rows by `t` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdcInstance<W> {
    alpha: Vec<usize>,
    alpha_cap: Vec<usize>,
    beta: Vec<usize>,
    beta_cap: Vec<usize>,
    cost: Vec<W>,
}

impl<W: Weight> MmdcInstance<W> {
    pub fn new(
        alpha: Vec<usize>,
        alpha_cap: Vec<usize>,
        beta: Vec<usize>,
        beta_cap: Vec<usize>,
        cost: Vec<Vec<W>>,
    ) -> Result<Self, InstanceError> {
        let s = alpha.len();
        let t = beta.len();
        if s == 0 {
            return Err(InstanceError::EmptySide(Side::A));
        }
        if t == 0 {
            return Err(InstanceError::EmptySide(Side::B));
        }
        check_len("alpha_cap", s, alpha_cap.len())?;
        check_len("beta_cap", t, beta_cap.len())?;
        check_len("cost rows", s, cost.len())?;
        for row in &cost {
            check_len("cost row", t, row.len())?;
        }
        for (side, demand, cap) in [(Side::A, &alpha, &alpha_cap), (Side::B, &beta, &beta_cap)] {
            for (index, (&d, &c)) in demand.iter().zip(cap).enumerate() {
                if d > c {
                    return Err(InstanceError::DemandAboveCapacity {
                        side,
                        index,
                        demand: d,
                        cap: c,
                    });
                }
            }
        }
        for (i, row) in cost.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() {
                    return Err(InstanceError::NonFiniteCost { i, j });
                }
                if w < W::ZERO {
                    return Err(InstanceError::NegativeCost { i, j });
                }
            }
        }
        Ok(Self {
            alpha,
            alpha_cap,
            beta,
            beta_cap,
            cost: cost.into_iter().flatten().collect(),
        })
    }

    pub fn s(&self) -> usize {
        self.alpha.len()
    }

    pub fn t(&self) -> usize {
        self.beta.len()
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn alpha_cap(&self) -> &[usize] {
        &self.alpha_cap
    }

    pub fn beta(&self) -> &[usize] {
        &self.beta
    }

    pub fn beta_cap(&self) -> &[usize] {
        &self.beta_cap
    }

    pub fn cost(&self, i: usize, j: usize) -> W {
        self.cost[i * self.t() + j]
    }

    pub fn cost_rows(&self) -> Vec<Vec<W>> {
        self.cost.chunks(self.t()).map(<[W]>::to_vec).collect()
    }

    /// Largest entry of the cost matrix.
    pub fn max_cost(&self) -> W {
        self.cost.iter().fold(W::ZERO, |m, &w| m.max_of(w))
    }

    /// Swaps the roles of `A` and `B`.
    pub fn transposed(&self) -> Self {
        let (s, t) = (self.s(), self.t());
        let mut cost = Vec::with_capacity(s * t);
        for j in 0..t {
            for i in 0..s {
                cost.push(self.cost(i, j));
            }
        }
        Self {
            alpha: self.beta.clone(),
            alpha_cap: self.beta_cap.clone(),
            beta: self.alpha.clone(),
            beta_cap: self.alpha_cap.clone(),
            cost,
        }
    }

    /// Same bounds, costs replaced element-wise.
    pub fn map_costs<V: Weight>(
        &self,
        f: impl Fn(W) -> V,
    ) -> Result<MmdcInstance<V>, InstanceError> {
        let rows = self
            .cost_rows()
            .into_iter()
            .map(|row| row.into_iter().map(&f).collect())
            .collect();
        MmdcInstance::new(
            self.alpha.clone(),
            self.alpha_cap.clone(),
            self.beta.clone(),
            self.beta_cap.clone(),
            rows,
        )
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), InstanceError> {
    if expected == got {
        Ok(())
    } else {
        Err(InstanceError::LengthMismatch {
            what,
            expected,
            got,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An element's demand exceeds `min(cap, size of the other side)`.
    DemandAboveLimit {
        side: Side,
        index: usize,
        demand: usize,
        limit: usize,
    },
    /// `max(sum alpha, sum beta)` exceeds the smaller of the clamped capacity sums.
    TotalDemandAboveCapacity { required: usize, available: usize },
    /// Every per-element and aggregate bound holds, yet no pair set meets
    /// all degree bounds at once.
    NoDegreeFeasiblePairSet,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DemandAboveLimit {
                side,
                index,
                demand,
                limit,
            } => write!(
                f,
                "demand {demand} of {side}{index} exceeds attainable degree {limit}"
            ),
            Violation::TotalDemandAboveCapacity {
                required,
                available,
            } => write!(
                f,
                "at least {required} pairs are required but at most {available} fit"
            ),
            Violation::NoDegreeFeasiblePairSet => {
                f.write_str("no pair set satisfies all demands and capacities simultaneously")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible() {
            return f.write_str("feasible");
        }
        f.write_str("infeasible: ")?;
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Decides whether any pair set meets every demand and capacity.
///
/// Per-element and aggregate conditions are reported individually. When they
/// all hold, an exact check (bounded flow on the complete bipartite graph)
/// settles the remaining cases.
pub fn validate<W: Weight>(instance: &MmdcInstance<W>) -> FeasibilityReport {
    let (s, t) = (instance.s(), instance.t());
    let alpha_cap: Vec<usize> = instance.alpha_cap().iter().map(|&c| c.min(t)).collect();
    let beta_cap: Vec<usize> = instance.beta_cap().iter().map(|&c| c.min(s)).collect();
    let mut violations = Vec::new();

    for (side, demand, cap) in [
        (Side::A, instance.alpha(), &alpha_cap),
        (Side::B, instance.beta(), &beta_cap),
    ] {
        for (index, (&d, &limit)) in demand.iter().zip(cap.iter()).enumerate() {
            if d > limit {
                violations.push(Violation::DemandAboveLimit {
                    side,
                    index,
                    demand: d,
                    limit,
                });
            }
        }
    }

    let required = instance
        .alpha()
        .iter()
        .sum::<usize>()
        .max(instance.beta().iter().sum());
    let available = alpha_cap.iter().sum::<usize>().min(beta_cap.iter().sum());
    if required > available {
        violations.push(Violation::TotalDemandAboveCapacity {
            required,
            available,
        });
    }

    if violations.is_empty()
        && !bounded_degree_flow(instance.alpha(), &alpha_cap, instance.beta(), &beta_cap)
    {
        violations.push(Violation::NoDegreeFeasiblePairSet);
    }
    FeasibilityReport { violations }
}

/// Feasible circulation on
/// `src -> a_i [alpha, alpha_cap]`, `a_i -> b_j [0, 1]`, `b_j -> snk [beta, beta_cap]`,
/// `snk -> src [0, inf)`, via the usual lower-bound elimination.
fn bounded_degree_flow(
    alpha: &[usize],
    alpha_cap: &[usize],
    beta: &[usize],
    beta_cap: &[usize],
) -> bool {
    let (s, t) = (alpha.len(), beta.len());
    let src = s + t;
    let snk = src + 1;
    let super_src = snk + 1;
    let super_snk = super_src + 1;
    let n = super_snk + 1;
    let mut cap = vec![vec![0i64; n]; n];
    let mut excess = vec![0i64; n];
    let mut add = |cap: &mut Vec<Vec<i64>>, u: usize, v: usize, lo: usize, hi: usize| {
        cap[u][v] += (hi - lo) as i64;
        excess[v] += lo as i64;
        excess[u] -= lo as i64;
    };
    for i in 0..s {
        add(&mut cap, src, i, alpha[i], alpha_cap[i]);
        for j in 0..t {
            add(&mut cap, i, s + j, 0, 1);
        }
    }
    for j in 0..t {
        add(&mut cap, s + j, snk, beta[j], beta_cap[j]);
    }
    let unbounded = (s * t + 1) as i64;
    cap[snk][src] += unbounded;
    let mut need = 0;
    for v in 0..super_src {
        if excess[v] > 0 {
            cap[super_src][v] += excess[v];
            need += excess[v];
        } else if excess[v] < 0 {
            cap[v][super_snk] -= excess[v];
        }
    }
    max_flow(&mut cap, super_src, super_snk) == need
}

/// Edmonds-Karp on a dense residual matrix.
fn max_flow(cap: &mut [Vec<i64>], source: usize, sink: usize) -> i64 {
    let n = cap.len();
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return total;
        }
        let mut push = i64::MAX;
        let mut v = sink;
        while v != source {
            let u = prev[v];
            push = push.min(cap[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = prev[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        total += push;
    }
}

/// An instance with clamped capacities and `sum alpha_cap >= sum beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedInstance<W> {
    pub instance: MmdcInstance<W>,
    /// Whether `A` and `B` were swapped relative to the caller's instance.
    pub transposed: bool,
}

impl<W> NormalizedInstance<W> {
    /// Maps a pair of the normalized instance back to the caller's indexing.
    pub fn original_pair(&self, i: usize, j: usize) -> (usize, usize) {
        if self.transposed {
            (j, i)
        } else {
            (i, j)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct Infeasible(pub FeasibilityReport);

/// Clamps capacities to the other side's size and transposes when needed so
/// that `sum alpha_cap >= sum beta`.
pub fn normalize<W: Weight>(
    instance: &MmdcInstance<W>,
) -> Result<NormalizedInstance<W>, Infeasible> {
    let report = validate(instance);
    if !report.feasible() {
        return Err(Infeasible(report));
    }
    let (s, t) = (instance.s(), instance.t());
    let mut clamped = instance.clone();
    clamped.alpha_cap.iter_mut().for_each(|c| *c = (*c).min(t));
    clamped.beta_cap.iter_mut().for_each(|c| *c = (*c).min(s));
    let cap_sum: usize = clamped.alpha_cap.iter().sum();
    let demand_sum: usize = clamped.beta.iter().sum();
    if cap_sum < demand_sum {
        Ok(NormalizedInstance {
            instance: clamped.transposed(),
            transposed: true,
        })
    } else {
        Ok(NormalizedInstance {
            instance: clamped,
            transposed: false,
        })
    }
}
