//! Reduction from demand/capacity many-to-many matching to one
//! minimum-weight perfect matching.
//!
//! The gadget graph has, on the row side (S):
//!
//! * `A_i`: `alpha[i]` copies of `a_i`, which must all be matched to a real partner;
//! * `A'_i`: `alpha_cap[i] - alpha[i]` optional copies of `a_i`;
//! * `X_j`: `beta_cap[j] - beta[j]` dummies absorbing the optional slots of `b_j`;
//! * `W_j`: `s - beta_cap[j]` dummies blocking the slots of `b_j` beyond its capacity;
//!
//! and on the column side (T) one copy `b_{j,i}` of every `b_j` per `a_i`,
//! followed by the compensator block `Y` of size `sum alpha_cap - sum beta`.
//! Edges `A_i / A'_i -- b_{j,i}` carry `cost(i, j)`; every other admissible
//! edge is a fixed penalty, and non-edges get a sentinel weight that no
//! optimal perfect matching uses when the instance is feasible.
//!
//! For any sentinel-free perfect matching with `L` main edges the non-main
//! weight is `(sum beta_cap - L) g1 + (L - sum beta) g2 + (sum alpha_cap - L) g1`,
//! i.e. `L (g2 - 2 g1)` plus a constant. With `g2 = 2 g1` that term vanishes
//! and the gadget weight differs from the pair cost by a constant.

use std::fmt;

use thiserror::Error;

use crate::hungarian::{self, Assignment, CostMatrix, HungarianError, Matching, SolverOptions};
use crate::model::{normalize, FeasibilityReport, MmdcInstance, NormalizedInstance};
use crate::weight::Weight;

/// What a gadget vertex stands for. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexRole {
    /// `k`-th mandatory copy of `a_i`.
    ACopy {
        i: usize,
        k: usize,
    },
    /// `k`-th optional copy of `a_i`.
    APrimeCopy {
        i: usize,
        k: usize,
    },
    XDummy {
        j: usize,
        k: usize,
    },
    WDummy {
        j: usize,
        k: usize,
    },
    /// The copy of `b_j` reserved for pairing with `a_i`.
    BCopy {
        j: usize,
        i: usize,
    },
    YDummy {
        k: usize,
    },
}

impl fmt::Display for VertexRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VertexRole::ACopy { i, k } => write!(f, "A {i} {k}"),
            VertexRole::APrimeCopy { i, k } => write!(f, "A' {i} {k}"),
            VertexRole::XDummy { j, k } => write!(f, "X {j} {k}"),
            VertexRole::WDummy { j, k } => write!(f, "W {j} {k}"),
            VertexRole::BCopy { j, i } => write!(f, "B {j} {i}"),
            VertexRole::YDummy { k } => write!(f, "Y {k}"),
        }
    }
}

/// Admissible gadget edges, by the blocks they join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// `A_i` or `A'_i` to `b_{j,i}`: encodes the pair `(i, j)`.
    Main,
    WB,
    XB,
    XY,
    APrimeY,
}

/// Classifies a (row role, column role) pair; `None` marks a non-edge.
pub fn edge_kind(row: VertexRole, col: VertexRole) -> Option<EdgeKind> {
    use VertexRole::*;
    match (row, col) {
        (ACopy { i, .. } | APrimeCopy { i, .. }, BCopy { i: bi, .. }) if i == bi => {
            Some(EdgeKind::Main)
        }
        (WDummy { j, .. }, BCopy { j: bj, .. }) if j == bj => Some(EdgeKind::WB),
        (XDummy { j, .. }, BCopy { j: bj, .. }) if j == bj => Some(EdgeKind::XB),
        (XDummy { .. }, YDummy { .. }) => Some(EdgeKind::XY),
        (APrimeCopy { .. }, YDummy { .. }) => Some(EdgeKind::APrimeY),
        _ => None,
    }
}

/// How the two penalty weights are derived from `gamma = max cost`.
///
/// `g1 = gamma + 1` in every rule; the rules differ in `g2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PenaltyRule {
    /// `g2 = 2 g1`: gadget weight is pair cost plus a constant.
    #[default]
    Balanced,
    /// `g2 = 2 g1 + 1`: every extra pair costs one more unit.
    Strict,
    /// `g2 = g1 + 1`, the smallest value with `g2 > g1`.
    Minimal,
}

impl PenaltyRule {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyRule::Balanced => "balanced",
            PenaltyRule::Strict => "strict",
            PenaltyRule::Minimal => "minimal",
        }
    }

    fn penalties<W: Weight>(self, gamma: W) -> Option<(W, W)> {
        let g1 = gamma.checked_add(W::ONE)?;
        let g2 = match self {
            PenaltyRule::Balanced => g1.checked_scale(2)?,
            PenaltyRule::Strict => g1.checked_scale(2)?.checked_add(W::ONE)?,
            PenaltyRule::Minimal => g1.checked_add(W::ONE)?,
        };
        Some((g1, g2))
    }
}

impl std::str::FromStr for PenaltyRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "balanced" => Ok(PenaltyRule::Balanced),
            "strict" => Ok(PenaltyRule::Strict),
            "minimal" => Ok(PenaltyRule::Minimal),
            other => Err(format!("unknown penalty rule {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GadgetError {
    #[error("instance is not normalized: {0}")]
    NotNormalized(String),
    #[error("gadget weights overflow the numeric type")]
    Overflow,
    #[error("gadget layout check failed: {0}")]
    Layout(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetGraph<W> {
    pub cost: CostMatrix<W>,
    pub role_s: Vec<VertexRole>,
    pub role_t: Vec<VertexRole>,
    pub gamma: W,
    pub gamma_prime: W,
    pub gamma_double_prime: W,
    pub forbidden: W,
    pub penalty: PenaltyRule,
    pub normalized: NormalizedInstance<W>,
}

/// `s * t + sum alpha_cap - sum beta`, or `None` if the compensator block would be negative.
pub fn gadget_size<W: Weight>(inst: &MmdcInstance<W>) -> Option<usize> {
    let cap: usize = inst.alpha_cap().iter().sum();
    let demand: usize = inst.beta().iter().sum();
    (inst.s() * inst.t() + cap)
        .checked_sub(demand)
        .filter(|_| cap >= demand)
}

fn row_roles<W: Weight>(inst: &MmdcInstance<W>) -> Vec<VertexRole> {
    let (s, t) = (inst.s(), inst.t());
    let mut roles = Vec::new();
    for i in 0..s {
        roles.extend((0..inst.alpha()[i]).map(|k| VertexRole::ACopy { i, k }));
    }
    for i in 0..s {
        roles.extend(
            (0..inst.alpha_cap()[i] - inst.alpha()[i]).map(|k| VertexRole::APrimeCopy { i, k }),
        );
    }
    for j in 0..t {
        roles.extend((0..inst.beta_cap()[j] - inst.beta()[j]).map(|k| VertexRole::XDummy { j, k }));
    }
    for j in 0..t {
        roles.extend((0..s - inst.beta_cap()[j]).map(|k| VertexRole::WDummy { j, k }));
    }
    roles
}

fn col_roles<W: Weight>(inst: &MmdcInstance<W>, y: usize) -> Vec<VertexRole> {
    let mut roles: Vec<_> = (0..inst.s())
        .flat_map(|i| (0..inst.t()).map(move |j| VertexRole::BCopy { j, i }))
        .collect();
    roles.extend((0..y).map(|k| VertexRole::YDummy { k }));
    roles
}

/// Weight of an edge given the role pair, or `forbidden` for a non-edge.
fn role_weight<W: Weight>(
    inst: &MmdcInstance<W>,
    row: VertexRole,
    col: VertexRole,
    g1: W,
    g2: W,
    forbidden: W,
) -> W {
    match edge_kind(row, col) {
        Some(EdgeKind::Main) => match (row, col) {
            (
                VertexRole::ACopy { i, .. } | VertexRole::APrimeCopy { i, .. },
                VertexRole::BCopy { j, .. },
            ) => inst.cost(i, j),
            _ => unreachable!("main edges join an a-copy and a b-copy"),
        },
        Some(EdgeKind::WB) => W::ZERO,
        Some(EdgeKind::XB) | Some(EdgeKind::APrimeY) => g1,
        Some(EdgeKind::XY) => g2,
        None => forbidden,
    }
}

pub fn build_gadget<W: Weight>(
    norm: &NormalizedInstance<W>,
) -> Result<GadgetGraph<W>, GadgetError> {
    build_gadget_with(norm, PenaltyRule::default())
}

pub fn build_gadget_with<W: Weight>(
    norm: &NormalizedInstance<W>,
    penalty: PenaltyRule,
) -> Result<GadgetGraph<W>, GadgetError> {
    let inst = &norm.instance;
    let (s, t) = (inst.s(), inst.t());
    for i in 0..s {
        if inst.alpha_cap()[i] > t || inst.alpha()[i] > inst.alpha_cap()[i] {
            return Err(GadgetError::NotNormalized(format!(
                "capacity of a{i} exceeds {t}"
            )));
        }
    }
    for j in 0..t {
        if inst.beta_cap()[j] > s {
            return Err(GadgetError::NotNormalized(format!(
                "capacity of b{j} exceeds {s}"
            )));
        }
    }
    let n = gadget_size(inst).ok_or_else(|| {
        GadgetError::NotNormalized("capacity sum of A is below demand sum of B".into())
    })?;
    let y = n - s * t;

    let gamma = inst.max_cost();
    let (g1, g2) = penalty.penalties(gamma).ok_or(GadgetError::Overflow)?;
    let forbidden = g2
        .checked_scale(n)
        .and_then(|x| x.checked_add(W::ONE))
        .ok_or(GadgetError::Overflow)?;
    // label and matching sums stay within n * forbidden
    forbidden
        .checked_scale(n.max(2))
        .ok_or(GadgetError::Overflow)?;

    let role_s = row_roles(inst);
    let role_t = col_roles(inst, y);
    debug_assert_eq!(role_s.len(), n);
    debug_assert_eq!(role_t.len(), n);
    let mut w = Vec::with_capacity(n * n);
    for &r in &role_s {
        for &c in &role_t {
            w.push(role_weight(inst, r, c, g1, g2, forbidden));
        }
    }
    let cost = CostMatrix::new(n, w).map_err(|e| GadgetError::Layout(e.to_string()))?;
    Ok(GadgetGraph {
        cost,
        role_s,
        role_t,
        gamma,
        gamma_prime: g1,
        gamma_double_prime: g2,
        forbidden,
        penalty,
        normalized: norm.clone(),
    })
}

/// Re-derives every structural property of a gadget from its parts: side
/// sizes, role ranges and block order, each entry's weight, and the ordering
/// `gamma < g1 < g2`, `forbidden > n * g2`.
pub fn check_gadget_layout<W: Weight>(
    inst: &MmdcInstance<W>,
    role_s: &[VertexRole],
    role_t: &[VertexRole],
    cost: &CostMatrix<W>,
    gamma: W,
    g1: W,
    g2: W,
    forbidden: W,
) -> Result<(), GadgetError> {
    let fail = |msg: String| Err(GadgetError::Layout(msg));
    let n = match gadget_size(inst) {
        Some(n) => n,
        None => return fail("instance has a negative compensator block".into()),
    };
    if role_s.len() != n || role_t.len() != n || cost.n() != n {
        return fail(format!(
            "side sizes {} / {} / matrix {} differ from expected {n}",
            role_s.len(),
            role_t.len(),
            cost.n()
        ));
    }
    let expected_s = row_roles(inst);
    let expected_t = col_roles(inst, n - inst.s() * inst.t());
    if let Some(k) = (0..n).find(|&k| role_s[k] != expected_s[k]) {
        return fail(format!(
            "row {k} has role {} but expected {}",
            role_s[k], expected_s[k]
        ));
    }
    if let Some(k) = (0..n).find(|&k| role_t[k] != expected_t[k]) {
        return fail(format!(
            "column {k} has role {} but expected {}",
            role_t[k], expected_t[k]
        ));
    }
    if gamma != inst.max_cost() {
        return fail(format!(
            "gamma {gamma} is not the largest cost {}",
            inst.max_cost()
        ));
    }
    if !(g1 > gamma && g2 > g1) {
        return fail(format!(
            "penalties out of order: gamma {gamma}, g1 {g1}, g2 {g2}"
        ));
    }
    match g2.checked_scale(n) {
        Some(bound) if forbidden > bound => {}
        _ => return fail(format!("sentinel {forbidden} does not exceed n * g2")),
    }
    for r in 0..n {
        for c in 0..n {
            let want = role_weight(inst, role_s[r], role_t[c], g1, g2, forbidden);
            if cost.get(r, c) != want {
                return fail(format!(
                    "weight at ({r}, {c}) is {} but expected {want}",
                    cost.get(r, c)
                ));
            }
        }
    }
    Ok(())
}

impl<W: Weight> GadgetGraph<W> {
    pub fn n(&self) -> usize {
        self.cost.n()
    }

    pub fn check_invariants(&self) -> Result<(), GadgetError> {
        check_gadget_layout(
            &self.normalized.instance,
            &self.role_s,
            &self.role_t,
            &self.cost,
            self.gamma,
            self.gamma_prime,
            self.gamma_double_prime,
            self.forbidden,
        )
    }

    /// Non-main weight predicted from the block sizes for a matching with
    /// `main_edges` main edges; `None` if no sentinel-free perfect matching
    /// can have that many.
    pub fn nonmain_closed_form(&self, main_edges: usize) -> Option<W> {
        let inst = &self.normalized.instance;
        let cap_b: usize = inst.beta_cap().iter().sum();
        let dem_b: usize = inst.beta().iter().sum();
        let cap_a: usize = inst.alpha_cap().iter().sum();
        let xb = cap_b.checked_sub(main_edges)?;
        let xy = main_edges.checked_sub(dem_b)?;
        let ay = cap_a.checked_sub(main_edges)?;
        let a = self.gamma_prime.checked_scale(xb)?;
        let b = self.gamma_double_prime.checked_scale(xy)?;
        let c = self.gamma_prime.checked_scale(ay)?;
        a.checked_add(b)?.checked_add(c)
    }
}

/// Audit data for a solution produced through the gadget.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<W> {
    pub gadget_size: usize,
    pub matching_weight: W,
    pub main_weight: W,
    pub nonmain_weight: W,
    pub main_edges: usize,
    /// Matched `X -- Y` edges.
    pub xy_edges: usize,
    pub gamma: W,
    pub gamma_prime: W,
    pub gamma_double_prime: W,
    pub forbidden: W,
    pub penalty: PenaltyRule,
    pub transposed: bool,
}

/// A pair set with its degree vectors and cost. Pairs are sorted and zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdcSolution<W> {
    pub pairs: Vec<(usize, usize)>,
    pub deg_a: Vec<usize>,
    pub deg_b: Vec<usize>,
    pub cost: W,
    pub certificate: Option<Certificate<W>>,
}

impl<W: Weight> MmdcSolution<W> {
    /// Builds a solution from pairs, computing degrees and cost.
    pub fn from_pairs(instance: &MmdcInstance<W>, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let mut deg_a = vec![0; instance.s()];
        let mut deg_b = vec![0; instance.t()];
        let mut cost = W::ZERO;
        for &(i, j) in &pairs {
            deg_a[i] += 1;
            deg_b[j] += 1;
            cost += instance.cost(i, j);
        }
        Self {
            pairs,
            deg_a,
            deg_b,
            cost,
            certificate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmdcError {
    #[error("{0}")]
    Infeasible(FeasibilityReport),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Solver(#[from] HungarianError),
    #[error("matching is not perfect")]
    NotPerfect,
    #[error("matching uses the non-edge ({row}, {col}); no sentinel-free perfect matching exists")]
    SentinelMatched { row: usize, col: usize },
    #[error("extracted pairs violate a degree bound: {0}")]
    DegreeDefect(String),
}

impl From<crate::model::Infeasible> for MmdcError {
    fn from(e: crate::model::Infeasible) -> Self {
        MmdcError::Infeasible(e.0)
    }
}

fn classify<W: Weight>(
    g: &GadgetGraph<W>,
    m: &Matching<W>,
) -> Result<Vec<(usize, usize, EdgeKind)>, MmdcError> {
    if !m.is_perfect() || m.mate_a.len() != g.n() {
        return Err(MmdcError::NotPerfect);
    }
    m.edges()
        .map(|(r, c)| match edge_kind(g.role_s[r], g.role_t[c]) {
            Some(kind) => Ok((r, c, kind)),
            None => Err(MmdcError::SentinelMatched { row: r, col: c }),
        })
        .collect()
}

/// Total weight of the matched edges that do not encode a pair.
pub fn nonmain_weight<W: Weight>(g: &GadgetGraph<W>, m: &Matching<W>) -> Result<W, MmdcError> {
    Ok(classify(g, m)?
        .into_iter()
        .filter(|e| e.2 != EdgeKind::Main)
        .map(|(r, c, _)| g.cost.get(r, c))
        .sum())
}

/// Reads the pair set off the main edges of a perfect matching and maps it
/// back to the caller's orientation.
pub fn extract_solution<W: Weight>(
    g: &GadgetGraph<W>,
    m: &Matching<W>,
    original: &MmdcInstance<W>,
) -> Result<MmdcSolution<W>, MmdcError> {
    let edges = classify(g, m)?;
    let mut pairs = Vec::new();
    let (mut main_weight, mut nonmain) = (W::ZERO, W::ZERO);
    let mut xy_edges = 0;
    for (r, c, kind) in edges {
        let w = g.cost.get(r, c);
        match (kind, g.role_t[c]) {
            (EdgeKind::Main, VertexRole::BCopy { j, i }) => {
                pairs.push(g.normalized.original_pair(i, j));
                main_weight += w;
            }
            (kind, _) => {
                if kind == EdgeKind::XY {
                    xy_edges += 1;
                }
                nonmain += w;
            }
        }
    }
    let main_edges = pairs.len();
    let mut sol = MmdcSolution::from_pairs(original, pairs);
    for (i, &d) in sol.deg_a.iter().enumerate() {
        if d < original.alpha()[i] || d > original.alpha_cap()[i] {
            return Err(MmdcError::DegreeDefect(format!("a{i} has degree {d}")));
        }
    }
    for (j, &d) in sol.deg_b.iter().enumerate() {
        if d < original.beta()[j] || d > original.beta_cap()[j] {
            return Err(MmdcError::DegreeDefect(format!("b{j} has degree {d}")));
        }
    }
    if sol.pairs.windows(2).any(|w| w[0] == w[1]) {
        return Err(MmdcError::DegreeDefect("duplicate pair".into()));
    }
    sol.certificate = Some(Certificate {
        gadget_size: g.n(),
        matching_weight: m.weight,
        main_weight,
        nonmain_weight: nonmain,
        main_edges,
        xy_edges,
        gamma: g.gamma,
        gamma_prime: g.gamma_prime,
        gamma_double_prime: g.gamma_double_prime,
        forbidden: g.forbidden,
        penalty: g.penalty,
        transposed: g.normalized.transposed,
    });
    Ok(sol)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub penalty: PenaltyRule,
    pub solver: SolverOptions,
}

/// Everything produced along the pipeline, for callers that audit it.
#[derive(Debug, Clone)]
pub struct SolveOutcome<W> {
    pub solution: MmdcSolution<W>,
    pub gadget: GadgetGraph<W>,
    pub assignment: Assignment<W>,
}

/// Minimum-cost pair set meeting every demand and capacity.
pub fn solve_mmdc<W: Weight>(instance: &MmdcInstance<W>) -> Result<MmdcSolution<W>, MmdcError> {
    let opts = SolveOptions {
        solver: SolverOptions {
            check_invariants: false,
            ..SolverOptions::default()
        },
        ..SolveOptions::default()
    };
    solve_mmdc_with(instance, &opts).map(|o| o.solution)
}

pub fn solve_mmdc_with<W: Weight>(
    instance: &MmdcInstance<W>,
    opts: &SolveOptions,
) -> Result<SolveOutcome<W>, MmdcError> {
    let norm = normalize(instance)?;
    let gadget = build_gadget_with(&norm, opts.penalty)?;
    let assignment = hungarian::solve_assignment_with(&gadget.cost, &opts.solver)?;
    let solution = extract_solution(&gadget, &assignment.matching, instance)?;
    Ok(SolveOutcome {
        solution,
        gadget,
        assignment,
    })
}
