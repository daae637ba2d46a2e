//! Minimum-weight perfect matching on a dense `n x n` cost matrix.
//!
//! This is the basic Hungarian method: a feasible dual labeling is kept
//! throughout, an alternating tree is grown from one free row at a time over
//! tight edges, and labels are shifted by the smallest slack whenever the tree
//! gets stuck. A slack array per column keeps each phase at `O(n^2)`, for
//! `O(n^3)` overall.
//!
//! Slack is `w[i][j] - la[i] - lb[j]` and is never negative for a feasible
//! labeling. Ties are broken towards the lowest index everywhere, so results
//! are reproducible.

use std::fmt;

use thiserror::Error;

use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    LabelingFeasibility,
    SlackConsistency,
    MatchedTightness,
    DualityGap,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::LabelingFeasibility => "labeling feasibility",
            Invariant::SlackConsistency => "slack consistency",
            Invariant::MatchedTightness => "matched-edge tightness",
            Invariant::DualityGap => "duality certificate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HungarianError {
    #[error("cost matrix must be non-empty")]
    Empty,
    #[error("cost matrix has {len} entries, expected {n}x{n}")]
    NotSquare { n: usize, len: usize },
    #[error("weight at ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("label update requested with every column already in T")]
    NoColumnOutsideTree,
    #[error("label shift {0} is negative; slack bookkeeping is broken")]
    NegativeShift(String),
    #[error("invalid augmenting path: {0}")]
    BadPath(&'static str),
    #[error("{invariant} violated: {detail}")]
    InvariantViolated {
        invariant: Invariant,
        detail: String,
    },
}

/// Square matrix of edge weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<W> {
    n: usize,
    w: Vec<W>,
}

impl<W: Weight> CostMatrix<W> {
    pub fn new(n: usize, w: Vec<W>) -> Result<Self, HungarianError> {
        if n == 0 {
            return Err(HungarianError::Empty);
        }
        if w.len() != n * n {
            return Err(HungarianError::NotSquare { n, len: w.len() });
        }
        if let Some(k) = w.iter().position(|x| !x.is_finite()) {
            return Err(HungarianError::NonFinite { i: k / n, j: k % n });
        }
        Ok(Self { n, w })
    }

    pub fn from_rows(rows: &[Vec<W>]) -> Result<Self, HungarianError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            let len = rows.iter().map(Vec::len).sum();
            return Err(HungarianError::NotSquare { n, len });
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> W {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[W] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> W {
        self.w.iter().fold(W::ZERO, |m, &x| m.max_of(x.abs()))
    }

    /// Weight of the assignment `row i -> cols[i]`.
    pub fn assignment_weight(&self, cols: &[usize]) -> W {
        cols.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

/// Dual values for rows (`la`) and columns (`lb`).
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling<W> {
    pub la: Vec<W>,
    pub lb: Vec<W>,
}

impl<W: Weight> Labeling<W> {
    #[inline]
    pub fn slack(&self, c: &CostMatrix<W>, i: usize, j: usize) -> W {
        c.get(i, j) - self.la[i] - self.lb[j]
    }

    /// First pair `(i, j)` with `la[i] + lb[j] > w[i][j] + eps`, if any.
    pub fn first_infeasible(&self, c: &CostMatrix<W>, eps: W) -> Option<(usize, usize)> {
        (0..c.n())
            .flat_map(|i| (0..c.n()).map(move |j| (i, j)))
            .find(|&(i, j)| self.slack(c, i, j) < -eps)
    }

    pub fn is_feasible(&self, c: &CostMatrix<W>, eps: W) -> bool {
        self.first_infeasible(c, eps).is_none()
    }

    /// `sum la + sum lb`, the dual objective.
    pub fn dual_value(&self) -> W {
        self.la.iter().copied().sum::<W>() + self.lb.iter().copied().sum::<W>()
    }
}

/// A (partial) matching between rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching<W> {
    pub mate_a: Vec<Option<usize>>,
    pub mate_b: Vec<Option<usize>>,
    pub weight: W,
}

impl<W: Weight> Matching<W> {
    pub fn empty(n: usize) -> Self {
        Self {
            mate_a: vec![None; n],
            mate_b: vec![None; n],
            weight: W::ZERO,
        }
    }

    pub fn size(&self) -> usize {
        self.mate_a.iter().flatten().count()
    }

    pub fn is_perfect(&self) -> bool {
        self.mate_a.iter().all(Option::is_some)
    }

    /// Column of every row; `None` unless the matching is perfect.
    pub fn assignment(&self) -> Option<Vec<usize>> {
        self.mate_a.iter().copied().collect()
    }

    /// Matched `(row, col)` edges in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate_a
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|j| (i, j)))
    }

    fn recompute_weight(&mut self, c: &CostMatrix<W>) {
        self.weight = self.edges().map(|(i, j)| c.get(i, j)).sum();
    }

    /// Flips the alternating path that ends at the free column `end` and
    /// leads back through `state.parent` to the tree root.
    ///
    /// The path is checked in full before anything is modified.
    pub fn augment(
        &mut self,
        c: &CostMatrix<W>,
        state: &SearchState<W>,
        end: usize,
    ) -> Result<(), HungarianError> {
        let n = self.mate_a.len();
        if end >= n || self.mate_b[end].is_some() {
            return Err(HungarianError::BadPath("terminal column is not free"));
        }
        if self.mate_a[state.root].is_some() {
            return Err(HungarianError::BadPath("root row is not free"));
        }
        let mut path = Vec::new();
        let mut col = end;
        loop {
            if path.len() > n {
                return Err(HungarianError::BadPath("parent links form a cycle"));
            }
            let row =
                state.parent[col].ok_or(HungarianError::BadPath("column has no parent row"))?;
            if !state.in_s[row] {
                return Err(HungarianError::BadPath("parent row is outside S"));
            }
            path.push((row, col));
            if row == state.root {
                break;
            }
            col = match self.mate_a[row] {
                Some(prev) if state.in_t[prev] && self.mate_b[prev] == Some(row) => prev,
                _ => return Err(HungarianError::BadPath("path is not alternating")),
            };
        }
        for (row, col) in path {
            self.mate_a[row] = Some(col);
            self.mate_b[col] = Some(row);
        }
        self.recompute_weight(c);
        Ok(())
    }
}

/// Alternating-tree bookkeeping for one phase of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState<W> {
    pub root: usize,
    /// Rows in the tree (S).
    pub in_s: Vec<bool>,
    /// Columns in the tree (T).
    pub in_t: Vec<bool>,
    /// `min over i in S of slack(i, j)`, maintained for columns outside T.
    pub slack: Vec<W>,
    /// Row of S attaining `slack[j]`.
    pub slack_arg: Vec<usize>,
    /// Row through which each reached column entered the tree.
    pub parent: Vec<Option<usize>>,
}

impl<W: Weight> SearchState<W> {
    pub fn new(c: &CostMatrix<W>, l: &Labeling<W>, root: usize) -> Self {
        let n = c.n();
        let mut in_s = vec![false; n];
        in_s[root] = true;
        Self {
            root,
            in_s,
            in_t: vec![false; n],
            slack: (0..n).map(|j| l.slack(c, root, j)).collect(),
            slack_arg: vec![root; n],
            parent: vec![None; n],
        }
    }

    fn add_row(&mut self, c: &CostMatrix<W>, l: &Labeling<W>, row: usize) {
        self.in_s[row] = true;
        for j in 0..c.n() {
            if !self.in_t[j] {
                let s = l.slack(c, row, j);
                if s < self.slack[j] {
                    self.slack[j] = s;
                    self.slack_arg[j] = row;
                }
            }
        }
    }

    /// Lowest-index column outside T whose slack is within `eps` of zero.
    fn tight_column(&self, eps: W) -> Option<usize> {
        (0..self.slack.len()).find(|&j| !self.in_t[j] && self.slack[j] <= eps)
    }

    /// Compares the incremental slack array against direct recomputation.
    fn check_slack(
        &self,
        c: &CostMatrix<W>,
        l: &Labeling<W>,
        eps: W,
    ) -> Result<(), HungarianError> {
        let n = c.n();
        for j in (0..n).filter(|&j| !self.in_t[j]) {
            let direct = (0..n)
                .filter(|&i| self.in_s[i])
                .map(|i| l.slack(c, i, j))
                .fold(None, |m: Option<W>, s| Some(m.map_or(s, |m| m.min_of(s))))
                .expect("S always holds the root");
            let drift = (direct - self.slack[j]).abs();
            if drift > eps || self.slack[j] < -eps {
                return Err(HungarianError::InvariantViolated {
                    invariant: Invariant::SlackConsistency,
                    detail: format!("column {j}: stored {} vs direct {direct}", self.slack[j]),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tightness tolerance for float weights; ignored for integers.
    pub epsilon: Option<f64>,
    /// Re-verify every labeling, slack and tightness invariant as the
    /// search runs. Adds `O(n^2)` work per label update.
    pub check_invariants: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

/// Operation counts for one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub label_updates: u64,
    pub augmentations: u64,
    pub tree_growths: u64,
    pub invariant_checks: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<W> {
    pub matching: Matching<W>,
    pub labeling: Labeling<W>,
    pub stats: SolveStats,
}

/// `lb = 0` and `la[i]` = row minimum.
pub fn initial_labeling<W: Weight>(c: &CostMatrix<W>) -> Labeling<W> {
    let la = (0..c.n())
        .map(|i| c.row(i).iter().copied().reduce(W::min_of).expect("n >= 1"))
        .collect();
    Labeling {
        la,
        lb: vec![W::ZERO; c.n()],
    }
}

/// Shifts labels by the smallest slack between S and the columns outside T:
/// `+shift` on rows of S, `-shift` on columns of T.
///
/// Returns the new labeling together with the shift.
pub fn update_labels<W: Weight>(
    l: &Labeling<W>,
    in_s: &[bool],
    in_t: &[bool],
    c: &CostMatrix<W>,
    eps: W,
) -> Result<(Labeling<W>, W), HungarianError> {
    let n = c.n();
    let shift = (0..n)
        .filter(|&i| in_s[i])
        .flat_map(|i| (0..n).filter(|&j| !in_t[j]).map(move |j| (i, j)))
        .map(|(i, j)| l.slack(c, i, j))
        .reduce(W::min_of)
        .ok_or(HungarianError::NoColumnOutsideTree)?;
    if shift < -eps {
        return Err(HungarianError::NegativeShift(shift.to_string()));
    }
    let mut next = l.clone();
    for i in (0..n).filter(|&i| in_s[i]) {
        next.la[i] += shift;
    }
    for j in (0..n).filter(|&j| in_t[j]) {
        next.lb[j] -= shift;
    }
    Ok((next, shift))
}

/// Minimum-weight perfect matching with default options.
pub fn solve_assignment<W: Weight>(c: &CostMatrix<W>) -> Assignment<W> {
    solve_assignment_with(
        c,
        &SolverOptions {
            check_invariants: false,
            ..SolverOptions::default()
        },
    )
    .expect("solver without invariant checks cannot fail on a valid matrix")
}

pub fn solve_assignment_with<W: Weight>(
    c: &CostMatrix<W>,
    opts: &SolverOptions,
) -> Result<Assignment<W>, HungarianError> {
    let n = c.n();
    let eps = W::tolerance(c.max_abs(), opts.epsilon);
    let mut l = initial_labeling(c);
    let mut m = Matching::empty(n);
    let mut stats = SolveStats::default();

    while let Some(root) = m.mate_a.iter().position(Option::is_none) {
        let mut st = SearchState::new(c, &l, root);
        let end = loop {
            let u = match st.tight_column(eps) {
                Some(u) => u,
                None => {
                    let (shift, _) = (0..n)
                        .filter(|&j| !st.in_t[j])
                        .map(|j| (st.slack[j], j))
                        .reduce(|a, b| if b.0 < a.0 { b } else { a })
                        .ok_or(HungarianError::NoColumnOutsideTree)?;
                    if shift < -eps {
                        return Err(HungarianError::NegativeShift(shift.to_string()));
                    }
                    for i in 0..n {
                        if st.in_s[i] {
                            l.la[i] += shift;
                        }
                    }
                    for j in 0..n {
                        if st.in_t[j] {
                            l.lb[j] -= shift;
                        } else {
                            st.slack[j] -= shift;
                        }
                    }
                    stats.label_updates += 1;
                    if opts.check_invariants {
                        check_feasible(c, &l, eps)?;
                        st.check_slack(c, &l, eps)?;
                        check_matched_tight(c, &l, &m, eps)?;
                        stats.invariant_checks += 3;
                    }
                    continue;
                }
            };
            st.parent[u] = Some(st.slack_arg[u]);
            match m.mate_b[u] {
                Some(z) => {
                    st.in_t[u] = true;
                    st.add_row(c, &l, z);
                    stats.tree_growths += 1;
                    if opts.check_invariants {
                        st.check_slack(c, &l, eps)?;
                        stats.invariant_checks += 1;
                    }
                }
                None => break u,
            }
        };
        let before = m.size();
        m.augment(c, &st, end)?;
        debug_assert_eq!(m.size(), before + 1);
        stats.augmentations += 1;
        if opts.check_invariants {
            check_matched_tight(c, &l, &m, eps)?;
            stats.invariant_checks += 1;
        }
    }

    if opts.check_invariants {
        check_feasible(c, &l, eps)?;
        let gap = (l.dual_value() - m.weight).abs();
        let allowed = if W::EXACT {
            W::ZERO
        } else {
            eps.checked_scale(2 * n).unwrap_or(eps)
        };
        if gap > allowed {
            return Err(HungarianError::InvariantViolated {
                invariant: Invariant::DualityGap,
                detail: format!("dual {} vs primal {}", l.dual_value(), m.weight),
            });
        }
        stats.invariant_checks += 2;
    }
    Ok(Assignment {
        matching: m,
        labeling: l,
        stats,
    })
}

fn check_feasible<W: Weight>(
    c: &CostMatrix<W>,
    l: &Labeling<W>,
    eps: W,
) -> Result<(), HungarianError> {
    match l.first_infeasible(c, eps) {
        None => Ok(()),
        Some((i, j)) => Err(HungarianError::InvariantViolated {
            invariant: Invariant::LabelingFeasibility,
            detail: format!("la[{i}] + lb[{j}] exceeds w = {}", c.get(i, j)),
        }),
    }
}

fn check_matched_tight<W: Weight>(
    c: &CostMatrix<W>,
    l: &Labeling<W>,
    m: &Matching<W>,
    eps: W,
) -> Result<(), HungarianError> {
    for (i, j) in m.edges() {
        if l.slack(c, i, j).abs() > eps {
            return Err(HungarianError::InvariantViolated {
                invariant: Invariant::MatchedTightness,
                detail: format!("edge ({i}, {j}) has slack {}", l.slack(c, i, j)),
            });
        }
    }
    Ok(())
}
