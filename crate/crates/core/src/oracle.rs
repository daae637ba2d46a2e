//! Exhaustive reference solvers and a solution checker.
//!
//! Nothing here depends on the gadget or the Hungarian solver; they are
//! plain enumerations used to certify those at small sizes.

use std::fmt;

use thiserror::Error;

use crate::hungarian::CostMatrix;
use crate::model::{MmdcInstance, Side};
use crate::reduction::MmdcSolution;
use crate::weight::Weight;

pub const MAX_ASSIGNMENT_N: usize = 9;
pub const MAX_PAIR_CELLS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("assignment oracle is limited to n <= {MAX_ASSIGNMENT_N}, got {0}")]
    MatrixTooLarge(usize),
    #[error("matching oracle is limited to s * t <= {MAX_PAIR_CELLS}, got {0}")]
    InstanceTooLarge(usize),
}

/// Minimum over all `n!` permutations. Permutations are visited in
/// lexicographic order and only a strictly smaller weight replaces the
/// incumbent, so the returned argmin is the lexicographically smallest.
pub fn brute_force_assignment<W: Weight>(
    c: &CostMatrix<W>,
) -> Result<(W, Vec<usize>), OracleError> {
    let n = c.n();
    if n > MAX_ASSIGNMENT_N {
        return Err(OracleError::MatrixTooLarge(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (c.assignment_weight(&perm), perm.clone());
    while next_permutation(&mut perm) {
        let w = c.assignment_weight(&perm);
        if w < best.0 {
            best = (w, perm.clone());
        }
    }
    Ok(best)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome<W> {
    Optimal { cost: W, pairs: Vec<(usize, usize)> },
    Infeasible,
}

impl<W: Copy> OracleOutcome<W> {
    pub fn cost(&self) -> Option<W> {
        match self {
            OracleOutcome::Optimal { cost, .. } => Some(*cost),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Enumerates every subset of the `s * t` candidate pairs.
///
/// Subsets whose size lies outside `[max(sum alpha, sum beta), min(sum cap)]`
/// are skipped before their degrees are computed. Among optimal subsets the
/// lexicographically smallest sorted pair list is returned.
pub fn brute_force_mmdc<W: Weight>(
    instance: &MmdcInstance<W>,
) -> Result<OracleOutcome<W>, OracleError> {
    let (s, t) = (instance.s(), instance.t());
    let cells = s * t;
    if cells > MAX_PAIR_CELLS {
        return Err(OracleError::InstanceTooLarge(cells));
    }
    let min_size = instance
        .alpha()
        .iter()
        .sum::<usize>()
        .max(instance.beta().iter().sum());
    let max_size = instance
        .alpha_cap()
        .iter()
        .sum::<usize>()
        .min(instance.beta_cap().iter().sum());

    let mut best: Option<(W, Vec<(usize, usize)>)> = None;
    let mut deg_a = vec![0usize; s];
    let mut deg_b = vec![0usize; t];
    for mask in 0u32..(1u32 << cells) {
        let size = mask.count_ones() as usize;
        if size < min_size || size > max_size {
            continue;
        }
        deg_a.iter_mut().for_each(|d| *d = 0);
        deg_b.iter_mut().for_each(|d| *d = 0);
        let mut cost = W::ZERO;
        for cell in (0..cells).filter(|&k| mask >> k & 1 == 1) {
            let (i, j) = (cell / t, cell % t);
            deg_a[i] += 1;
            deg_b[j] += 1;
            cost += instance.cost(i, j);
        }
        let ok_a =
            (0..s).all(|i| instance.alpha()[i] <= deg_a[i] && deg_a[i] <= instance.alpha_cap()[i]);
        let ok_b =
            (0..t).all(|j| instance.beta()[j] <= deg_b[j] && deg_b[j] <= instance.beta_cap()[j]);
        if !(ok_a && ok_b) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((c, _)) if cost < *c => true,
            Some((c, p)) if cost == *c => {
                // cell order is (i, j) lexicographic, so this list is already sorted
                let pairs = mask_pairs(mask, cells, t);
                pairs < *p
            }
            _ => false,
        };
        if better {
            best = Some((cost, mask_pairs(mask, cells, t)));
        }
    }
    Ok(match best {
        Some((cost, pairs)) => OracleOutcome::Optimal { cost, pairs },
        None => OracleOutcome::Infeasible,
    })
}

fn mask_pairs(mask: u32, cells: usize, t: usize) -> Vec<(usize, usize)> {
    (0..cells)
        .filter(|&k| mask >> k & 1 == 1)
        .map(|k| (k / t, k % t))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionIssue {
    PairOutOfRange {
        i: usize,
        j: usize,
    },
    DuplicatePair {
        i: usize,
        j: usize,
    },
    BelowDemand {
        side: Side,
        index: usize,
        degree: usize,
        demand: usize,
    },
    AboveCapacity {
        side: Side,
        index: usize,
        degree: usize,
        cap: usize,
    },
    DegreeVectorMismatch {
        side: Side,
    },
    CostMismatch {
        stated: String,
        actual: String,
    },
}

impl fmt::Display for SolutionIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionIssue::PairOutOfRange { i, j } => write!(f, "pair ({i}, {j}) is out of range"),
            SolutionIssue::DuplicatePair { i, j } => {
                write!(f, "pair ({i}, {j}) appears more than once")
            }
            SolutionIssue::BelowDemand {
                side,
                index,
                degree,
                demand,
            } => write!(
                f,
                "{side}{index} has degree {degree} below its demand {demand}"
            ),
            SolutionIssue::AboveCapacity {
                side,
                index,
                degree,
                cap,
            } => write!(
                f,
                "{side}{index} has degree {degree} above its capacity {cap}"
            ),
            SolutionIssue::DegreeVectorMismatch { side } => {
                write!(
                    f,
                    "stated degree vector for side {side} does not match the pairs"
                )
            }
            SolutionIssue::CostMismatch { stated, actual } => {
                write!(
                    f,
                    "stated cost {stated} differs from recomputed cost {actual}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub issues: Vec<SolutionIssue>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  {issue}")?;
        }
        Ok(())
    }
}

/// Checks a claimed solution against the instance from scratch.
///
/// Costs are compared exactly for integer weights and to a relative `1e-9`
/// for floats (summation order may differ).
pub fn verify_solution<W: Weight>(
    instance: &MmdcInstance<W>,
    sol: &MmdcSolution<W>,
) -> VerifyReport {
    let (s, t) = (instance.s(), instance.t());
    let mut issues = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut deg_a = vec![0; s];
    let mut deg_b = vec![0; t];
    let mut cost = W::ZERO;
    for &(i, j) in &sol.pairs {
        if i >= s || j >= t {
            issues.push(SolutionIssue::PairOutOfRange { i, j });
            continue;
        }
        if !seen.insert((i, j)) {
            issues.push(SolutionIssue::DuplicatePair { i, j });
        }
        deg_a[i] += 1;
        deg_b[j] += 1;
        cost += instance.cost(i, j);
    }
    for (side, deg, demand, cap) in [
        (Side::A, &deg_a, instance.alpha(), instance.alpha_cap()),
        (Side::B, &deg_b, instance.beta(), instance.beta_cap()),
    ] {
        for index in 0..deg.len() {
            if deg[index] < demand[index] {
                issues.push(SolutionIssue::BelowDemand {
                    side,
                    index,
                    degree: deg[index],
                    demand: demand[index],
                });
            }
            if deg[index] > cap[index] {
                issues.push(SolutionIssue::AboveCapacity {
                    side,
                    index,
                    degree: deg[index],
                    cap: cap[index],
                });
            }
        }
    }
    if sol.deg_a != deg_a {
        issues.push(SolutionIssue::DegreeVectorMismatch { side: Side::A });
    }
    if sol.deg_b != deg_b {
        issues.push(SolutionIssue::DegreeVectorMismatch { side: Side::B });
    }
    let tol = if W::EXACT {
        W::ZERO
    } else {
        W::tolerance(cost.abs().max_of(sol.cost.abs()), Some(1e-9))
    };
    if (cost - sol.cost).abs() > tol {
        issues.push(SolutionIssue::CostMismatch {
            stated: sol.cost.to_string(),
            actual: cost.to_string(),
        });
    }
    VerifyReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(
        alpha: &[usize],
        alpha_cap: &[usize],
        beta: &[usize],
        beta_cap: &[usize],
        cost: Vec<Vec<i64>>,
    ) -> MmdcInstance<i64> {
        MmdcInstance::new(
            alpha.to_vec(),
            alpha_cap.to_vec(),
            beta.to_vec(),
            beta_cap.to_vec(),
            cost,
        )
        .unwrap()
    }

    #[test]
    fn permutations_are_lexicographic() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn assignment_oracle_examples() {
        let c = CostMatrix::from_rows(&[vec![7i64]]).unwrap();
        assert_eq!(brute_force_assignment(&c).unwrap(), (7, vec![0]));
        let c = CostMatrix::from_rows(&[vec![0i64, 1], vec![1, 0]]).unwrap();
        assert_eq!(brute_force_assignment(&c).unwrap(), (0, vec![0, 1]));
        let c = CostMatrix::from_rows(&[vec![4i64, 1, 3], vec![2, 0, 5], vec![3, 2, 2]]).unwrap();
        assert_eq!(brute_force_assignment(&c).unwrap(), (5, vec![1, 0, 2]));
    }

    #[test]
    fn assignment_oracle_size_cap() {
        let c = CostMatrix::new(10, vec![0i64; 100]).unwrap();
        assert_eq!(
            brute_force_assignment(&c),
            Err(OracleError::MatrixTooLarge(10))
        );
    }

    #[test]
    fn mmdc_oracle_examples() {
        let x = inst(&[1], &[1], &[1], &[1], vec![vec![5]]);
        assert_eq!(
            brute_force_mmdc(&x).unwrap(),
            OracleOutcome::Optimal {
                cost: 5,
                pairs: vec![(0, 0)]
            }
        );
        let x = inst(
            &[1, 1],
            &[3, 3],
            &[1, 1, 1],
            &[2, 2, 2],
            vec![vec![1, 2, 3], vec![4, 5, 6]],
        );
        assert_eq!(
            brute_force_mmdc(&x).unwrap(),
            OracleOutcome::Optimal {
                cost: 9,
                pairs: vec![(0, 0), (0, 1), (1, 2)]
            }
        );
        let x = inst(
            &[2, 2],
            &[2, 2],
            &[0, 0],
            &[1, 1],
            vec![vec![0, 0], vec![0, 0]],
        );
        assert_eq!(brute_force_mmdc(&x).unwrap(), OracleOutcome::Infeasible);
    }

    #[test]
    fn mmdc_oracle_size_cap() {
        let x = inst(&[0; 5], &[1; 5], &[0; 5], &[1; 5], vec![vec![0; 5]; 5]);
        assert_eq!(brute_force_mmdc(&x), Err(OracleError::InstanceTooLarge(25)));
    }

    #[test]
    fn verify_accepts_valid_solution() {
        let x = inst(
            &[1, 1],
            &[1, 1],
            &[1, 1],
            &[1, 1],
            vec![vec![1, 9], vec![9, 1]],
        );
        let sol = MmdcSolution::from_pairs(&x, vec![(1, 1), (0, 0)]);
        assert!(verify_solution(&x, &sol).passed());
    }

    #[test]
    fn verify_reports_missing_demand() {
        let x = inst(
            &[1, 1],
            &[1, 1],
            &[0, 0],
            &[1, 1],
            vec![vec![1, 9], vec![9, 1]],
        );
        let sol = MmdcSolution::from_pairs(&x, vec![(0, 0)]);
        let report = verify_solution(&x, &sol);
        assert_eq!(
            report.issues,
            vec![SolutionIssue::BelowDemand {
                side: Side::A,
                index: 1,
                degree: 0,
                demand: 1
            }]
        );
    }

    #[test]
    fn verify_reports_cost_mismatch() {
        let x = inst(&[1], &[1], &[1], &[1], vec![vec![5]]);
        let mut sol = MmdcSolution::from_pairs(&x, vec![(0, 0)]);
        sol.cost = 4;
        let report = verify_solution(&x, &sol);
        assert!(matches!(
            report.issues.as_slice(),
            [SolutionIssue::CostMismatch { .. }]
        ));
    }

    #[test]
    fn verify_reports_structural_problems() {
        let x = inst(
            &[0, 0],
            &[2, 2],
            &[0, 0],
            &[2, 2],
            vec![vec![1, 1], vec![1, 1]],
        );
        let sol = MmdcSolution {
            pairs: vec![(0, 0), (0, 0), (3, 1)],
            deg_a: vec![2, 0],
            deg_b: vec![2, 0],
            cost: 2,
            certificate: None,
        };
        let report = verify_solution(&x, &sol);
        assert_eq!(
            report.issues,
            vec![
                SolutionIssue::DuplicatePair { i: 0, j: 0 },
                SolutionIssue::PairOutOfRange { i: 3, j: 1 },
            ]
        );
        let short = MmdcSolution {
            deg_b: vec![1, 0],
            ..sol
        };
        assert!(verify_solution(&x, &short)
            .issues
            .contains(&SolutionIssue::DegreeVectorMismatch { side: Side::B }));
    }
}
