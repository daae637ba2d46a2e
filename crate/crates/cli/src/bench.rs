//! Timing sweep over gadget sizes and cost ranges.
//!
//! For each target gadget size the sweep picks the square instance shape
//! `k x k` whose gadget comes closest to the target, draws `instances`
//! uniform instances per `(target, max_cost)` cell and solves each of them
//! `reps` times after one untimed warm-up solve. Repetitions of one instance
//! repeat its operation counts exactly; only the wall times vary.

use std::time::Instant;

use mmdc_core::reduction::gadget_size;
use mmdc_core::{
    build_gadget_with, extract_solution, normalize, solve_assignment_with, MmdcError, MmdcInstance,
    PenaltyRule, SolverOptions,
};
use serde::Serialize;
use thiserror::Error;

use crate::format::AnyInstance;
use crate::generate::{uniform, BoundParams, GenError, UniformParams};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("the sweep needs at least one size, cost range, instance and repetition")]
    EmptySweep,
    #[error("target size must be positive")]
    ZeroTarget,
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] MmdcError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    /// Target gadget sizes N.
    pub sizes: Vec<usize>,
    /// Costs are drawn from `0..=max_cost`, one sweep cell per entry.
    pub max_costs: Vec<i64>,
    pub seed: u64,
    /// Distinct instances per cell.
    pub instances: usize,
    /// Solves per instance.
    pub reps: usize,
    pub max_bound: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            sizes: vec![100, 200, 400],
            max_costs: vec![1, 1000],
            seed: 0,
            instances: 5,
            reps: 3,
            max_bound: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub target: usize,
    pub max_cost: i64,
    pub instance: usize,
    pub rep: usize,
    pub s: usize,
    pub t: usize,
    pub gadget_n: usize,
    pub label_updates: u64,
    pub augmentations: u64,
    pub tree_growths: u64,
    /// Whole pipeline: normalize, gadget, assignment, extraction.
    pub seconds: f64,
    /// Assignment phase alone.
    pub assign_seconds: f64,
}

fn cell_seed(seed: u64, target: usize, max_cost: i64, instance: usize) -> u64 {
    seed ^ (target as u64).rotate_left(32)
        ^ (max_cost as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (instance as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

fn draw(
    k: usize,
    max_bound: usize,
    max_cost: i64,
    seed: u64,
) -> Result<MmdcInstance<i64>, GenError> {
    let file = uniform(&UniformParams {
        bounds: BoundParams {
            s: k,
            t: k,
            min_demand: 0,
            max_bound,
        },
        max_cost,
        seed,
    })?;
    match file.instance {
        AnyInstance::Int(x) => Ok(x),
        AnyInstance::Float(_) => unreachable!("uniform instances are integral"),
    }
}

fn normalized_size(x: &MmdcInstance<i64>) -> usize {
    normalize(x)
        .ok()
        .and_then(|n| gadget_size(&n.instance))
        .unwrap_or(usize::MAX)
}

/// The instance whose gadget size is closest to `target`, smaller `k` on ties.
pub fn instance_near(
    target: usize,
    max_bound: usize,
    max_cost: i64,
    seed: u64,
) -> Result<MmdcInstance<i64>, BenchError> {
    if target == 0 {
        return Err(BenchError::ZeroTarget);
    }
    let mut best: Option<(usize, MmdcInstance<i64>)> = None;
    for k in 1.. {
        let x = draw(k, max_bound, max_cost, seed)?;
        let n = normalized_size(&x);
        let gap = n.abs_diff(target);
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, x));
        }
        if n > target {
            break;
        }
    }
    Ok(best.expect("loop runs at least once").1)
}

struct Job {
    target: usize,
    max_cost: i64,
    instance: usize,
    x: MmdcInstance<i64>,
}

fn timed_solve(job: &Job, rep: usize, opts: &SolverOptions) -> Result<BenchRow, BenchError> {
    let start = Instant::now();
    let norm = normalize(&job.x).map_err(MmdcError::from)?;
    let g = build_gadget_with(&norm, PenaltyRule::default()).map_err(MmdcError::from)?;
    let assign_start = Instant::now();
    let a = solve_assignment_with(&g.cost, opts).map_err(MmdcError::from)?;
    let assign_seconds = assign_start.elapsed().as_secs_f64();
    extract_solution(&g, &a.matching, &job.x)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchRow {
        target: job.target,
        max_cost: job.max_cost,
        instance: job.instance,
        rep,
        s: job.x.s(),
        t: job.x.t(),
        gadget_n: g.n(),
        label_updates: a.stats.label_updates,
        augmentations: a.stats.augmentations,
        tree_growths: a.stats.tree_growths,
        seconds,
        assign_seconds,
    })
}

/// Runs are interleaved, one repetition of every instance per round, so a
/// burst of machine noise spreads across all cells. Rows come back in sweep
/// order regardless.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, BenchError> {
    if spec.sizes.is_empty() || spec.max_costs.is_empty() || spec.instances == 0 || spec.reps == 0 {
        return Err(BenchError::EmptySweep);
    }
    let opts = SolverOptions {
        epsilon: None,
        check_invariants: false,
    };
    let mut jobs = Vec::new();
    for &target in &spec.sizes {
        for &max_cost in &spec.max_costs {
            for instance in 0..spec.instances {
                let seed = cell_seed(spec.seed, target, max_cost, instance);
                let x = instance_near(target, spec.max_bound, max_cost, seed)?;
                jobs.push(Job {
                    target,
                    max_cost,
                    instance,
                    x,
                });
            }
        }
    }
    // untimed warm-up round
    for job in &jobs {
        timed_solve(job, 0, &opts)?;
    }
    let mut runs: Vec<Vec<BenchRow>> = jobs.iter().map(|_| Vec::with_capacity(spec.reps)).collect();
    for rep in 0..spec.reps {
        for (job, out) in jobs.iter().zip(&mut runs) {
            out.push(timed_solve(job, rep, &opts)?);
        }
    }
    Ok(runs.into_iter().flatten().collect())
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows always serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

/// Median over all runs of a `(target, max_cost)` cell, in sweep order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMedian {
    pub target: usize,
    pub max_cost: i64,
    /// Mean gadget size over the cell's instances.
    pub gadget_n: f64,
    pub seconds: f64,
}

pub fn medians(rows: &[BenchRow]) -> Vec<CellMedian> {
    let mut out = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        times.push(r.seconds);
        sizes.push(r.gadget_n);
        let last_of_cell = rows
            .get(k + 1)
            .is_none_or(|next| (next.target, next.max_cost) != (r.target, r.max_cost));
        if last_of_cell {
            times.sort_by(f64::total_cmp);
            let m = times.len();
            let median = if m % 2 == 1 {
                times[m / 2]
            } else {
                (times[m / 2 - 1] + times[m / 2]) / 2.0
            };
            out.push(CellMedian {
                target: r.target,
                max_cost: r.max_cost,
                gadget_n: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
                seconds: median,
            });
            times.clear();
            sizes.clear();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchSpec {
        BenchSpec {
            sizes: vec![20, 40],
            max_costs: vec![1, 100],
            seed: 5,
            instances: 2,
            reps: 3,
            max_bound: 2,
        }
    }

    #[test]
    fn repetitions_repeat_operation_counts() {
        let rows = run_bench(&small()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 3);
        for cell in rows.chunks(3) {
            for r in cell {
                assert_eq!(
                    (r.gadget_n, r.label_updates, r.augmentations, r.tree_growths),
                    (
                        cell[0].gadget_n,
                        cell[0].label_updates,
                        cell[0].augmentations,
                        cell[0].tree_growths
                    )
                );
                assert_eq!(r.augmentations, r.gadget_n as u64);
            }
        }
    }

    #[test]
    fn sizes_land_near_their_targets() {
        for target in [50, 100, 200] {
            let x = instance_near(target, 2, 9, 1).unwrap();
            let n = normalized_size(&x);
            assert!(n.abs_diff(target) * 5 <= target, "target {target}, got {n}");
        }
    }

    #[test]
    fn csv_has_header_and_one_line_per_run() {
        let rows = run_bench(&small()).unwrap();
        let text = to_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("target,max_cost,instance,rep,s,t,gadget_n,label_updates,augmentations,tree_growths,seconds,assign_seconds")
        );
        assert_eq!(lines.count(), rows.len());
    }

    #[test]
    fn medians_group_by_cell() {
        let row = |target, seconds| BenchRow {
            target,
            max_cost: 1,
            instance: 0,
            rep: 0,
            s: 1,
            t: 1,
            gadget_n: target,
            label_updates: 0,
            augmentations: 0,
            tree_growths: 0,
            seconds,
            assign_seconds: seconds,
        };
        let rows = [
            row(10, 3.0),
            row(10, 1.0),
            row(10, 2.0),
            row(20, 4.0),
            row(20, 6.0),
        ];
        let cell = |target, seconds| CellMedian {
            target,
            max_cost: 1,
            gadget_n: target as f64,
            seconds,
        };
        assert_eq!(medians(&rows), vec![cell(10, 2.0), cell(20, 5.0)]);
    }

    #[test]
    fn empty_sweeps_are_rejected() {
        for spec in [
            BenchSpec { reps: 0, ..small() },
            BenchSpec {
                instances: 0,
                ..small()
            },
        ] {
            assert!(matches!(run_bench(&spec), Err(BenchError::EmptySweep)));
        }
    }
}
