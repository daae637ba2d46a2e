//! Seeded instance generators.
//!
//! Both generators draw every element's capacity from
//! `[min_demand, max_bound]` and its demand from `[min_demand, capacity]`,
//! redrawing until the instance is feasible. Output depends only on the
//! parameters and the seed.

use mmdc_core::{validate, MmdcInstance, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::format::{AnyInstance, InstanceFile, Metadata};

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("both sides need at least one element")]
    EmptySide,
    #[error("min_demand {min_demand} exceeds max_bound {max_bound}")]
    BoundsInverted { min_demand: usize, max_bound: usize },
    #[error("no instance with these bounds can be feasible: {0}")]
    NeverFeasible(String),
    #[error("box size must be positive and finite")]
    BadBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub s: usize,
    pub t: usize,
    pub min_demand: usize,
    pub max_bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformParams {
    pub bounds: BoundParams,
    /// Costs are drawn uniformly from `0..=max_cost`.
    pub max_cost: i64,
    pub seed: u64,
}

/// Points drawn uniformly from the square `[0, box_size]^2`; the cost of a
/// pair is the distance between its points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSetSpec {
    pub bounds: BoundParams,
    pub box_size: f64,
    pub seed: u64,
}

type Bounds = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>);

impl BoundParams {
    fn check(&self) -> Result<(), GenError> {
        if self.s == 0 || self.t == 0 {
            return Err(GenError::EmptySide);
        }
        if self.min_demand > self.max_bound {
            return Err(GenError::BoundsInverted {
                min_demand: self.min_demand,
                max_bound: self.max_bound,
            });
        }
        // every draw is at least as constrained as this one
        let loosest = self.loosest();
        let probe = MmdcInstance::new(
            loosest.0,
            loosest.1,
            loosest.2,
            loosest.3,
            vec![vec![0i64; self.t]; self.s],
        )
        .expect("loosest bounds are well-formed");
        let report = validate(&probe);
        if !report.feasible() {
            return Err(GenError::NeverFeasible(report.to_string()));
        }
        Ok(())
    }

    fn loosest(&self) -> Bounds {
        (
            vec![self.min_demand; self.s],
            vec![self.max_bound; self.s],
            vec![self.min_demand; self.t],
            vec![self.max_bound; self.t],
        )
    }

    fn draw_side(&self, rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>) {
        let caps: Vec<usize> = (0..n)
            .map(|_| rng.random_range(self.min_demand..=self.max_bound))
            .collect();
        let demands = caps
            .iter()
            .map(|&c| rng.random_range(self.min_demand..=c))
            .collect();
        (demands, caps)
    }

    /// Redraws bounds until `feasible` accepts them, falling back to the
    /// loosest bounds after `MAX_ATTEMPTS` draws.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Bounds {
        for _ in 0..MAX_ATTEMPTS {
            let (a, ac) = self.draw_side(rng, self.s);
            let (b, bc) = self.draw_side(rng, self.t);
            let probe = MmdcInstance::new(
                a.clone(),
                ac.clone(),
                b.clone(),
                bc.clone(),
                vec![vec![0i64; self.t]; self.s],
            )
            .expect("drawn bounds are well-formed");
            if validate(&probe).feasible() {
                return (a, ac, b, bc);
            }
        }
        self.loosest()
    }
}

fn assemble<W: Weight>(bounds: Bounds, cost: Vec<Vec<W>>) -> MmdcInstance<W> {
    MmdcInstance::new(bounds.0, bounds.1, bounds.2, bounds.3, cost)
        .expect("generated instances are well-formed")
}

pub fn uniform(p: &UniformParams) -> Result<InstanceFile, GenError> {
    p.bounds.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let bounds = p.bounds.draw(&mut rng);
    let cost = (0..p.bounds.s)
        .map(|_| {
            (0..p.bounds.t)
                .map(|_| rng.random_range(0..=p.max_cost.max(0)))
                .collect()
        })
        .collect();
    Ok(InstanceFile {
        instance: AnyInstance::Int(assemble(bounds, cost)),
        metadata: Metadata {
            generator: Some("uniform".into()),
            seed: Some(p.seed),
            ..Metadata::default()
        },
    })
}

pub fn euclidean(spec: &PointSetSpec) -> Result<InstanceFile, GenError> {
    if !(spec.box_size.is_finite() && spec.box_size > 0.0) {
        return Err(GenError::BadBox);
    }
    spec.bounds.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let point = |rng: &mut ChaCha8Rng| {
        [
            rng.random_range(0.0..=spec.box_size),
            rng.random_range(0.0..=spec.box_size),
        ]
    };
    let points_a: Vec<[f64; 2]> = (0..spec.bounds.s).map(|_| point(&mut rng)).collect();
    let points_b: Vec<[f64; 2]> = (0..spec.bounds.t).map(|_| point(&mut rng)).collect();
    let bounds = spec.bounds.draw(&mut rng);
    Ok(InstanceFile {
        instance: AnyInstance::Float(assemble(bounds, distance_matrix(&points_a, &points_b))),
        metadata: Metadata {
            generator: Some("euclidean".into()),
            seed: Some(spec.seed),
            box_size: Some(spec.box_size),
            points_a: Some(points_a),
            points_b: Some(points_b),
        },
    })
}

pub fn distance_matrix(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|p| b.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).collect())
        .collect()
}
