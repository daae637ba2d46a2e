//! Minimum-cost many-to-many matching with per-element demands and
//! capacities, solved by reduction to a single minimum-weight perfect
//! matching.
//!
//! ```
//! use mmdc_core::{solve_mmdc, MmdcInstance};
//!
//! let instance = MmdcInstance::new(
//!     vec![1, 1],
//!     vec![3, 3],
//!     vec![1, 1, 1],
//!     vec![2, 2, 2],
//!     vec![vec![1i64, 2, 3], vec![4, 5, 6]],
//! )
//! .unwrap();
//! let solution = solve_mmdc(&instance).unwrap();
//! assert_eq!(solution.cost, 9);
//! ```

pub mod hungarian;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod weight;

pub use hungarian::{
    solve_assignment, solve_assignment_with, CostMatrix, Labeling, Matching, SolverOptions,
};
pub use model::{
    normalize, validate, FeasibilityReport, MmdcInstance, NormalizedInstance, Side, Violation,
};
pub use oracle::{
    brute_force_assignment, brute_force_mmdc, verify_solution, OracleOutcome, VerifyReport,
};
pub use reduction::{
    build_gadget, build_gadget_with, extract_solution, nonmain_weight, solve_mmdc, solve_mmdc_with,
    GadgetGraph, MmdcError, MmdcSolution, PenaltyRule, SolveOptions, VertexRole,
};
pub use weight::Weight;
