//! Subcommand implementations. Each returns its document or text; writing it
//! out and turning errors into exit codes is left to the binary.

use std::path::Path;
use std::time::Instant;

use mmdc_core::oracle::OracleError;
use mmdc_core::{
    brute_force_mmdc, build_gadget_with, normalize, solve_mmdc_with, verify_solution, MmdcError,
    MmdcInstance, MmdcSolution, OracleOutcome, PenaltyRule, SolveOptions, SolverOptions,
};
use thiserror::Error;

use crate::bench::{run_bench, to_csv, BenchError, BenchSpec};
use crate::format::{
    read_text, AnyInstance, CertificateDoc, FormatError, InstanceFile, JsonWeight, SolutionFile,
    SolverInfo, Timing,
};
use crate::gadget_dump::{check_dump, dump_mode, parse_dump, write_dump, DumpError};
use crate::generate::{euclidean, uniform, BoundParams, GenError, PointSetSpec, UniformParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_ORACLE_CAP: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("infeasible instance:\n{0}")]
    Infeasible(String),
    #[error(transparent)]
    OracleCap(#[from] OracleError),
    #[error("solution rejected:\n{0}")]
    VerifyFailed(String),
    #[error("internal failure: {0}")]
    Internal(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format(_) | CliError::Params(_) => EXIT_PARSE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::OracleCap(_) => EXIT_ORACLE_CAP,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Internal(_) | CliError::Write { .. } => EXIT_INTERNAL,
        }
    }
}

impl From<MmdcError> for CliError {
    fn from(e: MmdcError) -> Self {
        match e {
            MmdcError::Infeasible(report) => CliError::Infeasible(report.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Params(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Solve(e) => e.into(),
            other => CliError::Params(other.to_string()),
        }
    }
}

impl From<DumpError> for CliError {
    fn from(e: DumpError) -> Self {
        match e {
            DumpError::Syntax { .. } => CliError::Params(e.to_string()),
            DumpError::Check(_) => CliError::VerifyFailed(e.to_string()),
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveFlags {
    pub epsilon: Option<f64>,
    pub penalty: PenaltyRule,
    pub check_oracle: bool,
    pub check_invariants: bool,
}

fn costs_agree<W: JsonWeight>(a: W, b: W) -> bool {
    if W::EXACT {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-6 * b.to_f64().abs().max(1.0)
    }
}

fn cross_check<W: JsonWeight>(
    x: &MmdcInstance<W>,
    cost: W,
    oracle: OracleOutcome<W>,
) -> Result<(), CliError> {
    match oracle.cost() {
        Some(want) if costs_agree(cost, want) => Ok(()),
        Some(want) => Err(CliError::Internal(format!(
            "solver cost {cost} but oracle optimum {want}"
        ))),
        None => Err(CliError::Internal(format!(
            "solver found a solution but the oracle reports infeasible ({} x {})",
            x.s(),
            x.t()
        ))),
    }
}

fn solve_typed<W: JsonWeight>(
    x: &MmdcInstance<W>,
    flags: &SolveFlags,
) -> Result<SolutionFile, CliError> {
    let opts = SolveOptions {
        penalty: flags.penalty,
        solver: SolverOptions {
            epsilon: flags.epsilon,
            check_invariants: flags.check_invariants,
        },
    };
    let start = Instant::now();
    let out = solve_mmdc_with(x, &opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let report = verify_solution(x, &out.solution);
    if !report.passed() {
        return Err(CliError::Internal(format!(
            "solver output fails verification:\n{report}"
        )));
    }
    if flags.check_oracle {
        cross_check(x, out.solution.cost, brute_force_mmdc(x)?)?;
    }
    let mut file = SolutionFile::from_solution(&out.solution, SolverInfo::new("hungarian"));
    let stats = out.assignment.stats;
    file.certificate = out
        .solution
        .certificate
        .as_ref()
        .map(|c| CertificateDoc::from_certificate(c, stats.label_updates, stats.augmentations));
    file.timing = Some(Timing { seconds });
    Ok(file)
}

pub fn solve_instance(file: &InstanceFile, flags: &SolveFlags) -> Result<SolutionFile, CliError> {
    match &file.instance {
        AnyInstance::Int(x) => solve_typed(x, flags),
        AnyInstance::Float(x) => solve_typed(x, flags),
    }
}

pub fn cmd_solve(instance: &Path, flags: &SolveFlags) -> Result<SolutionFile, CliError> {
    solve_instance(&InstanceFile::read(instance)?, flags)
}

fn oracle_typed<W: JsonWeight>(
    x: &MmdcInstance<W>,
    check_solver: bool,
) -> Result<SolutionFile, CliError> {
    let start = Instant::now();
    let outcome = brute_force_mmdc(x)?;
    let seconds = start.elapsed().as_secs_f64();
    let OracleOutcome::Optimal { pairs, .. } = &outcome else {
        return Err(CliError::Infeasible(
            "no pair set meets every demand and capacity".into(),
        ));
    };
    let sol = MmdcSolution::from_pairs(x, pairs.clone());
    if check_solver {
        let solved = solve_mmdc_with(x, &SolveOptions::default())?;
        cross_check(x, solved.solution.cost, outcome.clone())?;
    }
    let mut file = SolutionFile::from_solution(&sol, SolverInfo::new("oracle"));
    file.timing = Some(Timing { seconds });
    Ok(file)
}

/// Exhaustive optimum; with `check_solver` the reduction-based solver is run
/// too and the two costs must agree.
pub fn cmd_oracle(instance: &Path, check_solver: bool) -> Result<SolutionFile, CliError> {
    match InstanceFile::read(instance)?.instance {
        AnyInstance::Int(x) => oracle_typed(&x, check_solver),
        AnyInstance::Float(x) => oracle_typed(&x, check_solver),
    }
}

fn verify_typed<W: JsonWeight>(
    x: &MmdcInstance<W>,
    doc: &SolutionFile,
) -> Result<String, CliError> {
    let report = verify_solution(x, &doc.to_solution::<W>()?);
    if report.passed() {
        Ok(format!(
            "ok: {} pairs, cost {}\n",
            doc.pairs.len(),
            doc.cost
        ))
    } else {
        Err(CliError::VerifyFailed(report.to_string()))
    }
}

pub fn verify_files(instance: &InstanceFile, solution: &SolutionFile) -> Result<String, CliError> {
    match &instance.instance {
        AnyInstance::Int(x) => verify_typed(x, solution),
        AnyInstance::Float(x) => verify_typed(x, solution),
    }
}

pub fn cmd_verify(instance: &Path, solution: &Path) -> Result<String, CliError> {
    verify_files(
        &InstanceFile::read(instance)?,
        &SolutionFile::read(solution)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Uniform,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenArgs {
    pub mode: GenMode,
    pub bounds: BoundParams,
    pub max_cost: i64,
    pub box_size: f64,
    pub seed: u64,
}

pub fn cmd_gen(args: &GenArgs) -> Result<InstanceFile, CliError> {
    if args.max_cost < 0 {
        return Err(CliError::Params("max_cost must be nonnegative".into()));
    }
    Ok(match args.mode {
        GenMode::Uniform => uniform(&UniformParams {
            bounds: args.bounds,
            max_cost: args.max_cost,
            seed: args.seed,
        })?,
        GenMode::Euclidean => euclidean(&PointSetSpec {
            bounds: args.bounds,
            box_size: args.box_size,
            seed: args.seed,
        })?,
    })
}

fn dump_typed<W: JsonWeight>(
    x: &MmdcInstance<W>,
    penalty: PenaltyRule,
) -> Result<String, CliError> {
    let norm = normalize(x).map_err(MmdcError::from)?;
    let g = build_gadget_with(&norm, penalty).map_err(MmdcError::from)?;
    Ok(write_dump(&g))
}

pub fn cmd_dump_gadget(instance: &Path, penalty: PenaltyRule) -> Result<String, CliError> {
    match InstanceFile::read(instance)?.instance {
        AnyInstance::Int(x) => dump_typed(&x, penalty),
        AnyInstance::Float(x) => dump_typed(&x, penalty),
    }
}

/// Re-ingests a dump and recomputes every gadget invariant against the
/// instance it claims to encode.
pub fn check_dump_text(instance: &InstanceFile, text: &str) -> Result<String, CliError> {
    let n = match (&instance.instance, dump_mode(text)) {
        (AnyInstance::Int(x), Some("integer")) => {
            let d = parse_dump::<i64>(text)?;
            check_dump(&d, x)?;
            d.n
        }
        (AnyInstance::Float(x), Some("float")) => {
            let d = parse_dump::<f64>(text)?;
            check_dump(&d, x)?;
            d.n
        }
        (_, mode) => {
            return Err(CliError::VerifyFailed(format!(
                "dump mode {mode:?} does not match the instance's cost mode"
            )))
        }
    };
    Ok(format!("ok: gadget with N = {n} matches the instance\n"))
}

pub fn cmd_check_dump(instance: &Path, dump: &Path) -> Result<String, CliError> {
    check_dump_text(&InstanceFile::read(instance)?, &read_text(dump)?)
}

pub fn cmd_bench(spec: &BenchSpec) -> Result<String, CliError> {
    Ok(to_csv(&run_bench(spec)?))
}
