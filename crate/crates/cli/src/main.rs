use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmdc_cli::bench::BenchSpec;
use mmdc_cli::commands::{
    cmd_bench, cmd_check_dump, cmd_dump_gadget, cmd_gen, cmd_oracle, cmd_solve, cmd_verify, emit,
    CliError, GenArgs, GenMode, SolveFlags,
};
use mmdc_cli::generate::BoundParams;
use mmdc_core::PenaltyRule;

/// Minimum-cost many-to-many matching with demands and capacities.
#[derive(Parser)]
#[command(name = "mmdc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and write a solution file.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Relative tightness tolerance for float costs.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also run the exhaustive oracle and fail if the costs differ.
        #[arg(long)]
        check_oracle: bool,
        /// Re-verify solver invariants at every step.
        #[arg(long)]
        check_invariants: bool,
        #[arg(long, default_value = "balanced")]
        penalty: PenaltyRule,
    },
    /// Check a solution file against its instance. Exits 0 only on pass.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Exhaustive optimum for small instances.
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also run the solver and fail if the costs differ.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Generate a random feasible instance.
    Gen(GenCli),
    /// Write the gadget graph of an instance, or check an existing dump.
    DumpGadget {
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "balanced")]
        penalty: PenaltyRule,
        /// Re-check this dump against the instance instead of writing one.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Time the solver over a sweep of gadget sizes; writes CSV.
    Bench {
        /// Comma-separated target gadget sizes.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        sizes: Vec<usize>,
        /// Comma-separated maximum costs, one sweep cell each.
        #[arg(long, value_delimiter = ',', default_value = "1,1000")]
        max_costs: Vec<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distinct instances per (size, cost range) cell.
        #[arg(long, default_value_t = 5)]
        instances: usize,
        /// Solves per instance.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 2)]
        max_bound: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Euclidean,
}

#[derive(Args)]
struct GenCli {
    #[arg(long, value_enum, default_value = "uniform")]
    mode: ModeArg,
    #[arg(long, short = 's')]
    s: usize,
    #[arg(long, short = 't')]
    t: usize,
    #[arg(long, default_value_t = 0)]
    min_demand: usize,
    #[arg(long, default_value_t = 2)]
    max_bound: usize,
    /// Uniform mode: costs are drawn from 0..=max-cost.
    #[arg(long, default_value_t = 9)]
    max_cost: i64,
    /// Euclidean mode: points are drawn from [0, box-size]^2.
    #[arg(long, default_value_t = 100.0)]
    box_size: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            instance,
            output,
            epsilon,
            check_oracle,
            check_invariants,
            penalty,
        } => {
            let flags = SolveFlags {
                epsilon,
                penalty,
                check_oracle,
                check_invariants,
            };
            emit(&cmd_solve(&instance, &flags)?.to_json(), output.as_deref())
        }
        Command::Verify { instance, solution } => emit(&cmd_verify(&instance, &solution)?, None),
        Command::Oracle {
            instance,
            output,
            check_oracle,
        } => emit(
            &cmd_oracle(&instance, check_oracle)?.to_json(),
            output.as_deref(),
        ),
        Command::Gen(g) => {
            let args = GenArgs {
                mode: match g.mode {
                    ModeArg::Uniform => GenMode::Uniform,
                    ModeArg::Euclidean => GenMode::Euclidean,
                },
                bounds: BoundParams {
                    s: g.s,
                    t: g.t,
                    min_demand: g.min_demand,
                    max_bound: g.max_bound,
                },
                max_cost: g.max_cost,
                box_size: g.box_size,
                seed: g.seed,
            };
            emit(&cmd_gen(&args)?.to_json(), g.output.as_deref())
        }
        Command::DumpGadget {
            instance,
            output,
            penalty,
            check,
        } => match check {
            Some(dump) => emit(&cmd_check_dump(&instance, &dump)?, None),
            None => emit(&cmd_dump_gadget(&instance, penalty)?, output.as_deref()),
        },
        Command::Bench {
            sizes,
            max_costs,
            seed,
            instances,
            reps,
            max_bound,
            output,
        } => {
            let spec = BenchSpec {
                sizes,
                max_costs,
                seed,
                instances,
                reps,
                max_bound,
            };
            emit(&cmd_bench(&spec)?, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmdc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
