use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rentfair_cli::{
    bench_rows, generate, nonnegative_verdict, oracle_instance, parse_n_range, read_instance,
    read_result, size_guard_from_env, solve_instance, to_json, verify, write_csv, BenchConfig,
    CliError,
};
use rentfair_core::gen::{GenParams, Tightness};
use rentfair_core::Family;

#[derive(Parser)]
#[command(
    name = "rentfair",
    version,
    about = "Exact envy-free rent division with soft budgets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the result file.
    Solve {
        instance: PathBuf,
        /// Objective family over all agents or rooms, replacing the instance's objective.
        #[arg(long, value_parser = parse_family)]
        objective: Option<Family>,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        trace: Toggle,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also report whether some envy-free allocation has no negative rent.
        #[arg(long)]
        require_nonnegative: bool,
    },
    /// Check a result file against an instance.
    Verify { instance: PathBuf, result: PathBuf },
    /// Brute-force optimum for a small instance.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_parser = parse_family)]
        objective: Option<Family>,
        /// Ignore the size guard.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mid", value_parser = parse_tightness)]
        budget_tightness: Tightness,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Loop iterations against the iteration bound, as CSV.
    Bench {
        /// Inclusive range of agent counts, e.g. 2..6.
        #[arg(long, value_parser = parse_n_range)]
        n_range: (usize, usize),
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value = "maxmin-utility", value_parser = parse_family)]
        objective: Family,
        #[arg(long, default_value = "mid", value_parser = parse_tightness)]
        budget_tightness: Tightness,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::from_name(s).ok_or_else(|| {
        format!("unknown objective {s:?} (expected maxmin-utility, minmax-utility, maxmin-rent or minmax-rent)")
    })
}

fn parse_tightness(s: &str) -> Result<Tightness, String> {
    s.parse()
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve {
            instance,
            objective,
            trace,
            output,
            require_nonnegative,
        } => {
            let file = read_instance(&instance)?;
            let result = solve_instance(&file, objective, trace == Toggle::On)?;
            emit(&to_json(&result), output.as_deref())?;
            if require_nonnegative {
                eprintln!("{}", nonnegative_verdict(&file)?.line());
            }
        }
        Command::Verify { instance, result } => {
            let problems = verify(&read_instance(&instance)?, &read_result(&result)?)?;
            if !problems.is_empty() {
                for p in &problems {
                    println!("{p}");
                }
                return Ok(ExitCode::from(1));
            }
            println!("ok");
        }
        Command::Oracle {
            instance,
            objective,
            force,
            output,
        } => {
            let guard = if force {
                None
            } else {
                Some(size_guard_from_env()?)
            };
            let result = oracle_instance(&read_instance(&instance)?, objective, guard)?;
            emit(&to_json(&result), output.as_deref())?;
        }
        Command::Gen {
            n,
            k,
            seed,
            budget_tightness,
            output,
        } => {
            if n == 0 || k == 0 {
                return Err(CliError::Input {
                    context: "gen".into(),
                    problems: vec!["--n and --k must be at least 1".into()],
                });
            }
            let file = generate(GenParams {
                n,
                k,
                seed,
                tightness: budget_tightness,
            });
            emit(&to_json(&file), output.as_deref())?;
        }
        Command::Bench {
            n_range,
            k,
            trials,
            objective,
            budget_tightness,
            seed,
        } => {
            let rows = bench_rows(BenchConfig {
                n_lo: n_range.0,
                n_hi: n_range.1,
                k,
                trials,
                family: objective,
                tightness: budget_tightness,
                seed,
            })?;
            write_csv(&rows, io::stdout().lock())?;
            if let Some(row) = rows.iter().find(|r| r.iterations > r.bound) {
                eprintln!(
                    "iteration bound breached: n={} trial={} iterations={} bound={}",
                    row.n, row.trial, row.iterations, row.bound
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
