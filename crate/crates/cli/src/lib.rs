//! Library side of the `rentfair` command: file formats and the work behind
//! each subcommand, kept separate from argument parsing so it can be tested
//! directly.

pub mod format;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rentfair_core::gen::{random_economy, GenParams, Tightness};
use rentfair_core::oracle::{oracle_solve_with_guard, OracleError, DEFAULT_SIZE_GUARD};
use rentfair_core::{
    check_membership, envy::envy_witness, iteration_bound, nonnegative_rents_possible, solve,
    Economy, Family, Objective, Rational, SolveError,
};
use serde::Serialize;

pub use format::{InstanceFile, ObjectiveSpec, ResultFile, TraceFile, Q};

pub const SIZE_GUARD_VAR: &str = "RENTFAIR_SIZE_GUARD";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{context}: {}", problems.join("; "))]
    Input {
        context: String,
        problems: Vec<String>,
    },
    #[error("size guard: {n} agents exceeds the limit of {guard} (use --force to run anyway)")]
    SizeGuard { n: usize, guard: usize },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::SizeGuard { .. } => 3,
            CliError::Internal(_) => 1,
        }
    }

    fn input(context: impl Into<String>, problem: impl ToString) -> Self {
        CliError::Input {
            context: context.into(),
            problems: vec![problem.to_string()],
        }
    }

    /// One-line JSON for the error stream.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            violations: Option<&'a [String]>,
        }
        let (kind, violations) = match self {
            CliError::Input { problems, .. } => ("invalid input", Some(problems.as_slice())),
            CliError::SizeGuard { .. } => ("size guard", None),
            CliError::Internal(_) => ("internal", None),
        };
        serde_json::to_string(&Report {
            error: kind,
            message: self.to_string(),
            violations,
        })
        .expect("report serializes")
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Invalid(v) => CliError::Input {
                context: "invalid instance".into(),
                problems: v.iter().map(ToString::to_string).collect(),
            },
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeGuard { n, guard } => CliError::SizeGuard { n, guard },
            OracleError::Invalid(v) => CliError::Input {
                context: "invalid instance".into(),
                problems: v.iter().map(ToString::to_string).collect(),
            },
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let what = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::input(&what, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(&what, e))
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    read_json(path)
}

pub fn read_result(path: &Path) -> Result<ResultFile, CliError> {
    read_json(path)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

pub fn model(
    instance: &InstanceFile,
    family: Option<Family>,
) -> Result<(Economy, Objective), CliError> {
    instance
        .to_model(family)
        .map_err(|problems| CliError::Input {
            context: "invalid instance".into(),
            problems,
        })
}

pub fn solve_instance(
    instance: &InstanceFile,
    family: Option<Family>,
    trace: bool,
) -> Result<ResultFile, CliError> {
    let (economy, objective) = model(instance, family)?;
    let result = solve(&economy, &objective)?;
    let mut file = ResultFile::new(&economy, &objective, &result.allocation, result.certified);
    if trace {
        file.trace = Some(TraceFile::from_trace(&economy, &objective, &result.trace));
    }
    Ok(file)
}

/// Whether some envy-free allocation charges no room a negative rent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonnegativeVerdict {
    pub possible: bool,
    /// The largest achievable minimum rent.
    pub best_min_rent: Rational,
}

impl NonnegativeVerdict {
    pub fn word(&self) -> &'static str {
        if self.possible {
            "possible"
        } else {
            "impossible"
        }
    }

    pub fn line(&self) -> String {
        format!(
            "nonnegative rents: {} (best minimum rent {})",
            self.word(),
            self.best_min_rent
        )
    }
}

pub fn nonnegative_verdict(instance: &InstanceFile) -> Result<NonnegativeVerdict, CliError> {
    let (economy, _) = model(instance, None)?;
    let (possible, result) = nonnegative_rents_possible(&economy)?;
    Ok(NonnegativeVerdict {
        possible,
        best_min_rent: result.objective_value,
    })
}

/// Problems found by `verify`; empty means the result checks out.
pub fn verify(instance: &InstanceFile, result: &ResultFile) -> Result<Vec<String>, CliError> {
    let (economy, objective) = model(instance, None)?;
    let alloc = result
        .allocation(&economy)
        .map_err(|problems| CliError::Input {
            context: "invalid result".into(),
            problems,
        })?;
    let mut problems = Vec::new();
    let total = alloc.total();
    if total != economy.total_rent {
        problems.push(format!(
            "budget balance violated: rents sum to {total}, expected {}",
            economy.total_rent
        ));
    }
    if let Some(w) = envy_witness(&economy, &alloc.rents, &alloc.assignment) {
        problems.push(format!(
            "agent {} envies agent {} by {}",
            economy.agents[w.envious], economy.agents[w.envied], w.gap
        ));
    }
    let verdict = check_membership(&economy, &alloc, &objective);
    let (kind, pool) = if objective.family.is_utility() {
        ("agent", &economy.agents)
    } else {
        ("room", &economy.rooms)
    };
    for &k in &verdict.unreached {
        problems.push(format!("{kind} {} unreached", pool[k]));
    }
    if !verdict.member && verdict.unreached.is_empty() {
        problems.push(format!("not in the {} selection", objective.family));
    }
    let value = objective.value(&economy, &alloc);
    if value != result.objective_value.0 {
        problems.push(format!(
            "objective_value is {}, recomputed {value}",
            result.objective_value.0
        ));
    }
    Ok(problems)
}

/// The size guard from the environment, or the default.
pub fn size_guard_from_env() -> Result<usize, CliError> {
    match std::env::var(SIZE_GUARD_VAR) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::input(
                SIZE_GUARD_VAR,
                format!("expected a nonnegative integer, got {raw:?}"),
            )
        }),
        Err(_) => Ok(DEFAULT_SIZE_GUARD),
    }
}

/// Brute-force optimum in the result schema, without a trace. `guard` of
/// `None` disables the size check.
pub fn oracle_instance(
    instance: &InstanceFile,
    family: Option<Family>,
    guard: Option<usize>,
) -> Result<ResultFile, CliError> {
    let (economy, objective) = model(instance, family)?;
    let out = oracle_solve_with_guard(&economy, &objective, guard.unwrap_or(usize::MAX))?;
    Ok(ResultFile::new(&economy, &objective, &out.witness, true))
}

pub fn generate(params: GenParams) -> InstanceFile {
    let economy = random_economy(params);
    let objective = Objective::full(Family::MaxminUtility, economy.n());
    InstanceFile::from_model(&economy, Some(&objective))
}

/// Inclusive `a..b`; an empty range when `a > b`.
pub fn parse_n_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a range like 2..6, got {s:?}"))?;
    let lo = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start {a:?}"))?;
    let hi = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end {b:?}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub iterations: usize,
    pub bound: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub n_lo: usize,
    pub n_hi: usize,
    pub k: usize,
    pub trials: usize,
    pub family: Family,
    pub tightness: Tightness,
    pub seed: u64,
}

/// Seed for one bench trial, distinct across `(n, k, trial)`.
pub fn trial_seed(base: u64, n: usize, k: usize, trial: usize) -> u64 {
    base ^ ((n as u64) << 40) ^ ((k as u64) << 32) ^ trial as u64
}

/// One solve per `(n, trial)` on a generated economy, recording loop
/// iterations against the bound.
pub fn bench_rows(config: BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    if config.k == 0 {
        return Err(CliError::input("--k", "must be at least 1"));
    }
    let mut rows = Vec::new();
    for n in config.n_lo.max(1)..=config.n_hi {
        if config.n_lo > config.n_hi {
            break;
        }
        for trial in 0..config.trials {
            let seed = trial_seed(config.seed, n, config.k, trial);
            let economy = random_economy(GenParams {
                n,
                k: config.k,
                seed,
                tightness: config.tightness,
            });
            let objective = Objective::full(config.family, n);
            let start = Instant::now();
            let result = solve(&economy, &objective)?;
            let wall_time = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                n,
                k: config.k,
                trial,
                iterations: result.trace.iterations.len(),
                bound: iteration_bound(n, config.k),
                wall_time,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let io = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["n", "k", "trial", "iterations", "bound", "wall_time"])
        .map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Internal(e.to_string()))
}
