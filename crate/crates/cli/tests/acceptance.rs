//! Acceptance suite: nine criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p rentfair-cli --test acceptance -- --nocapture` to
//! see the lines.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rentfair_cli::{bench_rows, nonnegative_verdict, BenchConfig};
use rentfair_core::envy::envy_witness;
use rentfair_core::gen::{random_economy, GenParams, Tightness};
use rentfair_core::oracle::{
    is_optimal_against, oracle_is_optimal, oracle_solve, oracle_solve_many, quasi_linear_maxmin,
    OracleOutcome, DEFAULT_SIZE_GUARD,
};
use rentfair_core::{
    baseline_allocation, check_membership, is_envy_free, solve, Allocation, Economy, Family,
    Objective, Rational, SlopeSet, SolveResult,
};

type Outcome = Result<String, String>;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn qs(v: &[&str]) -> Vec<Rational> {
    v.iter().map(|s| q(s)).collect()
}

fn e2() -> Economy {
    Economy::from_parts(
        vec![qs(&["10", "2"]), qs(&["4", "6"])],
        qs(&["5", "5"]),
        vec![1, 1],
        SlopeSet::new(qs(&["0", "1"])).unwrap(),
        q("10"),
    )
    .unwrap()
}

fn full(family: Family, e: &Economy) -> Objective {
    Objective::full(family, e.n())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Economies and their oracle optima for all four families.
struct Corpus {
    economies: Vec<Economy>,
    optima: Vec<Vec<OracleOutcome>>,
}

fn corpus() -> Corpus {
    let mut economies = Vec::new();
    for seed in 0..56u64 {
        for n in 2..=4 {
            for k in 1..=3 {
                let tightness = Tightness::ALL[(seed % 3) as usize];
                economies.push(random_economy(GenParams {
                    n,
                    k,
                    seed,
                    tightness,
                }));
            }
        }
    }
    let optima = economies
        .iter()
        .map(|e| {
            let objectives: Vec<Objective> = Family::ALL.iter().map(|&f| full(f, e)).collect();
            oracle_solve_many(e, &objectives, DEFAULT_SIZE_GUARD).unwrap()
        })
        .collect();
    Corpus { economies, optima }
}

/// Every solve made by criteria 1 to 3, kept for criterion 4.
#[derive(Default)]
struct Traces(Vec<(Economy, SolveResult)>);

fn trace_of_kinked_example(traces: &mut Traces) -> Outcome {
    let e = e2();
    let start = Instant::now();
    let r = solve(&e, &full(Family::MaxminUtility, &e)).map_err(|x| x.to_string())?;
    let took = start.elapsed();
    ensure(r.allocation.rents == qs(&["19/3", "11/3"]), || {
        format!("rents {:?}", r.allocation.rents)
    })?;
    ensure(r.allocation.assignment == vec![0, 1], || {
        "assignment is not the identity".into()
    })?;
    ensure(r.objective_value == q("7/3"), || {
        format!("value {}", r.objective_value)
    })?;
    let it = &r.trace.iterations;
    ensure(it.len() == 2, || format!("{} iterations", it.len()))?;
    ensure(it[0].step_rents == qs(&["7", "5"]), || {
        format!("first stop {:?}", it[0].step_rents)
    })?;
    ensure(
        it[0].sb_size_before == 4 && it[0].sb_size_after == 2,
        || format!("SB {} -> {}", it[0].sb_size_before, it[0].sb_size_after),
    )?;
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    traces.0.push((e, r));
    Ok(format!(
        "rents (19/3, 11/3), value 7/3, two iterations, SB 4 -> 2, {took:?}"
    ))
}

fn oracle_equivalence(corpus: &Corpus, traces: &mut Traces) -> Outcome {
    let mut checks = 0;
    for (idx, (e, optima)) in corpus.economies.iter().zip(&corpus.optima).enumerate() {
        for (family, best) in Family::ALL.iter().zip(optima) {
            let obj = full(*family, e);
            let r = solve(e, &obj).map_err(|x| format!("instance {idx} {family}: {x}"))?;
            ensure(r.objective_value == best.value, || {
                format!(
                    "instance {idx} {family}: solver {} vs oracle {}",
                    r.objective_value, best.value
                )
            })?;
            ensure(
                is_optimal_against(e, &obj, &r.allocation, &best.value),
                || format!("instance {idx} {family}: output not optimal"),
            )?;
            ensure(
                oracle_is_optimal(e, &obj, &r.allocation) == Ok(true),
                || format!("instance {idx} {family}: oracle_is_optimal rejects the output"),
            )?;
            checks += 1;
            traces.0.push((e.clone(), r));
        }
    }
    Ok(format!(
        "{} instances, {checks} solves, all values equal",
        corpus.economies.len()
    ))
}

fn quasi_linear_degeneration(traces: &mut Traces) -> Outcome {
    let mut count = 0;
    for seed in 0..50u64 {
        for n in 2..=5 {
            let e = random_economy(GenParams {
                n,
                k: 1,
                seed,
                tightness: Tightness::ALL[(seed % 3) as usize],
            });
            let obj = full(Family::MaxminUtility, &e);
            let r = solve(&e, &obj).map_err(|x| x.to_string())?;
            let reference = quasi_linear_maxmin(&e, &obj).map_err(|x| x.to_string())?;
            ensure(r.objective_value == reference.value, || {
                format!(
                    "seed {seed} n {n}: {} vs {}",
                    r.objective_value, reference.value
                )
            })?;
            ensure(r.allocation.rents == reference.witness.rents, || {
                format!(
                    "seed {seed} n {n}: rents {:?} vs {:?}",
                    r.allocation.rents, reference.witness.rents
                )
            })?;
            count += 1;
            traces.0.push((e, r));
        }
    }
    Ok(format!(
        "{count} quasi-linear instances, values and rents equal"
    ))
}

fn iterate_envy_freeness(traces: &Traces) -> Outcome {
    let mut iterates = 0;
    for (idx, (e, r)) in traces.0.iter().enumerate() {
        let init = &r.trace.init.allocation;
        ensure(
            envy_witness(e, &init.rents, &init.assignment).is_none(),
            || format!("trace {idx}: init has envy"),
        )?;
        ensure(init.total() == r.trace.init.boundary_rent, || {
            format!("trace {idx}: init off its boundary rent")
        })?;
        iterates += 1;
        for it in &r.trace.iterations {
            for rents in [Some(&it.step_rents[..]), it.restore_rents.as_deref()]
                .into_iter()
                .flatten()
            {
                ensure(envy_witness(e, rents, &it.sigma).is_none(), || {
                    format!("trace {idx} s={}: envy", it.s)
                })?;
                iterates += 1;
            }
        }
        ensure(r.allocation.total() == e.total_rent, || {
            format!("trace {idx}: final total {}", r.allocation.total())
        })?;
        ensure(is_envy_free(e, &r.allocation).is_ok(), || {
            format!("trace {idx}: final allocation has envy")
        })?;
    }
    Ok(format!(
        "{} traces, {iterates} iterates envy-free, every final total exact",
        traces.0.len()
    ))
}

fn rent_monotonicity() -> Outcome {
    let mut triples = 0;
    for seed in 0..10u64 {
        for n in 2..=5 {
            for k in 1..=3 {
                let e1 = random_economy(GenParams {
                    n,
                    k,
                    seed,
                    tightness: Tightness::ALL[(seed % 3) as usize],
                });
                let step = 1 + (seed as i64 * 7 + n as i64 * 3 + k as i64) % 40;
                let e2 = e1.with_total_rent(&e1.total_rent + &Rational::from(step));
                for family in Family::ALL {
                    let lo = solve(&e1, &full(family, &e1))
                        .map_err(|x| x.to_string())?
                        .allocation;
                    let hi = solve(&e2, &full(family, &e2))
                        .map_err(|x| x.to_string())?
                        .allocation;
                    let tag = || format!("seed {seed} n {n} k {k} {family} +{step}");
                    ensure((0..n).all(|a| lo.rents[a] < hi.rents[a]), || {
                        format!("{}: rents not strictly up", tag())
                    })?;
                    ensure(
                        (0..n).all(|i| e1.own_utility(i, &lo) > e2.own_utility(i, &hi)),
                        || format!("{}: utilities not strictly down", tag()),
                    )?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!(
        "{triples} (economy, m1 < m2) pairs, strict in every component"
    ))
}

fn iteration_bound_in_bench() -> Outcome {
    let mut rows = 0;
    let mut worst = (0usize, 0usize, 0usize, 0usize);
    for k in 1..=3 {
        for family in Family::ALL {
            for tightness in Tightness::ALL {
                let out = bench_rows(BenchConfig {
                    n_lo: 2,
                    n_hi: 10,
                    k,
                    trials: 2,
                    family,
                    tightness,
                    seed: 11,
                })
                .map_err(|x| x.to_string())?;
                for row in &out {
                    ensure(row.iterations <= row.bound, || {
                        format!(
                            "n {} k {} trial {}: {} > {}",
                            row.n, row.k, row.trial, row.iterations, row.bound
                        )
                    })?;
                    if row.iterations > worst.0 {
                        worst = (row.iterations, row.bound, row.n, row.k);
                    }
                }
                rows += out.len();
            }
        }
    }
    Ok(format!(
        "{rows} bench runs with n <= 10, k <= 3, most iterations {} (bound {}) at n={} k={}",
        worst.0, worst.1, worst.2, worst.3
    ))
}

fn baseline_consistency() -> Outcome {
    let mut count = 0;
    for seed in 0..20u64 {
        for n in 2..=6 {
            for k in [1, 3] {
                let e = random_economy(GenParams {
                    n,
                    k,
                    seed,
                    tightness: Tightness::ALL[(seed % 3) as usize],
                });
                let base = baseline_allocation(&e)
                    .map_err(|x| x.to_string())?
                    .allocation;
                ensure(is_envy_free(&e, &base).is_ok(), || {
                    format!("seed {seed} n {n} k {k}: baseline has envy")
                })?;
                let obj = full(Family::MaxminUtility, &e);
                let best = solve(&e, &obj).map_err(|x| x.to_string())?;
                let baseline_min = obj.value(&e, &base);
                ensure(best.objective_value >= baseline_min, || {
                    format!(
                        "seed {seed} n {n} k {k}: solver {} < baseline {baseline_min}",
                        best.objective_value
                    )
                })?;
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} baselines envy-free at m, solver min utility never below them"
    ))
}

fn membership_soundness(corpus: &Corpus) -> Outcome {
    let mut agree = 0;
    let mut members = 0;
    for (idx, (e, optima)) in corpus.economies.iter().zip(&corpus.optima).enumerate() {
        let base: Allocation = baseline_allocation(e)
            .map_err(|x| x.to_string())?
            .allocation;
        for (family, best) in Family::ALL.iter().zip(optima) {
            let obj = full(*family, e);
            let verdict = check_membership(e, &base, &obj).member;
            let optimal = is_optimal_against(e, &obj, &base, &best.value);
            ensure(oracle_is_optimal(e, &obj, &base) == Ok(optimal), || {
                format!("instance {idx} {family}: oracle mismatch")
            })?;
            ensure(verdict == optimal, || {
                format!("instance {idx} {family}: member {verdict}, optimal {optimal}")
            })?;
            agree += 1;
            members += verdict as usize;
        }
    }
    Ok(format!(
        "{} baseline allocations, {agree} verdicts agree with the oracle ({members} members)",
        corpus.economies.len()
    ))
}

fn nonnegative_use_case() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cases = [
        (
            "compensated",
            r#"{"agents":["1","2"],"rooms":["a","b"],"slope_set":[0,1],"values":[[10,0],[10,0]],"budgets":[1,1],"rho_index":[1,0],"total_rent":2}"#,
            false,
        ),
        (
            "uncompensated",
            r#"{"agents":["1","2"],"rooms":["a","b"],"slope_set":[0,1],"values":[[10,2],[4,6]],"budgets":[5,5],"rho_index":[1,1],"total_rent":10}"#,
            true,
        ),
    ];
    let mut notes = Vec::new();
    for (name, text, expect_possible) in cases {
        let file: rentfair_cli::InstanceFile = serde_json::from_str(text).unwrap();
        let (economy, _) = file.to_model(None).map_err(|p| p.join("; "))?;
        let value = oracle_solve(&economy, &full(Family::MaxminRent, &economy))
            .map_err(|x| x.to_string())?
            .value;
        ensure(
            value.is_positive() == expect_possible && !value.is_zero(),
            || format!("{name}: oracle maxmin rent {value} has the wrong sign"),
        )?;
        let verdict = nonnegative_verdict(&file).map_err(|x| x.to_string())?;
        ensure(
            verdict.possible == expect_possible && verdict.best_min_rent == value,
            || format!("{name}: library verdict {}", verdict.line()),
        )?;
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_rentfair"))
            .args([
                "solve",
                path.to_str().unwrap(),
                "--require-nonnegative",
                "--trace",
                "off",
            ])
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        let want = if expect_possible {
            "nonnegative rents: possible"
        } else {
            "nonnegative rents: impossible"
        };
        ensure(out.status.success() && stderr.contains(want), || {
            format!("{name}: got {stderr:?}")
        })?;
        notes.push(format!(
            "{name}: oracle {value}, reported {}",
            if expect_possible {
                "possible"
            } else {
                "impossible"
            }
        ));
    }
    Ok(notes.join("; "))
}

fn run(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default())
    });
    let took = start.elapsed().as_secs_f64();
    let line = match &outcome {
        Ok(detail) => format!("criterion {number} PASS  {name}: {detail} [{took:.1}s]"),
        Err(detail) => format!("criterion {number} FAIL  {name}: {detail} [{took:.1}s]"),
    };
    let _ = writeln!(std::io::stdout().lock(), "{line}");
    outcome.is_ok()
}

#[test]
fn acceptance() {
    let mut traces = Traces::default();
    let corpus = corpus();
    let results = [
        run(
            1,
            "end-to-end trace on the kinked two-agent example",
            || trace_of_kinked_example(&mut traces),
        ),
        run(2, "solver equals the brute-force oracle", || {
            oracle_equivalence(&corpus, &mut traces)
        }),
        run(3, "quasi-linear degeneration", || {
            quasi_linear_degeneration(&mut traces)
        }),
        run(
            4,
            "envy-freeness of every iterate and exact budget balance",
            || iterate_envy_freeness(&traces),
        ),
        run(
            5,
            "strict rent monotonicity in the total rent",
            rent_monotonicity,
        ),
        run(
            6,
            "iteration bound over bench runs",
            iteration_bound_in_bench,
        ),
        run(
            7,
            "baseline consistency and selection dominance",
            baseline_consistency,
        ),
        run(
            8,
            "membership test soundness on baseline allocations",
            || membership_soundness(&corpus),
        ),
        run(9, "nonnegative-rent verdicts", nonnegative_use_case),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
