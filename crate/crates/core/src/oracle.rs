//! Brute-force optimum for small economies: every assignment crossed with
//! every budget-regime cell, one exact program per feasible pair.

use itertools::Itertools;

use crate::envy::is_envy_free;
use crate::lp::{solve_lp, LinExpr, LinearProgram, LpError, LpStatus, ProgramTag, Relation, Sense};
use crate::model::{validate, Allocation, Economy, Objective, Violation};
use crate::Rational;

pub const DEFAULT_SIZE_GUARD: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("size guard: {n} agents exceeds the limit of {guard}")]
    SizeGuard { n: usize, guard: usize },
    #[error("invalid input: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("no envy-free allocation found")]
    Infeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub value: Rational,
    pub witness: Allocation,
}

/// Closed rent interval; `None` is unbounded on that side.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Interval {
    lo: Option<Rational>,
    hi: Option<Rational>,
}

fn intervals(economy: &Economy) -> Vec<Interval> {
    let points: Vec<Rational> = (0..economy.n())
        .filter(|&i| economy.has_kink(i))
        .map(|i| economy.budget(i).clone())
        .sorted()
        .dedup()
        .collect();
    let mut out = Vec::with_capacity(points.len() + 1);
    let mut lo = None;
    for p in points {
        out.push(Interval {
            lo: lo.clone(),
            hi: Some(p.clone()),
        });
        lo = Some(p);
    }
    out.push(Interval { lo, hi: None });
    out
}

/// `(constant, slope)` of agent `i`'s utility for `room` on `cell`.
fn affine_utility(
    economy: &Economy,
    i: usize,
    room: usize,
    cell: &Interval,
) -> (Rational, Rational) {
    let v = economy.value(i, room).clone();
    let above = economy.has_kink(i) && cell.lo.as_ref().is_some_and(|lo| lo >= economy.budget(i));
    if above {
        let rho = economy.rho(i);
        (v + rho * economy.budget(i), -(Rational::one() + rho))
    } else {
        (v, -Rational::one())
    }
}

/// Necessary condition for a cell profile to hold an envy-free point with
/// `sigma`, over the rooms whose cells are already chosen.
fn could_be_envy_free(
    economy: &Economy,
    sigma: &[usize],
    owner: &[usize],
    cells: &[&Interval],
) -> bool {
    let fixed = cells.len();
    let newest = fixed - 1;
    (0..fixed).all(|a| {
        [(a, newest), (newest, a)].into_iter().all(|(own, other)| {
            let i = owner[own];
            debug_assert_eq!(sigma[i], own);
            match (&cells[own].lo, &cells[other].hi) {
                (Some(lo), Some(hi)) => {
                    economy.utility(i, own, lo) >= economy.utility(i, other, hi)
                }
                _ => true,
            }
        })
    })
}

fn sum_could_match(cells: &[&Interval], m: &Rational) -> bool {
    let lo: Option<Rational> = cells.iter().map(|c| c.lo.clone()).sum();
    let hi: Option<Rational> = cells.iter().map(|c| c.hi.clone()).sum();
    lo.is_none_or(|lo| &lo <= m) && hi.is_none_or(|hi| &hi >= m)
}

fn cell_program(
    economy: &Economy,
    objective: &Objective,
    sigma: &[usize],
    cells: &[&Interval],
) -> LinearProgram {
    let n = economy.n();
    let sense = if objective.family.maximizes() {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new(sense, ProgramTag::Oracle);
    for a in 0..n {
        lp.add_var(format!("r_{a}"));
    }
    let r_obj = lp.add_var("R");
    lp.objective = LinExpr::var(r_obj);
    for (a, cell) in cells.iter().enumerate() {
        if let Some(lo) = &cell.lo {
            lp.constrain(LinExpr::var(a), Relation::Ge, lo.clone());
        }
        if let Some(hi) = &cell.hi {
            lp.constrain(LinExpr::var(a), Relation::Le, hi.clone());
        }
    }
    for i in 0..n {
        let own = sigma[i];
        let (c_own, s_own) = affine_utility(economy, i, own, cells[own]);
        for other in (0..n).filter(|&b| b != own) {
            let (c, s) = affine_utility(economy, i, other, cells[other]);
            // c_own + s_own r_own >= c + s r_other
            let expr = LinExpr::new().with(own, s_own.clone()).with(other, -s);
            lp.constrain(expr, Relation::Ge, c - &c_own);
        }
    }
    let all = (0..n).fold(LinExpr::new(), |e, a| e.with(a, Rational::one()));
    lp.constrain(all, Relation::Eq, economy.total_rent.clone());
    let relation = if objective.family.maximizes() {
        Relation::Le
    } else {
        Relation::Ge
    };
    for (k, f) in objective.terms() {
        // R versus f applied to the member's affine quantity.
        let (constant, var, coef) = if objective.family.is_utility() {
            let own = sigma[k];
            let (c, s) = affine_utility(economy, k, own, cells[own]);
            (c, own, s)
        } else {
            (Rational::zero(), k, Rational::one())
        };
        let expr = LinExpr::var(r_obj).with(var, -(&f.slope * &coef));
        lp.constrain(expr, relation, &f.slope * &constant + &f.intercept);
    }
    lp
}

/// Feasible-looking cell profiles for `sigma`, by depth-first search over rooms.
fn profiles<'a>(
    economy: &Economy,
    sigma: &[usize],
    cells: &'a [Interval],
) -> Vec<Vec<&'a Interval>> {
    let n = economy.n();
    let mut owner = vec![0; n];
    for (i, &a) in sigma.iter().enumerate() {
        owner[a] = i;
    }
    let mut out = Vec::new();
    let mut stack: Vec<&Interval> = Vec::with_capacity(n);
    fn go<'a>(
        economy: &Economy,
        sigma: &[usize],
        owner: &[usize],
        cells: &'a [Interval],
        stack: &mut Vec<&'a Interval>,
        out: &mut Vec<Vec<&'a Interval>>,
    ) {
        if stack.len() == owner.len() {
            if sum_could_match(stack, &economy.total_rent) {
                out.push(stack.clone());
            }
            return;
        }
        for cell in cells {
            stack.push(cell);
            if could_be_envy_free(economy, sigma, owner, stack) {
                go(economy, sigma, owner, cells, stack, out);
            }
            stack.pop();
        }
    }
    go(economy, sigma, &owner, cells, &mut stack, &mut out);
    out
}

fn check_size(economy: &Economy, guard: usize) -> Result<(), OracleError> {
    if economy.n() > guard {
        return Err(OracleError::SizeGuard {
            n: economy.n(),
            guard,
        });
    }
    Ok(())
}

/// Optimal value and a witness for each objective, sharing one enumeration.
/// Ties keep the first witness in lexicographic assignment order.
pub fn oracle_solve_many(
    economy: &Economy,
    objectives: &[Objective],
    guard: usize,
) -> Result<Vec<OracleOutcome>, OracleError> {
    check_size(economy, guard)?;
    for obj in objectives {
        validate(economy, Some(obj)).map_err(OracleError::Invalid)?;
    }
    validate(economy, None).map_err(OracleError::Invalid)?;
    let n = economy.n();
    let cells = intervals(economy);
    let mut best: Vec<Option<OracleOutcome>> = vec![None; objectives.len()];
    for sigma in (0..n).permutations(n) {
        for profile in profiles(economy, &sigma, &cells) {
            for (slot, objective) in best.iter_mut().zip(objectives) {
                let sol = solve_lp(&cell_program(economy, objective, &sigma, &profile))?;
                if sol.status != LpStatus::Optimal {
                    continue;
                }
                let improves = match slot {
                    None => true,
                    Some(cur) => objective.better(&sol.value, &cur.value),
                };
                if improves {
                    let witness = Allocation::new(sol.point[..n].to_vec(), sigma.clone());
                    debug_assert_eq!(objective.value(economy, &witness), sol.value);
                    *slot = Some(OracleOutcome {
                        value: sol.value,
                        witness,
                    });
                }
            }
        }
    }
    best.into_iter()
        .map(|b| b.ok_or(OracleError::Infeasible))
        .collect()
}

pub fn oracle_solve_with_guard(
    economy: &Economy,
    objective: &Objective,
    guard: usize,
) -> Result<OracleOutcome, OracleError> {
    let mut out = oracle_solve_many(economy, std::slice::from_ref(objective), guard)?;
    Ok(out.remove(0))
}

pub fn oracle_solve(
    economy: &Economy,
    objective: &Objective,
) -> Result<OracleOutcome, OracleError> {
    oracle_solve_with_guard(economy, objective, DEFAULT_SIZE_GUARD)
}

/// Envy-free and optimal against a precomputed oracle value.
pub fn is_optimal_against(
    economy: &Economy,
    objective: &Objective,
    alloc: &Allocation,
    value: &Rational,
) -> bool {
    is_envy_free(economy, alloc).is_ok() && &objective.value(economy, alloc) == value
}

pub fn oracle_is_optimal(
    economy: &Economy,
    objective: &Objective,
    alloc: &Allocation,
) -> Result<bool, OracleError> {
    check_size(economy, DEFAULT_SIZE_GUARD)?;
    if is_envy_free(economy, alloc).is_err() {
        return Ok(false);
    }
    let best = oracle_solve(economy, objective)?;
    Ok(objective.value(economy, alloc) == best.value)
}

/// Quasi-linear optimum by one program per welfare-maximizing assignment.
/// Budgets are ignored: every utility is read as `v - r`. Returns the best value and its witness.
pub fn quasi_linear_maxmin(
    economy: &Economy,
    objective: &Objective,
) -> Result<OracleOutcome, OracleError> {
    check_size(economy, DEFAULT_SIZE_GUARD)?;
    let n = economy.n();
    let welfare =
        |sigma: &[usize]| -> Rational { (0..n).map(|i| economy.value(i, sigma[i]).clone()).sum() };
    let all: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let top = all
        .iter()
        .map(|s| welfare(s))
        .max()
        .expect("at least one assignment");
    let unbounded = Interval { lo: None, hi: None };
    let cells = vec![&unbounded; n];
    let mut best: Option<OracleOutcome> = None;
    for sigma in all.iter().filter(|s| welfare(s) == top) {
        let sol = solve_lp(&cell_program(economy, objective, sigma, &cells))?;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        if best
            .as_ref()
            .is_none_or(|b| objective.better(&sol.value, &b.value))
        {
            best = Some(OracleOutcome {
                value: sol.value,
                witness: Allocation::new(sol.point[..n].to_vec(), sigma.clone()),
            });
        }
    }
    best.ok_or(OracleError::Infeasible)
}
