//! Builders for the programs of the initialization, the rebate/surcharge loop
//! and the baseline. In every program the rent variables come first (one per
//! room, in room order) and the aggregate `R`, when present, follows them.

use std::collections::BTreeSet;

use super::{LinExpr, LinearProgram, ProgramTag, Relation, Sense};
use crate::model::{kappa_linearization, nu_lambda, Direction, Economy, Objective};
use crate::Rational;

/// Affine utilities `u_i(t, a) = constant[i][a] - slope[i][a] * t`, exact over
/// the region a program confines rents to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    pub constant: Vec<Vec<Rational>>,
    pub slope: Vec<Vec<Rational>>,
}

impl Linearization {
    fn from_pairs(pairs: Vec<Vec<(Rational, Rational)>>) -> Self {
        let (constant, slope) = pairs.into_iter().map(|row| row.into_iter().unzip()).unzip();
        Linearization { constant, slope }
    }

    /// Every pair in the violated regime: `(v + rho b) - (1 + rho) t`.
    pub fn above_budgets(economy: &Economy) -> Self {
        let n = economy.n();
        Self::from_pairs(
            (0..n)
                .map(|i| {
                    let rho = economy.rho(i);
                    let lam = Rational::one() + rho;
                    (0..n)
                        .map(|a| (economy.value(i, a) + rho * economy.budget(i), lam.clone()))
                        .collect()
                })
                .collect(),
        )
    }

    /// Every pair below budget: `v - t`.
    pub fn below_budgets(economy: &Economy) -> Self {
        let n = economy.n();
        Self::from_pairs(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|a| (economy.value(i, a).clone(), Rational::one()))
                        .collect()
                })
                .collect(),
        )
    }

    /// Left-side (rebate) or right-side (surcharge) linearization at `rents`.
    pub fn at(economy: &Economy, rents: &[Rational], direction: Direction) -> Self {
        match direction {
            Direction::Rebate => Self::from_pairs(nu_lambda(economy, rents)),
            Direction::Surcharge => Self::from_pairs(kappa_linearization(economy, rents)),
        }
    }

    pub fn utility(&self, agent: usize, room: usize, rent: &Rational) -> Rational {
        &self.constant[agent][room] - &self.slope[agent][room] * rent
    }
}

/// Kinked pairs whose regime must be preserved while moving in `direction`
/// from `rents`: pairs above budget when rebating (rents may not drop below
/// the budget), pairs strictly below budget when surcharging (rents may not
/// rise above it).
pub fn regime_pairs(
    economy: &Economy,
    rents: &[Rational],
    direction: Direction,
) -> BTreeSet<(usize, usize)> {
    let n = economy.n();
    let mut out = BTreeSet::new();
    for i in (0..n).filter(|&i| economy.has_kink(i)) {
        for (a, r) in rents.iter().enumerate() {
            let keep = match direction {
                Direction::Rebate => r > economy.budget(i),
                Direction::Surcharge => r < economy.budget(i),
            };
            if keep {
                out.insert((i, a));
            }
        }
    }
    out
}

fn rent_vars(lp: &mut LinearProgram, economy: &Economy, prefix: &str) -> Vec<usize> {
    let vars: Vec<usize> = economy
        .rooms
        .iter()
        .map(|id| lp.add_var(format!("{prefix}_{id}")))
        .collect();
    lp.tie_break = vars.clone();
    vars
}

/// Among optimal points, prefer rents that moved as little as possible.
fn stay_close(lp: &mut LinearProgram, direction: Direction) {
    lp.tie_break_sense = match direction {
        Direction::Rebate => Sense::Maximize,
        Direction::Surcharge => Sense::Minimize,
    };
}

/// The aggregate bound: a fresh variable `R` or the constant reached by a step.
enum Bound<'a> {
    Var(usize),
    Const(&'a Rational),
}

/// `R <= term` (maximizing families) or `R >= term`, one row per scope member.
fn family_rows(
    lp: &mut LinearProgram,
    objective: &Objective,
    sigma: &[usize],
    lin: &Linearization,
    vars: &[usize],
    bound: Bound<'_>,
) {
    let rel = if objective.family.maximizes() {
        Relation::Le
    } else {
        Relation::Ge
    };
    for (k, f) in objective.terms() {
        // term = c0 + coef * t_room
        let (room, c0, coef) = if objective.family.is_utility() {
            let a = sigma[k];
            (
                a,
                f.apply(&lin.constant[k][a]),
                -(&f.slope * &lin.slope[k][a]),
            )
        } else {
            (k, f.intercept.clone(), f.slope.clone())
        };
        let mut expr = LinExpr::new().with(vars[room], -coef);
        let rhs = match &bound {
            Bound::Var(r) => {
                expr.add(*r, Rational::one());
                c0
            }
            Bound::Const(value) => c0 - *value,
        };
        lp.constrain(expr, rel, rhs);
    }
}

/// `u_i(own) >= u_i(b)` for every agent and every other room.
fn no_envy_rows(lp: &mut LinearProgram, sigma: &[usize], lin: &Linearization, vars: &[usize]) {
    for (i, &own) in sigma.iter().enumerate() {
        for b in (0..sigma.len()).filter(|&b| b != own) {
            let expr = LinExpr::new()
                .with(vars[own], -lin.slope[i][own].clone())
                .with(vars[b], lin.slope[i][b].clone());
            lp.constrain(
                expr,
                Relation::Ge,
                &lin.constant[i][b] - &lin.constant[i][own],
            );
        }
    }
}

fn sum_expr(vars: &[usize]) -> LinExpr {
    vars.iter()
        .fold(LinExpr::new(), |e, &v| e.with(v, Rational::one()))
}

fn aggregate_sense(objective: &Objective) -> Sense {
    if objective.family.maximizes() {
        Sense::Maximize
    } else {
        Sense::Minimize
    }
}

/// Initial program at `target_rent`: every pair above budget when rebating
/// (valid from the high-rent bound up), every pair below budget when
/// surcharging (valid from the low-rent bound down).
pub fn build_init_lp(
    economy: &Economy,
    objective: &Objective,
    sigma: &[usize],
    target_rent: &Rational,
    direction: Direction,
) -> LinearProgram {
    let lin = match direction {
        Direction::Rebate => Linearization::above_budgets(economy),
        Direction::Surcharge => Linearization::below_budgets(economy),
    };
    let mut lp = LinearProgram::new(aggregate_sense(objective), ProgramTag::Init);
    let vars = rent_vars(&mut lp, economy, "r");
    let r = lp.add_var("R");
    lp.objective = LinExpr::var(r);
    family_rows(&mut lp, objective, sigma, &lin, &vars, Bound::Var(r));
    no_envy_rows(&mut lp, sigma, &lin, &vars);
    lp.constrain(sum_expr(&vars), Relation::Eq, target_rent.clone());
    lp
}

/// One step from `prev_rents` toward `target_rent`, moving every rent in
/// `direction` while keeping the pairs in `regime` on their side of the budget.
pub fn build_step_lp(
    economy: &Economy,
    objective: &Objective,
    sigma: &[usize],
    prev_rents: &[Rational],
    regime: &BTreeSet<(usize, usize)>,
    target_rent: &Rational,
    direction: Direction,
) -> LinearProgram {
    let lin = Linearization::at(economy, prev_rents, direction);
    let mut lp = LinearProgram::new(aggregate_sense(objective), ProgramTag::Step);
    let vars = rent_vars(&mut lp, economy, "t");
    stay_close(&mut lp, direction);
    let r = lp.add_var("R");
    lp.objective = LinExpr::var(r);
    let (cap, hold, total) = match direction {
        Direction::Rebate => (Relation::Le, Relation::Ge, Relation::Ge),
        Direction::Surcharge => (Relation::Ge, Relation::Le, Relation::Le),
    };
    for (a, prev) in prev_rents.iter().enumerate() {
        lp.constrain(LinExpr::var(vars[a]), cap, prev.clone());
    }
    family_rows(&mut lp, objective, sigma, &lin, &vars, Bound::Var(r));
    no_envy_rows(&mut lp, sigma, &lin, &vars);
    for &(i, a) in regime {
        lp.constrain(LinExpr::var(vars[a]), hold, economy.budget(i).clone());
    }
    lp.constrain(sum_expr(&vars), total, target_rent.clone());
    lp
}

/// Moves rents back against `direction` from `step_rents` as far as possible
/// while every scope member stays at least as well off as `step_value`, using
/// the linearization of the step that produced them.
pub fn build_restore_lp(
    economy: &Economy,
    objective: &Objective,
    sigma: &[usize],
    prev_rents: &[Rational],
    step_rents: &[Rational],
    step_value: &Rational,
    direction: Direction,
) -> LinearProgram {
    let lin = Linearization::at(economy, prev_rents, direction);
    let (sense, floor) = match direction {
        Direction::Rebate => (Sense::Maximize, Relation::Ge),
        Direction::Surcharge => (Sense::Minimize, Relation::Le),
    };
    let mut lp = LinearProgram::new(sense, ProgramTag::Restore);
    let vars = rent_vars(&mut lp, economy, "r");
    stay_close(&mut lp, direction);
    lp.objective = sum_expr(&vars);
    for (a, t) in step_rents.iter().enumerate() {
        lp.constrain(LinExpr::var(vars[a]), floor, t.clone());
    }
    family_rows(
        &mut lp,
        objective,
        sigma,
        &lin,
        &vars,
        Bound::Const(step_value),
    );
    no_envy_rows(&mut lp, sigma, &lin, &vars);
    lp
}

/// Baseline rebate: lower the total by up to `eta` without leaving the current
/// assignment's envy-free region or crossing a budget.
pub fn build_baseline_lp(
    economy: &Economy,
    sigma: &[usize],
    prev_rents: &[Rational],
    eta: &Rational,
) -> LinearProgram {
    let lin = Linearization::at(economy, prev_rents, Direction::Rebate);
    let mut lp = LinearProgram::new(Sense::Minimize, ProgramTag::Baseline);
    let vars = rent_vars(&mut lp, economy, "t");
    stay_close(&mut lp, Direction::Rebate);
    lp.objective = sum_expr(&vars);
    for (a, prev) in prev_rents.iter().enumerate() {
        lp.constrain(LinExpr::var(vars[a]), Relation::Le, prev.clone());
    }
    no_envy_rows(&mut lp, sigma, &lin, &vars);
    for (i, a) in regime_pairs(economy, prev_rents, Direction::Rebate) {
        lp.constrain(
            LinExpr::var(vars[a]),
            Relation::Ge,
            economy.budget(i).clone(),
        );
    }
    let floor: Rational = prev_rents.iter().sum::<Rational>() - eta;
    lp.constrain(sum_expr(&vars), Relation::Ge, floor);
    lp
}
