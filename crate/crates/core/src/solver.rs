//! Initialization at an extreme total rent followed by the rebate (or
//! surcharge) loop that walks the selection down (or up) to the target rent.

use crate::envy::{check_membership, envy_witness, is_envy_free, tight_graph, MembershipVerdict};
use crate::lp::{
    build_baseline_lp, build_init_lp, build_restore_lp, build_step_lp, regime_pairs, solve_lp,
    LinearProgram, LpError, LpStatus, ProgramTag, Sense,
};
use crate::matching::{extremal_perfect_matching, optimal_assignment, MatchingError};
use crate::model::{
    high_rent_bound, low_rent_bound, validate, Allocation, Direction, Economy, Family, Objective,
    Violation,
};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid input: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
    #[error("{program:?} program ended {status:?}")]
    Lp {
        program: ProgramTag,
        status: LpStatus,
    },
    #[error(transparent)]
    Malformed(#[from] LpError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("iterate {iteration} has envy: agent {envious} envies agent {envied}")]
    EnvyInIterate {
        iteration: usize,
        envious: usize,
        envied: usize,
    },
    #[error("exceeded the iteration bound of {0}")]
    IterationBound(usize),
    #[error("output failed certification: {0}")]
    Uncertified(String),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitRecord {
    /// Total rent the initial program was solved at.
    pub boundary_rent: Rational,
    pub allocation: Allocation,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub s: usize,
    pub sigma: Vec<usize>,
    pub weight_exponents: Vec<usize>,
    pub product_weight: Rational,
    pub step_rents: Vec<Rational>,
    pub step_value: Rational,
    pub membership: MembershipVerdict,
    pub restore_rents: Option<Vec<Rational>>,
    pub sb_size_before: usize,
    /// Kinked pairs the next step must keep on their side of the budget.
    pub sb_size_after: usize,
    /// The restored rents are feasible for the step program at the step's
    /// value.
    pub restore_consistent: Option<bool>,
    /// No rent sits at its previous value after the step.
    pub caps_slack: bool,
    /// Membership at the rents carried into the next iteration.
    pub adopted_member: bool,
}

impl IterationRecord {
    pub fn adopted_rents(&self) -> &[Rational] {
        self.restore_rents.as_deref().unwrap_or(&self.step_rents)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveTrace {
    pub direction: Direction,
    pub init: InitRecord,
    pub iterations: Vec<IterationRecord>,
    pub final_allocation: Allocation,
    pub objective_value: Rational,
}

impl SolveTrace {
    /// Iterations that ended with neither fewer budget-violating pairs nor a
    /// change in the next matching's product weight. Empty on every correct
    /// run.
    pub fn stalled_iterations(&self) -> Vec<usize> {
        self.iterations
            .windows(2)
            .filter(|w| {
                w[0].sb_size_after >= w[0].sb_size_before
                    && w[0].product_weight == w[1].product_weight
            })
            .map(|w| w[0].s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub objective_value: Rational,
    pub trace: SolveTrace,
    pub certified: bool,
}

/// `n^2 (n+1)^(k-1) + 2`.
pub fn iteration_bound(n: usize, k: usize) -> usize {
    let per_regime = (n + 1).saturating_pow(k.saturating_sub(1) as u32);
    n.saturating_mul(n)
        .saturating_mul(per_regime)
        .saturating_add(2)
}

fn run(lp: &LinearProgram) -> Result<(Vec<Rational>, Rational), SolveError> {
    let sol = solve_lp(lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Lp {
            program: lp.tag,
            status: sol.status,
        });
    }
    Ok((sol.point, sol.value))
}

fn rents_of(point: &[Rational], n: usize) -> Vec<Rational> {
    point[..n].to_vec()
}

/// The initial allocation: at `max(m, m')` for rebate families, where every
/// rent is above every budget, or at `min(m, m'')` for surcharge families,
/// where every rent is below.
pub fn initialize(
    economy: &Economy,
    objective: &Objective,
) -> Result<(Rational, Allocation), SolveError> {
    validate(economy, Some(objective)).map_err(SolveError::Invalid)?;
    let direction = objective.family.direction();
    let m = &economy.total_rent;
    let (boundary, values) = match direction {
        Direction::Rebate => (
            Rational::max_of(m, &high_rent_bound(economy)).clone(),
            economy.linearized_values(),
        ),
        Direction::Surcharge => (
            Rational::min_of(m, &low_rent_bound(economy)).clone(),
            economy.raw_values(),
        ),
    };
    let sigma = optimal_assignment(&values, Sense::Maximize);
    let (point, _) = run(&build_init_lp(
        economy, objective, &sigma, &boundary, direction,
    ))?;
    Ok((
        boundary,
        Allocation::new(rents_of(&point, economy.n()), sigma),
    ))
}

fn reached(direction: Direction, total: &Rational, target: &Rational) -> bool {
    match direction {
        Direction::Rebate => total <= target,
        Direction::Surcharge => total >= target,
    }
}

/// Computes an allocation in the selection described by `objective` at the
/// economy's total rent, with a trace of every iteration.
pub fn solve(economy: &Economy, objective: &Objective) -> Result<SolveResult, SolveError> {
    let (boundary, init_alloc) = initialize(economy, objective)?;
    let n = economy.n();
    let direction = objective.family.direction();
    let target = &economy.total_rent;
    let init = InitRecord {
        boundary_rent: boundary.clone(),
        member: check_membership(economy, &init_alloc, objective).member,
        allocation: init_alloc.clone(),
    };
    let matching_sense = match direction {
        Direction::Rebate => Sense::Maximize,
        Direction::Surcharge => Sense::Minimize,
    };
    let bound = iteration_bound(n, economy.slope_set.len());
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut current = init_alloc;
    let mut member = init.member;
    while !(reached(direction, &current.total(), target) && member) {
        let s = iterations.len() + 1;
        if s > bound {
            return Err(SolveError::IterationBound(bound));
        }
        let prev = &current.rents;
        let graph = tight_graph(economy, prev, direction);
        let matching = extremal_perfect_matching(&graph, matching_sense)?;
        let sigma = matching.assignment.clone();
        let regime = regime_pairs(economy, prev, direction);
        let step_lp = build_step_lp(economy, objective, &sigma, prev, &regime, target, direction);
        let (point, step_value) = run(&step_lp)?;
        let step_rents = rents_of(&point, n);
        let caps_slack = step_rents.iter().zip(prev).all(|(t, p)| t != p);
        let step_alloc = Allocation::new(step_rents.clone(), sigma.clone());
        let membership = check_membership(economy, &step_alloc, objective);

        let (next, restore_rents, restore_consistent) = if membership.member {
            (step_alloc, None, None)
        } else {
            let lp = build_restore_lp(
                economy,
                objective,
                &sigma,
                prev,
                &step_rents,
                &step_value,
                direction,
            );
            let (point, _) = run(&lp)?;
            let restored = rents_of(&point, n);
            let mut probe = restored.clone();
            probe.push(step_value.clone());
            let consistent = step_lp.is_feasible(&probe);
            (
                Allocation::new(restored.clone(), sigma.clone()),
                Some(restored),
                Some(consistent),
            )
        };
        if let Some(w) = envy_witness(economy, &next.rents, &next.assignment) {
            return Err(SolveError::EnvyInIterate {
                iteration: s,
                envious: w.envious,
                envied: w.envied,
            });
        }
        member = match &restore_rents {
            None => true,
            Some(_) => check_membership(economy, &next, objective).member,
        };
        iterations.push(IterationRecord {
            s,
            sigma,
            weight_exponents: matching.weight_exponents,
            product_weight: matching.product_weight,
            step_rents,
            step_value,
            membership,
            restore_rents,
            sb_size_before: regime.len(),
            sb_size_after: regime_pairs(economy, &next.rents, direction).len(),
            restore_consistent,
            caps_slack,
            adopted_member: member,
        });
        current = next;
    }

    if let Err(e) = is_envy_free(economy, &current) {
        return Err(SolveError::Uncertified(e.to_string()));
    }
    let verdict = check_membership(economy, &current, objective);
    if !verdict.member {
        return Err(SolveError::Uncertified(
            "final allocation fails the membership test".into(),
        ));
    }
    let objective_value = objective.value(economy, &current);
    let trace = SolveTrace {
        direction,
        init,
        iterations,
        final_allocation: current.clone(),
        objective_value: objective_value.clone(),
    };
    Ok(SolveResult {
        allocation: current,
        objective_value,
        trace,
        certified: true,
    })
}

/// The envy-free allocation best for `agent`: maxmin utility over that agent
/// alone.
pub fn best_for_agent(economy: &Economy, agent: usize) -> Result<SolveResult, SolveError> {
    if agent >= economy.n() {
        return Err(SolveError::UnknownAgent(agent));
    }
    solve(
        economy,
        &Objective::scoped(Family::MaxminUtility, vec![agent]),
    )
}

/// Outcome of the baseline rebate procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineResult {
    pub allocation: Allocation,
    /// Rebate programs solved after initialization.
    pub solves: usize,
}

/// Some envy-free allocation at the economy's total rent, reached by
/// rebating from the high-rent initialization as fast as each matching
/// allows, with no selection guarantee.
pub fn baseline_allocation(economy: &Economy) -> Result<BaselineResult, SolveError> {
    let objective = Objective::full(Family::MaxminUtility, economy.n());
    let (_, mut current) = initialize(economy, &objective)?;
    let target = &economy.total_rent;
    let bound = iteration_bound(economy.n(), economy.slope_set.len());
    let mut solves = 0;
    while &current.total() > target {
        solves += 1;
        if solves > bound {
            return Err(SolveError::IterationBound(bound));
        }
        let graph = tight_graph(economy, &current.rents, Direction::Rebate);
        let sigma = extremal_perfect_matching(&graph, Sense::Maximize)?.assignment;
        let eta = current.total() - target;
        let (point, _) = run(&build_baseline_lp(economy, &sigma, &current.rents, &eta))?;
        current = Allocation::new(rents_of(&point, economy.n()), sigma);
        if let Some(w) = envy_witness(economy, &current.rents, &current.assignment) {
            return Err(SolveError::EnvyInIterate {
                iteration: solves,
                envious: w.envious,
                envied: w.envied,
            });
        }
    }
    Ok(BaselineResult {
        allocation: current,
        solves,
    })
}

/// Whether some envy-free allocation charges every room a nonnegative rent,
/// decided by the maxmin-rent selection over all rooms.
pub fn nonnegative_rents_possible(economy: &Economy) -> Result<(bool, SolveResult), SolveError> {
    let result = solve(economy, &Objective::full(Family::MaxminRent, economy.n()))?;
    Ok((!result.objective_value.is_negative(), result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SlopeSet;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn qs(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| q(s)).collect()
    }

    fn e1() -> Economy {
        Economy::quasi_linear(&[vec![10, 2], vec![4, 6]], 10).unwrap()
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

    #[test]
    fn e2_initialization() {
        let (m, alloc) = initialize(&e2(), &Objective::full(Family::MaxminUtility, 2)).unwrap();
        assert_eq!(m, q("18"));
        assert_eq!(alloc.rents, qs(&["10", "8"]));
        assert_eq!(alloc.assignment, vec![0, 1]);
    }

    #[test]
    fn e2_trace() {
        let r = solve(&e2(), &Objective::full(Family::MaxminUtility, 2)).unwrap();
        assert_eq!(r.allocation.rents, qs(&["19/3", "11/3"]));
        assert_eq!(r.allocation.assignment, vec![0, 1]);
        assert_eq!(r.objective_value, q("7/3"));
        let it = &r.trace.iterations;
        assert_eq!(it.len(), 2);
        assert_eq!(it[0].step_rents, qs(&["7", "5"]));
        assert!(it[0].membership.member);
        assert_eq!(it[0].sb_size_after, 2);
        assert!(it.iter().all(|i| i.restore_rents.is_none()));
    }

    #[test]
    fn quasi_linear_init_and_loop() {
        let e = e1();
        let (m, alloc) = initialize(&e, &Objective::full(Family::MaxminUtility, 2)).unwrap();
        assert_eq!(m, q("16"));
        assert_eq!(alloc.rents, qs(&["10", "6"]));
        let r = solve(&e, &Objective::full(Family::MaxminUtility, 2)).unwrap();
        assert_eq!(r.allocation.rents, qs(&["7", "3"]));
        assert_eq!(r.trace.iterations.len(), 1);
    }

    #[test]
    fn at_or_above_the_high_bound_no_loop_runs() {
        let e = e1().with_total_rent(q("20"));
        let r = solve(&e, &Objective::full(Family::MaxminUtility, 2)).unwrap();
        assert!(r.trace.iterations.is_empty());
        assert_eq!(r.trace.init.boundary_rent, q("20"));
    }

    #[test]
    fn minmax_rent_example() {
        let r = solve(&e1(), &Objective::full(Family::MinmaxRent, 2)).unwrap();
        assert_eq!(r.allocation.rents, qs(&["5", "5"]));
        assert_eq!(r.objective_value, q("5"));
    }

    #[test]
    fn best_for_each_agent() {
        let e = e1();
        let one = best_for_agent(&e, 0).unwrap();
        assert_eq!(one.allocation.rents, qs(&["4", "6"]));
        assert_eq!(one.objective_value, q("6"));
        let two = best_for_agent(&e, 1).unwrap();
        assert_eq!(two.allocation.rents, qs(&["9", "1"]));
        assert_eq!(two.objective_value, q("5"));
        assert_eq!(best_for_agent(&e, 2), Err(SolveError::UnknownAgent(2)));
    }

    #[test]
    fn symmetric_economy_splits_evenly() {
        let e = Economy::quasi_linear(&[vec![5, 5], vec![5, 5]], 6).unwrap();
        for agent in 0..2 {
            assert_eq!(
                best_for_agent(&e, agent).unwrap().allocation.rents,
                qs(&["3", "3"])
            );
        }
    }

    #[test]
    fn single_agent() {
        let e = Economy::from_parts(
            vec![qs(&["4"])],
            qs(&["2"]),
            vec![1],
            SlopeSet::new(qs(&["0", "1"])).unwrap(),
            q("7"),
        )
        .unwrap();
        for family in Family::ALL {
            let r = solve(&e, &Objective::full(family, 1)).unwrap();
            assert_eq!(r.allocation.rents, qs(&["7"]));
            assert!(r.certified);
        }
    }

    #[test]
    fn baseline_is_envy_free() {
        for e in [e1(), e2()] {
            let b = baseline_allocation(&e).unwrap();
            assert_eq!(is_envy_free(&e, &b.allocation), Ok(()));
        }
        let b = baseline_allocation(&e1()).unwrap();
        let d = &b.allocation.rents[0] - &b.allocation.rents[1];
        assert!(d >= q("-2") && d <= q("8"));
    }

    #[test]
    fn baseline_above_the_bound_is_the_init() {
        let e = e1().with_total_rent(q("30"));
        assert_eq!(baseline_allocation(&e).unwrap().solves, 0);
    }

    #[test]
    fn invalid_objective_is_rejected() {
        let obj = Objective::scoped(Family::MaxminUtility, vec![]);
        assert!(matches!(solve(&e1(), &obj), Err(SolveError::Invalid(_))));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(iteration_bound(2, 2), 2 * 2 * 3 + 2);
        assert_eq!(iteration_bound(3, 1), 9 + 2);
    }
}
