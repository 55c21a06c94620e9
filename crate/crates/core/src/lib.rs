//! Exact envy-free rent division for agents with soft budgets.
//!
//! An [`Economy`] gives each agent a value per room, a budget, and a slope
//! `rho` by which rent above the budget hurts more. [`solve`] returns an
//! envy-free allocation at the economy's total rent that is optimal for one of
//! four selections (maxmin or minmax of utilities or rents), computed in exact
//! rational arithmetic.

pub mod envy;
pub mod gen;
pub mod lp;
pub mod matching;
pub mod model;
pub mod oracle;
mod rational;
pub mod solver;

pub use envy::{check_membership, is_envy_free, EnvyError, EnvyWitness, MembershipVerdict};
pub use model::{
    validate, Affine, Allocation, Direction, Economy, Family, ModelError, Objective, Preference,
    SlopeSet, Violation,
};
pub use rational::{ParseRationalError, Rational};
pub use solver::{
    baseline_allocation, best_for_agent, iteration_bound, nonnegative_rents_possible, solve,
    BaselineResult, IterationRecord, SolveError, SolveResult, SolveTrace,
};
