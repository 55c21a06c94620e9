//! Exact linear programming over [`Rational`] and builders for the programs
//! the solver and baseline run.

mod programs;
mod simplex;

use std::fmt::{self, Write as _};

use crate::Rational;

pub use programs::{
    build_baseline_lp, build_init_lp, build_restore_lp, build_step_lp, regime_pairs, Linearization,
};
pub use simplex::solve_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// Which program a [`LinearProgram`] instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramTag {
    Init,
    Step,
    Restore,
    Baseline,
    Oracle,
    Other,
}

impl ProgramTag {
    fn name(self) -> &'static str {
        match self {
            ProgramTag::Init => "init",
            ProgramTag::Step => "step",
            ProgramTag::Restore => "restore",
            ProgramTag::Baseline => "baseline",
            ProgramTag::Oracle => "oracle",
            ProgramTag::Other => "other",
        }
    }
}

/// A sparse linear form `sum coef * x_var`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: Vec<(usize, Rational)>,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn var(v: usize) -> Self {
        LinExpr {
            terms: vec![(v, Rational::one())],
        }
    }

    /// Adds `coef * x_var`, merging with an existing term on the same variable.
    pub fn add(&mut self, var: usize, coef: Rational) -> &mut Self {
        if coef.is_zero() {
            return self;
        }
        if let Some(pos) = self.terms.iter().position(|(v, _)| *v == var) {
            let merged = &self.terms[pos].1 + &coef;
            if merged.is_zero() {
                self.terms.remove(pos);
            } else {
                self.terms[pos].1 = merged;
            }
        } else {
            self.terms.push((var, coef));
        }
        self
    }

    pub fn with(mut self, var: usize, coef: Rational) -> Self {
        self.add(var, coef);
        self
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.terms.iter().map(|(v, c)| c * &point[*v]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(expr: LinExpr, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            expr,
            relation,
            rhs,
        }
    }

    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        let lhs = self.expr.eval(point);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// All variables are free (unbounded in sign); bounds are ordinary
/// single-variable constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub sense: Sense,
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
    pub tag: ProgramTag,
    /// Variables resolved lexicographically among optimal points, in the
    /// direction of `tie_break_sense`.
    pub tie_break: Vec<usize>,
    pub tie_break_sense: Sense,
}

impl LinearProgram {
    pub fn new(sense: Sense, tag: ProgramTag) -> Self {
        LinearProgram {
            names: Vec::new(),
            sense,
            objective: LinExpr::new(),
            constraints: Vec::new(),
            tag,
            tie_break: Vec::new(),
            tie_break_sense: match sense {
                Sense::Maximize => Sense::Minimize,
                Sense::Minimize => Sense::Maximize,
            },
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn constrain(&mut self, expr: LinExpr, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint::new(expr, relation, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Exact feasibility of `point` against every constraint.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars() && self.constraints.iter().all(|c| c.is_satisfied(point))
    }

    /// Plain-text dump in an LP-format style, rationals as `p/q`.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ program: {}", self.tag.name());
        out.push_str(match self.sense {
            Sense::Maximize => "maximize\n",
            Sense::Minimize => "minimize\n",
        });
        let _ = writeln!(out, " obj: {}", self.format_expr(&self.objective));
        out.push_str("subject to\n");
        for (k, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(
                out,
                " c{k}: {} {} {}",
                self.format_expr(&c.expr),
                c.relation,
                c.rhs
            );
        }
        out.push_str("bounds\n");
        for name in &self.names {
            let _ = writeln!(out, " {name} free");
        }
        out.push_str("end\n");
        out
    }

    fn format_expr(&self, e: &LinExpr) -> String {
        if e.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (v, c) in &e.terms {
            let sign = if c.is_negative() { '-' } else { '+' };
            let _ = write!(s, "{sign} {} {} ", c.abs(), self.names[*v]);
        }
        s.trim_end().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; empty unless optimal.
    pub point: Vec<Rational>,
    pub value: Rational,
    /// Optimality certificate for the internal standard form, present when
    /// optimal.
    pub certificate: Option<Certificate>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Dual multipliers of the standard-form program `min c.x, Ax = b, x >= 0`
/// the solver actually ran, with the data needed to re-check them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub(crate) matrix: Vec<Vec<Rational>>,
    pub(crate) rhs: Vec<Rational>,
    pub(crate) cost: Vec<Rational>,
    pub(crate) primal: Vec<Rational>,
    pub(crate) dual: Vec<Rational>,
}

impl Certificate {
    /// Checks primal feasibility, dual feasibility (`A^T y <= c`) and equal
    /// objective values, all exactly.
    pub fn verify(&self) -> bool {
        let rows = self.matrix.len();
        let cols = self.cost.len();
        if self.primal.iter().any(Rational::is_negative) {
            return false;
        }
        for i in 0..rows {
            let lhs: Rational = (0..cols)
                .map(|j| &self.matrix[i][j] * &self.primal[j])
                .sum();
            if lhs != self.rhs[i] {
                return false;
            }
        }
        for j in 0..cols {
            let aty: Rational = (0..rows).map(|i| &self.matrix[i][j] * &self.dual[i]).sum();
            if aty > self.cost[j] {
                return false;
            }
        }
        let primal_obj: Rational = (0..cols).map(|j| &self.cost[j] * &self.primal[j]).sum();
        let dual_obj: Rational = (0..rows).map(|i| &self.rhs[i] * &self.dual[i]).sum();
        primal_obj == dual_obj
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint {constraint} references undeclared variable {var}")]
    UnknownVariable { constraint: usize, var: usize },
    #[error("objective references undeclared variable {0}")]
    UnknownObjectiveVariable(usize),
}
