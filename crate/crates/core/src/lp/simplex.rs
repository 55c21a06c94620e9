//! Dense two-phase primal simplex with Bland's rule.
//!
//! Single-variable constraints are folded into bounds and eliminated by a
//! change of variables, so the tableau only carries the genuinely coupled
//! rows. Every row starts with a unit column (its slack or an artificial);
//! those columns are kept to the end so the final tableau still contains
//! the basis inverse, from which the dual multipliers are read.

use super::{
    Certificate, Constraint, LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense,
};
use crate::Rational;

type SparseRow = (Vec<(usize, Rational)>, Relation, Rational);

/// How an original variable is expressed through tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// `x = lower + col`
    Shift { lower: Rational, col: usize },
    /// `x = upper - col`
    Reflect { upper: Rational, col: usize },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

impl VarMap {
    fn offset(&self) -> Rational {
        match self {
            VarMap::Shift { lower, .. } => lower.clone(),
            VarMap::Reflect { upper, .. } => upper.clone(),
            VarMap::Split { .. } => Rational::zero(),
        }
    }

    fn columns(&self, coef: &Rational) -> Vec<(usize, Rational)> {
        match self {
            VarMap::Shift { col, .. } => vec![(*col, coef.clone())],
            VarMap::Reflect { col, .. } => vec![(*col, -coef)],
            VarMap::Split { pos, neg } => vec![(*pos, coef.clone()), (*neg, -coef)],
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if p != Rational::one() {
            for x in self.rows[r].iter_mut().filter(|x| !x.is_zero()) {
                *x = &*x / &p;
            }
            self.rhs[r] = &self.rhs[r] / &p;
        }
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][e].is_zero() {
                continue;
            }
            let f = self.rows[i][e].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] = &row[j] - &f * &pivot_row[j];
            }
            self.rhs[i] = &self.rhs[i] - &f * &pivot_rhs;
        }
        if !self.reduced[e].is_zero() {
            let f = self.reduced[e].clone();
            for &j in &nz {
                self.reduced[j] = &self.reduced[j] - &f * &pivot_row[j];
            }
        }
        self.basis[r] = e;
    }

    /// Reduced costs `c - c_B^T T` for a fresh cost vector.
    fn price(&mut self, cost: &[Rational]) {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, x) in self.rows[i].iter().enumerate() {
                if !x.is_zero() {
                    d[j] = &d[j] - &cost[b] * x;
                }
            }
        }
        self.reduced = d;
    }

    /// Bland's rule: lowest-index improving column enters; among minimum
    /// ratio rows, the one whose basic column has the lowest index leaves.
    fn run(&mut self, allowed: &[bool]) -> Outcome {
        loop {
            let entering =
                (0..self.reduced.len()).find(|&j| allowed[j] && self.reduced[j].is_negative());
            let Some(e) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Outcome::Unbounded;
            };
            self.pivot(r, e);
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[i].clone();
        }
        x
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        point: Vec::new(),
        value: Rational::zero(),
        certificate: None,
    }
}

fn unbounded() -> LpSolution {
    LpSolution {
        status: LpStatus::Unbounded,
        point: Vec::new(),
        value: Rational::zero(),
        certificate: None,
    }
}

fn check_refs(lp: &LinearProgram) -> Result<(), LpError> {
    let n = lp.num_vars();
    for (k, c) in lp.constraints.iter().enumerate() {
        if let Some((v, _)) = c.expr.terms.iter().find(|(v, _)| *v >= n) {
            return Err(LpError::UnknownVariable {
                constraint: k,
                var: *v,
            });
        }
    }
    if let Some((v, _)) = lp.objective.terms.iter().find(|(v, _)| *v >= n) {
        return Err(LpError::UnknownObjectiveVariable(*v));
    }
    if let Some(&v) = lp.tie_break.iter().find(|&&v| v >= n) {
        return Err(LpError::UnknownObjectiveVariable(v));
    }
    Ok(())
}

/// Solves `lp` exactly. Infeasible and unbounded programs are reported
/// through [`LpStatus`]; only malformed programs are errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    check_refs(lp)?;
    let n = lp.num_vars();

    // Fold single-variable constraints into bounds.
    let mut lower: Vec<Option<Rational>> = vec![None; n];
    let mut upper: Vec<Option<Rational>> = vec![None; n];
    let mut general: Vec<&Constraint> = Vec::new();
    for c in &lp.constraints {
        match c.expr.terms.as_slice() {
            [] => {
                let ok = match c.relation {
                    Relation::Le => Rational::zero() <= c.rhs,
                    Relation::Ge => Rational::zero() >= c.rhs,
                    Relation::Eq => c.rhs.is_zero(),
                };
                if !ok {
                    return Ok(infeasible());
                }
            }
            [(v, coef)] => {
                let bound = &c.rhs / coef;
                let rel = match (c.relation, coef.is_negative()) {
                    (Relation::Le, true) => Relation::Ge,
                    (Relation::Ge, true) => Relation::Le,
                    (r, _) => r,
                };
                if matches!(rel, Relation::Le | Relation::Eq)
                    && upper[*v].as_ref().is_none_or(|u| &bound < u)
                {
                    upper[*v] = Some(bound.clone());
                }
                if matches!(rel, Relation::Ge | Relation::Eq)
                    && lower[*v].as_ref().is_none_or(|l| &bound > l)
                {
                    lower[*v] = Some(bound);
                }
            }
            _ => general.push(c),
        }
    }
    for v in 0..n {
        if let (Some(l), Some(u)) = (&lower[v], &upper[v]) {
            if l > u {
                return Ok(infeasible());
            }
        }
    }

    // Columns for the original variables.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for v in 0..n {
        let m = match (&lower[v], &upper[v]) {
            (Some(l), u) => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = u {
                    bound_rows.push((col, u - l));
                }
                VarMap::Shift {
                    lower: l.clone(),
                    col,
                }
            }
            (None, Some(u)) => {
                let col = ncols;
                ncols += 1;
                VarMap::Reflect {
                    upper: u.clone(),
                    col,
                }
            }
            (None, None) => {
                let pos = ncols;
                ncols += 2;
                VarMap::Split { pos, neg: pos + 1 }
            }
        };
        maps.push(m);
    }
    let structural = ncols;

    // Rows over structural columns, with their relation and rhs.
    let mut rows: Vec<SparseRow> = Vec::new();
    for c in general {
        let mut coefs: Vec<(usize, Rational)> = Vec::new();
        let mut rhs = c.rhs.clone();
        for (v, a) in &c.expr.terms {
            rhs = &rhs - a * &maps[*v].offset();
            coefs.extend(maps[*v].columns(a));
        }
        rows.push((coefs, c.relation, rhs));
    }
    for (col, width) in bound_rows {
        rows.push((vec![(col, Rational::one())], Relation::Le, width));
    }

    let m = rows.len();
    let slack_count = rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .count();
    let first_slack = structural;
    let first_art = structural + slack_count;

    // Normalize rows to nonnegative rhs and pick the initial unit columns.
    let mut matrix: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs_vec = Vec::with_capacity(m);
    let mut init_basis = Vec::with_capacity(m);
    let mut art_rows = Vec::new();
    let mut next_slack = first_slack;
    for (coefs, rel, rhs) in rows {
        let mut row = vec![Rational::zero(); first_art];
        for (j, a) in coefs {
            row[j] = &row[j] + &a;
        }
        let slack = match rel {
            Relation::Le => Some((next_slack, Rational::one())),
            Relation::Ge => Some((next_slack, -Rational::one())),
            Relation::Eq => None,
        };
        if let Some((j, s)) = &slack {
            row[*j] = s.clone();
            next_slack += 1;
        }
        let mut rhs = rhs;
        if rhs.is_negative() {
            for x in row.iter_mut() {
                *x = -&*x;
            }
            rhs = -rhs;
        }
        match slack {
            Some((j, _)) if row[j] == Rational::one() => init_basis.push(j),
            _ => {
                init_basis.push(usize::MAX);
                art_rows.push(matrix.len());
            }
        }
        matrix.push(row);
        rhs_vec.push(rhs);
    }
    let total = first_art + art_rows.len();
    for (k, &i) in art_rows.iter().enumerate() {
        init_basis[i] = first_art + k;
    }
    let mut tab_rows = matrix.clone();
    for (i, row) in tab_rows.iter_mut().enumerate() {
        row.resize(total, Rational::zero());
        if init_basis[i] >= first_art {
            row[init_basis[i]] = Rational::one();
        }
    }

    // Primary cost in minimization form.
    let flip = lp.sense == Sense::Maximize;
    let mut cost = vec![Rational::zero(); total];
    for (v, a) in &lp.objective.terms {
        let a = if flip { -a } else { a.clone() };
        for (j, c) in maps[*v].columns(&a) {
            cost[j] = &cost[j] + &c;
        }
    }

    let mut tab = Tableau {
        rows: tab_rows,
        rhs: rhs_vec.clone(),
        basis: init_basis.clone(),
        reduced: Vec::new(),
    };

    if !art_rows.is_empty() {
        let mut phase1 = vec![Rational::zero(); total];
        for c in phase1.iter_mut().skip(first_art) {
            *c = Rational::one();
        }
        tab.price(&phase1);
        let allowed = vec![true; total];
        // Phase one is bounded below by zero.
        let _ = tab.run(&allowed);
        let infeas: Rational = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| **b >= first_art)
            .map(|(_, x)| x.clone())
            .sum();
        if infeas.is_positive() {
            return Ok(infeasible());
        }
        for i in 0..m {
            if tab.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    let mut allowed: Vec<bool> = (0..total).map(|j| j < first_art).collect();
    tab.price(&cost);
    if let Outcome::Unbounded = tab.run(&allowed) {
        return Ok(unbounded());
    }

    // Lexicographic tie-break over the optimal face.
    for &v in &lp.tie_break {
        for j in 0..total {
            if allowed[j] && tab.reduced[j].is_positive() {
                allowed[j] = false;
            }
        }
        let mut c2 = vec![Rational::zero(); total];
        let unit = match lp.tie_break_sense {
            Sense::Minimize => Rational::one(),
            Sense::Maximize => -Rational::one(),
        };
        for (j, c) in maps[v].columns(&unit) {
            c2[j] = c;
        }
        tab.price(&c2);
        if let Outcome::Unbounded = tab.run(&allowed) {
            break;
        }
    }

    let x = tab.column_values(total);
    let point: Vec<Rational> = maps
        .iter()
        .map(|mp| match mp {
            VarMap::Shift { lower, col } => lower + &x[*col],
            VarMap::Reflect { upper, col } => upper - &x[*col],
            VarMap::Split { pos, neg } => &x[*pos] - &x[*neg],
        })
        .collect();
    let value = lp.objective.eval(&point);

    // Tie-break pivots only enter columns with zero primary reduced cost, so
    // the final basis is still dual feasible for the primary objective.
    let certificate = Certificate {
        matrix,
        rhs: rhs_vec,
        cost: cost[..first_art].to_vec(),
        primal: x[..first_art].to_vec(),
        dual: dual_from(&tab, &cost, &init_basis),
    };
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point,
        value,
        certificate: Some(certificate),
    })
}

/// `y^T = c_B^T B^{-1}`, reading `B^{-1}` off the initial unit columns.
fn dual_from(tab: &Tableau, cost: &[Rational], init_basis: &[usize]) -> Vec<Rational> {
    init_basis
        .iter()
        .map(|&k| {
            tab.basis
                .iter()
                .enumerate()
                .filter(|(_, b)| !cost[**b].is_zero())
                .map(|(i, b)| &cost[*b] * &tab.rows[i][k])
                .sum()
        })
        .collect()
}
