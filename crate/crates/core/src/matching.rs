//! Exact optimal assignments and extremal perfect matchings on tight graphs.
//!
//! A single Hungarian routine serves both: it only needs an ordered abelian
//! group of costs. Additive rationals give the ordinary assignment problem;
//! positive rationals under multiplication give matchings optimizing the
//! product of slope weights, which orders matchings exactly as the sum of
//! their logarithms would.

use crate::envy::TightEnvyGraph;
use crate::lp::Sense;
use crate::Rational;

trait Cost: Clone + Ord {
    fn identity() -> Self;
    fn combine(&self, other: &Self) -> Self;
    fn remove(&self, other: &Self) -> Self;
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Additive(Rational);

impl Cost for Additive {
    fn identity() -> Self {
        Additive(Rational::zero())
    }
    fn combine(&self, other: &Self) -> Self {
        Additive(&self.0 + &other.0)
    }
    fn remove(&self, other: &Self) -> Self {
        Additive(&self.0 - &other.0)
    }
}

/// Positive rationals under multiplication.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Multiplicative(Rational);

impl Cost for Multiplicative {
    fn identity() -> Self {
        Multiplicative(Rational::one())
    }
    fn combine(&self, other: &Self) -> Self {
        Multiplicative(&self.0 * &other.0)
    }
    fn remove(&self, other: &Self) -> Self {
        Multiplicative(&self.0 / &other.0)
    }
}

/// Minimum-cost perfect matching of rows to columns; `None` entries are
/// missing edges. Returns the row-to-column assignment together with the
/// set of edges tight under the final dual, which contains every optimal
/// matching.
fn hungarian<C: Cost>(cost: &[Vec<Option<C>>]) -> Option<(Vec<usize>, Vec<Vec<bool>>)> {
    let n = cost.len();
    // 1-based rows and columns; column 0 is the virtual start.
    let mut u = vec![C::identity(); n + 1];
    let mut v = vec![C::identity(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<C>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<C> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(c) = &cost[i0 - 1][j - 1] {
                    let cur = c.remove(&u[i0]).remove(&v[j]);
                    if minv[j].as_ref().is_none_or(|m| &cur < m) {
                        minv[j] = Some(cur);
                        way[j] = j0;
                    }
                }
                if let Some(m) = &minv[j] {
                    if delta.as_ref().is_none_or(|d| m < d) {
                        delta = Some(m.clone());
                        j1 = j;
                    }
                }
            }
            let delta = delta?;
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]].combine(&delta);
                    v[j] = v[j].remove(&delta);
                } else if let Some(m) = &minv[j] {
                    minv[j] = Some(m.remove(&delta));
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let tight = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    cost[i][j]
                        .as_ref()
                        .is_some_and(|c| *c == u[i + 1].combine(&v[j + 1]))
                })
                .collect()
        })
        .collect();
    Some((assignment, tight))
}

/// Kuhn's augmenting-path test for a perfect matching of `rows` into the
/// columns not in `taken`.
fn has_perfect_matching(adj: &[Vec<bool>], rows: &[usize], taken: &[bool]) -> bool {
    fn augment(
        r: usize,
        adj: &[Vec<bool>],
        taken: &[bool],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for c in 0..adj[r].len() {
            if adj[r][c] && !taken[c] && !seen[c] {
                seen[c] = true;
                if owner[c].is_none_or(|o| augment(o, adj, taken, seen, owner)) {
                    owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    let n = taken.len();
    let mut owner = vec![None; n];
    rows.iter()
        .all(|&r| augment(r, adj, taken, &mut vec![false; n], &mut owner))
}

/// Lexicographically smallest perfect matching of `adj`, if one exists.
fn lex_min_perfect(adj: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let choice = (0..n).find(|&c| {
            if !adj[i][c] || taken[c] {
                return false;
            }
            taken[c] = true;
            let ok = has_perfect_matching(adj, &rest, &taken);
            taken[c] = false;
            ok
        })?;
        taken[choice] = true;
        out.push(choice);
    }
    Some(out)
}

fn optimize<C: Cost>(cost: &[Vec<Option<C>>]) -> Option<Vec<usize>> {
    if cost.is_empty() {
        return Some(Vec::new());
    }
    let (_, tight) = hungarian(cost)?;
    lex_min_perfect(&tight)
}

/// A bijection agent -> room maximizing (or minimizing) the total value,
/// lexicographically smallest among optimal ones.
pub fn optimal_assignment(values: &[Vec<Rational>], sense: Sense) -> Vec<usize> {
    let cost: Vec<Vec<Option<Additive>>> = values
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    Some(Additive(match sense {
                        Sense::Maximize => -x,
                        Sense::Minimize => x.clone(),
                    }))
                })
                .collect()
        })
        .collect();
    optimize(&cost).expect("complete matrices always admit a perfect matching")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchingError {
    #[error("the tight graph has no perfect matching")]
    NoPerfectMatching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingResult {
    pub assignment: Vec<usize>,
    /// How many matched edges carry weight `1 + rho_j`, per slope index.
    pub weight_exponents: Vec<usize>,
    pub product_weight: Rational,
}

/// Counts and product of the edge weights used by `assignment`.
pub fn matching_weight(graph: &TightEnvyGraph, assignment: &[usize]) -> Option<MatchingResult> {
    let mut weight_exponents = vec![0; graph.slope_count];
    let mut product_weight = Rational::one();
    for (i, &a) in assignment.iter().enumerate() {
        let e = graph.edge(i, a)?;
        weight_exponents[e.slope_index] += 1;
        product_weight *= &e.weight;
    }
    Some(MatchingResult {
        assignment: assignment.to_vec(),
        weight_exponents,
        product_weight,
    })
}

/// A perfect matching of the graph's edges with the largest (`Maximize`) or
/// smallest (`Minimize`) product of slope weights, lexicographically smallest
/// among optimal ones.
pub fn extremal_perfect_matching(
    graph: &TightEnvyGraph,
    sense: Sense,
) -> Result<MatchingResult, MatchingError> {
    let cost: Vec<Vec<Option<Multiplicative>>> = graph
        .edges
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    e.as_ref().map(|e| {
                        Multiplicative(match sense {
                            Sense::Maximize => e.weight.recip(),
                            Sense::Minimize => e.weight.clone(),
                        })
                    })
                })
                .collect()
        })
        .collect();
    let assignment = optimize(&cost).ok_or(MatchingError::NoPerfectMatching)?;
    Ok(matching_weight(graph, &assignment).expect("matching uses graph edges"))
}
