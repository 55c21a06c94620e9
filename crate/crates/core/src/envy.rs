//! Envy checks, tight-envy graphs and the selection membership test.

use std::collections::{BTreeSet, VecDeque};

use crate::model::{Allocation, Direction, Economy, Family, Objective};
use crate::Rational;

/// Agent `envious` strictly prefers the bundle held by `envied`, by `gap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyWitness {
    pub envious: usize,
    pub envied: usize,
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvyError {
    #[error("budget balance violated: rents sum to {actual}, expected {expected}")]
    RentSum {
        expected: Rational,
        actual: Rational,
    },
    #[error("assignment is not a bijection onto the rooms")]
    NotBijection,
    #[error("agent {} envies agent {} by {}", .0.envious, .0.envied, .0.gap)]
    Envy(EnvyWitness),
}

/// The largest-gap envy at these rents and assignment, if any. Ties go to
/// the lowest (envious, envied) pair.
pub fn envy_witness(
    economy: &Economy,
    rents: &[Rational],
    assignment: &[usize],
) -> Option<EnvyWitness> {
    let mut worst: Option<EnvyWitness> = None;
    for (i, &own) in assignment.iter().enumerate() {
        let mine = economy.utility(i, own, &rents[own]);
        for (j, &other) in assignment.iter().enumerate() {
            if j == i {
                continue;
            }
            let gap = economy.utility(i, other, &rents[other]) - &mine;
            if gap.is_positive() && worst.as_ref().is_none_or(|w| gap > w.gap) {
                worst = Some(EnvyWitness {
                    envious: i,
                    envied: j,
                    gap,
                });
            }
        }
    }
    worst
}

/// Envy-freeness of an allocation for the economy's total rent.
pub fn is_envy_free(economy: &Economy, alloc: &Allocation) -> Result<(), EnvyError> {
    if !alloc.is_bijection()
        || alloc.rents.len() != economy.n()
        || alloc.assignment.len() != economy.n()
    {
        return Err(EnvyError::NotBijection);
    }
    let actual = alloc.total();
    if actual != economy.total_rent {
        return Err(EnvyError::RentSum {
            expected: economy.total_rent.clone(),
            actual,
        });
    }
    match envy_witness(economy, &alloc.rents, &alloc.assignment) {
        Some(w) => Err(EnvyError::Envy(w)),
        None => Ok(()),
    }
}

/// Slope attached to a tight edge, with the index of the slope-set entry
/// `rho_j` such that `weight = 1 + rho_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightEdge {
    pub weight: Rational,
    pub slope_index: usize,
}

/// Agent-room pairs where the room is among the agent's best bundles at the
/// given rents, weighted by the local slope of the agent's utility in that
/// room (left slope for rebates, right slope for surcharges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightEnvyGraph {
    pub direction: Direction,
    pub edges: Vec<Vec<Option<TightEdge>>>,
    pub slope_count: usize,
}

impl TightEnvyGraph {
    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, agent: usize, room: usize) -> Option<&TightEdge> {
        self.edges[agent][room].as_ref()
    }

    pub fn has_edge(&self, agent: usize, room: usize) -> bool {
        self.edges[agent][room].is_some()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().filter(|e| e.is_some()).count()
    }

    /// Whether every pair of `assignment` is an edge.
    pub fn contains_assignment(&self, assignment: &[usize]) -> bool {
        assignment
            .iter()
            .enumerate()
            .all(|(i, &a)| self.has_edge(i, a))
    }
}

pub fn tight_graph(economy: &Economy, rents: &[Rational], direction: Direction) -> TightEnvyGraph {
    let n = economy.n();
    let edges = (0..n)
        .map(|i| {
            let utils: Vec<Rational> = (0..n).map(|a| economy.utility(i, a, &rents[a])).collect();
            let best = utils.iter().max().expect("at least one room").clone();
            let budget = economy.budget(i);
            (0..n)
                .map(|a| {
                    if utils[a] != best {
                        return None;
                    }
                    let violated = match direction {
                        Direction::Rebate => &rents[a] > budget,
                        Direction::Surcharge => &rents[a] >= budget,
                    };
                    let slope_index = if violated {
                        economy.prefs[i].slope_index
                    } else {
                        0
                    };
                    let weight = Rational::one() + economy.slope_set.rho(slope_index);
                    Some(TightEdge {
                        weight,
                        slope_index,
                    })
                })
                .collect()
        })
        .collect();
    TightEnvyGraph {
        direction,
        edges,
        slope_count: economy.slope_set.len(),
    }
}

/// The scope members attaining the objective value: agents for utility
/// families, rooms for rent families.
pub fn extreme_set(
    economy: &Economy,
    alloc: &Allocation,
    objective: &Objective,
) -> BTreeSet<usize> {
    let vals = objective.member_values(economy, alloc);
    let target = if objective.family.maximizes() {
        vals.iter().min()
    } else {
        vals.iter().max()
    };
    let Some(target) = target else {
        return BTreeSet::new();
    };
    objective
        .scope
        .iter()
        .zip(&vals)
        .filter(|(_, v)| *v == target)
        .map(|(&k, _)| k)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipVerdict {
    pub member: bool,
    pub extreme_set: BTreeSet<usize>,
    /// Agents (utility families) or rooms (rent families) failing the
    /// reachability condition; for an allocation with envy, the envious
    /// agent or the room it holds.
    pub unreached: BTreeSet<usize>,
    pub envy: Option<EnvyWitness>,
}

/// Indifference digraph: agent `i -> j` when `i` is exactly indifferent
/// between its own bundle and `j`'s.
fn agent_digraph(economy: &Economy, alloc: &Allocation) -> Vec<Vec<usize>> {
    let n = economy.n();
    (0..n)
        .map(|i| {
            let own = economy.own_utility(i, alloc);
            (0..n)
                .filter(|&j| {
                    let b = alloc.assignment[j];
                    j != i && economy.utility(i, b, &alloc.rents[b]) == own
                })
                .collect()
        })
        .collect()
}

fn reachable(adj: &[Vec<usize>], start: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = start.clone();
    let mut queue: VecDeque<usize> = start.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

fn reversed(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); adj.len()];
    for (x, ys) in adj.iter().enumerate() {
        for &y in ys {
            out[y].push(x);
        }
    }
    out
}

/// Whether an envy-free allocation is extremal for `objective`, decided by
/// reachability in the indifference digraph:
///
/// - maxmin utility: every agent has a path to the worst-off scope members;
/// - minmax utility: every agent is reachable from the best-off ones;
/// - maxmin rent: every room is reachable from the cheapest scope rooms;
/// - minmax rent: every room has a path to the dearest ones.
///
/// Rooms are linked through their occupants: `a -> b` when the occupant of
/// `a` is indifferent to `b`.
pub fn check_membership(
    economy: &Economy,
    alloc: &Allocation,
    objective: &Objective,
) -> MembershipVerdict {
    let extreme = extreme_set(economy, alloc, objective);
    if let Some(w) = envy_witness(economy, &alloc.rents, &alloc.assignment) {
        let culprit = if objective.family.is_utility() {
            w.envious
        } else {
            alloc.assignment[w.envious]
        };
        return MembershipVerdict {
            member: false,
            extreme_set: extreme,
            unreached: BTreeSet::from([culprit]),
            envy: Some(w),
        };
    }
    let agents = agent_digraph(economy, alloc);
    let adj = if objective.family.is_utility() {
        agents
    } else {
        // Relabel agent edges by the rooms they hold.
        let owners = alloc.owners();
        (0..economy.n())
            .map(|a| {
                agents[owners[a]]
                    .iter()
                    .map(|&j| alloc.assignment[j])
                    .collect()
            })
            .collect()
    };
    let covered = match objective.family {
        Family::MaxminUtility | Family::MinmaxRent => reachable(&reversed(&adj), &extreme),
        Family::MinmaxUtility | Family::MaxminRent => reachable(&adj, &extreme),
    };
    let unreached: BTreeSet<usize> = (0..economy.n()).filter(|k| !covered.contains(k)).collect();
    MembershipVerdict {
        member: unreached.is_empty(),
        extreme_set: extreme,
        unreached,
        envy: None,
    }
}
