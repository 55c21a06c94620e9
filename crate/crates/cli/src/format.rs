//! JSON instance and result files. Rationals are written as strings (`"7"`,
//! `"19/3"`) and read from integers, decimal strings or `p/q` strings.

use std::fmt;

use indexmap::IndexMap;
use rentfair_core::solver::{IterationRecord, SolveTrace};
use rentfair_core::{
    validate, Affine, Allocation, Direction, Economy, Family, Objective, Preference, Rational,
    SlopeSet,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational as it appears in files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

struct QVisitor;

impl Visitor<'_> for QVisitor {
    type Value = Q;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer, a decimal string or a \"p/q\" string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
        Ok(Q(Rational::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
        v.to_string().parse().map(Q).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Q, E> {
        Err(E::custom(format!(
            "floating-point number {v} is not exact; write it as a string such as \"{v}\""
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
        v.parse().map(Q).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }
}

impl From<Rational> for Q {
    fn from(r: Rational) -> Self {
        Q(r)
    }
}

impl From<&Rational> for Q {
    fn from(r: &Rational) -> Self {
        Q(r.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub slope: Q,
    pub intercept: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub family: String,
    /// Agent ids for utility families, room ids for rent families. Omitted
    /// means all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<String>>,
    /// One map per scope entry. Omitted means identity maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<Vec<AffineSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: Vec<String>,
    pub rooms: Vec<String>,
    pub slope_set: Vec<Q>,
    pub values: Vec<Vec<Q>>,
    pub budgets: Vec<Q>,
    pub rho_index: Vec<usize>,
    pub total_rent: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
}

fn ids_to_indices(
    ids: &[String],
    pool: &[String],
    kind: &str,
    out: &mut Vec<String>,
) -> Vec<usize> {
    ids.iter()
        .filter_map(|id| {
            let found = pool.iter().position(|p| p == id);
            if found.is_none() {
                out.push(format!("objective scope names unknown {kind} {id:?}"));
            }
            found
        })
        .collect()
}

impl InstanceFile {
    /// The economy and objective described by the file, or every problem
    /// found with it. `family` replaces the file's objective with that family
    /// over every agent or room.
    pub fn to_model(&self, family: Option<Family>) -> Result<(Economy, Objective), Vec<String>> {
        let mut problems = Vec::new();
        let n = self.agents.len();
        if self.values.len() != n {
            problems.push(format!(
                "values has {} rows for {n} agents",
                self.values.len()
            ));
        }
        if self.budgets.len() != n {
            problems.push(format!(
                "budgets has {} entries for {n} agents",
                self.budgets.len()
            ));
        }
        if self.rho_index.len() != n {
            problems.push(format!(
                "rho_index has {} entries for {n} agents",
                self.rho_index.len()
            ));
        }
        let prefs = self
            .values
            .iter()
            .zip(&self.budgets)
            .zip(&self.rho_index)
            .map(|((row, b), &slope_index)| Preference {
                values: row.iter().map(|q| q.0.clone()).collect(),
                budget: b.0.clone(),
                slope_index,
            })
            .collect();
        let economy = Economy {
            agents: self.agents.clone(),
            rooms: self.rooms.clone(),
            prefs,
            slope_set: SlopeSet {
                rhos: self.slope_set.iter().map(|q| q.0.clone()).collect(),
            },
            total_rent: self.total_rent.0.clone(),
        };

        let spec = if family.is_some() {
            None
        } else {
            self.objective.as_ref()
        };
        let family = match family {
            Some(f) => Some(f),
            None => match spec {
                None => Some(Family::MaxminUtility),
                Some(s) => {
                    let f = Family::from_name(&s.family);
                    if f.is_none() {
                        problems.push(format!("unknown objective family {:?}", s.family));
                    }
                    f
                }
            },
        };
        let objective = family.map(|family| {
            let pool = if family.is_utility() {
                &self.agents
            } else {
                &self.rooms
            };
            let kind = if family.is_utility() { "agent" } else { "room" };
            let scope = match spec.and_then(|s| s.scope.as_ref()) {
                Some(ids) => ids_to_indices(ids, pool, kind, &mut problems),
                None => (0..pool.len()).collect(),
            };
            let affine = match spec.and_then(|s| s.affine.as_ref()) {
                Some(maps) => maps
                    .iter()
                    .map(|m| Affine::new(m.slope.0.clone(), m.intercept.0.clone()))
                    .collect(),
                None => vec![Affine::identity(); scope.len()],
            };
            Objective::with_affine(family, scope, affine)
        });
        if let Err(violations) = validate(&economy, objective.as_ref()) {
            problems.extend(violations.iter().map(ToString::to_string));
        }
        match objective {
            Some(objective) if problems.is_empty() => Ok((economy, objective)),
            _ => Err(problems),
        }
    }

    pub fn from_model(economy: &Economy, objective: Option<&Objective>) -> Self {
        InstanceFile {
            agents: economy.agents.clone(),
            rooms: economy.rooms.clone(),
            slope_set: economy.slope_set.rhos.iter().map(Q::from).collect(),
            values: economy
                .prefs
                .iter()
                .map(|p| p.values.iter().map(Q::from).collect())
                .collect(),
            budgets: economy.prefs.iter().map(|p| Q::from(&p.budget)).collect(),
            rho_index: economy.prefs.iter().map(|p| p.slope_index).collect(),
            total_rent: Q::from(&economy.total_rent),
            objective: objective.map(|o| {
                let pool = if o.family.is_utility() {
                    &economy.agents
                } else {
                    &economy.rooms
                };
                ObjectiveSpec {
                    family: o.family.name().to_string(),
                    scope: Some(o.scope.iter().map(|&k| pool[k].clone()).collect()),
                    affine: Some(
                        o.affine
                            .iter()
                            .map(|f| AffineSpec {
                                slope: Q::from(&f.slope),
                                intercept: Q::from(&f.intercept),
                            })
                            .collect(),
                    ),
                }
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    pub boundary_rent: Q,
    pub assignment: IndexMap<String, String>,
    pub rents: IndexMap<String, Q>,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationFile {
    pub s: usize,
    pub sigma: IndexMap<String, String>,
    pub weight_exponents: Vec<usize>,
    pub product_weight: Q,
    pub step_rents: IndexMap<String, Q>,
    pub step_value: Q,
    pub member: bool,
    /// Agents (utility families) or rooms (rent families) with no path to or
    /// from the extreme set at the step rents.
    pub unreached: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restore_rents: Option<IndexMap<String, Q>>,
    pub sb_size_before: usize,
    pub sb_size_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub direction: String,
    pub init: InitFile,
    pub iterations: Vec<IterationFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub assignment: IndexMap<String, String>,
    pub rents: IndexMap<String, Q>,
    pub utilities: IndexMap<String, Q>,
    pub objective_value: Q,
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceFile>,
}

fn assignment_map(economy: &Economy, assignment: &[usize]) -> IndexMap<String, String> {
    economy
        .agents
        .iter()
        .zip(assignment)
        .map(|(i, &a)| (i.clone(), economy.rooms[a].clone()))
        .collect()
}

fn rent_map(economy: &Economy, rents: &[Rational]) -> IndexMap<String, Q> {
    economy
        .rooms
        .iter()
        .zip(rents)
        .map(|(a, r)| (a.clone(), Q::from(r)))
        .collect()
}

fn iteration_file(economy: &Economy, objective: &Objective, it: &IterationRecord) -> IterationFile {
    let pool = if objective.family.is_utility() {
        &economy.agents
    } else {
        &economy.rooms
    };
    IterationFile {
        s: it.s,
        sigma: assignment_map(economy, &it.sigma),
        weight_exponents: it.weight_exponents.clone(),
        product_weight: Q::from(&it.product_weight),
        step_rents: rent_map(economy, &it.step_rents),
        step_value: Q::from(&it.step_value),
        member: it.membership.member,
        unreached: it
            .membership
            .unreached
            .iter()
            .map(|&k| pool[k].clone())
            .collect(),
        restore_rents: it.restore_rents.as_ref().map(|r| rent_map(economy, r)),
        sb_size_before: it.sb_size_before,
        sb_size_after: it.sb_size_after,
    }
}

impl TraceFile {
    pub fn from_trace(economy: &Economy, objective: &Objective, trace: &SolveTrace) -> Self {
        TraceFile {
            direction: match trace.direction {
                Direction::Rebate => "rebate",
                Direction::Surcharge => "surcharge",
            }
            .to_string(),
            init: InitFile {
                boundary_rent: Q::from(&trace.init.boundary_rent),
                assignment: assignment_map(economy, &trace.init.allocation.assignment),
                rents: rent_map(economy, &trace.init.allocation.rents),
                member: trace.init.member,
            },
            iterations: trace
                .iterations
                .iter()
                .map(|it| iteration_file(economy, objective, it))
                .collect(),
        }
    }
}

impl ResultFile {
    pub fn new(
        economy: &Economy,
        objective: &Objective,
        alloc: &Allocation,
        certified: bool,
    ) -> Self {
        ResultFile {
            assignment: assignment_map(economy, &alloc.assignment),
            rents: rent_map(economy, &alloc.rents),
            utilities: economy
                .agents
                .iter()
                .zip(economy.utilities(alloc))
                .map(|(i, u)| (i.clone(), Q(u)))
                .collect(),
            objective_value: Q(objective.value(economy, alloc)),
            certified,
            trace: None,
        }
    }

    /// The allocation named by the file, read against `economy`'s ids.
    pub fn allocation(&self, economy: &Economy) -> Result<Allocation, Vec<String>> {
        let mut problems = Vec::new();
        let mut assignment = Vec::with_capacity(economy.n());
        for agent in &economy.agents {
            match self
                .assignment
                .get(agent)
                .map(|room| (room, economy.room_index(room)))
            {
                Some((_, Some(a))) => assignment.push(a),
                Some((room, None)) => {
                    problems.push(format!("agent {agent} is assigned unknown room {room:?}"))
                }
                None => problems.push(format!("agent {agent} has no room")),
            }
        }
        let mut rents = Vec::with_capacity(economy.n());
        for room in &economy.rooms {
            match self.rents.get(room) {
                Some(q) => rents.push(q.0.clone()),
                None => problems.push(format!("room {room} has no rent")),
            }
        }
        for key in self
            .assignment
            .keys()
            .filter(|k| economy.agent_index(k).is_none())
        {
            problems.push(format!("unknown agent {key:?}"));
        }
        for key in self
            .rents
            .keys()
            .filter(|k| economy.room_index(k).is_none())
        {
            problems.push(format!("unknown room {key:?}"));
        }
        let alloc = Allocation::new(rents, assignment);
        if problems.is_empty() && !alloc.is_bijection() {
            problems.push("assignment is not a bijection".to_string());
        }
        if problems.is_empty() {
            Ok(alloc)
        } else {
            Err(problems)
        }
    }
}
