//! Economies with soft-budget preferences, allocations and objectives.
//!
//! Agent `i` values room `a` at `v[i][a]`, has a soft budget `b[i]` and a
//! budget-violation coefficient `rho[i]` drawn from a shared slope set. Paying
//! rent `r` for room `a` yields
//!
//! ```text
//! u_i(r, a) = v[i][a] - r - rho[i] * max(0, r - b[i])
//! ```
//!
//! Agents and rooms are addressed by index everywhere in this crate; the
//! string ids only matter for I/O.

use std::collections::BTreeSet;
use std::fmt;

use crate::Rational;

/// The finite set of budget-violation coefficients, strictly increasing and
/// starting at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeSet {
    pub rhos: Vec<Rational>,
}

impl SlopeSet {
    pub fn new(rhos: Vec<Rational>) -> Result<Self, Vec<Violation>> {
        let set = SlopeSet { rhos };
        let mut out = Vec::new();
        set.check(&mut out);
        if out.is_empty() {
            Ok(set)
        } else {
            Err(out)
        }
    }

    /// `{0}`: every agent quasi-linear.
    pub fn quasi_linear() -> Self {
        SlopeSet {
            rhos: vec![Rational::zero()],
        }
    }

    pub fn len(&self) -> usize {
        self.rhos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhos.is_empty()
    }

    pub fn rho(&self, index: usize) -> &Rational {
        &self.rhos[index]
    }

    /// Index `j` with `1 + rho_j == slope`, if any.
    pub fn index_of_slope(&self, slope: &Rational) -> Option<usize> {
        let rho = slope - Rational::one();
        self.rhos.binary_search(&rho).ok()
    }

    fn check(&self, out: &mut Vec<Violation>) {
        if self.rhos.is_empty() || !self.rhos.iter().any(Rational::is_zero) {
            out.push(Violation::SlopeSetMissingZero);
        }
        if self.rhos.iter().any(Rational::is_negative) {
            out.push(Violation::NegativeSlope);
        }
        for w in self.rhos.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateSlope(w[0].clone()));
            } else if w[0] > w[1] {
                out.push(Violation::SlopeSetNotIncreasing);
            }
        }
    }
}

/// One agent's report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    /// Room-indexed values.
    pub values: Vec<Rational>,
    pub budget: Rational,
    /// Index into the economy's [`SlopeSet`].
    pub slope_index: usize,
}

impl Preference {
    /// Utility of paying `rent` for `room`, given this agent's coefficient.
    pub fn utility(
        &self,
        rho: &Rational,
        room: usize,
        rent: &Rational,
    ) -> Result<Rational, ModelError> {
        let v = self.values.get(room).ok_or(ModelError::UnknownRoom(room))?;
        Ok(utility_of(v, &self.budget, rho, rent))
    }

    /// `(v + rho b) / (1 + rho)`: above the budget, `u = (1 + rho)(V - r)`.
    pub fn linearized_value(&self, rho: &Rational, room: usize) -> Result<Rational, ModelError> {
        let v = self.values.get(room).ok_or(ModelError::UnknownRoom(room))?;
        Ok((v + rho * &self.budget) / (Rational::one() + rho))
    }
}

pub(crate) fn utility_of(
    value: &Rational,
    budget: &Rational,
    rho: &Rational,
    rent: &Rational,
) -> Rational {
    let base = value - rent;
    if rent > budget {
        base - rho * (rent - budget)
    } else {
        base
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown room index {0}")]
    UnknownRoom(usize),
    #[error("unknown agent index {0}")]
    UnknownAgent(usize),
    #[error("invalid economy: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A single invariant failure reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    CountMismatch {
        agents: usize,
        rooms: usize,
    },
    PreferenceCount {
        agents: usize,
        prefs: usize,
    },
    ValueRowLength {
        agent: usize,
        expected: usize,
        got: usize,
    },
    NegativeBudget {
        agent: usize,
    },
    SlopeIndexOutOfRange {
        agent: usize,
        index: usize,
    },
    SlopeSetMissingZero,
    SlopeSetNotIncreasing,
    DuplicateSlope(Rational),
    NegativeSlope,
    DuplicateId(String),
    EmptyScope,
    ScopeOutOfRange(usize),
    DuplicateScope(usize),
    AffineCount {
        scope: usize,
        affine: usize,
    },
    NonPositiveAffineSlope {
        position: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "economy must have at least one agent"),
            Violation::CountMismatch { agents, rooms } => {
                write!(
                    f,
                    "agent/room count mismatch ({agents} agents, {rooms} rooms)"
                )
            }
            Violation::PreferenceCount { agents, prefs } => {
                write!(f, "expected {agents} preference rows, found {prefs}")
            }
            Violation::ValueRowLength {
                agent,
                expected,
                got,
            } => {
                write!(f, "agent {agent} values {got} rooms, expected {expected}")
            }
            Violation::NegativeBudget { agent } => write!(f, "agent {agent} has a negative budget"),
            Violation::SlopeIndexOutOfRange { agent, index } => {
                write!(
                    f,
                    "agent {agent} slope index {index} is outside the slope set"
                )
            }
            Violation::SlopeSetMissingZero => write!(f, "slope set must contain 0"),
            Violation::SlopeSetNotIncreasing => write!(f, "slope set must be strictly increasing"),
            Violation::DuplicateSlope(r) => write!(f, "duplicate slope {r}"),
            Violation::NegativeSlope => write!(f, "slope set entries must be nonnegative"),
            Violation::DuplicateId(id) => write!(f, "duplicate id {id:?}"),
            Violation::EmptyScope => write!(f, "objective scope must be nonempty"),
            Violation::ScopeOutOfRange(i) => write!(f, "objective scope index {i} out of range"),
            Violation::DuplicateScope(i) => write!(f, "objective scope index {i} listed twice"),
            Violation::AffineCount { scope, affine } => {
                write!(
                    f,
                    "objective has {scope} scope entries but {affine} affine maps"
                )
            }
            Violation::NonPositiveAffineSlope { position } => {
                write!(
                    f,
                    "affine slope must be positive (scope position {position})"
                )
            }
        }
    }
}

/// `(N, A, u, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Economy {
    pub agents: Vec<String>,
    pub rooms: Vec<String>,
    pub prefs: Vec<Preference>,
    pub slope_set: SlopeSet,
    pub total_rent: Rational,
}

impl Economy {
    /// Builds and validates an economy with default ids `1..=n` and `a, b, ...`.
    pub fn from_parts(
        values: Vec<Vec<Rational>>,
        budgets: Vec<Rational>,
        slope_indices: Vec<usize>,
        slope_set: SlopeSet,
        total_rent: Rational,
    ) -> Result<Self, ModelError> {
        let n = values.len();
        let prefs = values
            .into_iter()
            .zip(budgets)
            .zip(slope_indices)
            .map(|((values, budget), slope_index)| Preference {
                values,
                budget,
                slope_index,
            })
            .collect();
        let economy = Economy {
            agents: (1..=n).map(|i| i.to_string()).collect(),
            rooms: (0..n).map(default_room_id).collect(),
            prefs,
            slope_set,
            total_rent,
        };
        validate(&economy, None).map_err(ModelError::Invalid)?;
        Ok(economy)
    }

    /// Quasi-linear economy (`rho = 0`, zero budgets) from integer values.
    pub fn quasi_linear(values: &[Vec<i64>], total_rent: i64) -> Result<Self, ModelError> {
        let n = values.len();
        Self::from_parts(
            values
                .iter()
                .map(|row| row.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
            vec![Rational::zero(); n],
            vec![0; n],
            SlopeSet::quasi_linear(),
            Rational::from(total_rent),
        )
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn with_total_rent(&self, total_rent: Rational) -> Self {
        Economy {
            total_rent,
            ..self.clone()
        }
    }

    pub fn rho(&self, agent: usize) -> &Rational {
        self.slope_set.rho(self.prefs[agent].slope_index)
    }

    pub fn value(&self, agent: usize, room: usize) -> &Rational {
        &self.prefs[agent].values[room]
    }

    pub fn budget(&self, agent: usize) -> &Rational {
        &self.prefs[agent].budget
    }

    /// True when the agent's utility has a kink at its budget.
    pub fn has_kink(&self, agent: usize) -> bool {
        self.rho(agent).is_positive()
    }

    pub fn utility(&self, agent: usize, room: usize, rent: &Rational) -> Rational {
        utility_of(
            self.value(agent, room),
            self.budget(agent),
            self.rho(agent),
            rent,
        )
    }

    /// Utility of agent `i` for its own bundle under `alloc`.
    pub fn own_utility(&self, agent: usize, alloc: &Allocation) -> Rational {
        let room = alloc.assignment[agent];
        self.utility(agent, room, &alloc.rents[room])
    }

    pub fn utilities(&self, alloc: &Allocation) -> Vec<Rational> {
        (0..self.n()).map(|i| self.own_utility(i, alloc)).collect()
    }

    pub fn linearized_value(&self, agent: usize, room: usize) -> Rational {
        let rho = self.rho(agent);
        (self.value(agent, room) + rho * self.budget(agent)) / (Rational::one() + rho)
    }

    pub fn linearized_values(&self) -> Vec<Vec<Rational>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|a| self.linearized_value(i, a)).collect())
            .collect()
    }

    pub fn raw_values(&self) -> Vec<Vec<Rational>> {
        self.prefs.iter().map(|p| p.values.clone()).collect()
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == id)
    }

    pub fn room_index(&self, id: &str) -> Option<usize> {
        self.rooms.iter().position(|a| a == id)
    }
}

pub(crate) fn default_room_id(index: usize) -> String {
    let mut s = String::new();
    let mut k = index;
    loop {
        s.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s
}

/// Room-indexed rents together with an agent-to-room bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub rents: Vec<Rational>,
    /// `assignment[i]` is the room of agent `i`.
    pub assignment: Vec<usize>,
}

impl Allocation {
    pub fn new(rents: Vec<Rational>, assignment: Vec<usize>) -> Self {
        Allocation { rents, assignment }
    }

    pub fn total(&self) -> Rational {
        self.rents.iter().sum()
    }

    pub fn is_bijection(&self) -> bool {
        let n = self.rents.len();
        if self.assignment.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &a in &self.assignment {
            if a >= n || seen[a] {
                return false;
            }
            seen[a] = true;
        }
        true
    }

    /// Inverse of the assignment: `owner[a]` is the agent holding room `a`.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.assignment.len()];
        for (i, &a) in self.assignment.iter().enumerate() {
            owner[a] = i;
        }
        owner
    }
}

/// The four selection families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    MaxminUtility,
    MinmaxUtility,
    MaxminRent,
    MinmaxRent,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::MaxminUtility,
        Family::MinmaxUtility,
        Family::MaxminRent,
        Family::MinmaxRent,
    ];

    /// Utility families are scoped over agents, rent families over rooms.
    pub fn is_utility(self) -> bool {
        matches!(self, Family::MaxminUtility | Family::MinmaxUtility)
    }

    /// Whether the objective value is maximized.
    pub fn maximizes(self) -> bool {
        matches!(self, Family::MaxminUtility | Family::MaxminRent)
    }

    /// Which side of the target rent the search starts from.
    pub fn direction(self) -> Direction {
        match self {
            Family::MaxminUtility | Family::MinmaxRent => Direction::Rebate,
            Family::MinmaxUtility | Family::MaxminRent => Direction::Surcharge,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::MaxminUtility => "maxmin-utility",
            Family::MinmaxUtility => "minmax-utility",
            Family::MaxminRent => "maxmin-rent",
            Family::MinmaxRent => "minmax-rent",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "maxminutility" => Some(Family::MaxminUtility),
            "minmaxutility" => Some(Family::MinmaxUtility),
            "maxminrent" => Some(Family::MaxminRent),
            "minmaxrent" => Some(Family::MinmaxRent),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// High-rent start with rebates, or low-rent start with surcharges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Rebate,
    Surcharge,
}

/// `x -> intercept + slope * x` with `slope > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Affine {
    pub fn identity() -> Self {
        Affine {
            slope: Rational::one(),
            intercept: Rational::zero(),
        }
    }

    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Affine { slope, intercept }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.intercept + &self.slope * x
    }
}

/// A selection of the envy-free set: which aggregate to optimize, over which
/// agents (utility families) or rooms (rent families), through which positive
/// affine transformations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub family: Family,
    pub scope: Vec<usize>,
    pub affine: Vec<Affine>,
}

impl Objective {
    /// Identity transforms over every agent or room.
    pub fn full(family: Family, n: usize) -> Self {
        Self::scoped(family, (0..n).collect())
    }

    /// Identity transforms over the given scope.
    pub fn scoped(family: Family, scope: Vec<usize>) -> Self {
        let affine = vec![Affine::identity(); scope.len()];
        Objective {
            family,
            scope,
            affine,
        }
    }

    pub fn with_affine(family: Family, scope: Vec<usize>, affine: Vec<Affine>) -> Self {
        Objective {
            family,
            scope,
            affine,
        }
    }

    /// Scope members paired with their transforms.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Affine)> {
        self.scope.iter().copied().zip(self.affine.iter())
    }

    /// Transformed per-member values at `alloc`, in scope order.
    pub fn member_values(&self, economy: &Economy, alloc: &Allocation) -> Vec<Rational> {
        self.terms()
            .map(|(k, f)| {
                if self.family.is_utility() {
                    f.apply(&economy.own_utility(k, alloc))
                } else {
                    f.apply(&alloc.rents[k])
                }
            })
            .collect()
    }

    /// `min` (maxmin families) or `max` (minmax families) of the member values.
    pub fn value(&self, economy: &Economy, alloc: &Allocation) -> Rational {
        let vals = self.member_values(economy, alloc);
        let it = vals.into_iter();
        let out = if self.family.maximizes() {
            it.min()
        } else {
            it.max()
        };
        out.expect("objective scope is nonempty")
    }

    /// True when `candidate` is strictly better than `incumbent` for this family.
    pub fn better(&self, candidate: &Rational, incumbent: &Rational) -> bool {
        if self.family.maximizes() {
            candidate > incumbent
        } else {
            candidate < incumbent
        }
    }

    fn check(&self, n: usize, out: &mut Vec<Violation>) {
        if self.scope.is_empty() {
            out.push(Violation::EmptyScope);
        }
        if self.scope.len() != self.affine.len() {
            out.push(Violation::AffineCount {
                scope: self.scope.len(),
                affine: self.affine.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &k in &self.scope {
            if k >= n {
                out.push(Violation::ScopeOutOfRange(k));
            } else if !seen.insert(k) {
                out.push(Violation::DuplicateScope(k));
            }
        }
        for (position, f) in self.affine.iter().enumerate() {
            if !f.slope.is_positive() {
                out.push(Violation::NonPositiveAffineSlope { position });
            }
        }
    }
}

/// Checks every invariant of the economy (and of the objective, when given),
/// returning all violations rather than stopping at the first.
pub fn validate(economy: &Economy, objective: Option<&Objective>) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = economy.agents.len();
    if n == 0 {
        out.push(Violation::NoAgents);
    }
    if economy.rooms.len() != n {
        out.push(Violation::CountMismatch {
            agents: n,
            rooms: economy.rooms.len(),
        });
    }
    if economy.prefs.len() != n {
        out.push(Violation::PreferenceCount {
            agents: n,
            prefs: economy.prefs.len(),
        });
    }
    for ids in [&economy.agents, &economy.rooms] {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                out.push(Violation::DuplicateId(id.clone()));
            }
        }
    }
    economy.slope_set.check(&mut out);
    for (agent, p) in economy.prefs.iter().enumerate() {
        if p.values.len() != economy.rooms.len() {
            out.push(Violation::ValueRowLength {
                agent,
                expected: economy.rooms.len(),
                got: p.values.len(),
            });
        }
        if p.budget.is_negative() {
            out.push(Violation::NegativeBudget { agent });
        }
        if p.slope_index >= economy.slope_set.len() {
            out.push(Violation::SlopeIndexOutOfRange {
                agent,
                index: p.slope_index,
            });
        }
    }
    if let Some(obj) = objective {
        let size = if obj.family.is_utility() {
            n
        } else {
            economy.rooms.len()
        };
        obj.check(size, &mut out);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// `SB(r)`: pairs whose room rent strictly exceeds the agent's budget.
pub fn sb_set(economy: &Economy, rents: &[Rational]) -> BTreeSet<(usize, usize)> {
    let n = economy.n();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for (a, r) in rents.iter().enumerate() {
            if r > economy.budget(i) {
                out.insert((i, a));
            }
        }
    }
    out
}

/// Pairs in `SB(r)` whose agent actually has a kink (`rho > 0`). Only these
/// change slope when a budget is crossed.
pub fn kinked_sb_set(economy: &Economy, rents: &[Rational]) -> BTreeSet<(usize, usize)> {
    sb_set(economy, rents)
        .into_iter()
        .filter(|&(i, _)| economy.has_kink(i))
        .collect()
}

/// Left-side linearization `(nu, lambda)` of every `u_i(., a)` at `rents`:
/// `u_i(r', a) = nu - lambda r'` for `r'` slightly below or equal to `r_a`.
pub fn nu_lambda(economy: &Economy, rents: &[Rational]) -> Vec<Vec<(Rational, Rational)>> {
    let n = economy.n();
    (0..n)
        .map(|i| {
            let rho = economy.rho(i);
            let b = economy.budget(i);
            rents
                .iter()
                .enumerate()
                .map(|(a, r)| {
                    let v = economy.value(i, a);
                    if r > b {
                        (v + rho * b, Rational::one() + rho)
                    } else {
                        (v.clone(), Rational::one())
                    }
                })
                .collect()
        })
        .collect()
}

/// Right-side slope magnitude of `u_i(., a)` at `rents`. At the kink the
/// violated slope applies, since any increase enters that regime.
pub fn kappa(economy: &Economy, rents: &[Rational]) -> Vec<Vec<Rational>> {
    kappa_linearization(economy, rents)
        .into_iter()
        .map(|row| row.into_iter().map(|(_, k)| k).collect())
        .collect()
}

/// Right-side linearization `(mu, kappa)`: `u_i(r', a) = mu - kappa r'` for
/// `r'` slightly above or equal to `r_a`.
pub fn kappa_linearization(
    economy: &Economy,
    rents: &[Rational],
) -> Vec<Vec<(Rational, Rational)>> {
    let n = economy.n();
    (0..n)
        .map(|i| {
            let rho = economy.rho(i);
            let b = economy.budget(i);
            rents
                .iter()
                .enumerate()
                .map(|(a, r)| {
                    let v = economy.value(i, a);
                    if r >= b {
                        (v + rho * b, Rational::one() + rho)
                    } else {
                        (v.clone(), Rational::one())
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest pairwise spread `max_{i, a != b} (x[i][b] - x[i][a])`; zero when
/// there is only one room.
fn max_spread(matrix: &[Vec<Rational>]) -> Rational {
    let mut best: Option<Rational> = None;
    for row in matrix {
        if row.len() < 2 {
            continue;
        }
        let hi = row.iter().max().expect("nonempty row");
        let lo = row.iter().min().expect("nonempty row");
        // hi - lo is attained by two distinct rooms (possibly equal values).
        let d = hi - lo;
        if best.as_ref().is_none_or(|b| &d > b) {
            best = Some(d);
        }
    }
    best.unwrap_or_else(Rational::zero)
}

/// `m' = n (max_{i,{a,b}} (V_ib - V_ia) + max_j b_j)`: at any total rent of at
/// least this, every envy-free allocation charges every room at least every
/// budget.
pub fn high_rent_bound(economy: &Economy) -> Rational {
    let spread = max_spread(&economy.linearized_values());
    let max_budget = economy
        .prefs
        .iter()
        .map(|p| &p.budget)
        .max()
        .cloned()
        .unwrap_or_default();
    Rational::from(economy.n()) * (spread + max_budget)
}

/// `m'' = n (min_j b_j - max(0, max_{i,{a,b}} (v_ib - v_ia)))`: at any total
/// rent of at most this, every envy-free allocation charges every room at
/// most every budget.
pub fn low_rent_bound(economy: &Economy) -> Rational {
    let spread = max_spread(&economy.raw_values());
    let delta = Rational::max_of(&spread, &Rational::zero()).clone();
    let min_budget = economy
        .prefs
        .iter()
        .map(|p| &p.budget)
        .min()
        .cloned()
        .unwrap_or_default();
    Rational::from(economy.n()) * (min_budget - delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pref(values: &[i64], budget: i64, slope_index: usize) -> Preference {
        Preference {
            values: values.iter().map(|&v| Rational::from(v)).collect(),
            budget: Rational::from(budget),
            slope_index,
        }
    }

    fn e2() -> Economy {
        Economy::from_parts(
            vec![vec![q("10"), q("2")], vec![q("4"), q("6")]],
            vec![q("5"), q("5")],
            vec![1, 1],
            SlopeSet::new(vec![q("0"), q("1")]).unwrap(),
            q("10"),
        )
        .unwrap()
    }

    #[test]
    fn utility_branches() {
        let p = pref(&[10], 5, 1);
        let rho = Rational::one();
        assert_eq!(p.utility(&rho, 0, &q("4")).unwrap(), q("6"));
        assert_eq!(p.utility(&rho, 0, &q("7")).unwrap(), q("1"));
        assert_eq!(p.utility(&rho, 0, &q("5")).unwrap(), q("5"));
        assert_eq!(p.utility(&rho, 3, &q("5")), Err(ModelError::UnknownRoom(3)));
    }

    #[test]
    fn linearized_value_examples() {
        let one = Rational::one();
        assert_eq!(pref(&[10], 4, 1).linearized_value(&one, 0).unwrap(), q("7"));
        assert_eq!(
            pref(&[10], 99, 0)
                .linearized_value(&Rational::zero(), 0)
                .unwrap(),
            q("10")
        );
        assert_eq!(
            pref(&[2], 5, 1).linearized_value(&one, 0).unwrap(),
            q("7/2")
        );
    }

    #[test]
    fn sb_set_uses_strict_inequality() {
        let e = e2();
        let sb = sb_set(&e, &[q("7"), q("5")]);
        assert_eq!(sb, BTreeSet::from([(0, 0), (1, 0)]));
        assert_eq!(sb_set(&e, &[q("10"), q("8")]).len(), 4);
        assert!(sb_set(&e, &[q("1"), q("2")]).is_empty());
    }

    #[test]
    fn nu_lambda_examples() {
        let e = e2();
        let nl = nu_lambda(&e, &[q("10"), q("5")]);
        assert_eq!(nl[0][0], (q("15"), q("2")));
        assert_eq!(nl[0][1], (q("2"), q("1")));
        let ql = Economy::from_parts(
            vec![vec![q("6")]],
            vec![q("5")],
            vec![0],
            SlopeSet::new(vec![q("0"), q("1")]).unwrap(),
            q("9"),
        )
        .unwrap();
        assert_eq!(nu_lambda(&ql, &[q("9")])[0][0], (q("6"), q("1")));
    }

    #[test]
    fn kappa_examples() {
        let e = e2();
        let k = kappa(&e, &[q("5"), q("3")]);
        assert_eq!(k[0][0], q("2"));
        assert_eq!(k[0][1], q("1"));
        let ql = Economy::from_parts(
            vec![vec![q("10")]],
            vec![q("5")],
            vec![0],
            SlopeSet::quasi_linear(),
            q("9"),
        )
        .unwrap();
        assert_eq!(kappa(&ql, &[q("9")])[0][0], q("1"));
    }

    #[test]
    fn high_rent_bound_examples() {
        assert_eq!(high_rent_bound(&e2()), q("18"));
        let flat = Economy::from_parts(
            vec![vec![q("3"), q("3")], vec![q("3"), q("3")]],
            vec![q("0"), q("0")],
            vec![0, 0],
            SlopeSet::quasi_linear(),
            q("1"),
        )
        .unwrap();
        assert_eq!(high_rent_bound(&flat), q("0"));
        let single = Economy::from_parts(
            vec![vec![q("4")]],
            vec![q("3")],
            vec![1],
            SlopeSet::new(vec![q("0"), q("1")]).unwrap(),
            q("7"),
        )
        .unwrap();
        assert_eq!(high_rent_bound(&single), q("3"));
    }

    #[test]
    fn low_rent_bound_examples() {
        assert_eq!(low_rent_bound(&e2()), q("-6"));
        let flat = Economy::from_parts(
            vec![vec![q("3"), q("3")], vec![q("3"), q("3")]],
            vec![q("5"), q("5")],
            vec![0, 0],
            SlopeSet::quasi_linear(),
            q("1"),
        )
        .unwrap();
        assert_eq!(low_rent_bound(&flat), q("10"));
        let wide = Economy::from_parts(
            vec![vec![q("100"), q("0")], vec![q("0"), q("0")]],
            vec![q("1"), q("2")],
            vec![0, 0],
            SlopeSet::quasi_linear(),
            q("1"),
        )
        .unwrap();
        assert!(low_rent_bound(&wide).is_negative());
    }

    #[test]
    fn validate_reports_all_violations() {
        assert!(validate(&e2(), None).is_ok());

        let mut bad = e2();
        bad.rooms.push("c".into());
        let errs = validate(&bad, None).unwrap_err();
        assert!(errs
            .iter()
            .any(|v| v.to_string().starts_with("agent/room count mismatch")));

        let obj = Objective::with_affine(
            Family::MaxminUtility,
            vec![0, 1],
            vec![
                Affine::identity(),
                Affine::new(Rational::zero(), Rational::one()),
            ],
        );
        let errs = validate(&e2(), Some(&obj)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0]
            .to_string()
            .starts_with("affine slope must be positive"));

        let mut several = e2();
        several.slope_set = SlopeSet {
            rhos: vec![q("1"), q("1")],
        };
        several.prefs[0].budget = q("-1");
        let errs = validate(&several, None).unwrap_err();
        assert!(errs.contains(&Violation::SlopeSetMissingZero));
        assert!(errs.contains(&Violation::DuplicateSlope(q("1"))));
        assert!(errs.contains(&Violation::NegativeBudget { agent: 0 }));
    }

    #[test]
    fn default_room_ids() {
        assert_eq!(default_room_id(0), "a");
        assert_eq!(default_room_id(25), "z");
        assert_eq!(default_room_id(26), "aa");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small() -> impl Strategy<Value = Rational> {
            (-200i64..200, 1i64..8).prop_map(|(n, d)| Rational::new(n, d))
        }

        fn rho() -> impl Strategy<Value = Rational> {
            (0i64..6, 1i64..4).prop_map(|(n, d)| Rational::new(n, d))
        }

        proptest! {
            #[test]
            fn kink_continuity(v in small(), b in small(), rho in rho()) {
                let below = &v - &b;
                let above = &v - &b - &rho * (&b - &b);
                prop_assert_eq!(utility_of(&v, &b, &rho, &b), below.clone());
                prop_assert_eq!(below, above);
            }

            #[test]
            fn strictly_decreasing_in_rent(v in small(), b in small(), rho in rho(), r in small(), step in 1i64..50) {
                let r2 = &r + Rational::new(step, 7);
                prop_assert!(utility_of(&v, &b, &rho, &r2) < utility_of(&v, &b, &rho, &r));
            }

            #[test]
            fn linearized_value_identity(v in small(), b in 0i64..100, rho in rho(), over in 1i64..500) {
                let b = Rational::from(b);
                let p = Preference { values: vec![v.clone()], budget: b.clone(), slope_index: 0 };
                let big_v = p.linearized_value(&rho, 0).unwrap();
                let r = &b + Rational::new(over, 3);
                let expected = (Rational::one() + &rho) * (&big_v - &r);
                prop_assert_eq!(utility_of(&v, &b, &rho, &r), expected);
            }

            /// Left slopes from `nu_lambda`, right slopes from `kappa`, both
            /// exact on the interval up to the nearest breakpoint.
            #[test]
            fn one_sided_linearizations(v in small(), b in -20i64..20, rho in rho(), r in -40i64..40, frac in 1i64..10) {
                let b = Rational::from(b);
                let r0 = Rational::from(r);
                let e = Economy {
                    agents: vec!["1".into()],
                    rooms: vec!["a".into()],
                    prefs: vec![Preference { values: vec![v.clone()], budget: b.clone(), slope_index: 1 }],
                    slope_set: SlopeSet { rhos: vec![Rational::zero(), rho.clone() + Rational::new(1, 1000)] },
                    total_rent: r0.clone(),
                };
                let rho = e.rho(0).clone();
                let dist = (&r0 - &b).abs();
                let eps = if dist.is_zero() { Rational::one() } else { dist };
                let t = &eps * Rational::new(frac, 10);
                let (nu, lambda) = nu_lambda(&e, std::slice::from_ref(&r0))[0][0].clone();
                let left = &r0 - &t;
                prop_assert_eq!(utility_of(&v, &b, &rho, &left), &nu - &lambda * &left);
                prop_assert_eq!(utility_of(&v, &b, &rho, &r0), &nu - &lambda * &r0);
                let (mu, k) = kappa_linearization(&e, std::slice::from_ref(&r0))[0][0].clone();
                let right = &r0 + &t;
                prop_assert_eq!(utility_of(&v, &b, &rho, &right), &mu - &k * &right);
                prop_assert_eq!(utility_of(&v, &b, &rho, &r0), &mu - &k * &r0);
            }
        }
    }
}
