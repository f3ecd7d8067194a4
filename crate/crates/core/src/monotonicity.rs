//! Incentive-compatibility checkers over finite type domains.
//!
//! Every checker takes an explicit [`Direction`]: in value-maximizing
//! settings the weak-monotonicity inequality reads
//! `v(a) + v'(b) ≥ v'(a) + v(b)`, in cost-minimizing settings it reverses.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{DefaultExecutor, Executor};
use crate::model::{DiscreteDistribution, FiniteTypeDomain, MechanismOutcome, Profile, TabulatedRule, Valuation};
use crate::scalar::{format_rational, ExactScalar};
use crate::scheduling::TaskAllocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ValueMaximizing,
    CostMinimizing,
}

impl Direction {
    /// Whether `lhs` and `rhs` of a 2-cycle inequality are in the required order.
    pub fn accepts(self, lhs: &ExactScalar, rhs: &ExactScalar, strict: bool) -> bool {
        match (self, strict) {
            (Direction::ValueMaximizing, false) => lhs >= rhs,
            (Direction::ValueMaximizing, true) => lhs > rhs,
            (Direction::CostMinimizing, false) => lhs <= rhs,
            (Direction::CostMinimizing, true) => lhs < rhs,
        }
    }

    /// Quasilinear utility: `value − payment`, or `payment − cost`.
    pub fn utility(self, worth: &ExactScalar, payment: &ExactScalar) -> Result<ExactScalar> {
        let (plus, minus) = match self {
            Direction::ValueMaximizing => (worth, payment),
            Direction::CostMinimizing => (payment, worth),
        };
        plus.checked_sub(minus)
            .ok_or_else(|| Error::UndefinedUtility(format!("{plus} minus {minus}")))
    }
}

/// A social choice function evaluated on profiles.
pub trait AllocationRule<A>: Sync {
    fn allocate(&self, profile: &Profile) -> Result<A>;
}

impl<A, F> AllocationRule<A> for F
where
    F: Fn(&Profile) -> Result<A> + Sync,
{
    fn allocate(&self, profile: &Profile) -> Result<A> {
        self(profile)
    }
}

impl<A: Clone + Sync> AllocationRule<A> for TabulatedRule<A> {
    fn allocate(&self, profile: &Profile) -> Result<A> {
        self.get(profile)
            .cloned()
            .ok_or_else(|| Error::InvalidDomain(format!("rule undefined at profile {profile}")))
    }
}

/// A failed 2-cycle inequality: `player` moves from its type in `profile`
/// to its type in `deviation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub player: usize,
    pub profile: Profile,
    pub deviation: Profile,
    pub lhs: ExactScalar,
    pub rhs: ExactScalar,
}

/// `(v(a) + v'(b), v'(a) + v(b))`.
pub fn wmon_terms<A, V: Valuation<A> + ?Sized>(
    player: usize,
    v: &V,
    v_prime: &V,
    a: &A,
    b: &A,
) -> Result<(ExactScalar, ExactScalar)> {
    let lhs = &v.value(player, a)? + &v_prime.value(player, b)?;
    let rhs = &v_prime.value(player, a)? + &v.value(player, b)?;
    Ok((lhs, rhs))
}

pub fn wmon_pair_holds<A, V: Valuation<A> + ?Sized>(
    player: usize,
    v: &V,
    v_prime: &V,
    a: &A,
    b: &A,
    dir: Direction,
) -> Result<bool> {
    let (lhs, rhs) = wmon_terms(player, v, v_prime, a, b)?;
    Ok(dir.accepts(&lhs, &rhs, false))
}

/// Evaluates `rule` once per profile, in profile order.
pub fn tabulate<A, R>(rule: &R, profiles: &[Profile]) -> Result<Vec<A>>
where
    A: Send,
    R: AllocationRule<A> + ?Sized,
{
    DefaultExecutor::default()
        .map_slice(profiles, |p| rule.allocate(p))
        .into_iter()
        .collect()
}

fn profile_position(domain_sizes: &[usize], profile: &Profile) -> usize {
    profile
        .0
        .iter()
        .zip(domain_sizes)
        .fold(0, |acc, (&t, &size)| acc * size + t)
}

fn type_counts<V>(domain: &FiniteTypeDomain<V>) -> Vec<usize> {
    (0..domain.players()).map(|i| domain.types(i).len()).collect()
}

fn monotonicity_violations<A, V, R>(
    rule: &R,
    domain: &FiniteTypeDomain<V>,
    dir: Direction,
    strict_on_change: bool,
) -> Result<Vec<Violation>>
where
    A: Send + PartialEq,
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    let profiles = domain.profiles();
    let outcomes = tabulate(rule, &profiles)?;
    let sizes = type_counts(domain);
    let mut report = Vec::new();
    for (profile, a) in profiles.iter().zip(&outcomes) {
        for player in 0..domain.players() {
            let v = domain.valuation_in(profile, player);
            for t in (0..sizes[player]).filter(|&t| t != profile.type_of(player)) {
                let deviation = profile.with_type(player, t);
                let b = &outcomes[profile_position(&sizes, &deviation)];
                let (lhs, rhs) = wmon_terms(player, v, domain.valuation(player, t), a, b)?;
                let strict = strict_on_change && a != b;
                if !dir.accepts(&lhs, &rhs, strict) {
                    report.push(Violation {
                        player,
                        profile: profile.clone(),
                        deviation,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Every ordered unilateral deviation violating weak monotonicity, in
/// lexicographic profile order.
pub fn check_wmon<A, V, R>(rule: &R, domain: &FiniteTypeDomain<V>, dir: Direction) -> Result<Vec<Violation>>
where
    A: Send + PartialEq,
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    monotonicity_violations(rule, domain, dir, false)
}

/// As [`check_wmon`], with strict inequality required whenever the outcome changes.
pub fn check_smon<A, V, R>(rule: &R, domain: &FiniteTypeDomain<V>, dir: Direction) -> Result<Vec<Violation>>
where
    A: Send + PartialEq,
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    monotonicity_violations(rule, domain, dir, true)
}

/// `Σ_a Pr[a]·v(a)`.
pub fn extended_valuation<A, V: Valuation<A> + ?Sized>(
    v: &V,
    player: usize,
    dist: &DiscreteDistribution<A>,
) -> Result<ExactScalar> {
    dist.try_expectation(|a| v.value(player, a))
}

/// `probabilities[machine][task]`: chance that the machine receives the task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalAssignment {
    probabilities: Vec<Vec<BigRational>>,
}

impl MarginalAssignment {
    pub fn new(probabilities: Vec<Vec<BigRational>>) -> Result<Self> {
        let tasks = probabilities.first().map_or(0, Vec::len);
        if probabilities.is_empty() || probabilities.iter().any(|row| row.len() != tasks) {
            return Err(Error::DimensionMismatch("marginal rows must share one length".into()));
        }
        let unit = |p: &BigRational| *p >= BigRational::zero() && *p <= BigRational::one();
        if !probabilities.iter().flatten().all(unit) {
            return Err(Error::InvalidDistribution("marginal outside [0,1]".into()));
        }
        for task in 0..tasks {
            let total: BigRational = probabilities.iter().map(|row| row[task].clone()).sum();
            if !total.is_one() {
                return Err(Error::InvalidDistribution(format!(
                    "task {task} marginals sum to {}",
                    format_rational(&total)
                )));
            }
        }
        Ok(MarginalAssignment { probabilities })
    }

    /// Marginals of a distribution over allocations.
    pub fn from_distribution(dist: &DiscreteDistribution<TaskAllocation>, machines: usize) -> Result<Self> {
        let tasks = dist.outcomes()[0].0.assignment.len();
        let mut probabilities = vec![vec![BigRational::zero(); tasks]; machines];
        for (alloc, p) in dist.iter() {
            if alloc.assignment.len() != tasks {
                return Err(Error::DimensionMismatch("allocations of different sizes".into()));
            }
            for (task, &machine) in alloc.assignment.iter().enumerate() {
                if machine >= machines {
                    return Err(Error::InvalidAllocation(format!("machine {machine} does not exist")));
                }
                probabilities[machine][task] += p;
            }
        }
        Self::new(probabilities)
    }

    pub fn machines(&self) -> usize {
        self.probabilities.len()
    }

    pub fn tasks(&self) -> usize {
        self.probabilities[0].len()
    }

    pub fn probability(&self, machine: usize, task: usize) -> &BigRational {
        &self.probabilities[machine][task]
    }

    /// `Σ_t p_{machine,t}·entries[t]`; zero-probability tasks contribute nothing.
    pub fn extended_value(&self, machine: usize, entries: &[ExactScalar]) -> Result<ExactScalar> {
        if entries.len() != self.tasks() {
            return Err(Error::DimensionMismatch("valuation and marginal sizes".into()));
        }
        Ok(self.probabilities[machine]
            .iter()
            .zip(entries)
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, v)| v.scale(p))
            .sum())
    }
}

/// Weak monotonicity in the extended sense, evaluated on the marginal form
/// of the extended valuation. Requires additive valuations.
pub fn check_extended_wmon<V, R>(rule: &R, domain: &FiniteTypeDomain<V>, dir: Direction) -> Result<Vec<Violation>>
where
    V: Valuation<TaskAllocation>,
    R: AllocationRule<MarginalAssignment> + ?Sized,
{
    let entries = |player: usize, t: usize| domain.valuation(player, t).additive_entries().ok_or(Error::NotAdditive);
    for player in 0..domain.players() {
        for t in 0..domain.types(player).len() {
            entries(player, t)?;
        }
    }
    let profiles = domain.profiles();
    let marginals = tabulate(rule, &profiles)?;
    let sizes = type_counts(domain);
    let mut report = Vec::new();
    for (profile, p) in profiles.iter().zip(&marginals) {
        for player in 0..domain.players() {
            let v = entries(player, profile.type_of(player))?;
            for t in (0..sizes[player]).filter(|&t| t != profile.type_of(player)) {
                let deviation = profile.with_type(player, t);
                let q = &marginals[profile_position(&sizes, &deviation)];
                let v_prime = entries(player, t)?;
                let lhs = &p.extended_value(player, v)? + &q.extended_value(player, v_prime)?;
                let rhs = &p.extended_value(player, v_prime)? + &q.extended_value(player, v)?;
                if !dir.accepts(&lhs, &rhs, false) {
                    report.push(Violation {
                        player,
                        profile: profile.clone(),
                        deviation,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// A player whose payment moves with its own report although the outcome does not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentDependence {
    pub player: usize,
    pub profile: Profile,
    pub deviation: Profile,
    pub payment: ExactScalar,
    pub deviation_payment: ExactScalar,
}

/// Result of [`check_ds_truthful`]. In `utility`, `lhs` is the truthful
/// utility and `rhs` the utility after deviating.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthfulnessReport {
    pub utility: Vec<Violation>,
    pub payment_dependence: Vec<PaymentDependence>,
}

impl TruthfulnessReport {
    pub fn is_empty(&self) -> bool {
        self.utility.is_empty() && self.payment_dependence.is_empty()
    }
}

/// Dominant-strategy truthfulness of a mechanism with payments.
pub fn check_ds_truthful<A, V, R>(
    mechanism: &R,
    domain: &FiniteTypeDomain<V>,
    dir: Direction,
) -> Result<TruthfulnessReport>
where
    A: Send + PartialEq,
    V: Valuation<A>,
    R: AllocationRule<MechanismOutcome<A>> + ?Sized,
{
    let profiles = domain.profiles();
    let outcomes = tabulate(mechanism, &profiles)?;
    let sizes = type_counts(domain);
    let mut report = TruthfulnessReport::default();
    for (profile, honest) in profiles.iter().zip(&outcomes) {
        if honest.payments.len() != domain.players() {
            return Err(Error::DimensionMismatch(format!(
                "{} payments for {} players",
                honest.payments.len(),
                domain.players()
            )));
        }
        for player in 0..domain.players() {
            let v = domain.valuation_in(profile, player);
            let truthful = dir.utility(&v.value(player, &honest.alternative)?, &honest.payments[player])?;
            for t in (0..sizes[player]).filter(|&t| t != profile.type_of(player)) {
                let deviation = profile.with_type(player, t);
                let lied = &outcomes[profile_position(&sizes, &deviation)];
                let deviating = dir.utility(&v.value(player, &lied.alternative)?, &lied.payments[player])?;
                if deviating > truthful {
                    report.utility.push(Violation {
                        player,
                        profile: profile.clone(),
                        deviation: deviation.clone(),
                        lhs: truthful.clone(),
                        rhs: deviating,
                    });
                }
                if lied.alternative == honest.alternative && lied.payments[player] != honest.payments[player] {
                    report.payment_dependence.push(PaymentDependence {
                        player,
                        profile: profile.clone(),
                        deviation,
                        payment: honest.payments[player].clone(),
                        deviation_payment: lied.payments[player].clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// A cycle of types of `player` (with the others fixed as in `others`) whose
/// incentive constraints cannot all hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeCycle {
    pub player: usize,
    pub others: Profile,
    pub types: Vec<usize>,
    pub weight: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PaymentSolution {
    /// Payments per profile, one per player, making truth-telling dominant.
    Feasible(BTreeMap<Profile, Vec<ExactScalar>>),
    Infeasible(NegativeCycle),
}

impl PaymentSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PaymentSolution::Feasible(_))
    }
}

/// Difference constraints `p[to] − p[from] ≤ weight`.
struct Edge {
    from: usize,
    to: usize,
    weight: ExactScalar,
}

/// Shortest-path potentials from a virtual source joined to every node by a
/// zero edge, or a negative cycle.
fn potentials(nodes: usize, edges: &[Edge]) -> std::result::Result<Vec<ExactScalar>, Vec<usize>> {
    let mut dist = vec![ExactScalar::zero(); nodes];
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    let mut last_relaxed = None;
    for _ in 0..=nodes {
        last_relaxed = None;
        for (k, e) in edges.iter().enumerate() {
            let candidate = &dist[e.from] + &e.weight;
            if candidate < dist[e.to] {
                dist[e.to] = candidate;
                pred[e.to] = Some(k);
                last_relaxed = Some(e.to);
            }
        }
        if last_relaxed.is_none() {
            return Ok(dist);
        }
    }
    // Still relaxing after |V| rounds: walk predecessors back onto the cycle.
    let mut node = last_relaxed.expect("relaxation happened");
    for _ in 0..nodes {
        node = edges[pred[node].expect("relaxed node has a predecessor")].from;
    }
    let start = node;
    let mut cycle = vec![start];
    let mut cur = edges[pred[start].expect("on cycle")].from;
    while cur != start {
        cycle.push(cur);
        cur = edges[pred[cur].expect("on cycle")].from;
    }
    cycle.reverse();
    Err(cycle)
}

/// Decides whether payments implementing `rule` truthfully exist, by
/// checking the per-player type graph for negative cycles. Feasible
/// payments are the shortest-path potentials.
pub fn payments_exist<A, V, R>(rule: &R, domain: &FiniteTypeDomain<V>, dir: Direction) -> Result<PaymentSolution>
where
    A: Send,
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    let profiles = domain.profiles();
    let outcomes = tabulate(rule, &profiles)?;
    let sizes = type_counts(domain);
    let mut payments: BTreeMap<Profile, Vec<ExactScalar>> = profiles
        .iter()
        .map(|p| (p.clone(), vec![ExactScalar::zero(); domain.players()]))
        .collect();
    for player in 0..domain.players() {
        let types = sizes[player];
        for others in profiles.iter().filter(|p| p.type_of(player) == 0) {
            let outcome = |t: usize| &outcomes[profile_position(&sizes, &others.with_type(player, t))];
            let mut edges = Vec::new();
            for s in 0..types {
                let v = domain.valuation(player, s);
                let own = v.value(player, outcome(s))?;
                for t in (0..types).filter(|&t| t != s) {
                    let other = v.value(player, outcome(t))?;
                    let (from, to, gain, loss) = match dir {
                        // p[t] − p[s] ≤ c_s(f_t) − c_s(f_s)
                        Direction::CostMinimizing => (s, t, &other, &own),
                        // p[s] − p[t] ≤ v_s(f_s) − v_s(f_t)
                        Direction::ValueMaximizing => (t, s, &own, &other),
                    };
                    if gain.is_infinite() && loss.is_finite() {
                        continue;
                    }
                    let weight = gain.checked_sub(loss).ok_or_else(|| {
                        Error::UndefinedUtility(format!("player {player} type {s} faces {gain} minus {loss}"))
                    })?;
                    edges.push(Edge { from, to, weight });
                }
            }
            match potentials(types, &edges) {
                Ok(dist) => {
                    for (t, d) in dist.into_iter().enumerate() {
                        let profile = others.with_type(player, t);
                        payments.get_mut(&profile).expect("profile in domain")[player] = d;
                    }
                }
                Err(types_on_cycle) => {
                    let weight = types_on_cycle
                        .iter()
                        .zip(types_on_cycle.iter().cycle().skip(1))
                        .map(|(&from, &to)| {
                            edges
                                .iter()
                                .filter(|e| e.from == from && e.to == to)
                                .map(|e| e.weight.clone())
                                .next()
                                .expect("cycle edge exists")
                        })
                        .sum();
                    return Ok(PaymentSolution::Infeasible(NegativeCycle {
                        player,
                        others: others.clone(),
                        types: types_on_cycle,
                        weight,
                    }));
                }
            }
        }
    }
    Ok(PaymentSolution::Feasible(payments))
}

/// Checks that `prior` factors as (player's type) × (others' types).
fn opponents_marginal(prior: &DiscreteDistribution<Profile>, player: usize) -> Result<BTreeMap<Profile, BigRational>> {
    let mut joint: BTreeMap<Profile, BigRational> = BTreeMap::new();
    let mut own: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut others: BTreeMap<Profile, BigRational> = BTreeMap::new();
    for (profile, p) in prior.iter() {
        if player >= profile.players() {
            return Err(Error::DimensionMismatch(format!("prior has no player {player}")));
        }
        *joint.entry(profile.clone()).or_insert_with(BigRational::zero) += p;
        *own.entry(profile.type_of(player)).or_insert_with(BigRational::zero) += p;
        *others
            .entry(profile.with_type(player, 0))
            .or_insert_with(BigRational::zero) += p;
    }
    for (&t, p_t) in &own {
        for (o, p_o) in &others {
            let expected = p_t * p_o;
            let actual = joint
                .get(&o.with_type(player, t))
                .cloned()
                .unwrap_or_else(BigRational::zero);
            if actual != expected {
                return Err(Error::NotProductPrior(player));
            }
        }
    }
    Ok(others)
}

/// Summed pair of Bayesian incentive constraints between `type_a` and
/// `type_b` of `player`, with opponents drawn from the prior. With two types
/// this is equivalent to the existence of BIC payments.
pub fn bayes_2cycle_feasible<A, V, R>(
    rule: &R,
    domain: &FiniteTypeDomain<V>,
    prior: &DiscreteDistribution<Profile>,
    player: usize,
    type_a: usize,
    type_b: usize,
    dir: Direction,
) -> Result<bool>
where
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    bayes_2cycle_terms(rule, domain, prior, player, type_a, type_b).map(|(lhs, rhs)| dir.accepts(&lhs, &rhs, false))
}

/// `(E[v_a(f(a,·))] + E[v_b(f(b,·))], E[v_b(f(a,·))] + E[v_a(f(b,·))])`.
pub fn bayes_2cycle_terms<A, V, R>(
    rule: &R,
    domain: &FiniteTypeDomain<V>,
    prior: &DiscreteDistribution<Profile>,
    player: usize,
    type_a: usize,
    type_b: usize,
) -> Result<(ExactScalar, ExactScalar)>
where
    V: Valuation<A>,
    R: AllocationRule<A> + ?Sized,
{
    if player >= domain.players() {
        return Err(Error::InvalidParameter(format!("no player {player}")));
    }
    let types = domain.types(player).len();
    if type_a >= types || type_b >= types || type_a == type_b {
        return Err(Error::InvalidParameter("need two distinct types of the player".into()));
    }
    let others = opponents_marginal(prior, player)?;
    let v_a = domain.valuation(player, type_a);
    let v_b = domain.valuation(player, type_b);
    let mut lhs = ExactScalar::zero();
    let mut rhs = ExactScalar::zero();
    for (o, p) in others.iter().filter(|(_, p)| !p.is_zero()) {
        let pa = o.with_type(player, type_a);
        let pb = o.with_type(player, type_b);
        domain.check_profile(&pa)?;
        let fa = rule.allocate(&pa)?;
        let fb = rule.allocate(&pb)?;
        lhs = &lhs + &(&v_a.value(player, &fa)? + &v_b.value(player, &fb)?).scale(p);
        rhs = &rhs + &(&v_b.value(player, &fa)? + &v_a.value(player, &fb)?).scale(p);
    }
    Ok((lhs, rhs))
}
