//! Adversarial instance families for scheduling and exhaustive searches
//! that turn each lower-bound argument into an exact optimum over a
//! constrained space of allocation rules.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{DefaultExecutor, Executor};
use crate::lp::{LinearProgram, LpOutcome};
use crate::model::{
    approximation_ratio, checked_count, AdditiveValuation, Budget, DiscreteDistribution, FiniteTypeDomain, Profile,
    TabulatedRule, TypeEntry,
};
use crate::monotonicity::{bayes_2cycle_terms, wmon_terms, Direction, Violation};
use crate::scalar::{format_rational, ExactScalar};
use crate::scheduling::{instance_from_profile, makespan, optimal_makespan, SchedulingInstance, TaskAllocation};

/// Profiles `from` and `to` differ only in `player`'s type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub player: usize,
}

/// A finite set of profiles over a two-type domain, the unilateral
/// deviations linking them, and optionally a distribution over them.
#[derive(Debug, Clone)]
pub struct BoundFamily {
    pub id: String,
    pub machines: usize,
    pub epsilon: BigRational,
    pub domain: FiniteTypeDomain<AdditiveValuation>,
    pub profiles: Vec<Profile>,
    /// Probabilities indexed like `profiles`.
    pub distribution: Option<DiscreteDistribution<usize>>,
    pub links: Vec<Link>,
}

fn check_epsilon(epsilon: &BigRational, below_one: bool) -> Result<()> {
    if *epsilon <= BigRational::zero() || (below_one && *epsilon >= BigRational::one()) {
        let range = if below_one { "0 < epsilon < 1" } else { "epsilon > 0" };
        return Err(Error::InvalidParameter(format!(
            "{range} required, got {}",
            format_rational(epsilon)
        )));
    }
    Ok(())
}

/// Per machine `i`, the types `v` (1 on tasks `i` and `m`, `big` elsewhere)
/// and `v'` (0 on task `i`, `1+ε` on task `m`, `big` elsewhere), over
/// `m + 1` tasks.
fn two_type_domain(
    machines: usize,
    epsilon: &BigRational,
    big: ExactScalar,
) -> Result<FiniteTypeDomain<AdditiveValuation>> {
    let tasks = machines + 1;
    let shared = tasks - 1;
    let one_plus = ExactScalar::from_rational(BigRational::one() + epsilon);
    let types = (0..machines)
        .map(|i| {
            let v = (0..tasks)
                .map(|t| {
                    if t == i || t == shared {
                        ExactScalar::one()
                    } else {
                        big.clone()
                    }
                })
                .collect();
            let v_prime = (0..tasks)
                .map(|t| {
                    if t == i {
                        ExactScalar::zero()
                    } else if t == shared {
                        one_plus.clone()
                    } else {
                        big.clone()
                    }
                })
                .collect();
            vec![
                TypeEntry::new("v", AdditiveValuation(v)),
                TypeEntry::new("v'", AdditiveValuation(v_prime)),
            ]
        })
        .collect();
    FiniteTypeDomain::new(types)
}

/// `I` (every machine at `v`) followed by `I^j` (machine `j` at `v'`).
fn star_profiles(machines: usize) -> (Vec<Profile>, Vec<Link>) {
    let hub = Profile(vec![0; machines]);
    let mut profiles = vec![hub.clone()];
    let mut links = Vec::new();
    for j in 0..machines {
        profiles.push(hub.with_type(j, 1));
        links.push(Link {
            from: 0,
            to: j + 1,
            player: j,
        });
    }
    (profiles, links)
}

/// Two machines, three tasks, off-diagonal cost 100; profiles `(v_1, v_2)`,
/// `(v'_1, v_2)` and `(v_1, v'_2)`. Both deviations are needed: with only
/// one of them a rule can send task 3 to the other machine at `(v_1, v_2)`
/// and stay optimal everywhere.
pub fn deterministic_family(epsilon: &BigRational) -> Result<BoundFamily> {
    check_epsilon(epsilon, false)?;
    let domain = two_type_domain(2, epsilon, ExactScalar::from_integer(100))?;
    let (profiles, links) = star_profiles(2);
    BoundFamily::new("deterministic", epsilon.clone(), domain, profiles, None, links)
}

fn yao_like(id: &str, machines: usize, epsilon: &BigRational, big: ExactScalar) -> Result<BoundFamily> {
    if machines < 2 {
        return Err(Error::InvalidParameter("at least two machines required".into()));
    }
    check_epsilon(epsilon, true)?;
    let domain = two_type_domain(machines, epsilon, big)?;
    let (profiles, links) = star_profiles(machines);
    let leaf = (BigRational::one() - epsilon) / BigRational::from_integer(machines.into());
    let mut weights = vec![(0, epsilon.clone())];
    weights.extend((1..=machines).map(|k| (k, leaf.clone())));
    let distribution = DiscreteDistribution::new(weights)?;
    BoundFamily::new(id, epsilon.clone(), domain, profiles, Some(distribution), links)
}

/// `m` machines, `m + 1` tasks, off-diagonal cost `4/ε`; instance `I` with
/// probability `ε`, each `I^j` with probability `(1−ε)/m`.
pub fn yao_family(machines: usize, epsilon: &BigRational) -> Result<BoundFamily> {
    let big = ExactScalar::from_rational(BigRational::from_integer(4.into()) / epsilon);
    yao_like("yao", machines, epsilon, big)
}

/// As [`yao_family`] with off-diagonal cost `4/ε²`.
pub fn in_expectation_family(machines: usize, epsilon: &BigRational) -> Result<BoundFamily> {
    let big = ExactScalar::from_rational(BigRational::from_integer(4.into()) / (epsilon * epsilon));
    yao_like("in-expectation", machines, epsilon, big)
}

/// Two machines, three tasks, off-diagonal cost `4/ε`; all four profiles
/// `{v_1, v'_1} × {v_2, v'_2}` equally likely. Machines that could only
/// take tasks at infinite cost are left out.
pub fn bayes_family(epsilon: &BigRational) -> Result<BoundFamily> {
    check_epsilon(epsilon, false)?;
    let big = ExactScalar::from_rational(BigRational::from_integer(4.into()) / epsilon);
    let domain = two_type_domain(2, epsilon, big)?;
    let profiles = domain.profiles();
    let distribution = DiscreteDistribution::uniform((0..profiles.len()).collect())?;
    let links = vec![
        Link {
            from: 0,
            to: 2,
            player: 0,
        },
        Link {
            from: 1,
            to: 3,
            player: 0,
        },
        Link {
            from: 0,
            to: 1,
            player: 1,
        },
        Link {
            from: 2,
            to: 3,
            player: 1,
        },
    ];
    BoundFamily::new("bayes", epsilon.clone(), domain, profiles, Some(distribution), links)
}

/// `T^j`: machine `i` gets task `i`, machine `j` also gets the last task.
pub fn diagonal_allocation(machines: usize, j: usize) -> TaskAllocation {
    let mut assignment: Vec<usize> = (0..machines).collect();
    assignment.push(j);
    TaskAllocation::new(assignment)
}

impl BoundFamily {
    pub fn new(
        id: &str,
        epsilon: BigRational,
        domain: FiniteTypeDomain<AdditiveValuation>,
        profiles: Vec<Profile>,
        distribution: Option<DiscreteDistribution<usize>>,
        links: Vec<Link>,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::InvalidDomain("family has no profiles".into()));
        }
        for p in &profiles {
            domain.check_profile(p)?;
        }
        if let Some(d) = &distribution {
            if d.iter().any(|(&k, _)| k >= profiles.len()) {
                return Err(Error::InvalidDistribution("weight on unknown profile".into()));
            }
        }
        for link in &links {
            let (a, b) = (
                profiles
                    .get(link.from)
                    .ok_or_else(|| Error::InvalidDomain("bad link".into()))?,
                profiles
                    .get(link.to)
                    .ok_or_else(|| Error::InvalidDomain("bad link".into()))?,
            );
            if a.differing_players(b) != vec![link.player] {
                return Err(Error::InvalidDomain(format!(
                    "profiles {a} and {b} do not differ exactly in player {}",
                    link.player
                )));
            }
        }
        Ok(BoundFamily {
            id: id.to_string(),
            machines: domain.players(),
            epsilon,
            domain,
            profiles,
            distribution,
            links,
        })
    }

    pub fn instance(&self, k: usize) -> Result<SchedulingInstance> {
        instance_from_profile(&self.domain, &self.profiles[k])
    }

    pub fn tasks(&self) -> usize {
        self.domain.valuation(0, 0).0.len()
    }

    /// Probability of each profile (zero when the family has no distribution).
    pub fn weights(&self) -> Vec<BigRational> {
        let mut w = vec![BigRational::zero(); self.profiles.len()];
        if let Some(d) = &self.distribution {
            for (&k, p) in d.iter() {
                w[k] += p;
            }
        }
        w
    }

    /// The same family with all weight on one profile.
    pub fn with_point_mass(&self, k: usize) -> Self {
        BoundFamily {
            distribution: Some(DiscreteDistribution::point(k)),
            ..self.clone()
        }
    }

    /// The same family restricted to its first profile.
    pub fn single_profile(&self) -> Self {
        BoundFamily {
            profiles: vec![self.profiles[0].clone()],
            distribution: None,
            links: Vec::new(),
            ..self.clone()
        }
    }

    /// Weak-monotonicity (cost) violations of a rule given per profile.
    pub fn link_violations(&self, rule: &[TaskAllocation]) -> Result<Vec<Violation>> {
        let mut report = Vec::new();
        for link in &self.links {
            let (p, q) = (&self.profiles[link.from], &self.profiles[link.to]);
            let (lhs, rhs) = wmon_terms(
                link.player,
                self.domain.valuation_in(p, link.player),
                self.domain.valuation_in(q, link.player),
                &rule[link.from],
                &rule[link.to],
            )?;
            if !Direction::CostMinimizing.accepts(&lhs, &rhs, false) {
                report.push(Violation {
                    player: link.player,
                    profile: p.clone(),
                    deviation: q.clone(),
                    lhs,
                    rhs,
                });
            }
        }
        Ok(report)
    }

    /// Makespan ratio of `rule` at every profile.
    pub fn ratios(&self, rule: &[TaskAllocation], budget: &Budget) -> Result<Vec<ExactScalar>> {
        (0..self.profiles.len())
            .map(|k| {
                let inst = self.instance(k)?;
                let (opt, _) = optimal_makespan(&inst, budget)?;
                Ok(approximation_ratio(&makespan(&inst, &rule[k])?, &opt))
            })
            .collect()
    }
}

/// How per-profile ratios combine into a rule's score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Worst,
    Expected,
}

/// A minimizing rule and its score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleSearchResult {
    pub value: ExactScalar,
    /// Allocation chosen at each family profile.
    pub rule: Vec<TaskAllocation>,
    pub ratios: Vec<ExactScalar>,
}

struct Candidates {
    allocations: Vec<TaskAllocation>,
    ratios: Vec<ExactScalar>,
}

fn candidates(family: &BoundFamily, budget: &Budget) -> Result<Vec<Candidates>> {
    let (m, n) = (family.machines, family.tasks());
    let count = budget.admit(checked_count(m, n))?;
    (0..family.profiles.len())
        .map(|k| {
            let inst = family.instance(k)?;
            let (opt, _) = optimal_makespan(&inst, budget)?;
            let allocations: Vec<TaskAllocation> = (0..count).map(|i| TaskAllocation::from_index(i, m, n)).collect();
            let ratios = allocations
                .iter()
                .map(|a| Ok(approximation_ratio(&makespan(&inst, a)?, &opt)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Candidates { allocations, ratios })
        })
        .collect()
}

fn score(objective: Objective, weights: &[BigRational], ratios: &[&ExactScalar]) -> ExactScalar {
    match objective {
        Objective::Worst => ratios.iter().map(|r| (*r).clone()).max().expect("nonempty"),
        Objective::Expected => ratios
            .iter()
            .zip(weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(r, w)| r.scale(w))
            .sum(),
    }
}

/// Whether every link touches profile 0, so leaves can be optimized
/// independently once the hub's allocation is fixed.
fn is_star(family: &BoundFamily) -> bool {
    family.links.iter().all(|l| l.from == 0 || l.to == 0)
}

fn link_holds(family: &BoundFamily, link: &Link, a: &TaskAllocation, b: &TaskAllocation) -> Result<bool> {
    let (p, q) = (&family.profiles[link.from], &family.profiles[link.to]);
    let (lhs, rhs) = wmon_terms(
        link.player,
        family.domain.valuation_in(p, link.player),
        family.domain.valuation_in(q, link.player),
        a,
        b,
    )?;
    Ok(Direction::CostMinimizing.accepts(&lhs, &rhs, false))
}

/// Exact minimum of `objective` over rules on the family's profiles that
/// satisfy weak monotonicity along every link (or over all rules when
/// `enforce_wmon` is false). Star-shaped families are searched hub-first;
/// others by brute force over the product of allocation spaces. Ties go
/// to the lexicographically smallest rule.
pub fn min_ratio_over_wmon_rules(
    family: &BoundFamily,
    objective: Objective,
    enforce_wmon: bool,
    budget: &Budget,
) -> Result<RuleSearchResult> {
    min_ratio_over_wmon_rules_with(family, objective, enforce_wmon, budget, DefaultExecutor::default())
}

pub fn min_ratio_over_wmon_rules_with<E: Executor>(
    family: &BoundFamily,
    objective: Objective,
    enforce_wmon: bool,
    budget: &Budget,
    exec: E,
) -> Result<RuleSearchResult> {
    if objective == Objective::Expected && family.distribution.is_none() {
        return Err(Error::InvalidParameter(format!(
            "family {} has no distribution",
            family.id
        )));
    }
    if is_star(family) {
        star_search(family, objective, enforce_wmon, budget, exec)
    } else {
        brute_force_search(family, objective, enforce_wmon, budget, exec)
    }
}

fn star_search<E: Executor>(
    family: &BoundFamily,
    objective: Objective,
    enforce_wmon: bool,
    budget: &Budget,
    exec: E,
) -> Result<RuleSearchResult> {
    let cands = candidates(family, budget)?;
    let weights = family.weights();
    let leaves = family.profiles.len() - 1;
    let hub_count = cands[0].allocations.len();
    budget.admit(Some(
        (hub_count as u128) * (cands[0].allocations.len() as u128) * leaves as u128,
    ))?;
    let links_of =
        |leaf: usize| -> Vec<&Link> { family.links.iter().filter(|l| l.from == leaf || l.to == leaf).collect() };
    let leaf_links: Vec<Vec<&Link>> = (0..=leaves).map(links_of).collect();
    let evaluate = |h: usize| -> Result<Option<(ExactScalar, Vec<usize>)>> {
        let hub = &cands[0].allocations[h];
        let mut choice = vec![h];
        for leaf in 1..=leaves {
            let mut best: Option<usize> = None;
            for (b, alloc) in cands[leaf].allocations.iter().enumerate() {
                if best.is_some_and(|c| cands[leaf].ratios[c] <= cands[leaf].ratios[b]) {
                    continue;
                }
                let mut ok = true;
                if enforce_wmon {
                    for link in &leaf_links[leaf] {
                        let (a, bb) = if link.from == 0 { (hub, alloc) } else { (alloc, hub) };
                        if !link_holds(family, link, a, bb)? {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    best = Some(b);
                }
            }
            match best {
                Some(b) => choice.push(b),
                None => return Ok(None),
            }
        }
        let ratios: Vec<&ExactScalar> = choice.iter().enumerate().map(|(k, &c)| &cands[k].ratios[c]).collect();
        Ok(Some((score(objective, &weights, &ratios), choice)))
    };
    let evaluated = exec.map_range(hub_count, evaluate);
    let mut best: Option<(ExactScalar, Vec<usize>)> = None;
    for item in evaluated {
        if let Some((value, choice)) = item? {
            if best.as_ref().is_none_or(|(v, _)| value < *v) {
                best = Some((value, choice));
            }
        }
    }
    let (value, choice) = best.ok_or_else(|| Error::Infeasible("no rule satisfies the constraints".into()))?;
    Ok(result_from_choice(&cands, value, &choice))
}

fn result_from_choice(cands: &[Candidates], value: ExactScalar, choice: &[usize]) -> RuleSearchResult {
    RuleSearchResult {
        value,
        rule: choice
            .iter()
            .enumerate()
            .map(|(k, &c)| cands[k].allocations[c].clone())
            .collect(),
        ratios: choice
            .iter()
            .enumerate()
            .map(|(k, &c)| cands[k].ratios[c].clone())
            .collect(),
    }
}

fn decode(mut index: usize, radix: usize, digits: usize) -> Vec<usize> {
    let mut out = vec![0; digits];
    for d in out.iter_mut().rev() {
        *d = index % radix;
        index /= radix;
    }
    out
}

/// Enumerates every rule on the family's profiles. Used as the reference
/// for the hub-first search and for families that are not star-shaped.
pub fn brute_force_search<E: Executor>(
    family: &BoundFamily,
    objective: Objective,
    enforce_wmon: bool,
    budget: &Budget,
    exec: E,
) -> Result<RuleSearchResult> {
    if objective == Objective::Expected && family.distribution.is_none() {
        return Err(Error::InvalidParameter(format!(
            "family {} has no distribution",
            family.id
        )));
    }
    let cands = candidates(family, budget)?;
    let weights = family.weights();
    let per = cands[0].allocations.len();
    let profiles = family.profiles.len();
    let total = budget.admit(checked_count(per, profiles))?;
    let found = exec.min_range(total, |index| {
        let choice = decode(index, per, profiles);
        if enforce_wmon {
            for link in &family.links {
                let holds = link_holds(
                    family,
                    link,
                    &cands[link.from].allocations[choice[link.from]],
                    &cands[link.to].allocations[choice[link.to]],
                );
                if !holds.unwrap_or(false) {
                    return None;
                }
            }
        }
        let ratios: Vec<&ExactScalar> = choice.iter().enumerate().map(|(k, &c)| &cands[k].ratios[c]).collect();
        Some(score(objective, &weights, &ratios))
    });
    let (value, index) = found.ok_or_else(|| Error::Infeasible("no rule satisfies the constraints".into()))?;
    Ok(result_from_choice(&cands, value, &decode(index, per, profiles)))
}

/// Expected ratio of a tabulated rule over the Bayesian family together with
/// its 2-cycle terms for each player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BicEvaluation {
    pub expected_ratio: ExactScalar,
    pub feasible: bool,
    /// `(lhs, rhs)` of the summed incentive constraints per player.
    pub terms: Vec<(ExactScalar, ExactScalar)>,
}

fn family_prior(family: &BoundFamily) -> Result<DiscreteDistribution<Profile>> {
    let d = family
        .distribution
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("family has no prior".into()))?;
    DiscreteDistribution::new(
        d.iter()
            .map(|(&k, p)| (family.profiles[k].clone(), p.clone()))
            .collect(),
    )
}

fn tabulated(family: &BoundFamily, rule: &[TaskAllocation]) -> TabulatedRule<TaskAllocation> {
    TabulatedRule::new(family.profiles.iter().cloned().zip(rule.iter().cloned()))
}

/// Bayesian 2-cycle feasibility (cost direction) of `rule` for every player.
pub fn evaluate_bic_rule(family: &BoundFamily, rule: &[TaskAllocation], budget: &Budget) -> Result<BicEvaluation> {
    let prior = family_prior(family)?;
    let table = tabulated(family, rule);
    let terms = (0..family.machines)
        .map(|player| bayes_2cycle_terms(&table, &family.domain, &prior, player, 0, 1))
        .collect::<Result<Vec<_>>>()?;
    let feasible = terms
        .iter()
        .all(|(lhs, rhs)| Direction::CostMinimizing.accepts(lhs, rhs, false));
    let ratios = family.ratios(rule, budget)?;
    let refs: Vec<&ExactScalar> = ratios.iter().collect();
    Ok(BicEvaluation {
        expected_ratio: score(Objective::Expected, &family.weights(), &refs),
        feasible,
        terms,
    })
}

/// Exact minimum expected ratio over all deterministic rules on the
/// Bayesian family that pass the 2-cycle test for every player (or over
/// all rules when `enforce_bic` is false).
pub fn min_expected_ratio_over_bic_rules(
    family: &BoundFamily,
    enforce_bic: bool,
    budget: &Budget,
) -> Result<RuleSearchResult> {
    min_expected_ratio_over_bic_rules_with(family, enforce_bic, budget, DefaultExecutor::default())
}

pub fn min_expected_ratio_over_bic_rules_with<E: Executor>(
    family: &BoundFamily,
    enforce_bic: bool,
    budget: &Budget,
    exec: E,
) -> Result<RuleSearchResult> {
    let prior = family_prior(family)?;
    let cands = candidates(family, budget)?;
    let weights = family.weights();
    let per = cands[0].allocations.len();
    let profiles = family.profiles.len();
    let total = budget.admit(checked_count(per, profiles))?;
    let found = exec.min_range(total, |index| {
        let choice = decode(index, per, profiles);
        if enforce_bic {
            let rule: Vec<TaskAllocation> = choice
                .iter()
                .enumerate()
                .map(|(k, &c)| cands[k].allocations[c].clone())
                .collect();
            let table = tabulated(family, &rule);
            for player in 0..family.machines {
                match bayes_2cycle_terms(&table, &family.domain, &prior, player, 0, 1) {
                    Ok((lhs, rhs)) if Direction::CostMinimizing.accepts(&lhs, &rhs, false) => {}
                    _ => return None,
                }
            }
        }
        let ratios: Vec<&ExactScalar> = choice.iter().enumerate().map(|(k, &c)| &cands[k].ratios[c]).collect();
        Some(score(Objective::Expected, &weights, &ratios))
    });
    let (value, index) = found.ok_or_else(|| Error::Infeasible("no rule passes the Bayesian test".into()))?;
    Ok(result_from_choice(&cands, value, &decode(index, per, profiles)))
}

/// The two rules of the Bayesian case analysis, in family profile order
/// `(v,v), (v,v'), (v',v), (v',v')`: player 1's report alone decides, or
/// it decides only against `v_2`.
pub fn bic_case_rules() -> Vec<(&'static str, Vec<TaskAllocation>)> {
    let t1 = diagonal_allocation(2, 0);
    let t2 = diagonal_allocation(2, 1);
    vec![
        ("player-1-decides", vec![t2.clone(), t2.clone(), t1.clone(), t1.clone()]),
        ("player-1-decides-against-v2", vec![t2.clone(), t2.clone(), t1, t2]),
    ]
}

/// Optimal point of the marginal program: `[p_rr(P), p_r,last(P), p_rr(Q), p_r,last(Q)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarginalBound {
    pub value: ExactScalar,
    pub point: Vec<ExactScalar>,
}

/// Maximum of `p_{r,m+1}(P^r)` over marginals of machine `r` at `I` and
/// `I^r` subject to extended weak monotonicity with the in-expectation
/// family's valuations, `p_{r,r}(P) ≥ 1 − ε²`, `p_{r,m+1}(P) ≤ 1/m` and
/// `[0,1]` boxes. Tasks on which `v_r` and `v'_r` agree drop out of the
/// monotonicity constraint, and any leftover probability of a column can
/// go to another machine, so only the four marginals above are variables.
pub fn max_shared_marginal(machines: usize, epsilon: &BigRational, budget: &Budget) -> Result<MarginalBound> {
    let family = in_expectation_family(machines, epsilon)?;
    let r = 0;
    let last = machines;
    let v = family.domain.valuation(r, 0).entries();
    let v_prime = family.domain.valuation(r, 1).entries();
    let diff = |t: usize| -> Result<BigRational> {
        (&v[t] - &v_prime[t])
            .as_rational()
            .cloned()
            .ok_or_else(|| Error::InvalidParameter("marginal program needs rational costs".into()))
    };
    for t in (0..family.tasks()).filter(|&t| t != r && t != last) {
        if !diff(t)?.is_zero() {
            return Err(Error::InvalidDomain("valuations differ outside the two tasks".into()));
        }
    }
    let (dr, dl) = (diff(r)?, diff(last)?);
    let zero = BigRational::zero;
    let one = BigRational::one;
    // x = [p_rr(P), p_rl(P), p_rr(Q), p_rl(Q)]; maximize p_rl(Q)
    let mut lp = LinearProgram::maximize(vec![zero(), zero(), zero(), one()]);
    // Σ_t (v − v')(p_t(P) − p_t(Q)) ≤ 0
    lp.at_most(vec![dr.clone(), dl.clone(), -dr, -dl], zero())?;
    lp.at_least(vec![one(), zero(), zero(), zero()], one() - epsilon * epsilon)?;
    lp.at_most(
        vec![zero(), one(), zero(), zero()],
        BigRational::new(1.into(), machines.into()),
    )?;
    for var in 0..4 {
        lp.bounds(var, zero(), one())?;
    }
    match lp.solve(budget)? {
        LpOutcome::Optimal { value, point } => Ok(MarginalBound {
            value: ExactScalar::from_rational(value),
            point: point.into_iter().map(ExactScalar::from_rational).collect(),
        }),
        LpOutcome::Infeasible => Err(Error::Infeasible("marginal program is empty".into())),
    }
}

/// A query during the adversary run whose answer differed from the first allocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmonWitness {
    pub machine: usize,
    pub expected: TaskAllocation,
    pub returned: TaskAllocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmonAdversaryOutcome {
    pub instance: SchedulingInstance,
    pub allocation: TaskAllocation,
    pub heavy_machine: usize,
    pub makespan: ExactScalar,
    pub optimum: ExactScalar,
    pub ratio: ExactScalar,
    pub witnesses: Vec<SmonWitness>,
}

/// Drives a black-box mechanism on `m` machines and `m²` unit tasks
/// towards an instance where a strongly monotone mechanism has makespan
/// `m` against an optimum of 1.
///
/// The first answer `S` on the all-ones instance has a machine `r`
/// (lowest index) with at least `m` tasks. Every other machine with a
/// nonempty set in turn gets cost 0 on its own tasks and 1 elsewhere; then
/// `r` keeps cost 1 only on the first `m` of its tasks and outside its set.
/// Any answer that differs from `S` is recorded as a witness.
pub fn smon_adversary<F>(mech: F, machines: usize, budget: &Budget) -> Result<SmonAdversaryOutcome>
where
    F: Fn(&SchedulingInstance) -> Result<TaskAllocation>,
{
    if machines == 0 {
        return Err(Error::InvalidParameter("at least one machine required".into()));
    }
    let tasks = machines * machines;
    let mut rows = vec![vec![ExactScalar::one(); tasks]; machines];
    let query = |rows: &Vec<Vec<ExactScalar>>| -> Result<(SchedulingInstance, TaskAllocation)> {
        let inst = SchedulingInstance::with_tasks(rows.clone(), tasks)?;
        let alloc = mech(&inst)?;
        alloc.validate(&inst)?;
        Ok((inst, alloc))
    };
    let (_, first) = query(&rows)?;
    let bundles: Vec<Vec<usize>> = (0..machines).map(|i| first.bundle(i)).collect();
    let heavy = (0..machines)
        .find(|&i| bundles[i].len() >= machines)
        .expect("some machine holds at least m of m² tasks");
    let mut witnesses = Vec::new();
    let zero_on = |set: &[usize], keep_one: &[usize]| -> Vec<ExactScalar> {
        (0..tasks)
            .map(|t| {
                if set.contains(&t) && !keep_one.contains(&t) {
                    ExactScalar::zero()
                } else {
                    ExactScalar::one()
                }
            })
            .collect()
    };
    for i in (0..machines).filter(|&i| i != heavy && !bundles[i].is_empty()) {
        rows[i] = zero_on(&bundles[i], &[]);
        let (_, answer) = query(&rows)?;
        if answer != first {
            witnesses.push(SmonWitness {
                machine: i,
                expected: first.clone(),
                returned: answer,
            });
        }
    }
    let kept: Vec<usize> = bundles[heavy].iter().copied().take(machines).collect();
    rows[heavy] = zero_on(&bundles[heavy], &kept);
    let (instance, allocation) = query(&rows)?;
    if allocation != first {
        witnesses.push(SmonWitness {
            machine: heavy,
            expected: first.clone(),
            returned: allocation.clone(),
        });
    }
    let span = makespan(&instance, &allocation)?;
    let (optimum, _) = optimal_makespan(&instance, budget)?;
    Ok(SmonAdversaryOutcome {
        ratio: approximation_ratio(&span, &optimum),
        instance,
        allocation,
        heavy_machine: heavy,
        makespan: span,
        optimum,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn links_must_differ_in_exactly_one_player() {
        let family = deterministic_family(&rational(1, 100)).unwrap();
        let bad = BoundFamily::new(
            "bad",
            family.epsilon.clone(),
            family.domain.clone(),
            vec![Profile(vec![0, 0]), Profile(vec![1, 1])],
            None,
            vec![Link {
                from: 0,
                to: 1,
                player: 0,
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn parameters_are_validated() {
        assert!(deterministic_family(&rational(0, 1)).is_err());
        assert!(yao_family(1, &rational(1, 100)).is_err());
        assert!(yao_family(2, &rational(1, 1)).is_err());
        assert!(bayes_family(&rational(-1, 2)).is_err());
    }

    #[test]
    fn diagonal_allocations() {
        assert_eq!(diagonal_allocation(3, 1).assignment, vec![0, 1, 2, 1]);
    }

    #[test]
    fn bayes_weights_are_uniform() {
        let family = bayes_family(&rational(1, 100)).unwrap();
        assert!(family.weights().iter().all(|w| *w == rational(1, 4)));
    }
}
