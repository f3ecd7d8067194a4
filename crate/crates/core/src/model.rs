//! Shared outcome model: type domains, profiles, distributions, outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, ExactScalar};

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub enumeration: u64,
}

impl Budget {
    pub const DEFAULT_ENUMERATION: u64 = 10_000_000;

    pub fn new(enumeration: u64) -> Result<Self> {
        if enumeration == 0 {
            return Err(Error::InvalidParameter("budget must be positive".into()));
        }
        Ok(Budget { enumeration })
    }

    /// Fails unless `count` candidates fit in the budget.
    pub fn admit(&self, count: Option<u128>) -> Result<usize> {
        match count {
            Some(n) if n <= self.enumeration as u128 => Ok(n as usize),
            Some(n) => Err(Error::BudgetExceeded {
                needed: n.to_string(),
                budget: self.enumeration,
            }),
            None => Err(Error::BudgetExceeded {
                needed: "more than 2^128".into(),
                budget: self.enumeration,
            }),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enumeration: Self::DEFAULT_ENUMERATION,
        }
    }
}

/// `base^exp` without overflow, or `None`.
pub fn checked_count(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(exp).ok()?)
}

/// A finite distribution with exact rational probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDistribution<T> {
    outcomes: Vec<(T, BigRational)>,
}

impl<T> DiscreteDistribution<T> {
    pub fn new(outcomes: Vec<(T, BigRational)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if outcomes.iter().any(|(_, p)| *p < BigRational::zero()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total: BigRational = outcomes.iter().map(|(_, p)| p.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}",
                format_rational(&total)
            )));
        }
        Ok(DiscreteDistribution { outcomes })
    }

    pub fn point(value: T) -> Self {
        DiscreteDistribution {
            outcomes: vec![(value, BigRational::one())],
        }
    }

    pub fn uniform(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        let p = BigRational::new(1.into(), values.len().into());
        Ok(DiscreteDistribution {
            outcomes: values.into_iter().map(|v| (v, p.clone())).collect(),
        })
    }

    pub fn outcomes(&self) -> &[(T, BigRational)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &BigRational)> {
        self.outcomes.iter().map(|(t, p)| (t, p))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> DiscreteDistribution<U> {
        DiscreteDistribution {
            outcomes: self.outcomes.iter().map(|(t, p)| (f(t), p.clone())).collect(),
        }
    }

    /// `Σ p·f(t)`. Zero-probability outcomes contribute nothing, even at `+∞`.
    pub fn expectation(&self, mut f: impl FnMut(&T) -> ExactScalar) -> ExactScalar {
        self.outcomes
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(t, p)| f(t).scale(p))
            .sum()
    }

    pub fn try_expectation(&self, mut f: impl FnMut(&T) -> Result<ExactScalar>) -> Result<ExactScalar> {
        let mut total = ExactScalar::zero();
        for (t, p) in self.outcomes.iter().filter(|(_, p)| !p.is_zero()) {
            total = &total + &f(t)?.scale(p);
        }
        Ok(total)
    }
}

/// Index of a player's declared type in a [`FiniteTypeDomain`], one entry
/// per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Profile(pub Vec<usize>);

impl Profile {
    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn type_of(&self, player: usize) -> usize {
        self.0[player]
    }

    /// `(t, v_{-i})`.
    pub fn with_type(&self, player: usize, t: usize) -> Profile {
        let mut types = self.0.clone();
        types[player] = t;
        Profile(types)
    }

    /// Players whose types differ between the two profiles.
    pub fn differing_players(&self, other: &Profile) -> Vec<usize> {
        (0..self.0.len().min(other.0.len()))
            .filter(|&i| self.0[i] != other.0[i])
            .collect()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A player's private valuation over alternatives of type `A`.
pub trait Valuation<A>: Send + Sync {
    /// Value (or cost) of `alternative` to `player` holding this valuation.
    fn value(&self, player: usize, alternative: &A) -> Result<ExactScalar>;

    /// Per-task (per-item) entries when the valuation is additive.
    fn additive_entries(&self) -> Option<&[ExactScalar]> {
        None
    }
}

/// An additive valuation: a bundle is worth the sum of its entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveValuation(pub Vec<ExactScalar>);

impl AdditiveValuation {
    pub fn entries(&self) -> &[ExactScalar] {
        &self.0
    }

    pub fn bundle_value(&self, bundle: impl IntoIterator<Item = usize>) -> ExactScalar {
        bundle.into_iter().map(|t| &self.0[t]).sum()
    }
}

/// An explicit table from alternatives to values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableValuation<A: Ord>(pub BTreeMap<A, ExactScalar>);

impl<A: Ord + fmt::Debug + Send + Sync> Valuation<A> for TableValuation<A> {
    fn value(&self, _player: usize, alternative: &A) -> Result<ExactScalar> {
        self.0
            .get(alternative)
            .cloned()
            .ok_or_else(|| Error::UndefinedAlternative(format!("{alternative:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEntry<V> {
    pub name: String,
    pub valuation: V,
}

impl<V> TypeEntry<V> {
    pub fn new(name: impl Into<String>, valuation: V) -> Self {
        TypeEntry {
            name: name.into(),
            valuation,
        }
    }
}

/// For each player, a finite list of named candidate valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTypeDomain<V> {
    types: Vec<Vec<TypeEntry<V>>>,
}

impl<V> FiniteTypeDomain<V> {
    pub fn new(types: Vec<Vec<TypeEntry<V>>>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidDomain("no players".into()));
        }
        for (player, entries) in types.iter().enumerate() {
            if entries.is_empty() {
                return Err(Error::InvalidDomain(format!("player {player} has no types")));
            }
            let names: BTreeSet<&str> = entries.iter().map(|e| e.name.as_str()).collect();
            if names.len() != entries.len() {
                return Err(Error::InvalidDomain(format!(
                    "player {player} has duplicate type names"
                )));
            }
        }
        Ok(FiniteTypeDomain { types })
    }

    pub fn players(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self, player: usize) -> &[TypeEntry<V>] {
        &self.types[player]
    }

    pub fn valuation(&self, player: usize, t: usize) -> &V {
        &self.types[player][t].valuation
    }

    /// The valuation `player` holds in `profile`.
    pub fn valuation_in(&self, profile: &Profile, player: usize) -> &V {
        self.valuation(player, profile.type_of(player))
    }

    pub fn profile_count(&self) -> Option<u128> {
        self.types
            .iter()
            .try_fold(1u128, |acc, t| acc.checked_mul(t.len() as u128))
    }

    /// All profiles, lexicographic with player 0 most significant.
    pub fn profiles(&self) -> Vec<Profile> {
        let mut out = vec![Profile(Vec::with_capacity(self.players()))];
        for entries in &self.types {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..entries.len()).map(move |t| {
                        let mut v = p.0.clone();
                        v.push(t);
                        Profile(v)
                    })
                })
                .collect();
        }
        out
    }

    pub fn type_index(&self, player: usize, name: &str) -> Option<usize> {
        self.types[player].iter().position(|e| e.name == name)
    }

    pub fn profile_by_names(&self, names: &[&str]) -> Result<Profile> {
        if names.len() != self.players() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} players",
                names.len(),
                self.players()
            )));
        }
        names
            .iter()
            .enumerate()
            .map(|(player, name)| {
                self.type_index(player, name)
                    .ok_or_else(|| Error::InvalidDomain(format!("player {player} has no type {name:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Profile)
    }

    pub fn type_names(&self, profile: &Profile) -> Vec<String> {
        profile
            .0
            .iter()
            .enumerate()
            .map(|(player, &t)| self.types[player][t].name.clone())
            .collect()
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.players() != self.players()
            || profile
                .0
                .iter()
                .enumerate()
                .any(|(player, &t)| t >= self.types[player].len())
        {
            return Err(Error::InvalidDomain(format!("profile {profile} not in domain")));
        }
        Ok(())
    }
}

/// An allocation rule given as an explicit table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedRule<A> {
    pub entries: BTreeMap<Profile, A>,
}

impl<A: Clone> TabulatedRule<A> {
    pub fn new(entries: impl IntoIterator<Item = (Profile, A)>) -> Self {
        TabulatedRule {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, profile: &Profile) -> Option<&A> {
        self.entries.get(profile)
    }

    /// Panics on profiles outside the table.
    pub fn apply(&self, profile: &Profile) -> A {
        self.entries
            .get(profile)
            .unwrap_or_else(|| panic!("rule undefined at profile {profile}"))
            .clone()
    }
}

/// An alternative together with the payment made to each player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismOutcome<A> {
    pub alternative: A,
    pub payments: Vec<ExactScalar>,
}

/// `value / optimum` for a minimisation objective. An optimum of zero gives
/// ratio 1 when the value is also zero and `+∞` otherwise.
pub fn approximation_ratio(value: &ExactScalar, optimum: &ExactScalar) -> ExactScalar {
    if optimum.is_zero() {
        return if value.is_zero() {
            ExactScalar::one()
        } else {
            ExactScalar::infinity()
        };
    }
    if value.is_infinite() {
        return ExactScalar::infinity();
    }
    value / optimum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn expectation_of_point_mass_and_uniform() {
        let x = ExactScalar::ratio(7, 3);
        assert_eq!(DiscreteDistribution::point(x.clone()).expectation(|v| v.clone()), x);
        let d = DiscreteDistribution::uniform(vec![1i64, 2]).unwrap();
        assert_eq!(d.expectation(|&v| v.into()), ExactScalar::ratio(3, 2));
    }

    #[test]
    fn distribution_must_sum_to_one() {
        let bad = DiscreteDistribution::new(vec![(0, rational(1, 2)), (1, rational(1, 3))]);
        assert!(matches!(bad, Err(Error::InvalidDistribution(_))));
        let neg = DiscreteDistribution::new(vec![(0, rational(3, 2)), (1, rational(-1, 2))]);
        assert!(neg.is_err());
    }

    #[test]
    fn zero_probability_infinity_is_ignored() {
        let d = DiscreteDistribution::new(vec![
            (ExactScalar::infinity(), BigRational::zero()),
            (ExactScalar::from_integer(4), BigRational::one()),
        ])
        .unwrap();
        assert_eq!(d.expectation(|v| v.clone()), ExactScalar::from_integer(4));
    }

    #[test]
    fn domain_profiles_are_lexicographic() {
        let domain = FiniteTypeDomain::new(vec![
            vec![TypeEntry::new("a", ()), TypeEntry::new("b", ())],
            vec![
                TypeEntry::new("x", ()),
                TypeEntry::new("y", ()),
                TypeEntry::new("z", ()),
            ],
        ])
        .unwrap();
        let profiles = domain.profiles();
        assert_eq!(profiles.len(), 6);
        assert_eq!(profiles[0], Profile(vec![0, 0]));
        assert_eq!(profiles[1], Profile(vec![0, 1]));
        assert_eq!(profiles[3], Profile(vec![1, 0]));
        assert_eq!(domain.profile_by_names(&["b", "z"]).unwrap(), Profile(vec![1, 2]));
        assert!(FiniteTypeDomain::new(vec![vec![TypeEntry::new("a", ()), TypeEntry::new("a", ())]]).is_err());
        assert!(FiniteTypeDomain::<()>::new(vec![vec![]]).is_err());
    }

    #[test]
    fn budget_admission() {
        let budget = Budget::new(100).unwrap();
        assert_eq!(budget.admit(checked_count(3, 4)).unwrap(), 81);
        assert!(budget.admit(checked_count(3, 5)).is_err());
        assert!(budget.admit(checked_count(10, 100)).is_err());
    }
}
