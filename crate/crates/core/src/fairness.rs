//! Fairness objectives over indivisible items: Max-Min, Min-Max, envy and
//! the maximal marginal utility, with brute-force optima and two
//! monotonicity demonstrators.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{DefaultExecutor, Executor};
use crate::model::{checked_count, Budget, Valuation};
use crate::monotonicity::wmon_terms;
use crate::scalar::ExactScalar;

/// Largest item count a set-function table may cover.
pub const MAX_TABLE_ITEMS: usize = 16;

/// One player's valuation over bundles of items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetValuation {
    Additive(Vec<ExactScalar>),
    /// Indexed by bitmask, item `j` is bit `j`.
    Table(Vec<ExactScalar>),
}

impl SetValuation {
    pub fn bundle_value(&self, bundle: u64) -> ExactScalar {
        match self {
            SetValuation::Additive(values) => values
                .iter()
                .enumerate()
                .filter(|(j, _)| bundle >> j & 1 == 1)
                .map(|(_, v)| v)
                .sum(),
            SetValuation::Table(table) => table[bundle as usize].clone(),
        }
    }

    fn validate(&self, items: usize) -> Result<()> {
        let bad = |v: &ExactScalar| v.is_negative() || v.is_infinite();
        match self {
            SetValuation::Additive(values) => {
                if values.len() != items {
                    return Err(Error::DimensionMismatch(format!(
                        "{} additive entries for {items} items",
                        values.len()
                    )));
                }
                if values.iter().any(bad) {
                    return Err(Error::InvalidInstance(
                        "item values must be finite and nonnegative".into(),
                    ));
                }
            }
            SetValuation::Table(table) => {
                if items > MAX_TABLE_ITEMS {
                    return Err(Error::InvalidInstance(format!(
                        "set-function tables support at most {MAX_TABLE_ITEMS} items"
                    )));
                }
                if table.len() != 1 << items {
                    return Err(Error::DimensionMismatch(format!(
                        "table has {} entries, expected {}",
                        table.len(),
                        1usize << items
                    )));
                }
                if !table[0].is_zero() {
                    return Err(Error::InvalidInstance("the empty bundle must be worth 0".into()));
                }
                if table.iter().any(bad) {
                    return Err(Error::InvalidInstance("bundle values must be finite".into()));
                }
                for (set, value) in table.iter().enumerate() {
                    for j in (0..items).filter(|j| set >> j & 1 == 0) {
                        if table[set | 1 << j] < *value {
                            return Err(Error::InvalidInstance(format!(
                                "adding item {j} to bundle {set:#b} lowers its value"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `n` players, `m` items, one monotone valuation per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FairnessWire", into = "FairnessWire")]
pub struct FairnessInstance {
    items: usize,
    valuations: Vec<SetValuation>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum WireValuation {
    Additive(Vec<ExactScalar>),
    Table(BTreeMap<u64, ExactScalar>),
}

#[derive(Serialize, Deserialize)]
struct FairnessWire {
    #[serde(rename = "type")]
    kind: String,
    players: usize,
    items: usize,
    valuations: Vec<WireValuation>,
}

impl TryFrom<FairnessWire> for FairnessInstance {
    type Error = Error;

    fn try_from(wire: FairnessWire) -> Result<Self> {
        if wire.kind != "fairness" {
            return Err(Error::Parse(format!("expected type \"fairness\", got {:?}", wire.kind)));
        }
        if wire.valuations.len() != wire.players {
            return Err(Error::DimensionMismatch(format!(
                "{} valuations for {} players",
                wire.valuations.len(),
                wire.players
            )));
        }
        let valuations = wire
            .valuations
            .into_iter()
            .map(|v| match v {
                WireValuation::Additive(values) => Ok(SetValuation::Additive(values)),
                WireValuation::Table(entries) => {
                    if wire.items > MAX_TABLE_ITEMS {
                        return Err(Error::InvalidInstance(format!(
                            "set-function tables support at most {MAX_TABLE_ITEMS} items"
                        )));
                    }
                    let size = 1usize << wire.items;
                    let mut table = vec![None; size];
                    for (mask, value) in entries {
                        let slot = table
                            .get_mut(mask as usize)
                            .ok_or_else(|| Error::InvalidInstance(format!("bitmask {mask} out of range")))?;
                        *slot = Some(value);
                    }
                    table
                        .into_iter()
                        .enumerate()
                        .map(|(mask, v)| {
                            v.ok_or_else(|| Error::InvalidInstance(format!("no value for bitmask {mask}")))
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(SetValuation::Table)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FairnessInstance::new(wire.items, valuations)
    }
}

impl From<FairnessInstance> for FairnessWire {
    fn from(inst: FairnessInstance) -> Self {
        FairnessWire {
            kind: "fairness".into(),
            players: inst.players(),
            items: inst.items,
            valuations: inst
                .valuations
                .into_iter()
                .map(|v| match v {
                    SetValuation::Additive(values) => WireValuation::Additive(values),
                    SetValuation::Table(table) => {
                        WireValuation::Table(table.into_iter().enumerate().map(|(m, v)| (m as u64, v)).collect())
                    }
                })
                .collect(),
        }
    }
}

impl FairnessInstance {
    pub fn new(items: usize, valuations: Vec<SetValuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("need at least one player".into()));
        }
        if items > 63 {
            return Err(Error::InvalidInstance("at most 63 items".into()));
        }
        for v in &valuations {
            v.validate(items)?;
        }
        Ok(FairnessInstance { items, valuations })
    }

    /// Additive instance from integer rows, one per player.
    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        let items = rows.first().map_or(0, |r| r.len());
        let valuations = rows
            .iter()
            .map(|r| SetValuation::Additive(r.iter().map(|&v| ExactScalar::from_integer(v)).collect()))
            .collect();
        Self::new(items, valuations)
    }

    pub fn players(&self) -> usize {
        self.valuations.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn valuation(&self, player: usize) -> &SetValuation {
        &self.valuations[player]
    }

    pub fn bundle_value(&self, player: usize, bundle: u64) -> ExactScalar {
        self.valuations[player].bundle_value(bundle)
    }

    /// Each player's value for their own bundle.
    pub fn values(&self, alloc: &ItemAllocation) -> Result<Vec<ExactScalar>> {
        alloc.validate(self)?;
        Ok(self.values_unchecked(alloc))
    }

    fn values_unchecked(&self, alloc: &ItemAllocation) -> Vec<ExactScalar> {
        (0..self.players())
            .map(|i| self.bundle_value(i, alloc.bundle(i)))
            .collect()
    }
}

/// Owner of each item; every item goes to some player, bundles may be empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemAllocation {
    pub owner: Vec<usize>,
}

impl ItemAllocation {
    /// Builds an allocation from bundles listed per player.
    pub fn from_bundles(items: usize, bundles: &[&[usize]]) -> Result<Self> {
        let mut owner = vec![None; items];
        for (player, bundle) in bundles.iter().enumerate() {
            for &j in bundle.iter() {
                let slot = owner
                    .get_mut(j)
                    .ok_or_else(|| Error::InvalidAllocation(format!("item {j} out of range")))?;
                if slot.replace(player).is_some() {
                    return Err(Error::InvalidAllocation(format!("item {j} given twice")));
                }
            }
        }
        let owner = owner
            .into_iter()
            .enumerate()
            .map(|(j, o)| o.ok_or_else(|| Error::InvalidAllocation(format!("item {j} unassigned"))))
            .collect::<Result<_>>()?;
        Ok(ItemAllocation { owner })
    }

    /// The `index`-th of the `n^m` allocations; item 0 is most significant.
    pub fn from_index(mut index: usize, players: usize, items: usize) -> Self {
        let mut owner = vec![0; items];
        for slot in owner.iter_mut().rev() {
            *slot = index % players;
            index /= players;
        }
        ItemAllocation { owner }
    }

    pub fn bundle(&self, player: usize) -> u64 {
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == player)
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    pub fn validate(&self, inst: &FairnessInstance) -> Result<()> {
        if self.owner.len() != inst.items() {
            return Err(Error::DimensionMismatch(format!(
                "allocation covers {} items, instance has {}",
                self.owner.len(),
                inst.items()
            )));
        }
        if let Some(o) = self.owner.iter().find(|&&o| o >= inst.players()) {
            return Err(Error::InvalidAllocation(format!("no player {o}")));
        }
        Ok(())
    }
}

impl fmt::Display for ItemAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let players = self.owner.iter().max().map_or(0, |m| m + 1);
        let bundles: Vec<String> = (0..players)
            .map(|p| {
                let items: Vec<String> = (0..self.owner.len())
                    .filter(|&j| self.owner[j] == p)
                    .map(|j| j.to_string())
                    .collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "({})", bundles.join(","))
    }
}

impl Valuation<ItemAllocation> for SetValuation {
    fn value(&self, player: usize, alloc: &ItemAllocation) -> Result<ExactScalar> {
        Ok(self.bundle_value(alloc.bundle(player)))
    }
}

fn allocation_count(inst: &FairnessInstance, budget: &Budget) -> Result<usize> {
    budget.admit(checked_count(inst.players(), inst.items()))
}

/// Best allocation by `key` (smallest wins, first in enumeration order on ties).
fn best_by<K, F>(inst: &FairnessInstance, budget: &Budget, key: F) -> Result<(K, ItemAllocation)>
where
    K: Ord + Send,
    F: Fn(&ItemAllocation) -> K + Sync + Send,
{
    let count = allocation_count(inst, budget)?;
    let (n, m) = (inst.players(), inst.items());
    let (k, index) = DefaultExecutor::default()
        .min_range(count, |i| Some(key(&ItemAllocation::from_index(i, n, m))))
        .expect("at least one allocation");
    Ok((k, ItemAllocation::from_index(index, n, m)))
}

/// Allocation maximizing the smallest player value.
pub fn max_min_value(inst: &FairnessInstance, budget: &Budget) -> Result<(ExactScalar, ItemAllocation)> {
    let (Reverse(v), a) = best_by(inst, budget, |a| {
        Reverse(inst.values_unchecked(a).into_iter().min().expect("players"))
    })?;
    Ok((v, a))
}

/// Allocation minimizing the largest player cost.
pub fn min_max_value(inst: &FairnessInstance, budget: &Budget) -> Result<(ExactScalar, ItemAllocation)> {
    best_by(inst, budget, |a| {
        inst.values_unchecked(a).into_iter().max().expect("players")
    })
}

/// `max_{i,j} v_i(S_j) − v_i(S_i)`, with `i = j` included so the result is
/// never negative.
pub fn envy(inst: &FairnessInstance, alloc: &ItemAllocation) -> Result<ExactScalar> {
    alloc.validate(inst)?;
    Ok(envy_unchecked(inst, alloc))
}

fn envy_unchecked(inst: &FairnessInstance, alloc: &ItemAllocation) -> ExactScalar {
    let n = inst.players();
    let bundles: Vec<u64> = (0..n).map(|i| alloc.bundle(i)).collect();
    let mut worst = ExactScalar::zero();
    for i in 0..n {
        let own = inst.bundle_value(i, bundles[i]);
        for &other in &bundles {
            let theirs = inst.bundle_value(i, other);
            if theirs > own {
                let gap = &theirs - &own;
                if gap > worst {
                    worst = gap;
                }
            }
        }
    }
    worst
}

/// Allocation with the least envy.
pub fn min_envy(inst: &FairnessInstance, budget: &Budget) -> Result<(ExactScalar, ItemAllocation)> {
    best_by(inst, budget, |a| envy_unchecked(inst, a))
}

/// Largest marginal value of one item added to any bundle.
pub fn max_marginal_utility(inst: &FairnessInstance, budget: &Budget) -> Result<ExactScalar> {
    let mut best = ExactScalar::zero();
    for v in &inst.valuations {
        let candidate = match v {
            SetValuation::Additive(values) => values.iter().max().cloned().unwrap_or_default(),
            SetValuation::Table(table) => {
                budget.admit(Some(table.len() as u128 * inst.items() as u128))?;
                let mut top = ExactScalar::zero();
                for (set, value) in table.iter().enumerate() {
                    for j in (0..inst.items()).filter(|j| set >> j & 1 == 0) {
                        let gain = &table[set | 1 << j] - value;
                        if gain > top {
                            top = gain;
                        }
                    }
                }
                top
            }
        };
        if candidate > best {
            best = candidate;
        }
    }
    Ok(best)
}

/// Allocation minimizing the total cost `Σ_i v_i(S_i)`.
pub fn min_max_vcg(inst: &FairnessInstance, budget: &Budget) -> Result<ItemAllocation> {
    Ok(best_by(inst, budget, |a| {
        inst.values_unchecked(a).into_iter().sum::<ExactScalar>()
    })?
    .1)
}

/// Random additive instance with integer values in `low..=high`.
pub fn random_additive<R: Rng + ?Sized>(
    rng: &mut R,
    players: usize,
    items: usize,
    low: i64,
    high: i64,
) -> FairnessInstance {
    let valuations = (0..players)
        .map(|_| {
            SetValuation::Additive(
                (0..items)
                    .map(|_| ExactScalar::from_integer(rng.gen_range(low..=high)))
                    .collect(),
            )
        })
        .collect();
    FairnessInstance::new(items, valuations).expect("nonnegative additive values")
}

/// Random monotone set function: each bundle is worth the most valuable
/// bundle one item smaller, plus an integer in `0..=step`.
pub fn random_table<R: Rng + ?Sized>(rng: &mut R, players: usize, items: usize, step: i64) -> FairnessInstance {
    let valuations = (0..players)
        .map(|_| {
            let mut table = vec![ExactScalar::zero(); 1 << items];
            for set in 1..table.len() {
                let below = (0..items)
                    .filter(|j| set >> j & 1 == 1)
                    .map(|j| table[set & !(1 << j)].clone())
                    .max()
                    .expect("nonempty bundle");
                table[set] = &below + &ExactScalar::from_integer(rng.gen_range(0..=step));
            }
            SetValuation::Table(table)
        })
        .collect();
    FairnessInstance::new(items, valuations).expect("monotone by construction")
}

/// One allocation pair `(a, b)` for the original and altered profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxMinPair {
    pub original: ItemAllocation,
    pub altered: ItemAllocation,
    pub original_value: ExactScalar,
    pub altered_value: ExactScalar,
    /// Both allocations are within a factor `c` of the respective optimum.
    pub approximating: bool,
    pub lhs: ExactScalar,
    pub rhs: ExactScalar,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxMinDemo {
    pub c: ExactScalar,
    pub epsilon: ExactScalar,
    pub original: FairnessInstance,
    pub altered: FairnessInstance,
    pub original_optimum: ExactScalar,
    pub altered_optimum: ExactScalar,
    pub pairs: Vec<MaxMinPair>,
}

impl MaxMinDemo {
    pub fn approximating_pairs(&self) -> impl Iterator<Item = &MaxMinPair> {
        self.pairs.iter().filter(|p| p.approximating)
    }

    /// True when some pair approximates and every approximating pair
    /// breaks weak monotonicity for player 2.
    pub fn certifies(&self) -> bool {
        self.approximating_pairs().next().is_some() && self.approximating_pairs().all(|p| !p.monotone)
    }
}

/// Two players, items `a`, `b`: `v_1 = (2, 1/c)`, `v_2 = (4−ε, 1+ε)`, and
/// player 2 switching to `v'_2 = (1/c, 1/c² − ε)`. Checks all 4×4
/// allocation pairs. Requires `c ≥ 1`, `0 < ε < 1` and `ε ≤ 1/c²`.
pub fn max_min_impossibility_demo(c: &BigRational, epsilon: &BigRational, budget: &Budget) -> Result<MaxMinDemo> {
    let one = BigRational::from_integer(1.into());
    let zero = BigRational::from_integer(0.into());
    let inv_c2 = &one / (c * c);
    if *c < one || *epsilon <= zero || *epsilon >= one || *epsilon > inv_c2 {
        return Err(Error::InvalidParameter(
            "need c >= 1, 0 < epsilon < 1 and epsilon <= 1/c^2".into(),
        ));
    }
    let s = |r: BigRational| ExactScalar::from_rational(r);
    let inv_c = &one / c;
    let v1 = SetValuation::Additive(vec![s(BigRational::from_integer(2.into())), s(inv_c.clone())]);
    let v2 = SetValuation::Additive(vec![
        s(BigRational::from_integer(4.into()) - epsilon),
        s(&one + epsilon),
    ]);
    let v2_alt = SetValuation::Additive(vec![s(inv_c), s(&inv_c2 - epsilon)]);
    let original = FairnessInstance::new(2, vec![v1.clone(), v2.clone()])?;
    let altered = FairnessInstance::new(2, vec![v1, v2_alt.clone()])?;
    let (opt, _) = max_min_value(&original, budget)?;
    let (opt_alt, _) = max_min_value(&altered, budget)?;
    let c_scalar = s(c.clone());
    let allocs: Vec<ItemAllocation> = (0..4).map(|i| ItemAllocation::from_index(i, 2, 2)).collect();
    let min_value =
        |inst: &FairnessInstance, a: &ItemAllocation| inst.values_unchecked(a).into_iter().min().expect("two players");
    let mut pairs = Vec::with_capacity(16);
    for a in &allocs {
        for b in &allocs {
            let (va, vb) = (min_value(&original, a), min_value(&altered, b));
            let approximating = &va * &c_scalar >= opt && &vb * &c_scalar >= opt_alt;
            let (lhs, rhs) = wmon_terms(1, &v2, &v2_alt, a, b)?;
            pairs.push(MaxMinPair {
                original: a.clone(),
                altered: b.clone(),
                original_value: va,
                altered_value: vb,
                approximating,
                monotone: lhs >= rhs,
                lhs,
                rhs,
            });
        }
    }
    Ok(MaxMinDemo {
        c: c_scalar,
        epsilon: s(epsilon.clone()),
        original,
        altered,
        original_optimum: opt,
        altered_optimum: opt_alt,
        pairs,
    })
}

/// What the best monotone continuation achieves after one first-profile
/// allocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvyCase {
    pub first: ItemAllocation,
    pub first_envy: ExactScalar,
    /// The player holding two items, whose valuation is altered.
    pub deviator: Option<usize>,
    /// Second-profile allocations compatible with weak monotonicity.
    pub monotone_continuations: Vec<ItemAllocation>,
    /// Least envy among those continuations on the altered instance.
    pub final_envy: Option<ExactScalar>,
    /// Least achievable excess over the optimum across both profiles.
    pub excess: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvyDemo {
    pub epsilon: ExactScalar,
    pub original: FairnessInstance,
    pub original_alpha: ExactScalar,
    pub original_optimum: ExactScalar,
    pub altered_alpha: ExactScalar,
    pub altered_optimum: ExactScalar,
    pub cases: Vec<EnvyCase>,
    /// Smallest excess any monotone rule can guarantee.
    pub min_excess: ExactScalar,
}

/// The altered valuation: `1+ε` on the deviator's two items, `third` on
/// the remaining one.
pub fn envy_altered_valuation(
    first: &ItemAllocation,
    deviator: usize,
    epsilon: &ExactScalar,
    third: &ExactScalar,
) -> SetValuation {
    let one_plus = &ExactScalar::one() + epsilon;
    SetValuation::Additive(
        first
            .owner
            .iter()
            .map(|&o| if o == deviator { one_plus.clone() } else { third.clone() })
            .collect(),
    )
}

/// Two players, three items each worth 1 to both. For every first-profile
/// allocation, the holder of two items switches to `1+ε` on those items and
/// 0 on the third; the rule must answer with an allocation satisfying weak
/// monotonicity for that player. Reports the least excess envy over the
/// optimum any such rule achieves in the worse of the two profiles.
pub fn envy_bound_demo(epsilon: &BigRational, budget: &Budget) -> Result<EnvyDemo> {
    let eps = ExactScalar::from_rational(epsilon.clone());
    if !eps.is_positive() || eps >= ExactScalar::one() {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)".into()));
    }
    let original = FairnessInstance::from_integers(&[&[1, 1, 1], &[1, 1, 1]])?;
    let original_alpha = max_marginal_utility(&original, budget)?;
    let (original_optimum, _) = min_envy(&original, budget)?;
    let allocs: Vec<ItemAllocation> = (0..8).map(|i| ItemAllocation::from_index(i, 2, 3)).collect();
    let mut cases = Vec::new();
    let mut altered_alpha = original_alpha.clone();
    let mut altered_optimum = ExactScalar::zero();
    for first in &allocs {
        let first_envy = envy_unchecked(&original, first);
        let first_excess = &first_envy - &original_optimum;
        let deviator = (0..2).find(|&p| first.bundle(p).count_ones() == 2);
        let Some(dev) = deviator else {
            cases.push(EnvyCase {
                first: first.clone(),
                first_envy,
                deviator: None,
                monotone_continuations: Vec::new(),
                final_envy: None,
                excess: first_excess,
            });
            continue;
        };
        let altered_v = envy_altered_valuation(first, dev, &eps, &ExactScalar::zero());
        let mut vals = original.valuations.clone();
        vals[dev] = altered_v.clone();
        let altered = FairnessInstance::new(3, vals)?;
        altered_alpha = max_marginal_utility(&altered, budget)?;
        altered_optimum = min_envy(&altered, budget)?.0;
        let continuations: Vec<ItemAllocation> = allocs
            .iter()
            .filter(|b| {
                let (lhs, rhs) = wmon_terms(dev, original.valuation(dev), &altered_v, first, b).expect("additive");
                lhs >= rhs
            })
            .cloned()
            .collect();
        let final_envy = continuations
            .iter()
            .map(|b| envy_unchecked(&altered, b))
            .min()
            .expect("the first allocation itself is monotone");
        let excess = first_excess.max(&final_envy - &altered_optimum);
        cases.push(EnvyCase {
            first: first.clone(),
            first_envy,
            deviator,
            monotone_continuations: continuations,
            final_envy: Some(final_envy),
            excess,
        });
    }
    let min_excess = cases.iter().map(|c| c.excess.clone()).min().expect("eight cases");
    Ok(EnvyDemo {
        epsilon: eps,
        original,
        original_alpha,
        original_optimum,
        altered_alpha,
        altered_optimum,
        cases,
        min_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn envy_examples() {
        let budget = Budget::default();
        let ones = FairnessInstance::from_integers(&[&[1, 1, 1], &[1, 1, 1]]).unwrap();
        let split = ItemAllocation::from_bundles(3, &[&[0, 1], &[2]]).unwrap();
        assert_eq!(envy(&ones, &split).unwrap(), ExactScalar::one());
        assert_eq!(min_envy(&ones, &budget).unwrap().0, ExactScalar::one());
        assert_eq!(max_marginal_utility(&ones, &budget).unwrap(), ExactScalar::one());
        let solo = FairnessInstance::from_integers(&[&[3, 5]]).unwrap();
        assert_eq!(
            envy(&solo, &ItemAllocation { owner: vec![0, 0] }).unwrap(),
            ExactScalar::zero()
        );
    }

    #[test]
    fn altered_envy_with_printed_third_item() {
        // With the third item worth ε instead of 0 the least envy is ε, not 0.
        let budget = Budget::default();
        let eps = ExactScalar::ratio(1, 100);
        let first = ItemAllocation::from_bundles(3, &[&[0, 1], &[2]]).unwrap();
        let printed = envy_altered_valuation(&first, 0, &eps, &eps);
        let inst =
            FairnessInstance::new(3, vec![printed, SetValuation::Additive(vec![ExactScalar::one(); 3])]).unwrap();
        assert_eq!(min_envy(&inst, &budget).unwrap().0, eps);
        let corrected = envy_altered_valuation(&first, 0, &eps, &ExactScalar::zero());
        let inst =
            FairnessInstance::new(3, vec![corrected, SetValuation::Additive(vec![ExactScalar::one(); 3])]).unwrap();
        let zero_envy = ItemAllocation::from_bundles(3, &[&[0], &[1, 2]]).unwrap();
        assert_eq!(envy(&inst, &zero_envy).unwrap(), ExactScalar::zero());
        assert_eq!(
            max_marginal_utility(&inst, &budget).unwrap(),
            &ExactScalar::one() + &eps
        );
    }

    #[test]
    fn max_min_examples() {
        let budget = Budget::default();
        let demo = max_min_impossibility_demo(&rational(10, 1), &rational(1, 100), &budget).unwrap();
        assert_eq!(demo.original_optimum, ExactScalar::ratio(101, 100));
        assert_eq!(demo.altered_optimum, ExactScalar::ratio(1, 10));
        let zero = FairnessInstance::from_integers(&[&[0, 0], &[0, 0]]).unwrap();
        assert_eq!(max_min_value(&zero, &budget).unwrap().0, ExactScalar::zero());
    }

    #[test]
    fn table_validation() {
        let not_monotone = SetValuation::Table(vec![
            ExactScalar::zero(),
            ExactScalar::from_integer(2),
            ExactScalar::one(),
            ExactScalar::one(),
        ]);
        assert!(FairnessInstance::new(2, vec![not_monotone]).is_err());
        let nonzero_empty = SetValuation::Table(vec![ExactScalar::one(), ExactScalar::one()]);
        assert!(FairnessInstance::new(1, vec![nonzero_empty]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = FairnessInstance::new(
            2,
            vec![
                SetValuation::Additive(vec![ExactScalar::one(), ExactScalar::ratio(1, 2)]),
                SetValuation::Table(vec![
                    ExactScalar::zero(),
                    ExactScalar::one(),
                    ExactScalar::one(),
                    ExactScalar::from_integer(3),
                ]),
            ],
        )
        .unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        assert!(json.contains("\"type\":\"fairness\""));
        let back: FairnessInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, inst);
    }
}
