//! Scheduling on unrelated machines: makespan, the brute-force optimum, the
//! task-wise second-price mechanism, and the randomized partition mechanism
//! that splits machines into two halves and runs a biased two-bidder
//! auction per task.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{DefaultExecutor, Executor};
use crate::model::{
    approximation_ratio, checked_count, AdditiveValuation, Budget, DiscreteDistribution, FiniteTypeDomain,
    MechanismOutcome, Profile, Valuation,
};
use crate::scalar::ExactScalar;

/// Cost matrix `costs[machine][task]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchedulingWire", into = "SchedulingWire")]
pub struct SchedulingInstance {
    costs: Vec<Vec<ExactScalar>>,
    tasks: usize,
}

#[derive(Serialize, Deserialize)]
struct SchedulingWire {
    #[serde(rename = "type")]
    kind: String,
    machines: usize,
    tasks: usize,
    costs: Vec<Vec<ExactScalar>>,
}

impl TryFrom<SchedulingWire> for SchedulingInstance {
    type Error = Error;

    fn try_from(wire: SchedulingWire) -> Result<Self> {
        if wire.kind != "scheduling" {
            return Err(Error::Parse(format!(
                "expected type \"scheduling\", got {:?}",
                wire.kind
            )));
        }
        if wire.costs.len() != wire.machines {
            return Err(Error::DimensionMismatch(format!(
                "{} cost rows for {} machines",
                wire.costs.len(),
                wire.machines
            )));
        }
        SchedulingInstance::with_tasks(wire.costs, wire.tasks)
    }
}

impl From<SchedulingInstance> for SchedulingWire {
    fn from(inst: SchedulingInstance) -> Self {
        SchedulingWire {
            kind: "scheduling".into(),
            machines: inst.machines(),
            tasks: inst.tasks,
            costs: inst.costs,
        }
    }
}

impl SchedulingInstance {
    /// Builds an instance from machine rows; the task count is the row length.
    pub fn new(costs: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let tasks = costs.first().map_or(0, Vec::len);
        Self::with_tasks(costs, tasks)
    }

    pub fn with_tasks(costs: Vec<Vec<ExactScalar>>, tasks: usize) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidInstance("at least one machine is required".into()));
        }
        if let Some(i) = costs.iter().position(|row| row.len() != tasks) {
            return Err(Error::DimensionMismatch(format!(
                "machine {i} has {} costs, expected {tasks}",
                costs[i].len()
            )));
        }
        if costs.iter().flatten().any(ExactScalar::is_negative) {
            return Err(Error::InvalidInstance("costs must be nonnegative".into()));
        }
        Ok(SchedulingInstance { costs, tasks })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|row| row.iter().map(|&c| ExactScalar::from_integer(c)).collect())
                .collect(),
        )
    }

    pub fn machines(&self) -> usize {
        self.costs.len()
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn cost(&self, machine: usize, task: usize) -> &ExactScalar {
        &self.costs[machine][task]
    }

    pub fn rows(&self) -> &[Vec<ExactScalar>] {
        &self.costs
    }

    pub fn column(&self, task: usize) -> Vec<&ExactScalar> {
        self.costs.iter().map(|row| &row[task]).collect()
    }

    /// The same instance with one cost entry replaced.
    pub fn with_cost(&self, machine: usize, task: usize, cost: ExactScalar) -> Result<Self> {
        if cost.is_negative() {
            return Err(Error::InvalidInstance("costs must be nonnegative".into()));
        }
        let mut next = self.clone();
        next.costs[machine][task] = cost;
        Ok(next)
    }

    /// The same instance with one more task appended.
    pub fn with_task(&self, column: Vec<ExactScalar>) -> Result<Self> {
        if column.len() != self.machines() {
            return Err(Error::DimensionMismatch("task column length".into()));
        }
        let mut costs = self.costs.clone();
        for (row, c) in costs.iter_mut().zip(column) {
            row.push(c);
        }
        Self::with_tasks(costs, self.tasks + 1)
    }
}

/// `assignment[task] = machine` (machines are 0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskAllocation {
    pub assignment: Vec<usize>,
}

impl TaskAllocation {
    pub fn new(assignment: Vec<usize>) -> Self {
        TaskAllocation { assignment }
    }

    /// The allocation at position `index` in the lexicographic enumeration of
    /// all `machines^tasks` allocations (task 0 most significant).
    pub fn from_index(mut index: usize, machines: usize, tasks: usize) -> Self {
        let mut assignment = vec![0; tasks];
        for slot in assignment.iter_mut().rev() {
            *slot = index % machines;
            index /= machines;
        }
        TaskAllocation { assignment }
    }

    pub fn index(&self, machines: usize) -> usize {
        self.assignment.iter().fold(0, |acc, &m| acc * machines + m)
    }

    /// Tasks assigned to `machine`, ascending.
    pub fn bundle(&self, machine: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m == machine)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn validate(&self, inst: &SchedulingInstance) -> Result<()> {
        if self.assignment.len() != inst.tasks() {
            return Err(Error::DimensionMismatch(format!(
                "allocation covers {} tasks, instance has {}",
                self.assignment.len(),
                inst.tasks()
            )));
        }
        if let Some(&m) = self.assignment.iter().find(|&&m| m >= inst.machines()) {
            return Err(Error::InvalidAllocation(format!("machine {m} does not exist")));
        }
        Ok(())
    }

    /// Enumerates every allocation in lexicographic order.
    pub fn all(machines: usize, tasks: usize, budget: &Budget) -> Result<Vec<TaskAllocation>> {
        let count = budget.admit(checked_count(machines, tasks))?;
        Ok((0..count).map(|i| Self::from_index(i, machines, tasks)).collect())
    }
}

impl fmt::Display for TaskAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.assignment.iter().map(|m| m.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Valuation<TaskAllocation> for AdditiveValuation {
    fn value(&self, player: usize, alternative: &TaskAllocation) -> Result<ExactScalar> {
        if alternative.assignment.len() != self.0.len() {
            return Err(Error::DimensionMismatch("valuation and allocation sizes".into()));
        }
        Ok(self.bundle_value(alternative.bundle(player)))
    }

    fn additive_entries(&self) -> Option<&[ExactScalar]> {
        Some(&self.0)
    }
}

/// The scheduling instance whose machine `i` holds its type in `profile`.
pub fn instance_from_profile(
    domain: &FiniteTypeDomain<AdditiveValuation>,
    profile: &Profile,
) -> Result<SchedulingInstance> {
    domain.check_profile(profile)?;
    SchedulingInstance::new(
        (0..domain.players())
            .map(|i| domain.valuation_in(profile, i).0.clone())
            .collect(),
    )
}

/// Per-machine total cost of `alloc`.
pub fn machine_loads(inst: &SchedulingInstance, alloc: &TaskAllocation) -> Result<Vec<ExactScalar>> {
    alloc.validate(inst)?;
    Ok(loads_unchecked(inst, &alloc.assignment))
}

fn loads_unchecked(inst: &SchedulingInstance, assignment: &[usize]) -> Vec<ExactScalar> {
    let mut loads = vec![ExactScalar::zero(); inst.machines()];
    for (task, &machine) in assignment.iter().enumerate() {
        loads[machine] = &loads[machine] + inst.cost(machine, task);
    }
    loads
}

/// Latest finishing time. `+∞` if any assigned cost is infinite; 0 for no tasks.
pub fn makespan(inst: &SchedulingInstance, alloc: &TaskAllocation) -> Result<ExactScalar> {
    Ok(machine_loads(inst, alloc)?
        .into_iter()
        .max()
        .unwrap_or_else(ExactScalar::zero))
}

/// Brute-force optimum over all `m^n` allocations; ties go to the
/// lexicographically smallest assignment vector.
pub fn optimal_makespan(inst: &SchedulingInstance, budget: &Budget) -> Result<(ExactScalar, TaskAllocation)> {
    optimal_makespan_with(inst, budget, DefaultExecutor::default())
}

pub fn optimal_makespan_with<E: Executor>(
    inst: &SchedulingInstance,
    budget: &Budget,
    exec: E,
) -> Result<(ExactScalar, TaskAllocation)> {
    let (m, n) = (inst.machines(), inst.tasks());
    let count = budget.admit(checked_count(m, n))?;
    let (value, index) = exec
        .min_range(count, |i| {
            let alloc = TaskAllocation::from_index(i, m, n);
            loads_unchecked(inst, &alloc.assignment).into_iter().max()
        })
        .unwrap_or((ExactScalar::zero(), 0));
    Ok((value, TaskAllocation::from_index(index, m, n)))
}

/// Makespan of `alloc` divided by the optimum.
pub fn makespan_ratio(inst: &SchedulingInstance, alloc: &TaskAllocation, budget: &Budget) -> Result<ExactScalar> {
    let (opt, _) = optimal_makespan(inst, budget)?;
    Ok(approximation_ratio(&makespan(inst, alloc)?, &opt))
}

fn lowest_two(values: &[&ExactScalar]) -> (usize, ExactScalar) {
    let winner = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("nonempty column");
    let second = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != winner)
        .map(|(_, v)| (*v).clone())
        .min()
        .unwrap_or_else(ExactScalar::infinity);
    (winner, second)
}

/// Task-wise second-price mechanism: every task goes to its cheapest machine
/// (lowest index on ties), which is paid the second-lowest cost in that
/// task's column. With a single machine the second price is `+∞`.
pub fn min_work_vcg(inst: &SchedulingInstance) -> MechanismOutcome<TaskAllocation> {
    let mut assignment = Vec::with_capacity(inst.tasks());
    let mut payments = vec![ExactScalar::zero(); inst.machines()];
    for task in 0..inst.tasks() {
        let (winner, second) = lowest_two(&inst.column(task));
        assignment.push(winner);
        payments[winner] = &payments[winner] + &second;
    }
    MechanismOutcome {
        alternative: TaskAllocation { assignment },
        payments,
    }
}

/// One fair coin per task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoinSequence(pub Vec<bool>);

impl CoinSequence {
    /// The `index`-th of the `2^n` sequences; task 0 is the most significant bit.
    pub fn from_index(index: usize, tasks: usize) -> Self {
        CoinSequence((0..tasks).map(|t| (index >> (tasks - 1 - t)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for CoinSequence {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("coin must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(CoinSequence)
    }
}

impl fmt::Display for CoinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.0 {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Machine halves `S1 = {0..⌈m/2⌉}` and `S2 = rest`; an odd extra machine joins `S1`.
pub fn nr_partition(machines: usize) -> (Vec<usize>, Vec<usize>) {
    let split = machines.div_ceil(2);
    ((0..split).collect(), (split..machines).collect())
}

/// The winner of one task in the partition mechanism and its payment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDecision {
    pub machine: usize,
    pub payment: ExactScalar,
}

struct SideBid {
    best: ExactScalar,
    winner: usize,
    runner_up: ExactScalar,
}

fn side_bid(column: &[&ExactScalar], side: &[usize]) -> SideBid {
    let values: Vec<&ExactScalar> = side.iter().map(|&i| column[i]).collect();
    let (pos, runner_up) = lowest_two(&values);
    SideBid {
        best: values[pos].clone(),
        winner: side[pos],
        runner_up,
    }
}

/// Allocates a single task given its cost column and coin.
///
/// With `coin = 0` the `S1` side wins while `v¹ ≤ (4/3)·v²`; with `coin = 1`
/// the `S2` side wins while `v² ≤ (4/3)·v¹`. The winner is paid the smaller
/// of its side's runner-up cost and the threshold at which it would lose.
pub fn nr_task_decision(column: &[&ExactScalar], coin: bool) -> TaskDecision {
    let four_thirds = ExactScalar::ratio(4, 3);
    let three_quarters = ExactScalar::ratio(3, 4);
    let (s1, s2) = nr_partition(column.len());
    let first = side_bid(column, &s1);
    let second = side_bid(column, &s2);
    let (favoured, other) = if coin { (&second, &first) } else { (&first, &second) };
    let favoured_threshold = &four_thirds * &other.best;
    if favoured.best <= favoured_threshold {
        TaskDecision {
            machine: favoured.winner,
            payment: favoured.runner_up.clone().min(favoured_threshold),
        }
    } else {
        TaskDecision {
            machine: other.winner,
            payment: other.runner_up.clone().min(&three_quarters * &favoured.best),
        }
    }
}

/// The coin-fixed partition mechanism. Requires at least two machines.
pub fn nr_sub_mechanism(inst: &SchedulingInstance, coins: &CoinSequence) -> Result<MechanismOutcome<TaskAllocation>> {
    if inst.machines() < 2 {
        return Err(Error::InvalidInstance(
            "the partition mechanism needs at least two machines".into(),
        ));
    }
    if coins.len() != inst.tasks() {
        return Err(Error::DimensionMismatch(format!(
            "{} coins for {} tasks",
            coins.len(),
            inst.tasks()
        )));
    }
    let mut assignment = Vec::with_capacity(inst.tasks());
    let mut payments = vec![ExactScalar::zero(); inst.machines()];
    for (task, &coin) in coins.0.iter().enumerate() {
        let decision = nr_task_decision(&inst.column(task), coin);
        payments[decision.machine] = &payments[decision.machine] + &decision.payment;
        assignment.push(decision.machine);
    }
    Ok(MechanismOutcome {
        alternative: TaskAllocation { assignment },
        payments,
    })
}

/// Uniform mixture of the sub-mechanism over all `2^n` coin sequences.
pub fn nr_randomized(
    inst: &SchedulingInstance,
    budget: &Budget,
) -> Result<DiscreteDistribution<(CoinSequence, MechanismOutcome<TaskAllocation>)>> {
    let count = budget.admit(checked_count(2, inst.tasks()))?;
    let outcomes = (0..count)
        .map(|i| {
            let coins = CoinSequence::from_index(i, inst.tasks());
            nr_sub_mechanism(inst, &coins).map(|out| (coins, out))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteDistribution::uniform(outcomes)
}

/// `E[makespan]` of a distribution over mechanism outcomes.
pub fn expected_makespan<C>(
    inst: &SchedulingInstance,
    dist: &DiscreteDistribution<(C, MechanismOutcome<TaskAllocation>)>,
) -> Result<ExactScalar> {
    dist.try_expectation(|(_, out)| makespan(inst, &out.alternative))
}

/// Two-machine instance whose machines carry the column minima over `S1` and `S2`.
pub fn collapse_to_halves(inst: &SchedulingInstance) -> Result<SchedulingInstance> {
    if inst.machines() < 2 {
        return Err(Error::InvalidInstance("need at least two machines".into()));
    }
    let (s1, s2) = nr_partition(inst.machines());
    let side_min = |side: &[usize], task: usize| {
        side.iter()
            .map(|&i| inst.cost(i, task))
            .min()
            .cloned()
            .expect("nonempty side")
    };
    SchedulingInstance::with_tasks(
        vec![
            (0..inst.tasks()).map(|t| side_min(&s1, t)).collect(),
            (0..inst.tasks()).map(|t| side_min(&s2, t)).collect(),
        ],
        inst.tasks(),
    )
}

/// A profitable unilateral misreport of one cost entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDeviation {
    pub machine: usize,
    pub task: usize,
    pub coin: bool,
    pub reported: ExactScalar,
    pub truthful_utility: ExactScalar,
    pub deviating_utility: ExactScalar,
}

fn task_utility(decision: &TaskDecision, machine: usize, true_cost: &ExactScalar) -> Result<ExactScalar> {
    if decision.machine != machine {
        return Ok(ExactScalar::zero());
    }
    decision
        .payment
        .checked_sub(true_cost)
        .ok_or_else(|| Error::UndefinedUtility(format!("payment {} minus cost {true_cost}", decision.payment)))
}

/// Per-task dominant-strategy check of the coin-fixed mechanism: for every
/// machine, task and reported cost in `grid`, the machine's utility
/// (payment minus true cost) on that task must not exceed its truthful one.
/// Utilities are additive over tasks and a report only moves its own task, so
/// an empty result means the whole coin-fixed mechanism is truthful against
/// these deviations.
pub fn nr_task_deviations(
    inst: &SchedulingInstance,
    coins: &CoinSequence,
    grid: &[ExactScalar],
) -> Result<Vec<TaskDeviation>> {
    if coins.len() != inst.tasks() {
        return Err(Error::DimensionMismatch("coin sequence length".into()));
    }
    let mut found = Vec::new();
    for (task, &coin) in coins.0.iter().enumerate() {
        let column: Vec<ExactScalar> = inst.column(task).into_iter().cloned().collect();
        let truthful = nr_task_decision(&column.iter().collect::<Vec<_>>(), coin);
        for machine in 0..inst.machines() {
            let true_cost = &column[machine];
            let honest = task_utility(&truthful, machine, true_cost)?;
            for report in grid.iter().filter(|r| *r != true_cost) {
                let mut lied = column.clone();
                lied[machine] = report.clone();
                let decision = nr_task_decision(&lied.iter().collect::<Vec<_>>(), coin);
                let utility = task_utility(&decision, machine, true_cost)?;
                if utility > honest {
                    found.push(TaskDeviation {
                        machine,
                        task,
                        coin,
                        reported: report.clone(),
                        truthful_utility: honest.clone(),
                        deviating_utility: utility,
                    });
                }
            }
        }
    }
    Ok(found)
}

/// Uniform integer costs in `[low, high]`.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    machines: usize,
    tasks: usize,
    low: i64,
    high: i64,
) -> SchedulingInstance {
    let costs = (0..machines)
        .map(|_| {
            (0..tasks)
                .map(|_| ExactScalar::from_integer(rng.gen_range(low..=high)))
                .collect()
        })
        .collect();
    SchedulingInstance::with_tasks(costs, tasks).expect("generated costs are nonnegative")
}
