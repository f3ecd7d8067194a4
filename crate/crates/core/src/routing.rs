//! Workload minimization over confluent routing trees.
//!
//! A node carries every packet whose path passes through it, its own
//! included, and pays its per-packet cost on the link to its next hop.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{approximation_ratio, Budget, MechanismOutcome, Valuation};
use crate::scalar::ExactScalar;

/// Directed AS graph with per-link costs and public traffic volumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RoutingWire", into = "RoutingWire")]
pub struct RoutingInstance {
    names: Vec<String>,
    dest: usize,
    /// Outgoing links sorted by target index.
    out: Vec<Vec<(usize, ExactScalar)>>,
    traffic: Vec<ExactScalar>,
}

#[derive(Serialize, Deserialize)]
struct WireEdge {
    from: String,
    to: String,
    cost: ExactScalar,
}

#[derive(Serialize, Deserialize)]
struct RoutingWire {
    #[serde(rename = "type")]
    kind: String,
    nodes: Vec<String>,
    dest: String,
    edges: Vec<WireEdge>,
    traffic: BTreeMap<String, ExactScalar>,
}

impl TryFrom<RoutingWire> for RoutingInstance {
    type Error = Error;

    fn try_from(wire: RoutingWire) -> Result<Self> {
        if wire.kind != "routing" {
            return Err(Error::Parse(format!("expected type \"routing\", got {:?}", wire.kind)));
        }
        let index = |name: &str| {
            wire.nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidInstance(format!("unknown node {name:?}")))
        };
        let dest = index(&wire.dest)?;
        let edges = wire
            .edges
            .iter()
            .map(|e| Ok((index(&e.from)?, index(&e.to)?, e.cost.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut traffic = vec![ExactScalar::zero(); wire.nodes.len()];
        for (name, t) in &wire.traffic {
            traffic[index(name)?] = t.clone();
        }
        for (i, name) in wire.nodes.iter().enumerate() {
            if i != dest && !wire.traffic.contains_key(name) {
                return Err(Error::InvalidInstance(format!("no traffic given for {name:?}")));
            }
        }
        RoutingInstance::new(wire.nodes, dest, edges, traffic)
    }
}

impl From<RoutingInstance> for RoutingWire {
    fn from(inst: RoutingInstance) -> Self {
        let edges = inst
            .out
            .iter()
            .enumerate()
            .flat_map(|(from, links)| links.iter().map(move |(to, cost)| (from, *to, cost.clone())))
            .map(|(from, to, cost)| WireEdge {
                from: inst.names[from].clone(),
                to: inst.names[to].clone(),
                cost,
            })
            .collect();
        let traffic = inst
            .sources()
            .map(|i| (inst.names[i].clone(), inst.traffic[i].clone()))
            .collect();
        RoutingWire {
            kind: "routing".into(),
            nodes: inst.names.clone(),
            dest: inst.names[inst.dest].clone(),
            edges,
            traffic,
        }
    }
}

impl RoutingInstance {
    /// `edges` are `(from, to, cost)` over node indices.
    pub fn new(
        names: Vec<String>,
        dest: usize,
        edges: Vec<(usize, usize, ExactScalar)>,
        traffic: Vec<ExactScalar>,
    ) -> Result<Self> {
        let n = names.len();
        if dest >= n {
            return Err(Error::InvalidInstance("destination out of range".into()));
        }
        if traffic.len() != n {
            return Err(Error::DimensionMismatch("one traffic entry per node".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        if names.iter().any(|name| !seen.insert(name)) {
            return Err(Error::InvalidInstance("duplicate node names".into()));
        }
        let mut out = vec![Vec::new(); n];
        for (from, to, cost) in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidInstance("edge endpoint out of range".into()));
            }
            if from == dest {
                return Err(Error::InvalidInstance("the destination has no outgoing links".into()));
            }
            if from == to {
                return Err(Error::InvalidInstance("self loops are not allowed".into()));
            }
            if cost.is_negative() || cost.is_infinite() {
                return Err(Error::InvalidInstance(
                    "link costs must be finite and nonnegative".into(),
                ));
            }
            if out[from].iter().any(|(t, _)| *t == to) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate link {} -> {}",
                    names[from], names[to]
                )));
            }
            out[from].push((to, cost));
        }
        for links in &mut out {
            links.sort_by_key(|(to, _)| *to);
        }
        if traffic
            .iter()
            .any(|t| t.is_negative() || t.is_infinite() || t.as_rational().is_none())
        {
            return Err(Error::InvalidInstance("traffic must be a nonnegative rational".into()));
        }
        if !traffic[dest].is_zero() {
            return Err(Error::InvalidInstance("the destination originates no traffic".into()));
        }
        let inst = RoutingInstance {
            names,
            dest,
            out,
            traffic,
        };
        inst.check_reachability()?;
        Ok(inst)
    }

    /// Single-dimensional instance: node `i` pays `node_costs[i]` on every link.
    pub fn single_dimensional(
        names: Vec<String>,
        dest: usize,
        links: Vec<(usize, usize)>,
        node_costs: Vec<ExactScalar>,
        traffic: Vec<ExactScalar>,
    ) -> Result<Self> {
        if node_costs.len() != names.len() {
            return Err(Error::DimensionMismatch("one cost per node".into()));
        }
        let edges = links
            .into_iter()
            .map(|(from, to)| (from, to, node_costs[from].clone()))
            .collect();
        Self::new(names, dest, edges, traffic)
    }

    fn check_reachability(&self) -> Result<()> {
        let n = self.names.len();
        let mut reaches = vec![false; n];
        reaches[self.dest] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                if !reaches[i] && self.out[i].iter().any(|(to, _)| reaches[*to]) {
                    reaches[i] = true;
                    changed = true;
                }
            }
        }
        match reaches.iter().position(|r| !r) {
            Some(i) => Err(Error::InvalidInstance(format!(
                "{} has no path to the destination",
                self.names[i]
            ))),
            None => Ok(()),
        }
    }

    pub fn nodes(&self) -> usize {
        self.names.len()
    }

    pub fn dest(&self) -> usize {
        self.dest
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Source nodes in index order.
    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes()).filter(move |&i| i != self.dest)
    }

    pub fn source_count(&self) -> usize {
        self.nodes() - 1
    }

    pub fn out_links(&self, node: usize) -> &[(usize, ExactScalar)] {
        &self.out[node]
    }

    pub fn traffic(&self, node: usize) -> &ExactScalar {
        &self.traffic[node]
    }

    pub fn link_cost(&self, from: usize, to: usize) -> Option<&ExactScalar> {
        self.out[from].iter().find(|(t, _)| *t == to).map(|(_, c)| c)
    }

    /// Whether each node pays the same cost on all its links.
    pub fn is_single_dimensional(&self) -> bool {
        self.out.iter().all(|links| links.windows(2).all(|w| w[0].1 == w[1].1))
    }

    /// The per-packet cost of a node in a single-dimensional instance.
    pub fn node_cost(&self, node: usize) -> Option<&ExactScalar> {
        self.out[node].first().map(|(_, c)| c)
    }

    /// The same instance with every link cost of `node` replaced by `cost`.
    pub fn with_node_cost(&self, node: usize, cost: ExactScalar) -> Result<Self> {
        if cost.is_negative() || cost.is_infinite() {
            return Err(Error::InvalidInstance(
                "link costs must be finite and nonnegative".into(),
            ));
        }
        let mut next = self.clone();
        for link in &mut next.out[node] {
            link.1 = cost.clone();
        }
        Ok(next)
    }

    /// The same instance with `node`'s link costs replaced, keyed by target.
    pub fn with_link_costs(&self, node: usize, costs: &[(usize, ExactScalar)]) -> Result<Self> {
        let mut next = self.clone();
        for (to, cost) in costs {
            if cost.is_negative() || cost.is_infinite() {
                return Err(Error::InvalidInstance(
                    "link costs must be finite and nonnegative".into(),
                ));
            }
            let link = next.out[node]
                .iter_mut()
                .find(|(t, _)| t == to)
                .ok_or_else(|| Error::InvalidInstance("no such link".into()))?;
            link.1 = cost.clone();
        }
        Ok(next)
    }
}

/// Next hop per node; `None` exactly at the destination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoutingTree {
    pub next_hop: Vec<Option<usize>>,
}

impl RoutingTree {
    /// Rejects missing links, missing hops and cycles.
    pub fn validate(&self, inst: &RoutingInstance) -> Result<()> {
        if self.next_hop.len() != inst.nodes() {
            return Err(Error::DimensionMismatch("one next hop per node".into()));
        }
        for (i, hop) in self.next_hop.iter().enumerate() {
            match (i == inst.dest(), hop) {
                (true, None) => {}
                (true, Some(_)) => return Err(Error::InvalidAllocation("the destination forwards nothing".into())),
                (false, None) => return Err(Error::InvalidAllocation(format!("{} has no next hop", inst.name(i)))),
                (false, Some(to)) => {
                    if inst.link_cost(i, *to).is_none() {
                        return Err(Error::InvalidAllocation(format!(
                            "no link {} -> {}",
                            inst.name(i),
                            inst.name(*to)
                        )));
                    }
                }
            }
        }
        if !reaches_dest(&self.next_hop, inst.dest()) {
            return Err(Error::InvalidAllocation("next hops contain a cycle".into()));
        }
        Ok(())
    }

    pub fn to_named(&self, inst: &RoutingInstance) -> BTreeMap<String, String> {
        self.next_hop
            .iter()
            .enumerate()
            .filter_map(|(i, hop)| hop.map(|to| (inst.name(i).to_string(), inst.name(to).to_string())))
            .collect()
    }

    pub fn from_named(inst: &RoutingInstance, hops: &BTreeMap<String, String>) -> Result<Self> {
        let mut next_hop = vec![None; inst.nodes()];
        for (from, to) in hops {
            let f = inst
                .node_index(from)
                .ok_or_else(|| Error::InvalidAllocation(format!("unknown node {from:?}")))?;
            let t = inst
                .node_index(to)
                .ok_or_else(|| Error::InvalidAllocation(format!("unknown node {to:?}")))?;
            next_hop[f] = Some(t);
        }
        let tree = RoutingTree { next_hop };
        tree.validate(inst)?;
        Ok(tree)
    }
}

/// Tree JSON: `{"nexthop": {node: node}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedTree {
    pub nexthop: BTreeMap<String, String>,
}

fn reaches_dest(next_hop: &[Option<usize>], dest: usize) -> bool {
    let n = next_hop.len();
    // 0 = unknown, 1 = on current walk, 2 = reaches dest
    let mut state = vec![0u8; n];
    state[dest] = 2;
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            match next_hop[cur] {
                Some(next) => cur = next,
                None => return false,
            }
        }
        if state[cur] == 1 {
            return false;
        }
        for node in path {
            state[node] = 2;
        }
    }
    true
}

/// Packets passing through each node, its own included.
pub fn packets_through(inst: &RoutingInstance, tree: &RoutingTree) -> Result<Vec<ExactScalar>> {
    tree.validate(inst)?;
    Ok(packets_unchecked(inst, &tree.next_hop))
}

fn packets_unchecked(inst: &RoutingInstance, next_hop: &[Option<usize>]) -> Vec<ExactScalar> {
    let mut k = vec![ExactScalar::zero(); inst.nodes()];
    for source in inst.sources() {
        let t = inst.traffic(source);
        if t.is_zero() {
            continue;
        }
        let mut cur = source;
        while cur != inst.dest() {
            k[cur] = &k[cur] + t;
            cur = next_hop[cur].expect("validated tree");
        }
    }
    k
}

/// `W_i = k_i · c_i(i, Next(i))` per node; the destination's entry is 0.
pub fn node_workloads(inst: &RoutingInstance, tree: &RoutingTree) -> Result<Vec<ExactScalar>> {
    tree.validate(inst)?;
    Ok(workloads_unchecked(inst, &tree.next_hop))
}

fn workloads_unchecked(inst: &RoutingInstance, next_hop: &[Option<usize>]) -> Vec<ExactScalar> {
    let k = packets_unchecked(inst, next_hop);
    (0..inst.nodes())
        .map(|i| match next_hop[i] {
            Some(to) => &k[i] * inst.link_cost(i, to).expect("validated tree"),
            None => ExactScalar::zero(),
        })
        .collect()
}

/// Largest per-node workload.
pub fn workload(inst: &RoutingInstance, tree: &RoutingTree) -> Result<ExactScalar> {
    Ok(node_workloads(inst, tree)?
        .into_iter()
        .max()
        .unwrap_or_else(ExactScalar::zero))
}

/// Sum of per-node workloads.
pub fn total_cost(inst: &RoutingInstance, tree: &RoutingTree) -> Result<ExactScalar> {
    Ok(node_workloads(inst, tree)?.into_iter().sum())
}

/// All confluent trees into the destination, lexicographic in the next-hop
/// vector (lowest node index most significant, neighbors by index).
pub fn enumerate_trees(inst: &RoutingInstance, budget: &Budget) -> Result<Vec<RoutingTree>> {
    let sources: Vec<usize> = inst.sources().collect();
    let count = sources
        .iter()
        .try_fold(1u128, |acc, &i| acc.checked_mul(inst.out_links(i).len() as u128));
    budget.admit(count)?;
    let mut trees = Vec::new();
    let mut choice = vec![0usize; sources.len()];
    loop {
        let mut next_hop = vec![None; inst.nodes()];
        for (pos, &i) in sources.iter().enumerate() {
            next_hop[i] = Some(inst.out_links(i)[choice[pos]].0);
        }
        if reaches_dest(&next_hop, inst.dest()) {
            trees.push(RoutingTree { next_hop });
        }
        // odometer, last source least significant
        let mut pos = sources.len();
        loop {
            if pos == 0 {
                return Ok(trees);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < inst.out_links(sources[pos]).len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Brute-force workload optimum; ties go to the first tree enumerated.
pub fn optimal_workload_tree(inst: &RoutingInstance, budget: &Budget) -> Result<(ExactScalar, RoutingTree)> {
    let trees = enumerate_trees(inst, budget)?;
    let mut best: Option<(ExactScalar, RoutingTree)> = None;
    for tree in trees {
        let w = workloads_unchecked(inst, &tree.next_hop)
            .into_iter()
            .max()
            .unwrap_or_default();
        if best.as_ref().is_none_or(|(b, _)| w < *b) {
            best = Some((w, tree));
        }
    }
    Ok(best.expect("reachability guarantees a tree"))
}

/// Tree minimizing total cost (first enumerated on ties), with pivot
/// payments `p_i = min_T' Σ_{j≠i} W_j(T') − Σ_{j≠i} W_j(T)`.
pub fn cost_min_tree(inst: &RoutingInstance, budget: &Budget) -> Result<(RoutingTree, MechanismOutcome<RoutingTree>)> {
    let trees = enumerate_trees(inst, budget)?;
    let loads: Vec<Vec<ExactScalar>> = trees.iter().map(|t| workloads_unchecked(inst, &t.next_hop)).collect();
    let totals: Vec<ExactScalar> = loads.iter().map(|w| w.iter().sum()).collect();
    let chosen = (0..trees.len())
        .min_by(|&a, &b| totals[a].cmp(&totals[b]).then(a.cmp(&b)))
        .expect("reachability guarantees a tree");
    let payments = (0..inst.nodes())
        .map(|i| {
            if i == inst.dest() {
                return ExactScalar::zero();
            }
            let others = |k: usize| &totals[k] - &loads[k][i];
            let pivot = (0..trees.len()).map(others).min().expect("nonempty");
            &pivot - &others(chosen)
        })
        .collect();
    let tree = trees[chosen].clone();
    Ok((
        tree.clone(),
        MechanismOutcome {
            alternative: tree,
            payments,
        },
    ))
}

/// Among all trees, the one whose per-source workloads sorted in
/// decreasing order are lexicographically smallest; remaining ties go to
/// the smallest next-hop vector. Requires a single-dimensional instance.
pub fn lex_optimal_mechanism(inst: &RoutingInstance, budget: &Budget) -> Result<RoutingTree> {
    if !inst.is_single_dimensional() {
        return Err(Error::InvalidInstance(
            "the lexicographic mechanism needs one cost per node".into(),
        ));
    }
    let trees = enumerate_trees(inst, budget)?;
    Ok(lex_optimal_among(inst, &trees))
}

/// [`lex_optimal_mechanism`] over a precomputed tree list in enumeration order.
pub fn lex_optimal_among(inst: &RoutingInstance, trees: &[RoutingTree]) -> RoutingTree {
    let key = |tree: &RoutingTree| {
        let loads = workloads_unchecked(inst, &tree.next_hop);
        let mut sorted: Vec<ExactScalar> = inst.sources().map(|i| loads[i].clone()).collect();
        sorted.sort_by(|a, b| b.cmp(a));
        sorted
    };
    trees
        .iter()
        .map(|t| (key(t), t))
        .min_by(|(ka, ta), (kb, tb)| ka.cmp(kb).then_with(|| ta.cmp(tb)))
        .map(|(_, t)| t.clone())
        .expect("reachability guarantees a tree")
}

/// A node's cost for a tree under a given instance: its workload there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeWorkload {
    pub instance: RoutingInstance,
    pub node: usize,
}

impl Valuation<RoutingTree> for NodeWorkload {
    fn value(&self, _player: usize, tree: &RoutingTree) -> Result<ExactScalar> {
        Ok(node_workloads(&self.instance, tree)?[self.node].clone())
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn positive(epsilon: &ExactScalar) -> Result<()> {
    if !epsilon.is_positive() || epsilon.is_infinite() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    Ok(())
}

/// Nodes `x, y, z, d`: `y→x` and `z→x` cost 0, `x→d` costs 1, `y→d` and
/// `z→d` cost `1+ε`; one packet per source.
pub fn three_source_star(epsilon: &ExactScalar) -> Result<RoutingInstance> {
    star_instance(3, epsilon)
}

/// `k` sources: a hub `x` with a unit link to `d`, and `k−1` spokes with a
/// free link to `x` and a `1+ε` link to `d`. `k = 3` is the three-node example.
pub fn star_instance(k: usize, epsilon: &ExactScalar) -> Result<RoutingInstance> {
    positive(epsilon)?;
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one source".into()));
    }
    let spoke_names = ["y", "z"];
    let mut node_names = vec!["x".to_string()];
    for s in 1..k {
        node_names.push(if k == 3 {
            spoke_names[s - 1].to_string()
        } else {
            format!("s{s}")
        });
    }
    node_names.push("d".into());
    let d = k;
    let one_plus = &ExactScalar::one() + epsilon;
    let mut edges = vec![(0, d, ExactScalar::one())];
    for s in 1..k {
        edges.push((s, 0, ExactScalar::zero()));
        edges.push((s, d, one_plus.clone()));
    }
    let mut traffic = vec![ExactScalar::one(); k];
    traffic.push(ExactScalar::zero());
    RoutingInstance::new(node_names, d, edges, traffic)
}

/// Single-dimensional version of the three-node example: `y` and `z`
/// reach `d` through zero-traffic relays `y'`, `z'` of cost `1+ε`, while
/// `y` and `z` themselves pay 0 on every link.
pub fn star_single_dim_instance(epsilon: &ExactScalar) -> Result<RoutingInstance> {
    positive(epsilon)?;
    let one_plus = &ExactScalar::one() + epsilon;
    // x, y, z, y', z', d
    RoutingInstance::single_dimensional(
        names(&["x", "y", "z", "y'", "z'", "d"]),
        5,
        vec![(0, 5), (1, 0), (1, 3), (2, 0), (2, 4), (3, 5), (4, 5)],
        vec![
            ExactScalar::one(),
            ExactScalar::zero(),
            ExactScalar::zero(),
            one_plus.clone(),
            one_plus,
            ExactScalar::zero(),
        ],
        vec![
            ExactScalar::one(),
            ExactScalar::one(),
            ExactScalar::one(),
            ExactScalar::zero(),
            ExactScalar::zero(),
            ExactScalar::zero(),
        ],
    )
}

fn three_source_instance(to_ii: ExactScalar, to_iii: ExactScalar) -> Result<RoutingInstance> {
    // I, II, III, d
    RoutingInstance::new(
        names(&["I", "II", "III", "d"]),
        3,
        vec![
            (0, 1, to_ii),
            (0, 2, to_iii),
            (1, 3, ExactScalar::ratio(1, 2)),
            (2, 3, &ExactScalar::golden_ratio() * &ExactScalar::ratio(1, 2)),
        ],
        vec![
            ExactScalar::one(),
            ExactScalar::one(),
            ExactScalar::one(),
            ExactScalar::zero(),
        ],
    )
}

/// `I→II = 1`, `I→III = 0`, `II→d = 1/2`, `III→d = (1+√5)/4`; one packet each.
pub fn golden_instance() -> Result<RoutingInstance> {
    three_source_instance(ExactScalar::one(), ExactScalar::zero())
}

/// As [`golden_instance`] with `I→II = φ² − ε` and `I→III = φ`.
pub fn golden_shifted_instance(epsilon: &ExactScalar) -> Result<RoutingInstance> {
    positive(epsilon)?;
    let phi = ExactScalar::golden_ratio();
    three_source_instance(&(&phi * &phi) - epsilon, phi)
}

/// Best rule over the two-instance family and its per-instance ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingPairResult {
    pub value: ExactScalar,
    pub trees: (RoutingTree, RoutingTree),
    pub ratios: (ExactScalar, ExactScalar),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingBounds {
    pub worst_case: RoutingPairResult,
    pub randomized: RoutingPairResult,
}

/// Minimum worst-case and uniform-expected workload ratio over rules on
/// the golden instance and its shifted variant that are weakly monotone for node
/// `I` (cost direction), or over all rules when `enforce_wmon` is false.
/// Requires `0 < ε < 1`, which keeps `φ² − ε` above `φ`.
pub fn routing_wmon_bounds(epsilon: &ExactScalar, enforce_wmon: bool, budget: &Budget) -> Result<RoutingBounds> {
    positive(epsilon)?;
    if *epsilon >= ExactScalar::one() {
        return Err(Error::InvalidParameter("epsilon must be below 1".into()));
    }
    let ins = golden_instance()?;
    let ins_prime = golden_shifted_instance(epsilon)?;
    let trees = enumerate_trees(&ins, budget)?;
    let ratio_of = |inst: &RoutingInstance| -> Result<Vec<ExactScalar>> {
        let (opt, _) = optimal_workload_tree(inst, budget)?;
        trees
            .iter()
            .map(|t| Ok(approximation_ratio(&workload(inst, t)?, &opt)))
            .collect()
    };
    let (r, r_prime) = (ratio_of(&ins)?, ratio_of(&ins_prime)?);
    let node = 0;
    let v = NodeWorkload {
        instance: ins.clone(),
        node,
    };
    let v_prime = NodeWorkload {
        instance: ins_prime.clone(),
        node,
    };
    let half = num_rational::BigRational::new(1.into(), 2.into());
    let mut worst: Option<(ExactScalar, usize, usize)> = None;
    let mut mixed: Option<(ExactScalar, usize, usize)> = None;
    for a in 0..trees.len() {
        for b in 0..trees.len() {
            if enforce_wmon {
                let (lhs, rhs) = crate::monotonicity::wmon_terms(node, &v, &v_prime, &trees[a], &trees[b])?;
                if lhs > rhs {
                    continue;
                }
            }
            let w = r[a].clone().max(r_prime[b].clone());
            let e = &r[a].scale(&half) + &r_prime[b].scale(&half);
            if worst.as_ref().is_none_or(|(x, _, _)| w < *x) {
                worst = Some((w, a, b));
            }
            if mixed.as_ref().is_none_or(|(x, _, _)| e < *x) {
                mixed = Some((e, a, b));
            }
        }
    }
    let pack = |found: Option<(ExactScalar, usize, usize)>| -> Result<RoutingPairResult> {
        let (value, a, b) = found.ok_or_else(|| Error::Infeasible("no monotone pair".into()))?;
        Ok(RoutingPairResult {
            value,
            trees: (trees[a].clone(), trees[b].clone()),
            ratios: (r[a].clone(), r_prime[b].clone()),
        })
    };
    Ok(RoutingBounds {
        worst_case: pack(worst)?,
        randomized: pack(mixed)?,
    })
}

/// Random instance on `sources` sources plus `d` (last index): each source
/// links to each other node with probability 1/2, falls back to a direct
/// link to `d` when nothing reaches it, costs in `0..=max_cost`, traffic
/// in `1..=max_traffic`.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    sources: usize,
    max_cost: i64,
    max_traffic: i64,
) -> RoutingInstance {
    let n = sources + 1;
    let dest = sources;
    let node_names: Vec<String> = (0..sources).map(|i| format!("n{i}")).chain(["d".to_string()]).collect();
    let mut links: Vec<Vec<usize>> = (0..sources)
        .map(|i| (0..n).filter(|&j| j != i && rng.gen_bool(0.5)).collect())
        .collect();
    // Guarantee reachability by adding direct links where needed.
    loop {
        let mut reaches = vec![false; n];
        reaches[dest] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..sources {
                if !reaches[i] && links[i].iter().any(|&j| reaches[j]) {
                    reaches[i] = true;
                    changed = true;
                }
            }
        }
        match (0..sources).find(|&i| !reaches[i]) {
            Some(i) => links[i].push(dest),
            None => break,
        }
    }
    let edges = links
        .iter()
        .enumerate()
        .flat_map(|(i, targets)| targets.iter().map(move |&j| (i, j)))
        .map(|(i, j)| (i, j, ExactScalar::from_integer(rng.gen_range(0..=max_cost))))
        .collect();
    let traffic = (0..n)
        .map(|i| {
            if i == dest {
                ExactScalar::zero()
            } else {
                ExactScalar::from_integer(rng.gen_range(1..=max_traffic))
            }
        })
        .collect();
    RoutingInstance::new(node_names, dest, edges, traffic).expect("generated instance is valid")
}

/// Every link set on `sources` sources plus `d` (index `sources`) where
/// each source has between 1 and `max_out_degree` out-links and reaches `d`.
pub fn small_topologies(sources: usize, max_out_degree: usize) -> Vec<Vec<(usize, usize)>> {
    let n = sources + 1;
    let options: Vec<Vec<Vec<usize>>> = (0..sources)
        .map(|i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            (1u32..1 << others.len())
                .filter(|mask| (mask.count_ones() as usize) <= max_out_degree)
                .map(|mask| {
                    others
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &j)| j)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; sources];
    loop {
        let links: Vec<(usize, usize)> = (0..sources)
            .flat_map(|i| options[i][choice[i]].iter().map(move |&j| (i, j)))
            .collect();
        let names = (0..n).map(|i| i.to_string()).collect();
        let costs = vec![ExactScalar::zero(); n];
        let mut traffic = vec![ExactScalar::one(); n];
        traffic[sources] = ExactScalar::zero();
        if RoutingInstance::single_dimensional(names, sources, links.clone(), costs, traffic).is_ok() {
            out.push(links);
        }
        let mut pos = sources;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < options[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// A node whose packet count rose when only its own cost went up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketMonotonicityFailure {
    pub links: Vec<(usize, usize)>,
    pub node: usize,
    pub costs: Vec<ExactScalar>,
    pub raised_cost: ExactScalar,
    pub packets_before: ExactScalar,
    pub packets_after: ExactScalar,
}

/// Checks that `k_i` is nonincreasing in `c_i` for every node, every
/// topology and every assignment of grid costs to the other nodes, with one
/// packet per source. The mechanism receives the instance and its trees in
/// enumeration order.
pub fn packet_monotonicity_sweep<M>(
    topologies: &[Vec<(usize, usize)>],
    sources: usize,
    grid: &[ExactScalar],
    budget: &Budget,
    mechanism: M,
) -> Result<Vec<PacketMonotonicityFailure>>
where
    M: Fn(&RoutingInstance, &[RoutingTree]) -> Result<RoutingTree>,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty cost grid".into()));
    }
    let n = sources + 1;
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut traffic = vec![ExactScalar::one(); n];
    traffic[sources] = ExactScalar::zero();
    let mut failures = Vec::new();
    for links in topologies {
        let base = RoutingInstance::single_dimensional(
            names.clone(),
            sources,
            links.clone(),
            vec![ExactScalar::zero(); n],
            traffic.clone(),
        )?;
        let trees = enumerate_trees(&base, budget)?;
        for node in 0..sources {
            let others: Vec<usize> = (0..sources).filter(|&j| j != node).collect();
            let combos = checked_pow(grid.len(), others.len());
            budget.admit(combos.map(|c| c as u128))?;
            for combo in 0..combos.unwrap_or(0) {
                let mut inst = base.clone();
                let mut rest = combo;
                for &j in &others {
                    inst = inst.with_node_cost(j, grid[rest % grid.len()].clone())?;
                    rest /= grid.len();
                }
                let mut previous: Option<(ExactScalar, ExactScalar)> = None;
                for c in grid {
                    let probe = inst.with_node_cost(node, c.clone())?;
                    let tree = mechanism(&probe, &trees)?;
                    let k = packets_through(&probe, &tree)?[node].clone();
                    if let Some((before, _)) = previous.as_ref().filter(|(before, _)| k > *before) {
                        let mut costs: Vec<ExactScalar> = (0..n)
                            .map(|i| probe.node_cost(i).cloned().unwrap_or_default())
                            .collect();
                        costs[node] = previous.as_ref().expect("set").1.clone();
                        failures.push(PacketMonotonicityFailure {
                            links: links.clone(),
                            node,
                            costs,
                            raised_cost: c.clone(),
                            packets_before: before.clone(),
                            packets_after: k.clone(),
                        });
                    }
                    previous = Some((k, c.clone()));
                }
            }
        }
    }
    Ok(failures)
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}
