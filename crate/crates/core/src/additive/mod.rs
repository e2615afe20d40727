//! Solvers for additive valuations.
//!
//! Every solver scales agent `i` so that its maximin share is 1, satisfies
//! agents holding a single heavy item first, and then shares the rest.
//! Agents whose maximin share is 0 receive nothing.

mod threequarters;
mod twothirds;

use std::collections::BTreeSet;

pub use threequarters::{solve_threequarters, solve_threequarters_with, AgentState, Cluster, Options, Status};
pub use twothirds::{solve_twothirds, solve_twothirds_with};

use crate::bipartite::ValueGraph;
use crate::error::{Error, Result};
use crate::instance::{unallocated, Allocation, Bundle, Instance, SubInstance};
use crate::mms::mms_all;
use crate::reduction::reduce_singletons;
use crate::solver::Solved;
use crate::value::Value;

/// Item values divided by each agent's maximin share.
#[derive(Clone, Debug)]
pub(crate) struct Unit {
    u: Vec<Vec<Value>>,
}

impl Unit {
    pub(crate) fn new(inst: &Instance, mms: &[Value]) -> Result<Self> {
        if mms.len() != inst.n {
            return Err(Error::Input(format!("expected {} MMS values, found {}", inst.n, mms.len())));
        }
        let mut u = Vec::with_capacity(inst.n);
        for (i, v) in inst.valuations.iter().enumerate() {
            let row = v
                .additive_values()
                .ok_or_else(|| Error::Unsupported(format!("agent {i} does not have an additive valuation")))?;
            if mms[i].is_negative() {
                return Err(Error::Input(format!("agent {i} has a negative MMS value")));
            }
            u.push(if mms[i].is_zero() { row } else { row.iter().map(|x| x / &mms[i]).collect() });
        }
        Ok(Unit { u })
    }

    pub(crate) fn item(&self, agent: usize, item: usize) -> &Value {
        &self.u[agent][item]
    }

    pub(crate) fn of(&self, agent: usize, items: &[usize]) -> Value {
        items.iter().map(|&j| &self.u[agent][j]).sum()
    }

    pub(crate) fn bundle(&self, agent: usize, b: &Bundle) -> Value {
        self.of(agent, b.items())
    }

    /// Complete graph over the given item vertices and agents.
    pub(crate) fn graph(&self, xs: Vec<Vec<usize>>, agents: &[usize]) -> ValueGraph {
        let w = xs.iter().map(|x| agents.iter().map(|&a| self.of(a, x)).collect()).collect();
        ValueGraph::new(xs, agents.to_vec(), w)
    }
}

/// Exact maximin shares of an additive instance.
pub fn exact_mms(inst: &Instance) -> Result<Vec<Value>> {
    if let Some(i) = (0..inst.n).find(|&i| inst.valuations[i].additive_values().is_none()) {
        return Err(Error::Unsupported(format!("agent {i} does not have an additive valuation")));
    }
    Ok(mms_all(inst, inst.n)?.into_iter().map(|r| r.value).collect())
}

pub(crate) fn positive(mms: &[Value]) -> Vec<usize> {
    (0..mms.len()).filter(|&i| mms[i].is_positive()).collect()
}

/// Builds the allocation from `(agent, bundle)` grants; unassigned items go to
/// the last grant (or to agent 0 when nobody was served).
pub(crate) fn assemble(n: usize, m: usize, served: &[(usize, Bundle)]) -> Allocation {
    let mut alloc = Allocation::empty(n);
    for (a, b) in served {
        alloc.bundles[*a] = alloc.bundles[*a].union(b);
    }
    let rest = unallocated(m, &alloc.bundles);
    let last = served.last().map_or(0, |(a, _)| *a);
    alloc.bundles[last] = alloc.bundles[last].union(&rest);
    alloc
}

/// Result of a bag-filling pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Filled {
    pub served: Vec<(usize, Bundle)>,
    pub unserved: Vec<usize>,
}

/// Adds items in the given order to a bag and hands the bag to the first
/// qualified agent (in `agents` order) as soon as one exists.
pub(crate) fn fill(agents: &[usize], items: &[usize], mut qualifies: impl FnMut(usize, &[usize]) -> bool) -> Filled {
    let mut remaining = agents.to_vec();
    let mut served = Vec::new();
    let mut bag: Vec<usize> = Vec::new();
    let mut next = 0;
    while !remaining.is_empty() {
        if let Some(pos) = remaining.iter().position(|&a| qualifies(a, &bag)) {
            served.push((remaining.remove(pos), Bundle::new(std::mem::take(&mut bag))));
            continue;
        }
        if next == items.len() {
            break;
        }
        bag.push(items[next]);
        next += 1;
    }
    Filled { served, unserved: remaining }
}

/// Bag-filling over the whole instance: each agent must end with at least
/// `(1 - alpha) * mms[i]`. Leftover items join the last bundle handed out.
pub fn bag_filling(inst: &Instance, alpha: &Value, mms: &[Value]) -> Result<Allocation> {
    if mms.len() != inst.n {
        return Err(Error::Input(format!("expected {} MMS values, found {}", inst.n, mms.len())));
    }
    let keep = Value::one() - alpha;
    let agents: Vec<usize> = (0..inst.n).collect();
    let items = inst.items();
    let filled = fill(&agents, items.items(), |a, bag| inst.value(a, bag) >= &keep * &mms[a]);
    if !filled.unserved.is_empty() {
        return Err(Error::Guarantee(format!("bag-filling left agents {:?} unserved", filled.unserved)));
    }
    Ok(assemble(inst.n, inst.m, &filled.served))
}

/// 1/2-MMS: remove items worth half a share, then bag-fill.
pub fn solve_half(inst: &Instance) -> Result<Allocation> {
    let mms = exact_mms(inst)?;
    Ok(solve_half_with(inst, &mms)?.allocation)
}

pub fn solve_half_with(inst: &Instance, mms: &[Value]) -> Result<Solved> {
    let unit = Unit::new(inst, mms)?;
    let half = Value::ratio(1, 2);
    let start = SubInstance { agents: positive(mms), items: inst.items() };
    let red = reduce_singletons(inst, &start, &half, mms);
    let filled = fill(&red.remainder.agents, red.remainder.items.items(), |a, bag| unit.of(a, bag) >= half);
    if !filled.unserved.is_empty() {
        return Err(Error::Guarantee(format!("bag-filling left agents {:?} below half a share", filled.unserved)));
    }
    let steps = red.satisfied.len() + filled.served.len();
    let mut served = red.satisfied;
    served.extend(filled.served);
    Ok(Solved { allocation: assemble(inst.n, inst.m, &served), steps, gains: Vec::new() })
}

/// Shrinks `free` to a feasible subset from which no single item can be
/// dropped, scanning removals from the highest item id down. Returns the
/// subset with every agent of `agents` it is feasible for, or `None` when
/// `free` itself is feasible for nobody.
pub fn minimal_feasible_subset(
    free: &Bundle,
    agents: &[usize],
    feasible: impl Fn(usize, &[usize]) -> bool,
) -> Option<(Bundle, Vec<usize>)> {
    let any = |bag: &[usize]| agents.iter().any(|&a| feasible(a, bag));
    if !any(free.items()) {
        return None;
    }
    let mut bag = free.items().to_vec();
    for pos in (0..bag.len()).rev() {
        let mut trial = bag.clone();
        trial.remove(pos);
        if any(&trial) {
            bag = trial;
        }
    }
    let phi = agents.iter().copied().filter(|&a| feasible(a, &bag)).collect();
    Some((Bundle::new(bag), phi))
}

/// Topological order of the strict-envy digraph (`a -> b` when `a` values
/// `f_b` above `f_a`), choosing the smallest available agent id first.
/// On a cycle, returns the agents that could not be ordered.
pub(crate) fn envy_order(agents: &[usize], f: impl Fn(usize) -> Bundle, unit: &Unit) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let k = agents.len();
    let fs: Vec<Bundle> = agents.iter().map(|&a| f(a)).collect();
    let own: Vec<Value> = (0..k).map(|p| unit.bundle(agents[p], &fs[p])).collect();
    let mut out_edges = vec![Vec::new(); k];
    let mut indeg = vec![0usize; k];
    for p in 0..k {
        for q in 0..k {
            if p != q && unit.bundle(agents[p], &fs[q]) > own[p] {
                out_edges[p].push(q);
                indeg[q] += 1;
            }
        }
    }
    let mut ready: BTreeSet<(usize, usize)> = (0..k).filter(|&p| indeg[p] == 0).map(|p| (agents[p], p)).collect();
    let mut order = Vec::with_capacity(k);
    while let Some((a, p)) = ready.pop_first() {
        order.push(a);
        for &q in &out_edges[p] {
            indeg[q] -= 1;
            if indeg[q] == 0 {
                ready.insert((agents[q], q));
            }
        }
    }
    if order.len() == k {
        Ok(order)
    } else {
        Err(agents.iter().copied().filter(|a| !order.contains(a)).collect())
    }
}
