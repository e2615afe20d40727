//! 1/8-MMS local search for XOS agents, driven by demand queries.
//!
//! Each item held by another agent is priced at `3n/(n−1)` times its share
//! of the 1/4-capped welfare. The poorest agent's demand set is cut to the
//! shortest prefix (by clause value minus price) worth 1/4, and that prefix
//! moves to the agent.

use crate::error::{Error, Result};
use crate::instance::{Allocation, Bundle, Instance};
use crate::potential::{estimate_descent, Descent, Search};
use crate::solver::Solved;
use crate::valuation::Valuation;
use crate::value::Value;

fn quarter() -> Value {
    Value::ratio(1, 4)
}

fn eighth() -> Value {
    Value::ratio(1, 8)
}

pub fn ensure_clauses(inst: &Instance) -> Result<()> {
    match inst.valuations.iter().position(|v| v.clauses().is_none()) {
        Some(i) => Err(Error::Unsupported(format!("agent {i} has no explicit clause representation"))),
        None => Ok(()),
    }
}

/// Per-item prices for the agent in `slot`: zero on its own items,
/// `3n/(n−1)` times the capped contribution on items of other live agents,
/// and above the agent's total value on items out of play.
pub(crate) fn prices(s: &Search, slot: usize) -> Result<Vec<Value>> {
    let inst = s.instance();
    let n = s.agents.len() as i64;
    let scale = Value::ratio(3 * n, n - 1);
    let me = s.agents[slot];
    let blocked = inst.value_of(me, &inst.items()) + Value::one();
    let mut p = vec![blocked; inst.m];
    for (k, b) in s.bundles.iter().enumerate() {
        if k == slot {
            for j in b.iter() {
                p[j] = Value::zero();
            }
            continue;
        }
        let a = s.agents[k];
        let shrink = if &s.values[k] > s.potential.cap() { s.potential.cap() / &s.values[k] } else { Value::one() };
        for (j, w) in inst.valuations[a].xos_witness(b)? {
            let c = w / s.estimate(a) * &shrink;
            p[j] = &scale * c * s.estimate(me);
        }
    }
    Ok(p)
}

/// The improving set for `slot`, priced in the agent's raw units.
pub(crate) fn improving(s: &Search, slot: usize) -> Result<Bundle> {
    let inst = s.instance();
    let me = s.agents[slot];
    let v = &inst.valuations[me];
    let p = prices(s, slot)?;
    let star = v.demand(&p)?;
    if s.unit(me, &star) < quarter() {
        return Err(Error::EstimateTooHigh { agent: me });
    }
    let mut order: Vec<(Value, usize)> = v.xos_witness(&star)?.into_iter().map(|(j, c)| (c - &p[j], j)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut bag = Bundle::empty();
    for (_, j) in order {
        bag.insert(j);
        if s.unit(me, &bag) >= quarter() {
            return Ok(bag);
        }
    }
    Err(Error::Guarantee(format!("demand set of agent {me} is worth 1/4 but no prefix is")))
}

/// The improving set of `agent` against `alloc`, with values in units of
/// `estimates`. Agents with a zero estimate and their items are out of play.
pub fn improving_set(inst: &Instance, estimates: &[Value], alloc: &Allocation, agent: usize) -> Result<Bundle> {
    ensure_clauses(inst)?;
    alloc.validate(inst.n, inst.m)?;
    let agents: Vec<usize> = (0..inst.n).filter(|&i| estimates[i].is_positive()).collect();
    let slot = agents
        .iter()
        .position(|&a| a == agent)
        .ok_or_else(|| Error::Input(format!("agent {agent} has no positive estimate")))?;
    if agents.len() < 2 {
        return Err(Error::Precondition("improving sets need two live agents".into()));
    }
    let bundles = agents.iter().map(|&a| alloc.bundles[a].clone()).collect();
    let s = Search::with_bundles(inst, estimates, agents, bundles, quarter());
    improving(&s, slot)
}

/// One run against fixed estimates; [`Error::EstimateTooHigh`] names the
/// agent whose demand set fell short.
pub fn solve_xos_eighth_with(inst: &Instance, estimates: &[Value]) -> Result<Solved> {
    ensure_clauses(inst)?;
    run(inst, estimates, None)
}

/// As [`solve_xos_eighth_with`], starting the search from `init` instead of
/// a round-robin deal.
pub fn solve_xos_eighth_from(inst: &Instance, estimates: &[Value], init: &Allocation) -> Result<Solved> {
    ensure_clauses(inst)?;
    run(inst, estimates, Some(init))
}

fn run(inst: &Instance, estimates: &[Value], init: Option<&Allocation>) -> Result<Solved> {
    let mut s = Search::start_from(inst, estimates, &eighth(), quarter(), init)?;
    let n = s.agents.len();
    if n < 2 {
        return Ok(s.finish());
    }
    let step = Value::ratio(1, 10 * n as i64);
    let leak = eighth() - &step;
    let limit = 5 * n * n / 2 + 1;
    while let Some(k) = s.min_slot().filter(|&k| s.values[k] < eighth()) {
        let bag = improving(&s, k)?;
        let others: Value = {
            let p = prices(&s, k)?;
            let scale = Value::ratio(n as i64 - 1, 3 * n as i64) / s.estimate(s.agents[k]);
            bag.iter().filter(|j| !s.bundles[k].contains(*j)).map(|j| &p[j] * &scale).sum()
        };
        if others > leak {
            return Err(Error::Guarantee(format!("improving set carries {others} of other agents' welfare")));
        }
        let (gain, changes) = s.preview(k, &bag);
        if gain < step {
            return Err(Error::Guarantee(format!("improving set gains only {gain}")));
        }
        s.commit(k, &bag, gain, changes)?;
        if s.steps > limit {
            return Err(Error::Guarantee(format!("more than {limit} improving moves")));
        }
    }
    Ok(s.finish())
}

/// 1/8-MMS allocation without knowing the shares, via estimate descent.
pub fn solve_xos_eighth(inst: &Instance) -> Result<Descent> {
    ensure_clauses(inst)?;
    estimate_descent(inst, |d| run(inst, d, None))
}

/// `r` disjoint bundles each worth at least `MMS^r / 8`: the allocation for
/// `r` copies of the valuation.
pub fn mms_partition_xos(v: &Valuation, r: usize) -> Result<Vec<Bundle>> {
    if r == 0 {
        return Err(Error::Input("need at least one part".into()));
    }
    let inst = Instance::new(v.ground_size(), vec![v.clone(); r])?;
    Ok(solve_xos_eighth(&inst)?.solved.allocation.bundles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::{mms_all, mms_exact};

    fn assert_eighth(inst: &Instance, alloc: &Allocation) {
        alloc.validate(inst.n, inst.m).unwrap();
        let mms = mms_all(inst, inst.n).unwrap();
        for i in 0..inst.n {
            assert!(inst.value_of(i, &alloc.bundles[i]) * Value::int(8) >= mms[i].value, "agent {i}");
        }
    }

    fn clauses(cs: &[&[i64]]) -> Valuation {
        Valuation::XosExplicit { clauses: cs.iter().map(|c| c.iter().map(|&x| Value::int(x)).collect()).collect() }
    }

    #[test]
    fn single_agent_gets_everything() {
        let inst = Instance::new(2, vec![clauses(&[&[1, 0], &[0, 2]])]).unwrap();
        assert_eq!(solve_xos_eighth(&inst).unwrap().solved.allocation.bundles, vec![Bundle::range(2)]);
    }

    #[test]
    fn demand_prefix_stops_at_a_quarter() {
        let row = vec![Value::ratio(1, 8); 16];
        let inst = Instance::new(16, vec![Valuation::additive(row.clone()), Valuation::additive(row)]).unwrap();
        let alloc = Allocation { bundles: vec![Bundle::range(16), Bundle::empty()] };
        let s = improving_set(&inst, &[Value::one(), Value::one()], &alloc, 1).unwrap();
        assert_eq!(s, Bundle::new(vec![0, 1]));
    }

    #[test]
    fn adversarial_start_gains_enough() {
        let row = vec![Value::ratio(1, 8); 16];
        let inst = Instance::new(16, vec![Valuation::additive(row.clone()), Valuation::additive(row)]).unwrap();
        let d = [Value::one(), Value::one()];
        let alloc = Allocation { bundles: vec![Bundle::empty(), Bundle::range(16)] };
        let s = Search::with_bundles(&inst, &d, vec![0, 1], alloc.bundles.clone(), quarter());
        let bag = improving(&s, 0).unwrap();
        assert_eq!(bag.len(), 2);
        let (gain, _) = s.preview(0, &bag);
        assert!(gain >= Value::ratio(1, 20));
    }

    #[test]
    fn inflated_estimates_signal() {
        let row = vec![Value::ratio(1, 8); 16];
        let inst = Instance::new(16, vec![Valuation::additive(row.clone()), Valuation::additive(row)]).unwrap();
        let alloc = Allocation { bundles: vec![Bundle::range(16), Bundle::empty()] };
        let err = improving_set(&inst, &[Value::int(10), Value::int(10)], &alloc, 1).unwrap_err();
        assert!(matches!(err, Error::EstimateTooHigh { agent: 1 }));
    }

    #[test]
    fn pair_counterexample_gets_a_quarter() {
        for n in [2, 3] {
            let inst = crate::extremal::build_xos_counterexample(n).unwrap();
            let d = solve_xos_eighth(&inst).unwrap();
            assert_eighth(&inst, &d.solved.allocation);
            for i in 0..n {
                assert!(inst.value_of(i, &d.solved.allocation.bundles[i]) >= Value::ratio(1, 4));
            }
        }
        let table = Instance::new(4, vec![Valuation::paper_g(4, 0), Valuation::paper_g(4, 1)]).unwrap();
        assert!(matches!(solve_xos_eighth(&table), Err(Error::Unsupported(_))));
    }

    #[test]
    fn random_clauses() {
        let inst = Instance::new(
            7,
            vec![
                clauses(&[&[5, 1, 0, 3, 2, 2, 9], &[0, 4, 4, 4, 1, 0, 0]]),
                clauses(&[&[1, 1, 1, 1, 1, 1, 1]]),
                clauses(&[&[0, 0, 7, 0, 7, 0, 7], &[3, 3, 0, 3, 0, 3, 0], &[1, 2, 3, 4, 5, 6, 7]]),
            ],
        )
        .unwrap();
        let d = solve_xos_eighth(&inst).unwrap();
        assert_eighth(&inst, &d.solved.allocation);
        for g in &d.solved.gains {
            assert!(g * Value::int(30) >= Value::one());
        }
    }

    #[test]
    fn warm_start_from_one_owner_moves() {
        let inst = Instance::new(20, vec![clauses(&[&[1; 20]]); 2]).unwrap();
        let mms = [Value::int(10), Value::int(10)];
        let all = Allocation { bundles: vec![Bundle::range(20), Bundle::empty()] };
        let out = solve_xos_eighth_from(&inst, &mms, &all).unwrap();
        assert!(out.steps > 0);
        out.allocation.validate(2, 20).unwrap();
        for i in 0..2 {
            assert!(inst.value_of(i, &out.allocation.bundles[i]) * Value::int(8) >= mms[i]);
        }
        for g in &out.gains {
            assert!(g * Value::int(20) >= Value::one());
        }
    }

    #[test]
    fn partition_parts_reach_an_eighth() {
        let v = clauses(&[&[3, 1, 4, 1, 5, 9, 2, 6]]);
        let parts = mms_partition_xos(&v, 2).unwrap();
        let mms = mms_exact(&v, 2, &Bundle::range(8)).unwrap().value;
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert!(v.value(p.items()) * Value::int(8) >= mms);
        }
        let one = mms_partition_xos(&v, 1).unwrap();
        assert_eq!(v.value(one[0].items()), Value::int(31));
    }
}
