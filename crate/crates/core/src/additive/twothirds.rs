//! The 2/3-MMS baseline: agents matched to an item worth at least 1/3 form
//! the first cluster, single items finish whoever they can, and a priority
//! bag-filling pass shares the rest.

use std::collections::BTreeMap;

use super::{assemble, envy_order, exact_mms, minimal_feasible_subset, positive, Unit};
use crate::bipartite::mcmwm;
use crate::error::{Error, Result};
use crate::instance::{Allocation, Bundle, Instance, SubInstance};
use crate::reduction::reduce_singletons;
use crate::solver::Solved;
use crate::value::Value;

pub fn solve_twothirds(inst: &Instance) -> Result<Allocation> {
    let mms = exact_mms(inst)?;
    Ok(solve_twothirds_with(inst, &mms)?.allocation)
}

pub fn solve_twothirds_with(inst: &Instance, mms: &[Value]) -> Result<Solved> {
    let unit = Unit::new(inst, mms)?;
    let target = Value::ratio(2, 3);
    let third = Value::ratio(1, 3);
    let start = SubInstance { agents: positive(mms), items: inst.items() };
    let red = reduce_singletons(inst, &start, &target, mms);
    let mut steps = red.satisfied.len();
    let mut served = red.satisfied;
    let live = red.remainder;

    let singles: Vec<Vec<usize>> = live.items.iter().map(|j| vec![j]).collect();
    let gh = unit.graph(singles, &live.agents).filter(&third);
    let m = mcmwm(&gh);
    let mut f: BTreeMap<usize, Bundle> = BTreeMap::new();
    let mut eps: BTreeMap<usize, Value> = BTreeMap::new();
    for &(x, y) in &m.pairs {
        let a = gh.agent(y);
        let fa = Bundle::new(gh.x_items(x).to_vec());
        eps.insert(a, &target - unit.bundle(a, &fa));
        f.insert(a, fa);
    }
    let c1: Vec<usize> = f.keys().copied().collect();
    let c2: Vec<usize> = live.agents.iter().copied().filter(|a| !f.contains_key(a)).collect();
    let order = envy_order(&c1, |a| f[&a].clone(), &unit)
        .map_err(|cyc| Error::Guarantee(format!("envy cycle among clustered agents {cyc:?}")))?;

    let mut pool = live.items.clone();
    for fa in f.values() {
        pool = pool.difference(fa);
    }
    let mut open_c1 = Vec::new();
    for &a in &order {
        let hit = pool.iter().find(|&j| unit.item(a, j) >= &eps[&a]);
        match hit {
            Some(j) => {
                pool.remove(j);
                served.push((a, f[&a].union(&Bundle::new(vec![j]))));
                steps += 1;
            }
            None => open_c1.push(a),
        }
    }
    let mut broken = Vec::new();
    for j in pool.iter() {
        for &a in &c2 {
            if unit.item(a, j) >= &third {
                broken.push(format!("item {j} is worth 1/3 or more to unclustered agent {a}"));
            }
        }
        for &a in &open_c1 {
            if unit.item(a, j) >= &eps[&a] {
                broken.push(format!("item {j} alone completes agent {a}"));
            }
        }
    }
    if !broken.is_empty() {
        return Err(Error::Guarantee(broken.join("; ")));
    }

    let mut open: Vec<usize> = c2.clone();
    open.extend(&open_c1);
    let need = |a: usize| eps.get(&a).cloned().unwrap_or_else(|| target.clone());
    while let Some((s, phi)) = minimal_feasible_subset(&pool, &open, |a, s| unit.of(a, s) >= need(a)) {
        let pos = open.iter().position(|a| phi.contains(a)).expect("feasible for someone");
        let a = open.remove(pos);
        pool = pool.difference(&s);
        let bundle = f.get(&a).map_or_else(|| s.clone(), |fa| fa.union(&s));
        served.push((a, bundle));
        steps += 1;
    }
    if !open.is_empty() {
        return Err(Error::Guarantee(format!("agents {open:?} unsatisfied when the remaining items ran out")));
    }
    Ok(Solved { allocation: assemble(inst.n, inst.m, &served), steps, gains: Vec::new() })
}
