//! 4/5-MMS for four additive agents.
//!
//! The first agent's maximin partition is handed to the second agent, who
//! rebuilds three of its bundles into three bundles worth 4/5 to it while the
//! fourth stays intact. The remaining conflicts are settled by moving the
//! low-value items of a bundle, outside its core, into a neighbour.

use serde::Serialize;

use crate::additive::{assemble, exact_mms, positive, Unit};
use crate::error::{Error, Result};
use crate::extremal::search_best;
use crate::instance::{unallocated, Bundle, Instance, SubInstance};
use crate::mms::{additive_mms, mms_exact};
use crate::reduction::reduce_singletons;
use crate::solver::Solved;
use crate::value::Value;

fn four_fifths() -> Value {
    Value::ratio(4, 5)
}

/// A bundle worth at least 4/5 together with its core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreBundle {
    pub bundle: Bundle,
    pub core: Bundle,
}

/// Items of `b` by increasing unit value, ties by id.
fn ascending(unit: &Unit, agent: usize, b: &Bundle) -> Vec<usize> {
    let mut items = b.items().to_vec();
    items.sort_by(|&x, &y| unit.item(agent, x).cmp(unit.item(agent, y)).then(x.cmp(&y)));
    items
}

fn core_in(unit: &Unit, agent: usize, b: &Bundle) -> Result<CoreBundle> {
    let ff = four_fifths();
    let total = unit.bundle(agent, b);
    if total < ff {
        return Err(Error::Precondition(format!("bundle {b:?} is worth {total} < 4/5 to agent {agent}")));
    }
    let items = ascending(unit, agent, b);
    let mut acc = Value::zero();
    let mut start = items.len();
    while acc < ff {
        start -= 1;
        acc += unit.item(agent, items[start]);
    }
    let core = Bundle::new(items[start..].to_vec());
    let excess = &acc - &ff;
    if let Some(&j) = core.items().iter().find(|&&j| *unit.item(agent, j) <= excess) {
        return Err(Error::Guarantee(format!("core item {j} is worth no more than the core's excess {excess}")));
    }
    let small = items.iter().all(|&j| *unit.item(agent, j) < ff);
    if small && acc >= Value::ratio(8, 5) {
        return Err(Error::Guarantee(format!("core of {b:?} is worth {acc} >= 8/5")));
    }
    Ok(CoreBundle { bundle: b.clone(), core })
}

/// Shortest suffix of `bundle`, sorted by increasing value, worth at least
/// 4/5 of agent's share.
pub fn core(inst: &Instance, mms: &[Value], agent: usize, bundle: &Bundle) -> Result<CoreBundle> {
    core_in(&Unit::new(inst, mms)?, agent, bundle)
}

fn prefix_in(unit: &Unit, agent: usize, items: &[usize], v: &Value) -> Option<Bundle> {
    let mut acc = Value::zero();
    let mut out = Vec::new();
    for &j in items {
        out.push(j);
        acc += unit.item(agent, j);
        if acc >= *v {
            return Some(Bundle::new(out));
        }
    }
    None
}

/// The shortest prefix of `items` worth at least `v` (in share units). When
/// every item is worth at most `v`, the prefix is worth less than `2v`.
pub fn prefix_between(inst: &Instance, mms: &[Value], agent: usize, items: &[usize], v: &Value) -> Result<Option<Bundle>> {
    Ok(prefix_in(&Unit::new(inst, mms)?, agent, items, v))
}

/// How [`split_three`] found its bundles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SplitRoute {
    /// Three input bundles already satisfy the agent.
    Direct,
    /// The leftovers of two cores, merged into the larger unsatisfying bundle.
    Merge,
    /// A prefix of small items paired with the larger item of a two-item core.
    SmallItems,
    /// The least valuable large item swapped against a two-item core.
    Swap,
    /// The agent's own partition restricted to three bundles.
    OwnPartition,
    /// A three-way maximin partition of three of the bundles.
    Exhaustive,
}

/// Three disjoint bundles worth 4/5 to the agent, all inside the union of
/// three input bundles; `kept` is the index of the input bundle left whole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub bundles: Vec<Bundle>,
    pub kept: usize,
    pub transferred: bool,
    pub route: SplitRoute,
}

fn finish_split(original: &[Bundle], bundles: Vec<Bundle>, transferred: bool, route: SplitRoute) -> Result<Split> {
    let used = bundles.iter().fold(Bundle::empty(), |acc, b| acc.union(b));
    let kept = original
        .iter()
        .position(|p| p.is_disjoint(&used))
        .ok_or_else(|| Error::Guarantee("split touches all four bundles".into()))?;
    Ok(Split { bundles, kept, transferred, route })
}

fn split_in(unit: &Unit, inst: &Instance, mms: &[Value], agent: usize, parts: &[Bundle], own: &[Bundle]) -> Result<Split> {
    let ff = four_fifths();
    if parts.len() != 4 {
        return Err(Error::Input(format!("expected 4 bundles, got {}", parts.len())));
    }
    let total: Value = parts.iter().map(|b| unit.bundle(agent, b)).sum();
    if total < Value::int(4) {
        return Err(Error::Precondition(format!("the bundles are worth {total} < 4 to agent {agent}")));
    }
    let original = parts;
    let mut parts = parts.to_vec();
    let val = |b: &Bundle| unit.bundle(agent, b);
    let sat = |b: &Bundle| unit.bundle(agent, b) >= ff;
    let ok = |bs: &[Bundle]| bs.iter().all(sat);

    let mut good: Vec<usize> = (0..4).filter(|&k| sat(&parts[k])).collect();
    if good.len() >= 3 {
        let bs = good[..3].iter().map(|&k| parts[k].clone()).collect();
        return finish_split(original, bs, false, SplitRoute::Direct);
    }
    let mut transferred = false;
    if good.len() == 1 {
        let z = good[0];
        let mut rest: Vec<usize> = (0..4).filter(|&k| k != z).collect();
        rest.sort_by(|&a, &b| val(&parts[a]).cmp(&val(&parts[b])).then(a.cmp(&b)));
        let x = rest[1].min(rest[2]);
        let c = core_in(unit, agent, &parts[z])?.core;
        let moved = parts[z].difference(&c);
        parts[x] = parts[x].union(&moved);
        parts[z] = c;
        transferred = true;
        good = (0..4).filter(|&k| sat(&parts[k])).collect();
    }
    if good.len() == 2 {
        let (mut z, mut t) = (good[0], good[1]);
        let mut others: Vec<usize> = (0..4).filter(|&k| !good.contains(&k)).collect();
        others.sort_by(|&a, &b| val(&parts[b]).cmp(&val(&parts[a])).then(a.cmp(&b)));
        let (x, y) = (others[0], others[1]);
        let mut cz = core_in(unit, agent, &parts[z])?.core;
        let mut ct = core_in(unit, agent, &parts[t])?.core;
        if val(&cz) > val(&ct) {
            std::mem::swap(&mut z, &mut t);
            std::mem::swap(&mut cz, &mut ct);
        }
        let xp = parts[x].union(&parts[z].difference(&cz)).union(&parts[t].difference(&ct));
        if sat(&xp) {
            return finish_split(original, vec![xp, cz, ct], transferred, SplitRoute::Merge);
        }
        if ct.len() == 2 {
            let (b1, b2) = (ct.items()[0], ct.items()[1]);
            let (b1, b2) = if unit.item(agent, b1) <= unit.item(agent, b2) { (b1, b2) } else { (b2, b1) };
            let eps4 = val(&ct) - Value::ratio(6, 5);
            let v = Value::ratio(1, 5) - eps4 / Value::int(2);
            let small: Vec<usize> = xp.iter().filter(|&j| *unit.item(agent, j) < v).collect();
            if v.is_positive() && unit.of(agent, &small) >= v {
                if let Some(bp) = prefix_in(unit, agent, &small, &v) {
                    let mut first = bp.clone();
                    first.insert(b2);
                    let mut second = xp.difference(&bp);
                    second.insert(b1);
                    let cand = vec![first, second, cz.clone()];
                    if ok(&cand) {
                        return finish_split(original, cand, transferred, SplitRoute::SmallItems);
                    }
                }
            }
            let large = ascending(unit, agent, &xp.difference(&Bundle::new(small.clone())));
            if large.len() >= 2 {
                let b3 = large[0];
                let mut second = xp.clone();
                second.remove(b3);
                second.insert(b1);
                let cand = vec![Bundle::new(vec![b3, b2]), second, cz.clone()];
                if ok(&cand) {
                    return finish_split(original, cand, transferred, SplitRoute::Swap);
                }
            } else if let [b3] = large[..] {
                let cand: Vec<Bundle> =
                    own.iter().filter(|b| !b.contains(b3)).map(|b| b.difference(&parts[x])).collect();
                if cand.len() == 3 && ok(&cand) {
                    return finish_split(original, cand, transferred, SplitRoute::OwnPartition);
                }
            }
        }
        let _ = y;
    }
    for k in 0..4 {
        let rest = (0..4).filter(|&q| q != k).fold(Bundle::empty(), |acc, q| acc.union(&original[q]));
        let r = mms_exact(&inst.valuations[agent], 3, &rest)?;
        if r.value >= &ff * &mms[agent] {
            return finish_split(original, r.witness, false, SplitRoute::Exhaustive);
        }
    }
    Err(Error::Guarantee(format!("agent {agent} cannot rebuild three of the bundles at 4/5")))
}

/// Rebuilds three of the four `parts` into three bundles worth 4/5 of the
/// agent's share. `own` is a maximin partition of the agent.
pub fn split_three(inst: &Instance, mms: &[Value], agent: usize, parts: &[Bundle], own: &[Bundle]) -> Result<Split> {
    split_in(&Unit::new(inst, mms)?, inst, mms, agent, parts, own)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// A bijection `agents[i] -> bundles[perm[i]]` satisfying everyone at 4/5.
fn perfect(unit: &Unit, bundles: &[Bundle], agents: &[usize]) -> Option<Vec<(usize, Bundle)>> {
    let ff = four_fifths();
    permutations(agents.len())
        .into_iter()
        .find(|p| agents.iter().zip(p).all(|(&a, &k)| unit.bundle(a, &bundles[k]) >= ff))
        .map(|p| agents.iter().zip(p).map(|(&a, k)| (a, bundles[k].clone())).collect())
}

/// Three bundles for agents `p`, `q`, `r` where `p` is satisfied by all of
/// them, `q` values their union above 16/5 and `r` at least 3.
fn recurse(unit: &Unit, mut bundles: Vec<Bundle>, p: usize, q: usize, r: usize) -> Result<Vec<(usize, Bundle)>> {
    let ff = four_fifths();
    let union = bundles.iter().fold(Bundle::empty(), |acc, b| acc.union(b));
    if !bundles.iter().all(|b| unit.bundle(p, b) >= ff) {
        return Err(Error::Guarantee(format!("agent {p} is not satisfied by every bundle")));
    }
    if unit.bundle(q, &union) <= Value::ratio(16, 5) || unit.bundle(r, &union) < Value::int(3) {
        return Err(Error::Guarantee("the remaining agents value the union too little".into()));
    }
    let qs: Vec<usize> = (0..3).filter(|&k| unit.bundle(q, &bundles[k]) >= ff).collect();
    if qs.len() == 1 {
        let z = qs[0];
        let y = (0..3).find(|&k| k != z).expect("three bundles");
        let c = core_in(unit, q, &bundles[z])?.core;
        let moved = bundles[z].difference(&c);
        bundles[y] = bundles[y].union(&moved);
        bundles[z] = c;
    }
    perfect(unit, &bundles, &[p, q, r]).ok_or_else(|| Error::Guarantee("no perfect assignment of three bundles".into()))
}

/// Which part of the case analysis produced the allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FourPath {
    /// Singleton reduction left fewer than four agents; the rest was searched.
    Reduced,
    /// The rebuilt partition satisfies all four agents at once.
    Perfect,
    /// The last two agents only like the first agent's bundles.
    FirstAgentRebuilds,
    /// The last two agents like one bundle outside the first agent's.
    FirstAgentKeeps,
    /// None of the above applied; the allocation was searched.
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourSolved {
    pub solved: Solved,
    pub path: FourPath,
    pub split: Option<Split>,
}

/// 4/5-MMS allocation for four additive agents.
pub fn solve_four(inst: &Instance) -> Result<FourSolved> {
    let mms = exact_mms(inst)?;
    solve_four_with(inst, &mms)
}

pub fn solve_four_with(inst: &Instance, mms: &[Value]) -> Result<FourSolved> {
    if inst.n != 4 {
        return Err(Error::Input(format!("the four-agent solver needs n = 4, got {}", inst.n)));
    }
    let unit = Unit::new(inst, mms)?;
    let ff = four_fifths();
    let start = SubInstance { agents: positive(mms), items: inst.items() };
    let red = reduce_singletons(inst, &start, &ff, mms);
    if red.remainder.agents.len() < 4 {
        let rest = &red.remainder;
        let (_, bundles) = search_best(inst, &rest.agents, rest.items.items(), mms, Some(&ff))?
            .ok_or_else(|| Error::Guarantee("no allocation of the remainder reaches 4/5".into()))?;
        let mut served = red.satisfied;
        served.extend(rest.agents.iter().copied().zip(bundles));
        return Ok(FourSolved { solved: done(inst, &served), path: FourPath::Reduced, split: None });
    }
    let [a1, a2, a3, a4] = [0, 1, 2, 3];
    let items = inst.items();
    let p1 = mms_exact(&inst.valuations[a1], 4, &items)?.witness;
    let own = mms_exact(&inst.valuations[a2], 4, &items)?.witness;
    let split = split_in(&unit, inst, mms, a2, &p1, &own)?;
    let mut s = split.bundles.clone();
    s.push(unallocated(inst.m, &s));
    let outcome = settle(&unit, &s, [a1, a2, a3, a4])?;
    if let Some((path, served)) = outcome {
        return Ok(FourSolved { solved: done(inst, &served), path, split: Some(split) });
    }
    let all: Vec<usize> = (0..4).collect();
    let (_, bundles) = search_best(inst, &all, items.items(), mms, Some(&ff))?
        .ok_or_else(|| Error::Guarantee("no allocation reaches 4/5".into()))?;
    let served: Vec<(usize, Bundle)> = all.into_iter().zip(bundles).collect();
    Ok(FourSolved { solved: done(inst, &served), path: FourPath::Fallback, split: Some(split) })
}

fn done(inst: &Instance, served: &[(usize, Bundle)]) -> Solved {
    Solved { allocation: assemble(inst.n, inst.m, served), steps: served.len(), gains: Vec::new() }
}

/// Resolves the rebuilt partition `s` (three rebuilt bundles, then the kept
/// one). `None` when the configuration is outside the case analysis.
fn settle(unit: &Unit, s: &[Bundle], agents: [usize; 4]) -> Result<Option<(FourPath, Vec<(usize, Bundle)>)>> {
    let ff = four_fifths();
    let [a1, a2, a3, a4] = agents;
    if let Some(served) = perfect(unit, s, &agents) {
        return Ok(Some((FourPath::Perfect, served)));
    }
    let x = 3;
    if unit.bundle(a1, &s[x]) < ff {
        return Ok(None);
    }
    let Some(y) = (0..3).find(|&k| unit.bundle(a1, &s[k]) >= ff) else {
        return Ok(None);
    };
    let phi: Vec<usize> = (0..4).filter(|&k| unit.bundle(a3, &s[k]) >= ff || unit.bundle(a4, &s[k]) >= ff).collect();
    if phi.iter().all(|&k| k == x || k == y) {
        for z in (0..3).filter(|&k| k != y) {
            let t = (0..3).find(|&k| k != y && k != z).expect("three bundles");
            let union = s[x].union(&s[y]).union(&s[z]);
            let three = rebuild_three(unit, a1, &union)?;
            if let Some(three) = three {
                let mut served = recurse(unit, three, a1, a3, a4)?;
                served.push((a2, s[t].clone()));
                return Ok(Some((FourPath::FirstAgentRebuilds, served)));
            }
        }
        return Ok(None);
    }
    if phi.len() == 1 && phi[0] != x && phi[0] != y {
        let served_rest = recurse(unit, s[..3].to_vec(), a2, a3, a4)?;
        let mut served = vec![(a1, s[x].clone())];
        served.extend(served_rest);
        return Ok(Some((FourPath::FirstAgentKeeps, served)));
    }
    Ok(None)
}

/// Three bundles of `items` worth 4/5 to `agent`, from its three-way
/// maximin partition.
fn rebuild_three(unit: &Unit, agent: usize, items: &Bundle) -> Result<Option<Vec<Bundle>>> {
    let values: Vec<Value> = items.iter().map(|j| unit.item(agent, j).clone()).collect();
    if items.len() > crate::mms::ADDITIVE_MAX_ITEMS {
        return Err(Error::Capacity(format!("{} items exceed the exact partition limit", items.len())));
    }
    let r = additive_mms(&values, 3, items);
    Ok((r.value >= four_fifths()).then_some(r.witness))
}
