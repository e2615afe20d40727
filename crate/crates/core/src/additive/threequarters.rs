//! The 3/4-MMS algorithm: three clusters of agents built from matchings on the
//! value graph, two refinement passes, and a priority-driven bag-filling phase.

use std::collections::{BTreeMap, BTreeSet};

use super::{assemble, envy_order, exact_mms, minimal_feasible_subset, positive, Unit};
use crate::bipartite::{compute_f, maximum_matching, mcmwm, min_position_matching, ValueGraph};
use crate::error::{Error, Result};
use crate::instance::{Allocation, Bundle, Instance, SubInstance};
use crate::reduction::{check_pair_invariant, reduce_singletons};
use crate::solver::Solved;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Unsatisfied,
    SemiSatisfied,
    Satisfied,
}

/// Where an agent sits. `C3s`, `C3b` and `C3f` are the semi-satisfied,
/// borrower and free parts of the third cluster; `S*r` agents were satisfied
/// while refining a cluster and `S*s` / `S3` during the second phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cluster {
    C1,
    C2,
    C3s,
    C3b,
    C3f,
    S1r,
    S1s,
    S2r,
    S2s,
    S3,
}

impl Cluster {
    fn first(self) -> bool {
        matches!(self, Cluster::C1 | Cluster::S1r | Cluster::S1s)
    }

    fn second(self) -> bool {
        matches!(self, Cluster::C2 | Cluster::S2r | Cluster::S2s)
    }

    fn third(self) -> bool {
        matches!(self, Cluster::C3s | Cluster::C3b | Cluster::C3f)
    }

    fn open(self) -> bool {
        matches!(self, Cluster::C1 | Cluster::C2) || self.third()
    }
}

/// Per-agent bookkeeping: first bundle `f`, second bundle `g`, and the
/// deficit `eps` still needed on top of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentState {
    pub f: Bundle,
    pub g: Bundle,
    pub eps: Value,
    pub status: Status,
    pub cluster: Cluster,
}

impl AgentState {
    fn semi(f: Bundle, agent: usize, unit: &Unit, cluster: Cluster) -> Self {
        let eps = three_quarters() - unit.bundle(agent, &f);
        AgentState { f, g: Bundle::empty(), eps, status: Status::SemiSatisfied, cluster }
    }

    fn satisfy(&mut self, g: Bundle, cluster: Cluster) {
        self.g = g;
        self.status = Status::Satisfied;
        self.cluster = cluster;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Assert the value bounds and structural facts the guarantee rests on.
    pub check_lemmas: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { check_lemmas: cfg!(debug_assertions) }
    }
}

fn half() -> Value {
    Value::ratio(1, 2)
}

fn quarter() -> Value {
    Value::ratio(1, 4)
}

fn three_quarters() -> Value {
    Value::ratio(3, 4)
}

/// 3/4-MMS allocation using exact maximin shares.
pub fn solve_threequarters(inst: &Instance) -> Result<Allocation> {
    let mms = exact_mms(inst)?;
    Ok(solve_threequarters_with(inst, &mms, Options::default())?.allocation)
}

/// 3/4-MMS allocation against the supplied shares. `steps` counts reductions
/// plus second-phase rounds.
pub fn solve_threequarters_with(inst: &Instance, mms: &[Value], opts: Options) -> Result<Solved> {
    let unit = Unit::new(inst, mms)?;
    let mut live = SubInstance { agents: positive(mms), items: inst.items() };
    let mut served = Vec::new();
    let mut steps = 0;
    loop {
        let red = reduce_singletons(inst, &live, &three_quarters(), mms);
        steps += red.satisfied.len();
        served.extend(red.satisfied);
        live = red.remainder;
        if live.agents.is_empty() {
            break;
        }
        match cluster(inst, mms, &unit, &live, opts)? {
            Phase1::Reduce(grants) => {
                steps += 1;
                for (a, b) in grants {
                    live.agents.retain(|&x| x != a);
                    live.items = live.items.difference(&b);
                    served.push((a, b));
                }
            }
            Phase1::Ready(c) => {
                let (done, rounds) = second_phase(&unit, c, opts)?;
                steps += rounds;
                served.extend(done);
                break;
            }
        }
    }
    Ok(Solved { allocation: assemble(inst.n, inst.m, &served), steps, gains: Vec::new() })
}

enum Phase1 {
    Reduce(Vec<(usize, Bundle)>),
    Ready(Clustering),
}

/// State handed from the clustering phase to the second phase.
#[derive(Clone, Debug)]
struct Clustering {
    states: BTreeMap<usize, AgentState>,
    free: Bundle,
    refined: Vec<usize>,
}

fn dump(states: &BTreeMap<usize, AgentState>, free: &Bundle) -> String {
    let mut out: Vec<String> = states
        .iter()
        .map(|(a, s)| {
            format!("agent {a} {:?} {:?} f={:?} g={:?} eps={}", s.cluster, s.status, s.f.items(), s.g.items(), s.eps)
        })
        .collect();
    out.push(format!("free={:?}", free.items()));
    out.join("; ")
}

fn fail(msg: impl AsRef<str>, states: &BTreeMap<usize, AgentState>, free: &Bundle) -> Error {
    Error::Guarantee(format!("{} [{}]", msg.as_ref(), dump(states, free)))
}

fn singles(items: &[usize]) -> Vec<Vec<usize>> {
    items.iter().map(|&j| vec![j]).collect()
}

fn all_x(g: &ValueGraph) -> Vec<usize> {
    (0..g.nx()).collect()
}

fn cluster(inst: &Instance, mms: &[Value], unit: &Unit, live: &SubInstance, opts: Options) -> Result<Phase1> {
    let none = Bundle::empty();
    let mut states: BTreeMap<usize, AgentState> = BTreeMap::new();

    // First cluster: neighbours of F in the 1/2-filtered value graph.
    let g = unit.graph(singles(live.items.items()), &live.agents);
    let gh = g.filter(&half());
    let m = mcmwm(&gh);
    let f = compute_f(&gh, &m, &all_x(&gh))?;
    let (mut s1, mut u1) = (Bundle::empty(), Bundle::empty());
    for &x in &f {
        let item = gh.x_items(x)[0];
        match m.partner_of_x(x) {
            Some(y) => {
                s1.insert(item);
                let a = gh.agent(y);
                states.insert(a, AgentState::semi(Bundle::new(vec![item]), a, unit, Cluster::C1));
            }
            None => u1.insert(item),
        }
    }
    let c1: Vec<usize> = states.keys().copied().collect();
    let mut nf: Vec<usize> = gh.neighbors(&f).into_iter().map(|y| gh.agent(y)).collect();
    nf.sort_unstable();
    if nf != c1 {
        return Err(fail("neighbours of F are not all matched into F", &states, &none));
    }

    // Refinement graph over U1 plus light items that complete some C1 agent.
    let heavy: Bundle = (0..gh.nx()).map(|x| gh.x_items(x)[0]).collect();
    let mut w1 = u1.clone();
    for j in live.items.iter().filter(|&j| !heavy.contains(j)) {
        if c1.iter().any(|a| unit.item(*a, j) >= &states[a].eps) {
            w1.insert(j);
        }
    }
    let weights = w1.iter().map(|j| c1.iter().map(|&a| unit.item(a, j).clone()).collect()).collect();
    let edges = w1.iter().map(|j| c1.iter().map(|a| unit.item(*a, j) >= &states[a].eps).collect()).collect();
    let g1 = ValueGraph::with_edges(singles(w1.items()), c1.clone(), weights, edges);
    let m1 = maximum_matching(&g1);
    let f1 = compute_f(&g1, &m1, &all_x(&g1))?;
    if !f1.is_empty() {
        let mut agents = Vec::new();
        let mut pairs = Vec::new();
        for y in g1.neighbors(&f1) {
            let a = g1.agent(y);
            let x = m1
                .partner_of_y(y)
                .ok_or_else(|| fail(format!("agent {a} next to F of the refinement graph is unmatched"), &states, &none))?;
            agents.push(a);
            pairs.push((states[&a].f.items()[0], g1.x_items(x)[0]));
        }
        if check_pair_invariant(inst, &live.agents, &agents, &pairs, mms, &three_quarters()) {
            let grants = agents.into_iter().zip(pairs).map(|(a, (p, q))| (a, Bundle::new(vec![p, q]))).collect();
            return Ok(Phase1::Reduce(grants));
        }
        return Err(fail("refinement graph is not saturable and its pair reduction is invalid", &states, &none));
    }
    let order1 = envy_order(&c1, |a| states[&a].f.clone(), unit)
        .map_err(|cyc| fail(format!("envy cycle in C1 among {cyc:?}"), &states, &none))?;
    let positions: Vec<usize> = c1.iter().map(|a| order1.iter().position(|b| b == a).unwrap_or(0) + 1).collect();
    let nice = min_position_matching(&g1, &positions).map_err(|e| fail(e.to_string(), &states, &none))?;
    let mut refined = Vec::new();
    for &(x, y) in &nice.pairs {
        let a = g1.agent(y);
        states.get_mut(&a).expect("C1 agent").satisfy(Bundle::new(vec![g1.x_items(x)[0]]), Cluster::S1r);
        refined.push(a);
    }
    if opts.check_lemmas {
        for &(x, y) in &nice.pairs {
            let j = g1.agent(y);
            for k in (0..g1.ny()).filter(|&k| g1.has_edge(x, k) && nice.partner_of_y(k).is_none()) {
                let k = g1.agent(k);
                if unit.bundle(k, &states[&j].f) > unit.bundle(k, &states[&k].f) {
                    return Err(fail(format!("refinement matching lets agent {k} envy agent {j}"), &states, &none));
                }
            }
        }
    }

    let xp: Vec<usize> = live.items.iter().filter(|&j| !w1.contains(j) && !s1.contains(j)).collect();
    let yp: Vec<usize> = live.agents.iter().copied().filter(|a| !c1.contains(a)).collect();
    let light: Vec<usize> = xp.iter().copied().filter(|&j| yp.iter().all(|&a| unit.item(a, j) < &half())).collect();
    for (p, &j) in light.iter().enumerate() {
        for &k in &light[p + 1..] {
            for &a in &live.agents {
                if unit.item(a, j) + unit.item(a, k) >= three_quarters() {
                    if check_pair_invariant(inst, &live.agents, &[a], &[(j, k)], mms, &three_quarters()) {
                        return Ok(Phase1::Reduce(vec![(a, Bundle::new(vec![j, k]))]));
                    }
                    return Err(fail(format!("items {j},{k} reach 3/4 for agent {a} but cannot be reduced"), &states, &none));
                }
            }
        }
    }
    if opts.check_lemmas {
        for (&a, s) in states.iter().filter(|(_, s)| s.cluster == Cluster::C1) {
            if let Some(j) = light.iter().find(|&&j| unit.item(a, j) >= &s.eps) {
                return Err(fail(format!("light item {j} still completes C1 agent {a}"), &states, &none));
            }
        }
    }

    // Merge desirable pairs of light vertices until none is left for the agents outside N(F').
    let mut gp = unit.graph(singles(&xp), &yp);
    let (gph, mp, fp) = loop {
        let gph = gp.filter(&half());
        let mp = mcmwm(&gph);
        let fp = compute_f(&gph, &mp, &all_x(&gph))?;
        let covered: BTreeSet<usize> = gph.neighbors(&fp).into_iter().map(|y| gph.agent(y)).collect();
        let t: Vec<usize> = yp.iter().copied().filter(|a| !covered.contains(a)).collect();
        let lx: Vec<usize> = (0..gp.nx()).filter(|&x| gph.x_index(gp.x_items(x)).is_none()).collect();
        let mut pick = None;
        'scan: for (p, &xa) in lx.iter().enumerate() {
            for &xb in &lx[p + 1..] {
                if t.iter().any(|&a| unit.of(a, gp.x_items(xa)) + unit.of(a, gp.x_items(xb)) >= half()) {
                    pick = Some((xa, xb));
                    break 'scan;
                }
            }
        }
        match pick {
            Some((xa, xb)) => gp = gp.merge(xa, xb)?,
            None => break (gph, mp, fp),
        }
    };

    // Second cluster: N(F') holding their matched vertex.
    let mut c2 = Vec::new();
    let mut s2 = Bundle::empty();
    for &x in &fp {
        let y = mp
            .partner_of_x(x)
            .ok_or_else(|| fail("F' has an unmatched vertex after merging", &states, &none))?;
        let a = gph.agent(y);
        let fa = Bundle::new(gph.x_items(x).to_vec());
        s2 = s2.union(&fa);
        states.insert(a, AgentState::semi(fa, a, unit, Cluster::C2));
        c2.push(a);
    }
    c2.sort_unstable();
    let mut nfp: Vec<usize> = gph.neighbors(&fp).into_iter().map(|y| gph.agent(y)).collect();
    nfp.sort_unstable();
    if nfp != c2 {
        return Err(fail("|F'| differs from |N(F')| after merging", &states, &none));
    }
    let mut light2 = Vec::new();
    for x in (0..gp.nx()).filter(|&x| gph.x_index(gp.x_items(x)).is_none()) {
        match gp.x_items(x) {
            [j] => light2.push(*j),
            other => return Err(fail(format!("merged vertex {other:?} lost all heavy edges"), &states, &none)),
        }
    }
    if opts.check_lemmas {
        let merged: Vec<&[usize]> = (0..gp.nx()).map(|x| gp.x_items(x)).filter(|it| it.len() == 2).collect();
        for (&a, s) in states.iter().filter(|(_, s)| s.cluster == Cluster::C1) {
            if let Some(it) = merged.iter().find(|it| unit.of(a, it) >= &s.eps + &s.eps) {
                return Err(fail(format!("merged pair {it:?} reaches 2 eps for C1 agent {a}"), &states, &none));
            }
        }
    }

    // Refine C2 in topological order with single light items.
    let order2 = envy_order(&c2, |a| states[&a].f.clone(), unit)
        .map_err(|cyc| fail(format!("envy cycle in C2 among {cyc:?}"), &states, &none))?;
    let mut w2 = Bundle::empty();
    for a in order2 {
        let eps = states[&a].eps.clone();
        if let Some(j) = light2.iter().copied().find(|&j| !w2.contains(j) && unit.item(a, j) >= &eps) {
            w2.insert(j);
            states.get_mut(&a).expect("C2 agent").satisfy(Bundle::new(vec![j]), Cluster::S2r);
            refined.push(a);
        }
    }

    // Third cluster: everyone else, matched on the remaining heavy vertices.
    let ypp: Vec<usize> = yp.iter().copied().filter(|a| !c2.contains(a)).collect();
    let xk: Vec<usize> = (0..gp.nx())
        .filter(|&x| gp.x_items(x).iter().all(|&j| !s2.contains(j) && !w2.contains(j)))
        .collect();
    let yk: Vec<usize> = ypp.iter().map(|&a| gp.y_index(a).expect("agent of G'")).collect();
    let gpp = gp.induced(&xk, &yk);
    let gpph = gpp.filter(&half());
    let mpp = mcmwm(&gpph);
    for &a in &ypp {
        states.insert(
            a,
            AgentState {
                f: Bundle::empty(),
                g: Bundle::empty(),
                eps: three_quarters(),
                status: Status::Unsatisfied,
                cluster: Cluster::C3f,
            },
        );
    }
    if mpp.len() < gpph.nx() {
        return Err(fail("a heavy vertex of the third cluster's graph is unmatched", &states, &none));
    }
    for &(x, y) in &mpp.pairs {
        states.get_mut(&gpph.agent(y)).expect("C3 agent").f = Bundle::new(gpph.x_items(x).to_vec());
    }
    let free: Bundle = (0..gpp.nx())
        .filter(|&x| gpph.x_index(gpp.x_items(x)).is_none())
        .flat_map(|x| gpp.x_items(x).to_vec())
        .collect();
    update_c3(&mut states, unit);
    Ok(Phase1::Ready(Clustering { states, free, refined }))
}

/// Recomputes the semi-satisfied, borrower and free parts of the third cluster.
fn update_c3(states: &mut BTreeMap<usize, AgentState>, unit: &Unit) {
    let c3: Vec<usize> = states.iter().filter(|(_, s)| s.cluster.third()).map(|(&a, _)| a).collect();
    let lenders: Vec<usize> = c3.iter().copied().filter(|a| !states[a].f.is_empty()).collect();
    let mut next = Vec::new();
    for &a in &c3 {
        if lenders.contains(&a) {
            let eps = three_quarters() - unit.bundle(a, &states[&a].f);
            next.push((a, Cluster::C3s, Status::SemiSatisfied, eps));
            continue;
        }
        let best = lenders.iter().map(|j| unit.bundle(a, &states[j].f)).max();
        match best {
            Some(v) if v >= half() => next.push((a, Cluster::C3b, Status::Unsatisfied, three_quarters() - v)),
            _ => next.push((a, Cluster::C3f, Status::Unsatisfied, three_quarters())),
        }
    }
    for (a, cluster, status, eps) in next {
        let s = states.get_mut(&a).expect("C3 agent");
        s.cluster = cluster;
        s.status = status;
        s.eps = eps;
    }
}

fn members(states: &BTreeMap<usize, AgentState>, c: Cluster) -> Vec<usize> {
    states.iter().filter(|(_, s)| s.cluster == c).map(|(&a, _)| a).collect()
}

/// Open agents from lowest to highest priority.
fn priority(states: &BTreeMap<usize, AgentState>, unit: &Unit) -> std::result::Result<Vec<usize>, String> {
    let topo = |c: Cluster| {
        envy_order(&members(states, c), |a| states[&a].f.clone(), unit)
            .map_err(|cyc| format!("envy cycle in {c:?} among {cyc:?}"))
    };
    let mut out = members(states, Cluster::C3f);
    out.extend(topo(Cluster::C1)?);
    out.extend(topo(Cluster::C2)?);
    out.extend(topo(Cluster::C3s)?);
    out.extend(members(states, Cluster::C3b));
    Ok(out)
}

fn second_phase(unit: &Unit, c: Clustering, opts: Options) -> Result<(Vec<(usize, Bundle)>, usize)> {
    let Clustering { mut states, mut free, refined } = c;
    if opts.check_lemmas {
        entry_checks(unit, &states, &free)?;
    }
    let mut done = refined;
    let limit = 2 * states.len();
    let mut rounds = 0;
    loop {
        if opts.check_lemmas {
            state_checks(unit, &states, &free)?;
        }
        let prio = priority(&states, unit).map_err(|msg| fail(msg, &states, &free))?;
        let feasible = |a: usize, s: &[usize]| {
            let st = &states[&a];
            let v = unit.of(a, s);
            if st.cluster == Cluster::C3f {
                v >= half()
            } else {
                v >= st.eps
            }
        };
        let Some((s, phi)) = minimal_feasible_subset(&free, &prio, feasible) else {
            break;
        };
        let a = *prio.iter().find(|a| phi.contains(a)).expect("feasible for someone");
        if opts.check_lemmas {
            round_checks(unit, &states, &free, &prio, a, &s)?;
        }
        free = free.difference(&s);
        rounds += 1;
        match states[&a].cluster {
            Cluster::C3f => states.get_mut(&a).expect("agent").f = s,
            Cluster::C3b => {
                let mut lender: Option<(usize, Value)> = None;
                for j in members(&states, Cluster::C3s) {
                    let v = unit.bundle(a, &states[&j].f);
                    if lender.as_ref().is_none_or(|(_, b)| v > *b) {
                        lender = Some((j, v));
                    }
                }
                let (j, _) = lender.ok_or_else(|| fail(format!("borrower {a} has no lender"), &states, &free))?;
                let fj = std::mem::take(&mut states.get_mut(&j).expect("lender").f);
                let st = states.get_mut(&a).expect("agent");
                st.f = fj;
                st.satisfy(s, Cluster::S3);
                done.push(a);
            }
            Cluster::C3s => {
                states.get_mut(&a).expect("agent").satisfy(s, Cluster::S3);
                done.push(a);
            }
            Cluster::C1 => {
                states.get_mut(&a).expect("agent").satisfy(s, Cluster::S1s);
                done.push(a);
            }
            Cluster::C2 => {
                states.get_mut(&a).expect("agent").satisfy(s, Cluster::S2s);
                done.push(a);
            }
            other => return Err(fail(format!("agent {a} selected from {other:?}"), &states, &free)),
        }
        update_c3(&mut states, unit);
        if rounds > limit {
            return Err(fail(format!("second phase exceeded {limit} rounds"), &states, &free));
        }
    }
    let open: Vec<usize> = states.iter().filter(|(_, s)| s.status != Status::Satisfied).map(|(&a, _)| a).collect();
    if !open.is_empty() {
        return Err(fail(format!("agents {open:?} unsatisfied when the free items ran out"), &states, &free));
    }
    let mut grants = Vec::with_capacity(done.len());
    for a in done {
        let s = &states[&a];
        let bundle = s.f.union(&s.g);
        if unit.bundle(a, &bundle) < three_quarters() {
            return Err(fail(format!("agent {a} marked satisfied below 3/4"), &states, &free));
        }
        grants.push((a, bundle));
    }
    Ok((grants, rounds))
}

struct Violations(Vec<String>);

impl Violations {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn finish(self, states: &BTreeMap<usize, AgentState>, free: &Bundle) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(fail(self.0.join("; "), states, free))
        }
    }
}

fn entry_checks(unit: &Unit, states: &BTreeMap<usize, AgentState>, free: &Bundle) -> Result<()> {
    let mut v = Violations(Vec::new());
    for (&i, si) in states {
        match si.cluster {
            Cluster::C1 | Cluster::C2 => {
                for j in free.iter() {
                    v.check(unit.item(i, j) < &si.eps, || format!("free item {j} completes agent {i}"));
                }
            }
            c if c.third() => {
                let big = free.iter().filter(|&j| unit.item(i, j) >= &quarter()).count();
                v.check(big <= 1, || format!("agent {i} has {big} free items of value 1/4 or more"));
            }
            _ => {}
        }
        for (&j, sj) in states.iter().filter(|(&j, _)| j != i) {
            let fj = unit.bundle(i, &sj.f);
            let gj = unit.bundle(i, &sj.g);
            if (si.cluster.second() || si.cluster.third()) && sj.cluster.first() {
                v.check(fj < half(), || format!("agent {i} values f of first-cluster agent {j} at {fj}"));
            }
            if (si.cluster.second() || si.cluster.third()) && sj.cluster == Cluster::S1r {
                v.check(gj < half(), || format!("agent {i} values g of refined agent {j} at {gj}"));
            }
            if si.cluster.third() && sj.cluster.second() {
                v.check(fj < half(), || format!("agent {i} values f of second-cluster agent {j} at {fj}"));
            }
            if sj.cluster == Cluster::S2r && si.cluster == Cluster::C1 {
                v.check(gj < si.eps, || format!("C1 agent {i} values g of refined agent {j} at {gj}"));
            }
            if sj.cluster == Cluster::S2r && si.cluster.third() {
                v.check(gj < half(), || format!("C3 agent {i} values g of refined agent {j} at {gj}"));
            }
        }
    }
    v.finish(states, free)
}

fn state_checks(unit: &Unit, states: &BTreeMap<usize, AgentState>, free: &Bundle) -> Result<()> {
    let mut v = Violations(Vec::new());
    for (&i, si) in states {
        if si.status == Status::SemiSatisfied {
            let own = unit.bundle(i, &si.f);
            v.check(!si.f.is_empty() && si.g.is_empty() && own >= half(), || format!("semi-satisfied agent {i} holds {own}"));
        }
        if si.cluster == Cluster::C3b {
            v.check(si.eps <= quarter(), || format!("borrower {i} has eps {}", si.eps));
        }
        if matches!(si.cluster, Cluster::C1 | Cluster::C2 | Cluster::C3s) {
            for (&j, _) in states.iter().filter(|(&j, s)| j != i && s.cluster.open()) {
                let x = unit.bundle(j, &si.f);
                v.check(x < three_quarters(), || format!("agent {j} values f of agent {i} at {x}"));
            }
        }
    }
    v.finish(states, free)
}

fn round_checks(
    unit: &Unit,
    states: &BTreeMap<usize, AgentState>,
    free: &Bundle,
    prio: &[usize],
    a: usize,
    s: &Bundle,
) -> Result<()> {
    let mut v = Violations(Vec::new());
    let rank = |x: usize| prio.iter().position(|&p| p == x).unwrap_or(usize::MAX);
    let ca = states[&a].cluster;
    for (&j, sj) in states.iter().filter(|(&j, _)| j != a) {
        let x = unit.bundle(j, s);
        let two_eps = &sj.eps + &sj.eps;
        if ca == Cluster::C3f {
            if matches!(sj.cluster, Cluster::C1 | Cluster::C2 | Cluster::C3s | Cluster::C3b) {
                v.check(x < two_eps, || format!("new f of agent {a} is worth {x} to agent {j}"));
            }
            continue;
        }
        if matches!(sj.cluster, Cluster::C1 | Cluster::C2) {
            let bound = if rank(j) < rank(a) { sj.eps.clone() } else { two_eps };
            v.check(x < bound, || format!("g of agent {a} is worth {x} to agent {j}"));
        }
        if matches!(ca, Cluster::C1 | Cluster::C2) && sj.cluster.third() {
            v.check(x < half(), || format!("g of agent {a} is worth {x} to C3 agent {j}"));
        }
    }
    v.finish(states, free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    fn v(p: i64, q: i64) -> Value {
        Value::ratio(p, q)
    }

    fn checked() -> Options {
        Options { check_lemmas: true }
    }

    fn assert_three_quarters(inst: &Instance) {
        let mms = exact_mms(inst).unwrap();
        let out = solve_threequarters_with(inst, &mms, checked()).unwrap();
        out.allocation.validate(inst.n, inst.m).unwrap();
        for i in 0..inst.n {
            let got = inst.value_of(i, &out.allocation.bundles[i]);
            assert!(got * Value::int(4) >= &mms[i] * Value::int(3), "agent {i}");
        }
    }

    #[test]
    fn single_agent_gets_everything() {
        let inst = Instance::new(3, vec![Valuation::additive_ints(&[1, 2, 3])]).unwrap();
        assert_eq!(solve_threequarters(&inst).unwrap().bundles, vec![Bundle::range(3)]);
    }

    #[test]
    fn paired_heavy_rows() {
        let row = vec![v(1, 2), v(1, 2), v(1, 4), v(1, 4), v(1, 4), v(1, 4)];
        let inst = Instance::new(6, vec![Valuation::additive(row.clone()), Valuation::additive(row)]).unwrap();
        assert_eq!(exact_mms(&inst).unwrap(), vec![Value::one(), Value::one()]);
        assert_three_quarters(&inst);
    }

    #[test]
    fn zero_share_agent_gets_nothing_needed() {
        let inst = Instance::new(
            2,
            vec![Valuation::additive_ints(&[0, 0]), Valuation::additive_ints(&[1, 1])],
        )
        .unwrap();
        // Agent 0 has MMS 0; agent 1 has MMS 1 over two parts.
        assert_three_quarters(&inst);
    }

    #[test]
    fn small_hand_instances() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![3, 2, 2, 1], vec![1, 2, 2, 3]],
            vec![vec![5, 5, 4, 3, 3, 2, 2], vec![1, 1, 1, 1, 1, 1, 1], vec![7, 1, 1, 3, 3, 2, 2]],
            vec![vec![6, 6, 4, 4, 3, 3, 2, 2], vec![6, 6, 4, 4, 3, 3, 2, 2], vec![6, 6, 4, 4, 3, 3, 2, 2]],
            vec![vec![4, 4, 4, 3, 3, 3, 2, 2, 2, 1], vec![1, 2, 3, 4, 4, 3, 2, 1, 3, 3], vec![9, 1, 1, 1, 1, 1, 1, 1, 1, 1], vec![2, 2, 2, 2, 2, 2, 2, 2, 2, 2]],
        ];
        for rows in cases {
            let m = rows[0].len();
            let inst = Instance::new(m, rows.iter().map(|r| Valuation::additive_ints(r)).collect()).unwrap();
            assert_three_quarters(&inst);
        }
    }

    fn rows(rows: &[&[i64]]) -> Instance {
        Instance::new(rows[0].len(), rows.iter().map(|r| Valuation::additive_ints(r)).collect()).unwrap()
    }

    #[test]
    fn flat_agent_lands_in_free_third_cluster() {
        assert_three_quarters(&rows(&[&[10; 10], &[16, 35, 32, 27, 26, 34, 32, 21, 22, 6]]));
    }

    #[test]
    fn borrower_takes_lender_bundle() {
        assert_three_quarters(&rows(&[&[10, 12, 10, 7, 11, 10, 9, 5, 10, 13], &[18, 29, 15, 15, 28, 29, 30, 28, 22, 33]]));
        assert_three_quarters(&rows(&[
            &[11, 10, 6, 10, 8, 10, 10, 10, 10, 10, 15, 10, 5],
            &[11, 10, 7, 10, 10, 10, 10, 10, 9, 8, 16, 10, 10],
            &[30, 34, 24, 27, 22, 40, 37, 2, 22, 12, 39, 21, 6],
        ]));
    }

    #[test]
    fn rejects_non_additive() {
        let inst = Instance::new(4, vec![Valuation::paper_f(4, 0), Valuation::paper_f(4, 1)]).unwrap();
        assert!(matches!(solve_threequarters(&inst), Err(Error::Unsupported(_))));
    }
}
