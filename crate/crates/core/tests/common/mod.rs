//! Exhaustive property checks shared by the lemma, oracle and acceptance
//! targets. Each check runs a fixed number of seeded cases and returns the
//! violations it found.

#![allow(dead_code)]

use mms_core::bipartite::{compute_f, maximum_matching, mcmwm, Matching, ValueGraph};
use mms_core::four::{core, prefix_between};
use mms_core::generate::{generate, GenKind};
use mms_core::mms::mms_exact;
use mms_core::{Bundle, Class, Instance, Valuation, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default)]
pub struct Check {
    pub cases: usize,
    pub violations: Vec<String>,
}

impl Check {
    fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn v(x: i64) -> Value {
    Value::int(x)
}

pub fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0usize..1 << items.len()).map(move |mask| (0..items.len()).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect())
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_side: usize, max_w: i64) -> ValueGraph {
    let nx = rng.gen_range(1..=max_side);
    let ny = rng.gen_range(1..=max_side);
    let density: f64 = rng.gen_range(0.2..0.9);
    let w = (0..nx).map(|_| (0..ny).map(|_| v(rng.gen_range(0..=max_w))).collect()).collect();
    let edge = (0..nx).map(|_| (0..ny).map(|_| rng.gen_bool(density)).collect()).collect();
    ValueGraph::with_edges((0..nx).map(|j| vec![j]).collect(), (0..ny).collect(), w, edge)
}

fn hall_surplus(g: &ValueGraph, xs: &[usize]) -> Option<Vec<usize>> {
    subsets(xs).skip(1).find(|t| g.neighbors(t).len() <= t.len())
}

/// Every subset `T` outside `F` has more neighbours than elements, `F` is
/// empty exactly when all of `X` has that property, and recomputing `F`
/// after removing `F` and its neighbours gives nothing.
pub fn check_rem(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let g = random_graph(&mut rng(seed), 7, 3);
        let all: Vec<usize> = (0..g.nx()).collect();
        let m = maximum_matching(&g);
        let f = compute_f(&g, &m, &all).unwrap();
        let outside: Vec<usize> = all.iter().copied().filter(|x| !f.contains(x)).collect();
        if let Some(t) = hall_surplus(&g, &outside) {
            c.fail(format!("seed {seed}: T = {t:?} outside F = {f:?} has |N(T)| <= |T|"));
        }
        if f.is_empty() != hall_surplus(&g, &all).is_none() {
            c.fail(format!("seed {seed}: F = {f:?} disagrees with the neighbourhood condition"));
        }
        let nf = g.neighbors(&f);
        let ys: Vec<usize> = (0..g.ny()).filter(|y| !nf.contains(y)).collect();
        let h = g.induced(&outside, &ys);
        let hx: Vec<usize> = (0..h.nx()).collect();
        for m2 in [maximum_matching(&h), mcmwm(&h)] {
            let f2 = compute_f(&h, &m2, &hx).unwrap();
            if !f2.is_empty() {
                c.fail(format!("seed {seed}: F of the reduced graph is {f2:?}"));
            }
        }
        c.cases += 1;
    }
    c
}

/// Winner, loser and unsaturated-item conditions of an MCMWM, over every
/// subset of matched agents.
pub fn check_wm(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let g = random_graph(&mut rng(1000 + seed), 7, 4);
        let m = mcmwm(&g);
        let x_of = |y: usize| m.partner_of_y(y).unwrap();
        let matched: Vec<usize> = m.pairs.iter().map(|p| p.1).collect();
        for t in subsets(&matched).skip(1) {
            let winner = t.iter().any(|&yj| {
                t.iter().all(|&yi| !g.has_edge(x_of(yi), yj) || g.weight(x_of(yj), yj) >= g.weight(x_of(yi), yj))
            });
            let loser = t.iter().any(|&yj| {
                t.iter().all(|&yi| !g.has_edge(x_of(yj), yi) || g.weight(x_of(yi), yi) >= g.weight(x_of(yj), yi))
            });
            if !winner || !loser {
                c.fail(format!("seed {seed}: T = {t:?} lacks a winner ({winner}) or loser ({loser})"));
            }
        }
        for &yi in &matched {
            for xj in (0..g.nx()).filter(|&x| m.partner_of_x(x).is_none()) {
                if g.has_edge(xj, yi) && g.weight(xj, yi) > g.weight(x_of(yi), yi) {
                    c.fail(format!("seed {seed}: agent {yi} prefers unsaturated {xj}"));
                }
            }
        }
        c.cases += 1;
    }
    c
}

fn brute_matching(g: &ValueGraph) -> (usize, Value) {
    fn go(g: &ValueGraph, x: usize, used: &mut Vec<bool>, card: usize, w: Value, best: &mut (usize, Value)) {
        if x == g.nx() {
            if card > best.0 || (card == best.0 && w > best.1) {
                *best = (card, w);
            }
            return;
        }
        go(g, x + 1, used, card, w.clone(), best);
        for y in 0..g.ny() {
            if g.has_edge(x, y) && !used[y] {
                used[y] = true;
                go(g, x + 1, used, card + 1, &w + g.weight(x, y), best);
                used[y] = false;
            }
        }
    }
    let mut best = (0, Value::zero());
    go(g, 0, &mut vec![false; g.ny()], 0, Value::zero(), &mut best);
    best
}

fn is_matching(g: &ValueGraph, m: &Matching) -> bool {
    let xs: std::collections::BTreeSet<usize> = m.pairs.iter().map(|p| p.0).collect();
    let ys: std::collections::BTreeSet<usize> = m.pairs.iter().map(|p| p.1).collect();
    xs.len() == m.len() && ys.len() == m.len() && m.pairs.iter().all(|&(x, y)| g.has_edge(x, y))
}

pub fn check_mcmwm(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let g = random_graph(&mut rng(2000 + seed), 6, 9);
        let m = mcmwm(&g);
        let want = brute_matching(&g);
        if !is_matching(&g, &m) || (m.len(), m.weight(&g)) != want {
            c.fail(format!("seed {seed}: mcmwm gives ({}, {}) but the best is {want:?}", m.len(), m.weight(&g)));
        }
        c.cases += 1;
    }
    c
}

fn random_clauses(rng: &mut ChaCha8Rng, m: usize, max_clauses: usize, max_v: i64) -> Valuation {
    let k = rng.gen_range(1..=max_clauses);
    Valuation::XosExplicit { clauses: (0..k).map(|_| (0..m).map(|_| v(rng.gen_range(0..=max_v))).collect()).collect() }
}

pub fn check_demand(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(3000 + seed);
        let m = r.gen_range(1..=8);
        let f = random_clauses(&mut r, m, 4, 10);
        let prices: Vec<Value> = (0..m).map(|_| Value::ratio(r.gen_range(0..=40), 4)).collect();
        let profit = |s: &[usize]| f.value(s) - s.iter().map(|&j| &prices[j]).sum::<Value>();
        let items: Vec<usize> = (0..m).collect();
        let best = subsets(&items).map(|s| profit(&s)).max().unwrap();
        let got = f.demand(&prices).unwrap();
        if profit(got.items()) != best {
            c.fail(format!("seed {seed}: demand {got:?} earns {} < {best}", profit(got.items())));
        }
        c.cases += 1;
    }
    c
}

fn brute_mms(f: &Valuation, r: usize, m: usize) -> Value {
    let mut best = Value::zero();
    let mut parts = vec![Vec::new(); r];
    fn go(f: &Valuation, j: usize, m: usize, parts: &mut Vec<Vec<usize>>, best: &mut Value) {
        if j == m {
            let worst = parts.iter().map(|p| f.value(p)).min().unwrap();
            if worst > *best {
                *best = worst;
            }
            return;
        }
        for k in 0..parts.len() {
            parts[k].push(j);
            go(f, j + 1, m, parts, best);
            parts[k].pop();
        }
    }
    go(f, 0, m, &mut parts, &mut best);
    best
}

pub fn check_mms(cases: u64) -> Check {
    let mut c = Check::default();
    let kinds = [GenKind::UniformAdditive, GenKind::Coverage, GenKind::BudgetAdditive, GenKind::XosClauses];
    for seed in 0..cases {
        let mut r = rng(4000 + seed);
        let m = r.gen_range(1..=7);
        let parts = r.gen_range(1..=3);
        let kind = kinds[seed as usize % kinds.len()];
        let f = generate(kind, 1, m, seed).unwrap().valuations.remove(0);
        let got = mms_exact(&f, parts, &Bundle::range(m)).unwrap();
        let want = brute_mms(&f, parts, m);
        let witness_ok = got.witness.len() == parts && got.witness.iter().all(|p| f.value(p.items()) >= got.value);
        if got.value != want || !witness_ok {
            c.fail(format!("seed {seed} {kind}: mms {} vs brute force {want}", got.value));
        }
        c.cases += 1;
    }
    c
}

/// Capping preserves submodularity, XOS and subadditivity, checked over
/// every pair of sets.
pub fn check_ceiling(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(5000 + seed);
        let m = r.gen_range(1..=6);
        let kind = [GenKind::Coverage, GenKind::BudgetAdditive, GenKind::KDemand, GenKind::XosClauses][seed as usize % 4];
        let f = generate(kind, 1, m, seed).unwrap().valuations.remove(0);
        let total = f.value(&(0..m).collect::<Vec<_>>());
        let cap = Value::ratio(r.gen_range(0..=120), 100) * &total;
        let g = f.clone().ceiling(cap.clone());
        let classes: &[Class] = if kind == GenKind::XosClauses {
            &[Class::Xos, Class::Subadditive]
        } else {
            &[Class::Submodular, Class::Subadditive]
        };
        for &class in classes {
            if f.check_class(class).unwrap() && !g.check_class(class).unwrap() {
                c.fail(format!("seed {seed} {kind}: cap {cap} breaks {class:?}"));
            }
        }
        c.cases += 1;
    }
    c
}

fn submodular_family(seed: u64, k: usize, m: usize) -> Vec<Valuation> {
    let kind = [GenKind::Coverage, GenKind::BudgetAdditive, GenKind::KDemand][seed as usize % 3];
    generate(kind, k, m, seed).unwrap().valuations
}

/// Removing a uniformly random element keeps at least a `(N−1)/N` fraction
/// of the summed values.
pub fn check_removal_average(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(6000 + seed);
        let m = r.gen_range(1..=8);
        let k = r.gen_range(1..=3);
        let fs = submodular_family(seed, k, m);
        let mut sets = vec![Vec::new(); k];
        for j in 0..m {
            let p = r.gen_range(0..=k);
            if p < k {
                sets[p].push(j);
            }
        }
        let union: Vec<usize> = sets.concat();
        if union.is_empty() {
            continue;
        }
        let whole: Value = fs.iter().zip(&sets).map(|(f, s)| f.value(s)).sum();
        let removed: Value = union
            .iter()
            .map(|&e| fs.iter().zip(&sets).map(|(f, s)| f.value(&without(s, e))).sum::<Value>())
            .sum();
        let n = v(union.len() as i64);
        if removed < whole * (&n - Value::one()) {
            c.fail(format!("seed {seed}: removal average below (N-1)/N"));
        }
        c.cases += 1;
    }
    c
}

fn without(s: &[usize], e: usize) -> Vec<usize> {
    s.iter().copied().filter(|&x| x != e).collect()
}

fn with(s: &[usize], e: usize) -> Vec<usize> {
    let mut t = s.to_vec();
    t.push(e);
    t
}

/// For every `S` worth less than a third, a random addition from outside `S`
/// gains at least `(2k/3) / |U \ S|` on average.
pub fn check_addition_average(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(7000 + seed);
        let m = r.gen_range(2..=8);
        let k = r.gen_range(1..=3.min(m));
        let f = submodular_family(seed, 1, m).remove(0);
        let mut sets = vec![Vec::new(); k];
        for j in 0..m {
            let p = if j < k { j } else { r.gen_range(0..=k) };
            if p < k {
                sets[p].push(j);
            }
        }
        let unit = sets.iter().map(|s| f.value(s)).min().unwrap();
        if !unit.is_positive() {
            continue;
        }
        let union: Vec<usize> = sets.concat();
        for s in subsets(&union) {
            let fs = f.value(&s);
            if fs * v(3) >= unit {
                continue;
            }
            let gain: Value = union.iter().filter(|e| !s.contains(e)).map(|&e| f.value(&with(&s, e)) - f.value(&s)).sum();
            if &gain * v(3) < v(2 * k as i64) * &unit {
                c.fail(format!("seed {seed}: S = {s:?} gains only {gain} in total"));
            }
        }
        c.cases += 1;
    }
    c
}

/// For an XOS `f` and any split of `S` into `k` parts,
/// `Σ (f(S) − f(S \ S_i)) ≤ f(S)`.
pub fn check_xos_split(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(8000 + seed);
        let m = r.gen_range(1..=7);
        let f = random_clauses(&mut r, m, 5, 9);
        let s: Vec<usize> = (0..m).filter(|_| r.gen_bool(0.7)).collect();
        let k: usize = r.gen_range(1..=3);
        let fs = f.value(&s);
        let total = k.pow(s.len() as u32);
        for code in 0..total {
            let mut parts = vec![Vec::new(); k];
            let mut x = code;
            for &j in &s {
                parts[x % k].push(j);
                x /= k;
            }
            let loss: Value = parts
                .iter()
                .map(|p| &fs - f.value(&s.iter().copied().filter(|j| !p.contains(j)).collect::<Vec<_>>()))
                .sum();
            if loss > fs {
                c.fail(format!("seed {seed}: split {parts:?} loses {loss} > {fs}"));
            }
        }
        c.cases += 1;
    }
    c
}

/// With every item worth less than a fifth of the share, the items split
/// into `2n` parts each worth two fifths of the share.
pub fn check_double_split(cases: u64) -> Check {
    let mut c = Check::default();
    let mut seed = 0;
    while (c.cases as u64) < cases {
        seed += 1;
        let mut r = rng(9000 + seed);
        let n = r.gen_range(1..=2);
        let m = r.gen_range(5 * n..=12);
        let f = if seed % 2 == 0 {
            Valuation::additive((0..m).map(|_| v(r.gen_range(5..=12))).collect())
        } else {
            random_clauses(&mut r, m, 3, 4)
        };
        let share = mms_exact(&f, n, &Bundle::range(m)).unwrap().value;
        if !share.is_positive() || (0..m).any(|j| f.value(&[j]) * v(5) >= share) {
            continue;
        }
        let double = mms_exact(&f, 2 * n, &Bundle::range(m)).unwrap().value;
        if double * v(5) < share * v(2) {
            c.fail(format!("seed {seed}: {}-way share below two fifths", 2 * n));
        }
        c.cases += 1;
    }
    c
}

/// Dropping one item and one part never lowers an additive share.
pub fn check_item_removal(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(10_000 + seed);
        let n = r.gen_range(2..=3);
        let m = r.gen_range(n..=9);
        let f = Valuation::additive((0..m).map(|_| v(r.gen_range(0..=20))).collect());
        let share = mms_exact(&f, n, &Bundle::range(m)).unwrap().value;
        for j in 0..m {
            let rest = Bundle::new(without(&(0..m).collect::<Vec<_>>(), j));
            if mms_exact(&f, n - 1, &rest).unwrap().value < share {
                c.fail(format!("seed {seed}: removing item {j} lowers the share"));
            }
        }
        c.cases += 1;
    }
    c
}

fn one_agent(values: &[i64]) -> Instance {
    Instance::new(values.len(), vec![Valuation::additive_ints(values)]).unwrap()
}

/// The prefix worth at least `v` is worth less than `2v` when every item is
/// worth at most `v`.
pub fn check_prefix(cases: u64) -> Check {
    let mut c = Check::default();
    for seed in 0..cases {
        let mut r = rng(11_000 + seed);
        let target = r.gen_range(1..=20);
        let m = r.gen_range(1..=10);
        let values: Vec<i64> = (0..m).map(|_| r.gen_range(0..=target)).collect();
        let inst = one_agent(&values);
        let items: Vec<usize> = (0..m).collect();
        let got = prefix_between(&inst, &[Value::one()], 0, &items, &v(target)).unwrap();
        let total: i64 = values.iter().sum();
        match got {
            Some(b) => {
                let val: i64 = b.iter().map(|j| values[j]).sum();
                if val < target || val >= 2 * target || b.items() != &items[..b.len()] {
                    c.fail(format!("seed {seed}: prefix {b:?} worth {val} for target {target}"));
                }
            }
            None if total >= target => c.fail(format!("seed {seed}: no prefix though the total is {total}")),
            None => {}
        }
        c.cases += 1;
    }
    c
}

/// Cores: minimal, every item above the excess, and below 8/5 when every
/// item is below 4/5.
pub fn check_core(cases: u64) -> Check {
    let mut c = Check::default();
    let ff = Value::ratio(4, 5);
    for seed in 0..cases {
        let mut r = rng(12_000 + seed);
        let m = r.gen_range(1..=10);
        let values: Vec<i64> = (0..m).map(|_| r.gen_range(0..=90)).collect();
        let inst = one_agent(&values);
        let share = [v(100)];
        let b = Bundle::range(m);
        let unit = |s: &[usize]| s.iter().map(|&j| v(values[j])).sum::<Value>() / v(100);
        if unit(b.items()) < ff {
            if core(&inst, &share, 0, &b).is_ok() {
                c.fail(format!("seed {seed}: core of a light bundle"));
            }
            continue;
        }
        let cb = match core(&inst, &share, 0, &b) {
            Ok(cb) => cb,
            Err(e) => {
                c.fail(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let k = cb.core.items();
        let vc = unit(k);
        let least = k.iter().copied().min_by_key(|&j| (values[j], j)).unwrap();
        let excess = &vc - &ff;
        if vc < ff || unit(&without(k, least)) >= ff || k.iter().any(|&j| unit(&[j]) <= excess) {
            c.fail(format!("seed {seed}: core {k:?} is not minimal or has a light item"));
        }
        if values.iter().all(|&x| x < 80) && vc >= Value::ratio(8, 5) {
            c.fail(format!("seed {seed}: core worth {vc}"));
        }
        c.cases += 1;
    }
    c
}
