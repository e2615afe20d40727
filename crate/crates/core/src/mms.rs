//! Maximin shares: exact branch-and-bound, a certified lower bound, and scaling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::instance::{Bundle, Instance};
use crate::valuation::Valuation;
use crate::value::Value;

pub const ADDITIVE_MAX_ITEMS: usize = 18;
pub const ADDITIVE_MAX_PARTS: usize = 5;
pub const ORACLE_MAX_ITEMS: usize = 12;
pub const ORACLE_MAX_PARTS: usize = 4;

/// A maximin share together with a partition attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmsResult {
    pub value: Value,
    pub witness: Vec<Bundle>,
}

/// Exact `max over r-partitions of items, min part value`.
///
/// When `r > |items|` some part is empty and the share is 0.
pub fn mms_exact(valuation: &Valuation, r: usize, items: &Bundle) -> Result<MmsResult> {
    if r == 0 {
        return Err(Error::Input("part count must be at least 1".into()));
    }
    let m = valuation.ground_size();
    if let Some(bad) = items.iter().find(|&j| j >= m) {
        return Err(Error::Input(format!("item {bad} outside ground set of size {m}")));
    }
    if r > items.len() {
        let mut witness: Vec<Bundle> = items.iter().map(|j| Bundle::new(vec![j])).collect();
        witness.resize(r, Bundle::empty());
        return Ok(MmsResult { value: Value::zero(), witness });
    }
    if r == 1 {
        return Ok(MmsResult { value: valuation.value(items.items()), witness: vec![items.clone()] });
    }
    let result = match valuation.additive_values() {
        Some(values) => {
            if items.len() > ADDITIVE_MAX_ITEMS || r > ADDITIVE_MAX_PARTS {
                return Err(Error::Capacity(format!(
                    "exact additive MMS supports at most {ADDITIVE_MAX_ITEMS} items and {ADDITIVE_MAX_PARTS} parts"
                )));
            }
            let vals: Vec<Value> = items.iter().map(|j| values[j].clone()).collect();
            additive_mms(&vals, r, items)
        }
        None => {
            if items.len() > ORACLE_MAX_ITEMS || r > ORACLE_MAX_PARTS {
                return Err(Error::Capacity(format!(
                    "exact MMS for this valuation kind supports at most {ORACLE_MAX_ITEMS} items and {ORACLE_MAX_PARTS} parts"
                )));
            }
            oracle_mms(valuation, r, items)
        }
    };
    Ok(result)
}

/// Exact MMS of every agent of `inst` over all items with `r` parts.
pub fn mms_all(inst: &Instance, r: usize) -> Result<Vec<MmsResult>> {
    let items = inst.items();
    inst.valuations.iter().map(|v| mms_exact(v, r, &items)).collect()
}

/// Values over a common denominator as integers.
fn integerize(values: &[Value]) -> (Vec<BigInt>, BigInt) {
    let mut l = BigInt::one();
    for v in values {
        l = l.lcm(v.denom());
    }
    (values.iter().map(|v| v.numer() * (&l / v.denom())).collect(), l)
}

fn as_i128(xs: &[BigInt]) -> Option<Vec<i128>> {
    let total: BigInt = xs.iter().sum();
    if total.to_i128().is_some_and(|t| t < i128::MAX / 4) {
        xs.iter().map(|x| x.to_i128()).collect()
    } else {
        None
    }
}

trait Scalar:
    Clone + Ord + Zero + for<'a> std::ops::Add<&'a Self, Output = Self> + for<'a> std::ops::Sub<&'a Self, Output = Self>
{
    fn div_floor_by(&self, by: usize) -> Self;
}

impl Scalar for i128 {
    fn div_floor_by(&self, by: usize) -> Self {
        self.div_euclid(by as i128)
    }
}

impl Scalar for BigInt {
    fn div_floor_by(&self, by: usize) -> Self {
        self.div_floor(&BigInt::from(by))
    }
}

pub(crate) fn additive_mms(vals: &[Value], r: usize, items: &Bundle) -> MmsResult {
    let (ints, _) = integerize(vals);
    let assign = match as_i128(&ints) {
        Some(small) => additive_bb(&small, r),
        None => additive_bb(&ints, r),
    };
    let witness = canonical_parts(items, &assign, r);
    let value = witness
        .iter()
        .map(|p| p.iter().map(|j| vals[items.items().binary_search(&j).unwrap()].clone()).sum::<Value>())
        .min()
        .unwrap();
    MmsResult { value, witness }
}

/// Branch and bound over item-to-part assignments; returns the part index of
/// each input position in an optimal partition.
fn additive_bb<T: Scalar>(vals: &[T], r: usize) -> Vec<usize> {
    let k = vals.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| vals[b].cmp(&vals[a]).then(a.cmp(&b)));
    let sorted: Vec<T> = order.iter().map(|&i| vals[i].clone()).collect();
    let mut suffix = vec![T::zero(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1].clone() + &sorted[i];
    }

    // Greedy incumbent: each item to the currently poorest part.
    let mut sums = vec![T::zero(); r];
    let mut inc_assign = vec![0usize; k];
    for (pos, v) in sorted.iter().enumerate() {
        let p = (0..r).min_by(|&a, &b| sums[a].cmp(&sums[b]).then(a.cmp(&b))).unwrap();
        sums[p] = sums[p].clone() + v;
        inc_assign[pos] = p;
    }
    let mut state = Bb {
        sorted: &sorted,
        suffix: &suffix,
        r,
        best: sums.iter().min().unwrap().clone(),
        best_assign: inc_assign,
        cur: vec![0; k],
        sums: vec![T::zero(); r],
        global_ub: water_level(&vec![T::zero(); r], &suffix[0]),
    };
    if state.best < state.global_ub {
        state.dfs(0, 0);
    }
    let mut assign = vec![0usize; k];
    for (pos, &orig) in order.iter().enumerate() {
        assign[orig] = state.best_assign[pos];
    }
    assign
}

struct Bb<'a, T> {
    sorted: &'a [T],
    suffix: &'a [T],
    r: usize,
    best: T,
    best_assign: Vec<usize>,
    cur: Vec<usize>,
    sums: Vec<T>,
    global_ub: T,
}

impl<T: Scalar> Bb<'_, T> {
    fn dfs(&mut self, pos: usize, used: usize) {
        if pos == self.sorted.len() {
            let lo = self.sums.iter().min().unwrap().clone();
            if lo > self.best {
                self.best = lo;
                self.best_assign = self.cur.clone();
            }
            return;
        }
        if water_level(&self.sums, &self.suffix[pos]) <= self.best {
            return;
        }
        let limit = (used + 1).min(self.r);
        for p in 0..limit {
            let v = self.sorted[pos].clone();
            self.sums[p] = self.sums[p].clone() + &v;
            self.cur[pos] = p;
            self.dfs(pos + 1, used.max(p + 1));
            self.sums[p] = self.sums[p].clone() - &v;
            if self.best >= self.global_ub {
                return;
            }
        }
    }
}

/// Largest achievable minimum if `rest` could be split fractionally over `sums`.
fn water_level<T: Scalar>(sums: &[T], rest: &T) -> T {
    let mut s: Vec<T> = sums.to_vec();
    s.sort();
    let mut budget = rest.clone();
    let mut level = s[0].clone();
    let mut count = 1usize;
    while count <= s.len() {
        // Raise the lowest `count` parts toward the next one.
        let next = if count < s.len() { Some(s[count].clone()) } else { None };
        match next {
            Some(nx) => {
                let mut need = T::zero();
                for _ in 0..count {
                    need = need + &(nx.clone() - &level);
                }
                if need <= budget {
                    budget = budget - &need;
                    level = nx;
                    count += 1;
                } else {
                    return level + &budget.div_floor_by(count);
                }
            }
            None => return level + &budget.div_floor_by(count),
        }
    }
    level
}

/// Parts listed in order of their smallest item id.
fn canonical_parts(items: &Bundle, assign: &[usize], r: usize) -> Vec<Bundle> {
    let mut parts = vec![Vec::new(); r];
    for (pos, j) in items.iter().enumerate() {
        parts[assign[pos]].push(j);
    }
    let mut parts: Vec<Bundle> = parts.into_iter().map(Bundle::new).collect();
    parts.sort_by_key(|p| p.items().first().copied().unwrap_or(usize::MAX));
    parts
}

fn oracle_mms(valuation: &Valuation, r: usize, items: &Bundle) -> MmsResult {
    let k = items.len();
    let table = valuation.subset_table(items.items());
    let (ints, _) = integerize(&table);
    let assign = match as_i128(&ints) {
        Some(small) => table_bb(&small, k, r),
        None => table_bb(&ints, k, r),
    };
    let witness = canonical_parts(items, &assign, r);
    let value = witness.iter().map(|p| valuation.value(p.items())).min().unwrap();
    MmsResult { value, witness }
}

fn table_bb<T: Scalar>(table: &[T], k: usize, r: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| table[1 << b].cmp(&table[1 << a]).then(a.cmp(&b)));
    let full = (1usize << k) - 1;

    let mut masks = vec![0usize; r];
    let mut assign = vec![0usize; k];
    for &i in &order {
        let p = (0..r).min_by(|&a, &b| table[masks[a]].cmp(&table[masks[b]]).then(a.cmp(&b))).unwrap();
        masks[p] |= 1 << i;
        assign[i] = p;
    }
    let best = masks.iter().map(|&mk| table[mk].clone()).min().unwrap();
    let mut st = TableBb {
        table,
        order: &order,
        r,
        best,
        best_assign: assign,
        cur: vec![0; k],
        masks: vec![0; r],
    };
    st.dfs(0, 0, full);
    st.best_assign
}

struct TableBb<'a, T> {
    table: &'a [T],
    order: &'a [usize],
    r: usize,
    best: T,
    best_assign: Vec<usize>,
    cur: Vec<usize>,
    masks: Vec<usize>,
}

impl<T: Scalar> TableBb<'_, T> {
    fn dfs(&mut self, pos: usize, used: usize, rest: usize) {
        if pos == self.order.len() {
            let lo = self.masks.iter().map(|&mk| &self.table[mk]).min().unwrap().clone();
            if lo > self.best {
                self.best = lo;
                self.best_assign = self.cur.clone();
            }
            return;
        }
        // Each part can at most absorb everything still unassigned.
        let ub = self.masks.iter().map(|&mk| &self.table[mk | rest]).min().unwrap();
        if *ub <= self.best {
            return;
        }
        let item = self.order[pos];
        let limit = (used + 1).min(self.r);
        for p in 0..limit {
            self.masks[p] |= 1 << item;
            self.cur[item] = p;
            self.dfs(pos + 1, used.max(p + 1), rest & !(1 << item));
            self.masks[p] &= !(1 << item);
        }
    }
}

/// Certified lower bound on the additive MMS: a partition whose minimum part is
/// returned as the value. Falls back to the exact solver within its capacity.
pub fn mms_additive_lb(values: &[Value], r: usize, eps: &Value) -> Result<MmsResult> {
    if r == 0 {
        return Err(Error::Input("part count must be at least 1".into()));
    }
    if !eps.is_positive() || *eps >= Value::one() {
        return Err(Error::Input("eps must lie in (0, 1)".into()));
    }
    let items = Bundle::range(values.len());
    if values.len() <= ADDITIVE_MAX_ITEMS && r <= ADDITIVE_MAX_PARTS {
        return mms_exact(&Valuation::additive(values.to_vec()), r, &items);
    }
    if r > values.len() {
        return mms_exact(&Valuation::additive(values.to_vec()), r, &items);
    }
    let (ints, _) = integerize(values);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| ints[b].cmp(&ints[a]).then(a.cmp(&b)));

    let mut best = lpt(&ints, &order, r);
    let total: BigInt = ints.iter().sum();
    let mut lo = min_part(&ints, &best);
    let mut hi = &total / BigInt::from(r);
    let eps_num = eps.numer().clone();
    let eps_den = eps.denom().clone();
    // Stop once hi - lo <= eps * hi.
    while &hi - &lo > BigInt::zero() && (&hi - &lo) * &eps_den > &eps_num * &hi {
        let mid = (&lo + &hi + BigInt::one()) / BigInt::from(2);
        match cover(&ints, &order, r, &mid) {
            Some(parts) => {
                let got = min_part(&ints, &parts);
                if got > min_part(&ints, &best) {
                    best = parts;
                }
                lo = got.max(mid);
            }
            None => hi = mid - BigInt::one(),
        }
    }
    let witness: Vec<Bundle> = {
        let mut ws: Vec<Bundle> = best.into_iter().map(Bundle::new).collect();
        ws.sort_by_key(|p| p.items().first().copied().unwrap_or(usize::MAX));
        ws
    };
    let value = witness.iter().map(|p| p.iter().map(|j| values[j].clone()).sum::<Value>()).min().unwrap();
    Ok(MmsResult { value, witness })
}

fn min_part(ints: &[BigInt], parts: &[Vec<usize>]) -> BigInt {
    parts.iter().map(|p| p.iter().map(|&j| &ints[j]).sum::<BigInt>()).min().unwrap()
}

fn lpt(ints: &[BigInt], order: &[usize], r: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); r];
    let mut sums = vec![BigInt::zero(); r];
    for &j in order {
        let p = (0..r).min_by(|&a, &b| sums[a].cmp(&sums[b]).then(a.cmp(&b))).unwrap();
        sums[p] += &ints[j];
        parts[p].push(j);
    }
    parts
}

/// Fill `r` bins to at least `target` one at a time: open with the largest
/// remaining item, then best-fit below the gap, overshooting with the smallest
/// item only when nothing fits. Leftovers go to the poorest bin.
fn cover(ints: &[BigInt], order: &[usize], r: usize, target: &BigInt) -> Option<Vec<Vec<usize>>> {
    let mut remaining: Vec<usize> = order.to_vec();
    let mut parts = Vec::with_capacity(r);
    for _ in 0..r {
        if remaining.is_empty() {
            return None;
        }
        let mut part = vec![remaining.remove(0)];
        let mut sum = ints[part[0]].clone();
        while &sum < target {
            if remaining.is_empty() {
                return None;
            }
            let gap = target - &sum;
            let pick = remaining.iter().position(|&j| ints[j] <= gap).unwrap_or(remaining.len() - 1);
            let j = remaining.remove(pick);
            sum += &ints[j];
            part.push(j);
        }
        parts.push(part);
    }
    for j in remaining {
        let p = (0..r)
            .min_by(|&a, &b| {
                let sa: BigInt = parts[a].iter().map(|&x| &ints[x]).sum();
                let sb: BigInt = parts[b].iter().map(|&x| &ints[x]).sum();
                sa.cmp(&sb).then(a.cmp(&b))
            })
            .unwrap();
        parts[p].push(j);
    }
    Some(parts)
}

/// Rescales every agent so that its supplied MMS becomes 1.
pub fn scale_to_unit(inst: &Instance, mms: &[Value]) -> Result<Instance> {
    if mms.len() != inst.n {
        return Err(Error::Input(format!("expected {} MMS values, found {}", inst.n, mms.len())));
    }
    if let Some(i) = mms.iter().position(|v| !v.is_positive()) {
        return Err(Error::Degenerate(format!("agent {i} has MMS 0")));
    }
    let valuations = inst.valuations.iter().zip(mms).map(|(v, d)| v.scaled(&d.recip())).collect();
    Instance::new(inst.m, valuations)
}
