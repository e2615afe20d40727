//! Upper-bound instances and an exhaustive best-allocation search.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Bundle, Instance};
use crate::mms::mms_exact;
use crate::valuation::Valuation;
use crate::value::Value;

/// Largest `n^m` that [`best_ratio`] will enumerate.
pub const BEST_RATIO_MAX_LEAVES: u128 = 50_000_000;
const BEST_RATIO_MAX_M: usize = 20;

/// `n − 1` agents with the pair function and one with it rotated by one item,
/// over `2n` items.
pub fn build_submodular_counterexample(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Input(format!("need n >= 2, got {n}")));
    }
    let m = 2 * n;
    let vals = (0..n).map(|i| Valuation::paper_f(m, usize::from(i == n - 1))).collect();
    Instance::new(m, vals)
}

/// One unit clause per matched pair (after rotating by `shift`): the value of
/// a set is the largest number of its items inside a single matched pair.
pub fn pair_clauses(m: usize, shift: usize) -> Valuation {
    let clauses = (0..m / 2)
        .map(|k| (0..m).map(|j| if (j + shift) % m / 2 == k { Value::one() } else { Value::zero() }).collect())
        .collect();
    Valuation::XosExplicit { clauses }
}

/// The XOS analogue of [`build_submodular_counterexample`] in clause form.
pub fn build_xos_counterexample(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Input(format!("need n >= 2, got {n}")));
    }
    let m = 2 * n;
    let vals = (0..n).map(|i| pair_clauses(m, usize::from(i == n - 1))).collect();
    Instance::new(m, vals)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub best_min_ratio: Value,
    pub witness: Allocation,
    pub mms: Vec<Value>,
}

struct Enum<'a> {
    tables: &'a [Vec<Value>],
    mms: &'a [Value],
    k: usize,
    stop: Option<&'a Value>,
    masks: Vec<usize>,
    best: Value,
    witness: Vec<usize>,
}

impl Enum<'_> {
    fn ratio(&self, i: usize, mask: usize) -> Value {
        if self.mms[i].is_zero() {
            Value::one()
        } else {
            &self.tables[i][mask] / &self.mms[i]
        }
    }

    fn done(&self) -> bool {
        self.stop.is_some_and(|t| !self.witness.is_empty() && self.best >= *t)
    }

    fn go(&mut self, j: usize) {
        let rest = ((1usize << self.k) - 1) & !((1usize << j) - 1);
        let bound = (0..self.masks.len()).map(|i| self.ratio(i, self.masks[i] | rest)).min().expect("agents");
        if !self.witness.is_empty() && bound <= self.best {
            return;
        }
        if self.stop.is_some_and(|t| bound < *t) {
            return;
        }
        if j == self.k {
            self.best = bound;
            self.witness = self.masks.clone();
            return;
        }
        for i in 0..self.masks.len() {
            self.masks[i] |= 1 << j;
            self.go(j + 1);
            self.masks[i] &= !(1 << j);
            if self.done() {
                return;
            }
        }
    }
}

/// Best minimum ratio over all ways of handing `items` to `agents`, each
/// agent's ratio taken against `mms[agent]`. With `stop`, returns the first
/// allocation reaching it and ignores allocations that cannot; `None` then
/// means nothing reaches it.
pub(crate) fn search_best(
    inst: &Instance,
    agents: &[usize],
    items: &[usize],
    mms: &[Value],
    stop: Option<&Value>,
) -> Result<Option<(Value, Vec<Bundle>)>> {
    if items.len() > BEST_RATIO_MAX_M {
        return Err(Error::Capacity(format!("{} items exceed the enumeration limit", items.len())));
    }
    if agents.is_empty() {
        return Ok(Some((Value::one(), Vec::new())));
    }
    let tables: Vec<Vec<Value>> = agents.iter().map(|&a| inst.valuations[a].subset_table(items)).collect();
    let shares: Vec<Value> = agents.iter().map(|&a| mms[a].clone()).collect();
    let mut e = Enum {
        tables: &tables,
        mms: &shares,
        k: items.len(),
        stop,
        masks: vec![0; agents.len()],
        best: Value::zero(),
        witness: Vec::new(),
    };
    e.go(0);
    if e.witness.is_empty() {
        return Ok(None);
    }
    let bundles = e
        .witness
        .iter()
        .map(|&mask| Bundle::new((0..items.len()).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect()))
        .collect();
    Ok(Some((e.best, bundles)))
}

/// The best minimum ratio `V_i(A_i) / MMS_i` over all allocations, with a
/// zero share counting as ratio 1.
pub fn best_ratio(inst: &Instance) -> Result<RatioReport> {
    let leaves = (inst.n as u128).checked_pow(inst.m as u32).unwrap_or(u128::MAX);
    if inst.m > BEST_RATIO_MAX_M || leaves > BEST_RATIO_MAX_LEAVES {
        return Err(Error::Capacity(format!("{}^{} allocations exceed the enumeration limit", inst.n, inst.m)));
    }
    let items = inst.items();
    let mms: Vec<Value> = inst
        .valuations
        .iter()
        .map(|v| mms_exact(v, inst.n, &items).map(|r| r.value))
        .collect::<Result<_>>()?;
    let agents: Vec<usize> = (0..inst.n).collect();
    let (best, bundles) = search_best(inst, &agents, items.items(), &mms, None)?.expect("some allocation exists");
    Ok(RatioReport { best_min_ratio: best, witness: Allocation { bundles }, mms })
}
