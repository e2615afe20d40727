//! Bounded-welfare local search shared by the submodular and XOS solvers.
//!
//! Values are measured in units of per-agent estimates `d_i`; the potential of
//! an allocation is `Σ_i min(cap, V_i(A_i) / d_i)`.

use std::collections::BTreeMap;

use crate::additive::assemble;
use crate::error::{Error, Result};
use crate::instance::{Allocation, Bundle, Instance, SubInstance};
use crate::reduction::reduce_singletons;
use crate::solver::Solved;
use crate::value::Value;

/// `Σ min(cap, v_k)` over a fixed list of slots, maintained incrementally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    cap: Value,
    terms: Vec<Value>,
    total: Value,
}

impl Potential {
    pub fn new(cap: Value, values: &[Value]) -> Self {
        let terms: Vec<Value> = values.iter().map(|v| Value::min_of(&cap, v)).collect();
        let total = terms.iter().sum();
        Potential { cap, terms, total }
    }

    /// Potential of `values` from scratch.
    pub fn evaluate(cap: &Value, values: &[Value]) -> Value {
        values.iter().map(|v| Value::min_of(cap, v)).sum()
    }

    pub fn cap(&self) -> &Value {
        &self.cap
    }

    pub fn value(&self) -> &Value {
        &self.total
    }

    pub fn term(&self, slot: usize) -> &Value {
        &self.terms[slot]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Change in potential if each `(slot, value)` took the new value.
    pub fn delta(&self, changes: &[(usize, &Value)]) -> Value {
        changes.iter().map(|&(k, v)| Value::min_of(&self.cap, v) - &self.terms[k]).sum()
    }

    pub fn apply(&mut self, changes: &[(usize, &Value)]) {
        for &(k, v) in changes {
            let t = Value::min_of(&self.cap, v);
            self.total += &t - &self.terms[k];
            self.terms[k] = t;
        }
    }
}

/// Agents whose share is zero under any subadditive valuation: fewer than
/// `n` items are individually worth anything to them.
pub fn zero_share(inst: &Instance, agent: usize) -> bool {
    (0..inst.m).filter(|&j| inst.item_value(agent, j).is_positive()).count() < inst.n
}

/// `V_i(M)` for agents with a positive share, 0 otherwise.
pub fn initial_estimates(inst: &Instance) -> Vec<Value> {
    (0..inst.n)
        .map(|i| if zero_share(inst, i) { Value::zero() } else { inst.value_of(i, &inst.items()) })
        .collect()
}

/// Outcome of a descent: the successful run and the estimates it used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descent {
    pub solved: Solved,
    pub estimates: Vec<Value>,
    /// Number of estimate reductions before the successful run.
    pub retries: usize,
}

/// Runs `run` from `V_i(M)` estimates, dividing the estimate of the agent
/// named by [`Error::EstimateTooHigh`] by `1 + 1/(10n)` until a run succeeds.
pub fn estimate_descent(inst: &Instance, run: impl FnMut(&[Value]) -> Result<Solved>) -> Result<Descent> {
    estimate_descent_from(inst, initial_estimates(inst), run)
}

pub fn estimate_descent_from(
    inst: &Instance,
    mut d: Vec<Value>,
    mut run: impl FnMut(&[Value]) -> Result<Solved>,
) -> Result<Descent> {
    if d.len() != inst.n {
        return Err(Error::Input(format!("expected {} estimates, got {}", inst.n, d.len())));
    }
    let factor = Value::one() + Value::ratio(1, 10 * inst.n as i64);
    let limit = 100_000 * inst.n;
    for retries in 0..=limit {
        match run(&d) {
            Ok(solved) => return Ok(Descent { solved, estimates: d, retries }),
            Err(Error::EstimateTooHigh { agent }) => d[agent] = &d[agent] / &factor,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Infeasible(format!("estimate descent did not settle after {limit} retries")))
}

/// A local-search state over the agents left after singleton reduction.
pub(crate) struct Search<'a> {
    inst: &'a Instance,
    d: &'a [Value],
    pub served: Vec<(usize, Bundle)>,
    pub agents: Vec<usize>,
    pub bundles: Vec<Bundle>,
    pub values: Vec<Value>,
    pub owner: BTreeMap<usize, usize>,
    pub potential: Potential,
    pub steps: usize,
    pub gains: Vec<Value>,
}

impl<'a> Search<'a> {
    /// Singleton reduction at `alpha` (in estimate units), then round-robin by
    /// item id over the remaining agents.
    pub fn start(inst: &'a Instance, d: &'a [Value], alpha: &Value, cap: Value) -> Result<Self> {
        Self::start_from(inst, d, alpha, cap, None)
    }

    /// As [`Search::start`], but remaining items stay with their owner in
    /// `init` when that owner is still live (else go to the first live agent).
    pub fn start_from(
        inst: &'a Instance,
        d: &'a [Value],
        alpha: &Value,
        cap: Value,
        init: Option<&Allocation>,
    ) -> Result<Self> {
        if let Some(a) = init {
            a.validate(inst.n, inst.m)?;
        }
        if d.len() != inst.n {
            return Err(Error::Input(format!("expected {} estimates, got {}", inst.n, d.len())));
        }
        if d.iter().any(|x| x.is_negative()) {
            return Err(Error::Input("negative estimate".into()));
        }
        let live: Vec<usize> = (0..inst.n).filter(|&i| d[i].is_positive()).collect();
        let red = reduce_singletons(inst, &SubInstance { agents: live, items: inst.items() }, alpha, d);
        let agents = red.remainder.agents;
        let mut bundles = vec![Bundle::empty(); agents.len()];
        if !agents.is_empty() {
            for (k, j) in red.remainder.items.iter().enumerate() {
                let slot = match init {
                    Some(a) => agents.iter().position(|&i| a.bundles[i].contains(j)).unwrap_or(0),
                    None => k % agents.len(),
                };
                bundles[slot].insert(j);
            }
        }
        let mut s = Search::with_bundles(inst, d, agents, bundles, cap);
        s.served = red.satisfied;
        Ok(s)
    }

    /// A state in which `agents[k]` holds `bundles[k]`; other items are out of play.
    pub fn with_bundles(inst: &'a Instance, d: &'a [Value], agents: Vec<usize>, bundles: Vec<Bundle>, cap: Value) -> Self {
        let mut owner = BTreeMap::new();
        for (k, b) in bundles.iter().enumerate() {
            for j in b.iter() {
                owner.insert(j, k);
            }
        }
        let mut s = Search {
            inst,
            d,
            served: Vec::new(),
            agents,
            bundles,
            values: Vec::new(),
            owner,
            potential: Potential::new(cap.clone(), &[]),
            steps: 0,
            gains: Vec::new(),
        };
        s.values = (0..s.agents.len()).map(|k| s.unit(s.agents[k], &s.bundles[k])).collect();
        s.potential = Potential::new(cap, &s.values);
        s
    }

    /// `V_a(b) / d_a`.
    pub fn unit(&self, agent: usize, b: &Bundle) -> Value {
        self.inst.value_of(agent, b) / &self.d[agent]
    }

    pub fn estimate(&self, agent: usize) -> &Value {
        &self.d[agent]
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    /// Slot with the lowest unit value, lowest agent id on ties.
    pub fn min_slot(&self) -> Option<usize> {
        (0..self.agents.len()).min_by(|&a, &b| self.values[a].cmp(&self.values[b]))
    }

    /// Potential change from moving `set` into `slot`, with the new values
    /// of every affected slot.
    pub fn preview(&self, slot: usize, set: &Bundle) -> (Value, Vec<(usize, Value)>) {
        let mut losers: BTreeMap<usize, Bundle> = BTreeMap::new();
        for j in set.iter() {
            if let Some(&k) = self.owner.get(&j) {
                if k != slot {
                    losers.entry(k).or_default().insert(j);
                }
            }
        }
        let mut changes = vec![(slot, self.unit(self.agents[slot], &self.bundles[slot].union(set)))];
        for (k, lost) in losers {
            changes.push((k, self.unit(self.agents[k], &self.bundles[k].difference(&lost))));
        }
        let refs: Vec<(usize, &Value)> = changes.iter().map(|(k, v)| (*k, v)).collect();
        (self.potential.delta(&refs), changes)
    }

    /// Applies a previewed move and checks the potential against a recomputation.
    pub fn commit(&mut self, slot: usize, set: &Bundle, gain: Value, changes: Vec<(usize, Value)>) -> Result<()> {
        for j in set.iter() {
            if let Some(k) = self.owner.insert(j, slot) {
                self.bundles[k].remove(j);
            }
        }
        self.bundles[slot] = self.bundles[slot].union(set);
        let refs: Vec<(usize, &Value)> = changes.iter().map(|(k, v)| (*k, v)).collect();
        self.potential.apply(&refs);
        for (k, v) in changes {
            self.values[k] = v;
        }
        let fresh = Potential::evaluate(self.potential.cap(), &self.values);
        if &fresh != self.potential.value() {
            return Err(Error::Guarantee(format!(
                "potential drifted: incremental {} vs recomputed {fresh}",
                self.potential.value()
            )));
        }
        self.steps += 1;
        self.gains.push(gain);
        Ok(())
    }

    pub fn finish(self) -> Solved {
        let mut served = self.served;
        served.extend(self.agents.into_iter().zip(self.bundles));
        Solved { allocation: assemble(self.inst.n, self.inst.m, &served), steps: self.steps, gains: self.gains }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    #[test]
    fn incremental_matches_recompute() {
        let cap = Value::ratio(2, 3);
        let mut vals = vec![Value::ratio(1, 2), Value::one(), Value::zero()];
        let mut p = Potential::new(cap.clone(), &vals);
        assert_eq!(p.value(), &Value::ratio(7, 6));
        let next = Value::ratio(1, 5);
        assert_eq!(p.delta(&[(1, &next)]), Value::ratio(1, 5) - Value::ratio(2, 3));
        p.apply(&[(1, &next)]);
        vals[1] = next;
        assert_eq!(p.value(), &Potential::evaluate(&cap, &vals));
    }

    #[test]
    fn zero_share_needs_n_positive_items() {
        let inst = Instance::new(3, vec![Valuation::additive_ints(&[1, 0, 5]), Valuation::additive_ints(&[1, 1, 0])])
            .unwrap();
        assert!(!zero_share(&inst, 0));
        assert!(!zero_share(&inst, 1));
        let inst = Instance::new(1, vec![Valuation::additive_ints(&[1]); 2]).unwrap();
        assert!(zero_share(&inst, 0));
        assert_eq!(initial_estimates(&inst), vec![Value::zero(), Value::zero()]);
    }

    #[test]
    fn exact_estimates_need_no_descent() {
        let inst = Instance::new(2, vec![Valuation::additive_ints(&[1, 1])]).unwrap();
        let d = estimate_descent(&inst, |d| {
            let s = Search::start(&inst, d, &Value::ratio(1, 3), Value::ratio(2, 3))?;
            Ok(s.finish())
        })
        .unwrap();
        assert_eq!(d.retries, 0);
        assert_eq!(d.solved.allocation.bundles, vec![Bundle::range(2)]);
    }

    #[test]
    fn descent_divides_the_named_agent() {
        let inst = Instance::new(2, vec![Valuation::additive_ints(&[1, 1]); 2]).unwrap();
        let mut calls = 0;
        let d = estimate_descent(&inst, |d| {
            calls += 1;
            if calls < 3 {
                Err(Error::EstimateTooHigh { agent: 1 })
            } else {
                Ok(Solved { allocation: Allocation::empty(2), steps: 0, gains: d.to_vec() })
            }
        })
        .unwrap();
        assert_eq!(d.retries, 2);
        let f = Value::ratio(21, 20);
        assert_eq!(d.estimates[1], Value::int(2) / (&f * &f));
        assert_eq!(d.estimates[0], Value::int(2));
    }
}
