//! Seeded random instances. Every base value is an integer in `[0, 100]`.
//!
//! * `uniform-additive`: independent uniform values.
//! * `correlated-additive`: a common uniform base per item plus independent
//!   noise in `[-10, 10]` per agent, clamped to `[0, 100]`.
//! * `k-demand`: uniform values, `k` uniform in `[1, m]`.
//! * `budget-additive`: uniform values, budget uniform between `1/(2n)` and
//!   `1/n` of the agent's total.
//! * `coverage`: a universe of `m` elements with uniform weights; each item
//!   covers 1 to 3 uniformly chosen elements.
//! * `xos-clauses`: 1 to 5 clauses of uniform values.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::valuation::Valuation;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    UniformAdditive,
    CorrelatedAdditive,
    KDemand,
    BudgetAdditive,
    Coverage,
    XosClauses,
}

impl GenKind {
    pub const ALL: [GenKind; 6] = [
        GenKind::UniformAdditive,
        GenKind::CorrelatedAdditive,
        GenKind::KDemand,
        GenKind::BudgetAdditive,
        GenKind::Coverage,
        GenKind::XosClauses,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::UniformAdditive => "uniform-additive",
            GenKind::CorrelatedAdditive => "correlated-additive",
            GenKind::KDemand => "k-demand",
            GenKind::BudgetAdditive => "budget-additive",
            GenKind::Coverage => "coverage",
            GenKind::XosClauses => "xos-clauses",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GenKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown generator kind {s:?}")))
    }
}

fn ints(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    (0..len).map(|_| rng.gen_range(0..=100)).collect()
}

fn values(v: &[i64]) -> Vec<Value> {
    v.iter().map(|&x| Value::int(x)).collect()
}

/// A deterministic instance for `(kind, n, m, seed)`.
pub fn generate(kind: GenKind, n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(Error::Input("generators need n >= 1 and m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = ints(&mut rng, m);
    let valuations = (0..n)
        .map(|_| match kind {
            GenKind::UniformAdditive => Valuation::additive(values(&ints(&mut rng, m))),
            GenKind::CorrelatedAdditive => {
                let row: Vec<i64> = base.iter().map(|&b| (b + rng.gen_range(-10..=10)).clamp(0, 100)).collect();
                Valuation::additive(values(&row))
            }
            GenKind::KDemand => {
                let row = ints(&mut rng, m);
                Valuation::KDemand { values: values(&row), k: rng.gen_range(1..=m) }
            }
            GenKind::BudgetAdditive => {
                let row = ints(&mut rng, m);
                let total: i64 = row.iter().sum();
                let lo = total / (2 * n as i64);
                let hi = (total / n as i64).max(lo);
                Valuation::BudgetAdditive { values: values(&row), budget: Value::int(rng.gen_range(lo..=hi).max(1)) }
            }
            GenKind::Coverage => {
                let weights = values(&ints(&mut rng, m));
                let covers = (0..m)
                    .map(|_| {
                        let k = rng.gen_range(1..=3usize.min(m));
                        let mut c: Vec<usize> = (0..k).map(|_| rng.gen_range(0..m)).collect();
                        c.sort_unstable();
                        c.dedup();
                        c
                    })
                    .collect();
                Valuation::Coverage { weights, covers }
            }
            GenKind::XosClauses => {
                let c = rng.gen_range(1..=5);
                Valuation::XosExplicit { clauses: (0..c).map(|_| values(&ints(&mut rng, m))).collect() }
            }
        })
        .collect();
    Instance::new(m, valuations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Class;

    #[test]
    fn same_seed_same_json() {
        for kind in GenKind::ALL {
            let a = generate(kind, 3, 7, 42).unwrap().to_json();
            let b = generate(kind, 3, 7, 42).unwrap().to_json();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn uniform_is_additive() {
        let inst = generate(GenKind::UniformAdditive, 2, 6, 7).unwrap();
        for v in &inst.valuations {
            assert!(v.check_class(Class::Additive).unwrap());
        }
    }

    #[test]
    fn coverage_and_budget_are_submodular() {
        for seed in 0..5 {
            for kind in [GenKind::Coverage, GenKind::BudgetAdditive, GenKind::KDemand] {
                let inst = generate(kind, 2, 8, seed).unwrap();
                for v in &inst.valuations {
                    assert!(v.check_class(Class::Submodular).unwrap(), "{kind} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in GenKind::ALL {
            assert_eq!(kind.name().parse::<GenKind>().unwrap(), kind);
        }
        assert!("nope".parse::<GenKind>().is_err());
    }
}
