//! Valuation families, the query/demand/XOS oracles and exhaustive class checks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Bundle;
use crate::value::Value;

/// Largest ground set for exhaustive class checks.
pub const CHECK_CLASS_MAX_M: usize = 12;
/// Largest ground set for a tabulated valuation.
pub const TABULATED_MAX_M: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Valuation {
    Additive {
        values: Vec<Value>,
    },
    /// Sum of the `k` most valuable items of the set.
    KDemand {
        values: Vec<Value>,
        k: usize,
    },
    /// `min(budget, additive sum)`.
    BudgetAdditive {
        values: Vec<Value>,
        budget: Value,
    },
    /// Weight of the union of the universe elements covered by the items.
    Coverage {
        weights: Vec<Value>,
        covers: Vec<Vec<usize>>,
    },
    /// Maximum over additive clauses.
    XosExplicit {
        clauses: Vec<Vec<Value>>,
    },
    /// Full value table indexed by bitmask (bit j set = item j present).
    Tabulated {
        table: Vec<Value>,
    },
    /// Pair-structured submodular function: singletons 1, matched pairs
    /// `{2i, 2i+1}` (after rotating item ids by `shift`) and sets of size > 2
    /// worth 2, any other pair 3/2.
    PaperF {
        shift: usize,
        #[serde(skip)]
        m: usize,
    },
    /// Same as [`Valuation::PaperF`] but unmatched pairs are worth 1.
    PaperG {
        shift: usize,
        #[serde(skip)]
        m: usize,
    },
    /// `min(cap, inner)`.
    Ceiling {
        cap: Value,
        inner: Box<Valuation>,
    },
    /// `factor * inner`.
    Scaled {
        factor: Value,
        inner: Box<Valuation>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Monotone,
    Additive,
    Submodular,
    Xos,
    Subadditive,
}

impl std::str::FromStr for Class {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "monotone" => Class::Monotone,
            "additive" => Class::Additive,
            "submodular" => Class::Submodular,
            "xos" => Class::Xos,
            "subadditive" => Class::Subadditive,
            _ => return Err(Error::Input(format!("unknown class {s:?}"))),
        })
    }
}

fn pair_value(m: usize, shift: usize, items: &[usize], unmatched: Value) -> Value {
    match items.len() {
        0 => Value::zero(),
        1 => Value::one(),
        2 => {
            let a = (items[0] + shift) % m;
            let b = (items[1] + shift) % m;
            if a / 2 == b / 2 {
                Value::int(2)
            } else {
                unmatched
            }
        }
        _ => Value::int(2),
    }
}

impl Valuation {
    pub fn additive(values: Vec<Value>) -> Self {
        Valuation::Additive { values }
    }

    pub fn additive_ints(values: &[i64]) -> Self {
        Valuation::Additive { values: values.iter().map(|&v| Value::int(v)).collect() }
    }

    pub fn paper_f(m: usize, shift: usize) -> Self {
        Valuation::PaperF { shift, m }
    }

    pub fn paper_g(m: usize, shift: usize) -> Self {
        Valuation::PaperG { shift, m }
    }

    /// The ceiling function `min(cap, self)`.
    pub fn ceiling(self, cap: Value) -> Self {
        Valuation::Ceiling { cap, inner: Box::new(self) }
    }

    /// `factor * self`, folded into the representation where the kind allows it.
    pub fn scaled(&self, factor: &Value) -> Self {
        let mul = |vs: &[Value]| vs.iter().map(|v| v * factor).collect::<Vec<_>>();
        match self {
            Valuation::Additive { values } => Valuation::Additive { values: mul(values) },
            Valuation::KDemand { values, k } => Valuation::KDemand { values: mul(values), k: *k },
            Valuation::BudgetAdditive { values, budget } => {
                Valuation::BudgetAdditive { values: mul(values), budget: budget * factor }
            }
            Valuation::Coverage { weights, covers } => {
                Valuation::Coverage { weights: mul(weights), covers: covers.clone() }
            }
            Valuation::XosExplicit { clauses } => {
                Valuation::XosExplicit { clauses: clauses.iter().map(|c| mul(c)).collect() }
            }
            Valuation::Tabulated { table } => Valuation::Tabulated { table: mul(table) },
            Valuation::Ceiling { cap, inner } => {
                Valuation::Ceiling { cap: cap * factor, inner: Box::new(inner.scaled(factor)) }
            }
            Valuation::Scaled { factor: f0, inner } => {
                Valuation::Scaled { factor: f0 * factor, inner: inner.clone() }
            }
            Valuation::PaperF { .. } | Valuation::PaperG { .. } => {
                Valuation::Scaled { factor: factor.clone(), inner: Box::new(self.clone()) }
            }
        }
    }

    pub(crate) fn bind_ground(&mut self, m: usize) {
        match self {
            Valuation::PaperF { m: mm, .. } | Valuation::PaperG { m: mm, .. } => *mm = m,
            Valuation::Ceiling { inner, .. } | Valuation::Scaled { inner, .. } => inner.bind_ground(m),
            _ => {}
        }
    }

    /// Ground-set size implied by the representation.
    pub fn ground_size(&self) -> usize {
        match self {
            Valuation::Additive { values }
            | Valuation::KDemand { values, .. }
            | Valuation::BudgetAdditive { values, .. } => values.len(),
            Valuation::Coverage { covers, .. } => covers.len(),
            Valuation::XosExplicit { clauses } => clauses.first().map_or(0, |c| c.len()),
            Valuation::Tabulated { table } => table.len().trailing_zeros() as usize,
            Valuation::PaperF { m, .. } | Valuation::PaperG { m, .. } => *m,
            Valuation::Ceiling { inner, .. } | Valuation::Scaled { inner, .. } => inner.ground_size(),
        }
    }

    /// Structural checks against a ground set of `m` items.
    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        let nonneg = |vs: &[Value], what: &str| -> Result<()> {
            if vs.iter().any(|v| v.is_negative()) {
                Err(Error::Input(format!("negative {what}")))
            } else {
                Ok(())
            }
        };
        let len = |vs: &[Value]| -> Result<()> {
            if vs.len() != m {
                Err(Error::Input(format!("expected {m} item values, found {}", vs.len())))
            } else {
                Ok(())
            }
        };
        match self {
            Valuation::Additive { values } => {
                len(values)?;
                nonneg(values, "value")
            }
            Valuation::KDemand { values, .. } => {
                len(values)?;
                nonneg(values, "value")
            }
            Valuation::BudgetAdditive { values, budget } => {
                len(values)?;
                nonneg(values, "value")?;
                nonneg(std::slice::from_ref(budget), "budget")
            }
            Valuation::Coverage { weights, covers } => {
                nonneg(weights, "weight")?;
                if covers.len() != m {
                    return bad(format!("expected {m} cover sets, found {}", covers.len()));
                }
                if covers.iter().flatten().any(|&e| e >= weights.len()) {
                    return bad("cover references an element outside the universe".into());
                }
                Ok(())
            }
            Valuation::XosExplicit { clauses } => {
                if clauses.is_empty() {
                    return bad("xos-explicit needs at least one clause".into());
                }
                for c in clauses {
                    len(c)?;
                    nonneg(c, "clause value")?;
                }
                Ok(())
            }
            Valuation::Tabulated { table } => {
                if m > TABULATED_MAX_M {
                    return Err(Error::Capacity(format!("tabulated valuation needs m <= {TABULATED_MAX_M}")));
                }
                if table.len() != 1 << m {
                    return bad(format!("table needs {} entries, found {}", 1usize << m, table.len()));
                }
                nonneg(table, "table entry")?;
                if !table[0].is_zero() {
                    return bad("table entry for the empty set must be 0".into());
                }
                Ok(())
            }
            Valuation::PaperF { .. } | Valuation::PaperG { .. } => {
                if !m.is_multiple_of(2) {
                    return bad("pair-structured valuation needs an even item count".into());
                }
                Ok(())
            }
            Valuation::Ceiling { cap, inner } => {
                nonneg(std::slice::from_ref(cap), "cap")?;
                inner.validate(m)
            }
            Valuation::Scaled { factor, inner } => {
                if !factor.is_positive() {
                    return bad("scale factor must be positive".into());
                }
                inner.validate(m)
            }
        }
    }

    /// Value of a duplicate-free item list whose ids are in range.
    pub fn value(&self, items: &[usize]) -> Value {
        match self {
            Valuation::Additive { values } => items.iter().map(|&j| &values[j]).sum(),
            Valuation::KDemand { values, k } => {
                let mut vs: Vec<&Value> = items.iter().map(|&j| &values[j]).collect();
                vs.sort_unstable_by(|a, b| b.cmp(a));
                vs.into_iter().take(*k).sum()
            }
            Valuation::BudgetAdditive { values, budget } => {
                let s: Value = items.iter().map(|&j| &values[j]).sum();
                Value::min_of(&s, budget)
            }
            Valuation::Coverage { weights, covers } => {
                let mut seen = vec![false; weights.len()];
                let mut total = Value::zero();
                for &j in items {
                    for &e in &covers[j] {
                        if !seen[e] {
                            seen[e] = true;
                            total += &weights[e];
                        }
                    }
                }
                total
            }
            Valuation::XosExplicit { clauses } => clauses
                .iter()
                .map(|c| items.iter().map(|&j| &c[j]).sum::<Value>())
                .max()
                .unwrap_or_else(Value::zero),
            Valuation::Tabulated { table } => {
                let mask = items.iter().fold(0usize, |acc, &j| acc | 1 << j);
                table[mask].clone()
            }
            Valuation::PaperF { shift, m } => pair_value(*m, *shift, items, Value::ratio(3, 2)),
            Valuation::PaperG { shift, m } => pair_value(*m, *shift, items, Value::one()),
            Valuation::Ceiling { cap, inner } => Value::min_of(cap, &inner.value(items)),
            Valuation::Scaled { factor, inner } => factor * inner.value(items),
        }
    }

    /// Checked evaluation of a bundle.
    pub fn eval(&self, bundle: &Bundle) -> Result<Value> {
        let m = self.ground_size();
        if let Some(bad) = bundle.iter().find(|&j| j >= m) {
            return Err(Error::Input(format!("item {bad} outside ground set of size {m}")));
        }
        Ok(self.value(bundle.items()))
    }

    /// Per-item values when the valuation is additive by representation.
    pub fn additive_values(&self) -> Option<Vec<Value>> {
        match self {
            Valuation::Additive { values } => Some(values.clone()),
            Valuation::XosExplicit { clauses } if clauses.len() == 1 => Some(clauses[0].clone()),
            Valuation::Scaled { factor, inner } => {
                inner.additive_values().map(|vs| vs.iter().map(|v| v * factor).collect())
            }
            _ => None,
        }
    }

    /// Additive clauses whose pointwise maximum is this valuation, when known by
    /// representation.
    pub fn clauses(&self) -> Option<Vec<Vec<Value>>> {
        match self {
            Valuation::Additive { values } => Some(vec![values.clone()]),
            Valuation::XosExplicit { clauses } => Some(clauses.clone()),
            Valuation::Scaled { factor, inner } => inner
                .clauses()
                .map(|cs| cs.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect()),
            _ => None,
        }
    }

    /// Bundle maximizing `value(S) − Σ_{e∈S} prices[e]`.
    ///
    /// Each clause selects the items whose clause value strictly exceeds the
    /// price; the best clause wins, ties going to the lowest clause index.
    pub fn demand(&self, prices: &[Value]) -> Result<Bundle> {
        let clauses = self
            .clauses()
            .ok_or_else(|| Error::Unsupported("demand oracle needs an additive or xos-explicit valuation".into()))?;
        let m = self.ground_size();
        if prices.len() != m {
            return Err(Error::Input(format!("expected {m} prices, found {}", prices.len())));
        }
        if prices.iter().any(|p| p.is_negative()) {
            return Err(Error::Input("negative price".into()));
        }
        let mut best: Option<(Value, Vec<usize>)> = None;
        for c in &clauses {
            let mut profit = Value::zero();
            let mut pick = Vec::new();
            for (j, (cv, p)) in c.iter().zip(prices).enumerate() {
                if cv > p {
                    profit += cv - p;
                    pick.push(j);
                }
            }
            let better = match &best {
                None => true,
                Some((bp, bs)) => profit > *bp || (profit == *bp && pick < *bs),
            };
            if better {
                best = Some((profit, pick));
            }
        }
        Ok(Bundle::new(best.map(|(_, s)| s).unwrap_or_default()))
    }

    /// Contributions of the bundle's items under the clause maximizing its value
    /// (lowest clause index on ties).
    pub fn xos_witness(&self, bundle: &Bundle) -> Result<Vec<(usize, Value)>> {
        let clauses = self
            .clauses()
            .ok_or_else(|| Error::Unsupported("xos witness needs an additive or xos-explicit valuation".into()))?;
        let m = self.ground_size();
        if let Some(bad) = bundle.iter().find(|&j| j >= m) {
            return Err(Error::Input(format!("item {bad} outside ground set of size {m}")));
        }
        let mut best: Option<(Value, usize)> = None;
        for (ci, c) in clauses.iter().enumerate() {
            let s: Value = bundle.iter().map(|j| &c[j]).sum();
            if best.as_ref().is_none_or(|(bv, _)| s > *bv) {
                best = Some((s, ci));
            }
        }
        let ci = best.map_or(0, |(_, ci)| ci);
        Ok(bundle.iter().map(|j| (j, clauses[ci][j].clone())).collect())
    }

    /// Values of every subset of `items`, indexed by bitmask over `items`.
    pub fn subset_table(&self, items: &[usize]) -> Vec<Value> {
        let k = items.len();
        assert!(k < 31, "subset table over {k} items is too large");
        if let Some(vals) = self.additive_values() {
            let mut t = vec![Value::zero(); 1 << k];
            for mask in 1usize..1 << k {
                let low = mask.trailing_zeros() as usize;
                t[mask] = &t[mask & (mask - 1)] + &vals[items[low]];
            }
            return t;
        }
        let mut buf = Vec::with_capacity(k);
        (0usize..1 << k)
            .map(|mask| {
                buf.clear();
                buf.extend((0..k).filter(|b| mask >> b & 1 == 1).map(|b| items[b]));
                self.value(&buf)
            })
            .collect()
    }

    /// Exhaustively decides membership in `class` over the full ground set.
    pub fn check_class(&self, class: Class) -> Result<bool> {
        let m = self.ground_size();
        if m > CHECK_CLASS_MAX_M {
            return Err(Error::Capacity(format!("check_class needs m <= {CHECK_CLASS_MAX_M}, got {m}")));
        }
        let items: Vec<usize> = (0..m).collect();
        let table = self.subset_table(&items);
        match class {
            Class::Xos => {
                let family = self
                    .xos_family()
                    .ok_or_else(|| Error::Unsupported("xos membership is only decidable for clause-backed kinds".into()))?;
                Ok(table_is_max_of(&table, &family, m))
            }
            _ => {
                let t = IntTable::new(&table);
                Ok(match class {
                    Class::Monotone => t.monotone(m),
                    Class::Additive => t.additive(m),
                    Class::Submodular => t.submodular(m),
                    Class::Subadditive => t.subadditive(m),
                    Class::Xos => unreachable!(),
                })
            }
        }
    }

    /// A finite additive family that should have this valuation as its
    /// pointwise maximum. For a ceiling over clauses, every set S contributes
    /// its witness clause restricted to S and shrunk by `min(1, cap/value(S))`.
    fn xos_family(&self) -> Option<Vec<Vec<Value>>> {
        if let Some(cs) = self.clauses() {
            return Some(cs);
        }
        match self {
            Valuation::Ceiling { cap, inner } => {
                let m = self.ground_size();
                if m > 10 {
                    return None;
                }
                let cs = inner.xos_family()?;
                let mut family = Vec::with_capacity(1 << m);
                for mask in 0usize..1 << m {
                    let s: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).collect();
                    let (best_v, best_c) = cs
                        .iter()
                        .map(|c| (s.iter().map(|&j| &c[j]).sum::<Value>(), c))
                        .fold(None::<(Value, &Vec<Value>)>, |acc, (v, c)| match acc {
                            Some((bv, bc)) if bv >= v => Some((bv, bc)),
                            _ => Some((v, c)),
                        })?;
                    let shrink = if best_v > *cap { cap / &best_v } else { Value::one() };
                    family.push(
                        (0..m)
                            .map(|j| if mask >> j & 1 == 1 { &best_c[j] * &shrink } else { Value::zero() })
                            .collect(),
                    );
                }
                Some(family)
            }
            Valuation::Scaled { factor, inner } => inner
                .xos_family()
                .map(|cs| cs.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect()),
            _ => None,
        }
    }
}

fn table_is_max_of(table: &[Value], family: &[Vec<Value>], m: usize) -> bool {
    if family.iter().flatten().any(|v| v.is_negative()) {
        return false;
    }
    (0usize..1 << m).all(|mask| {
        let best = family
            .iter()
            .map(|c| (0..m).filter(|b| mask >> b & 1 == 1).map(|b| &c[b]).sum::<Value>())
            .max()
            .unwrap_or_else(Value::zero);
        best == table[mask]
    })
}

/// A value table over a common denominator, in machine integers when they fit.
enum IntTable {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl IntTable {
    fn new(table: &[Value]) -> Self {
        let mut l = BigInt::one();
        for v in table {
            l = l.lcm(v.denom());
        }
        let big: Vec<BigInt> = table.iter().map(|v| v.numer() * (&l / v.denom())).collect();
        let bound = BigInt::from(i128::MAX / 4);
        if big.iter().all(|b| b.magnitude() <= bound.magnitude()) {
            IntTable::Small(big.iter().map(|b| b.to_i128().unwrap()).collect())
        } else {
            IntTable::Big(big)
        }
    }

    fn monotone(&self, m: usize) -> bool {
        match self {
            IntTable::Small(t) => monotone_in(t, m),
            IntTable::Big(t) => monotone_in(t, m),
        }
    }

    fn additive(&self, m: usize) -> bool {
        match self {
            IntTable::Small(t) => additive_in(t, m),
            IntTable::Big(t) => additive_in(t, m),
        }
    }

    fn submodular(&self, m: usize) -> bool {
        match self {
            IntTable::Small(t) => submodular_in(t, m),
            IntTable::Big(t) => submodular_in(t, m),
        }
    }

    fn subadditive(&self, m: usize) -> bool {
        match self {
            IntTable::Small(t) => subadditive_in(t, m),
            IntTable::Big(t) => subadditive_in(t, m),
        }
    }
}

trait Num: Clone + Ord + std::ops::Add<Output = Self> {}
impl Num for i128 {}
impl Num for BigInt {}

fn monotone_in<T: Num>(t: &[T], m: usize) -> bool {
    (0usize..1 << m).all(|s| (0..m).all(|j| s >> j & 1 == 1 || t[s | 1 << j] >= t[s]))
}

fn additive_in<T: Num>(t: &[T], m: usize) -> bool {
    t[0] == t[0].clone() + t[0].clone()
        && (1usize..1 << m).all(|s| {
            let low = s & s.wrapping_neg();
            t[s] == t[s ^ low].clone() + t[low].clone()
        })
}

/// Local form: f(S+i) + f(S+j) >= f(S+i+j) + f(S) for all S and i, j outside S.
fn submodular_in<T: Num>(t: &[T], m: usize) -> bool {
    (0usize..1 << m).all(|s| {
        (0..m).filter(|i| s >> i & 1 == 0).all(|i| {
            (i + 1..m)
                .filter(|j| s >> j & 1 == 0)
                .all(|j| t[s | 1 << i].clone() + t[s | 1 << j].clone() >= t[s | 1 << i | 1 << j].clone() + t[s].clone())
        })
    })
}

fn subadditive_in<T: Num>(t: &[T], m: usize) -> bool {
    let full = (1usize << m) - 1;
    (0usize..=full).all(|a| (0usize..=full).all(|b| t[a].clone() + t[b].clone() >= t[a | b]))
}
