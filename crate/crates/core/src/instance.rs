use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuation::Valuation;
use crate::value::Value;

/// A sorted, duplicate-free set of item ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(Vec<usize>);

impl Bundle {
    pub fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        Bundle(items)
    }

    pub fn empty() -> Self {
        Bundle(Vec::new())
    }

    pub fn range(m: usize) -> Self {
        Bundle((0..m).collect())
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn into_items(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn insert(&mut self, item: usize) {
        if let Err(pos) = self.0.binary_search(&item) {
            self.0.insert(pos, item);
        }
    }

    pub fn remove(&mut self, item: usize) -> bool {
        match self.0.binary_search(&item) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Bundle::new(v)
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        Bundle(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.0.iter().all(|&x| !other.contains(x))
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    /// Items of `self` selected by the low bits of `mask` (bit k = `items()[k]`).
    pub fn select(&self, mask: u64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &x)| x)
            .collect()
    }
}

impl From<Vec<usize>> for Bundle {
    fn from(v: Vec<usize>) -> Self {
        Bundle::new(v)
    }
}

impl FromIterator<usize> for Bundle {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Bundle::new(iter.into_iter().collect())
    }
}

/// One bundle per agent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation { bundles: vec![Bundle::empty(); n] }
    }

    /// Checks disjointness and full coverage of `0..m`, listing every offender.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let mut problems = Vec::new();
        if self.bundles.len() != n {
            problems.push(format!("expected {n} bundles, found {}", self.bundles.len()));
        }
        let mut owner: Vec<Option<usize>> = vec![None; m];
        for (agent, bundle) in self.bundles.iter().enumerate() {
            for item in bundle.iter() {
                if item >= m {
                    problems.push(format!("agent {agent} holds out-of-range item {item}"));
                    continue;
                }
                match owner[item] {
                    Some(prev) => problems.push(format!("item {item} given to agents {prev} and {agent}")),
                    None => owner[item] = Some(agent),
                }
            }
        }
        for (item, o) in owner.iter().enumerate() {
            if o.is_none() {
                problems.push(format!("item {item} unallocated"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Structural(problems))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("allocation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A fair allocation problem: `n` agents, items `0..m`, one valuation per agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(m: usize, valuations: Vec<Valuation>) -> Result<Self> {
        let mut inst = Instance { n: valuations.len(), m, valuations };
        inst.bind()?;
        Ok(inst)
    }

    /// Attaches the ground-set size to kinds that need it and checks shapes.
    fn bind(&mut self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Input("instance needs at least one agent".into()));
        }
        if self.valuations.len() != self.n {
            return Err(Error::Input(format!(
                "n = {} but {} valuations given",
                self.n,
                self.valuations.len()
            )));
        }
        for (i, v) in self.valuations.iter_mut().enumerate() {
            v.bind_ground(self.m);
            v.validate(self.m).map_err(|e| match e {
                Error::Input(msg) => Error::Input(format!("agent {i}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut inst: Instance = serde_json::from_str(s)?;
        inst.bind()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn items(&self) -> Bundle {
        Bundle::range(self.m)
    }

    /// V_agent(items); ids are assumed in range.
    pub fn value(&self, agent: usize, items: &[usize]) -> Value {
        self.valuations[agent].value(items)
    }

    pub fn value_of(&self, agent: usize, bundle: &Bundle) -> Value {
        self.valuations[agent].value(bundle.items())
    }

    pub fn item_value(&self, agent: usize, item: usize) -> Value {
        self.valuations[agent].value(&[item])
    }

    pub fn is_additive_kind(&self) -> bool {
        self.valuations.iter().all(|v| v.additive_values().is_some())
    }
}

/// Surviving agents and items after some agents were satisfied and removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubInstance {
    pub agents: Vec<usize>,
    pub items: Bundle,
}

impl SubInstance {
    pub fn whole(inst: &Instance) -> Self {
        SubInstance { agents: (0..inst.n).collect(), items: inst.items() }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }
}

/// Items of `0..m` not present in any bundle.
pub fn unallocated(m: usize, bundles: &[Bundle]) -> Bundle {
    let used: BTreeSet<usize> = bundles.iter().flat_map(|b| b.iter()).collect();
    (0..m).filter(|x| !used.contains(x)).collect()
}
