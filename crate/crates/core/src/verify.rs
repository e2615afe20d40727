//! Exact α-MMS checking of an allocation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance};
use crate::mms::mms_all;
use crate::value::Value;

/// Where the maximin shares come from.
#[derive(Clone, Debug)]
pub enum MmsSource {
    /// Computed exactly with `n` parts over all items.
    Exact,
    /// Supplied by the caller, one per agent.
    Provided(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentReport {
    pub value: Value,
    pub mms: Value,
    pub ratio: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifierReport {
    pub agents: Vec<AgentReport>,
    pub min_ratio: Value,
    pub alpha: Value,
    pub pass: bool,
}

/// Ratio of every agent's bundle value to its share; a zero share counts as
/// ratio 1. Fails with [`Error::Structural`] if the allocation is invalid.
pub fn verify(inst: &Instance, alloc: &Allocation, alpha: &Value, source: &MmsSource) -> Result<VerifierReport> {
    alloc.validate(inst.n, inst.m)?;
    let mms = match source {
        MmsSource::Exact => mms_all(inst, inst.n)?.into_iter().map(|r| r.value).collect(),
        MmsSource::Provided(v) if v.len() == inst.n => v.clone(),
        MmsSource::Provided(v) => {
            return Err(Error::Input(format!("expected {} shares, got {}", inst.n, v.len())));
        }
    };
    let agents: Vec<AgentReport> = mms
        .into_iter()
        .enumerate()
        .map(|(i, mms)| {
            let value = inst.value_of(i, &alloc.bundles[i]);
            let ratio = if mms.is_zero() { Value::one() } else { &value / &mms };
            AgentReport { value, mms, ratio }
        })
        .collect();
    let min_ratio = agents.iter().map(|a| a.ratio.clone()).min().unwrap_or_else(Value::one);
    Ok(VerifierReport { pass: min_ratio >= *alpha, agents, min_ratio, alpha: alpha.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Bundle;
    use crate::valuation::Valuation;

    fn alloc(b: &[&[usize]]) -> Allocation {
        Allocation { bundles: b.iter().map(|x| Bundle::new(x.to_vec())).collect() }
    }

    #[test]
    fn single_agent_ratio_one() {
        let inst = Instance::new(3, vec![Valuation::additive_ints(&[1, 2, 3])]).unwrap();
        let r = verify(&inst, &alloc(&[&[0, 1, 2]]), &Value::one(), &MmsSource::Exact).unwrap();
        assert_eq!(r.min_ratio, Value::one());
        assert!(r.pass);
    }

    #[test]
    fn three_quarter_split() {
        let row = Valuation::additive_ints(&[3, 2, 2, 1]);
        let inst = Instance::new(4, vec![row.clone(), row]).unwrap();
        let r = verify(&inst, &alloc(&[&[0], &[1, 2, 3]]), &Value::ratio(3, 4), &MmsSource::Exact).unwrap();
        assert_eq!(r.agents[0].mms, Value::int(4));
        assert_eq!(r.agents[0].ratio, Value::ratio(3, 4));
        assert_eq!(r.agents[1].ratio, Value::ratio(5, 4));
        assert_eq!(r.min_ratio, Value::ratio(3, 4));
        assert!(r.pass);
        let r = verify(&inst, &alloc(&[&[0], &[1, 2, 3]]), &Value::ratio(4, 5), &MmsSource::Exact).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn missing_item_is_structural() {
        let inst = Instance::new(3, vec![Valuation::additive_ints(&[1, 1, 1])]).unwrap();
        let err = verify(&inst, &alloc(&[&[0, 1]]), &Value::one(), &MmsSource::Exact).unwrap_err();
        assert!(matches!(err, Error::Structural(ref p) if p[0].contains("item 2")));
    }

    #[test]
    fn zero_share_counts_as_one() {
        let inst = Instance::new(2, vec![Valuation::additive_ints(&[1, 0]), Valuation::additive_ints(&[0, 0])]).unwrap();
        let r = verify(&inst, &alloc(&[&[0, 1], &[]]), &Value::one(), &MmsSource::Exact).unwrap();
        assert_eq!(r.agents[1].ratio, Value::one());
    }

    #[test]
    fn provided_shares() {
        let inst = Instance::new(2, vec![Valuation::additive_ints(&[2, 2])]).unwrap();
        let r = verify(&inst, &alloc(&[&[0, 1]]), &Value::one(), &MmsSource::Provided(vec![Value::int(8)])).unwrap();
        assert_eq!(r.min_ratio, Value::ratio(1, 2));
        assert!(verify(&inst, &alloc(&[&[0, 1]]), &Value::one(), &MmsSource::Provided(vec![])).is_err());
    }
}
