//! Satisfy agents with single items (or pairs) when doing so cannot lower the
//! maximin share of anyone left behind.

use crate::instance::{Bundle, Instance, SubInstance};
use crate::value::Value;

/// Agents satisfied by a reduction and what remains to be solved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub satisfied: Vec<(usize, Bundle)>,
    pub remainder: SubInstance,
}

/// Repeatedly hands any item worth at least `alpha * mms[i]` to agent `i`
/// (lowest agent, then lowest item first) and removes both.
///
/// `mms` is indexed by agent id.
pub fn reduce_singletons(inst: &Instance, start: &SubInstance, alpha: &Value, mms: &[Value]) -> Reduction {
    let mut agents = start.agents.clone();
    let mut items = start.items.clone();
    let mut satisfied = Vec::new();
    'outer: loop {
        for (pos, &i) in agents.iter().enumerate() {
            let threshold = alpha * &mms[i];
            let hit = items.iter().find(|&j| inst.item_value(i, j) >= threshold);
            if let Some(j) = hit {
                satisfied.push((i, Bundle::new(vec![j])));
                items.remove(j);
                agents.remove(pos);
                continue 'outer;
            }
        }
        break;
    }
    Reduction { satisfied, remainder: SubInstance { agents, items } }
}

/// Whether giving `pairs[a]` to `agents[a]` is a valid pair reduction among
/// the `live` agents: the pairs are disjoint, each recipient values its pair
/// at least `alpha * mms`, and every other live agent values every pair at
/// most its own `mms`. Empty input is never a reduction.
pub fn check_pair_invariant(
    inst: &Instance,
    live: &[usize],
    agents: &[usize],
    pairs: &[(usize, usize)],
    mms: &[Value],
    alpha: &Value,
) -> bool {
    if agents.is_empty() || agents.len() != pairs.len() {
        return false;
    }
    let mut seen: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    seen.sort_unstable();
    let distinct = seen.windows(2).all(|w| w[0] != w[1]);
    if !distinct {
        return false;
    }
    let recipients_ok = agents
        .iter()
        .zip(pairs)
        .all(|(&i, &(a, b))| inst.value(i, &[a.min(b), a.max(b)]) >= alpha * &mms[i]);
    let others_ok = live.iter().filter(|i| !agents.contains(i)).all(|&i| {
        pairs.iter().all(|&(a, b)| inst.value(i, &[a.min(b), a.max(b)]) <= mms[i])
    });
    recipients_ok && others_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    fn inst(rows: &[&[i64]]) -> Instance {
        Instance::new(rows[0].len(), rows.iter().map(|r| Valuation::additive_ints(r)).collect()).unwrap()
    }

    #[test]
    fn removes_an_item_meeting_the_threshold_exactly() {
        let i = inst(&[&[3, 1, 0, 0]]);
        let r = reduce_singletons(&i, &SubInstance::whole(&i), &Value::ratio(3, 4), &[Value::int(4)]);
        assert_eq!(r.satisfied, vec![(0, Bundle::new(vec![0]))]);
        assert!(r.remainder.agents.is_empty());
    }

    #[test]
    fn no_reduction_when_everything_is_small() {
        let i = inst(&[&[1, 1, 1, 1], &[1, 1, 1, 1]]);
        let whole = SubInstance::whole(&i);
        let r = reduce_singletons(&i, &whole, &Value::ratio(3, 4), &[Value::int(2), Value::int(2)]);
        assert!(r.satisfied.is_empty());
        assert_eq!(r.remainder, whole);
    }

    #[test]
    fn heavy_item_goes_to_its_agent() {
        // MMS of (9,1,1,1) over two parts is 3.
        let i = inst(&[&[9, 1, 1, 1], &[1, 1, 1, 1]]);
        let r = reduce_singletons(&i, &SubInstance::whole(&i), &Value::ratio(3, 4), &[Value::int(3), Value::int(2)]);
        assert_eq!(r.satisfied, vec![(0, Bundle::new(vec![0]))]);
        assert_eq!(r.remainder.agents, vec![1]);
        assert_eq!(r.remainder.items, Bundle::new(vec![1, 2, 3]));
    }

    #[test]
    fn pair_invariant_examples() {
        let alpha = Value::ratio(3, 4);
        let mms = [Value::one(), Value::one()];
        let ok = Instance::new(
            2,
            vec![
                Valuation::additive(vec![Value::ratio(1, 2), Value::ratio(1, 4)]),
                Valuation::additive(vec![Value::ratio(1, 2), Value::ratio(1, 2)]),
            ],
        )
        .unwrap();
        assert!(check_pair_invariant(&ok, &[0, 1], &[0], &[(0, 1)], &mms, &alpha));
        assert!(!check_pair_invariant(&ok, &[0, 1], &[], &[], &mms, &alpha));
        let bad = Instance::new(
            2,
            vec![
                Valuation::additive(vec![Value::ratio(1, 2), Value::ratio(1, 4)]),
                Valuation::additive(vec![Value::ratio(5, 8), Value::ratio(1, 2)]),
            ],
        )
        .unwrap();
        assert!(!check_pair_invariant(&bad, &[0, 1], &[0], &[(0, 1)], &mms, &alpha));
    }
}
