//! 1/3-MMS local search for submodular agents.
//!
//! After scaling by the estimates and reducing singletons worth 1/3, items
//! are dealt round-robin. While some agent is below 1/3, the poorest agent
//! takes the first item whose move raises the 2/3-capped welfare by at least
//! `1/(3m)`, where `m` counts the items left after reduction.

use crate::error::{Error, Result};
use crate::instance::{Bundle, Instance};
use crate::potential::{estimate_descent, Descent, Search};
use crate::solver::Solved;
use crate::valuation::{Class, Valuation};
use crate::value::Value;

const CHECK_MAX_M: usize = 10;

fn known_submodular(v: &Valuation) -> bool {
    match v {
        Valuation::Additive { .. }
        | Valuation::KDemand { .. }
        | Valuation::BudgetAdditive { .. }
        | Valuation::Coverage { .. }
        | Valuation::PaperF { .. } => true,
        Valuation::XosExplicit { clauses } => clauses.len() == 1,
        Valuation::Ceiling { inner, .. } | Valuation::Scaled { inner, .. } => known_submodular(inner),
        Valuation::Tabulated { .. } | Valuation::PaperG { .. } => false,
    }
}

/// Accepts kinds that are submodular by construction and checks the rest
/// exhaustively on small ground sets.
pub fn ensure_submodular(inst: &Instance) -> Result<()> {
    for (i, v) in inst.valuations.iter().enumerate() {
        if known_submodular(v) {
            continue;
        }
        if inst.m > CHECK_MAX_M {
            return Err(Error::Unsupported(format!("cannot confirm agent {i} is submodular with m = {}", inst.m)));
        }
        if !v.check_class(Class::Submodular)? {
            return Err(Error::Precondition(format!("agent {i} is not submodular")));
        }
    }
    Ok(())
}

/// One run against fixed estimates. Fails with [`Error::EstimateTooHigh`]
/// naming the stuck agent when no single item improves the potential enough.
pub fn solve_submodular_third(inst: &Instance, estimates: &[Value]) -> Result<Solved> {
    ensure_submodular(inst)?;
    run(inst, estimates)
}

fn run(inst: &Instance, estimates: &[Value]) -> Result<Solved> {
    let third = Value::ratio(1, 3);
    let mut s = Search::start(inst, estimates, &third, Value::ratio(2, 3))?;
    let m = s.owner.len();
    if m == 0 {
        return match s.agents.first() {
            Some(&a) => Err(Error::EstimateTooHigh { agent: a }),
            None => Ok(s.finish()),
        };
    }
    let step = Value::ratio(1, 3 * m as i64);
    let limit = 2 * s.agents.len() * m;
    while let Some(k) = s.min_slot().filter(|&k| s.values[k] < third) {
        let found = (0..inst.m).filter(|j| s.owner.get(j).is_some_and(|&o| o != k)).find_map(|j| {
            let (gain, changes) = s.preview(k, &Bundle::new(vec![j]));
            (gain >= step).then_some((j, gain, changes))
        });
        let Some((j, gain, changes)) = found else {
            return Err(Error::EstimateTooHigh { agent: s.agents[k] });
        };
        s.commit(k, &Bundle::new(vec![j]), gain, changes)?;
        if s.steps > limit {
            return Err(Error::Guarantee(format!("more than {limit} improving moves")));
        }
    }
    Ok(s.finish())
}

/// 1/3-MMS allocation without knowing the shares, via estimate descent.
pub fn solve_submodular(inst: &Instance) -> Result<Descent> {
    ensure_submodular(inst)?;
    estimate_descent(inst, |d| run(inst, d))
}
