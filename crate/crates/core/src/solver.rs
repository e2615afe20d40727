//! Algorithm selection and the common solver output.

use std::fmt;
use std::str::FromStr;

use crate::additive::{exact_mms, solve_half_with, solve_threequarters_with, solve_twothirds_with, Options};
use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance};
use crate::value::Value;

/// An allocation plus counters describing how it was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solved {
    pub allocation: Allocation,
    /// Improving moves, reductions or rounds, depending on the solver.
    pub steps: usize,
    /// Potential gain of each accepted move, where the solver has a potential.
    pub gains: Vec<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Half,
    TwoThirds,
    ThreeQuarters,
    SubmodularThird,
    XosEighth,
    FourAgents,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Half,
        Algorithm::TwoThirds,
        Algorithm::ThreeQuarters,
        Algorithm::SubmodularThird,
        Algorithm::XosEighth,
        Algorithm::FourAgents,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Half => "half",
            Algorithm::TwoThirds => "twothirds",
            Algorithm::ThreeQuarters => "threequarters",
            Algorithm::SubmodularThird => "submodular-third",
            Algorithm::XosEighth => "xos-eighth",
            Algorithm::FourAgents => "four-agents",
        }
    }

    /// The fraction of the maximin share every agent is guaranteed.
    pub fn alpha(self) -> Value {
        match self {
            Algorithm::Half => Value::ratio(1, 2),
            Algorithm::TwoThirds => Value::ratio(2, 3),
            Algorithm::ThreeQuarters => Value::ratio(3, 4),
            Algorithm::SubmodularThird => Value::ratio(1, 3),
            Algorithm::XosEighth => Value::ratio(1, 8),
            Algorithm::FourAgents => Value::ratio(4, 5),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown algorithm {s:?}")))
    }
}

/// Runs `alg` on `inst`. Additive solvers compute exact shares first; the
/// submodular and XOS solvers find them by estimate descent.
pub fn solve(inst: &Instance, alg: Algorithm) -> Result<Solved> {
    match alg {
        Algorithm::Half => solve_half_with(inst, &exact_mms(inst)?),
        Algorithm::TwoThirds => solve_twothirds_with(inst, &exact_mms(inst)?),
        Algorithm::ThreeQuarters => solve_threequarters_with(inst, &exact_mms(inst)?, Options::default()),
        Algorithm::SubmodularThird => Ok(crate::submodular::solve_submodular(inst)?.solved),
        Algorithm::XosEighth => Ok(crate::xos::solve_xos_eighth(inst)?.solved),
        Algorithm::FourAgents => Ok(crate::four::solve_four(inst)?.solved),
    }
}
