//! Fixed instance sets shared by the benchmarks.

use mms_core::generate::{generate, GenKind};
use mms_core::{Instance, Result};

/// `count` instances of one generator, seeded `0..count`.
pub fn corpus(kind: GenKind, n: usize, m: usize, count: u64) -> Result<Vec<Instance>> {
    (0..count).map(|seed| generate(kind, n, m, seed)).collect()
}
