use std::collections::BTreeMap;

use mms_core::four::split_three;
use mms_core::mms::mms_exact;
use mms_core::{Bundle, Instance, Valuation, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20000);
    let mut routes = BTreeMap::new();
    let mut errors = 0;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(6..=12);
        let row: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=30)).collect();
        let inst = Instance::new(m, vec![Valuation::additive_ints(&row)]).unwrap();
        let own = mms_exact(&inst.valuations[0], 4, &inst.items()).unwrap();
        if own.value.is_zero() || row.iter().any(|&x| Value::int(x) * Value::int(5) >= &own.value * Value::int(4)) {
            continue;
        }
        let mut parts = vec![Vec::new(); 4];
        for j in 0..m {
            parts[rng.gen_range(0..4)].push(j);
        }
        let parts: Vec<Bundle> = parts.into_iter().map(Bundle::new).collect();
        match split_three(&inst, std::slice::from_ref(&own.value), 0, &parts, &own.witness) {
            Ok(s) => *routes.entry(format!("{:?}{}", s.route, if s.transferred { "+t" } else { "" })).or_insert(0) += 1,
            Err(e) => {
                errors += 1;
                if errors < 5 {
                    println!("seed {seed}: {e}");
                }
            }
        }
    }
    println!("errors {errors} routes {routes:?}");
}
