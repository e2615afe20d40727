use std::collections::BTreeMap;
use std::time::Instant;

use mms_core::four::{solve_four, split_three};
use mms_core::generate::{generate, GenKind};
use mms_core::mms::mms_exact;
use mms_core::verify::{verify, MmsSource};
use mms_core::{Instance, Valuation, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let mut paths = BTreeMap::new();
    let mut routes = BTreeMap::new();
    let mut fails = 0;
    let t = Instant::now();
    for seed in 0..count {
        let kind = [GenKind::UniformAdditive, GenKind::CorrelatedAdditive][seed as usize % 2];
        let m = 4 + (seed as usize * 7) % 11;
        let inst = if seed % 3 == 2 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(8..=13);
            let lo = rng.gen_range(1..=20);
            let rows: Vec<Vec<i64>> = (0..4).map(|_| (0..m).map(|_| rng.gen_range(lo..=40)).collect()).collect();
            Instance::new(m, rows.iter().map(|r| Valuation::additive_ints(r)).collect()).unwrap()
        } else {
            generate(kind, 4, m, seed).unwrap()
        };
        let out = solve_four(&inst).unwrap();
        let r = verify(&inst, &out.solved.allocation, &Value::ratio(4, 5), &MmsSource::Exact).unwrap();
        if !r.pass {
            fails += 1;
            println!("FAIL seed {seed} m={}", inst.m);
        }
        *paths.entry(format!("{:?}", out.path)).or_insert(0) += 1;
        if let Some(s) = &out.split {
            *routes.entry(format!("{:?}{}", s.route, if s.transferred { "+t" } else { "" })).or_insert(0) += 1;
        }
        // split of agent 1 against agent 0's partition on the unreduced instance
        let mms = mms_core::additive::exact_mms(&inst).unwrap();
        if mms.iter().all(|x| x.is_positive()) {
            let p = mms_exact(&inst.valuations[0], 4, &inst.items()).unwrap().witness;
            let own = mms_exact(&inst.valuations[1], 4, &inst.items()).unwrap().witness;
            match split_three(&inst, &mms, 1, &p, &own) {
                Ok(s) => *routes.entry(format!("raw {:?}{}", s.route, if s.transferred { "+t" } else { "" })).or_insert(0) += 1,
                Err(e) => println!("split seed {seed}: {e}"),
            }
        }
    }
    println!("fails {fails} paths {paths:?}\nroutes {routes:?}\n{:?}", t.elapsed());
}
