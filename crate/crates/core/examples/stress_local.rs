use mms_core::generate::{generate, GenKind};
use mms_core::submodular::solve_submodular;
use mms_core::verify::{verify, MmsSource};
use mms_core::xos::solve_xos_eighth;
use mms_core::Value;

fn main() {
    let seeds: u64 = std::env::args().nth(1).map_or(20, |a| a.parse().unwrap());
    let t = std::time::Instant::now();
    let (mut runs, mut fails, mut max_retries, mut max_steps_ratio) = (0, 0, 0, 0.0f64);
    for kind in [GenKind::Coverage, GenKind::BudgetAdditive, GenKind::KDemand, GenKind::XosClauses] {
        for seed in 0..seeds {
            let n = 2 + (seed % 3) as usize;
            let m = n + 2 + (seed as usize * 7) % (13 - n - 2);
            let inst = generate(kind, n, m, seed).unwrap();
            let (d, alpha) = if kind == GenKind::XosClauses {
                (solve_xos_eighth(&inst), Value::ratio(1, 8))
            } else {
                (solve_submodular(&inst), Value::ratio(1, 3))
            };
            runs += 1;
            match d {
                Ok(d) => {
                    let r = verify(&inst, &d.solved.allocation, &alpha, &MmsSource::Exact).unwrap();
                    max_retries = max_retries.max(d.retries);
                    max_steps_ratio = max_steps_ratio.max(d.solved.steps as f64 / (2 * n * m) as f64);
                    if !r.pass {
                        fails += 1;
                        println!("{kind} n={n} m={m} seed={seed}: min ratio {}", r.min_ratio);
                    }
                }
                Err(e) => {
                    fails += 1;
                    println!("{kind} n={n} m={m} seed={seed}: {e}");
                }
            }
        }
    }
    println!("runs {runs} fails {fails} max retries {max_retries} max steps/2nm {max_steps_ratio:.3} in {:?}", t.elapsed());
}
