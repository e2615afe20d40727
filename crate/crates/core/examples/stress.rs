use mms_core::additive::{exact_mms, solve_half_with, solve_threequarters_with, solve_twothirds_with, Options};
use mms_core::generate::{generate, GenKind};
use mms_core::Value;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let seeds = args.first().copied().unwrap_or(200);
    let mut fails = [0usize; 3];
    let mut runs = 0;
    for kind in [GenKind::UniformAdditive, GenKind::CorrelatedAdditive] {
        for n in 2..=5usize {
            for m in n..=(2 * n + 4).min(12) {
                for seed in 0..seeds {
                    let inst = generate(kind, n, m, seed).unwrap();
                    let mms = exact_mms(&inst).unwrap();
                    runs += 1;
                    let results = [
                        (Value::ratio(1, 2), solve_half_with(&inst, &mms).map(|s| s.allocation)),
                        (Value::ratio(2, 3), solve_twothirds_with(&inst, &mms).map(|s| s.allocation)),
                        (
                            Value::ratio(3, 4),
                            solve_threequarters_with(&inst, &mms, Options { check_lemmas: true }).map(|s| s.allocation),
                        ),
                    ];
                    for (k, (alpha, r)) in results.into_iter().enumerate() {
                        match r {
                            Ok(a) => {
                                a.validate(n, m).unwrap();
                                for i in 0..n {
                                    if inst.value_of(i, &a.bundles[i]) < &alpha * &mms[i] {
                                        fails[k] += 1;
                                        println!("{kind} n={n} m={m} seed={seed} alpha={alpha}: agent {i} short");
                                    }
                                }
                            }
                            Err(e) => {
                                fails[k] += 1;
                                println!("{kind} n={n} m={m} seed={seed} alpha={alpha}: {e}");
                            }
                        }
                    }
                }
            }
        }
    }
    println!("runs {runs} fails half={} twothirds={} threequarters={}", fails[0], fails[1], fails[2]);
}
