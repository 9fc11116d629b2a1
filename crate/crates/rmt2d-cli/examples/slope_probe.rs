use rmt2d::ensembles::ClassTag;
use rmt2d::harness::{run, ExperimentConfig, SpectraRetention};

fn main() {
    for (n, samples, seed) in [(256usize, 2000u64, 20_240_005u64), (256, 2000, 77), (384, 1500, 11), (512, 1200, 12)] {
        let mut c = ExperimentConfig::new(ClassTag::AiDag, n, samples, seed);
        c.retention = SpectraRetention::InMemory;
        let out = run(&c).unwrap();
        for fit in [0.2f64, 0.3, 0.4] {
            let b = out.bulk.small_s_exponent(fit);
            let e = out.edge.small_s_exponent(fit);
            let fmt = |r: &Result<(f64, f64, f64), _>| match r {
                Ok((s, _, se)) => format!("{s:.3}+-{se:.3}"),
                Err(_) => "n/a".into(),
            };
            println!("AI n={n} samp={samples} seed={seed} fit<{fit}: bulk {} edge {}", fmt(&b), fmt(&e));
        }
    }
}
