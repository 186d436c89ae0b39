use causal_core::ot::{empirical_distance, BaseDistanceConfig};
use causal_core::scm::{SampleMatrix, VariableDomain};
use causal_core::rng::Rng;
use std::time::Instant;

fn main() {
    let mut rng = Rng::new(5);
    let d = 5;
    let n = 2000;
    let gen = |rng: &mut Rng, p: f64| -> SampleMatrix {
        let v: Vec<f64> = (0..n * d)
            .map(|_| if rng.uniform() < p { 1.0 } else { 0.0 })
            .collect();
        SampleMatrix::from_rows(v, n, d)
    };
    let x = gen(&mut rng, 0.5);
    let y = gen(&mut rng, 0.6);
    let domains = vec![VariableDomain::discrete(&["a", "b"]); d];
    let t = Instant::now();
    let v = empirical_distance(&x, &y, &domains, &BaseDistanceConfig::w2().with_cap(2000)).unwrap();
    println!("discrete n=2000 d=5: {:?}, value {v:.4}", t.elapsed());
}
