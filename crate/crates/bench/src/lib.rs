//! Inputs shared by the criterion benchmarks in `benches/`.

use std::f64::consts::PI;

use elastic_graphs::curve::Curve;
use elastic_graphs::GraphShape;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth planar curve starting at `origin`.
pub fn curve(rng: &mut ChaCha8Rng, samples: usize, origin: [f64; 2]) -> Curve {
    let heading = rng.random_range(-PI..PI);
    let bend: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
    let (s, c) = heading.sin_cos();
    Curve::sample(samples, move |t| {
        let y = bend[0] * (PI * t).sin() + bend[1] * (2.0 * PI * t).sin() + bend[2] * t * t;
        [origin[0] + c * t - s * y, origin[1] + s * t + c * y]
    })
    .unwrap()
}

/// Random graph on `n` nodes with edge probability `p`.
pub fn graph(rng: &mut ChaCha8Rng, n: usize, p: f64, samples: usize) -> GraphShape {
    let mut g = GraphShape::new(n, 2, samples).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                let c = curve(rng, samples, [i as f64, j as f64]);
                g.insert_curve(i, j, &c).unwrap();
            }
        }
    }
    g
}
