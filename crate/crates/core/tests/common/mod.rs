#![allow(dead_code)]

use std::f64::consts::PI;

use elastic_graphs::curve::Curve;
use elastic_graphs::{GraphShape, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth planar curve from `origin` with a random heading and bend.
pub fn random_curve(rng: &mut ChaCha8Rng, samples: usize, origin: [f64; 2]) -> Curve {
    let heading = rng.random_range(-PI..PI);
    let length = rng.random_range(0.5..1.5);
    let bend: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
    let (s, c) = heading.sin_cos();
    Curve::sample(samples, move |t| {
        let x = length * t;
        let y = bend[0] * (PI * t).sin() + bend[1] * (2.0 * PI * t).sin() + bend[2] * t * t;
        [origin[0] + c * x - s * y, origin[1] + s * x + c * y]
    })
    .unwrap()
}

/// Random graph on `n` nodes; each pair is an edge with probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, samples: usize) -> GraphShape {
    let mut g = GraphShape::new(n, 2, samples).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                let c = random_curve(rng, samples, [i as f64, j as f64]);
                if rng.random_bool(0.5) {
                    g.insert_curve(i, j, &c).unwrap();
                } else {
                    g.insert_curve(j, i, &c).unwrap();
                }
            }
        }
    }
    g
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut m: Vec<usize> = (0..n).collect();
    m.shuffle(rng);
    Permutation::new(m).unwrap()
}

/// Copy of `g` with every edge curve bent slightly.
pub fn jitter(rng: &mut ChaCha8Rng, g: &GraphShape, amount: f64) -> GraphShape {
    let mut out = GraphShape::new(g.node_count(), g.dim(), g.samples())
        .unwrap()
        .with_labels(g.labels().to_vec())
        .unwrap();
    for (i, j, e) in g.edges() {
        let c = e.curve();
        let a = rng.random_range(-amount..amount);
        let b = rng.random_range(-amount..amount);
        let last = (c.len() - 1) as f64;
        let rows: Vec<Vec<f64>> = c
            .points()
            .enumerate()
            .map(|(k, p)| {
                let t = k as f64 / last;
                vec![p[0] + a * (PI * t).sin(), p[1] + b * (PI * t).sin()]
            })
            .collect();
        out.insert_curve(i, j, &Curve::from_rows(&rows).unwrap()).unwrap();
    }
    out
}
